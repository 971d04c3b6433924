#![allow(dead_code)]

use std::sync::Arc;

use harmonic_sections::fields::{PowerProfile, QuadraticFormSpec, VectorFieldSpec};
use harmonic_sections::geometry::ManifoldModel;

pub struct Case {
    pub label: String,
    pub model: ManifoldModel,
    pub field: VectorFieldSpec,
}

fn case(model: ManifoldModel, field: VectorFieldSpec) -> Case {
    Case {
        label: format!("{} / {}", model.name(), field.describe()),
        model,
        field,
    }
}

pub fn sphere(n: usize) -> ManifoldModel {
    ManifoldModel::sphere(n).unwrap()
}

/// Every field family on every model it lives on.
pub fn catalog() -> Vec<Case> {
    let s2 = sphere(2);
    let s3 = sphere(3);
    let s5 = sphere(5);
    let mut out = vec![
        case(s2, VectorFieldSpec::rotation(&[0.0, 0.0, 1.0]).unwrap()),
        case(s2, VectorFieldSpec::rotation(&[1.0, -2.0, 0.5]).unwrap().scaled(0.7)),
        case(s2, VectorFieldSpec::conformal(&[0.3, -0.5, 0.8])),
        case(
            s2,
            VectorFieldSpec::profiled(Arc::new(PowerProfile::inverse_sqrt_for(2.0).unwrap()), &[0.0, 0.0, 1.0]).unwrap(),
        ),
        case(
            s2,
            VectorFieldSpec::quadratic(QuadraticFormSpec::diagonal(&[1.0, 2.0, -0.5]).unwrap(), 1).unwrap(),
        ),
        case(s3, VectorFieldSpec::hopf(1.0).unwrap()),
        case(s3, VectorFieldSpec::hopf(2.0).unwrap()),
        case(s3, VectorFieldSpec::conformal(&[0.0, 0.6, 0.0, 0.8])),
        case(
            s3,
            VectorFieldSpec::quadratic(QuadraticFormSpec::diagonal(&[1.0, 1.0, -1.0, 0.5]).unwrap(), 2).unwrap(),
        ),
        case(
            s3,
            VectorFieldSpec::hopf(0.5).unwrap().plus(VectorFieldSpec::conformal(&[0.1, 0.2, -0.3, 0.4])),
        ),
        case(s5, VectorFieldSpec::hopf(0.5).unwrap()),
        case(s5, VectorFieldSpec::conformal(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0])),
        case(ManifoldModel::SphereCrossLine, VectorFieldSpec::frame(ManifoldModel::SphereCrossLine, 2).unwrap()),
    ];
    for model in [ManifoldModel::Heisenberg3, ManifoldModel::Sl2Universal] {
        for i in 0..3 {
            out.push(case(model, VectorFieldSpec::frame(model, i).unwrap()));
        }
    }
    out
}

/// Random symmetric matrix with entries in [−1, 1].
pub fn random_symmetric(size: usize, rng: &mut impl rand::Rng) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(size, size);
    for i in 0..size {
        for j in i..size {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}
