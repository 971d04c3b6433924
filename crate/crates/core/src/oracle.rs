//! Finite-difference ground truth.
//!
//! These routines only ever evaluate field *values* and the printed metric
//! matrices. Christoffel symbols on the coordinate models are rebuilt here from
//! central differences of the metric, so nothing in this module shares a code
//! path with the closed-form connection in [`crate::geometry`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{AmbientField, ManifoldModel, Point, TangentVector, Vector};

/// Default step for first-order differences.
pub const FD_STEP: f64 = 1e-5;
/// Default step for nested (second-order) differences.
pub const FD_STEP_SECOND: f64 = 1e-4;

pub fn check_step(step: f64) -> Result<()> {
    if !(1e-9..=1e-2).contains(&step) {
        return Err(Error::StepOutOfRange(step));
    }
    Ok(())
}

/// Christoffel symbols Γᵏᵢⱼ from central differences of the metric matrix.
pub fn fd_christoffel(model: ManifoldModel, x: &Vector, h: f64) -> [[[f64; 3]; 3]; 3] {
    let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(3);
    for m in 0..3 {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[m] += h;
        xm[m] -= h;
        dg.push((model.metric_matrix(&xp) - model.metric_matrix(&xm)) / (2.0 * h));
    }
    let ginv = model
        .metric_matrix(x)
        .try_inverse()
        .expect("metric is non-degenerate");
    let mut out = [[[0.0; 3]; 3]; 3];
    for (k, row) in out.iter_mut().enumerate() {
        for (i, col) in row.iter_mut().enumerate() {
            for (j, g) in col.iter_mut().enumerate() {
                let mut s = 0.0;
                for l in 0..3 {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                *g = 0.5 * s;
            }
        }
    }
    out
}

fn apply_gamma(g: &[[[f64; 3]; 3]; 3], a: &Vector, b: &Vector) -> Vector {
    Vector::from_fn(3, |k, _| {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += g[k][i][j] * a[i] * b[j];
            }
        }
        s
    })
}

/// Central-difference covariant derivative ∇_a V of a tangent vector field
/// given only by its values.
pub fn fd_cov_fn(model: ManifoldModel, field: &dyn Fn(&Vector) -> Vector, x: &Vector, a: &Vector, h: f64) -> Vector {
    let xp = model.retract(&(x + a * h));
    let xm = model.retract(&(x - a * h));
    let d = (field(&xp) - field(&xm)) / (2.0 * h);
    if model.is_embedded() {
        model.project(x, &d)
    } else {
        d + apply_gamma(&fd_christoffel(model, x, h), a, &field(x))
    }
}

/// Canonical extension of a fixed vector: Π_x' b on embedded models,
/// constant in charts.
fn extension(model: ManifoldModel, b: &Vector) -> impl Fn(&Vector) -> Vector + '_ {
    move |y: &Vector| model.project(y, b)
}

/// Nested central-difference ∇²_{a,b} V = ∇_a(∇_{Ỹ} V) − ∇_{∇_a Ỹ} V.
pub fn fd_second_fn(
    model: ManifoldModel,
    field: &dyn Fn(&Vector) -> Vector,
    x: &Vector,
    a: &Vector,
    b: &Vector,
    h: f64,
) -> Vector {
    let ext = extension(model, b);
    let w = |y: &Vector| fd_cov_fn(model, field, y, &ext(y), h);
    let nabla_a_w = fd_cov_fn(model, &w, x, a, h);
    let nabla_a_ext = fd_cov_fn(model, &ext, x, a, h);
    nabla_a_w - fd_cov_fn(model, field, x, &nabla_a_ext, h)
}

/// R(a,b)c from the Ricci identity R(a,b)c = ∇²_{a,b}c̃ − ∇²_{b,a}c̃.
pub fn fd_curvature(model: ManifoldModel, x: &Vector, a: &Vector, b: &Vector, c: &Vector, h: f64) -> Vector {
    let ext = extension(model, c);
    fd_second_fn(model, &ext, x, a, b, h) - fd_second_fn(model, &ext, x, b, a, h)
}

/// Directional derivative of a scalar along a curve through x with velocity a.
pub fn fd_directional(model: ManifoldModel, f: &dyn Fn(&Vector) -> f64, x: &Vector, a: &Vector, h: f64) -> f64 {
    let xp = model.retract(&(x + a * h));
    let xm = model.retract(&(x - a * h));
    (f(&xp) - f(&xm)) / (2.0 * h)
}

/// Hess f(a, b) = a(b̃ f) − (∇_a b̃) f by nested differences.
pub fn fd_hessian(model: ManifoldModel, f: &dyn Fn(&Vector) -> f64, x: &Vector, a: &Vector, b: &Vector, h: f64) -> f64 {
    let ext = extension(model, b);
    let bf = |y: &Vector| fd_directional(model, f, y, &ext(y), h);
    let nabla = fd_cov_fn(model, &ext, x, a, h);
    fd_directional(model, &bf, x, a, h) - fd_directional(model, f, x, &nabla, h)
}

/// ∇_X σ by central differences (values of σ only).
pub fn fd_oracle(model: ManifoldModel, field: &dyn AmbientField, x: &Point, dir: &TangentVector, step: f64) -> Result<TangentVector> {
    check_step(step)?;
    field.check_model(model)?;
    if &dir.base != x {
        return Err(Error::MismatchedBase);
    }
    let f = |y: &Vector| field.value(y);
    Ok(x.wrap(fd_cov_fn(model, &f, &x.coords, &dir.comps, step)))
}

/// ∇²_{X,Y} σ by nested central differences (values of σ only).
pub fn fd_oracle_second(
    model: ManifoldModel,
    field: &dyn AmbientField,
    x: &Point,
    a: &TangentVector,
    b: &TangentVector,
    step: f64,
) -> Result<TangentVector> {
    check_step(step)?;
    field.check_model(model)?;
    if &a.base != x || &b.base != x {
        return Err(Error::MismatchedBase);
    }
    let f = |y: &Vector| field.value(y);
    Ok(x.wrap(fd_second_fn(model, &f, &x.coords, &a.comps, &b.comps, step)))
}
