//! The generalised Cheeger–Gromoll metric h_{p,q} on TM.
//!
//! Tangent vectors to TM are stored through their two projections: the
//! horizontal part dπ(A) and the vertical part K(A).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_based, check_point, frame_raw, AmbientField, FrameStrategy, ManifoldModel, Point, TangentVector, Vector};
use crate::operators::{local_derivatives, prepare};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleMetricParams {
    pub p: f64,
    pub q: f64,
}

impl BundleMetricParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("p and q must be finite (p={p}, q={q})")));
        }
        Ok(BundleMetricParams { p, q })
    }

    pub fn sasaki() -> Self {
        BundleMetricParams { p: 0.0, q: 0.0 }
    }

    /// Negative q: h_{p,q} is only Riemannian near the zero section.
    pub fn indefinite_warning(&self) -> bool {
        self.q < 0.0
    }
}

/// ω(e) = (1+|e|²)⁻¹.
pub fn omega(e: &TangentVector) -> f64 {
    omega_from_norm_sq(e.base.model.norm_sq(&e.base.coords, &e.comps))
}

pub(crate) fn omega_from_norm_sq(s: f64) -> f64 {
    1.0 / (1.0 + s)
}

/// A point e ∈ T_xM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundlePoint {
    pub base: Point,
    pub e: TangentVector,
}

impl BundlePoint {
    pub fn new(e: TangentVector) -> Self {
        BundlePoint { base: e.base.clone(), e }
    }

    fn model(&self) -> ManifoldModel {
        self.base.model
    }
}

/// A ∈ T_e TM as (dπ A, K A).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleTangent {
    pub at: BundlePoint,
    pub horizontal: TangentVector,
    pub vertical: TangentVector,
}

impl BundleTangent {
    pub fn new(at: &BundlePoint, horizontal: TangentVector, vertical: TangentVector) -> Result<Self> {
        check_based(&at.base, &horizontal)?;
        check_based(&at.base, &vertical)?;
        Ok(BundleTangent {
            at: at.clone(),
            horizontal,
            vertical,
        })
    }

    pub fn horizontal_lift(at: &BundlePoint, x: &TangentVector) -> Result<Self> {
        Self::new(at, x.clone(), at.base.wrap(Vector::zeros(x.comps.len())))
    }

    pub fn vertical_lift(at: &BundlePoint, x: &TangentVector) -> Result<Self> {
        Self::new(at, at.base.wrap(Vector::zeros(x.comps.len())), x.clone())
    }
}

/// τ(σ) split into its vertical and horizontal parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensionValue {
    pub vertical: TangentVector,
    pub horizontal: TangentVector,
}

/// Which lifts enter ∇̃_A B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftCase {
    /// ∇̃_{X^h} Y^h
    HH,
    /// ∇̃_{X^h} Y^v
    HV,
    /// ∇̃_{X^v} Y^h
    VH,
    /// ∇̃_{X^v} Y^v
    VV,
}

pub(crate) fn h_pq_raw(model: ManifoldModel, params: &BundleMetricParams, x: &Vector, e: &Vector, a: (&Vector, &Vector), b: (&Vector, &Vector)) -> f64 {
    let w = omega_from_norm_sq(model.norm_sq(x, e)).powf(params.p);
    model.inner(x, a.0, b.0)
        + w * (model.inner(x, a.1, b.1) + params.q * model.inner(x, a.1, e) * model.inner(x, b.1, e))
}

/// h_{p,q}(A, B) = g(dπA, dπB) + ω^p(e)[g(KA,KB) + q g(KA,e) g(KB,e)].
pub fn h_pq_eval(params: &BundleMetricParams, at: &BundlePoint, a: &BundleTangent, b: &BundleTangent) -> Result<f64> {
    if &a.at != at || &b.at != at {
        return Err(Error::MismatchedBase);
    }
    Ok(h_pq_raw(
        at.model(),
        params,
        &at.base.coords,
        &at.e.comps,
        (&a.horizontal.comps, &a.vertical.comps),
        (&b.horizontal.comps, &b.vertical.comps),
    ))
}

/// (horizontal, vertical) parts of ∇̃_A B at (x, e). `nabla_xy` is ∇_X Y for
/// the extension of Y in use; only the HH and HV cases read it.
#[allow(clippy::too_many_arguments)]
pub(crate) fn tilde_nabla_raw(
    model: ManifoldModel,
    params: &BundleMetricParams,
    case: LiftCase,
    x: &Vector,
    e: &Vector,
    a: &Vector,
    b: &Vector,
    nabla_xy: &Vector,
    exponent: f64,
) -> (Vector, Vector) {
    let s = model.norm_sq(x, e);
    let w = omega_from_norm_sq(s);
    let zero = Vector::zeros(x.len());
    match case {
        LiftCase::HH => (nabla_xy.clone(), model.curvature(x, a, b, e) * -0.5),
        LiftCase::HV => (model.curvature(x, e, b, a) * (0.5 * w.powf(exponent)), nabla_xy.clone()),
        LiftCase::VH => (model.curvature(x, e, a, b) * (0.5 * w.powf(exponent)), zero),
        LiftCase::VV => {
            let (p, q) = (params.p, params.q);
            let (ae, be) = (model.inner(x, a, e), model.inner(x, b, e));
            let denom = 1.0 + q * s;
            let u_coef = (p * w + q) / denom * model.inner(x, a, b) + p * q * w / denom * ae * be;
            let v = (b * ae + a * be) * (-p * w) + e * u_coef;
            (zero, v)
        }
    }
}

/// ∇̃_A B for lifts of X, Y at a bundle point. When `nabla_xy` is `None`, Y is
/// taken parallel at the base point (∇_X Y = 0).
pub fn tilde_nabla(
    params: &BundleMetricParams,
    case: LiftCase,
    at: &BundlePoint,
    x: &TangentVector,
    y: &TangentVector,
    nabla_xy: Option<&TangentVector>,
) -> Result<BundleTangent> {
    check_point(at.model(), &at.base)?;
    check_based(&at.base, x)?;
    check_based(&at.base, y)?;
    let zero = Vector::zeros(x.comps.len());
    let nxy = match nabla_xy {
        Some(v) => {
            check_based(&at.base, v)?;
            &v.comps
        }
        None => &zero,
    };
    let (h, v) = tilde_nabla_raw(
        at.model(),
        params,
        case,
        &at.base.coords,
        &at.e.comps,
        &x.comps,
        &y.comps,
        nxy,
        params.p,
    );
    BundleTangent::new(at, at.base.wrap(h), at.base.wrap(v))
}

/// τ(σ) with the default ω^p weight on the horizontal part.
pub fn tension_field(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Point) -> Result<TensionValue> {
    tension_field_with_exponent(model, field, params, x, params.p)
}

/// τ(σ) = Σᵢ ∇̃_{dσ(eᵢ)} dσ(eᵢ) − dσ(∇_{eᵢ}eᵢ), assembled lift by lift. The
/// exponent on ω in the mixed cases is a free parameter for sensitivity runs.
pub fn tension_field_with_exponent(
    model: ManifoldModel,
    field: &dyn AmbientField,
    params: &BundleMetricParams,
    x: &Point,
    exponent: f64,
) -> Result<TensionValue> {
    prepare(model, field, x)?;
    let c = &x.coords;
    let sigma = field.value(c);
    let n = c.len();
    let mut hor = Vector::zeros(n);
    let mut ver = Vector::zeros(n);
    let mut add = |(h, v): (Vector, Vector)| {
        hor += h;
        ver += v;
    };
    for ei in frame_raw(model, c, FrameStrategy::GramSchmidt) {
        let di = model.cov(c, field, &ei);
        // ẽᵢ is the canonical extension of eᵢ
        let (_, nabla_ee) = model.extension_derivatives(c, &ei, &ei);
        let nabla_e_di = model.second_cov(c, field, &ei, &ei) + model.cov(c, field, &nabla_ee);
        let raw = |case, a: &Vector, b: &Vector, nab: &Vector| tilde_nabla_raw(model, params, case, c, &sigma, a, b, nab, exponent);
        add(raw(LiftCase::HH, &ei, &ei, &nabla_ee));
        add(raw(LiftCase::HV, &ei, &di, &nabla_e_di));
        add(raw(LiftCase::VH, &di, &ei, &Vector::zeros(n)));
        add(raw(LiftCase::VV, &di, &di, &Vector::zeros(n)));
        add((-nabla_ee.clone(), -model.cov(c, field, &nabla_ee)));
    }
    Ok(TensionValue {
        vertical: x.wrap(ver),
        horizontal: x.wrap(hor),
    })
}

/// ½ Σ wⱼ ω^p(σ)(|∇σ|² + q|X(σ)|²) over the sample points.
pub fn vertical_energy(
    model: ManifoldModel,
    field: &dyn AmbientField,
    params: &BundleMetricParams,
    samples: &[Point],
    weights: &[f64],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if weights.len() != samples.len() {
        return Err(Error::Dimension {
            expected: samples.len(),
            got: weights.len(),
        });
    }
    for x in samples {
        prepare(model, field, x)?;
    }
    // collect first so the summation order does not depend on scheduling
    let terms: Vec<f64> = samples
        .par_iter()
        .zip(weights.par_iter())
        .map(|(x, w)| w * vertical_energy_density(model, field, params, &x.coords))
        .collect();
    Ok(terms.iter().sum())
}

pub(crate) fn vertical_energy_density(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Vector) -> f64 {
    let d = local_derivatives(model, field, x, FrameStrategy::GramSchmidt);
    0.5 * omega_from_norm_sq(d.norm_sq).powf(params.p) * (d.grad_norm_sq + params.q * d.x_norm_sq)
}
