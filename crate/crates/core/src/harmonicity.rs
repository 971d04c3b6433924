//! Residuals of the harmonicity equations.
//!
//! Every residual is "left-hand side minus right-hand side", returned as a
//! tangent vector; norms are taken in the base metric g with no normalisation
//! by |σ|.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{omega_from_norm_sq, BundleMetricParams};
use crate::error::{Error, Result};
use crate::fields::{QuadraticFormSpec, ScalarProfile, VectorFieldSpec};
use crate::geometry::{check_point, ricci_raw, AmbientField, FrameStrategy, ManifoldModel, Point, TangentVector, Vector};
use crate::operators::{function_laplacian, killing_defect_raw, local_derivatives, prepare, LocalDerivatives, ScalarField};

/// Maximum antisymmetry defect of ∇σ accepted by the Killing-specific checks.
pub const KILLING_GATE: f64 = 1e-6;

/// Which residual a report carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// Harmonic-section equation (variations through sections).
    Section,
    /// The same equation with the Killing substitutions applied.
    Killing,
    /// Horizontal harmonic-map condition Σᵢ R(σ, ∇_{eᵢ}σ)eᵢ.
    MapHorizontal,
    /// Vertical harmonic-map condition.
    MapVertical,
    /// max of the two harmonic-map components.
    Map,
}

impl Equation {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "section" => Ok(Equation::Section),
            "killing" => Ok(Equation::Killing),
            "map-horizontal" | "map_horizontal" => Ok(Equation::MapHorizontal),
            "map-vertical" | "map_vertical" => Ok(Equation::MapVertical),
            "map" => Ok(Equation::Map),
            _ => Err(Error::InvalidParameter(format!("unknown equation '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResidual {
    pub coords: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation: Equation,
    pub params: BundleMetricParams,
    pub per_point: Vec<PointResidual>,
    pub max: f64,
    pub mean: f64,
    pub field: String,
    pub seed: u64,
}

fn section_from(d: &LocalDerivatives, params: &BundleMetricParams) -> Vector {
    let (p, q) = (params.p, params.q);
    let s = d.norm_sq;
    let bracket = p * d.grad_norm_sq - p * q * d.x_norm_sq - q * (1.0 + s) * d.lap_half_norm;
    &d.rough * (1.0 + s) + &d.nabla_x_sigma * (2.0 * p) - &d.sigma * bracket
}

fn vertical_from(d: &LocalDerivatives, params: &BundleMetricParams) -> Vector {
    let (p, q) = (params.p, params.q);
    let s = d.norm_sq;
    let w = omega_from_norm_sq(s);
    let denom = 1.0 + q * s;
    let bracket = (p * w + q) / denom * d.grad_norm_sq + p * q * w / denom * d.x_norm_sq;
    &d.rough + &d.nabla_x_sigma * (2.0 * p * w) - &d.sigma * bracket
}

fn horizontal_from(model: ManifoldModel, x: &Vector, d: &LocalDerivatives) -> Vector {
    d.frame
        .iter()
        .zip(&d.nabla)
        .fold(Vector::zeros(x.len()), |acc, (e, ne)| acc + model.curvature(x, &d.sigma, ne, e))
}

pub(crate) fn section_residual_raw(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Vector) -> Vector {
    section_from(&local_derivatives(model, field, x, FrameStrategy::GramSchmidt), params)
}

/// (1+|σ|²)∇*∇σ + 2p∇_{X(σ)}σ − [p|∇σ|² − pq|X(σ)|² − q(1+|σ|²)Δ(|σ|²/2)]σ.
pub fn section_residual(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Point) -> Result<TangentVector> {
    prepare(model, field, x)?;
    Ok(x.wrap(section_residual_raw(model, field, params, &x.coords)))
}

fn killing_gate(model: ManifoldModel, field: &dyn AmbientField, x: &Vector) -> Result<()> {
    let defect = killing_defect_raw(model, field, x);
    if defect > KILLING_GATE {
        return Err(Error::NotKilling {
            defect,
            tolerance: KILLING_GATE,
        });
    }
    Ok(())
}

pub(crate) fn killing_residual_raw(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Vector) -> Result<Vector> {
    killing_gate(model, field, x)?;
    let (p, q) = (params.p, params.q);
    let sigma = field.value(x);
    let s = model.norm_sq(x, &sigma);
    let ric = ricci_raw(model, x, &sigma, FrameStrategy::GramSchmidt);
    let d = local_derivatives(model, field, x, FrameStrategy::GramSchmidt);
    let nss = &d.nabla_sigma_sigma;
    let nnss = model.cov(x, field, nss);
    // Δ(|σ|²/2) = Ric(σ,σ) − |∇σ|² for Killing σ
    let lap = model.inner(x, &ric, &sigma) - d.grad_norm_sq;
    let bracket = p * d.grad_norm_sq - p * q * model.norm_sq(x, nss) - q * (1.0 + s) * lap;
    Ok(&ric * (1.0 + s) - nnss * (2.0 * p) - &sigma * bracket)
}

/// (1+|σ|²)Ric(σ) − 2p∇_{∇_σσ}σ − [p|∇σ|² − pq|∇_σσ|² − q(1+|σ|²)Δ(|σ|²/2)]σ
/// for Killing σ. Non-Killing input is rejected.
pub fn killing_residual(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Point) -> Result<TangentVector> {
    prepare(model, field, x)?;
    Ok(x.wrap(killing_residual_raw(model, field, params, &x.coords)?))
}

/// Harmonic-map residual components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapResidual {
    pub horizontal: TangentVector,
    pub vertical: TangentVector,
}

pub(crate) fn map_residual_raw(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Vector) -> (Vector, Vector) {
    let d = local_derivatives(model, field, x, FrameStrategy::GramSchmidt);
    (horizontal_from(model, x, &d), vertical_from(&d, params))
}

/// horizontal = Σᵢ R(σ, ∇_{eᵢ}σ)eᵢ; vertical = ∇*∇σ + 2pω∇_{X(σ)}σ −
/// [((pω+q)/(1+q|σ|²))|∇σ|² + (pqω/(1+q|σ|²))|X(σ)|²]σ.
pub fn map_residual(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Point) -> Result<MapResidual> {
    prepare(model, field, x)?;
    let (h, v) = map_residual_raw(model, field, params, &x.coords);
    Ok(MapResidual {
        horizontal: x.wrap(h),
        vertical: x.wrap(v),
    })
}

/// Norms (r6, r7) of the section residual and of the vertical map residual.
pub fn equivalence_check(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Point) -> Result<(f64, f64)> {
    prepare(model, field, x)?;
    let d = local_derivatives(model, field, &x.coords, FrameStrategy::GramSchmidt);
    let c = &x.coords;
    let r6 = model.norm_sq(c, &section_from(&d, params)).sqrt();
    let r7 = model.norm_sq(c, &vertical_from(&d, params)).sqrt();
    Ok((r6, r7))
}

/// p = 1 + 1/k², the exponent making the k-scaled Hopf field harmonic.
pub fn hopf_p_for_scale(k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {k}")));
    }
    Ok(1.0 + 1.0 / (k * k))
}

/// (1+tF²)[4t(t−1)F″ + (10t−8)F′ + F] + 4p(1−t)[tF²F′ + t²F(F′)²].
pub fn ode_f_residual(profile: &dyn ScalarProfile, t: f64, p: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain {
            model: "profile ODE".into(),
            reason: format!("t = {t} is outside (0, 1)"),
        });
    }
    let (f, f1, f2) = (profile.eval(t), profile.d1(t), profile.d2(t));
    Ok((1.0 + t * f * f) * (4.0 * t * (t - 1.0) * f2 + (10.0 * t - 8.0) * f1 + f)
        + 4.0 * p * (1.0 - t) * (t * f * f * f1 + t * t * f * f1 * f1))
}

/// (1+(1−p)|σ|²)Ric(σ,σ) + p(2+q|σ|²)|∇_σσ|², zero when the Killing norm
/// identity holds.
pub fn killing_norm_identity(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, x: &Point) -> Result<f64> {
    prepare(model, field, x)?;
    let c = &x.coords;
    killing_gate(model, field, c)?;
    let (p, q) = (params.p, params.q);
    let sigma = field.value(c);
    let s = model.norm_sq(c, &sigma);
    let ric = model.inner(c, &ricci_raw(model, c, &sigma, FrameStrategy::GramSchmidt), &sigma);
    let nss = model.cov(c, field, &sigma);
    Ok((1.0 + (1.0 - p) * s) * ric + p * (2.0 + q * s) * model.norm_sq(c, &nss))
}

/// f(x) = ⟨a, x⟩ + x·Ax on a sphere, with its gradient field.
#[derive(Clone, Debug)]
pub struct HarmonicPolynomial {
    pub linear: Vector,
    pub quadratic: DMatrix<f64>,
}

impl HarmonicPolynomial {
    pub fn linear(a: &[f64]) -> Self {
        let n = a.len();
        HarmonicPolynomial {
            linear: Vector::from_column_slice(a),
            quadratic: DMatrix::zeros(n, n),
        }
    }

    pub fn quadratic(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        HarmonicPolynomial {
            linear: Vector::zeros(n),
            quadratic: (&a + a.transpose()) * 0.5,
        }
    }

    /// σ = ∇f = (a − ⟨a,x⟩x) + 2(Ax − ⟨Ax,x⟩x).
    pub fn gradient_field(&self) -> Result<VectorFieldSpec> {
        let lin = VectorFieldSpec::conformal(self.linear.as_slice());
        let quad = VectorFieldSpec::quadratic(QuadraticFormSpec::new(self.quadratic.clone())?, 1)?;
        Ok(lin.plus(quad.scaled(2.0)))
    }
}

impl ScalarField for HarmonicPolynomial {
    fn value(&self, x: &Vector) -> f64 {
        self.linear.dot(x) + (&self.quadratic * x).dot(x)
    }
    fn d1(&self, x: &Vector, a: &Vector) -> f64 {
        self.linear.dot(a) + 2.0 * (&self.quadratic * x).dot(a)
    }
    fn d2(&self, _x: &Vector, a: &Vector, b: &Vector) -> f64 {
        2.0 * (&self.quadratic * a).dot(b)
    }
}

/// Diagnostics for σ = ∇f with Δf = λf on S².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientDiagnostics {
    /// Component of ∇_{∇_σσ}σ orthogonal to σ.
    pub colinearity_defect: f64,
    /// Δ(|σ|²/2).
    pub laplacian_half_norm: f64,
    /// The factor f with ∇_{∇_σσ}σ = fσ that harmonicity would force (needs p ≠ 0).
    pub harmonic_factor: Option<f64>,
    /// |∇_{∇_σσ}σ − fσ|.
    pub factor_defect: Option<f64>,
}

pub fn gradient_diag_s2(f: &HarmonicPolynomial, lambda: f64, params: &BundleMetricParams, x: &Point) -> Result<GradientDiagnostics> {
    let model = ManifoldModel::sphere(2)?;
    check_point(model, x)?;
    if f.linear.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: f.linear.len(),
        });
    }
    let lap = function_laplacian(model, f, x)?;
    let fx = f.value(&x.coords);
    if (lap - lambda * fx).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("Δf = {lap} but λf = {}", lambda * fx)));
    }
    let sigma_field = f.gradient_field()?;
    let c = &x.coords;
    let d = local_derivatives(model, &sigma_field, c, FrameStrategy::GramSchmidt);
    if d.norm_sq.sqrt() < 1e-12 {
        return Err(Error::VanishingField);
    }
    let w = model.cov(c, &sigma_field, &d.nabla_sigma_sigma);
    let along = model.inner(c, &w, &d.sigma) / d.norm_sq;
    let colinearity_defect = (&w - &d.sigma * along).norm();
    let (p, q) = (params.p, params.q);
    let s = d.norm_sq;
    let harmonic_factor = (p != 0.0).then(|| {
        (p * d.grad_norm_sq - p * q * model.norm_sq(c, &d.nabla_sigma_sigma) - q * (1.0 + s) * d.lap_half_norm - (lambda - 1.0) * (1.0 + s))
            / (2.0 * p)
    });
    let factor_defect = harmonic_factor.map(|h| (&w - &d.sigma * h).norm());
    Ok(GradientDiagnostics {
        colinearity_defect,
        laplacian_half_norm: d.lap_half_norm,
        harmonic_factor,
        factor_defect,
    })
}

fn residual_norm(model: ManifoldModel, field: &dyn AmbientField, params: &BundleMetricParams, eq: Equation, x: &Vector) -> Result<f64> {
    let norm = |v: &Vector| model.norm_sq(x, v).sqrt();
    Ok(match eq {
        Equation::Section => norm(&section_residual_raw(model, field, params, x)),
        Equation::Killing => norm(&killing_residual_raw(model, field, params, x)?),
        Equation::MapHorizontal => norm(&map_residual_raw(model, field, params, x).0),
        Equation::MapVertical => norm(&map_residual_raw(model, field, params, x).1),
        Equation::Map => {
            let (h, v) = map_residual_raw(model, field, params, x);
            norm(&h).max(norm(&v))
        }
    })
}

/// Residual norms over a point set, evaluated in parallel.
pub fn residual_report(
    model: ManifoldModel,
    field: &VectorFieldSpec,
    params: &BundleMetricParams,
    equation: Equation,
    points: &[Point],
    seed: u64,
) -> Result<ResidualReport> {
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    for x in points {
        prepare(model, field, x)?;
    }
    let per_point = points
        .par_iter()
        .map(|x| {
            residual_norm(model, field, params, equation, &x.coords).map(|r| PointResidual {
                coords: x.coords.iter().copied().collect(),
                residual: r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = per_point.iter().map(|r| r.residual).fold(0.0, f64::max);
    let mean = per_point.iter().map(|r| r.residual).sum::<f64>() / per_point.len() as f64;
    Ok(ResidualReport {
        equation,
        params: *params,
        per_point,
        max,
        mean,
        field: field.describe(),
        seed,
    })
}

/// Residual report on `count` seeded samples of the model.
pub fn sampled_report(
    model: ManifoldModel,
    field: &VectorFieldSpec,
    params: &BundleMetricParams,
    equation: Equation,
    count: usize,
    seed: u64,
) -> Result<ResidualReport> {
    let points = crate::sampling::sample_points(model, count, seed)?;
    residual_report(model, field, params, equation, &points, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstantProfile, PowerProfile};
    use crate::operators::divergence;
    use std::sync::Arc;

    fn pq(p: f64, q: f64) -> BundleMetricParams {
        BundleMetricParams::new(p, q).unwrap()
    }

    fn sph(n: usize) -> ManifoldModel {
        ManifoldModel::sphere(n).unwrap()
    }

    #[test]
    fn hopf_on_s5() {
        let m = sph(5);
        let f = VectorFieldSpec::hopf(1.0).unwrap();
        let r = sampled_report(m, &f, &pq(2.0, 1.0), Equation::Section, 30, 1).unwrap();
        assert!(r.max < 1e-8, "{}", r.max);
        assert!(r.max >= r.mean);
    }

    #[test]
    fn conformal_on_s3_negative_q() {
        let m = sph(3);
        let f = VectorFieldSpec::conformal(&[0.0, 0.6, 0.0, 0.8]);
        let r = sampled_report(m, &f, &pq(4.0, -1.0), Equation::Section, 30, 2).unwrap();
        assert!(r.max < 1e-8, "{}", r.max);
    }

    #[test]
    fn killing_agrees_with_section() {
        let m = sph(3);
        let f = VectorFieldSpec::hopf(0.7).unwrap();
        let x = m.point(&[0.3, -0.1, 0.8, 0.2]).unwrap();
        for (p, q) in [(1.0, 0.0), (2.5, 1.5), (0.3, 3.0)] {
            let a = section_residual(m, &f, &pq(p, q), &x).unwrap().comps;
            let b = killing_residual(m, &f, &pq(p, q), &x).unwrap().comps;
            assert!((a - b).norm() < 1e-8);
        }
        let m2 = sph(2);
        let rot = VectorFieldSpec::rotation(&[0.0, 0.0, 1.0]).unwrap();
        let y = m2.point(&[0.6, 0.0, 0.8]).unwrap();
        let a = section_residual(m2, &rot, &pq(1.0, 1.0), &y).unwrap().comps;
        let b = killing_residual(m2, &rot, &pq(1.0, 1.0), &y).unwrap().comps;
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn killing_gate_rejects_conformal() {
        let m = sph(2);
        let f = VectorFieldSpec::conformal(&[0.0, 0.0, 1.0]);
        let x = m.point(&[0.6, 0.0, 0.8]).unwrap();
        assert!(matches!(killing_residual(m, &f, &pq(1.0, 0.0), &x), Err(Error::NotKilling { .. })));
        assert!(matches!(killing_norm_identity(m, &f, &pq(1.0, 0.0), &x), Err(Error::NotKilling { .. })));
    }

    #[test]
    fn rotation_on_s2_fails() {
        let m = sph(2);
        let f = VectorFieldSpec::rotation(&[0.0, 0.0, 1.0]).unwrap();
        let r = sampled_report(m, &f, &pq(1.0, 0.0), Equation::Killing, 200, 42).unwrap();
        assert!(r.max > 1e-3);
    }

    #[test]
    fn map_residual_examples() {
        let m = ManifoldModel::Sl2Universal;
        let f = VectorFieldSpec::frame(m, 0).unwrap();
        let x = m.point(&[0.4, 1.1, 0.9]).unwrap();
        assert!(map_residual(m, &f, &pq(1.0, 1.0), &x).unwrap().horizontal.comps.norm() < 1e-8);

        let s3 = sph(3);
        let g = VectorFieldSpec::quadratic(QuadraticFormSpec::diagonal(&[1.0, 0.0, -2.0, 0.5]).unwrap(), 1).unwrap();
        let y = s3.point(&[0.1, 0.5, -0.5, 0.7]).unwrap();
        let h = map_residual(s3, &g, &pq(1.0, 1.0), &y).unwrap().horizontal.comps;
        let sig = g.value(&y.coords);
        let div = divergence(s3, &g, &y).unwrap();
        let nss = s3.cov(&y.coords, &g, &sig);
        assert!((h - (sig * div - nss)).norm() < 1e-8);
    }

    #[test]
    fn equivalence_examples() {
        let s3 = sph(3);
        let x = s3.point(&[0.2, 0.2, -0.4, 0.87]).unwrap();
        let (r6, r7) = equivalence_check(s3, &VectorFieldSpec::hopf(1.0).unwrap(), &pq(2.0, 1.0), &x).unwrap();
        assert!(r6 < 1e-8 && r7 < 1e-8);
        let s2 = sph(2);
        let y = s2.point(&[0.3, 0.4, 0.5]).unwrap();
        let (r6, r7) = equivalence_check(s2, &VectorFieldSpec::rotation(&[0.0, 0.0, 1.0]).unwrap(), &pq(2.0, 1.0), &y).unwrap();
        assert!(r6 > 1e-3 && r7 > 1e-3);
        assert_eq!(equivalence_check(s2, &VectorFieldSpec::Zero, &pq(2.0, 1.0), &y).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn hopf_exponent() {
        assert_eq!(hopf_p_for_scale(1.0).unwrap(), 2.0);
        assert!((hopf_p_for_scale(1e3).unwrap() - 1.000001).abs() < 1e-15);
        assert_eq!(hopf_p_for_scale(0.5).unwrap(), 5.0);
        assert!(hopf_p_for_scale(0.0).is_err());
        assert!(hopf_p_for_scale(-1.0).is_err());
    }

    #[test]
    fn profile_ode() {
        let prof = PowerProfile::inverse_sqrt_for(2.0).unwrap();
        for t in [0.2, 0.5, 0.8] {
            assert!(ode_f_residual(&prof, t, 2.0).unwrap().abs() < 1e-10);
        }
        let c = 1.5;
        let r = ode_f_residual(&ConstantProfile(c), 0.3, 2.0).unwrap();
        assert!((r - c * (1.0 + 0.3 * c * c)).abs() < 1e-15);
        assert_eq!(ode_f_residual(&ConstantProfile(0.0), 0.4, 3.0).unwrap(), 0.0);
        assert!(ode_f_residual(&prof, 1.0, 2.0).is_err());
        assert!(ode_f_residual(&prof, 0.0, 2.0).is_err());
    }

    #[test]
    fn profiled_rotation_solves_section_equation() {
        let m = sph(2);
        for p in [1.5, 2.0, 4.0] {
            let prof = Arc::new(PowerProfile::inverse_sqrt_for(p).unwrap());
            let f = VectorFieldSpec::profiled(prof, &[0.0, 0.0, 1.0]).unwrap();
            let x = m.point(&[0.5, -0.3, 0.6]).unwrap();
            let r = section_residual(m, &f, &pq(p, 0.0), &x).unwrap();
            assert!(r.comps.norm() < 1e-8, "p={p}: {}", r.comps.norm());
            let bad = section_residual(m, &f, &pq(p + 0.5, 0.0), &x).unwrap();
            assert!(bad.comps.norm() > 1e-3);
        }
    }

    #[test]
    fn killing_norm_identity_values() {
        let m = sph(3);
        let x = m.point(&[0.1, 0.9, -0.3, 0.3]).unwrap();
        for k in [0.5, 1.0, 2.0] {
            let f = VectorFieldSpec::hopf(k).unwrap();
            let p = hopf_p_for_scale(k).unwrap();
            assert!(killing_norm_identity(m, &f, &pq(p, 1.3), &x).unwrap().abs() < 1e-8);
        }
        let f = VectorFieldSpec::hopf(1.0).unwrap();
        let d = local_derivatives(m, &f, &x.coords, FrameStrategy::GramSchmidt);
        let v = killing_norm_identity(m, &f, &pq(3.0, 0.5), &x).unwrap();
        assert!((v + d.grad_norm_sq).abs() < 1e-10);
        assert_eq!(killing_norm_identity(m, &VectorFieldSpec::Zero, &pq(3.0, 0.5), &x).unwrap(), 0.0);
    }

    #[test]
    fn gradient_diagnostics() {
        let m = sph(2);
        let x = m.point(&[0.3, -0.5, 0.4]).unwrap();
        let lin = HarmonicPolynomial::linear(&[0.2, 1.0, -0.4]);
        let d = gradient_diag_s2(&lin, 2.0, &pq(1.0, 1.0), &x).unwrap();
        assert!(d.colinearity_defect < 1e-12);
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 1)] = 0.5;
        a[(1, 0)] = 0.5;
        let xy = HarmonicPolynomial::quadratic(a);
        let d = gradient_diag_s2(&xy, 6.0, &pq(1.0, 1.0), &x).unwrap();
        assert!(d.colinearity_defect.is_finite() && d.laplacian_half_norm.is_finite());
        assert!(gradient_diag_s2(&xy, 2.0, &pq(1.0, 1.0), &x).is_err());
        let constant = HarmonicPolynomial::linear(&[0.0, 0.0, 0.0]);
        assert_eq!(gradient_diag_s2(&constant, 0.0, &pq(1.0, 1.0), &x), Err(Error::VanishingField));
    }

    #[test]
    fn sasaki_reduces_to_rough_laplacian() {
        let m = sph(4);
        let f = VectorFieldSpec::conformal(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        let x = m.point(&[0.4, 0.4, 0.4, 0.4, 0.6]).unwrap();
        let d = local_derivatives(m, &f, &x.coords, FrameStrategy::GramSchmidt);
        let r = section_residual(m, &f, &BundleMetricParams::sasaki(), &x).unwrap().comps;
        assert!((r - &d.rough * (1.0 + d.norm_sq)).norm() < 1e-10);
    }
}
