//! Quadratic gradient fields σ = ½∇λ, λ(x) = Bx·x, on round spheres.
//!
//! The identity suite checks the σ_k calculus pointwise. The classification
//! solver matches the polynomial coefficients in t = |x_μ|² of both sides of
//! the harmonic-section equation for a two-eigenvalue B, then validates every
//! candidate by evaluating the section residual directly. Printed closed forms
//! are evaluated alongside and any disagreement is reported, not repaired.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::BundleMetricParams;
use crate::error::{Error, Result};
use crate::fields::{l_k_raw, sigma_lambda_raw, QuadraticFormSpec, VectorFieldSpec};
use crate::geometry::{frame_raw, AmbientField, FrameStrategy, ManifoldModel, Point, Vector};
use crate::harmonicity::section_residual_raw;
use crate::operators::{function_laplacian, local_derivatives, HalfNormSquared};
use crate::sampling::sample_points;

/// Eigenvalues closer than this are treated as one.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-9;
/// Residual bound for a candidate to count as validated.
pub const VALIDATION_TOL: f64 = 1e-8;

/// x ↦ L_k(Π_x y): the tensor L_k applied to the canonical extension of y.
struct LkExtension<'a> {
    bk: &'a DMatrix<f64>,
    y: Vector,
}

impl LkExtension<'_> {
    fn ext(&self, x: &Vector) -> Vector {
        &self.y - x * self.y.dot(x)
    }
    fn dext(&self, x: &Vector, a: &Vector) -> Vector {
        -(x * self.y.dot(a)) - a * self.y.dot(x)
    }
}

impl AmbientField for LkExtension<'_> {
    fn check_model(&self, _model: ManifoldModel) -> Result<()> {
        Ok(())
    }

    fn value(&self, x: &Vector) -> Vector {
        let bw = self.bk * self.ext(x);
        let c = bw.dot(x);
        bw - x * c
    }

    fn d1(&self, x: &Vector, a: &Vector) -> Vector {
        let bw = self.bk * self.ext(x);
        let bdw = self.bk * self.dext(x, a);
        let c = bw.dot(x);
        let dc = bdw.dot(x) + bw.dot(a);
        bdw - x * dc - a * c
    }

    fn d2(&self, x: &Vector, a: &Vector, b: &Vector) -> Vector {
        let bw = self.bk * self.ext(x);
        let bdwa = self.bk * self.dext(x, a);
        let bdwb = self.bk * self.dext(x, b);
        let bddw = self.bk * (-(b * self.y.dot(a)) - a * self.y.dot(b));
        let dca = bdwa.dot(x) + bw.dot(a);
        let dcb = bdwb.dot(x) + bw.dot(b);
        let ddc = bddw.dot(x) + bdwa.dot(b) + bdwb.dot(a);
        bddw - x * ddc - a * dcb - b * dca
    }
}

/// (∇_a L_k)(b) = ∇_a(L_k b̃) − L_k(∇_a b̃).
fn nabla_l_k(model: ManifoldModel, bk: &DMatrix<f64>, x: &Vector, a: &Vector, b: &Vector) -> Vector {
    let field = LkExtension { bk, y: b.clone() };
    let (_, nabla_ext) = model.extension_derivatives(x, a, b);
    let bv = bk * &nabla_ext;
    model.cov(x, &field, a) - (&bv - x * bv.dot(x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub statement: &'static str,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub identities: Vec<IdentityResidual>,
    pub max: f64,
}

impl IdentityReport {
    /// Pointwise max of two reports over the same identity list.
    pub fn merge(mut self, other: &IdentityReport) -> Self {
        for (a, b) in self.identities.iter_mut().zip(&other.identities) {
            a.max_residual = a.max_residual.max(b.max_residual);
        }
        self.max = self.max.max(other.max);
        self
    }
}

const IDENTITIES: [(&str, &str); 16] = [
    ("inner_sigma_k_sigma_l", "<σ_k,σ_l> = λ_{k+l} − λ_k λ_l"),
    ("l_l_sigma_k", "L_l σ_k = σ_{k+l} − λ_k σ_l"),
    ("nabla_sigma_k", "∇_X σ_k = L_k X − λ_k X"),
    ("div_sigma_k", "Div σ_k = tr(B^k) − (n+1)λ_k"),
    ("norm_l_k", "|L_k|² = |B^k|² − 2λ_{2k} + λ_k²"),
    ("nabla_l_k", "(∇_X L_k)(Y) = −<X,Y>σ_k − <σ_k,Y>X"),
    ("hessian_sigma_k", "∇²_{X,Y}σ_k = −<X,Y>σ_k − <σ_k,Y>X − 2<σ_k,X>Y"),
    ("codifferential_l_k", "δL_k = (n+1)σ_k with δL_k = −Σ(∇_{e_i}L_k)(e_i)"),
    ("rough_laplacian_sigma_k", "∇*∇σ_k = (n+3)σ_k"),
    ("norm_sigma", "|σ|² = λ_2 − λ²"),
    ("x_of_sigma", "X(σ) = σ_2 − 2λσ"),
    ("nabla_sigma", "∇_X σ = LX − λX"),
    ("nabla_x_sigma_sigma", "∇_{X(σ)}σ = σ_3 − 3λσ_2 + (4λ² − λ_2)σ"),
    ("grad_norm_sigma", "|∇σ|² = |B|² − 2λ_2 − 2λ tr B + (n+3)λ²"),
    ("rough_laplacian_sigma", "∇*∇σ = (n+3)σ"),
    ("laplacian_norm_sigma", "Δ|σ|² = −2|B|² + 2(n+5)λ_2 + 4λ tr B − 4(n+3)λ²"),
];

/// Evaluates the sixteen σ_k identities at x for k, l ∈ {1, 2, 3}.
pub fn verify_sigma_identities(form: &QuadraticFormSpec, n: usize, x: &Point) -> Result<IdentityReport> {
    let model = ManifoldModel::sphere(n)?;
    if form.size() != n + 1 {
        return Err(Error::Dimension {
            expected: n + 1,
            got: form.size(),
        });
    }
    if x.model != model {
        return Err(Error::ModelMismatch {
            field: "point".into(),
            model: model.name(),
        });
    }
    let c = &x.coords;
    let dim = n as f64;
    let frame = frame_raw(model, c, FrameStrategy::GramSchmidt);
    let sl = |k: u32| sigma_lambda_raw(form, k, c);
    let mut r = [0.0f64; 16];
    let mut bump = |i: usize, v: f64| r[i] = r[i].max(v.abs());

    for k in 1..=3u32 {
        let (lk, sk) = sl(k);
        let bk = form.power(k);
        let field = VectorFieldSpec::quadratic(form.clone(), k)?;
        for l in 1..=3u32 {
            let (ll, sl_) = sl(l);
            let (lkl, skl) = sl(k + l);
            bump(0, sk.dot(&sl_) - (lkl - lk * ll));
            bump(1, (l_k_raw(form, l, c, &sk) - (&skl - &sl_ * lk)).norm());
        }
        let mut norm_lk = 0.0;
        let mut delta = Vector::zeros(n + 1);
        for a in &frame {
            let want = l_k_raw(form, k, c, a) - a * lk;
            bump(2, (model.cov(c, &field, a) - want).norm());
            norm_lk += l_k_raw(form, k, c, a).norm_squared();
            delta -= nabla_l_k(model, &bk, c, a, a);
            for b in &frame {
                let nl = nabla_l_k(model, &bk, c, a, b);
                let want = -(&sk * a.dot(b)) - a * sk.dot(b);
                bump(5, (nl - want).norm());
                let h = model.second_cov(c, &field, a, b);
                let want = -(&sk * a.dot(b)) - a * sk.dot(b) - b * (2.0 * sk.dot(a));
                bump(6, (h - want).norm());
            }
        }
        let d = local_derivatives(model, &field, c, FrameStrategy::GramSchmidt);
        bump(3, d.divergence - (bk.trace() - (dim + 1.0) * lk));
        let (l2k, _) = sl(2 * k);
        bump(4, norm_lk - (bk.norm_squared() - 2.0 * l2k + lk * lk));
        bump(7, (delta - &sk * (dim + 1.0)).norm());
        bump(8, (&d.rough - &sk * (dim + 3.0)).norm());
    }

    let b = form.matrix();
    let (lam, sigma) = sl(1);
    let (lam2, sigma2) = sl(2);
    let (_, sigma3) = sl(3);
    let field = VectorFieldSpec::quadratic(form.clone(), 1)?;
    let d = local_derivatives(model, &field, c, FrameStrategy::GramSchmidt);
    bump(9, d.norm_sq - (lam2 - lam * lam));
    bump(10, (&d.x_sigma - (&sigma2 - &sigma * (2.0 * lam))).norm());
    for a in &frame {
        let want = l_k_raw(form, 1, c, a) - a * lam;
        bump(11, (model.cov(c, &field, a) - want).norm());
    }
    let want = &sigma3 - &sigma2 * (3.0 * lam) + &sigma * (4.0 * lam * lam - lam2);
    bump(12, (&d.nabla_x_sigma - want).norm());
    let (bn, tr) = (b.norm_squared(), b.trace());
    bump(13, d.grad_norm_sq - (bn - 2.0 * lam2 - 2.0 * lam * tr + (dim + 3.0) * lam * lam));
    bump(14, (&d.rough - &sigma * (dim + 3.0)).norm());
    let lap = 2.0 * function_laplacian(model, &HalfNormSquared { model, field: &field }, x)?;
    bump(15, lap - (-2.0 * bn + 2.0 * (dim + 5.0) * lam2 + 4.0 * lam * tr - 4.0 * (dim + 3.0) * lam * lam));

    let identities: Vec<IdentityResidual> = IDENTITIES
        .iter()
        .zip(r)
        .map(|(&(name, statement), max_residual)| IdentityResidual {
            name,
            statement,
            max_residual,
        })
        .collect();
    let max = r.iter().copied().fold(0.0, f64::max);
    Ok(IdentityReport { n, identities, max })
}

/// Identity suite over a point set; reports the max per identity.
pub fn verify_sigma_identities_on(form: &QuadraticFormSpec, n: usize, points: &[Point]) -> Result<IdentityReport> {
    let first = points.first().ok_or(Error::EmptySamples)?;
    let init = verify_sigma_identities(form, n, first)?;
    let rest = points[1..]
        .par_iter()
        .map(|x| verify_sigma_identities(form, n, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(rest.iter().fold(init, |acc, r| acc.merge(r)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoEigenvalueResult {
    pub is_two: bool,
    /// μ + ν
    pub m: Option<f64>,
    /// −μν
    pub c: Option<f64>,
    pub clusters: Vec<EigenCluster>,
    /// max |B² − mB − cI| entry, when two clusters were found.
    pub polynomial_defect: Option<f64>,
}

/// Sorted eigenvalue clusters of a symmetric matrix.
pub fn eigen_clusters(form: &QuadraticFormSpec) -> Vec<EigenCluster> {
    let mut ev: Vec<f64> = SymmetricEigen::new(form.matrix().clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<EigenCluster> = Vec::new();
    let mut start = 0;
    for i in 1..=ev.len() {
        if i == ev.len() || ev[i] - ev[i - 1] > EIGEN_CLUSTER_TOL {
            let group = &ev[start..i];
            out.push(EigenCluster {
                value: group.iter().sum::<f64>() / group.len() as f64,
                multiplicity: group.len(),
            });
            start = i;
        }
    }
    out
}

/// Whether B has exactly two distinct eigenvalues μ, ν; then B² − mB = cI with
/// m = μ + ν, c = −μν.
pub fn two_eigenvalue_test(form: &QuadraticFormSpec) -> TwoEigenvalueResult {
    let clusters = eigen_clusters(form);
    if clusters.len() != 2 {
        return TwoEigenvalueResult {
            is_two: false,
            m: None,
            c: None,
            clusters,
            polynomial_defect: None,
        };
    }
    let (mu, nu) = (clusters[0].value, clusters[1].value);
    let (m, c) = (mu + nu, -mu * nu);
    let b = form.matrix();
    let size = form.size();
    let poly = b * b - b * m - DMatrix::identity(size, size) * c;
    let defect = poly.amax();
    TwoEigenvalueResult {
        is_two: defect <= 1e-8,
        m: Some(m),
        c: Some(c),
        clusters,
        polynomial_defect: Some(defect),
    }
}

/// Component of σ₃ − 3λσ₂ orthogonal to σ.
pub fn colinearity_defect(form: &QuadraticFormSpec, x: &Point) -> Result<f64> {
    let c = &x.coords;
    if c.len() != form.size() {
        return Err(Error::Dimension {
            expected: form.size(),
            got: c.len(),
        });
    }
    let (lam, sigma) = sigma_lambda_raw(form, 1, c);
    let (_, s2) = sigma_lambda_raw(form, 2, c);
    let (_, s3) = sigma_lambda_raw(form, 3, c);
    let ns = sigma.norm_squared();
    if ns.sqrt() < 1e-12 {
        return Err(Error::VanishingField);
    }
    let w = s3 - s2 * (3.0 * lam);
    Ok((&w - &sigma * (w.dot(&sigma) / ns)).norm())
}

/// |σ₃ − 3λσ₂ − (m² − 3mλ + c)σ| for a two-eigenvalue B.
pub fn two_eigenvalue_identity_residual(form: &QuadraticFormSpec, m: f64, c: f64, x: &Point) -> f64 {
    let p = &x.coords;
    let (lam, sigma) = sigma_lambda_raw(form, 1, p);
    let (_, s2) = sigma_lambda_raw(form, 2, p);
    let (_, s3) = sigma_lambda_raw(form, 3, p);
    (s3 - s2 * (3.0 * lam) - sigma * (m * m - 3.0 * m * lam + c)).norm()
}

/// Coefficients of 1, t, …, t⁴ (t = |x_μ|²) of both sides of the
/// harmonic-section equation for B = μ·diag(1ᵏ, 0ⁿ⁺¹⁻ᵏ), both sides divided by σ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientSystem {
    pub lhs_coeffs: [f64; 5],
    pub rhs_coeffs: [f64; 5],
}

impl CoefficientSystem {
    pub fn difference(&self) -> [f64; 5] {
        std::array::from_fn(|i| self.lhs_coeffs[i] - self.rhs_coeffs[i])
    }

    pub fn eval_lhs(&self, t: f64) -> f64 {
        horner(&self.lhs_coeffs, t)
    }

    pub fn eval_rhs(&self, t: f64) -> f64 {
        horner(&self.rhs_coeffs, t)
    }
}

fn horner(c: &[f64; 5], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

/// Both coefficient vectors exactly as printed.
pub fn coefficient_polynomials(n: usize, k_mult: f64, p: f64, q: f64, mu_sq: f64) -> CoefficientSystem {
    let (n, k, m) = (n as f64, k_mult, mu_sq);
    let m2 = m * m;
    CoefficientSystem {
        lhs_coeffs: [2.0 * p * m + n + 3.0, (n + 3.0 - 8.0 * p) * m, (8.0 * p - n - 3.0) * m, 0.0, 0.0],
        rhs_coeffs: [
            k * m * (p + q),
            m * (-2.0 * p * (k + 1.0) - p * q * m + k * q * m - q * (n + 5.0 + 2.0 * k)),
            m * (p * (n + 3.0) + 5.0 * p * q * m - q * (n + 5.0 + 2.0 * k) * m - k * q * m + 2.0 * (n + 3.0) * q),
            q * m2 * (-8.0 * p + 2.0 * (n + 3.0) + n + 5.0 + 2.0 * k),
            2.0 * q * m2 * (2.0 * p - n - 3.0),
        ],
    }
}

/// max over sample points of |scalar − polynomial| for both sides, where the
/// scalars come from the operators on B = μ·diag(1ᵏ, 0). Checks the printed
/// coefficient system against direct evaluation.
pub fn coefficient_direct_defect(n: usize, k_mult: usize, p: f64, q: f64, mu_sq: f64, points: &[Point]) -> Result<f64> {
    if mu_sq <= 0.0 {
        return Err(Error::InvalidParameter(format!("μ² must be positive, got {mu_sq}")));
    }
    let model = ManifoldModel::sphere(n)?;
    let form = two_block_form(n, k_mult, mu_sq.sqrt())?;
    let field = VectorFieldSpec::quadratic(form, 1)?;
    let sys = coefficient_polynomials(n, k_mult as f64, p, q, mu_sq);
    let defects = points
        .par_iter()
        .map(|x| {
            let c = &x.coords;
            let t: f64 = c.iter().take(k_mult).map(|v| v * v).sum();
            let d = local_derivatives(model, &field, c, FrameStrategy::GramSchmidt);
            if d.norm_sq < 1e-10 {
                return 0.0;
            }
            let s = d.norm_sq;
            let lhs_vec = &d.rough * (1.0 + s) + &d.nabla_x_sigma * (2.0 * p);
            let lhs = lhs_vec.dot(&d.sigma) / s;
            let rhs = p * d.grad_norm_sq - p * q * d.x_norm_sq - q * (1.0 + s) * d.lap_half_norm;
            let scale = 1.0 + sys.lhs_coeffs.iter().chain(&sys.rhs_coeffs).map(|v| v.abs()).fold(0.0, f64::max);
            ((lhs - sys.eval_lhs(t)).abs().max((rhs - sys.eval_rhs(t)).abs())) / scale
        })
        .collect::<Vec<_>>();
    Ok(defects.into_iter().fold(0.0, f64::max))
}

fn two_block_form(n: usize, k: usize, mu: f64) -> Result<QuadraticFormSpec> {
    let entries: Vec<f64> = (0..=n).map(|i| if i < k { mu } else { 0.0 }).collect();
    QuadraticFormSpec::diagonal(&entries)
}

/// B = μ·diag(1, …, 1, 0, …, 0) with (n+1)/2 ones.
pub fn canonical_b(n: usize, mu: f64) -> Result<QuadraticFormSpec> {
    if n.is_multiple_of(2) {
        return Err(Error::Rejected(format!("canonical form needs odd n, got {n}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("μ must be positive, got {mu}")));
    }
    two_block_form(n, n.div_ceil(2), mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// Root of the t⁰/t¹ coefficient equations found numerically.
    CoefficientOracle,
    /// Root of the printed quadratic in q with the printed μ² formula.
    Printed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationCandidate {
    pub source: CandidateSource,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub k_mult: usize,
    pub mu_sq: f64,
    pub b: Option<QuadraticFormSpec>,
    pub validated: bool,
    /// None when μ² ≤ 0, so no real B exists to evaluate.
    pub residual_max: Option<f64>,
    /// max |D₂| of the t² coefficient equation at this (q, μ²), scaled.
    pub t2_consistency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub p: f64,
    pub k_mult: usize,
    pub printed_quadratic: [f64; 3],
    pub printed_roots: Vec<f64>,
    pub printed_mu_sq: Vec<f64>,
    pub oracle_roots: Vec<(f64, f64)>,
    pub candidates: Vec<ClassificationCandidate>,
    pub discrepancies: Vec<String>,
    pub notes: Vec<String>,
}

/// Solver settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { samples: 200, seed: 42 }
    }
}

/// Solves a·x + b = 0 from two evaluations of an affine function.
fn affine_root(f: impl Fn(f64) -> f64) -> Result<f64> {
    let (f0, f1, f2) = (f(0.0), f(1.0), f(2.0));
    let slope = f1 - f0;
    let scale = 1.0 + f0.abs().max(f1.abs());
    if (f2 - 2.0 * f1 + f0).abs() > 1e-9 * scale {
        return Err(Error::Rejected("coefficient equation is not affine in the unknown".into()));
    }
    if slope.abs() < 1e-12 * scale {
        return Err(Error::Rejected("coefficient equation does not determine the unknown".into()));
    }
    Ok(-f0 / slope)
}

/// Nonzero real roots m of the t¹ equation, a polynomial of degree ≤ 2 in μ².
fn mu_sq_roots(n: usize, k: f64, p: f64, q: f64) -> Vec<f64> {
    let d1 = |m: f64| coefficient_polynomials(n, k, p, q, m).difference()[1];
    let (f0, f1, f2) = (d1(0.0), d1(1.0), d1(2.0));
    let a = (f2 - 2.0 * f1 + f0) / 2.0;
    let b = f1 - f0 - a;
    let c = f0;
    let mut roots = Vec::new();
    if a.abs() > 1e-14 * (1.0 + b.abs() + c.abs()) {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            // numerically stable pair
            let qq = -0.5 * (b + b.signum() * s);
            if qq != 0.0 {
                roots.push(qq / a);
                roots.push(c / qq);
            } else {
                roots.push(0.0);
            }
        }
    } else if b.abs() > 1e-14 {
        roots.push(-c / b);
    }
    roots.retain(|m| m.abs() > 1e-12 && m.is_finite());
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

fn brent_like(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn check_dimension(n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::Rejected(format!(
            "n = {n} is even: there are no harmonic quadratic gradient fields on even-dimensional spheres"
        )));
    }
    if n == 3 {
        return Err(Error::Rejected(
            "n = 3 is excluded: the t¹ equation forces μ² = −12 < 0 for every q ≠ 0".into(),
        ));
    }
    if n < 5 {
        return Err(Error::Rejected(format!("n = {n}: classification requires odd n >= 5")));
    }
    Ok(())
}

fn validate(n: usize, k: usize, p: f64, q: f64, mu_sq: f64, points: &[Point]) -> Result<(Option<QuadraticFormSpec>, Option<f64>)> {
    if mu_sq <= 0.0 {
        return Ok((None, None));
    }
    let model = ManifoldModel::sphere(n)?;
    let form = two_block_form(n, k, mu_sq.sqrt())?;
    let field = VectorFieldSpec::quadratic(form.clone(), 1)?;
    let params = BundleMetricParams::new(p, q)?;
    let max = points
        .par_iter()
        .map(|x| section_residual_raw(model, &field, &params, &x.coords).norm())
        .reduce(|| 0.0, f64::max);
    Ok((Some(form), Some(max)))
}

pub fn solve_classification(n: usize) -> Result<ClassificationReport> {
    solve_classification_with(n, &SolverConfig::default())
}

pub fn solve_classification_with(n: usize, cfg: &SolverConfig) -> Result<ClassificationReport> {
    check_dimension(n)?;
    let nf = n as f64;
    let mut notes = Vec::new();
    let mut discrepancies = Vec::new();

    // (i) t⁴ fixes p, then t³ fixes k; probe values q = −1, μ² = 1 are arbitrary nonzero
    let p = affine_root(|p| coefficient_polynomials(n, 1.0, p, -1.0, 1.0).difference()[4])?;
    let k_real = affine_root(|k| coefficient_polynomials(n, k, p, -1.0, 1.0).difference()[3])?;
    let k_mult = k_real.round();
    if (k_real - k_mult).abs() > 1e-9 || k_mult < 1.0 || k_mult > nf {
        return Err(Error::Rejected(format!("multiplicity k = {k_real} is not an admissible integer")));
    }
    let k_mult_u = k_mult as usize;
    notes.push(format!("t⁴ equation gives p = {p}; t³ equation gives k = {k_real}"));
    notes.push("q = 0 is ruled out: the t³ and t⁴ equations are then empty and cannot fix p and k".into());

    // (ii) scan q ≠ 0 on each μ²-branch of the t¹ equation for zeros of the t⁰ equation
    let d0 = |q: f64, m: f64| coefficient_polynomials(n, k_mult, p, q, m).difference()[0];
    let scale = |q: f64, m: f64| {
        let s = coefficient_polynomials(n, k_mult, p, q, m);
        1.0 + s.lhs_coeffs.iter().chain(&s.rhs_coeffs).map(|v| v.abs()).fold(0.0, f64::max)
    };
    let q_max = 10.0 * nf + 50.0;
    let steps = 40_000;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| -q_max + 2.0 * q_max * i as f64 / steps as f64)
        .filter(|q| q.abs() > 1e-6)
        .collect();
    let mut oracle_roots: Vec<(f64, f64)> = Vec::new();
    for branch in 0..2 {
        let g = |q: f64| {
            let roots = mu_sq_roots(n, k_mult, p, q);
            roots.get(branch).map(|&m| d0(q, m) / scale(q, m))
        };
        for w in grid.windows(2) {
            let (Some(ga), Some(gb)) = (g(w[0]), g(w[1])) else { continue };
            if (ga < 0.0) == (gb < 0.0) || w[0] * w[1] < 0.0 {
                continue;
            }
            let h = |q: f64| g(q).unwrap_or(f64::NAN);
            let q = brent_like(&h, w[0], w[1]);
            let Some(&m) = mu_sq_roots(n, k_mult, p, q).get(branch) else { continue };
            if (d0(q, m) / scale(q, m)).abs() <= 1e-9 && !oracle_roots.iter().any(|r| (r.0 - q).abs() < 1e-9) {
                oracle_roots.push((q, m));
            }
        }
    }
    oracle_roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    // (iii) printed quadratic and printed μ²
    let qa = 8.0 * (nf + 1.0);
    let qb = 2.0 * (3.0 * nf * nf - 2.0 * nf - 17.0);
    let qc = (nf - 3.0) * (nf * nf - 9.0);
    let disc = qb * qb - 4.0 * qa * qc;
    let mut printed_roots = Vec::new();
    if disc >= 0.0 {
        printed_roots.push((-qb - disc.sqrt()) / (2.0 * qa));
        printed_roots.push((-qb + disc.sqrt()) / (2.0 * qa));
    } else {
        discrepancies.push(format!("printed quadratic has no real roots (discriminant {disc})"));
    }
    let printed_mu = |q: f64| (9.0 - nf * nf) / (4.0 * q) - 2.0 * (nf + 3.0);
    let printed_mu_sq: Vec<f64> = printed_roots.iter().map(|&q| printed_mu(q)).collect();

    for (i, &q) in printed_roots.iter().enumerate() {
        match oracle_roots.iter().find(|r| (r.0 - q).abs() <= 1e-8 * (1.0 + q.abs())) {
            Some(&(_, m)) => {
                let pm = printed_mu_sq[i];
                if (m - pm).abs() > 1e-8 * (1.0 + m.abs()) {
                    discrepancies.push(format!(
                        "at q = {q}: printed μ² = {pm} but the coefficient equations give μ² = {m} (ratio of (μ² + 2(n+3)) terms {})",
                        (m + 2.0 * (nf + 3.0)) / (pm + 2.0 * (nf + 3.0))
                    ));
                }
            }
            None => discrepancies.push(format!("printed root q = {q} is not a root of the coefficient equations")),
        }
    }
    for &(q, _) in &oracle_roots {
        if !printed_roots.iter().any(|&r| (r - q).abs() <= 1e-8 * (1.0 + q.abs())) {
            discrepancies.push(format!("coefficient-equation root q = {q} is not a root of the printed quadratic"));
        }
    }
    let positive = oracle_roots.iter().filter(|r| r.1 > 0.0).count();
    let printed_positive = printed_mu_sq.iter().filter(|&&m| m > 0.0).count();
    if positive != printed_positive {
        discrepancies.push(format!(
            "{positive} coefficient-equation root(s) have μ² > 0, against {printed_positive} from the printed μ² formula"
        ));
    }

    // (iv) direct validation
    let points = sample_points(ManifoldModel::sphere(n)?, cfg.samples, cfg.seed)?;
    let t2 = |q: f64, m: f64| (coefficient_polynomials(n, k_mult, p, q, m).difference()[2] / scale(q, m)).abs();
    let mut candidates = Vec::new();
    let sources = oracle_roots
        .iter()
        .map(|&(q, m)| (CandidateSource::CoefficientOracle, q, m))
        .chain(printed_roots.iter().zip(&printed_mu_sq).map(|(&q, &m)| (CandidateSource::Printed, q, m)));
    for (source, q, mu_sq) in sources {
        let (b, residual_max) = validate(n, k_mult_u, p, q, mu_sq, &points)?;
        let validated = residual_max.is_some_and(|r| r <= VALIDATION_TOL);
        let t2_consistency = t2(q, mu_sq);
        if source == CandidateSource::CoefficientOracle && t2_consistency > 1e-9 {
            discrepancies.push(format!("t² equation not satisfied at q = {q}, μ² = {mu_sq} (defect {t2_consistency:e})"));
        }
        if let (Some(r), CandidateSource::CoefficientOracle) = (residual_max, source) {
            if !validated {
                discrepancies.push(format!("coefficient-equation root q = {q} fails direct validation (max residual {r:e})"));
            }
        }
        candidates.push(ClassificationCandidate {
            source,
            n,
            p,
            q,
            k_mult: k_mult_u,
            mu_sq,
            b,
            validated,
            residual_max,
            t2_consistency,
        });
    }

    Ok(ClassificationReport {
        n,
        p,
        k_mult: k_mult_u,
        printed_quadratic: [qa, qb, qc],
        printed_roots,
        printed_mu_sq,
        oracle_roots,
        candidates,
        discrepancies,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matrix_trivial() {
        let form = QuadraticFormSpec::identity(5).unwrap();
        let m = ManifoldModel::sphere(4).unwrap();
        let x = m.point(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let r = verify_sigma_identities(&form, 4, &x).unwrap();
        assert_eq!(r.identities.len(), 16);
        assert!(r.max < 1e-12);
    }

    #[test]
    fn identities_random_form() {
        let b = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 7 + i * j) % 11) as f64 / 5.0 - 1.0);
        let form = QuadraticFormSpec::new(b).unwrap();
        let pts = sample_points(ManifoldModel::sphere(4).unwrap(), 20, 9).unwrap();
        let r = verify_sigma_identities_on(&form, 4, &pts).unwrap();
        for id in &r.identities {
            assert!(id.max_residual < 1e-9, "{}: {}", id.name, id.max_residual);
        }
    }

    #[test]
    fn lk_extension_derivatives_match_differences() {
        let form = QuadraticFormSpec::diagonal(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        let bk = form.power(2);
        let f = LkExtension {
            bk: &bk,
            y: Vector::from_column_slice(&[0.3, -0.2, 0.9, 0.1]),
        };
        let x = Vector::from_column_slice(&[0.5, 0.5, 0.5, 0.5]);
        let a = Vector::from_column_slice(&[1.0, -1.0, 0.0, 0.0]);
        let b = Vector::from_column_slice(&[0.0, 0.5, 0.5, -1.0]);
        let h = 1e-5;
        let fd1 = (f.value(&(&x + &a * h)) - f.value(&(&x - &a * h))) / (2.0 * h);
        assert!((fd1 - f.d1(&x, &a)).norm() < 1e-8);
        let fd2 = (f.d1(&(&x + &b * h), &a) - f.d1(&(&x - &b * h), &a)) / (2.0 * h);
        assert!((fd2 - f.d2(&x, &a, &b)).norm() < 1e-8);
    }

    #[test]
    fn two_eigenvalue_examples() {
        let r = two_eigenvalue_test(&QuadraticFormSpec::diagonal(&[1.0, 1.0, 0.0, 0.0]).unwrap());
        assert!(r.is_two);
        assert!((r.m.unwrap() - 1.0).abs() < 1e-12 && r.c.unwrap().abs() < 1e-12);
        assert!(!two_eigenvalue_test(&QuadraticFormSpec::identity(4).unwrap()).is_two);
        let three = QuadraticFormSpec::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(!two_eigenvalue_test(&three).is_two);
        let pts = sample_points(ManifoldModel::sphere(2).unwrap(), 50, 4).unwrap();
        let worst = pts.iter().map(|x| colinearity_defect(&three, x).unwrap()).fold(0.0, f64::max);
        assert!(worst > 1e-6);
    }

    #[test]
    fn printed_coefficients_structure() {
        let s = coefficient_polynomials(5, 3.0, 4.0, -0.5, 2.0);
        assert_eq!(s.lhs_coeffs[3], 0.0);
        assert_eq!(s.lhs_coeffs[4], 0.0);
        let s = coefficient_polynomials(7, 2.0, 3.0, 0.0, 1.5);
        assert_eq!(s.rhs_coeffs[3], 0.0);
        assert_eq!(s.rhs_coeffs[4], 0.0);
    }

    #[test]
    fn printed_coefficients_match_direct_evaluation() {
        let pts = sample_points(ManifoldModel::sphere(5).unwrap(), 40, 2).unwrap();
        for (k, p, q, m) in [(3, 4.0, -0.4, 2.9), (2, 1.0, 0.7, 0.5), (4, 2.5, 1.0, 3.0)] {
            let d = coefficient_direct_defect(5, k, p, q, m, &pts).unwrap();
            assert!(d < 1e-10, "k={k}: {d}");
        }
    }

    #[test]
    fn canonical_form() {
        let b = canonical_b(5, 1.0).unwrap();
        assert_eq!(b, QuadraticFormSpec::diagonal(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]).unwrap());
        assert!(canonical_b(4, 1.0).is_err());
    }

    #[test]
    fn rejected_dimensions() {
        for n in [1, 2, 3, 4, 6] {
            assert!(matches!(solve_classification(n), Err(Error::Rejected(_))), "n={n}");
        }
    }

    #[test]
    fn solve_five() {
        let r = solve_classification_with(5, &SolverConfig { samples: 40, seed: 3 }).unwrap();
        assert!((r.p - 4.0).abs() < 1e-12);
        assert_eq!(r.k_mult, 3);
        let s = 1.0 / 3f64.sqrt();
        assert!((r.printed_roots[0] - (-1.0 - s)).abs() < 1e-12);
        assert!((r.printed_roots[1] - (-1.0 + s)).abs() < 1e-12);
        assert_eq!(r.oracle_roots.len(), 2);
        let good: Vec<_> = r.candidates.iter().filter(|c| c.validated).collect();
        assert_eq!(good.len(), 1);
        assert!((good[0].q - (-1.0 + s)).abs() < 1e-9);
        assert!((good[0].mu_sq - (4.0 * 3f64.sqrt() - 4.0)).abs() < 1e-8);
        assert!(!r.discrepancies.is_empty());
    }
}
