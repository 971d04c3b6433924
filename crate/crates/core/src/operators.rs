//! Differential operators on vector fields and functions.
//!
//! Sign conventions: both the rough Laplacian ∇*∇ = −trace ∇² and the
//! function Laplacian Δ = −trace Hess have non-negative spectrum.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{frame_raw, AmbientField, FrameStrategy, ManifoldModel, Point, TangentVector, Vector};
use crate::oracle::{check_step, FD_STEP};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorConfig {
    pub fd_step: f64,
    pub frame_strategy: FrameStrategy,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            fd_step: FD_STEP,
            frame_strategy: FrameStrategy::GramSchmidt,
        }
    }
}

impl OperatorConfig {
    pub fn new(fd_step: f64, frame_strategy: FrameStrategy) -> Result<Self> {
        check_step(fd_step)?;
        Ok(OperatorConfig { fd_step, frame_strategy })
    }
}

/// Smooth function given with ambient first and second derivatives.
pub trait ScalarField: Sync {
    fn value(&self, x: &Vector) -> f64;
    fn d1(&self, x: &Vector, a: &Vector) -> f64;
    fn d2(&self, x: &Vector, a: &Vector, b: &Vector) -> f64;
}

/// f(x) = c.
#[derive(Clone, Copy, Debug)]
pub struct ConstantFunction(pub f64);

impl ScalarField for ConstantFunction {
    fn value(&self, _x: &Vector) -> f64 {
        self.0
    }
    fn d1(&self, _x: &Vector, _a: &Vector) -> f64 {
        0.0
    }
    fn d2(&self, _x: &Vector, _a: &Vector, _b: &Vector) -> f64 {
        0.0
    }
}

/// f(x) = ⟨a, x⟩.
#[derive(Clone, Debug)]
pub struct LinearFunction(pub Vector);

impl ScalarField for LinearFunction {
    fn value(&self, x: &Vector) -> f64 {
        self.0.dot(x)
    }
    fn d1(&self, _x: &Vector, a: &Vector) -> f64 {
        self.0.dot(a)
    }
    fn d2(&self, _x: &Vector, _a: &Vector, _b: &Vector) -> f64 {
        0.0
    }
}

/// f(x) = x · Ax with A symmetric.
#[derive(Clone, Debug)]
pub struct QuadraticFunction(pub DMatrix<f64>);

impl QuadraticFunction {
    pub fn new(a: DMatrix<f64>) -> Self {
        QuadraticFunction((&a + a.transpose()) * 0.5)
    }
}

impl ScalarField for QuadraticFunction {
    fn value(&self, x: &Vector) -> f64 {
        (&self.0 * x).dot(x)
    }
    fn d1(&self, x: &Vector, a: &Vector) -> f64 {
        2.0 * (&self.0 * x).dot(a)
    }
    fn d2(&self, _x: &Vector, a: &Vector, b: &Vector) -> f64 {
        2.0 * (&self.0 * a).dot(b)
    }
}

/// f = |σ|²/2 measured in the model metric.
pub struct HalfNormSquared<'a> {
    pub model: ManifoldModel,
    pub field: &'a dyn AmbientField,
}

impl ScalarField for HalfNormSquared<'_> {
    fn value(&self, x: &Vector) -> f64 {
        let s = self.field.value(x);
        0.5 * (self.model.metric_matrix(x) * &s).dot(&s)
    }

    fn d1(&self, x: &Vector, a: &Vector) -> f64 {
        let s = self.field.value(x);
        let ds = self.field.d1(x, a);
        let g = self.model.metric_matrix(x);
        let mut out = (&g * &ds).dot(&s);
        if let Some((dg, _)) = self.model.metric_partials(x) {
            let dga = dir_matrix(&dg, a);
            out += 0.5 * (dga * &s).dot(&s);
        }
        out
    }

    fn d2(&self, x: &Vector, a: &Vector, b: &Vector) -> f64 {
        let s = self.field.value(x);
        let dsa = self.field.d1(x, a);
        let dsb = self.field.d1(x, b);
        let dds = self.field.d2(x, a, b);
        let g = self.model.metric_matrix(x);
        let mut out = (&g * &dsa).dot(&dsb) + (&g * &dds).dot(&s);
        if let Some((dg, ddg)) = self.model.metric_partials(x) {
            let dga = dir_matrix(&dg, a);
            let dgb = dir_matrix(&dg, b);
            let mut ddgab = DMatrix::zeros(3, 3);
            for m in 0..3 {
                for l in 0..3 {
                    ddgab += &ddg[m][l] * (a[m] * b[l]);
                }
            }
            out += (dgb * &dsa).dot(&s) + (dga * &dsb).dot(&s) + 0.5 * (ddgab * &s).dot(&s);
        }
        out
    }
}

fn dir_matrix(d: &[DMatrix<f64>; 3], a: &Vector) -> DMatrix<f64> {
    &d[0] * a[0] + &d[1] * a[1] + &d[2] * a[2]
}

/// Everything the harmonicity equations need at one point, from one frame.
#[derive(Clone, Debug)]
pub struct LocalDerivatives {
    pub sigma: Vector,
    pub frame: Vec<Vector>,
    /// ∇_{eᵢ}σ
    pub nabla: Vec<Vector>,
    /// ∇*∇σ
    pub rough: Vector,
    /// X(σ) = ∇(|σ|²/2)
    pub x_sigma: Vector,
    /// ∇_{X(σ)}σ
    pub nabla_x_sigma: Vector,
    /// ∇_σ σ
    pub nabla_sigma_sigma: Vector,
    pub norm_sq: f64,
    pub grad_norm_sq: f64,
    pub x_norm_sq: f64,
    /// Δ(|σ|²/2) = ⟨∇*∇σ, σ⟩ − |∇σ|²
    pub lap_half_norm: f64,
    pub divergence: f64,
}

pub(crate) fn local_derivatives(
    model: ManifoldModel,
    field: &dyn AmbientField,
    x: &Vector,
    strategy: FrameStrategy,
) -> LocalDerivatives {
    let frame = frame_raw(model, x, strategy);
    let sigma = field.value(x);
    let nabla: Vec<Vector> = frame.iter().map(|e| model.cov(x, field, e)).collect();
    let n = sigma.len();
    let mut rough = Vector::zeros(n);
    let mut x_sigma = Vector::zeros(n);
    let mut grad_norm_sq = 0.0;
    let mut divergence = 0.0;
    for (e, ne) in frame.iter().zip(&nabla) {
        rough -= model.second_cov(x, field, e, e);
        x_sigma.axpy(model.inner(x, ne, &sigma), e, 1.0);
        grad_norm_sq += model.norm_sq(x, ne);
        divergence += model.inner(x, ne, e);
    }
    let nabla_x_sigma = model.cov(x, field, &x_sigma);
    let nabla_sigma_sigma = model.cov(x, field, &sigma);
    let norm_sq = model.norm_sq(x, &sigma);
    let x_norm_sq = model.norm_sq(x, &x_sigma);
    let lap_half_norm = model.inner(x, &rough, &sigma) - grad_norm_sq;
    LocalDerivatives {
        sigma,
        frame,
        nabla,
        rough,
        x_sigma,
        nabla_x_sigma,
        nabla_sigma_sigma,
        norm_sq,
        grad_norm_sq,
        x_norm_sq,
        lap_half_norm,
        divergence,
    }
}

pub(crate) fn prepare(model: ManifoldModel, field: &dyn AmbientField, x: &Point) -> Result<()> {
    if x.model != model {
        return Err(Error::ModelMismatch {
            field: "point".into(),
            model: model.name(),
        });
    }
    model.check_coords(&x.coords)?;
    field.check_model(model)
}

/// ∇²_{X,Y}σ.
pub fn second_cov(
    model: ManifoldModel,
    field: &dyn AmbientField,
    x: &Point,
    a: &TangentVector,
    b: &TangentVector,
) -> Result<TangentVector> {
    prepare(model, field, x)?;
    if &a.base != x || &b.base != x {
        return Err(Error::MismatchedBase);
    }
    Ok(x.wrap(model.second_cov(&x.coords, field, &a.comps, &b.comps)))
}

/// ∇*∇σ = −Σᵢ ∇²_{eᵢ,eᵢ}σ.
pub fn rough_laplacian(model: ManifoldModel, field: &dyn AmbientField, x: &Point) -> Result<TangentVector> {
    rough_laplacian_with(model, field, x, &OperatorConfig::default())
}

pub fn rough_laplacian_with(
    model: ManifoldModel,
    field: &dyn AmbientField,
    x: &Point,
    cfg: &OperatorConfig,
) -> Result<TangentVector> {
    prepare(model, field, x)?;
    let frame = frame_raw(model, &x.coords, cfg.frame_strategy);
    let out = frame
        .iter()
        .fold(Vector::zeros(x.coords.len()), |acc, e| acc - model.second_cov(&x.coords, field, e, e));
    Ok(x.wrap(out))
}

/// Hess f(a, b) at x.
pub(crate) fn hessian(model: ManifoldModel, f: &dyn ScalarField, x: &Vector, a: &Vector, b: &Vector) -> f64 {
    let (d_ext, nabla_ext) = model.extension_derivatives(x, a, b);
    f.d2(x, a, b) + f.d1(x, &d_ext) - f.d1(x, &nabla_ext)
}

/// Δf = −trace Hess f.
pub fn function_laplacian(model: ManifoldModel, f: &dyn ScalarField, x: &Point) -> Result<f64> {
    function_laplacian_with(model, f, x, &OperatorConfig::default())
}

pub fn function_laplacian_with(
    model: ManifoldModel,
    f: &dyn ScalarField,
    x: &Point,
    cfg: &OperatorConfig,
) -> Result<f64> {
    if x.model != model {
        return Err(Error::ModelMismatch {
            field: "point".into(),
            model: model.name(),
        });
    }
    model.check_coords(&x.coords)?;
    Ok(-frame_raw(model, &x.coords, cfg.frame_strategy)
        .iter()
        .map(|e| hessian(model, f, &x.coords, e, e))
        .sum::<f64>())
}

/// Riemannian gradient of a scalar field.
pub fn gradient(model: ManifoldModel, f: &dyn ScalarField, x: &Point) -> Result<TangentVector> {
    model.check_coords(&x.coords)?;
    let frame = frame_raw(model, &x.coords, FrameStrategy::GramSchmidt);
    let out = frame
        .iter()
        .fold(Vector::zeros(x.coords.len()), |acc, e| acc + e * f.d1(&x.coords, e));
    Ok(x.wrap(out))
}

/// X(σ) = ∇(|σ|²/2), dual to Y ↦ ⟨∇_Y σ, σ⟩.
pub fn x_of_sigma(model: ManifoldModel, field: &dyn AmbientField, x: &Point) -> Result<TangentVector> {
    prepare(model, field, x)?;
    let frame = frame_raw(model, &x.coords, FrameStrategy::GramSchmidt);
    let s = field.value(&x.coords);
    let out = frame.iter().fold(Vector::zeros(s.len()), |acc, e| {
        let ne = model.cov(&x.coords, field, e);
        acc + e * model.inner(&x.coords, &ne, &s)
    });
    Ok(x.wrap(out))
}

/// Div σ = Σᵢ ⟨∇_{eᵢ}σ, eᵢ⟩.
pub fn divergence(model: ManifoldModel, field: &dyn AmbientField, x: &Point) -> Result<f64> {
    divergence_with(model, field, x, &OperatorConfig::default())
}

pub fn divergence_with(model: ManifoldModel, field: &dyn AmbientField, x: &Point, cfg: &OperatorConfig) -> Result<f64> {
    prepare(model, field, x)?;
    Ok(frame_raw(model, &x.coords, cfg.frame_strategy)
        .iter()
        .map(|e| model.inner(&x.coords, &model.cov(&x.coords, field, e), e))
        .sum())
}

/// (|σ|², |∇σ|², |X(σ)|², Δ(|σ|²/2)) from a single frame pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormsBundle {
    pub norm_sq: f64,
    pub grad_norm_sq: f64,
    pub x_norm_sq: f64,
    pub lap_half_norm: f64,
}

pub fn norms_bundle(model: ManifoldModel, field: &dyn AmbientField, x: &Point) -> Result<NormsBundle> {
    norms_bundle_with(model, field, x, &OperatorConfig::default())
}

pub fn norms_bundle_with(
    model: ManifoldModel,
    field: &dyn AmbientField,
    x: &Point,
    cfg: &OperatorConfig,
) -> Result<NormsBundle> {
    prepare(model, field, x)?;
    let d = local_derivatives(model, field, &x.coords, cfg.frame_strategy);
    Ok(NormsBundle {
        norm_sq: d.norm_sq,
        grad_norm_sq: d.grad_norm_sq,
        x_norm_sq: d.x_norm_sq,
        lap_half_norm: d.lap_half_norm,
    })
}

/// max |⟨∇_{eᵢ}σ, eⱼ⟩ + ⟨∇_{eⱼ}σ, eᵢ⟩| over a frame.
pub fn killing_defect(model: ManifoldModel, field: &dyn AmbientField, x: &Point) -> Result<f64> {
    prepare(model, field, x)?;
    Ok(killing_defect_raw(model, field, &x.coords))
}

pub(crate) fn killing_defect_raw(model: ManifoldModel, field: &dyn AmbientField, x: &Vector) -> f64 {
    let frame = frame_raw(model, x, FrameStrategy::GramSchmidt);
    let nabla: Vec<Vector> = frame.iter().map(|e| model.cov(x, field, e)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..frame.len() {
        for j in i..frame.len() {
            let s = model.inner(x, &nabla[i], &frame[j]) + model.inner(x, &nabla[j], &frame[i]);
            worst = worst.max(s.abs());
        }
    }
    worst
}
