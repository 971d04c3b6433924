//! Model manifolds and their Riemannian structure.
//!
//! Four models are supported:
//!
//! * `Sphere { n }`: the round unit sphere Sⁿ ⊂ ℝⁿ⁺¹. Points and tangent
//!   vectors use ambient coordinates; the Levi-Civita connection is the
//!   ambient derivative followed by tangential projection.
//! * `Heisenberg3`: ℝ³ with metric dx² + dy² + (dz − x dy)².
//! * `Sl2Universal`: the upper half space z > 0 with metric
//!   (dx + dy/z)² + (dy² + dz²)/z², a model of the universal cover of SL₂(ℝ).
//! * `SphereCrossLine`: the product S² × ℝ, points stored as (unit 3-vector, t).
//!
//! Curvature follows R(X,Y) = [∇_X, ∇_Y] − ∇_{[X,Y]}, so the round sphere has
//! g(R(X,Y)Y, X) = +1 on orthonormal pairs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient or coordinate components.
pub type Vector = DVector<f64>;

/// First and second coordinate partials of the metric matrix.
pub(crate) type MetricPartials = ([DMatrix<f64>; 3], [[DMatrix<f64>; 3]; 3]);

/// Tangency tolerance for embedded models.
pub const TANGENCY_TOL: f64 = 1e-10;

/// Vector field given by a smooth ambient extension together with its first
/// and second directional derivatives in ambient (or chart) coordinates.
///
/// Only the restriction to the model matters for covariant quantities, but the
/// derivatives must be those of one consistent smooth extension.
pub trait AmbientField: Sync {
    /// Fails when the field is not defined on `model`.
    fn check_model(&self, model: ManifoldModel) -> Result<()>;
    fn value(&self, x: &Vector) -> Vector;
    /// D σ(x)[a]
    fn d1(&self, x: &Vector, a: &Vector) -> Vector;
    /// D² σ(x)[a, b]
    fn d2(&self, x: &Vector, a: &Vector, b: &Vector) -> Vector;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldModel {
    Sphere { n: usize },
    Heisenberg3,
    Sl2Universal,
    SphereCrossLine,
}

/// Christoffel symbols of a coordinate model at a point: `gamma[k][i][j]` is
/// Γᵏᵢⱼ and `dgamma[m][k][i][j]` its partial derivative along coordinate m.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub gamma: [[[f64; 3]; 3]; 3],
    pub dgamma: [[[[f64; 3]; 3]; 3]; 3],
}

impl Christoffel {
    fn zero() -> Self {
        Christoffel {
            gamma: [[[0.0; 3]; 3]; 3],
            dgamma: [[[[0.0; 3]; 3]; 3]; 3],
        }
    }

    fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.gamma[k][i][j] = value;
        self.gamma[k][j][i] = value;
    }

    fn set_d(&mut self, m: usize, k: usize, i: usize, j: usize, value: f64) {
        self.dgamma[m][k][i][j] = value;
        self.dgamma[m][k][j][i] = value;
    }

    /// Γ(a, b)ᵏ = Γᵏᵢⱼ aⁱ bʲ
    pub fn apply(&self, a: &Vector, b: &Vector) -> Vector {
        Vector::from_fn(3, |k, _| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += self.gamma[k][i][j] * a[i] * b[j];
                }
            }
            s
        })
    }

    /// (D_c Γ)(a, b)
    pub fn apply_derivative(&self, c: &Vector, a: &Vector, b: &Vector) -> Vector {
        Vector::from_fn(3, |k, _| {
            let mut s = 0.0;
            for m in 0..3 {
                if c[m] == 0.0 {
                    continue;
                }
                for i in 0..3 {
                    for j in 0..3 {
                        s += c[m] * self.dgamma[m][k][i][j] * a[i] * b[j];
                    }
                }
            }
            s
        })
    }
}

impl ManifoldModel {
    pub fn sphere(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "sphere dimension must be at least 2, got {n}"
            )));
        }
        Ok(ManifoldModel::Sphere { n })
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldModel::Sphere { n } => n,
            _ => 3,
        }
    }

    /// Length of the coordinate representation.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldModel::Sphere { n } => n + 1,
            ManifoldModel::SphereCrossLine => 4,
            _ => 3,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            ManifoldModel::Sphere { n } => format!("sphere:{n}"),
            ManifoldModel::Heisenberg3 => "heisenberg".into(),
            ManifoldModel::Sl2Universal => "sl2".into(),
            ManifoldModel::SphereCrossLine => "s2xr".into(),
        }
    }

    pub fn is_embedded(&self) -> bool {
        self.sphere_block().is_some()
    }

    /// Number of leading ambient coordinates forming a unit vector.
    pub(crate) fn sphere_block(&self) -> Option<usize> {
        match *self {
            ManifoldModel::Sphere { n } => Some(n + 1),
            ManifoldModel::SphereCrossLine => Some(3),
            _ => None,
        }
    }

    /// Builds a point, renormalising sphere factors and checking domains.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        Point::new(*self, coords)
    }

    fn domain_error(&self, reason: impl Into<String>) -> Error {
        Error::Domain {
            model: self.name(),
            reason: reason.into(),
        }
    }

    pub(crate) fn check_coords(&self, x: &Vector) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::Dimension {
                expected: self.ambient_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(self.domain_error("non-finite coordinate"));
        }
        if let ManifoldModel::Sl2Universal = self {
            if x[2] <= 0.0 {
                return Err(self.domain_error(format!("z = {} must be positive", x[2])));
            }
        }
        if let Some(m) = self.sphere_block() {
            let r = x.rows(0, m).norm();
            if (r - 1.0).abs() > 1e-12 {
                return Err(self.domain_error(format!("sphere factor has norm {r}")));
            }
        }
        Ok(())
    }

    /// Gram matrix of the metric in the ambient/chart basis.
    pub fn metric_matrix(&self, x: &Vector) -> DMatrix<f64> {
        match *self {
            ManifoldModel::Heisenberg3 => {
                let a = x[0];
                DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0 + a * a, -a, 0.0, -a, 1.0])
            }
            ManifoldModel::Sl2Universal => {
                let z = x[2];
                let z2 = z * z;
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[1.0, 1.0 / z, 0.0, 1.0 / z, 2.0 / z2, 0.0, 0.0, 0.0, 1.0 / z2],
                )
            }
            _ => DMatrix::identity(self.ambient_dim(), self.ambient_dim()),
        }
    }

    /// Partial derivatives ∂ₘG and second partials ∂ₘ∂ₗG of the metric
    /// matrix; empty on embedded models where G is constant.
    pub(crate) fn metric_partials(&self, x: &Vector) -> Option<MetricPartials> {
        let z3 = || DMatrix::<f64>::zeros(3, 3);
        let mut d = [z3(), z3(), z3()];
        let mut dd = [[z3(), z3(), z3()], [z3(), z3(), z3()], [z3(), z3(), z3()]];
        match *self {
            ManifoldModel::Heisenberg3 => {
                let a = x[0];
                d[0] = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 2.0 * a, -1.0, 0.0, -1.0, 0.0]);
                dd[0][0][(1, 1)] = 2.0;
            }
            ManifoldModel::Sl2Universal => {
                let z = x[2];
                let (z2, z3, z4) = (z * z, z * z * z, z * z * z * z);
                d[2] = DMatrix::from_row_slice(
                    3,
                    3,
                    &[0.0, -1.0 / z2, 0.0, -1.0 / z2, -4.0 / z3, 0.0, 0.0, 0.0, -2.0 / z3],
                );
                dd[2][2] = DMatrix::from_row_slice(
                    3,
                    3,
                    &[0.0, 2.0 / z3, 0.0, 2.0 / z3, 12.0 / z4, 0.0, 0.0, 0.0, 6.0 / z4],
                );
            }
            _ => return None,
        }
        Some((d, dd))
    }

    pub(crate) fn inner(&self, x: &Vector, u: &Vector, v: &Vector) -> f64 {
        if self.is_embedded() {
            u.dot(v)
        } else {
            (self.metric_matrix(x) * v).dot(u)
        }
    }

    pub(crate) fn norm_sq(&self, x: &Vector, u: &Vector) -> f64 {
        self.inner(x, u, u)
    }

    /// Orthogonal projection onto the tangent space (identity on charts).
    pub(crate) fn project(&self, x: &Vector, v: &Vector) -> Vector {
        match self.sphere_block() {
            Some(m) => {
                let s = x.rows(0, m);
                let c = s.dot(&v.rows(0, m));
                let mut out = v.clone();
                out.rows_mut(0, m).axpy(-c, &s, 1.0);
                out
            }
            None => v.clone(),
        }
    }

    /// Derivative of the projection field x ↦ Π_x v along `dir`.
    pub(crate) fn dproject(&self, x: &Vector, dir: &Vector, v: &Vector) -> Vector {
        let mut out = Vector::zeros(v.len());
        if let Some(m) = self.sphere_block() {
            let s = x.rows(0, m);
            let d = dir.rows(0, m);
            let w = v.rows(0, m);
            let sw = s.dot(&w);
            let dw = d.dot(&w);
            let mut block = out.rows_mut(0, m);
            block.axpy(-sw, &d, 0.0);
            block.axpy(-dw, &s, 1.0);
        }
        out
    }

    /// Maps a nearby ambient point back onto the model.
    pub(crate) fn retract(&self, y: &Vector) -> Vector {
        match self.sphere_block() {
            Some(m) => {
                let mut out = y.clone();
                let r = out.rows(0, m).norm();
                out.rows_mut(0, m).scale_mut(1.0 / r);
                out
            }
            None => y.clone(),
        }
    }

    /// Closed-form Christoffel symbols for the coordinate models.
    pub fn christoffel(&self, x: &Vector) -> Option<Christoffel> {
        match *self {
            ManifoldModel::Heisenberg3 => {
                let a = x[0];
                let mut c = Christoffel::zero();
                c.set(0, 1, 1, -a);
                c.set(0, 1, 2, 0.5);
                c.set(1, 0, 1, 0.5 * a);
                c.set(1, 0, 2, -0.5);
                c.set(2, 0, 1, 0.5 * (a * a - 1.0));
                c.set(2, 0, 2, -0.5 * a);
                c.set_d(0, 0, 1, 1, -1.0);
                c.set_d(0, 1, 0, 1, 0.5);
                c.set_d(0, 2, 0, 1, a);
                c.set_d(0, 2, 0, 2, -0.5);
                Some(c)
            }
            ManifoldModel::Sl2Universal => {
                let z = x[2];
                let (z2, z3) = (z * z, z * z * z);
                let mut c = Christoffel::zero();
                c.set(0, 1, 2, 1.0 / z2);
                c.set(0, 0, 2, 0.5 / z);
                c.set(1, 1, 2, -1.5 / z);
                c.set(1, 0, 2, -0.5);
                c.set(2, 2, 2, -1.0 / z);
                c.set(2, 0, 1, 0.5);
                c.set(2, 1, 1, 2.0 / z);
                c.set_d(2, 0, 1, 2, -2.0 / z3);
                c.set_d(2, 0, 0, 2, -0.5 / z2);
                c.set_d(2, 1, 1, 2, 1.5 / z2);
                c.set_d(2, 2, 2, 2, 1.0 / z2);
                c.set_d(2, 2, 1, 1, -2.0 / z2);
                Some(c)
            }
            _ => None,
        }
    }

    /// ∇_a σ at x.
    pub(crate) fn cov(&self, x: &Vector, field: &dyn AmbientField, a: &Vector) -> Vector {
        let da = field.d1(x, a);
        match self.christoffel(x) {
            Some(ch) => da + ch.apply(a, &field.value(x)),
            None => self.project(x, &da),
        }
    }

    /// For the canonical extension Ỹ of b (Π b on embedded models, the
    /// constant field on charts) returns (D_a Ỹ, ∇_a Ỹ) at x.
    pub(crate) fn extension_derivatives(&self, x: &Vector, a: &Vector, b: &Vector) -> (Vector, Vector) {
        match self.christoffel(x) {
            Some(ch) => (Vector::zeros(b.len()), ch.apply(a, b)),
            None => {
                let d = self.dproject(x, a, b);
                let nabla = self.project(x, &d);
                (d, nabla)
            }
        }
    }

    /// ∇²_{a,b} σ = ∇_a(∇σ)(b) at x.
    pub(crate) fn second_cov(&self, x: &Vector, field: &dyn AmbientField, a: &Vector, b: &Vector) -> Vector {
        match self.christoffel(x) {
            Some(ch) => {
                let s = field.value(x);
                let ds_a = field.d1(x, a);
                let ds_b = field.d1(x, b);
                let gab = ch.apply(a, b);
                let w = &ds_b + ch.apply(b, &s);
                field.d2(x, a, b)
                    + ch.apply_derivative(a, b, &s)
                    + ch.apply(b, &ds_a)
                    + ch.apply(a, &w)
                    - field.d1(x, &gab)
                    - ch.apply(&gab, &s)
            }
            None => {
                let ds_b = field.d1(x, b);
                let dpb = self.dproject(x, a, b);
                let inner = self.dproject(x, a, &ds_b) + field.d2(x, a, b) + field.d1(x, &dpb);
                let nabla_ab = self.project(x, &dpb);
                self.project(x, &inner) - self.project(x, &field.d1(x, &nabla_ab))
            }
        }
    }

    /// R(a,b)c at x.
    pub(crate) fn curvature(&self, x: &Vector, a: &Vector, b: &Vector, c: &Vector) -> Vector {
        match self.christoffel(x) {
            Some(ch) => {
                // written as K(a,b) − K(b,a) so antisymmetry holds bit for bit
                let k = |u: &Vector, v: &Vector| ch.apply_derivative(u, v, c) + ch.apply(u, &ch.apply(v, c));
                k(a, b) - k(b, a)
            }
            None => {
                let m = self.sphere_block().expect("embedded model");
                let (a_s, b_s, c_s) = (a.rows(0, m), b.rows(0, m), c.rows(0, m));
                let mut out = Vector::zeros(a.len());
                out.rows_mut(0, m).axpy(b_s.dot(&c_s), &a_s, 0.0);
                out.rows_mut(0, m).axpy(-a_s.dot(&c_s), &b_s, 1.0);
                out
            }
        }
    }

    fn frame_seeds(&self, x: &Vector) -> Vec<Vector> {
        let n = self.ambient_dim();
        let unit = |i: usize| {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            e
        };
        match *self {
            ManifoldModel::Sphere { .. } | ManifoldModel::SphereCrossLine => {
                let m = self.sphere_block().unwrap();
                // drop the ambient axis most aligned with the sphere factor
                let mut drop = 0;
                for i in 1..m {
                    if x[i].abs() > x[drop].abs() {
                        drop = i;
                    }
                }
                (0..n).filter(|&i| i != drop).map(unit).collect()
            }
            // ∂z, ∂y, ∂x yields ∂z, ∂y + x∂z, ∂x
            ManifoldModel::Heisenberg3 => vec![unit(2), unit(1), unit(0)],
            ManifoldModel::Sl2Universal => vec![unit(0), unit(1), unit(2)],
        }
    }

    /// Deterministic orthonormal frame at x (Gram–Schmidt on fixed seeds).
    pub(crate) fn frame_vectors(&self, x: &Vector) -> Vec<Vector> {
        let seeds = self.frame_seeds(x);
        let mut out: Vec<Vector> = Vec::with_capacity(seeds.len());
        for seed in seeds {
            let mut v = self.project(x, &seed);
            for e in &out {
                let c = self.inner(x, &v, e);
                v.axpy(-c, e, 1.0);
            }
            let norm = self.norm_sq(x, &v).sqrt();
            assert!(norm > 1e-8, "degenerate frame seed on {}", self.name());
            out.push(v / norm);
        }
        if let ManifoldModel::Heisenberg3 = self {
            out.reverse();
        }
        out
    }
}

/// Point of a model manifold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    pub model: ManifoldModel,
    pub coords: Vector,
}

impl Point {
    /// Sphere factors are renormalised; chart domains are checked.
    pub fn new(model: ManifoldModel, coords: &[f64]) -> Result<Self> {
        if coords.len() != model.ambient_dim() {
            return Err(Error::Dimension {
                expected: model.ambient_dim(),
                got: coords.len(),
            });
        }
        let mut v = Vector::from_column_slice(coords);
        if let Some(m) = model.sphere_block() {
            let r = v.rows(0, m).norm();
            if !(r.is_finite() && r > 0.0) {
                return Err(model.domain_error("cannot normalise a zero sphere coordinate"));
            }
            v.rows_mut(0, m).scale_mut(1.0 / r);
        }
        model.check_coords(&v)?;
        Ok(Point { model, coords: v })
    }

    /// Tangent vector at this point; embedded components are projected.
    pub fn tangent(&self, comps: &[f64]) -> Result<TangentVector> {
        if comps.len() != self.model.ambient_dim() {
            return Err(Error::Dimension {
                expected: self.model.ambient_dim(),
                got: comps.len(),
            });
        }
        let v = self.model.project(&self.coords, &Vector::from_column_slice(comps));
        Ok(TangentVector {
            base: self.clone(),
            comps: v,
        })
    }

    pub(crate) fn wrap(&self, comps: Vector) -> TangentVector {
        TangentVector {
            base: self.clone(),
            comps,
        }
    }
}

/// Tangent vector with its base point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangentVector {
    pub base: Point,
    pub comps: Vector,
}

impl TangentVector {
    /// Rejects vectors that are not tangent within [`TANGENCY_TOL`].
    pub fn new(base: &Point, comps: &[f64]) -> Result<Self> {
        let v = Vector::from_column_slice(comps);
        if v.len() != base.model.ambient_dim() {
            return Err(Error::Dimension {
                expected: base.model.ambient_dim(),
                got: v.len(),
            });
        }
        let defect = (&v - base.model.project(&base.coords, &v)).norm();
        if defect > TANGENCY_TOL {
            return Err(base.model.domain_error(format!("vector is not tangent (defect {defect:e})")));
        }
        Ok(TangentVector {
            base: base.clone(),
            comps: v,
        })
    }

    pub fn norm(&self) -> f64 {
        self.base.model.norm_sq(&self.base.coords, &self.comps).sqrt()
    }
}

/// Orthonormal frame at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frame {
    pub base: Point,
    pub vectors: Vec<TangentVector>,
}

/// Deterministic frame choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStrategy {
    /// Gram–Schmidt on the model's fixed seed basis.
    #[default]
    GramSchmidt,
    /// The Gram–Schmidt frame mixed by a fixed orthogonal matrix.
    Rotated,
}

/// Fixed orthogonal mixing: consecutive Givens rotations.
fn rotate_frame(model: ManifoldModel, x: &Vector, frame: Vec<Vector>) -> Vec<Vector> {
    let mut out = frame;
    for i in 0..out.len().saturating_sub(1) {
        let theta = 0.7 + 0.1 * i as f64;
        let (c, s) = (theta.cos(), theta.sin());
        let a = out[i].clone();
        let b = out[i + 1].clone();
        out[i] = &a * c + &b * s;
        out[i + 1] = &b * c - &a * s;
    }
    debug_assert!(out
        .iter()
        .all(|v| (model.norm_sq(x, v) - 1.0).abs() < 1e-9));
    out
}

pub(crate) fn frame_raw(model: ManifoldModel, x: &Vector, strategy: FrameStrategy) -> Vec<Vector> {
    let base = model.frame_vectors(x);
    match strategy {
        FrameStrategy::GramSchmidt => base,
        FrameStrategy::Rotated => rotate_frame(model, x, base),
    }
}

pub(crate) fn check_point(model: ManifoldModel, x: &Point) -> Result<()> {
    if x.model != model {
        return Err(Error::ModelMismatch {
            field: "point".into(),
            model: model.name(),
        });
    }
    model.check_coords(&x.coords)
}

pub(crate) fn check_based(x: &Point, v: &TangentVector) -> Result<()> {
    if &v.base != x {
        return Err(Error::MismatchedBase);
    }
    Ok(())
}

/// g_x(u, v).
pub fn metric_eval(model: ManifoldModel, x: &Point, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    check_point(model, x)?;
    check_based(x, u)?;
    check_based(x, v)?;
    Ok(model.inner(&x.coords, &u.comps, &v.comps))
}

/// ∇_X σ at x.
pub fn levi_civita(
    model: ManifoldModel,
    field: &dyn AmbientField,
    x: &Point,
    dir: &TangentVector,
) -> Result<TangentVector> {
    check_point(model, x)?;
    check_based(x, dir)?;
    field.check_model(model)?;
    Ok(x.wrap(model.cov(&x.coords, field, &dir.comps)))
}

/// R(X,Y)Z at x.
pub fn curvature_op(
    model: ManifoldModel,
    x: &Point,
    a: &TangentVector,
    b: &TangentVector,
    c: &TangentVector,
) -> Result<TangentVector> {
    check_point(model, x)?;
    for v in [a, b, c] {
        check_based(x, v)?;
    }
    Ok(x.wrap(model.curvature(&x.coords, &a.comps, &b.comps, &c.comps)))
}

pub(crate) fn ricci_raw(model: ManifoldModel, x: &Vector, v: &Vector, strategy: FrameStrategy) -> Vector {
    frame_raw(model, x, strategy)
        .iter()
        .fold(Vector::zeros(v.len()), |acc, e| acc + model.curvature(x, v, e, e))
}

/// Ric(v) = Σᵢ R(v, eᵢ)eᵢ.
pub fn ricci_op(model: ManifoldModel, x: &Point, v: &TangentVector) -> Result<TangentVector> {
    check_point(model, x)?;
    check_based(x, v)?;
    Ok(x.wrap(ricci_raw(model, &x.coords, &v.comps, FrameStrategy::GramSchmidt)))
}

/// Metric-orthonormal frame at x.
pub fn orthonormal_frame(model: ManifoldModel, x: &Point) -> Result<Frame> {
    orthonormal_frame_with(model, x, FrameStrategy::GramSchmidt)
}

pub fn orthonormal_frame_with(model: ManifoldModel, x: &Point, strategy: FrameStrategy) -> Result<Frame> {
    check_point(model, x)?;
    let vectors = frame_raw(model, &x.coords, strategy)
        .into_iter()
        .map(|v| x.wrap(v))
        .collect();
    Ok(Frame {
        base: x.clone(),
        vectors,
    })
}

/// Curvature component in the index convention R_{ijkl} = g(R(eᵢ,eⱼ)e_l, e_k),
/// under which horizontal Heisenberg planes give R₁₂₂₁ = 3/4.
pub fn curvature_component(model: ManifoldModel, x: &Point, frame: &Frame, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
    check_point(model, x)?;
    let e = &frame.vectors;
    let r = model.curvature(&x.coords, &e[i].comps, &e[j].comps, &e[l].comps);
    Ok(model.inner(&x.coords, &r, &e[k].comps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3() -> ManifoldModel {
        ManifoldModel::Heisenberg3
    }

    #[test]
    fn heisenberg_metric_yy_component() {
        let x = h3().point(&[1.0, 0.0, 0.0]).unwrap();
        let dy = x.tangent(&[0.0, 1.0, 0.0]).unwrap();
        assert!((metric_eval(h3(), &x, &dy, &dy).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sl2_metric_yy_component() {
        let m = ManifoldModel::Sl2Universal;
        let x = m.point(&[0.0, 0.0, 1.0]).unwrap();
        let dy = x.tangent(&[0.0, 1.0, 0.0]).unwrap();
        assert!((metric_eval(m, &x, &dy, &dy).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_unit_tangent_has_unit_length() {
        let m = ManifoldModel::sphere(3).unwrap();
        let x = m.point(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let u = x.tangent(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((metric_eval(m, &x, &u, &u).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_points_are_renormalised() {
        let m = ManifoldModel::sphere(2).unwrap();
        let x = m.point(&[3.0, 0.0, 4.0]).unwrap();
        assert!((x.coords.norm() - 1.0).abs() < 1e-15);
        assert!(m.point(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn sl2_rejects_nonpositive_z() {
        let m = ManifoldModel::Sl2Universal;
        assert!(matches!(m.point(&[0.0, 0.0, 0.0]), Err(Error::Domain { .. })));
        assert!(m.point(&[0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn small_spheres_are_rejected() {
        assert!(ManifoldModel::sphere(1).is_err());
    }

    #[test]
    fn mismatched_base_is_an_error() {
        let m = ManifoldModel::sphere(2).unwrap();
        let x = m.point(&[0.0, 0.0, 1.0]).unwrap();
        let y = m.point(&[1.0, 0.0, 0.0]).unwrap();
        let u = x.tangent(&[1.0, 0.0, 0.0]).unwrap();
        let v = y.tangent(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(metric_eval(m, &x, &u, &v), Err(Error::MismatchedBase));
    }

    #[test]
    fn non_tangent_vectors_are_rejected() {
        let m = ManifoldModel::sphere(2).unwrap();
        let x = m.point(&[0.0, 0.0, 1.0]).unwrap();
        assert!(TangentVector::new(&x, &[0.0, 0.0, 1.0]).is_err());
        assert!(TangentVector::new(&x, &[1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn heisenberg_frame_is_left_invariant_frame() {
        let x = h3().point(&[0.7, -1.2, 2.0]).unwrap();
        let f = orthonormal_frame(h3(), &x).unwrap();
        let expect = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.7], [0.0, 0.0, 1.0]];
        for (v, e) in f.vectors.iter().zip(expect) {
            assert!((&v.comps - Vector::from_column_slice(&e)).norm() < 1e-14);
        }
    }

    #[test]
    fn sl2_frame_matches_named_frame() {
        let m = ManifoldModel::Sl2Universal;
        let x = m.point(&[0.0, 0.0, 1.0]).unwrap();
        let f = orthonormal_frame(m, &x).unwrap();
        let expect = [[1.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for (v, e) in f.vectors.iter().zip(expect) {
            assert!((&v.comps - Vector::from_column_slice(&e)).norm() < 1e-14);
        }
        let y = m.point(&[0.3, 2.0, 2.5]).unwrap();
        let f = orthonormal_frame(m, &y).unwrap();
        let expect = [[1.0, 0.0, 0.0], [-1.0, 2.5, 0.0], [0.0, 0.0, 2.5]];
        for (v, e) in f.vectors.iter().zip(expect) {
            assert!((&v.comps - Vector::from_column_slice(&e)).norm() < 1e-13);
        }
    }

    #[test]
    fn sphere_north_pole_frame_is_equator_basis() {
        let m = ManifoldModel::sphere(2).unwrap();
        let x = m.point(&[0.0, 0.0, 1.0]).unwrap();
        let f = orthonormal_frame(m, &x).unwrap();
        assert_eq!(f.vectors[0].comps.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(f.vectors[1].comps.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn frames_are_orthonormal_for_both_strategies() {
        let cases = [
            (ManifoldModel::sphere(4).unwrap(), vec![0.3, -0.2, 0.5, 0.1, 0.7]),
            (h3(), vec![0.4, 1.5, -0.3]),
            (ManifoldModel::Sl2Universal, vec![-0.5, 0.2, 0.8]),
            (ManifoldModel::SphereCrossLine, vec![0.1, 0.9, -0.4, 1.3]),
        ];
        for (m, c) in cases {
            let x = m.point(&c).unwrap();
            for strategy in [FrameStrategy::GramSchmidt, FrameStrategy::Rotated] {
                let f = orthonormal_frame_with(m, &x, strategy).unwrap();
                assert_eq!(f.vectors.len(), m.dim());
                for (i, a) in f.vectors.iter().enumerate() {
                    for (j, b) in f.vectors.iter().enumerate() {
                        let g = metric_eval(m, &x, a, b).unwrap();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((g - want).abs() < 1e-10, "{m:?} {strategy:?} {i} {j} {g}");
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_is_antisymmetric_exactly() {
        let m = h3();
        let x = m.point(&[0.4, -0.3, 1.1]).unwrap();
        let a = x.tangent(&[0.2, 1.0, -0.5]).unwrap();
        let b = x.tangent(&[-0.7, 0.3, 0.9]).unwrap();
        let c = x.tangent(&[0.5, 0.5, 0.1]).unwrap();
        let r1 = curvature_op(m, &x, &a, &b, &c).unwrap();
        let r2 = curvature_op(m, &x, &b, &a, &c).unwrap();
        assert_eq!(r1.comps, -r2.comps);
    }

    #[test]
    fn sphere_ricci_is_n_minus_one() {
        let m = ManifoldModel::sphere(5).unwrap();
        let x = m.point(&[0.1, 0.2, -0.3, 0.4, 0.5, -0.6]).unwrap();
        let v = x.tangent(&[1.0, -1.0, 0.5, 0.0, 0.2, 0.3]).unwrap();
        let r = ricci_op(m, &x, &v).unwrap();
        assert!((&r.comps - &v.comps * 4.0).norm() < 1e-13);
    }

    #[test]
    fn product_ricci_kills_line_direction() {
        let m = ManifoldModel::SphereCrossLine;
        let x = m.point(&[0.0, 0.6, 0.8, 2.0]).unwrap();
        let dt = x.tangent(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(ricci_op(m, &x, &dt).unwrap().comps.norm() < 1e-15);
        let v = x.tangent(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((ricci_op(m, &x, &v).unwrap().comps - &v.comps).norm() < 1e-14);
    }
}
