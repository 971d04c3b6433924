//! Closed-form vector field catalog.
//!
//! Every field is given by an explicit ambient (or chart) formula together
//! with its first and second ambient derivatives, so covariant quantities can
//! be evaluated without numerical differentiation.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{AmbientField, ManifoldModel, Point, TangentVector, Vector};

/// Symmetric matrix B of a quadratic form β(x, y) = Bx · y.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFormSpec {
    b: DMatrix<f64>,
}

impl QuadraticFormSpec {
    /// Symmetrises the input: B ← (B + Bᵀ)/2.
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        if b.nrows() != b.ncols() || b.nrows() < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadratic form needs a square matrix of size >= 2, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let sym = (&b + b.transpose()) * 0.5;
        Ok(QuadraticFormSpec { b: sym })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&Vector::from_column_slice(entries)))
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new(DMatrix::identity(size, size))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn size(&self) -> usize {
        self.b.nrows()
    }

    /// Bᵏ (k = 0 gives the identity).
    pub fn power(&self, k: u32) -> DMatrix<f64> {
        let mut out = DMatrix::identity(self.size(), self.size());
        for _ in 0..k {
            out = &out * &self.b;
        }
        out
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.b.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        match x.model {
            ManifoldModel::Sphere { n } if n + 1 == self.size() => Ok(()),
            ManifoldModel::Sphere { n } => Err(Error::Dimension {
                expected: n + 1,
                got: self.size(),
            }),
            other => Err(Error::ModelMismatch {
                field: "quadratic form".into(),
                model: other.name(),
            }),
        }
    }
}

impl serde::Serialize for QuadraticFormSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Scalar profile F with analytic F′ and F″.
pub trait ScalarProfile: Send + Sync + fmt::Debug {
    fn eval(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
    fn describe(&self) -> String;
}

/// F(t) = c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantProfile(pub f64);

impl ScalarProfile for ConstantProfile {
    fn eval(&self, _t: f64) -> f64 {
        self.0
    }
    fn d1(&self, _t: f64) -> f64 {
        0.0
    }
    fn d2(&self, _t: f64) -> f64 {
        0.0
    }
    fn describe(&self) -> String {
        format!("const({})", self.0)
    }
}

/// F(t) = c·tᵉ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerProfile {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerProfile {
    /// F(t) = 1/√((p − 1)t), the profile solving the rotation-field ODE.
    pub fn inverse_sqrt_for(p: f64) -> Result<Self> {
        if p <= 1.0 {
            return Err(Error::InvalidParameter(format!("need p > 1, got {p}")));
        }
        Ok(PowerProfile {
            coef: 1.0 / (p - 1.0).sqrt(),
            exponent: -0.5,
        })
    }
}

impl ScalarProfile for PowerProfile {
    fn eval(&self, t: f64) -> f64 {
        self.coef * t.powf(self.exponent)
    }
    fn d1(&self, t: f64) -> f64 {
        self.coef * self.exponent * t.powf(self.exponent - 1.0)
    }
    fn d2(&self, t: f64) -> f64 {
        self.coef * self.exponent * (self.exponent - 1.0) * t.powf(self.exponent - 2.0)
    }
    fn describe(&self) -> String {
        format!("{}*t^{}", self.coef, self.exponent)
    }
}

/// Caller-supplied F, F′, F″.
pub struct FnProfile {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnProfile({})", self.name)
    }
}

impl ScalarProfile for FnProfile {
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn d1(&self, t: f64) -> f64 {
        (self.df)(t)
    }
    fn d2(&self, t: f64) -> f64 {
        (self.d2f)(t)
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Vector field catalog.
#[derive(Clone, Debug)]
pub enum VectorFieldSpec {
    /// σ(x) = k·Jx on an odd-dimensional sphere, J the standard complex structure.
    Hopf { scale: f64 },
    /// σ(x) = a × x on S².
    RotationS2 { axis: Vector },
    /// σ(x) = a − ⟨a, x⟩x, the spherical gradient of ⟨a, x⟩.
    ConformalSphere { a: Vector },
    /// σ_k(x) = Bᵏx − (Bᵏx · x)x.
    QuadraticGradient { form: QuadraticFormSpec, power: u32 },
    /// F(t)·(a × x) on S² with t = |x|² − ⟨a, x⟩².
    ProfiledRotation { profile: Arc<dyn ScalarProfile>, axis: Vector },
    /// Frame field E_{index+1} of a coordinate model, or ∂/∂t (index 2) on S² × ℝ.
    FrameField { model: ManifoldModel, index: usize },
    Zero,
    Sum(Box<VectorFieldSpec>, Box<VectorFieldSpec>),
    Scale(f64, Box<VectorFieldSpec>),
}

fn unit_axis(axis: &[f64]) -> Result<Vector> {
    if axis.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: axis.len(),
        });
    }
    let v = Vector::from_column_slice(axis);
    let r = v.norm();
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter("rotation axis must be non-zero".into()));
    }
    Ok(v / r)
}

fn cross(a: &Vector, b: &Vector) -> Vector {
    Vector::from_column_slice(&[
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Standard complex structure J(x₁, x₂, …) = (−x₂, x₁, …).
fn complex_structure(v: &Vector) -> Vector {
    let mut out = Vector::zeros(v.len());
    for i in (0..v.len()).step_by(2) {
        out[i] = -v[i + 1];
        out[i + 1] = v[i];
    }
    out
}

impl VectorFieldSpec {
    pub fn hopf(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("Hopf scale must be positive, got {scale}")));
        }
        Ok(VectorFieldSpec::Hopf { scale })
    }

    pub fn rotation(axis: &[f64]) -> Result<Self> {
        Ok(VectorFieldSpec::RotationS2 { axis: unit_axis(axis)? })
    }

    pub fn conformal(a: &[f64]) -> Self {
        VectorFieldSpec::ConformalSphere {
            a: Vector::from_column_slice(a),
        }
    }

    pub fn quadratic(form: QuadraticFormSpec, power: u32) -> Result<Self> {
        if power == 0 {
            return Err(Error::InvalidParameter("power must be a positive integer".into()));
        }
        Ok(VectorFieldSpec::QuadraticGradient { form, power })
    }

    pub fn profiled(profile: Arc<dyn ScalarProfile>, axis: &[f64]) -> Result<Self> {
        Ok(VectorFieldSpec::ProfiledRotation {
            profile,
            axis: unit_axis(axis)?,
        })
    }

    pub fn frame(model: ManifoldModel, index: usize) -> Result<Self> {
        let ok = match model {
            ManifoldModel::Heisenberg3 | ManifoldModel::Sl2Universal => index < 3,
            ManifoldModel::SphereCrossLine => index == 2,
            ManifoldModel::Sphere { .. } => false,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "no global frame field {index} on {}",
                model.name()
            )));
        }
        Ok(VectorFieldSpec::FrameField { model, index })
    }

    pub fn scaled(self, c: f64) -> Self {
        VectorFieldSpec::Scale(c, Box::new(self))
    }

    pub fn plus(self, other: VectorFieldSpec) -> Self {
        VectorFieldSpec::Sum(Box::new(self), Box::new(other))
    }

    pub fn describe(&self) -> String {
        match self {
            VectorFieldSpec::Hopf { scale } => format!("hopf:{scale}"),
            VectorFieldSpec::RotationS2 { axis } => format!("rotation:{}", join(axis.as_slice())),
            VectorFieldSpec::ConformalSphere { a } => format!("conformal:{}", join(a.as_slice())),
            VectorFieldSpec::QuadraticGradient { form, power } => {
                format!("quadratic:{}@{power}", join(form.matrix().as_slice()))
            }
            VectorFieldSpec::ProfiledRotation { profile, axis } => {
                format!("profiled:{}:{}", profile.describe(), join(axis.as_slice()))
            }
            VectorFieldSpec::FrameField { model, index } => format!("frame:{}:{}", model.name(), index + 1),
            VectorFieldSpec::Zero => "zero".into(),
            VectorFieldSpec::Sum(a, b) => format!("({} + {})", a.describe(), b.describe()),
            VectorFieldSpec::Scale(c, f) => format!("{c}*{}", f.describe()),
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

impl AmbientField for VectorFieldSpec {
    fn check_model(&self, model: ManifoldModel) -> Result<()> {
        let mismatch = || Error::ModelMismatch {
            field: self.describe(),
            model: model.name(),
        };
        match self {
            VectorFieldSpec::Hopf { .. } => match model {
                ManifoldModel::Sphere { n } if n % 2 == 1 => Ok(()),
                _ => Err(mismatch()),
            },
            VectorFieldSpec::RotationS2 { .. } | VectorFieldSpec::ProfiledRotation { .. } => match model {
                ManifoldModel::Sphere { n: 2 } => Ok(()),
                _ => Err(mismatch()),
            },
            VectorFieldSpec::ConformalSphere { a } => match model {
                ManifoldModel::Sphere { n } if a.len() == n + 1 => Ok(()),
                _ => Err(mismatch()),
            },
            VectorFieldSpec::QuadraticGradient { form, .. } => match model {
                ManifoldModel::Sphere { n } if form.size() == n + 1 => Ok(()),
                _ => Err(mismatch()),
            },
            VectorFieldSpec::FrameField { model: m, .. } => {
                if *m == model {
                    Ok(())
                } else {
                    Err(mismatch())
                }
            }
            VectorFieldSpec::Zero => Ok(()),
            VectorFieldSpec::Sum(a, b) => {
                a.check_model(model)?;
                b.check_model(model)
            }
            VectorFieldSpec::Scale(_, f) => f.check_model(model),
        }
    }

    fn value(&self, x: &Vector) -> Vector {
        match self {
            VectorFieldSpec::Hopf { scale } => complex_structure(x) * *scale,
            VectorFieldSpec::RotationS2 { axis } => cross(axis, x),
            VectorFieldSpec::ConformalSphere { a } => a - x * a.dot(x),
            VectorFieldSpec::QuadraticGradient { form, power } => {
                let c = form.power(*power);
                let cx = &c * x;
                let lam = cx.dot(x);
                cx - x * lam
            }
            VectorFieldSpec::ProfiledRotation { profile, axis } => {
                let t = x.norm_squared() - axis.dot(x).powi(2);
                cross(axis, x) * profile.eval(t)
            }
            VectorFieldSpec::FrameField { model, index } => frame_field_value(*model, *index, x),
            VectorFieldSpec::Zero => Vector::zeros(x.len()),
            VectorFieldSpec::Sum(a, b) => a.value(x) + b.value(x),
            VectorFieldSpec::Scale(c, f) => f.value(x) * *c,
        }
    }

    fn d1(&self, x: &Vector, a: &Vector) -> Vector {
        match self {
            VectorFieldSpec::Hopf { scale } => complex_structure(a) * *scale,
            VectorFieldSpec::RotationS2 { axis } => cross(axis, a),
            VectorFieldSpec::ConformalSphere { a: v } => -(x * v.dot(a)) - a * v.dot(x),
            VectorFieldSpec::QuadraticGradient { form, power } => {
                let c = form.power(*power);
                let cx = &c * x;
                let ca = &c * a;
                let lam = cx.dot(x);
                // D(x·Cx)[a] = 2 a·Cx
                &ca - x * (2.0 * ca.dot(x)) - a * lam
            }
            VectorFieldSpec::ProfiledRotation { profile, axis } => {
                let ax = axis.dot(x);
                let t = x.norm_squared() - ax * ax;
                let dt = 2.0 * (x.dot(a) - ax * axis.dot(a));
                cross(axis, x) * (profile.d1(t) * dt) + cross(axis, a) * profile.eval(t)
            }
            VectorFieldSpec::FrameField { model, index } => frame_field_d1(*model, *index, a),
            VectorFieldSpec::Zero => Vector::zeros(x.len()),
            VectorFieldSpec::Sum(f, g) => f.d1(x, a) + g.d1(x, a),
            VectorFieldSpec::Scale(c, f) => f.d1(x, a) * *c,
        }
    }

    fn d2(&self, x: &Vector, a: &Vector, b: &Vector) -> Vector {
        match self {
            VectorFieldSpec::Hopf { .. } | VectorFieldSpec::RotationS2 { .. } | VectorFieldSpec::FrameField { .. } => {
                Vector::zeros(x.len())
            }
            VectorFieldSpec::ConformalSphere { a: v } => -(a * v.dot(b)) - b * v.dot(a),
            VectorFieldSpec::QuadraticGradient { form, power } => {
                let c = form.power(*power);
                let cb = &c * b;
                let ca = &c * a;
                -(x * (2.0 * a.dot(&cb))) - a * (2.0 * x.dot(&cb)) - b * (2.0 * x.dot(&ca))
            }
            VectorFieldSpec::ProfiledRotation { profile, axis } => {
                let ax = axis.dot(x);
                let t = x.norm_squared() - ax * ax;
                let dta = 2.0 * (x.dot(a) - ax * axis.dot(a));
                let dtb = 2.0 * (x.dot(b) - ax * axis.dot(b));
                let ddt = 2.0 * (a.dot(b) - axis.dot(a) * axis.dot(b));
                let (f1, f2) = (profile.d1(t), profile.d2(t));
                cross(axis, x) * (f2 * dta * dtb + f1 * ddt) + cross(axis, a) * (f1 * dtb) + cross(axis, b) * (f1 * dta)
            }
            VectorFieldSpec::Zero => Vector::zeros(x.len()),
            VectorFieldSpec::Sum(f, g) => f.d2(x, a, b) + g.d2(x, a, b),
            VectorFieldSpec::Scale(c, f) => f.d2(x, a, b) * *c,
        }
    }
}

fn frame_field_value(model: ManifoldModel, index: usize, x: &Vector) -> Vector {
    let v: [f64; 3] = match (model, index) {
        (ManifoldModel::Heisenberg3, 0) => [1.0, 0.0, 0.0],
        (ManifoldModel::Heisenberg3, 1) => [0.0, 1.0, x[0]],
        (ManifoldModel::Heisenberg3, _) => [0.0, 0.0, 1.0],
        (ManifoldModel::Sl2Universal, 0) => [1.0, 0.0, 0.0],
        (ManifoldModel::Sl2Universal, 1) => [-1.0, x[2], 0.0],
        (ManifoldModel::Sl2Universal, _) => [0.0, 0.0, x[2]],
        _ => return Vector::from_column_slice(&[0.0, 0.0, 0.0, 1.0]),
    };
    Vector::from_column_slice(&v)
}

fn frame_field_d1(model: ManifoldModel, index: usize, a: &Vector) -> Vector {
    let v: [f64; 3] = match (model, index) {
        (ManifoldModel::Heisenberg3, 1) => [0.0, 0.0, a[0]],
        (ManifoldModel::Sl2Universal, 1) => [0.0, a[2], 0.0],
        (ManifoldModel::Sl2Universal, 2) => [0.0, 0.0, a[2]],
        (ManifoldModel::SphereCrossLine, _) => return Vector::zeros(4),
        _ => [0.0; 3],
    };
    Vector::from_column_slice(&v)
}

/// σ(x) as a tangent vector.
pub fn eval_field(spec: &VectorFieldSpec, x: &Point) -> Result<TangentVector> {
    spec.check_model(x.model)?;
    Ok(TangentVector {
        base: x.clone(),
        comps: spec.value(&x.coords),
    })
}

/// λ_k(x) = Bᵏx · x and σ_k(x) = Bᵏx − λ_k(x)x.
pub fn sigma_lambda_k(form: &QuadraticFormSpec, k: u32, x: &Point) -> Result<(f64, TangentVector)> {
    form.check_point(x)?;
    let (lam, sigma) = sigma_lambda_raw(form, k, &x.coords);
    Ok((lam, x.wrap(sigma)))
}

pub(crate) fn sigma_lambda_raw(form: &QuadraticFormSpec, k: u32, x: &Vector) -> (f64, Vector) {
    let cx = form.power(k) * x;
    let lam = cx.dot(x);
    let sigma = cx - x * lam;
    (lam, sigma)
}

/// L_k X = BᵏX − (BᵏX · x)x.
pub fn l_k_apply(form: &QuadraticFormSpec, k: u32, x: &Point, v: &TangentVector) -> Result<TangentVector> {
    form.check_point(x)?;
    if &v.base != x {
        return Err(Error::MismatchedBase);
    }
    Ok(x.wrap(l_k_raw(form, k, &x.coords, &v.comps)))
}

pub(crate) fn l_k_raw(form: &QuadraticFormSpec, k: u32, x: &Vector, v: &Vector) -> Vector {
    let cv = form.power(k) * v;
    let c = cv.dot(x);
    cv - x * c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize) -> ManifoldModel {
        ManifoldModel::sphere(n).unwrap()
    }

    #[test]
    fn hopf_at_first_axis() {
        let x = s(3).point(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let v = eval_field(&VectorFieldSpec::hopf(1.0).unwrap(), &x).unwrap();
        assert_eq!(v.comps.as_slice(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn hopf_needs_odd_sphere() {
        let x = s(2).point(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            eval_field(&VectorFieldSpec::hopf(1.0).unwrap(), &x),
            Err(Error::ModelMismatch { .. })
        ));
        assert!(VectorFieldSpec::hopf(0.0).is_err());
    }

    #[test]
    fn scalar_form_gives_zero_field() {
        let form = QuadraticFormSpec::diagonal(&[2.5, 2.5, 2.5, 2.5]).unwrap();
        let f = VectorFieldSpec::quadratic(form, 1).unwrap();
        let x = s(3).point(&[0.3, -0.1, 0.7, 0.2]).unwrap();
        assert!(eval_field(&f, &x).unwrap().comps.norm() < 1e-15);
    }

    #[test]
    fn quadratic_gradient_hand_value() {
        let form = QuadraticFormSpec::diagonal(&[2.0, 0.0, 0.0]).unwrap();
        let f = VectorFieldSpec::quadratic(form, 1).unwrap();
        let r = 0.5f64.sqrt();
        let x = s(2).point(&[r, r, 0.0]).unwrap();
        let v = eval_field(&f, &x).unwrap();
        assert!((v.comps - Vector::from_column_slice(&[r, -r, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn eigenvectors_are_zeros_of_sigma_k() {
        let form = QuadraticFormSpec::diagonal(&[1.5, -0.5, 3.0]).unwrap();
        for (i, mu) in [1.5f64, -0.5, 3.0].into_iter().enumerate() {
            let mut c = [0.0; 3];
            c[i] = 1.0;
            let x = s(2).point(&c).unwrap();
            for k in 1..=3 {
                let (lam, sig) = sigma_lambda_k(&form, k, &x).unwrap();
                assert!((lam - mu.powi(k as i32)).abs() < 1e-13);
                assert!(sig.comps.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn sigma_one_matches_field() {
        let form = QuadraticFormSpec::new(DMatrix::from_row_slice(3, 3, &[1.0, 0.2, -0.4, 0.2, 0.5, 0.3, -0.4, 0.3, -1.0])).unwrap();
        let x = s(2).point(&[0.2, 0.5, -0.8]).unwrap();
        let (_, sig) = sigma_lambda_k(&form, 1, &x).unwrap();
        let f = VectorFieldSpec::quadratic(form, 1).unwrap();
        assert!((sig.comps - eval_field(&f, &x).unwrap().comps).norm() < 1e-15);
    }

    #[test]
    fn two_block_decomposition_formula() {
        let (mu, nu) = (1.7, -0.4);
        let form = QuadraticFormSpec::diagonal(&[mu, mu, nu, nu]).unwrap();
        let x = s(3).point(&[0.3, -0.5, 0.6, 0.2]).unwrap();
        let c = &x.coords;
        let xm = Vector::from_column_slice(&[c[0], c[1], 0.0, 0.0]);
        let xn = Vector::from_column_slice(&[0.0, 0.0, c[2], c[3]]);
        let want = &xm * ((mu - nu) * xn.norm_squared()) + &xn * ((nu - mu) * xm.norm_squared());
        let (_, sig) = sigma_lambda_k(&form, 1, &x).unwrap();
        assert!((sig.comps - want).norm() < 1e-14);
    }

    #[test]
    fn l_k_is_identity_for_identity_form() {
        let form = QuadraticFormSpec::identity(4).unwrap();
        let x = s(3).point(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let v = x.tangent(&[1.0, -2.0, 0.5, 0.0]).unwrap();
        for k in 1..=3 {
            let out = l_k_apply(&form, k, &x, &v).unwrap();
            assert!((out.comps - &v.comps).norm() < 1e-14);
        }
    }

    #[test]
    fn frame_field_index_checked() {
        assert!(VectorFieldSpec::frame(ManifoldModel::Heisenberg3, 3).is_err());
        assert!(VectorFieldSpec::frame(ManifoldModel::SphereCrossLine, 0).is_err());
        assert!(VectorFieldSpec::frame(s(3), 0).is_err());
        assert!(VectorFieldSpec::frame(ManifoldModel::SphereCrossLine, 2).is_ok());
    }

    #[test]
    fn form_is_symmetrised() {
        let form = QuadraticFormSpec::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        assert_eq!(form.matrix()[(0, 1)], 1.0);
        assert_eq!(form.matrix()[(1, 0)], 1.0);
    }

    #[test]
    fn rotation_about_z() {
        let f = VectorFieldSpec::rotation(&[0.0, 0.0, 2.0]).unwrap();
        let x = s(2).point(&[0.6, 0.0, 0.8]).unwrap();
        let v = eval_field(&f, &x).unwrap();
        assert!((v.comps - Vector::from_column_slice(&[0.0, 0.6, 0.0])).norm() < 1e-15);
    }
}
