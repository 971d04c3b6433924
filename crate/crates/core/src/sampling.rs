//! Seeded sample sets and Monte Carlo weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, Point, Vector};

/// Half-width of the sampling box in chart coordinates.
pub const CHART_BOX: f64 = 2.0;
/// z-range sampled on the upper half-space chart.
pub const SL2_Z_RANGE: (f64, f64) = (0.5, 2.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// `count` points drawn with a fixed seed: uniform on sphere factors, uniform
/// in a box on charts and on the line factor.
pub fn sample_points(model: ManifoldModel, count: usize, seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::EmptySamples);
    }
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let coords: Vec<f64> = match model {
                ManifoldModel::Sphere { n } => unit_vector(&mut r, n + 1).iter().copied().collect(),
                ManifoldModel::SphereCrossLine => {
                    let mut c: Vec<f64> = unit_vector(&mut r, 3).iter().copied().collect();
                    c.push(r.gen_range(-CHART_BOX..CHART_BOX));
                    c
                }
                ManifoldModel::Heisenberg3 => (0..3).map(|_| r.gen_range(-CHART_BOX..CHART_BOX)).collect(),
                ManifoldModel::Sl2Universal => vec![
                    r.gen_range(-CHART_BOX..CHART_BOX),
                    r.gen_range(-CHART_BOX..CHART_BOX),
                    r.gen_range(SL2_Z_RANGE.0..SL2_Z_RANGE.1),
                ],
            };
            model.point(&coords)
        })
        .collect()
}

/// Volume of the unit n-sphere.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (n as f64 - 1.0) * sphere_volume(n - 2),
    }
}

/// Equal Monte Carlo weights vol(Sⁿ)/N for a uniform sphere sample.
pub fn sphere_weights(n: usize, count: usize) -> Vec<f64> {
    vec![sphere_volume(n) / count as f64; count]
}
