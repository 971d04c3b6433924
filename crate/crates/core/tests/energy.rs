use harmonic_sections::bundle::{vertical_energy, BundleMetricParams};
use harmonic_sections::fields::VectorFieldSpec;
use harmonic_sections::geometry::ManifoldModel;
use harmonic_sections::sampling::{sample_points, sphere_weights};

/// ½∫|∇σ|² for σ = a − ⟨a,x⟩x on S² by midpoint quadrature in (θ, φ); there
/// |∇σ|² = 2⟨a,x⟩².
fn dense_reference(a: [f64; 3]) -> f64 {
    let (nt, np) = (800, 1600);
    let (dt, dp) = (std::f64::consts::PI / nt as f64, 2.0 * std::f64::consts::PI / np as f64);
    let mut sum = 0.0;
    for i in 0..nt {
        let t = (i as f64 + 0.5) * dt;
        for j in 0..np {
            let p = (j as f64 + 0.5) * dp;
            let x = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            let ax = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
            sum += ax * ax * t.sin();
        }
    }
    sum * dt * dp
}

#[test]
fn sasaki_energy_of_conformal_field_matches_quadrature() {
    let a = [0.3, -0.5, 0.8];
    let reference = dense_reference(a);
    let norm_sq: f64 = a.iter().map(|v| v * v).sum();
    // closed form as a sanity check on the reference itself
    assert!((reference - 4.0 * std::f64::consts::PI * norm_sq / 3.0).abs() < 1e-5);
    let m = ManifoldModel::sphere(2).unwrap();
    let count = 20_000;
    let pts = sample_points(m, count, 5).unwrap();
    let e = vertical_energy(m, &VectorFieldSpec::conformal(&a), &BundleMetricParams::sasaki(), &pts, &sphere_weights(2, count)).unwrap();
    assert!((e - reference).abs() / reference < 0.02, "MC {e} vs reference {reference}");
}

#[test]
fn energy_is_deterministic() {
    let m = ManifoldModel::sphere(3).unwrap();
    let f = VectorFieldSpec::hopf(1.0).unwrap();
    let params = BundleMetricParams::new(2.0, 1.0).unwrap();
    let pts = sample_points(m, 500, 9).unwrap();
    let w = sphere_weights(3, 500);
    assert_eq!(vertical_energy(m, &f, &params, &pts, &w).unwrap(), vertical_energy(m, &f, &params, &pts, &w).unwrap());
}
