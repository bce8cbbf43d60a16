//! Covariance of the gauge derivative under a random phase field.

use qcalc::gauge::{curvature_covariance, transform_matter, Einbein, GaugeField, Scenario};
use qcalc::lattice::{LatticeFn, LatticeGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = LatticeGrid::symmetric(2.0, -5, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = Einbein::random(&grid, &mut rng);
    let a = GaugeField::random(&grid, &mut rng, 3.0);
    let psi = LatticeFn::from_sites(&grid, |_, n| num_complex::Complex64::new(1.0, n as f64 / 5.0));
    let lhs = e.transform(&a).derivative(&transform_matter(&psi, &a));
    let rhs = transform_matter(&e.derivative(&psi), &a);
    println!("derivative covariance: {:.2e}", (&lhs - &rhs).max_abs());
    let sc = Scenario::random(&grid, &mut rng, 1e-3, 0.3);
    let b = GaugeField::random(&grid, &mut rng, 1.0);
    let (t, f) = curvature_covariance(&sc, &a, &b);
    println!("torsion covariance {t:.2e}, curvature covariance {f:.2e}");
}
