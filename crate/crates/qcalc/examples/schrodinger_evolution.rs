//! Free evolution of a stationary state and of a superposition.

use num_complex::Complex64;
use qcalc::lattice::{LatticeGrid, Sector};
use qcalc::schrodinger::{continuity_residual, stationary_states, Closure, Hamiltonian};
use qcalc::special::Basis;

fn main() {
    let grid = LatticeGrid::symmetric(2.0, -12, 12).unwrap();
    let h = Hamiltonian::free(&grid, 1.0, Closure::EvenSeries).unwrap();
    let states = stationary_states(&grid, 1.0, Basis::C, Sector::Plus, -1..=1).unwrap();
    for st in &states {
        let out = h.propagate(&st.psi, 1.0);
        let drift = out.zip_with(&st.psi, |a, b| Complex64::new(a.norm() - b.norm(), 0.0)).max_abs();
        println!("stationary state, modulus drift over t = 1: {drift:.2e}");
    }
    let psi = &states[0].psi + &states[2].psi;
    let r = continuity_residual(&h, &psi, 0.5, 1e-3, 2).unwrap();
    println!("continuity residual at dt = 1e-3: {r:.2e}");
}
