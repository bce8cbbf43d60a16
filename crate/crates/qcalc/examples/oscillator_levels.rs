//! Ladder operators, ground state and the level spectrum.

use qcalc::lattice::{LatticeGrid, Sector};
use qcalc::oscillator::{LadderPair, LadderParams};

fn main() {
    let grid = LatticeGrid::new(2.0, -8, 10, &[Sector::Plus]).unwrap();
    let pair = LadderPair::build(&grid, LadderParams::normalized(2.0)).unwrap();
    println!("commutator residual {:.2e}", pair.commutator_residual());
    let psi0 = pair.ground_state().unwrap();
    println!("annihilation residual {:.2e}", pair.annihilation_residual(&psi0));
    let levels = pair.levels(5).unwrap();
    for (n, e) in levels.iter().enumerate() {
        println!("E_{n} = {e:.12}");
    }
}
