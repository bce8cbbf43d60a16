//! cos_q and sin_q on the even sublattice, plus the Gram diagonal.

use qcalc::special::{QSpecial, Trig};

fn main() {
    let sp = QSpecial::new(2.0).unwrap();
    for j in -3..=5 {
        println!("z = q^{:<3} cos_q = {:>+.6e}  sin_q = {:>+.6e}", 2 * j, sp.on_even_lattice(Trig::Cos, j), sp.on_even_lattice(Trig::Sin, j));
    }
    let gram = sp.gram_matrix(Trig::Cos, -3, 3, 60);
    let dev = sp.gram_deviation(&gram, -3);
    println!("N_q = {:.12}", sp.n_q());
    println!("gram deviation: off-diagonal {:.2e}, diagonal {:.2e}", dev.off_diagonal, dev.diagonal);
}
