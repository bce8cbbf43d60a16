//! Transform of a step function and its round trip.

use qcalc::fourier::QFourier;

fn main() {
    let qf = QFourier::new(2.0).unwrap();
    let step = qf.qft_step(0, -40, 60, 10).unwrap();
    println!("closed form deviation {:.2e}", step.max_deviation());
    for (n, v) in qf.step_round_trip(0, -40, 60, 4).unwrap() {
        println!("n = {n:>3}  recovered {v:+.10}");
    }
}
