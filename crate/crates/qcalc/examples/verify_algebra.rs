//! Normal-ordered products in the q-deformed Heisenberg algebra.

use num_traits::One;
use qcalc::cas::{relation_checks, AlgebraElement as A};
use qcalc::laurent::LaurentPoly;
use qcalc::scalar::Scalar;

fn main() {
    println!("p x     = {}", A::p() * A::x());
    println!("p x^-1  = {}", A::p() * A::x_inv());
    println!("bar(L)  = {}", A::lam().bar());
    for r in relation_checks() {
        println!("{:<36} {}", r.label, if r.holds() { "holds" } else { "FAILS" });
    }
    // f(x) = x^3 + x^-2, pulled through p
    let f: LaurentPoly<Scalar> = LaurentPoly::from_terms([(3, Scalar::one()), (-2, Scalar::one())]);
    let (h, _, j) = A::extract_nabla_l(&f).unwrap();
    println!("derivative: {h}");
    println!("scaled:     {j}");
}
