//! Jackson integrals of monomials against their closed form.

use num_complex::Complex64;
use qcalc::context::QContext;
use qcalc::jackson::{definite_integral, definite_integral_closed_form};
use qcalc::laurent::LaurentPoly;
use qcalc::lattice::Sector;

fn main() {
    let ctx = QContext::float(2.0).unwrap();
    println!("{:>3}  {:>18}  {:>18}", "n", "sum", "closed form");
    for n in (-3..=3).filter(|&n| n != -1) {
        let f: LaurentPoly<Complex64> = LaurentPoly::x_pow(n);
        let a = definite_integral(&ctx, &f, 0, 4, Sector::Plus).unwrap();
        let b = definite_integral_closed_form(&ctx, &f, 0, 4, Sector::Plus).unwrap();
        println!("{n:>3}  {:>18.12}  {:>18.12}", a.re, b.re);
    }
}
