//! Product rules for the q-derivative, checked in exact arithmetic.

use qcalc::calculus::{check_leibniz, coproduct_first, coproduct_second, nabla};
use qcalc::context::QContext;
use qcalc::laurent::{parse_laurent, LaurentPoly};
use qcalc::ring::ExactComplex;

fn main() {
    let ctx = QContext::exact(3, 2).unwrap();
    let f: LaurentPoly<ExactComplex> = parse_laurent("x^2 + 3*x^-1").unwrap();
    let g: LaurentPoly<ExactComplex> = parse_laurent("x - 1/2*x^4").unwrap();
    println!("f        = {f}");
    println!("g        = {g}");
    println!("nabla f  = {}", nabla(&ctx, &f));
    let [a, b] = check_leibniz(&ctx, &f, &g);
    println!("product rule residuals: {a}, {b}");
    println!("comultiplications agree: {}", coproduct_first(&ctx, &f, &g) == coproduct_second(&ctx, &f, &g));
}
