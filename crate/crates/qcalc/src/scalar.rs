//! Exact scalars with `q` kept formal.
//!
//! A [`Scalar`] is `N(s) / λᵏ` where `s = q^{1/2}`, `N` is a Laurent
//! polynomial in `s` with Gaussian-rational coefficients and
//! `λ = q − q⁻¹ = s² − s⁻²`. The denominator is needed because the closed form of
//! the momentum carries a factor `1/λ`. The stored form is reduced: when
//! `k > 0`, `N` is not divisible by `λ`, so structural equality is value equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ring::{format_rational, parse_rational, ExactComplex, Ring};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    /// power of s -> coefficient, never storing zeros
    numer: BTreeMap<i32, ExactComplex>,
    lambda_pow: u32,
}

type SPoly = BTreeMap<i32, ExactComplex>;

fn poly_add_into(acc: &mut SPoly, exp: i32, c: ExactComplex) {
    if c.is_zero() {
        return;
    }
    match acc.get_mut(&exp) {
        Some(v) => {
            *v = v.clone() + c;
            if v.is_zero() {
                acc.remove(&exp);
            }
        }
        None => {
            acc.insert(exp, c);
        }
    }
}

fn poly_mul(a: &SPoly, b: &SPoly) -> SPoly {
    let mut out = SPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            poly_add_into(&mut out, ea + eb, ca.clone() * cb.clone());
        }
    }
    out
}

/// `λ = s² − s⁻²` as a Laurent polynomial in s.
fn lambda_poly() -> SPoly {
    let mut p = SPoly::new();
    p.insert(2, ExactComplex::one());
    p.insert(-2, -ExactComplex::one());
    p
}

fn lambda_poly_pow(k: u32) -> SPoly {
    let mut acc = SPoly::new();
    acc.insert(0, ExactComplex::one());
    let l = lambda_poly();
    for _ in 0..k {
        acc = poly_mul(&acc, &l);
    }
    acc
}

/// Exact division by `λ`, or `None` if `λ` does not divide `p`.
fn poly_div_lambda(p: &SPoly) -> Option<SPoly> {
    // s²·p = (s⁴ − 1)·quotient
    let mut rem: SPoly = p.iter().map(|(e, c)| (e + 2, c.clone())).collect();
    let mut quot = SPoly::new();
    loop {
        let (lo, hi) = match (rem.keys().next(), rem.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Some(quot),
        };
        if hi - lo < 4 {
            return None;
        }
        let c = rem[&hi].clone();
        poly_add_into(&mut quot, hi - 4, c.clone());
        poly_add_into(&mut rem, hi, -c.clone());
        poly_add_into(&mut rem, hi - 4, c);
    }
}

impl Scalar {
    fn from_parts(numer: SPoly, lambda_pow: u32) -> Self {
        let mut s = Scalar { numer, lambda_pow };
        s.reduce();
        s
    }

    fn reduce(&mut self) {
        if self.numer.is_empty() {
            self.lambda_pow = 0;
            return;
        }
        while self.lambda_pow > 0 {
            match poly_div_lambda(&self.numer) {
                Some(q) => {
                    self.numer = q;
                    self.lambda_pow -= 1;
                }
                None => break,
            }
        }
    }

    pub fn gaussian(c: ExactComplex) -> Self {
        let mut n = SPoly::new();
        poly_add_into(&mut n, 0, c);
        Scalar::from_parts(n, 0)
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Scalar::gaussian(Complex::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        ))
    }

    pub fn i() -> Self {
        Scalar::gaussian(ExactComplex::imag_unit())
    }

    /// `s^k = q^{k/2}`.
    pub fn s_pow(k: i32) -> Self {
        let mut n = SPoly::new();
        n.insert(k, ExactComplex::one());
        Scalar { numer: n, lambda_pow: 0 }
    }

    pub fn q_pow(k: i32) -> Self {
        Scalar::s_pow(2 * k)
    }

    /// `1/λ = 1/(q − q⁻¹)`.
    pub fn lambda_inv() -> Self {
        let mut n = SPoly::new();
        n.insert(0, ExactComplex::one());
        Scalar { numer: n, lambda_pow: 1 }
    }

    pub fn lambda() -> Self {
        Scalar::from_parts(lambda_poly(), 0)
    }

    pub fn lambda_power(&self) -> u32 {
        self.lambda_pow
    }

    /// Numerator terms `(power of s, coefficient)`.
    pub fn numerator(&self) -> impl Iterator<Item = (i32, &ExactComplex)> {
        self.numer.iter().map(|(e, c)| (*e, c))
    }

    /// Multiplies by `s^k`; cheaper than a general product.
    pub fn shift_s(&self, k: i32) -> Self {
        Scalar {
            numer: self.numer.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            lambda_pow: self.lambda_pow,
        }
    }

    pub fn scale_gaussian(&self, c: &ExactComplex) -> Self {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            numer: self.numer.iter().map(|(e, v)| (*e, v.clone() * c.clone())).collect(),
            lambda_pow: self.lambda_pow,
        }
    }

    /// Exact value at a rational `q`; `None` when an odd power of `s` survives.
    pub fn specialize(&self, q: &BigRational) -> Option<ExactComplex> {
        let qc = ExactComplex::new(q.clone(), BigRational::zero());
        let mut acc = ExactComplex::zero();
        for (e, c) in &self.numer {
            if e % 2 != 0 {
                return None;
            }
            acc = acc + c.clone() * qc.powi(e / 2);
        }
        let lam = qc.clone() - qc.powi(-1);
        Some(acc / lam.powu(self.lambda_pow))
    }

    /// Numerical value at a given `s = q^{1/2}`.
    pub fn evaluate(&self, s: f64) -> num_complex::Complex64 {
        use crate::ring::Field;
        let mut acc = num_complex::Complex64::zero();
        for (e, c) in &self.numer {
            acc += c.to_c64() * s.powi(*e);
        }
        let lam = s * s - 1.0 / (s * s);
        acc / lam.powi(self.lambda_pow as i32)
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::default()
    }
    fn is_zero(&self) -> bool {
        self.numer.is_empty()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::s_pow(0)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let k = self.lambda_pow.max(rhs.lambda_pow);
        let lift = |s: Scalar| -> SPoly {
            if s.lambda_pow == k {
                s.numer
            } else {
                poly_mul(&s.numer, &lambda_poly_pow(k - s.lambda_pow))
            }
        };
        let mut a = lift(self);
        for (e, c) in lift(rhs) {
            poly_add_into(&mut a, e, c);
        }
        Scalar::from_parts(a, k)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            numer: self.numer.into_iter().map(|(e, c)| (e, -c)).collect(),
            lambda_pow: self.lambda_pow,
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        Scalar::from_parts(
            poly_mul(&self.numer, &rhs.numer),
            self.lambda_pow + rhs.lambda_pow,
        )
    }
}

impl Ring for Scalar {
    fn conj(&self) -> Self {
        Scalar {
            numer: self.numer.iter().map(|(e, c)| (*e, Ring::conj(c))).collect(),
            lambda_pow: self.lambda_pow,
        }
    }
    fn from_int(n: i64) -> Self {
        Scalar::rational(n, 1)
    }
    fn imag_unit() -> Self {
        Scalar::i()
    }
}

pub(crate) fn format_gaussian(c: &ExactComplex) -> String {
    let re = &c.re;
    let im = &c.im;
    if im.is_zero() {
        return format_rational(re);
    }
    let im_text = if im.is_one() {
        "i".to_string()
    } else if *im == -BigRational::one() {
        "-i".to_string()
    } else {
        format!("{}i", format_rational(im))
    };
    if re.is_zero() {
        return im_text;
    }
    if im_text.starts_with('-') {
        format!("{}{}", format_rational(re), im_text)
    } else {
        format!("{}+{}", format_rational(re), im_text)
    }
}

/// Parses `a`, `bi`, `i`, `-i` or `a+bi` / `a-bi` with rational parts.
pub(crate) fn parse_gaussian(text: &str) -> Option<ExactComplex> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some(body) = t.strip_suffix('i') {
        // find the split between real and imaginary parts: last +/- not at position 0
        // and not directly after a '/'
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && bytes[idx - 1] != b'/' {
                split = Some(idx);
                break;
            }
        }
        let (re_text, im_text) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let im = match im_text.trim() {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.trim_start_matches('+'))?,
        };
        let re = if re_text.trim().is_empty() {
            BigRational::zero()
        } else {
            parse_rational(re_text)?
        };
        return Some(Complex::new(re, im));
    }
    Some(Complex::new(parse_rational(t)?, BigRational::zero()))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.numer.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .numer
            .iter()
            .map(|(e, c)| {
                let g = format_gaussian(c);
                let g = if !c.re.is_zero() && !c.im.is_zero() {
                    format!("({g})")
                } else {
                    g
                };
                if *e == 0 {
                    g
                } else {
                    format!("{g}*s^{e}")
                }
            })
            .collect();
        let body = terms.join(" + ");
        if self.lambda_pow == 0 {
            write!(f, "{body}")
        } else {
            write!(f, "{{{body}}}/lam^{}", self.lambda_pow)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Scalar {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        if t == "0" {
            return Ok(Scalar::zero());
        }
        let (body, lambda_pow) = if let Some(rest) = t.strip_prefix('{') {
            let (body, tail) = rest
                .split_once('}')
                .ok_or_else(|| format!("unbalanced braces in `{t}`"))?;
            let k = tail
                .trim()
                .strip_prefix("/lam^")
                .ok_or_else(|| format!("expected `/lam^k` after braces in `{t}`"))?;
            let k: u32 = k.trim().parse().map_err(|_| format!("bad lambda power in `{t}`"))?;
            (body, k)
        } else {
            (t, 0)
        };
        let mut numer = SPoly::new();
        for term in body.split(" + ") {
            let term = term.trim();
            let (coef, exp) = match term.split_once("*s^") {
                Some((c, e)) => (c, e.parse::<i32>().map_err(|_| format!("bad exponent in `{term}`"))?),
                None => (term, 0),
            };
            let coef = coef.trim().trim_start_matches('(').trim_end_matches(')');
            let c = parse_gaussian(coef).ok_or_else(|| format!("bad coefficient `{coef}`"))?;
            poly_add_into(&mut numer, exp, c);
        }
        Ok(Scalar::from_parts(numer, lambda_pow))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_times_inverse_is_one() {
        assert_eq!(Scalar::lambda() * Scalar::lambda_inv(), Scalar::one());
    }

    #[test]
    fn q_minus_q_inverse_over_lambda_reduces() {
        let n3 = (Scalar::q_pow(3) - Scalar::q_pow(-3)) * Scalar::lambda_inv();
        let expected = Scalar::q_pow(2) + Scalar::one() + Scalar::q_pow(-2);
        assert_eq!(n3, expected);
        assert_eq!(n3.lambda_power(), 0);
    }

    #[test]
    fn irreducible_fraction_keeps_denominator() {
        let x = Scalar::s_pow(1) * Scalar::lambda_inv();
        assert_eq!(x.lambda_power(), 1);
        assert_eq!(x.clone() - x, Scalar::zero());
    }

    #[test]
    fn conjugation_fixes_s_and_flips_i() {
        let z = Scalar::i() * Scalar::s_pow(3) + Scalar::rational(1, 2);
        let w = Scalar::rational(1, 2) - Scalar::i() * Scalar::s_pow(3);
        assert_eq!(z.conj(), w);
    }

    #[test]
    fn text_round_trip() {
        let z = (Scalar::i() * Scalar::s_pow(1) - Scalar::rational(3, 4) * Scalar::s_pow(-3))
            * Scalar::lambda_inv()
            + Scalar::gaussian(Complex::new(BigRational::new(1.into(), 2.into()), BigRational::new((-2).into(), 3.into())));
        let text = z.to_string();
        let back: Scalar = text.parse().unwrap();
        assert_eq!(back, z, "{text}");
    }

    #[test]
    fn evaluation_matches_formula() {
        let s = 1.5f64.sqrt();
        let v = (Scalar::i() * Scalar::s_pow(1) * Scalar::lambda_inv()).evaluate(s);
        let lam = 1.5 - 1.0 / 1.5;
        assert!((v.im - s / lam).abs() < 1e-14 && v.re.abs() < 1e-14);
    }

    #[test]
    fn specialization_at_rational_q() {
        let q = BigRational::new(3.into(), 2.into());
        let v = (Scalar::q_pow(1) * Scalar::lambda_inv()).specialize(&q).unwrap();
        assert_eq!(v, Complex::new(BigRational::new(9.into(), 5.into()), BigRational::zero()));
        assert!(Scalar::s_pow(1).specialize(&q).is_none());
    }

    #[test]
    fn gaussian_text_forms() {
        for t in ["3/2", "-i", "i", "2/3i", "1/2-3/4i", "-5+i"] {
            let g = parse_gaussian(t).unwrap();
            assert_eq!(format_gaussian(&g), t);
        }
    }
}
