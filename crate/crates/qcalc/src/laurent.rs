//! Fields `f(x) = Σ cₙ xⁿ` with finitely many nonzero terms.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::ring::{parse_rational, ExactComplex, Field, Ring};
use crate::scalar::{format_gaussian, parse_gaussian, Scalar};

#[derive(Clone, PartialEq, Default)]
pub struct LaurentPoly<C> {
    terms: BTreeMap<i32, C>,
}

impl<C: Ring> LaurentPoly<C> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(exp: i32, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    /// `xⁿ` with unit coefficient.
    pub fn x_pow(n: i32) -> Self {
        Self::monomial(n, C::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, C)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: i32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exp) {
            Some(old) => {
                let v = old + c;
                if !v.is_zero() {
                    self.terms.insert(exp, v);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &C)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, exp: i32) -> C {
        self.terms.get(&exp).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest and highest exponent present.
    pub fn degree_range(&self) -> Option<(i32, i32)> {
        Some((*self.terms.keys().next()?, *self.terms.keys().next_back()?))
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * c.clone())))
    }

    /// Termwise map with exponent-dependent factor: `Σ cₙ·w(n) xⁿ`.
    pub fn map_by_exponent(&self, w: impl Fn(i32) -> C) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * w(*e))))
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// Coefficientwise conjugate: the field `f*(x)` for real `x`.
    pub fn conj(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect() }
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> LaurentPoly<D> {
        LaurentPoly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }
}

impl<C: Field> LaurentPoly<C> {
    pub fn evaluate(&self, x: &C) -> C {
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            acc = acc + c.clone() * x.powi(*e);
        }
        acc
    }

    pub fn to_c64(&self) -> LaurentPoly<Complex64> {
        self.map_coeffs(|c| c.to_c64())
    }
}

impl<C: Ring> Add for LaurentPoly<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl<C: Ring> Sub for LaurentPoly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: Ring> Neg for LaurentPoly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentPoly { terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl<C: Ring> Mul for LaurentPoly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<'a, C: Ring> Add<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn add(self, rhs: &'a LaurentPoly<C>) -> LaurentPoly<C> {
        self.clone() + rhs.clone()
    }
}

impl<'a, C: Ring> Sub<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn sub(self, rhs: &'a LaurentPoly<C>) -> LaurentPoly<C> {
        self.clone() - rhs.clone()
    }
}

impl<'a, C: Ring> Mul<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn mul(self, rhs: &'a LaurentPoly<C>) -> LaurentPoly<C> {
        self.clone() * rhs.clone()
    }
}

/// Coefficients that have a textual form inside polynomial and element printers.
pub trait CoeffText: Sized {
    /// A self-delimiting token: a bare number or a parenthesised expression.
    fn coeff_text(&self) -> String;
    fn parse_coeff(text: &str) -> Option<Self>;
}

fn needs_parens(t: &str) -> bool {
    t.chars().skip(1).any(|c| c == '+' || c == '-' || c == ' ')
}

fn wrap(t: String) -> String {
    if needs_parens(&t) {
        format!("({t})")
    } else {
        t
    }
}

impl CoeffText for Complex64 {
    fn coeff_text(&self) -> String {
        let t = if self.im == 0.0 {
            format!("{}", self.re)
        } else if self.re == 0.0 {
            format!("{}i", self.im)
        } else if self.im.is_sign_negative() {
            format!("{}-{}i", self.re, -self.im)
        } else {
            format!("{}+{}i", self.re, self.im)
        };
        wrap(t)
    }

    fn parse_coeff(text: &str) -> Option<Self> {
        let t = strip_parens(text);
        if let Some(body) = t.strip_suffix('i') {
            let bytes = body.as_bytes();
            let mut split = None;
            for idx in (1..bytes.len()).rev() {
                let c = bytes[idx];
                if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                    split = Some(idx);
                    break;
                }
            }
            let (re, im) = match split {
                Some(idx) => (&body[..idx], &body[idx..]),
                None => ("", body),
            };
            let im = match im.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => parse_real(s.trim_start_matches('+'))?,
            };
            let re = if re.trim().is_empty() { 0.0 } else { parse_real(re)? };
            return Some(Complex64::new(re, im));
        }
        Some(Complex64::new(parse_real(t)?, 0.0))
    }
}

fn parse_real(t: &str) -> Option<f64> {
    let t = t.trim();
    if t.contains('/') {
        return parse_rational(t).map(|r| crate::ring::rational_to_f64(&r));
    }
    t.parse::<f64>().ok()
}

fn strip_parens(text: &str) -> &str {
    let t = text.trim();
    if t.starts_with('(') && t.ends_with(')') {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

impl CoeffText for ExactComplex {
    fn coeff_text(&self) -> String {
        wrap(format_gaussian(self))
    }

    fn parse_coeff(text: &str) -> Option<Self> {
        parse_gaussian(strip_parens(text))
    }
}

impl CoeffText for Scalar {
    fn coeff_text(&self) -> String {
        let t = self.to_string();
        if needs_parens(&t) || t.contains('{') || t.contains('s') {
            format!("({t})")
        } else {
            t
        }
    }

    fn parse_coeff(text: &str) -> Option<Self> {
        strip_parens(text).parse().ok()
    }
}

impl<C: Ring + CoeffText> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let power = match *e {
                0 => String::new(),
                1 => "x".to_string(),
                n => format!("x^{n}"),
            };
            let mut text = if *c == C::one() && *e != 0 {
                power
            } else if *c == -C::one() && *e != 0 {
                format!("-{power}")
            } else if power.is_empty() {
                c.coeff_text()
            } else {
                format!("{}*{power}", c.coeff_text())
            };
            if first {
                write!(f, "{text}")?;
                first = false;
            } else if let Some(rest) = text.strip_prefix('-') {
                text = rest.to_string();
                write!(f, " - {text}")?;
            } else {
                write!(f, " + {text}")?;
            }
        }
        Ok(())
    }
}

impl<C: fmt::Debug> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().rev()).finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParsePolyError {
    #[error("unexpected `{found}` at offset {offset} in polynomial")]
    Unexpected { found: String, offset: usize },
    #[error("bad coefficient `{0}`")]
    BadCoefficient(String),
    #[error("bad exponent `{0}`")]
    BadExponent(String),
    #[error("empty polynomial")]
    Empty,
}

/// Parses user or canonical text such as `x^2 - 3*x + 1/2`, `2x^-1` or `(1+2i)*x`.
pub fn parse_laurent<C: Ring + CoeffText>(text: &str) -> Result<LaurentPoly<C>, ParsePolyError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = LaurentPoly::zero();
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(&mut pos);
    if pos == chars.len() {
        return Err(ParsePolyError::Empty);
    }
    let mut first = true;
    while pos < chars.len() {
        skip_ws(&mut pos);
        let mut negative = false;
        if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
            negative = chars[pos] == '-';
            pos += 1;
            skip_ws(&mut pos);
        } else if !first {
            return Err(ParsePolyError::Unexpected { found: chars[pos].to_string(), offset: pos });
        }
        first = false;
        // coefficient
        let coeff_start = pos;
        let mut coeff: Option<C> = None;
        if pos < chars.len() && chars[pos] == '(' {
            let mut depth = 0;
            let mut end = pos;
            while end < chars.len() {
                match chars[end] {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                end += 1;
            }
            if end >= chars.len() {
                return Err(ParsePolyError::BadCoefficient(chars[pos..].iter().collect()));
            }
            let inner: String = chars[pos..=end].iter().collect();
            coeff = Some(C::parse_coeff(&inner).ok_or(ParsePolyError::BadCoefficient(inner))?);
            pos = end + 1;
        } else {
            while pos < chars.len() && (chars[pos].is_ascii_digit() || matches!(chars[pos], '.' | '/' | 'e' | 'E')) {
                // exponent markers only make sense after a digit
                if matches!(chars[pos], 'e' | 'E') && (pos == coeff_start || !chars[pos - 1].is_ascii_digit()) {
                    break;
                }
                if matches!(chars[pos], 'e' | 'E') && pos + 1 < chars.len() && matches!(chars[pos + 1], '-' | '+') {
                    pos += 1;
                }
                pos += 1;
            }
            if pos < chars.len() && chars[pos] == 'i' {
                pos += 1;
            }
            if pos > coeff_start {
                let t: String = chars[coeff_start..pos].iter().collect();
                coeff = Some(C::parse_coeff(&t).ok_or(ParsePolyError::BadCoefficient(t))?);
            }
        }
        skip_ws(&mut pos);
        if pos < chars.len() && chars[pos] == '*' {
            pos += 1;
            skip_ws(&mut pos);
        }
        let mut exp = 0;
        if pos < chars.len() && chars[pos] == 'x' {
            pos += 1;
            exp = 1;
            skip_ws(&mut pos);
            if pos < chars.len() && chars[pos] == '^' {
                pos += 1;
                skip_ws(&mut pos);
                let paren = pos < chars.len() && chars[pos] == '(';
                if paren {
                    pos += 1;
                }
                let start = pos;
                if pos < chars.len() && chars[pos] == '-' {
                    pos += 1;
                }
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
                let t: String = chars[start..pos].iter().collect();
                exp = t.parse().map_err(|_| ParsePolyError::BadExponent(t.clone()))?;
                if paren {
                    if pos < chars.len() && chars[pos] == ')' {
                        pos += 1;
                    } else {
                        return Err(ParsePolyError::BadExponent(t));
                    }
                }
            }
        } else if coeff.is_none() {
            let found = chars.get(pos).map(|c| c.to_string()).unwrap_or_else(|| "end".into());
            return Err(ParsePolyError::Unexpected { found, offset: pos });
        }
        let c = coeff.unwrap_or_else(C::one);
        out.add_term(exp, if negative { -c } else { c });
        skip_ws(&mut pos);
    }
    Ok(out)
}

/// Exact polynomial with integer-ratio coefficients, convenient in tests and examples.
pub fn exact_poly(terms: &[(i32, i64, i64)]) -> LaurentPoly<ExactComplex> {
    LaurentPoly::from_terms(terms.iter().map(|&(e, n, d)| {
        (e, Complex::new(BigRational::new(BigInt::from(n), BigInt::from(d)), BigRational::zero()))
    }))
}

impl<C: Ring> LaurentPoly<C> {
    pub fn one() -> Self {
        Self::constant(<C as One>::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_drops_zeros() {
        let p = exact_poly(&[(2, 1, 1), (2, -1, 1), (0, 3, 1)]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(0), ExactComplex::from_int(3));
    }

    #[test]
    fn text_round_trip_exact() {
        let p = exact_poly(&[(3, 1, 1), (1, -3, 2), (0, 1, 2), (-2, 5, 1)]);
        let t = p.to_string();
        assert_eq!(t, "x^3 - 3/2*x + 1/2 + 5*x^-2");
        assert_eq!(parse_laurent::<ExactComplex>(&t).unwrap(), p);
    }

    #[test]
    fn text_round_trip_float_bits() {
        let p = LaurentPoly::from_terms([
            (1, Complex64::new(0.1, -1e-300)),
            (-4, Complex64::new(-2.5e17, 0.0)),
            (0, Complex64::new(0.0, 3.0)),
        ]);
        let back: LaurentPoly<Complex64> = parse_laurent(&p.to_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn user_forms() {
        let p: LaurentPoly<ExactComplex> = parse_laurent("2x^-1 + x^(2) - 7").unwrap();
        assert_eq!(p, exact_poly(&[(-1, 2, 1), (2, 1, 1), (0, -7, 1)]));
        let q: LaurentPoly<ExactComplex> = parse_laurent("x").unwrap();
        assert_eq!(q, LaurentPoly::x_pow(1));
        assert!(parse_laurent::<ExactComplex>("x + + ").is_err());
        assert!(parse_laurent::<ExactComplex>("").is_err());
    }

    #[test]
    fn scalar_coefficients_round_trip() {
        let c = Scalar::i() * Scalar::s_pow(1) * Scalar::lambda_inv();
        let p = LaurentPoly::from_terms([(-1, c), (2, Scalar::rational(-3, 4))]);
        let back: LaurentPoly<Scalar> = parse_laurent(&p.to_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn evaluation() {
        let p = exact_poly(&[(2, 1, 1), (-1, 1, 1)]);
        let x = ExactComplex::from_ratio(3, 2);
        assert_eq!(p.evaluate(&x), ExactComplex::from_ratio(9, 4) + ExactComplex::from_ratio(2, 3));
    }
}
