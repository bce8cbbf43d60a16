//! Text form `(coeff) x^a p^b L^c + ...`, one term per ordered monomial.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{AlgebraElement, OrderedMonomial};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseElementError {
    #[error("term `{0}` is not of the form `(coeff) x^a p^b L^c`")]
    BadTerm(String),
    #[error("bad coefficient in `{term}`: {reason}")]
    BadCoefficient { term: String, reason: String },
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v}) x^{} p^{} L^{}", m.a, m.b, m.c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Splits on ` + ` outside parentheses and braces.
fn split_terms(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b'{' => depth += 1,
            b')' | b'}' => depth -= 1,
            b'+' if depth == 0 && i > 0 && bytes[i - 1] == b' ' && bytes.get(i + 1) == Some(&b' ') => {
                out.push(&text[start..i - 1]);
                start = i + 2;
            }
            _ => {}
        }
        i += 1;
    }
    out.push(&text[start..]);
    out
}

impl FromStr for AlgebraElement {
    type Err = ParseElementError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        let mut e = AlgebraElement::zero();
        if t == "0" {
            return Ok(e);
        }
        for term in split_terms(t) {
            let term = term.trim();
            let bad = || ParseElementError::BadTerm(term.to_string());
            let rest = term.strip_prefix('(').ok_or_else(bad)?;
            let mut depth = 1;
            let close = rest
                .char_indices()
                .find(|&(_, c)| {
                    match c {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        _ => {}
                    }
                    depth == 0
                })
                .map(|(i, _)| i)
                .ok_or_else(bad)?;
            let coeff: Scalar = rest[..close].parse().map_err(|reason| {
                ParseElementError::BadCoefficient { term: term.to_string(), reason }
            })?;
            let mut powers = rest[close + 1..].split_whitespace();
            let mut read = |prefix: &str| -> Result<i64, ParseElementError> {
                powers
                    .next()
                    .and_then(|w| w.strip_prefix(prefix))
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(bad)
            };
            let a = read("x^")?;
            let b = read("p^")?;
            let c = read("L^")?;
            if powers.next().is_some() || b < 0 {
                return Err(bad());
            }
            e.add_term(OrderedMonomial::new(a as i32, b as u32, c as i32), coeff);
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let e = AlgebraElement::p() * AlgebraElement::x_inv() * AlgebraElement::lam();
        let text = e.to_string();
        assert_eq!(text.parse::<AlgebraElement>().unwrap(), e);
        assert_eq!("0".parse::<AlgebraElement>().unwrap(), AlgebraElement::zero());
    }

    #[test]
    fn golden_p_times_x() {
        let e = AlgebraElement::p() * AlgebraElement::x();
        assert_eq!(e.to_string(), "(-i*s^1) x^0 p^0 L^1 + (1*s^2) x^1 p^1 L^0");
    }

    #[test]
    fn rejects_malformed() {
        assert!("(1) x^0 p^-1 L^0".parse::<AlgebraElement>().is_err());
        assert!("x^0 p^0 L^0".parse::<AlgebraElement>().is_err());
        assert!("(1) x^0 L^0".parse::<AlgebraElement>().is_err());
    }
}
