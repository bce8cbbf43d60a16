//! Unordered words in the generators, for stating relations as written.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::AlgebraElement;
use crate::ring::Ring;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X,
    XInv,
    P,
    Lam,
    LamInv,
}

impl Letter {
    fn bar(self) -> Letter {
        match self {
            Letter::Lam => Letter::LamInv,
            Letter::LamInv => Letter::Lam,
            other => other,
        }
    }
}

/// Linear combination of words; no relations are applied until [`FreeExpr::normal_order`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FreeExpr {
    words: BTreeMap<Vec<Letter>, Scalar>,
}

impl FreeExpr {
    pub fn word(letters: &[Letter]) -> Self {
        Self::scaled_word(letters, Scalar::one())
    }

    pub fn scaled_word(letters: &[Letter], c: Scalar) -> Self {
        let mut e = FreeExpr::default();
        e.add_word(letters.to_vec(), c);
        e
    }

    pub fn scalar(c: Scalar) -> Self {
        Self::scaled_word(&[], c)
    }

    fn add_word(&mut self, w: Vec<Letter>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let v = match self.words.remove(&w) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.words.insert(w, v);
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut e = FreeExpr::default();
        for (w, v) in &self.words {
            e.add_word(w.clone(), v.clone() * c.clone());
        }
        e
    }

    /// Reverses every word, swaps `Λ ↔ Λ⁻¹` and conjugates coefficients.
    pub fn bar(&self) -> Self {
        let mut e = FreeExpr::default();
        for (w, v) in &self.words {
            e.add_word(w.iter().rev().map(|l| l.bar()).collect(), v.conj());
        }
        e
    }

    pub fn normal_order(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (w, v) in &self.words {
            let mut part = AlgebraElement::one();
            for l in w {
                part = part.mul_letter(*l);
            }
            out = out + part.scale(v);
        }
        out
    }
}

impl Add for FreeExpr {
    type Output = FreeExpr;
    fn add(mut self, rhs: FreeExpr) -> FreeExpr {
        for (w, v) in rhs.words {
            self.add_word(w, v);
        }
        self
    }
}

impl Neg for FreeExpr {
    type Output = FreeExpr;
    fn neg(self) -> FreeExpr {
        self.scale(&-Scalar::one())
    }
}

impl Sub for FreeExpr {
    type Output = FreeExpr;
    fn sub(self, rhs: FreeExpr) -> FreeExpr {
        self + (-rhs)
    }
}

impl Mul for FreeExpr {
    type Output = FreeExpr;
    fn mul(self, rhs: FreeExpr) -> FreeExpr {
        let mut e = FreeExpr::default();
        for (wa, va) in &self.words {
            for (wb, vb) in &rhs.words {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                e.add_word(w, va.clone() * vb.clone());
            }
        }
        e
    }
}
