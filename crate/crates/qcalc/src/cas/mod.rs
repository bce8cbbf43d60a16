//! Normal ordering in the algebra generated by `x, x⁻¹, p, Λ, Λ⁻¹` subject to
//!
//! ```text
//! q^{1/2} x p − q^{−1/2} p x = iΛ,   Λ p = q p Λ,   Λ x = q⁻¹ x Λ.
//! ```
//!
//! Elements are kept as sums of `x^a p^b Λ^c` with [`Scalar`] coefficients.

mod free;
mod text;

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::ring::Ring;
use crate::scalar::Scalar;

pub use free::{FreeExpr, Letter};
pub use text::ParseElementError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasError {
    #[error("ordered product contains unexpected monomial x^{a} p^{b} L^{c}")]
    InternalOrdering { a: i32, b: u32, c: i32 },
}

/// `x^a p^b Λ^c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderedMonomial {
    pub a: i32,
    pub b: u32,
    pub c: i32,
}

impl OrderedMonomial {
    pub const fn new(a: i32, b: u32, c: i32) -> Self {
        OrderedMonomial { a, b, c }
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<OrderedMonomial, Scalar>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement::default()
    }

    pub fn one() -> Self {
        Self::scalar(Scalar::one())
    }

    pub fn scalar(c: Scalar) -> Self {
        Self::term(OrderedMonomial::new(0, 0, 0), c)
    }

    pub fn term(m: OrderedMonomial, c: Scalar) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn monomial(a: i32, b: u32, c: i32) -> Self {
        Self::term(OrderedMonomial::new(a, b, c), Scalar::one())
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, 0)
    }

    pub fn x_inv() -> Self {
        Self::monomial(-1, 0, 0)
    }

    pub fn p() -> Self {
        Self::monomial(0, 1, 0)
    }

    pub fn lam() -> Self {
        Self::monomial(0, 0, 1)
    }

    pub fn lam_inv() -> Self {
        Self::monomial(0, 0, -1)
    }

    /// Embeds a field `f(x)`.
    pub fn from_field(f: &LaurentPoly<Scalar>) -> Self {
        let mut e = Self::zero();
        for (n, c) in f.terms() {
            e.add_term(OrderedMonomial::new(n, 0, 0), c.clone());
        }
        e
    }

    pub fn add_term(&mut self, m: OrderedMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let v = old + c;
                if !v.is_zero() {
                    self.terms.insert(m, v);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OrderedMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: OrderedMonomial) -> Scalar {
        self.terms.get(&m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut e = Self::zero();
        for (m, v) in &self.terms {
            e.add_term(*m, v.clone() * c.clone());
        }
        e
    }

    fn map_monomials(&self, f: impl Fn(OrderedMonomial) -> OrderedMonomial) -> Self {
        let mut e = Self::zero();
        for (m, v) in &self.terms {
            e.add_term(f(*m), v.clone());
        }
        e
    }

    /// Right multiplication by a single generator, keeping normal order.
    pub fn mul_letter(&self, letter: Letter) -> Self {
        match letter {
            Letter::Lam => self.map_monomials(|m| OrderedMonomial::new(m.a, m.b, m.c + 1)),
            Letter::LamInv => self.map_monomials(|m| OrderedMonomial::new(m.a, m.b, m.c - 1)),
            Letter::P => {
                // Λ^c p = q^c p Λ^c
                let mut e = Self::zero();
                for (m, v) in &self.terms {
                    e.add_term(OrderedMonomial::new(m.a, m.b + 1, m.c), v.shift_s(2 * m.c));
                }
                e
            }
            Letter::X | Letter::XInv => {
                let inverse = letter == Letter::XInv;
                // Λ^c x^{±1} = q^{∓c} x^{±1} Λ^c
                let sign = if inverse { 1 } else { -1 };
                let mut e = Self::zero();
                for (m, v) in &self.terms {
                    let moved = p_power_times_x(m.b, inverse);
                    let v = v.shift_s(2 * sign * m.c);
                    for (mm, vv) in &moved.terms {
                        e.add_term(
                            OrderedMonomial::new(m.a + mm.a, mm.b, mm.c + m.c),
                            v.clone() * vv.clone(),
                        );
                    }
                }
                e
            }
        }
    }

    /// Normally ordered product `self · rhs`.
    pub fn multiply(&self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = Self::zero();
        for (m, v) in &rhs.terms {
            let mut part = self.clone();
            let x_letter = if m.a >= 0 { Letter::X } else { Letter::XInv };
            for _ in 0..m.a.unsigned_abs() {
                part = part.mul_letter(x_letter);
            }
            for _ in 0..m.b {
                part = part.mul_letter(Letter::P);
            }
            part = part.map_monomials(|t| OrderedMonomial::new(t.a, t.b, t.c + m.c));
            out = out + part.scale(v);
        }
        out
    }

    /// The antilinear anti-automorphism with `x̄ = x`, `p̄ = p`, `Λ̄ = Λ⁻¹`,
    /// applied to the ordered representative.
    pub fn bar(&self) -> AlgebraElement {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            let mut part = Self::monomial(0, 0, -m.c);
            for _ in 0..m.b {
                part = part.mul_letter(Letter::P);
            }
            let x_letter = if m.a >= 0 { Letter::X } else { Letter::XInv };
            for _ in 0..m.a.unsigned_abs() {
                part = part.mul_letter(x_letter);
            }
            out = out + part.scale(&v.conj());
        }
        out
    }

    /// Eliminates `p` with the closed form of the momentum, leaving a sum of
    /// `x^a Λ^c`. Two ordered elements are equal in the quotient by the
    /// relation `x p = i q^{1/2} λ⁻¹ (Λ − q⁻¹Λ⁻¹)` exactly when their reductions agree.
    pub fn reduce(&self) -> AlgebraElement {
        let pc = p_closed_form();
        let mut powers = vec![AlgebraElement::one()];
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            while powers.len() <= m.b as usize {
                let next = powers.last().unwrap().multiply(&pc);
                powers.push(next);
            }
            let part = powers[m.b as usize]
                .map_monomials(|t| OrderedMonomial::new(t.a + m.a, t.b, t.c + m.c));
            out = out + part.scale(v);
        }
        out
    }

    /// Recovers `(g, h, j)` from `p f = g p − i q^{1/2} h Λ` and `Λ f = j Λ`.
    /// `h` is the derivative of `f` and `j` its image under the scale map.
    pub fn extract_nabla_l(
        f: &LaurentPoly<Scalar>,
    ) -> Result<(LaurentPoly<Scalar>, LaurentPoly<Scalar>, LaurentPoly<Scalar>), CasError> {
        let fe = Self::from_field(f);
        let pf = Self::p().multiply(&fe);
        let lf = Self::lam().multiply(&fe);
        // h = coefficient / (−i s) = coefficient · i s⁻¹
        let h_factor = Scalar::i() * Scalar::s_pow(-1);
        let mut g = LaurentPoly::zero();
        let mut h = LaurentPoly::zero();
        for (m, v) in &pf.terms {
            match (m.b, m.c) {
                (1, 0) => g.add_term(m.a, v.clone()),
                (0, 1) => h.add_term(m.a, v.clone() * h_factor.clone()),
                _ => return Err(CasError::InternalOrdering { a: m.a, b: m.b, c: m.c }),
            }
        }
        let mut j = LaurentPoly::zero();
        for (m, v) in &lf.terms {
            if m.b != 0 || m.c != 1 {
                return Err(CasError::InternalOrdering { a: m.a, b: m.b, c: m.c });
            }
            j.add_term(m.a, v.clone());
        }
        Ok((h, g, j))
    }
}

/// `p = i q^{1/2} λ⁻¹ x⁻¹ (Λ − q⁻¹Λ⁻¹)`.
pub fn p_closed_form() -> AlgebraElement {
    let c = Scalar::i() * Scalar::s_pow(1) * Scalar::lambda_inv();
    let mut e = AlgebraElement::zero();
    e.add_term(OrderedMonomial::new(-1, 0, 1), c.clone());
    e.add_term(OrderedMonomial::new(-1, 0, -1), -(c.shift_s(-2)));
    e
}

type PxCache = Mutex<HashMap<(u32, bool), AlgebraElement>>;

/// Ordered form of `p^b x` or `p^b x⁻¹`.
fn p_power_times_x(b: u32, inverse: bool) -> AlgebraElement {
    static CACHE: OnceLock<PxCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(e) = cache.lock().unwrap().get(&(b, inverse)) {
        return e.clone();
    }
    let is = Scalar::i() * Scalar::s_pow(1);
    let value = if b == 0 {
        AlgebraElement::monomial(if inverse { -1 } else { 1 }, 0, 0)
    } else if !inverse {
        // p^b x = q (p^{b−1} x) p − i s p^{b−1} Λ
        let prev = p_power_times_x(b - 1, false);
        prev.mul_letter(Letter::P).scale(&Scalar::q_pow(1))
            - AlgebraElement::term(OrderedMonomial::new(0, b - 1, 1), is)
    } else {
        // p^b x⁻¹ = q⁻¹ (p^{b−1} x⁻¹) p + i s (p^{b−1} x⁻¹) x⁻¹ Λ
        let prev = p_power_times_x(b - 1, true);
        prev.mul_letter(Letter::P).scale(&Scalar::q_pow(-1))
            + prev.mul_letter(Letter::XInv).mul_letter(Letter::Lam).scale(&is)
    };
    cache.lock().unwrap().insert((b, inverse), value.clone());
    value
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(mut self, rhs: AlgebraElement) -> AlgebraElement {
        for (m, v) in rhs.terms {
            self.add_term(m, v);
        }
        self
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement { terms: self.terms.into_iter().map(|(m, v)| (m, -v)).collect() }
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: AlgebraElement) -> AlgebraElement {
        self + (-rhs)
    }
}

impl Mul for AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        self.multiply(&rhs)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.multiply(rhs)
    }
}

/// A named identity whose residual must vanish exactly.
#[derive(Clone, Debug)]
pub struct RelationCheck {
    pub label: &'static str,
    pub residual: AlgebraElement,
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// The defining relations as written, their barred forms, and the hermiticity of `p`.
/// Barred forms hold in the quotient, so they are compared after [`AlgebraElement::reduce`].
pub fn relation_checks() -> Vec<RelationCheck> {
    use Letter::*;
    let s = Scalar::s_pow(1);
    let s_inv = Scalar::s_pow(-1);
    let heisenberg = FreeExpr::scaled_word(&[X, P], s.clone())
        - FreeExpr::scaled_word(&[P, X], s_inv.clone())
        - FreeExpr::scaled_word(&[Lam], Scalar::i());
    let lam_p = FreeExpr::word(&[Lam, P]) - FreeExpr::scaled_word(&[P, Lam], Scalar::q_pow(1));
    let lam_x = FreeExpr::word(&[Lam, X]) - FreeExpr::scaled_word(&[X, Lam], Scalar::q_pow(-1));
    let conjugate = FreeExpr::scaled_word(&[P, X], s)
        - FreeExpr::scaled_word(&[X, P], s_inv)
        + FreeExpr::scaled_word(&[LamInv], Scalar::i());
    let inverses = FreeExpr::word(&[X, XInv]) + FreeExpr::word(&[Lam, LamInv]) - FreeExpr::scalar(Scalar::from_int(2));
    let barred = |e: &FreeExpr| e.bar().normal_order().reduce();
    vec![
        RelationCheck { label: "heisenberg relation", residual: heisenberg.normal_order() },
        RelationCheck { label: "scaling of p", residual: lam_p.normal_order() },
        RelationCheck { label: "scaling of x", residual: lam_x.normal_order() },
        RelationCheck { label: "inverses", residual: inverses.normal_order() },
        RelationCheck { label: "barred heisenberg relation", residual: barred(&heisenberg) },
        RelationCheck { label: "barred scaling of p", residual: barred(&lam_p) },
        RelationCheck { label: "barred scaling of x", residual: barred(&lam_x) },
        RelationCheck { label: "conjugate relation", residual: conjugate.normal_order().reduce() },
        RelationCheck { label: "bar of heisenberg is conjugate", residual: (heisenberg.bar() - conjugate.clone()).normal_order() },
        RelationCheck { label: "p hermitian", residual: p_closed_form().bar() - p_closed_form() },
    ]
}

/// A random element with up to `max_terms` monomials, powers in `[−max_pow, max_pow]`
/// (`b` in `[0, max_pow]`) and small Gaussian-rational coefficients times powers of `s`.
pub fn random_element<R: Rng>(rng: &mut R, max_terms: usize, max_pow: i32) -> AlgebraElement {
    let mut e = AlgebraElement::zero();
    let n = rng.gen_range(1..=max_terms);
    for _ in 0..n {
        let m = OrderedMonomial::new(
            rng.gen_range(-max_pow..=max_pow),
            rng.gen_range(0..=max_pow as u32),
            rng.gen_range(-max_pow..=max_pow),
        );
        let re = Scalar::rational(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        let im = Scalar::rational(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        let c = (re + Scalar::i() * im) * Scalar::s_pow(rng.gen_range(-2..=2));
        e.add_term(m, c);
    }
    e
}
