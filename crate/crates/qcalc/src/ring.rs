//! Coefficient rings shared by every module.
//!
//! Three implementors exist: [`Complex64`] for lattice numerics,
//! [`ExactComplex`] (Gaussian rationals) for identities that must hold
//! exactly, and [`crate::scalar::Scalar`] where `q` itself stays formal.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Gaussian rationals: exact complex numbers with rational parts.
pub type ExactComplex = Complex<BigRational>;

pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Complex conjugation; `q` is real so it is fixed.
    fn conj(&self) -> Self;
    fn from_int(n: i64) -> Self;
    fn imag_unit() -> Self;

    fn powu(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

/// A ring where every nonzero element can be inverted and values can be
/// compared against floating tolerances.
pub trait Field: Ring + Div<Output = Self> {
    fn to_c64(&self) -> Complex64;
    fn from_rational(re: &BigRational, im: &BigRational) -> Self;
    /// True when arithmetic is exact, so residuals should be zero rather than small.
    fn is_exact() -> bool;

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(
            &BigRational::new(BigInt::from(num), BigInt::from(den)),
            &BigRational::zero(),
        )
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }

    fn powi(&self, n: i32) -> Self {
        if n >= 0 {
            self.powu(n as u32)
        } else {
            (Self::one() / self.clone()).powu(n.unsigned_abs())
        }
    }
}

impl Ring for Complex64 {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::i()
    }
}

impl Field for Complex64 {
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn from_rational(re: &BigRational, im: &BigRational) -> Self {
        Complex64::new(rational_to_f64(re), rational_to_f64(im))
    }
    fn is_exact() -> bool {
        false
    }
}

impl Ring for ExactComplex {
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn from_int(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }
    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
}

impl Field for ExactComplex {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn from_rational(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(re.clone(), im.clone())
    }
    fn is_exact() -> bool {
        true
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators and denominators: shift both down before dividing.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
    nf / df
}

/// Parses `"3/2"`, `"-7"` or a finite decimal such as `"2.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().ok()?
        };
        let frac: BigInt = if frac_part.is_empty() {
            BigInt::zero()
        } else {
            frac_part.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let mag = BigRational::new(whole * &scale + frac, scale);
        return Some(if negative { -mag } else { mag });
    }
    let n: BigInt = t.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Writes a rational as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
