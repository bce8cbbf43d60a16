use num_complex::Complex64;
use thiserror::Error;

use crate::ring::{ExactComplex, Field, Ring};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContextError {
    #[error("deformation parameter must be real and greater than one, got {0}")]
    InvalidQ(String),
}

/// The deformation parameter and the constants derived from it.
///
/// `λ = q − q⁻¹` throughout; the covariant derivative must reduce to the
/// plain difference quotient when the Einbein is one, which pins this value.
#[derive(Clone, Debug, PartialEq)]
pub struct QContext<C> {
    q: C,
    q_inv: C,
    lambda: C,
    lambda_inv: C,
}

impl<C: Field> QContext<C> {
    pub fn new(q: C) -> Result<Self, ContextError> {
        let z = q.to_c64();
        let real = if C::is_exact() { q == q.conj() } else { z.im == 0.0 };
        if !real || !(z.re > 1.0) || !z.re.is_finite() {
            return Err(ContextError::InvalidQ(format!("{q:?}")));
        }
        let q_inv = C::one() / q.clone();
        let lambda = q.clone() - q_inv.clone();
        let lambda_inv = C::one() / lambda.clone();
        Ok(QContext { q, q_inv, lambda, lambda_inv })
    }
}

impl QContext<Complex64> {
    pub fn float(q: f64) -> Result<Self, ContextError> {
        QContext::new(Complex64::new(q, 0.0))
    }

    pub fn q_f64(&self) -> f64 {
        self.q.re
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.re
    }
}

impl QContext<ExactComplex> {
    pub fn exact(num: i64, den: i64) -> Result<Self, ContextError> {
        QContext::new(ExactComplex::from_ratio(num, den))
    }
}

impl QContext<Scalar> {
    /// `q` as the formal symbol `s²`.
    pub fn formal() -> Self {
        QContext {
            q: Scalar::q_pow(1),
            q_inv: Scalar::q_pow(-1),
            lambda: Scalar::lambda(),
            lambda_inv: Scalar::lambda_inv(),
        }
    }
}

impl<C: Ring> QContext<C> {
    pub fn q(&self) -> &C {
        &self.q
    }

    pub fn q_inv(&self) -> &C {
        &self.q_inv
    }

    pub fn lambda(&self) -> &C {
        &self.lambda
    }

    pub fn lambda_inv(&self) -> &C {
        &self.lambda_inv
    }

    pub fn q_pow(&self, n: i32) -> C {
        if n >= 0 {
            self.q.powu(n as u32)
        } else {
            self.q_inv.powu(n.unsigned_abs())
        }
    }

    /// `[n] = (qⁿ − q⁻ⁿ)/(q − q⁻¹)`, computed as `Σ_k q^{n−1−2k}` so it stays
    /// inside the ring; `[0] = 0` and `[−n] = −[n]`.
    pub fn q_number(&self, n: i32) -> C {
        let m = n.abs();
        let mut acc = C::zero();
        for k in 0..m {
            acc = acc + self.q_pow(m - 1 - 2 * k);
        }
        if n < 0 {
            -acc
        } else {
            acc
        }
    }

    /// `[n]! = [1][2]…[n]`.
    pub fn q_factorial(&self, n: u32) -> C {
        (1..=n as i32).fold(C::one(), |acc, k| acc * self.q_number(k))
    }
}
