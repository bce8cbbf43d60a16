//! q-numbers, q-Pochhammer symbols and the functions `cos_q`, `sin_q`, `e_{q⁻²}`.
//!
//! The trigonometric series cancel badly once `|z|` exceeds `q²`, so larger
//! arguments are only accepted on the even sublattice `z = ±q^{2j}`, where the
//! two difference relations
//!
//! ```text
//! cos_q(z) − cos_q(q⁻²z) = −q⁻² z sin_q(q⁻²z)
//! sin_q(z) − sin_q(q⁻²z) = z cos_q(z)
//! ```
//!
//! are run downwards from far out (the functions are the decaying solution) and
//! normalised against the series at `z = 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::context::QContext;
use crate::ring::{Field, Ring};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("infinite product needs |p| < 1, got {0}")]
    DivergentProduct(f64),
    #[error("q-exponential series needs |z| < 1, got |z| = {0}")]
    OutOfRadius(f64),
    #[error("argument {0} is neither small nor on the even sublattice ±q^(2j)")]
    UnsupportedArgument(f64),
    #[error("deformation parameter must exceed one, got {0}")]
    InvalidQ(f64),
}

/// `(a; p)_n`.
pub fn q_pochhammer<C: Ring>(a: &C, p: &C, n: u32) -> C {
    let mut acc = C::one();
    let mut pk = C::one();
    for _ in 0..n {
        acc = acc * (C::one() - a.clone() * pk.clone());
        pk = pk * p.clone();
    }
    acc
}

/// `(a; p)_∞`, truncated once the factors equal one to machine precision.
pub fn q_pochhammer_inf(a: Complex64, p: f64) -> Result<Complex64, SpecialError> {
    if p.abs() >= 1.0 {
        return Err(SpecialError::DivergentProduct(p));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut term = a;
    for _ in 0..100_000 {
        acc *= Complex64::new(1.0, 0.0) - term;
        if term.norm() < 1e-18 {
            break;
        }
        term *= p;
    }
    Ok(acc)
}

/// `(q⁻²;q⁻²)_n − q^{−n(n+1)/2} λⁿ [n]!`, zero for every `n`.
pub fn pochhammer_factorial_residual<C: Field>(ctx: &QContext<C>, n: u32) -> C {
    let p = ctx.q_pow(-2);
    let lhs = q_pochhammer(&p, &p, n);
    let e = (n * (n + 1) / 2) as i32;
    let rhs = ctx.q_pow(-e) * ctx.lambda().powu(n) * ctx.q_factorial(n);
    lhs - rhs
}

/// A truncated series value with a bound on the dropped tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

const POCH_LEN: usize = 256;
/// Beyond `z = q^{2·TABLE_TOP}` both functions are below the smallest double.
const TABLE_TOP: i32 = 48;
const START_OFFSET: i32 = 8;

/// Special functions for one value of `q`, with precomputed tables.
#[derive(Clone, Debug)]
pub struct QSpecial {
    q: f64,
    /// `(q⁻²;q⁻²)_n`
    poch: Vec<f64>,
    /// `cos_q(q^{2j})`, `sin_q(q^{2j})` for `j = 0..=TABLE_TOP`
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl QSpecial {
    pub fn new(q: f64) -> Result<Self, SpecialError> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(SpecialError::InvalidQ(q));
        }
        let p = q.powi(-2);
        let mut poch = Vec::with_capacity(POCH_LEN);
        poch.push(1.0);
        let mut pk = p;
        for _ in 1..POCH_LEN {
            let last = *poch.last().unwrap();
            poch.push(last * (1.0 - pk));
            pk *= p;
        }
        let mut sp = QSpecial { q, poch, cos_table: Vec::new(), sin_table: Vec::new() };
        sp.build_tables();
        Ok(sp)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.q - 1.0 / self.q
    }

    fn build_tables(&mut self) {
        let q2 = self.q * self.q;
        let top = TABLE_TOP + START_OFFSET;
        let mut vals = vec![(0.0f64, 0.0f64); (top + 1) as usize];
        let (mut c, mut s) = (0.0f64, 1.0f64);
        vals[top as usize] = (c, s);
        for j in (1..=top).rev() {
            // (c_{j−1}, s_{j−1}) = [[1 − q²w², w], [−q²w, 1]] (c_j, s_j), w = q^{2(j−1)}
            let w = q2.powi(j - 1);
            let nc = (1.0 - q2 * w * w) * c + w * s;
            let ns = -q2 * w * c + s;
            c = nc;
            s = ns;
            vals[(j - 1) as usize] = (c, s);
            let m = c.abs().max(s.abs());
            if m > 1e20 {
                for v in vals.iter_mut().skip((j - 1) as usize) {
                    v.0 /= m;
                    v.1 /= m;
                }
                c /= m;
                s /= m;
            }
        }
        let c0 = self.series(Trig::Cos, 1.0).value;
        let s0 = self.series(Trig::Sin, 1.0).value;
        // rescale first: the squared norm of vals[0] can overflow
        let m = vals[0].0.abs().max(vals[0].1.abs());
        let (vc, vs) = (vals[0].0 / m, vals[0].1 / m);
        let factor = (c0 * vc + s0 * vs) / (vc * vc + vs * vs) / m;
        self.cos_table = vals[..=TABLE_TOP as usize].iter().map(|v| v.0 * factor).collect();
        self.sin_table = vals[..=TABLE_TOP as usize].iter().map(|v| v.1 * factor).collect();
    }

    /// `(q⁻²;q⁻²)_n` from the cache.
    pub fn poch(&self, n: usize) -> f64 {
        self.poch[n.min(POCH_LEN - 1)]
    }

    /// The defining series with its truncation bound.
    pub fn series(&self, kind: Trig, z: f64) -> SeriesValue {
        let offset = match kind {
            Trig::Cos => 0,
            Trig::Sin => 1,
        };
        let mut acc = 0.0;
        let mut running_max: f64 = 0.0;
        let mut n = 0usize;
        loop {
            let k = 2 * n + offset;
            let mag = self.q.powf(-2.0 * (n * (n + 1)) as f64) * z.abs().powi(k as i32) / self.poch(k);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * mag * z.signum().powi(offset as i32);
            if n > 0 && (mag < 1e-17 * running_max || mag == 0.0) || 2 * n + 2 >= POCH_LEN {
                return SeriesValue { value: acc, error_bound: mag };
            }
            acc += term;
            running_max = running_max.max(mag);
            n += 1;
        }
    }

    /// `j` with `|z| = q^{2j}`, if `z` sits on the even sublattice.
    fn even_index(&self, z: f64) -> Option<i32> {
        let t = z.abs().ln() / (2.0 * self.q.ln());
        let j = t.round();
        let back = self.q.powi(2 * j as i32);
        ((z.abs() - back).abs() <= 1e-12 * back).then_some(j as i32)
    }

    /// `cos_q(q^{2j})` or `sin_q(q^{2j})`.
    pub fn on_even_lattice(&self, kind: Trig, j: i32) -> f64 {
        if j <= 0 {
            return self.series(kind, self.q.powi(2 * j)).value;
        }
        let table = match kind {
            Trig::Cos => &self.cos_table,
            Trig::Sin => &self.sin_table,
        };
        table.get(j as usize).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, kind: Trig, z: f64) -> Result<f64, SpecialError> {
        if z.abs() <= self.q * self.q * (1.0 + 1e-12) {
            return Ok(self.series(kind, z).value);
        }
        let j = self.even_index(z).ok_or(SpecialError::UnsupportedArgument(z))?;
        let v = self.on_even_lattice(kind, j);
        Ok(match kind {
            Trig::Sin if z < 0.0 => -v,
            _ => v,
        })
    }

    pub fn cos_q(&self, z: f64) -> Result<f64, SpecialError> {
        self.eval(Trig::Cos, z)
    }

    pub fn sin_q(&self, z: f64) -> Result<f64, SpecialError> {
        self.eval(Trig::Sin, z)
    }

    /// `e_{q⁻²}(z) = Σ zᵏ/(q⁻²;q⁻²)_k` for `|z| < 1`.
    pub fn q_exp(&self, z: Complex64) -> Result<Complex64, SpecialError> {
        if z.norm() >= 1.0 {
            return Err(SpecialError::OutOfRadius(z.norm()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        for k in 0..POCH_LEN {
            let term = zk / self.poch(k);
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
            zk *= z;
        }
        Ok(acc)
    }

    /// `1/(z;q⁻²)_∞`, equal to the series inside the unit disc and its
    /// continuation outside.
    pub fn q_exp_product(&self, z: Complex64) -> Complex64 {
        let p = self.q.powi(-2);
        // p < 1 always holds here
        Complex64::new(1.0, 0.0) / q_pochhammer_inf(z, p).unwrap_or(Complex64::new(f64::NAN, 0.0))
    }

    /// `N_q = (q⁻²;q⁻⁴)_∞ / (q⁻⁴;q⁻⁴)_∞`.
    pub fn n_q(&self) -> f64 {
        let q = self.q;
        let num = q_pochhammer_inf(Complex64::new(q.powi(-2), 0.0), q.powi(-4)).unwrap();
        let den = q_pochhammer_inf(Complex64::new(q.powi(-4), 0.0), q.powi(-4)).unwrap();
        (num / den).re
    }

    /// `G[n][m] = Σ_{|k|≤K} q^{−2k} T(q^{−2(k+n)}) T(q^{−2(k+m)})` for labels in `lo..=hi`.
    pub fn gram_matrix(&self, kind: Trig, lo: i32, hi: i32, k_window: i32) -> DMatrix<f64> {
        let size = (hi - lo + 1).max(0) as usize;
        DMatrix::from_fn(size, size, |a, b| {
            let (n, m) = (lo + a as i32, lo + b as i32);
            (-k_window..=k_window)
                .map(|k| {
                    self.q.powi(-2 * k) * self.on_even_lattice(kind, -(k + n)) * self.on_even_lattice(kind, -(k + m))
                })
                .sum()
        })
    }

    /// Largest deviations of a Gram matrix from `diag(q^{2m}/N_q²)`, relative to the diagonal.
    pub fn gram_deviation(&self, gram: &DMatrix<f64>, lo: i32) -> GramDeviation {
        let nq2 = self.n_q() * self.n_q();
        let mut out = GramDeviation { off_diagonal: 0.0, diagonal: 0.0 };
        for a in 0..gram.nrows() {
            let want = self.q.powi(2 * (lo + a as i32)) / nq2;
            for b in 0..gram.ncols() {
                if a == b {
                    out.diagonal = out.diagonal.max((gram[(a, b)] - want).abs() / want);
                } else {
                    let scale = (gram[(a, a)] * gram[(b, b)]).sqrt();
                    out.off_diagonal = out.off_diagonal.max(gram[(a, b)].abs() / scale);
                }
            }
        }
        out
    }

    /// Pointwise residuals of the lattice relations at `z = q^{2l}`, `|l| ≤ l_max`,
    /// and of `∇cos_q(xy)`, `∇²cos_q(xy)` with `y = q`, sampled at `x = q^n`, `|n| ≤ 2 l_max`.
    pub fn relation_residuals(&self, l_max: i32) -> RelationResiduals {
        let q = self.q;
        let lam = self.lambda();
        let c = |j| self.on_even_lattice(Trig::Cos, j);
        let s = |j| self.on_even_lattice(Trig::Sin, j);
        let mut out = RelationResiduals::default();
        for l in -l_max..=l_max {
            let z = q.powi(2 * l);
            out.sin_difference = out.sin_difference.max(((s(l) - s(l - 1)) / z - c(l)).abs());
            out.cos_difference = out.cos_difference.max(((c(l) - c(l - 1)) / z + s(l - 1) / (q * q)).abs());
        }
        let y = q;
        for n in -2 * l_max..=2 * l_max {
            let x = q.powi(n);
            if n.rem_euclid(2) == 0 {
                // xy = q^{2m+1}: ∇ samples q^{2m+2} and q^{2m}
                let m = n / 2;
                let grad = (c(m + 1) - c(m)) / (lam * x);
                let want = -y / (q * lam) * s(m);
                out.derivative = out.derivative.max((grad - want).abs());
            } else {
                // xy = q^{2m}: ∇² samples q^{2m±2} and q^{2m}. Cleared of the
                // (λx)² denominator, which at small x only amplifies roundoff.
                let m = (n + 1).div_euclid(2);
                let lap = (c(m + 1) - c(m)) / q - q * (c(m) - c(m - 1));
                let want = -(x * y).powi(2) / q * c(m);
                out.eigenvalue = out.eigenvalue.max((lap - want).abs());
            }
        }
        out
    }

    /// `f(qˡ) = q^{−(l²+l)/2} c₀`.
    pub fn lattice_gaussian(&self, l: i32, c0: f64) -> f64 {
        let l = l as f64;
        self.q.powf(-0.5 * (l * l + l)) * c0
    }

    pub fn gauss_sum_constants(&self, c0: f64) -> GaussConstants {
        let q = self.q;
        let p4 = q.powi(-4);
        let inf = |a: f64| q_pochhammer_inf(Complex64::new(a, 0.0), p4).unwrap().re;
        let mut direct_tilde = 0.0;
        let mut direct_prime = 0.0;
        for l in -60..=60 {
            let l = l as f64;
            direct_tilde += q.powf(-2.0 * l * l);
            direct_prime += q.powf(-2.0 * l * l - 2.0 * l);
        }
        GaussConstants {
            tilde_c0_direct: c0 * direct_tilde,
            tilde_c0_product: c0 * inf(p4) * inf(-q.powi(-2)) * inf(-q.powi(-2)),
            c0_prime_direct: c0 * direct_prime,
            c0_prime_product: c0 * inf(p4) * inf(-p4) * inf(-1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramDeviation {
    pub off_diagonal: f64,
    pub diagonal: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RelationResiduals {
    pub sin_difference: f64,
    pub cos_difference: f64,
    pub derivative: f64,
    pub eigenvalue: f64,
}

/// Gauss sums `c̃₀ = c₀ Σ q^{−2l²}` and `c₀′ = c₀ Σ q^{−2l²−2l}`, each by direct
/// summation and by the triple product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussConstants {
    pub tilde_c0_direct: f64,
    pub tilde_c0_product: f64,
    pub c0_prime_direct: f64,
    pub c0_prime_product: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    C,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexParity {
    /// label `2n`
    Even,
    /// label `2n+1`
    Odd,
}

/// Eigenvalue of `∇²` on the basis function with label `2n` or `2n+1`.
pub fn nabla2_eigenvalue(q: f64, basis: Basis, parity: IndexParity, n: i32) -> f64 {
    let lam = q - 1.0 / q;
    let e = match (basis, parity) {
        (Basis::C, IndexParity::Odd) => 4 * n + 1,
        (Basis::C, IndexParity::Even) => 4 * n - 1,
        (Basis::S, IndexParity::Odd) => 4 * n + 3,
        (Basis::S, IndexParity::Even) => 4 * n + 1,
    };
    -q.powi(e) / (lam * lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::ExactComplex;

    fn sp() -> QSpecial {
        QSpecial::new(2.0).unwrap()
    }

    #[test]
    fn pochhammer_examples() {
        let q = ExactComplex::from_int(2);
        let p = q.powi(-2);
        let two = q_pochhammer(&p, &p, 2);
        assert_eq!(two, (ExactComplex::from_int(1) - q.powi(-2)) * (ExactComplex::from_int(1) - q.powi(-4)));
        assert_eq!(q_pochhammer(&p, &p, 0), ExactComplex::from_int(1));
        assert!(q_pochhammer_inf(Complex64::new(0.5, 0.0), 1.0).is_err());
    }

    #[test]
    fn factorial_identity_exact() {
        let ctx = QContext::exact(2, 1).unwrap();
        for n in 0..=12 {
            assert_eq!(pochhammer_factorial_residual(&ctx, n), ExactComplex::from_int(0));
        }
    }

    #[test]
    fn series_leading_terms() {
        let s = sp();
        assert_eq!(s.cos_q(0.0).unwrap(), 1.0);
        let z = 1e-4;
        let lead = z / (1.0 - 0.25);
        assert!((s.sin_q(z).unwrap() - lead).abs() < 1e-11);
    }

    #[test]
    fn table_joins_series() {
        let s = sp();
        for kind in [Trig::Cos, Trig::Sin] {
            let direct = s.series(kind, 4.0).value;
            assert!((s.on_even_lattice(kind, 1) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn difference_relations_on_lattice() {
        let s = sp();
        for l in -6..=6 {
            let z = 4f64.powi(l);
            let c = s.cos_q(z).unwrap();
            let c1 = s.cos_q(z / 4.0).unwrap();
            let si = s.sin_q(z).unwrap();
            let s1 = s.sin_q(z / 4.0).unwrap();
            assert!(((si - s1) / z - c).abs() < 1e-12, "sin relation at l = {l}");
            assert!(((c - c1) / z + 0.25 * s1).abs() < 1e-12, "cos relation at l = {l}");
        }
    }

    #[test]
    fn odd_powers_rejected() {
        assert!(matches!(sp().cos_q(8.0), Err(SpecialError::UnsupportedArgument(_))));
    }

    #[test]
    fn q_exp_radius() {
        let s = sp();
        assert_eq!(s.q_exp(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        let z = Complex64::new(1e-5, 0.0);
        assert!((s.q_exp(z).unwrap().re - (1.0 + z.re / 0.75)).abs() < 1e-9);
        assert!(s.q_exp(Complex64::new(1.0, 0.0)).is_err());
        let w = Complex64::new(0.3, -0.4);
        assert!((s.q_exp(w).unwrap() - s.q_exp_product(w)).norm() < 1e-14);
    }

    #[test]
    fn n_q_by_factors() {
        let s = sp();
        let mut direct = 1.0;
        for k in 0..200 {
            direct *= (1.0 - 2f64.powi(-2 - 4 * k)) / (1.0 - 2f64.powi(-4 - 4 * k));
        }
        assert!((s.n_q() - direct).abs() < 1e-12);
        assert!(s.n_q() > 0.0);
        assert!((s.n_q() - 0.789_970_474_669_932_4).abs() < 1e-15);
    }

    #[test]
    fn orthogonality_diagonal() {
        let s = sp();
        let nq = s.n_q();
        for n in -3..=3 {
            let mut sum = 0.0;
            for k in -60..=60 {
                let c = s.on_even_lattice(Trig::Cos, -(k + n));
                sum += 4f64.powi(-k) * c * c;
            }
            let want = 4f64.powi(n) / (nq * nq);
            assert!((sum - want).abs() < 1e-10 * want, "n = {n}: {sum} vs {want}");
        }
    }

    #[test]
    fn gram_matrices() {
        let s = sp();
        for kind in [Trig::Cos, Trig::Sin] {
            let g = s.gram_matrix(kind, -6, 6, 60);
            let d = s.gram_deviation(&g, -6);
            assert!(d.off_diagonal < 1e-10 && d.diagonal < 1e-10, "{kind:?}: {d:?}");
        }
    }

    #[test]
    fn relations() {
        let r = sp().relation_residuals(6);
        assert!(r.sin_difference < 1e-12 && r.cos_difference < 1e-12, "{r:?}");
        assert!(r.derivative < 1e-10 && r.eigenvalue < 1e-9, "{r:?}");
    }

    #[test]
    fn gauss_constants() {
        let g = sp().gauss_sum_constants(1.0);
        assert!((g.tilde_c0_direct - g.tilde_c0_product).abs() < 1e-12);
        assert!((g.c0_prime_direct - g.c0_prime_product).abs() < 1e-12);
        assert!((g.tilde_c0_direct - 1.507_820_129_860_194_3).abs() < 1e-14);
        assert!((g.c0_prime_direct - 2.125_488_400_461_108_5).abs() < 1e-14);
        assert_eq!(sp().lattice_gaussian(0, 3.0), 3.0);
    }

    #[test]
    fn eigenvalue_table() {
        let q = 2.0;
        let lam2 = 1.5f64 * 1.5;
        assert_eq!(nabla2_eigenvalue(q, Basis::C, IndexParity::Odd, 0), -2.0 / lam2);
        assert_eq!(
            nabla2_eigenvalue(q, Basis::S, IndexParity::Even, 0),
            nabla2_eigenvalue(q, Basis::C, IndexParity::Odd, 0)
        );
        assert_eq!(nabla2_eigenvalue(q, Basis::C, IndexParity::Even, 1), -8.0 / lam2);
    }
}
