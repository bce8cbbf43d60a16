//! The q-deformed harmonic oscillator on the lattice.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::jackson::jackson_weights;
use crate::lattice::{LatticeFn, LatticeGrid};
use crate::ring::Ring;
use crate::schrodinger::{rows_max, Representation, SchrodingerError};
use crate::special::{GaussConstants, QSpecial, SpecialError, Trig};

#[derive(Debug, Error)]
pub enum OscillatorError {
    #[error("ladder parameters must be nonzero")]
    ZeroParameter,
    #[error("ground-state recursion does not decay on chain starting at n = {n}")]
    NoDecay { n: i32 },
    #[error("closed-form ground state is only available for m = 1, got {0}")]
    UnsupportedIndex(u32),
    #[error("level {level} has no interior sites left")]
    BoundaryContamination { level: usize },
    #[error("gaussian is {edge:e} at the window edge, need below {tol:e}")]
    WindowTooSmall { edge: f64, tol: f64 },
    #[error(transparent)]
    Representation(#[from] SchrodingerError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub m_index: u32,
}

impl LadderParams {
    /// `β = i/√λ`, `α = q^{3/2}β`, so that `|α| = q/√(1 − q⁻²)`.
    pub fn normalized(q: f64) -> Self {
        let beta = c(0.0, 1.0 / (q - 1.0 / q).sqrt());
        LadderParams { alpha: beta * q.powf(1.5), beta, m_index: 1 }
    }
}

pub struct LadderPair {
    rep: Representation,
    params: LadderParams,
    pub a: DMatrix<Complex64>,
    pub a_dag: DMatrix<Complex64>,
}

fn mat_pow(base: &DMatrix<Complex64>, k: u32) -> DMatrix<Complex64> {
    let mut out = DMatrix::identity(base.nrows(), base.ncols());
    for _ in 0..k {
        out = &out * base;
    }
    out
}

fn scaled(m: &DMatrix<Complex64>, k: Complex64) -> DMatrix<Complex64> {
    m.map(|v| v * k)
}

impl LadderPair {
    /// `a = αL⁻² − iβ∇L⁻¹`, `a† = ᾱq⁻²L² − iβ̄∇L` for `m = 1`; otherwise
    /// `a = αL^{−2m} − iβL^{−m−1}∇L`, `a† = ᾱq^{−2m}L^{2m} − iq^{−m−1}β̄∇L⁻¹L^{m+1}`.
    pub fn build(grid: &LatticeGrid, params: LadderParams) -> Result<Self, OscillatorError> {
        if params.alpha.norm() == 0.0 || params.beta.norm() == 0.0 {
            return Err(OscillatorError::ZeroParameter);
        }
        let rep = Representation::build(grid)?;
        let q = grid.q();
        let m = params.m_index;
        let i = c(0.0, 1.0);
        let (al, be) = (params.alpha, params.beta);
        let (a, a_dag) = if m == 1 {
            let a = scaled(&mat_pow(&rep.l_inv, 2), al) - scaled(&(&rep.nabla * &rep.l_inv), i * be);
            let a_dag = scaled(&mat_pow(&rep.l, 2), al.conj() * q.powi(-2)) - scaled(&(&rep.nabla * &rep.l), i * be.conj());
            (a, a_dag)
        } else {
            let mi = m as i32;
            let a = scaled(&mat_pow(&rep.l_inv, 2 * m), al)
                - scaled(&(mat_pow(&rep.l_inv, m + 1) * &rep.nabla * &rep.l), i * be);
            let a_dag = scaled(&mat_pow(&rep.l, 2 * m), al.conj() * q.powi(-2 * mi))
                - scaled(&(&rep.nabla * &rep.l_inv * mat_pow(&rep.l, m + 1)), i * be.conj() * q.powi(-mi - 1));
            (a, a_dag)
        };
        Ok(LadderPair { rep, params, a, a_dag })
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn params(&self) -> LadderParams {
        self.params
    }

    fn q(&self) -> f64 {
        self.rep.grid().q()
    }

    /// Rows unaffected by truncation of `a a†` and `a† a`.
    pub fn interior_rows(&self) -> Vec<usize> {
        self.rep.interior_rows(2 * self.params.m_index as i32 + 2)
    }

    /// `q^{−2m}(1 − q^{−2m})|α|²`.
    pub fn commutator_constant(&self) -> f64 {
        let qm = self.q().powi(-2 * self.params.m_index as i32);
        qm * (1.0 - qm) * self.params.alpha.norm_sqr()
    }

    /// `a a† − q^{−2m} a† a − const` on interior rows.
    pub fn commutator_residual(&self) -> f64 {
        let qm = self.q().powi(-2 * self.params.m_index as i32);
        let n = self.a.nrows();
        let r = &self.a * &self.a_dag
            - scaled(&(&self.a_dag * &self.a), c(qm, 0.0))
            - DMatrix::identity(n, n).map(|v: Complex64| v * self.commutator_constant());
        rows_max(&r, &self.interior_rows())
    }

    /// `a†a` against `|α|²q⁻² − iᾱβ∇L − iαβ̄∇L⁻¹ − q|β|²∇²`, relative to the largest entry.
    pub fn hamiltonian_residual(&self) -> f64 {
        let q = self.q();
        let (al, be) = (self.params.alpha, self.params.beta);
        let rep = &self.rep;
        let n = self.a.nrows();
        let i = c(0.0, 1.0);
        let h = &self.a_dag * &self.a;
        let want = DMatrix::identity(n, n).map(|v: Complex64| v * (al.norm_sqr() / (q * q)))
            - scaled(&(&rep.nabla * &rep.l), i * al.conj() * be)
            - scaled(&(&rep.nabla * &rep.l_inv), i * al * be.conj())
            - scaled(&(&rep.nabla * &rep.nabla), c(q * be.norm_sqr(), 0.0));
        let rows = self.interior_rows();
        rows_max(&(h - &want), &rows) / rows_max(&want, &rows)
    }

    /// `Xᵢ = κxᵢ` with `κ = |β|²λq^{−1/2}`.
    pub fn x_scale(&self) -> f64 {
        let q = self.q();
        self.params.beta.norm_sqr() * (q - 1.0 / q) / q.sqrt()
    }

    /// `ξ = iX/(√2β)` sampled on the grid.
    pub fn xi(&self) -> LatticeFn {
        let k = c(0.0, self.x_scale()) / (std::f64::consts::SQRT_2 * self.params.beta);
        LatticeFn::from_fn(self.rep.grid(), |x| k * x)
    }

    /// `a†ξ − q⁻²ξa† + q^{−3/2}/√2` on interior rows.
    pub fn xi_commutator_residual(&self) -> f64 {
        let q = self.q();
        let xi = self.xi();
        let n = self.a.nrows();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(xi.values()));
        let r = &self.a_dag * &d - scaled(&(&d * &self.a_dag), c(q.powi(-2), 0.0))
            + DMatrix::identity(n, n).map(|v: Complex64| v * (q.powf(-1.5) / std::f64::consts::SQRT_2));
        rows_max(&r, &self.interior_rows())
    }

    /// `aψ` with validity tracking.
    pub fn apply_a(&self, psi: &LatticeFn) -> LatticeFn {
        let m = self.params.m_index as i32;
        let (al, be) = (self.params.alpha, self.params.beta);
        let i = c(0.0, 1.0);
        if m == 1 {
            &psi.shift(-2).scale(al) - &psi.shift(-1).nabla().scale(i * be)
        } else {
            &psi.shift(-2 * m).scale(al) - &psi.shift(1).nabla().shift(-m - 1).scale(i * be)
        }
    }

    /// `a†ψ` with validity tracking.
    pub fn apply_a_dag(&self, psi: &LatticeFn) -> LatticeFn {
        let q = self.q();
        let m = self.params.m_index as i32;
        let (al, be) = (self.params.alpha, self.params.beta);
        let i = c(0.0, 1.0);
        if m == 1 {
            &psi.shift(2).scale(al.conj() * q.powi(-2)) - &psi.shift(1).nabla().scale(i * be.conj())
        } else {
            &psi.shift(2 * m).scale(al.conj() * q.powi(-2 * m))
                - &psi.shift(m + 1).shift(-1).nabla().scale(i * be.conj() * q.powi(-m - 1))
        }
    }

    /// Solves `αL⁻²ψ₀ = iβ∇L⁻¹ψ₀`, i.e. `ψ₀(q²x) = ψ₀(x)/(1 + i(α/β)λx)`, upward
    /// along each sublattice chain, seeded with `e_{q⁻²}(−iλαx/(q²β))` at its
    /// smallest site; normalized in the window.
    pub fn ground_state(&self) -> Result<LatticeFn, OscillatorError> {
        if self.params.m_index != 1 {
            return Err(OscillatorError::UnsupportedIndex(self.params.m_index));
        }
        let grid = self.rep.grid();
        let q = grid.q();
        let lam = grid.lambda();
        let special = QSpecial::new(q)?;
        let ratio = self.params.alpha / self.params.beta;
        let coeff = self.exp_argument_scale();
        let mut psi = LatticeFn::zeros(grid);
        for &s in grid.sectors() {
            for start in [grid.n_min(), grid.n_min() + 1] {
                let mut v = special.q_exp_product(coeff * grid.x(s, start));
                let mut peak: f64 = 0.0;
                let mut n = start;
                while n <= grid.n_max() {
                    psi.set(s, n, v);
                    peak = peak.max(v.norm());
                    v /= c(1.0, 0.0) + c(0.0, 1.0) * ratio * lam * grid.x(s, n);
                    n += 2;
                }
                let last = psi.value(s, n - 2).unwrap_or_default().norm();
                if last > 1e-3 * peak {
                    return Err(OscillatorError::NoDecay { n: start });
                }
            }
        }
        let w = jackson_weights(grid);
        let norm: f64 = psi.values().iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt();
        Ok(psi.scale(c(1.0 / norm, 0.0)))
    }

    /// `−iλα/(q²β)`, the factor of `x` in the ground-state exponential.
    pub fn exp_argument_scale(&self) -> Complex64 {
        let q = self.q();
        c(0.0, -(q - 1.0 / q) / (q * q)) * self.params.alpha / self.params.beta
    }

    /// `max|aψ₀| / max|ψ₀|` over valid sites.
    pub fn annihilation_residual(&self, psi0: &LatticeFn) -> f64 {
        self.apply_a(psi0).max_abs() / psi0.max_abs()
    }

    /// Spread of `ψ₀ / e_{q⁻²}(−iλαx/(q²β))` over the sites inside the series radius.
    pub fn exponential_form_deviation(&self, psi0: &LatticeFn) -> Result<f64, OscillatorError> {
        let special = QSpecial::new(self.q())?;
        let k = self.exp_argument_scale();
        let mut ratios = Vec::new();
        for (s, n, v) in psi0.valid_sites() {
            if let Ok(e) = special.q_exp(k * psi0.grid().x(s, n)) {
                ratios.push(v / e);
            }
        }
        let Some(&first) = ratios.first() else {
            return Err(OscillatorError::BoundaryContamination { level: 0 });
        };
        Ok(ratios.iter().map(|r| (r / first - 1.0).norm()).fold(0.0, f64::max))
    }

    /// `a†ψ₀ − (i/(q^{1/2}β))Xψ₀`, relative.
    pub fn creation_residual(&self, psi0: &LatticeFn) -> f64 {
        let k = c(0.0, 1.0) / (self.q().sqrt() * self.params.beta) * self.x_scale();
        let want = psi0.map_sites(|s, n, v| k * psi0.grid().x(s, n) * v);
        (&self.apply_a_dag(psi0) - &want).max_abs() / want.max_abs()
    }

    /// `(a†)ⁿψ₀` for `n = 0..=n_max`.
    pub fn excited_states(&self, n_max: usize) -> Result<Vec<LatticeFn>, OscillatorError> {
        let mut out = vec![self.ground_state()?];
        for level in 1..=n_max {
            let next = self.apply_a_dag(&out[level - 1]);
            if next.valid_sites().count() < 3 {
                return Err(OscillatorError::BoundaryContamination { level });
            }
            out.push(next);
        }
        Ok(out)
    }

    /// Relative deviation of `(a†)ⁿψ₀` from `(1/√2)ⁿHₙ(ξ)ψ₀` over valid sites.
    pub fn hermite_residuals(&self, n_max: usize) -> Result<Vec<f64>, OscillatorError> {
        let states = self.excited_states(n_max)?;
        let s = Complex64::new(self.q().sqrt(), 0.0);
        let table = QHermite::table(&s, &s.inv(), &c(self.q(), 0.0), n_max);
        let xi = self.xi();
        let psi0 = &states[0];
        Ok(states
            .iter()
            .enumerate()
            .map(|(n, st)| {
                let k = std::f64::consts::FRAC_1_SQRT_2.powi(n as i32);
                let want = xi.zip_with(psi0, |x, p| table.eval(n, x) * p * k);
                let mut num: f64 = 0.0;
                let mut den: f64 = 0.0;
                for (sec, site, v) in st.valid_sites() {
                    let w = want.value(sec, site).unwrap_or_default();
                    num = num.max((v - w).norm());
                    den = den.max(w.norm());
                }
                num / den
            })
            .collect())
    }

    /// `⟨ψₙ|a†a|ψₙ⟩/⟨ψₙ|ψₙ⟩` over sites where `a†aψₙ` is valid.
    pub fn levels(&self, count: usize) -> Result<Vec<f64>, OscillatorError> {
        let states = self.excited_states(count.saturating_sub(1))?;
        let w = jackson_weights(self.rep.grid());
        let grid = self.rep.grid();
        Ok(states
            .iter()
            .map(|st| {
                let h = self.apply_a_dag(&self.apply_a(st));
                let (mut num, mut den) = (c(0.0, 0.0), 0.0);
                for (s, n, hv) in h.valid_sites() {
                    let v = st.value(s, n).unwrap_or_default();
                    let wi = w[grid.index(s, n).unwrap()];
                    num += v.conj() * hv * wi;
                    den += v.norm_sqr() * wi;
                }
                num.re / den
            })
            .collect())
    }
}

/// `Hₙ^{(q)}(ξ)` as coefficient lists in `ξ`, from
/// `H_{n+1} = q^{−1/2}q^{−2n}2ξHₙ − 2q^{−n−1}[n]H_{n−1}`, `H₀ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QHermite<C> {
    coeffs: Vec<Vec<C>>,
    s: C,
    s_inv: C,
    q: C,
}

impl<C: Ring> QHermite<C> {
    /// `s = q^{1/2}`, `s_inv = q^{−1/2}`, `q = s²`.
    pub fn table(s: &C, s_inv: &C, q: &C, n_max: usize) -> Self {
        let mut out = QHermite { coeffs: vec![vec![C::one()]], s: s.clone(), s_inv: s_inv.clone(), q: q.clone() };
        while out.coeffs.len() <= n_max {
            let n = out.coeffs.len() - 1;
            let next = out.step(n);
            out.coeffs.push(next);
        }
        out
    }

    fn q_pow(&self, k: i32) -> C {
        let q_inv = self.s_inv.clone() * self.s_inv.clone();
        if k >= 0 {
            self.q.powu(k as u32)
        } else {
            q_inv.powu((-k) as u32)
        }
    }

    /// `[n] = Σ_{k<n} q^{n−1−2k}`.
    fn q_number(&self, n: usize) -> C {
        (0..n).fold(C::zero(), |acc, k| acc + self.q_pow(n as i32 - 1 - 2 * k as i32))
    }

    /// `q^{−1/2}q^{−2n}2ξHₙ − 2q^{−n−1}[n]H_{n−1}`.
    fn step(&self, n: usize) -> Vec<C> {
        let two = C::from_int(2);
        let lead = self.s_inv.clone() * self.q_pow(-2 * n as i32) * two.clone();
        let tail = two * self.q_pow(-(n as i32) - 1) * self.q_number(n);
        let hn = &self.coeffs[n];
        let mut next = vec![C::zero(); hn.len() + 1];
        for (k, h) in hn.iter().enumerate() {
            next[k + 1] = next[k + 1].clone() + lead.clone() * h.clone();
        }
        if n >= 1 {
            for (k, h) in self.coeffs[n - 1].iter().enumerate() {
                next[k] = next[k].clone() - tail.clone() * h.clone();
            }
        }
        next
    }

    pub fn coefficients(&self, n: usize) -> &[C] {
        &self.coeffs[n]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients of `H_{n+1} − q^{−1/2}q^{−2n}2ξHₙ + 2q^{−n−1}[n]H_{n−1}`.
    pub fn recursion_residual(&self, n: usize) -> Vec<C> {
        let want = self.step(n);
        self.coeffs[n + 1].iter().zip(&want).map(|(a, b)| a.clone() - b.clone()).collect()
    }

    pub fn s(&self) -> &C {
        &self.s
    }
}

impl QHermite<Complex64> {
    pub fn eval(&self, n: usize, xi: Complex64) -> Complex64 {
        self.coeffs[n].iter().rev().fold(c(0.0, 0.0), |acc, k| acc * xi + k)
    }
}

/// Result of comparing the transformed lattice Gaussian with the exponential form.
#[derive(Clone, Debug)]
pub struct PairReport {
    pub even_deviation: f64,
    pub odd_deviation: f64,
    pub constants: GaussConstants,
}

pub struct GaussianPair {
    special: QSpecial,
    c0: f64,
    l_min: i32,
    l_max: i32,
}

impl GaussianPair {
    pub const EDGE_TOL: f64 = 1e-14;

    /// Sums run over `l` in `[l_min, l_max]`; the Gaussian must have decayed there.
    pub fn new(q: f64, c0: f64, l_min: i32, l_max: i32) -> Result<Self, OscillatorError> {
        let special = QSpecial::new(q)?;
        let edge = [2 * l_min, 2 * l_max + 1]
            .iter()
            .map(|&l| special.lattice_gaussian(l, c0).abs())
            .fold(0.0, f64::max);
        if edge > Self::EDGE_TOL * c0.abs() {
            return Err(OscillatorError::WindowTooSmall { edge, tol: Self::EDGE_TOL });
        }
        Ok(GaussianPair { special, c0, l_min, l_max })
    }

    fn f(&self, l: i32) -> f64 {
        self.special.lattice_gaussian(l, self.c0)
    }

    fn trig(&self, kind: Trig, j: i32) -> f64 {
        self.special.on_even_lattice(kind, j)
    }

    /// `g(τq^{2ν}) = (N_q/√2)Σ_l q^{ν+l}(f(q^{2l})cos_q(q^{2(ν+l)}) + iτf(q^{2l+1})sin_q(q^{2(ν+l)}))`.
    pub fn even(&self, nu: i32, tau: f64) -> Complex64 {
        let q = self.special.q();
        let sum: Complex64 = (self.l_min..=self.l_max)
            .map(|l| {
                let j = nu + l;
                q.powi(j) * c(self.f(2 * l) * self.trig(Trig::Cos, j), tau * self.f(2 * l + 1) * self.trig(Trig::Sin, j))
            })
            .sum();
        sum * (self.special.n_q() / std::f64::consts::SQRT_2)
    }

    /// `g(τq^{2ν+1}) = (N_q/√2)Σ_l q^{ν+l}(f(q^{2l+1})q cos_q(q^{2(ν+l+1)}) + iτf(q^{2l})sin_q(q^{2(ν+l)}))`.
    pub fn odd(&self, nu: i32, tau: f64) -> Complex64 {
        let q = self.special.q();
        let sum: Complex64 = (self.l_min..=self.l_max)
            .map(|l| {
                let j = nu + l;
                q.powi(j) * c(self.f(2 * l + 1) * q * self.trig(Trig::Cos, j + 1), tau * self.f(2 * l) * self.trig(Trig::Sin, j))
            })
            .sum();
        sum * (self.special.n_q() / std::f64::consts::SQRT_2)
    }

    /// `(N_q/√2)c̃₀q^ν e_{q⁻²}(iτq^{2ν−1})`.
    pub fn even_closed(&self, nu: i32, tau: f64, constants: &GaussConstants) -> Result<Complex64, OscillatorError> {
        let q = self.special.q();
        let e = self.special.q_exp(c(0.0, tau * q.powi(2 * nu - 1)))?;
        Ok(e * (self.special.n_q() / std::f64::consts::SQRT_2 * constants.tilde_c0_product * q.powi(nu)))
    }

    /// `(N_q/√2)c₀′q^ν e_{q⁻²}(iτq^{2ν})`.
    pub fn odd_closed(&self, nu: i32, tau: f64, constants: &GaussConstants) -> Result<Complex64, OscillatorError> {
        let q = self.special.q();
        let e = self.special.q_exp(c(0.0, tau * q.powi(2 * nu)))?;
        Ok(e * (self.special.n_q() / std::f64::consts::SQRT_2 * constants.c0_prime_product * q.powi(nu)))
    }

    /// Max relative deviation over `ν` in `[nu_min, 0]` (even) and `[nu_min, −1]` (odd),
    /// where the exponential series converges.
    pub fn compare(&self, nu_min: i32, tau: f64) -> Result<PairReport, OscillatorError> {
        let constants = self.special.gauss_sum_constants(self.c0);
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
        let mut even_deviation: f64 = 0.0;
        for nu in nu_min..=0 {
            even_deviation = even_deviation.max(rel(self.even(nu, tau), self.even_closed(nu, tau, &constants)?));
        }
        let mut odd_deviation: f64 = 0.0;
        for nu in nu_min..=-1 {
            odd_deviation = odd_deviation.max(rel(self.odd(nu, tau), self.odd_closed(nu, tau, &constants)?));
        }
        Ok(PairReport { even_deviation, odd_deviation, constants })
    }
}

/// Largest gap between `−iλ(α/β)q^{−2}·X(ν, τ)` with `X = −τq^νq^{−1/2}/λ`
/// and the exponential arguments `iτq^{−1}q^ν` used by the Fourier pair.
pub fn xi_consistency(q: f64, nus: std::ops::RangeInclusive<i32>) -> f64 {
    let lam = q - 1.0 / q;
    let ratio = q.powf(1.5);
    let mut worst: f64 = 0.0;
    for nu in nus {
        for tau in [1.0, -1.0] {
            let x = -tau * q.powi(nu) / q.sqrt() / lam;
            let arg = c(0.0, -lam * ratio / (q * q)) * x;
            let want = c(0.0, tau * q.powi(nu - 1));
            worst = worst.max((arg - want).norm() / want.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Sector;
    use crate::scalar::Scalar;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair() -> LadderPair {
        let g = LatticeGrid::new(2.0, -8, 10, &[Sector::Plus]).unwrap();
        LadderPair::build(&g, LadderParams::normalized(2.0)).unwrap()
    }

    #[test]
    fn normalized_commutator_is_identity() {
        let p = pair();
        assert!((p.commutator_constant() - 1.0).abs() < 1e-14);
        assert!(p.commutator_residual() < 1e-10, "{}", p.commutator_residual());
        assert!(p.hamiltonian_residual() < 1e-12, "{}", p.hamiltonian_residual());
        assert!(p.xi_commutator_residual() < 1e-12, "{}", p.xi_commutator_residual());
    }

    #[test]
    fn generalized_family() {
        let g = LatticeGrid::new(2.0, -8, 10, &[Sector::Plus]).unwrap();
        for m in 2..=3 {
            let params = LadderParams { alpha: c(1.3, 0.4), beta: c(0.7, -0.2), m_index: m };
            let p = LadderPair::build(&g, params).unwrap();
            let qm = 2f64.powi(-2 * m as i32);
            assert!((p.commutator_constant() - qm * (1.0 - qm) * params.alpha.norm_sqr()).abs() < 1e-15);
            assert!(p.commutator_residual() < 1e-10, "m = {m}: {}", p.commutator_residual());
        }
    }

    #[test]
    fn ground_state() {
        let p = pair();
        let psi0 = p.ground_state().unwrap();
        assert!(p.annihilation_residual(&psi0) < 1e-8);
        assert!(p.exponential_form_deviation(&psi0).unwrap() < 1e-8);
        assert!(p.creation_residual(&psi0) < 1e-10);
        let g3 = LatticeGrid::new(3.0, -8, 10, &[Sector::Plus]).unwrap();
        let p3 = LadderPair::build(&g3, LadderParams::normalized(3.0)).unwrap();
        assert!(p3.creation_residual(&p3.ground_state().unwrap()) < 1e-10);
    }

    #[test]
    fn hermite_states_and_levels() {
        let p = pair();
        for (n, r) in p.hermite_residuals(6).unwrap().into_iter().enumerate() {
            assert!(r < 1e-6, "n = {n}: {r}");
        }
        let e = p.levels(4).unwrap();
        assert!(e[0].abs() < 1e-8);
        for w in e.windows(2) {
            assert!((w[1] - (w[0] / 4.0 + 1.0)).abs() < 1e-6, "{e:?}");
        }
    }

    #[test]
    fn positivity() {
        let p = pair();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = p.representation().interior_rows(3);
        let h = &p.a_dag * &p.a;
        let w = p.representation().weights();
        for _ in 0..20 {
            let mut v = nalgebra::DVector::zeros(h.nrows());
            for &r in &rows {
                v[r] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let hv = &h * &v;
            let e: Complex64 = (0..v.len()).map(|i| v[i].conj() * hv[i] * w[i]).sum();
            assert!(e.re >= -1e-10);
        }
    }

    #[test]
    fn hermite_table_exact() {
        let s = Scalar::s_pow(1);
        let table = QHermite::table(&s, &Scalar::s_pow(-1), &Scalar::s_pow(2), 11);
        for n in 0..=10 {
            assert!(table.recursion_residual(n).iter().all(|c| c.is_zero()));
        }
        let h1 = table.coefficients(1);
        assert_eq!(h1[1], Scalar::from_int(2) * Scalar::s_pow(-1));
        let h2 = table.coefficients(2);
        assert_eq!(h2[2], Scalar::from_int(4) * Scalar::s_pow(-6));
        assert_eq!(h2[0], Scalar::from_int(-2) * Scalar::s_pow(-4));
        assert!(h2[1].is_zero());
    }

    #[test]
    fn gaussian_fourier_pair() {
        let g = GaussianPair::new(2.0, 1.0, -12, 12).unwrap();
        let r = g.compare(-6, 1.0).unwrap();
        assert!(r.even_deviation < 1e-8 && r.odd_deviation < 1e-8, "{r:?}");
        let k = r.constants;
        assert!((k.tilde_c0_direct - k.tilde_c0_product).abs() < 1e-12);
        assert!((k.c0_prime_direct - k.c0_prime_product).abs() < 1e-12);
        for nu in -3..=0 {
            let (a, b) = (g.even(nu, 1.0), g.even(nu, -1.0));
            assert!((a - b.conj()).norm() < 1e-14 * a.norm());
        }
        assert!(matches!(GaussianPair::new(2.0, 1.0, -3, 3), Err(OscillatorError::WindowTooSmall { .. })));
        assert!(xi_consistency(2.0, -6..=6) < 1e-15);
    }
}
