//! Truncated matrix representation and the lattice Schrödinger equation.
//!
//! `x`, `Λ`, `p` act on kets `|n,σ⟩`. `∇` and `L` act on sampled function
//! values. The two pictures are related by the Jackson weights: a function
//! `ψ` corresponds to the ket coefficients `W^{1/2}ψ`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::jackson::{improper_integral, jackson_weights, IntegralError};
use crate::lattice::{LatticeError, LatticeFn, LatticeGrid, Sector};
use crate::special::{nabla2_eigenvalue, Basis, IndexParity, QSpecial, SpecialError, Trig};

#[derive(Debug, Error)]
pub enum SchrodingerError {
    #[error("grid has {sites} sites per sector, need at least {needed}")]
    GridTooSmall { sites: usize, needed: usize },
    #[error("hamiltonian is not hermitian after boundary closure (asymmetry {asymmetry:e})")]
    NonHermitianHamiltonian { asymmetry: f64 },
    #[error("state needs at least two sites of padding on each side")]
    InsufficientPadding,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus over the given rows.
pub fn rows_max(m: &DMatrix<Complex64>, rows: &[usize]) -> f64 {
    rows.iter()
        .flat_map(|&r| m.row(r).iter().map(|v| v.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

pub struct Representation {
    grid: LatticeGrid,
    weights: Vec<f64>,
    pub x: DMatrix<Complex64>,
    pub lam: DMatrix<Complex64>,
    pub lam_inv: DMatrix<Complex64>,
    pub p: DMatrix<Complex64>,
    pub nabla: DMatrix<Complex64>,
    pub l: DMatrix<Complex64>,
    pub l_inv: DMatrix<Complex64>,
}

impl Representation {
    pub const MIN_SITES: usize = 8;

    pub fn build(grid: &LatticeGrid) -> Result<Self, SchrodingerError> {
        let sites = grid.sites_per_sector();
        if sites < Self::MIN_SITES {
            return Err(SchrodingerError::GridTooSmall { sites, needed: Self::MIN_SITES });
        }
        let dim = grid.len();
        let q = grid.q();
        let lam = grid.lambda();
        let mut x = DMatrix::zeros(dim, dim);
        let mut p = DMatrix::zeros(dim, dim);
        let mut nabla = DMatrix::zeros(dim, dim);
        for (col, (s, n)) in grid.sites().enumerate() {
            let sigma = s.sign();
            x[(col, col)] = c(grid.x(s, n), 0.0);
            if let Some(r) = grid.index(s, n + 1) {
                p[(r, col)] = c(0.0, sigma * q.powf(-n as f64 - 0.5) / lam);
                nabla[(col, r)] = c(1.0 / (lam * grid.x(s, n)), 0.0);
            }
            if let Some(r) = grid.index(s, n - 1) {
                p[(r, col)] = c(0.0, -sigma * q.powf(-n as f64 + 0.5) / lam);
                nabla[(col, r)] = c(-1.0 / (lam * grid.x(s, n)), 0.0);
            }
        }
        let l = shift_matrix(grid, 1);
        let l_inv = shift_matrix(grid, -1);
        Ok(Representation {
            grid: grid.clone(),
            weights: jackson_weights(grid),
            x,
            lam: l.clone(),
            lam_inv: l_inv.clone(),
            p,
            nabla,
            l,
            l_inv,
        })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row indices at least `margin` sites away from both window ends.
    pub fn interior_rows(&self, margin: i32) -> Vec<usize> {
        let g = &self.grid;
        g.sites()
            .enumerate()
            .filter(|(_, (_, n))| *n >= g.n_min() + margin && *n <= g.n_max() - margin)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn apply(&self, m: &DMatrix<Complex64>, psi: &LatticeFn) -> LatticeFn {
        let v = DVector::from_column_slice(psi.values());
        let out = m * v;
        LatticeFn::from_sites(&self.grid, |s, n| out[self.grid.index(s, n).unwrap()])
    }

    /// `q^{1/2}xp − q^{−1/2}px − iΛ`, maximal entry.
    pub fn algebra_residual(&self) -> f64 {
        let s = self.grid.q().sqrt();
        let r = (&self.x * &self.p).scale(s) - (&self.p * &self.x).scale(1.0 / s) - self.lam.map(|v| v * c(0.0, 1.0));
        rows_max(&r, &(0..self.grid.len()).collect::<Vec<_>>())
    }

    /// `W^{1/2}(−i∇)W^{−1/2} − p` on interior rows.
    pub fn momentum_residual(&self) -> f64 {
        let conj = self.to_ket_picture(&self.nabla.map(|v| v * c(0.0, -1.0)));
        rows_max(&(conj - &self.p), &self.interior_rows(1))
    }

    /// `A ↦ W^{1/2} A W^{−1/2}`.
    pub fn to_ket_picture(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let w = &self.weights;
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (w[i] / w[j]).sqrt())
    }

    /// Adjoint with respect to the Jackson scalar product, `W⁻¹A†W`.
    pub fn adjoint(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let w = &self.weights;
        DMatrix::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj() * w[j] / w[i])
    }

    /// `(∇L⁻¹)⁺ + ∇L` on interior rows.
    pub fn adjoint_residual(&self) -> f64 {
        let a = &self.nabla * &self.l_inv;
        let b = &self.nabla * &self.l;
        rows_max(&(self.adjoint(&a) + b), &self.interior_rows(2))
    }
}

/// `(Lᵏf)(n) = f(n − k)` as a matrix.
fn shift_matrix(grid: &LatticeGrid, k: i32) -> DMatrix<Complex64> {
    let dim = grid.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (row, (s, n)) in grid.sites().enumerate() {
        if let Some(col) = grid.index(s, n - k) {
            m[(row, col)] = c(1.0, 0.0);
        }
    }
    m
}

/// How `∇²` reads the missing neighbour below the smallest site of each
/// sublattice. The large-`x` end is always truncated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// the neighbour is zero
    Dirichlet,
    /// extrapolates `ψ` as a series in `x²`, matching the `𝓒` functions
    #[default]
    EvenSeries,
    /// extrapolates `ψ` as `x` times a series in `x²`, matching the `𝓢` functions
    OddSeries,
}

impl Closure {
    /// Ghost value below the edge as `(a, b)` with `ψ_ghost = aψ₀ + bψ₁`.
    fn ghost(self, q: f64) -> (f64, f64) {
        let q4 = q.powi(-4);
        match self {
            Closure::Dirichlet => (0.0, 0.0),
            Closure::EvenSeries => (1.0 + q4, -q4),
            Closure::OddSeries => (q.powi(-2) + q.powi(-6), -q.powi(-8)),
        }
    }
}

pub struct Hamiltonian {
    grid: LatticeGrid,
    mass: f64,
    closure: Closure,
    weights: Vec<f64>,
    matrix: DMatrix<f64>,
    blocks: Vec<Block>,
}

/// One sector and one parity of `n`; `∇²` never couples different blocks.
struct Block {
    indices: Vec<usize>,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl Hamiltonian {
    pub fn free(grid: &LatticeGrid, mass: f64, closure: Closure) -> Result<Self, SchrodingerError> {
        Self::new(grid, mass, closure, &vec![0.0; grid.len()])
    }

    /// `−(1/2m)∇² + V` with `V` given per flat site index.
    pub fn new(grid: &LatticeGrid, mass: f64, closure: Closure, potential: &[f64]) -> Result<Self, SchrodingerError> {
        let sites = grid.sites_per_sector();
        if sites < Representation::MIN_SITES {
            return Err(SchrodingerError::GridTooSmall { sites, needed: Representation::MIN_SITES });
        }
        let q = grid.q();
        let lam = grid.lambda();
        let dim = grid.len();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let k = -0.5 / mass;
        let (ga, gb) = closure.ghost(q);
        for (row, (s, n)) in grid.sites().enumerate() {
            let cn = 1.0 / (lam * grid.x(s, n)).powi(2);
            h[(row, row)] = -k * cn * (q + 1.0 / q) + potential[row];
            if let Some(up) = grid.index(s, n + 2) {
                h[(row, up)] += k * cn / q;
            }
            match grid.index(s, n - 2) {
                Some(down) => h[(row, down)] += k * cn * q,
                None => {
                    h[(row, row)] += k * cn * q * ga;
                    if let Some(up) = grid.index(s, n + 2) {
                        h[(row, up)] += k * cn * q * gb;
                    }
                }
            }
        }
        let mut weights = jackson_weights(grid);
        if closure != Closure::Dirichlet {
            for (row, (s, n)) in grid.sites().enumerate() {
                if grid.index(s, n - 2).is_none() {
                    if let Some(up) = grid.index(s, n + 2) {
                        let w = weights[up] * h[(up, row)] / h[(row, up)];
                        if !(w.is_finite() && w > 0.0) {
                            return Err(SchrodingerError::NonHermitianHamiltonian { asymmetry: f64::INFINITY });
                        }
                        weights[row] = w;
                    }
                }
            }
        }
        let hs = DMatrix::from_fn(dim, dim, |i, j| h[(i, j)] * (weights[i] / weights[j]).sqrt());
        let scale = hs.amax().max(f64::MIN_POSITIVE);
        let asymmetry = (&hs - hs.transpose()).amax() / scale;
        if asymmetry > 1e-10 {
            return Err(SchrodingerError::NonHermitianHamiltonian { asymmetry });
        }
        let matrix = (&hs + hs.transpose()) * 0.5;
        let mut blocks = Vec::new();
        for &sector in grid.sectors() {
            for parity in 0..2 {
                let indices: Vec<usize> = grid
                    .sites()
                    .enumerate()
                    .filter(|(_, (s, n))| *s == sector && n.rem_euclid(2) == parity)
                    .map(|(i, _)| i)
                    .collect();
                let sub = DMatrix::from_fn(indices.len(), indices.len(), |i, j| matrix[(indices[i], indices[j])]);
                blocks.push(Block { indices, eigen: SymmetricEigen::new(sub) });
            }
        }
        Ok(Hamiltonian { grid: grid.clone(), mass, closure, weights, matrix, blocks })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    /// Weights of the scalar product in which the matrix is symmetric.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The symmetric matrix acting on `W^{1/2}ψ`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.blocks.iter().flat_map(|b| b.eigen.eigenvalues.iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn to_hilbert(&self, psi: &LatticeFn) -> DVector<Complex64> {
        DVector::from_iterator(
            self.grid.len(),
            psi.grid().sites().map(|(s, n)| psi.value(s, n).unwrap_or_default()).zip(&self.weights).map(|(v, w)| v * w.sqrt()),
        )
    }

    fn from_hilbert(&self, u: &DVector<Complex64>) -> LatticeFn {
        LatticeFn::from_sites(&self.grid, |s, n| {
            let i = self.grid.index(s, n).unwrap();
            u[i] / self.weights[i].sqrt()
        })
    }

    pub fn apply(&self, psi: &LatticeFn) -> LatticeFn {
        let u = self.to_hilbert(psi);
        self.from_hilbert(&(self.matrix.map(|v| c(v, 0.0)) * u))
    }

    /// `e^{−iHt}ψ` by spectral decomposition.
    pub fn propagate(&self, psi: &LatticeFn, t: f64) -> LatticeFn {
        if t == 0.0 {
            return psi.clone();
        }
        let u = self.to_hilbert(psi);
        let mut out = DVector::zeros(u.len());
        for b in &self.blocks {
            let sub = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| u[i]));
            let v = b.eigen.eigenvectors.map(|x| c(x, 0.0));
            let coeffs = v.adjoint() * sub;
            let phased = DVector::from_iterator(
                coeffs.len(),
                coeffs.iter().zip(b.eigen.eigenvalues.iter()).map(|(a, &e)| a * c(0.0, -e * t).exp()),
            );
            for (&i, val) in b.indices.iter().zip((v * phased).iter()) {
                out[i] = *val;
            }
        }
        self.from_hilbert(&out)
    }

    pub fn norm_sq(&self, psi: &LatticeFn) -> f64 {
        self.to_hilbert(psi).norm_squared()
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn energy(&self, psi: &LatticeFn) -> f64 {
        let u = self.to_hilbert(psi);
        let hu = self.matrix.map(|v| c(v, 0.0)) * &u;
        u.dotc(&hu).re
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub rho: LatticeFn,
    pub current: LatticeFn,
}

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub psi: LatticeFn,
    pub time: f64,
    pub history: Vec<Snapshot>,
}

impl EvolutionState {
    pub fn new(psi: LatticeFn) -> Self {
        EvolutionState { psi, time: 0.0, history: Vec::new() }
    }

    /// Rows `t,sigma,n,rho,j` over valid sites of each snapshot.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SchrodingerError> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| SchrodingerError::Lattice(LatticeError::Csv(e));
        wr.write_record(["t", "sigma", "n", "rho", "j"]).map_err(err)?;
        for snap in &self.history {
            for (s, n, rho) in snap.rho.valid_sites() {
                let j = snap.current.value(s, n).map(|v| v.re.to_string()).unwrap_or_default();
                wr.write_record([snap.time.to_string(), (s.sign() as i32).to_string(), n.to_string(), rho.re.to_string(), j])
                    .map_err(err)?;
            }
        }
        wr.flush().map_err(|e| err(e.into()))?;
        Ok(())
    }
}

/// Advances `steps` times by `dt`, recording `(ρ, j)` after each step.
pub fn evolve(mut state: EvolutionState, h: &Hamiltonian, dt: f64, steps: usize) -> Result<EvolutionState, SchrodingerError> {
    for _ in 0..steps {
        state.psi = h.propagate(&state.psi, dt);
        state.time += dt;
        let (rho, current) = density_current(&state.psi, h.mass())?;
        state.history.push(Snapshot { time: state.time, rho, current });
    }
    Ok(state)
}

/// `ρ = ψ*ψ` and `j = (1/2mi) L⁻¹{ψ*(L∇ψ) − (L∇ψ*)ψ}`.
pub fn density_current(psi: &LatticeFn, mass: f64) -> Result<(LatticeFn, LatticeFn), SchrodingerError> {
    if psi.grid().sites_per_sector() < 5 {
        return Err(SchrodingerError::InsufficientPadding);
    }
    let rho = psi.map(|v| c(v.norm_sqr(), 0.0));
    let conj = psi.conj();
    let bracket = &(&conj * &psi.nabla().shift(1)) - &(&conj.nabla().shift(1) * psi);
    let j = bracket.shift(-1).scale(c(0.0, -0.5 / mass));
    Ok((rho, j))
}

/// Interior max-norm of `(ρ(t+dt) − ρ(t−dt))/2dt + ∇j(t)`.
pub fn continuity_residual(h: &Hamiltonian, psi: &LatticeFn, t: f64, dt: f64, margin: i32) -> Result<f64, SchrodingerError> {
    let (rho_plus, _) = density_current(&h.propagate(psi, t + dt), h.mass())?;
    let (rho_minus, _) = density_current(&h.propagate(psi, t - dt), h.mass())?;
    let (_, j) = density_current(&h.propagate(psi, t), h.mass())?;
    let drho = (&rho_plus - &rho_minus).scale(c(0.5 / dt, 0.0));
    Ok((&drho + &j.nabla()).interior(margin).max_abs())
}

#[derive(Clone, Copy, Debug)]
pub struct NoetherReport {
    /// max deviation of the Noether current from `−αj`
    pub current: f64,
    /// max deviation of the charge density from `−αψ*ψ`
    pub charge: f64,
}

/// Phase-symmetry Noether current for the first-order action, built from
/// `∂𝓛/∂(∇L⁻¹ψ) = −(2mq)⁻¹∇L⁻¹ψ*`, against the probability current.
pub fn check_noether(psi: &LatticeFn, mass: f64, alpha: f64) -> Result<NoetherReport, SchrodingerError> {
    let q = psi.grid().q();
    let (rho, j) = density_current(psi, mass)?;
    let delta = psi.scale(c(0.0, alpha));
    let delta_conj = psi.conj().scale(c(0.0, -alpha));
    let k = c(-1.0 / (2.0 * mass * q), 0.0);
    let dl_dgrad = psi.conj().shift(-1).nabla().scale(k);
    let dl_dgrad_conj = psi.shift(-1).nabla().scale(k);
    let noether = &(&dl_dgrad.shift(1) * &delta.shift(-1)) + &(&dl_dgrad_conj.shift(1) * &delta_conj.shift(-1));
    let current = (&noether + &j.scale(c(alpha, 0.0))).max_abs();
    // ∂𝓛/∂ψ̇ = iψ*
    let charge_density = &psi.conj().scale(c(0.0, 1.0)) * &delta;
    let charge = (&charge_density + &rho.scale(c(alpha, 0.0))).max_abs();
    Ok(NoetherReport { current, charge })
}

/// `∫ψ*∇²ψ + q⁻¹∫(∇L⁻¹ψ*)(∇L⁻¹ψ)`, zero for compactly supported `ψ`.
pub fn energy_form_residual(psi: &LatticeFn) -> Result<Complex64, SchrodingerError> {
    let q = psi.grid().q();
    let lap = psi.nabla().nabla();
    let lhs = improper_integral(&(&psi.conj() * &lap))?;
    let d = psi.shift(-1).nabla();
    let rhs = improper_integral(&(&d.conj() * &d))?;
    Ok(lhs + rhs / q)
}

#[derive(Clone, Debug)]
pub struct StationaryState {
    pub basis: Basis,
    pub label: i32,
    pub sector: Sector,
    pub energy: f64,
    pub psi: LatticeFn,
}

/// `N_q (2/λ)^{1/2} q^{ℓ/2}`; for `ℓ = 2n+1` this is `N_q(2q/λ)^{1/2}qⁿ`.
pub fn basis_normalization(special: &QSpecial, label: i32) -> f64 {
    special.n_q() * (2.0 / special.lambda()).sqrt() * special.q().powf(label as f64 / 2.0)
}

/// `cos_q(xq^ℓ)` or `sin_q(xq^ℓ)` on the sites of `sector` where the
/// argument is an even power of `q`, zero elsewhere.
pub fn basis_function(grid: &LatticeGrid, special: &QSpecial, basis: Basis, label: i32, sector: Sector) -> LatticeFn {
    let kind = match basis {
        Basis::C => Trig::Cos,
        Basis::S => Trig::Sin,
    };
    LatticeFn::from_sites(grid, |s, n| {
        if s != sector || (n + label).rem_euclid(2) != 0 {
            return c(0.0, 0.0);
        }
        let v = special.on_even_lattice(kind, (n + label) / 2);
        let odd = basis == Basis::S && s == Sector::Minus;
        c(if odd { -v } else { v }, 0.0)
    })
}

/// Normalized eigenfunctions of the free Hamiltonian with labels in `labels`.
pub fn stationary_states(
    grid: &LatticeGrid,
    mass: f64,
    basis: Basis,
    sector: Sector,
    labels: std::ops::RangeInclusive<i32>,
) -> Result<Vec<StationaryState>, SchrodingerError> {
    let special = QSpecial::new(grid.q())?;
    Ok(labels
        .map(|label| {
            let (parity, n) = if label.rem_euclid(2) == 0 {
                (IndexParity::Even, label.div_euclid(2))
            } else {
                (IndexParity::Odd, (label - 1).div_euclid(2))
            };
            let energy = -0.5 / mass * nabla2_eigenvalue(grid.q(), basis, parity, n);
            let norm = basis_normalization(&special, label);
            let psi = basis_function(grid, &special, basis, label, sector).scale(c(norm, 0.0));
            StationaryState { basis, label, sector, energy, psi }
        })
        .collect())
}

/// Interior max of `|−(1/2m)∇²ψ − Eψ|` relative to `max|Eψ|`.
pub fn eigen_residual(state: &StationaryState, mass: f64, margin: i32) -> f64 {
    let lhs = state.psi.nabla().nabla().scale(c(-0.5 / mass, 0.0));
    let rhs = state.psi.scale(c(state.energy, 0.0));
    let scale = rhs.interior(margin).max_abs().max(f64::MIN_POSITIVE);
    (&lhs - &rhs).interior(margin).max_abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: i32, hi: i32) -> LatticeGrid {
        LatticeGrid::symmetric(2.0, lo, hi).unwrap()
    }

    #[test]
    fn representation_matrices() {
        let rep = Representation::build(&grid(-12, 12)).unwrap();
        let g = rep.grid();
        let i = g.index(Sector::Plus, 3).unwrap();
        assert_eq!(rep.x[(i, i)], c(8.0, 0.0));
        let j = g.index(Sector::Plus, 4).unwrap();
        assert_eq!(rep.lam[(j, i)], c(1.0, 0.0));
        let lam = 1.5;
        let row: Vec<_> = rep.p.row(i).iter().filter(|v| v.norm() > 0.0).map(|v| v.norm()).collect();
        assert_eq!(row.len(), 2);
        assert!((row[0] - 2f64.powf(-2.5) / lam).abs() < 1e-15);
        assert!((row[1] - 2f64.powf(-3.5) / lam).abs() < 1e-15);
        assert!(rep.algebra_residual() < 1e-12);
        assert!(rep.momentum_residual() < 1e-12);
        assert!(rep.adjoint_residual() < 1e-12);
        for r in rep.interior_rows(1) {
            for cidx in 0..g.len() {
                assert!((rep.p[(r, cidx)] - rep.p[(cidx, r)].conj()).norm() < 1e-15);
            }
        }
        assert!(matches!(Representation::build(&grid(0, 5)), Err(SchrodingerError::GridTooSmall { .. })));
    }

    #[test]
    fn ground_energy_and_degeneracy() {
        let g = grid(-12, 12);
        let c1 = &stationary_states(&g, 1.0, Basis::C, Sector::Plus, 1..=1).unwrap()[0];
        assert!((c1.energy - 0.5 * 2.0 / 2.25).abs() < 1e-15);
        let s0 = &stationary_states(&g, 1.0, Basis::S, Sector::Plus, 0..=0).unwrap()[0];
        assert_eq!(c1.energy, s0.energy);
        for basis in [Basis::C, Basis::S] {
            for st in stationary_states(&g, 1.0, basis, Sector::Plus, -3..=3).unwrap() {
                assert!(eigen_residual(&st, 1.0, 2) < 1e-6, "{basis:?} {}", st.label);
            }
        }
    }

    #[test]
    fn normalization() {
        let g = LatticeGrid::new(2.0, -50, 30, &[Sector::Plus]).unwrap();
        for basis in [Basis::C, Basis::S] {
            for st in stationary_states(&g, 1.0, basis, Sector::Plus, -2..=3).unwrap() {
                let n = improper_integral(&(&st.psi.conj() * &st.psi)).unwrap();
                assert!((n.re - 1.0).abs() < 1e-6, "{basis:?} {} {}", st.label, n.re);
            }
        }
    }

    #[test]
    fn stationary_and_conserving_evolution() {
        let g = grid(-12, 12);
        let h = Hamiltonian::free(&g, 1.0, Closure::EvenSeries).unwrap();
        let psi = stationary_states(&g, 1.0, Basis::C, Sector::Plus, 1..=1).unwrap().remove(0).psi;
        let out = h.propagate(&psi, 1.0);
        let drift = out.zip_with(&psi, |a, b| c(a.norm() - b.norm(), 0.0)).max_abs();
        assert!(drift < 1e-6, "{drift}");
        assert_eq!(h.propagate(&psi, 0.0), psi);
        let mix = &psi + &stationary_states(&g, 1.0, Basis::C, Sector::Plus, -1..=-1).unwrap()[0].psi.scale(c(0.0, 1.0));
        let (n0, e0) = (h.norm_sq(&mix), h.energy(&mix));
        let st = evolve(EvolutionState::new(mix), &h, 0.1, 10).unwrap();
        assert!((h.norm_sq(&st.psi) - n0).abs() < 1e-10 * n0);
        assert!((h.energy(&st.psi) - e0).abs() < 1e-10 * e0.abs().max(1.0));
        assert_eq!(st.history.len(), 10);
    }

    #[test]
    fn continuity_holds() {
        let g = grid(-12, 12);
        let h = Hamiltonian::free(&g, 1.0, Closure::EvenSeries).unwrap();
        let sts = stationary_states(&g, 1.0, Basis::C, Sector::Plus, -1..=1).unwrap();
        let psi = &sts[2].psi + &sts[0].psi.scale(c(0.0, 1.0));
        let (_, j) = density_current(&psi, 1.0).unwrap();
        assert!(j.max_abs() > 1e-3);
        let r = continuity_residual(&h, &psi, 0.5, 1e-3, 2).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn real_state_has_no_current() {
        let g = grid(-6, 6);
        let psi = LatticeFn::from_fn(&g, |x| c(1.0 / (1.0 + x * x), 0.0));
        let (_, j) = density_current(&psi, 1.0).unwrap();
        assert!(j.max_abs() < 1e-15);
    }

    #[test]
    fn noether_current_matches() {
        let g = grid(-8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<Complex64> = (0..g.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let psi = LatticeFn::from_sites(&g, |s, n| vals[g.index(s, n).unwrap()]);
        let r1 = check_noether(&psi, 1.0, 1.0).unwrap();
        assert!(r1.current < 1e-10 && r1.charge < 1e-15);
        let zero = LatticeFn::zeros(&g);
        assert_eq!(check_noether(&zero, 1.0, 1.0).unwrap().current, 0.0);
    }

    #[test]
    fn energy_form() {
        let g = grid(-10, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<Complex64> = (0..g.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let psi = LatticeFn::from_sites(&g, |s, n| if n.abs() <= 6 { vals[g.index(s, n).unwrap()] } else { c(0.0, 0.0) });
        assert!(energy_form_residual(&psi).unwrap().norm() < 1e-10);
    }

    #[test]
    fn dirichlet_is_symmetric() {
        let g = grid(-6, 6);
        let h = Hamiltonian::free(&g, 1.0, Closure::Dirichlet).unwrap();
        let m = h.matrix();
        assert_eq!(m, &m.transpose());
        assert!(h.eigenvalues().iter().all(|&e| e > 0.0));
    }
}
