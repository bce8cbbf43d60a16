//! Abelian gauge structure on the lattice: Einbein, covariant shifts and
//! derivative, and the curvature tensors.
//!
//! All fields are pointwise phases or complex numbers, so products commute,
//! but every formula keeps the printed operand order.
//!
//! Time derivatives of multiplicative fields are taken as central differences
//! of their logarithms. With that choice the transformation laws hold at
//! finite `dt`, and only the commutator identity carries an `O(dt²)` error.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::lattice::{LatticeError, LatticeFn, LatticeGrid, Sector};
use crate::ring::Field;

#[derive(Debug, Error)]
pub enum GaugeError {
    #[error("einbein modulus {modulus:e} at ({sector:?}, {n}) is below threshold")]
    SingularEinbein { sector: Sector, n: i32, modulus: f64 },
    #[error("need at least three time slices, got {0}")]
    InsufficientTimeSlices(usize),
    #[error("time slices of different lengths")]
    SliceMismatch,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

const SINGULAR: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one(grid: &LatticeGrid) -> LatticeFn {
    LatticeFn::from_sites(grid, |_, _| c(1.0, 0.0))
}

fn recip(f: &LatticeFn) -> LatticeFn {
    f.map(|v| v.inv())
}

/// `λ⁻¹x⁻¹f`.
fn over_lambda_x(f: &LatticeFn) -> LatticeFn {
    f.times_x_pow(-1).scale(c(1.0 / f.grid().lambda(), 0.0))
}

/// `log(f₊/f₋)/2dt`, the central difference of `log f`.
fn dlog(plus: &LatticeFn, minus: &LatticeFn, dt: f64) -> LatticeFn {
    plus.zip_with(minus, |a, b| (a / b).ln() / (2.0 * dt))
}

/// A real phase field `α`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    alpha: LatticeFn,
}

impl GaugeField {
    /// Keeps only the real part of `alpha`.
    pub fn new(alpha: &LatticeFn) -> Self {
        GaugeField { alpha: alpha.map(|v| c(v.re, 0.0)) }
    }

    pub fn zero(grid: &LatticeGrid) -> Self {
        GaugeField { alpha: LatticeFn::zeros(grid) }
    }

    pub fn random<R: Rng>(grid: &LatticeGrid, rng: &mut R, amplitude: f64) -> Self {
        let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
        GaugeField { alpha: LatticeFn::from_sites(grid, |s, n| c(vals[grid.index(s, n).unwrap()], 0.0)) }
    }

    pub fn alpha(&self) -> &LatticeFn {
        &self.alpha
    }

    /// `e^{iα}`
    pub fn phase(&self) -> LatticeFn {
        self.alpha.map(|a| c(0.0, a.re).exp())
    }

    /// `e^{−iα}`
    pub fn phase_inv(&self) -> LatticeFn {
        self.alpha.map(|a| c(0.0, -a.re).exp())
    }
}

/// `ψ' = e^{iα}ψ`.
pub fn transform_matter(psi: &LatticeFn, g: &GaugeField) -> LatticeFn {
    &g.phase() * psi
}

/// `Ẽ' = e^{iα}Ẽ(Le^{−iα})`.
pub fn transform_tilde(tilde: &LatticeFn, g: &GaugeField) -> LatticeFn {
    &(&g.phase() * tilde) * &g.phase_inv().shift(1)
}

/// `(E⁻¹)' = (L⁻¹e^{iα})E⁻¹e^{−iα}`.
pub fn transform_inverse(e_inv: &LatticeFn, g: &GaugeField) -> LatticeFn {
    &(&g.phase().shift(-1) * e_inv) * &g.phase_inv()
}

/// `φ' = (L⁻¹e^{iα})φ(Le^{−iα}) − (∇e^{iα})(Le^{−iα})`.
pub fn transform_connection(phi: &LatticeFn, g: &GaugeField) -> LatticeFn {
    let l_inv_phase = g.phase_inv().shift(1);
    &(&(&g.phase().shift(-1) * phi) * &l_inv_phase) - &(&g.phase().nabla() * &l_inv_phase)
}

/// `ω' = e^{iα}ωe^{−iα} + e^{iα}∂ₜe^{−iα}`, with `α` given at `t ∓ dt`.
pub fn transform_time_connection(omega: &LatticeFn, before: &GaugeField, now: &GaugeField, after: &GaugeField, dt: f64) -> LatticeFn {
    let rotated = &(&now.phase() * omega) * &now.phase_inv();
    &rotated + &dlog(&after.phase_inv(), &before.phase_inv(), dt)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Einbein {
    e: LatticeFn,
}

impl Einbein {
    pub fn new(e: LatticeFn) -> Result<Self, GaugeError> {
        for (sector, n, v) in e.valid_sites() {
            if v.norm() < SINGULAR {
                return Err(GaugeError::SingularEinbein { sector, n, modulus: v.norm() });
            }
        }
        Ok(Einbein { e })
    }

    pub fn unit(grid: &LatticeGrid) -> Self {
        Einbein { e: one(grid) }
    }

    /// `E = 1 + g·h`.
    pub fn coupled(h: &LatticeFn, g: f64) -> Result<Self, GaugeError> {
        Self::new(&one(h.grid()) + &h.scale(c(g, 0.0)))
    }

    /// Random phase and modulus in `[0.5, 1.5]`.
    pub fn random<R: Rng>(grid: &LatticeGrid, rng: &mut R) -> Self {
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(-3.0..3.0)))
            .collect();
        Einbein { e: LatticeFn::from_sites(grid, |s, n| vals[grid.index(s, n).unwrap()]) }
    }

    pub fn field(&self) -> &LatticeFn {
        &self.e
    }

    pub fn inverse(&self) -> LatticeFn {
        recip(&self.e)
    }

    /// `Ẽ = (LE⁻¹)`.
    pub fn tilde(&self) -> LatticeFn {
        self.inverse().shift(1)
    }

    /// `E' = e^{iα}E(L⁻¹e^{−iα})`.
    pub fn transform(&self, g: &GaugeField) -> Einbein {
        Einbein { e: &(&g.phase() * &self.e) * &g.phase_inv().shift(-1) }
    }

    /// Einbein of the product representation.
    pub fn product(&self, other: &Einbein) -> Einbein {
        Einbein { e: &self.e * &other.e }
    }

    /// `𝓛ψ = ẼLψ`.
    pub fn shift(&self, psi: &LatticeFn) -> LatticeFn {
        &self.tilde() * &psi.shift(1)
    }

    /// `𝓛̃ψ = EL⁻¹ψ`.
    pub fn shift_inv(&self, psi: &LatticeFn) -> LatticeFn {
        &self.e * &psi.shift(-1)
    }

    /// `𝓓 = λ⁻¹x⁻¹(𝓛̃ − 𝓛)`.
    pub fn derivative(&self, psi: &LatticeFn) -> LatticeFn {
        over_lambda_x(&(&self.shift_inv(psi) - &self.shift(psi)))
    }

    /// `E∇ψ + λ⁻¹x⁻¹(E − Ẽ)Lψ`.
    pub fn derivative_expanded(&self, psi: &LatticeFn) -> LatticeFn {
        let diff = &self.e - &self.tilde();
        &(&self.e * &psi.nabla()) + &over_lambda_x(&(&diff * &psi.shift(1)))
    }

    /// `E(∇ + φL)ψ` with `φ` from [`Einbein::connection`].
    pub fn derivative_via_connection(&self, psi: &LatticeFn) -> LatticeFn {
        let inner = &psi.nabla() + &(&self.connection() * &psi.shift(1));
        &self.e * &inner
    }

    /// `φ = λ⁻¹x⁻¹(1 − E⁻¹Ẽ)`.
    pub fn connection(&self) -> LatticeFn {
        over_lambda_x(&(&one(self.e.grid()) - &(&self.inverse() * &self.tilde())))
    }

    /// `𝓛H = Ẽ(LH)(L⁻¹Ẽ⁻¹)` for `H` transforming like `E`.
    pub fn shift_field(&self, h: &LatticeFn) -> LatticeFn {
        let tilde = self.tilde();
        &(&tilde * &h.shift(1)) * &recip(&tilde).shift(-1)
    }

    /// `𝓛̃H = E(L⁻¹H)(L⁻¹E⁻¹)`.
    pub fn shift_inv_field(&self, h: &LatticeFn) -> LatticeFn {
        &(&self.e * &h.shift(-1)) * &self.inverse().shift(-1)
    }

    /// `𝓓H` for `H` transforming like `E`.
    pub fn derivative_field(&self, h: &LatticeFn) -> LatticeFn {
        over_lambda_x(&(&self.shift_inv_field(h) - &self.shift_field(h)))
    }
}

/// `(𝓛E − E, 𝓛̃E − E)` at the interior sites of a sequence `E_n`, in any field.
pub fn einbein_shift_residuals<C: Field>(e: &[C]) -> Vec<(C, C)> {
    (1..e.len().saturating_sub(1))
        .map(|n| {
            // Ẽ_n = 1/E_{n−1}
            let tilde = |k: usize| e[k - 1].inv().expect("nonzero einbein");
            let shifted = tilde(n) * e[n - 1].clone() * tilde(n + 1).inv().unwrap();
            let shifted_inv = e[n].clone() * e[n + 1].clone() * e[n + 1].inv().unwrap();
            (shifted - e[n].clone(), shifted_inv - e[n].clone())
        })
        .collect()
}

/// `𝓓(ψχ) − (𝓓ψ)𝓛χ − (𝓛̃ψ)𝓓χ`, with the product carrying `E₁E₂`.
pub fn leibniz_residual(e1: &Einbein, e2: &Einbein, psi: &LatticeFn, chi: &LatticeFn) -> f64 {
    let lhs = e1.product(e2).derivative(&(psi * chi));
    let rhs = &(&e1.derivative(psi) * &e2.shift(chi)) + &(&e1.shift_inv(psi) * &e2.derivative(chi));
    (&lhs - &rhs).max_abs()
}

/// Max-norm of `𝓓ψ − ∇ψ` at coupling `g` divided by the same at `g/2`.
pub fn coupling_ratio(h: &LatticeFn, psi: &LatticeFn, g: f64) -> Result<f64, GaugeError> {
    let dev = |g: f64| -> Result<f64, GaugeError> {
        Ok((&Einbein::coupled(h, g)?.derivative(psi) - &psi.nabla()).max_abs())
    };
    Ok(dev(g / 2.0)? / dev(g)?)
}

/// Einbein samples at `t − dt`, `t`, `t + dt` (the middle three of a longer run).
#[derive(Clone, Debug)]
pub struct TimeSlices {
    slices: Vec<Einbein>,
    dt: f64,
}

impl TimeSlices {
    pub fn new(slices: Vec<Einbein>, dt: f64) -> Result<Self, GaugeError> {
        if slices.len() < 3 {
            return Err(GaugeError::InsufficientTimeSlices(slices.len()));
        }
        Ok(TimeSlices { slices, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn mid(&self) -> usize {
        self.slices.len() / 2
    }

    pub fn before(&self) -> &Einbein {
        &self.slices[self.mid() - 1]
    }

    pub fn now(&self) -> &Einbein {
        &self.slices[self.mid()]
    }

    pub fn after(&self) -> &Einbein {
        &self.slices[self.mid() + 1]
    }

    /// Applies one gauge field per slice.
    pub fn transform(&self, gauges: &[GaugeField]) -> Result<TimeSlices, GaugeError> {
        if gauges.len() != self.slices.len() {
            return Err(GaugeError::SliceMismatch);
        }
        let slices = self.slices.iter().zip(gauges).map(|(e, g)| e.transform(g)).collect();
        Ok(TimeSlices { slices, dt: self.dt })
    }
}

#[derive(Clone, Debug)]
pub struct Curvature {
    pub t: LatticeFn,
    pub f: LatticeFn,
    /// `𝓕 = EF(LE)`
    pub cal_f: LatticeFn,
}

/// `T = (∂ₜE)E⁻¹ − E(L⁻¹ω)E⁻¹ + ω` and
/// `F = ∂ₜφ − ∇ω + (L⁻¹ω)φ − φ(Lω)` at the middle slice.
pub fn curvature(slices: &TimeSlices, omega: &LatticeFn) -> Curvature {
    let dt = slices.dt();
    let e = slices.now();
    let e_field = e.field();
    let l_inv_omega = omega.shift(-1);
    let t = &(&dlog(slices.after().field(), slices.before().field(), dt) - &(&(e_field * &l_inv_omega) * &e.inverse())) + omega;

    let ratio = |e: &Einbein| &e.inverse() * &e.tilde();
    let r = ratio(e);
    // φ = λ⁻¹x⁻¹(1 − R), so ∂ₜφ = −λ⁻¹x⁻¹R ∂ₜlog R
    let dphi = over_lambda_x(&(&r * &dlog(&ratio(slices.after()), &ratio(slices.before()), dt))).scale(c(-1.0, 0.0));
    let phi = e.connection();
    let f = &(&(&dphi - &omega.nabla()) + &(&l_inv_omega * &phi)) - &(&phi * &omega.shift(1));
    let cal_f = &(e_field * &f) * &e_field.shift(1);
    Curvature { t, f, cal_f }
}

/// Interior max of `(𝓓ₜ𝓓 − 𝓓𝓓ₜ)ψ − T𝓓ψ − EFLψ`, with `ψ` given on the
/// same three time slices and `∂ₜ` a plain central difference.
pub fn commutator_residual(slices: &TimeSlices, omega: &LatticeFn, psi: [&LatticeFn; 3]) -> f64 {
    let dt = slices.dt();
    let [before, now, after] = psi;
    let d_before = slices.before().derivative(before);
    let d_now = slices.now().derivative(now);
    let d_after = slices.after().derivative(after);
    let dt_d = &(&d_after - &d_before).scale(c(0.5 / dt, 0.0)) + &(omega * &d_now);
    let dt_psi = &(after - before).scale(c(0.5 / dt, 0.0)) + &(omega * now);
    let lhs = &dt_d - &slices.now().derivative(&dt_psi);
    let k = curvature(slices, omega);
    let rhs = &(&k.t * &d_now) + &(&(slices.now().field() * &k.f) * &now.shift(1));
    (&lhs - &rhs).max_abs()
}

/// Interior max of `(𝓛𝓓ₜ − 𝓓ₜ𝓛)ψ − L(E⁻¹Tψ)`.
pub fn mixed_commutator_residual(slices: &TimeSlices, omega: &LatticeFn, psi: [&LatticeFn; 3]) -> f64 {
    let dt = slices.dt();
    let [before, now, after] = psi;
    let e = slices.now();
    let dt_psi = &(after - before).scale(c(0.5 / dt, 0.0)) + &(omega * now);
    let shifted = |s: &Einbein, p: &LatticeFn| s.shift(p);
    let dt_shift = &(&shifted(slices.after(), after) - &shifted(slices.before(), before)).scale(c(0.5 / dt, 0.0))
        + &(omega * &e.shift(now));
    let lhs = &e.shift(&dt_psi) - &dt_shift;
    let t = curvature(slices, omega).t;
    let rhs = (&(&e.inverse() * &t) * now).shift(1);
    (&lhs - &rhs).max_abs()
}

/// A smooth random history `E(t) = E₀e^{ta}`, `ψ(t) = ψ₀e^{tb}` sampled at
/// `−dt, 0, dt`, with a random time connection at `t = 0`. The components of
/// the rates `a`, `b` are drawn from `[−rate, rate]`.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub slices: TimeSlices,
    pub omega: LatticeFn,
    pub psi: [LatticeFn; 3],
}

impl Scenario {
    pub fn random<R: Rng>(grid: &LatticeGrid, rng: &mut R, dt: f64, rate: f64) -> Self {
        let mut field = |scale: f64| {
            let vals: Vec<Complex64> =
                (0..grid.len()).map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect();
            LatticeFn::from_sites(grid, |s, n| vals[grid.index(s, n).unwrap()])
        };
        let rate_e = field(rate);
        let rate_psi = field(rate);
        let psi0 = field(1.0);
        let omega = field(1.0);
        let e0 = Einbein::random(grid, rng);
        let at = |t: f64| Einbein { e: e0.field().zip_with(&rate_e, |e, a| e * (a * t).exp()) };
        let psi_at = |t: f64| psi0.zip_with(&rate_psi, |p, b| p * (b * t).exp());
        Scenario {
            slices: TimeSlices { slices: vec![at(-dt), at(0.0), at(dt)], dt },
            omega,
            psi: [psi_at(-dt), psi_at(0.0), psi_at(dt)],
        }
    }

    pub fn psi_refs(&self) -> [&LatticeFn; 3] {
        [&self.psi[0], &self.psi[1], &self.psi[2]]
    }

    /// Applies `α(t) = α₀ + tα₁` to every field.
    pub fn transform(&self, alpha0: &GaugeField, alpha1: &GaugeField) -> Scenario {
        let dt = self.slices.dt();
        let at = |t: f64| GaugeField::new(&(alpha0.alpha() + &alpha1.alpha().scale(c(t, 0.0))));
        let gauges = [at(-dt), at(0.0), at(dt)];
        Scenario {
            slices: self.slices.transform(&gauges).expect("three slices"),
            omega: transform_time_connection(&self.omega, &gauges[0], &gauges[1], &gauges[2], dt),
            psi: [0, 1, 2].map(|k| transform_matter(&self.psi[k], &gauges[k])),
        }
    }
}

/// Largest deviation of `T` and `𝓕` from their transformed values.
pub fn curvature_covariance(scenario: &Scenario, alpha0: &GaugeField, alpha1: &GaugeField) -> (f64, f64) {
    let k = curvature(&scenario.slices, &scenario.omega);
    let t2 = scenario.transform(alpha0, alpha1);
    let k2 = curvature(&t2.slices, &t2.omega);
    let phase = alpha0.phase();
    let inv = alpha0.phase_inv();
    let t_want = &(&phase * &k.t) * &inv;
    let f_want = &(&phase * &k.cal_f) * &inv;
    ((&k2.t - &t_want).max_abs(), (&k2.cal_f - &f_want).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{ExactComplex, Ring};
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> LatticeGrid {
        LatticeGrid::symmetric(2.0, -5, 5).unwrap()
    }

    fn random_fn(g: &LatticeGrid, rng: &mut ChaCha8Rng) -> LatticeFn {
        let vals: Vec<Complex64> = (0..g.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        LatticeFn::from_sites(g, |s, n| vals[g.index(s, n).unwrap()])
    }

    #[test]
    fn unit_einbein_gives_nabla() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_fn(&g, &mut rng);
        let e = Einbein::unit(&g);
        assert!((&e.derivative(&psi) - &psi.nabla()).max_abs() < 1e-12);
        assert!(e.connection().max_abs() == 0.0);
    }

    #[test]
    fn derivative_forms_agree_and_covary() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let e = Einbein::random(&g, &mut rng);
            let psi = random_fn(&g, &mut rng);
            let d = e.derivative(&psi);
            assert!((&d - &e.derivative_expanded(&psi)).max_abs() < 1e-12);
            assert!((&d - &e.derivative_via_connection(&psi)).max_abs() < 1e-12);
            let gf = GaugeField::random(&g, &mut rng, 3.0);
            let e2 = e.transform(&gf);
            let lhs = e2.derivative(&transform_matter(&psi, &gf));
            assert!((&lhs - &transform_matter(&d, &gf)).max_abs() < 1e-12);
            assert!((&e2.tilde() - &transform_tilde(&e.tilde(), &gf)).max_abs() < 1e-12);
            assert!((&e2.inverse() - &transform_inverse(&e.inverse(), &gf)).max_abs() < 1e-12);
            assert!((&e2.connection() - &transform_connection(&e.connection(), &gf)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gauge_is_identity() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = Einbein::random(&g, &mut rng);
        let z = GaugeField::zero(&g);
        assert!((e.transform(&z).field() - e.field()).max_abs() == 0.0);
        let phi = e.connection();
        assert!((&transform_connection(&phi, &z) - &phi).max_abs() == 0.0);
    }

    #[test]
    fn einbein_is_covariantly_constant() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = Einbein::random(&g, &mut rng);
        assert!(e.derivative_field(e.field()).max_abs() < 1e-12);
        let inv = Einbein::new(e.shift_inv(&e.shift(&random_fn(&g, &mut rng)))).is_ok();
        assert!(inv);
        let seq: Vec<ExactComplex> = [3, -2, 5, 7, -11, 4].iter().map(|&k| ExactComplex::from_int(k) / ExactComplex::from_ratio(2, 3)).collect();
        for (a, b) in einbein_shift_residuals(&seq) {
            assert!(a.is_zero() && b.is_zero());
        }
    }

    #[test]
    fn shifts_are_inverse() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = Einbein::random(&g, &mut rng);
        let psi = random_fn(&g, &mut rng);
        assert!((&e.shift(&e.shift_inv(&psi)) - &psi).max_abs() < 1e-12);
        assert!((&e.shift_inv(&e.shift(&psi)) - &psi).max_abs() < 1e-12);
        // scalar factor: 𝓛(fψ) = (Lf)(𝓛ψ)
        let f = random_fn(&g, &mut rng);
        assert!((&e.shift(&(&f * &psi)) - &(&f.shift(1) * &e.shift(&psi))).max_abs() < 1e-12);
    }

    #[test]
    fn product_leibniz() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let one = Einbein::unit(&g);
        let psi = random_fn(&g, &mut rng);
        let chi = random_fn(&g, &mut rng);
        assert!(leibniz_residual(&one, &one, &psi, &chi) < 1e-12);
        let (e1, e2) = (Einbein::random(&g, &mut rng), Einbein::random(&g, &mut rng));
        assert!(leibniz_residual(&e1, &e2, &psi, &chi) < 1e-12);
    }

    #[test]
    fn coupling_is_first_order() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_fn(&g, &mut rng);
        let psi = random_fn(&g, &mut rng);
        let r = coupling_ratio(&h, &psi, 1e-3).unwrap();
        assert!((r - 0.5).abs() < 1e-2, "{r}");
    }

    #[test]
    fn singular_einbein_rejected() {
        let g = grid();
        let e = LatticeFn::from_sites(&g, |_, n| c(if n == 0 { 0.0 } else { 1.0 }, 0.0));
        assert!(matches!(Einbein::new(e), Err(GaugeError::SingularEinbein { n: 0, .. })));
        assert!(matches!(TimeSlices::new(vec![Einbein::unit(&g)], 0.1), Err(GaugeError::InsufficientTimeSlices(1))));
    }

    #[test]
    fn curvature_tensors_covary() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sc = Scenario::random(&g, &mut rng, 1e-3, 1.0);
        for _ in 0..20 {
            let a0 = GaugeField::random(&g, &mut rng, 3.0);
            let a1 = GaugeField::random(&g, &mut rng, 1.0);
            let (t, f) = curvature_covariance(&sc, &a0, &a1);
            assert!(t < 1e-10 && f < 1e-10, "{t} {f}");
        }
        let k = curvature(&sc.slices, &sc.omega);
        let k2 = {
            let t2 = sc.transform(&GaugeField::random(&g, &mut rng, 3.0), &GaugeField::zero(&g));
            curvature(&t2.slices, &t2.omega)
        };
        assert!((&k.t - &k2.t).max_abs() < 1e-10);
    }

    #[test]
    fn commutator_identities() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sc = Scenario::random(&g, &mut rng, 1e-3, 0.3);
        let r = commutator_residual(&sc.slices, &sc.omega, sc.psi_refs());
        assert!(r < 1e-6, "{r}");
        let m = mixed_commutator_residual(&sc.slices, &sc.omega, sc.psi_refs());
        assert!(m < 1e-6, "{m}");
        let coarse = Scenario::random(&g, &mut ChaCha8Rng::seed_from_u64(10), 2e-3, 0.3);
        let rc = commutator_residual(&coarse.slices, &coarse.omega, coarse.psi_refs());
        assert!(rc > 2.0 * r, "residual should scale with dt: {r} {rc}");
    }

    #[test]
    fn abelian_time_connection_shift() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let omega = random_fn(&g, &mut rng);
        let a0 = GaugeField::random(&g, &mut rng, 1.0);
        let a1 = GaugeField::random(&g, &mut rng, 1.0);
        let dt = 1e-3;
        let at = |t: f64| GaugeField::new(&(a0.alpha() + &a1.alpha().scale(c(t, 0.0))));
        let w2 = transform_time_connection(&omega, &at(-dt), &at(0.0), &at(dt), dt);
        // e^{iα}∂ₜe^{−iα} = −iα̇
        let want = &omega + &a1.alpha().scale(c(0.0, -1.0));
        assert!((&w2 - &want).max_abs() < 1e-10);
    }

    #[test]
    fn static_einbein_has_no_curvature() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let e = Einbein::random(&g, &mut rng);
        let s = TimeSlices::new(vec![e.clone(), e.clone(), e], 1e-3).unwrap();
        let k = curvature(&s, &LatticeFn::zeros(&g));
        assert!(k.t.max_abs() == 0.0 && k.f.max_abs() == 0.0);
    }
}
