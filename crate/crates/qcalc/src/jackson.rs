//! Jackson integrals: the inverse of `∇` and its lattice sums.

use num_complex::Complex64;
use thiserror::Error;

use crate::calculus::nabla;
use crate::context::QContext;
use crate::laurent::LaurentPoly;
use crate::lattice::{LatticeError, LatticeFn, Sector};
use crate::ring::Field;

#[derive(Debug, Error)]
pub enum IntegralError {
    #[error("x^-1 is not in the image of the derivative")]
    NotIntegrable,
    #[error("the {branch:?} series diverges for x^{exponent}")]
    DivergentBranch { branch: Branch, exponent: i32 },
    #[error("endpoint exponents {lower} and {upper} must have equal parity with lower < upper")]
    ParityMismatch { lower: i32, upper: i32 },
    #[error("tail term {tail:e} exceeds tolerance {tol:e}")]
    NotConverged { tail: f64, tol: f64 },
    #[error("site ({sector:?}, {n}) needed but missing from the window")]
    InsufficientPadding { sector: Sector, n: i32 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `λ Σ_ν L^{2ν} L x f`, convergent for `xᵐ`, `m ≥ 0`
    Plus,
    /// `−λ Σ_ν L^{−2ν} L⁻¹ x f`, convergent for `xᵐ`, `m ≤ −2`
    Minus,
}

/// `∫xⁿ = xⁿ⁺¹/[n+1]`, constant term zero.
pub fn indefinite_integral<C: Field>(ctx: &QContext<C>, f: &LaurentPoly<C>) -> Result<LaurentPoly<C>, IntegralError> {
    if !f.coeff(-1).is_zero() {
        return Err(IntegralError::NotIntegrable);
    }
    Ok(LaurentPoly::from_terms(f.terms().map(|(n, c)| (n + 1, c.clone() / ctx.q_number(n + 1)))))
}

/// Partial sum with `terms` terms of the geometric series for `∇⁻¹`.
pub fn nabla_inverse_series<C: Field>(
    ctx: &QContext<C>,
    f: &LaurentPoly<C>,
    branch: Branch,
    terms: u32,
) -> Result<LaurentPoly<C>, IntegralError> {
    for (m, _) in f.terms() {
        let ok = match branch {
            Branch::Plus => m >= 0,
            Branch::Minus => m <= -2,
        };
        if !ok {
            return Err(IntegralError::DivergentBranch { branch, exponent: m });
        }
    }
    let xf = f.shift(1);
    let mut out = LaurentPoly::zero();
    for nu in 0..terms as i32 {
        let term = match branch {
            // L^{2ν+1} xᵏ = q^{−(2ν+1)k} xᵏ
            Branch::Plus => xf.map_by_exponent(|k| ctx.q_pow(-(2 * nu + 1) * k)),
            Branch::Minus => xf.map_by_exponent(|k| -ctx.q_pow((2 * nu + 1) * k)),
        };
        out = out + term;
    }
    Ok(out.scale(ctx.lambda()))
}

fn check_endpoints(lower: i32, upper: i32) -> Result<(), IntegralError> {
    if lower >= upper || (upper - lower) % 2 != 0 {
        return Err(IntegralError::ParityMismatch { lower, upper });
    }
    Ok(())
}

/// `∫` from `σq^{lower}` to `σq^{upper}` by the trace formula
/// `λ Σ (Lxh)(σqⁿ)` over `n = lower+2, lower+4, …, upper`.
pub fn definite_integral<C: Field>(
    ctx: &QContext<C>,
    h: &LaurentPoly<C>,
    lower: i32,
    upper: i32,
    sector: Sector,
) -> Result<C, IntegralError> {
    check_endpoints(lower, upper)?;
    let sigma = C::from_int(sector.sign() as i64);
    let mut acc = C::zero();
    let mut n = lower + 2;
    while n <= upper {
        let x = sigma.clone() * ctx.q_pow(n - 1);
        acc = acc + x.clone() * h.evaluate(&x);
        n += 2;
    }
    Ok(acc * ctx.lambda().clone())
}

/// Antiderivative evaluated at the endpoints: `(σq^{u})^{k+1} − (σq^{l})^{k+1}` over `[k+1]`
/// per monomial, and `λ(u − l)/2` for `x⁻¹`.
pub fn definite_integral_closed_form<C: Field>(
    ctx: &QContext<C>,
    h: &LaurentPoly<C>,
    lower: i32,
    upper: i32,
    sector: Sector,
) -> Result<C, IntegralError> {
    check_endpoints(lower, upper)?;
    let sigma = C::from_int(sector.sign() as i64);
    let mut acc = C::zero();
    for (k, c) in h.terms() {
        let v = if k == -1 {
            ctx.lambda().clone() * C::from_ratio((upper - lower) as i64, 2)
        } else {
            let hi = (sigma.clone() * ctx.q_pow(upper)).powi(k + 1);
            let lo = (sigma.clone() * ctx.q_pow(lower)).powi(k + 1);
            (hi - lo) / ctx.q_number(k + 1)
        };
        acc = acc + c.clone() * v;
    }
    Ok(acc)
}

/// Trace formula on sampled data; reads `h` at `n = lower+1, lower+3, …, upper−1`.
pub fn definite_integral_lattice(h: &LatticeFn, lower: i32, upper: i32, sector: Sector) -> Result<Complex64, IntegralError> {
    check_endpoints(lower, upper)?;
    let grid = h.grid();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut n = lower + 1;
    while n < upper {
        let v = h.value(sector, n).ok_or(IntegralError::InsufficientPadding { sector, n })?;
        acc += v * grid.x(sector, n);
        n += 2;
    }
    Ok(acc * grid.lambda())
}

/// Default relative tail tolerance for window sums.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `½λ Σ_σ Σ_n qⁿ h(σqⁿ)` over the valid sites of the window.
pub fn improper_integral(h: &LatticeFn) -> Result<Complex64, IntegralError> {
    improper_integral_with_tol(h, DEFAULT_TOL)
}

/// As [`improper_integral`], failing when a term at the window edge exceeds
/// `tol` times the sum of term magnitudes.
pub fn improper_integral_with_tol(h: &LatticeFn, tol: f64) -> Result<Complex64, IntegralError> {
    let grid = h.grid();
    let weight = |n: i32| 0.5 * grid.lambda() * grid.q().powi(n);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for (_, n, v) in h.valid_sites() {
        let t = v * weight(n);
        acc += t;
        total += t.norm();
    }
    let mut tail: f64 = 0.0;
    for &s in grid.sectors() {
        for n in [grid.n_min(), grid.n_min() + 1, grid.n_max() - 1, grid.n_max()] {
            if let Some(v) = h.value(s, n) {
                tail = tail.max((v * weight(n)).norm());
            }
        }
    }
    if tail > tol * total.max(f64::MIN_POSITIVE) {
        return Err(IntegralError::NotConverged { tail, tol: tol * total });
    }
    Ok(acc)
}

/// `(χ, ψ) = ∫ χ*ψ`.
pub fn scalar_product(chi: &LatticeFn, psi: &LatticeFn) -> Result<Complex64, IntegralError> {
    chi.same_grid(psi)?;
    improper_integral(&(&chi.conj() * psi))
}

/// Jackson weights `½λqⁿ` per flat site index, the diagonal of the scalar product.
pub fn jackson_weights(grid: &crate::lattice::LatticeGrid) -> Vec<f64> {
    grid.sites().map(|(_, n)| 0.5 * grid.lambda() * grid.q().powi(n)).collect()
}

/// `∫_N^M {(∇²f)g − f∇²g} − {(∇f)(L⁻¹g) − (L⁻¹f)(∇g)}|_N^M`.
pub fn check_green(f: &LatticeFn, g: &LatticeFn, lower: i32, upper: i32, sector: Sector) -> Result<Complex64, IntegralError> {
    f.same_grid(g)?;
    let lap_f = f.nabla().nabla();
    let lap_g = g.nabla().nabla();
    let integrand = &(&lap_f * g) - &(f * &lap_g);
    let lhs = definite_integral_lattice(&integrand, lower, upper, sector)?;
    let boundary = &(&f.nabla() * &g.shift(-1)) - &(&f.shift(-1) * &g.nabla());
    let at = |n| boundary.value(sector, n).ok_or(IntegralError::InsufficientPadding { sector, n });
    Ok(lhs - (at(upper)? - at(lower)?))
}

/// Both partial-integration identities:
/// `∫(∇χ*)(Lψ) + ∫(L⁻¹χ*)(∇ψ)` and `∫(∇χ*)(L⁻¹ψ) + ∫(Lχ*)(∇ψ)`.
pub fn partial_integration_residuals(chi: &LatticeFn, psi: &LatticeFn) -> Result<[Complex64; 2], IntegralError> {
    chi.same_grid(psi)?;
    let c = chi.conj();
    let first = &(&c.nabla() * &psi.shift(1)) + &(&c.shift(-1) * &psi.nabla());
    let second = &(&c.nabla() * &psi.shift(-1)) + &(&c.shift(1) * &psi.nabla());
    Ok([improper_integral(&first)?, improper_integral(&second)?])
}

/// `∫∇f − f|_{σq^{lower}}^{σq^{upper}}`, zero by Stokes.
pub fn stokes_residual<C: Field>(ctx: &QContext<C>, f: &LaurentPoly<C>, lower: i32, upper: i32, sector: Sector) -> Result<C, IntegralError> {
    let integral = definite_integral(ctx, &nabla(ctx, f), lower, upper, sector)?;
    let sigma = C::from_int(sector.sign() as i64);
    let at = |e: i32| f.evaluate(&(sigma.clone() * ctx.q_pow(e)));
    Ok(integral - (at(upper) - at(lower)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::exact_poly;
    use crate::lattice::LatticeGrid;
    use crate::ring::{ExactComplex, Ring};

    fn exact() -> QContext<ExactComplex> {
        QContext::exact(3, 2).unwrap()
    }

    #[test]
    fn indefinite_examples() {
        let c = exact();
        let x = LaurentPoly::x_pow(1);
        assert_eq!(
            indefinite_integral(&c, &x).unwrap(),
            LaurentPoly::monomial(2, ExactComplex::from_int(1) / c.q_number(2))
        );
        assert_eq!(indefinite_integral(&c, &LaurentPoly::one()).unwrap(), x);
        assert!(matches!(
            indefinite_integral(&c, &LaurentPoly::x_pow(-1)),
            Err(IntegralError::NotIntegrable)
        ));
    }

    #[test]
    fn series_branches() {
        let c = QContext::float(1.5).unwrap();
        let f = LaurentPoly::x_pow(2);
        let s = nabla_inverse_series(&c, &f, Branch::Plus, 60).unwrap();
        let want = 1.0 / c.q_number(3).re;
        assert!((s.coeff(3).re - want).abs() < 1e-12 * want);

        let f = LaurentPoly::x_pow(-3);
        let s = nabla_inverse_series(&c, &f, Branch::Minus, 80).unwrap();
        let back = nabla(&c, &s);
        assert!((back.coeff(-3).re - 1.0).abs() < 1e-12);
        assert!(nabla_inverse_series(&c, &f, Branch::Plus, 5).is_err());
        assert!(nabla_inverse_series(&c, &LaurentPoly::x_pow(-1), Branch::Minus, 5).is_err());
    }

    #[test]
    fn series_partial_sums_for_constant() {
        let c = exact();
        let one: LaurentPoly<ExactComplex> = LaurentPoly::one();
        let s = nabla_inverse_series(&c, &one, Branch::Plus, 3).unwrap();
        let q = c.q().clone();
        let partial = c.lambda().clone() * (q.powi(-1) + q.powi(-3) + q.powi(-5));
        assert_eq!(s, LaurentPoly::monomial(1, partial));
    }

    #[test]
    fn trace_formula_examples() {
        let c = QContext::exact(2, 1).unwrap();
        let x = LaurentPoly::x_pow(1);
        assert_eq!(definite_integral(&c, &x, 0, 2, Sector::Plus).unwrap(), ExactComplex::from_int(6));
        assert_eq!(definite_integral_closed_form(&c, &x, 0, 2, Sector::Plus).unwrap(), ExactComplex::from_int(6));
        let one = LaurentPoly::one();
        let v = definite_integral(&c, &one, -2, 4, Sector::Plus).unwrap();
        assert_eq!(v, c.q_pow(4) - c.q_pow(-2));
        let inv = LaurentPoly::x_pow(-1);
        let v = definite_integral(&c, &inv, -2, 4, Sector::Minus).unwrap();
        assert_eq!(v, c.lambda().clone() * ExactComplex::from_int(3));
        assert!(definite_integral(&c, &x, 0, 3, Sector::Plus).is_err());
    }

    #[test]
    fn stokes_on_both_sectors() {
        let c = exact();
        let f = exact_poly(&[(3, 2, 5), (-2, 7, 3), (0, 1, 1), (1, -4, 1)]);
        for s in [Sector::Plus, Sector::Minus] {
            for (l, u) in [(-4, 2), (-3, 5), (0, 6)] {
                assert!(stokes_residual(&c, &f, l, u, s).unwrap() == ExactComplex::from_int(0));
            }
        }
    }

    #[test]
    fn single_site_weights() {
        let g = LatticeGrid::symmetric(2.0, -6, 6).unwrap();
        let mut h = LatticeFn::zeros(&g);
        h.set(Sector::Plus, -1, Complex64::new(1.0, 0.0));
        assert!((improper_integral(&h).unwrap().re - 0.375).abs() < 1e-15);
        let mut e = LatticeFn::zeros(&g);
        e.set(Sector::Plus, 0, Complex64::new(1.0, 0.0));
        assert!((scalar_product(&e, &e).unwrap().re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn tail_is_reported() {
        let g = LatticeGrid::symmetric(2.0, -6, 6).unwrap();
        let h = LatticeFn::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(improper_integral(&h), Err(IntegralError::NotConverged { .. })));
    }

    #[test]
    fn green_on_samples() {
        let g = LatticeGrid::symmetric(2.0, -8, 8).unwrap();
        let f = LatticeFn::from_fn(&g, |x| Complex64::new(x, 0.0));
        let one = LatticeFn::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        let r = check_green(&f, &one, -4, 2, Sector::Plus).unwrap();
        assert!(r.norm() < 1e-12);
        assert!(check_green(&f, &f, -4, 2, Sector::Minus).unwrap().norm() < 1e-12);
        assert!(check_green(&f, &one, -8, 2, Sector::Plus).is_err());
    }
}
