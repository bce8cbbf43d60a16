//! `∇`, `L` and the exterior differential on Laurent fields.

use crate::context::QContext;
use crate::laurent::LaurentPoly;
use crate::ring::Ring;

/// `∇xⁿ = [n]xⁿ⁻¹`, termwise.
pub fn nabla<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>) -> LaurentPoly<C> {
    LaurentPoly::from_terms(f.terms().map(|(n, c)| (n - 1, c.clone() * ctx.q_number(n))))
}

/// `∇ = λ⁻¹x⁻¹(L⁻¹ − L)`; must agree with [`nabla`].
pub fn nabla_by_scaling<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>) -> LaurentPoly<C> {
    (l_op(ctx, f, -1) - l_op(ctx, f, 1)).shift(-1).scale(ctx.lambda_inv())
}

/// `Lᵏ`, with `(Lf)(x) = f(q⁻¹x)`.
pub fn l_op<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>, k: i32) -> LaurentPoly<C> {
    f.map_by_exponent(|n| ctx.q_pow(-k * n))
}

/// `(∇f)(Lg) + (L⁻¹f)(∇g)`.
pub fn coproduct_first<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>, g: &LaurentPoly<C>) -> LaurentPoly<C> {
    nabla(ctx, f) * l_op(ctx, g, 1) + l_op(ctx, f, -1) * nabla(ctx, g)
}

/// `(∇f)(L⁻¹g) + (Lf)(∇g)`.
pub fn coproduct_second<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>, g: &LaurentPoly<C>) -> LaurentPoly<C> {
    nabla(ctx, f) * l_op(ctx, g, -1) + l_op(ctx, f, 1) * nabla(ctx, g)
}

/// Residuals of both product rules: `∇(fg)` minus each comultiplication form.
pub fn check_leibniz<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>, g: &LaurentPoly<C>) -> [LaurentPoly<C>; 2] {
    let fg = nabla(ctx, &(f * g));
    [fg.clone() - coproduct_first(ctx, f, g), fg - coproduct_second(ctx, f, g)]
}

/// `L∇f − q∇Lf`.
pub fn morphism_residual<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>) -> LaurentPoly<C> {
    l_op(ctx, &nabla(ctx, f), 1) - nabla(ctx, &l_op(ctx, f, 1)).scale(ctx.q())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LeibnizVariant {
    /// `d(fg) = df(L⁻¹g) + (Lᵇf)dg`, `dx x = q^{1−b} x dx`
    #[default]
    A,
    /// `d(fg) = df(Lg) + (Lᵇf)dg`, `dx x = q^{−1−b} x dx`
    B,
}

impl LeibnizVariant {
    /// Exponent `e` in `dx x = qᵉ x dx`.
    pub fn commutation_exponent(self, b: i32) -> i32 {
        match self {
            LeibnizVariant::A => 1 - b,
            LeibnizVariant::B => -1 - b,
        }
    }

    /// Power of `L` acting on the second factor in `df(L^k g)`.
    fn right_shift(self) -> i32 {
        match self {
            LeibnizVariant::A => -1,
            LeibnizVariant::B => 1,
        }
    }
}

/// `dx·h`, with `dx` kept on the left.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm<C> {
    pub coefficient: LaurentPoly<C>,
    pub b: i32,
    pub variant: LeibnizVariant,
}

impl<C: Ring> OneForm<C> {
    pub fn dx(b: i32, variant: LeibnizVariant) -> Self {
        OneForm { coefficient: LaurentPoly::one(), b, variant }
    }

    /// `h·(dx k) = dx·(Lᵉh)k`.
    pub fn left_mul(&self, ctx: &QContext<C>, h: &LaurentPoly<C>) -> Self {
        let e = self.variant.commutation_exponent(self.b);
        OneForm { coefficient: l_op(ctx, h, e) * self.coefficient.clone(), ..self.clone() }
    }

    pub fn right_mul(&self, g: &LaurentPoly<C>) -> Self {
        OneForm { coefficient: self.coefficient.clone() * g.clone(), ..self.clone() }
    }

    /// Coefficient of `dx dx` in `d(dx h) = −dx dx ∇h`, after imposing the
    /// relation `(1 + qᵉ) dx dx = 0`. Zero for every `q > 1`.
    pub fn exterior(&self, ctx: &QContext<C>) -> LaurentPoly<C> {
        let e = self.variant.commutation_exponent(self.b);
        let raw = -nabla(ctx, &self.coefficient);
        if (C::one() + ctx.q_pow(e)).is_zero() {
            raw
        } else {
            LaurentPoly::zero()
        }
    }
}

impl<C: Ring> std::ops::Sub for OneForm<C> {
    type Output = OneForm<C>;
    fn sub(self, rhs: OneForm<C>) -> OneForm<C> {
        OneForm { coefficient: self.coefficient - rhs.coefficient, ..self }
    }
}

impl<C: Ring> std::ops::Add for OneForm<C> {
    type Output = OneForm<C>;
    fn add(self, rhs: OneForm<C>) -> OneForm<C> {
        OneForm { coefficient: self.coefficient + rhs.coefficient, ..self }
    }
}

/// `df = dx ∇f`.
pub fn differential<C: Ring>(ctx: &QContext<C>, f: &LaurentPoly<C>, b: i32, variant: LeibnizVariant) -> OneForm<C> {
    OneForm { coefficient: nabla(ctx, f), b, variant }
}

/// `d(fg) − [df(L^{∓1}g) + (Lᵇf)dg]` with `dx` moved to the left.
pub fn check_form_leibniz<C: Ring>(
    ctx: &QContext<C>,
    f: &LaurentPoly<C>,
    g: &LaurentPoly<C>,
    b: i32,
    variant: LeibnizVariant,
) -> LaurentPoly<C> {
    let lhs = differential(ctx, &(f * g), b, variant);
    let first = differential(ctx, f, b, variant).right_mul(&l_op(ctx, g, variant.right_shift()));
    let second = differential(ctx, g, b, variant).left_mul(ctx, &l_op(ctx, f, b));
    (lhs - (first + second)).coefficient
}
