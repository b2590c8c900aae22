//! Constructive compositional inverses for each permutation family.
//!
//! Every method derives the inverse in closed form from the certified shape
//! (never by searching), then verifies h∘f = f∘h = id exhaustively on all
//! q^2 points before returning; the result carries a `verified` flag set by
//! that check. Families with no closed recipe fall back to the permutation
//! table transpose.

use crate::basepoly::{lagrange_inverse, BasePoly};
use crate::construct::{attribute, Family, PPForm};
use crate::error::{Error, Result};
use crate::fields::{Elt, FieldCtx};
use crate::linearized::LinPoly;
use crate::spoly::{canonical_lambda, SPoly};
use crate::verify::check_inverse;
use std::collections::BTreeMap;

/// Sum of c_i·s_j(x)^i (i ≥ 1) plus a linearized polynomial: the shape the
/// constructive inverses take. Unlike [`SPoly`] the leading coefficient is
/// explicit and an s^1 term is allowed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SForm {
    delta: Elt,
    coeffs: BTreeMap<usize, Elt>,
    pub lin: LinPoly,
}

impl SForm {
    pub fn new(
        ctx: &FieldCtx,
        delta: Elt,
        coeffs: impl IntoIterator<Item = (usize, Elt)>,
        lin: LinPoly,
    ) -> Result<SForm> {
        if !ctx.is_unit_norm(delta) {
            return Err(Error::InvalidDelta);
        }
        let mut map = BTreeMap::new();
        for (i, c) in coeffs {
            if i == 0 {
                return Err(Error::IndexOutOfRange(0));
            }
            if !c.is_zero() {
                map.insert(i, c);
            }
        }
        Ok(SForm { delta, coeffs: map, lin })
    }

    pub fn delta(&self) -> Elt {
        self.delta
    }
    pub fn coeffs(&self) -> &BTreeMap<usize, Elt> {
        &self.coeffs
    }

    /// Exponents with nonzero s-coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        let sx = ctx.add(ctx.frobenius(x), ctx.mul(self.delta, x));
        let mut acc = self.lin.eval(ctx, x);
        let mut pw = sx;
        let mut at = 1usize;
        for (&i, &c) in &self.coeffs {
            while at < i {
                pw = ctx.mul(pw, sx);
                at += 1;
            }
            acc = ctx.add(acc, ctx.mul(c, pw));
        }
        acc
    }

    /// The map x ↦ self(t·x), again of the same shape: s_j(tx) = t^q·s'(x)
    /// for s' = x^q + δ·t^{1-q}·x, so coefficients pick up powers of t^q and
    /// the linearized part rescales per coefficient.
    pub fn precompose_scale(&self, ctx: &FieldCtx, t: Elt) -> Result<SForm> {
        if t.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let tq = ctx.frobenius(t);
        let delta2 = ctx.mul(self.delta, ctx.pow(t, 1 - ctx.q() as i64));
        let coeffs: Vec<(usize, Elt)> = self
            .coeffs
            .iter()
            .map(|(&i, &c)| (i, ctx.mul(c, ctx.pow(tq, i as i64))))
            .collect();
        let lin = LinPoly::new(
            ctx,
            ctx.mul(self.lin.a1(), tq),
            ctx.mul(self.lin.a0(), t),
        );
        SForm::new(ctx, delta2, coeffs, lin)
    }
}

impl From<&PPForm> for SForm {
    fn from(pp: &PPForm) -> SForm {
        let mut coeffs = pp.g.coeffs().clone();
        coeffs.insert(pp.g.m(), Elt::ONE);
        SForm {
            delta: pp.g.delta(),
            coeffs,
            lin: pp.lin,
        }
    }
}

/// Which recipe produced an inverse.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InverseMethod {
    Rank2Aligned,
    Rank1Coprime,
    HalfIndex,
    TraceSPoly,
    FromPermLift,
    Rank1SPoly,
    Generic,
}

impl InverseMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            InverseMethod::Rank2Aligned => "Rank2Aligned",
            InverseMethod::Rank1Coprime => "Rank1Coprime",
            InverseMethod::HalfIndex => "HalfIndex",
            InverseMethod::TraceSPoly => "TraceSPoly",
            InverseMethod::FromPermLift => "FromPermLift",
            InverseMethod::Rank1SPoly => "Rank1SPoly",
            InverseMethod::Generic => "Generic",
        }
    }
}

/// Either a closed g(s)+L shape or, for the generic fallback, the explicit
/// permutation table indexed by element index.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InverseForm {
    Closed(SForm),
    Table(Vec<Elt>),
}

impl InverseForm {
    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        match self {
            InverseForm::Closed(s) => s.eval(ctx, x),
            InverseForm::Table(t) => t[x.index() as usize],
        }
    }
}

/// A compositional inverse together with how it was obtained and whether the
/// exhaustive two-sided composition check passed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InverseCert {
    pub form: InverseForm,
    pub method: InverseMethod,
    pub verified: bool,
}

impl InverseCert {
    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        self.form.eval(ctx, x)
    }

    pub fn closed(&self) -> Option<&SForm> {
        match &self.form {
            InverseForm::Closed(s) => Some(s),
            InverseForm::Table(_) => None,
        }
    }
}

/// The unique unit-norm δ with y ∈ ker(x^q + δx), namely -y^{q-1}.
fn delta_killing(ctx: &FieldCtx, y: Elt) -> Result<Elt> {
    if y.is_zero() {
        return Err(Error::NoSuchDeltaJ);
    }
    let d = ctx.neg(ctx.pow(y, ctx.q() as i64 - 1));
    debug_assert!(ctx.is_unit_norm(d));
    Ok(d)
}

fn s_apply(ctx: &FieldCtx, delta: Elt, x: Elt) -> Elt {
    ctx.add(ctx.frobenius(x), ctx.mul(delta, x))
}

/// Monic rank-1 polynomial whose kernel is the line of `k`.
fn rank1_with_kernel(ctx: &FieldCtx, k: Elt) -> Result<LinPoly> {
    LinPoly::rank1_monic(ctx, delta_killing(ctx, k)?)
}

fn finish(
    ctx: &FieldCtx,
    f: &PPForm,
    form: SForm,
    method: InverseMethod,
) -> InverseCert {
    let verified = check_inverse(ctx, |x| f.eval(ctx, x), |x| form.eval(ctx, x));
    InverseCert {
        form: InverseForm::Closed(form),
        method,
        verified,
    }
}

// ----------------------------------------------------------------------
// the individual recipes
// ----------------------------------------------------------------------

/// Inverse of a kernel-aligned monomial form s^m + L: h = η·s_j^m + M with
/// M = L^{-1}, δ_j killing L(u), and η solving η·b^m = -M(z) for
/// b = s_j(L(v0)), z = s(v0)^m.
pub fn invert_rank2_aligned(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if f.family != Family::Rank2KernelAligned || !f.g.is_monomial() {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let m = f.g.m();
    let u = f.g.kernel_gen(ctx);
    let v0 = f.g.v0(ctx);
    let z = ctx.pow(f.g.image_point(ctx), m as i64);
    let lu = f.lin.eval(ctx, u);
    if f.lin.rank() != 2 || !ctx.on_line(z, lu) {
        return Err(Error::WrongFamily("not kernel aligned".into()));
    }
    let big_m = f.lin.inverse_rank2(ctx)?;
    let dj = delta_killing(ctx, lu)?;
    let b = s_apply(ctx, dj, f.lin.eval(ctx, v0));
    if b.is_zero() {
        return Err(Error::NoSuchDeltaJ);
    }
    let eta = ctx.div(ctx.neg(big_m.eval(ctx, z)), ctx.pow(b, m as i64))?;
    let h = SForm::new(ctx, dj, [(m, eta)], big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::Rank2Aligned))
}

/// Inverse of s^m + L with rank-1 L and gcd(m, q-1) = 1: h = η·s_j^n + M
/// with mn ≡ 1 (mod q-1), M rank-1 killing z = s^m(v) and sending L(u) to u,
/// δ_j killing L(u), η solving η·s_j(z)^n = v (v spans ker L).
pub fn invert_rank1_coprime(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if f.family != Family::Rank1Coprime || !f.g.is_monomial() || f.lin.rank() != 1 {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let m = f.g.m();
    let q1 = ctx.q() as usize - 1;
    let n = (1..q1)
        .find(|&n| (n * m) % q1 == 1)
        .ok_or(Error::NotCoprime(m))?;
    let u = f.g.kernel_gen(ctx);
    let v = f.lin.kernel_basis(ctx)[0];
    let z = ctx.pow(s_apply(ctx, f.g.delta(), v), m as i64);
    let lu = f.lin.eval(ctx, u);
    let m0 = rank1_with_kernel(ctx, z)?;
    let big_m = m0.scale(ctx, ctx.div(u, m0.eval(ctx, lu))?);
    let dj = delta_killing(ctx, lu)?;
    let eta = ctx.div(v, ctx.pow(s_apply(ctx, dj, z), n as i64))?;
    let h = SForm::new(ctx, dj, [(n, eta)], big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::Rank1Coprime))
}

/// Sign choice for the scalar composition of x^m/γ + x with x^m ∓ γx on F_q,
/// m = (q+1)/2: minus when (1+γ)/γ is a square of F_q, plus otherwise.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CompSign {
    Minus,
    Plus,
}

pub fn comp_scalar_sign(ctx: &FieldCtx, gamma: Elt) -> Result<CompSign> {
    if ctx.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if gamma.is_zero() || !ctx.in_subfield(gamma) {
        return Err(Error::Malformed("gamma must lie in F_q*".into()));
    }
    let ratio = ctx.div(ctx.add(ctx.one(), gamma), gamma)?;
    Ok(if is_square_in_subfield(ctx, ratio) {
        CompSign::Minus
    } else {
        CompSign::Plus
    })
}

fn is_square_in_subfield(ctx: &FieldCtx, x: Elt) -> bool {
    debug_assert!(ctx.in_subfield(x));
    x.is_zero() || ctx.pow(x, (ctx.q() as i64 - 1) / 2) == ctx.one()
}

/// Inverse of s^m + L for m = (q+1)/2 and a rank-2 L that is not kernel
/// aligned: h = η·s_j^m + M, where M sends L(u) to u and L(v) to
/// γ²/(γ²-1)·v for γ = L(v)/s^m(v), and η solves η·s_j^m(L(v)) = k·v with
/// k = ∓γ/(γ²-1) picked by the square test. Here M is not L^{-1}: M∘L has
/// eigenvalues 1 and γ²/(γ²-1) on the basis {u, v}.
pub fn invert_half_index(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if ctx.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let m = f.g.m();
    if f.family != Family::Rank2FromBasePP
        || !f.g.is_monomial()
        || m != (ctx.q() as usize + 1) / 2
        || f.lin.rank() != 2
    {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let u = f.g.kernel_gen(ctx);
    let zline = ctx.pow(f.g.image_point(ctx), m as i64);
    let lu = f.lin.eval(ctx, u);
    if ctx.on_line(zline, lu) {
        return Err(Error::WrongFamily("kernel aligned".into()));
    }
    let v = f.lin.inverse_rank2(ctx)?.eval(ctx, zline);
    let v1 = ctx.pow(s_apply(ctx, f.g.delta(), v), m as i64);
    let v2 = zline; // = L(v)
    let gamma = ctx.div(v2, v1)?;
    let one = ctx.one();
    let g2 = ctx.mul(gamma, gamma);
    let denom = ctx.sub(g2, one);
    if denom.is_zero() {
        return Err(Error::WrongFamily("gamma = ±1 cannot certify this family".into()));
    }
    let big_m = LinPoly::from_basis_action(ctx, lu, u, v2, ctx.mul(ctx.div(g2, denom)?, v));
    let dj = delta_killing(ctx, lu)?;
    let k = match comp_scalar_sign(ctx, gamma)? {
        CompSign::Minus => ctx.neg(ctx.div(gamma, denom)?),
        CompSign::Plus => ctx.div(gamma, denom)?,
    };
    let eta = ctx.div(
        ctx.mul(k, v),
        ctx.pow(s_apply(ctx, dj, v2), m as i64),
    )?;
    let h = SForm::new(ctx, dj, [(m, eta)], big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::HalfIndex))
}

/// Inverse of g(x^q + x) + L with g over F_q and L rank-2 sending ker(trace)
/// into F_q: h = g1(x^q - x) + M with M = L^{-1} and η_i·z^i = -a_i·M(1),
/// z = L(v)^q - L(v) for the v with v^q + v = 1.
pub fn invert_trace_spoly(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if f.family != Family::TraceSPoly
        || f.g.delta() != ctx.one()
        || f.lin.rank() != 2
        || f.g.coeffs().values().any(|c| !ctx.in_subfield(*c))
    {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let u = f.g.kernel_gen(ctx);
    if !ctx.in_subfield(f.lin.eval(ctx, u)) {
        return Err(Error::WrongFamily("kernel does not map into F_q".into()));
    }
    let v = ctx
        .elements()
        .find(|&v| ctx.trace(v) == ctx.one())
        .expect("trace is onto");
    let big_m = f.lin.inverse_rank2(ctx)?;
    let lv = f.lin.eval(ctx, v);
    let z = ctx.sub(ctx.frobenius(lv), lv);
    debug_assert!(!z.is_zero());
    let m1 = big_m.eval(ctx, ctx.one());
    let mut coeffs = Vec::new();
    for i in f.g.support() {
        let ai = f.g.coeff(i);
        let etai = ctx.div(ctx.neg(ctx.mul(ai, m1)), ctx.pow(z, i as i64))?;
        coeffs.push((i, etai));
    }
    let h = SForm::new(ctx, ctx.neg(ctx.one()), coeffs, big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::TraceSPoly))
}

/// Inverse of a transported aligned form λ^m·ĝ(λ^{-1}s) + L: h = g1(s_j) + M
/// with M = L^{-1}, δ_j killing λ^m, and η_i·v2^i = -a_i·M(λ^m·v1^i) for
/// v1 = λ^{-1}s(v0), v2 = s_j(L(v0)).
pub fn invert_transported_spoly(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if !matches!(f.family, Family::SPolyTransported | Family::TraceSPoly) || f.lin.rank() != 2 {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let m = f.g.m();
    let lambda = canonical_lambda(ctx, f.g.delta())?;
    let lambda_m = ctx.pow(lambda, m as i64);
    // decompose through the canonical lambda
    for (&i, &c) in f.g.coeffs() {
        if !ctx.in_subfield(ctx.mul(c, ctx.pow(lambda, i as i64 - m as i64))) {
            return Err(Error::WrongFamily("not an F_q transport".into()));
        }
    }
    let u = f.g.kernel_gen(ctx);
    if !ctx.on_line(lambda_m, f.lin.eval(ctx, u)) {
        return Err(Error::WrongFamily("kernel not aligned with span(λ^m)".into()));
    }
    let v0 = f.g.v0(ctx);
    let big_m = f.lin.inverse_rank2(ctx)?;
    let dj = delta_killing(ctx, lambda_m)?;
    if !s_apply(ctx, dj, lambda_m).is_zero() {
        return Err(Error::LambdaPowerNotInKernel);
    }
    let v1 = ctx.div(s_apply(ctx, f.g.delta(), v0), lambda)?;
    let v2 = s_apply(ctx, dj, f.lin.eval(ctx, v0));
    debug_assert!(!v2.is_zero());
    let m_lm = big_m.eval(ctx, lambda_m);
    let mut coeffs = Vec::new();
    for i in f.g.support() {
        let ai = ctx.mul(f.g.coeff(i), ctx.pow(lambda, i as i64 - m as i64));
        // M(λ^m·v1^i) = v1^i·M(λ^m) since v1 ∈ F_q
        let rhs = ctx.neg(ctx.mul(ai, ctx.mul(ctx.pow(v1, i as i64), m_lm)));
        coeffs.push((i, ctx.div(rhs, ctx.pow(v2, i as i64))?));
    }
    let h = SForm::new(ctx, dj, coeffs, big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::TraceSPoly))
}

/// Compositional inverse of a base-field permutation, by interpolation.
pub fn base_inverse(ctx: &FieldCtx, phi: &BasePoly) -> Result<BasePoly> {
    lagrange_inverse(ctx, phi)
}

/// Inverse of a lifted base permutation λ^m·ĝ(λ^{-1}s) + L where the rank-2
/// L is not kernel aligned: with φ = ĝ + γx (γ = 1/z, z = λ^{-1}s(v),
/// v = L^{-1}(λ^m)) and ψ = φ^{-1} = Σ b_i x^i, take M with M(L(u)) = u,
/// M(λ^m) = γ·b_1·v, and g1 coefficients c_i = γ·b_i·v / s_j(λ^m)^i.
pub fn invert_from_perm_lift(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if f.family != Family::Rank2FromBasePP || f.lin.rank() != 2 {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let m = f.g.m();
    let lambda = canonical_lambda(ctx, f.g.delta())?;
    let lambda_m = ctx.pow(lambda, m as i64);
    let mut base = vec![Elt::ZERO; m + 1];
    base[m] = Elt::ONE;
    for (&i, &c) in f.g.coeffs() {
        let a = ctx.mul(c, ctx.pow(lambda, i as i64 - m as i64));
        if !ctx.in_subfield(a) {
            return Err(Error::WrongFamily("not an F_q lift".into()));
        }
        base[i] = a;
    }
    let g_base = BasePoly::new(ctx, base)?;
    let u = f.g.kernel_gen(ctx);
    let lu = f.lin.eval(ctx, u);
    if ctx.on_line(lambda_m, lu) {
        return Err(Error::WrongFamily("kernel aligned".into()));
    }
    let v = f.lin.inverse_rank2(ctx)?.eval(ctx, lambda_m);
    let z = ctx.div(s_apply(ctx, f.g.delta(), v), lambda)?;
    debug_assert!(ctx.in_subfield(z) && !z.is_zero());
    let gamma = ctx.inv(z)?;
    let phi = g_base.with_linear(ctx, gamma)?;
    if !phi.is_permutation(ctx) {
        return Err(Error::BaseNotPermutation);
    }
    let psi = lagrange_inverse(ctx, &phi)?;
    let b1 = psi.coeff(1);
    let big_m = LinPoly::from_basis_action(ctx, lu, u, lambda_m, ctx.mul(ctx.mul(gamma, b1), v));
    let dj = delta_killing(ctx, lu)?;
    let sj_lm = s_apply(ctx, dj, lambda_m);
    debug_assert!(!sj_lm.is_zero());
    let gv = ctx.mul(gamma, v);
    let mut coeffs = Vec::new();
    for i in 2..=psi.degree() {
        let bi = psi.coeff(i);
        if bi.is_zero() {
            continue;
        }
        coeffs.push((i, ctx.div(ctx.mul(gv, bi), ctx.pow(sj_lm, i as i64))?));
    }
    let h = SForm::new(ctx, dj, coeffs, big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::FromPermLift))
}

/// Inverse of a lifted base permutation with rank-1 L: h = κ·ψ(η·s_j) + M
/// with ψ = ĝ^{-1}, η = 1/s_j(λ^m), M rank-1 killing λ^m with M(L(u)) = u,
/// and κ = z^{-1}·v for v spanning ker L, z = λ^{-1}s(v).
pub fn invert_rank1_spoly(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    if f.family != Family::SPolyRank1 || f.lin.rank() != 1 {
        return Err(Error::WrongFamily(f.family.as_str().into()));
    }
    let m = f.g.m();
    let lambda = canonical_lambda(ctx, f.g.delta())?;
    let lambda_m = ctx.pow(lambda, m as i64);
    let mut base = vec![Elt::ZERO; m + 1];
    base[m] = Elt::ONE;
    for (&i, &c) in f.g.coeffs() {
        let a = ctx.mul(c, ctx.pow(lambda, i as i64 - m as i64));
        if !ctx.in_subfield(a) {
            return Err(Error::WrongFamily("not an F_q lift".into()));
        }
        base[i] = a;
    }
    let g_base = BasePoly::new(ctx, base)?;
    let psi = lagrange_inverse(ctx, &g_base).map_err(|_| Error::BaseNotPermutation)?;
    let u = f.g.kernel_gen(ctx);
    let v = f.lin.kernel_basis(ctx)[0];
    let z = ctx.div(s_apply(ctx, f.g.delta(), v), lambda)?;
    debug_assert!(ctx.in_subfield(z) && !z.is_zero());
    let lu = f.lin.eval(ctx, u);
    let dj = delta_killing(ctx, lu)?;
    let eta = ctx.inv(s_apply(ctx, dj, lambda_m))?;
    let m0 = rank1_with_kernel(ctx, lambda_m)?;
    let big_m = m0.scale(ctx, ctx.div(u, m0.eval(ctx, lu))?);
    let kappa = ctx.mul(ctx.inv(z)?, v);
    let mut coeffs = Vec::new();
    for i in 1..=psi.degree() {
        let bi = psi.coeff(i);
        if bi.is_zero() {
            continue;
        }
        coeffs.push((i, ctx.mul(kappa, ctx.mul(bi, ctx.pow(eta, i as i64)))));
    }
    let h = SForm::new(ctx, dj, coeffs, big_m)?;
    Ok(finish(ctx, f, h, InverseMethod::Rank1SPoly))
}

/// Table-transpose fallback for shapes none of the closed recipes cover.
pub fn invert_generic(ctx: &FieldCtx, f: impl Fn(Elt) -> Elt) -> Result<InverseCert> {
    let mut table = vec![Elt::ZERO; ctx.q2() as usize];
    let mut seen = vec![false; ctx.q2() as usize];
    for x in ctx.elements() {
        let y = f(x);
        if seen[y.index() as usize] {
            return Err(Error::NotAPermutation);
        }
        seen[y.index() as usize] = true;
        table[y.index() as usize] = x;
    }
    Ok(InverseCert {
        form: InverseForm::Table(table),
        method: InverseMethod::Generic,
        verified: true,
    })
}

/// Dispatches on the family tag. General-tagged forms are first re-attributed
/// so covered shapes get their closed inverse; everything else falls back to
/// the table transpose.
pub fn invert(ctx: &FieldCtx, f: &PPForm) -> Result<InverseCert> {
    match f.family {
        Family::Rank2KernelAligned => invert_rank2_aligned(ctx, f),
        Family::Rank1Coprime => invert_rank1_coprime(ctx, f),
        Family::Rank2FromBasePP => {
            if f.g.is_monomial() && ctx.p() != 2 && f.g.m() == (ctx.q() as usize + 1) / 2 {
                invert_half_index(ctx, f)
            } else {
                invert_from_perm_lift(ctx, f)
            }
        }
        Family::TraceSPoly => invert_trace_spoly(ctx, f),
        Family::SPolyTransported => invert_transported_spoly(ctx, f),
        Family::SPolyRank1 => invert_rank1_spoly(ctx, f),
        Family::GeneralRank1 | Family::GeneralRank2 => {
            match attribute(ctx, &f.g, &f.lin) {
                Some(fam)
                    if fam != Family::GeneralRank1 && fam != Family::GeneralRank2 =>
                {
                    let upgraded = PPForm {
                        g: f.g.clone(),
                        lin: f.lin,
                        family: fam,
                        certificate: f.certificate.clone(),
                    };
                    invert(ctx, &upgraded)
                }
                _ => invert_generic(ctx, |x| f.eval(ctx, x)),
            }
        }
    }
}

/// Splits a closed form h into lead·(g(s) + L) with g monic and normalized:
/// any s^1 term is folded into the linearized part first. Returns the
/// leading coefficient and the normalized pair.
pub fn normalize_closed(ctx: &FieldCtx, h: &SForm) -> Result<(Elt, SPoly, LinPoly)> {
    let (&deg, &lead) = h
        .coeffs()
        .iter()
        .next_back()
        .ok_or_else(|| Error::Malformed("form has no s-part".into()))?;
    if deg < 2 {
        return Err(Error::Malformed("form degenerates to a linear map".into()));
    }
    let inv_lead = ctx.inv(lead)?;
    let mut g_coeffs = Vec::new();
    let mut lin = LinPoly::new(
        ctx,
        ctx.mul(h.lin.a1(), inv_lead),
        ctx.mul(h.lin.a0(), inv_lead),
    );
    for (&i, &c) in h.coeffs() {
        if i == deg {
            continue;
        }
        let scaled = ctx.mul(c, inv_lead);
        if i == 1 {
            lin = lin.add(ctx, &LinPoly::new(ctx, scaled, ctx.mul(scaled, h.delta())));
        } else {
            g_coeffs.push((i, scaled));
        }
    }
    let g = SPoly::new(ctx, h.delta(), deg, g_coeffs)?;
    Ok((lead, g, lin))
}

/// Inverse of an inverse: normalizes a closed form back to a monic g(s)+L,
/// re-attributes it, inverts that, and pre-composes with the scale; tables
/// are transposed directly. Verified against the input form.
pub fn invert_cert(ctx: &FieldCtx, cert: &InverseCert) -> Result<InverseCert> {
    let out = match &cert.form {
        InverseForm::Table(t) => {
            let mut back = vec![Elt::ZERO; t.len()];
            for (x, y) in t.iter().enumerate() {
                back[y.index() as usize] = Elt(x as u32);
            }
            InverseCert {
                form: InverseForm::Table(back),
                method: InverseMethod::Generic,
                verified: true,
            }
        }
        InverseForm::Closed(h) => {
            let (lead, g, lin) = normalize_closed(ctx, h)?;
            let inv_lead = ctx.inv(lead)?;
            let family = attribute(ctx, &g, &lin).ok_or_else(|| {
                Error::CheckFailed("normalized inverse fits no family".into())
            })?;
            let normalized = PPForm {
                g,
                lin,
                family,
                certificate: "normalized from an inverse form".into(),
            };
            let inner = invert(ctx, &normalized)?;
            match inner.form {
                InverseForm::Closed(s) => {
                    // inverse of h = lead·normalized is x ↦ inner(x/lead)
                    let form = s.precompose_scale(ctx, inv_lead)?;
                    InverseCert {
                        form: InverseForm::Closed(form),
                        method: inner.method,
                        verified: false,
                    }
                }
                InverseForm::Table(t) => {
                    let table: Vec<Elt> = ctx
                        .elements()
                        .map(|x| t[ctx.mul(inv_lead, x).index() as usize])
                        .collect();
                    InverseCert {
                        form: InverseForm::Table(table),
                        method: InverseMethod::Generic,
                        verified: false,
                    }
                }
            }
        }
    };
    let verified = check_inverse(ctx, |x| cert.eval(ctx, x), |x| out.eval(ctx, x));
    Ok(InverseCert { verified, ..out })
}
