//! Constructors for every parametric family of normalized permutation
//! polynomials g(s) + L(x) of F_{q^2}, the complete-set enumerators used for
//! counting, and attribution of an arbitrary (g, L) hit to the family whose
//! condition certifies it.

use crate::basepoly::BasePoly;
use crate::error::{Error, Result};
use crate::fields::{Elt, FieldCtx};
use crate::linearized::{first_outside_kernel, LinPoly};
use crate::spoly::{canonical_lambda, g_set, h_set, EligibleLine, SPoly};
use std::collections::HashSet;

/// The theorem family that certifies a constructed permutation polynomial.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Family {
    Rank2KernelAligned,
    Rank1Coprime,
    Rank2FromBasePP,
    TraceSPoly,
    SPolyTransported,
    SPolyRank1,
    GeneralRank1,
    GeneralRank2,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Rank2KernelAligned,
        Family::Rank1Coprime,
        Family::Rank2FromBasePP,
        Family::TraceSPoly,
        Family::SPolyTransported,
        Family::SPolyRank1,
        Family::GeneralRank1,
        Family::GeneralRank2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Rank2KernelAligned => "Rank2KernelAligned",
            Family::Rank1Coprime => "Rank1Coprime",
            Family::Rank2FromBasePP => "Rank2FromBasePP",
            Family::TraceSPoly => "TraceSPoly",
            Family::SPolyTransported => "SPolyTransported",
            Family::SPolyRank1 => "SPolyRank1",
            Family::GeneralRank1 => "GeneralRank1",
            Family::GeneralRank2 => "GeneralRank2",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// A certified normalized permutation polynomial f(x) = g(s(x)) + L(x).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PPForm {
    pub g: SPoly,
    pub lin: LinPoly,
    pub family: Family,
    /// Human-readable record of the condition that was checked.
    pub certificate: String,
}

impl PPForm {
    #[inline]
    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        ctx.add(self.g.eval(ctx, x), self.lin.eval(ctx, x))
    }

    /// The (g, L) pair, which is what identifies the polynomial.
    pub fn key(&self) -> (SPoly, LinPoly) {
        (self.g.clone(), self.lin)
    }
}

/// γ ∈ F_q^* such that x^m + γx permutes F_q.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BaseBinomial {
    pub m: usize,
    pub gamma: Elt,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_m(ctx: &FieldCtx, m: usize) -> Result<()> {
    if m < 2 || m > ctx.q() as usize - 1 {
        return Err(Error::IndexOutOfRange(m as u64));
    }
    Ok(())
}

fn subfield_unit(ctx: &FieldCtx, x: Elt) -> Result<()> {
    if x.is_zero() || !ctx.in_subfield(x) {
        return Err(Error::Malformed(format!(
            "{:?} is not a nonzero element of F_q",
            x
        )));
    }
    Ok(())
}

// ----------------------------------------------------------------------
// rank-2, kernel aligned: s^m plus L mapping ker s into the image line
// ----------------------------------------------------------------------

/// Builds s^m + L where the rank-2 L sends the kernel generator u of s to
/// γ·z (z = s(v0)^m spans the image line of s^m) and v0 to `lv`, which must
/// lie off that line. There are q(q-1)^2 such polynomials per (δ, m).
pub fn construct_rank2_kernel_aligned(
    ctx: &FieldCtx,
    delta: Elt,
    m: usize,
    gamma: Elt,
    lv: Elt,
) -> Result<PPForm> {
    check_m(ctx, m)?;
    let g = SPoly::monomial(ctx, delta, m)?;
    let u = g.kernel_gen(ctx);
    let v0 = g.v0(ctx);
    let z = ctx.pow(g.image_point(ctx), m as i64);
    subfield_unit(ctx, gamma).map_err(|_| Error::RankCollapse)?;
    if ctx.on_line(z, lv) {
        return Err(Error::RankCollapse);
    }
    let lin = LinPoly::from_basis_action(ctx, u, ctx.mul(gamma, z), v0, lv);
    debug_assert_eq!(lin.rank(), 2);
    Ok(PPForm {
        g,
        lin,
        family: Family::Rank2KernelAligned,
        certificate: format!("L(u) = {:?}·s(v0)^{m} lies on the image line of s^{m}", gamma),
    })
}

/// The full kernel-aligned family for one (δ, m), in (γ, L(v0)) order.
pub fn complete_rank2_kernel_aligned(ctx: &FieldCtx, delta: Elt, m: usize) -> Result<Vec<PPForm>> {
    check_m(ctx, m)?;
    let g = SPoly::monomial(ctx, delta, m)?;
    let z = ctx.pow(g.image_point(ctx), m as i64);
    let mut out = Vec::with_capacity((ctx.q() * (ctx.q() - 1) * (ctx.q() - 1)) as usize);
    for gi in 1..ctx.q() {
        for lv in ctx.elements() {
            if ctx.on_line(z, lv) {
                continue;
            }
            out.push(construct_rank2_kernel_aligned(ctx, delta, m, Elt(gi), lv)?);
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// rank-1: s^m plus a rank-1 L, with gcd(m, q-1) = 1
// ----------------------------------------------------------------------

/// Builds s^m + α(x^q + δ_j x) with rank-1 L. Requires gcd(m, q-1) = 1,
/// δ_j ≠ δ_i (distinct kernels) and an α whose image line differs from the
/// image line of s^m. There are q^2(q-1) such polynomials per (δ_i, m).
pub fn construct_rank1(
    ctx: &FieldCtx,
    delta_i: Elt,
    m: usize,
    delta_j: Elt,
    alpha: Elt,
) -> Result<PPForm> {
    check_m(ctx, m)?;
    if gcd(m as u64, ctx.q() as u64 - 1) != 1 {
        return Err(Error::NotCoprime(m));
    }
    let g = SPoly::monomial(ctx, delta_i, m)?;
    if !ctx.is_unit_norm(delta_j) {
        return Err(Error::InvalidDelta);
    }
    if delta_j == delta_i {
        return Err(Error::SameKernel);
    }
    if alpha.is_zero() {
        return Err(Error::RankCollapse);
    }
    let z = ctx.pow(g.image_point(ctx), m as i64);
    let wj = rank1_image_gen(ctx, delta_j);
    if ctx.on_line(z, ctx.mul(alpha, wj)) {
        return Err(Error::ImageClash);
    }
    let lin = LinPoly::new(ctx, alpha, ctx.mul(alpha, delta_j));
    debug_assert_eq!(lin.rank(), 1);
    Ok(PPForm {
        g,
        lin,
        family: Family::Rank1Coprime,
        certificate: format!(
            "gcd({m}, q-1) = 1, ker L = ker(x^q + {:?}x) != ker s, im L != im s^{m}",
            delta_j
        ),
    })
}

/// The full rank-1 family for one (δ_i, m), ordered by (δ_j, α).
pub fn complete_rank1(ctx: &FieldCtx, delta_i: Elt, m: usize) -> Result<Vec<PPForm>> {
    check_m(ctx, m)?;
    if gcd(m as u64, ctx.q() as u64 - 1) != 1 {
        return Err(Error::NotCoprime(m));
    }
    let mut out = Vec::with_capacity((ctx.q() * ctx.q() * (ctx.q() - 1)) as usize);
    for &dj in ctx.deltas() {
        if dj == delta_i {
            continue;
        }
        for alpha in ctx.nonzero_elements() {
            match construct_rank1(ctx, delta_i, m, dj, alpha) {
                Ok(pp) => out.push(pp),
                Err(Error::ImageClash) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Generator of im(x^q + δx) for unit-norm δ.
pub fn rank1_image_gen(ctx: &FieldCtx, delta: Elt) -> Elt {
    let v0 = first_outside_kernel(ctx, delta);
    ctx.add(ctx.frobenius(v0), ctx.mul(delta, v0))
}

// ----------------------------------------------------------------------
// base-field binomials and the Carlitz construction
// ----------------------------------------------------------------------

/// All γ ∈ F_q^* making x^m + γx a permutation of F_q, by brute force.
pub fn base_binomials(ctx: &FieldCtx, m: usize) -> Result<Vec<BaseBinomial>> {
    if m < 2 || m >= ctx.q() as usize {
        return Err(Error::IndexOutOfRange(m as u64));
    }
    let mut out = Vec::new();
    for gi in 1..ctx.q() {
        let gamma = Elt(gi);
        if BasePoly::binomial(ctx, m, gamma)?.is_permutation(ctx) {
            out.push(BaseBinomial { m, gamma });
        }
    }
    Ok(out)
}

/// γ = (c^2+1)/(c^2-1) over all c with c^2 ∉ {0, ±1}: the witnesses that
/// make x^{(q+1)/2} + γx permute F_q for odd q ≥ 7. Deduplicated, ascending.
/// The count is (q-3)/2 when q ≡ 3 (mod 4) and (q-5)/2 when q ≡ 1 (mod 4).
pub fn carlitz_gammas(ctx: &FieldCtx) -> Result<Vec<Elt>> {
    if ctx.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if ctx.q() < 7 {
        return Err(Error::FieldTooSmall(ctx.q()));
    }
    let one = ctx.one();
    let minus_one = ctx.neg(one);
    let mut set = std::collections::BTreeSet::new();
    for c in ctx.subfield_elements() {
        let c2 = ctx.mul(c, c);
        if c2.is_zero() || c2 == one || c2 == minus_one {
            continue;
        }
        let gamma = ctx.div(ctx.add(c2, one), ctx.sub(c2, one))?;
        set.insert(gamma);
    }
    Ok(set.into_iter().collect())
}

// ----------------------------------------------------------------------
// rank-2 from base-field permutations (kernel NOT aligned)
// ----------------------------------------------------------------------

fn check_lift_shape(g_base: &BasePoly, ctx: &FieldCtx) -> Result<()> {
    if !g_base.is_lift_shape() || g_base.degree() >= ctx.q() as usize {
        return Err(Error::Malformed(
            "base polynomial must be monic of degree 2..q with no constant or linear term".into(),
        ));
    }
    Ok(())
}

/// Lifts a base-field permutation g(x) + γx to F_{q^2}: the carried
/// s-polynomial is s^m + Σ λ^{m-i} a_i s^i for the canonical λ ∈ im s, and L
/// is the rank-2 map with L(u) = `lu_choice` off the line of λ^m and
/// L(v0) = γ·λ^m·z̄ - b̂·L(u), where z̄ = λ^{-1}s(v0) and b̂ = `b_choice` ∈ F_q
/// selects the basis vector b = b̂u + v0 with L(b) in the image line. There
/// are k·q^2(q-1) such polynomials per (δ, g) when k witnesses γ exist.
pub fn construct_rank2_from_base_pp(
    ctx: &FieldCtx,
    delta: Elt,
    g_base: &BasePoly,
    gamma: Elt,
    b_choice: Elt,
    lu_choice: Elt,
) -> Result<PPForm> {
    check_lift_shape(g_base, ctx)?;
    let m = g_base.degree();
    check_m(ctx, m)?;
    subfield_unit(ctx, gamma)
        .map_err(|_| Error::NotAPermutationWitness(format!("{gamma:?}")))?;
    if !g_base.with_linear(ctx, gamma)?.is_permutation(ctx) {
        return Err(Error::NotAPermutationWitness(format!(
            "x^{m} shape with gamma {:?}",
            gamma
        )));
    }
    if !ctx.in_subfield(b_choice) {
        return Err(Error::Malformed("b_choice must lie in F_q".into()));
    }
    let lambda = canonical_lambda(ctx, delta)?;
    let lambda_m = ctx.pow(lambda, m as i64);
    if ctx.on_line(lambda_m, lu_choice) {
        return Err(Error::RankCollapse);
    }
    let g = transported_spoly(ctx, g_base, delta, lambda)?;
    let u = g.kernel_gen(ctx);
    let v0 = g.v0(ctx);
    let zbar = ctx.div(g.eval_s(ctx, v0), lambda)?;
    let lv = ctx.sub(
        ctx.mul(ctx.mul(gamma, lambda_m), zbar),
        ctx.mul(b_choice, lu_choice),
    );
    let lin = LinPoly::from_basis_action(ctx, u, lu_choice, v0, lv);
    debug_assert_eq!(lin.rank(), 2);
    Ok(PPForm {
        g,
        lin,
        family: Family::Rank2FromBasePP,
        certificate: format!(
            "g + {:?}x permutes F_q and L(u) avoids the image line of g(s)",
            gamma
        ),
    })
}

/// The full misaligned rank-2 family for one (δ, g): every witness γ, every
/// b̂ ∈ F_q, every L(u) off the image line.
pub fn complete_rank2_from_base_pp(
    ctx: &FieldCtx,
    delta: Elt,
    g_base: &BasePoly,
) -> Result<Vec<PPForm>> {
    check_lift_shape(g_base, ctx)?;
    let m = g_base.degree();
    check_m(ctx, m)?;
    let lambda = canonical_lambda(ctx, delta)?;
    let lambda_m = ctx.pow(lambda, m as i64);
    let witnesses: Vec<Elt> = (1..ctx.q())
        .map(Elt)
        .filter(|&g0| {
            g_base
                .with_linear(ctx, g0)
                .map(|p| p.is_permutation(ctx))
                .unwrap_or(false)
        })
        .collect();
    let mut out = Vec::new();
    for &gamma in &witnesses {
        for b in 0..ctx.q() {
            for lu in ctx.elements() {
                if ctx.on_line(lambda_m, lu) {
                    continue;
                }
                out.push(construct_rank2_from_base_pp(
                    ctx,
                    delta,
                    g_base,
                    gamma,
                    Elt(b),
                    lu,
                )?);
            }
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// s-polynomials on the trace and their transports
// ----------------------------------------------------------------------

/// For g with coefficients in F_q on the trace s = x^q + x: any rank-2 L
/// sending ker s into F_q forms a permutation. L(u) = γ ∈ F_q^*,
/// L(v0) = `lv` ∉ F_q. At least q(q-1)^2 polynomials per g.
pub fn construct_trace_spoly(ctx: &FieldCtx, g: &SPoly, gamma: Elt, lv: Elt) -> Result<PPForm> {
    if g.delta() != ctx.one() {
        return Err(Error::Malformed("trace construction needs s = x^q + x".into()));
    }
    if g.coeffs().values().any(|c| !ctx.in_subfield(*c)) {
        return Err(Error::CoefficientNotInSubfield);
    }
    subfield_unit(ctx, gamma)?;
    if ctx.in_subfield(lv) {
        return Err(Error::RankCollapse);
    }
    let u = g.kernel_gen(ctx);
    let v0 = g.v0(ctx);
    let lin = LinPoly::from_basis_action(ctx, u, gamma, v0, lv);
    debug_assert_eq!(lin.rank(), 2);
    Ok(PPForm {
        g: g.clone(),
        lin,
        family: Family::TraceSPoly,
        certificate: format!("L(ker s) = {:?}·F_q ⊆ F_q, L(v0) outside F_q", gamma),
    })
}

/// The full trace-aligned family for one g.
pub fn complete_trace_spoly(ctx: &FieldCtx, g: &SPoly) -> Result<Vec<PPForm>> {
    let mut out = Vec::with_capacity((ctx.q() * (ctx.q() - 1) * (ctx.q() - 1)) as usize);
    for gi in 1..ctx.q() {
        for lv in ctx.elements() {
            if ctx.in_subfield(lv) {
                continue;
            }
            out.push(construct_trace_spoly(ctx, g, Elt(gi), lv)?);
        }
    }
    Ok(out)
}

/// Carries an s-polynomial with F_q coefficients from any s to
/// s = x^q + δ_i x: the coefficients become λ^{m-i}·a_i for a chosen nonzero
/// λ in the image of the new s.
pub fn transport_spoly(ctx: &FieldCtx, g: &SPoly, delta_i: Elt, lambda: Elt) -> Result<SPoly> {
    if g.coeffs().values().any(|c| !ctx.in_subfield(*c)) {
        return Err(Error::CoefficientNotInSubfield);
    }
    if !ctx.is_unit_norm(delta_i) {
        return Err(Error::InvalidDelta);
    }
    let img = rank1_image_gen(ctx, delta_i);
    if lambda.is_zero() || !ctx.on_line(img, lambda) {
        return Err(Error::LambdaNotInImage);
    }
    let m = g.m();
    let coeffs: Vec<(usize, Elt)> = g
        .coeffs()
        .iter()
        .map(|(&i, &a)| (i, ctx.mul(ctx.pow(lambda, (m - i) as i64), a)))
        .collect();
    SPoly::new(ctx, delta_i, m, coeffs)
}

fn transported_spoly(ctx: &FieldCtx, g_base: &BasePoly, delta: Elt, lambda: Elt) -> Result<SPoly> {
    let m = g_base.degree();
    let coeffs: Vec<(usize, Elt)> = (2..m)
        .filter(|&i| !g_base.coeff(i).is_zero())
        .map(|i| (i, ctx.mul(ctx.pow(lambda, (m - i) as i64), g_base.coeff(i))))
        .collect();
    SPoly::new(ctx, delta, m, coeffs)
}

/// Kernel-aligned rank-2 partner for a transported s-polynomial: L(u) = γ·λ^m
/// with γ ∈ F_q^*, L(v0) = `lv` off the line of λ^m.
pub fn construct_transported_aligned(
    ctx: &FieldCtx,
    g_base: &BasePoly,
    delta: Elt,
    lambda: Elt,
    gamma: Elt,
    lv: Elt,
) -> Result<PPForm> {
    check_lift_shape(g_base, ctx)?;
    let img = rank1_image_gen(ctx, delta);
    if lambda.is_zero() || !ctx.on_line(img, lambda) {
        return Err(Error::LambdaNotInImage);
    }
    subfield_unit(ctx, gamma)?;
    let m = g_base.degree();
    check_m(ctx, m)?;
    let lambda_m = ctx.pow(lambda, m as i64);
    if ctx.on_line(lambda_m, lv) {
        return Err(Error::RankCollapse);
    }
    let g = transported_spoly(ctx, g_base, delta, lambda)?;
    let u = g.kernel_gen(ctx);
    let v0 = g.v0(ctx);
    let lin = LinPoly::from_basis_action(ctx, u, ctx.mul(gamma, lambda_m), v0, lv);
    debug_assert_eq!(lin.rank(), 2);
    Ok(PPForm {
        g,
        lin,
        family: Family::SPolyTransported,
        certificate: format!("L(ker s) ⊆ span(λ^{m}), γ = {:?}", gamma),
    })
}

// ----------------------------------------------------------------------
// rank-1 partners for s-polynomials built from base-field permutations
// ----------------------------------------------------------------------

/// For a base-field permutation g of the lift shape carried to δ_i by λ: the
/// rank-1 maps L = η(x^q + δ_j x) with δ_j ≠ δ_i and image off the line of
/// λ^m give q^2(q-1) permutations g(s) + L per (g, δ_i).
pub fn construct_rank1_spoly(
    ctx: &FieldCtx,
    g_base: &BasePoly,
    delta_i: Elt,
    lambda: Elt,
    delta_j: Elt,
    eta: Elt,
) -> Result<PPForm> {
    check_lift_shape(g_base, ctx)?;
    if !g_base.is_permutation(ctx) {
        return Err(Error::BaseNotPermutation);
    }
    let img = rank1_image_gen(ctx, delta_i);
    if lambda.is_zero() || !ctx.on_line(img, lambda) {
        return Err(Error::LambdaNotInImage);
    }
    if !ctx.is_unit_norm(delta_j) {
        return Err(Error::InvalidDelta);
    }
    if delta_j == delta_i {
        return Err(Error::SameKernel);
    }
    if eta.is_zero() {
        return Err(Error::RankCollapse);
    }
    let m = g_base.degree();
    check_m(ctx, m)?;
    let lambda_m = ctx.pow(lambda, m as i64);
    let wj = rank1_image_gen(ctx, delta_j);
    if ctx.on_line(lambda_m, ctx.mul(eta, wj)) {
        return Err(Error::ImageClash);
    }
    let g = transported_spoly(ctx, g_base, delta_i, lambda)?;
    let lin = LinPoly::new(ctx, eta, ctx.mul(eta, delta_j));
    debug_assert_eq!(lin.rank(), 1);
    Ok(PPForm {
        g,
        lin,
        family: Family::SPolyRank1,
        certificate: format!(
            "base shape permutes F_q; ker L != ker s; im L off span(λ^{m})"
        ),
    })
}

/// The full rank-1 family for one (g, δ_i) with the canonical λ.
pub fn complete_rank1_spoly(ctx: &FieldCtx, g_base: &BasePoly, delta_i: Elt) -> Result<Vec<PPForm>> {
    let lambda = canonical_lambda(ctx, delta_i)?;
    let mut out = Vec::new();
    for &dj in ctx.deltas() {
        if dj == delta_i {
            continue;
        }
        for eta in ctx.nonzero_elements() {
            match construct_rank1_spoly(ctx, g_base, delta_i, lambda, dj, eta) {
                Ok(pp) => out.push(pp),
                Err(Error::ImageClash) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// the general constructions from eligibility lines
// ----------------------------------------------------------------------

/// Builds g(s) + L from an eligible line.
///
/// For a subspace line: `p1` is δ_j (≠ δ of s) and `p2` a scalar c ∈ F_q^*;
/// L = η(x^q + δ_j x) with η chosen so im L = c-th alignment of the line.
/// For an affine line: `p1` = k_u ∈ F_q^* sets L(u) = k_u·direction and
/// `p2` = k_v ∈ F_q sets L(v0) = offset + k_v·direction.
pub fn construct_general(
    ctx: &FieldCtx,
    g: &SPoly,
    line: &EligibleLine,
    p1: Elt,
    p2: Elt,
) -> Result<PPForm> {
    if line.is_subspace() {
        let gs = g_set(ctx, g);
        let eligible = !gs.contains(&Elt::ZERO)
            && (1..ctx.q()).all(|a| !gs.contains(&ctx.mul(Elt(a), line.direction())));
        if !eligible {
            return Err(Error::IneligibleLine);
        }
        let delta_j = p1;
        if !ctx.is_unit_norm(delta_j) {
            return Err(Error::InvalidDelta);
        }
        if delta_j == g.delta() {
            return Err(Error::SameKernel);
        }
        subfield_unit(ctx, p2)?;
        let wj = rank1_image_gen(ctx, delta_j);
        let eta = ctx.div(ctx.mul(p2, line.direction()), wj)?;
        let lin = LinPoly::new(ctx, eta, ctx.mul(eta, delta_j));
        debug_assert_eq!(lin.rank(), 1);
        Ok(PPForm {
            g: g.clone(),
            lin,
            family: Family::GeneralRank1,
            certificate: format!("difference set avoids span({:?})", line.direction()),
        })
    } else {
        let hs = h_set(ctx, g);
        let eligible = (0..ctx.q())
            .all(|a| !hs.contains(&ctx.add(line.offset(), ctx.mul(Elt(a), line.direction()))));
        if !eligible {
            return Err(Error::IneligibleLine);
        }
        subfield_unit(ctx, p1)?;
        if !ctx.in_subfield(p2) {
            return Err(Error::Malformed("affine choice must lie in F_q".into()));
        }
        let u = g.kernel_gen(ctx);
        let v0 = g.v0(ctx);
        let lu = ctx.mul(p1, line.direction());
        let lv = ctx.add(line.offset(), ctx.mul(p2, line.direction()));
        let lin = LinPoly::from_basis_action(ctx, u, lu, v0, lv);
        debug_assert_eq!(lin.rank(), 2);
        Ok(PPForm {
            g: g.clone(),
            lin,
            family: Family::GeneralRank2,
            certificate: format!(
                "quotient set avoids {:?} + span({:?})",
                line.offset(),
                line.direction()
            ),
        })
    }
}

/// All q(q-1) permutation polynomials attached to one eligible line.
pub fn complete_general(ctx: &FieldCtx, g: &SPoly, line: &EligibleLine) -> Result<Vec<PPForm>> {
    let mut out = Vec::with_capacity((ctx.q() * (ctx.q() - 1)) as usize);
    if line.is_subspace() {
        for &dj in ctx.deltas() {
            if dj == g.delta() {
                continue;
            }
            for c in 1..ctx.q() {
                out.push(construct_general(ctx, g, line, dj, Elt(c))?);
            }
        }
    } else {
        for ku in 1..ctx.q() {
            for kv in 0..ctx.q() {
                out.push(construct_general(ctx, g, line, Elt(ku), Elt(kv))?);
            }
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// attribution: which family explains an arbitrary (g, L) hit
// ----------------------------------------------------------------------

/// Precomputed view of one shape g, reused when attributing many hits.
pub struct ShapeInfo {
    g: SPoly,
    u: Elt,
    v0: Elt,
    lambda_m: Elt,
    zbar0: Elt,
    /// F_q-decomposition g = λ^m·ĝ(λ^{-1}s) through the canonical λ, when it
    /// exists (always for monomials).
    base: Option<BasePoly>,
    base_is_pp: bool,
    /// γ ∈ F_q^* with ĝ + γx a permutation of F_q.
    witnesses: HashSet<Elt>,
    /// Canonical direction of the line containing im g(s), if there is one.
    img_line: Option<Elt>,
    gset: HashSet<Elt>,
    hset: HashSet<Elt>,
}

impl ShapeInfo {
    pub fn new(ctx: &FieldCtx, g: &SPoly) -> ShapeInfo {
        let u = g.kernel_gen(ctx);
        let v0 = g.v0(ctx);
        let lambda = canonical_lambda(ctx, g.delta()).expect("delta validated at construction");
        let m = g.m();
        let lambda_m = ctx.pow(lambda, m as i64);
        let zbar0 = ctx
            .div(g.eval_s(ctx, v0), lambda)
            .expect("lambda is nonzero");
        debug_assert!(ctx.in_subfield(zbar0));

        let base = decompose_base(ctx, g, lambda);
        let base_is_pp = base.as_ref().map(|b| b.is_permutation(ctx)).unwrap_or(false);
        let witnesses: HashSet<Elt> = match &base {
            Some(b) => (1..ctx.q())
                .map(Elt)
                .filter(|&g0| {
                    b.with_linear(ctx, g0)
                        .map(|p| p.is_permutation(ctx))
                        .unwrap_or(false)
                })
                .collect(),
            None => HashSet::new(),
        };

        let img_line = if base.is_some() {
            Some(ctx.line_rep(lambda_m))
        } else {
            image_line_of(ctx, g)
        };

        ShapeInfo {
            g: g.clone(),
            u,
            v0,
            lambda_m,
            zbar0,
            base,
            base_is_pp,
            witnesses,
            img_line,
            gset: g_set(ctx, g),
            hset: h_set(ctx, g),
        }
    }

    pub fn base(&self) -> Option<&BasePoly> {
        self.base.as_ref()
    }

    pub fn witnesses(&self) -> &HashSet<Elt> {
        &self.witnesses
    }

    /// The family whose certifying condition the pair (g, L) satisfies, or
    /// `None` when even the general eligibility criteria reject it (such a
    /// permutation hit would be unexplained).
    pub fn attribute(&self, ctx: &FieldCtx, lin: &LinPoly) -> Option<Family> {
        match lin.rank() {
            1 => self.attribute_rank1(ctx, lin),
            2 => self.attribute_rank2(ctx, lin),
            _ => None,
        }
    }

    fn attribute_rank1(&self, ctx: &FieldCtx, lin: &LinPoly) -> Option<Family> {
        // same kernel as s can never permute
        let delta_eff = ctx.div(lin.a0(), lin.a1()).expect("rank-1 has a1 != 0");
        if delta_eff == self.g.delta() {
            return None;
        }
        let im_gen = lin.eval(ctx, self.u);
        debug_assert!(!im_gen.is_zero());
        let line = ctx.line_rep(im_gen);

        if self.base_is_pp && self.img_line != Some(line) {
            return Some(if self.g.is_monomial() {
                Family::Rank1Coprime
            } else {
                Family::SPolyRank1
            });
        }
        let eligible = !self.gset.contains(&Elt::ZERO)
            && (1..ctx.q()).all(|a| !self.gset.contains(&ctx.mul(Elt(a), line)));
        if eligible {
            Some(Family::GeneralRank1)
        } else {
            None
        }
    }

    fn attribute_rank2(&self, ctx: &FieldCtx, lin: &LinPoly) -> Option<Family> {
        let lu = lin.eval(ctx, self.u);
        let aligned = self.img_line.is_some_and(|d| ctx.on_line(d, lu));
        if aligned {
            if self.g.is_monomial() {
                return Some(Family::Rank2KernelAligned);
            }
            if self.base.is_some() {
                return Some(if self.g.delta() == ctx.one() {
                    Family::TraceSPoly
                } else {
                    Family::SPolyTransported
                });
            }
        } else if self.base.is_some() {
            // coordinates of L(v0) in the basis {λ^m, L(u)}
            let (c1, _) = ctx.coords_in_basis(self.lambda_m, lu, lin.eval(ctx, self.v0));
            if !c1.is_zero() {
                let gamma = ctx.div(c1, self.zbar0).expect("zbar0 nonzero");
                if self.witnesses.contains(&gamma) {
                    return Some(Family::Rank2FromBasePP);
                }
            }
        }
        // general affine criterion
        let dir = ctx.line_rep(lu);
        let lv = lin.eval(ctx, self.v0);
        if ctx.on_line(dir, lv) {
            return None; // rank 2 forbids this, defensive
        }
        let rep = ctx.coset_rep(dir, lv);
        let clean = (0..ctx.q()).all(|a| !self.hset.contains(&ctx.add(rep, ctx.mul(Elt(a), dir))));
        if clean {
            Some(Family::GeneralRank2)
        } else {
            None
        }
    }
}

/// One-shot attribution; builds the shape view afresh.
pub fn attribute(ctx: &FieldCtx, g: &SPoly, lin: &LinPoly) -> Option<Family> {
    ShapeInfo::new(ctx, g).attribute(ctx, lin)
}

/// The base polynomial ĝ = x^m + Σ a_i x^i with a_i = c_i·λ^{i-m}, when all
/// those fall in F_q.
fn decompose_base(ctx: &FieldCtx, g: &SPoly, lambda: Elt) -> Option<BasePoly> {
    let m = g.m();
    let mut coeffs = vec![Elt::ZERO; m + 1];
    coeffs[m] = Elt::ONE;
    for (&i, &c) in g.coeffs() {
        let a = ctx.mul(c, ctx.pow(lambda, i as i64 - m as i64));
        if !ctx.in_subfield(a) {
            return None;
        }
        coeffs[i] = a;
    }
    Some(BasePoly::new(ctx, coeffs).expect("coefficients verified in F_q"))
}

fn image_line_of(ctx: &FieldCtx, g: &SPoly) -> Option<Elt> {
    let mut dir = None;
    for x in ctx.nonzero_elements() {
        let y = g.eval(ctx, x);
        if y.is_zero() {
            continue;
        }
        match dir {
            None => dir = Some(y),
            Some(d) => {
                if !ctx.on_line(d, y) {
                    return None;
                }
            }
        }
    }
    dir.map(|d| ctx.line_rep(d))
}
