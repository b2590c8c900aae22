//! s-polynomials g(s) = s^m + Σ a_i s^i (2 ≤ i < m) built on a rank-1
//! linearized polynomial s = x^q + δx, together with the difference sets
//! 𝔊 and 𝔥 that decide which linearized polynomials combine with g(s) into
//! a permutation of F_{q^2}.
//!
//! The sets are computed on a fixed reference point v = s(v0), where v0 is
//! the first element (index order) outside ker s. Any other nonzero point of
//! im s is an F_q-multiple of v; 𝔊 is literally invariant under that change
//! and 𝔥 only rescales, so line eligibility does not depend on the choice.
//! [`verify_v_independence`] re-checks this exhaustively instead of assuming
//! it.

use crate::error::{Error, Result};
use crate::fields::{Elt, FieldCtx};
use crate::linearized::{first_outside_kernel, rank1_kernel_gen, LinPoly};
use std::collections::BTreeMap;
use std::collections::HashSet;

/// Monic s-polynomial: delta pins s = x^q + δx, the top index is m, and
/// `coeffs` maps each interior exponent i (2 ≤ i < m) to a nonzero a_i.
/// There is no s^0 or s^1 term.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SPoly {
    delta: Elt,
    m: usize,
    coeffs: BTreeMap<usize, Elt>,
}

impl SPoly {
    pub fn new(
        ctx: &FieldCtx,
        delta: Elt,
        m: usize,
        coeffs: impl IntoIterator<Item = (usize, Elt)>,
    ) -> Result<SPoly> {
        if !ctx.is_unit_norm(delta) {
            return Err(Error::InvalidDelta);
        }
        if m < 2 || m > ctx.q() as usize - 1 {
            return Err(Error::IndexOutOfRange(m as u64));
        }
        let mut map = BTreeMap::new();
        for (i, c) in coeffs {
            if i < 2 || i >= m {
                return Err(Error::IndexOutOfRange(i as u64));
            }
            if !c.is_zero() {
                map.insert(i, c);
            }
        }
        Ok(SPoly { delta, m, coeffs: map })
    }

    pub fn monomial(ctx: &FieldCtx, delta: Elt, m: usize) -> Result<SPoly> {
        SPoly::new(ctx, delta, m, [])
    }

    pub fn delta(&self) -> Elt {
        self.delta
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn coeffs(&self) -> &BTreeMap<usize, Elt> {
        &self.coeffs
    }
    pub fn coeff(&self, i: usize) -> Elt {
        if i == self.m {
            Elt::ONE
        } else {
            self.coeffs.get(&i).copied().unwrap_or(Elt::ZERO)
        }
    }
    pub fn is_monomial(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponents with nonzero coefficient, including m.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.coeffs.keys().copied().collect();
        s.push(self.m);
        s
    }

    /// s(x) = x^q + δx.
    #[inline]
    pub fn eval_s(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        ctx.add(ctx.frobenius(x), ctx.mul(self.delta, x))
    }

    /// The underlying polynomial y^m + Σ a_i y^i at an arbitrary point.
    pub fn eval_poly(&self, ctx: &FieldCtx, y: Elt) -> Elt {
        // Horner over degrees m..2, then multiply by y^2
        let mut acc = Elt::ONE;
        for d in (2..self.m).rev() {
            acc = ctx.add(ctx.mul(acc, y), self.coeff(d));
        }
        ctx.mul(acc, ctx.mul(y, y))
    }

    /// g(s(x)): one application of s, then Horner.
    #[inline]
    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        self.eval_poly(ctx, self.eval_s(ctx, x))
    }

    /// Generator of ker s.
    pub fn kernel_gen(&self, ctx: &FieldCtx) -> Elt {
        rank1_kernel_gen(ctx, self.delta)
    }

    /// The deterministic first element outside ker s.
    pub fn v0(&self, ctx: &FieldCtx) -> Elt {
        first_outside_kernel(ctx, self.delta)
    }

    /// The fixed nonzero image point v = s(v0) the 𝔊/𝔥 sets are built on.
    pub fn image_point(&self, ctx: &FieldCtx) -> Elt {
        self.eval_s(ctx, self.v0(ctx))
    }
}

/// Smallest nonzero element of im(x^q + δx): the canonical scale λ used when
/// an s-polynomial with F_q coefficients is carried from the trace to another
/// rank-1 s. For δ = 1 this is the element 1.
pub fn canonical_lambda(ctx: &FieldCtx, delta: Elt) -> Result<Elt> {
    if !ctx.is_unit_norm(delta) {
        return Err(Error::InvalidDelta);
    }
    let v0 = first_outside_kernel(ctx, delta);
    let img = ctx.add(ctx.frobenius(v0), ctx.mul(delta, v0));
    Ok(ctx.line_rep(img))
}

/// A one-dimensional F_q-subspace (offset 0) or a nontrivial affine line
/// offset + span(direction), stored in canonical form: the direction is the
/// smallest nonzero element of its line and the offset the smallest element
/// of its coset. Two values are equal exactly when they denote the same
/// point set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct EligibleLine {
    direction: Elt,
    offset: Elt,
}

impl EligibleLine {
    pub fn new(ctx: &FieldCtx, direction: Elt, offset: Elt) -> Result<EligibleLine> {
        if direction.is_zero() {
            return Err(Error::Malformed("line direction must be nonzero".into()));
        }
        let direction = ctx.line_rep(direction);
        let offset = if offset.is_zero() || ctx.on_line(direction, offset) {
            Elt::ZERO
        } else {
            ctx.coset_rep(direction, offset)
        };
        Ok(EligibleLine { direction, offset })
    }

    pub fn direction(&self) -> Elt {
        self.direction
    }
    pub fn offset(&self) -> Elt {
        self.offset
    }
    /// True for subspaces, false for nontrivial affine lines.
    pub fn is_subspace(&self) -> bool {
        self.offset.is_zero()
    }

    pub fn points(&self, ctx: &FieldCtx) -> impl Iterator<Item = Elt> + '_ {
        let (d, b) = (self.direction, self.offset);
        ctx.subfield_elements()
            .map(move |a| ctx.add(b, ctx.mul(a, d)))
            .collect::<Vec<_>>()
            .into_iter()
    }
}

/// 𝔊 = { g(αv) - g(βv) : α, β ∈ F_q, α ≠ β } for the fixed v = s(v0).
pub fn g_set(ctx: &FieldCtx, g: &SPoly) -> HashSet<Elt> {
    difference_set(ctx, g, false)
}

/// 𝔥 = { (g(αv) - g(βv)) / (β - α) : α, β ∈ F_q, α ≠ β } for the same v.
pub fn h_set(ctx: &FieldCtx, g: &SPoly) -> HashSet<Elt> {
    difference_set(ctx, g, true)
}

fn difference_set(ctx: &FieldCtx, g: &SPoly, quotient: bool) -> HashSet<Elt> {
    let v = g.image_point(ctx);
    difference_set_at(ctx, g, v, quotient)
}

fn difference_set_at(ctx: &FieldCtx, g: &SPoly, v: Elt, quotient: bool) -> HashSet<Elt> {
    let vals: Vec<Elt> = ctx
        .subfield_elements()
        .map(|a| g.eval_poly(ctx, ctx.mul(a, v)))
        .collect();
    let mut out = HashSet::new();
    for (ai, &gi) in vals.iter().enumerate() {
        for (bi, &gj) in vals.iter().enumerate() {
            if ai == bi {
                continue;
            }
            let diff = ctx.sub(gi, gj);
            if quotient {
                let den = ctx.sub(Elt(bi as u32), Elt(ai as u32));
                out.insert(ctx.div(diff, den).expect("alpha != beta"));
            } else {
                out.insert(diff);
            }
        }
    }
    out
}

/// All one-dimensional subspaces ℒ with 𝔊 ∩ ℒ = ∅. Each admits q(q-1)
/// rank-1 polynomials L with im L = ℒ and ker L ≠ ker s such that
/// g(s) + L permutes F_{q^2}. Empty whenever 0 ∈ 𝔊.
pub fn eligible_rank1_lines(ctx: &FieldCtx, g: &SPoly) -> Vec<EligibleLine> {
    let gs = g_set(ctx, g);
    if gs.contains(&Elt::ZERO) {
        return Vec::new();
    }
    ctx.lines()
        .into_iter()
        .filter(|&d| (1..ctx.q()).all(|a| !gs.contains(&ctx.mul(Elt(a), d))))
        .map(|d| EligibleLine { direction: d, offset: Elt::ZERO })
        .collect()
}

/// All nontrivial affine lines b + ℒ with 𝔥 ∩ (b + ℒ) = ∅. Each admits
/// q(q-1) rank-2 polynomials L with L(u) ∈ ℒ \ {0} and L(v0) ∈ b + ℒ such
/// that g(s) + L permutes F_{q^2}.
pub fn eligible_rank2_affines(ctx: &FieldCtx, g: &SPoly) -> Vec<EligibleLine> {
    let hs = h_set(ctx, g);
    let mut out = Vec::new();
    for d in ctx.lines() {
        let mut seen_cosets: HashSet<Elt> = HashSet::new();
        seen_cosets.insert(Elt::ZERO); // the trivial coset
        for y in ctx.nonzero_elements() {
            if ctx.on_line(d, y) {
                continue;
            }
            let rep = ctx.coset_rep(d, y);
            if !seen_cosets.insert(rep) {
                continue;
            }
            let clean = (0..ctx.q()).all(|a| !hs.contains(&ctx.add(rep, ctx.mul(Elt(a), d))));
            if clean {
                out.push(EligibleLine { direction: d, offset: rep });
            }
        }
    }
    out
}

/// Checks that the eligibility outcome does not depend on which nonzero
/// point of im s the 𝔊/𝔥 sets are built on: 𝔊 must be identical for every
/// choice, and the eligible affine-line count per direction must agree.
/// Returns the first counterexample as an error message.
pub fn verify_v_independence(ctx: &FieldCtx, g: &SPoly) -> std::result::Result<(), String> {
    let v_ref = g.image_point(ctx);
    let gs_ref = difference_set_at(ctx, g, v_ref, false);
    let affine_ref = eligible_rank2_affines(ctx, g).len();
    let rank1_ref: HashSet<Elt> = eligible_rank1_lines(ctx, g)
        .iter()
        .map(|l| l.direction())
        .collect();

    for a in 2..ctx.q() {
        let v = ctx.mul(Elt(a), v_ref);
        let gs = difference_set_at(ctx, g, v, false);
        if gs != gs_ref {
            return Err(format!("g-set differs at v = {:?}", v));
        }
        let hs = difference_set_at(ctx, g, v, true);
        // rank-1 lines from this v
        let mut lines_v = HashSet::new();
        if !gs.contains(&Elt::ZERO) {
            for d in ctx.lines() {
                if (1..ctx.q()).all(|s| !gs.contains(&ctx.mul(Elt(s), d))) {
                    lines_v.insert(d);
                }
            }
        }
        if lines_v != rank1_ref {
            return Err(format!("eligible rank-1 lines differ at v = {:?}", v));
        }
        // affine count from this v
        let mut count = 0usize;
        for d in ctx.lines() {
            let mut seen: HashSet<Elt> = HashSet::new();
            seen.insert(Elt::ZERO);
            for y in ctx.nonzero_elements() {
                if ctx.on_line(d, y) {
                    continue;
                }
                let rep = ctx.coset_rep(d, y);
                if !seen.insert(rep) {
                    continue;
                }
                if (0..ctx.q()).all(|s| !hs.contains(&ctx.add(rep, ctx.mul(Elt(s), d)))) {
                    count += 1;
                }
            }
        }
        if count != affine_ref {
            return Err(format!(
                "eligible affine-line count differs at v = {:?}: {count} vs {affine_ref}",
                v
            ));
        }
    }
    Ok(())
}

/// Every monic s-polynomial on the trace (δ = 1) whose coefficients lie in
/// F_q, for 2 ≤ m ≤ q-1, in (m, coefficient) lexicographic order. There are
/// 1 + q + ... + q^{q-3} = (q^{q-2}-1)/(q-1) of them.
pub fn enumerate_subfield_spolys(ctx: &FieldCtx) -> Vec<SPoly> {
    let q = ctx.q() as u64;
    let mut out = Vec::new();
    for m in 2..=(ctx.q() as usize - 1) {
        let free = (m - 2) as u32;
        let total = q.pow(free);
        for code in 0..total {
            let mut cc = code;
            let mut coeffs = Vec::with_capacity(free as usize);
            for i in 2..m {
                coeffs.push((i, Elt((cc % q) as u32)));
                cc /= q;
            }
            out.push(SPoly::new(ctx, Elt::ONE, m, coeffs).expect("valid shape"));
        }
    }
    out
}

/// The s-polynomial as a plain linearized-argument map, useful for oracles:
/// x ↦ g(s(x)) + L(x).
pub fn gs_plus_l<'a>(
    ctx: &'a FieldCtx,
    g: &'a SPoly,
    l: &'a LinPoly,
) -> impl Fn(Elt) -> Elt + 'a {
    move |x| ctx.add(g.eval(ctx, x), l.eval(ctx, x))
}
