//! Brute-force oracles and the exhaustive census engine.
//!
//! The census iterates every one of the q^4 linearized polynomials — both
//! coefficients free, no shortcuts shared with the constructors — and tests
//! g(s) + L for bijectivity point by point. Each hit is attributed to the
//! family whose certifying condition it satisfies; hits that even the
//! general eligibility criteria cannot explain are counted separately and
//! are expected to be zero.

use crate::basepoly::BasePoly;
use crate::construct::{Family, ShapeInfo};
use crate::error::{Error, Result};
use crate::fields::{Elt, FieldCtx};
use crate::linearized::LinPoly;
use crate::spoly::{enumerate_subfield_spolys, SPoly};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Whether the evaluation map is a bijection of F_{q^2}, by a seen-set scan.
pub fn is_permutation(ctx: &FieldCtx, mut f: impl FnMut(Elt) -> Elt) -> bool {
    let mut seen = vec![false; ctx.q2() as usize];
    for x in ctx.elements() {
        let y = f(x);
        if seen[y.index() as usize] {
            return false;
        }
        seen[y.index() as usize] = true;
    }
    true
}

/// First x with h(f(x)) != x or f(h(x)) != x, with the offending value.
pub fn first_inverse_counterexample(
    ctx: &FieldCtx,
    mut f: impl FnMut(Elt) -> Elt,
    mut h: impl FnMut(Elt) -> Elt,
) -> Option<(Elt, Elt)> {
    for x in ctx.elements() {
        let y = h(f(x));
        if y != x {
            return Some((x, y));
        }
        let y = f(h(x));
        if y != x {
            return Some((x, y));
        }
    }
    None
}

/// Both compositions fix every element of F_{q^2}.
pub fn check_inverse(
    ctx: &FieldCtx,
    f: impl FnMut(Elt) -> Elt,
    h: impl FnMut(Elt) -> Elt,
) -> bool {
    first_inverse_counterexample(ctx, f, h).is_none()
}

/// One row of the exhaustive classification of g(s) + L hits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusRow {
    pub q: u32,
    pub delta_index: usize,
    pub shape: SPoly,
    pub rank: u8,
    pub count: u64,
    pub families: BTreeMap<Family, u64>,
    pub unexplained: u64,
}

#[derive(Default, Clone)]
struct Tally {
    count: u64,
    families: [u64; 8],
    unexplained: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.unexplained += other.unexplained;
        for i in 0..8 {
            self.families[i] += other.families[i];
        }
        self
    }
}

fn family_slot(f: Family) -> usize {
    Family::ALL.iter().position(|&x| x == f).expect("listed")
}

/// Scans all q^4 linearized polynomials of the requested rank against the
/// shape, invoking `on_hit` for every bijection found. Runs in parallel over
/// the x^q coefficient; the per-candidate bijection test bails out at the
/// first collision.
fn census_scan<T, FInit, FHit>(
    ctx: &FieldCtx,
    g: &SPoly,
    rank: u8,
    init: FInit,
    on_hit: FHit,
) -> T
where
    T: Send + Default + Mergeable,
    FInit: Fn() -> T + Sync + Send,
    FHit: Fn(&mut T, LinPoly) + Sync + Send,
{
    assert!(rank == 1 || rank == 2);
    let q2 = ctx.q2() as usize;
    let g_vals: Vec<Elt> = ctx.elements().map(|x| g.eval(ctx, x)).collect();
    let frob: Vec<Elt> = ctx.elements().map(|x| ctx.frobenius(x)).collect();

    let results: Vec<T> = (0..ctx.q2())
        .into_par_iter()
        .map_init(
            // the stamp buffer persists per worker; the accumulator must not
            || (vec![0u32; q2], 0u32),
            |(stamp, generation), a1i| {
                let mut acc = init();
                let a1 = Elt(a1i);
                // g(s)(x) + a1 x^q, fixed across the inner a0 loop
                let base_vals: Vec<Elt> = (0..q2)
                    .map(|x| ctx.add(g_vals[x], ctx.mul(a1, frob[x])))
                    .collect();
                for a0i in 0..ctx.q2() {
                    let a0 = Elt(a0i);
                    if rank_of(ctx, a1, a0) != rank {
                        continue;
                    }
                    if *generation == u32::MAX {
                        stamp.iter_mut().for_each(|s| *s = 0);
                        *generation = 0;
                    }
                    *generation += 1;
                    let gen = *generation;
                    // f(0) = 0 always; start from x = 1
                    stamp[0] = gen;
                    let mut ok = true;
                    for (x, bv) in base_vals.iter().enumerate().skip(1) {
                        let y = ctx.add(*bv, ctx.mul(a0, Elt(x as u32)));
                        let slot = &mut stamp[y.index() as usize];
                        if *slot == gen {
                            ok = false;
                            break;
                        }
                        *slot = gen;
                    }
                    if ok {
                        on_hit(&mut acc, LinPoly::new(ctx, a1, a0));
                    }
                }
                acc
            },
        )
        .collect();

    let mut total = T::default();
    for r in results {
        total = total.combine(r);
    }
    total
}

/// Exact merge of per-worker partial results; addition, so the census is
/// independent of how the candidate space was partitioned.
trait Mergeable {
    fn combine(self, other: Self) -> Self;
}
impl Mergeable for Tally {
    fn combine(self, other: Self) -> Self {
        self.merge(other)
    }
}
impl Mergeable for u64 {
    fn combine(self, other: Self) -> Self {
        self + other
    }
}
impl Mergeable for Vec<(LinPoly, Option<Family>)> {
    fn combine(mut self, other: Self) -> Self {
        self.extend(other);
        self
    }
}

#[inline]
fn rank_of(ctx: &FieldCtx, a1: Elt, a0: Elt) -> u8 {
    if a1.is_zero() && a0.is_zero() {
        0
    } else if ctx.norm(a0) != ctx.norm(a1) {
        2
    } else {
        1
    }
}

/// Count-only census: the number of L of the given rank making g(s) + L a
/// bijection of F_{q^2}.
pub fn census_count(ctx: &FieldCtx, g: &SPoly, rank: u8) -> u64 {
    census_scan(ctx, g, rank, || 0u64, |acc, _| *acc += 1)
}

/// Full census row with per-family attribution.
pub fn census(ctx: &FieldCtx, g: &SPoly, rank: u8) -> CensusRow {
    let info = ShapeInfo::new(ctx, g);
    let tally: Tally = census_scan(
        ctx,
        g,
        rank,
        Tally::default,
        |acc: &mut Tally, lin: LinPoly| {
            acc.count += 1;
            match info.attribute(ctx, &lin) {
                Some(f) => acc.families[family_slot(f)] += 1,
                None => acc.unexplained += 1,
            }
        },
    );
    let mut families = BTreeMap::new();
    for (i, &f) in Family::ALL.iter().enumerate() {
        if tally.families[i] > 0 {
            families.insert(f, tally.families[i]);
        }
    }
    CensusRow {
        q: ctx.q(),
        delta_index: ctx.delta_index(g.delta()).expect("validated delta"),
        shape: g.clone(),
        rank,
        count: tally.count,
        families,
        unexplained: tally.unexplained,
    }
}

/// Every hit of the census with its attributed family, in (a1, a0) order —
/// the audit stream behind the counts in [`census`].
pub fn census_hits(ctx: &FieldCtx, g: &SPoly, rank: u8) -> Vec<(LinPoly, Option<Family>)> {
    let info = ShapeInfo::new(ctx, g);
    census_scan(
        ctx,
        g,
        rank,
        Vec::new,
        |acc: &mut Vec<(LinPoly, Option<Family>)>, lin: LinPoly| {
            let fam = info.attribute(ctx, &lin);
            acc.push((lin, fam));
        },
    )
}

/// Indices 2 ≤ m ≤ q-1 coprime to q-1: the ones that admit rank-1 partners.
pub fn coprime_indices(ctx: &FieldCtx) -> Vec<usize> {
    let q1 = ctx.q() as usize - 1;
    (2..=q1)
        .filter(|&m| {
            let mut a = m;
            let mut b = q1;
            while b != 0 {
                let t = a % b;
                a = b;
                b = t;
            }
            a == 1
        })
        .collect()
}

/// Published-table reproduction.
///
/// * `which = 1`: per index m, the number of normalized hits s^m + L with
///   rank-2 L, for the first delta (the counts are delta-invariant; see
///   `table` 3 which verifies that).
/// * `which = 2`: the same for rank-1 L, restricted to the coprime indices.
/// * `which = 3`: totals over all q+1 deltas and both ranks, per index,
///   cross-checked for delta-invariance.
pub fn table(ctx: &FieldCtx, which: u8) -> Result<Vec<(usize, u64)>> {
    let m_range = 2..=(ctx.q() as usize - 1);
    match which {
        1 => {
            let d = ctx.delta(0)?;
            Ok(m_range
                .map(|m| {
                    let g = SPoly::monomial(ctx, d, m).expect("valid m");
                    (m, census_count(ctx, &g, 2))
                })
                .collect())
        }
        2 => {
            let d = ctx.delta(0)?;
            Ok(coprime_indices(ctx)
                .into_iter()
                .map(|m| {
                    let g = SPoly::monomial(ctx, d, m).expect("valid m");
                    (m, census_count(ctx, &g, 1))
                })
                .collect())
        }
        3 => {
            let mut rows = Vec::new();
            for m in m_range {
                let mut total = 0u64;
                let mut per_delta: Option<u64> = None;
                for &d in ctx.deltas() {
                    let g = SPoly::monomial(ctx, d, m).expect("valid m");
                    let c = census_count(ctx, &g, 2) + census_count(ctx, &g, 1);
                    match per_delta {
                        None => per_delta = Some(c),
                        Some(prev) if prev != c => {
                            return Err(Error::CheckFailed(format!(
                                "delta asymmetry at m = {m}: {prev} vs {c}"
                            )))
                        }
                        _ => {}
                    }
                    total += c;
                }
                rows.push((m, total));
            }
            Ok(rows)
        }
        w => Err(Error::Malformed(format!("no table {w}"))),
    }
}

/// CSV emitter for table rows: `m,count` lines.
pub fn table_to_csv(rows: &[(usize, u64)]) -> String {
    let mut out = String::from("m,count\n");
    for (m, c) in rows {
        out.push_str(&format!("{m},{c}\n"));
    }
    out
}

/// All normalized permutation polynomials of the base field F_q: monic,
/// zero constant term, degree < q, bijective on F_q. Listing is capped at
/// q ≤ 9; the space has (q^{q-1}-1)/(q-1) candidates.
pub fn normalized_base_pps(ctx: &FieldCtx) -> Result<Vec<BasePoly>> {
    if ctx.q() > 9 {
        return Err(Error::FieldTooLargeForListing(9));
    }
    let q = ctx.q() as u64;
    let mut out = Vec::new();
    for deg in 1..ctx.q() as usize {
        let free = deg.saturating_sub(1) as u32;
        let total = q.pow(free);
        let found: Vec<BasePoly> = (0..total)
            .into_par_iter()
            .filter_map(|code| {
                let mut coeffs = vec![Elt::ZERO; deg + 1];
                coeffs[deg] = Elt::ONE;
                let mut cc = code;
                for c in coeffs.iter_mut().take(deg).skip(1) {
                    *c = Elt((cc % q) as u32);
                    cc /= q;
                }
                let p = BasePoly::new(ctx, coeffs).expect("subfield coefficients");
                if p.is_permutation(ctx) {
                    Some(p)
                } else {
                    None
                }
            })
            .collect();
        out.extend(found);
    }
    Ok(out)
}

/// Distribution of rank-2 census counts over every monic s-polynomial with
/// F_q coefficients on the trace: count value -> how many shapes reach it.
/// This is the long-running audit; at q = 7 it visits 2801 shapes times
/// 2401 candidate polynomials.
pub struct TraceCensus {
    pub shapes: usize,
    pub total: u64,
    pub by_count: BTreeMap<u64, u64>,
}

pub fn trace_spoly_census(ctx: &FieldCtx) -> TraceCensus {
    let shapes = enumerate_subfield_spolys(ctx);
    let counts: Vec<u64> = shapes
        .par_iter()
        .map(|g| census_count_serial(ctx, g, 2))
        .collect();
    let mut by_count = BTreeMap::new();
    let mut total = 0u64;
    for c in counts {
        *by_count.entry(c).or_insert(0) += 1;
        total += c;
    }
    TraceCensus {
        shapes: shapes.len(),
        total,
        by_count,
    }
}

/// Serial variant of the count census used when the caller already
/// parallelizes across shapes.
fn census_count_serial(ctx: &FieldCtx, g: &SPoly, rank: u8) -> u64 {
    let q2 = ctx.q2() as usize;
    let g_vals: Vec<Elt> = ctx.elements().map(|x| g.eval(ctx, x)).collect();
    let frob: Vec<Elt> = ctx.elements().map(|x| ctx.frobenius(x)).collect();
    let mut stamp = vec![0u32; q2];
    let mut generation = 0u32;
    let mut hits = 0u64;
    for a1i in 0..ctx.q2() {
        let a1 = Elt(a1i);
        let base_vals: Vec<Elt> = (0..q2)
            .map(|x| ctx.add(g_vals[x], ctx.mul(a1, frob[x])))
            .collect();
        for a0i in 0..ctx.q2() {
            let a0 = Elt(a0i);
            if rank_of(ctx, a1, a0) != rank {
                continue;
            }
            if generation == u32::MAX {
                stamp.iter_mut().for_each(|s| *s = 0);
                generation = 0;
            }
            generation += 1;
            stamp[0] = generation;
            let mut ok = true;
            for (x, bv) in base_vals.iter().enumerate().skip(1) {
                let y = ctx.add(*bv, ctx.mul(a0, Elt(x as u32)));
                let slot = &mut stamp[y.index() as usize];
                if *slot == generation {
                    ok = false;
                    break;
                }
                *slot = generation;
            }
            if ok {
                hits += 1;
            }
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::build_field;

    fn ctx7() -> FieldCtx {
        build_field(7, 1, None, None).unwrap()
    }

    #[test]
    fn permutation_oracle_basics() {
        let c = ctx7();
        assert!(is_permutation(&c, |x| c.frobenius(x)));
        assert!(!is_permutation(&c, |x| c.mul(x, x)));
        let s = LinPoly::rank1_monic(&c, Elt::ONE).unwrap();
        assert!(!is_permutation(&c, |x| s.eval(&c, x)));
    }

    #[test]
    fn inverse_oracle_basics() {
        let c = ctx7();
        // Frobenius is an involution
        assert!(check_inverse(&c, |x| c.frobenius(x), |x| c.frobenius(x)));
        let l = LinPoly::new(&c, c.omega(), Elt(3));
        assert_eq!(l.rank(), 2);
        let m = l.inverse_rank2(&c).unwrap();
        assert!(check_inverse(&c, |x| l.eval(&c, x), |x| m.eval(&c, x)));
        let wrong = LinPoly::new(&c, Elt::ZERO, Elt::ONE);
        let cex = first_inverse_counterexample(&c, |x| l.eval(&c, x), |x| wrong.eval(&c, x));
        assert!(cex.is_some());
    }

    #[test]
    fn census_matches_published_cells_q7() {
        let c = ctx7();
        let g2 = SPoly::monomial(&c, Elt::ONE, 2).unwrap();
        assert_eq!(census_count(&c, &g2, 2), 252);
        let g4 = SPoly::monomial(&c, Elt::ONE, 4).unwrap();
        assert_eq!(census_count(&c, &g4, 2), 840);
    }

    #[test]
    fn census_q8_rank1() {
        let c = build_field(2, 3, None, None).unwrap();
        let g = SPoly::monomial(&c, Elt::ONE, 3).unwrap();
        assert_eq!(census_count(&c, &g, 1), 448);
    }

    #[test]
    fn census_attribution_total_q7_m4() {
        let c = ctx7();
        let g = SPoly::monomial(&c, Elt::ONE, 4).unwrap();
        let row = census(&c, &g, 2);
        assert_eq!(row.count, 840);
        assert_eq!(row.unexplained, 0);
        assert_eq!(row.families.get(&Family::Rank2KernelAligned), Some(&252));
        assert_eq!(row.families.get(&Family::Rank2FromBasePP), Some(&588));
    }

    #[test]
    fn delta_invariance_q5() {
        let c = build_field(5, 1, None, None).unwrap();
        for m in 2..=4 {
            let counts: Vec<u64> = c
                .deltas()
                .iter()
                .map(|&d| census_count(&c, &SPoly::monomial(&c, d, m).unwrap(), 2))
                .collect();
            assert!(counts.windows(2).all(|w| w[0] == w[1]), "m={m}: {counts:?}");
        }
    }

    #[test]
    fn tables_q5() {
        let c = build_field(5, 1, None, None).unwrap();
        assert_eq!(table(&c, 1).unwrap(), vec![(2, 80), (3, 80), (4, 80)]);
        assert_eq!(table(&c, 2).unwrap(), vec![(3, 100)]);
        assert_eq!(table(&c, 3).unwrap(), vec![(2, 480), (3, 1080), (4, 480)]);
    }

    #[test]
    fn table_q4_includes_rank1_at_m2() {
        let c = build_field(2, 2, None, None).unwrap();
        assert_eq!(table(&c, 1).unwrap(), vec![(2, 36), (3, 36)]);
        assert_eq!(table(&c, 2).unwrap(), vec![(2, 48)]);
        assert_eq!(table(&c, 3).unwrap(), vec![(2, 420), (3, 180)]);
    }

    #[test]
    fn normalized_base_pp_counts() {
        let c7 = ctx7();
        let pps = normalized_base_pps(&c7).unwrap();
        assert_eq!(pps.len(), 120);
        let no_linear = pps.iter().filter(|p| p.coeff(1).is_zero()).count();
        assert_eq!(no_linear, 15);

        let c3 = build_field(3, 1, None, None).unwrap();
        assert_eq!(normalized_base_pps(&c3).unwrap().len(), 1);

        let c11 = build_field(11, 1, None, None).unwrap();
        assert!(matches!(
            normalized_base_pps(&c11),
            Err(Error::FieldTooLargeForListing(9))
        ));
    }

    #[test]
    fn census_hit_stream_matches_counts_and_is_deterministic() {
        let c = ctx7();
        let g = SPoly::monomial(&c, Elt::ONE, 4).unwrap();
        let hits = census_hits(&c, &g, 2);
        assert_eq!(hits.len() as u64, census_count(&c, &g, 2));
        assert!(hits.iter().all(|(_, fam)| fam.is_some()));
        let again = census_hits(&c, &g, 2);
        assert_eq!(hits, again);
        // ascending (a1, a0) order
        let keys: Vec<(Elt, Elt)> = hits.iter().map(|(l, _)| (l.a1(), l.a0())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn coprime_index_lists() {
        let c7 = ctx7();
        assert_eq!(coprime_indices(&c7), vec![5]);
        let c8 = build_field(2, 3, None, None).unwrap();
        assert_eq!(coprime_indices(&c8), vec![2, 3, 4, 5, 6]);
        let c9 = build_field(3, 2, None, None).unwrap();
        assert_eq!(coprime_indices(&c9), vec![3, 5, 7]);
    }
}
