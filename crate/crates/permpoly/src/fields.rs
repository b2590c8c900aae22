//! Exact arithmetic in the tower F_p ⊂ F_q ⊂ F_{q^2}, q = p^r.
//!
//! An element of F_{q^2} is a coefficient vector of length 2r over F_p with
//! respect to the tower basis: first the r coordinates of the F_q component
//! c0, then the r coordinates of c1, where x = c0 + c1·t and t is a root of
//! the degree-2 extension modulus. [`Elt`] stores the canonical index
//! `enc(c0) + q·enc(c1)` of that vector (coordinates are mixed-radix digits
//! base p, least significant first), so equality of indices is coordinate-wise
//! equality and the subfield F_q occupies exactly the indices `0..q`.
//!
//! Construction is deterministic: omitted moduli are the lexicographically
//! smallest irreducible polynomials (coefficient vectors compared as base-p /
//! base-q integers, constant term least significant), and the primitive
//! element is the smallest element of full multiplicative order in index
//! order. All arithmetic after construction is table-driven (discrete
//! exp/log for multiplication, per-component tables for addition), which is
//! what makes the exhaustive censuses elsewhere in the crate cheap.

use crate::error::{Error, Result};
use std::fmt;

/// Hard cap on the size of F_{q^2}: every claim in this crate is backed by
/// exhaustive verification over q^2 points, which stops being realistic
/// beyond this bound.
pub const MAX_Q2: u64 = 1 << 20;

const MAX_R: usize = 10;

/// One element of F_{q^2}, stored as its canonical index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elt(pub(crate) u32);

impl Elt {
    pub const ZERO: Elt = Elt(0);
    pub const ONE: Elt = Elt(1);

    /// Canonical index of the coefficient vector, in `0..q^2`.
    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Elt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Immutable description of the tower F_p ⊂ F_q ⊂ F_{q^2} together with the
/// lookup tables all arithmetic runs through. Safe to share across threads.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    r: u32,
    q: u32,
    q2: u32,
    n: u32, // q^2 - 1
    base_modulus: Vec<u32>,
    ext_modulus: [u32; 3],
    omega: Elt,
    exp: Vec<u32>,  // length 2n, exp[i] = omega^i, doubled to skip a reduction
    log: Vec<u32>,  // log[0] is a sentinel
    frob: Vec<u32>, // x -> x^q
    lo: Vec<u16>,   // index -> c0
    hi: Vec<u16>,   // index -> c1
    fq_add: Vec<u16>,
    fq_neg: Vec<u16>,
    deltas: Vec<Elt>, // the q+1 roots of x^{q+1} = 1, ascending by index
}

/// Builds the field tower. `base_modulus` (length r+1, coefficients mod p,
/// monic) and `ext_modulus` (three F_q elements given by index, monic) may be
/// supplied to pin a particular representation; when omitted the
/// lexicographically smallest irreducible is chosen.
pub fn build_field(
    p: u32,
    r: u32,
    base_modulus: Option<Vec<u32>>,
    ext_modulus: Option<[u32; 3]>,
) -> Result<FieldCtx> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if r == 0 || r as usize > MAX_R {
        return Err(Error::DegreeMismatch(format!("extension degree r = {r}")));
    }
    let q = (p as u64).checked_pow(r).ok_or(Error::FieldTooLarge(u64::MAX))?;
    if q * q > MAX_Q2 {
        return Err(Error::FieldTooLarge(q * q));
    }
    let q = q as u32;

    let base = match base_modulus {
        Some(b) => {
            check_base_modulus(&b, p, r)?;
            b
        }
        None => default_base_modulus(p, r),
    };

    let fq = Fq::new(p, r, q, &base);

    let ext = match ext_modulus {
        Some(e) => {
            check_ext_modulus(&e, &fq)?;
            e
        }
        None => default_ext_modulus(&fq),
    };

    Ok(assemble(p, r, q, base, ext, fq))
}

fn assemble(p: u32, r: u32, q: u32, base: Vec<u32>, ext: [u32; 3], fq: Fq) -> FieldCtx {
    let q2 = q * q;
    let n = q2 - 1;

    // Multiplication of tower pairs (c0, c1) with t^2 = -e1 t - e0.
    let e0 = ext[0];
    let e1 = ext[1];
    let mul_pair = |a: u32, b: u32| -> u32 {
        let (a0, a1) = (a % q, a / q);
        let (b0, b1) = (b % q, b / q);
        let t0 = fq.mul(a0, b0);
        let t1 = fq.add(fq.mul(a0, b1), fq.mul(a1, b0));
        let t2 = fq.mul(a1, b1);
        let c0 = fq.sub(t0, fq.mul(t2, e0));
        let c1 = fq.sub(t1, fq.mul(t2, e1));
        c0 + q * c1
    };

    let factors = prime_factors(n as u64);
    let order_is_full = |x: u32| -> bool {
        factors
            .iter()
            .all(|&f| pow_with(&mul_pair, x, (n as u64 / f) as u32) != 1)
    };
    let omega = (2..q2)
        .find(|&x| order_is_full(x))
        .expect("a finite field has a primitive element");

    let mut exp = vec![0u32; 2 * n as usize];
    let mut log = vec![u32::MAX; q2 as usize];
    let mut acc = 1u32;
    for i in 0..n as usize {
        exp[i] = acc;
        exp[i + n as usize] = acc;
        assert_eq!(log[acc as usize], u32::MAX, "primitive element has short order");
        log[acc as usize] = i as u32;
        acc = mul_pair(acc, omega);
    }
    assert_eq!(acc, 1, "primitive element order mismatch");

    let mut frob = vec![0u32; q2 as usize];
    for x in 1..q2 {
        frob[x as usize] = exp[((log[x as usize] as u64 * q as u64) % n as u64) as usize];
    }

    let mut lo = vec![0u16; q2 as usize];
    let mut hi = vec![0u16; q2 as usize];
    for x in 0..q2 {
        lo[x as usize] = (x % q) as u16;
        hi[x as usize] = (x / q) as u16;
    }

    let mut fq_add = vec![0u16; (q * q) as usize];
    for a in 0..q {
        for b in 0..q {
            fq_add[(a * q + b) as usize] = fq.add(a, b) as u16;
        }
    }
    let fq_neg: Vec<u16> = (0..q).map(|a| fq.neg(a) as u16).collect();

    // The q+1 solutions of x^{q+1} = 1 are omega^{i(q-1)}.
    let mut deltas: Vec<Elt> = (0..=q)
        .map(|i| Elt(exp[(i as usize) * (q as usize - 1)]))
        .collect();
    deltas.sort();

    let ctx = FieldCtx {
        p,
        r,
        q,
        q2,
        n,
        base_modulus: base,
        ext_modulus: ext,
        omega: Elt(omega),
        exp,
        log,
        frob,
        lo,
        hi,
        fq_add,
        fq_neg,
        deltas,
    };

    // Tower sanity: the fixed points of x -> x^q are exactly the indices 0..q.
    let fixed = (0..q2).filter(|&x| ctx.frob[x as usize] == x).count() as u32;
    assert_eq!(fixed, q, "subfield has wrong cardinality");
    for x in 0..q {
        assert_eq!(ctx.frob[x as usize], x, "subfield is not the low index range");
    }

    ctx
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("q", &self.q)
            .field("base_modulus", &self.base_modulus)
            .field("ext_modulus", &self.ext_modulus)
            .field("omega", &self.omega)
            .finish_non_exhaustive()
    }
}

impl FieldCtx {
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn q2(&self) -> u32 {
        self.q2
    }
    /// Order of the multiplicative group, q^2 - 1.
    pub fn group_order(&self) -> u32 {
        self.n
    }
    pub fn base_modulus(&self) -> &[u32] {
        &self.base_modulus
    }
    pub fn ext_modulus(&self) -> [u32; 3] {
        self.ext_modulus
    }
    pub fn omega(&self) -> Elt {
        self.omega
    }

    pub fn zero(&self) -> Elt {
        Elt(0)
    }
    pub fn one(&self) -> Elt {
        Elt(1)
    }

    /// Checked element from a canonical index.
    pub fn elt(&self, index: u32) -> Result<Elt> {
        if index < self.q2 {
            Ok(Elt(index))
        } else {
            Err(Error::IndexOutOfRange(index as u64))
        }
    }

    /// Element from its length-2r coefficient vector over F_p.
    pub fn elt_from_coeffs(&self, coeffs: &[u32]) -> Result<Elt> {
        if coeffs.len() != 2 * self.r as usize {
            return Err(Error::Malformed(format!(
                "expected {} coordinates, got {}",
                2 * self.r,
                coeffs.len()
            )));
        }
        let mut idx = 0u64;
        for &c in coeffs.iter().rev() {
            if c >= self.p {
                return Err(Error::CoefficientOutOfRange(format!("{c} >= p = {}", self.p)));
            }
            idx = idx * self.p as u64 + c as u64;
        }
        Ok(Elt(idx as u32))
    }

    /// Length-2r coefficient vector over F_p of an element.
    pub fn elt_coeffs(&self, x: Elt) -> Vec<u32> {
        let mut v = Vec::with_capacity(2 * self.r as usize);
        let mut idx = x.0;
        for _ in 0..2 * self.r {
            v.push(idx % self.p);
            idx /= self.p;
        }
        v
    }

    /// F_q element (index < q) from its length-r digit vector over F_p.
    pub fn fq_from_digits(&self, digits: &[u32]) -> Result<u32> {
        if digits.len() != self.r as usize {
            return Err(Error::Malformed(format!(
                "expected {} digits, got {}",
                self.r,
                digits.len()
            )));
        }
        let mut idx = 0u64;
        for &c in digits.iter().rev() {
            if c >= self.p {
                return Err(Error::CoefficientOutOfRange(format!("{c} >= p = {}", self.p)));
            }
            idx = idx * self.p as u64 + c as u64;
        }
        Ok(idx as u32)
    }

    /// Length-r digit vector over F_p of an F_q element index.
    pub fn fq_digits(&self, mut index: u32) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.r as usize);
        for _ in 0..self.r {
            v.push(index % self.p);
            index /= self.p;
        }
        v
    }

    pub fn elements(&self) -> impl Iterator<Item = Elt> {
        (0..self.q2).map(Elt)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elt> {
        (1..self.q2).map(Elt)
    }

    /// The q elements of the subfield F_q = {x : x^q = x}, ascending.
    pub fn subfield_elements(&self) -> impl Iterator<Item = Elt> {
        (0..self.q).map(Elt)
    }

    pub fn in_subfield(&self, x: Elt) -> bool {
        self.frob[x.0 as usize] == x.0
    }

    // ------------------------------------------------------------------
    // arithmetic
    // ------------------------------------------------------------------

    #[inline]
    pub fn add(&self, a: Elt, b: Elt) -> Elt {
        let q = self.q;
        let c0 = self.fq_add[(self.lo[a.0 as usize] as u32 * q + self.lo[b.0 as usize] as u32) as usize];
        let c1 = self.fq_add[(self.hi[a.0 as usize] as u32 * q + self.hi[b.0 as usize] as u32) as usize];
        Elt(c0 as u32 + q * c1 as u32)
    }

    #[inline]
    pub fn neg(&self, a: Elt) -> Elt {
        let c0 = self.fq_neg[self.lo[a.0 as usize] as usize];
        let c1 = self.fq_neg[self.hi[a.0 as usize] as usize];
        Elt(c0 as u32 + self.q * c1 as u32)
    }

    #[inline]
    pub fn sub(&self, a: Elt, b: Elt) -> Elt {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elt, b: Elt) -> Elt {
        if a.0 == 0 || b.0 == 0 {
            return Elt(0);
        }
        Elt(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Elt) -> Result<Elt> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let l = self.log[a.0 as usize];
        Ok(Elt(self.exp[((self.n - l) % self.n) as usize]))
    }

    pub fn div(&self, a: Elt, b: Elt) -> Result<Elt> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^k with the exponent taken mod q^2-1 for nonzero a. A negative
    /// exponent on zero is a caller bug.
    pub fn pow(&self, a: Elt, k: i64) -> Elt {
        if a.0 == 0 {
            return match k {
                0 => Elt(1),
                k if k > 0 => Elt(0),
                _ => panic!("zero base with negative exponent"),
            };
        }
        let e = k.rem_euclid(self.n as i64) as u64;
        Elt(self.exp[((self.log[a.0 as usize] as u64 * e) % self.n as u64) as usize])
    }

    /// The Frobenius map x -> x^q.
    #[inline]
    pub fn frobenius(&self, x: Elt) -> Elt {
        Elt(self.frob[x.0 as usize])
    }

    /// trace(x) = x^q + x, mapping F_{q^2} onto F_q.
    #[inline]
    pub fn trace(&self, x: Elt) -> Elt {
        self.add(self.frobenius(x), x)
    }

    /// norm(x) = x^{q+1}, an element of F_q.
    pub fn norm(&self, x: Elt) -> Elt {
        self.mul(self.frobenius(x), x)
    }

    pub(crate) fn dlog(&self, x: Elt) -> Option<u32> {
        if x.0 == 0 {
            None
        } else {
            Some(self.log[x.0 as usize])
        }
    }

    /// Solves x^{q-1} = c, returning one solution (the others are its
    /// F_q-multiples). `None` when no solution exists.
    pub(crate) fn solve_pow_q_minus_1(&self, c: Elt) -> Option<Elt> {
        let l = self.dlog(c)?;
        if l % (self.q - 1) != 0 {
            return None;
        }
        Some(Elt(self.exp[(l / (self.q - 1)) as usize]))
    }

    // ------------------------------------------------------------------
    // roots of unity and F_q-geometry
    // ------------------------------------------------------------------

    /// All n-th roots of unity, ascending by index. n must divide q^2-1.
    pub fn roots_of_unity(&self, n: u32) -> Result<Vec<Elt>> {
        if n == 0 || self.n % n != 0 {
            return Err(Error::NotADivisor(n, self.n));
        }
        let step = (self.n / n) as usize;
        let mut roots: Vec<Elt> = (0..n as usize).map(|i| Elt(self.exp[i * step])).collect();
        roots.sort();
        Ok(roots)
    }

    /// The q+1 roots of x^{q+1} = 1: exactly the deltas for which
    /// x^q + delta·x has rank 1. Ascending by index.
    pub fn deltas(&self) -> &[Elt] {
        &self.deltas
    }

    pub fn delta(&self, index: usize) -> Result<Elt> {
        self.deltas
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange(index as u64))
    }

    pub fn delta_index(&self, delta: Elt) -> Option<usize> {
        self.deltas.binary_search(&delta).ok()
    }

    pub fn is_unit_norm(&self, delta: Elt) -> bool {
        self.norm(delta) == self.one()
    }

    /// Smallest element (in index order) of the F_q-line through y != 0.
    pub fn line_rep(&self, y: Elt) -> Elt {
        debug_assert!(!y.is_zero());
        let mut best = y;
        for a in 1..self.q {
            let cand = self.mul(Elt(a), y);
            if cand < best {
                best = cand;
            }
        }
        best
    }

    /// Whether y lies on the F_q-line spanned by dir != 0.
    pub fn on_line(&self, dir: Elt, y: Elt) -> bool {
        if y.is_zero() {
            return true;
        }
        // same line iff y/dir ∈ F_q
        match self.div(y, dir) {
            Ok(t) => self.in_subfield(t),
            Err(_) => false,
        }
    }

    /// Smallest element of the affine line y + span(dir).
    pub fn coset_rep(&self, dir: Elt, y: Elt) -> Elt {
        let mut best = y;
        for a in 0..self.q {
            let cand = self.add(y, self.mul(Elt(a), dir));
            if cand < best {
                best = cand;
            }
        }
        best
    }

    /// Canonical directions of the q+1 one-dimensional F_q-subspaces.
    pub fn lines(&self) -> Vec<Elt> {
        let mut seen = vec![false; self.q2 as usize];
        let mut dirs = Vec::with_capacity(self.q as usize + 1);
        for x in 1..self.q2 {
            if seen[x as usize] {
                continue;
            }
            dirs.push(Elt(x));
            for a in 1..self.q {
                seen[self.mul(Elt(a), Elt(x)).0 as usize] = true;
            }
        }
        dirs
    }

    /// F_q-coordinates of y in the basis {e1, e2} (which must be a basis).
    pub fn coords_in_basis(&self, e1: Elt, e2: Elt, y: Elt) -> (Elt, Elt) {
        // kill e2 with the rank-1 map x^q + d x, d = -e2^{q-1}
        let kill = |e: Elt, z: Elt| -> Elt {
            let d = self.neg(self.pow(e, self.q as i64 - 1));
            self.add(self.frobenius(z), self.mul(d, z))
        };
        let t1 = kill(e2, y);
        let n1 = kill(e2, e1);
        let c1 = self.div(t1, n1).expect("e1, e2 must be a basis");
        let t2 = kill(e1, y);
        let n2 = kill(e1, e2);
        let c2 = self.div(t2, n2).expect("e1, e2 must be a basis");
        debug_assert!(self.in_subfield(c1) && self.in_subfield(c2));
        (c1, c2)
    }
}

// ----------------------------------------------------------------------
// construction internals: F_p polynomials and the intermediate field F_q
// ----------------------------------------------------------------------

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pow_with(mul: &impl Fn(u32, u32) -> u32, base: u32, mut e: u32) -> u32 {
    let mut acc = 1u32;
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    acc
}

/// Remainder of a by b over F_p; both little-endian coefficient vectors,
/// b monic.
fn fp_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let db = b.len() - 1;
    let mut rem: Vec<u32> = a.to_vec();
    while rem.len() > db {
        let lead = *rem.last().unwrap();
        let shift = rem.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let idx = shift + i;
                rem[idx] = (rem[idx] + (p - lead % p) * bc) % p;
            }
        }
        rem.pop();
    }
    while rem.len() > 1 && *rem.last().unwrap() == 0 {
        rem.pop();
    }
    rem
}

fn fp_is_zero(a: &[u32]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Irreducibility over F_p by trial division with every monic polynomial of
/// degree up to deg(f)/2.
fn fp_is_irreducible(f: &[u32], p: u32) -> bool {
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    for dd in 1..=d / 2 {
        let count = (p as u64).pow(dd as u32);
        for c in 0..count {
            let mut g = Vec::with_capacity(dd + 1);
            let mut cc = c;
            for _ in 0..dd {
                g.push((cc % p as u64) as u32);
                cc /= p as u64;
            }
            g.push(1);
            if fp_is_zero(&fp_rem(f, &g, p)) {
                return false;
            }
        }
    }
    true
}

fn default_base_modulus(p: u32, r: u32) -> Vec<u32> {
    if r == 1 {
        return vec![0, 1]; // the polynomial x
    }
    let count = (p as u64).pow(r);
    for c in 0..count {
        let mut f = Vec::with_capacity(r as usize + 1);
        let mut cc = c;
        for _ in 0..r {
            f.push((cc % p as u64) as u32);
            cc /= p as u64;
        }
        f.push(1);
        if fp_is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

fn check_base_modulus(b: &[u32], p: u32, r: u32) -> Result<()> {
    if b.len() != r as usize + 1 {
        return Err(Error::DegreeMismatch(format!(
            "base modulus must have {} coefficients, got {}",
            r + 1,
            b.len()
        )));
    }
    if b[r as usize] != 1 {
        return Err(Error::DegreeMismatch("base modulus must be monic".into()));
    }
    if let Some(&c) = b.iter().find(|&&c| c >= p) {
        return Err(Error::CoefficientOutOfRange(format!("{c} >= p = {p}")));
    }
    if r > 1 && !fp_is_irreducible(b, p) {
        return Err(Error::ReducibleModulus(format!("{b:?} over F_{p}")));
    }
    Ok(())
}

/// Arithmetic in F_q = F_p[w]/(base) on element indices, used only while the
/// tower tables are being built.
struct Fq {
    p: u32,
    r: u32,
    q: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Fq {
    fn new(p: u32, r: u32, q: u32, modulus: &[u32]) -> Fq {
        let digits = |mut idx: u32| -> Vec<u32> {
            let mut v = Vec::with_capacity(r as usize);
            for _ in 0..r {
                v.push(idx % p);
                idx /= p;
            }
            v
        };
        let undigits = |d: &[u32]| -> u32 {
            let mut idx = 0u32;
            for &c in d.iter().rev() {
                idx = idx * p + c;
            }
            idx
        };
        let slow_mul = |a: u32, b: u32| -> u32 {
            let da = digits(a);
            let db = digits(b);
            let mut conv = vec![0u32; 2 * r as usize - 1];
            for (i, &x) in da.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in db.iter().enumerate() {
                    conv[i + j] = (conv[i + j] + x * y) % p;
                }
            }
            let mut rem = fp_rem(&conv, modulus, p);
            rem.resize(r as usize, 0);
            undigits(&rem)
        };

        // exp/log for F_q^*
        let m = q - 1;
        let mut exp = vec![0u16; (2 * m.max(1)) as usize];
        let mut log = vec![0u16; q as usize];
        if m == 0 {
            return Fq { p, r, q, exp, log };
        }
        let factors = prime_factors(m as u64);
        let gen = (1..q)
            .find(|&x| {
                factors
                    .iter()
                    .all(|&f| pow_with(&slow_mul, x, (m as u64 / f) as u32) != 1)
            })
            .expect("F_q has a primitive element");
        let mut acc = 1u32;
        for i in 0..m as usize {
            exp[i] = acc as u16;
            exp[i + m as usize] = acc as u16;
            log[acc as usize] = i as u16;
            acc = slow_mul(acc, gen);
        }
        Fq { p, r, q, exp, log }
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut mult = 1u32;
        for _ in 0..self.r {
            out += ((a % self.p + b % self.p) % self.p) * mult;
            a /= self.p;
            b /= self.p;
            mult *= self.p;
        }
        out
    }

    fn neg(&self, a: u32) -> u32 {
        let mut a = a;
        let mut out = 0u32;
        let mut mult = 1u32;
        for _ in 0..self.r {
            out += ((self.p - a % self.p) % self.p) * mult;
            a /= self.p;
            mult *= self.p;
        }
        out
    }

    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] as u32 + self.log[b as usize] as u32) as usize] as u32
    }
}

fn default_ext_modulus(fq: &Fq) -> [u32; 3] {
    let q = fq.q;
    for idx in 0..q * q {
        let e0 = idx % q;
        let e1 = idx / q;
        if ext_is_irreducible(fq, e0, e1) {
            return [e0, e1, 1];
        }
    }
    unreachable!("irreducible quadratics exist over every F_q")
}

fn ext_is_irreducible(fq: &Fq, e0: u32, e1: u32) -> bool {
    // degree 2: irreducible iff no root in F_q
    for x in 0..fq.q {
        let v = fq.add(fq.add(fq.mul(x, x), fq.mul(e1, x)), e0);
        if v == 0 {
            return false;
        }
    }
    true
}

fn check_ext_modulus(e: &[u32; 3], fq: &Fq) -> Result<()> {
    if e[2] != 1 {
        return Err(Error::DegreeMismatch("extension modulus must be monic".into()));
    }
    if e[0] >= fq.q || e[1] >= fq.q {
        return Err(Error::CoefficientOutOfRange(format!(
            "extension modulus coefficients must be < q = {}",
            fq.q
        )));
    }
    if !ext_is_irreducible(fq, e[0], e[1]) {
        return Err(Error::ReducibleModulus(format!(
            "t^2 + {}t + {} has a root in F_{}",
            e[1], e[0], fq.q
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32, r: u32) -> FieldCtx {
        build_field(p, r, None, None).unwrap()
    }

    #[test]
    fn sizes_and_orders() {
        let f49 = f(7, 1);
        assert_eq!((f49.q(), f49.q2(), f49.group_order()), (7, 49, 48));
        let f16 = f(2, 2);
        assert_eq!((f16.q(), f16.q2()), (4, 16));
        assert_eq!(f(3, 2).q2(), 81);
    }

    #[test]
    fn rejects_composite_p() {
        assert!(matches!(build_field(6, 1, None, None), Err(Error::NotPrime(6))));
        assert!(matches!(build_field(1, 1, None, None), Err(Error::NotPrime(1))));
    }

    #[test]
    fn rejects_reducible_base_modulus() {
        // x^2 + 2x + 1 = (x+1)^2 over F_3
        let err = build_field(3, 2, Some(vec![1, 2, 1]), None);
        assert!(matches!(err, Err(Error::ReducibleModulus(_))));
        // x^2 + 2x + 2 has no root in F_3 and is accepted
        assert!(build_field(3, 2, Some(vec![2, 2, 1]), None).is_ok());
    }

    #[test]
    fn rejects_oversized_field() {
        assert!(matches!(build_field(1031, 1, None, None), Err(Error::FieldTooLarge(_))));
    }

    #[test]
    fn additive_inverses_and_group_order() {
        let ctx = f(7, 1);
        for x in ctx.elements() {
            assert_eq!(ctx.add(x, ctx.neg(x)), ctx.zero());
        }
        assert_eq!(ctx.pow(ctx.omega(), 48), ctx.one());
    }

    #[test]
    fn multiplicative_inverses_exhaustive_f49() {
        let ctx = f(7, 1);
        for x in ctx.nonzero_elements() {
            assert_eq!(ctx.mul(ctx.inv(x).unwrap(), x), ctx.one());
        }
        assert!(matches!(ctx.inv(ctx.zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn primitivity_enumerates_all_nonzero() {
        let ctx = f(5, 1);
        let mut seen = vec![false; ctx.q2() as usize];
        for k in 0..ctx.group_order() {
            let x = ctx.pow(ctx.omega(), k as i64);
            assert!(!seen[x.index() as usize]);
            seen[x.index() as usize] = true;
        }
        assert_eq!(seen.iter().filter(|&&b| b).count() as u32, ctx.group_order());
    }

    #[test]
    fn frobenius_is_an_involution_and_fixes_subfield() {
        let ctx = f(5, 1);
        assert_eq!(ctx.frobenius(ctx.zero()), ctx.zero());
        assert_eq!(ctx.frobenius(ctx.one()), ctx.one());
        let fixed: Vec<Elt> = ctx.elements().filter(|&x| ctx.frobenius(x) == x).collect();
        assert_eq!(fixed.len() as u32, ctx.q());
        for x in ctx.elements() {
            assert_eq!(ctx.frobenius(ctx.frobenius(x)), x);
            assert!(fixed.contains(&x) == ctx.in_subfield(x));
        }
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative_f25() {
        let ctx = f(5, 1);
        for a in ctx.elements() {
            for b in ctx.elements() {
                assert_eq!(ctx.frobenius(ctx.add(a, b)), ctx.add(ctx.frobenius(a), ctx.frobenius(b)));
                assert_eq!(ctx.frobenius(ctx.mul(a, b)), ctx.mul(ctx.frobenius(a), ctx.frobenius(b)));
            }
        }
    }

    #[test]
    fn roots_of_unity_counts() {
        let ctx = f(7, 1);
        let roots = ctx.roots_of_unity(8).unwrap();
        assert_eq!(roots.len(), 8);
        for &d in &roots {
            assert_eq!(ctx.pow(d, 8), ctx.one());
        }
        assert_eq!(ctx.roots_of_unity(1).unwrap(), vec![ctx.one()]);
        assert!(matches!(ctx.roots_of_unity(5), Err(Error::NotADivisor(5, 48))));

        let f16 = f(2, 2);
        assert_eq!(f16.roots_of_unity(5).unwrap().len(), 5);
        assert_eq!(f16.deltas().len(), 5);
    }

    #[test]
    fn trace_properties() {
        let ctx = f(5, 1);
        assert_eq!(ctx.trace(ctx.zero()), ctx.zero());
        let mut image = std::collections::HashSet::new();
        for x in ctx.elements() {
            let t = ctx.trace(x);
            assert!(ctx.in_subfield(t));
            image.insert(t);
            for a in ctx.subfield_elements() {
                assert_eq!(ctx.trace(ctx.mul(a, x)), ctx.mul(a, ctx.trace(x)));
            }
        }
        assert_eq!(image.len() as u32, ctx.q());
    }

    #[test]
    fn subfield_is_closed() {
        let ctx = f(3, 2);
        for a in ctx.subfield_elements() {
            for b in ctx.subfield_elements() {
                assert!(ctx.in_subfield(ctx.add(a, b)));
                assert!(ctx.in_subfield(ctx.mul(a, b)));
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        let a = f(3, 2);
        let b = f(3, 2);
        assert_eq!(a.base_modulus(), b.base_modulus());
        assert_eq!(a.ext_modulus(), b.ext_modulus());
        assert_eq!(a.omega(), b.omega());
        assert_eq!(a.deltas(), b.deltas());
    }

    #[test]
    fn coefficient_round_trip() {
        let ctx = f(3, 2);
        for x in ctx.elements() {
            let c = ctx.elt_coeffs(x);
            assert_eq!(c.len(), 4);
            assert_eq!(ctx.elt_from_coeffs(&c).unwrap(), x);
        }
    }

    #[test]
    fn coords_in_basis_reconstructs() {
        let ctx = f(7, 1);
        let e1 = ctx.one();
        let e2 = Elt(7); // the generator t of the quadratic extension
        for y in ctx.elements() {
            let (c1, c2) = ctx.coords_in_basis(e1, e2, y);
            let back = ctx.add(ctx.mul(c1, e1), ctx.mul(c2, e2));
            assert_eq!(back, y);
        }
    }

    #[test]
    fn lines_partition_nonzero_elements() {
        let ctx = f(5, 1);
        let lines = ctx.lines();
        assert_eq!(lines.len() as u32, ctx.q() + 1);
        let mut covered = 0;
        for &d in &lines {
            assert_eq!(ctx.line_rep(d), d);
            covered += ctx.q() - 1;
        }
        assert_eq!(covered, ctx.q2() - 1);
    }

    #[test]
    fn solve_pow_q_minus_1_matches_scan() {
        let ctx = f(7, 1);
        for c in ctx.nonzero_elements() {
            let fast = ctx.solve_pow_q_minus_1(c);
            let scan = ctx
                .nonzero_elements()
                .find(|&x| ctx.pow(x, ctx.q() as i64 - 1) == c);
            assert_eq!(fast.is_some(), scan.is_some());
            if let Some(x) = fast {
                assert_eq!(ctx.pow(x, ctx.q() as i64 - 1), c);
            }
        }
    }
}
