//! Linearized polynomials L(x) = a1·x^q + a0·x of F_{q^2}: evaluation, rank
//! via the Dickson matrix, kernel and image bases, the closed-form rank-2
//! compositional inverse, and enumeration of the monic families.

use crate::error::{Error, Result};
use crate::fields::{Elt, FieldCtx};

/// A linearized polynomial a1·x^q + a0·x with its rank cached.
///
/// Equality is coefficient equality; over F_{q^2} the coefficients determine
/// the induced F_q-linear map uniquely, so this coincides with map equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LinPoly {
    a1: Elt,
    a0: Elt,
    rank: u8,
}

impl LinPoly {
    pub fn new(ctx: &FieldCtx, a1: Elt, a0: Elt) -> LinPoly {
        let rank = if a0.is_zero() && a1.is_zero() {
            0
        } else if ctx.norm(a0) != ctx.norm(a1) {
            2
        } else {
            1
        };
        LinPoly { a1, a0, rank }
    }

    /// The monic rank-1 polynomial x^q + delta·x. delta must satisfy
    /// delta^{q+1} = 1.
    pub fn rank1_monic(ctx: &FieldCtx, delta: Elt) -> Result<LinPoly> {
        if !ctx.is_unit_norm(delta) {
            return Err(Error::InvalidDelta);
        }
        Ok(LinPoly::new(ctx, Elt::ONE, delta))
    }

    pub fn a1(&self) -> Elt {
        self.a1
    }
    pub fn a0(&self) -> Elt {
        self.a0
    }
    pub fn rank(&self) -> u8 {
        self.rank
    }
    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    #[inline]
    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        ctx.add(ctx.mul(self.a1, ctx.frobenius(x)), ctx.mul(self.a0, x))
    }

    /// c·L, another linearized polynomial.
    pub fn scale(&self, ctx: &FieldCtx, c: Elt) -> LinPoly {
        LinPoly::new(ctx, ctx.mul(c, self.a1), ctx.mul(c, self.a0))
    }

    /// Pointwise sum L + M.
    pub fn add(&self, ctx: &FieldCtx, other: &LinPoly) -> LinPoly {
        LinPoly::new(ctx, ctx.add(self.a1, other.a1), ctx.add(self.a0, other.a0))
    }

    /// The 2x2 Dickson matrix [[a0, a1], [a1^q, a0^q]].
    pub fn dickson_matrix(&self, ctx: &FieldCtx) -> [[Elt; 2]; 2] {
        [
            [self.a0, self.a1],
            [ctx.frobenius(self.a1), ctx.frobenius(self.a0)],
        ]
    }

    /// Rank of the Dickson matrix computed structurally (determinant plus
    /// zero test), as an algebraic cross-check of the cached norm criterion.
    pub fn dickson_rank(&self, ctx: &FieldCtx) -> u8 {
        let m = self.dickson_matrix(ctx);
        let det = ctx.sub(ctx.mul(m[0][0], m[1][1]), ctx.mul(m[0][1], m[1][0]));
        if !det.is_zero() {
            2
        } else if m.iter().flatten().all(|e| e.is_zero()) {
            0
        } else {
            1
        }
    }

    /// An F_q-basis of the kernel: 2 - rank vectors, each mapping to zero.
    ///
    /// For rank 1 the generator is found in closed form by solving
    /// x^{q-1} = -a0/a1 through the discrete logarithm; the exhaustive scan
    /// oracle lives in the tests.
    pub fn kernel_basis(&self, ctx: &FieldCtx) -> Vec<Elt> {
        match self.rank {
            2 => Vec::new(),
            0 => basis_of_whole_space(ctx),
            _ => {
                // rank 1 forces both coefficients nonzero
                let c = ctx.neg(ctx.div(self.a0, self.a1).expect("rank-1 has a1 != 0"));
                let gen = ctx
                    .solve_pow_q_minus_1(c)
                    .expect("rank-1 kernel equation is always solvable");
                debug_assert!(self.eval(ctx, gen).is_zero());
                vec![gen]
            }
        }
    }

    /// An F_q-basis of the image: rank vectors.
    pub fn image_basis(&self, ctx: &FieldCtx) -> Vec<Elt> {
        match self.rank {
            0 => Vec::new(),
            2 => basis_of_whole_space(ctx),
            _ => {
                let x = ctx
                    .nonzero_elements()
                    .map(|x| self.eval(ctx, x))
                    .find(|y| !y.is_zero())
                    .expect("rank-1 map has nonzero values");
                vec![x]
            }
        }
    }

    /// Closed-form compositional inverse of a rank-2 linearized polynomial:
    /// for L = a·x^q + b·x the inverse is
    /// (-a/(b^{q+1}-a^{q+1}))·x^q + (b^q/(b^{q+1}-a^{q+1}))·x.
    pub fn inverse_rank2(&self, ctx: &FieldCtx) -> Result<LinPoly> {
        if self.rank != 2 {
            return Err(Error::NotFullRank);
        }
        let denom = ctx.sub(ctx.norm(self.a0), ctx.norm(self.a1));
        let gamma = ctx.div(ctx.neg(self.a1), denom)?;
        let eps = ctx.div(ctx.frobenius(self.a0), denom)?;
        Ok(LinPoly::new(ctx, gamma, eps))
    }

    /// The unique linearized polynomial sending the basis {b1, b2} to
    /// {img1, img2}.
    pub fn from_basis_action(ctx: &FieldCtx, b1: Elt, img1: Elt, b2: Elt, img2: Elt) -> LinPoly {
        let det = ctx.sub(
            ctx.mul(ctx.frobenius(b1), b2),
            ctx.mul(ctx.frobenius(b2), b1),
        );
        assert!(!det.is_zero(), "b1, b2 must be an F_q-basis");
        let a1 = ctx
            .div(ctx.sub(ctx.mul(img1, b2), ctx.mul(img2, b1)), det)
            .expect("det nonzero");
        let a0 = ctx
            .div(
                ctx.sub(
                    ctx.mul(img2, ctx.frobenius(b1)),
                    ctx.mul(img1, ctx.frobenius(b2)),
                ),
                det,
            )
            .expect("det nonzero");
        let lp = LinPoly::new(ctx, a1, a0);
        debug_assert_eq!(lp.eval(ctx, b1), img1);
        debug_assert_eq!(lp.eval(ctx, b2), img2);
        lp
    }
}

fn basis_of_whole_space(ctx: &FieldCtx) -> Vec<Elt> {
    vec![ctx.one(), ctx.elt(ctx.q()).expect("t exists")]
}

/// All monic linearized polynomials of the requested rank: the q+1 rank-1
/// polynomials x^q + a0·x with a0^{q+1} = 1, or the q^2-q rank-2 ones (the
/// q^2-q-1 polynomials x^q + a0·x with a0^{q+1} != 1 together with the
/// polynomial x itself, whose leading coefficient is also 1).
pub fn enumerate_monic(ctx: &FieldCtx, rank: u8) -> Vec<LinPoly> {
    assert!(rank == 1 || rank == 2, "monic families exist for ranks 1 and 2");
    let mut out: Vec<LinPoly> = Vec::new();
    if rank == 2 {
        out.push(LinPoly::new(ctx, Elt::ZERO, Elt::ONE));
    }
    out.extend(
        ctx.elements()
            .map(|a0| LinPoly::new(ctx, Elt::ONE, a0))
            .filter(|l| l.rank() == rank),
    );
    out
}

/// Kernel generator of the rank-1 map x^q + delta·x.
pub fn rank1_kernel_gen(ctx: &FieldCtx, delta: Elt) -> Elt {
    debug_assert!(ctx.is_unit_norm(delta));
    ctx.solve_pow_q_minus_1(ctx.neg(delta))
        .expect("unit-norm delta always yields a kernel")
}

/// First element (in index order) outside the kernel of x^q + delta·x.
pub fn first_outside_kernel(ctx: &FieldCtx, delta: Elt) -> Elt {
    let s = LinPoly::rank1_monic(ctx, delta).expect("valid delta");
    ctx.nonzero_elements()
        .find(|&x| !s.eval(ctx, x).is_zero())
        .expect("rank-1 kernel is a proper subspace")
}
