//! Polynomials over the subfield F_q: evaluation, brute-force permutation
//! checks, and compositional inversion by Lagrange interpolation.

use crate::error::{Error, Result};
use crate::fields::{Elt, FieldCtx};

/// A polynomial with coefficients in F_q ⊂ F_{q^2}, little-endian.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BasePoly {
    coeffs: Vec<Elt>,
}

impl BasePoly {
    /// Builds from little-endian coefficients, all of which must lie in F_q.
    /// Trailing zeros are trimmed.
    pub fn new(ctx: &FieldCtx, mut coeffs: Vec<Elt>) -> Result<BasePoly> {
        if coeffs.iter().any(|&c| !ctx.in_subfield(c)) {
            return Err(Error::CoefficientNotInSubfield);
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&Elt::ZERO) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Elt::ZERO);
        }
        Ok(BasePoly { coeffs })
    }

    pub fn from_indices(ctx: &FieldCtx, indices: &[u32]) -> Result<BasePoly> {
        let coeffs = indices
            .iter()
            .map(|&i| ctx.elt(i))
            .collect::<Result<Vec<_>>>()?;
        BasePoly::new(ctx, coeffs)
    }

    /// x^m + gamma·x.
    pub fn binomial(ctx: &FieldCtx, m: usize, gamma: Elt) -> Result<BasePoly> {
        if m < 2 {
            return Err(Error::IndexOutOfRange(m as u64));
        }
        let mut coeffs = vec![Elt::ZERO; m + 1];
        coeffs[1] = gamma;
        coeffs[m] = Elt::ONE;
        BasePoly::new(ctx, coeffs)
    }

    /// The monomial x^m.
    pub fn monomial(m: usize) -> BasePoly {
        let mut coeffs = vec![Elt::ZERO; m + 1];
        coeffs[m] = Elt::ONE;
        BasePoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Elt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> Elt {
        self.coeffs.get(i).copied().unwrap_or(Elt::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&Elt::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Monic, zero constant term, zero linear term, degree >= 2: the shape
    /// that lifts to an s-polynomial.
    pub fn is_lift_shape(&self) -> bool {
        self.is_monic() && self.degree() >= 2 && self.coeff(0).is_zero() && self.coeff(1).is_zero()
    }

    /// Horner evaluation; sound for any point of F_{q^2}.
    pub fn eval(&self, ctx: &FieldCtx, x: Elt) -> Elt {
        let mut acc = Elt::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = ctx.add(ctx.mul(acc, x), c);
        }
        acc
    }

    /// Brute-force bijectivity of the evaluation map on F_q.
    pub fn is_permutation(&self, ctx: &FieldCtx) -> bool {
        let q = ctx.q() as usize;
        let mut seen = vec![false; ctx.q2() as usize];
        for x in ctx.subfield_elements() {
            let y = self.eval(ctx, x);
            if !ctx.in_subfield(y) || seen[y.index() as usize] {
                return false;
            }
            seen[y.index() as usize] = true;
        }
        seen.iter().filter(|&&b| b).count() == q
    }

    /// Adds gamma·x to the polynomial.
    pub fn with_linear(&self, ctx: &FieldCtx, gamma: Elt) -> Result<BasePoly> {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < 2 {
            coeffs.resize(2, Elt::ZERO);
        }
        coeffs[1] = ctx.add(coeffs[1], gamma);
        BasePoly::new(ctx, coeffs)
    }

    /// Splits off the linear coefficient: returns (poly without x-term, gamma).
    pub fn strip_linear(&self, ctx: &FieldCtx) -> (BasePoly, Elt) {
        let gamma = self.coeff(1);
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() > 1 {
            coeffs[1] = Elt::ZERO;
        }
        (BasePoly::new(ctx, coeffs).expect("coefficients unchanged"), gamma)
    }
}

/// The unique polynomial of degree < #points through the given points over
/// F_q. Abscissae must be distinct subfield elements.
pub fn lagrange_through(ctx: &FieldCtx, points: &[(Elt, Elt)]) -> Result<BasePoly> {
    let n = points.len();
    let mut out = vec![Elt::ZERO; n];
    let mut basis = vec![Elt::ZERO; n];
    for i in 0..n {
        let (xi, yi) = points[i];
        if yi.is_zero() {
            continue;
        }
        // numerator prod_{j != i} (y - x_j), built incrementally
        basis.iter_mut().for_each(|c| *c = Elt::ZERO);
        basis[0] = Elt::ONE;
        let mut deg = 0;
        let mut denom = Elt::ONE;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            denom = ctx.mul(denom, ctx.sub(xi, xj));
            deg += 1;
            for k in (1..=deg).rev() {
                basis[k] = ctx.sub(basis[k - 1], ctx.mul(xj, basis[k]));
            }
            basis[0] = ctx.mul(ctx.neg(xj), basis[0]);
        }
        if denom.is_zero() {
            return Err(Error::Malformed("repeated interpolation abscissa".into()));
        }
        let scale = ctx.div(yi, denom)?;
        for k in 0..n {
            out[k] = ctx.add(out[k], ctx.mul(scale, basis[k]));
        }
    }
    BasePoly::new(ctx, out)
}

/// Compositional inverse of a permutation of F_q: the unique polynomial of
/// degree < q interpolating {(phi(x), x)}.
pub fn lagrange_inverse(ctx: &FieldCtx, phi: &BasePoly) -> Result<BasePoly> {
    if !phi.is_permutation(ctx) {
        return Err(Error::NotAPermutation);
    }
    let points: Vec<(Elt, Elt)> = ctx.subfield_elements().map(|x| (phi.eval(ctx, x), x)).collect();
    lagrange_through(ctx, &points)
}
