//! Division-free characteristic polynomials over commutative rings.

use crate::field::{Elem, Fq};
use crate::poly::Poly;
use crate::residue::QuotientRing;

/// Commutative ring given by a context object; elements carry no context.
pub trait CommRing {
    type E: Clone;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn neg(&self, a: &Self::E) -> Self::E {
        self.sub(&self.zero(), a)
    }
}

/// Coefficients of det(x I - M), constant term first and monic, by Berkowitz's
/// algorithm. O(n^4) ring operations, no divisions.
pub fn charpoly<R: CommRing>(r: &R, m: &[Vec<R::E>]) -> Vec<R::E> {
    let n = m.len();
    // vec holds the charpoly of the trailing principal submatrix, highest degree first
    let mut vec: Vec<R::E> = vec![r.one()];
    for k in (0..n).rev() {
        // submatrix A = m[k+1.., k+1..], a = m[k][k], R = m[k][k+1..], C = m[k+1..][k]
        let size = n - k - 1;
        let a = &m[k][k];
        let mut diags = vec![r.one(), r.neg(a)];
        let mut col: Vec<R::E> = (k + 1..n).map(|i| m[i][k].clone()).collect();
        for step in 0..size {
            // -R * A^step * C
            let mut s = r.zero();
            for (j, cj) in col.iter().enumerate() {
                s = r.add(&s, &r.mul(&m[k][k + 1 + j], cj));
            }
            diags.push(r.neg(&s));
            if step + 1 < size {
                let mut next = vec![r.zero(); size];
                for (i, ni) in next.iter_mut().enumerate() {
                    let mut acc = r.zero();
                    for (j, cj) in col.iter().enumerate() {
                        if !r.is_zero(cj) {
                            acc = r.add(&acc, &r.mul(&m[k + 1 + i][k + 1 + j], cj));
                        }
                    }
                    *ni = acc;
                }
                col = next;
            }
        }
        // Toeplitz (size+2) x (size+1) lower-triangular matrix times vec
        let mut out = Vec::with_capacity(size + 2);
        for i in 0..size + 2 {
            let mut acc = r.zero();
            for (j, vj) in vec.iter().enumerate() {
                if i >= j && i - j < diags.len() {
                    acc = r.add(&acc, &r.mul(&diags[i - j], vj));
                }
            }
            out.push(acc);
        }
        vec = out;
    }
    vec.reverse();
    vec
}

/// F_q[X] realized by `Poly` (the variable name is irrelevant).
pub struct PolyRing(pub Fq);

impl CommRing for PolyRing {
    type E = Poly;
    fn zero(&self) -> Poly {
        Poly::zero(&self.0)
    }
    fn one(&self) -> Poly {
        Poly::one(&self.0)
    }
    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a + b
    }
    fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        a - b
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a * b
    }
    fn is_zero(&self, a: &Poly) -> bool {
        a.is_zero()
    }
}

/// Polynomials in t over the residue field F_p = A/p; coefficient vectors are
/// elements of the quotient ring, constant term first, trimmed.
pub struct ResiduePolyRing<'a> {
    pub base: &'a QuotientRing,
}

pub type ResiduePoly = Vec<Vec<Elem>>;

impl<'a> ResiduePolyRing<'a> {
    pub fn new(base: &'a QuotientRing) -> Self {
        ResiduePolyRing { base }
    }
    pub fn trim(&self, mut v: ResiduePoly) -> ResiduePoly {
        while v.last().map(|c| self.base.is_zero(c)) == Some(true) {
            v.pop();
        }
        v
    }
    pub fn constant(&self, c: Vec<Elem>) -> ResiduePoly {
        self.trim(vec![c])
    }
    /// t - c
    pub fn linear(&self, c: &[Elem]) -> ResiduePoly {
        vec![self.base.neg(c), self.base.one()]
    }
    /// Coefficientwise Frobenius (t fixed).
    pub fn sigma(&self, a: &ResiduePoly) -> ResiduePoly {
        a.iter().map(|c| self.base.frobenius(c)).collect()
    }
}

impl<'a> CommRing for ResiduePolyRing<'a> {
    type E = ResiduePoly;
    fn zero(&self) -> ResiduePoly {
        Vec::new()
    }
    fn one(&self) -> ResiduePoly {
        self.constant(self.base.one())
    }
    fn add(&self, a: &ResiduePoly, b: &ResiduePoly) -> ResiduePoly {
        let n = a.len().max(b.len());
        let z = self.base.zero();
        let v = (0..n)
            .map(|i| self.base.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.trim(v)
    }
    fn sub(&self, a: &ResiduePoly, b: &ResiduePoly) -> ResiduePoly {
        let n = a.len().max(b.len());
        let z = self.base.zero();
        let v = (0..n)
            .map(|i| self.base.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.trim(v)
    }
    fn mul(&self, a: &ResiduePoly, b: &ResiduePoly) -> ResiduePoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.base.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.base.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let p = self.base.mul(x, y);
                out[i + j] = self.base.add(&out[i + j], &p);
            }
        }
        self.trim(out)
    }
    fn is_zero(&self, a: &ResiduePoly) -> bool {
        a.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::Mat;

    #[test]
    fn matches_hessenberg_over_field() {
        let f = Fq::new(5).unwrap();
        let r = PolyRing(f.clone());
        let vals = [[1, 2, 0, 4], [3, 1, 1, 0], [0, 2, 4, 1], [1, 1, 3, 2]];
        let m: Vec<Vec<Poly>> =
            vals.iter().map(|row| row.iter().map(|&x| Poly::constant(&f, x)).collect()).collect();
        let cp = charpoly(&r, &m);
        let mut mm = Mat::zero(&f, 4);
        for i in 0..4 {
            for j in 0..4 {
                mm.set(i, j, vals[i][j]);
            }
        }
        let expected = mm.charpoly();
        for (k, c) in cp.iter().enumerate() {
            assert_eq!(c.coeff(0), expected.coeff(k));
            assert!(c.is_constant());
        }
    }

    #[test]
    fn two_by_two_polynomial_entries() {
        // [[X, 1], [1, X]]: det(x - M) = (x - X)^2 - 1
        let f = Fq::new(3).unwrap();
        let r = PolyRing(f.clone());
        let x = Poly::t(&f);
        let one = Poly::one(&f);
        let cp = charpoly(&r, &[vec![x.clone(), one.clone()], vec![one.clone(), x.clone()]]);
        assert_eq!(cp[2], one);
        assert_eq!(cp[1], x.scale(f.neg(2)));
        assert_eq!(cp[0], &(&x * &x) - &one);
    }
}
