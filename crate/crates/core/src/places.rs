//! Places of A = F_q[t]: monic irreducible polynomials, their enumeration and counts.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::poly::{raw, Poly};
use crate::rational::RationalFunction;
use crate::valuation::Valuation;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Place {
    gen: Poly,
}

impl Place {
    /// Checked constructor: the generator must be monic irreducible of degree >= 1.
    pub fn new(gen: Poly) -> Result<Place> {
        if gen.deg() < 1 || !gen.is_monic() {
            return Err(Error::InvalidArgument(format!("{gen} is not a monic nonconstant polynomial")));
        }
        if !gen.is_irreducible()? {
            return Err(Error::InvalidArgument(format!("{gen} is not irreducible")));
        }
        Ok(Place { gen })
    }

    /// Constructor for generators already known to be irreducible.
    pub(crate) fn new_unchecked(gen: Poly) -> Place {
        debug_assert!(gen.is_monic() && gen.deg() >= 1);
        Place { gen }
    }

    pub fn generator(&self) -> &Poly {
        &self.gen
    }
    pub fn degree(&self) -> usize {
        self.gen.deg() as usize
    }
    pub fn field(&self) -> &Fq {
        self.gen.field()
    }
    /// Hypothesis (H): fails only for q = 2 and degree 1.
    pub fn satisfies_h(&self) -> bool {
        !(self.field().q() == 2 && self.degree() == 1)
    }

    pub fn valuation(&self, f: &Poly) -> Valuation {
        match f.valuation_at(&self.gen) {
            None => Valuation::Infinite,
            Some(v) => Valuation::Finite(v as i64),
        }
    }
    pub fn valuation_rat(&self, f: &RationalFunction) -> Valuation {
        f.valuation_at(&self.gen)
    }

    /// Root of a degree-1 place t - alpha.
    pub fn root(&self) -> Option<Elem> {
        if self.degree() == 1 {
            Some(self.field().neg(self.gen.coeff(0)))
        } else {
            None
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gen)
    }
}
impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Place({})", self.gen)
    }
}

fn mobius(mut n: u64) -> i64 {
    let mut m = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            m = -m;
        }
        d += 1;
    }
    if n > 1 {
        m = -m;
    }
    m
}

/// Number of monic irreducibles of degree d over F_q: (1/d) sum_{e|d} mu(e) q^(d/e).
pub fn count_places(q: u64, d: u32) -> u64 {
    let mut s: i128 = 0;
    for e in 1..=d {
        if d % e == 0 {
            s += mobius(e as u64) as i128 * (q as i128).pow(d / e);
        }
    }
    (s / d as i128) as u64
}

/// Number of monic candidates of degree d, q^d.
pub fn candidate_count(q: usize, d: usize) -> u64 {
    (q as u64).pow(d as u32)
}

/// The monic degree-d candidate with lexicographic index `idx`; the constant
/// coefficient is the most significant digit.
pub fn candidate(f: &Fq, d: usize, idx: u64) -> Vec<Elem> {
    let q = f.q() as u64;
    let mut c = vec![0; d + 1];
    let mut n = idx;
    for i in (0..d).rev() {
        c[i] = (n % q) as Elem;
        n /= q;
    }
    c[d] = 1;
    c
}

fn raw_gcd_is_one(f: &Fq, a: &[Elem], b: &[Elem]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    raw::trim(&mut x);
    raw::trim(&mut y);
    while !y.is_empty() {
        // x mod y with y made monic
        let inv = f.inv(*y.last().unwrap());
        let row = f.mul_row(inv);
        for c in y.iter_mut() {
            *c = row[*c as usize];
        }
        raw::rem_monic(f, &mut x, &y);
        std::mem::swap(&mut x, &mut y);
    }
    x.len() == 1
}

/// Ben-Or irreducibility test on a monic coefficient slice of degree >= 1.
pub fn is_irreducible_monic(f: &Fq, m: &[Elem]) -> bool {
    let n = m.len() - 1;
    if n == 1 {
        return true;
    }
    if m[0] == 0 {
        return false;
    }
    // Cheap rejection of linear factors.
    for a in 1..f.q() as Elem {
        if m.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, a), c)) == 0 {
            return false;
        }
    }
    if n <= 3 {
        return true;
    }
    let q = f.q();
    // table[j] = t^(j q) mod m
    let mut table: Vec<Vec<Elem>> = Vec::with_capacity(n);
    let mut cur = vec![1u8];
    let mut tq = vec![0u8; q + 1];
    tq[q] = 1;
    raw::rem_monic(f, &mut tq, m);
    for _ in 0..n {
        table.push(cur.clone());
        cur = raw::mul(f, &cur, &tq);
        raw::rem_monic(f, &mut cur, m);
    }
    let mut x = tq.clone();
    for i in 1..=n / 2 {
        if i > 1 {
            let mut y = Vec::new();
            for (j, &c) in x.iter().enumerate() {
                raw::axpy(f, &mut y, c, &table[j], 0);
            }
            raw::trim(&mut y);
            x = y;
        }
        // Linear factors were excluded already.
        if i == 1 {
            continue;
        }
        let mut g = x.clone();
        if g.len() < 2 {
            g.resize(2, 0);
        }
        g[1] = f.sub(g[1], 1);
        raw::trim(&mut g);
        if !raw_gcd_is_one(f, &g, m) {
            return false;
        }
    }
    true
}

/// All places of degree exactly d, in lexicographic order (constant term first).
pub fn enumerate_places(f: &Fq, d: usize) -> impl Iterator<Item = Place> + '_ {
    assert!(d >= 1, "places have degree at least 1");
    (0..candidate_count(f.q(), d)).filter_map(move |idx| {
        let c = candidate(f, d, idx);
        if is_irreducible_monic(f, &c) {
            Some(Place::new_unchecked(Poly::new(f, c)))
        } else {
            None
        }
    })
}

/// Places of degree 1..=max_degree, ordered by degree then lexicographically.
pub fn places_up_to(f: &Fq, max_degree: usize) -> Vec<Place> {
    (1..=max_degree).flat_map(|d| enumerate_places(f, d)).collect()
}

/// The smallest place satisfying (H): t when q > 2, t^2 + t + 1 when q = 2.
pub fn smallest_h_place(f: &Fq) -> Place {
    if f.q() == 2 {
        Place::new_unchecked(Poly::new(f, vec![1, 1, 1]))
    } else {
        Place::new_unchecked(Poly::t(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_q2() {
        let f = Fq::new(2).unwrap();
        let ps: Vec<String> = enumerate_places(&f, 1).map(|p| p.to_string()).collect();
        assert_eq!(ps, vec!["t", "t + 1"]);
    }

    #[test]
    fn counts() {
        assert_eq!(count_places(2, 6), 9);
        assert_eq!(count_places(3, 2), 3);
        let f2 = Fq::new(2).unwrap();
        assert_eq!(enumerate_places(&f2, 6).count(), 9);
        let f3 = Fq::new(3).unwrap();
        assert_eq!(enumerate_places(&f3, 2).count(), 3);
    }

    #[test]
    fn fast_test_matches_ben_or() {
        for q in [2, 3, 4, 5] {
            let f = Fq::new(q).unwrap();
            for d in 1..=5usize {
                if candidate_count(q as usize, d) > 4000 {
                    continue;
                }
                for idx in 0..candidate_count(q as usize, d) {
                    let c = candidate(&f, d, idx);
                    let p = Poly::new(&f, c.clone());
                    assert_eq!(is_irreducible_monic(&f, &c), p.is_irreducible().unwrap(), "{p}");
                }
            }
        }
    }

    #[test]
    fn lexicographic_order_constant_first() {
        let f = Fq::new(3).unwrap();
        let ps: Vec<String> = enumerate_places(&f, 2).map(|p| p.to_string()).collect();
        assert_eq!(ps, vec!["t^2 + 1", "t^2 + t + 2", "t^2 + 2*t + 2"]);
    }

    #[test]
    fn hypothesis_flag() {
        let f2 = Fq::new(2).unwrap();
        assert!(!Place::new(Poly::t(&f2)).unwrap().satisfies_h());
        assert!(smallest_h_place(&f2).satisfies_h());
        let f3 = Fq::new(3).unwrap();
        assert!(Place::new(Poly::t(&f3)).unwrap().satisfies_h());
        assert!(Place::new(Poly::from_ints(&f3, &[1, 0, 1, 0])).is_ok());
        assert!(Place::new(Poly::from_ints(&f3, &[2, 0, 1])).is_err());
    }
}
