//! Twisted polynomials A{tau} with tau*c = c^q*tau, Drinfeld models and their twists.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::poly::Poly;
use crate::residue::fitting_ideal;
use crate::tpoly::TPoly;

/// Largest number of coefficients an exact evaluation is allowed to produce.
pub const EXACT_EVAL_LIMIT: usize = 20_000_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrePoly {
    c: Vec<Poly>,
    f: Fq,
}

impl OrePoly {
    pub fn new(f: &Fq, mut c: Vec<Poly>) -> OrePoly {
        while c.last().map(|p| p.is_zero()) == Some(true) {
            c.pop();
        }
        OrePoly { c, f: f.clone() }
    }
    pub fn zero(f: &Fq) -> OrePoly {
        OrePoly { c: Vec::new(), f: f.clone() }
    }
    pub fn constant(p: Poly) -> OrePoly {
        let f = p.field().clone();
        OrePoly::new(&f, vec![p])
    }
    pub fn tau(f: &Fq) -> OrePoly {
        OrePoly::new(f, vec![Poly::zero(f), Poly::one(f)])
    }
    pub fn field(&self) -> &Fq {
        &self.f
    }
    pub fn coeffs(&self) -> &[Poly] {
        &self.c
    }
    pub fn coeff(&self, i: usize) -> Poly {
        self.c.get(i).cloned().unwrap_or_else(|| Poly::zero(&self.f))
    }
    /// tau-degree; `None` for zero.
    pub fn tau_degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn add(&self, o: &OrePoly) -> OrePoly {
        let n = self.c.len().max(o.c.len());
        OrePoly::new(&self.f, (0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }
    pub fn sub(&self, o: &OrePoly) -> OrePoly {
        let n = self.c.len().max(o.c.len());
        OrePoly::new(&self.f, (0..n).map(|i| &self.coeff(i) - &o.coeff(i)).collect())
    }
    pub fn neg(&self) -> OrePoly {
        OrePoly::new(&self.f, self.c.iter().map(|p| -p).collect())
    }

    /// (sum f_i tau^i)(sum g_j tau^j) = sum f_i g_j^(q^i) tau^(i+j)
    pub fn mul(&self, o: &OrePoly) -> OrePoly {
        if self.is_zero() || o.is_zero() {
            return OrePoly::zero(&self.f);
        }
        let mut c = vec![Poly::zero(&self.f); self.c.len() + o.c.len() - 1];
        for (i, fi) in self.c.iter().enumerate() {
            if fi.is_zero() {
                continue;
            }
            for (j, gj) in o.c.iter().enumerate() {
                if gj.is_zero() {
                    continue;
                }
                c[i + j] = &c[i + j] + &(fi * &gj.frobenius(i as u32));
            }
        }
        OrePoly::new(&self.f, c)
    }

    /// Left multiplication by a polynomial.
    pub fn scale_left(&self, a: &Poly) -> OrePoly {
        OrePoly::new(&self.f, self.c.iter().map(|p| a * p).collect())
    }

    /// sum f_i x^(q^i)
    pub fn eval(&self, x: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.f);
        for (i, fi) in self.c.iter().enumerate() {
            if !fi.is_zero() {
                acc = &acc + &(fi * &x.frobenius(i as u32));
            }
        }
        acc
    }

    /// Coefficientwise reduction modulo m.
    pub fn reduce(&self, m: &Poly) -> OrePoly {
        OrePoly::new(&self.f, self.c.iter().map(|p| p.rem(m).expect("nonzero modulus")).collect())
    }
}

impl fmt::Display for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::format_ore(self))
    }
}
impl fmt::Debug for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrePoly({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smallness {
    VerySmall,
    Small,
    Neither,
}

/// Result of the exact torsion test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionInfo {
    pub torsion: bool,
    /// Monic generator of the annihilator when `torsion` holds.
    pub annihilator: Option<Poly>,
}

/// A Drinfeld model: phi_t = t + g_1 tau + ... + g_r tau^r with g_r != 0, r >= 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DrinfeldModel {
    phi: OrePoly,
}

impl DrinfeldModel {
    /// Model with the given coefficients g_1..g_r (trailing zeros lower the rank).
    pub fn new(f: &Fq, g: Vec<Poly>) -> Result<DrinfeldModel> {
        let mut c = vec![Poly::t(f)];
        c.extend(g);
        Self::from_ore(OrePoly::new(f, c))
    }

    pub fn from_ore(phi: OrePoly) -> Result<DrinfeldModel> {
        let f = phi.field().clone();
        if phi.coeff(0) != Poly::t(&f) {
            return Err(Error::InvalidArgument("constant coefficient of phi_t must be t".into()));
        }
        if phi.tau_degree().unwrap_or(0) < 1 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        Ok(DrinfeldModel { phi })
    }

    pub fn carlitz(f: &Fq) -> DrinfeldModel {
        DrinfeldModel::new(f, vec![Poly::one(f)]).expect("rank 1")
    }

    pub fn field(&self) -> &Fq {
        self.phi.field()
    }
    pub fn phi_t(&self) -> &OrePoly {
        &self.phi
    }
    pub fn rank(&self) -> usize {
        self.phi.tau_degree().unwrap()
    }
    /// g_i for 0 <= i <= r (g_0 = t).
    pub fn g(&self, i: usize) -> Poly {
        self.phi.coeff(i)
    }
    /// g_1..g_r
    pub fn gs(&self) -> &[Poly] {
        &self.phi.coeffs()[1..]
    }

    /// phi_a by Horner's scheme in phi_t.
    pub fn phi_a(&self, a: &Poly) -> OrePoly {
        let f = self.field();
        let mut acc = OrePoly::zero(f);
        for &c in a.coeffs().iter().rev() {
            acc = acc.mul(&self.phi).add(&OrePoly::constant(Poly::constant(f, c)));
        }
        acc
    }

    fn check_size(&self, y: &Poly) -> Result<()> {
        let q = self.field().q();
        let dy = y.deg().max(0) as usize;
        let mut bound = dy + 1;
        for (i, g) in self.gs().iter().enumerate() {
            if !g.is_zero() {
                let s = q.checked_pow(i as u32 + 1).unwrap_or(usize::MAX);
                bound = bound.max((g.deg() as usize).saturating_add(s.saturating_mul(dy)));
            }
        }
        if bound > EXACT_EVAL_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "exact evaluation would reach degree {bound}"
            )));
        }
        Ok(())
    }

    /// phi_t(x) in A.
    pub fn eval_phi_t(&self, x: &Poly) -> Result<Poly> {
        self.check_size(x)?;
        Ok(self.phi.eval(x))
    }

    /// phi_a(x) in A, accumulated as sum a_k phi_{t^k}(x).
    pub fn eval_phi_a(&self, a: &Poly, x: &Poly) -> Result<Poly> {
        let f = self.field();
        let mut acc = Poly::zero(f);
        let mut y = x.clone();
        for (k, &c) in a.coeffs().iter().enumerate() {
            if k > 0 {
                y = self.eval_phi_t(&y)?;
            }
            acc = &acc + &y.scale(c);
        }
        Ok(acc)
    }

    /// T-twisted form t + g_1 T tau + ... + g_r T^r tau^r.
    pub fn t_twist(&self) -> TOrePoly {
        let f = self.field();
        let c = self
            .phi
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, g)| TPoly::monomial(g.clone(), i))
            .collect();
        TOrePoly { c, f: f.clone() }
    }

    /// h^{-1} phi h: g_i -> g_i h^(q^i - 1).
    pub fn twist_by(&self, h: &Poly) -> Result<DrinfeldModel> {
        if h.is_zero() {
            return Err(Error::InvalidArgument("twist by zero".into()));
        }
        let q = self.field().q() as u64;
        let g = self
            .gs()
            .iter()
            .enumerate()
            .map(|(i, g)| g * &h.pow(q.pow(i as u32 + 1) - 1))
            .collect();
        DrinfeldModel::new(self.field(), g)
    }

    pub fn smallness(&self) -> Smallness {
        let q = self.field().q();
        let mut very = true;
        for (i, g) in self.gs().iter().enumerate() {
            let bound = q.pow(i as u32 + 1) as i64;
            if g.deg() > bound {
                return Smallness::Neither;
            }
            if g.deg() == bound {
                very = false;
            }
        }
        if very {
            Smallness::VerySmall
        } else {
            Smallness::Small
        }
    }

    pub fn is_small(&self) -> bool {
        self.smallness() != Smallness::Neither
    }

    /// Exact torsion test through the phi_t-orbit of x: torsion points have degree below
    /// `torsion_degree_bound`, so x is torsion iff its orbit stays below the bound, and the
    /// first linear relation in the orbit is the monic annihilator.
    pub fn is_torsion_point(&self, x: &Poly) -> Result<TorsionInfo> {
        let f = self.field();
        if x.is_zero() {
            return Ok(TorsionInfo { torsion: true, annihilator: Some(Poly::one(f)) });
        }
        let bound = self.torsion_degree_bound() as i64;
        // The orbit x, phi_t(x), ... of a torsion point stays torsion, hence below the
        // bound; conversely a bounded orbit spans a finite phi_t-stable space.
        let mut basis: Vec<(Vec<Elem>, usize, Vec<Elem>)> = Vec::new();
        let mut y = x.clone();
        for k in 0..=bound as usize {
            if y.deg() >= bound {
                return Ok(TorsionInfo { torsion: false, annihilator: None });
            }
            // v = coefficients of y, combo tracks y in terms of the orbit elements
            let mut v = y.coeffs().to_vec();
            v.resize(bound as usize, 0);
            let mut combo = vec![0; k + 1];
            combo[k] = 1;
            for (row, piv, rc) in &basis {
                let c = v[*piv];
                if c != 0 {
                    let m = f.neg(c);
                    for (a, &b) in v.iter_mut().zip(row) {
                        *a = f.add(*a, f.mul(m, b));
                    }
                    for (a, &b) in combo.iter_mut().zip(rc) {
                        *a = f.add(*a, f.mul(m, b));
                    }
                }
            }
            match v.iter().position(|&c| c != 0) {
                None => {
                    let ann = Poly::new(f, combo);
                    return Ok(TorsionInfo { torsion: true, annihilator: Some(ann) });
                }
                Some(piv) => {
                    let inv = f.inv(v[piv]);
                    let v = v.iter().map(|&c| f.mul(c, inv)).collect();
                    let combo = combo.iter().map(|&c| f.mul(c, inv)).collect();
                    basis.push((v, piv, combo));
                }
            }
            y = self.phi.eval(&y);
        }
        unreachable!("more than `bound` independent vectors of degree < bound")
    }

    /// D0 such that every torsion point has degree < D0: the smallest D with
    /// e_r + q^r D > max(D + 1, e_i + q^i D) for all i < r, where e_i = deg g_i.
    pub fn torsion_degree_bound(&self) -> usize {
        let q = self.field().q() as i64;
        let r = self.rank();
        let er = self.g(r).deg();
        let qr = q.pow(r as u32);
        let mut bound = 0i64;
        loop {
            let mut ok = er + qr * bound > bound + 1;
            for i in 1..r {
                let gi = self.g(i);
                if !gi.is_zero() {
                    ok &= er + qr * bound > gi.deg() + q.pow(i as u32) * bound;
                }
            }
            if ok {
                return bound as usize;
            }
            bound += 1;
        }
    }

    /// Torsion test relative to an explicit (H)-place.
    pub fn torsion_with_place(&self, x: &Poly, p0: &Poly) -> Result<TorsionInfo> {
        let f = self.field();
        if x.is_zero() {
            return Ok(TorsionInfo { torsion: true, annihilator: Some(Poly::one(f)) });
        }
        let a0 = fitting_ideal(self, p0);
        if !self.eval_phi_a(&a0, x)?.is_zero() {
            return Ok(TorsionInfo { torsion: false, annihilator: None });
        }
        for b in monic_divisors(&a0) {
            if self.eval_phi_a(&b, x)?.is_zero() {
                return Ok(TorsionInfo { torsion: true, annihilator: Some(b) });
            }
        }
        unreachable!("a0 itself annihilates x")
    }
}

/// Monic divisors of a nonzero polynomial, by increasing degree then lexicographically.
pub fn monic_divisors(a: &Poly) -> Vec<Poly> {
    let f = a.field();
    let n = a.deg().max(0) as usize;
    let mut out = Vec::new();
    for d in 0..=n {
        for idx in 0..crate::places::candidate_count(f.q(), d) {
            let b = Poly::new(f, crate::places::candidate(f, d, idx));
            if b.divides(a) {
                out.push(b);
            }
        }
    }
    out
}

impl fmt::Display for DrinfeldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phi)
    }
}
impl fmt::Debug for DrinfeldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DrinfeldModel({})", self.phi)
    }
}

/// Twisted polynomial with coefficients in A[T]; tau acts on t only.
#[derive(Clone, PartialEq, Eq)]
pub struct TOrePoly {
    c: Vec<TPoly>,
    f: Fq,
}

impl TOrePoly {
    pub fn coeffs(&self) -> &[TPoly] {
        &self.c
    }
    /// Specialization T = 1.
    pub fn specialize_one(&self) -> OrePoly {
        OrePoly::new(&self.f, self.c.iter().map(|c| c.eval_one()).collect())
    }
    /// sum c_i tau^i(u).
    pub fn eval(&self, u: &TPoly) -> TPoly {
        let mut acc = TPoly::zero(&self.f);
        for (i, ci) in self.c.iter().enumerate() {
            if !ci.is_zero() {
                acc = acc.add(&ci.mul(&u.frobenius(i as u32)));
            }
        }
        acc
    }
    /// phi~_a(u) as sum a_k phi~_{t^k}(u).
    pub fn eval_a(&self, a: &Poly, u: &TPoly) -> TPoly {
        let mut acc = TPoly::zero(&self.f);
        let mut y = u.clone();
        for (k, &c) in a.coeffs().iter().enumerate() {
            if k > 0 {
                y = self.eval(&y);
            }
            if c != 0 {
                acc = acc.add(&y.mul_poly(&Poly::constant(&self.f, c)));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;
    use crate::places::smallest_h_place;

    #[test]
    fn tau_times_constant() {
        let f = Fq::new(3).unwrap();
        let c = OrePoly::constant(Poly::from_ints(&f, &[1, 1]));
        let prod = OrePoly::tau(&f).mul(&c);
        assert_eq!(prod.coeff(1), Poly::from_ints(&f, &[1, 1]).pow(3));
    }

    #[test]
    fn square_of_carlitz_q2() {
        let f = Fq::new(2).unwrap();
        let c = DrinfeldModel::carlitz(&f);
        let sq = c.phi_t().mul(c.phi_t());
        assert_eq!(sq.coeff(0), Poly::from_ints(&f, &[0, 0, 1]));
        assert_eq!(sq.coeff(1), Poly::from_ints(&f, &[0, 1, 1]));
        assert_eq!(sq.coeff(2), Poly::one(&f));
        let a = Poly::from_ints(&f, &[0, 1, 1]);
        assert_eq!(c.phi_a(&a), sq.add(c.phi_t()));
    }

    #[test]
    fn evaluation_examples() {
        let f2 = Fq::new(2).unwrap();
        let c2 = DrinfeldModel::carlitz(&f2);
        assert_eq!(c2.eval_phi_t(&Poly::one(&f2)).unwrap(), Poly::from_ints(&f2, &[1, 1]));
        assert!(c2.phi_t().eval(&Poly::zero(&f2)).is_zero());
        let f3 = Fq::new(3).unwrap();
        let c3 = DrinfeldModel::carlitz(&f3);
        let t1 = Poly::from_ints(&f3, &[1, 1]);
        let expected = &(&Poly::t(&f3) * &t1) + &t1.pow(3);
        let t2 = Poly::from_ints(&f3, &[0, 0, 1]);
        assert_eq!(c3.eval_phi_a(&t2, &Poly::one(&f3)).unwrap(), expected);
        assert_eq!(c3.phi_a(&t2).eval(&Poly::one(&f3)), expected);
    }

    #[test]
    fn phi_a_of_constants_and_t() {
        let f = Fq::new(5).unwrap();
        let m = parse_model("t + (t^2+1)*tau + 3*tau^2", &f).unwrap();
        assert_eq!(&m.phi_a(&Poly::t(&f)), m.phi_t());
        assert_eq!(m.phi_a(&Poly::constant(&f, 3)), OrePoly::constant(Poly::constant(&f, 3)));
        assert_eq!(m.phi_a(&Poly::from_ints(&f, &[1, 2, 3])).tau_degree(), Some(4));
    }

    #[test]
    fn twists() {
        let f3 = Fq::new(3).unwrap();
        let c3 = DrinfeldModel::carlitz(&f3);
        assert_eq!(c3.twist_by(&Poly::one(&f3)).unwrap(), c3);
        assert_eq!(c3.twist_by(&Poly::constant(&f3, 2)).unwrap(), c3);
        let f2 = Fq::new(2).unwrap();
        let c2 = DrinfeldModel::carlitz(&f2);
        assert_eq!(c2.twist_by(&Poly::t(&f2)).unwrap(), parse_model("t + t*tau", &f2).unwrap());
        assert!(c2.twist_by(&Poly::zero(&f2)).is_err());
    }

    #[test]
    fn t_twist_examples() {
        let f = Fq::new(3).unwrap();
        let m = parse_model("t + t^3*tau + tau^2", &f).unwrap();
        let tw = m.t_twist();
        assert_eq!(tw.coeffs()[1], TPoly::monomial(Poly::from_ints(&f, &[0, 0, 0, 1]), 1));
        assert_eq!(tw.coeffs()[2], TPoly::monomial(Poly::one(&f), 2));
        assert_eq!(&tw.specialize_one(), m.phi_t());
    }

    #[test]
    fn smallness_examples() {
        let f = Fq::new(3).unwrap();
        assert_eq!(DrinfeldModel::carlitz(&f).smallness(), Smallness::VerySmall);
        assert_eq!(parse_model("t + t^3*tau", &f).unwrap().smallness(), Smallness::Small);
        assert_eq!(parse_model("t + t^4*tau", &f).unwrap().smallness(), Smallness::Neither);
    }

    #[test]
    fn torsion_examples() {
        let f2 = Fq::new(2).unwrap();
        let c2 = DrinfeldModel::carlitz(&f2);
        let r = c2.is_torsion_point(&Poly::one(&f2)).unwrap();
        assert!(r.torsion);
        assert_eq!(r.annihilator, Some(Poly::from_ints(&f2, &[0, 1, 1])));
        let z = c2.is_torsion_point(&Poly::zero(&f2)).unwrap();
        assert_eq!(z.annihilator, Some(Poly::one(&f2)));
        let f3 = Fq::new(3).unwrap();
        let c3 = DrinfeldModel::carlitz(&f3);
        let r3 = c3.is_torsion_point(&Poly::one(&f3)).unwrap();
        assert!(!r3.torsion);
        assert_eq!(r3.annihilator, None);
    }

    #[test]
    fn orbit_route_matches_fitting_route() {
        for q in [2u32, 3] {
            let f = Fq::new(q).unwrap();
            let p0 = smallest_h_place(&f);
            let max_idx = if q == 2 { 255u64 } else { 80 };
            let r = if q == 2 { 2 } else { 1 };
            for idx in 1..=max_idx {
                // decode a small model of rank <= r
                let mut n = idx;
                let mut gs = Vec::new();
                for i in 1..=r {
                    let len = (q as usize).pow(i as u32) + 1;
                    let mut c = Vec::with_capacity(len);
                    for _ in 0..len {
                        c.push((n % q as u64) as u8);
                        n /= q as u64;
                    }
                    gs.push(Poly::new(&f, c));
                }
                let m = DrinfeldModel::new(&f, gs).unwrap();
                for x in [Poly::one(&f), Poly::t(&f)] {
                    let a = m.is_torsion_point(&x).unwrap();
                    let b = m.torsion_with_place(&x, p0.generator()).unwrap();
                    assert_eq!(a, b, "{m} at {x}");
                }
            }
        }
    }
}
