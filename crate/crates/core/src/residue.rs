//! Quotient rings A/I, the F_q-linear action of phi_t on them, Krylov annihilators
//! and Fitting ideals.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::ore::DrinfeldModel;
use crate::poly::{raw, Poly};

/// A/I with basis 1, t, ..., t^(n-1); elements are dense vectors of length n.
#[derive(Clone)]
pub struct QuotientRing {
    f: Fq,
    m: Vec<Elem>,
    n: usize,
    frob: Vec<Vec<Elem>>,
}

impl QuotientRing {
    pub fn new(modulus: &Poly) -> Result<QuotientRing> {
        if modulus.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let f = modulus.field().clone();
        let m = modulus.monic().into_coeffs();
        let n = m.len() - 1;
        let mut r = QuotientRing { f, m, n, frob: Vec::new() };
        r.frob = r.build_frobenius();
        Ok(r)
    }

    fn build_frobenius(&self) -> Vec<Vec<Elem>> {
        let q = self.f.q();
        let mut tq = self.one();
        for _ in 0..q {
            tq = self.mul_t(&tq);
        }
        let mut out = Vec::with_capacity(self.n);
        let mut cur = self.one();
        for _ in 0..self.n {
            let next = self.mul(&cur, &tq);
            out.push(cur);
            cur = next;
        }
        out
    }

    pub fn field(&self) -> &Fq {
        &self.f
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn modulus(&self) -> Poly {
        Poly::new(&self.f, self.m.clone())
    }
    pub fn modulus_coeffs(&self) -> &[Elem] {
        &self.m
    }

    pub fn zero(&self) -> Vec<Elem> {
        vec![0; self.n]
    }
    pub fn one(&self) -> Vec<Elem> {
        let mut v = self.zero();
        if self.n > 0 {
            v[0] = 1;
        }
        v
    }
    pub fn is_zero(&self, v: &[Elem]) -> bool {
        v.iter().all(|&x| x == 0)
    }

    /// Canonical representative as a vector.
    pub fn reduce_slice(&self, a: &[Elem]) -> Vec<Elem> {
        let mut r = a.to_vec();
        raw::rem_monic(&self.f, &mut r, &self.m);
        r.resize(self.n, 0);
        r
    }
    pub fn from_poly(&self, p: &Poly) -> Vec<Elem> {
        self.reduce_slice(p.coeffs())
    }
    pub fn to_poly(&self, v: &[Elem]) -> Poly {
        Poly::new(&self.f, v.to_vec())
    }
    /// Canonical representative of degree < deg I.
    pub fn reduce(&self, p: &Poly) -> Poly {
        self.to_poly(&self.from_poly(p))
    }

    pub fn add(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(&x, &y)| self.f.add(x, y)).collect()
    }
    pub fn sub(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(&x, &y)| self.f.sub(x, y)).collect()
    }
    pub fn neg(&self, a: &[Elem]) -> Vec<Elem> {
        a.iter().map(|&x| self.f.neg(x)).collect()
    }
    pub fn scale(&self, s: Elem, a: &[Elem]) -> Vec<Elem> {
        let row = self.f.mul_row(s);
        a.iter().map(|&x| row[x as usize]).collect()
    }
    /// `acc += s * a`
    pub fn axpy(&self, acc: &mut [Elem], s: Elem, a: &[Elem]) {
        if s == 0 {
            return;
        }
        let row = self.f.mul_row(s);
        for (x, &y) in acc.iter_mut().zip(a) {
            *x = self.f.add(*x, row[y as usize]);
        }
    }
    pub fn mul(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let mut r = raw::mul(&self.f, a, b);
        raw::rem_monic(&self.f, &mut r, &self.m);
        r.resize(self.n, 0);
        r
    }
    /// Multiplication by t.
    pub fn mul_t(&self, a: &[Elem]) -> Vec<Elem> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        let top = a[n - 1];
        let mut r = Vec::with_capacity(n);
        r.push(0);
        r.extend_from_slice(&a[..n - 1]);
        if top != 0 {
            let row = self.f.mul_row(self.f.neg(top));
            for (x, &mj) in r.iter_mut().zip(&self.m[..n]) {
                *x = self.f.add(*x, row[mj as usize]);
            }
        }
        r
    }
    /// a^q, using the table of t^(jq).
    pub fn frobenius(&self, a: &[Elem]) -> Vec<Elem> {
        let mut r = self.zero();
        for (j, &c) in a.iter().enumerate() {
            self.axpy(&mut r, c, &self.frob[j]);
        }
        r
    }
    pub fn frobenius_pow(&self, a: &[Elem], i: usize) -> Vec<Elem> {
        let mut r = a.to_vec();
        for _ in 0..i {
            r = self.frobenius(&r);
        }
        r
    }
    pub fn pow(&self, a: &[Elem], mut e: u64) -> Vec<Elem> {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
    pub fn inv(&self, a: &[Elem]) -> Option<Vec<Elem>> {
        let p = self.to_poly(a);
        p.inv_mod(&self.modulus()).map(|u| self.from_poly(&u))
    }

    /// Frobenius matrix: column j is t^(jq).
    pub fn frobenius_matrix(&self) -> Mat {
        let mut m = Mat::zero(&self.f, self.n);
        for j in 0..self.n {
            for i in 0..self.n {
                m.set(i, j, self.frob[j][i]);
            }
        }
        m
    }
    /// Matrix of multiplication by `a`.
    pub fn mul_matrix(&self, a: &[Elem]) -> Mat {
        let mut m = Mat::zero(&self.f, self.n);
        let mut col = a.to_vec();
        for j in 0..self.n {
            for i in 0..self.n {
                m.set(i, j, col[i]);
            }
            col = self.mul_t(&col);
        }
        m
    }
}

impl fmt::Debug for QuotientRing {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "A/({})", self.modulus())
    }
}

/// Square matrix over F_q acting on column vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    f: Fq,
    n: usize,
    d: Vec<Elem>,
}

impl Mat {
    pub fn zero(f: &Fq, n: usize) -> Mat {
        Mat { f: f.clone(), n, d: vec![0; n * n] }
    }
    pub fn identity(f: &Fq, n: usize) -> Mat {
        let mut m = Mat::zero(f, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn field(&self) -> &Fq {
        &self.f
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.d[i * self.n + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.d[i * self.n + j] = v;
    }
    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        let f = &self.f;
        (0..self.n)
            .map(|i| {
                let row = &self.d[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }
    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        let f = &self.f;
        let mut r = Mat::zero(f, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let row = f.mul_row(a);
                for j in 0..n {
                    let idx = i * n + j;
                    r.d[idx] = f.add(r.d[idx], row[o.d[k * n + j] as usize]);
                }
            }
        }
        r
    }
    pub fn add(&self, o: &Mat) -> Mat {
        let f = &self.f;
        Mat { f: f.clone(), n: self.n, d: self.d.iter().zip(&o.d).map(|(&a, &b)| f.add(a, b)).collect() }
    }

    /// Characteristic polynomial det(t I - M) via Hessenberg reduction.
    pub fn charpoly(&self) -> Poly {
        let f = &self.f;
        let n = self.n;
        let mut h = self.clone();
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| h.get(i, m - 1) != 0) else { continue };
            if i != m {
                for j in 0..n {
                    h.d.swap(i * n + j, m * n + j);
                }
                for r in 0..n {
                    h.d.swap(r * n + i, r * n + m);
                }
            }
            let piv_inv = f.inv(h.get(m, m - 1));
            for i in m + 1..n {
                let u = f.mul(h.get(i, m - 1), piv_inv);
                if u == 0 {
                    continue;
                }
                // row_i -= u row_m ; col_m += u col_i
                for j in 0..n {
                    let v = f.sub(h.get(i, j), f.mul(u, h.get(m, j)));
                    h.set(i, j, v);
                }
                for r in 0..n {
                    let v = f.add(h.get(r, m), f.mul(u, h.get(r, i)));
                    h.set(r, m, v);
                }
            }
        }
        // p_k = (t - h_kk) p_{k-1} - sum_{i<k} h_{ik} (prod_{j=i+1}^{k} h_{j,j-1}) p_{i-1}
        let mut ps: Vec<Poly> = vec![Poly::one(f)];
        for k in 0..n {
            let mut pk = &Poly::linear(f, h.get(k, k)) * &ps[k];
            let mut prod: Elem = 1;
            for i in (0..k).rev() {
                prod = f.mul(prod, h.get(i + 1, i));
                if prod == 0 {
                    break;
                }
                let c = f.mul(h.get(i, k), prod);
                pk = &pk - &ps[i].scale(c);
            }
            ps.push(pk);
        }
        ps.pop().unwrap()
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            writeln!(fm, "{:?}", &self.d[i * self.n..(i + 1) * self.n])?;
        }
        Ok(())
    }
}

/// y -> phi_t(y) mod I, applied directly without forming a matrix.
pub struct PhiAction<'a> {
    ring: &'a QuotientRing,
    gs: Vec<Vec<Elem>>,
}

impl<'a> PhiAction<'a> {
    pub fn new(model: &DrinfeldModel, ring: &'a QuotientRing) -> PhiAction<'a> {
        let gs = model.gs().iter().map(|g| ring.from_poly(g)).collect();
        PhiAction { ring, gs }
    }
    pub fn ring(&self) -> &QuotientRing {
        self.ring
    }
    pub fn apply(&self, y: &[Elem]) -> Vec<Elem> {
        let r = self.ring;
        let mut acc = r.mul_t(y);
        let mut fy = y.to_vec();
        for g in &self.gs {
            fy = r.frobenius(&fy);
            if !r.is_zero(g) {
                let term = r.mul(g, &fy);
                acc = r.add(&acc, &term);
            }
        }
        acc
    }
    /// phi_a(y) mod I.
    pub fn apply_a(&self, a: &Poly, y: &[Elem]) -> Vec<Elem> {
        let r = self.ring;
        let mut acc = r.zero();
        let mut cur = y.to_vec();
        for (k, &c) in a.coeffs().iter().enumerate() {
            if k > 0 {
                cur = self.apply(&cur);
            }
            r.axpy(&mut acc, c, &cur);
        }
        acc
    }
}

/// Matrix M with M vec(y) = vec(phi_t(y) mod I).
pub fn phi_t_matrix(model: &DrinfeldModel, ring: &QuotientRing) -> Mat {
    let act = PhiAction::new(model, ring);
    let n = ring.dim();
    let mut m = Mat::zero(ring.field(), n);
    let mut e = ring.one();
    for j in 0..n {
        let col = act.apply(&e);
        for i in 0..n {
            m.set(i, j, col[i]);
        }
        e = ring.mul_t(&e);
    }
    m
}

/// Minimal monic c with c(M) v = 0 (Krylov sequence with incremental elimination).
pub fn krylov_annihilator(f: &Fq, mut apply: impl FnMut(&[Elem]) -> Vec<Elem>, v0: &[Elem]) -> Poly {
    let n = v0.len();
    // basis rows: (vector, pivot, combination of Krylov vectors)
    let mut basis: Vec<(Vec<Elem>, usize, Vec<Elem>)> = Vec::new();
    let mut v = v0.to_vec();
    for k in 0..=n {
        let mut w = v.clone();
        let mut combo = vec![0; k + 1];
        combo[k] = 1;
        for (b, piv, bc) in &basis {
            let c = w[*piv];
            if c != 0 {
                let row = f.mul_row(f.neg(c));
                for (x, &y) in w.iter_mut().zip(b) {
                    *x = f.add(*x, row[y as usize]);
                }
                for (x, &y) in combo.iter_mut().zip(bc) {
                    *x = f.add(*x, row[y as usize]);
                }
            }
        }
        match w.iter().position(|&x| x != 0) {
            None => return Poly::new(f, combo),
            Some(piv) => {
                let inv = f.inv(w[piv]);
                let row = f.mul_row(inv);
                for x in w.iter_mut() {
                    *x = row[*x as usize];
                }
                for x in combo.iter_mut() {
                    *x = row[*x as usize];
                }
                basis.push((w, piv, combo));
            }
        }
        if k < n {
            v = apply(&v);
        }
    }
    unreachable!("n+1 vectors in an n-dimensional space are dependent")
}

/// Monic generator of pi_x(phi; I) = ker(a -> phi_a(x) mod I).
pub fn annihilator_mod(model: &DrinfeldModel, x: &Poly, modulus: &Poly) -> Result<Poly> {
    let ring = QuotientRing::new(modulus)?;
    Ok(annihilator_in(model, x, &ring))
}

pub fn annihilator_in(model: &DrinfeldModel, x: &Poly, ring: &QuotientRing) -> Poly {
    let m = phi_t_matrix(model, ring);
    krylov_annihilator(ring.field(), |v| m.mul_vec(v), &ring.from_poly(x))
}

/// Monic generator of the Fitting ideal |phi(A/I)|: characteristic polynomial of phi_t on A/I.
pub fn fitting_ideal(model: &DrinfeldModel, modulus: &Poly) -> Poly {
    let ring = QuotientRing::new(modulus).expect("nonzero modulus");
    phi_t_matrix(model, &ring).charpoly()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;

    #[test]
    fn reduce_examples() {
        let f = Fq::new(2).unwrap();
        let r = QuotientRing::new(&Poly::from_ints(&f, &[1, 1, 1])).unwrap();
        assert_eq!(r.reduce(&Poly::from_ints(&f, &[1, 0, 1])), Poly::t(&f));
        let f3 = Fq::new(3).unwrap();
        let rt = QuotientRing::new(&Poly::t(&f3)).unwrap();
        assert!(rt.reduce(&Poly::from_ints(&f3, &[0, 0, 0, 1])).is_zero());
        let r1 = QuotientRing::new(&Poly::one(&f3)).unwrap();
        assert!(r1.reduce(&Poly::from_ints(&f3, &[2, 1])).is_zero());
    }

    #[test]
    fn frobenius_table() {
        let f = Fq::new(4).unwrap();
        let m = Poly::new(&f, vec![2, 1, 0, 1]);
        let r = QuotientRing::new(&m).unwrap();
        let a = Poly::new(&f, vec![3, 2, 1]);
        assert_eq!(r.to_poly(&r.frobenius(&r.from_poly(&a))), a.pow(4).rem(&m).unwrap());
        let fm = r.frobenius_matrix();
        assert_eq!(fm.mul_vec(&r.from_poly(&a)), r.frobenius(&r.from_poly(&a)));
    }

    #[test]
    fn phi_matrix_examples() {
        let f3 = Fq::new(3).unwrap();
        let c3 = DrinfeldModel::carlitz(&f3);
        let r = QuotientRing::new(&Poly::t(&f3)).unwrap();
        let m = phi_t_matrix(&c3, &r);
        assert_eq!(m.get(0, 0), 1);
        let f2 = Fq::new(2).unwrap();
        let c2 = DrinfeldModel::carlitz(&f2);
        let r2 = QuotientRing::new(&Poly::from_ints(&f2, &[1, 1, 1])).unwrap();
        let m2 = phi_t_matrix(&c2, &r2);
        assert_eq!(r2.to_poly(&m2.mul_vec(&r2.one())), Poly::from_ints(&f2, &[1, 1]));
        // degree-one place: scalar alpha + sum g_i(alpha)
        let f5 = Fq::new(5).unwrap();
        let model = parse_model("t + (t^2+1)*tau + (2*t)*tau^2", &f5).unwrap();
        for a in f5.elements() {
            let rr = QuotientRing::new(&Poly::linear(&f5, a)).unwrap();
            let mm = phi_t_matrix(&model, &rr);
            let expected = model.gs().iter().fold(a, |acc, g| f5.add(acc, g.eval(a)));
            assert_eq!(mm.get(0, 0), expected);
        }
    }

    #[test]
    fn annihilator_examples() {
        let f3 = Fq::new(3).unwrap();
        let c3 = DrinfeldModel::carlitz(&f3);
        let t = Poly::t(&f3);
        assert!(annihilator_mod(&c3, &Poly::zero(&f3), &t).unwrap().is_one());
        assert_eq!(annihilator_mod(&c3, &Poly::one(&f3), &t).unwrap(), Poly::from_ints(&f3, &[-1, 1]));
        let f2 = Fq::new(2).unwrap();
        let c2 = DrinfeldModel::carlitz(&f2);
        let t2 = Poly::from_ints(&f2, &[0, 0, 1]);
        assert_eq!(annihilator_mod(&c2, &Poly::one(&f2), &t2).unwrap(), Poly::from_ints(&f2, &[0, 1, 1]));
    }

    #[test]
    fn fitting_examples() {
        let f3 = Fq::new(3).unwrap();
        let c3 = DrinfeldModel::carlitz(&f3);
        assert_eq!(fitting_ideal(&c3, &Poly::t(&f3)), Poly::from_ints(&f3, &[-1, 1]));
        assert!(fitting_ideal(&c3, &Poly::one(&f3)).is_one());
    }

    #[test]
    fn hessenberg_matches_cayley_hamilton() {
        let f = Fq::new(5).unwrap();
        let model = parse_model("t + (t^3+2*t+1)*tau + (4*t^2)*tau^2", &f).unwrap();
        let r = QuotientRing::new(&Poly::from_ints(&f, &[1, 2, 0, 3, 1, 1])).unwrap();
        let m = phi_t_matrix(&model, &r);
        let cp = m.charpoly();
        assert_eq!(cp.deg(), 5);
        // cp(M) = 0
        let mut acc = Mat::zero(&f, 5);
        for &c in cp.coeffs().iter().rev() {
            acc = acc.mul(&m);
            let mut ci = Mat::identity(&f, 5);
            for i in 0..5 {
                ci.set(i, i, c);
            }
            acc = acc.add(&ci);
        }
        assert_eq!(acc, Mat::zero(&f, 5));
    }
}
