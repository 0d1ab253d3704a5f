//! Dense univariate polynomials over F_q.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};

/// Polynomial in `t` over F_q, coefficients stored constant term first with no
/// trailing zeros. The zero polynomial has an empty coefficient list.
#[derive(Clone)]
pub struct Poly {
    c: Vec<Elem>,
    f: Fq,
}

/// Slice-level kernels shared with the modular and search code.
pub mod raw {
    use crate::field::{Elem, Fq};

    #[inline]
    pub fn trim(v: &mut Vec<Elem>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    /// `acc += s * b` (shifted by `shift`), growing `acc` as needed.
    pub fn axpy(f: &Fq, acc: &mut Vec<Elem>, s: Elem, b: &[Elem], shift: usize) {
        if s == 0 || b.is_empty() {
            return;
        }
        if acc.len() < b.len() + shift {
            acc.resize(b.len() + shift, 0);
        }
        let row = f.mul_row(s);
        for (a, &x) in acc[shift..].iter_mut().zip(b) {
            *a = f.add(*a, row[x as usize]);
        }
    }

    pub fn mul(f: &Fq, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        for (i, &s) in short.iter().enumerate() {
            if s == 0 {
                continue;
            }
            let row = f.mul_row(s);
            for (o, &x) in out[i..].iter_mut().zip(long) {
                *o = f.add(*o, row[x as usize]);
            }
        }
        trim(&mut out);
        out
    }

    /// Reduce `a` in place modulo the monic polynomial `m` (deg m >= 0).
    pub fn rem_monic(f: &Fq, a: &mut Vec<Elem>, m: &[Elem]) {
        let n = m.len() - 1;
        if n == 0 {
            a.clear();
            return;
        }
        while a.len() > n {
            let top = a.len() - 1;
            let c = a[top];
            if c != 0 {
                let row = f.mul_row(f.neg(c));
                let base = top - n;
                for (x, &mj) in a[base..top].iter_mut().zip(&m[..n]) {
                    *x = f.add(*x, row[mj as usize]);
                }
            }
            a.pop();
        }
        trim(a);
    }

    /// f(t) -> f(t^s): spreads coefficients, which is the q^i-th power map when s = q^i.
    pub fn spread(a: &[Elem], s: usize) -> Vec<Elem> {
        if a.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; (a.len() - 1) * s + 1];
        for (i, &x) in a.iter().enumerate() {
            out[i * s] = x;
        }
        out
    }
}

impl Poly {
    pub fn new(f: &Fq, mut c: Vec<Elem>) -> Poly {
        debug_assert!(c.iter().all(|&x| (x as usize) < f.q()));
        raw::trim(&mut c);
        Poly { c, f: f.clone() }
    }
    pub fn zero(f: &Fq) -> Poly {
        Poly { c: Vec::new(), f: f.clone() }
    }
    pub fn one(f: &Fq) -> Poly {
        Poly::constant(f, 1)
    }
    pub fn constant(f: &Fq, a: Elem) -> Poly {
        Poly::new(f, vec![a])
    }
    /// The variable t.
    pub fn t(f: &Fq) -> Poly {
        Poly::new(f, vec![0, 1])
    }
    /// a * t^k
    pub fn monomial(f: &Fq, a: Elem, k: usize) -> Poly {
        let mut c = vec![0; k + 1];
        c[k] = a;
        Poly::new(f, c)
    }
    /// t - a
    pub fn linear(f: &Fq, a: Elem) -> Poly {
        Poly::new(f, vec![f.neg(a), 1])
    }
    /// Polynomial from small signed integer coefficients (prime-field images), constant first.
    pub fn from_ints(f: &Fq, c: &[i64]) -> Poly {
        Poly::new(f, c.iter().map(|&x| f.from_int(x)).collect())
    }

    pub fn field(&self) -> &Fq {
        &self.f
    }
    pub fn coeffs(&self) -> &[Elem] {
        &self.c
    }
    pub fn into_coeffs(self) -> Vec<Elem> {
        self.c
    }
    /// Coefficient of t^i (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Elem {
        self.c.get(i).copied().unwrap_or(0)
    }
    /// Degree, with `None` standing for deg 0 = -infinity.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    /// Degree as a signed integer, -1 for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.c.len() as i64 - 1
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.c == [1]
    }
    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }
    pub fn is_monic(&self) -> bool {
        self.c.last() == Some(&1)
    }
    pub fn lead(&self) -> Elem {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn scale(&self, s: Elem) -> Poly {
        if s == 0 {
            return Poly::zero(&self.f);
        }
        let row = self.f.mul_row(s);
        Poly { c: self.c.iter().map(|&x| row[x as usize]).collect(), f: self.f.clone() }
    }

    /// Monic associate; zero stays zero.
    pub fn monic(&self) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        self.scale(self.f.inv(self.lead()))
    }

    /// Multiply by t^k.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.c);
        Poly { c, f: self.f.clone() }
    }

    pub fn divmod(&self, g: &Poly) -> Result<(Poly, Poly)> {
        if g.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let f = &self.f;
        let n = g.c.len() - 1;
        if self.c.len() <= n {
            return Ok((Poly::zero(f), self.clone()));
        }
        let inv = f.inv(g.lead());
        let mut r = self.c.clone();
        let mut quo = vec![0; r.len() - n];
        for top in (n..r.len()).rev() {
            let c = f.mul(r[top], inv);
            quo[top - n] = c;
            if c != 0 {
                let row = f.mul_row(f.neg(c));
                for j in 0..=n {
                    r[top - n + j] = f.add(r[top - n + j], row[g.c[j] as usize]);
                }
            }
        }
        r.truncate(n);
        Ok((Poly::new(f, quo), Poly::new(f, r)))
    }

    pub fn rem(&self, g: &Poly) -> Result<Poly> {
        if g.is_monic() {
            let mut r = self.c.clone();
            raw::rem_monic(&self.f, &mut r, &g.c);
            return Ok(Poly { c: r, f: self.f.clone() });
        }
        Ok(self.divmod(g)?.1)
    }

    /// Quotient when `g` divides `self` exactly, `None` otherwise.
    pub fn div_exact(&self, g: &Poly) -> Result<Option<Poly>> {
        let (qt, r) = self.divmod(g)?;
        Ok(if r.is_zero() { Some(qt) } else { None })
    }

    pub fn divides(&self, other: &Poly) -> bool {
        !self.is_zero() && other.rem(self).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// Monic gcd (zero when both inputs are zero).
    pub fn gcd(&self, g: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = g.clone();
        while !b.is_zero() {
            let r = a.rem(&b.monic()).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: (g, u, v) with u*self + v*other = g, g monic.
    pub fn xgcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let f = &self.f;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(f), Poly::zero(f));
        let (mut t0, mut t1) = (Poly::zero(f), Poly::one(f));
        while !r1.is_zero() {
            let (qt, r) = r0.divmod(&r1).expect("nonzero");
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&qt * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&qt * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lead());
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    /// Inverse of `self` modulo `m`, if it exists.
    pub fn inv_mod(&self, m: &Poly) -> Option<Poly> {
        let (g, u, _) = self.rem(m).ok()?.xgcd(m);
        if g.is_one() {
            Some(u.rem(m).ok()?)
        } else {
            None
        }
    }

    pub fn eval(&self, x: Elem) -> Elem {
        self.c.iter().rev().fold(0, |acc, &c| self.f.add(self.f.mul(acc, x), c))
    }

    pub fn derivative(&self) -> Poly {
        let f = &self.f;
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &x)| f.mul(f.from_int(i as i64), x))
            .collect();
        Poly::new(f, c)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.f);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mul_mod(&self, g: &Poly, m: &Poly) -> Poly {
        (self * g).rem(m).expect("nonzero modulus")
    }

    pub fn pow_mod(&self, mut e: u64, m: &Poly) -> Poly {
        let mut base = self.rem(m).expect("nonzero modulus");
        let mut acc = Poly::one(&self.f).rem(m).expect("nonzero modulus");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(&base, m);
            }
        }
        acc
    }

    /// self^(q^i), computed as self(t^(q^i)) since coefficients are fixed by Frobenius.
    pub fn frobenius(&self, i: u32) -> Poly {
        if i == 0 {
            return self.clone();
        }
        let s = self.f.q().pow(i);
        Poly { c: raw::spread(&self.c, s), f: self.f.clone() }
    }

    /// Composition self(g).
    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.f);
        for &c in self.c.iter().rev() {
            acc = &(&acc * g) + &Poly::constant(&self.f, c);
        }
        acc
    }

    /// Largest e with m^e | self; `None` for the zero polynomial (infinite valuation).
    pub fn valuation_at(&self, m: &Poly) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        assert!(!m.is_constant(), "valuation at a constant");
        let mut v = 0;
        let mut cur = self.clone();
        loop {
            let (qt, r) = cur.divmod(m).expect("nonzero");
            if !r.is_zero() {
                return Some(v);
            }
            v += 1;
            cur = qt;
        }
    }

    /// Ben-Or irreducibility test.
    pub fn is_irreducible(&self) -> Result<bool> {
        let n = match self.degree() {
            None | Some(0) => {
                return Err(Error::InvalidArgument("irreducibility of a constant".into()))
            }
            Some(n) => n,
        };
        if n == 1 {
            return Ok(true);
        }
        if self.c[0] == 0 {
            return Ok(false);
        }
        let m = self.monic();
        let q = self.f.q() as u64;
        let t = Poly::t(&self.f);
        let mut x = t.clone();
        for _ in 1..=n / 2 {
            x = x.pow_mod(q, &m);
            if !(&x - &t).gcd(&m).is_one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lexicographic comparison of coefficient vectors, constant term most significant,
    /// for polynomials of equal degree; lower degree sorts first otherwise.
    pub fn cmp_lex(&self, other: &Poly) -> Ordering {
        self.c.len().cmp(&other.c.len()).then_with(|| self.c.cmp(&other.c))
    }
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.f == other.f
    }
}
impl Eq for Poly {}

impl Hash for Poly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let f = &self.f;
        let (long, short) = if self.c.len() >= o.c.len() { (self, o) } else { (o, self) };
        let mut c = long.c.clone();
        for (x, &y) in c.iter_mut().zip(&short.c) {
            *x = f.add(*x, y);
        }
        Poly::new(f, c)
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let f = &self.f;
        let mut c = self.c.clone();
        if c.len() < o.c.len() {
            c.resize(o.c.len(), 0);
        }
        for (x, &y) in c.iter_mut().zip(&o.c) {
            *x = f.sub(*x, y);
        }
        Poly::new(f, c)
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        Poly { c: raw::mul(&self.f, &self.c, &o.c), f: self.f.clone() }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let f = &self.f;
        Poly { c: self.c.iter().map(|&x| f.neg(x)).collect(), f: f.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: &Poly) -> Poly {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Poly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", crate::parse::format_poly(self, "t"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "Poly({})", self)
    }
}
