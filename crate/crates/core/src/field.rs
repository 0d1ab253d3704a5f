//! Finite fields F_q with q = p^k <= 256.
//!
//! Elements are encoded as integers in `0..q`: the base-p digits of the code are the
//! coefficients of the element written as a polynomial in the generator `z`
//! (constant digit first). All operations go through precomputed tables.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Elem = u8;

struct Tables {
    p: u32,
    k: u32,
    q: usize,
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

/// Shared handle on a finite field. Cloning is cheap.
#[derive(Clone)]
pub struct Fq {
    t: Arc<Tables>,
}

fn smallest_prime_factor(n: u32) -> u32 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

// Dense polynomials over F_p as digit vectors, used only while building tables.
fn fp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = fp_inv(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        if c != 0 {
            for (j, &mj) in m.iter().enumerate() {
                let idx = top - dm + j;
                r[idx] = (r[idx] + p * p - c * mj % p) % p;
            }
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_inv(a: u32, p: u32) -> u32 {
    (1..p).find(|&b| a * b % p == 1).expect("nonzero element of F_p")
}

fn fp_is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    if k <= 1 {
        return k == 1;
    }
    // Trial division by every monic polynomial of degree 1..=k/2.
    for dg in 1..=k / 2 {
        let count = (p as usize).pow(dg as u32);
        for idx in 0..count {
            let mut g = vec![0u32; dg + 1];
            let mut n = idx;
            for c in g.iter_mut().take(dg) {
                *c = (n % p as usize) as u32;
                n /= p as usize;
            }
            g[dg] = 1;
            if fp_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// First monic irreducible of degree k over F_p, scanning coefficient vectors
/// lexicographically with the constant term most significant.
pub fn default_modulus(p: u32, k: u32) -> Vec<u32> {
    let k = k as usize;
    let count = (p as usize).pow(k as u32);
    for idx in 0..count {
        let mut f = vec![0u32; k + 1];
        let mut n = idx;
        for i in (0..k).rev() {
            f[i] = (n % p as usize) as u32;
            n /= p as usize;
        }
        f[k] = 1;
        if fp_is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Fq {
    /// The field with q elements and the default modulus.
    pub fn new(q: u32) -> Result<Fq> {
        let (p, k) = Self::split_q(q)?;
        let modulus = if k == 1 { vec![0, 1] } else { default_modulus(p, k) };
        Self::build(p, k, modulus)
    }

    /// The field F_p[z]/(modulus); `modulus` lists coefficients constant term first.
    pub fn with_modulus(q: u32, modulus: &[u32]) -> Result<Fq> {
        let (p, k) = Self::split_q(q)?;
        let mut m: Vec<u32> = modulus.iter().map(|c| c % p).collect();
        fp_trim(&mut m);
        if m.len() != k as usize + 1 || m[k as usize] != 1 {
            return Err(Error::InvalidField(format!(
                "modulus must be monic of degree {k}"
            )));
        }
        if !fp_is_irreducible(&m, p) {
            return Err(Error::InvalidField("modulus is reducible".into()));
        }
        if k == 1 {
            m = vec![0, 1];
        }
        Self::build(p, k, m)
    }

    fn split_q(q: u32) -> Result<(u32, u32)> {
        if !(2..=256).contains(&q) {
            return Err(Error::InvalidField(format!("q = {q} outside 2..=256")));
        }
        let p = smallest_prime_factor(q);
        let mut n = q;
        let mut k = 0;
        while n % p == 0 {
            n /= p;
            k += 1;
        }
        if n != 1 {
            return Err(Error::InvalidField(format!("q = {q} is not a prime power")));
        }
        Ok((p, k))
    }

    fn build(p: u32, k: u32, modulus: Vec<u32>) -> Result<Fq> {
        let q = (p as usize).pow(k);
        let digits = |a: usize| -> Vec<u32> {
            let mut v = Vec::with_capacity(k as usize);
            let mut n = a;
            for _ in 0..k {
                v.push((n % p as usize) as u32);
                n /= p as usize;
            }
            v
        };
        let encode = |v: &[u32]| -> usize {
            v.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize)
        };
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        let mut neg = vec![0; q];
        let mut inv = vec![0; q];
        let ds: Vec<Vec<u32>> = (0..q).map(digits).collect();
        for a in 0..q {
            let na: Vec<u32> = ds[a].iter().map(|&c| (p - c) % p).collect();
            neg[a] = encode(&na) as Elem;
            for b in 0..q {
                let s: Vec<u32> = ds[a].iter().zip(&ds[b]).map(|(&x, &y)| (x + y) % p).collect();
                add[a * q + b] = encode(&s) as Elem;
                let mut prod = vec![0u32; 2 * k as usize];
                for (i, &x) in ds[a].iter().enumerate() {
                    for (j, &y) in ds[b].iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = fp_rem(&prod, &modulus, p);
                r.resize(k as usize, 0);
                mul[a * q + b] = encode(&r) as Elem;
            }
        }
        for a in 1..q {
            inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).expect("field") as Elem;
        }
        Ok(Fq {
            t: Arc::new(Tables { p, k, q, modulus, add, mul, neg, inv }),
        })
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.t.q
    }
    #[inline]
    pub fn p(&self) -> u32 {
        self.t.p
    }
    #[inline]
    pub fn k(&self) -> u32 {
        self.t.k
    }
    /// Defining polynomial of F_q over F_p, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.t.add[a as usize * self.t.q + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.t.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.t.mul[a as usize * self.t.q + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.t.neg[a as usize]
    }
    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero in F_q");
        self.t.inv[a as usize]
    }
    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }
    /// Row of the multiplication table for `a`, indexed by the second factor.
    #[inline]
    pub fn mul_row(&self, a: Elem) -> &[Elem] {
        let q = self.t.q;
        &self.t.mul[a as usize * q..(a as usize + 1) * q]
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.t.p as i64) as Elem
    }

    /// The generator z (equal to p when k > 1; for prime fields there is no z).
    pub fn generator(&self) -> Option<Elem> {
        if self.t.k > 1 {
            Some(self.t.p as Elem)
        } else {
            None
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.t.q).map(|a| a as Elem)
    }

    /// Base-p digits of an element (coefficients in z, constant first).
    pub fn digits(&self, a: Elem) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.t.k as usize);
        let mut n = a as u32;
        for _ in 0..self.t.k {
            v.push(n % self.t.p);
            n /= self.t.p;
        }
        v
    }

    pub fn is_prime_field_elem(&self, a: Elem) -> bool {
        (a as u32) < self.t.p
    }

    /// Text form: an integer for prime-field elements, otherwise a polynomial in `z`.
    pub fn format_elem(&self, a: Elem) -> String {
        if self.is_prime_field_elem(a) {
            return a.to_string();
        }
        let ds = self.digits(a);
        let mut parts = Vec::new();
        for (i, &c) in ds.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{i}"),
            };
            parts.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        parts.join("+")
    }

    /// Stable description, used in config headers and checkpoint hashes.
    pub fn describe(&self) -> String {
        if self.t.k == 1 {
            format!("GF({})", self.t.q)
        } else {
            let m: Vec<String> = self.t.modulus.iter().map(|c| c.to_string()).collect();
            format!("GF({}) modulus [{}]", self.t.q, m.join(","))
        }
    }
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t) || (self.t.q == other.t.q && self.t.modulus == other.t.modulus)
    }
}
impl Eq for Fq {}

impl std::hash::Hash for Fq {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.t.q.hash(state);
        self.t.modulus.hash(state);
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_default_modulus_is_z2_z_1() {
        let f = Fq::new(4).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let z = f.generator().unwrap();
        // z^2 = z + 1
        assert_eq!(f.mul(z, z), f.add(z, 1));
    }

    #[test]
    fn field_axioms_small() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = Fq::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                    assert_eq!(f.pow(a, q as u64 - 1), 1);
                }
                for b in f.elements() {
                    for c in f.elements().take(4) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_q() {
        assert!(Fq::new(6).is_err());
        assert!(Fq::new(1).is_err());
        assert!(Fq::new(257).is_err());
        assert!(Fq::with_modulus(4, &[1, 0, 1]).is_err());
    }

    #[test]
    fn format_elements() {
        let f = Fq::new(4).unwrap();
        assert_eq!(f.format_elem(2), "z");
        assert_eq!(f.format_elem(3), "z+1");
        let f9 = Fq::new(9).unwrap();
        assert_eq!(f9.format_elem(5), "z+2");
    }
}
