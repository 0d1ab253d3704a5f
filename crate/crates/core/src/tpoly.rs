//! Polynomials in an auxiliary variable T with coefficients in A = F_q[t].

use std::fmt;

use crate::field::Fq;
use crate::poly::Poly;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TPoly {
    c: Vec<Poly>,
    f: Fq,
}

impl TPoly {
    pub fn new(f: &Fq, mut c: Vec<Poly>) -> TPoly {
        while c.last().map(|p| p.is_zero()) == Some(true) {
            c.pop();
        }
        TPoly { c, f: f.clone() }
    }
    pub fn zero(f: &Fq) -> TPoly {
        TPoly { c: Vec::new(), f: f.clone() }
    }
    pub fn constant(p: Poly) -> TPoly {
        let f = p.field().clone();
        TPoly::new(&f, vec![p])
    }
    /// c * T^k
    pub fn monomial(p: Poly, k: usize) -> TPoly {
        let f = p.field().clone();
        let mut c = vec![Poly::zero(&f); k];
        c.push(p);
        TPoly::new(&f, c)
    }
    pub fn field(&self) -> &Fq {
        &self.f
    }
    pub fn coeffs(&self) -> &[Poly] {
        &self.c
    }
    pub fn coeff(&self, k: usize) -> Poly {
        self.c.get(k).cloned().unwrap_or_else(|| Poly::zero(&self.f))
    }
    pub fn t_degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn add(&self, o: &TPoly) -> TPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect();
        TPoly::new(&self.f, c)
    }
    pub fn sub(&self, o: &TPoly) -> TPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect();
        TPoly::new(&self.f, c)
    }
    pub fn mul(&self, o: &TPoly) -> TPoly {
        if self.is_zero() || o.is_zero() {
            return TPoly::zero(&self.f);
        }
        let mut c = vec![Poly::zero(&self.f); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        TPoly::new(&self.f, c)
    }
    pub fn mul_poly(&self, p: &Poly) -> TPoly {
        TPoly::new(&self.f, self.c.iter().map(|a| a * p).collect())
    }
    /// Multiply by T^k.
    pub fn shift(&self, k: usize) -> TPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![Poly::zero(&self.f); k];
        c.extend(self.c.iter().cloned());
        TPoly::new(&self.f, c)
    }
    /// tau^i acting on coefficients (T is fixed).
    pub fn frobenius(&self, i: u32) -> TPoly {
        TPoly::new(&self.f, self.c.iter().map(|a| a.frobenius(i)).collect())
    }
    /// Value at T = 1.
    pub fn eval_one(&self) -> Poly {
        self.c.iter().fold(Poly::zero(&self.f), |acc, a| &acc + a)
    }
    /// Exact division by (T - 1); `None` when T = 1 is not a root.
    pub fn div_t_minus_one(&self) -> Option<TPoly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let n = self.c.len();
        // synthetic division from the top
        let mut qt = vec![Poly::zero(&self.f); n - 1];
        let mut carry = Poly::zero(&self.f);
        for k in (1..n).rev() {
            carry = &carry + &self.c[k];
            qt[k - 1] = carry.clone();
        }
        let rem = &carry + &self.c[0];
        if rem.is_zero() {
            Some(TPoly::new(&self.f, qt))
        } else {
            None
        }
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(fm, "0");
        }
        let f = &self.f;
        let mut parts = Vec::new();
        for (k, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "T".to_string(),
                _ => format!("T^{k}"),
            };
            let s = if a.is_constant() {
                let c = a.coeff(0);
                let e = f.format_elem(c);
                match (k, c) {
                    (0, _) => if e.contains('+') { format!("({e})") } else { e },
                    (_, 1) => mono,
                    _ if e.contains('+') => format!("({e})*{mono}"),
                    _ => format!("{e}*{mono}"),
                }
            } else if k == 0 {
                format!("({a})")
            } else {
                format!("({a})*{mono}")
            };
            parts.push(s);
        }
        write!(fm, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for TPoly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "TPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_by_t_minus_one() {
        let f = Fq::new(3).unwrap();
        // 1 + 2T = 2(T - 1)
        let u = TPoly::new(&f, vec![Poly::one(&f), Poly::constant(&f, 2)]);
        let q = u.div_t_minus_one().unwrap();
        assert_eq!(q, TPoly::constant(Poly::constant(&f, 2)));
        assert!(q.div_t_minus_one().is_none());
        assert_eq!(u.to_string(), "1 + 2*T");
    }
}
