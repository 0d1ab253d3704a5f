//! Rational functions in F_q(t), kept in lowest terms with a monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::Fq;
use crate::poly::Poly;
use crate::valuation::Valuation;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            let f = den.field().clone();
            return RationalFunction { num, den: Poly::one(&f) };
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap().unwrap(), den.div_exact(&g).unwrap().unwrap())
        };
        if !d.is_monic() {
            let inv = d.field().inv(d.lead());
            n = n.scale(inv);
            d = d.scale(inv);
        }
        RationalFunction { num: n, den: d }
    }

    pub fn from_poly(p: Poly) -> Self {
        let f = p.field().clone();
        RationalFunction { num: p, den: Poly::one(&f) }
    }
    pub fn zero(f: &Fq) -> Self {
        Self::from_poly(Poly::zero(f))
    }
    pub fn one(f: &Fq) -> Self {
        Self::from_poly(Poly::one(f))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }
    pub fn field(&self) -> &Fq {
        self.num.field()
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }
    pub fn as_poly(&self) -> Option<&Poly> {
        if self.is_poly() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// q^i-th power.
    pub fn frobenius(&self, i: u32) -> Self {
        RationalFunction { num: self.num.frobenius(i), den: self.den.frobenius(i) }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        Ok(RationalFunction { num: self.num.pow(e as u64), den: self.den.pow(e as u64) })
    }

    pub fn scale_poly(&self, p: &Poly) -> Self {
        Self::normalize(&self.num * p, self.den.clone())
    }

    /// Valuation at the place generated by `m`.
    pub fn valuation_at(&self, m: &Poly) -> Valuation {
        match self.num.valuation_at(m) {
            None => Valuation::Infinite,
            Some(vn) => {
                let vd = self.den.valuation_at(m).expect("nonzero denominator");
                Valuation::Finite(vn as i64 - vd as i64)
            }
        }
    }

    /// Valuation at infinity: deg den - deg num.
    pub fn valuation_infinity(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinite
        } else {
            Valuation::Finite(self.den.deg() - self.num.deg())
        }
    }
}

impl<'a> Add<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        if self.den == o.den {
            return RationalFunction::normalize(&self.num + &o.num, self.den.clone());
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let g = self.den.gcd(&o.den);
        let a = self.den.div_exact(&g).unwrap().unwrap();
        let b = o.den.div_exact(&g).unwrap().unwrap();
        let num = &(&self.num * &b) + &(&o.num * &a);
        RationalFunction::normalize(num, &a * &o.den)
    }
}

impl<'a> Sub<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl<'a> Mul<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() || o.is_zero() {
            return RationalFunction::zero(self.field());
        }
        // Cross-cancel before multiplying to keep sizes down.
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).unwrap().unwrap();
        let d2 = o.den.div_exact(&g1).unwrap().unwrap();
        let n2 = o.num.div_exact(&g2).unwrap().unwrap();
        let d1 = self.den.div_exact(&g2).unwrap().unwrap();
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let inv = den.field().inv(den.lead());
        RationalFunction { num: num.scale(inv), den: den.scale(inv) }
    }
}

impl<'a> Div<&'a RationalFunction> for &'a RationalFunction {
    type Output = Result<RationalFunction>;
    fn div(self, o: &RationalFunction) -> Result<RationalFunction> {
        Ok(self * &o.inv()?)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rat({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_of_inverse() {
        let f = Fq::new(3).unwrap();
        let x = RationalFunction::new(Poly::one(&f), Poly::from_ints(&f, &[0, -1, 0, 1])).unwrap();
        assert_eq!(x.valuation_at(&Poly::t(&f)), Valuation::Finite(-1));
        assert_eq!(RationalFunction::zero(&f).valuation_at(&Poly::t(&f)), Valuation::Infinite);
    }

    #[test]
    fn normalized_form() {
        let f = Fq::new(5).unwrap();
        let a = Poly::from_ints(&f, &[1, 1]);
        let r = RationalFunction::new(&a * &Poly::from_ints(&f, &[2]), &a * &Poly::from_ints(&f, &[0, 3])).unwrap();
        assert!(r.den().is_monic());
        assert_eq!(r.den(), &Poly::t(&f));
        assert_eq!(r.num(), &Poly::from_ints(&f, &[4]));
        assert!(RationalFunction::new(a, Poly::zero(&f)).is_err());
    }

    #[test]
    fn sum_of_reciprocals_degree_one() {
        // sum over alpha in F_3 of 1/(t+alpha) = -1/(t^3 - t)
        let f = Fq::new(3).unwrap();
        let mut s = RationalFunction::zero(&f);
        for a in f.elements() {
            let r = RationalFunction::new(Poly::one(&f), Poly::new(&f, vec![a, 1])).unwrap();
            s = &s + &r;
        }
        let expected = RationalFunction::new(Poly::from_ints(&f, &[-1]), Poly::from_ints(&f, &[0, -1, 0, 1])).unwrap();
        assert_eq!(s, expected);
    }
}
