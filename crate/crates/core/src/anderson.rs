//! Anderson motives of Drinfeld models reduced at a place, their duals, and the
//! Euler factor computed from the Frobenius of the dual motive.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::lseries::LocalFactor;
use crate::ore::DrinfeldModel;
use crate::places::Place;
use crate::poly::Poly;
use crate::residue::QuotientRing;
use crate::ring::{charpoly, CommRing, ResiduePoly, ResiduePolyRing};
use crate::tpoly::TPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MotiveKind {
    Direct,
    Dual,
}

/// Matrix of tau on M(phi) (or its dual) over F_p[t], as num / den.
/// Column j holds the image of the j-th basis vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotiveMatrix {
    pub kind: MotiveKind,
    pub place: Place,
    pub num: Vec<Vec<ResiduePoly>>,
    pub den: ResiduePoly,
}

impl MotiveMatrix {
    pub fn dim(&self) -> usize {
        self.num.len()
    }
}

/// Matrix of tau in the basis u_i = tau^i (direct) or the dual basis u_i^v (dual).
pub fn motive_matrix(model: &DrinfeldModel, p: &Place, kind: MotiveKind) -> Result<MotiveMatrix> {
    let base = QuotientRing::new(p.generator())?;
    let ring = ResiduePolyRing::new(&base);
    let r = model.rank();
    let gbar: Vec<Vec<Elem>> = (1..=r).map(|i| base.from_poly(&model.g(i))).collect();
    let theta = base.from_poly(&Poly::t(model.field()));
    let t_minus_theta = ring.linear(&theta);
    let mut num = vec![vec![ring.zero(); r]; r];
    let den = match kind {
        MotiveKind::Dual => {
            // tau(u_i^v) = u_{i+1}^v + g_{i+1}/(t - theta) u_0^v
            for i in 0..r {
                num[0][i] = ring.add(&num[0][i], &ring.constant(gbar[i].clone()));
                if i + 1 < r {
                    num[i + 1][i] = ring.add(&num[i + 1][i], &t_minus_theta);
                }
            }
            t_minus_theta
        }
        MotiveKind::Direct => {
            // tau(u_i) = u_{i+1}, tau(u_{r-1}) = g_r^-1 ((t - theta) u_0 - sum_{i<r} g_i u_i)
            let inv = base
                .inv(&gbar[r - 1])
                .ok_or_else(|| Error::InvalidArgument(format!("g_{r} vanishes modulo {p}")))?;
            for i in 0..r - 1 {
                num[i + 1][i] = ring.one();
            }
            num[0][r - 1] = ring.mul(&ring.constant(inv.clone()), &t_minus_theta);
            for i in 1..r {
                num[i][r - 1] = ring.constant(base.neg(&base.mul(&gbar[i - 1], &inv)));
            }
            ring.one()
        }
    };
    Ok(MotiveMatrix { kind, place: p.clone(), num, den })
}

fn mat_mul(ring: &ResiduePolyRing<'_>, a: &[Vec<ResiduePoly>], b: &[Vec<ResiduePoly>]) -> Vec<Vec<ResiduePoly>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(&a[i][k], &b[k][j])))
                })
                .collect()
        })
        .collect()
}

/// Matrix of the linear map tau^d: B sigma(B) ... sigma^(d-1)(B).
pub fn frobenius_power_matrix(b: &MotiveMatrix, d: usize) -> Result<MotiveMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let base = QuotientRing::new(b.place.generator())?;
    let ring = ResiduePolyRing::new(&base);
    let mut num = b.num.clone();
    let mut den = b.den.clone();
    let mut cur_num = b.num.clone();
    let mut cur_den = b.den.clone();
    for _ in 1..d {
        cur_num = cur_num.iter().map(|row| row.iter().map(|e| ring.sigma(e)).collect()).collect();
        cur_den = ring.sigma(&cur_den);
        num = mat_mul(&ring, &num, &cur_num);
        den = ring.mul(&den, &cur_den);
    }
    Ok(MotiveMatrix { kind: b.kind, place: b.place.clone(), num, den })
}

/// Express an element of F_p[t] with all coefficients in F_q as a polynomial of A.
fn descend(base: &QuotientRing, c: &ResiduePoly) -> Result<Poly> {
    let fld = base.field();
    let mut out = Vec::with_capacity(c.len());
    for e in c {
        let pe = base.to_poly(e);
        if pe.deg() > 0 {
            return Err(Error::Mismatch("Frobenius characteristic polynomial does not descend to F_q".into()));
        }
        out.push(pe.coeff(0));
    }
    Ok(Poly::new(fld, out))
}

/// P(M(phi)^v; T) = det(1 - T^d tau^d) on the dual motive; tau^d = N / p(t) with N the
/// numerator of the d-th Frobenius power, since prod_j (t - theta^(q^j)) = p(t).
pub fn euler_factor_via_dual(model: &DrinfeldModel, p: &Place) -> Result<LocalFactor> {
    let d = p.degree();
    let r = model.rank();
    let fld = model.field();
    let b = motive_matrix(model, p, MotiveKind::Dual)?;
    let bd = frobenius_power_matrix(&b, d)?;
    let base = QuotientRing::new(p.generator())?;
    let ring = ResiduePolyRing::new(&base);
    let pg = p.generator();
    let pt: ResiduePoly = ring.trim(pg.coeffs().iter().map(|&c| base.scale(c, &base.one())).collect());
    if bd.den != pt {
        return Err(Error::Mismatch("denominator of tau^d is not p(t)".into()));
    }
    let chi = charpoly(&ring, &bd.num);
    // det(1 - yN) = sum_k c_{r-k} y^k with y = T^d / p; scaled factor p * P
    let mut coeffs = vec![Poly::zero(fld); r * d + 1];
    for k in 0..=r {
        let c = descend(&base, &chi[r - k])?;
        let v = if k == 0 {
            &c * pg
        } else {
            c.div_exact(&pg.pow(k as u64 - 1))?
                .ok_or_else(|| Error::Mismatch(format!("coefficient of T^{} is not p-integral", k * d)))?
        };
        coeffs[k * d] = v;
    }
    LocalFactor::from_scaled(p.clone(), TPoly::new(fld, coeffs))
}
