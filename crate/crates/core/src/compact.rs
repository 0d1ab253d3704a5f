//! Fixed-size residue field arithmetic for the hot loops of searches and
//! statistics: F_p = F_q[t]/p with deg p <= MAXD, plus a bit-packed variant for q = 2.
//!
//! Both implement the base-point Wieferich test through the dual-number sequences
//! u_k = phi_{t^k}(x) mod p and w_k (the scaled p-part modulo p^2), using a Krylov
//! elimination on the augmented vectors (u_k, w_k).

use crate::field::{Elem, Fq};
use crate::ore::DrinfeldModel;
use crate::places::Place;

pub const MAXD: usize = 32;
type Buf = [Elem; MAXD];

/// F_q[t]/p with elements stored as fixed arrays of length MAXD.
#[derive(Clone)]
pub struct CompactPlace {
    f: Fq,
    d: usize,
    /// t^d = sum negm[j] t^j
    negm: Buf,
    /// frob[j] = t^(jq) mod p
    frob: Vec<Buf>,
}

impl CompactPlace {
    /// `None` when deg p exceeds MAXD.
    pub fn new(p: &Place) -> Option<CompactPlace> {
        let f = p.field().clone();
        let d = p.degree();
        if d > MAXD {
            return None;
        }
        let mut negm = [0; MAXD];
        for (j, &c) in p.generator().coeffs()[..d].iter().enumerate() {
            negm[j] = f.neg(c);
        }
        let mut cp = CompactPlace { f, d, negm, frob: Vec::with_capacity(d) };
        let mut tq = cp.one();
        for _ in 0..cp.f.q() {
            cp.mul_theta(&mut tq);
        }
        let mut cur = cp.one();
        for _ in 0..d {
            cp.frob.push(cur);
            cur = cp.mul(&cur, &tq[..d]);
        }
        Some(cp)
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn one(&self) -> Buf {
        let mut b = [0; MAXD];
        b[0] = 1;
        b
    }

    /// Reduction of an arbitrary polynomial.
    pub fn reduce(&self, c: &[Elem]) -> Vec<Elem> {
        let mut acc = [0 as Elem; MAXD];
        let mut pow = self.one();
        for &x in c {
            if x != 0 {
                let row = self.f.mul_row(x);
                for k in 0..self.d {
                    acc[k] = self.f.add(acc[k], row[pow[k] as usize]);
                }
            }
            self.mul_theta(&mut pow);
        }
        let mut v = acc[..self.d].to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    #[inline]
    pub fn mul_theta(&self, x: &mut Buf) {
        let d = self.d;
        let top = x[d - 1];
        for j in (1..d).rev() {
            x[j] = x[j - 1];
        }
        x[0] = 0;
        if top != 0 {
            let row = self.f.mul_row(top);
            for j in 0..d {
                x[j] = self.f.add(x[j], row[self.negm[j] as usize]);
            }
        }
    }

    #[inline]
    pub fn frobenius(&self, x: &Buf) -> Buf {
        let mut acc = [0; MAXD];
        for j in 0..self.d {
            if x[j] != 0 {
                let row = self.f.mul_row(x[j]);
                let fj = &self.frob[j];
                for k in 0..self.d {
                    acc[k] = self.f.add(acc[k], row[fj[k] as usize]);
                }
            }
        }
        acc
    }

    /// x * g with g a trimmed coefficient slice of length <= d.
    #[inline]
    pub fn mul(&self, x: &Buf, g: &[Elem]) -> Buf {
        let d = self.d;
        let mut prod = [0 as Elem; 2 * MAXD];
        for (i, &gi) in g.iter().enumerate() {
            if gi != 0 {
                let row = self.f.mul_row(gi);
                for j in 0..d {
                    prod[i + j] = self.f.add(prod[i + j], row[x[j] as usize]);
                }
            }
        }
        let top = (d + g.len()).saturating_sub(1);
        for k in (d..top).rev() {
            let c = prod[k];
            if c != 0 {
                let row = self.f.mul_row(c);
                for j in 0..d {
                    prod[k - d + j] = self.f.add(prod[k - d + j], row[self.negm[j] as usize]);
                }
            }
        }
        let mut out = [0; MAXD];
        out[..d].copy_from_slice(&prod[..d]);
        out
    }

    fn add_assign(&self, x: &mut Buf, y: &Buf) {
        for j in 0..self.d {
            x[j] = self.f.add(x[j], y[j]);
        }
    }

    /// Reduced coefficients g_i mod p and g_i' mod p of a model.
    pub fn model_residues(&self, model: &DrinfeldModel) -> ModelResidues {
        let gs = model.gs().iter().map(|g| self.reduce(g.coeffs())).collect();
        let dgs = model.gs().iter().map(|g| self.reduce(g.derivative().coeffs())).collect();
        ModelResidues { gs, dgs }
    }

    /// Whether pi_x(phi;p) = pi_x(phi;p^2) for x = sum x_j t^j, by Krylov elimination on
    /// (u_k, w_k); valid for every place.
    pub fn is_wieferich(&self, res: &ModelResidues, x: &[Elem], dx: &[Elem]) -> bool {
        let d = self.d;
        let f = &self.f;
        let mut u = to_buf(&self.reduce(x));
        let mut w = to_buf(&self.reduce(dx));
        let mut rows: Vec<([Elem; 2 * MAXD], usize)> = Vec::with_capacity(d);
        loop {
            let mut v = [0 as Elem; 2 * MAXD];
            v[..d].copy_from_slice(&u[..d]);
            v[d..2 * d].copy_from_slice(&w[..d]);
            for (row, piv) in &rows {
                let c = v[*piv];
                if c != 0 {
                    let mrow = f.mul_row(f.neg(c));
                    for j in *piv..2 * d {
                        v[j] = f.add(v[j], mrow[row[j] as usize]);
                    }
                }
            }
            match v[..d].iter().position(|&c| c != 0) {
                None => return v[d..2 * d].iter().all(|&c| c == 0),
                Some(piv) => {
                    let inv = f.mul_row(f.inv(v[piv]));
                    for c in v[piv..2 * d].iter_mut() {
                        *c = inv[*c as usize];
                    }
                    rows.push((v, piv));
                }
            }
            let (nu, nw) = self.step(res, &u, &w);
            u = nu;
            w = nw;
        }
    }

    #[inline]
    fn step(&self, res: &ModelResidues, u: &Buf, w: &Buf) -> (Buf, Buf) {
        let mut nu = *u;
        self.mul_theta(&mut nu);
        let mut s = *u;
        let mut fu = *u;
        for (g, dg) in res.gs.iter().zip(&res.dgs) {
            fu = self.frobenius(&fu);
            if !g.is_empty() {
                let t = self.mul(&fu, g);
                self.add_assign(&mut nu, &t);
            }
            if !dg.is_empty() {
                let t = self.mul(&fu, dg);
                self.add_assign(&mut s, &t);
            }
        }
        let mut nw = *w;
        self.mul_theta(&mut nw);
        self.add_assign(&mut nw, &s);
        (nu, nw)
    }

    /// Base-1 test for the Carlitz module with the Fitting ideal p - 1 (requires (H)):
    /// sum a_k u_k = 0 and sum a_k w_k = 0 with u_{k+1} = theta u_k + u_k^q, w_{k+1} = theta w_k + u_k.
    pub fn carlitz_wieferich(&self, a: &[Elem]) -> bool {
        let mut u = self.one();
        let mut w = [0 as Elem; MAXD];
        let mut su = [0 as Elem; MAXD];
        let mut sw = [0 as Elem; MAXD];
        for (k, &ak) in a.iter().enumerate() {
            if ak != 0 {
                let row = self.f.mul_row(ak);
                for j in 0..self.d {
                    su[j] = self.f.add(su[j], row[u[j] as usize]);
                    sw[j] = self.f.add(sw[j], row[w[j] as usize]);
                }
            }
            if k + 1 == a.len() {
                break;
            }
            let mut nu = u;
            self.mul_theta(&mut nu);
            let fu = self.frobenius(&u);
            self.add_assign(&mut nu, &fu);
            self.mul_theta(&mut w);
            self.add_assign(&mut w, &u);
            u = nu;
        }
        su[..self.d].iter().all(|&c| c == 0) && sw[..self.d].iter().all(|&c| c == 0)
    }
}

fn to_buf(v: &[Elem]) -> Buf {
    let mut b = [0; MAXD];
    b[..v.len()].copy_from_slice(v);
    b
}

/// g_i and g_i' reduced modulo a place, trimmed.
#[derive(Clone, Debug)]
pub struct ModelResidues {
    pub gs: Vec<Vec<Elem>>,
    pub dgs: Vec<Vec<Elem>>,
}

/// F_2[t]/p with elements packed into the low bits of a u32.
#[derive(Clone)]
pub struct Gf2Place {
    d: usize,
    m: u64,
    sq: [[u32; 256]; 4],
}

impl Gf2Place {
    pub fn new(p: &Place) -> Option<Gf2Place> {
        let d = p.degree();
        if p.field().q() != 2 || d > 31 {
            return None;
        }
        let m = pack(p.generator().coeffs());
        let mut g = Gf2Place { d, m, sq: [[0; 256]; 4] };
        // images of t^(2j)
        let imgs: Vec<u32> = (0..d).map(|j| g.reduce_wide(1u64 << (2 * j))).collect();
        for chunk in 0..4 {
            for b in 1..256usize {
                let low = b.trailing_zeros() as usize;
                let bit = chunk * 8 + low;
                let img = if bit < d { imgs[bit] } else { 0 };
                g.sq[chunk][b] = g.sq[chunk][b & (b - 1)] ^ img;
            }
        }
        Some(g)
    }

    #[inline]
    fn reduce_wide(&self, mut x: u64) -> u32 {
        let d = self.d;
        while x >> d != 0 {
            let top = 63 - x.leading_zeros() as usize;
            x ^= self.m << (top - d);
        }
        x as u32
    }

    #[inline]
    pub fn mul_theta(&self, x: u32) -> u32 {
        let y = (x as u64) << 1;
        if y >> self.d & 1 == 1 {
            (y ^ self.m) as u32
        } else {
            y as u32
        }
    }

    #[inline]
    pub fn square(&self, x: u32) -> u32 {
        self.sq[0][(x & 0xff) as usize]
            ^ self.sq[1][(x >> 8 & 0xff) as usize]
            ^ self.sq[2][(x >> 16 & 0xff) as usize]
            ^ self.sq[3][(x >> 24) as usize]
    }

    #[inline]
    pub fn mul(&self, x: u32, g: u64) -> u32 {
        let mut acc = 0u64;
        let mut g = g;
        while g != 0 {
            let i = g.trailing_zeros();
            acc ^= (x as u64) << i;
            g &= g - 1;
        }
        self.reduce_wide(acc)
    }

    pub fn reduce(&self, c: &[Elem]) -> u64 {
        let mut acc = 0u32;
        let mut pow = 1u32;
        for &b in c {
            if b != 0 {
                acc ^= pow;
            }
            pow = self.mul_theta(pow);
        }
        acc as u64
    }

    pub fn model_residues(&self, model: &DrinfeldModel) -> (Vec<u64>, Vec<u64>) {
        let gs = model.gs().iter().map(|g| self.reduce(g.coeffs())).collect();
        let dgs = model.gs().iter().map(|g| self.reduce(g.derivative().coeffs())).collect();
        (gs, dgs)
    }

    /// Base-1 Wieferich test (x = 1, x' = 0); valid for every place.
    pub fn is_wieferich_one(&self, gs: &[u64], dgs: &[u64]) -> bool {
        let d = self.d;
        let umask = (1u64 << d) - 1;
        let mut u = 1u32;
        let mut w = 0u32;
        let mut rows: [u64; 32] = [0; 32];
        let mut pivots: [u32; 32] = [0; 32];
        let mut n = 0usize;
        loop {
            let mut v = u as u64 | (w as u64) << 32;
            for k in 0..n {
                if v >> pivots[k] & 1 == 1 {
                    v ^= rows[k];
                }
            }
            if v & umask == 0 {
                return v == 0;
            }
            pivots[n] = (v & umask).trailing_zeros();
            rows[n] = v;
            n += 1;
            let mut nu = self.mul_theta(u);
            let mut s = u;
            let mut fu = u;
            for (g, dg) in gs.iter().zip(dgs) {
                fu = self.square(fu);
                if *g != 0 {
                    nu ^= self.mul(fu, *g);
                }
                if *dg != 0 {
                    s ^= self.mul(fu, *dg);
                }
            }
            w = self.mul_theta(w) ^ s;
            u = nu;
        }
    }
}

fn pack(c: &[Elem]) -> u64 {
    c.iter().enumerate().fold(0u64, |acc, (i, &b)| if b != 0 { acc | 1 << i } else { acc })
}

/// Base-1 Wieferich indicator through the fastest available representation.
pub enum FastPlace {
    Gf2(Gf2Place),
    Compact(CompactPlace),
}

impl FastPlace {
    pub fn new(p: &Place) -> Option<FastPlace> {
        Gf2Place::new(p).map(FastPlace::Gf2).or_else(|| CompactPlace::new(p).map(FastPlace::Compact))
    }

    pub fn is_wieferich_one(&self, model: &DrinfeldModel) -> bool {
        match self {
            FastPlace::Gf2(g) => {
                let (gs, dgs) = g.model_residues(model);
                g.is_wieferich_one(&gs, &dgs)
            }
            FastPlace::Compact(c) => {
                let res = c.model_residues(model);
                c.is_wieferich(&res, &[1], &[])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;
    use crate::places::places_up_to;
    use crate::poly::Poly;
    use crate::wieferich::is_wieferich_definition;

    #[test]
    fn agrees_with_definition() {
        for (q, specs) in [
            (2u32, vec!["t + tau", "t + (t^2+1)*tau + t*tau^2", "t + t*tau", "t + (t+1)*tau^2"]),
            (3, vec!["t + tau", "t + 2*t*tau", "t + (t^2+2)*tau + (2*t^5+t)*tau^2"]),
            (4, vec!["t + tau", "t + z*t*tau"]),
        ] {
            let f = Fq::new(q).unwrap();
            for s in specs {
                let m = parse_model(s, &f).unwrap();
                for p in places_up_to(&f, if q == 2 { 6 } else { 3 }) {
                    let expected = is_wieferich_definition(&m, &p, &Poly::one(&f));
                    let c = CompactPlace::new(&p).unwrap();
                    assert_eq!(c.is_wieferich(&c.model_residues(&m), &[1], &[]), expected, "{s} at {p}");
                    assert_eq!(FastPlace::new(&p).unwrap().is_wieferich_one(&m), expected, "{s} at {p}");
                }
            }
        }
    }

    #[test]
    fn carlitz_hot_path() {
        let f = Fq::new(5).unwrap();
        let c = DrinfeldModel::carlitz(&f);
        for p in places_up_to(&f, 2) {
            let cp = CompactPlace::new(&p).unwrap();
            let a = (p.generator() - &Poly::one(&f)).coeffs().to_vec();
            let expected = is_wieferich_definition(&c, &p, &Poly::one(&f));
            assert_eq!(cp.carlitz_wieferich(&a), expected);
        }
    }

    #[test]
    fn general_base_point() {
        let f = Fq::new(3).unwrap();
        let m = parse_model("t + (t+1)*tau", &f).unwrap();
        let x = Poly::new(&f, vec![1, 2, 1]);
        for p in places_up_to(&f, 3) {
            let cp = CompactPlace::new(&p).unwrap();
            let got = cp.is_wieferich(&cp.model_residues(&m), x.coeffs(), x.derivative().coeffs());
            assert_eq!(got, is_wieferich_definition(&m, &p, &x), "{p}");
        }
    }
}
