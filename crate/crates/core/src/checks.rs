//! Named invariant suites over seeded random corpora. Each property is a plain
//! function on concrete inputs so that proptest strategies can drive it too.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anderson::euler_factor_via_dual;
use crate::compact::CompactPlace;
use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::lseries::{
    class_formula_value, exp_log_coeffs, exp_log_coeffs_in, l_series, local_factor, log_coeffs, lp_series,
    lp_value_at_1, series_mul, taelman_unit, twisted_unit_formula, vanishing_order, LocalFactor,
};
use crate::ore::{DrinfeldModel, OrePoly};
use crate::parse::{parse_model, parse_poly};
use crate::places::{count_places, enumerate_places, places_up_to, Place};
use crate::poly::Poly;
use crate::rational::RationalFunction;
use crate::residue::{annihilator_mod, fitting_ideal, QuotientRing};
use crate::stats::{sample_model, Universe};
use crate::valuation::Valuation;
use crate::wieferich::{
    is_wieferich, is_wieferich_definition, lift_congruence_check, linear_characterization, ordic_valuation,
    ordic_valuation_by_definition, wieferich_deg1, wieferich_deg1_any_base, OrdicValue,
};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Result of one property on one input: `Err` carries a description of the failure.
pub type Outcome = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- generators

pub fn random_poly(rng: &mut impl Rng, f: &Fq, max_deg: usize) -> Poly {
    Poly::new(f, (0..=max_deg).map(|_| rng.gen_range(0..f.q()) as Elem).collect())
}

pub fn random_nonzero_poly(rng: &mut impl Rng, f: &Fq, max_deg: usize) -> Poly {
    loop {
        let p = random_poly(rng, f, max_deg);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn random_monic(rng: &mut impl Rng, f: &Fq, deg: usize) -> Poly {
    let mut c: Vec<Elem> = (0..deg).map(|_| rng.gen_range(0..f.q()) as Elem).collect();
    c.push(1);
    Poly::new(f, c)
}

pub fn random_unit(rng: &mut impl Rng, f: &Fq) -> Elem {
    rng.gen_range(1..f.q()) as Elem
}

/// Coefficient degree bounds for the model families used by the suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelFamily {
    /// deg g_i < q^i
    VerySmall,
    /// deg g_i <= q^i
    Small,
    /// deg g_i <= the given bound
    Bounded(usize),
}

/// A model of rank exactly `rank` from the family.
pub fn random_model_of_rank(rng: &mut impl Rng, f: &Fq, rank: usize, family: ModelFamily) -> DrinfeldModel {
    let q = f.q();
    let gs: Vec<Poly> = (1..=rank)
        .map(|i| {
            let bound = match family {
                ModelFamily::VerySmall => q.pow(i as u32) - 1,
                ModelFamily::Small => q.pow(i as u32),
                ModelFamily::Bounded(b) => b,
            };
            if i == rank {
                random_nonzero_poly(rng, f, bound)
            } else {
                random_poly(rng, f, bound)
            }
        })
        .collect();
    DrinfeldModel::new(f, gs).expect("g_r is nonzero")
}

/// Rank uniform in 1..=max_rank.
pub fn random_model(rng: &mut impl Rng, f: &Fq, max_rank: usize, family: ModelFamily) -> DrinfeldModel {
    let r = rng.gen_range(1..=max_rank);
    random_model_of_rank(rng, f, r, family)
}

/// Degree uniform in 1..=max_deg, then a uniform place of that degree.
pub fn random_place(rng: &mut impl Rng, f: &Fq, max_deg: usize) -> Place {
    let d = rng.gen_range(1..=max_deg);
    loop {
        let m = random_monic(rng, f, d);
        if m.is_irreducible().unwrap_or(false) {
            return Place::new(m).unwrap();
        }
    }
}

pub fn random_h_place(rng: &mut impl Rng, f: &Fq, max_deg: usize) -> Place {
    loop {
        let p = random_place(rng, f, max_deg);
        if p.satisfies_h() {
            return p;
        }
    }
}

/// Random Ore polynomial f_1 tau + ... + f_k tau^k with deg f_i <= max_deg.
pub fn random_perturbation(rng: &mut impl Rng, f: &Fq, k: usize, max_deg: usize) -> OrePoly {
    let mut c = vec![Poly::zero(f)];
    c.extend((0..k).map(|_| random_poly(rng, f, max_deg)));
    OrePoly::new(f, c)
}

// ---------------------------------------------------------------- core algebra

pub fn prop_degree_additive(f: &Poly, g: &Poly) -> Outcome {
    let h = f * g;
    let expected = if f.is_zero() || g.is_zero() { None } else { Some(f.deg() + g.deg()) };
    let got = (!h.is_zero()).then(|| h.deg());
    ensure(got == expected, || format!("deg(({f})({g})) = {got:?}"))
}

/// sum_{e | d} e * #{places of degree e} = q^d, counting by enumeration.
pub fn prop_place_count(f: &Fq, d: usize) -> Outcome {
    let mut total = 0u64;
    for e in (1..=d).filter(|e| d % e == 0) {
        let n = enumerate_places(f, e).count() as u64;
        ensure(n == count_places(f.q() as u64, e as u32), || format!("q={} e={e}: enumerated {n}", f.q()))?;
        total += e as u64 * n;
    }
    ensure(total == (f.q() as u64).pow(d as u32), || format!("q={} d={d}: sum {total}", f.q()))
}

pub fn prop_valuation(f: &Poly, g: &Poly, p: &Place) -> Outcome {
    let (vf, vg) = (p.valuation(f), p.valuation(g));
    ensure(p.valuation(&(f * g)) == vf + vg, || format!("v_{p}(fg) for {f}, {g}"))?;
    let vs = p.valuation(&(f + g));
    ensure(vs >= vf.min(vg), || format!("v_{p}(f+g) < min for {f}, {g}"))
}

pub fn prop_rational_matches_poly(f: &Poly, g: &Poly) -> Outcome {
    let (rf, rg) = (RationalFunction::from_poly(f.clone()), RationalFunction::from_poly(g.clone()));
    ensure(&rf + &rg == RationalFunction::from_poly(f + g), || format!("sum of {f}, {g}"))?;
    ensure(&rf - &rg == RationalFunction::from_poly(f - g), || format!("difference of {f}, {g}"))?;
    ensure(&rf * &rg == RationalFunction::from_poly(f * g), || format!("product of {f}, {g}"))?;
    if !g.is_zero() {
        let (qt, r) = f.divmod(g).unwrap();
        let back = &(&RationalFunction::from_poly(qt) * &rg) + &RationalFunction::from_poly(r);
        ensure(back == rf, || format!("division of {f} by {g}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- ore

pub fn prop_phi_homomorphism(m: &DrinfeldModel, a: &Poly, b: &Poly) -> Outcome {
    ensure(m.phi_a(&(a * b)) == m.phi_a(a).mul(&m.phi_a(b)), || format!("phi_ab != phi_a phi_b for {a}, {b}"))?;
    ensure(m.phi_a(&(a + b)) == m.phi_a(a).add(&m.phi_a(b)), || format!("phi_(a+b) for {a}, {b}"))
}

pub fn prop_eval_composition(m: &DrinfeldModel, a: &Poly, b: &Poly, x: &Poly) -> Outcome {
    let lhs = m.phi_a(&(a * b)).eval(x);
    let rhs = m.phi_a(a).eval(&m.phi_a(b).eval(x));
    ensure(lhs == rhs, || format!("phi_ab(x) for a={a}, b={b}, x={x}"))
}

pub fn prop_twist_composition(m: &DrinfeldModel, h: &Poly, h2: &Poly) -> Outcome {
    let lhs = lift(lift(m.twist_by(h))?.twist_by(h2))?;
    let rhs = lift(m.twist_by(&(h * h2)))?;
    ensure(lhs == rhs, || format!("twist by {h} then {h2}"))
}

pub fn prop_t_twist_at_one(m: &DrinfeldModel) -> Outcome {
    ensure(m.t_twist().specialize_one() == *m.phi_t(), || format!("t_twist(T=1) of {m}"))
}

/// Fitting route at the first two (H)-places and the orbit route agree.
pub fn prop_torsion_place_independent(m: &DrinfeldModel, x: &Poly) -> Outcome {
    let f = m.field();
    let hp: Vec<Place> = places_up_to(f, 2).into_iter().filter(|p| p.satisfies_h()).take(2).collect();
    let a = lift(m.torsion_with_place(x, hp[0].generator()))?;
    let b = lift(m.torsion_with_place(x, hp[1].generator()))?;
    let c = lift(m.is_torsion_point(x))?;
    ensure(a == b && b == c, || format!("torsion of {x} under {m}: {a:?} / {b:?} / {c:?}"))
}

// ---------------------------------------------------------------- residue

fn ann(m: &DrinfeldModel, x: &Poly, i: &Poly) -> std::result::Result<Poly, String> {
    lift(annihilator_mod(m, x, i))
}

/// Monotonicity: pi_x(I) lies in pi_x(J) when J divides I.
pub fn prop_annihilator_monotone(m: &DrinfeldModel, x: &Poly, j: &Poly, k: &Poly) -> Outcome {
    let i = j * k;
    let (ai, aj) = (ann(m, x, &i)?, ann(m, x, j)?);
    ensure(aj.divides(&ai), || format!("pi({j}) = ({aj}) does not contain pi({i}) = ({ai})"))
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    (a * b).divmod(&a.gcd(b)).unwrap().0.monic()
}

/// Coprime factors: pi_x(IJ) = pi_x(I) cap pi_x(J) for coprime I, J.
pub fn prop_annihilator_coprime(m: &DrinfeldModel, x: &Poly, i: &Poly, j: &Poly) -> Outcome {
    if !i.gcd(j).is_one() {
        return Ok(());
    }
    let (aij, ai, aj) = (ann(m, x, &(i * j))?, ann(m, x, i)?, ann(m, x, j)?);
    ensure(aij == lcm(&ai, &aj), || format!("pi({i}*{j}) = {aij}, lcm = {}", lcm(&ai, &aj)))
}

/// Prime-power chain: under (H), pi_x(p^k) is pi_x(p^(k-1)) or p pi_x(p^(k-1)), and stays
/// on the multiplied branch once it has left the constant one.
pub fn prop_annihilator_chain(m: &DrinfeldModel, x: &Poly, p: &Place, kmax: u64) -> Outcome {
    if !p.satisfies_h() {
        return Ok(());
    }
    let pg = p.generator();
    let mut prev = ann(m, x, pg)?;
    let mut dropped = false;
    for k in 2..=kmax {
        let cur = ann(m, x, &pg.pow(k))?;
        let grew = cur == (&prev * pg).monic();
        ensure(cur == prev || grew, || format!("pi({p}^{k}) = {cur} from {prev}"))?;
        ensure(!dropped || grew, || format!("pi({p}^{k}) stopped growing"))?;
        dropped |= grew;
        prev = cur;
    }
    Ok(())
}

/// Annihilator versus Fitting ideal: pi_x(I) divides |phi(A/I)|.
pub fn prop_annihilator_divides_fitting(m: &DrinfeldModel, x: &Poly, i: &Poly) -> Outcome {
    let a = ann(m, x, i)?;
    let fit = fitting_ideal(m, i);
    ensure(a.divides(&fit), || format!("pi({i}) = {a} does not divide {fit}"))
}

pub fn prop_annihilator_units(m: &DrinfeldModel, x: &Poly, i: &Poly, lambda: Elem) -> Outcome {
    ensure(ann(m, x, i)? == ann(m, &x.scale(lambda), i)?, || format!("pi depends on the unit {lambda}"))
}

/// Brute force: the least-degree monic a (lexicographically first among those) with
/// phi_a(x) = 0 mod I.
pub fn prop_annihilator_brute_force(m: &DrinfeldModel, x: &Poly, i: &Poly) -> Outcome {
    let f = m.field();
    let got = ann(m, x, i)?;
    let ring = QuotientRing::new(i).unwrap();
    for d in 0..=i.deg() as usize {
        let found = (0..(f.q() as u64).pow(d as u32)).find_map(|idx| {
            let mut c = crate::places::candidate(f, d, idx);
            c[d] = 1;
            let a = Poly::new(f, c);
            let y = m.eval_phi_a(&a, x).ok()?;
            ring.reduce(&y).is_zero().then_some(a)
        });
        if let Some(a) = found {
            return ensure(a.deg() == got.deg() && a.divides(&got) && got.divides(&a), || {
                format!("brute force {a} vs {got} for I = {i}")
            });
        }
    }
    Err(format!("no annihilator of degree <= deg I = {i}"))
}

// ---------------------------------------------------------------- wieferich

/// Both ordic routes agree under (H).
pub fn prop_ordic_routes(m: &DrinfeldModel, x: &Poly, p: &Place, c_max: u64) -> Outcome {
    if !p.satisfies_h() || x.is_zero() {
        return Ok(());
    }
    let a = lift(ordic_valuation(m, x, p, c_max))?;
    let b = ordic_valuation_by_definition(m, x, p, c_max);
    let same = match (a.value, b.value) {
        (OrdicValue::Finite(u), OrdicValue::Finite(v)) => u == v,
        (OrdicValue::Finite(_), _) | (_, OrdicValue::Finite(_)) => false,
        _ => true,
    };
    ensure(same, || format!("{m}, x={x}, p={p}: formula {:?}, definition {:?}", a.value, b.value))
}

/// The degree-one criterion agrees with the general test at t - alpha.
pub fn prop_degree_one_criterion(m: &DrinfeldModel, x: &Poly) -> Outcome {
    let f = m.field();
    for alpha in f.elements() {
        let p = Place::new(Poly::linear(f, alpha)).unwrap();
        let fast = lift(wieferich_deg1(m, x, alpha))?;
        ensure(fast == is_wieferich_definition(m, &p, x), || format!("{m}, x={x}, t-{alpha}"))?;
    }
    Ok(())
}

/// The base-independent degree-one test against the definition.
pub fn prop_degree_one_any_base(m: &DrinfeldModel, x: &Poly) -> Outcome {
    let f = m.field();
    for alpha in f.elements() {
        let p = Place::new(Poly::linear(f, alpha)).unwrap();
        let fast = lift(wieferich_deg1_any_base(m, x, alpha))?;
        ensure(fast == is_wieferich_definition(m, &p, x), || format!("{m}, x={x}, t-{alpha}"))?;
    }
    Ok(())
}

pub fn prop_wieferich_units(m: &DrinfeldModel, x: &Poly, p: &Place, lambda: Elem) -> Outcome {
    ensure(is_wieferich(m, p, x) == is_wieferich(m, p, &x.scale(lambda)), || format!("{m}, {x}, {p}, {lambda}"))
}

/// Twist shift, stated literally: c_p(p^-m phi p^m; x) = c_p(phi; p^m x) - m when both are finite.
pub fn prop_twist_shift(m: &DrinfeldModel, x: &Poly, p: &Place, k: u32, c_max: u64) -> Outcome {
    if !p.satisfies_h() || x.is_zero() {
        return Ok(());
    }
    let pm = p.generator().pow(k as u64);
    let tw = lift(m.twist_by(&pm))?;
    let lhs = lift(ordic_valuation(&tw, x, p, c_max))?.finite();
    let rhs = lift(ordic_valuation(m, &(&pm * x), p, c_max + k as u64))?.finite();
    match (lhs, rhs) {
        (Some(a), Some(b)) => ensure(a + k as u64 == b, || format!("{m}, x={x}, p={p}, m={k}: {a} vs {b} - {k}")),
        _ => Ok(()),
    }
}

/// pi_x(p^-m phi p^m; p^k) = pi_(p^m x)(phi; p^(m+k)), the identity behind the twist shift.
pub fn prop_twist_annihilator_shift(m: &DrinfeldModel, x: &Poly, p: &Place, k: u32, kmax: u64) -> Outcome {
    let pm = p.generator().pow(k as u64);
    let tw = lift(m.twist_by(&pm))?;
    let y = &pm * x;
    for j in 1..=kmax {
        let lhs = ann(&tw, x, &p.generator().pow(j))?;
        let rhs = ann(m, &y, &p.generator().pow(j + k as u64))?;
        ensure(lhs == rhs, || format!("{m}, x={x}, p={p}, m={k}, k={j}: {lhs} vs {rhs}"))?;
    }
    Ok(())
}

/// Congruence of the lifted annihilator modulo p^i; inapplicable inputs are skipped.
pub fn prop_lift_congruence(m: &DrinfeldModel, fo: &OrePoly, p: &Place, i: usize) -> Outcome {
    match lift_congruence_check(m, fo, p, i) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("congruence fails for {m}, f={fo}, p={p}, i={i}")),
        Err(Error::InvalidArgument(_)) => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

/// Linear characterization: psi = phi + p f is Wieferich at p in base 1 iff the linear relation holds.
pub fn prop_linear_characterization(m: &DrinfeldModel, fo: &OrePoly, p: &Place) -> Outcome {
    let psi_t = m.phi_t().add(&fo.scale_left(p.generator()));
    let Ok(psi) = DrinfeldModel::from_ore(psi_t) else { return Ok(()) };
    if psi.rank() != m.rank() || !p.satisfies_h() {
        return Ok(());
    }
    let one = Poly::one(m.field());
    let (lhs, rhs) = linear_characterization(m, fo, p);
    let w = is_wieferich_definition(&psi, p, &one);
    ensure(w == (lhs == rhs), || format!("{m}, f={fo}, p={p}: Wieferich {w}, relation {}", lhs == rhs))
}

// ---------------------------------------------------------------- lseries

/// Irreducible modulus of prime degree >= 11 over F_q for modular exp/log checks.
pub fn modular_check_modulus(f: &Fq) -> Poly {
    enumerate_places(f, 11).next().unwrap().generator().clone()
}

/// exp(log z) = z and phi_t exp = exp t through tau-order n. Exact for q = 2;
/// modulo an irreducible Q of degree 11 otherwise.
pub fn prop_exp_log(m: &DrinfeldModel, n: usize) -> Outcome {
    let f = m.field();
    if f.q() == 2 {
        let el = exp_log_coeffs(m, n);
        for k in 1..=n {
            let mut s = RationalFunction::zero(f);
            let mut fe = RationalFunction::zero(f);
            for i in 0..=k {
                s = &s + &(&el.exp[i] * &el.log[k - i].frobenius(i as u32));
                let g = if i == 0 { Poly::t(f) } else { m.g(i) };
                fe = &fe + &el.exp[k - i].frobenius(i as u32).scale_poly(&g);
            }
            ensure(s.is_zero(), || format!("exp o log at order {k} for {m}"))?;
            let rhs = el.exp[k].scale_poly(&Poly::t(f).frobenius(k as u32));
            ensure(fe == rhs, || format!("phi_t exp = exp t at order {k} for {m}"))?;
        }
        return Ok(());
    }
    let ring = QuotientRing::new(&modular_check_modulus(f)).unwrap();
    let (e, l) = lift(exp_log_coeffs_in(m, n, &ring))?;
    let t = ring.from_poly(&Poly::t(f));
    let gs: Vec<Vec<Elem>> = (0..=m.rank()).map(|i| if i == 0 { t.clone() } else { ring.from_poly(&m.g(i)) }).collect();
    for k in 1..=n {
        let mut s = ring.zero();
        let mut fe = ring.zero();
        for i in 0..=k {
            s = ring.add(&s, &ring.mul(&e[i], &ring.frobenius_pow(&l[k - i], i)));
            if i < gs.len() {
                fe = ring.add(&fe, &ring.mul(&gs[i], &ring.frobenius_pow(&e[k - i], i)));
            }
        }
        ensure(ring.is_zero(&s), || format!("exp o log at order {k} for {m} (mod Q)"))?;
        let rhs = ring.mul(&e[k], &ring.frobenius_pow(&t, k));
        ensure(fe == rhs, || format!("phi_t exp = exp t at order {k} for {m} (mod Q)"))?;
    }
    Ok(())
}

/// P(0) = 1 and no T^k with 0 < k < deg p.
pub fn prop_local_factor_shape(m: &DrinfeldModel, p: &Place) -> Outcome {
    let lf = local_factor(m, p);
    let c = lf.coeffs();
    ensure(c[0] == RationalFunction::one(m.field()), || format!("P(0) = {} at {p}", c[0]))?;
    let first = c.iter().enumerate().skip(1).find(|(_, x)| !x.is_zero()).map(|(k, _)| k);
    ensure(first.map_or(true, |k| k >= p.degree()), || format!("T^{first:?} below deg {p}"))
}

/// For very small models L(phi;T) = log~(1) = sum l_n T^n.
pub fn prop_log_is_lseries(m: &DrinfeldModel, n: usize) -> Outcome {
    let l = lift(l_series(m, n))?;
    let logs = log_coeffs(m, n - 1);
    ensure(l.coeffs == logs, || format!("L(phi;T) and log~(1) differ below T^{n} for {m}"))
}

/// c_0 = 1 and v_inf(c_n) >= 0 on truncations.
pub fn prop_lseries_at_infinity(m: &DrinfeldModel, n: usize) -> Outcome {
    let l = lift(l_series(m, n))?;
    ensure(l.coeffs[0] == RationalFunction::one(m.field()), || "c_0 != 1".into())?;
    for (k, c) in l.coeffs.iter().enumerate() {
        ensure(c.valuation_infinity() >= Valuation::Finite(0), || format!("v_inf(c_{k}) < 0 for {m}"))?;
    }
    Ok(())
}

/// L_p(phi;1) = p^-1 sum l_n phi_a(u(1))^(q^n) to absolute precision prec.
pub fn prop_class_formula(m: &DrinfeldModel, p: &Place, prec: i64) -> Outcome {
    let v = lift(lp_value_at_1(m, p, prec))?;
    let u = lift(taelman_unit(m, 12))?;
    let c = lift(class_formula_value(m, p, &u.u.eval_one(), prec))?;
    ensure(v.value.agrees_with(&c, prec), || format!("{m} at {p}: {:?} vs {:?}", v.value, c))
}

/// Twisted unit: u_{p^-k phi p^k} = p^-k phi~_{p^(k-1) |phi~(F_p)|}(u_phi).
/// The twisted model is no longer small, so its unit comes from the stabilized series,
/// truncated at `order` or further when the predicted unit has larger T-degree.
pub fn prop_twisted_unit(m: &DrinfeldModel, p: &Place, k: u32, order: usize) -> Outcome {
    let u = lift(taelman_unit(m, 12))?;
    let predicted = lift(twisted_unit_formula(m, p, k, &u.u))?;
    let tw = lift(m.twist_by(&p.generator().pow(k as u64)))?;
    let order = order.max(predicted.t_degree().unwrap_or(0) + 6);
    let direct = lift(taelman_unit(&tw, order))?;
    ensure(direct.u == predicted, || format!("{m}, p={p}, m={k}: {} vs {predicted}", direct.u))
}

/// v_p(L_p(phi;1)) = c_p(phi; u(1)); both infinite for torsion.
pub fn prop_lp_valuation_is_ordic(m: &DrinfeldModel, p: &Place, prec: i64) -> Outcome {
    let v = lift(lp_value_at_1(m, p, prec))?;
    let u = lift(taelman_unit(m, 12))?;
    let c = lift(ordic_valuation(m, &u.u.eval_one(), p, prec as u64))?;
    let ok = match (v.value.valuation_or_none(), c.value) {
        (Some(a), OrdicValue::Finite(b)) => a == b as i64,
        (None, OrdicValue::Infinite) => v.value.exact_zero,
        (None, OrdicValue::AtLeast(_)) => true,
        _ => false,
    };
    ensure(ok, || format!("{m} at {p}: v(L) = {:?}, c = {:?}", v.value.valuation_or_none(), c.value))
}

fn inverse_factor(lf: &LocalFactor, n: usize) -> Vec<RationalFunction> {
    let c = lf.coeffs();
    let f = c[0].field().clone();
    let mut out = vec![RationalFunction::zero(&f); n];
    out[0] = RationalFunction::one(&f);
    for i in 1..n {
        let mut s = RationalFunction::zero(&f);
        for k in 1..c.len().min(i + 1) {
            s = &s - &(&c[k] * &out[i - k]);
        }
        out[i] = s;
    }
    out
}

/// Twisting by h: L_p(phi) = L_p(h^-1 phi h) prod_{l | h, l != p} P_l(phi)^-1 mod T^n.
pub fn prop_lp_twist(m: &DrinfeldModel, p: &Place, h: &Poly, n: usize) -> Outcome {
    let tw = lift(m.twist_by(h))?;
    let lhs = lift(lp_series(m, p, n))?.coeffs;
    let mut rhs = lift(lp_series(&tw, p, n))?.coeffs;
    for l in places_up_to(m.field(), h.deg().max(0) as usize) {
        if l != *p && l.generator().divides(h) {
            rhs = series_mul(&rhs, &inverse_factor(&local_factor(m, &l), n), n);
        }
    }
    ensure(lhs == rhs, || format!("L_p twist identity for {m}, p={p}, h={h}"))
}

/// The vanishing order does not depend on the place.
pub fn prop_vanishing_order_independent(m: &DrinfeldModel, places: &[Place]) -> Outcome {
    let orders: Vec<usize> =
        places.iter().map(|p| vanishing_order(m, Some(p)).map(|v| v.order)).collect::<Result<_>>().map_err(|e| e.to_string())?;
    ensure(orders.windows(2).all(|w| w[0] == w[1]), || format!("{m}: orders {orders:?}"))
}

// ---------------------------------------------------------------- anderson

pub fn prop_dual_factor(m: &DrinfeldModel, p: &Place) -> Outcome {
    let a = local_factor(m, p);
    let b = lift(euler_factor_via_dual(m, p))?;
    ensure(a == b, || format!("{m} at {p}: {a} vs {b}"))
}

/// Euler products mod T^n from both factor collections agree.
pub fn prop_euler_products_agree(m: &DrinfeldModel, n: usize) -> Outcome {
    let f = m.field();
    let mut a = vec![RationalFunction::zero(f); n];
    a[0] = RationalFunction::one(f);
    let mut b = a.clone();
    for p in places_up_to(f, n - 1) {
        a = series_mul(&a, &inverse_factor(&local_factor(m, &p), n), n);
        b = series_mul(&b, &inverse_factor(&lift(euler_factor_via_dual(m, &p))?, n), n);
    }
    ensure(a == b, || format!("Euler products differ for {m}"))?;
    ensure(a == lift(l_series(m, n))?.coeffs, || format!("Euler product and l_series differ for {m}"))
}

// ---------------------------------------------------------------- search, stats, cli

/// The compact A/p^2 test against the definition of the ordic valuation.
pub fn prop_fast_vs_definition(m: &DrinfeldModel, x: &Poly, p: &Place) -> Outcome {
    let Some(cp) = CompactPlace::new(p) else { return Ok(()) };
    let fast = cp.is_wieferich(&cp.model_residues(m), x.coeffs(), x.derivative().coeffs());
    let c = ordic_valuation_by_definition(m, x, p, 1).value;
    let slow = !matches!(c, OrdicValue::Finite(0));
    ensure(fast == slow, || format!("{m}, x={x}, p={p}: fast {fast}, definition {c:?}"))
}

pub fn prop_sampling(u: &Universe, seed: u64, index: u64) -> Outcome {
    let a = sample_model(u, seed, index);
    ensure(a == sample_model(u, seed, index), || "sampling is not deterministic".into())?;
    ensure(a.is_small() && a.rank() <= u.rank(), || format!("sample {a} outside the universe"))
}

pub fn prop_round_trip(m: &DrinfeldModel, x: &Poly) -> Outcome {
    let f = m.field();
    ensure(lift(parse_model(&m.to_string(), f))? == *m, || format!("model {m} does not re-parse"))?;
    ensure(lift(parse_poly(&x.to_string(), f))? == *x, || format!("polynomial {x} does not re-parse"))
}

// ---------------------------------------------------------------- suites

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub module: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

type Body = fn(&mut ChaCha8Rng) -> Vec<Outcome>;

pub struct Suite {
    pub name: &'static str,
    pub module: &'static str,
    body: Body,
}

fn fields(qs: &[u32]) -> Vec<Fq> {
    qs.iter().map(|&q| Fq::new(q).unwrap()).collect()
}

fn pick<'a>(rng: &mut ChaCha8Rng, fs: &'a [Fq]) -> &'a Fq {
    fs.choose(rng).unwrap()
}

fn repeat(rng: &mut ChaCha8Rng, n: usize, mut f: impl FnMut(&mut ChaCha8Rng) -> Outcome) -> Vec<Outcome> {
    (0..n).map(|_| f(rng)).collect()
}

fn suite_list() -> Vec<Suite> {
    let s = |name, module, body: Body| Suite { name, module, body };
    vec![
        s("degree_additive", "core_algebra", |rng| {
            let fs = fields(&[2, 3, 4, 5]);
            repeat(rng, 200, |rng| {
                let f = pick(rng, &fs);
                prop_degree_additive(&random_poly(rng, f, 8), &random_poly(rng, f, 8))
            })
        }),
        s("place_counts", "core_algebra", |_| {
            fields(&[2, 3, 4, 5])
                .iter()
                .flat_map(|f| {
                    let dmax = match f.q() { 2 | 3 => 8, 4 => 7, _ => 6 };
                    (1..=dmax).map(|d| prop_place_count(f, d)).collect::<Vec<_>>()
                })
                .collect()
        }),
        s("valuation_laws", "core_algebra", |rng| {
            let fs = fields(&[2, 3, 5]);
            repeat(rng, 200, |rng| {
                let f = pick(rng, &fs);
                let p = random_place(rng, f, 3);
                let k = rng.gen_range(0..3u64);
                let a = &p.generator().pow(k) * &random_nonzero_poly(rng, f, 5);
                prop_valuation(&a, &random_poly(rng, f, 6), &p)
            })
        }),
        s("rational_vs_poly", "core_algebra", |rng| {
            let fs = fields(&[2, 3, 4]);
            repeat(rng, 200, |rng| {
                let f = pick(rng, &fs);
                prop_rational_matches_poly(&random_poly(rng, f, 6), &random_poly(rng, f, 4))
            })
        }),
        s("phi_homomorphism", "ore", |rng| {
            let fs = fields(&[2, 3, 4]);
            repeat(rng, 60, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Bounded(3));
                let (a, b) = (random_poly(rng, f, 2), random_poly(rng, f, 2));
                prop_phi_homomorphism(&m, &a, &b)?;
                prop_eval_composition(&m, &a, &b, &random_poly(rng, f, 2))
            })
        }),
        s("twists", "ore", |rng| {
            let fs = fields(&[2, 3, 5]);
            repeat(rng, 100, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Small);
                prop_twist_composition(&m, &random_nonzero_poly(rng, f, 2), &random_nonzero_poly(rng, f, 2))?;
                prop_t_twist_at_one(&m)
            })
        }),
        s("torsion_place_independent", "ore", |rng| {
            let f = Fq::new(3).unwrap();
            repeat(rng, 100, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                let x = random_nonzero_poly(rng, &f, 2);
                prop_torsion_place_independent(&m, &x)
            })
        }),
        s("annihilator_ideals", "residue", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 150, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                let x = random_nonzero_poly(rng, f, 3);
                let di = rng.gen_range(1..=3);
                let i = random_monic(rng, f, di);
                let dj = rng.gen_range(1..=2);
                let j = random_monic(rng, f, dj);
                prop_annihilator_monotone(&m, &x, &i, &j)?;
                prop_annihilator_coprime(&m, &x, &i, &j)?;
                prop_annihilator_divides_fitting(&m, &x, &i)?;
                prop_annihilator_units(&m, &x, &i, random_unit(rng, f))?;
                let p = random_h_place(rng, f, 2);
                prop_annihilator_chain(&m, &x, &p, 4)
            })
        }),
        s("annihilator_brute_force", "residue", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 100, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                let di = rng.gen_range(1..=3);
                let i = random_monic(rng, f, di);
                prop_annihilator_brute_force(&m, &random_poly(rng, f, 3), &i)
            })
        }),
        s("ordic_routes", "wieferich", |rng| {
            let fs = fields(&[3, 5]);
            repeat(rng, 500, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                let p = random_h_place(rng, f, 3);
                prop_ordic_routes(&m, &random_nonzero_poly(rng, f, 3), &p, 8)
            })
        }),
        s("degree_one_criterion", "wieferich", |rng| {
            let fs = fields(&[3, 4, 5]);
            repeat(rng, 300, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Small);
                prop_degree_one_criterion(&m, &Poly::one(f))
            })
        }),
        s("degree_one_any_base", "wieferich", |rng| {
            let fs = fields(&[3, 4, 5]);
            repeat(rng, 300, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Small);
                prop_degree_one_any_base(&m, &random_nonzero_poly(rng, f, 3))
            })
        }),
        s("wieferich_units", "wieferich", |rng| {
            let fs = fields(&[3, 4, 5]);
            repeat(rng, 200, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                let p = random_place(rng, f, 3);
                prop_wieferich_units(&m, &random_nonzero_poly(rng, f, 3), &p, random_unit(rng, f))
            })
        }),
        s("twist_shift", "wieferich", |rng| {
            let f = Fq::new(3).unwrap();
            repeat(rng, 60, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                let p = random_h_place(rng, &f, 2);
                let k = rng.gen_range(1..=2);
                prop_twist_shift(&m, &random_nonzero_poly(rng, &f, 2), &p, k, 6)
            })
        }),
        s("twist_annihilator_shift", "wieferich", |rng| {
            let f = Fq::new(3).unwrap();
            repeat(rng, 60, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                let p = random_place(rng, &f, 2);
                let k = rng.gen_range(1..=2);
                prop_twist_annihilator_shift(&m, &random_nonzero_poly(rng, &f, 2), &p, k, 3)
            })
        }),
        s("lift_congruence", "wieferich", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 200, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                let fo = random_perturbation(rng, f, m.rank(), 2);
                let p = random_place(rng, f, 2);
                prop_lift_congruence(&m, &fo, &p, rng.gen_range(1..=4))
            })
        }),
        s("linear_characterization", "wieferich", |rng| {
            let f = Fq::new(3).unwrap();
            repeat(rng, 150, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                let fo = random_perturbation(rng, &f, m.rank(), 3);
                let p = random_place(rng, &f, 2);
                prop_linear_characterization(&m, &fo, &p)
            })
        }),
        s("exp_log_order_8", "lseries", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 50, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Small);
                prop_exp_log(&m, 8)
            })
        }),
        s("local_factor_shape", "lseries", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 100, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Bounded(6));
                let p = random_place(rng, f, 4);
                prop_local_factor_shape(&m, &p)
            })
        }),
        s("log_is_lseries", "lseries", |rng| {
            let f = Fq::new(2).unwrap();
            repeat(rng, 8, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::VerySmall);
                prop_log_is_lseries(&m, 7)
            })
        }),
        s("lseries_at_infinity", "lseries", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 10, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                prop_lseries_at_infinity(&m, 4)
            })
        }),
        s("class_formula", "lseries", |rng| {
            let f = Fq::new(3).unwrap();
            repeat(rng, 25, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                let p = random_h_place(rng, &f, 3);
                prop_class_formula(&m, &p, 5)
            })
        }),
        s("twisted_unit", "lseries", |rng| {
            let (f2, f3) = (Fq::new(2).unwrap(), Fq::new(3).unwrap());
            let mut out = repeat(rng, 12, |rng| {
                let m = random_model(rng, &f2, 2, ModelFamily::Small);
                let p = random_place(rng, &f2, 1);
                let k = rng.gen_range(1..=2);
                prop_twisted_unit(&m, &p, k, 9)
            });
            out.extend(repeat(rng, 6, |rng| {
                let m = random_model_of_rank(rng, &f3, 1, ModelFamily::Small);
                let p = random_place(rng, &f3, 1);
                prop_twisted_unit(&m, &p, 1, 7)
            }));
            out.extend(repeat(rng, 2, |rng| {
                let m = random_model_of_rank(rng, &f3, 2, ModelFamily::Small);
                let p = random_place(rng, &f3, 1);
                prop_twisted_unit(&m, &p, 1, 8)
            }));
            out
        }),
        s("lp_valuation_is_ordic", "lseries", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 30, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::VerySmall);
                let p = random_h_place(rng, f, 3);
                prop_lp_valuation_is_ordic(&m, &p, 4)
            })
        }),
        s("lp_twist", "lseries", |rng| {
            let f = Fq::new(3).unwrap();
            repeat(rng, 20, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                let p = random_h_place(rng, &f, 2);
                let dh = rng.gen_range(1..=2);
                let h = random_monic(rng, &f, dh);
                prop_lp_twist(&m, &p, &h, 5)
            })
        }),
        s("vanishing_order_independent", "lseries", |rng| {
            let f = Fq::new(3).unwrap();
            let places: Vec<Place> = ["t", "t+1", "t^2+1"]
                .iter()
                .map(|s| Place::new(parse_poly(s, &f).unwrap()).unwrap())
                .collect();
            repeat(rng, 20, |rng| {
                let m = random_model(rng, &f, 2, ModelFamily::Small);
                prop_vanishing_order_independent(&m, &places)
            })
        }),
        s("dual_euler_factor", "anderson", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 100, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Small);
                places_up_to(f, 3).iter().try_for_each(|p| prop_dual_factor(&m, p))
            })
        }),
        s("euler_products", "anderson", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 5, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                prop_euler_products_agree(&m, 4)
            })
        }),
        s("rank_drop", "anderson", |_| {
            let f = Fq::new(3).unwrap();
            let m = parse_model("t + t^3*tau", &f).unwrap();
            let p = Place::new(Poly::t(&f)).unwrap();
            let lf = local_factor(&m, &p);
            vec![
                ensure(lf.coeffs() == vec![RationalFunction::one(&f)], || format!("factor {lf}")),
                prop_dual_factor(&m, &p),
            ]
        }),
        s("sampling", "stats", |rng| {
            let fs = fields(&[2, 3]);
            repeat(rng, 100, |rng| {
                let f = pick(rng, &fs);
                let u = Universe::new(f, rng.gen_range(1..=4)).unwrap();
                prop_sampling(&u, rng.gen(), rng.gen_range(0..1000))
            })
        }),
        s("fast_vs_definition", "search", |rng| {
            let fs = fields(&[2, 3, 4]);
            repeat(rng, 40, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 2, ModelFamily::Small);
                let x = random_nonzero_poly(rng, f, 2);
                places_up_to(f, if f.q() == 4 { 3 } else { 4 }).iter().try_for_each(|p| prop_fast_vs_definition(&m, &x, p))
            })
        }),
        s("round_trip", "cli", |rng| {
            let fs = fields(&[2, 3, 4, 5, 9]);
            repeat(rng, 200, |rng| {
                let f = pick(rng, &fs);
                let m = random_model(rng, f, 3, ModelFamily::Small);
                prop_round_trip(&m, &random_poly(rng, f, 6))
            })
        }),
    ]
}

pub fn suites() -> Vec<Suite> {
    suite_list()
}

pub fn suite_names() -> Vec<&'static str> {
    suite_list().iter().map(|s| s.name).collect()
}

fn seed_for(seed: u64, name: &str) -> u64 {
    name.bytes().fold(seed, |h, b| h.wrapping_mul(0x100_0000_01b3).wrapping_add(b as u64))
}

pub fn run_suite(suite: &Suite, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(seed, suite.name));
    let start = Instant::now();
    let outcomes = (suite.body)(&mut rng);
    SuiteReport {
        name: suite.name,
        module: suite.module,
        cases: outcomes.len(),
        failures: outcomes.into_iter().filter_map(|o| o.err()).collect(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the suites whose name or module matches `filter` (all when `None`).
pub fn run_suites(filter: Option<&str>, seed: u64) -> Result<Vec<SuiteReport>> {
    let chosen: Vec<Suite> =
        suite_list().into_iter().filter(|s| filter.map_or(true, |f| s.name == f || s.module == f)).collect();
    if chosen.is_empty() {
        return Err(Error::InvalidArgument(format!("no suite or module named {:?}", filter.unwrap_or(""))));
    }
    Ok(chosen.iter().map(|s| run_suite(s, seed)).collect())
}
