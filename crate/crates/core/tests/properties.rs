//! Invariants driven by proptest strategies. The property bodies are shared with the
//! `check` suites.

use drinfeld_core::checks::*;
use drinfeld_core::places::places_up_to;
use drinfeld_core::stats::Universe;
use drinfeld_core::{DrinfeldModel, Elem, Fq, OrePoly, Place, Poly};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(DEFAULT_SEED), failure_persistence: None, ..ProptestConfig::default() }
}

/// Raw coefficient stream; every consumer reduces entries modulo q.
fn raw() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(any::<u32>(), 64)
}

struct Stream<'a> {
    f: &'a Fq,
    raw: &'a [u32],
    pos: usize,
}

impl<'a> Stream<'a> {
    fn new(f: &'a Fq, raw: &'a [u32]) -> Self {
        Stream { f, raw, pos: 0 }
    }

    fn next(&mut self) -> Elem {
        let v = self.raw[self.pos % self.raw.len()].rotate_left(self.pos as u32 / 64);
        self.pos += 1;
        (v as usize % self.f.q()) as Elem
    }

    fn poly(&mut self, deg: usize) -> Poly {
        let c = (0..=deg).map(|_| self.next()).collect();
        Poly::new(self.f, c)
    }

    fn nonzero_poly(&mut self, deg: usize) -> Poly {
        let p = self.poly(deg);
        if p.is_zero() {
            Poly::one(self.f)
        } else {
            p
        }
    }

    fn monic(&mut self, deg: usize) -> Poly {
        let mut c: Vec<Elem> = (0..deg).map(|_| self.next()).collect();
        c.push(1);
        Poly::new(self.f, c)
    }

    fn unit(&mut self) -> Elem {
        1 + (self.next() % (self.f.q() as Elem - 1))
    }

    /// Small model (deg g_i <= q^i) of the given rank.
    fn model(&mut self, rank: usize) -> DrinfeldModel {
        let q = self.f.q() as usize;
        let mut gs: Vec<Poly> = (1..=rank).map(|i| self.poly(q.pow(i as u32))).collect();
        if gs[rank - 1].is_zero() {
            gs[rank - 1] = Poly::one(self.f);
        }
        DrinfeldModel::new(self.f, gs).unwrap()
    }

    fn place(&mut self, max_deg: usize, need_h: bool) -> Place {
        let all: Vec<Place> =
            places_up_to(self.f, max_deg).into_iter().filter(|p| !need_h || p.satisfies_h()).collect();
        let i = self.raw[self.pos % self.raw.len()] as usize % all.len();
        self.pos += 1;
        all[i].clone()
    }
}

fn field(qs: &'static [u32]) -> impl Strategy<Value = Fq> {
    prop::sample::select(qs).prop_map(|q| Fq::new(q).unwrap())
}

fn check(o: Outcome) -> Result<(), TestCaseError> {
    o.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn degree_is_additive(f in field(&[2, 3, 4, 5]), r in raw()) {
        let mut s = Stream::new(&f, &r);
        check(prop_degree_additive(&s.poly(7), &s.poly(7)))?;
    }

    #[test]
    fn valuation_laws(f in field(&[2, 3, 5]), r in raw(), k in 0u64..3) {
        let mut s = Stream::new(&f, &r);
        let p = s.place(3, false);
        let a = &p.generator().pow(k) * &s.nonzero_poly(4);
        check(prop_valuation(&a, &s.poly(5), &p))?;
    }

    #[test]
    fn rational_functions_extend_polynomials(f in field(&[2, 3, 4]), r in raw()) {
        let mut s = Stream::new(&f, &r);
        check(prop_rational_matches_poly(&s.poly(6), &s.poly(3)))?;
    }

    #[test]
    fn phi_is_a_ring_homomorphism(f in field(&[2, 3]), r in raw(), rank in 1usize..=2) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let (a, b) = (s.poly(2), s.poly(2));
        check(prop_phi_homomorphism(&m, &a, &b))?;
        check(prop_eval_composition(&m, &a, &b, &s.poly(2)))?;
    }

    #[test]
    fn twists_compose(f in field(&[2, 3, 5]), r in raw(), rank in 1usize..=3) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        check(prop_twist_composition(&m, &s.nonzero_poly(2), &s.nonzero_poly(2)))?;
        check(prop_t_twist_at_one(&m))?;
    }

    #[test]
    fn torsion_does_not_depend_on_the_place(r in raw(), rank in 1usize..=2) {
        let f = Fq::new(3).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        check(prop_torsion_place_independent(&m, &s.nonzero_poly(2)))?;
    }

    #[test]
    fn annihilator_ideals(f in field(&[2, 3]), r in raw(), rank in 1usize..=2, di in 1usize..=3, dj in 1usize..=2) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let x = s.nonzero_poly(3);
        let (i, j) = (s.monic(di), s.monic(dj));
        check(prop_annihilator_monotone(&m, &x, &i, &j))?;
        check(prop_annihilator_coprime(&m, &x, &i, &j))?;
        check(prop_annihilator_divides_fitting(&m, &x, &i))?;
        check(prop_annihilator_units(&m, &x, &i, s.unit()))?;
        check(prop_annihilator_brute_force(&m, &s.poly(3), &i))?;
        let p = s.place(2, true);
        check(prop_annihilator_chain(&m, &x, &p, 4))?;
    }

    #[test]
    fn ordic_routes_agree(f in field(&[3, 5]), r in raw(), rank in 1usize..=2) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(3, true);
        check(prop_ordic_routes(&m, &s.nonzero_poly(3), &p, 8))?;
    }

    #[test]
    fn degree_one_criterion_in_base_one(f in field(&[3, 4, 5]), r in raw(), rank in 1usize..=3) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        check(prop_degree_one_criterion(&m, &Poly::one(&f)))?;
    }

    #[test]
    fn degree_one_criterion_any_base(f in field(&[3, 4, 5]), r in raw(), rank in 1usize..=2) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        check(prop_degree_one_any_base(&m, &s.nonzero_poly(3)))?;
    }

    #[test]
    fn wieferich_is_invariant_under_units(f in field(&[3, 4, 5]), r in raw(), rank in 1usize..=2) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(3, false);
        check(prop_wieferich_units(&m, &s.nonzero_poly(3), &p, s.unit()))?;
    }

    #[test]
    fn twisting_shifts_annihilators(r in raw(), rank in 1usize..=2, k in 1u32..=2) {
        let f = Fq::new(3).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(2, false);
        check(prop_twist_annihilator_shift(&m, &s.nonzero_poly(2), &p, k, 3))?;
    }

    #[test]
    fn lifts_satisfy_the_congruence(f in field(&[2, 3]), r in raw(), rank in 1usize..=2, i in 1usize..=4) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let mut c = vec![Poly::zero(&f)];
        c.extend((0..rank).map(|_| s.poly(2)));
        let p = s.place(2, false);
        check(prop_lift_congruence(&m, &OrePoly::new(&f, c), &p, i))?;
    }

    #[test]
    fn linear_characterization_of_lifts(r in raw(), rank in 1usize..=2) {
        let f = Fq::new(3).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let mut c = vec![Poly::zero(&f)];
        c.extend((0..rank).map(|_| s.poly(3)));
        let p = s.place(2, false);
        check(prop_linear_characterization(&m, &OrePoly::new(&f, c), &p))?;
    }

    #[test]
    fn local_factor_shape(f in field(&[2, 3]), r in raw(), rank in 1usize..=3) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(3, false);
        check(prop_local_factor_shape(&m, &p))?;
        check(prop_dual_factor(&m, &p))?;
    }

    #[test]
    fn fast_test_matches_the_definition(f in field(&[2, 3, 4]), r in raw(), rank in 1usize..=2) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(3, false);
        check(prop_fast_vs_definition(&m, &s.nonzero_poly(2), &p))?;
    }

    #[test]
    fn models_round_trip_through_text(f in field(&[2, 3, 4, 5, 9]), r in raw(), rank in 1usize..=3) {
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        check(prop_round_trip(&m, &s.poly(6)))?;
    }

    #[test]
    fn sampling_is_deterministic(f in field(&[2, 3]), rank in 1usize..=4, seed in any::<u64>(), index in 0u64..10_000) {
        check(prop_sampling(&Universe::new(&f, rank).unwrap(), seed, index))?;
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn exp_and_log_are_inverse(f in field(&[2, 3]), r in raw(), rank in 1usize..=3) {
        let mut s = Stream::new(&f, &r);
        check(prop_exp_log(&s.model(rank), 8))?;
    }

    #[test]
    fn class_formula_matches_the_series(r in raw(), rank in 1usize..=2) {
        let f = Fq::new(3).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(3, true);
        check(prop_class_formula(&m, &p, 5))?;
    }

    #[test]
    fn lp_twist_identity(r in raw(), rank in 1usize..=2, dh in 1usize..=2) {
        let f = Fq::new(3).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(2, true);
        check(prop_lp_twist(&m, &p, &s.monic(dh), 5))?;
    }

    #[test]
    fn vanishing_order_is_place_independent(r in raw(), rank in 1usize..=2) {
        let f = Fq::new(3).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let places: Vec<Place> = places_up_to(&f, 2).into_iter().take(3).collect();
        check(prop_vanishing_order_independent(&m, &places))?;
    }

    #[test]
    fn twisted_unit_formula(r in raw(), rank in 1usize..=2, k in 1u32..=2) {
        let f = Fq::new(2).unwrap();
        let mut s = Stream::new(&f, &r);
        let m = s.model(rank);
        let p = s.place(1, false);
        check(prop_twisted_unit(&m, &p, k, 9))?;
    }
}
