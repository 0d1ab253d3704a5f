//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use drinfeld_core::anderson::euler_factor_via_dual;
use drinfeld_core::checks::{prop_class_formula, random_h_place, random_model, random_model_of_rank, ModelFamily};
use drinfeld_core::lseries::{local_factor, lp_value_at_1, special_lvalue};
use drinfeld_core::parse::parse_poly;
use drinfeld_core::places::{count_places, enumerate_places, places_up_to};
use drinfeld_core::search::{search_wieferich, SearchConfig};
use drinfeld_core::stats::{
    format_table, frequency_test, stats_table_with, CellResult, Column, RankLaw, Sampling, TorsionClassifier, Universe,
};
use drinfeld_core::wieferich::{is_wieferich_definition, ordic_valuation, OrdicValue};
use drinfeld_core::{DrinfeldModel, Fq, Place, Poly, RationalFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Absolute tolerance on rounded reference cells.
const CELL_TOLERANCE: f64 = 0.01;
/// Monte Carlo cells must lie within this many standard deviations of 1.
const MC_SIGMAS: f64 = 3.0;
/// Significance level of the frequency tests.
const ALPHA: f64 = 0.001;
const MC_SAMPLES: u64 = 10_000;
const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Verdict {
        Verdict { pass, detail: detail.into(), notes: Vec::new() }
    }
}

fn within(limit_secs: u64, start: Instant) -> (bool, String) {
    let e = start.elapsed();
    (e <= Duration::from_secs(limit_secs), format!("{:.1}s of {limit_secs}s", e.as_secs_f64()))
}

/// Parses lists written with implicit coefficients ("2t^3").
fn polys(f: &Fq, items: &[&str]) -> Vec<Poly> {
    let explicit = |s: &str| {
        let mut out = String::new();
        for c in s.chars() {
            if c == 't' && out.ends_with(|d: char| d.is_ascii_digit()) {
                out.push('*');
            }
            out.push(c);
        }
        out
    };
    items.iter().map(|s| parse_poly(&explicit(s), f).unwrap()).collect()
}

fn carlitz_hits(f: &Fq, max_degree: usize) -> Vec<Poly> {
    let c = DrinfeldModel::carlitz(f);
    let run = search_wieferich(&c, &Poly::one(f), &SearchConfig::new(max_degree)).unwrap();
    assert!(run.hits.iter().all(|h| h.verified_twice), "a search hit failed re-verification");
    run.hits.iter().map(|h| h.place.generator().clone()).collect()
}

const Q3_PLACES: [&str; 4] = [
    "t^6 + t^4 + t^3 + t^2 + 2t + 2",
    "t^9 + t^6 + t^4 + t^2 + 2t + 2",
    "t^12 + 2t^10 + t^9 + 2t^4 + 2t^3 + t^2 + 1",
    "t^15 + t^13 + t^12 + t^11 + 2t^10 + 2t^7 + 2t^5 + 2t^4 + t^3 + t^2 + t + 1",
];

fn criterion_1() -> Verdict {
    let f = Fq::new(3).unwrap();
    let expected = polys(&f, &Q3_PLACES);
    let start = Instant::now();
    let hits = carlitz_hits(&f, 12);
    let (fast, time) = within(120, start);
    let extended = carlitz_hits(&f, 15);
    let pass = hits == expected[..3] && extended == expected && fast;
    Verdict::new(pass, format!("degree <= 12: {} places ({time}); degree <= 15: {} places", hits.len(), extended.len()))
}

fn criterion_2() -> Verdict {
    let f = Fq::new(5).unwrap();
    let expected = polys(&f, &["t^5 + 4t + 1", "t^10 + 3t^6 + 4t^5 + t^2 + t + 1"]);
    let small = carlitz_hits(&f, 5);
    let start = Instant::now();
    let full = carlitz_hits(&f, 10);
    let (fast, time) = within(900, start);
    Verdict::new(small == expected[..1] && full == expected && fast, format!("{} and {} places ({time})", small.len(), full.len()))
}

fn criterion_3() -> Verdict {
    let f = Fq::with_modulus(4, &[1, 1, 1]).unwrap();
    let expected = polys(&f, &["t^2 + t + z", "t^2 + t + (z + 1)"]);
    let hits = carlitz_hits(&f, 5);
    Verdict::new(hits == expected, format!("{:?}", hits.iter().map(|p| p.to_string()).collect::<Vec<_>>()))
}

fn criterion_4() -> Verdict {
    let f = Fq::new(2).unwrap();
    let c = DrinfeldModel::carlitz(&f);
    let one = Poly::one(&f);
    let info = c.is_torsion_point(&one).unwrap();
    let torsion_ok = info.torsion && info.annihilator == Some(parse_poly("t^2 + t", &f).unwrap());
    let hits = carlitz_hits(&f, 10);
    let expected: u64 = (2..=10).map(|d| count_places(2, d)).sum();
    let all_high = hits.len() as u64 == expected && hits.iter().all(|p| p.deg() >= 2);
    let no_low = enumerate_places(&f, 1).all(|p| !is_wieferich_definition(&c, &p, &one));
    Verdict::new(
        torsion_ok && all_high && no_low,
        format!("annihilator {:?}; {} of {expected} places of degree 2..10 Wieferich; degree 1 clear: {no_low}", info.annihilator.map(|a| a.to_string()), hits.len()),
    )
}

/// v_p(L_p(phi;1)) and c_p(phi;1); the precision exceeds the ordic valuation.
fn valuation_pair(m: &DrinfeldModel, p: &Place) -> Result<(), String> {
    let one = Poly::one(m.field());
    let c = ordic_valuation(m, &one, p, 16).map_err(|e| e.to_string())?;
    let prec = match c.value {
        OrdicValue::Finite(c) => c as i64 + 3,
        _ => 8,
    };
    let v = lp_value_at_1(m, p, prec).map_err(|e| e.to_string())?;
    let ok = match (c.value, v.value.valuation) {
        (OrdicValue::Finite(c), Some(v)) => c as i64 == v,
        (OrdicValue::Infinite, None) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{m} at {p}: c = {:?}, v(L) = {:?}", c.value, v.value.valuation))
    }
}

fn criterion_5() -> Verdict {
    let f = Fq::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let places: Vec<Place> = places_up_to(&f, 3).into_iter().filter(|p| p.satisfies_h()).collect();
    let start = Instant::now();
    let (mut cases, mut positive, mut errors) = (0, 0, Vec::new());
    for _ in 0..50 {
        let m = random_model(&mut rng, &f, 3, ModelFamily::VerySmall);
        for p in &places {
            cases += 1;
            if ordic_valuation(&m, &Poly::one(&f), p, 16).ok().and_then(|c| c.finite()).map_or(true, |c| c > 0) {
                positive += 1;
            }
            if let Err(e) = valuation_pair(&m, p) {
                errors.push(e);
            }
        }
    }
    let (fast, time) = within(600, start);
    let mut v = Verdict::new(errors.is_empty() && fast, format!("{cases} pairs, {positive} with c > 0, {} mismatches ({time})", errors.len()));
    v.notes = errors.into_iter().take(3).collect();
    v
}

fn criterion_6() -> Verdict {
    let f = Fq::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let one = Poly::one(&f);
    let places: Vec<Place> = places_up_to(&f, 2).into_iter().filter(|p| p.satisfies_h()).collect();
    let (mut models, mut cases, mut vanishing, mut errors) = (0, 0, 0, Vec::new());
    while models < 25 {
        let m = random_model(&mut rng, &f, 2, ModelFamily::Small);
        if m.is_torsion_point(&one).unwrap().torsion {
            continue;
        }
        models += 1;
        for p in &places {
            cases += 1;
            let result = ordic_valuation(&m, &one, p, 16).and_then(|c| {
                let prec = c.finite().map_or(8, |c| c as i64 + 3);
                special_lvalue(&m, p, prec).map(|(v, order)| (c, v, order))
            });
            match result {
                Ok((c, v, order)) => {
                    vanishing += usize::from(order.order > 0);
                    if c.finite().map(|c| c as i64) != v.value.valuation {
                        errors.push(format!("{m} at {p}: c = {:?}, v(L*) = {:?}", c.value, v.value.valuation));
                    }
                }
                Err(e) => errors.push(format!("{m} at {p}: {e}")),
            }
        }
    }
    let mut v = Verdict::new(errors.is_empty(), format!("{cases} pairs ({vanishing} with positive vanishing order), {} mismatches", errors.len()));
    v.notes = errors.into_iter().take(3).collect();
    v
}

fn criterion_7() -> Verdict {
    let f = Fq::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut errors = Vec::new();
    for _ in 0..25 {
        let m = random_model(&mut rng, &f, 2, ModelFamily::Small);
        let p = random_h_place(&mut rng, &f, 3);
        if let Err(e) = prop_class_formula(&m, &p, 5) {
            errors.push(e);
        }
    }
    let mut v = Verdict::new(errors.is_empty(), format!("25 models modulo p^5, {} mismatches", errors.len()));
    v.notes = errors.into_iter().take(3).collect();
    v
}

fn carlitz_factor_ok(f: &Fq, p: &Place) -> bool {
    let c = local_factor(&DrinfeldModel::carlitz(f), p).coeffs();
    let d = p.degree();
    let inv_p = RationalFunction::new(Poly::one(f), p.generator().clone()).unwrap();
    c.len() == d + 1
        && c[0] == RationalFunction::one(f)
        && c[1..d].iter().all(|x| x.is_zero())
        && c[d] == -&inv_p
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let fields = [Fq::new(2).unwrap(), Fq::new(3).unwrap()];
    let (mut cases, mut errors) = (0, Vec::new());
    for i in 0..100 {
        let f = &fields[i % 2];
        let rank = 1 + (i / 2) % 3;
        let m = random_model_of_rank(&mut rng, f, rank, ModelFamily::Small);
        for p in places_up_to(f, 3) {
            cases += 1;
            match euler_factor_via_dual(&m, &p) {
                Ok(dual) if dual == local_factor(&m, &p) => {}
                Ok(dual) => errors.push(format!("{m} at {p}: {} vs {dual}", local_factor(&m, &p))),
                Err(e) => errors.push(format!("{m} at {p}: {e}")),
            }
        }
    }
    let carlitz = fields.iter().all(|f| places_up_to(f, 3).iter().all(|p| carlitz_factor_ok(f, p)));
    let mut v = Verdict::new(errors.is_empty() && carlitz, format!("{cases} (model, place) pairs, {} mismatches; Carlitz 1 - T^d/p: {carlitz}", errors.len()));
    v.notes = errors.into_iter().take(3).collect();
    v
}

fn big(n: usize) -> Vec<&'static str> {
    vec![">100"; n]
}

/// Reference cells: (q, rank, all column, non-torsion column) from degree 1.
fn reference_cells() -> Vec<(u32, usize, Vec<&'static str>, Vec<&'static str>)> {
    vec![
        (
            2,
            1,
            [vec!["1.14", "1.71", "3.43", "6.86", "13.71", "27.43", "54.86"], big(12)].concat(),
            [vec!["0.80", "0.80", "1.60", "3.20", "6.40", "12.80", "25.60", "58.03"], big(11)].concat(),
        ),
        (
            2,
            2,
            [vec!["1.00", "1.24", "0.87", "2.06", "2.54", "5.22", "8.49", "16.41", "29.86", "62.10"], big(9)].concat(),
            vec![
                "0.94", "1.08", "0.44", "1.23", "0.77", "1.70", "1.34", "2.08", "1.02", "4.55", "1.69", "4.70", "0.67", "11.04",
                "2.18", "20.18", "1.31", "37.62", "0.81",
            ],
        ),
        (
            3,
            1,
            [vec!["1.01", "0.90", "2.19", "4.56", "9.11", "28.59", "82.01"], big(5)].concat(),
            vec!["0.94", "0.58", "1.23", "1.58", "0.00", "1.31", "0.00", "0.00", "1.64", "5.09", "0.00", "4.06"],
        ),
    ]
}

fn cell_matches(shown: &str, expected: &str) -> bool {
    match (shown.parse::<f64>(), expected.parse::<f64>()) {
        (Ok(a), Ok(b)) => (a - b).abs() <= CELL_TOLERANCE + 1e-9,
        _ => shown == expected,
    }
}

/// Cells that differ from the reference ones, as "deg d column: computed vs expected".
fn mismatches(cells: &[CellResult], all: &[&str], nt: &[&str]) -> Vec<String> {
    cells
        .iter()
        .filter_map(|c| {
            let expected = match c.column {
                Column::All => all[c.degree - 1],
                Column::NonTorsion => nt[c.degree - 1],
            };
            (!cell_matches(&c.display(), expected)).then(|| format!("deg {} {}: {} vs {expected}", c.degree, c.column.label(), c.display()))
        })
        .collect()
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let sampling = Sampling::Exhaustive { threshold: 10_000 };
    let mut notes = Vec::new();
    let mut total_bad = 0;
    let mut total = 0;
    for (q, rank, all, nt) in reference_cells() {
        let f = Fq::new(q).unwrap();
        let degrees = 1..=all.len();
        let u = Universe::with_law(&f, rank, RankLaw::Exactly).unwrap();
        let cells = stats_table_with(&u, degrees.clone(), sampling, &TorsionClassifier::Exact).unwrap();
        let bad = mismatches(&cells, &all, &nt);
        total += cells.len();
        total_bad += bad.len();
        notes.push(format!("q={q} r={rank} (rank exactly r, exact torsion oracle): {} of {} cells differ", bad.len(), cells.len()));
        notes.extend(bad.iter().take(4).map(|b| format!("  {b}")));
        if rank > 1 {
            let at_most = Universe::new(&f, rank).unwrap();
            let alt = stats_table_with(&at_most, degrees.clone(), sampling, &TorsionClassifier::Exact).unwrap();
            notes.push(format!("  diagnostic, rank at most r: {} cells differ", mismatches(&alt, &all, &nt).len()));
        }
        if !bad.is_empty() {
            let t = Place::new(Poly::t(&f)).unwrap();
            let alt = stats_table_with(&u, degrees, sampling, &TorsionClassifier::FittingAt(t)).unwrap();
            let n = mismatches(&alt, &all, &nt).len();
            notes.push(format!("  diagnostic, torsion read off the Fitting ideal at t (not an (H) place for q=2): {n} cells differ"));
            if n == 0 {
                notes.push("  the reference column counts Carlitz (torsion: C_{t^2+t}(1) = 0) as non-torsion".into());
            }
            notes.push(format!("  computed table:\n{}", indent(&format_table(&cells))));
        }
    }
    let (fast, time) = within(300, start);
    let mut v = Verdict::new(total_bad == 0 && fast, format!("{} of {total} cells match ({time})", total - total_bad));
    v.notes = notes;
    v
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}

fn criterion_10() -> Verdict {
    let f3 = Fq::new(3).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for rank in 3..=5 {
        let u = Universe::new(&f3, rank).unwrap();
        let cells = stats_table_with(&u, 1..=3, Sampling::MonteCarlo { samples: MC_SAMPLES, seed: SEED + rank as u64 }, &TorsionClassifier::Exact).unwrap();
        for c in &cells {
            let z = (c.value() - 1.0).abs() / c.bernoulli_sigma();
            worst = worst.max(z);
            if z > MC_SIGMAS {
                pass = false;
                notes.push(format!("rank {rank} deg {} {}: {} is {z:.2} sigma from 1", c.degree, c.column.label(), c.display()));
            }
        }
    }
    for (q, d, r) in [(2u32, 1usize, 3usize), (3, 1, 3), (3, 2, 4)] {
        let f = Fq::new(q).unwrap();
        let u = Universe::new(&f, r).unwrap();
        for p in enumerate_places(&f, d) {
            let rep = frequency_test(&u, &p, MC_SAMPLES, SEED).unwrap();
            let ok = rep.p_value >= ALPHA;
            pass &= ok;
            notes.push(format!("frequency q={q} r={r} p={p}: observed {:?} of {}, p-value {:.4}{}", rep.observed, rep.samples, rep.p_value, if ok { "" } else { " REJECTED" }));
        }
    }
    let mut v = Verdict::new(pass, format!("18 Monte Carlo cells, largest deviation {worst:.2} sigma; frequency tests at level {ALPHA}"));
    v.notes = notes;
    v
}

fn criterion_11() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_drinfeld")).args(["check", "all", "--no-header"]).output().expect("binary runs");
    let (fast, time) = within(900, start);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let failing: Vec<String> = text
        .lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .filter(|l| l.split_whitespace().nth(3).is_some_and(|n| n != "0"))
        .map(|l| l.split_whitespace().take(4).collect::<Vec<_>>().join(" "))
        .collect();
    let mut v = Verdict::new(out.status.success() && fast, format!("`check all` exit status {:?}, {} failing suites ({time})", out.status.code(), failing.len()));
    v.notes = text.lines().skip_while(|l| !l.is_empty()).filter(|l| !l.is_empty()).map(String::from).collect();
    v
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("Carlitz search q=3 through degree 12 (and 15)", criterion_1),
        ("Carlitz search q=5 through degree 5 and 10", criterion_2),
        ("Carlitz search q=4, modulus z^2+z+1, through degree 5", criterion_3),
        ("Carlitz q=2: torsion of 1 and Wieferich places of degree 2..10", criterion_4),
        ("v_p(L_p(phi;1)) = c_p(phi;1) for very small models", criterion_5),
        ("v_p(L_p*(phi;1)) = c_p(phi;1) for small non-torsion models", criterion_6),
        ("class formula modulo p^5", criterion_7),
        ("determinant and dual-motive Euler factors agree", criterion_8),
        ("exhaustive reference cells for (2,1), (2,2), (3,1)", criterion_9),
        ("Monte Carlo cells and frequency tests", criterion_10),
        ("invariant suites (`check all`)", criterion_11),
    ];
    let mut passed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        passed += usize::from(v.pass);
        println!("criterion {:>2} {} {title} ({:.1}s): {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64(), v.detail);
        for n in &v.notes {
            println!("    {n}");
        }
    }
    println!("acceptance: {passed} of {} criteria pass", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
