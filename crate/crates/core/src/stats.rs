//! Sampling of small Drinfeld models, base-1 Wieferich indicators, normalized
//! per-degree statistics and chi-square tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::compact::FastPlace;
use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::ore::DrinfeldModel;
use crate::places::{count_places, enumerate_places, Place};
use crate::poly::Poly;
use crate::wieferich::is_wieferich;

/// Largest universe enumerated in exhaustive mode unless configured otherwise.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u128 = 10_000;

/// Which models of the rank bound belong to a universe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankLaw {
    /// Every nonzero coefficient tuple (g_1, ..., g_r); lower ranks included.
    #[default]
    AtMost,
    /// Only tuples with g_r != 0.
    Exactly,
}

impl RankLaw {
    pub fn label(&self) -> &'static str {
        match self {
            RankLaw::AtMost => "at_most",
            RankLaw::Exactly => "exactly",
        }
    }
}

/// Small models of rank at most r (or exactly r) over F_q, excluding phi_t = t, with the uniform law.
#[derive(Clone, Debug)]
pub struct Universe {
    field: Fq,
    rank: usize,
    law: RankLaw,
}

impl Universe {
    pub fn new(field: &Fq, rank: usize) -> Result<Universe> {
        Universe::with_law(field, rank, RankLaw::AtMost)
    }
    pub fn with_law(field: &Fq, rank: usize, law: RankLaw) -> Result<Universe> {
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        Ok(Universe { field: field.clone(), rank, law })
    }
    pub fn field(&self) -> &Fq {
        &self.field
    }
    pub fn q(&self) -> usize {
        self.field.q()
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn law(&self) -> RankLaw {
        self.law
    }
    /// Number of coefficients of g_i (degree <= q^i).
    fn coeff_len(&self, i: usize) -> usize {
        self.q().pow(i as u32) + 1
    }
    fn total_len(&self) -> usize {
        (1..=self.rank).map(|i| self.coeff_len(i)).sum()
    }
    /// prod_i q^(q^i + 1) - 1 (at most r) or prod_{i<r} q^(q^i + 1) * (q^(q^r + 1) - 1)
    /// (exactly r); `None` when it exceeds u128.
    pub fn cardinality(&self) -> Option<u128> {
        let q = self.q() as u128;
        let mut lower: u128 = 1;
        for i in 1..self.rank {
            let e = u32::try_from(self.coeff_len(i)).ok()?;
            lower = lower.checked_mul(q.checked_pow(e)?)?;
        }
        let top = q.checked_pow(u32::try_from(self.coeff_len(self.rank)).ok()?)?;
        match self.law {
            RankLaw::AtMost => Some(lower.checked_mul(top)? - 1),
            RankLaw::Exactly => lower.checked_mul(top - 1),
        }
    }
    fn model_from_digits(&self, digits: &[Elem]) -> DrinfeldModel {
        let mut gs = Vec::with_capacity(self.rank);
        let mut pos = 0;
        for i in 1..=self.rank {
            let len = self.coeff_len(i);
            gs.push(Poly::new(&self.field, digits[pos..pos + len].to_vec()));
            pos += len;
        }
        DrinfeldModel::new(&self.field, gs).expect("nonzero tuple")
    }
    /// The model with index 1 <= idx <= cardinality. Digits are little-endian; under
    /// `Exactly` the digits of g_r encode a nonzero value.
    pub fn model(&self, idx: u128) -> DrinfeldModel {
        let q = self.q() as u128;
        let total = self.total_len();
        let top_len = self.coeff_len(self.rank);
        let mut n = match self.law {
            RankLaw::AtMost => idx,
            RankLaw::Exactly => {
                let lower = q.pow((total - top_len) as u32);
                let k = idx - 1;
                (k / lower + 1) * lower + k % lower
            }
        };
        let digits: Vec<Elem> = (0..total)
            .map(|_| {
                let d = (n % q) as Elem;
                n /= q;
                d
            })
            .collect();
        self.model_from_digits(&digits)
    }
    fn admits(&self, digits: &[Elem]) -> bool {
        match self.law {
            RankLaw::AtMost => digits.iter().any(|&d| d != 0),
            RankLaw::Exactly => digits[self.total_len() - self.coeff_len(self.rank)..].iter().any(|&d| d != 0),
        }
    }
}

/// The sample with the given index: ChaCha8 seeded with `seed` on stream `index`,
/// so samples do not depend on how work is split.
pub fn sample_model(u: &Universe, seed: u64, index: u64) -> DrinfeldModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let total = u.total_len();
    let q = u.q();
    loop {
        let digits: Vec<Elem> = (0..total).map(|_| rng.gen_range(0..q) as Elem).collect();
        if u.admits(&digits) {
            return u.model_from_digits(&digits);
        }
    }
}

/// W = 1 iff p is phi-Wieferich in base 1.
pub fn wieferich_indicator(model: &DrinfeldModel, p: &Place) -> u8 {
    u8::from(is_wieferich(model, p, &Poly::one(model.field())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    All,
    NonTorsion,
}

impl Column {
    pub fn label(&self) -> &'static str {
        match self {
            Column::All => "all",
            Column::NonTorsion => "non_torsion",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MonteCarlo { seed: u64, samples: u64 },
    Exhaustive,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::MonteCarlo { .. } => "monte_carlo",
            Mode::Exhaustive => "exhaustive",
        }
    }
}

/// One table cell: (q^d / #P_d) * mean over models of sum_{p in P_d} W_p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellResult {
    pub q: usize,
    pub rank: usize,
    pub degree: usize,
    pub column: Column,
    /// Total number of Wieferich pairs (model, place).
    pub hits: u64,
    /// Number of models averaged over.
    pub models: u64,
    pub places: u64,
    pub mode: Mode,
    pub law: RankLaw,
}

impl CellResult {
    /// Exact value as numerator / denominator.
    pub fn ratio(&self) -> (u128, u128) {
        let num = (self.q as u128).pow(self.degree as u32) * self.hits as u128;
        let den = self.places as u128 * self.models as u128;
        (num, den)
    }
    pub fn value(&self) -> f64 {
        let (n, d) = self.ratio();
        if d == 0 {
            f64::NAN
        } else {
            n as f64 / d as f64
        }
    }
    /// Value rounded half away from zero to two decimals, in hundredths.
    pub fn rounded_hundredths(&self) -> Option<u128> {
        let (n, d) = self.ratio();
        (d != 0).then(|| (200 * n + d) / (2 * d))
    }
    /// Display form: two decimals, or ">100".
    pub fn display(&self) -> String {
        let (n, d) = self.ratio();
        if d == 0 {
            return "n/a".into();
        }
        if n > 100 * d {
            return ">100".into();
        }
        let h = self.rounded_hundredths().unwrap();
        format!("{}.{:02}", h / 100, h % 100)
    }
    /// Standard deviation of the value under independent Bernoulli(q^-d) indicators.
    pub fn bernoulli_sigma(&self) -> f64 {
        let pi = (self.q as f64).powi(-(self.degree as i32));
        let var_sum = self.places as f64 * pi * (1.0 - pi);
        (self.q as f64).powi(self.degree as i32) / self.places as f64 * (var_sum / self.models as f64).sqrt()
    }
}

/// How the models of a table are chosen.
#[derive(Clone, Copy, Debug)]
pub enum Sampling {
    Exhaustive { threshold: u128 },
    MonteCarlo { samples: u64, seed: u64 },
}

struct ModelEntry {
    model: DrinfeldModel,
    torsion: bool,
}

/// How models are classified for the non-torsion column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorsionClassifier {
    /// The exact torsion oracle.
    Exact,
    /// phi_a(1) = 0 with a the Fitting ideal at the given place. Exact when the place
    /// satisfies (H); at other places it can miss torsion.
    FittingAt(Place),
}

impl TorsionClassifier {
    pub fn is_torsion(&self, model: &DrinfeldModel) -> Result<bool> {
        let one = Poly::one(model.field());
        match self {
            TorsionClassifier::Exact => Ok(model.is_torsion_point(&one)?.torsion),
            TorsionClassifier::FittingAt(p) => {
                let a = crate::residue::fitting_ideal(model, p.generator());
                Ok(model.eval_phi_a(&a, &one)?.is_zero())
            }
        }
    }
}

fn collect_models(u: &Universe, sampling: Sampling, classifier: &TorsionClassifier) -> Result<(Vec<ModelEntry>, Mode)> {
    let (models, mode): (Vec<DrinfeldModel>, Mode) = match sampling {
        Sampling::Exhaustive { threshold } => {
            let card = u
                .cardinality()
                .filter(|&c| c <= threshold)
                .ok_or_else(|| Error::ResourceLimit(format!("universe larger than the exhaustive threshold {threshold}")))?;
            ((1..=card).map(|i| u.model(i)).collect(), Mode::Exhaustive)
        }
        Sampling::MonteCarlo { samples, seed } => (
            (0..samples).into_par_iter().map(|i| sample_model(u, seed, i)).collect(),
            Mode::MonteCarlo { seed, samples },
        ),
    };
    let entries = models
        .into_par_iter()
        .map(|model| {
            let torsion = classifier.is_torsion(&model)?;
            Ok(ModelEntry { model, torsion })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((entries, mode))
}

fn indicator(fast: &Option<FastPlace>, p: &Place, e: &ModelEntry) -> bool {
    // torsion base points are Wieferich at every place satisfying (H)
    if e.torsion && p.satisfies_h() {
        return true;
    }
    match fast {
        Some(fp) => fp.is_wieferich_one(&e.model),
        None => wieferich_indicator(&e.model, p) == 1,
    }
}

/// Normalized Wieferich counts for every degree in `degrees` and both columns.
pub fn stats_table(u: &Universe, degrees: std::ops::RangeInclusive<usize>, sampling: Sampling) -> Result<Vec<CellResult>> {
    stats_table_with(u, degrees, sampling, &TorsionClassifier::Exact)
}

/// `stats_table` with an explicit classifier for the non-torsion column.
pub fn stats_table_with(
    u: &Universe,
    degrees: std::ops::RangeInclusive<usize>,
    sampling: Sampling,
    classifier: &TorsionClassifier,
) -> Result<Vec<CellResult>> {
    let (entries, mode) = collect_models(u, sampling, classifier)?;
    let n_all = entries.len() as u64;
    let n_nt = entries.iter().filter(|e| !e.torsion).count() as u64;
    let mut out = Vec::new();
    for d in degrees {
        if d == 0 {
            return Err(Error::InvalidArgument("degrees start at 1".into()));
        }
        let places: Vec<Place> = enumerate_places(u.field(), d).collect();
        let (hits_all, hits_nt) = places
            .par_iter()
            .map(|p| {
                let fast = FastPlace::new(p);
                let mut all = 0u64;
                let mut nt = 0u64;
                for e in &entries {
                    if indicator(&fast, p, e) {
                        all += 1;
                        nt += u64::from(!e.torsion);
                    }
                }
                (all, nt)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let n_places = places.len() as u64;
        debug_assert_eq!(n_places, count_places(u.q() as u64, d as u32));
        for (column, hits, models) in [(Column::All, hits_all, n_all), (Column::NonTorsion, hits_nt, n_nt)] {
            out.push(CellResult { q: u.q(), rank: u.rank, degree: d, column, hits, models, places: n_places, mode, law: u.law });
        }
    }
    Ok(out)
}

/// Result of a chi-square test of the joint law of (W_p) against independent Bernoulli(q^-deg p).
#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub places: Vec<String>,
    pub samples: u64,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
}

impl ChiSquareReport {
    pub fn rejected_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn joint_test(u: &Universe, places: &[Place], samples: u64, seed: u64) -> Result<ChiSquareReport> {
    let k = places.len();
    let probs: Vec<f64> = places.iter().map(|p| (u.q() as f64).powi(-(p.degree() as i32))).collect();
    let cells = 1usize << k;
    let expected: Vec<f64> = (0..cells)
        .map(|mask| {
            samples as f64
                * probs
                    .iter()
                    .enumerate()
                    .map(|(i, &pi)| if mask >> i & 1 == 1 { pi } else { 1.0 - pi })
                    .product::<f64>()
        })
        .collect();
    if expected.iter().any(|&e| e < 5.0) {
        return Err(Error::InvalidArgument("sample too small: some expected cell count is below 5".into()));
    }
    let fast: Vec<Option<FastPlace>> = places.iter().map(FastPlace::new).collect();
    let observed = (0..samples)
        .into_par_iter()
        .map(|i| {
            let model = sample_model(u, seed, i);
            let e = ModelEntry { torsion: false, model };
            let mut mask = 0usize;
            for (j, p) in places.iter().enumerate() {
                if indicator(&fast[j], p, &e) {
                    mask |= 1 << j;
                }
            }
            let mut v = vec![0u64; cells];
            v[mask] = 1;
            v
        })
        .reduce(|| vec![0u64; cells], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let statistic: f64 = observed.iter().zip(&expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    let dof = (cells - 1) as u64;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareReport {
        places: places.iter().map(|p| p.to_string()).collect(),
        samples,
        observed,
        expected,
        statistic,
        degrees_of_freedom: dof,
        p_value: dist.sf(statistic),
    })
}

/// Chi-square test of mutual independence of (W_p) for at least two places.
pub fn independence_test(u: &Universe, places: &[Place], samples: u64, seed: u64) -> Result<ChiSquareReport> {
    if places.len() < 2 {
        return Err(Error::InvalidArgument("independence needs at least two places".into()));
    }
    joint_test(u, places, samples, seed)
}

/// Chi-square test of P(W_p = 1) = q^-deg p for a single place.
pub fn frequency_test(u: &Universe, place: &Place, samples: u64, seed: u64) -> Result<ChiSquareReport> {
    joint_test(u, std::slice::from_ref(place), samples, seed)
}

/// Table rendering: one row per degree, columns all / non_torsion.
pub fn format_table(cells: &[CellResult]) -> String {
    let mut out = String::from("deg        all   non_torsion\n");
    let mut degrees: Vec<usize> = cells.iter().map(|c| c.degree).collect();
    degrees.dedup();
    for d in degrees {
        let get = |col: Column| {
            cells.iter().find(|c| c.degree == d && c.column == col).map(|c| c.display()).unwrap_or_default()
        };
        out.push_str(&format!("{:<6}{:>9}{:>14}\n", d, get(Column::All), get(Column::NonTorsion)));
    }
    out
}

/// CSV with columns q, rank, degree, column, value, n_samples, mode, seed.
pub fn format_csv(cells: &[CellResult]) -> String {
    let mut out = String::from("q,rank,degree,column,value,n_samples,mode,seed\n");
    for c in cells {
        let seed = match c.mode {
            Mode::MonteCarlo { seed, .. } => seed.to_string(),
            Mode::Exhaustive => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.q,
            c.rank,
            c.degree,
            c.column.label(),
            c.display(),
            c.models,
            c.mode.label(),
            seed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    #[test]
    fn universe_sizes() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(Universe::new(&f2, 1).unwrap().cardinality(), Some(7));
        assert_eq!(Universe::new(&f2, 2).unwrap().cardinality(), Some(255));
        let f3 = Fq::new(3).unwrap();
        assert_eq!(Universe::new(&f3, 1).unwrap().cardinality(), Some(80));
        assert_eq!(Universe::new(&f3, 5).unwrap().cardinality(), None);
    }

    #[test]
    fn sampling_is_deterministic_and_small() {
        let f = Fq::new(3).unwrap();
        let u = Universe::new(&f, 3).unwrap();
        for i in 0..20 {
            let a = sample_model(&u, 7, i);
            assert_eq!(a, sample_model(&u, 7, i));
            assert!(a.is_small());
        }
        assert_ne!(sample_model(&u, 7, 0), sample_model(&u, 8, 0));
    }

    #[test]
    fn q2_rank1_outcomes() {
        let f = Fq::new(2).unwrap();
        let u = Universe::new(&f, 1).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..200 {
            seen.insert(sample_model(&u, 1, i).to_string());
        }
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn indicator_examples() {
        let f3 = Fq::new(3).unwrap();
        let t = Place::new(Poly::t(&f3)).unwrap();
        assert_eq!(wieferich_indicator(&DrinfeldModel::carlitz(&f3), &t), 0);
        let f5 = Fq::new(5).unwrap();
        let p = Place::new(parse_poly("t^5+4*t+1", &f5).unwrap()).unwrap();
        assert_eq!(wieferich_indicator(&DrinfeldModel::carlitz(&f5), &p), 1);
        let f2 = Fq::new(2).unwrap();
        for p in enumerate_places(&f2, 3) {
            assert_eq!(wieferich_indicator(&DrinfeldModel::carlitz(&f2), &p), 1);
        }
    }

    fn shown(u: &Universe, degrees: std::ops::RangeInclusive<usize>, cl: &TorsionClassifier) -> Vec<String> {
        let cells = stats_table_with(u, degrees, Sampling::Exhaustive { threshold: DEFAULT_EXHAUSTIVE_THRESHOLD }, cl);
        cells.unwrap().iter().map(|c| c.display()).collect()
    }

    #[test]
    fn rank_one_q2_first_cells() {
        // 7 models; 1 is torsion for g_1 in {1, t, t+1}; the 4 others give 4 and 0 hits
        let f = Fq::new(2).unwrap();
        let u = Universe::new(&f, 1).unwrap();
        assert_eq!(shown(&u, 1..=2, &TorsionClassifier::Exact), vec!["1.14", "1.00", "1.71", "0.00"]);
        // the Fitting test at t (no (H) for q = 2) misses the Carlitz torsion
        let fit = TorsionClassifier::FittingAt(Place::new(Poly::t(&f)).unwrap());
        assert_eq!(shown(&u, 1..=2, &fit), vec!["1.14", "0.80", "1.71", "0.80"]);
    }

    #[test]
    fn exact_rank_universe() {
        let f = Fq::new(2).unwrap();
        let u = Universe::with_law(&f, 2, RankLaw::Exactly).unwrap();
        assert_eq!(u.cardinality(), Some(248));
        let models: std::collections::HashSet<String> =
            (1..=248).map(|i| u.model(i)).inspect(|m| assert_eq!(m.rank(), 2)).map(|m| m.to_string()).collect();
        assert_eq!(models.len(), 248);
        assert!((0..50).all(|i| sample_model(&u, 3, i).rank() == 2));
        assert_eq!(shown(&u, 1..=3, &TorsionClassifier::Exact), vec!["1.00", "0.94", "1.24", "1.08", "0.87", "0.44"]);
    }

    #[test]
    fn rounding_half_away() {
        let c = CellResult {
            q: 2,
            rank: 1,
            degree: 1,
            column: Column::All,
            hits: 2005,
            models: 2000,
            places: 2,
            mode: Mode::Exhaustive,
            law: RankLaw::AtMost,
        };
        // 2 * 2005 / 4000 = 1.0025 -> 1.00; exact halves round up
        assert_eq!(c.display(), "1.00");
        let half = CellResult { hits: 2010, ..c.clone() };
        assert_eq!(half.display(), "1.01");
    }

    #[test]
    fn small_sample_is_rejected() {
        let f = Fq::new(3).unwrap();
        let u = Universe::new(&f, 2).unwrap();
        let places: Vec<Place> = enumerate_places(&f, 1).collect();
        assert!(independence_test(&u, &places, 20, 1).is_err());
        assert!(independence_test(&u, &places[..1], 20_000, 1).is_err());
    }
}
