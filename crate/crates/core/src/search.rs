//! Exhaustive search of Wieferich places of a fixed model, degree by degree, with
//! parallel workers and resumable JSON checkpoints.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compact::CompactPlace;
use crate::error::{Error, Result};
use crate::field::Elem;
use crate::ore::DrinfeldModel;
use crate::parse::parse_poly;
use crate::places::{candidate, candidate_count, is_irreducible_monic, Place};
use crate::poly::Poly;
use crate::residue::fitting_ideal;
use crate::wieferich::{is_wieferich, is_wieferich_definition, ordic_valuation, OrdicValue};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;
/// Candidates between two checkpoint writes.
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 1_000_000;
/// Candidates handed to a worker at once.
pub const DEFAULT_CHUNK: u64 = 4096;
/// Precision cap for the ordic valuation reported with each hit.
const HIT_CMAX: u64 = 6;
const IO_RETRIES: usize = 3;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub max_degree: usize,
    /// 0 means the rayon default.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: u64,
    pub chunk: u64,
    /// Stop (after a checkpoint) once this many candidates were processed.
    pub budget: Option<u64>,
}

impl SearchConfig {
    pub fn new(max_degree: usize) -> SearchConfig {
        SearchConfig {
            max_degree,
            workers: 0,
            checkpoint: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            chunk: DEFAULT_CHUNK,
            budget: None,
        }
    }
}

/// A Wieferich place found by the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchHit {
    pub place: Place,
    /// Lower bound for c_p(phi; x); exact when `exact` is set.
    pub c_lower: u64,
    pub exact: bool,
    pub verified_twice: bool,
}

impl SearchHit {
    pub fn degree(&self) -> usize {
        self.place.degree()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeThroughput {
    pub degree: usize,
    pub candidates: u64,
    pub places: u64,
    pub seconds: f64,
    pub places_per_second: f64,
}

#[derive(Clone, Debug)]
pub struct SearchRun {
    pub hits: Vec<SearchHit>,
    /// Degrees processed by this process only (resumed work is not timed).
    pub throughput: Vec<DegreeThroughput>,
    pub resumed: bool,
    /// False when the candidate budget ran out before max_degree was finished.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct HitRecord {
    degree: usize,
    place: String,
    c_lower: u64,
    exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub schema_version: u32,
    pub q: usize,
    pub field: String,
    pub model: String,
    pub base: String,
    pub config_hash: String,
    /// All degrees up to this one are finished.
    pub completed_degree: usize,
    /// Lexicographic index of the next candidate of degree completed_degree + 1.
    pub next_index: u64,
    found: Vec<HitRecord>,
    pub started_at: u64,
    pub updated_at: u64,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// SHA-256 of the field, model and base point descriptions.
pub fn config_hash(model: &DrinfeldModel, x: &Poly) -> String {
    let mut h = Sha256::new();
    h.update(model.field().describe().as_bytes());
    h.update([0]);
    h.update(model.to_string().as_bytes());
    h.update([0]);
    h.update(x.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl SearchCheckpoint {
    fn fresh(model: &DrinfeldModel, x: &Poly) -> SearchCheckpoint {
        let t = now();
        SearchCheckpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            q: model.field().q(),
            field: model.field().describe(),
            model: model.to_string(),
            base: x.to_string(),
            config_hash: config_hash(model, x),
            completed_degree: 0,
            next_index: 0,
            found: Vec::new(),
            started_at: t,
            updated_at: t,
        }
    }

    pub fn load(path: &Path) -> Result<SearchCheckpoint> {
        let text = fs::read_to_string(path)?;
        let cp: SearchCheckpoint =
            serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        if cp.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::Checkpoint(format!("unsupported schema version {}", cp.schema_version)));
        }
        Ok(cp)
    }

    /// Atomic write: temporary file in the same directory, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let mut last = None;
        for _ in 0..IO_RETRIES {
            let attempt = (|| -> std::io::Result<()> {
                let mut f = fs::File::create(&tmp)?;
                f.write_all(text.as_bytes())?;
                f.sync_all()?;
                fs::rename(&tmp, path)
            })();
            match attempt {
                Ok(()) => return Ok(()),
                Err(e) => last = Some(e),
            }
        }
        Err(Error::Io(format!("checkpoint {}: {}", path.display(), last.unwrap())))
    }

    fn check(&self, model: &DrinfeldModel, x: &Poly) -> Result<()> {
        if self.config_hash != config_hash(model, x) {
            return Err(Error::Checkpoint(format!(
                "checkpoint was written for {} over {} (base {}), not for {} over {} (base {x})",
                self.model,
                self.field,
                self.base,
                model,
                model.field().describe()
            )));
        }
        Ok(())
    }

    fn hits(&self, model: &DrinfeldModel) -> Result<Vec<SearchHit>> {
        self.found
            .iter()
            .map(|r| {
                let place = Place::new(parse_poly(&r.place, model.field())?)?;
                if place.degree() != r.degree {
                    return Err(Error::Checkpoint(format!("corrupt entry {}", r.place)));
                }
                Ok(SearchHit { place, c_lower: r.c_lower, exact: r.exact, verified_twice: true })
            })
            .collect()
    }
}

/// Per-degree test with the cheapest valid route.
enum Tester {
    /// Carlitz in base 1 with a = p - 1 (checked against the Fitting ideal once per degree).
    Carlitz,
    General,
}

fn is_carlitz_base_one(model: &DrinfeldModel, x: &Poly) -> bool {
    *model == DrinfeldModel::carlitz(model.field()) && *x == Poly::one(model.field())
}

fn test_place(model: &DrinfeldModel, x: &Poly, tester: &Tester, p: &Place) -> bool {
    let f = model.field();
    if !p.satisfies_h() {
        return is_wieferich_definition(model, p, x);
    }
    let Some(cp) = CompactPlace::new(p) else {
        return is_wieferich(model, p, x);
    };
    match tester {
        Tester::Carlitz => {
            let a = p.generator() - &Poly::one(f);
            cp.carlitz_wieferich(a.coeffs())
        }
        Tester::General => {
            let res = cp.model_residues(model);
            cp.is_wieferich(&res, x.coeffs(), x.derivative().coeffs())
        }
    }
}

fn check_carlitz_shortcut(model: &DrinfeldModel, d: usize) -> Result<()> {
    let f = model.field();
    for idx in 0..candidate_count(f.q(), d) {
        let c = candidate(f, d, idx);
        if is_irreducible_monic(f, &c) {
            let p = Place::new(Poly::new(f, c))?;
            if !p.satisfies_h() {
                continue;
            }
            let a = fitting_ideal(model, p.generator());
            if a != p.generator() - &Poly::one(f) {
                return Err(Error::Mismatch(format!("Fitting ideal at {p} is {a}, not p - 1")));
            }
            return Ok(());
        }
    }
    Ok(())
}

/// Independent recomputation of a hit: the definition route, plus c_p under (H).
fn verify(model: &DrinfeldModel, x: &Poly, p: &Place) -> Result<SearchHit> {
    if !is_wieferich_definition(model, p, x) {
        return Err(Error::Mismatch(format!("{p} failed re-verification")));
    }
    let (c_lower, exact) = if p.satisfies_h() {
        match ordic_valuation(model, x, p, HIT_CMAX)?.value {
            OrdicValue::Finite(c) => (c, true),
            OrdicValue::AtLeast(c) => (c, false),
            OrdicValue::Infinite => (u64::MAX, true),
        }
    } else {
        (1, false)
    };
    if c_lower < 1 {
        return Err(Error::Mismatch(format!("{p}: ordic valuation {c_lower} contradicts the search")));
    }
    Ok(SearchHit { place: p.clone(), c_lower, exact, verified_twice: true })
}

fn scan_range(model: &DrinfeldModel, x: &Poly, tester: &Tester, d: usize, lo: u64, hi: u64) -> (Vec<Place>, u64) {
    let f = model.field();
    let mut hits = Vec::new();
    let mut places = 0;
    for idx in lo..hi {
        let c = candidate(f, d, idx);
        if !is_irreducible_monic(f, &c) {
            continue;
        }
        places += 1;
        let p = Place::new(Poly::new(f, c)).expect("irreducible");
        if test_place(model, x, tester, &p) {
            hits.push(p);
        }
    }
    (hits, places)
}

/// Wieferich places in base `x` of degree 1..=max_degree, sorted by degree then
/// lexicographically. An existing checkpoint for the same configuration is resumed;
/// one for a different model or base is an error.
pub fn search_wieferich(model: &DrinfeldModel, x: &Poly, cfg: &SearchConfig) -> Result<SearchRun> {
    if cfg.max_degree == 0 {
        return Err(Error::InvalidArgument("max_degree must be at least 1".into()));
    }
    if x.is_zero() {
        return Err(Error::InvalidArgument("base point must be nonzero".into()));
    }
    let pool = worker_pool(cfg.workers)?;
    let (mut state, resumed) = match &cfg.checkpoint {
        Some(path) if path.exists() => {
            let cp = SearchCheckpoint::load(path)?;
            cp.check(model, x)?;
            (cp, true)
        }
        _ => (SearchCheckpoint::fresh(model, x), false),
    };
    let mut hits = state.hits(model)?;
    let tester = if is_carlitz_base_one(model, x) { Tester::Carlitz } else { Tester::General };
    let f = model.field();
    let chunk = cfg.chunk.max(1);
    let batch = cfg.checkpoint_every.max(chunk);
    let mut throughput = Vec::new();
    let mut spent = 0u64;
    let mut complete = true;
    'degrees: for d in state.completed_degree + 1..=cfg.max_degree {
        if matches!(tester, Tester::Carlitz) {
            check_carlitz_shortcut(model, d)?;
        }
        let total = candidate_count(f.q(), d);
        let start = Instant::now();
        let first = state.next_index;
        let mut n_places = 0;
        let mut lo = first;
        while lo < total {
            if cfg.budget.is_some_and(|b| spent >= b) {
                complete = false;
                break 'degrees;
            }
            let hi = (lo + batch).min(total);
            spent += hi - lo;
            let chunks: Vec<(u64, u64)> = (lo..hi).step_by(chunk as usize).map(|s| (s, (s + chunk).min(hi))).collect();
            let found: Vec<(Vec<Place>, u64)> =
                pool.install(|| chunks.par_iter().map(|&(a, b)| scan_range(model, x, &tester, d, a, b)).collect());
            let new_places: Vec<Place> = found.iter().flat_map(|(h, _)| h.iter().cloned()).collect();
            n_places += found.iter().map(|(_, n)| n).sum::<u64>();
            let verified: Vec<SearchHit> =
                pool.install(|| new_places.par_iter().map(|p| verify(model, x, p)).collect::<Result<_>>())?;
            for h in &verified {
                state.found.push(HitRecord {
                    degree: d,
                    place: h.place.to_string(),
                    c_lower: h.c_lower,
                    exact: h.exact,
                });
            }
            hits.extend(verified);
            lo = hi;
            state.next_index = if hi == total { 0 } else { hi };
            if hi == total {
                state.completed_degree = d;
            }
            if let Some(path) = &cfg.checkpoint {
                state.updated_at = now();
                state.save(path)?;
            }
        }
        let seconds = start.elapsed().as_secs_f64();
        throughput.push(DegreeThroughput {
            degree: d,
            candidates: total - first,
            places: n_places,
            seconds,
            places_per_second: if seconds > 0.0 { n_places as f64 / seconds } else { 0.0 },
        });
    }
    hits.retain(|h| h.degree() <= cfg.max_degree);
    Ok(SearchRun { hits, throughput, resumed, complete })
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Runs `f` on a pool of `workers` threads (0 means the rayon default), so that every
/// parallel computation inside it uses that many workers.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(worker_pool(workers)?.install(f))
}

/// Continue the search recorded in an existing checkpoint.
pub fn resume(path: &Path, model: &DrinfeldModel, x: &Poly, cfg: &SearchConfig) -> Result<SearchRun> {
    if !path.exists() {
        return Err(Error::Checkpoint(format!("{} does not exist", path.display())));
    }
    let cfg = SearchConfig { checkpoint: Some(path.to_path_buf()), ..cfg.clone() };
    search_wieferich(model, x, &cfg)
}

/// Places per second for each degree processed in this run.
pub fn throughput_report(run: &SearchRun) -> &[DegreeThroughput] {
    &run.throughput
}

/// Results CSV: degree, place, wieferich, verified_twice (one row per hit).
pub fn format_hits_csv(hits: &[SearchHit]) -> String {
    let mut out = String::from("degree,place,wieferich,verified_twice\n");
    for h in hits {
        out.push_str(&format!("{},{},1,{}\n", h.degree(), h.place, h.verified_twice));
    }
    out
}

/// Monic candidate coefficients of a place, used to order hits.
pub fn lex_key(p: &Place) -> (usize, Vec<Elem>) {
    let c = p.generator().coeffs();
    (p.degree(), c[..p.degree()].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;
    use crate::places::places_up_to;

    fn carlitz_hits(q: u32, d: usize) -> Vec<String> {
        let f = Fq::new(q).unwrap();
        let c = DrinfeldModel::carlitz(&f);
        let run = search_wieferich(&c, &Poly::one(&f), &SearchConfig::new(d)).unwrap();
        run.hits.iter().map(|h| h.place.to_string()).collect()
    }

    #[test]
    fn carlitz_q3_degree_six() {
        assert_eq!(carlitz_hits(3, 6), vec!["t^6 + t^4 + t^3 + t^2 + 2*t + 2"]);
    }

    #[test]
    fn carlitz_q2_torsion_pattern() {
        let f = Fq::new(2).unwrap();
        let hits = carlitz_hits(2, 5);
        let expected: Vec<String> =
            places_up_to(&f, 5).into_iter().filter(|p| p.degree() >= 2).map(|p| p.to_string()).collect();
        assert_eq!(hits, expected);
    }

    #[test]
    fn fast_route_matches_definition() {
        let f = Fq::new(3).unwrap();
        let m = crate::parse::parse_model("t + (t^2+1)*tau + 2*t*tau^2", &f).unwrap();
        let x = Poly::one(&f);
        for tester in [Tester::General] {
            for p in places_up_to(&f, 4) {
                assert_eq!(test_place(&m, &x, &tester, &p), is_wieferich_definition(&m, &p, &x), "{p}");
            }
        }
    }

    #[test]
    fn hits_are_sorted() {
        let f = Fq::new(2).unwrap();
        let c = DrinfeldModel::carlitz(&f);
        let run = search_wieferich(&c, &Poly::one(&f), &SearchConfig { chunk: 3, ..SearchConfig::new(6) }).unwrap();
        let keys: Vec<_> = run.hits.iter().map(|h| lex_key(&h.place)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
