use drinfeld_core::parse::parse_model;
use drinfeld_core::search::{format_hits_csv, resume, search_wieferich, SearchCheckpoint, SearchConfig};
use drinfeld_core::{DrinfeldModel, Error, Fq, Poly};

fn carlitz3() -> (DrinfeldModel, Poly) {
    let f = Fq::new(3).unwrap();
    (DrinfeldModel::carlitz(&f), Poly::one(&f))
}

fn csv(model: &DrinfeldModel, x: &Poly, cfg: &SearchConfig) -> String {
    format_hits_csv(&search_wieferich(model, x, cfg).unwrap().hits)
}

#[test]
fn interrupted_run_resumes_to_identical_output() {
    let (c, one) = carlitz3();
    let reference = csv(&c, &one, &SearchConfig::new(9));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cp.json");
    // stop in the middle of degree 8
    let cfg = SearchConfig { checkpoint: Some(path.clone()), checkpoint_every: 1000, chunk: 100, budget: Some(8000), ..SearchConfig::new(9) };
    let partial = search_wieferich(&c, &one, &cfg).unwrap();
    assert!(!partial.complete);
    let cp = SearchCheckpoint::load(&path).unwrap();
    assert_eq!(cp.completed_degree, 7);
    assert!(cp.next_index > 0);
    let done = resume(&path, &c, &one, &SearchConfig::new(9)).unwrap();
    assert!(done.resumed && done.complete);
    assert_eq!(format_hits_csv(&done.hits), reference);
    // resuming a finished search gives the same output immediately
    let again = resume(&path, &c, &one, &SearchConfig::new(9)).unwrap();
    assert!(again.throughput.is_empty());
    assert_eq!(format_hits_csv(&again.hits), reference);
}

#[test]
fn checkpoint_for_another_model_is_rejected() {
    let (c, one) = carlitz3();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cp.json");
    search_wieferich(&c, &one, &SearchConfig { checkpoint: Some(path.clone()), ..SearchConfig::new(3) }).unwrap();
    let other = parse_model("t + t*tau", c.field()).unwrap();
    assert!(matches!(resume(&path, &other, &one, &SearchConfig::new(3)), Err(Error::Checkpoint(_))));
    let t = Poly::t(c.field());
    assert!(matches!(resume(&path, &c, &t, &SearchConfig::new(3)), Err(Error::Checkpoint(_))));
}

#[test]
fn worker_count_does_not_change_results() {
    let f = Fq::new(3).unwrap();
    let m = parse_model("t + (t^2+2)*tau + t*tau^2", &f).unwrap();
    let one = Poly::one(&f);
    let base = csv(&m, &one, &SearchConfig { workers: 1, ..SearchConfig::new(6) });
    for workers in [2, 4] {
        assert_eq!(csv(&m, &one, &SearchConfig { workers, chunk: 7, ..SearchConfig::new(6) }), base);
    }
}

#[test]
fn empty_rerun_has_empty_throughput() {
    let (c, one) = carlitz3();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cp.json");
    let cfg = SearchConfig { checkpoint: Some(path.clone()), ..SearchConfig::new(4) };
    search_wieferich(&c, &one, &cfg).unwrap();
    let run = search_wieferich(&c, &one, &SearchConfig { max_degree: 2, ..cfg }).unwrap();
    assert!(run.throughput.is_empty());
    assert!(run.hits.is_empty());
}

#[test]
fn zero_degree_is_rejected() {
    let (c, one) = carlitz3();
    assert!(search_wieferich(&c, &one, &SearchConfig::new(0)).is_err());
}
