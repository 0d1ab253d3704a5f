use std::fmt::Write as _;

use drinfeld_core::anderson::euler_factor_via_dual;
use drinfeld_core::checks::{run_suites, SuiteReport};
use drinfeld_core::lseries::{lp_value_at_1, lp_value_at_1_with, local_factor, special_lvalue, taelman_unit, LValue, LpRoute};
use drinfeld_core::parse::{parse_model, parse_poly};
use drinfeld_core::places::places_up_to;
use drinfeld_core::registry::{local_factor_route, ordic_route, wieferich_test};
use drinfeld_core::search::{format_hits_csv, search_wieferich, with_workers, SearchConfig, SearchRun};
use drinfeld_core::stats::{format_csv, format_table, stats_table_with, CellResult, Mode, RankLaw, Sampling, TorsionClassifier, Universe};
use drinfeld_core::wieferich::OrdicValue;
use drinfeld_core::{DrinfeldModel, Error, Fq, Place, Poly, Result};
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::output::{Config, Sink};
use crate::Status;

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Search(a) => search(a),
        Command::Stats(a) => stats(a),
        Command::Lvalue(a) => lvalue(a),
        Command::Cvalue(a) => cvalue(a),
        Command::Wieferich(a) => wieferich(a),
        Command::Factor(a) => factor(a),
        Command::Unit(a) => unit(a),
        Command::Check(a) => check(a),
        Command::Places(a) => places(a),
    }
}

fn field(a: &FieldArgs) -> Result<Fq> {
    match &a.modulus {
        None => Fq::new(a.q),
        Some(m) => {
            let prime = Fq::new(Fq::new(a.q)?.p())?;
            let poly = parse_poly(&m.replace('z', "t"), &prime)?;
            let coeffs: Vec<u32> = poly.coeffs().iter().map(|&c| c as u32).collect();
            Fq::with_modulus(a.q, &coeffs)
        }
    }
}

fn model(a: &ModelArgs) -> Result<(Fq, DrinfeldModel)> {
    let f = field(&a.field)?;
    let m = parse_model(&a.model, &f)?;
    Ok((f, m))
}

fn place(s: &str, f: &Fq) -> Result<Place> {
    Place::new(parse_poly(s, f)?)
}

fn base(s: &str, f: &Fq) -> Result<Poly> {
    let x = parse_poly(s, f)?;
    if x.is_zero() {
        return Err(Error::InvalidArgument("base point must be nonzero".into()));
    }
    Ok(x)
}

fn model_config(command: &str, f: &Fq, m: &DrinfeldModel) -> Config {
    Config::new(command).field(f).set("model", json!(m.to_string()))
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("json! object literal"),
    }
}

fn search(a: SearchArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let x = base(&a.base, &f)?;
    let cfg = SearchConfig {
        workers: a.workers,
        checkpoint: a.checkpoint.clone(),
        checkpoint_every: a.checkpoint_every,
        budget: a.budget,
        ..SearchConfig::new(a.max_degree)
    };
    let config = model_config("search", &f, &m)
        .set("base", json!(x.to_string()))
        .set("max_degree", json!(a.max_degree))
        .set("workers", json!(a.workers))
        .set("checkpoint", json!(a.checkpoint))
        .set("checkpoint_every", json!(a.checkpoint_every))
        .set("budget", json!(a.budget));
    let run = search_wieferich(&m, &x, &cfg)?;
    for t in &run.throughput {
        eprintln!("degree {:>3}: {} places in {:.2}s ({:.0} places/s)", t.degree, t.places, t.seconds, t.places_per_second);
    }
    if !run.complete {
        eprintln!("search stopped by budget; resume with the same --checkpoint");
    }
    let sink = Sink::new(&a.output, config);
    match a.format {
        TableFormat::Csv => sink.text(&format_hits_csv(&run.hits))?,
        TableFormat::Table => sink.text(&hits_table(&run))?,
        TableFormat::Json => sink.json(obj(json!({
            "hits": run.hits.iter().map(|h| json!({
                "degree": h.degree(),
                "place": h.place.to_string(),
                "c_lower": h.c_lower,
                "exact": h.exact,
                "verified_twice": h.verified_twice,
            })).collect::<Vec<_>>(),
            "throughput": serde_json::to_value(&run.throughput).map_err(|e| Error::Io(e.to_string()))?,
            "resumed": run.resumed,
            "complete": run.complete,
        })))?,
    }
    Ok(if run.hits.iter().all(|h| h.verified_twice) { Status::Ok } else { Status::Mismatch })
}

fn hits_table(run: &SearchRun) -> String {
    let mut s = String::from("degree  verified  place\n");
    for h in &run.hits {
        let _ = writeln!(s, "{:>6}  {:>8}  {}", h.degree(), h.verified_twice, h.place);
    }
    s
}

fn parse_degrees(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidArgument(format!("degree range {s:?}; expected a..b or a single degree"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?, num(b)?)
    } else {
        let d = num(s)?;
        (d, d)
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn stats(a: StatsArgs) -> Result<Status> {
    let f = field(&a.field)?;
    let law = match a.rank_law {
        RankLawArg::AtMost => RankLaw::AtMost,
        RankLawArg::Exactly => RankLaw::Exactly,
    };
    let u = Universe::with_law(&f, a.rank, law)?;
    let degrees = parse_degrees(&a.degrees)?;
    let sampling = match (a.samples, a.exhaustive) {
        (Some(samples), false) => Sampling::MonteCarlo { samples, seed: a.seed },
        (None, true) => Sampling::Exhaustive { threshold: a.exhaustive_threshold },
        _ => return Err(Error::InvalidArgument("give exactly one of --samples and --exhaustive".into())),
    };
    let classifier = match &a.torsion_place {
        None => TorsionClassifier::Exact,
        Some(p) => TorsionClassifier::FittingAt(place(p, &f)?),
    };
    let config = Config::new("stats")
        .field(&f)
        .set("rank", json!(a.rank))
        .set("rank_law", json!(law.label()))
        .set("degrees", json!([degrees.start(), degrees.end()]))
        .set("samples", json!(a.samples))
        .set("exhaustive", json!(a.exhaustive))
        .set("exhaustive_threshold", json!(a.exhaustive_threshold.to_string()))
        .set("seed", json!(a.seed))
        .set("torsion_classifier", json!(a.torsion_place.as_deref().map_or("exact".to_string(), |p| format!("fitting_at {p}"))))
        .set("workers", json!(a.workers));
    let cells = with_workers(a.workers, || stats_table_with(&u, degrees, sampling, &classifier))??;
    let sink = Sink::new(&a.output, config);
    match a.format {
        TableFormat::Table => sink.text(&format_table(&cells))?,
        TableFormat::Csv => sink.text(&format_csv(&cells))?,
        TableFormat::Json => sink.json(obj(json!({ "cells": cells.iter().map(cell_json).collect::<Vec<_>>() })))?,
    }
    Ok(Status::Ok)
}

fn cell_json(c: &CellResult) -> Value {
    let (num, den) = c.ratio();
    let mut v = json!({
        "q": c.q,
        "rank": c.rank,
        "degree": c.degree,
        "column": c.column.label(),
        "value": c.display(),
        "exact": format!("{num}/{den}"),
        "hits": c.hits,
        "n_samples": c.models,
        "places": c.places,
        "mode": c.mode.label(),
        "rank_law": c.law.label(),
    });
    if let Mode::MonteCarlo { seed, .. } = c.mode {
        v["seed"] = json!(seed);
        v["sigma"] = json!(c.bernoulli_sigma());
    }
    v
}

fn lvalue_json(v: &LValue) -> Map<String, Value> {
    obj(json!({
        "valuation": v.value.valuation,
        "unit_digits": v.value.unit.to_string(),
        "precision": v.value.absolute_precision,
        "exact_zero": v.value.exact_zero,
        "certified": v.certified,
        "route": serde_json::to_value(v.route).unwrap_or(Value::Null),
        "terms": v.terms,
    }))
}

fn lvalue(a: LvalueArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let p = place(&a.place, &f)?;
    let config = model_config("lvalue", &f, &m)
        .set("place", json!(p.to_string()))
        .set("prec", json!(a.prec))
        .set("route", json!(format!("{:?}", a.route).to_lowercase()))
        .set("special", json!(a.special))
        .set("workers", json!(a.workers));
    let result = with_workers(a.workers, || -> Result<Map<String, Value>> {
        if a.special {
            let (v, order) = special_lvalue(&m, &p, a.prec)?;
            let mut out = lvalue_json(&v);
            out.insert("vanishing_order".into(), json!(order.order));
            out.insert("order_route".into(), serde_json::to_value(order.route).unwrap_or(Value::Null));
            out.insert("certified".into(), json!(v.certified && order.certified));
            return Ok(out);
        }
        let v = match a.route {
            LpRouteArg::Auto => lp_value_at_1(&m, &p, a.prec)?,
            LpRouteArg::Euler => lp_value_at_1_with(&m, &p, a.prec, LpRoute::Euler)?,
            LpRouteArg::Unit => lp_value_at_1_with(&m, &p, a.prec, LpRoute::Unit)?,
        };
        Ok(lvalue_json(&v))
    })??;
    Sink::new(&a.output, config).json(result)?;
    Ok(Status::Ok)
}

fn cvalue(a: CvalueArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let p = place(&a.place, &f)?;
    let x = parse_poly(&a.base, &f)?;
    let route = ordic_route(&a.method)?;
    let config = model_config("cvalue", &f, &m)
        .set("place", json!(p.to_string()))
        .set("base", json!(x.to_string()))
        .set("cmax", json!(a.cmax))
        .set("method", json!(route.name()));
    let v = route.ordic(&m, &x, &p, a.cmax)?;
    let mut out = obj(json!({
        "method": serde_json::to_value(v.method).unwrap_or(Value::Null),
        "torsion": v.torsion,
    }));
    match v.value {
        OrdicValue::Finite(c) => out.insert("c".into(), json!(c)),
        OrdicValue::Infinite => out.insert("c".into(), json!("infinity")),
        OrdicValue::AtLeast(c) => {
            out.insert("at_least".into(), json!(c));
            out.insert("c".into(), Value::Null)
        }
    };
    Sink::new(&a.output, config).json(out)?;
    Ok(Status::Ok)
}

fn wieferich(a: WieferichArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let p = place(&a.place, &f)?;
    let x = base(&a.base, &f)?;
    let test = wieferich_test(&a.method)?;
    let config = model_config("wieferich", &f, &m)
        .set("place", json!(p.to_string()))
        .set("base", json!(x.to_string()))
        .set("method", json!(test.name()));
    let w = test.is_wieferich(&m, &p, &x)?;
    Sink::new(&a.output, config).json(obj(json!({ "wieferich": w, "method": test.name() })))?;
    Ok(Status::Ok)
}

fn factor(a: FactorArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let p = place(&a.place, &f)?;
    let route = local_factor_route(&a.method)?;
    let config = model_config("factor", &f, &m).set("place", json!(p.to_string())).set("method", json!(route.name()));
    let lf = route.local_factor(&m, &p)?;
    let coeffs: Vec<String> = lf.coeffs().iter().map(|c| c.to_string()).collect();
    Sink::new(&a.output, config).json(obj(json!({ "factor": lf.to_string(), "coefficients": coeffs })))?;
    Ok(Status::Ok)
}

fn unit(a: UnitArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let config = model_config("unit", &f, &m).set("max_order", json!(a.max_order));
    let u = taelman_unit(&m, a.max_order)?;
    let sink = Sink::new(&a.output, config);
    match a.format {
        TextFormat::Text => sink.text(&u.u.to_string())?,
        TextFormat::Json => sink.json(obj(json!({ "unit": u.u.to_string(), "certified": u.certified })))?,
    }
    Ok(Status::Ok)
}

fn check(a: CheckArgs) -> Result<Status> {
    if a.target == "euler" {
        return check_euler(a);
    }
    let filter = (a.target != "all").then_some(a.target.as_str());
    let config = Config::new("check").set("target", json!(a.target)).set("seed", json!(a.seed));
    let reports = run_suites(filter, a.seed)?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let sink = Sink::new(&a.output, config);
    match a.format {
        TextFormat::Text => sink.text(&suite_table(&reports, failed))?,
        TextFormat::Json => sink.json(obj(json!({
            "suites": serde_json::to_value(&reports).map_err(|e| Error::Io(e.to_string()))?,
            "passed": failed == 0,
        })))?,
    }
    Ok(if failed == 0 { Status::Ok } else { Status::Mismatch })
}

fn suite_table(reports: &[SuiteReport], failed: usize) -> String {
    let mut s = String::from("suite                          module        cases  failed  seconds\n");
    for r in reports {
        let _ = writeln!(s, "{:<30} {:<12} {:>6} {:>7} {:>8.2}", r.name, r.module, r.cases, r.failures.len(), r.seconds);
    }
    for r in reports.iter().filter(|r| !r.passed()) {
        let _ = writeln!(s, "\n{}: {} of {} cases failed; first failures:", r.name, r.failures.len(), r.cases);
        for f in r.failures.iter().take(3) {
            let _ = writeln!(s, "  {f}");
        }
    }
    if failed == 0 {
        s.push_str("pass\n");
    } else {
        let _ = writeln!(s, "FAIL ({failed} of {} suites)", reports.len());
    }
    s
}

fn check_euler(a: CheckArgs) -> Result<Status> {
    let (f, m) = model(&a.model)?;
    let config = model_config("check euler", &f, &m).set("max_degree", json!(a.max_degree));
    let mut rows = Vec::new();
    for p in places_up_to(&f, a.max_degree) {
        let det = local_factor(&m, &p);
        let dual = euler_factor_via_dual(&m, &p)?;
        rows.push((p, det.to_string(), dual.to_string(), det == dual));
    }
    let ok = rows.iter().all(|r| r.3);
    let sink = Sink::new(&a.output, config);
    match a.format {
        TextFormat::Text => {
            let mut s = String::new();
            for (p, det, dual, same) in &rows {
                let _ = writeln!(s, "{}  {p}: {det}{}", if *same { "ok  " } else { "FAIL" }, if *same { String::new() } else { format!(" vs dual {dual}") });
            }
            s.push_str(if ok { "pass\n" } else { "FAIL\n" });
            sink.text(&s)?
        }
        TextFormat::Json => sink.json(obj(json!({
            "places": rows.iter().map(|(p, det, dual, same)| json!({
                "place": p.to_string(), "determinant": det, "dual": dual, "equal": same,
            })).collect::<Vec<_>>(),
            "passed": ok,
        })))?,
    }
    Ok(if ok { Status::Ok } else { Status::Mismatch })
}

fn places(a: PlacesArgs) -> Result<Status> {
    let f = field(&a.field)?;
    let config = Config::new("places").field(&f).set("max_degree", json!(a.max_degree)).set("h_only", json!(a.h_only));
    let mut s = String::from("degree  H  place\n");
    for p in places_up_to(&f, a.max_degree).into_iter().filter(|p| !a.h_only || p.satisfies_h()) {
        let _ = writeln!(s, "{:>6}  {}  {p}", p.degree(), if p.satisfies_h() { "y" } else { "n" });
    }
    Sink::new(&a.output, config).text(&s)?;
    Ok(Status::Ok)
}
