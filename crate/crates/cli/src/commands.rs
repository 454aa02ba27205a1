use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use takagi_core::boundary::{lex_theorem_check, CayleyGraph, SubsetMask};
use takagi_core::fclass::{
    bp3_integer_check, bp_dyadic_check, defect, envelope, envelope_grid_propagate, funny_check, grid_membership_scan,
    kpow_check, parse_points_csv, refute_membership, FunctionSpec, RefuteConfig, DEFAULT_TOL,
};
use takagi_core::groups::{GenSet, GroupSpec};
use takagi_core::numerics::fmt_f64;
use takagi_core::search::{
    find_lex_violation, min_boundary_exhaustive, min_boundary_heuristic, verify_isoper, verify_main1, HeuristicConfig,
    SearchConfig, SearchResult, DEFAULT_ENUMERATION_BUDGET,
};
use takagi_core::takagi::{bounds_check, omega_exact_rational, omega_float, plot_csv, plot_data, terms_for_tolerance, OmegaTable};
use takagi_core::{Rational, Value};

use crate::args::*;
use crate::report::{emit, parameters, to_json, RunReport, Status};

/// Environment variable overriding every enumeration budget.
const BUDGET_VAR: &str = "TAKAGI_BUDGET";

/// Default multiset budget for grid scans.
const SCAN_BUDGET: u128 = 10_000_000_000;

struct Outcome {
    status: Status,
    payload: serde_json::Value,
    summary: String,
}

impl Outcome {
    fn new<T: Serialize>(status: Status, payload: &T, summary: impl Into<String>) -> Result<Self> {
        Ok(Outcome { status, payload: to_json(payload)?, summary: summary.into() })
    }

    fn checked<T: Serialize>(pass: bool, payload: &T, summary: impl Into<String>) -> Result<Self> {
        Self::new(if pass { Status::Pass } else { Status::Fail }, payload, summary)
    }
}

/// Emits reports and folds their statuses into the exit code.
struct Session {
    code: u8,
}

impl Session {
    fn report<A: Serialize>(
        &mut self,
        command: &str,
        args: &A,
        started: Instant,
        outcome: Outcome,
        expect: Option<Expect>,
    ) -> Result<()> {
        let failed = matches!(
            (outcome.status, expect),
            (Status::Fail, _) | (Status::Found, Some(Expect::None)) | (Status::None, Some(Expect::Found))
        );
        if failed {
            self.code = 1;
        }
        let report = RunReport {
            command: command.to_string(),
            parameters: parameters(args)?,
            status: outcome.status,
            payload: outcome.payload,
            elapsed_ms: started.elapsed().as_millis(),
        };
        emit(&report)?;
        let status = serde_json::to_value(outcome.status)?;
        eprintln!("{command}: {} ({} ms) {}", status.as_str().unwrap_or_default(), report.elapsed_ms, outcome.summary);
        Ok(())
    }
}

pub fn run(command: Command) -> Result<u8> {
    let mut s = Session { code: 0 };
    match command {
        Command::Omega(c) => match c {
            OmegaCmd::Eval(a) => omega_eval(&mut s, &a)?,
            OmegaCmd::Table(a) => one(&mut s, "omega table", &a, None, || omega_table(&a))?,
            OmegaCmd::PlotData(a) => plot(&a)?,
            OmegaCmd::BoundsCheck(a) => one(&mut s, "omega bounds-check", &a, None, || omega_bounds(&a))?,
        },
        Command::Boundary(c) => match c {
            BoundaryCmd::Count(a) => one(&mut s, "boundary count", &a, None, || boundary_count(&a))?,
            BoundaryCmd::LexCheck(a) => one(&mut s, "boundary lex-check", &a, None, || lex_check(&a))?,
        },
        Command::Search(c) => match c {
            SearchCmd::Min(a) => search_min(&mut s, &a)?,
            SearchCmd::VerifyMain1(a) => one(&mut s, "search verify-main1", &a, None, || verify_main1_cmd(&a))?,
            SearchCmd::VerifyIsoper(a) => one(&mut s, "search verify-isoper", &a, None, || verify_isoper_cmd(&a))?,
            SearchCmd::FindViolation(a) => one(&mut s, "search find-violation", &a, a.expect, || find_violation(&a))?,
        },
        Command::Fclass(c) => match c {
            FclassCmd::Defect(a) => one(&mut s, "fclass defect", &a, a.expect, || defect_cmd(&a))?,
            FclassCmd::Refute(a) => one(&mut s, "fclass refute", &a, a.expect, || refute(&a))?,
            FclassCmd::Scan(a) => one(&mut s, "fclass scan", &a, None, || scan(&a))?,
            FclassCmd::Envelope(a) => one(&mut s, "fclass envelope", &a, None, || envelope_cmd(&a))?,
            FclassCmd::Propagate(a) => one(&mut s, "fclass propagate", &a, None, || propagate(&a))?,
            FclassCmd::Funny(a) => one(&mut s, "fclass funny", &a, None, || funny(&a))?,
            FclassCmd::Bp(a) => one(&mut s, "fclass bp", &a, None, || bp(&a))?,
            FclassCmd::Bp3(a) => one(&mut s, "fclass bp3", &a, None, || bp3(&a))?,
            FclassCmd::Kpow(a) => one(&mut s, "fclass kpow", &a, None, || kpow(&a))?,
        },
    }
    Ok(s.code)
}

fn one<A: Serialize>(
    s: &mut Session,
    command: &str,
    args: &A,
    expect: Option<Expect>,
    job: impl FnOnce() -> Result<Outcome>,
) -> Result<()> {
    let started = Instant::now();
    let outcome = job()?;
    s.report(command, args, started, outcome, expect)
}

fn enumeration_budget(default: u128) -> Result<u128> {
    match std::env::var(BUDGET_VAR) {
        Err(_) => Ok(default),
        Ok(text) => {
            let t = text.trim();
            if let Ok(v) = t.parse::<u128>() {
                return Ok(v);
            }
            match t.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e38 => Ok(v as u128),
                _ => bail!("{BUDGET_VAR}={text:?} is not a non-negative integer"),
            }
        }
    }
}

fn parse_function(literal: &str) -> Result<FunctionSpec> {
    if let Some(path) = literal.strip_prefix("pwl:@") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading points file {path}"))?;
        return Ok(FunctionSpec::piecewise_linear(parse_points_csv(&text)?)?);
    }
    Ok(literal.parse()?)
}

fn parse_group(a: &GroupArgs) -> Result<(GroupSpec, GenSet)> {
    let group: GroupSpec = a.group.parse()?;
    let gens = match &a.gens {
        Some(lit) => GenSet::parse(&group, lit)?,
        None => GenSet::units(&group),
    };
    Ok((group, gens))
}

fn parse_rational(text: &str) -> Result<Rational> {
    text.trim().parse::<Rational>().with_context(|| format!("expected a rational, got {text:?}"))
}

/// `4`, `1,2,3`, `1..6` (inclusive) or any comma-separated mix.
fn parse_sizes(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().with_context(|| format!("bad size range {part:?}"))?;
            let hi: u64 = hi.trim().trim_start_matches('=').parse().with_context(|| format!("bad size range {part:?}"))?;
            if lo > hi {
                bail!("empty size range {part:?}");
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().with_context(|| format!("bad size {part:?}"))?);
        }
    }
    if out.is_empty() {
        bail!("no subset sizes given");
    }
    Ok(out)
}

fn sizes_or_all(text: &Option<String>, order: u64) -> Result<Vec<u64>> {
    match text {
        Some(t) => parse_sizes(t),
        None if order >= 2 => Ok((1..order).collect()),
        None => bail!("group of order {order} has no proper non-empty subsets"),
    }
}

fn exhaustive_minima(group: &GroupSpec, gens: &GenSet, sizes: &[u64], threads: Option<usize>) -> Result<Vec<SearchResult>> {
    let cfg = SearchConfig { max_enumeration: enumeration_budget(DEFAULT_ENUMERATION_BUDGET)?, threads, ..Default::default() };
    Ok(sizes.iter().map(|&n| min_boundary_exhaustive(group, gens, n, &cfg)).collect::<takagi_core::Result<_>>()?)
}

fn omega_eval(s: &mut Session, a: &OmegaEval) -> Result<()> {
    let started = Instant::now();
    let (bare, payload) = if a.float {
        let x = match a.x.parse::<Rational>() {
            Ok(q) => q.to_f64(),
            Err(_) => a.x.trim().parse::<f64>().with_context(|| format!("expected a number, got {:?}", a.x))?,
        };
        let terms = a.terms.unwrap_or_else(|| terms_for_tolerance(a.m, 1e-15));
        let b = omega_float(a.m, x, terms)?;
        (fmt_f64(b.value), json!({"m": a.m, "x": a.x, "terms": terms, "value": b.value, "error_bound": b.error_bound}))
    } else {
        let x = parse_rational(&a.x)?;
        let v = omega_exact_rational(a.m, &x)?;
        (v.to_string(), json!({"m": a.m, "x": x, "value": v}))
    };
    if a.json {
        let outcome = Outcome::new(Status::Pass, &payload, format!("ω_{}({}) = {bare}", a.m, a.x))?;
        s.report("omega eval", a, started, outcome, None)
    } else {
        println!("{bare}");
        Ok(())
    }
}

fn omega_table(a: &OmegaTableArgs) -> Result<Outcome> {
    let t = OmegaTable::new(a.m, a.r, a.max_entries)?;
    let summary = format!("{} entries", t.values.len());
    Outcome::new(Status::Pass, &t, summary)
}

fn plot(a: &PlotDataArgs) -> Result<()> {
    let rows = plot_data(a.m, a.resolution)?;
    print!("{}", plot_csv(&rows));
    eprintln!("omega plot-data: {} rows", rows.len());
    Ok(())
}

fn omega_bounds(a: &BoundsCheckArgs) -> Result<Outcome> {
    let r = bounds_check(a.m, a.grid)?;
    let summary = format!(
        "{} points, worst margins {} / {}, {} sharpness hits",
        r.points_checked,
        fmt_f64(r.worst_lower_margin),
        fmt_f64(r.worst_upper_margin),
        r.sharpness_hits.len()
    );
    Outcome::checked(r.pass, &r, summary)
}

fn boundary_count(a: &BoundaryCountArgs) -> Result<Outcome> {
    let (group, gens) = parse_group(&a.group)?;
    let graph = CayleyGraph::new(&group, &gens)?;
    let order = group.order();
    let mask = if let Some(m) = &a.members {
        let idx = m
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().with_context(|| format!("bad member index {t:?}")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= order) {
            bail!("member index {bad} outside a group of order {order}");
        }
        SubsetMask::from_indices(order, idx)
    } else if let Some(h) = &a.hex {
        SubsetMask::from_hex(order, h)?
    } else if let Some(e) = &a.elements {
        let mut mask = SubsetMask::empty(order);
        for t in e.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let coords = t
                .split(',')
                .map(|c| c.trim().parse::<i64>().with_context(|| format!("bad element {t:?}")))
                .collect::<Result<Vec<_>>>()?;
            mask.insert(group.index_of(&group.element(&coords)?)?);
        }
        mask
    } else {
        SubsetMask::empty(order)
    };
    let boundary = graph.boundary(&mask)?;
    let payload = json!({"group": group, "gens": gens, "size": mask.len(), "mask": mask, "boundary": boundary});
    Outcome::new(Status::Pass, &payload, format!("|A| = {}, boundary {boundary}", mask.len()))
}

fn lex_check(a: &LexCheckArgs) -> Result<Outcome> {
    let r = lex_theorem_check(a.m, a.r, a.max_order)?;
    let pass = r.pass();
    let payload = json!({
        "m": r.m,
        "r": r.r,
        "checked": r.checked,
        "first_violation": r.mismatches.first(),
        "mismatches": r.mismatches,
    });
    Outcome::checked(pass, &payload, format!("checked {} values, {} mismatches", r.checked, r.mismatches.len()))
}

fn search_summary(r: &SearchResult) -> String {
    let lex = r.lex_boundary.map(|b| format!(", initial segment {b}")).unwrap_or_default();
    let kind = if r.exhaustive { "exact" } else { "upper bound" };
    format!("n = {}: min boundary {} ({kind}){lex}", r.n, r.min_boundary)
}

fn search_min(s: &mut Session, a: &SearchMinArgs) -> Result<()> {
    let (group, gens) = parse_group(&a.group)?;
    let sizes = parse_sizes(&a.n)?;
    for n in sizes {
        let started = Instant::now();
        let result = match a.budget {
            Some(budget) => {
                let cfg = HeuristicConfig {
                    budget,
                    seed: a.seed,
                    restarts: a.restarts,
                    start_from_lex: a.from_lex,
                    threads: a.threads.threads,
                    ..Default::default()
                };
                min_boundary_heuristic(&group, &gens, n, &cfg)?
            }
            None => exhaustive_minima(&group, &gens, &[n], a.threads.threads)?.remove(0),
        };
        let outcome = Outcome::new(Status::Pass, &result, search_summary(&result))?;
        s.report("search min", a, started, outcome, None)?;
    }
    Ok(())
}

fn verify_main1_cmd(a: &VerifyMain1Args) -> Result<Outcome> {
    let (group, gens) = parse_group(&a.group)?;
    let sizes = sizes_or_all(&a.n, group.order())?;
    let results = exhaustive_minima(&group, &gens, &sizes, a.threads.threads)?;
    let r = verify_main1(&results, a.m)?;
    let payload = json!({
        "first_violation": r.first_violation.map(|i| &r.lines[i]),
        "report": r,
    });
    let ratio = r.min_ratio.map(fmt_f64).unwrap_or_else(|| "-".into());
    Outcome::checked(r.pass, &payload, format!("{} sizes, min ratio {ratio}", r.lines.len()))
}

fn verify_isoper_cmd(a: &VerifyIsoperArgs) -> Result<Outcome> {
    let f = parse_function(&a.function)?;
    let (group, gens) = parse_group(&a.group)?;
    let sizes = sizes_or_all(&a.n, group.order())?;
    let results = exhaustive_minima(&group, &gens, &sizes, a.threads.threads)?;
    let r = verify_isoper(&results, &f, a.m)?;
    let payload = json!({
        "first_violation": r.first_violation.map(|i| &r.lines[i]),
        "report": r,
    });
    Outcome::checked(r.pass, &payload, format!("{} sizes; {}", r.lines.len(), r.assumption))
}

fn find_violation(a: &FindViolationArgs) -> Result<Outcome> {
    let order = a.m.checked_pow(a.r).context("group order overflows")?;
    let sizes = sizes_or_all(&a.n, order)?;
    let cfg = SearchConfig {
        max_enumeration: enumeration_budget(DEFAULT_ENUMERATION_BUDGET)?,
        threads: a.threads.threads,
        ..Default::default()
    };
    match find_lex_violation(a.m, a.r, &sizes, &cfg)? {
        Some(r) => {
            let summary = search_summary(&r);
            Outcome::new(Status::Found, &r, summary)
        }
        None => Outcome::new(Status::None, &serde_json::Value::Null, format!("{} sizes, no subset beats its initial segment", sizes.len())),
    }
}

fn defect_cmd(a: &DefectArgs) -> Result<Outcome> {
    let f = parse_function(&a.function)?;
    let tuple = a.tuple.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
    let d = defect(&f, a.m, &tuple)?;
    let positive = match &d {
        Value::Exact(v) => v.is_positive(),
        Value::Approx(b) => b.lo() > DEFAULT_TOL,
    };
    let payload = json!({"function": f, "m": a.m, "tuple": tuple, "defect": d, "positive": positive});
    let status = if positive { Status::Found } else { Status::None };
    Outcome::new(status, &payload, format!("defect {d}"))
}

fn refute(a: &RefuteArgs) -> Result<Outcome> {
    let f = parse_function(&a.function)?;
    let cfg = RefuteConfig { grid: a.grid, restarts: a.restarts, budget: a.budget, seed: a.seed, threads: a.threads.threads };
    match refute_membership(&f, a.m, &cfg)? {
        Some(w) => {
            let summary = format!("witness {:?} with defect {}", w.tuple.iter().map(|q| q.to_string()).collect::<Vec<_>>(), w.defect);
            Outcome::new(Status::Found, &w, summary)
        }
        None => Outcome::new(Status::None, &serde_json::Value::Null, "no positive defect found"),
    }
}

fn scan(a: &ScanArgs) -> Result<Outcome> {
    let f = parse_function(&a.function)?;
    let r = grid_membership_scan(&f, a.m, a.grid, a.tol, enumeration_budget(SCAN_BUDGET)?, a.threads.threads)?;
    let path = if r.exact { "exact" } else { "float" };
    let summary = format!("{} multisets ({path}), worst defect {}", r.multisets, r.worst_defect);
    Outcome::checked(r.pass, &r, summary)
}

fn envelope_cmd(a: &EnvelopeArgs) -> Result<Outcome> {
    let b = envelope(a.m, &parse_rational(&a.x)?)?;
    let summary = format!("F_{}({}) ∈ [{}, {}]", b.m, b.x, b.lower, b.upper);
    Outcome::new(Status::Pass, &b, summary)
}

fn propagate(a: &PropagateArgs) -> Result<Outcome> {
    let table = envelope_grid_propagate(a.m, a.r, a.max_entries)?;
    let reference = OmegaTable::new(a.m, a.r, a.max_entries)?;
    let first_violation = table
        .rows()
        .find(|&(n, v)| v != a.m * reference.get(n))
        .map(|(n, v)| json!({"n": n, "propagated": v, "m_omega": a.m * reference.get(n)}));
    let pass = first_violation.is_none();
    let payload = json!({"table": table, "matches_m_omega": pass, "first_violation": first_violation});
    Outcome::checked(pass, &payload, format!("{} entries, equal to m·ω_m: {pass}", table.values.len()))
}

fn funny(a: &FunnyArgs) -> Result<Outcome> {
    let f = parse_function(&a.function)?;
    let r = funny_check(&f, a.m, a.grid)?;
    let summary = format!("{} tuples, min slack {}", r.checked, r.min_slack);
    Outcome::checked(r.pass, &r, summary)
}

fn bp(a: &BpArgs) -> Result<Outcome> {
    let r = bp_dyadic_check(a.r_max)?;
    let summary = format!("{} pairs, min slack {}", r.pairs, r.min_slack);
    Outcome::checked(r.pass, &r, summary)
}

fn bp3(a: &Bp3Args) -> Result<Outcome> {
    let r = bp3_integer_check(a.r_max, a.range)?;
    let summary = format!("{} triples, min slack {}", r.checked, r.min_slack);
    Outcome::checked(r.pass, &r, summary)
}

fn kpow(a: &KpowArgs) -> Result<Outcome> {
    let r = kpow_check(a.m, a.grid, a.k_max)?;
    let summary = format!("{} points, min slack {}", r.checked, fmt_f64(r.min_slack));
    Outcome::checked(r.pass, &r, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("4").unwrap(), vec![4]);
        assert_eq!(parse_sizes("1..3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert_eq!(parse_sizes("2..=4").unwrap(), vec![2, 3, 4]);
        assert!(parse_sizes("5..2").is_err());
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("a").is_err());
    }
}
