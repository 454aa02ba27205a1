//! Minimizing the edge boundary over `n`-subsets, and checking the minima
//! against the isoperimetric lower bounds.

mod combinations;

pub use combinations::{binomial, rank, unrank, RevolvingDoor};

use std::cmp::Ordering;
use std::f64::consts::E;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{CayleyGraph, SubsetMask, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::fclass::FunctionSpec;
use crate::groups::{is_generating, standard_gens, GenSet, GroupSpec};
use crate::numerics::{Rational, Value};
use crate::parallel::with_threads;

/// Default cap on the number of subsets an exhaustive search may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// Contiguous rank ranges per exhaustive search; fixed so that results do not
/// depend on the worker count.
const CHUNKS: u128 = 256;

/// Slack in the bound's favor for float comparisons.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub group: GroupSpec,
    pub gens: GenSet,
    pub n: u64,
    pub min_boundary: u64,
    pub witness: SubsetMask,
    /// Boundary of the index segment `{0, …, n-1}`; present when the
    /// generators are the coordinate unit vectors.
    pub lex_boundary: Option<u64>,
    pub exhaustive: bool,
    /// `(e/m) n ln(|G|/n)` with `m` the group exponent.
    pub bound_e_m: f64,
}

/// `(e/m) n ln(order/n)`, and 0 at `n ∈ {0, order}`.
pub fn main1_bound(m: u64, n: u64, order: u64) -> f64 {
    if n == 0 || n >= order {
        return 0.0;
    }
    E / m as f64 * n as f64 * (order as f64 / n as f64).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_enumeration: u128,
    pub max_order: u64,
    pub threads: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_enumeration: DEFAULT_ENUMERATION_BUDGET, max_order: DEFAULT_MAX_ORDER, threads: None }
    }
}

fn prepare(group: &GroupSpec, gens: &GenSet, n: u64, max_order: u64) -> Result<CayleyGraph> {
    if n > group.order() {
        return Err(Error::invalid(format!("subset size {n} exceeds group order {}", group.order())));
    }
    let graph = CayleyGraph::with_max_order(group, gens, max_order)?;
    if !is_generating(group, gens) {
        return Err(Error::invalid(format!("generators {} do not generate {group}", gens.to_literal())));
    }
    Ok(graph)
}

fn lex_boundary(graph: &CayleyGraph, n: u64) -> Option<u64> {
    let g = graph.group();
    (*graph.gens() == GenSet::units(g)).then(|| graph.boundary_unchecked(&SubsetMask::from_indices(g.order(), 0..n)))
}

fn finish(graph: &CayleyGraph, n: u64, value: u64, witness: SubsetMask, exhaustive: bool) -> SearchResult {
    let group = graph.group().clone();
    SearchResult {
        bound_e_m: main1_bound(group.exponent(), n, group.order()),
        lex_boundary: lex_boundary(graph, n),
        gens: graph.gens().clone(),
        group,
        n,
        min_boundary: value,
        witness,
        exhaustive,
    }
}

/// Keeps `(value, mask)` pairs ordered by value, then by mask order.
fn improves(value: i64, mask: &SubsetMask, best: &Option<(i64, SubsetMask)>) -> bool {
    match best {
        None => true,
        Some((v, m)) => value < *v || (value == *v && mask.lex_cmp(m) == Ordering::Less),
    }
}

/// Exact minimum of `∂_S(A)` over all `n`-subsets, walking the revolving-door
/// order with one-swap boundary updates. The witness is the smallest
/// minimizing mask in mask order.
pub fn min_boundary_exhaustive(group: &GroupSpec, gens: &GenSet, n: u64, cfg: &SearchConfig) -> Result<SearchResult> {
    let graph = prepare(group, gens, n, cfg.max_order)?;
    let order = group.order();
    let total = binomial(order, n);
    if total > cfg.max_enumeration {
        return Err(Error::BudgetExceeded {
            what: format!("exhaustive search of {n}-subsets of {group}"),
            required: total,
            budget: cfg.max_enumeration,
        });
    }
    let chunk = total.div_ceil(CHUNKS.min(total));
    let starts: Vec<u128> = (0..total).step_by(chunk as usize).collect();
    let walk = |start: u128| -> (i64, SubsetMask) {
        let len = chunk.min(total - start);
        let mut it = RevolvingDoor::starting_at(order, n, start);
        let mut mask = SubsetMask::from_indices(order, it.current().iter().copied());
        let mut value = graph.boundary_unchecked(&mask) as i64;
        let mut best = Some((value, mask.clone()));
        for _ in 1..len {
            let (out, inn) = it.advance().expect("rank within range");
            value += graph.remove_delta_unchecked(&mask, out);
            mask.remove(out);
            value += graph.add_delta_unchecked(&mask, inn);
            mask.insert(inn);
            if improves(value, &mask, &best) {
                best = Some((value, mask.clone()));
            }
        }
        best.expect("chunk is non-empty")
    };
    let per_chunk: Vec<(i64, SubsetMask)> = with_threads(cfg.threads, || starts.par_iter().map(|&s| walk(s)).collect());
    let mut best = None;
    for (v, m) in per_chunk {
        if improves(v, &m, &best) {
            best = Some((v, m));
        }
    }
    let (value, witness) = best.expect("at least one subset");
    Ok(finish(&graph, n, value as u64, witness, true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeuristicConfig {
    /// Total boundary evaluations across all restarts.
    pub budget: u64,
    pub seed: u64,
    /// Independent seeded searches; restart `k` uses seed `seed + k`.
    pub restarts: usize,
    /// Start restart 0 from the index segment `{0, …, n-1}`.
    pub start_from_lex: bool,
    pub max_order: u64,
    pub threads: Option<usize>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            budget: 100_000,
            seed: 0,
            restarts: 8,
            start_from_lex: false,
            max_order: DEFAULT_MAX_ORDER,
            threads: None,
        }
    }
}

/// Swap local search: exchange one member for one non-member, accept strict
/// improvements, and re-randomize after a run of failed swaps. The result is
/// an upper bound on the minimum.
pub fn min_boundary_heuristic(group: &GroupSpec, gens: &GenSet, n: u64, cfg: &HeuristicConfig) -> Result<SearchResult> {
    let graph = prepare(group, gens, n, cfg.max_order)?;
    let restarts = cfg.restarts.max(1);
    let allowance = (cfg.budget / restarts as u64).max(1);
    let runs: Vec<(i64, SubsetMask)> = with_threads(cfg.threads, || {
        (0..restarts)
            .into_par_iter()
            .map(|k| {
                let from_lex = cfg.start_from_lex && k == 0;
                local_search(&graph, n, allowance, cfg.seed.wrapping_add(k as u64), from_lex)
            })
            .collect()
    });
    let mut best = None;
    for (v, m) in runs {
        if improves(v, &m, &best) {
            best = Some((v, m));
        }
    }
    let (value, witness) = best.expect("at least one restart");
    Ok(finish(&graph, n, value as u64, witness, false))
}

fn local_search(graph: &CayleyGraph, n: u64, allowance: u64, seed: u64, from_lex: bool) -> (i64, SubsetMask) {
    let order = graph.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<u64> = (0..order).collect();
    let mut draw = |rng: &mut ChaCha8Rng, lex: bool| -> (Vec<u64>, Vec<u64>) {
        if !lex {
            all.shuffle(rng);
        } else {
            all.sort_unstable();
        }
        let (inside, outside) = all.split_at(n as usize);
        (inside.to_vec(), outside.to_vec())
    };
    let (mut inside, mut outside) = draw(&mut rng, from_lex);
    let mut mask = SubsetMask::from_indices(order, inside.iter().copied());
    let mut value = graph.boundary_unchecked(&mask) as i64;
    let mut best = Some((value, mask.clone()));
    if n == 0 || n == order {
        return best.unwrap();
    }
    let patience = (2 * n * (order - n)).min(20_000);
    let (mut evals, mut stale) = (1u64, 0u64);
    while evals < allowance {
        let i = rng.gen_range(0..inside.len());
        let j = rng.gen_range(0..outside.len());
        let (out, inn) = (inside[i], outside[j]);
        let d1 = graph.remove_delta_unchecked(&mask, out);
        mask.remove(out);
        let d2 = graph.add_delta_unchecked(&mask, inn);
        mask.insert(inn);
        evals += 1;
        if d1 + d2 < 0 {
            value += d1 + d2;
            inside[i] = inn;
            outside[j] = out;
            stale = 0;
            if improves(value, &mask, &best) {
                best = Some((value, mask.clone()));
            }
        } else {
            mask.remove(inn);
            mask.insert(out);
            stale += 1;
        }
        if stale >= patience && evals < allowance {
            (inside, outside) = draw(&mut rng, false);
            mask = SubsetMask::from_indices(order, inside.iter().copied());
            value = graph.boundary_unchecked(&mask) as i64;
            evals += 1;
            stale = 0;
            if improves(value, &mask, &best) {
                best = Some((value, mask.clone()));
            }
        }
    }
    best.unwrap()
}

/// Checks `m` against the group: the theorems need the exponent to divide `m`.
fn bound_m(group: &GroupSpec, m: Option<u64>) -> Result<u64> {
    let e = group.exponent();
    match m {
        None => Ok(e),
        Some(m) if m >= 1 && m % e == 0 => Ok(m),
        Some(m) => Err(Error::invalid(format!("m = {m} is not a multiple of the exponent {e} of {group}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Main1Line {
    pub group: GroupSpec,
    pub n: u64,
    pub m: u64,
    pub min_boundary: u64,
    pub bound: f64,
    /// `min_boundary / bound`; absent when the bound is 0.
    pub ratio: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Main1Report {
    pub lines: Vec<Main1Line>,
    pub min_ratio: Option<f64>,
    /// Index into `lines` of the first failing instance.
    pub first_violation: Option<usize>,
    pub pass: bool,
}

/// `min_boundary ≥ (e/m) n ln(|G|/n)` for each result, `m` the group exponent
/// unless a multiple is supplied.
pub fn verify_main1(results: &[SearchResult], m: Option<u64>) -> Result<Main1Report> {
    let mut lines = Vec::with_capacity(results.len());
    for r in results {
        if r.n == 0 {
            return Err(Error::invalid("the isoperimetric bound needs n ≥ 1"));
        }
        let m = bound_m(&r.group, m)?;
        let bound = main1_bound(m, r.n, r.group.order());
        let ratio = (bound > 0.0).then(|| r.min_boundary as f64 / bound);
        let pass = r.min_boundary as f64 >= bound - BOUND_TOL;
        lines.push(Main1Line { group: r.group.clone(), n: r.n, m, min_boundary: r.min_boundary, bound, ratio, pass });
    }
    let min_ratio = lines.iter().filter_map(|l| l.ratio).min_by(f64::total_cmp);
    let first_violation = lines.iter().position(|l| !l.pass);
    Ok(Main1Report { lines, min_ratio, first_violation, pass: first_violation.is_none() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoperLine {
    pub group: GroupSpec,
    pub n: u64,
    pub min_boundary: u64,
    /// `(1/m) |G| f(n/|G|)`.
    pub rhs: Value,
    pub equality: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoperReport {
    pub function: String,
    pub m: u64,
    /// The membership of `f` in `F_m` is taken on trust.
    pub assumption: String,
    pub lines: Vec<IsoperLine>,
    pub first_violation: Option<usize>,
    pub pass: bool,
}

/// `min_boundary ≥ (1/m) |G| f(n/|G|)` for each result, exactly when `f` is
/// exactly evaluable.
pub fn verify_isoper(results: &[SearchResult], f: &FunctionSpec, m: u64) -> Result<IsoperReport> {
    let mut lines = Vec::with_capacity(results.len());
    for r in results {
        bound_m(&r.group, Some(m))?;
        let order = r.group.order();
        let x = Rational::ratio(r.n as i64, order as i64);
        let scale = Rational::ratio(order as i64, m as i64);
        let min = r.min_boundary;
        let line = match f.eval(&x)? {
            Value::Exact(v) => {
                let rhs = &scale * &v;
                let lhs = Rational::from_integer(min as i64);
                IsoperLine { pass: lhs >= rhs, equality: lhs == rhs, rhs: Value::Exact(rhs), group: r.group.clone(), n: r.n, min_boundary: min }
            }
            Value::Approx(b) => {
                let s = scale.to_f64();
                let rhs = crate::numerics::BoundedValue::new(s * b.value, s * b.error_bound);
                let lhs = min as f64;
                IsoperLine {
                    pass: lhs >= rhs.lo() - BOUND_TOL,
                    equality: (lhs - rhs.value).abs() <= BOUND_TOL + rhs.error_bound,
                    rhs: Value::Approx(rhs),
                    group: r.group.clone(),
                    n: r.n,
                    min_boundary: min,
                }
            }
        };
        lines.push(line);
    }
    let first_violation = lines.iter().position(|l| !l.pass);
    Ok(IsoperReport {
        function: f.to_string(),
        m,
        assumption: format!("{f} is assumed to lie in F_{m}"),
        lines,
        first_violation,
        pass: first_violation.is_none(),
    })
}

/// Exhaustive minima on `C_m^r` for each `n` in order, stopping at the first
/// `n` whose minimum beats the index segment. Only meaningful for `m ≥ 5`.
pub fn find_lex_violation(m: u64, r: u32, n_values: &[u64], cfg: &SearchConfig) -> Result<Option<SearchResult>> {
    if m < 5 {
        return Err(Error::invalid(format!("initial segments are optimal for m = {m}; violations need m ≥ 5")));
    }
    let (group, gens) = standard_gens(m, r)?;
    for &n in n_values {
        let res = min_boundary_exhaustive(&group, &gens, n, cfg)?;
        if res.lex_boundary.is_some_and(|lex| res.min_boundary < lex) {
            return Ok(Some(res));
        }
    }
    Ok(None)
}
