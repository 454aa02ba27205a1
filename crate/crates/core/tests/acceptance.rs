//! Acceptance gate: every criterion runs at its full stated scale and prints
//! one PASS/FAIL line. The process exits non-zero if any criterion fails.

use std::f64::consts::E;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use takagi_core::boundary::{lex_theorem_check, CayleyGraph, DeltaMode, SubsetMask, DEFAULT_MAX_ORDER};
use takagi_core::fclass::{
    bp3_integer_check, bp_dyadic_check, cyclic_variation, envelope, envelope_grid_propagate, funny_check,
    grid_membership_scan, refute_membership, separation_check, FunctionSpec, RefuteConfig,
};
use takagi_core::groups::{box_set, standard_gens, GenSet, GroupSpec};
use takagi_core::search::{
    find_lex_violation, main1_bound, min_boundary_exhaustive, min_boundary_heuristic, verify_main1, HeuristicConfig,
    SearchConfig, SearchResult,
};
use takagi_core::takagi::{
    bounds_check, omega_exact_madic, omega_float, omega_scaled_u64, residue_marks,
    sharpness_probes, t3, SharpnessHit,
};
use takagi_core::Rational;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

/// `m^r ω_m(n/m^r)` straight from the series: the `k`-th term is
/// `m^{r-k} min(dist(m^k n/m^r, Z), 1/m)`, which is the integer
/// `min(d_k, m^{r-1}) / m^k` with `d_k` the distance of `m^k n` to `m^r Z`.
fn series_oracle(m: i128, r: u32, n: i128) -> i128 {
    let mr = m.pow(r);
    (0..r)
        .map(|k| {
            let u = (m.pow(k) * n).rem_euclid(mr);
            u.min(mr - u).min(m.pow(r - 1)) / m.pow(k)
        })
        .sum()
}

fn criterion_1() -> Outcome {
    let cases = [(2u64, 10u32), (3, 6), (4, 5), (5, 4), (6, 3), (7, 3)];
    let mut total = 0;
    for (m, r) in cases {
        let rep = lex_theorem_check(m, r, DEFAULT_MAX_ORDER).map_err(|e| e.to_string())?;
        ensure(rep.pass(), || format!("m={m} r={r}: first mismatch {:?}", rep.mismatches.first()))?;
        total += rep.checked;
    }
    Ok(format!("{total} segment sizes over {} groups", cases.len()))
}

fn criterion_2() -> Outcome {
    let mut checks = 0u64;
    for m in 2..=6u64 {
        for r in 1..=8u32 {
            let mr = m.pow(r);
            for n in 0..=mr {
                let v = omega_scaled_u64(m, n as i64, r);
                ensure(v as i128 == series_oracle(m as i128, r, n as i128), || format!("oracle m={m} r={r} n={n}"))?;
                if n % m != 0 {
                    let (t, rho) = (n / m, n % m);
                    let rhs = (m - rho) * omega_scaled_u64(m, t as i64, r - 1)
                        + rho * omega_scaled_u64(m, t as i64 + 1, r - 1)
                        + 1;
                    ensure(v == rhs, || format!("lemma m={m} r={r} n={n}"))?;
                }
                checks += 1;
            }
            if r <= 3 {
                for n in 1..mr {
                    if n % m == 0 {
                        continue;
                    }
                    let (t, rho) = (n / m, n % m);
                    let mq = Rational::from_integer(m as i64);
                    let rhs = &(&(&(&Rational::one() - &q(rho as i64, m as i64))
                        * &omega_exact_madic(m, t as i64, r - 1).unwrap())
                        + &(&q(rho as i64, m as i64) * &omega_exact_madic(m, t as i64 + 1, r - 1).unwrap()))
                        + &mq.pow(r).recip().unwrap();
                    ensure(omega_exact_madic(m, n as i64, r).unwrap() == rhs, || format!("rational lemma m={m} r={r} n={n}"))?;
                }
            }
        }
    }
    for r in 1..=10u32 {
        for n in 0..=(1i64 << r) {
            let lhs = omega_scaled_u64(2, n, r);
            let rhs = omega_scaled_u64(2, n.div_euclid(2), r - 1)
                + omega_scaled_u64(2, (n + 1).div_euclid(2), r - 1)
                + (n % 2) as u64;
            ensure(lhs == rhs, || format!("m=2 corollary r={r} n={n}"))?;
            checks += 1;
        }
    }
    for r in 1..=6u32 {
        let p = 3i64.pow(r);
        for n in -p..=p {
            let t = t3(r, n);
            let marks = residue_marks(n);
            ensure(3 * t == 2 * t3(r, n - marks.xi) + t3(r, n - marks.zeta) + 3 * marks.delta3, || {
                format!("T_r recursion r={r} n={n}")
            })?;
            ensure(t == t3(r, -n), || format!("T_r evenness r={r} n={n}"))?;
            ensure(t as i128 == series_oracle(3, r, n as i128), || format!("T_r oracle r={r} n={n}"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} exact identities"))
}

fn exhaustive_all(m: u64, r: u32) -> Result<Vec<SearchResult>, String> {
    let (g, s) = standard_gens(m, r).unwrap();
    (0..=g.order())
        .map(|n| min_boundary_exhaustive(&g, &s, n, &SearchConfig::default()).map_err(|e| e.to_string()))
        .collect()
}

fn criterion_3() -> Result<(String, Vec<SearchResult>), String> {
    let mut all = Vec::new();
    for (m, r) in [(2u64, 3u32), (2, 4), (3, 2), (4, 2)] {
        let res = exhaustive_all(m, r)?;
        let order = res.len() - 1;
        for (n, x) in res.iter().enumerate() {
            ensure(x.lex_boundary == Some(x.min_boundary), || format!("C_{m}^{r} n={n}: min {} lex {:?}", x.min_boundary, x.lex_boundary))?;
            ensure(x.min_boundary == omega_scaled_u64(m, n as i64, r), || format!("C_{m}^{r} n={n}: scaled omega"))?;
            ensure(x.min_boundary == res[order - n].min_boundary, || format!("C_{m}^{r} n={n}: complement"))?;
        }
        all.extend(res);
    }
    Ok((format!("{} exhaustive minima equal the lex values", all.len()), all))
}

fn criterion_4() -> Result<(String, Vec<SearchResult>), String> {
    let cfg = SearchConfig::default();
    let (g, s) = standard_gens(5, 2).unwrap();
    let results: Vec<SearchResult> =
        (1..=6).map(|n| min_boundary_exhaustive(&g, &s, n, &cfg).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let v = find_lex_violation(5, 2, &[1, 2, 3, 4, 5, 6], &cfg).map_err(|e| e.to_string())?;
    let v = v.ok_or("no violation found on C_5^2")?;
    ensure(v.n == 4 && v.min_boundary == 4 && v.lex_boundary == Some(5), || format!("unexpected violation {v:?}"))?;
    let graph = CayleyGraph::new(&g, &s).unwrap();
    let boxed = box_set(5, 2, 2, 2).unwrap();
    ensure(graph.boundary(&boxed).unwrap() == 4, || "2x2 box does not have boundary 4".into())?;
    ensure(graph.boundary(&v.witness).unwrap() == 4, || "witness does not recount to 4".into())?;
    Ok((format!("n=4: min 4 < lex 5, witness {}", v.witness.to_hex()), results))
}

fn criterion_5(results: &[SearchResult]) -> Outcome {
    let nonempty: Vec<SearchResult> = results.iter().filter(|r| r.n > 0).cloned().collect();
    let rep = verify_main1(&nonempty, None).map_err(|e| e.to_string())?;
    ensure(rep.pass, || format!("exhaustive minimum below bound: {:?}", rep.first_violation.map(|i| &rep.lines[i])))?;
    let mut boxes = 0;
    let mut closest = f64::INFINITY;
    for m in [5u64, 10, 20] {
        for r in 1..=3u32 {
            let (g, s) = standard_gens(m, r).unwrap();
            let graph = CayleyGraph::new(&g, &s).unwrap();
            for k in 1..=r {
                for t in 1..m {
                    let a = box_set(m, r, k, t).unwrap();
                    let size = a.len();
                    let boundary = graph.boundary(&a).unwrap();
                    let expected = k as u64 * t.pow(k - 1) * m.pow(r - k);
                    ensure(boundary == expected, || format!("box m={m} r={r} k={k} t={t}: {boundary} vs {expected}"))?;
                    let bound = main1_bound(m, size, g.order());
                    ensure(boundary as f64 >= bound - 1e-9, || format!("box m={m} r={r} k={k} t={t} below bound"))?;
                    let alpha = t as f64 / m as f64;
                    let c = (1.0 / alpha) / (1.0 / alpha).ln();
                    let ratio = boundary as f64 / bound;
                    ensure((ratio - c / E).abs() <= 0.02, || format!("box m={m} r={r} k={k} t={t}: ratio {ratio} vs {}", c / E))?;
                    closest = closest.min(ratio);
                    boxes += 1;
                }
            }
        }
    }
    ensure(closest < 1.01, || format!("box ratios stay above {closest}"))?;
    Ok(format!(
        "{} minima, min ratio {:.4}; {boxes} boxes, min ratio {closest:.5}",
        nonempty.len(),
        rep.min_ratio.unwrap_or(f64::NAN)
    ))
}

fn criterion_6() -> Outcome {
    let rep = bp_dyadic_check(8).map_err(|e| e.to_string())?;
    ensure(rep.pass, || format!("violation at {:?}", rep.first_violation))?;
    Ok(format!("{} pairs over r <= 8, min slack {}", rep.pairs, rep.min_slack))
}

fn criterion_7() -> Outcome {
    let rep = bp3_integer_check(4, 81).map_err(|e| e.to_string())?;
    ensure(rep.pass, || format!("violation at {:?}", rep.first_violation))?;
    Ok(format!("{} triples, min slack {}", rep.checked, rep.min_slack))
}

fn criterion_8() -> Outcome {
    for m in 2..=4u64 {
        for r in 0..=6u32 {
            let t = envelope_grid_propagate(m, r, 1 << 20).map_err(|e| e.to_string())?;
            for (n, v) in t.rows() {
                ensure(v == m * omega_scaled_u64(m, n as i64, r), || format!("propagation m={m} r={r} n={n}"))?;
            }
        }
    }
    for j in 0..=256 {
        let x = q(j, 256);
        let (a, b) = (envelope(4, &x).unwrap(), envelope(2, &x).unwrap());
        ensure(a.exact && b.exact && a.upper == b.upper, || format!("F_4 and F_2 differ at {x}"))?;
    }
    for m in 5..=12u64 {
        let s = separation_check(m).map_err(|e| e.to_string())?;
        ensure(s.m_omega == q(5, m as i64), || format!("m={m}: m*omega_m(4/m^2) = {}", s.m_omega))?;
        ensure(s.upper_bound <= q(4, m as i64), || format!("m={m}: bound {}", s.upper_bound))?;
    }
    Ok("propagation tables, F_4 = F_2 on 257 dyadics, separation for m in [5, 12]".into())
}

fn criterion_9() -> Outcome {
    let mut found = Vec::new();
    for (spec, m) in [("scaled_omega:m=2,scale=2", 6u64), ("scaled_omega:m=3,scale=3", 6), ("scaled_omega:m=2,scale=2", 8)] {
        let f: FunctionSpec = spec.parse().unwrap();
        let mut witness = None;
        for grid in [243, 729] {
            let cfg = RefuteConfig { grid, ..RefuteConfig::default() };
            witness = refute_membership(&f, m, &cfg).map_err(|e| e.to_string())?;
            if witness.is_some() {
                break;
            }
        }
        let w = witness.ok_or_else(|| format!("{spec}, m={m}: no witness"))?;
        ensure(w.certified, || format!("{spec}, m={m}: witness not certified"))?;
        let d = takagi_core::fclass::defect(&f, m, &w.tuple).unwrap();
        ensure(d.as_exact().is_some_and(|v| v.is_positive()), || format!("{spec}: recheck failed"))?;
        let tuple: Vec<String> = w.tuple.iter().map(ToString::to_string).collect();
        found.push(format!("m={m} ({}) defect {}", tuple.join(","), w.defect));
    }
    Ok(found.join("; "))
}

fn criterion_10() -> Outcome {
    let budget = u128::MAX;
    let mut notes = Vec::new();
    for (spec, m, n) in [("scaled_omega:m=2,scale=2", 2u64, 256u64), ("scaled_omega:m=3,scale=3", 3, 81)] {
        let f: FunctionSpec = spec.parse().unwrap();
        let rep = grid_membership_scan(&f, m, n, 1e-9, budget, None).map_err(|e| e.to_string())?;
        ensure(rep.exact && rep.pass, || format!("{spec} m={m}: {:?}", rep.first_violation))?;
        notes.push(format!("{spec} m={m} worst {}", rep.worst_defect));
    }
    let entropy = FunctionSpec::entropy();
    let mut leaves = 0;
    for m in 2..=6u64 {
        let rep = grid_membership_scan(&entropy, m, 128, 1e-9, budget, None).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("entropy m={m}: {:?}", rep.first_violation))?;
        leaves += rep.multisets;
    }
    notes.push(format!("entropy m in [2,6]: {leaves} multisets"));
    Ok(notes.join("; "))
}

fn criterion_11() -> Outcome {
    let mut hits = 0;
    for m in [2u64, 3, 4, 5, 7] {
        let rep = bounds_check(m, 1024).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("m={m}: lower {} upper {}", rep.worst_lower_margin, rep.worst_upper_margin))?;
        for (x, side) in sharpness_probes(m, 6) {
            let hit = SharpnessHit { x: x.clone(), side };
            ensure(rep.sharpness_hits.contains(&hit), || format!("m={m}: bound not attained at {x} ({side:?})"))?;
            hits += 1;
        }
    }
    Ok(format!("5 bases pass, {hits} sharpness points attained"))
}

fn criterion_12() -> Outcome {
    let mut notes = Vec::new();
    for (m, n) in [(2u64, 64u64), (3, 27)] {
        let f = FunctionSpec::m_omega(m).unwrap();
        let rep = funny_check(&f, m, n).map_err(|e| e.to_string())?;
        ensure(rep.exact && rep.pass, || format!("m={m}: violation at {:?}", rep.first_violation))?;
        notes.push(format!("m={m} N={n}: {} triples, min slack {}", rep.checked, rep.min_slack));
    }
    Ok(notes.join("; "))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (GroupSpec, GenSet) {
    let moduli: Vec<u64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=6)).collect();
    let g = GroupSpec::new(moduli).unwrap();
    let mut elems = GenSet::units(&g).elements().to_vec();
    for _ in 0..rng.gen_range(0..=2) {
        let idx = rng.gen_range(1..g.order());
        let e = g.element_of(idx).unwrap();
        if !elems.contains(&e) {
            elems.push(e);
        }
    }
    let s = GenSet::new(&g, elems).unwrap();
    (g, s)
}

fn random_mask(rng: &mut ChaCha8Rng, order: u64) -> SubsetMask {
    let p: f64 = rng.gen();
    SubsetMask::from_indices(order, (0..order).filter(|_| rng.gen_bool(p)))
}

/// Bracket `[S_K, S_K + m^{-K}/(m-1)]` on `ω_m(x)` from the first `K`
/// series terms in exact arithmetic.
fn series_bracket(m: u64, x: &Rational, terms: u32) -> (Rational, Rational) {
    let mq = Rational::from_integer(m as i64);
    let unit = mq.recip().unwrap();
    let mut sum = Rational::zero();
    let mut y = x.clone();
    let mut scale = Rational::one();
    for _ in 0..terms {
        let frac = y.frac_mod1();
        let dist = frac.clone().min(&Rational::one() - &frac);
        sum += &scale * &dist.min(unit.clone());
        y = &frac * &mq;
        scale = &scale * &unit;
    }
    let tail = &scale / &Rational::from_integer(m as i64 - 1);
    let hi = &sum + &tail;
    (sum, hi)
}

fn criterion_13() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let (g, s) = random_instance(&mut rng);
        let a = random_mask(&mut rng, g.order());
        let graph = CayleyGraph::new(&g, &s).unwrap();
        let neg = CayleyGraph::new(&g, &s.negated(&g)).unwrap();
        let b = graph.boundary(&a).unwrap();
        ensure(b == graph.boundary(&a.complement()).unwrap(), || format!("complement symmetry, instance {i}"))?;
        ensure(b == neg.boundary(&a).unwrap(), || format!("negation symmetry, instance {i}"))?;
    }
    let (g, s) = standard_gens(5, 3).unwrap();
    let graph = CayleyGraph::new(&g, &s).unwrap();
    let mut mask = random_mask(&mut rng, g.order());
    let mut value = graph.boundary(&mask).unwrap() as i64;
    for step in 0..10_000 {
        let x = rng.gen_range(0..g.order());
        let mode = if mask.contains(x) { DeltaMode::Remove } else { DeltaMode::Add };
        let d = graph.delta(&mask, x, mode).unwrap();
        match mode {
            DeltaMode::Add => mask.insert(x),
            DeltaMode::Remove => mask.remove(x),
        };
        value += d;
        ensure(value == graph.boundary(&mask).unwrap() as i64, || format!("delta drift at step {step}"))?;
    }
    for i in 0..1000 {
        let m = rng.gen_range(2..=7u64);
        let x: f64 = rng.gen_range(-2.0..2.0);
        let b = omega_float(m, x, 40).unwrap();
        let exact = Rational::from_f64(x).unwrap();
        let (lo, hi) = series_bracket(m, &exact, 120);
        let (lo, hi) = (lo.to_f64(), hi.to_f64());
        ensure(b.lo() <= lo && hi <= b.hi(), || {
            format!("omega_float m={m} x={x}: {} +- {} vs [{lo}, {hi}], case {i}", b.value, b.error_bound)
        })?;
    }
    for i in 0..10_000 {
        let len = rng.gen_range(1..=8);
        let xs: Vec<Rational> = (0..len).map(|_| q(rng.gen_range(-50..=50), rng.gen_range(1..=12))).collect();
        let cv = cyclic_variation(&xs).unwrap();
        let spread = xs.iter().max().unwrap() - xs.iter().min().unwrap();
        ensure(cv >= &Rational::from_integer(2) * &spread, || format!("cyclic variation, list {i}"))?;
    }
    let (g, s) = standard_gens(5, 2).unwrap();
    let f = FunctionSpec::m_omega(2).unwrap();
    let mut outputs = Vec::new();
    for threads in [1usize, 4, 8] {
        let ex = min_boundary_exhaustive(&g, &s, 6, &SearchConfig { threads: Some(threads), ..SearchConfig::default() }).unwrap();
        let heur = min_boundary_heuristic(&g, &s, 7, &HeuristicConfig { budget: 20_000, seed: 5, threads: Some(threads), ..HeuristicConfig::default() })
            .unwrap();
        let scan = grid_membership_scan(&f, 4, 24, 1e-9, u128::MAX, Some(threads)).unwrap();
        let refute = refute_membership(&f, 6, &RefuteConfig { grid: 30, restarts: 8, budget: 300, threads: Some(threads), ..RefuteConfig::default() }).unwrap();
        outputs.push((ex, heur, scan, refute));
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "results differ across thread counts".into())?;
    Ok("symmetry x100, delta x10^4, omega_float x10^3, cyclic x10^4, threads 1/4/8 agree".into())
}

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |id: u32, title: &str, outcome: Outcome, t: Instant| {
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {title} ({secs:.1}s): {detail}"),
            Err(why) => {
                failures += 1;
                println!("criterion {id:>2} FAIL  {title} ({secs:.1}s): {why}");
            }
        }
    };
    let t = Instant::now();
    report(1, "lex segments realize m^r omega_m(n/m^r)", criterion_1(), t);
    let t = Instant::now();
    report(2, "omega recursions", criterion_2(), t);
    let t = Instant::now();
    let c3 = criterion_3();
    let mut minima = c3.as_ref().map(|(_, r)| r.clone()).unwrap_or_default();
    report(3, "lex optimality for m in {2,3,4}", c3.map(|(s, _)| s), t);
    let t = Instant::now();
    let c4 = criterion_4();
    minima.extend(c4.as_ref().map(|(_, r)| r.clone()).unwrap_or_default());
    report(4, "lex non-optimality on C_5^2", c4.map(|(s, _)| s), t);
    let t = Instant::now();
    report(5, "isoperimetric bound with constant e", criterion_5(&minima), t);
    let t = Instant::now();
    report(6, "dyadic two-point inequality", criterion_6(), t);
    let t = Instant::now();
    report(7, "three-point integer inequality", criterion_7(), t);
    let t = Instant::now();
    report(8, "extremal function identities", criterion_8(), t);
    let t = Instant::now();
    report(9, "certified non-membership witnesses", criterion_9(), t);
    let t = Instant::now();
    report(10, "grid scans find no violation", criterion_10(), t);
    let t = Instant::now();
    report(11, "logarithmic bounds and sharpness", criterion_11(), t);
    let t = Instant::now();
    report(12, "weighted two-point inequality", criterion_12(), t);
    let t = Instant::now();
    report(13, "property suites", criterion_13(), t);
    println!("acceptance: {} of 13 criteria passed in {:.1}s", 13 - failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
