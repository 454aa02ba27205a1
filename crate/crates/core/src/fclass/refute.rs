use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{defect, DefectWitness, FunctionSpec};
use crate::error::{Error, Result};
use crate::numerics::{BoundedValue, Rational, Value};
use crate::parallel::with_threads;

/// Search settings for [`refute_membership`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefuteConfig {
    /// Stage-one grid `{0, 1/N, …, 1}`.
    pub grid: u64,
    /// Number of seeded local searches, one per top stage-one candidate.
    pub restarts: usize,
    /// Perturbation steps per restart.
    pub budget: u64,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RefuteConfig {
    fn default() -> Self {
        RefuteConfig { grid: 243, restarts: 64, budget: 2000, seed: 0, threads: None }
    }
}

/// Stage-one tuple shape: `i1 ≤ a ≤ b ≤ im` with `c` copies of `a` and
/// `m - 2 - c` copies of `b` between the extremes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Shape {
    i1: u32,
    im: u32,
    a: u32,
    b: u32,
    c: u32,
}

impl Shape {
    fn indices(&self, m: u64) -> Vec<u64> {
        let k = m as u32 - 2;
        let mut v = vec![self.i1 as u64];
        v.extend(std::iter::repeat_n(self.a as u64, self.c as usize));
        v.extend(std::iter::repeat_n(self.b as u64, (k - self.c) as usize));
        v.push(self.im as u64);
        v
    }
}

/// Keeps the `cap` best `(score, key)` pairs, best first; ties go to the
/// smaller key.
struct TopK<K> {
    cap: usize,
    items: Vec<(f64, K)>,
}

impl<K: Ord + Clone> TopK<K> {
    fn new(cap: usize) -> Self {
        TopK { cap: cap.max(1), items: Vec::new() }
    }

    fn better(a: &(f64, K), b: &(f64, K)) -> Ordering {
        b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1))
    }

    fn threshold(&self) -> f64 {
        if self.items.len() < self.cap {
            f64::NEG_INFINITY
        } else {
            self.items.last().unwrap().0
        }
    }

    fn push(&mut self, score: f64, key: K) {
        if score < self.threshold() {
            return;
        }
        let item = (score, key);
        let pos = self.items.partition_point(|x| Self::better(x, &item) == Ordering::Less);
        if pos < self.cap {
            self.items.insert(pos, item);
            self.items.truncate(self.cap);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (s, k) in other.items {
            self.push(s, k);
        }
        self
    }
}

/// Looks for a tuple with positive defect, proving `f ∉ F_m`.
///
/// Stage one scores every grid tuple with at most two distinct interior
/// values; stage two perturbs the best of them on a finer grid with seeded
/// moves; stage three re-evaluates the survivors exactly when `f` allows it.
/// A returned witness has strictly positive defect: exactly when `f` is exact,
/// otherwise beyond its float error radius. `None` is not a membership proof.
pub fn refute_membership(f: &FunctionSpec, m: u64, cfg: &RefuteConfig) -> Result<Option<DefectWitness>> {
    if m < 2 {
        return Err(Error::invalid("refutation needs m ≥ 2"));
    }
    if cfg.grid == 0 || cfg.grid > u32::MAX as u64 / (2 * m) {
        return Err(Error::invalid("refutation grid must be positive and moderate"));
    }
    let n = cfg.grid;
    let grid_vals = float_table(f, n)?;
    let mean_vals = float_table(f, m * n)?;
    let top = with_threads(cfg.threads, || stage_one(&grid_vals, &mean_vals, m, n, cfg.restarts));

    let mut candidates: Vec<(f64, Vec<Rational>)> = Vec::new();
    for (score, shape) in &top.items {
        let tuple: Vec<Rational> = shape.indices(m).iter().map(|&i| Rational::ratio(i as i64, n as i64)).collect();
        candidates.push((*score, tuple));
    }
    let starts: Vec<(usize, Vec<u64>)> = top.items.iter().map(|(_, s)| s.indices(m)).enumerate().collect();
    let refined: Vec<Result<(f64, Vec<Rational>)>> = with_threads(cfg.threads, || {
        starts
            .par_iter()
            .map(|(k, idx)| perturb(f, m, n, idx, cfg.seed.wrapping_add(*k as u64), cfg.budget))
            .collect()
    });
    for r in refined {
        candidates.push(r?);
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    candidates.dedup_by(|a, b| a.1 == b.1);

    for (_, tuple) in &candidates {
        let d = defect(f, m, tuple)?;
        let positive = match &d {
            Value::Exact(v) => v.is_positive(),
            Value::Approx(b) => b.lo() > 0.0,
        };
        if positive {
            return Ok(Some(DefectWitness::new(m, tuple.clone(), d)));
        }
    }
    Ok(None)
}

fn float_table(f: &FunctionSpec, den: u64) -> Result<Vec<f64>> {
    (0..=den).map(|i| f.eval_f64(i as f64 / den as f64).map(|b| b.value)).collect()
}

fn stage_one(g: &[f64], mean: &[f64], m: u64, n: u64, keep: usize) -> TopK<Shape> {
    let k = m as u32 - 2;
    let mf = m as f64;
    let nf = n as f64;
    (0..=n as u32)
        .into_par_iter()
        .map(|i1| {
            let mut top = TopK::new(keep);
            for im in i1..=n as u32 {
                let base = g[i1 as usize] + g[im as usize];
                let spread = (im - i1) as f64 / nf;
                let s0 = i1 + im;
                let mut score = |a: u32, b: u32, c: u32| {
                    let s = s0 + c * a + (k - c) * b;
                    let avg = (base + c as f64 * g[a as usize] + (k - c) as f64 * g[b as usize]) / mf;
                    let d = mean[s as usize] - avg - spread;
                    if d >= top.threshold() {
                        top.push(d, Shape { i1, im, a, b, c });
                    }
                };
                if k == 0 {
                    score(i1, i1, 0);
                    continue;
                }
                for a in i1..=im {
                    score(a, a, k);
                    for b in a + 1..=im {
                        for c in 1..k {
                            score(a, b, c);
                        }
                    }
                }
            }
            top
        })
        .reduce(|| TopK::new(keep), TopK::merge)
}

/// Seeded hill climb on the grid of step `1/(1024 N)`, maximizing the float
/// defect.
fn perturb(f: &FunctionSpec, m: u64, n: u64, start: &[u64], seed: u64, budget: u64) -> Result<(f64, Vec<Rational>)> {
    const FINE: u64 = 1024;
    let den = n * FINE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<u64> = start.iter().map(|&i| i * FINE).collect();
    let score = |pts: &[u64]| -> Result<f64> {
        let mut sum = 0.0;
        for &p in pts {
            sum += f.eval_f64(p as f64 / den as f64)?.value;
        }
        let total: u64 = pts.iter().sum();
        let at_mean = f.eval_f64(total as f64 / (m * den) as f64)?.value;
        let spread = (pts.iter().max().unwrap() - pts.iter().min().unwrap()) as f64 / den as f64;
        Ok(at_mean - sum / m as f64 - spread)
    };
    let mut best = score(&pts)?;
    for _ in 0..budget {
        let i = rng.gen_range(0..pts.len());
        let step = 1u64 << rng.gen_range(0..=12u32);
        let old = pts[i];
        pts[i] = if rng.gen_bool(0.5) { old.saturating_add(step).min(den) } else { old.saturating_sub(step) };
        let s = score(&pts)?;
        if s > best {
            best = s;
        } else {
            pts[i] = old;
        }
    }
    let tuple = pts.iter().map(|&p| Rational::ratio(p as i64, den as i64)).collect();
    Ok((best, tuple))
}

/// `C(N + m, m)`: multisets of size `m` drawn from the `N + 1` grid points.
pub fn multiset_count(n_grid: u64, m: u64) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=m as u128 {
        c = c.saturating_mul(n_grid as u128 + i) / i;
    }
    c
}

/// Outcome of an exhaustive grid scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub function: String,
    pub m: u64,
    pub n_grid: u64,
    pub tol: f64,
    pub multisets: u128,
    pub exact: bool,
    pub worst_defect: Value,
    pub worst_tuple: Vec<Rational>,
    /// Earliest violation in enumeration order.
    pub first_violation: Option<DefectWitness>,
    pub pass: bool,
}

/// Arithmetic needed by the scan kernel.
trait ScanNum: Clone + Send + Sync {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn scale(&self, k: u64) -> Self;
    fn gt(&self, o: &Self) -> bool;
}

impl ScanNum for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, k: u64) -> Self {
        self * k as f64
    }
    fn gt(&self, o: &Self) -> bool {
        self > o
    }
}

impl ScanNum for i128 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, k: u64) -> Self {
        self * k as i128
    }
    fn gt(&self, o: &Self) -> bool {
        self > o
    }
}

impl ScanNum for BigInt {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, k: u64) -> Self {
        self * BigInt::from(k)
    }
    fn gt(&self, o: &Self) -> bool {
        self > o
    }
}

/// Scaled defect tables: a tuple with grid indices `i_1 ≤ … ≤ i_m` scores
/// `mean[Σ i] - Σ grid[i] - w (i_m - i_1)`, a fixed positive multiple of its
/// defect.
struct Kernel<'a, T> {
    grid: &'a [T],
    mean: &'a [T],
    w: T,
    threshold: T,
    m: usize,
    n: usize,
}

struct ChunkBest<T> {
    worst: Option<(T, Vec<u32>)>,
    first: Option<(T, Vec<u32>)>,
}

impl<T: ScanNum> Kernel<'_, T> {
    fn run_chunk(&self, i1: usize) -> ChunkBest<T> {
        let mut best = ChunkBest { worst: None, first: None };
        let mut stack = vec![i1 as u32];
        if self.m == 1 {
            return best;
        }
        self.descend(i1, i1, i1, self.grid[i1].clone(), &mut stack, &mut best);
        best
    }

    fn descend(&self, i1: usize, start: usize, s: usize, vsum: T, stack: &mut Vec<u32>, best: &mut ChunkBest<T>) {
        if stack.len() + 1 == self.m {
            for im in start..=self.n {
                let d = self.mean[s + im]
                    .sub(&vsum.add(&self.grid[im]))
                    .sub(&self.w.scale((im - i1) as u64));
                let new_worst = best.worst.as_ref().is_none_or(|(v, _)| d.gt(v));
                let violates = best.first.is_none() && d.gt(&self.threshold);
                if new_worst || violates {
                    let mut t = stack.clone();
                    t.push(im as u32);
                    if violates {
                        best.first = Some((d.clone(), t.clone()));
                    }
                    if new_worst {
                        best.worst = Some((d, t));
                    }
                }
            }
            return;
        }
        for i in start..=self.n {
            stack.push(i as u32);
            self.descend(i1, i, s + i, vsum.add(&self.grid[i]), stack, best);
            stack.pop();
        }
    }

    fn scan(&self, threads: Option<usize>) -> ChunkBest<T> {
        let chunks: Vec<ChunkBest<T>> =
            with_threads(threads, || (0..=self.n).into_par_iter().map(|i1| self.run_chunk(i1)).collect());
        let mut total = ChunkBest { worst: None, first: None };
        for c in chunks {
            if total.first.is_none() {
                total.first = c.first;
            }
            if let Some((v, t)) = c.worst {
                if total.worst.as_ref().is_none_or(|(w, _)| v.gt(w)) {
                    total.worst = Some((v, t));
                }
            }
        }
        total
    }
}

/// Evaluates the defect of every multiset of size `m` from
/// `{0, 1/N, …, 1}`. Exact rationals are used when `f` allows them (a
/// violation is any positive defect); otherwise doubles, with a violation
/// meaning defect `> tol`.
pub fn grid_membership_scan(
    f: &FunctionSpec,
    m: u64,
    n_grid: u64,
    tol: f64,
    max_enumeration: u128,
    threads: Option<usize>,
) -> Result<ScanReport> {
    if m < 2 || n_grid == 0 {
        return Err(Error::invalid("grid scan needs m ≥ 2 and N ≥ 1"));
    }
    if m.checked_mul(n_grid).is_none_or(|p| p > u32::MAX as u64 / 2) {
        return Err(Error::invalid("grid scan size out of range"));
    }
    let multisets = multiset_count(n_grid, m);
    if multisets > max_enumeration {
        return Err(Error::BudgetExceeded {
            what: format!("grid scan with m = {m}, N = {n_grid}"),
            required: multisets,
            budget: max_enumeration,
        });
    }
    let to_tuple = |idx: &[u32]| -> Vec<Rational> {
        idx.iter().map(|&i| Rational::ratio(i as i64, n_grid as i64)).collect()
    };
    let (n, mu) = (n_grid as usize, m as usize);
    let report = |exact: bool, worst: (Value, Vec<u32>), first: Option<(Value, Vec<u32>)>| {
        let first_violation = first.map(|(d, t)| DefectWitness::new(m, to_tuple(&t), d));
        ScanReport {
            function: f.to_string(),
            m,
            n_grid,
            tol,
            multisets,
            exact,
            worst_defect: worst.0,
            worst_tuple: to_tuple(&worst.1),
            pass: first_violation.is_none(),
            first_violation,
        }
    };

    if !f.is_exact() {
        let grid = float_table(f, n_grid)?;
        let mean: Vec<f64> = float_table(f, m * n_grid)?.iter().map(|v| v * m as f64).collect();
        let k = Kernel { grid: &grid, mean: &mean, w: m as f64 / n_grid as f64, threshold: tol * m as f64, m: mu, n };
        let best = k.scan(threads);
        let as_value = |v: f64| Value::Approx(BoundedValue::new(v / m as f64, 64.0 * f64::EPSILON * m as f64));
        let (wv, wt) = best.worst.expect("grid is non-empty");
        return Ok(report(false, (as_value(wv), wt), best.first.map(|(v, t)| (as_value(v), t))));
    }

    let exact_table = |den: u64| -> Result<Vec<Rational>> {
        (0..=den)
            .map(|i| f.eval_exact(&Rational::ratio(i as i64, den as i64)).map(|v| v.expect("exact kind")))
            .collect()
    };
    let grid_q = exact_table(n_grid)?;
    let mean_q = exact_table(m * n_grid)?;
    let mut d = BigInt::from(n_grid);
    for v in grid_q.iter().chain(&mean_q) {
        d = d.lcm(v.denom());
    }
    let scale_all = |vals: &[Rational], k: u64| -> Vec<BigInt> {
        vals.iter().map(|v| v.numer() * (&d / v.denom()) * BigInt::from(k)).collect()
    };
    let grid_z = scale_all(&grid_q, 1);
    let mean_z = scale_all(&mean_q, m);
    let w = &d * BigInt::from(m) / BigInt::from(n_grid);
    let denom = &d * BigInt::from(m);
    let as_value = |v: BigInt| Value::Exact(Rational::new(v, denom.clone()).expect("positive denominator"));

    let limit = BigInt::one() << 120u32;
    let headroom = BigInt::from((m + 2) * (n_grid + 1));
    let fits = grid_z.iter().chain(&mean_z).chain(std::iter::once(&w)).all(|v| {
        let a: BigInt = if v < &BigInt::zero() { -v } else { v.clone() };
        a * &headroom < limit
    });
    let (worst, first) = if fits {
        let small = |v: &[BigInt]| -> Vec<i128> { v.iter().map(|x| x.to_i128().unwrap()).collect() };
        let (g, mn) = (small(&grid_z), small(&mean_z));
        let k = Kernel { grid: &g, mean: &mn, w: w.to_i128().unwrap(), threshold: 0, m: mu, n };
        let best = k.scan(threads);
        let lift = |(v, t): (i128, Vec<u32>)| (as_value(BigInt::from(v)), t);
        (lift(best.worst.expect("grid is non-empty")), best.first.map(lift))
    } else {
        let k = Kernel { grid: &grid_z, mean: &mean_z, w: w.clone(), threshold: BigInt::zero(), m: mu, n };
        let best = k.scan(threads);
        let lift = |(v, t): (BigInt, Vec<u32>)| (as_value(v), t);
        (lift(best.worst.expect("grid is non-empty")), best.first.map(lift))
    };
    Ok(report(true, worst, first))
}
