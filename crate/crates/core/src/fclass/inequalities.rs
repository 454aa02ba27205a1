use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use super::FunctionSpec;
use crate::error::{Error, Result};
use crate::numerics::{BoundedValue, Rational, Value};
use crate::takagi::{omega_exact_rational, omega_float, omega_scaled_u64, t3, terms_for_tolerance};

/// `|x_2 - x_1| + … + |x_m - x_{m-1}| + |x_1 - x_m|`.
pub fn cyclic_variation(xs: &[Rational]) -> Result<Rational> {
    if xs.is_empty() {
        return Err(Error::invalid("cyclic variation of an empty list"));
    }
    Ok((0..xs.len()).map(|i| (&xs[(i + 1) % xs.len()] - &xs[i]).abs()).sum())
}

pub fn cyclic_variation_f64(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("cyclic variation of an empty list"));
    }
    Ok((0..xs.len()).map(|i| (xs[(i + 1) % xs.len()] - xs[i]).abs()).sum())
}

/// Worst case of `f(λx + (1-λ)y) ≤ λ f(x) + (1-λ) f(y) + (y - x) m ω_m(λ)`
/// over grid triples with `x ≤ y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunnyReport {
    pub function: String,
    pub m: u64,
    pub n_grid: u64,
    pub exact: bool,
    pub checked: u64,
    pub min_slack: Value,
    /// `(λ, x, y)` attaining the minimum slack.
    pub at: [Rational; 3],
    /// Earliest `(λ, x, y)` with negative slack, scanning `λ`, then `x`, then `y`.
    pub first_violation: Option<[Rational; 3]>,
    pub pass: bool,
}

pub fn funny_check(f: &FunctionSpec, m: u64, n_grid: u64) -> Result<FunnyReport> {
    if !(2..=4).contains(&m) {
        return Err(Error::invalid("funny_check needs m ∈ {2, 3, 4}"));
    }
    if n_grid == 0 || n_grid > 4096 {
        return Err(Error::invalid("funny_check grid must lie in [1, 4096]"));
    }
    let n = n_grid;
    let nn = n * n;
    let triple = |l: u64, i: u64, j: u64| {
        [Rational::ratio(l as i64, n as i64), Rational::ratio(i as i64, n as i64), Rational::ratio(j as i64, n as i64)]
    };
    let mf = Rational::from_integer(m as i64);
    let big_f: Vec<Rational> = (0..=n)
        .map(|l| Ok(&mf * &omega_exact_rational(m, &Rational::ratio(l as i64, n as i64))?))
        .collect::<Result<_>>()?;
    let mut checked = 0u64;

    if f.is_exact() {
        let fine: Vec<Rational> = (0..=nn)
            .map(|j| f.eval_exact(&Rational::ratio(j as i64, nn as i64)).map(|v| v.expect("exact kind")))
            .collect::<Result<_>>()?;
        let mut d = BigInt::from(1);
        for v in fine.iter().chain(&big_f) {
            d = d.lcm(v.denom());
        }
        let scale = |v: &Rational| v.numer() * (&d / v.denom());
        let fz: Vec<BigInt> = fine.iter().map(scale).collect();
        let bz: Vec<BigInt> = big_f.iter().map(scale).collect();
        let nb = BigInt::from(n);
        let mut worst: Option<(BigInt, [u64; 3])> = None;
        let mut first = None;
        for l in 0..=n {
            for i in 0..=n {
                for j in i..=n {
                    checked += 1;
                    // N·D times the slack
                    let s = &fz[(i * n) as usize] * BigInt::from(l) + &fz[(j * n) as usize] * BigInt::from(n - l)
                        + &bz[l as usize] * BigInt::from(j - i)
                        - &fz[(l * i + (n - l) * j) as usize] * &nb;
                    if first.is_none() && s < BigInt::from(0) {
                        first = Some(triple(l, i, j));
                    }
                    if worst.as_ref().is_none_or(|(w, _)| s < *w) {
                        worst = Some((s, [l, i, j]));
                    }
                }
            }
        }
        let (w, [l, i, j]) = worst.expect("grid is non-empty");
        let min_slack = Rational::new(w, &d * &nb).expect("positive denominator");
        return Ok(FunnyReport {
            function: f.to_string(),
            m,
            n_grid,
            exact: true,
            checked,
            pass: first.is_none(),
            min_slack: Value::Exact(min_slack),
            at: triple(l, i, j),
            first_violation: first,
        });
    }

    let fine: Vec<BoundedValue> = (0..=nn).map(|j| f.eval_f64(j as f64 / nn as f64)).collect::<Result<_>>()?;
    let bf: Vec<f64> = big_f.iter().map(Rational::to_f64).collect();
    let mut worst = (f64::INFINITY, [0, 0, 0], 0.0);
    let mut first = None;
    for l in 0..=n {
        let lam = l as f64 / n as f64;
        for i in 0..=n {
            for j in i..=n {
                checked += 1;
                let (fx, fy, fp) = (&fine[(i * n) as usize], &fine[(j * n) as usize], &fine[(l * i + (n - l) * j) as usize]);
                let s = lam * fx.value + (1.0 - lam) * fy.value + (j - i) as f64 / n as f64 * bf[l as usize] - fp.value;
                let err = fx.error_bound + fy.error_bound + fp.error_bound + 8.0 * f64::EPSILON;
                if first.is_none() && s < -super::DEFAULT_TOL {
                    first = Some(triple(l, i, j));
                }
                if s < worst.0 {
                    worst = (s, [l, i, j], err);
                }
            }
        }
    }
    let [l, i, j] = worst.1;
    Ok(FunnyReport {
        function: f.to_string(),
        m,
        n_grid,
        exact: false,
        checked,
        pass: first.is_none(),
        min_slack: Value::Approx(BoundedValue::new(worst.0, worst.2)),
        at: triple(l, i, j),
        first_violation: first,
    })
}

/// `W_{r+1}(x + y) ≤ W_r(x) + W_r(y) + |x - y|` with `W_r(n) = 2^r ω_2(n/2^r)`,
/// the cleared-denominator form of the dyadic Boros–Páles inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BpReport {
    pub r_max: u32,
    pub pairs: u64,
    pub min_slack: i64,
    /// `(r, x, y)` attaining the minimum slack.
    pub at: (u32, u64, u64),
    pub first_violation: Option<(u32, u64, u64)>,
    pub pass: bool,
}

/// Checks every `r ≤ r_max` and every pair `0 ≤ x ≤ y ≤ 2^r`.
pub fn bp_dyadic_check(r_max: u32) -> Result<BpReport> {
    if r_max > 14 {
        return Err(Error::invalid("dyadic check supports r ≤ 14"));
    }
    let mut pairs = 0;
    let mut worst = (i64::MAX, (0, 0, 0));
    let mut first = None;
    for r in 0..=r_max {
        let size = 1u64 << r;
        let lo: Vec<i64> = (0..=size).map(|x| omega_scaled_u64(2, x as i64, r) as i64).collect();
        let hi: Vec<i64> = (0..=2 * size).map(|x| omega_scaled_u64(2, x as i64, r + 1) as i64).collect();
        for x in 0..=size {
            for y in x..=size {
                pairs += 1;
                let s = lo[x as usize] + lo[y as usize] + (y - x) as i64 - hi[(x + y) as usize];
                if s < 0 && first.is_none() {
                    first = Some((r, x, y));
                }
                if s < worst.0 {
                    worst = (s, (r, x, y));
                }
            }
        }
    }
    Ok(BpReport { r_max, pairs, min_slack: worst.0, at: worst.1, pass: first.is_none(), first_violation: first })
}

/// `T_r(x + y + z) ≤ T_{r-1}(x) + T_{r-1}(y) + T_{r-1}(z) + (z - x)` over
/// integers `x ≤ y ≤ z` in `[-range, range]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bp3Report {
    pub r_max: u32,
    pub range: i64,
    pub checked: u64,
    pub min_slack: i64,
    /// `(r, x, y, z)` attaining the minimum slack.
    pub at: (u32, i64, i64, i64),
    pub first_violation: Option<(u32, i64, i64, i64)>,
    pub pass: bool,
}

pub fn bp3_integer_check(r_max: u32, range: i64) -> Result<Bp3Report> {
    if r_max == 0 || r_max > 20 {
        return Err(Error::invalid("bp3 check needs r_max ∈ [1, 20]"));
    }
    if !(0..=100_000).contains(&range) {
        return Err(Error::invalid("bp3 range must lie in [0, 100000]"));
    }
    let mut checked = 0;
    let mut worst = (i64::MAX, (0, 0, 0, 0));
    let mut first = None;
    for r in 1..=r_max {
        let (p_hi, p_lo) = (3i64.pow(r), 3i64.pow(r - 1));
        let hi: Vec<i64> = (0..p_hi).map(|n| t3(r, n)).collect();
        let lo: Vec<i64> = (0..p_lo).map(|n| t3(r - 1, n)).collect();
        let t_hi = |n: i64| hi[n.rem_euclid(p_hi) as usize];
        let t_lo = |n: i64| lo[n.rem_euclid(p_lo) as usize];
        for x in -range..=range {
            for y in x..=range {
                let partial = t_lo(x) + t_lo(y) - x;
                for z in y..=range {
                    checked += 1;
                    let s = partial + t_lo(z) + z - t_hi(x + y + z);
                    if s < 0 && first.is_none() {
                        first = Some((r, x, y, z));
                    }
                    if s < worst.0 {
                        worst = (s, (r, x, y, z));
                    }
                }
            }
        }
    }
    Ok(Bp3Report { r_max, range, checked, min_slack: worst.0, at: worst.1, pass: first.is_none(), first_violation: first })
}

/// `f(ξ^k) ≤ k ξ^{k-1}` for `f = (m - 1) ω_m`, `ξ = i/grid`, `k ≤ k_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KpowReport {
    pub m: u64,
    pub grid: u64,
    pub k_max: u32,
    pub checked: u64,
    pub min_slack: f64,
    /// `(ξ, k)` attaining the minimum slack.
    pub at: (Rational, u32),
    pub first_violation: Option<(Rational, u32)>,
    pub pass: bool,
}

pub fn kpow_check(m: u64, grid: u64, k_max: u32) -> Result<KpowReport> {
    if !(2..=4).contains(&m) {
        return Err(Error::invalid("kpow_check needs m ∈ {2, 3, 4}"));
    }
    if grid == 0 || k_max == 0 {
        return Err(Error::invalid("kpow_check needs grid ≥ 1 and k_max ≥ 1"));
    }
    let terms = terms_for_tolerance(m, 1e-13);
    let mut checked = 0;
    let mut worst = (f64::INFINITY, (Rational::zero(), 0));
    let mut first = None;
    for i in 1..=grid {
        let xi = i as f64 / grid as f64;
        for k in 1..=k_max {
            checked += 1;
            let w = omega_float(m, xi.powi(k as i32), terms)?;
            let lhs = (m - 1) as f64 * (w.value + w.error_bound);
            let s = k as f64 * xi.powi(k as i32 - 1) - lhs;
            let at = (Rational::ratio(i as i64, grid as i64), k);
            if s < -super::DEFAULT_TOL && first.is_none() {
                first = Some(at.clone());
            }
            if s < worst.0 {
                worst = (s, at);
            }
        }
    }
    Ok(KpowReport { m, grid, k_max, checked, min_slack: worst.0, at: worst.1, pass: first.is_none(), first_violation: first })
}
