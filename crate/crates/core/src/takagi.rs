//! Generalized Takagi functions
//! `ω_m(x) = Σ_{k≥0} m^{-k} ‖m^k x‖_{1/m}`, where `‖y‖_α` is the distance
//! from `y` to the nearest integer truncated at `α`.
//!
//! Three evaluation routes are provided:
//!
//! * m-adic points `n/m^r`, where the series is a finite sum and
//!   `m^r ω_m(n/m^r)` is the integer `Σ_{j=1}^r min(n mod m^j, m^j - n mod m^j, m^{j-1})`;
//! * arbitrary rationals, where the orbit of `x` under `x ↦ mx mod 1` is
//!   eventually periodic and the series sums to a closed form;
//! * doubles, summed to a fixed number of terms with a certified error radius.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fmt_f64, BoundedValue, Rational};

fn check_m(m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid(format!("m must be at least 2, got {m}")));
    }
    Ok(())
}

/// `min(‖x‖, alpha)` for `alpha ∈ (0, 1]`.
pub fn trunc_dist(x: &Rational, alpha: &Rational) -> Result<Rational> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(Error::invalid(format!("truncation level {alpha} outside (0, 1]")));
    }
    let f = x.frac_mod1();
    let g = Rational::one() - &f;
    Ok(f.min(g).min(alpha.clone()))
}

/// `m^r`, or `None` on `u64` overflow.
pub fn checked_pow(m: u64, r: u32) -> Option<u64> {
    m.checked_pow(r)
}

/// `m^r · ω_m(n/m^r)` for machine-sized arguments. Requires `m^r` to fit in
/// `u64`; `n` may be any integer.
pub fn omega_scaled_u64(m: u64, n: i64, r: u32) -> u64 {
    let mut total = 0u64;
    let mut pj = 1u64; // m^{j-1}
    for _ in 0..r {
        let next = pj * m;
        let a = n.rem_euclid(next as i64) as u64;
        total += a.min(next - a).min(pj);
        pj = next;
    }
    total
}

/// `m^r · ω_m(n/m^r)` as an exact integer.
pub fn omega_madic_scaled(m: u64, n: &BigInt, r: u32) -> Result<BigInt> {
    check_m(m)?;
    if let (Some(_), Some(n64)) = (checked_pow(m, r).filter(|&p| p <= i64::MAX as u64), n.to_i64()) {
        return Ok(BigInt::from(omega_scaled_u64(m, n64, r)));
    }
    let mb = BigInt::from(m);
    let mut total = BigInt::zero();
    let mut pj = BigInt::one();
    for _ in 0..r {
        let next = &pj * &mb;
        let a = n.mod_floor(&next);
        let b = &next - &a;
        total += a.min(b).min(pj.clone());
        pj = next;
    }
    Ok(total)
}

/// Exact `ω_m(n/m^r)`.
pub fn omega_exact_madic(m: u64, n: impl Into<BigInt>, r: u32) -> Result<Rational> {
    let scaled = omega_madic_scaled(m, &n.into(), r)?;
    Ok(Rational::ratio(scaled, BigInt::from(m).pow(r)))
}

/// Exact `ω_m(x)` at any rational `x`.
///
/// With `x mod 1 = p/q`, the residues `a_0 = p`, `a_{k+1} = m a_k mod q`
/// repeat after at most `q` steps. If `a_i = a_j` is the first repeat, the
/// series splits into a finite prefix (`k < i`) and a geometric repetition of
/// the block `i ≤ k < j`.
pub fn omega_exact_rational(m: u64, x: &Rational) -> Result<Rational> {
    check_m(m)?;
    let f = x.frac_mod1();
    if f.is_zero() {
        return Ok(Rational::zero());
    }
    let q = f.denom().clone();
    let p = f.numer().clone();
    match (p.to_u64(), q.to_u64()) {
        (Some(p), Some(q)) if (q as u128) * (m as u128) < (1u128 << 63) => {
            Ok(orbit_sum_u64(m, p, q))
        }
        _ => Ok(orbit_sum_big(m, p, q)),
    }
}

/// Closed form from the eventually periodic orbit: with prefix Horner sum `P`,
/// cycle Horner sum `C`, cycle length `c` and prefix length `i`, the value is
/// `(P (m^c - 1) + C) / ((m^c - 1) q m^i)`, where each term carries the
/// numerator `min(a m, (q - a) m, q)` over `q m`.
fn finish_orbit<T: Clone>(m: u64, q: BigInt, terms: &[T], cycle_start: usize) -> Rational
where
    BigInt: From<T>,
{
    let mb = <BigInt as From<u64>>::from(m);
    let horner = |block: &[T]| {
        block
            .iter()
            .fold(BigInt::zero(), |acc, g| acc * &mb + BigInt::from(g.clone()))
    };
    let prefix = horner(&terms[..cycle_start]);
    let cycle = horner(&terms[cycle_start..]);
    let period = (terms.len() - cycle_start) as u32;
    let geo = mb.pow(period) - 1u32;
    let numer = prefix * &geo + cycle;
    let denom = geo * q * mb.pow(cycle_start as u32);
    Rational::ratio(numer, denom)
}

fn orbit_sum_u64(m: u64, p: u64, q: u64) -> Rational {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut terms = Vec::new();
    let mut a = p;
    let cycle_start = loop {
        if let Some(&i) = seen.get(&a) {
            break i;
        }
        seen.insert(a, terms.len());
        terms.push((a * m).min((q - a) * m).min(q));
        a = (a * m) % q;
    };
    finish_orbit(m, BigInt::from(q), &terms, cycle_start)
}

fn orbit_sum_big(m: u64, p: BigInt, q: BigInt) -> Rational {
    let mb = BigInt::from(m);
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut terms: Vec<BigInt> = Vec::new();
    let mut a = p;
    let cycle_start = loop {
        if let Some(&i) = seen.get(&a) {
            break i;
        }
        seen.insert(a.clone(), terms.len());
        let am = &a * &mb;
        let bm = (&q - &a) * &mb;
        terms.push(am.clone().min(bm).min(q.clone()));
        a = am.mod_floor(&q);
    };
    finish_orbit(m, q, &terms, cycle_start)
}

/// Partial sum of the first `terms` terms of `ω_m(x)`.
///
/// The double `x` is an exact dyadic rational, so the orbit `m^k x mod 1` is
/// tracked exactly on integers and only the individual terms are rounded.
/// The error radius is the series tail `m^{-terms}/(m-1)` plus a rounding
/// allowance of `(terms + 3)·ε·value`, which vanishes when the value is 0.
pub fn omega_float(m: u64, x: f64, terms: u32) -> Result<BoundedValue> {
    check_m(m)?;
    if terms == 0 {
        return Err(Error::invalid("omega_float needs at least one term"));
    }
    if !x.is_finite() {
        return Err(Error::invalid(format!("non-finite argument {x}")));
    }
    let mf = m as f64;
    let tail = mf.powi(-(terms as i32)) / (mf - 1.0);
    let y = x.abs();
    let y = y - y.floor();
    let value = if y == 0.0 { 0.0 } else { float_partial_sum(m, y, terms) };
    let rounding = (terms as f64 + 3.0) * f64::EPSILON * value;
    Ok(BoundedValue::new(value, tail + rounding))
}

fn float_partial_sum(m: u64, y: f64, terms: u32) -> f64 {
    // y = mant · 2^exp with exp < 0 since 0 < y < 1.
    let bits = y.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    let (mant, exp) = if exp_field == 0 {
        (bits & ((1u64 << 52) - 1), -1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), exp_field - 1075)
    };
    let shift = (-exp) as u32;
    let m_bits = 64 - m.leading_zeros();
    let mf = m as f64;
    if shift + m_bits <= 126 {
        let d = 1u128 << shift;
        let (mm, mut a) = (m as u128, mant as u128);
        let scale = (d as f64) * mf;
        let (mut sum, mut w) = (0.0, 1.0);
        for _ in 0..terms {
            if a == 0 {
                break;
            }
            let g = (a * mm).min((d - a) * mm).min(d);
            sum += w * (g as f64 / scale);
            w /= mf;
            a = (a * mm) % d;
        }
        sum
    } else {
        let d = BigUint::one() << shift;
        let mm = BigUint::from(m);
        let mut a = BigUint::from(mant);
        let scale = d.to_f64().unwrap_or(f64::INFINITY) * mf;
        let (mut sum, mut w) = (0.0, 1.0);
        for _ in 0..terms {
            if a.is_zero() {
                break;
            }
            let am = &a * &mm;
            let g = am.clone().min((&d - &a) * &mm).min(d.clone());
            sum += w * (g.to_f64().unwrap_or(0.0) / scale);
            w /= mf;
            a = am % &d;
        }
        sum
    }
}

/// Number of series terms after which the tail of `ω_m` is below `tol`.
pub fn terms_for_tolerance(m: u64, tol: f64) -> u32 {
    let mf = m as f64;
    let mut k = 1u32;
    while mf.powi(-(k as i32)) / (mf - 1.0) >= tol && k < 2000 {
        k += 1;
    }
    k
}

/// `T_r(n) = Σ_{k=1}^r 3^k ‖3^{-k} n‖_{1/3} = 3^r ω_3(n/3^r)`.
///
/// Panics if `r > 39` (the value would overflow `i64`).
pub fn t3(r: u32, n: i64) -> i64 {
    assert!(r <= 39, "t3: r = {r} overflows i64");
    let mut total = 0i64;
    let mut pj = 1i64;
    for _ in 0..r {
        let next = pj * 3;
        let a = n.rem_euclid(next);
        total += a.min(next - a).min(pj);
        pj = next;
    }
    total
}

/// `δ_3(n)` together with the representatives `ξ_n ∈ {-1,0,1}` and
/// `ζ_n ∈ {-2,0,2}` of `n mod 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueMarks {
    pub delta3: i64,
    pub xi: i64,
    pub zeta: i64,
}

pub fn residue_marks(n: i64) -> ResidueMarks {
    match n.rem_euclid(3) {
        0 => ResidueMarks { delta3: 0, xi: 0, zeta: 0 },
        1 => ResidueMarks { delta3: 1, xi: 1, zeta: -2 },
        _ => ResidueMarks { delta3: 1, xi: -1, zeta: 2 },
    }
}

/// `δ_m(n)`: 0 when `m | n`, else 1.
pub fn delta(m: u64, n: i64) -> i64 {
    i64::from(n.rem_euclid(m as i64) != 0)
}

/// `m^r ω_m(n/m^r)` for every `n ∈ [0, m^r]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaTable {
    pub m: u64,
    pub r: u32,
    /// `values[n] = m^r ω_m(n/m^r)`.
    pub values: Vec<u64>,
}

impl OmegaTable {
    pub fn new(m: u64, r: u32, max_entries: u64) -> Result<Self> {
        check_m(m)?;
        let size = table_size(m, r, max_entries)?;
        let values = (0..size).map(|n| omega_scaled_u64(m, n as i64, r)).collect();
        Ok(OmegaTable { m, r, values })
    }

    pub fn modulus(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> u64 {
        self.values[n as usize]
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.values.iter().enumerate().map(|(n, &v)| (n as u64, v))
    }
}

/// `m^r + 1`, checked against a budget.
pub(crate) fn table_size(m: u64, r: u32, max_entries: u64) -> Result<u64> {
    let size = checked_pow(m, r)
        .and_then(|p| p.checked_add(1))
        .filter(|&s| s <= max_entries)
        .ok_or_else(|| Error::BudgetExceeded {
            what: format!("table for m = {m}, r = {r}"),
            required: (m as u128).checked_pow(r).map_or(u128::MAX, |p| p + 1),
            budget: max_entries as u128,
        })?;
    Ok(size)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessHit {
    pub x: Rational,
    pub side: Side,
}

/// Worst margins of `ω_m` against its logarithmic envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub m: u64,
    pub grid_size: u64,
    /// Points evaluated, including the documented sharpness probes.
    pub points_checked: usize,
    pub worst_lower_margin: f64,
    pub worst_lower_at: Rational,
    pub worst_upper_margin: f64,
    pub worst_upper_at: Rational,
    pub sharpness_hits: Vec<SharpnessHit>,
    pub pass: bool,
}

/// Slack granted to the float side of the logarithmic bounds.
pub const BOUND_SLACK: f64 = 1e-12;

/// Lower and upper logarithmic envelopes of `ω_m` at `x ∈ (0, 1]`; both are
/// 0 at `x = 0`.
pub fn log_bounds(m: u64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    let ln_m = (m as f64).ln();
    let xlog = |c: f64| x * (c / x).ln() / ln_m;
    match m {
        2 | 4 => (xlog(1.0), xlog(4.0 / 3.0)),
        3 => (xlog(1.0), xlog(1.5)),
        _ => (xlog(std::f64::consts::E / m as f64), xlog(1.5)),
    }
}

/// Points where the bounds for `m ∈ {2,3,4}` are attained, for `k ≤ k_max`.
pub fn sharpness_probes(m: u64, k_max: u32) -> Vec<(Rational, Side)> {
    let mut probes = Vec::new();
    for k in 0..=k_max {
        match m {
            2 | 4 => {
                probes.push((Rational::ratio(1, BigInt::from(2).pow(k)), Side::Lower));
                // 2^{1-k}/3
                probes.push((Rational::ratio(2, BigInt::from(3) * BigInt::from(2).pow(k)), Side::Upper));
            }
            3 => {
                probes.push((Rational::ratio(1, BigInt::from(3).pow(k + 1)), Side::Lower));
                probes.push((Rational::ratio(1, BigInt::from(2) * BigInt::from(3).pow(k)), Side::Upper));
            }
            _ => {}
        }
    }
    probes.retain(|(x, _)| x.is_positive() && *x <= Rational::one());
    probes
}

/// Checks the logarithmic bounds at `i/grid_size`, `i ∈ [1, grid_size]`,
/// and at the sharpness probes with `k ≤ 6`. `ω_m` is exact; the bound side is
/// a double with [`BOUND_SLACK`] allowed in its favour.
pub fn bounds_check(m: u64, grid_size: u64) -> Result<BoundsReport> {
    check_m(m)?;
    if grid_size < 2 {
        return Err(Error::invalid("grid_size must be at least 2"));
    }
    let mut points: Vec<Rational> = (1..=grid_size).map(|i| Rational::ratio(i, grid_size)).collect();
    points.extend(sharpness_probes(m, 6).into_iter().map(|(x, _)| x));
    points.sort();
    points.dedup();

    let mut report = BoundsReport {
        m,
        grid_size,
        points_checked: points.len(),
        worst_lower_margin: f64::INFINITY,
        worst_lower_at: Rational::zero(),
        worst_upper_margin: f64::INFINITY,
        worst_upper_at: Rational::zero(),
        sharpness_hits: Vec::new(),
        pass: true,
    };
    for x in points {
        let omega = omega_exact_rational(m, &x)?.to_f64();
        let (lo, hi) = log_bounds(m, x.to_f64());
        let (lower_margin, upper_margin) = (omega - lo, hi - omega);
        if lower_margin < report.worst_lower_margin {
            report.worst_lower_margin = lower_margin;
            report.worst_lower_at = x.clone();
        }
        if upper_margin < report.worst_upper_margin {
            report.worst_upper_margin = upper_margin;
            report.worst_upper_at = x.clone();
        }
        if lower_margin.abs() <= BOUND_SLACK {
            report.sharpness_hits.push(SharpnessHit { x: x.clone(), side: Side::Lower });
        }
        if upper_margin.abs() <= BOUND_SLACK {
            report.sharpness_hits.push(SharpnessHit { x: x.clone(), side: Side::Upper });
        }
    }
    report.pass = report.worst_lower_margin >= -BOUND_SLACK && report.worst_upper_margin >= -BOUND_SLACK;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub x: Rational,
    pub omega: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Rows `(x, ω_m(x), lower(x), upper(x))` at `x = i/resolution`.
pub fn plot_data(m: u64, resolution: u64) -> Result<Vec<PlotRow>> {
    check_m(m)?;
    if resolution < 2 {
        return Err(Error::invalid("resolution must be at least 2"));
    }
    (0..=resolution)
        .map(|i| {
            let x = Rational::ratio(i, resolution);
            let omega = omega_exact_rational(m, &x)?.to_f64();
            let (lower, upper) = log_bounds(m, x.to_f64());
            Ok(PlotRow { x, omega, lower, upper })
        })
        .collect()
}

/// CSV with header `x,omega,lower,upper`.
pub fn plot_csv(rows: &[PlotRow]) -> String {
    let mut out = String::from("x,omega,lower,upper\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.x,
            fmt_f64(row.omega),
            fmt_f64(row.lower),
            fmt_f64(row.upper)
        ));
    }
    out
}
