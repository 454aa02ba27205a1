use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{BoundedValue, Rational, Value};
use crate::takagi::{omega_exact_rational, table_size, OmegaTable};

/// Two-sided bracket on the extremal function `F_m` at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeBracket {
    pub m: u64,
    pub x: Rational,
    pub lower: Value,
    pub upper: Value,
    /// `lower = upper = F_m(x)`; only for `m ∈ {2, 3, 4}`.
    pub exact: bool,
}

/// `F_m(x)` exactly for `m ∈ {2, 3, 4}` (where `F_m = m ω_m`), otherwise the
/// tightest bracket from the entropy lower bound and the upper bounds
/// `m ω_m`, `m/(m-1)`, the two-level refinement, and `(m/(m-1)) e x ln(e/x)`.
pub fn envelope(m: u64, x: &Rational) -> Result<EnvelopeBracket> {
    if m < 2 {
        return Err(Error::invalid("envelope needs m ≥ 2"));
    }
    if x.is_negative() || *x > Rational::one() {
        return Err(Error::invalid(format!("argument {x} outside [0, 1]")));
    }
    let mf = Rational::from_integer(m as i64);
    if m <= 4 {
        let v = &mf * &omega_exact_rational(m, x)?;
        return Ok(EnvelopeBracket { m, x: x.clone(), lower: Value::Exact(v.clone()), upper: Value::Exact(v), exact: true });
    }
    if x.is_zero() || *x == Rational::one() {
        let z = Value::Exact(Rational::zero());
        return Ok(EnvelopeBracket { m, x: x.clone(), lower: z.clone(), upper: z, exact: false });
    }
    let xf = x.to_f64();
    let lower = entropy_bound(xf, 1.0, E);
    let analytic = entropy_bound(xf, E, m as f64 / (m as f64 - 1.0) * E);
    let exact_upper = refined_upper_bound(m, x)?;
    let upper = if exact_upper.to_f64() <= analytic.lo() {
        Value::Exact(exact_upper)
    } else {
        Value::Approx(analytic)
    };
    Ok(EnvelopeBracket { m, x: x.clone(), lower: Value::Approx(lower), upper, exact: false })
}

fn entropy_bound(x: f64, a: f64, c: f64) -> BoundedValue {
    let l = (a / x).ln();
    let v = c * x * l;
    BoundedValue::new(v, 8.0 * f64::EPSILON * (v.abs() + c * x * (l.abs() + 1.0)))
}

/// Pointwise upper bound for members of `F_m`: `min(m ω_m(y), m/(m-1))`,
/// tightened to 1 on multiples of `1/m`, and 0 at the endpoints.
fn basic_upper(m: u64, y: &Rational) -> Result<Rational> {
    if y.is_zero() || *y == Rational::one() {
        return Ok(Rational::zero());
    }
    let mf = Rational::from_integer(m as i64);
    let mut b = (&mf * &omega_exact_rational(m, y)?).min(Rational::ratio(m as i64, m as i64 - 1));
    if (y * &mf).is_integer() {
        b = b.min(Rational::one());
    }
    Ok(b)
}

/// Best bound from the defining inequality applied to two-level tuples:
/// `m - c` copies of `a ∈ {0, 1/m, …, 1}` and `c` copies of the value `b`
/// that puts the mean at `x`. Always at most `min(m ω_m(x), m/(m-1))`.
pub fn refined_upper_bound(m: u64, x: &Rational) -> Result<Rational> {
    let mut best = basic_upper(m, x)?;
    let mf = Rational::from_integer(m as i64);
    let mx = &mf * x;
    for c in 1..m {
        let cf = Rational::from_integer(c as i64);
        let rest = Rational::from_integer((m - c) as i64);
        for j in 0..=m {
            let a = Rational::ratio(j as i64, m as i64);
            let b = &(&mx - &(&rest * &a)) / &cf;
            if b.is_negative() || b > Rational::one() || b == a {
                continue;
            }
            let avg = &(&(&rest * &basic_upper(m, &a)?) + &(&cf * &basic_upper(m, &b)?)) / &mf;
            let cand = avg + (&b - &a).abs();
            best = best.min(cand);
        }
    }
    Ok(best)
}

/// `m ω_m` at `4/m²` against the two-level bound there.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub m: u64,
    pub x: Rational,
    /// `m ω_m(4/m²)`.
    pub m_omega: Rational,
    pub upper_bound: Rational,
    /// `m ω_m(4/m²) > upper_bound`, so `m ω_m ∉ F_m`.
    pub separated: bool,
}

pub fn separation_check(m: u64) -> Result<Separation> {
    if m < 5 {
        return Err(Error::invalid("separation at 4/m² needs m ≥ 5"));
    }
    let x = Rational::ratio(4, (m * m) as i64);
    let m_omega = &Rational::from_integer(m as i64) * &omega_exact_rational(m, &x)?;
    let upper_bound = refined_upper_bound(m, &x)?;
    let separated = m_omega > upper_bound;
    Ok(Separation { m, x, m_omega, upper_bound, separated })
}

/// Propagates `U_0 ≡ 0` through the `m`-adic refinement
/// `U_ℓ(t + ρ/m) = ((m-ρ) U_{ℓ-1}(t) + ρ U_{ℓ-1}(t + 1))/m + 1/m^{ℓ-1}` on the
/// grid of step `m^{-ℓ}` (plain rescaling at multiples of `1/m`). The table
/// holds `m^r U_r(n/m^r)`, which equals `m^r · m ω_m(n/m^r)`.
pub fn envelope_grid_propagate(m: u64, r: u32, max_entries: u64) -> Result<OmegaTable> {
    if m < 2 {
        return Err(Error::invalid("envelope propagation needs m ≥ 2"));
    }
    table_size(m, r, max_entries)?;
    let mut prev: Vec<u64> = vec![0, 0];
    for _ in 0..r {
        let len = (prev.len() as u64 - 1) * m + 1;
        let next: Vec<u64> = (0..len)
            .map(|n| {
                let (t, rho) = ((n / m) as usize, n % m);
                if rho == 0 {
                    m * prev[t]
                } else {
                    (m - rho) * prev[t] + rho * prev[t + 1] + m
                }
            })
            .collect();
        prev = next;
    }
    Ok(OmegaTable { m, r, values: prev })
}
