//! Functions on `[0, 1]` under the relaxed-convexity condition
//!
//! ```text
//! f((x_1 + … + x_m)/m) ≤ (f(x_1) + … + f(x_m))/m + (max x_i - min x_i)
//! ```
//!
//! together with `max{f(0), f(1)} ≤ 0`. The class of such `f` is `F_m`, and
//! `F_m` also names its pointwise-largest member. The positive part of
//! `f(mean) - mean(f) - (max - min)` is the *defect* of a tuple; one tuple with
//! positive defect certifies `f ∉ F_m`.

mod envelope;
mod inequalities;
mod refute;

pub use envelope::{envelope, envelope_grid_propagate, refined_upper_bound, separation_check, EnvelopeBracket, Separation};
pub use inequalities::{
    bp3_integer_check, bp_dyadic_check, cyclic_variation, cyclic_variation_f64, funny_check, kpow_check, Bp3Report,
    BpReport, FunnyReport, KpowReport,
};
pub use refute::{grid_membership_scan, refute_membership, multiset_count, RefuteConfig, ScanReport};

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fmt_f64, BoundedValue, Rational, Value};
use crate::takagi::{omega_exact_rational, omega_float, terms_for_tolerance};

/// Default tolerance for float-path comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    /// `scale · ω_m`.
    ScaledOmega { m: u64, scale: Rational },
    /// `e x ln(1/x)`, with value 0 at 0.
    Entropy,
    /// `(m/(m-1)) e x ln(e/x)`, with value 0 at 0.
    FmUpperEnv { m: u64 },
    /// Polynomial `Σ c_i x^i`, certified convex on `[0, 1]`.
    ConvexPoly { coeffs: Vec<Rational> },
    /// Linear interpolation through breakpoints whose abscissae run from 0 to 1.
    PiecewiseLinear { points: Vec<(Rational, Rational)> },
}

/// A catalog function, optionally shifted by a constant on the open interval
/// `(0, 1)` (endpoint values unchanged).
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSpec {
    kind: FunctionKind,
    interior_offset: Rational,
}

impl FunctionSpec {
    pub fn scaled_omega(m: u64, scale: Rational) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("scaled_omega needs m ≥ 2"));
        }
        Ok(Self::from_kind(FunctionKind::ScaledOmega { m, scale }))
    }

    /// `m ω_m`, the extremal function for `m ∈ {2, 3, 4}`.
    pub fn m_omega(m: u64) -> Result<Self> {
        Self::scaled_omega(m, Rational::from_integer(m as i64))
    }

    pub fn entropy() -> Self {
        Self::from_kind(FunctionKind::Entropy)
    }

    pub fn fm_upper_env(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("fm_upper_env needs m ≥ 2"));
        }
        Ok(Self::from_kind(FunctionKind::FmUpperEnv { m }))
    }

    /// Accepts the polynomial only if the Bernstein coefficients of its second
    /// derivative on `[0, 1]` are all non-negative, which certifies convexity.
    pub fn convex_poly(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("polynomial needs at least one coefficient"));
        }
        if !second_derivative_bernstein_nonneg(&coeffs) {
            return Err(Error::invalid("polynomial convexity on [0, 1] could not be certified"));
        }
        Ok(Self::from_kind(FunctionKind::ConvexPoly { coeffs }))
    }

    pub fn piecewise_linear(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("piecewise-linear function needs at least two breakpoints"));
        }
        if !points[0].0.is_zero() || points.last().unwrap().0 != Rational::one() {
            return Err(Error::invalid("breakpoints must start at x = 0 and end at x = 1"));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("breakpoint abscissae must be strictly increasing"));
        }
        Ok(Self::from_kind(FunctionKind::PiecewiseLinear { points }))
    }

    fn from_kind(kind: FunctionKind) -> Self {
        FunctionSpec { kind, interior_offset: Rational::zero() }
    }

    pub fn with_interior_offset(mut self, offset: Rational) -> Self {
        self.interior_offset = offset;
        self
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn interior_offset(&self) -> &Rational {
        &self.interior_offset
    }

    /// Whether values at rationals are available exactly.
    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, FunctionKind::Entropy | FunctionKind::FmUpperEnv { .. })
    }

    /// `max{f(0), f(1)} ≤ 0`.
    pub fn boundary_condition_holds(&self) -> bool {
        [Rational::zero(), Rational::one()].iter().all(|x| match self.eval(x) {
            Ok(Value::Exact(v)) => !v.is_positive(),
            Ok(Value::Approx(b)) => b.hi() <= 0.0,
            Err(_) => false,
        })
    }

    /// Exact value, or `None` for float-only kinds.
    pub fn eval_exact(&self, x: &Rational) -> Result<Option<Rational>> {
        check_unit(x)?;
        let base = match &self.kind {
            FunctionKind::ScaledOmega { m, scale } => scale * &omega_exact_rational(*m, x)?,
            FunctionKind::ConvexPoly { coeffs } => {
                coeffs.iter().rev().fold(Rational::zero(), |acc, c| &(&acc * x) + c)
            }
            FunctionKind::PiecewiseLinear { points } => {
                let i = points.partition_point(|(px, _)| px <= x).clamp(1, points.len() - 1);
                let (x0, y0) = &points[i - 1];
                let (x1, y1) = &points[i];
                y0 + &(&(y1 - y0) * &(&(x - x0) / &(x1 - x0)))
            }
            FunctionKind::Entropy | FunctionKind::FmUpperEnv { .. } => return Ok(None),
        };
        Ok(Some(self.shift(base, x)))
    }

    fn shift(&self, base: Rational, x: &Rational) -> Rational {
        if self.interior_offset.is_zero() || x.is_zero() || *x == Rational::one() {
            base
        } else {
            base + &self.interior_offset
        }
    }

    /// `eval_f`: exact where the kind allows it, else a bounded double.
    pub fn eval(&self, x: &Rational) -> Result<Value> {
        match self.eval_exact(x)? {
            Some(v) => Ok(Value::Exact(v)),
            None => self.eval_f64(x.to_f64()).map(Value::Approx),
        }
    }

    /// Double evaluation with an error radius. The series for `ω_m` is
    /// truncated once its tail is below `1e-13`.
    pub fn eval_f64(&self, x: f64) -> Result<BoundedValue> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("argument {x} outside [0, 1]")));
        }
        let eps = f64::EPSILON;
        let base = match &self.kind {
            FunctionKind::ScaledOmega { m, scale } => {
                let w = omega_float(*m, x, terms_for_tolerance(*m, 1e-13))?;
                let s = scale.to_f64();
                let v = s * w.value;
                BoundedValue::new(v, s.abs() * w.error_bound + 2.0 * eps * v.abs())
            }
            FunctionKind::Entropy => xlog_bound(x, 1.0, E),
            FunctionKind::FmUpperEnv { m } => {
                let c = *m as f64 / (*m as f64 - 1.0) * E;
                xlog_bound(x, E, c)
            }
            FunctionKind::ConvexPoly { coeffs } => {
                let v = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64());
                let mag: f64 = coeffs.iter().map(|c| c.to_f64().abs()).sum();
                BoundedValue::new(v, 4.0 * (coeffs.len() as f64 + 1.0) * eps * mag.max(1.0))
            }
            FunctionKind::PiecewiseLinear { points } => {
                let i = points.partition_point(|(px, _)| px.to_f64() <= x).clamp(1, points.len() - 1);
                let (x0, y0) = (points[i - 1].0.to_f64(), points[i - 1].1.to_f64());
                let (x1, y1) = (points[i].0.to_f64(), points[i].1.to_f64());
                let v = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
                BoundedValue::new(v, 8.0 * eps * (y0.abs() + y1.abs()).max(1.0))
            }
        };
        if self.interior_offset.is_zero() || x == 0.0 || x == 1.0 {
            Ok(base)
        } else {
            let off = self.interior_offset.to_f64();
            Ok(BoundedValue::new(base.value + off, base.error_bound + eps * (base.value.abs() + off.abs())))
        }
    }
}

/// `c · x · ln(a/x)` with value 0 at `x = 0`, plus an error radius covering
/// rounding in the logarithm and products.
fn xlog_bound(x: f64, a: f64, c: f64) -> BoundedValue {
    if x == 0.0 || x == a {
        return BoundedValue::exact(0.0);
    }
    let l = (a / x).ln();
    let v = c * x * l;
    let err = 8.0 * f64::EPSILON * (v.abs() + c * x * (l.abs() + 1.0));
    BoundedValue::new(v, err)
}

fn check_unit(x: &Rational) -> Result<()> {
    if x.is_negative() || *x > Rational::one() {
        return Err(Error::invalid(format!("argument {x} outside [0, 1]")));
    }
    Ok(())
}

/// Bernstein coefficients of `p''` on `[0, 1]` are all non-negative.
fn second_derivative_bernstein_nonneg(coeffs: &[Rational]) -> bool {
    if coeffs.len() <= 2 {
        return true;
    }
    // p''(x) = Σ_{i≥2} i (i-1) c_i x^{i-2}
    let second: Vec<Rational> = coeffs
        .iter()
        .enumerate()
        .skip(2)
        .map(|(i, c)| c * &Rational::from_integer((i * (i - 1)) as i64))
        .collect();
    let n = second.len() - 1;
    // b_j = Σ_{i≤j} C(j,i)/C(n,i) a_i
    (0..=n).all(|j| {
        let b: Rational = (0..=j)
            .map(|i| &second[i] * &Rational::ratio(binom(j, i), binom(n, i)))
            .sum();
        !b.is_negative()
    })
}

fn binom(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FunctionKind::ScaledOmega { m, scale } => write!(f, "scaled_omega:m={m},scale={scale}")?,
            FunctionKind::Entropy => write!(f, "entropy")?,
            FunctionKind::FmUpperEnv { m } => write!(f, "fm_upper_env:m={m}")?,
            FunctionKind::ConvexPoly { coeffs } => {
                let cs: Vec<String> = coeffs.iter().map(Rational::to_string).collect();
                write!(f, "poly:c={}", cs.join(";"))?
            }
            FunctionKind::PiecewiseLinear { points } => {
                let ps: Vec<String> = points.iter().map(|(x, y)| format!("{x},{y}")).collect();
                write!(f, "pwl:{}", ps.join(";"))?
            }
        }
        if !self.interior_offset.is_zero() {
            let sep = if matches!(self.kind, FunctionKind::Entropy) { ":" } else { "," };
            write!(f, "{sep}interior={}", self.interior_offset)?;
        }
        Ok(())
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses catalog literals:
/// `scaled_omega:m=2,scale=2`, `entropy`, `fm_upper_env:m=5`,
/// `poly:c=0;-1;1`, `pwl:0,0;1/2,1;1,0`. Every kind except `pwl` also takes
/// `interior=<rational>`.
impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        if name == "pwl" {
            return FunctionSpec::piecewise_linear(parse_points(params, ';', ',')?);
        }
        let mut m = None;
        let mut scale = None;
        let mut coeffs = None;
        let mut interior = Rational::zero();
        for kv in params.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value in {kv:?}")))?;
            match k.trim() {
                "m" => m = Some(v.trim().parse::<u64>().map_err(|_| Error::invalid(format!("bad m in {s:?}")))?),
                "scale" => scale = Some(v.parse::<Rational>()?),
                "c" => coeffs = Some(v.split(';').map(str::parse).collect::<Result<Vec<Rational>>>()?),
                "interior" => interior = v.parse()?,
                other => return Err(Error::invalid(format!("unknown parameter {other:?} in {s:?}"))),
            }
        }
        let need_m = || m.ok_or_else(|| Error::invalid(format!("{name} needs m=<integer>")));
        let spec = match name {
            "scaled_omega" => {
                let m = need_m()?;
                FunctionSpec::scaled_omega(m, scale.unwrap_or_else(|| Rational::from_integer(m as i64)))?
            }
            "entropy" => FunctionSpec::entropy(),
            "fm_upper_env" => FunctionSpec::fm_upper_env(need_m()?)?,
            "poly" | "convex_poly" => {
                FunctionSpec::convex_poly(coeffs.ok_or_else(|| Error::invalid("poly needs c=<c0;c1;…>"))?)?
            }
            other => return Err(Error::invalid(format!("unknown function kind {other:?}"))),
        };
        Ok(spec.with_interior_offset(interior))
    }
}

fn parse_points(text: &str, row_sep: char, col_sep: char) -> Result<Vec<(Rational, Rational)>> {
    text.split(row_sep)
        .map(str::trim)
        .filter(|row| !row.is_empty())
        .map(|row| {
            let (x, y) = row
                .split_once(col_sep)
                .ok_or_else(|| Error::invalid(format!("breakpoint {row:?} is not an x,y pair")))?;
            Ok((x.parse()?, y.parse()?))
        })
        .collect()
}

/// Reads breakpoints from CSV text, one `x,y` pair of rationals per line; a
/// header line `x,y` is skipped.
pub fn parse_points_csv(text: &str) -> Result<Vec<(Rational, Rational)>> {
    let body: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter(|l| l.replace(' ', "") != "x,y")
        .collect();
    parse_points(&body.join("\n"), '\n', ',')
}

/// A tuple together with its defect.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectWitness {
    pub m: u64,
    /// Sorted ascending.
    pub tuple: Vec<Rational>,
    pub defect: Value,
    /// Set only when the defect is an exact positive rational.
    pub certified: bool,
}

impl DefectWitness {
    pub fn new(m: u64, mut tuple: Vec<Rational>, defect: Value) -> Self {
        tuple.sort();
        let certified = matches!(&defect, Value::Exact(d) if d.is_positive());
        DefectWitness { m, tuple, defect, certified }
    }
}

impl Serialize for DefectWitness {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("DefectWitness", 4)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("tuple", &self.tuple)?;
        st.serialize_field("defect", &self.defect)?;
        st.serialize_field("certified", &self.certified)?;
        st.end()
    }
}

/// `f(mean) - mean(f) - (max - min)` over an `m`-tuple in `[0, 1]`.
pub fn defect(f: &FunctionSpec, m: u64, tuple: &[Rational]) -> Result<Value> {
    if tuple.len() as u64 != m || m < 2 {
        return Err(Error::invalid(format!("defect needs an m-tuple with m ≥ 2; got {} values for m = {m}", tuple.len())));
    }
    for x in tuple {
        check_unit(x)?;
    }
    let mf = Rational::from_integer(m as i64);
    let mean = &tuple.iter().sum::<Rational>() / &mf;
    let hi = tuple.iter().max().unwrap();
    let lo = tuple.iter().min().unwrap();
    let spread = hi - lo;
    if f.is_exact() {
        let mut total = Rational::zero();
        for x in tuple {
            total += f.eval_exact(x)?.expect("exact kind");
        }
        let at_mean = f.eval_exact(&mean)?.expect("exact kind");
        return Ok(Value::Exact(at_mean - &(&total / &mf) - spread));
    }
    let at_mean = f.eval_f64(mean.to_f64())?;
    let (mut sum, mut err) = (0.0, at_mean.error_bound);
    for x in tuple {
        let v = f.eval_f64(x.to_f64())?;
        sum += v.value;
        err += v.error_bound / m as f64;
    }
    let value = at_mean.value - sum / m as f64 - spread.to_f64();
    err += 4.0 * f64::EPSILON * (at_mean.value.abs() + sum.abs() / m as f64 + 1.0);
    Ok(Value::Approx(BoundedValue::new(value, err)))
}

/// Repeats each entry `factor` times: an `l`-tuple becomes an `(l·factor)`-tuple
/// with the same mean, spread, and average of `f`.
pub fn blow_up(tuple: &[Rational], factor: usize) -> Vec<Rational> {
    tuple.iter().flat_map(|x| std::iter::repeat_n(x.clone(), factor)).collect()
}

/// Short human description of a value for summaries.
pub fn describe(v: &Value) -> String {
    match v {
        Value::Exact(r) => r.to_string(),
        Value::Approx(b) => format!("{} ± {}", fmt_f64(b.value), fmt_f64(b.error_bound)),
    }
}
