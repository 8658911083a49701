//! Symbolic scaling functions `c·n^α·(ln n)^β`.
//!
//! The family is closed under geometric means, has a decidable domination
//! order (lexicographic on `(α, β)`), and its members are increasing with
//! `n/f(n)` increasing, which is what the constructions need from a scale.
//! The linear function `n` and the constant `1` are admitted as sentinels.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::bisect_monotone;

/// Smallest argument at which a scaling function is evaluated; `ln 3 > 1`.
pub const N_MIN: f64 = 3.0;

const SOLVER_REL_TOL: f64 = 1e-13;
const THRESHOLD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFunction {
    coef: f64,
    alpha: f64,
    beta: f64,
}

/// Outcome of comparing two scaling functions by domination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domination {
    /// `f ≪ g`
    Dominated,
    /// `g ≪ f`
    Dominates,
    /// `f/g` tends to a positive constant.
    Equivalent,
}

impl ScalingFunction {
    pub fn new(coef: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(coef.is_finite() && coef > 0.0) {
            return Err(Error::invalid_argument(format!(
                "coefficient {coef} must be positive"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid_argument(format!(
                "exponent {alpha} of n not in [0, 1]"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::invalid_argument(format!(
                "exponent {beta} of log n is not finite"
            )));
        }
        Ok(ScalingFunction { coef, alpha, beta })
    }

    /// `n^α`.
    pub fn power(alpha: f64) -> Self {
        Self::new(1.0, alpha, 0.0).expect("exponent in [0, 1]")
    }

    /// `n^α (ln n)^β`.
    pub fn power_log(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(1.0, alpha, beta)
    }

    /// The sentinel `n`.
    pub fn linear() -> Self {
        ScalingFunction {
            coef: 1.0,
            alpha: 1.0,
            beta: 0.0,
        }
    }

    /// The sentinel `1`.
    pub fn constant() -> Self {
        ScalingFunction {
            coef: 1.0,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.coef * c, self.alpha, self.beta)
    }

    pub fn coef(&self) -> f64 {
        self.coef
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn growth(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    /// `1 ≪ f ≪ n`.
    pub fn is_proper(&self) -> bool {
        let g = self.growth();
        g > (0.0, 0.0) && g < (1.0, 0.0)
    }

    fn grows(&self) -> bool {
        self.growth() > (0.0, 0.0)
    }

    /// Evaluation clamped to `[1, n]`, without the domain check.
    pub(crate) fn eval(&self, n: f64) -> f64 {
        let raw = self.coef * n.powf(self.alpha) * n.ln().powf(self.beta);
        if raw.is_nan() {
            return 1.0;
        }
        raw.clamp(1.0, n.max(1.0))
    }

    /// `f(n)`, clamped to `[1, n]`, for `n ≥ N_MIN`.
    pub fn evaluate(&self, n: f64) -> Result<f64> {
        if !n.is_finite() || n < N_MIN {
            return Err(Error::invalid_argument(format!(
                "scaling functions are evaluated at n ≥ {N_MIN}, got {n}"
            )));
        }
        Ok(self.eval(n))
    }

    /// Domination order: lexicographic on `(α, β)`; coefficients do not matter.
    pub fn dominates(&self, other: &ScalingFunction) -> Domination {
        match self
            .growth()
            .partial_cmp(&other.growth())
            .expect("finite exponents")
        {
            Ordering::Less => Domination::Dominated,
            Ordering::Greater => Domination::Dominates,
            Ordering::Equal => Domination::Equivalent,
        }
    }

    /// `x ≥ N_MIN` with `f(x) = y`, by bisection on the increasing evaluation.
    pub fn inverse_at(&self, y: f64) -> Result<f64> {
        if !self.grows() {
            return Err(Error::invalid_argument(format!(
                "{self} is bounded and has no inverse"
            )));
        }
        let floor = self.eval(N_MIN);
        if !y.is_finite() || y < floor {
            return Err(Error::invalid_argument(format!(
                "{y} is below {self} at n = {N_MIN} ({floor})"
            )));
        }
        let mut hi = N_MIN * 2.0;
        while self.eval(hi) < y {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::invalid_argument(format!("{self} never reaches {y}")));
            }
        }
        bisect_monotone(|x| self.eval(x), N_MIN, hi, y, true, SOLVER_REL_TOL)
    }

    /// `√(f·g)`: exponents and coefficients averaged geometrically.
    pub fn geometric_mean(&self, other: &ScalingFunction) -> ScalingFunction {
        ScalingFunction {
            coef: (self.coef * other.coef).sqrt(),
            alpha: 0.5 * (self.alpha + other.alpha),
            beta: 0.5 * (self.beta + other.beta),
        }
    }

    /// The slower-growing of the two (smaller coefficient when equivalent).
    pub fn min_growth(&self, other: &ScalingFunction) -> ScalingFunction {
        match self.dominates(other) {
            Domination::Dominated => *self,
            Domination::Dominates => *other,
            Domination::Equivalent => {
                if self.coef <= other.coef {
                    *self
                } else {
                    *other
                }
            }
        }
    }
}

fn check_u(u: f64) -> Result<()> {
    if u >= N_MIN && u.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid_argument(format!(
            "solver argument {u} below {N_MIN}"
        )))
    }
}

/// `C(u) = f_down⁻¹(f(u)) / u`: how many copies of a length-`u` permutation
/// make `f_down` of the total equal `f(u)`.
pub fn solve_c(f: &ScalingFunction, f_down: &ScalingFunction, u: f64) -> Result<f64> {
    check_u(u)?;
    if f_down.dominates(f) != Domination::Dominated {
        return Err(Error::invalid_argument(format!(
            "{f_down} is not dominated by {f}"
        )));
    }
    Ok(f_down.inverse_at(f.eval(u))? / u)
}

/// `D(u)`, the solution of `f_up(d·u) = d·f(u)`, found by bisection on the
/// decreasing map `x ↦ f_up(x)/x`.
pub fn solve_d(f: &ScalingFunction, f_up: &ScalingFunction, u: f64) -> Result<f64> {
    check_u(u)?;
    if f.dominates(f_up) != Domination::Dominated {
        return Err(Error::invalid_argument(format!(
            "{f} is not dominated by {f_up}"
        )));
    }
    let target = f.eval(u) / u;
    let ratio = |x: f64| f_up.eval(x) / x;
    if ratio(N_MIN) < target {
        return Err(Error::invalid_argument(format!(
            "{f_up}(x)/x never reaches {target}"
        )));
    }
    let mut hi = u.max(N_MIN) * 2.0;
    while ratio(hi) > target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid_argument(format!(
                "{f_up}(x)/x does not fall to {target}"
            )));
        }
    }
    Ok(bisect_monotone(ratio, N_MIN, hi, target, false, SOLVER_REL_TOL)? / u)
}

/// The intermediate scales `h_1, …, h_{m+1}` with `h_ℓ = √(f^{ℓ−1} f^ℓ)`,
/// where `f^0 = n` and `f^{m+1} = 1`.
pub fn intermediate_scales(scales: &[ScalingFunction]) -> Result<Vec<ScalingFunction>> {
    check_strictly_ordered(scales)?;
    let levels = bracketed(scales);
    Ok(levels
        .windows(2)
        .map(|w| w[0].geometric_mean(&w[1]))
        .collect())
}

fn bracketed(scales: &[ScalingFunction]) -> Vec<ScalingFunction> {
    let mut levels = Vec::with_capacity(scales.len() + 2);
    levels.push(ScalingFunction::linear());
    levels.extend_from_slice(scales);
    levels.push(ScalingFunction::constant());
    levels
}

pub(crate) fn check_strictly_ordered(scales: &[ScalingFunction]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::invalid_argument("at least one scale is required"));
    }
    for s in scales {
        if !s.is_proper() {
            return Err(Error::invalid_argument(format!(
                "{s} is not a proper scaling function"
            )));
        }
    }
    for w in scales.windows(2) {
        if w[0].dominates(&w[1]) != Domination::Dominates {
            return Err(Error::invalid_argument(format!(
                "scales must be strictly decreasing by domination: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Least integer `N ≥ N_MIN` from which `upper(n)/lower(n) ≥ bound` for all `n ≥ N`.
fn ratio_threshold(upper: &ScalingFunction, lower: &ScalingFunction, bound: f64) -> Result<u64> {
    let a = upper.alpha - lower.alpha;
    let b = upper.beta - lower.beta;
    let ratio = |n: f64| upper.eval(n) / lower.eval(n);
    let target = bound * (1.0 - THRESHOLD_SLACK);
    // ln ratio has slope a + b/ln n in ln n; it only decreases before exp(−b/a) when b < 0
    let turn = if b < 0.0 {
        (-b / a).exp().max(N_MIN)
    } else {
        N_MIN
    };
    if !turn.is_finite() {
        return Err(Error::invalid_argument("ratio of scales does not grow"));
    }
    if ratio(turn) >= target {
        return Ok(N_MIN as u64);
    }
    let mut hi = turn * 2.0;
    while ratio(hi) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid_argument(format!(
                "{upper}/{lower} never reaches {bound}"
            )));
        }
    }
    let x = bisect_monotone(ratio, turn, hi, target, true, SOLVER_REL_TOL)?;
    if x >= u64::MAX as f64 / 2.0 {
        return Err(Error::invalid_argument(format!(
            "{upper}/{lower} reaches {bound} only beyond n = {x:e}"
        )));
    }
    let mut n = x.ceil().max(N_MIN) as u64;
    while ratio(n as f64) < target {
        n += 1;
    }
    let floor = turn.ceil() as u64;
    while n > floor && ratio((n - 1) as f64) >= target {
        n -= 1;
    }
    Ok(n)
}

/// `N_m`: the least `N` such that `f^{ℓ−1}(n)/h_ℓ(n) ≥ m` and `h_ℓ(n)/f^ℓ(n) ≥ m`
/// for all `n ≥ N` and every `ℓ ∈ [1, m+1]`.
///
/// `scales` is `f^1 ≫ … ≫ f^m` and must be strictly ordered.
pub fn find_threshold_n(scales: &[ScalingFunction], m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::invalid_argument("m must be at least 1"));
    }
    let hs = intermediate_scales(scales)?;
    let levels = bracketed(scales);
    let mut threshold = N_MIN as u64;
    for (l, h) in hs.iter().enumerate() {
        threshold = threshold.max(ratio_threshold(&levels[l], h, m as f64)?);
        threshold = threshold.max(ratio_threshold(h, &levels[l + 1], m as f64)?);
    }
    Ok(threshold)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for ScalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.alpha != 0.0 {
            parts.push(if self.alpha == 1.0 {
                "n".to_string()
            } else {
                format!("n^{}", fmt_num(self.alpha))
            });
        }
        if self.beta != 0.0 {
            parts.push(format!("log^{}", fmt_num(self.beta)));
        }
        if self.coef != 1.0 || parts.is_empty() {
            parts.insert(0, fmt_num(self.coef));
        }
        f.write_str(&parts.join("*"))
    }
}

fn parse_exponent(s: &str) -> Result<f64> {
    let s = s.trim();
    let s = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(s);
    let bad = || Error::Parse(format!("bad exponent {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| bad())?;
        let q: f64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0.0 {
            return Err(bad());
        }
        Ok(p / q)
    } else {
        s.parse().map_err(|_| bad())
    }
}

impl FromStr for ScalingFunction {
    type Err = Error;

    /// Grammar: `*`-separated factors, each `n`, `n^e`, `log`, `log^e` or a
    /// positive number; `e` is a decimal or `p/q`. Examples: `n^0.5`,
    /// `n^0.5*log^1`, `n^1*log^-1`, `0.5*n^2/3`, `n`, `1`.
    fn from_str(s: &str) -> Result<Self> {
        let (mut coef, mut alpha, mut beta) = (1.0, 0.0, 0.0);
        let text = s.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty scaling function".into()));
        }
        for factor in text.split('*') {
            let factor = factor.trim();
            if factor == "n" {
                alpha += 1.0;
            } else if let Some(e) = factor.strip_prefix("n^") {
                alpha += parse_exponent(e)?;
            } else if factor == "log" {
                beta += 1.0;
            } else if let Some(e) = factor.strip_prefix("log^") {
                beta += parse_exponent(e)?;
            } else {
                let c: f64 = factor.parse().map_err(|_| {
                    Error::Parse(format!("unrecognised factor {factor:?} in {text:?}"))
                })?;
                coef *= c;
            }
        }
        ScalingFunction::new(coef, alpha, beta).map_err(|e| Error::Parse(format!("{text:?}: {e}")))
    }
}

impl Serialize for ScalingFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ScalingFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
