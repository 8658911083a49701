//! Small numeric helpers shared by the solvers and the constructions.

use crate::error::{Error, Result};

/// Relative slack used when rounding solver output to integers.
pub const ROUNDING_SLACK: f64 = 1e-9;

fn near_integer(x: f64) -> Option<f64> {
    let r = x.round();
    ((r - x).abs() <= ROUNDING_SLACK * x.abs().max(1.0)).then_some(r)
}

/// `⌈x⌉`, except that values within [`ROUNDING_SLACK`] of an integer round to it.
pub fn ceil_tol(x: f64) -> f64 {
    near_integer(x).unwrap_or_else(|| x.ceil())
}

/// `⌊x⌋`, except that values within [`ROUNDING_SLACK`] of an integer round to it.
pub fn floor_tol(x: f64) -> f64 {
    near_integer(x).unwrap_or_else(|| x.floor())
}

/// Finds `x` in `[lo, hi]` with `g(x) = target` for a monotone `g` bracketing the target,
/// bisecting until the bracket is relatively narrower than `rel_tol`.
///
/// `increasing` states the direction of `g`. Returns the first point of the final bracket at which the target
/// is reached, i.e. the infimum solution to within tolerance.
pub fn bisect_monotone<G>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    increasing: bool,
    rel_tol: f64,
) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::invalid_argument(format!(
            "bad bisection bracket [{lo}, {hi}]"
        )));
    }
    // "reached" means g has attained the target in the direction of travel.
    let reached = |v: f64| if increasing { v >= target } else { v <= target };
    if !reached(g(hi)) {
        return Err(Error::invalid_argument(format!(
            "target {target} not bracketed on [{lo}, {hi}]"
        )));
    }
    if reached(g(lo)) {
        return Ok(lo);
    }
    for _ in 0..400 {
        if hi - lo <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if reached(g(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerant_rounding() {
        assert_eq!(ceil_tol(1000.0000000001), 1000.0);
        assert_eq!(ceil_tol(999.9999999999), 1000.0);
        assert_eq!(ceil_tol(3.162), 4.0);
        assert_eq!(floor_tol(3.9999999999999), 4.0);
        assert_eq!(floor_tol(3.7), 3.0);
    }

    #[test]
    fn bisection_finds_sqrt() {
        let x = bisect_monotone(|x| x * x, 0.0, 10.0, 2.0, true, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
        let y = bisect_monotone(|x| 1.0 / x, 0.1, 10.0, 0.5, false, 1e-14).unwrap();
        assert!((y - 2.0).abs() < 1e-12);
        assert!(bisect_monotone(|x| x, 0.0, 1.0, 5.0, true, 1e-9).is_err());
    }
}
