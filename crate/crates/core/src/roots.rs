//! Bracketing root finder with a Newton polish.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;
const MAX_NEWTON: usize = 8;

/// Finds a root of `f` on `[lo, hi]`.
///
/// Bisects until the bracket is narrower than `xtol`, then takes a few Newton
/// steps with `df`, rejecting any step that leaves the final bracket.
pub fn bisect_newton<F, D>(f: F, df: D, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }

    let mut iterations = 0;
    while b - a > xtol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Bracket is down to adjacent floats.
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::RootNotConverged {
                iterations,
                width: b - a,
            });
        }
    }

    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    for _ in 0..MAX_NEWTON {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next >= a && next <= b) {
            break;
        }
        let fnext = f(next);
        if fnext.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = fnext;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect_newton(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reversed_bracket() {
        let r = bisect_newton(|x| x - 0.25, |_| 1.0, 1.0, -1.0, 1e-12).unwrap();
        assert_eq!(r, 0.25);
    }

    #[test]
    fn no_sign_change() {
        let err = bisect_newton(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }));
    }

    #[test]
    fn bad_derivative_falls_back_to_bisection() {
        let r = bisect_newton(|x| x.powi(3), |_| 0.0, -1.0, 2.0, 1e-13).unwrap();
        assert!(r.abs() < 1e-12);
    }
}
