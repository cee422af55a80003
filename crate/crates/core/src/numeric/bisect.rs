use crate::error::{Error, Result};

/// An interval whose endpoints straddle a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once `done(lo, hi, f(mid))` holds or the interval stops shrinking.
/// Returns the midpoint of the final bracket.
pub fn bisect<F, D>(mut f: F, bracket: Bracket, mut done: D, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
    D: FnMut(f64, f64, f64) -> bool,
{
    let Bracket { mut lo, mut hi } = bracket;
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::numeric(
            "bisect",
            format!("no sign change on [{lo}, {hi}]: f = ({f_lo:e}, {f_hi:e})"),
        ));
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if done(lo, hi, f_mid) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::numeric(
        "bisect",
        format!("no convergence after {max_iter} iterations, bracket [{lo}, {hi}]"),
    ))
}
