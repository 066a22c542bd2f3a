//! Root bracketing and quadrature used by the mechanism.

use crate::error::{Error, Result};

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, for a predicate that is
/// false below some threshold and true above it. `pred(hi)` must hold.
///
/// Bisects until the bracket cannot be split any further in `f64`.
pub fn bisect_left_edge<P>(mut lo: f64, mut hi: f64, pred: P) -> f64
where
    P: Fn(f64) -> bool,
{
    debug_assert!(lo <= hi);
    if pred(lo) {
        return lo;
    }
    for _ in 0..2100 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Adaptive Simpson quadrature with Richardson correction.
#[derive(Debug, Clone, Copy)]
pub struct Simpson {
    /// Absolute error target over the whole interval.
    pub tol: f64,
    /// Refinements deeper than this are reported as non-convergence.
    pub max_depth: u32,
    /// Every branch is split at least this many times before the error test
    /// is trusted.
    pub min_depth: u32,
}

impl Default for Simpson {
    fn default() -> Self {
        Simpson {
            tol: 1e-9,
            max_depth: 40,
            min_depth: 4,
        }
    }
}

impl Simpson {
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if b <= a {
            return Ok(0.0);
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.refine(&f, [a, m, b], [fa, fm, fb], whole, self.tol, 0)
    }

    fn refine<F>(
        &self,
        f: &F,
        [a, m, b]: [f64; 3],
        [fa, fm, fb]: [f64; 3],
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;

        if depth >= self.min_depth && delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        // the bracket has collapsed to adjacent floats; nothing left to refine
        if lm <= a || rm >= b || m - a <= f64::EPSILON * a.abs().max(1.0) {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.max_depth {
            return Err(Error::Quadrature {
                a,
                b,
                depth: self.max_depth,
            });
        }
        let l = self.refine(f, [a, lm, m], [fa, flm, fm], left, 0.5 * tol, depth + 1)?;
        let r = self.refine(f, [m, rm, b], [fm, frm, fb], right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}
