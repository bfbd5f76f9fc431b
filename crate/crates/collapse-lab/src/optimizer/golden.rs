//! Golden-section line search.

use super::OptimizerError;

/// Interior-point ratio of the golden-section bracket, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Iteration cap; each step multiplies the bracket width by `INV_PHI`, so
/// the cap is reachable only when the requested tolerance sits below the
/// float spacing of the bracket endpoints.
const MAX_ITERS: usize = 500;

/// Minimizes `f` over `[lo, hi]` by golden-section search, returning the
/// located minimizer and its value.
///
/// The bracket shrinks by a fixed factor per step, so the evaluation count
/// is a deterministic function of `(hi - lo) / tol`. For a unimodal `f` the
/// result lies within `tol` of the global minimizer; otherwise it is a
/// local one.
pub fn minimize_scalar(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), OptimizerError> {
    if !(lo < hi) {
        return Err(OptimizerError::InvalidBracket { lo, hi });
    }
    if tol <= 0.0 {
        return Err(OptimizerError::NonPositiveTol(tol));
    }
    let eval = |x: f64| -> Result<f64, OptimizerError> {
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(OptimizerError::NonFiniteObjective { value })
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..MAX_ITERS {
        if b - a <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}
