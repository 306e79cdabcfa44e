//! Scalar bracketing helpers shared by the equilibrium and spectral solvers.

/// Bisection on `[lo, hi]`. Requires `f(lo)` and `f(hi)` to differ in sign
/// (or one of them to vanish). Stops when the bracket is narrower than `xtol`.
pub(crate) fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= xtol || mid <= lo || mid >= hi {
            return Some(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Doubles `start` until `f` changes sign relative to `f(0)`.
pub(crate) fn expand_upper<F>(f: &F, start: f64, max_doublings: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let s0 = f(0.0).signum();
    let mut x = start;
    for _ in 0..max_doublings {
        let fx = f(x);
        if fx == 0.0 || fx.signum() != s0 {
            return Some(x);
        }
        x *= 2.0;
    }
    None
}
