//! Scalar maximization helpers.

/// 1/φ, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`. Stops when the
/// bracket is narrower than `xtol`. Returns `(argmax, max)`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `n` evenly spaced points of `[lo, hi]`, then refines around the best
/// one with golden-section search. Robust to flat or `-inf` regions at the
/// bracket ends as long as the function is unimodal where it is finite.
pub fn scan_then_refine<F>(f: F, lo: f64, hi: f64, n: usize, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let n = n.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(lo + step * i as f64);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = lo + step * (best + 1).min(n - 1) as f64;
    let (x, v) = golden_section_max(&f, a, b, xtol);
    if v >= best_val {
        (x, v)
    } else {
        (lo + step * best as f64, best_val)
    }
}

/// Bisection for the boundary of a monotone predicate on `[lo, hi]`, where
/// `pred(hi)` holds and `pred(lo)` does not. Returns a point where `pred`
/// holds, within `xtol` of the boundary.
pub fn bisect_threshold<P>(pred: P, mut lo: f64, mut hi: f64, xtol: f64) -> f64
where
    P: Fn(f64) -> bool,
{
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 1.3) * (x - 1.3) + 2.0, -5.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_handles_infeasible_plateau() {
        let f = |x: f64| if x < 2.0 { f64::NEG_INFINITY } else { -(x - 2.5).powi(2) };
        let (x, _) = scan_then_refine(f, 0.0, 10.0, 41, 1e-9);
        assert!((x - 2.5).abs() < 1e-6);
    }

    #[test]
    fn bisection_boundary() {
        let t = bisect_threshold(|x| x >= 0.7, 0.0, 1.0, 1e-12);
        assert!(t >= 0.7 && t - 0.7 < 1e-11);
    }
}
