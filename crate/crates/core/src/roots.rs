//! Safeguarded Newton iteration for decreasing scalar functions.

/// Finds a zero of a decreasing function `f` bracketed by `lo` (where
/// `f ≥ 0`) and `hi` (where `f ≤ 0`). `eval` returns `(f(x), f'(x))`.
///
/// Newton steps are taken when they land strictly inside the current bracket,
/// bisection otherwise. Returns `Err(last_iterate)` when `max_iter` runs out.
pub(crate) fn decreasing_root<F>(
    mut eval: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<(f64, usize), f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = x0.clamp(lo, hi);
    for iteration in 1..=max_iter {
        let (fx, dfx) = eval(x);
        if fx.abs() <= f_tol {
            return Ok((x, iteration));
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            return Ok((x, iteration));
        }
        let newton = x - fx / dfx;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        // f(x) = 8 - x³, root at 2
        let (x, _) = decreasing_root(|x| (8.0 - x * x * x, -3.0 * x * x), 0.0, 10.0, 0.0, 1e-14, 200).unwrap();
        assert!((x - 2.0).abs() < 1e-14);
    }

    #[test]
    fn falls_back_to_bisection_on_flat_derivative() {
        // derivative reported as zero everywhere: pure bisection
        let (x, _) = decreasing_root(|x| (1.0 - x, 0.0), 0.0, 4.0, 0.0, 1e-13, 200).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_last_iterate_on_exhaustion() {
        assert!(decreasing_root(|x| (0.3 - x, 0.0), 0.0, 4.0, 0.0, 0.0, 3).is_err());
    }
}
