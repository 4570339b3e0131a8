//! Derivative-free 1-D search helpers.

use crate::scalar::{lit, Real};

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`,
/// stopping when the bracket is narrower than `xtol`.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, xtol: T) -> (T, T) {
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > xtol && iterations < 400 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    // the endpoints are candidates too when the minimum sits on a bound
    let mid = (a + b) / T::two();
    let mut best = (mid, f(mid));
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Coarse grid of `n` points on `[a, b]` followed by golden-section
/// refinement inside the bracket around the best grid point.
pub fn grid_then_golden<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, n: usize, xtol: T) -> (T, T) {
    let n = n.max(3);
    let step = (b - a) / lit::<T>((n - 1) as f64);
    let mut best_i = 0;
    let mut best_f = T::infinity();
    for i in 0..n {
        let x = a + step * lit::<T>(i as f64);
        let fx = f(x);
        if fx < best_f || best_f.is_nan() {
            best_f = fx;
            best_i = i;
        }
    }
    let lo = a + step * lit::<T>(best_i.saturating_sub(1) as f64);
    let hi = a + step * lit::<T>((best_i + 1).min(n - 1) as f64);
    let (x, fx) = golden_section(&mut f, lo, hi, xtol);
    let grid_x = a + step * lit::<T>(best_i as f64);
    if best_f < fx {
        (grid_x, best_f)
    } else {
        (x, fx)
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]` (f(lo) and f(hi) must
/// differ in sign).
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, xtol: T) -> T {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo_negative = f(lo) < T::zero();
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = (lo + hi) / T::two();
        if (f(mid) < T::zero()) == f_lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::two()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x: f64| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let (x, _) = golden_section(|x: f64| x, 1.0, 2.0, 1e-10);
        assert!((x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grid_escapes_local_minimum() {
        let f = |x: f64| (3.0 * x).cos() + 0.1 * x;
        let (x, _) = grid_then_golden(f, 0.0, 10.0, 101, 1e-10);
        // global minimum just below π/3 where sin 3x = 1/30
        assert!(
            (x - (std::f64::consts::PI - (1.0f64 / 30.0).asin()) / 3.0).abs() < 1e-6,
            "{x}"
        );
    }

    #[test]
    fn bisect_root() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
