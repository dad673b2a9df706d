//! One-dimensional minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`; stops once the
/// bracket is narrower than `tol`. Returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Locates the first local minimum of `f` on `[a, b]`: a scan of `scan`
/// equally spaced points stops at the first point no larger than both
/// neighbours, and golden-section search refines the surrounding cell.
/// Later, possibly deeper, minima are ignored.
pub fn first_local_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, scan: usize, tol: f64) -> (f64, f64) {
    let scan = scan.max(3);
    let step = (b - a) / (scan - 1) as f64;
    let at = |i: usize| a + i as f64 * step;
    let vals: Vec<f64> = (0..scan).map(|i| f(at(i))).collect();
    let best = (0..scan)
        .find(|&i| {
            let left = i == 0 || vals[i] <= vals[i - 1];
            let right = i + 1 == scan || vals[i] <= vals[i + 1];
            left && right && vals[i].is_finite()
        })
        .unwrap_or_else(|| (0..scan).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0));
    let lo = at(best.saturating_sub(1));
    let hi = at((best + 1).min(scan - 1));
    let (x, fx) = golden_section(&f, lo, hi, tol);
    if vals[best] < fx {
        (at(best), vals[best])
    } else {
        (x, fx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2), -4.0, 7.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-8);
        assert!(fx < 1e-16);
    }

    #[test]
    fn keeps_first_basin() {
        // local minimum at -2 (value 1), deeper one at 3 (value 0)
        let f = |x: f64| ((x + 2.0).powi(2) + 1.0).min((x - 3.0).powi(2));
        let (x, fx) = first_local_min(f, -2.5, 6.0, 40, 1e-9);
        assert!((x + 2.0).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_basin_is_found() {
        let (x, _) = first_local_min(|x| (x - 4.1).powi(2), -3.0, 9.0, 64, 1e-10);
        assert!((x - 4.1).abs() < 1e-8);
    }

    #[test]
    fn boundary_minima() {
        let (x, _) = first_local_min(|x| x, 1.0, 2.0, 20, 1e-10);
        assert!((x - 1.0).abs() < 1e-9);
        let (x, _) = first_local_min(|x| -x, 1.0, 2.0, 20, 1e-10);
        assert!((x - 2.0).abs() < 1e-9);
    }
}
