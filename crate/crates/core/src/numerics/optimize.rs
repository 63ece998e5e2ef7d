/// Result of [`maximize_log_scale`]. `argmax` is the scale `lambda`, not its log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaleMax {
    pub argmax: f64,
    pub max: f64,
    pub interior: bool,
}

const GRID_NODES: usize = 65;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f(lambda)` for `ln lambda` in `[log_lo, log_hi]`.
///
/// A uniform grid in `ln lambda` locates the best cell, then golden-section
/// search refines it to `tol` in `ln lambda`. `interior` is false when the
/// best grid node lies within two cells of either end, or when `f` is flat.
pub fn maximize_log_scale<F: FnMut(f64) -> f64>(
    mut f: F,
    log_lo: f64,
    log_hi: f64,
    tol: f64,
) -> LogScaleMax {
    let n = GRID_NODES;
    let h = (log_hi - log_lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| log_lo + h * i as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x.exp())).collect();

    let mut best = 0;
    for i in 1..n {
        if vals[i] > vals[best] || (vals[best].is_nan() && !vals[i].is_nan()) {
            best = i;
        }
    }
    let lo_val = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(vals[best] > lo_val) {
        let mid = 0.5 * (log_lo + log_hi);
        return LogScaleMax {
            argmax: mid.exp(),
            max: f(mid.exp()),
            interior: false,
        };
    }
    let interior = best >= 2 && best + 2 < n;
    if best == 0 || best == n - 1 {
        return LogScaleMax {
            argmax: xs[best].exp(),
            max: vals[best],
            interior,
        };
    }

    let (mut a, mut b) = (xs[best - 1], xs[best + 1]);
    let mut best_x = xs[best];
    let mut best_v = vals[best];
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d.exp());
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
    }
    LogScaleMax {
        argmax: best_x.exp(),
        max: best_v,
        interior,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_in_log() {
        let r = maximize_log_scale(|l: f64| (-(l.ln()).powi(2)).exp(), -12.0, 12.0, 1e-10);
        assert!(r.interior);
        assert!((r.argmax - 1.0).abs() < 1e-6);
        assert!((r.max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_in_log() {
        let r = maximize_log_scale(|l: f64| 1.0 / (1.0 + l.ln().powi(2)), -8.0, 8.0, 1e-10);
        assert!(r.interior);
        assert!((r.argmax - 1.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_is_boundary() {
        let r = maximize_log_scale(|l: f64| l, -3.0, 3.0, 1e-10);
        assert!(!r.interior);
        assert!((r.argmax - 3f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn flat_returns_midpoint() {
        let r = maximize_log_scale(|_| 0.0, -12.0, 10.0, 1e-10);
        assert!(!r.interior);
        assert!((r.argmax - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(r.max, 0.0);
    }
}
