//! Richardson extrapolation of eigenvalue sequences `μ(h) = μ + C hᵖ`.

/// Order assumed when only the two finest levels are combined.
pub const NOMINAL_ORDER: f64 = 2.0;
const ORDER_RANGE: (f64, f64) = (0.1, 12.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
    /// Fitted order, `None` when the sequence was constant or unusable.
    pub order: Option<f64>,
    /// True when the sequence was not monotone and the finest value was kept.
    pub fallback: bool,
}

/// `(aᵖ − bᵖ)/(bᵖ − 1)` for `a > b > 1`, increasing in `p`.
fn ratio(a: f64, b: f64, p: f64) -> f64 {
    (a.powf(p) - b.powf(p)) / (b.powf(p) - 1.0)
}

fn fit_order(h: [f64; 3], q: f64) -> f64 {
    let (a, b) = (h[0] / h[2], h[1] / h[2]);
    let (mut lo, mut hi) = ORDER_RANGE;
    if q <= ratio(a, b, lo) {
        return lo;
    }
    if q >= ratio(a, b, hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Limit implied by the two values at `h_coarse > h_fine` with order `p`.
fn two_level(h_coarse: f64, h_fine: f64, f_coarse: f64, f_fine: f64, p: f64) -> f64 {
    f_fine - (f_coarse - f_fine) / ((h_coarse / h_fine).powf(p) - 1.0)
}

/// Three-level fit; `None` when the differences are not monotone.
fn three_level(h: [f64; 3], f: [f64; 3]) -> Option<(f64, f64)> {
    let (d1, d2) = (f[0] - f[1], f[1] - f[2]);
    if d1 == 0.0 && d2 == 0.0 {
        return Some((f[2], f64::NAN));
    }
    if d2 == 0.0 || d1.signum() != d2.signum() || d1.abs() <= d2.abs() {
        return None;
    }
    let p = fit_order(h, d1 / d2);
    Some((two_level(h[1], h[2], f[1], f[2], p), p))
}

/// Extrapolates `values[k]` observed at mesh sizes `h[k]` (strictly decreasing).
///
/// The order is fitted from the three finest levels. The error estimate is
/// the spread between that extrapolant and the previous one, where the
/// previous one is the three-level fit one level coarser if available and
/// always also the two-finest-level value at the nominal order.
pub fn richardson(h: &[f64], values: &[f64]) -> Extrapolated {
    assert!(h.len() >= 3 && h.len() == values.len());
    let k = h.len();
    let finest = values[k - 1];
    let floor = 1e-10 * finest.abs();
    let hh = [h[k - 3], h[k - 2], h[k - 1]];
    let ff = [values[k - 3], values[k - 2], values[k - 1]];
    match three_level(hh, ff) {
        Some((v, p)) if p.is_nan() => Extrapolated {
            value: v,
            error: floor,
            order: None,
            fallback: false,
        },
        Some((v, p)) => {
            let nominal = two_level(hh[1], hh[2], ff[1], ff[2], NOMINAL_ORDER);
            let mut err = (v - nominal).abs();
            if k >= 4 {
                let prev = three_level(
                    [h[k - 4], h[k - 3], h[k - 2]],
                    [values[k - 4], values[k - 3], values[k - 2]],
                );
                match prev {
                    Some((pv, pp)) if !pp.is_nan() => err = err.max((v - pv).abs()),
                    _ => err = err.max((ff[1] - ff[2]).abs()),
                }
            }
            Extrapolated {
                value: v,
                error: err.max(floor),
                order: Some(p),
                fallback: false,
            }
        }
        None => Extrapolated {
            value: finest,
            error: (ff[0] - ff[1]).abs().max((ff[1] - ff[2]).abs()).max(floor),
            order: None,
            fallback: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let h = [0.25, 0.125, 0.0625];
        let f: Vec<f64> = h.iter().map(|x| 7.0 + 3.0 * x * x).collect();
        let e = richardson(&h, &f);
        assert!((e.value - 7.0).abs() < 1e-12);
        assert!((e.order.unwrap() - 2.0).abs() < 1e-8);
        assert!(e.error < 1e-9);
        assert!(!e.fallback);
    }

    #[test]
    fn nonuniform_ratios_and_other_orders() {
        let h = [0.3, 0.2, 0.07];
        let f: Vec<f64> = h.iter().map(|x: &f64| 1.0 - 0.5 * x.powf(1.5)).collect();
        let e = richardson(&h, &f);
        assert!((e.order.unwrap() - 1.5).abs() < 1e-8);
        assert!((e.value - 1.0).abs() < 1e-12);
        // nominal order 2 disagrees, which shows up in the estimate
        assert!(e.error > 1e-4);
    }

    #[test]
    fn non_monotone_falls_back() {
        let e = richardson(&[0.4, 0.2, 0.1], &[5.0, 4.0, 4.5]);
        assert!(e.fallback);
        assert_eq!(e.value, 4.5);
        assert_eq!(e.error, 1.0);
        let e = richardson(&[0.4, 0.2, 0.1], &[5.0, 4.9, 4.0]);
        assert!(e.fallback);
    }

    #[test]
    fn constant_sequence() {
        let e = richardson(&[0.4, 0.2, 0.1], &[0.0, 0.0, 0.0]);
        assert_eq!(e.value, 0.0);
        assert_eq!(e.error, 0.0);
        assert!(!e.fallback);
    }

    #[test]
    fn four_levels_use_previous_fit() {
        let h: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
        let f: Vec<f64> = h.iter().map(|x| 2.0 + x * x + x.powi(4)).collect();
        let e = richardson(&h, &f);
        assert!((e.value - 2.0).abs() < 1e-4);
        assert!(e.error >= (e.value - 2.0).abs());
    }
}
