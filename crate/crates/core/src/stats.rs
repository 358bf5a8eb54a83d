//! Binomial proportion estimates.

use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A proportion estimate with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Wilson score interval at the 95% level.
///
/// # Panics
///
/// Panics if `trials == 0` or `successes > trials`.
pub fn wilson(successes: u64, trials: u64) -> Proportion {
    wilson_z(successes, trials, Z_95)
}

pub fn wilson_z(successes: u64, trials: u64, z: f64) -> Proportion {
    assert!(trials > 0, "wilson interval needs at least one trial");
    assert!(successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The interval always brackets p; clamping only removes rounding slop.
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Proportion {
        successes,
        trials,
        estimate: p,
        lo,
        hi,
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" definition). `values` is sorted in place.
pub fn quantile(values: &mut [f64], level: f64) -> f64 {
    assert!(!values.is_empty());
    assert!((0.0..=1.0).contains(&level));
    values.sort_by(|a, b| a.total_cmp(b));
    let h = (values.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    values[lo] + (h - lo as f64) * (values[hi] - values[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10/100 at 95%: textbook value (0.0552, 0.1744).
        let w = wilson(10, 100);
        assert!((w.lo - 0.055_223).abs() < 1e-5, "{w:?}");
        assert!((w.hi - 0.174_366).abs() < 1e-5, "{w:?}");
    }

    #[test]
    fn wilson_edges() {
        let w = wilson(0, 50);
        assert_eq!(w.lo, 0.0);
        assert!(w.hi > 0.0 && w.hi < 0.1);
        let w = wilson(50, 50);
        assert_eq!(w.hi, 1.0);
        assert!(w.lo < 1.0);
    }

    #[test]
    fn quantile_interpolates() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&mut v, 0.0), 1.0);
        assert_eq!(quantile(&mut v, 1.0), 4.0);
        assert!((quantile(&mut v, 0.5) - 2.5).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn wilson_brackets_estimate(k in 0u64..1000, extra in 0u64..1000) {
            let n = k + extra + 1;
            let w = wilson(k, n);
            proptest::prop_assert!(0.0 <= w.lo && w.lo <= w.estimate);
            proptest::prop_assert!(w.estimate <= w.hi && w.hi <= 1.0);
        }
    }
}
