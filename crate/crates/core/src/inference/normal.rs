//! Standard normal CDF as a precomputed lookup table.
//!
//! The table holds `ln Phi(x)` on a uniform grid over `[-RANGE, RANGE]` and is
//! read with linear interpolation. Storing the logarithm keeps the far left
//! tail (down to about `e^-454`) representable; arguments outside the grid
//! saturate at the end values.

use std::sync::OnceLock;

pub const RANGE: f64 = 30.0;
pub const STEPS_PER_UNIT: usize = 512;

struct Table {
    log_cdf: Vec<f64>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = (2.0 * RANGE) as usize * STEPS_PER_UNIT + 1;
        let log_cdf = (0..n)
            .map(|i| log_normal_cdf_exact(-RANGE + i as f64 / STEPS_PER_UNIT as f64))
            .collect();
        Table { log_cdf }
    })
}

/// `ln Phi(x)` from the complementary error function.
pub fn log_normal_cdf_exact(x: f64) -> f64 {
    let t = x / std::f64::consts::SQRT_2;
    if x < 0.0 {
        (0.5 * libm::erfc(-t)).ln()
    } else {
        (-0.5 * libm::erfc(t)).ln_1p()
    }
}

/// `ln Phi(x)` by table lookup. NaN is treated as 0.
pub fn log_normal_cdf(x: f64) -> f64 {
    let t = table();
    let x = if x.is_nan() { 0.0 } else { x.clamp(-RANGE, RANGE) };
    let pos = (x + RANGE) * STEPS_PER_UNIT as f64;
    let i = (pos.floor() as usize).min(t.log_cdf.len() - 2);
    let frac = pos - i as f64;
    t.log_cdf[i] + frac * (t.log_cdf[i + 1] - t.log_cdf[i])
}

pub fn normal_cdf(x: f64) -> f64 {
    log_normal_cdf(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-12);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-6);
        assert!((normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-6);
    }

    #[test]
    fn saturates_outside_grid() {
        assert_eq!(log_normal_cdf(-1e9), log_normal_cdf(-RANGE));
        assert_eq!(log_normal_cdf(f64::INFINITY), log_normal_cdf(RANGE));
        assert!(log_normal_cdf(-RANGE).is_finite());
        assert_eq!(log_normal_cdf(f64::NAN), log_normal_cdf(0.0));
    }

    #[test]
    fn interpolation_error_is_small() {
        let mut x = -RANGE;
        while x < RANGE {
            let exact = log_normal_cdf_exact(x);
            // Linear interpolation error is bounded by h^2/8 * |(ln Phi)''| <= 4.8e-7.
            assert!((log_normal_cdf(x) - exact).abs() <= 5e-7, "x = {x}");
            x += 0.0137;
        }
    }
}
