//! Special-function helpers on top of `statrs`.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Surface area of the unit sphere in R^n, so that `omega(1) = 2`.
pub fn omega(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    omega(n) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((omega(1) - 2.0).abs() < 1e-14);
        assert!((omega(2) - 2.0 * PI).abs() < 1e-13);
        assert!((omega(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}
