//! Classical comparison points for the symmetric Gaussian MAC: the
//! no-feedback capacity pentagon, the perfect-feedback sum capacity, and the
//! full-cooperation outer bound.

use crate::gaussian::{cap, SchemeError};
use crate::terms::RegionBounds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMacParams {
    pub p: f64,
    pub sigma2: f64,
}

impl GaussianMacParams {
    pub fn new(p: f64, sigma2: f64) -> Result<Self, SchemeError> {
        if !(p > 0.0 && p.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(SchemeError::InvalidParams(format!(
                "power and noise variance must be positive, got p={p}, sigma2={sigma2}"
            )));
        }
        Ok(GaussianMacParams { p, sigma2 })
    }

    pub fn snr(&self) -> f64 {
        self.p / self.sigma2
    }
}

/// No-feedback capacity region: per-user C(P/sigma2), sum C(2P/sigma2).
pub fn nofb_pentagon(g: &GaussianMacParams) -> RegionBounds {
    let per_user = cap(g.snr());
    let sum = cap(2.0 * g.snr());
    RegionBounds {
        r1: per_user,
        r2: per_user,
        sum_a: sum,
        sum_b: sum,
        fb_cost: 0.0,
    }
}

/// Perfect-feedback sum capacity of the symmetric Gaussian MAC: the unique
/// correlation rho* in [0,1] solving
/// 1 + 2 snr (1 + rho) = (1 + snr (1 - rho^2))^2,
/// found by 60 bisection steps; the sum rate is C(2 snr (1 + rho*)).
pub fn ozarow_sum_capacity(g: &GaussianMacParams) -> (f64, f64) {
    let snr = g.snr();
    let h = |rho: f64| {
        let rhs = 1.0 + snr * (1.0 - rho * rho);
        1.0 + 2.0 * snr * (1.0 + rho) - rhs * rhs
    };
    // h(0) = -snr^2 < 0, h(1) = 4 snr > 0
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    (rho, cap(2.0 * snr * (1.0 + rho)))
}

/// Residual of the fixed-point equation at a candidate correlation.
pub fn ozarow_residual(g: &GaussianMacParams, rho: f64) -> f64 {
    let snr = g.snr();
    let rhs = 1.0 + snr * (1.0 - rho * rho);
    1.0 + 2.0 * snr * (1.0 + rho) - rhs * rhs
}

/// Two fully coordinated antennas with total amplitude 2 sqrt(P): C(4P/sigma2).
pub fn cooperation_sum_bound(g: &GaussianMacParams) -> f64 {
    cap(4.0 * g.snr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pentagon_at_snr_five() {
        let g = GaussianMacParams::new(5.0, 1.0).unwrap();
        let b = nofb_pentagon(&g);
        assert!((b.r1 - 1.2924812503605781).abs() < 1e-12);
        assert!((b.sum_a - 1.7297158093186489).abs() < 1e-12);
    }

    #[test]
    fn pentagon_vanishes_with_power() {
        let g = GaussianMacParams::new(1e-12, 1.0).unwrap();
        let b = nofb_pentagon(&g);
        assert!(b.r1 < 1e-11 && b.sum_a < 1e-11);
    }

    #[test]
    fn ozarow_fixed_point() {
        let g = GaussianMacParams::new(5.0, 1.0).unwrap();
        let (rho, sum) = ozarow_sum_capacity(&g);
        assert!(ozarow_residual(&g, rho).abs() < 1e-10);
        assert!((0.0..=1.0).contains(&rho));
        // feedback cannot hurt
        assert!(sum >= cap(2.0 * g.snr()) - 1e-12);
        assert!((sum - cap(10.0 * (1.0 + rho))).abs() < 1e-12);
    }

    #[test]
    fn ozarow_degenerates_with_power() {
        let g = GaussianMacParams::new(1e-9, 1.0).unwrap();
        let (rho, sum) = ozarow_sum_capacity(&g);
        assert!(rho < 1e-6);
        assert!(sum < 1e-8);
    }

    #[test]
    fn ordering_chain() {
        for snr in [0.1, 1.0, 5.0, 20.0, 100.0] {
            let g = GaussianMacParams::new(snr, 1.0).unwrap();
            let (_, oz) = ozarow_sum_capacity(&g);
            assert!(cap(2.0 * snr) <= oz + 1e-12);
            assert!(oz <= cooperation_sum_bound(&g) + 1e-12);
        }
    }

    #[test]
    fn cooperation_value() {
        let g = GaussianMacParams::new(5.0, 1.0).unwrap();
        assert!((cooperation_sum_bound(&g) - 2.1961587).abs() < 1e-6);
    }
}
