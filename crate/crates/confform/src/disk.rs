//! Closed-form hyperbolic disk family, used for triple-junction components
//! that are disks (chi = 1), where no PDE solve is needed.
//!
//! The family is the metric `4 rho |dz|^2 / (1 - rho |z|^2)^2` on the unit
//! disk, `0 < rho < 1`: Gaussian curvature -1, boundary length
//! `4 pi sqrt(rho) / (1 - rho)`, boundary geodesic curvature
//! `(1 + rho) / (2 sqrt(rho))`.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Parameter of the hyperbolic disk metric; strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskParameter<T> {
    rho: T,
}

impl<T: Real> DiskParameter<T> {
    pub fn new(rho: T) -> Result<Self> {
        if !(rho > T::zero() && rho < T::one()) {
            return Err(Error::Precondition(format!(
                "disk parameter rho must lie in (0, 1), got {rho}"
            )));
        }
        Ok(DiskParameter { rho })
    }

    pub fn rho(&self) -> T {
        self.rho
    }
}

/// Boundary length `4 pi sqrt(rho) / (1 - rho)`; a bijection (0,1) -> (0,inf).
pub fn disk_length<T: Real>(p: DiskParameter<T>) -> T {
    let four_pi = real::<T>(4.0) * T::PI();
    four_pi * p.rho.sqrt() / (T::one() - p.rho)
}

/// Boundary geodesic curvature `(1 + rho) / (2 sqrt(rho))`; always > 1.
pub fn disk_curvature<T: Real>(p: DiskParameter<T>) -> T {
    (T::one() + p.rho) / (real::<T>(2.0) * p.rho.sqrt())
}

/// Hyperbolic area `4 pi rho / (1 - rho)`, the Gauss-Bonnet complement of
/// the curvature integral: `c_hat - A = 2 pi` on the disk.
pub fn disk_area<T: Real>(p: DiskParameter<T>) -> T {
    let four_pi = real::<T>(4.0) * T::PI();
    four_pi * p.rho / (T::one() - p.rho)
}

/// Inverts `disk_length` in closed form: `sqrt(rho)` is the positive root of
/// `l s^2 + 4 pi s - l = 0`, written in the rationalized form
/// `l / (sqrt(4 pi^2 + l^2) + 2 pi)` that stays accurate as l -> 0.
pub fn rho_from_length<T: Real>(l: T) -> Result<DiskParameter<T>> {
    if !(l > T::zero()) || !l.is_finite() {
        return Err(Error::Precondition(format!(
            "boundary length must be positive and finite, got {l}"
        )));
    }
    let two_pi = T::PI() + T::PI();
    let s = l / ((two_pi * two_pi + l * l).sqrt() + two_pi);
    DiskParameter::new(s * s)
}

/// `c_hat(l) = l * c(l)` for the disk: `2 pi (1 + rho) / (1 - rho)` at
/// `rho = rho_from_length(l)`, which simplifies to `sqrt(4 pi^2 + l^2)`.
/// Both forms are computed and cross-checked. The composed form is
/// evaluated with `1 - rho` rationalized so the comparison stays meaningful
/// as rho -> 1.
pub fn disk_c_hat<T: Real>(l: T) -> Result<T> {
    let p = rho_from_length(l)?;
    let two_pi = T::PI() + T::PI();
    let root = (two_pi * two_pi + l * l).sqrt();
    // 1 - s = ((root - l) + 2 pi) / (root + 2 pi), with root - l again
    // rationalized to avoid cancellation for large l.
    let one_minus_s = ((two_pi * two_pi / (root + l)) + two_pi) / (root + two_pi);
    let one_plus_s = (root + two_pi + l) / (root + two_pi);
    let composed = two_pi * (T::one() + p.rho) / (one_minus_s * one_plus_s);
    let algebraic = root;
    debug_assert!(
        ((composed - algebraic) / algebraic).abs() < real::<T>(1e-10),
        "closed forms disagree: {composed} vs {algebraic}"
    );
    Ok(algebraic)
}

/// `c(l) = c_hat(l) / l`, strictly decreasing onto (1, inf).
pub fn disk_c<T: Real>(l: T) -> Result<T> {
    Ok(disk_c_hat(l)? / l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn golden_ratio_point_gives_length_four_pi() {
        // sqrt(rho) = (sqrt(5) - 1) / 2 solves s^2 + s - 1 = 0, so 1 - rho
        // equals sqrt(rho) and the length is exactly 4 pi.
        let s = (5.0f64.sqrt() - 1.0) / 2.0;
        let p = DiskParameter::new(s * s).unwrap();
        assert!((disk_length(p) - 4.0 * PI).abs() < 1e-12);
        assert!((disk_curvature(p) - 5.0f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_parameter_values() {
        let p = DiskParameter::new(0.5f64).unwrap();
        assert!((disk_length(p) - 4.0 * 2.0f64.sqrt() * PI).abs() < 1e-12);
        assert!((disk_curvature(p) - 1.5 / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn length_inversion_roundtrip() {
        for &rho in &[0.1f64, 0.5, 0.9] {
            let p = DiskParameter::new(rho).unwrap();
            let back = rho_from_length(disk_length(p)).unwrap();
            assert!((back.rho() - rho).abs() < 1e-12, "rho {rho}");
        }
        let p = rho_from_length(4.0 * PI).unwrap();
        assert!((p.rho() - 0.3819660112501051).abs() < 1e-12);
    }

    #[test]
    fn c_hat_two_forms_agree_at_four_pi() {
        let c_hat = disk_c_hat(4.0 * PI).unwrap();
        assert!((c_hat - 2.0 * PI * 5.0f64.sqrt()).abs() < 1e-12);
        assert!((c_hat - (4.0 * PI * PI + 16.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gauss_bonnet_on_disk_family() {
        let mut rho = 0.01f64;
        while rho < 1.0 {
            let p = DiskParameter::new(rho).unwrap();
            let l = disk_length(p);
            let lhs = disk_c_hat(l).unwrap() - disk_area(p);
            assert!((lhs - 2.0 * PI).abs() < 1e-12 * (1.0 + disk_area(p)), "rho {rho}");
            rho += 0.01;
        }
    }

    #[test]
    fn c_is_strictly_decreasing_onto_one_infinity() {
        let mut prev = f64::INFINITY;
        let mut l = 1e-3f64;
        while l < 1e6 {
            let c = disk_c(l).unwrap();
            assert!(c > 1.0);
            assert!(c < prev);
            prev = c;
            l *= 10.0;
        }
    }

    #[test]
    fn limits_of_the_formulas() {
        assert!(disk_length(DiskParameter::new(1e-12f64).unwrap()) < 2e-5);
        assert!(disk_curvature(DiskParameter::new(1.0 - 1e-12f64).unwrap()) - 1.0 < 1e-9);
        assert!(rho_from_length(1e-9f64).unwrap().rho() < 1e-10);
        // c_hat approaches 2 pi chi(disk) = 2 pi from above as l -> 0;
        // the excess is l^2 / (4 pi) to leading order.
        let c_hat = disk_c_hat(1e-4f64).unwrap();
        assert!(c_hat > 2.0 * PI && c_hat - 2.0 * PI < 1e-8);
    }
}
