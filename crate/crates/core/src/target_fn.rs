//! Regularized inverse `F(s) = (1 - exp(-(5 s kappa)^2)) / s` and its
//! normalization `eta * F(s) / kappa`, the function the angle sequences encode.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default output scale `eta_qsvt`.
pub const DEFAULT_ETA: f64 = 0.125;

/// Parameters of the normalized inverse target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec<T> {
    kappa_qsvt: T,
    eta_qsvt: T,
}

impl<T: Real> TargetSpec<T> {
    pub fn new(kappa_qsvt: T, eta_qsvt: T) -> Result<Self> {
        if !(kappa_qsvt >= T::one()) || !kappa_qsvt.is_finite() {
            return Err(Error::invalid(format!(
                "kappa_qsvt must be a finite value >= 1, got {kappa_qsvt:?}"
            )));
        }
        if !(eta_qsvt > T::zero() && eta_qsvt < T::one()) {
            return Err(Error::invalid(format!(
                "eta_qsvt must lie in (0, 1), got {eta_qsvt:?}"
            )));
        }
        Ok(Self {
            kappa_qsvt,
            eta_qsvt,
        })
    }

    /// Target with the default `eta_qsvt = 0.125`.
    pub fn with_kappa(kappa_qsvt: T) -> Result<Self> {
        Self::new(kappa_qsvt, T::of(DEFAULT_ETA))
    }

    pub fn kappa(&self) -> T {
        self.kappa_qsvt
    }

    pub fn eta(&self) -> T {
        self.eta_qsvt
    }

    /// `eta * F(s) / kappa`.
    pub fn eval(&self, s: T) -> T {
        eval_normalized_target(s, self)
    }

    /// Lower edge `1 / kappa` of the interval where `F` approximates `1/s`.
    pub fn valid_lower_bound(&self) -> T {
        self.kappa_qsvt.recip()
    }
}

/// `F(s) = (1 - exp(-(5 s kappa)^2)) / s`, with `F(0) = 0`.
///
/// Evaluated on `|s|` and sign-restored, so `F(-s) == -F(s)` bit for bit.
pub fn eval_inverse_approx<T: Real>(s: T, kappa: T) -> T {
    let a = s.abs();
    let five = T::of(5.0);
    let value = if a < T::of(1e-3) / kappa {
        // x = 5 a kappa < 5e-3: (1 - e^{-x^2}) / a = 25 kappa^2 a (1 - x^2/2 + x^4/6)
        let x2 = (five * a * kappa).powi(2);
        let series = T::one() - x2 / T::of(2.0) + x2 * x2 / T::of(6.0);
        T::of(25.0) * kappa * kappa * a * series
    } else {
        let x = five * a * kappa;
        -(-(x * x)).exp_m1() / a
    };
    if s.is_sign_negative() {
        -value
    } else {
        value
    }
}

/// `eta * F(s) / kappa` for the given target.
pub fn eval_normalized_target<T: Real>(s: T, spec: &TargetSpec<T>) -> T {
    spec.eta_qsvt * eval_inverse_approx(s, spec.kappa_qsvt) / spec.kappa_qsvt
}

/// Smallest admissible `kappa_qsvt` for a matrix with spectral norm
/// `matrix_norm` and condition number `rho_a`: `rho_a / ||A|| = 1 / s_min`.
pub fn min_valid_kappa(matrix_norm: f64, rho_a: f64) -> Result<f64> {
    if matrix_norm > 1.0 {
        return Err(Error::NormTooLarge(matrix_norm));
    }
    if !(matrix_norm > 0.0) {
        return Err(Error::invalid(format!(
            "matrix norm must be positive, got {matrix_norm}"
        )));
    }
    if !(rho_a >= 1.0) {
        return Err(Error::invalid(format!(
            "condition number must be >= 1, got {rho_a}"
        )));
    }
    Ok(rho_a / matrix_norm)
}
