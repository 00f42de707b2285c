//! Estimated angle sets for large condition numbers.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::cheb::{clenshaw, DEFAULT_NA_CAP};
use crate::error::{Error, Result};
use crate::meta_fit::{envelope_counts, envelope_grid, merge_envelope, MetaParams};
use crate::qsp_eval::{AngleSet, Convention, Origin};

#[derive(Debug, Clone)]
pub struct EstimateRequest<'a> {
    pub kappa0: f64,
    pub meta: &'a MetaParams,
    /// Upper bound on `N_a`.
    pub na_cap: usize,
}

impl<'a> EstimateRequest<'a> {
    pub fn new(kappa0: f64, meta: &'a MetaParams) -> Self {
        Self {
            kappa0,
            meta,
            na_cap: DEFAULT_NA_CAP,
        }
    }
}

/// `N_a = N_a,ref * kappa0 / kappa_ref`, floored and rounded up to even.
pub fn estimate_na(kappa0: f64, meta: &MetaParams) -> Result<usize> {
    estimate_na_capped(kappa0, meta, DEFAULT_NA_CAP)
}

pub fn estimate_na_capped(kappa0: f64, meta: &MetaParams, cap: usize) -> Result<usize> {
    if !(kappa0.is_finite() && kappa0 >= 1.0) {
        return Err(Error::invalid(format!("kappa0 must be finite and >= 1, got {kappa0}")));
    }
    let raw = (meta.na_ref as f64 * kappa0 / meta.kappa_ref).floor();
    if !(raw <= cap as f64) {
        return Err(Error::DegreeCap {
            required: if raw.is_finite() { raw as usize } else { usize::MAX },
            cap,
        });
    }
    let na0 = raw as usize;
    let na = na0 + na0 % 2;
    if na > cap {
        return Err(Error::DegreeCap { required: na, cap });
    }
    if na < 8 {
        return Err(Error::TooFewAngles(na));
    }
    Ok(na)
}

/// `sum_l c_l cos(2 l arccos r_j)` on `r_j = j / (n - 1)`.
pub fn build_envelope_values(n_points: usize, c_sh: &[f64]) -> Result<Vec<f64>> {
    let grid = envelope_grid(n_points)?;
    Ok(grid
        .par_iter()
        .map(|&r| clenshaw(c_sh, 2.0 * r * r - 1.0))
        .collect())
}

pub fn estimate_angles(request: &EstimateRequest<'_>) -> Result<AngleSet<f64>> {
    let meta = request.meta;
    meta.validate()?;
    let kappa0 = request.kappa0;
    let na = estimate_na_capped(kappa0, meta, request.na_cap)?;
    if kappa0 < meta.kappa_ref {
        log::warn!(
            "kappa0 = {kappa0} is below the envelope reference kappa {}; accuracy may degrade",
            meta.kappa_ref
        );
    }
    let theta_max = meta.theta_max(kappa0);
    if !(theta_max > 0.0) {
        return Err(Error::NonPositiveAmplitude {
            kappa: kappa0,
            value: theta_max,
        });
    }

    let (n_pos, n_neg) = envelope_counts(na);
    let pos = build_envelope_values(n_pos, &meta.c_sh_pos)?;
    let neg = build_envelope_values(n_neg, &meta.c_sh_neg)?;
    let half = merge_envelope(&pos, &neg, na)?;
    let phi: Vec<f64> = half.par_iter().map(|g| g * theta_max + FRAC_PI_2).collect();
    AngleSet::from_half(Convention::Phi, &phi, kappa0, meta.eta, Origin::Estimated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta_fit::FitResiduals;
    use approx::assert_abs_diff_eq;

    fn meta(na_ref: usize, kappa_ref: f64) -> MetaParams {
        MetaParams {
            kappa_ref,
            na_ref,
            eta: 0.125,
            c_ampl: vec![0.0, 1.25],
            c_sh_pos: vec![0.6, 0.4],
            c_sh_neg: vec![-0.6, -0.4],
            fit_residuals: FitResiduals {
                ampl: 0.0,
                env_pos: 0.0,
                env_neg: 0.0,
            },
            bank_kappas: vec![kappa_ref],
        }
    }

    #[test]
    fn na_examples() {
        let m = meta(1000, 100.0);
        assert_eq!(estimate_na(100.0, &m).unwrap(), 1000);
        assert_eq!(estimate_na(200.0, &m).unwrap(), 2000);
        assert_eq!(estimate_na(150.3, &meta(1002, 100.0)).unwrap(), 1506);
        assert_eq!(estimate_na(150.0, &meta(1002, 100.0)).unwrap(), 1504);
        assert!(estimate_na(0.0, &m).is_err());
        assert!(estimate_na(f64::NAN, &m).is_err());
        assert!(matches!(estimate_na(1e9, &m), Err(Error::DegreeCap { .. })));
        assert!(matches!(estimate_na_capped(300.0, &m, 2999), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn na_is_even_and_monotone() {
        let m = meta(354, 10.0);
        let mut last = 0;
        for i in 0..2000 {
            let na = estimate_na(3.0 + 0.37 * i as f64, &m).unwrap();
            assert_eq!(na % 2, 0);
            assert!(na >= last);
            last = na;
        }
    }

    #[test]
    fn envelope_values_examples() {
        assert_eq!(build_envelope_values(7, &[1.0, 0.0, 0.0]).unwrap(), vec![1.0; 7]);
        let v = build_envelope_values(3, &[0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v[2], 1.0, epsilon = 1e-15);
        assert!(build_envelope_values(1, &[1.0]).is_err());
    }

    #[test]
    fn construction_invariants() {
        let m = meta(1000, 100.0);
        let set = estimate_angles(&EstimateRequest::new(350.0, &m)).unwrap();
        let n = set.num_angles();
        assert_eq!(n, 3500);
        assert_eq!(set.origin(), Origin::Estimated);
        let v = set.values();
        for j in 0..n / 2 {
            assert_eq!(v[j].to_bits(), v[n - 1 - j].to_bits());
        }
        let theta = set.values_in(Convention::Theta);
        assert!(theta[n / 2 - 1] < 0.0 && theta[n / 2] < 0.0);
        for j in 1..n / 2 {
            assert!(theta[j] * theta[j - 1] < 0.0);
        }
        // envelope G(r) = 0.2 + 0.8 r^2 peaks at 1, so max |theta| is the model amplitude
        let peak = theta.iter().fold(0.0_f64, |a, t| a.max(t.abs()));
        assert_abs_diff_eq!(peak, m.theta_max(350.0), epsilon = 1e-14);

        let again = estimate_angles(&EstimateRequest::new(350.0, &m)).unwrap();
        assert_eq!(again, set);
    }

    #[test]
    fn rejects_non_positive_amplitude() {
        let mut m = meta(1000, 100.0);
        m.c_ampl = vec![-0.01, 1.0];
        assert!(matches!(
            estimate_angles(&EstimateRequest::new(1000.0, &m)),
            Err(Error::NonPositiveAmplitude { .. })
        ));
    }
}
