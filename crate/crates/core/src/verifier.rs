//! Error measurement for angle sets: dense sweeps against the normalized
//! target and emulated matrix inversion on diagonal test systems.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_solver::linspace;
use crate::qsp_eval::{AngleSet, SymmetricQsp};
use crate::target_fn::{eval_inverse_approx, min_valid_kappa, TargetSpec};

/// Relative slack allowed when comparing a set's `kappa` to the
/// requirement of a system (grid endpoints carry rounding).
const KAPPA_CHECK_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSweep {
    pub kappa0: f64,
    pub s_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub target_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_err: f64,
    pub argmax_s: f64,
}

/// `P(s) - eta F(s) / kappa` on `grid_points` uniform points over `[1/kappa, 1]`.
pub fn sweep_error(angles: &AngleSet<f64>, grid_points: usize) -> Result<ErrorSweep> {
    if grid_points == 0 {
        return Err(Error::invalid("sweep needs at least one point"));
    }
    let kappa = angles.kappa();
    sweep_error_on(angles, linspace(1.0 / kappa, 1.0, grid_points))
}

/// Same as [`sweep_error`] on caller-supplied points in `[1/kappa, 1]`.
pub fn sweep_error_on(angles: &AngleSet<f64>, s_values: Vec<f64>) -> Result<ErrorSweep> {
    let kappa = angles.kappa();
    let target = TargetSpec::new(kappa, angles.eta())?;
    if let Some(&s) = s_values.iter().find(|&&s| !(s.abs() <= 1.0)) {
        return Err(Error::OutOfDomain(s));
    }
    let kernel = SymmetricQsp::from_angles(angles);
    let p_values: Vec<f64> = s_values.par_iter().map(|&s| kernel.value(s)).collect();
    let target_values: Vec<f64> = s_values.iter().map(|&s| target.eval(s)).collect();
    let errors: Vec<f64> = p_values.iter().zip(&target_values).map(|(p, t)| p - t).collect();
    let (mut max_err, mut argmax_s) = (0.0, s_values.first().copied().unwrap_or(f64::NAN));
    for (e, &s) in errors.iter().zip(&s_values) {
        if e.abs() > max_err {
            max_err = e.abs();
            argmax_s = s;
        }
    }
    Ok(ErrorSweep {
        kappa0: kappa,
        s_values,
        p_values,
        target_values,
        errors,
        max_err,
        argmax_s,
    })
}

/// How a diagonal test system was built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// `d_k = (eta_A / kappa) F(x_k)`.
    InverseApprox { kappa: f64, eta_a: f64 },
    /// `d_k = sin(xi_k)`.
    Sine { xi_max: f64 },
    /// Diagonal supplied directly.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSystem {
    diagonal: Vec<f64>,
    kind: SystemKind,
    rho_a: f64,
    norm: f64,
}

impl DiagonalSystem {
    pub fn new(diagonal: Vec<f64>, kind: SystemKind) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::invalid("empty diagonal"));
        }
        if let Some(&d) = diagonal.iter().find(|d| !d.is_finite() || **d == 0.0) {
            return Err(Error::invalid(format!(
                "diagonal entries must be finite and non-zero, got {d}"
            )));
        }
        let norm = diagonal.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let min = diagonal.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
        if norm > 1.0 {
            return Err(Error::NormTooLarge(norm));
        }
        Ok(Self {
            rho_a: norm / min,
            diagonal,
            kind,
            norm,
        })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn rho_a(&self) -> f64 {
        self.rho_a
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Smallest `kappa_qsvt` the system admits.
    pub fn required_kappa(&self) -> Result<f64> {
        min_valid_kappa(self.norm, self.rho_a)
    }

    /// Uniform amplitude `2^{-n_x/2}` (unit 2-norm).
    pub fn uniform_init(&self) -> Vec<f64> {
        vec![1.0 / (self.len() as f64).sqrt(); self.len()]
    }
}

fn grid_size(n_x: u32) -> Result<usize> {
    if n_x == 0 || n_x > 30 {
        return Err(Error::invalid(format!("n_x must lie in 1..=30, got {n_x}")));
    }
    Ok(1usize << n_x)
}

/// Grid of `2^{n_x}` points: `2^{n_x - 1}` uniform points on `[-1, -1/kappa]`
/// followed by their mirror image on `[1/kappa, 1]`.
pub fn inverse_approx_grid(kappa: f64, n_x: u32) -> Result<Vec<f64>> {
    let n = grid_size(n_x)?;
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::invalid(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    let positive = linspace(1.0 / kappa, 1.0, n / 2);
    Ok(positive.iter().rev().map(|x| -x).chain(positive.iter().copied()).collect())
}

/// `d_k = (eta_A / kappa) F(x_k)` on [`inverse_approx_grid`].
pub fn build_test_matrix_f(kappa: f64, eta_a: f64, n_x: u32) -> Result<DiagonalSystem> {
    if !(eta_a > 0.0 && eta_a <= 1.0) {
        return Err(Error::invalid(format!("eta_A must lie in (0, 1], got {eta_a}")));
    }
    let grid = inverse_approx_grid(kappa, n_x)?;
    // F peaks at 1/|x| ~ kappa inside the band; rescale so that max |d| = eta_A exactly
    let raw: Vec<f64> = grid.iter().map(|&x| eval_inverse_approx(x, kappa) / kappa).collect();
    let peak = raw.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let diagonal = raw.iter().map(|d| eta_a * (d / peak)).collect();
    DiagonalSystem::new(diagonal, SystemKind::InverseApprox { kappa, eta_a })
}

/// `d_k = sin(xi_k)`, `xi_k = -xi_max + 2 xi_max k / (N_x - 1)`.
pub fn build_test_matrix_sin(n_x: u32, xi_max: f64) -> Result<DiagonalSystem> {
    let n = grid_size(n_x)?;
    if n_x < 2 {
        return Err(Error::invalid("n_x must be at least 2"));
    }
    if !(xi_max > 0.0 && xi_max <= FRAC_PI_2) {
        return Err(Error::invalid(format!("xi_max must lie in (0, pi/2], got {xi_max}")));
    }
    let step = 2.0 * xi_max / (n - 1) as f64;
    let diagonal = (0..n).map(|k| (-xi_max + step * k as f64).sin()).collect();
    DiagonalSystem::new(diagonal, SystemKind::Sine { xi_max })
}

/// `xi_max` for which the sine system has spectral norm `norm`.
pub fn xi_max_for_norm(norm: f64) -> Result<f64> {
    if !(norm > 0.0 && norm <= 1.0) {
        return Err(Error::invalid(format!("norm must lie in (0, 1], got {norm}")));
    }
    Ok(norm.asin())
}

fn check_kappa(system: &DiagonalSystem, angles: &AngleSet<f64>) -> Result<()> {
    let required = system.required_kappa()?;
    if angles.kappa() < required * (1.0 - KAPPA_CHECK_RTOL) {
        return Err(Error::KappaTooSmall {
            kappa: angles.kappa(),
            required,
        });
    }
    Ok(())
}

fn check_init(system: &DiagonalSystem, init: &[f64]) -> Result<()> {
    if init.len() != system.len() {
        return Err(Error::Dimension {
            expected: system.len(),
            got: init.len(),
        });
    }
    Ok(())
}

/// `sign(d_k) P(|d_k|) init_k`, the odd polynomial applied through the
/// singular value decomposition `A = diag(sign d) diag(|d|) I`.
pub fn apply_inverse_via_svd(
    system: &DiagonalSystem,
    angles: &AngleSet<f64>,
    init: &[f64],
) -> Result<Vec<f64>> {
    check_kappa(system, angles)?;
    apply_inverse_unchecked(system, angles, init)
}

/// [`apply_inverse_via_svd`] without the condition-number precondition.
pub fn apply_inverse_unchecked(
    system: &DiagonalSystem,
    angles: &AngleSet<f64>,
    init: &[f64],
) -> Result<Vec<f64>> {
    check_init(system, init)?;
    let kernel = SymmetricQsp::from_angles(angles);
    Ok(system
        .diagonal
        .par_iter()
        .zip(init.par_iter())
        .map(|(&d, &x)| d.signum() * kernel.value(d.abs()) * x)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    /// QSVT output scaled by `2^{n_x/2} / eta`.
    pub qsvt: Vec<f64>,
    /// `A^{-1} init / kappa` under the same scaling.
    pub exact: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_abs_err: f64,
    pub argmax: usize,
}

/// Element-wise comparison of the emulated inversion (uniform input) against
/// the exact inverse, both multiplied by `sqrt(N_x) / eta`.
pub fn inversion_error(system: &DiagonalSystem, angles: &AngleSet<f64>) -> Result<InversionReport> {
    check_kappa(system, angles)?;
    inversion_error_unchecked(system, angles)
}

pub fn inversion_error_unchecked(
    system: &DiagonalSystem,
    angles: &AngleSet<f64>,
) -> Result<InversionReport> {
    let init = system.uniform_init();
    let out = apply_inverse_unchecked(system, angles, &init)?;
    let exact: Vec<f64> = system.diagonal.iter().zip(&init).map(|(d, x)| x / d).collect();
    Ok(compare(&out, &exact, angles))
}

/// Scales the QSVT output by `sqrt(N) / eta` and the plain inverse action by
/// `eta / kappa` times the same factor.
fn compare(qsvt_raw: &[f64], inverse: &[f64], angles: &AngleSet<f64>) -> InversionReport {
    let scale = (qsvt_raw.len() as f64).sqrt() / angles.eta();
    let qsvt: Vec<f64> = qsvt_raw.iter().map(|v| v * scale).collect();
    let exact: Vec<f64> = inverse
        .iter()
        .map(|v| angles.eta() / angles.kappa() * v * scale)
        .collect();
    let errors: Vec<f64> = qsvt.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let (mut max_abs_err, mut argmax) = (0.0, 0);
    for (k, e) in errors.iter().enumerate() {
        if e.abs() > max_abs_err {
            max_abs_err = e.abs();
            argmax = k;
        }
    }
    InversionReport {
        qsvt,
        exact,
        errors,
        max_abs_err,
        argmax,
    }
}

/// Dense system given by its singular value decomposition
/// `A = U_l diag(s) U_r^T`, with `U_l`, `U_r` row-major `n x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdSystem {
    pub u_left: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub u_right: Vec<Vec<f64>>,
}

impl SvdSystem {
    pub fn validate(&self) -> Result<()> {
        let n = self.singular_values.len();
        if n == 0 {
            return Err(Error::invalid("no singular values"));
        }
        for m in [&self.u_left, &self.u_right] {
            if m.len() != n {
                return Err(Error::Dimension { expected: n, got: m.len() });
            }
            if let Some(row) = m.iter().find(|r| r.len() != n) {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
        }
        if let Some(&s) = self.singular_values.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
            return Err(Error::invalid(format!("singular values must lie in (0, 1], got {s}")));
        }
        Ok(())
    }

    pub fn rho_a(&self) -> f64 {
        let max = self.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
        let min = self.singular_values.iter().fold(f64::INFINITY, |m, s| m.min(*s));
        max / min
    }

    pub fn norm(&self) -> f64 {
        self.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s))
    }

    fn check_kappa(&self, angles: &AngleSet<f64>) -> Result<()> {
        let required = min_valid_kappa(self.norm(), self.rho_a())?;
        if angles.kappa() < required * (1.0 - KAPPA_CHECK_RTOL) {
            return Err(Error::KappaTooSmall {
                kappa: angles.kappa(),
                required,
            });
        }
        Ok(())
    }

    /// `U_l g(S) U_r^T x` for a function `g` of the singular values.
    fn transform(&self, x: &[f64], g: impl Fn(f64) -> f64 + Sync) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.singular_values.len();
        if x.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        let mut y = vec![0.0; n];
        for (row, &xi) in self.u_right.iter().zip(x) {
            y.iter_mut().zip(row).for_each(|(yi, u)| *yi += u * xi);
        }
        y.par_iter_mut()
            .zip(self.singular_values.par_iter())
            .for_each(|(yi, &s)| *yi *= g(s));
        Ok(self
            .u_left
            .iter()
            .map(|row| row.iter().zip(&y).map(|(u, v)| u * v).sum())
            .collect())
    }

    /// `U_l P(S) U_r^T init`.
    pub fn apply(&self, angles: &AngleSet<f64>, init: &[f64]) -> Result<Vec<f64>> {
        self.check_kappa(angles)?;
        let kernel = SymmetricQsp::from_angles(angles);
        self.transform(init, |s| kernel.value(s))
    }

    /// `U_l S^{-1} U_r^T init`, the action the polynomial approximates up
    /// to the factor `eta / kappa`.
    pub fn exact_inverse(&self, init: &[f64]) -> Result<Vec<f64>> {
        self.transform(init, |s| 1.0 / s)
    }

    /// Same comparison as [`inversion_error`] with a uniform input.
    pub fn inversion_error(&self, angles: &AngleSet<f64>) -> Result<InversionReport> {
        let n = self.singular_values.len();
        let init = vec![1.0 / (n as f64).sqrt(); n];
        let out = self.apply(angles, &init)?;
        let exact = self.exact_inverse(&init)?;
        Ok(compare(&out, &exact, angles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_solver::{solve_angles, SolveConfig};
    use crate::qsp_eval::{Convention, Origin};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn solved(kappa: f64) -> &'static AngleSet<f64> {
        static K4: OnceLock<AngleSet<f64>> = OnceLock::new();
        static K10: OnceLock<AngleSet<f64>> = OnceLock::new();
        let cell = if kappa == 4.0 { &K4 } else { &K10 };
        cell.get_or_init(|| solve_angles(&SolveConfig::new(kappa)).unwrap().angles)
    }

    #[test]
    fn sweep_of_solved_set() {
        let sweep = sweep_error(solved(10.0), 2001).unwrap();
        assert_eq!(sweep.s_values.len(), 2001);
        assert_abs_diff_eq!(sweep.s_values[0], 0.1);
        assert_eq!(*sweep.s_values.last().unwrap(), 1.0);
        assert!(sweep.max_err <= 1e-6, "{:e}", sweep.max_err);
        let recomputed = sweep.errors.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        assert_eq!(recomputed, sweep.max_err);
    }

    #[test]
    fn sine_system_condition_numbers() {
        let sys = build_test_matrix_sin(7, FRAC_PI_2).unwrap();
        assert_eq!(sys.len(), 128);
        assert!((sys.rho_a() - 80.9).abs() <= 0.5, "{}", sys.rho_a());
        assert_abs_diff_eq!(sys.norm(), 1.0, epsilon = 1e-15);
        let mut last = 0.0;
        for n_x in 2..12 {
            let rho = build_test_matrix_sin(n_x, FRAC_PI_2).unwrap().rho_a();
            assert!(rho > last);
            last = rho;
        }
        let reduced = build_test_matrix_sin(7, xi_max_for_norm(0.99).unwrap()).unwrap();
        assert_abs_diff_eq!(reduced.norm(), 0.99, epsilon = 1e-15);
        assert!(build_test_matrix_sin(1, 1.0).is_err());
        assert!(build_test_matrix_sin(7, 2.0).is_err());
    }

    #[test]
    fn inverse_approx_system() {
        let sys = build_test_matrix_f(1e3, 1.0, 8).unwrap();
        assert!((sys.rho_a() / 1e3 - 1.0).abs() <= 1e-9, "{}", sys.rho_a());
        assert_abs_diff_eq!(sys.norm(), 1.0, epsilon = 1e-15);
        let sys = build_test_matrix_f(1e3, 0.99, 8).unwrap();
        assert_abs_diff_eq!(sys.norm(), 0.99, epsilon = 1e-15);
        let d = sys.diagonal();
        let n = d.len();
        for k in 0..n / 2 {
            assert_eq!(d[k], -d[n - 1 - k]);
        }
        assert!(build_test_matrix_f(1e3, 0.0, 8).is_err());
        assert!(build_test_matrix_f(1e3, 1.01, 8).is_err());
    }

    #[test]
    fn two_point_inverse_oracle() {
        let angles = solved(4.0);
        let sys = DiagonalSystem::new(vec![0.5, -0.5, 0.5, -0.5], SystemKind::Custom).unwrap();
        assert_abs_diff_eq!(sys.required_kappa().unwrap(), 2.0);
        let init = sys.uniform_init();
        let out = apply_inverse_via_svd(&sys, angles, &init).unwrap();
        let eta = angles.eta();
        for (k, o) in out.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            // exact action (eta / kappa) / d, up to the approximant's error at s = 1/2
            assert_abs_diff_eq!(*o, sign * 2.0 * eta / 4.0 * init[k], epsilon = 1e-6);
        }
        let report = inversion_error(&sys, angles).unwrap();
        assert!(report.max_abs_err <= 1e-5);
    }

    #[test]
    fn kappa_precondition() {
        let sys = build_test_matrix_sin(7, FRAC_PI_2).unwrap();
        assert!(matches!(
            inversion_error(&sys, solved(10.0)),
            Err(Error::KappaTooSmall { .. })
        ));
        assert!(inversion_error_unchecked(&sys, solved(10.0)).is_ok());
        assert!(apply_inverse_via_svd(&sys, solved(10.0), &[1.0]).is_err());
    }

    #[test]
    fn inversion_adds_nothing_beyond_polynomial_error() {
        let angles = solved(10.0);
        let sys = build_test_matrix_f(10.0, 1.0, 6).unwrap();
        let report = inversion_error(&sys, angles).unwrap();
        let sweep = sweep_error_on(angles, sys.diagonal().iter().map(|d| d.abs()).collect()).unwrap();
        // report is in units of P / eta; the exact side is 1/s rather than F(s),
        // which differ by at most eta e^{-25} on the valid band
        let gap = angles.eta() * (-25.0_f64).exp();
        assert!(report.max_abs_err * angles.eta() <= sweep.max_err + gap + 1e-12);
    }

    #[test]
    fn identity_like_diagonal() {
        let angles = solved(10.0);
        let sys = DiagonalSystem::new(vec![0.8; 4], SystemKind::Custom).unwrap();
        let out = apply_inverse_via_svd(&sys, angles, &sys.uniform_init()).unwrap();
        let p = angles.poly(0.8).unwrap();
        assert!(out.iter().all(|o| *o == p * 0.5));
    }

    #[test]
    fn svd_system_matches_diagonal_path() {
        let angles = solved(10.0);
        let d = [0.9, -0.3, 0.5];
        // rotate by a permutation with signs: A = U_l diag(|d|) U_r^T
        let u_left = vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        let u_right = vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        let sys = SvdSystem {
            u_left,
            singular_values: vec![0.3, 0.9, 0.5],
            u_right,
        };
        let init = [0.2, -0.4, 0.7];
        let out = sys.apply(angles, &init).unwrap();
        let diag = DiagonalSystem::new(d.to_vec(), SystemKind::Custom).unwrap();
        let expect = apply_inverse_via_svd(&diag, angles, &init).unwrap();
        for (a, b) in out.iter().zip(&expect) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
        let a = sys.inversion_error(angles).unwrap();
        let b = inversion_error(&diag, angles).unwrap();
        for (x, y) in a.errors.iter().zip(&b.errors) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    fn small_set() -> AngleSet<f64> {
        let half = [0.7, -0.1, 0.2, -0.05];
        AngleSet::from_half(Convention::Phi, &half, 50.0, 0.125, Origin::Loaded).unwrap()
    }

    proptest! {
        #[test]
        fn odd_and_linear(d in proptest::collection::vec(0.05_f64..1.0, 1..20), scale in 0.1_f64..4.0) {
            let angles = small_set();
            let init: Vec<f64> = (0..d.len()).map(|k| 0.1 + k as f64 * 0.01).collect();
            let pos = DiagonalSystem::new(d.clone(), SystemKind::Custom).unwrap();
            let neg = DiagonalSystem::new(d.iter().map(|x| -x).collect(), SystemKind::Custom).unwrap();
            let a = apply_inverse_unchecked(&pos, &angles, &init).unwrap();
            let b = apply_inverse_unchecked(&neg, &angles, &init).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(*x, -*y);
            }
            let scaled: Vec<f64> = init.iter().map(|x| x * 2.0).collect();
            let c = apply_inverse_unchecked(&pos, &angles, &scaled).unwrap();
            for (x, y) in a.iter().zip(&c) {
                prop_assert_eq!(2.0 * *x, *y);
            }
            let _ = scale;
        }
    }
}
