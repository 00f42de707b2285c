//! High-precision angle computation.
//!
//! The first `N_a / 2` entries of `alpha` are the only free parameters; the
//! second half is their mirror image. Starting from `alpha_0 = pi/4`,
//! `alpha_{j>0} = 0`, the loss
//! `L = sum_k (P[alpha](x_k) - Fbar(x_k))^2` over the positive roots `x_k`
//! of `T_{N_a}` is minimized by L-BFGS, where `Fbar` is the truncated
//! Chebyshev series of `eta F(s) / kappa`.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::cheb::{choose_degree, compute_coeffs_auto, ChebSeries, Parity};
use crate::error::{Error, Result};
use crate::lbfgs::{self, LbfgsConfig};
use crate::qsp_eval::{AngleSet, Convention, Origin, SymmetricQsp};
use crate::target_fn::{TargetSpec, DEFAULT_ETA};

/// Points in the dense residual grid over `[1/kappa, 1]`.
pub const RESIDUAL_GRID_POINTS: usize = 2001;

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub kappa_qsvt: f64,
    pub eta: f64,
    pub eps_target: f64,
    /// Fixes `N_a` instead of deriving it from `eps_target`.
    pub na_override: Option<usize>,
    /// Quadrature size for the Chebyshev coefficients; `2 N_a` when unset.
    pub quadrature_nq: Option<usize>,
    pub max_iterations: usize,
    pub grad_tolerance: f64,
    pub history_size: usize,
}

impl SolveConfig {
    pub fn new(kappa_qsvt: f64) -> Self {
        Self {
            kappa_qsvt,
            eta: DEFAULT_ETA,
            eps_target: 1e-7,
            na_override: None,
            quadrature_nq: None,
            max_iterations: 50_000,
            grad_tolerance: 1e-10,
            history_size: 10,
        }
    }

    pub fn validate(&self) -> Result<TargetSpec<f64>> {
        let target = TargetSpec::new(self.kappa_qsvt, self.eta)?;
        if !(self.eps_target > 0.0 && self.eps_target < self.eta) {
            return Err(Error::invalid(format!(
                "eps_target must lie in (0, eta), got {}",
                self.eps_target
            )));
        }
        if let Some(na) = self.na_override {
            if na < 2 || na % 2 != 0 {
                return Err(Error::OddAngleCount(na));
            }
        }
        if self.history_size == 0 {
            return Err(Error::invalid("history_size must be positive"));
        }
        if !(self.grad_tolerance > 0.0) {
            return Err(Error::invalid("grad_tolerance must be positive"));
        }
        Ok(target)
    }

    /// `N_a` this configuration will solve for.
    pub fn num_angles(&self) -> Result<usize> {
        let target = self.validate()?;
        match self.na_override {
            Some(na) => Ok(na),
            None => choose_degree(&target, self.eps_target),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Phi convention, exactly mirror-symmetric.
    pub angles: AngleSet<f64>,
    pub final_loss: f64,
    pub iterations: usize,
    /// `max |P(s) - eta F(s) / kappa|` over the dense grid on `[1/kappa, 1]`.
    pub max_residual: f64,
    pub argmax_s: f64,
    pub grad_norm: f64,
    /// False when the gradient tolerance was not reached; `angles` then
    /// holds the best point found.
    pub converged: bool,
    /// Loss after each accepted step.
    pub loss_history: Vec<f64>,
}

/// Positive roots `cos((2k+1) pi / (2 N_a))`, `k = 0 .. N_a/2`, decreasing.
pub fn cheb_sample_nodes(na: usize) -> Result<Vec<f64>> {
    if na < 2 || !na.is_multiple_of(2) {
        return Err(Error::OddAngleCount(na));
    }
    Ok((0..na / 2)
        .map(|k| ((2 * k + 1) as f64 * PI / (2 * na) as f64).cos())
        .collect())
}

/// Loss and gradient over the sample nodes for half-length `alpha`.
pub(crate) struct NodeLoss {
    nodes: Vec<f64>,
    targets: Vec<f64>,
    chunk: usize,
}

impl NodeLoss {
    pub(crate) fn new(nodes: Vec<f64>, targets: Vec<f64>) -> Self {
        let d = nodes.len();
        // fixed partition, independent of the thread count
        let chunk = (d / 64).max(16);
        Self {
            nodes,
            targets,
            chunk,
        }
    }

    pub(crate) fn value_and_grad(&self, half_alpha: &[f64], grad: &mut [f64]) -> f64 {
        let kernel = SymmetricQsp::from_half_alpha(half_alpha);
        let d = half_alpha.len();
        let partials: Vec<(f64, Vec<f64>)> = self
            .nodes
            .par_chunks(self.chunk)
            .zip(self.targets.par_chunks(self.chunk))
            .map(|(xs, fs)| {
                let mut g = vec![0.0; d];
                let mut rows = Vec::with_capacity(d);
                let mut loss = 0.0;
                for (&x, &f) in xs.iter().zip(fs) {
                    let mut r = 0.0;
                    kernel.value_and_grad_into(x, &mut g, &mut rows, |p| {
                        r = p - f;
                        2.0 * r
                    });
                    loss += r * r;
                }
                (loss, g)
            })
            .collect();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (l, g) in partials {
            loss += l;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        loss
    }

    #[cfg(test)]
    pub(crate) fn max_node_residual(&self, half_alpha: &[f64]) -> f64 {
        let kernel = SymmetricQsp::from_half_alpha(half_alpha);
        self.nodes
            .par_iter()
            .zip(self.targets.par_iter())
            .map(|(&x, &f)| (kernel.value(x) - f).abs())
            .reduce(|| 0.0, f64::max)
    }
}

/// Chebyshev series of the normalized target used as `Fbar`.
pub fn target_series(target: &TargetSpec<f64>, na: usize, nq: usize) -> Result<ChebSeries<f64>> {
    compute_coeffs_auto(|s| target.eval(s), na - 1, nq, Parity::Odd)
}

pub fn solve_angles(config: &SolveConfig) -> Result<SolveResult> {
    let target = config.validate()?;
    let na = config.num_angles()?;
    let nq = config.quadrature_nq.unwrap_or(2 * na);
    let series = target_series(&target, na, nq)?;
    let nodes = cheb_sample_nodes(na)?;
    let targets: Vec<f64> = nodes.iter().map(|&x| series.eval(x)).collect();
    let loss = NodeLoss::new(nodes, targets);

    let mut start = vec![0.0; na / 2];
    start[0] = FRAC_PI_4;
    let lbfgs_config = LbfgsConfig {
        history: config.history_size,
        max_iterations: config.max_iterations,
        grad_tolerance: config.grad_tolerance,
        ..LbfgsConfig::default()
    };
    log::info!(
        "solving kappa = {}, N_a = {na}, N_q = {nq}",
        config.kappa_qsvt
    );
    let outcome = lbfgs::minimize(start, &lbfgs_config, |x, g| loss.value_and_grad(x, g));
    if !outcome.converged {
        log::warn!(
            "kappa = {}: gradient norm {:e} above tolerance after {} iterations",
            config.kappa_qsvt,
            outcome.grad_norm,
            outcome.iterations
        );
    }

    let angles = AngleSet::from_half(
        Convention::Alpha,
        &outcome.x,
        config.kappa_qsvt,
        config.eta,
        Origin::Solved,
    )?
    .convert(Convention::Phi);
    let (max_residual, argmax_s) = residual_report(&angles, RESIDUAL_GRID_POINTS);
    let angles = angles.with_eps_reported(Some(max_residual));
    Ok(SolveResult {
        angles,
        final_loss: outcome.value,
        iterations: outcome.iterations,
        max_residual,
        argmax_s,
        grad_norm: outcome.grad_norm,
        converged: outcome.converged,
        loss_history: outcome.history,
    })
}

/// Uniform grid of `points` values over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Largest `|P(s) - eta F(s) / kappa|` on a uniform grid over `[1/kappa, 1]`
/// and where it occurs.
pub fn residual_report(angles: &AngleSet<f64>, grid_points: usize) -> (f64, f64) {
    let target = TargetSpec::new(angles.kappa(), angles.eta())
        .expect("AngleSet guarantees kappa >= 1 and eta in (0, 1)");
    let kernel = SymmetricQsp::from_angles(angles);
    let grid = linspace(1.0 / angles.kappa(), 1.0, grid_points);
    grid.par_iter()
        .map(|&s| ((kernel.value(s) - target.eval(s)).abs(), s))
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, f64::NAN), |best, (e, s)| if e > best.0 || best.1.is_nan() { (e, s) } else { best })
}
