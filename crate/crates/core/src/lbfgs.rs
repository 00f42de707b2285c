//! Limited-memory BFGS with an Armijo backtracking line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsConfig {
    /// Number of stored `(s, y)` correction pairs.
    pub history: usize,
    pub max_iterations: usize,
    /// Stop once `||grad||_2` falls to this value.
    pub grad_tolerance: f64,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 10,
            max_iterations: 50_000,
            grad_tolerance: 1e-10,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-loop recursion: returns `-H g`.
fn direction(grad: &[f64], pairs: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for p in pairs.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some(last) = pairs.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for (p, a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        q.iter_mut().zip(&p.s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Minimizes `objective`, which returns the value at `x` and writes the
/// gradient into its second argument.
pub fn minimize<F>(x0: Vec<f64>, config: &LbfgsConfig, mut objective: F) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut value = objective(&x, &mut grad);
    let mut history = vec![value];
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(config.history);
    let mut iterations = 0;

    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];

    loop {
        let grad_norm = norm(&grad);
        if grad_norm <= config.grad_tolerance || value == 0.0 {
            return LbfgsOutcome {
                x,
                value,
                grad_norm,
                iterations,
                converged: true,
                history,
            };
        }
        if iterations >= config.max_iterations {
            break;
        }

        let mut dir = direction(&grad, &pairs);
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            // curvature information went stale; restart from steepest descent
            pairs.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = -grad_norm * grad_norm;
        }
        let mut step = if pairs.is_empty() {
            (1.0 / grad_norm).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..config.max_backtracks {
            trial
                .iter_mut()
                .zip(&x)
                .zip(&dir)
                .for_each(|((t, xi), di)| *t = xi + step * di);
            let trial_value = objective(&trial, &mut trial_grad);
            if trial_value <= value + config.armijo * step * slope {
                accepted = Some(trial_value);
                break;
            }
            step *= 0.5;
        }
        let Some(new_value) = accepted else {
            log::debug!("line search stalled at iteration {iterations}, value {value:e}");
            break;
        };

        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * norm(&s) * norm(&y) && sy > 0.0 {
            if pairs.len() == config.history {
                pairs.pop_front();
            }
            pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        value = new_value;
        history.push(value);
        iterations += 1;
    }

    let grad_norm = norm(&grad);
    LbfgsOutcome {
        x,
        value,
        grad_norm,
        iterations,
        converged: grad_norm <= config.grad_tolerance,
        history,
    }
}
