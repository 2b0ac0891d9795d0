//! First-order optimizers over real parameter vectors.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    Gd,
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Optimizer::Gd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(Error::InvalidArgument(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeConfig {
    pub max_iters: usize,
    pub rate: f64,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rate: 0.05,
            tol: 1e-8,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub converged: bool,
}

impl Trajectory {
    pub fn final_value(&self) -> Option<f64> {
        self.steps.last().map(|s| s.value)
    }

    pub fn final_theta(&self) -> Option<&[f64]> {
        self.steps.last().map(|s| s.theta.as_slice())
    }
}

/// Runs the optimizer from `theta0`. Step `i` records the point reached after
/// `i` updates; at most `max_iters` updates are made.
pub fn minimize<F>(mut objective: F, theta0: &[f64], optimizer: &Optimizer, cfg: &MinimizeConfig) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    if theta0.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("initial parameters must be finite".into()));
    }
    let mut theta = theta0.to_vec();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];
    let mut out = Trajectory::default();
    for iter in 0..=cfg.max_iters {
        let (value, grad) = objective(&theta)?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::DivergenceDetected(iter));
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        out.steps.push(Step {
            iter,
            theta: theta.clone(),
            value,
            grad_norm,
        });
        if grad_norm < cfg.tol {
            out.converged = true;
            break;
        }
        if iter == cfg.max_iters {
            break;
        }
        match optimizer {
            Optimizer::Gd => {
                for (t, g) in theta.iter_mut().zip(&grad) {
                    *t -= cfg.rate * g;
                }
            }
            Optimizer::Adam => {
                let k = (iter + 1) as i32;
                let c1 = 1.0 - cfg.beta1.powi(k);
                let c2 = 1.0 - cfg.beta2.powi(k);
                for i in 0..theta.len() {
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
                    theta[i] -= cfg.rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.adam_eps);
                }
            }
        }
    }
    Ok(out)
}

/// Independent runs from uniform `[−π, π)` starts drawn from one seeded
/// stream; returns the run with the lowest final value (earliest on ties).
pub fn minimize_restarts<F>(
    objective: F,
    n_params: usize,
    optimizer: &Optimizer,
    cfg: &MinimizeConfig,
    restarts: usize,
    seed: u64,
) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
{
    let mut rng = seeded(seed);
    let starts: Vec<Vec<f64>> = (0..restarts.max(1))
        .map(|_| (0..n_params).map(|_| rng.random_range(-PI..PI)).collect())
        .collect();
    let runs: Vec<Trajectory> = starts
        .par_iter()
        .map(|t0| minimize(&objective, t0, optimizer, cfg))
        .collect::<Result<_>>()?;
    let mut best: Option<Trajectory> = None;
    for run in runs {
        let better = match &best {
            None => true,
            Some(b) => run.final_value() < b.final_value(),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
