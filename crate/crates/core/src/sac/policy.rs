//! Tanh-Gaussian actor head and the two inference operations.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::{log1m_tanh_sq, SquashedGaussian1D, LN_SQRT_2PI};
use crate::mode::{analytic_mode, grid_mode};

use super::mlp::Mlp;

pub const LOG_SIGMA_MIN: f64 = -5.0;
pub const LOG_SIGMA_MAX: f64 = 2.0;

/// Actor network: `d -> hidden -> 2d`, emitting the mean followed by the
/// unclamped log-sigma.
pub fn actor_sizes(d: usize, hidden: &[usize]) -> Vec<usize> {
    let mut sizes = vec![d];
    sizes.extend_from_slice(hidden);
    sizes.push(2 * d);
    sizes
}

/// Split one actor output row into `(mu, sigma)`.
pub fn split_head(out: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = out.len() / 2;
    let mu = out[..d].to_vec();
    let sigma = out[d..]
        .iter()
        .map(|ls| ls.clamp(LOG_SIGMA_MIN, LOG_SIGMA_MAX).exp())
        .collect();
    (mu, sigma)
}

pub fn policy_forward(actor: &Mlp, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    split_head(&actor.forward_one(s))
}

/// Reparameterized sample `a = tanh(mu + sigma * eps)` and its joint log-density.
pub fn squash_with_noise(mu: &[f64], sigma: &[f64], eps: &[f64]) -> (Vec<f64>, f64) {
    let mut log_prob = 0.0;
    let a = mu
        .iter()
        .zip(sigma)
        .zip(eps)
        .map(|((&m, &s), &e)| {
            let u = m + s * e;
            log_prob += -0.5 * e * e - s.ln() - LN_SQRT_2PI - log1m_tanh_sq(u);
            u.tanh()
        })
        .collect();
    (a, log_prob)
}

pub fn sample_action_train<R: Rng + ?Sized>(
    mu: &[f64],
    sigma: &[f64],
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let eps: Vec<f64> = (0..mu.len()).map(|_| rng.sample(StandardNormal)).collect();
    squash_with_noise(mu, sigma, &eps)
}

/// Log-density from the squashed distribution itself, used to cross-check
/// the fused training path.
pub fn reference_log_prob(mu: &[f64], sigma: &[f64], u: &[f64]) -> f64 {
    mu.iter()
        .zip(sigma)
        .zip(u)
        .map(|((&m, &s), &ui)| {
            SquashedGaussian1D::new(m, s)
                .expect("actor head yields valid parameters")
                .action_log_prob(ui)
        })
        .sum()
}

pub fn infer_standard(mu: &[f64]) -> Vec<f64> {
    mu.iter().map(|m| m.tanh()).collect()
}

/// Which solver the corrected inference uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSolver {
    #[default]
    Analytic,
    Grid,
}

/// Per-dimension most probable action.
pub fn infer_corrected(mu: &[f64], sigma: &[f64], solver: ModeSolver) -> Vec<f64> {
    mu.iter()
        .zip(sigma)
        .map(|(&m, &s)| {
            let dist = SquashedGaussian1D::new(m, s).expect("actor head yields valid parameters");
            let y = match solver {
                ModeSolver::Analytic => {
                    analytic_mode(&dist)
                        .expect("root finder converges on the clamped sigma range")
                        .y_star
                }
                ModeSolver::Grid => grid_mode(&dist).y_star,
            };
            debug_assert!(
                solver == ModeSolver::Grid || !density_violation(&dist, y),
                "corrected action less probable than tanh(mu) at mu={m}, sigma={s}"
            );
            y
        })
        .collect()
}

/// True when `y` is strictly less probable than `tanh(mu)` beyond rounding.
pub fn density_violation(dist: &SquashedGaussian1D, y: f64) -> bool {
    let std = dist.log_pdf(dist.mu().tanh()).unwrap_or(f64::NEG_INFINITY);
    let corr = dist.log_pdf(y).unwrap_or(f64::NEG_INFINITY);
    corr < std - 1e-12 * std.abs().max(1.0)
}
