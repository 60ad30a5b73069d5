//! Twin-critic soft actor-critic losses, gradients and the update step.
//!
//! Every loss takes its Gaussian noise explicitly so the gradients can be
//! checked against finite differences with the noise held fixed.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dist::log1m_tanh_sq;
use crate::error::{Error, Result};
use crate::rng::Stream;

use super::adam::Adam;
use super::mlp::{Cache, Mlp};
use super::policy::{actor_sizes, LOG_SIGMA_MAX, LOG_SIGMA_MIN};
use super::replay::Batch;

/// Critic network: `(s, a) -> hidden -> 1`.
pub fn critic_sizes(d: usize, hidden: &[usize]) -> Vec<usize> {
    let mut sizes = vec![2 * d];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    sizes
}

/// Online and target networks plus the log-temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Nets {
    pub actor: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_targ: Mlp,
    pub q2_targ: Mlp,
    pub log_alpha: f64,
}

impl Nets {
    pub fn new(d: usize, hidden: &[usize], init_alpha: f64, rng: &mut Stream) -> Self {
        let actor = Mlp::new(&actor_sizes(d, hidden), rng);
        let q1 = Mlp::new(&critic_sizes(d, hidden), rng);
        let q2 = Mlp::new(&critic_sizes(d, hidden), rng);
        Self {
            q1_targ: q1.clone(),
            q2_targ: q2.clone(),
            actor,
            q1,
            q2,
            log_alpha: init_alpha.ln(),
        }
    }

    pub fn dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossReport {
    pub critic1: f64,
    pub critic2: f64,
    pub actor: f64,
    pub alpha: f64,
    /// Minibatch estimate of the policy entropy, `-mean(log pi)`.
    pub entropy: f64,
}

/// Squashed reparameterized sample for every row of an actor output.
struct ActorSample {
    a: Vec<f64>,
    log_prob: Vec<f64>,
}

fn sample_rows(out: &[f64], eps: &[f64], d: usize) -> ActorSample {
    let batch = eps.len() / d;
    let mut a = Vec::with_capacity(batch * d);
    let mut log_prob = Vec::with_capacity(batch);
    for (row, e) in out.chunks_exact(2 * d).zip(eps.chunks_exact(d)) {
        let mut lp = 0.0;
        for i in 0..d {
            let ls = row[d + i].clamp(LOG_SIGMA_MIN, LOG_SIGMA_MAX);
            let u = row[i] + ls.exp() * e[i];
            lp += -0.5 * e[i] * e[i] - ls - crate::dist::LN_SQRT_2PI - log1m_tanh_sq(u);
            a.push(u.tanh());
        }
        log_prob.push(lp);
    }
    ActorSample { a, log_prob }
}

fn concat_rows(s: &[f64], a: &[f64], d: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * s.len());
    for (sr, ar) in s.chunks_exact(d).zip(a.chunks_exact(d)) {
        x.extend_from_slice(sr);
        x.extend_from_slice(ar);
    }
    x
}

/// Bootstrapped targets `r + gamma (1 - done) (min Q'(s', a') - alpha log pi(a'|s'))`
/// with `a' = tanh(mu(s') + sigma(s') eps_next)`.
pub fn critic_targets(nets: &Nets, batch: &Batch, eps_next: &[f64], gamma: f64) -> Vec<f64> {
    let d = nets.dim();
    let n = batch.size;
    let mut cache = Cache::default();
    nets.actor.forward(&batch.s_next, n, &mut cache);
    let next = sample_rows(cache.output(), eps_next, d);
    let x = concat_rows(&batch.s_next, &next.a, d);
    let mut c1 = Cache::default();
    let mut c2 = Cache::default();
    nets.q1_targ.forward(&x, n, &mut c1);
    nets.q2_targ.forward(&x, n, &mut c2);
    let alpha = nets.alpha();
    (0..n)
        .map(|b| {
            let q = c1.output()[b].min(c2.output()[b]);
            batch.r[b] + gamma * (1.0 - batch.done[b]) * (q - alpha * next.log_prob[b])
        })
        .collect()
}

/// Mean squared error of `q` against fixed targets; gradients are added into `grads`.
pub fn critic_loss_grad(q: &Mlp, batch: &Batch, targets: &[f64], grads: &mut [f64]) -> f64 {
    let d = q.input_dim() / 2;
    let n = batch.size;
    let x = concat_rows(&batch.s, &batch.a, d);
    let mut cache = Cache::default();
    q.forward(&x, n, &mut cache);
    let mut loss = 0.0;
    let d_out: Vec<f64> = cache
        .output()
        .iter()
        .zip(targets)
        .map(|(&qv, &y)| {
            loss += (qv - y).powi(2);
            2.0 * (qv - y) / n as f64
        })
        .collect();
    q.backward(&cache, &d_out, Some(grads), None);
    loss / n as f64
}

/// Actor loss `mean(alpha log pi - min(Q1, Q2))` with the critics held fixed.
/// Gradients with respect to the actor are added into `grads`. Returns the
/// loss and the mean log-probability.
pub fn actor_loss_grad(nets: &Nets, batch: &Batch, eps: &[f64], grads: &mut [f64]) -> (f64, f64) {
    let d = nets.dim();
    let n = batch.size;
    let nf = n as f64;
    let alpha = nets.alpha();

    let mut ac = Cache::default();
    nets.actor.forward(&batch.s, n, &mut ac);
    let out = ac.output().to_vec();
    let smp = sample_rows(&out, eps, d);
    let x = concat_rows(&batch.s, &smp.a, d);

    let mut c1 = Cache::default();
    let mut c2 = Cache::default();
    nets.q1.forward(&x, n, &mut c1);
    nets.q2.forward(&x, n, &mut c2);
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let mut loss = 0.0;
    for b in 0..n {
        let (q1, q2) = (c1.output()[b], c2.output()[b]);
        if q1 <= q2 {
            d1[b] = -1.0 / nf;
        } else {
            d2[b] = -1.0 / nf;
        }
        loss += alpha * smp.log_prob[b] - q1.min(q2);
    }
    let mut dx1 = vec![0.0; x.len()];
    let mut dx2 = vec![0.0; x.len()];
    nets.q1.backward(&c1, &d1, None, Some(&mut dx1));
    nets.q2.backward(&c2, &d2, None, Some(&mut dx2));

    let mut d_out = vec![0.0; out.len()];
    for b in 0..n {
        let row = &out[b * 2 * d..(b + 1) * 2 * d];
        for i in 0..d {
            let raw = row[d + i];
            let ls = raw.clamp(LOG_SIGMA_MIN, LOG_SIGMA_MAX);
            let sigma = ls.exp();
            let e = eps[b * d + i];
            let u = row[i] + sigma * e;
            let a = smp.a[b * d + i];
            let dl_da = dx1[b * 2 * d + d + i] + dx2[b * 2 * d + d + i];
            let dl_du = alpha / nf * 2.0 * u.tanh() + dl_da * (1.0 - a * a);
            d_out[b * 2 * d + i] = dl_du;
            if (LOG_SIGMA_MIN..=LOG_SIGMA_MAX).contains(&raw) {
                d_out[b * 2 * d + d + i] = dl_du * sigma * e - alpha / nf;
            }
        }
    }
    nets.actor.backward(&ac, &d_out, Some(grads), None);
    let mean_lp = smp.log_prob.iter().sum::<f64>() / nf;
    (loss / nf, mean_lp)
}

/// Temperature loss `-alpha (mean log pi + target_entropy)` and its derivative
/// with respect to `log alpha`, which equals the loss itself.
pub fn temperature_loss_grad(
    log_alpha: f64,
    mean_log_prob: f64,
    target_entropy: f64,
) -> (f64, f64) {
    let loss = -log_alpha.exp() * (mean_log_prob + target_entropy);
    (loss, loss)
}

/// `target <- (1 - tau) target + tau online`.
pub fn polyak(target: &mut Mlp, online: &Mlp, tau: f64) {
    for (t, &o) in target.params_mut().iter_mut().zip(online.params()) {
        *t = (1.0 - tau) * *t + tau * o;
    }
}

/// Hyperparameters the update step needs.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateParams {
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub temperature_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub target_entropy: f64,
}

/// Networks together with their optimizer state.
#[derive(Debug, Clone)]
pub struct Agent {
    pub nets: Nets,
    params: UpdateParams,
    opt_actor: Adam,
    opt_q1: Adam,
    opt_q2: Adam,
    opt_alpha: Adam,
    updates: usize,
}

impl Agent {
    pub fn new(nets: Nets, params: UpdateParams) -> Self {
        Self {
            opt_actor: Adam::new(nets.actor.num_params(), params.actor_lr),
            opt_q1: Adam::new(nets.q1.num_params(), params.critic_lr),
            opt_q2: Adam::new(nets.q2.num_params(), params.critic_lr),
            opt_alpha: Adam::new(1, params.temperature_lr),
            nets,
            params,
            updates: 0,
        }
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// One gradient step on both critics, the actor and the temperature,
    /// followed by the target-network update.
    pub fn update(&mut self, batch: &Batch, rng: &mut Stream) -> Result<LossReport> {
        let d = self.nets.dim();
        let n = batch.size;
        let p = &self.params;
        let update = self.updates;
        let check = |what, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFiniteLoss { what, update })
            }
        };

        let eps_next: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        let targets = critic_targets(&self.nets, batch, &eps_next, p.gamma);

        let mut g1 = vec![0.0; self.nets.q1.num_params()];
        let critic1 = critic_loss_grad(&self.nets.q1, batch, &targets, &mut g1);
        check("critic1", critic1)?;
        let mut g2 = vec![0.0; self.nets.q2.num_params()];
        let critic2 = critic_loss_grad(&self.nets.q2, batch, &targets, &mut g2);
        check("critic2", critic2)?;
        self.opt_q1.step(self.nets.q1.params_mut(), &g1);
        self.opt_q2.step(self.nets.q2.params_mut(), &g2);

        let eps: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        let mut ga = vec![0.0; self.nets.actor.num_params()];
        let (actor, mean_lp) = actor_loss_grad(&self.nets, batch, &eps, &mut ga);
        check("actor", actor)?;
        self.opt_actor.step(self.nets.actor.params_mut(), &ga);

        let (t_loss, t_grad) =
            temperature_loss_grad(self.nets.log_alpha, mean_lp, p.target_entropy);
        check("temperature", t_loss)?;
        let mut la = [self.nets.log_alpha];
        self.opt_alpha.step(&mut la, &[t_grad]);
        self.nets.log_alpha = la[0];

        polyak(&mut self.nets.q1_targ, &self.nets.q1, p.tau);
        polyak(&mut self.nets.q2_targ, &self.nets.q2, p.tau);
        self.updates += 1;
        Ok(LossReport {
            critic1,
            critic2,
            actor,
            alpha: self.nets.alpha(),
            entropy: -mean_lp,
        })
    }
}
