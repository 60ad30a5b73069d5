//! Central finite-difference check of every SAC loss gradient on a tiny
//! fixed network (d = 2, hidden [8, 8]).

use tanhshift::rng::{stream, Purpose};
use tanhshift::sac::agent::{
    actor_loss_grad, critic_loss_grad, critic_targets, temperature_loss_grad, Nets,
};
use tanhshift::sac::policy::{LOG_SIGMA_MAX, LOG_SIGMA_MIN};
use tanhshift::sac::{Batch, Mlp, Transition};

pub const STEP: f64 = 1e-4;
pub const REL_TOL: f64 = 1e-4;
const FLOOR: f64 = 1e-3;
const D: usize = 2;
const B: usize = 6;

#[derive(Debug, Clone)]
pub struct GradReport {
    pub name: &'static str,
    pub n_params: usize,
    pub max_rel_err: f64,
}

impl GradReport {
    pub fn ok(&self) -> bool {
        self.max_rel_err <= REL_TOL
    }
}

pub fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(FLOOR)
}

fn batch() -> Batch {
    let ts: Vec<Transition> = (0..B)
        .map(|i| {
            let x = i as f64 / B as f64 - 0.45;
            Transition {
                s: vec![x, 0.7 - 1.3 * x],
                a: vec![0.8 * x, -0.55 + 0.1 * x],
                r: -(x * x) - 0.1,
                s_next: vec![0.9 * x + 0.05, 0.6 - x],
                done: i == B - 1,
            }
        })
        .collect();
    Batch::from_transitions(&ts)
}

fn noise(seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = stream(seed, Purpose::Sampling, 9);
    (0..B * D)
        .map(|_| rng.sample(rand_distr::StandardNormal))
        .collect()
}

fn rows(s: &[f64], a: &[f64]) -> Vec<f64> {
    s.chunks(D)
        .zip(a.chunks(D))
        .flat_map(|(x, y)| x.iter().chain(y).copied())
        .collect()
}

fn actions(actor: &Mlp, s: &[f64], eps: &[f64]) -> (Vec<f64>, f64) {
    let mut a = Vec::new();
    let mut clamp_margin = f64::INFINITY;
    for (b, sb) in s.chunks(D).enumerate() {
        let out = actor.forward_one(sb);
        for i in 0..D {
            let raw = out[D + i];
            clamp_margin = clamp_margin
                .min((raw - LOG_SIGMA_MIN).abs())
                .min((raw - LOG_SIGMA_MAX).abs());
            let u = out[i] + raw.clamp(LOG_SIGMA_MIN, LOG_SIGMA_MAX).exp() * eps[b * D + i];
            a.push(u.tanh());
        }
    }
    (a, clamp_margin)
}

/// Fixed network whose ReLU pre-activations, critic minimum and sigma clamp
/// all sit well away from their kinks for the chosen batch and noise.
pub fn fixture() -> (Nets, Batch, Vec<f64>, Vec<f64>) {
    let batch = batch();
    for seed in 0..1000u64 {
        let mut rng = stream(seed, Purpose::NetInit, 0);
        let nets = Nets::new(D, &[8, 8], 0.6, &mut rng);
        let eps = noise(seed);
        let eps_next = noise(seed + 10_000);
        let (a, clamp_margin) = actions(&nets.actor, &batch.s, &eps);
        let x = rows(&batch.s, &a);
        let (a_next, _) = actions(&nets.actor, &batch.s_next, &eps_next);
        let x_next = rows(&batch.s_next, &a_next);
        let x_data = rows(&batch.s, &batch.a);
        let q_gap = x
            .chunks(2 * D)
            .map(|r| (nets.q1.forward_one(r)[0] - nets.q2.forward_one(r)[0]).abs())
            .fold(f64::INFINITY, f64::min);
        let margins = [
            nets.actor.min_hidden_margin(&batch.s, B),
            nets.q1.min_hidden_margin(&x, B),
            nets.q2.min_hidden_margin(&x, B),
            nets.q1.min_hidden_margin(&x_data, B),
            nets.q2.min_hidden_margin(&x_data, B),
            nets.q1_targ.min_hidden_margin(&x_next, B),
            q_gap,
            clamp_margin,
        ];
        if margins.iter().all(|&m| m > 1e-3) {
            return (nets, batch, eps, eps_next);
        }
    }
    panic!("no kink-free fixture found");
}

fn fd_check(
    name: &'static str,
    params: &[f64],
    analytic: &[f64],
    loss: impl Fn(&[f64]) -> f64,
) -> GradReport {
    let mut worst: f64 = 0.0;
    let mut p = params.to_vec();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + STEP;
        let lp = loss(&p);
        p[i] = orig - STEP;
        let lm = loss(&p);
        p[i] = orig;
        worst = worst.max(rel_err(analytic[i], (lp - lm) / (2.0 * STEP)));
    }
    GradReport {
        name,
        n_params: p.len(),
        max_rel_err: worst,
    }
}

pub fn run_suite() -> Vec<GradReport> {
    let (nets, batch, eps, eps_next) = fixture();
    let targets = critic_targets(&nets, &batch, &eps_next, 0.99);
    let mut out = Vec::new();

    for (name, q) in [("critic1", &nets.q1), ("critic2", &nets.q2)] {
        let mut g = vec![0.0; q.num_params()];
        critic_loss_grad(q, &batch, &targets, &mut g);
        out.push(fd_check(name, q.params(), &g, |p| {
            let net = Mlp::from_params(q.sizes(), p.to_vec());
            critic_loss_grad(&net, &batch, &targets, &mut vec![0.0; p.len()])
        }));
    }

    let mut g = vec![0.0; nets.actor.num_params()];
    let (_, mean_lp) = actor_loss_grad(&nets, &batch, &eps, &mut g);
    out.push(fd_check("actor", nets.actor.params(), &g, |p| {
        let mut n = nets.clone();
        n.actor = Mlp::from_params(nets.actor.sizes(), p.to_vec());
        actor_loss_grad(&n, &batch, &eps, &mut vec![0.0; p.len()]).0
    }));

    let h_target = -(D as f64);
    let (_, g_alpha) = temperature_loss_grad(nets.log_alpha, mean_lp, h_target);
    out.push(fd_check(
        "temperature",
        &[nets.log_alpha],
        &[g_alpha],
        |p| temperature_loss_grad(p[0], mean_lp, h_target).0,
    ));

    // the actor's log-alpha path: d(actor loss)/d(log alpha) = alpha * mean log pi
    out.push(fd_check(
        "actor wrt log alpha",
        &[nets.log_alpha],
        &[nets.alpha() * mean_lp],
        |p| {
            let mut n = nets.clone();
            n.log_alpha = p[0];
            actor_loss_grad(&n, &batch, &eps, &mut vec![0.0; n.actor.num_params()]).0
        },
    ));
    out
}
