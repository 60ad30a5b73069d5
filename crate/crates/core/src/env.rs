//! Target-tracking control task with optimal actions near the action bounds.
//!
//! The state `s` lives in `[-1, 1]^d`, the reward is `-|a - s|^2 / d` and the
//! state decays as `s' = clamp(rho * s + eta * xi)`. The optimal action is
//! `a = s`, so every episode has a known optimal return of zero. Initial
//! states are uniform on `[-b, b]^d` with `b` close to 1, where the gap
//! between `tanh(mu)` and the squashed mode is largest.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{stream, Purpose, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub d: usize,
    pub horizon: usize,
    pub boundary_frac: f64,
    pub decay: f64,
    pub process_noise: f64,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            d: 8,
            horizon: 10,
            boundary_frac: 0.95,
            decay: 0.9,
            process_noise: 0.02,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("d", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be >= 1"));
        }
        if !(self.boundary_frac > 0.0 && self.boundary_frac < 1.0) {
            return Err(invalid("boundary_frac", "must lie in (0, 1)"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(invalid("decay", "must lie in (0, 1)"));
        }
        if !(self.process_noise >= 0.0 && self.process_noise.is_finite()) {
            return Err(invalid("process_noise", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Scale that maps an episode return onto the normalized score.
    pub fn score_scale(&self) -> f64 {
        self.horizon as f64 * 0.25
    }

    /// `max(0, 1 + (ret - optimal) / (0.25 * horizon))`.
    pub fn normalized_score(&self, ret: f64, optimal: f64) -> f64 {
        (1.0 + (ret - optimal) / self.score_scale()).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub s: Vec<f64>,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: EnvState,
    pub reward: f64,
    pub done: bool,
}

/// Per-episode seed for the `n`th episode of a given kind within a run.
pub fn episode_seed(run_seed: u64, kind: Purpose, n: u32) -> u64 {
    stream(run_seed, kind, n).next_u64()
}

/// One environment instance. Each episode draws from its own stream.
#[derive(Debug, Clone)]
pub struct ToyEnv {
    cfg: EnvConfig,
    rng: Stream,
    state: EnvState,
}

impl ToyEnv {
    /// A fresh environment, already reset to `episode_seed`.
    pub fn new(cfg: EnvConfig, episode_seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut env = Self {
            rng: stream(episode_seed, Purpose::TrainEpisode, 0),
            state: EnvState {
                s: Vec::new(),
                t: 0,
            },
            cfg,
        };
        env.reset(episode_seed);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn reset(&mut self, episode_seed: u64) -> &EnvState {
        self.rng = stream(episode_seed, Purpose::TrainEpisode, 0);
        let b = self.cfg.boundary_frac;
        let s = (0..self.cfg.d)
            .map(|_| self.rng.random_range(-b..=b))
            .collect();
        self.state = EnvState { s, t: 0 };
        &self.state
    }

    pub fn step(&mut self, a: &[f64]) -> Result<Step> {
        let cfg = &self.cfg;
        if a.len() != cfg.d {
            return Err(Error::DimensionMismatch {
                expected: cfg.d,
                got: a.len(),
            });
        }
        if let Some(&bad) = a.iter().find(|x| x.is_nan() || x.abs() > 1.0) {
            return Err(invalid(
                "action",
                format!("component {bad} outside [-1, 1]"),
            ));
        }
        if self.state.t >= cfg.horizon {
            return Err(invalid("state", "episode already finished"));
        }
        let sq: f64 = a
            .iter()
            .zip(&self.state.s)
            .map(|(ai, si)| (ai - si).powi(2))
            .sum();
        let reward = -sq / cfg.d as f64;
        for si in self.state.s.iter_mut() {
            let xi: f64 = self.rng.sample(StandardNormal);
            *si = (cfg.decay * *si + cfg.process_noise * xi).clamp(-1.0, 1.0);
        }
        self.state.t += 1;
        Ok(Step {
            state: self.state.clone(),
            reward,
            done: self.state.t == cfg.horizon,
        })
    }
}

/// Return of the `a = s` policy on the episode `episode_seed`.
pub fn optimal_return(cfg: &EnvConfig, episode_seed: u64) -> Result<f64> {
    let mut env = ToyEnv::new(cfg.clone(), episode_seed)?;
    let mut ret = 0.0;
    loop {
        let a = env.state().s.clone();
        let step = env.step(&a)?;
        ret += step.reward;
        if step.done {
            return Ok(ret);
        }
    }
}
