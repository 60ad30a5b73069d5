//! Training loop, evaluation checkpoints and run records.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::SquashedGaussian1D;
use crate::env::{episode_seed, optimal_return, EnvConfig, ToyEnv};
use crate::error::{invalid, Error, Result};
use crate::rng::{stream, Purpose};

use super::agent::{Agent, Nets, UpdateParams};
use super::policy::{
    density_violation, infer_corrected, infer_standard, policy_forward, sample_action_train,
    ModeSolver,
};
use super::replay::{ReplayBuffer, Transition};

/// How evaluation actions are chosen from the policy head.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMode {
    /// `tanh(mu)`.
    #[default]
    Standard,
    /// Per-dimension mode of the squashed density.
    Corrected,
}

impl InferenceMode {
    pub const ALL: [InferenceMode; 2] = [InferenceMode::Standard, InferenceMode::Corrected];

    pub fn name(self) -> &'static str {
        match self {
            InferenceMode::Standard => "standard",
            InferenceMode::Corrected => "corrected",
        }
    }
}

impl fmt::Display for InferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(InferenceMode::Standard),
            "corrected" => Ok(InferenceMode::Corrected),
            _ => Err(invalid(
                "mode",
                format!("expected standard or corrected, got `{s}`"),
            )),
        }
    }
}

/// Inclusive seed span written `a-b` (or a single seed `a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl SeedRange {
    pub fn new(first: u64, last: u64) -> Result<Self> {
        if first > last {
            return Err(invalid("seeds", format!("empty range {first}-{last}")));
        }
        Ok(Self { first, last })
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for SeedRange {
    fn default() -> Self {
        Self { first: 0, last: 4 }
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.last)
    }
}

impl FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| invalid("seeds", format!("expected `a-b`, got `{s}`")))
        };
        match s.split_once('-') {
            Some((a, b)) => SeedRange::new(parse(a)?, parse(b)?),
            None => {
                let a = parse(s)?;
                SeedRange::new(a, a)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SacConfig {
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub temperature_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub start_steps: usize,
    pub max_steps: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub hidden_dims: Vec<usize>,
    /// `None` means `-d`.
    pub target_entropy: Option<f64>,
    pub init_temperature: f64,
    pub replay_capacity: usize,
    pub seed_range: SeedRange,
    pub inference_mode: InferenceMode,
    pub corrected_solver: ModeSolver,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            temperature_lr: 3e-4,
            gamma: 0.99,
            tau: 0.005,
            batch_size: 64,
            start_steps: 1000,
            max_steps: 50_000,
            eval_interval: 2500,
            eval_episodes: 10,
            hidden_dims: vec![64, 64],
            target_entropy: None,
            init_temperature: 1.0,
            replay_capacity: 100_000,
            seed_range: SeedRange::default(),
            inference_mode: InferenceMode::Standard,
            corrected_solver: ModeSolver::Analytic,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, lr) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("temperature_lr", self.temperature_lr),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(invalid("tau", "must lie in (0, 1]"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid("gamma", "must lie in (0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be >= 1"));
        }
        if self.eval_interval == 0 {
            return Err(invalid("eval_interval", "must be >= 1"));
        }
        if self.eval_episodes == 0 {
            return Err(invalid("eval_episodes", "must be >= 1"));
        }
        if self.hidden_dims.len() != 2 || self.hidden_dims.contains(&0) {
            return Err(invalid("hidden_dims", "need exactly two positive widths"));
        }
        if !(self.init_temperature > 0.0 && self.init_temperature.is_finite()) {
            return Err(invalid("init_temperature", "must be > 0"));
        }
        if self.replay_capacity == 0 {
            return Err(invalid("replay_capacity", "must be >= 1"));
        }
        if self.target_entropy.is_some_and(|h| !h.is_finite()) {
            return Err(invalid("target_entropy", "must be finite"));
        }
        if self.seed_range.first > self.seed_range.last {
            return Err(invalid("seed_range", "first must not exceed last"));
        }
        Ok(())
    }

    pub fn target_entropy_for(&self, d: usize) -> f64 {
        self.target_entropy.unwrap_or(-(d as f64))
    }
}

/// Configuration snapshot stored with every run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub sac: SacConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub steps: usize,
    /// Raw evaluation returns, one per episode.
    pub scores: Vec<f64>,
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub mode: InferenceMode,
    pub config: RunConfig,
    pub checkpoints: Vec<Checkpoint>,
    /// Corrected-mode action components compared against `tanh(mu)`.
    #[serde(default)]
    pub density_checks: u64,
    #[serde(default)]
    pub density_violations: u64,
}

impl RunRecord {
    pub fn file_name(&self) -> String {
        format!("run_{}_{}.json", self.mode, self.seed)
    }
}

/// Seed from which all streams of one run are derived.
fn run_key(seed: u64, env_seed: u64) -> u64 {
    seed ^ env_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Train one run and evaluate it with `sac_cfg.inference_mode`.
pub fn train(env_cfg: &EnvConfig, sac_cfg: &SacConfig, seed: u64) -> Result<RunRecord> {
    let mut v = train_modes(env_cfg, sac_cfg, seed, &[sac_cfg.inference_mode])?;
    Ok(v.remove(0))
}

/// Train one run and evaluate every checkpoint under each of `modes`.
///
/// Evaluation reads the networks but never touches the training streams, so
/// each returned record equals the one `train` produces for that mode.
pub fn train_modes(
    env_cfg: &EnvConfig,
    sac_cfg: &SacConfig,
    seed: u64,
    modes: &[InferenceMode],
) -> Result<Vec<RunRecord>> {
    Ok(Trainer::new(env_cfg, sac_cfg, seed, modes)?.run()?.records)
}

struct Evaluator {
    mode: InferenceMode,
    record: RunRecord,
}

/// Output of a full training run, including the replay contents for
/// isolation checks.
pub struct TrainOutput {
    pub records: Vec<RunRecord>,
    pub replay: ReplayBuffer,
}

struct Trainer<'a> {
    env_cfg: &'a EnvConfig,
    cfg: &'a SacConfig,
    key: u64,
    evals: Vec<Evaluator>,
    eval_seeds: Vec<u64>,
    eval_optimal: Vec<f64>,
}

impl<'a> Trainer<'a> {
    fn new(
        env_cfg: &'a EnvConfig,
        cfg: &'a SacConfig,
        seed: u64,
        modes: &[InferenceMode],
    ) -> Result<Self> {
        env_cfg.validate()?;
        cfg.validate()?;
        if modes.is_empty() {
            return Err(invalid("modes", "need at least one inference mode"));
        }
        let key = run_key(seed, env_cfg.seed);
        let eval_seeds: Vec<u64> = (0..cfg.eval_episodes as u32)
            .map(|j| episode_seed(key, Purpose::EvalEpisode, j))
            .collect();
        let eval_optimal = eval_seeds
            .iter()
            .map(|&s| optimal_return(env_cfg, s))
            .collect::<Result<Vec<_>>>()?;
        let evals = modes
            .iter()
            .map(|&mode| Evaluator {
                mode,
                record: RunRecord {
                    seed,
                    mode,
                    config: RunConfig {
                        env: env_cfg.clone(),
                        sac: SacConfig {
                            inference_mode: mode,
                            ..cfg.clone()
                        },
                    },
                    checkpoints: Vec::new(),
                    density_checks: 0,
                    density_violations: 0,
                },
            })
            .collect();
        Ok(Self {
            env_cfg,
            cfg,
            key,
            evals,
            eval_seeds,
            eval_optimal,
        })
    }

    fn run(mut self) -> Result<TrainOutput> {
        let (cfg, key, d) = (self.cfg, self.key, self.env_cfg.d);
        let mut init_rng = stream(key, Purpose::NetInit, 0);
        let nets = Nets::new(d, &cfg.hidden_dims, cfg.init_temperature, &mut init_rng);
        let mut agent = Agent::new(
            nets,
            UpdateParams {
                actor_lr: cfg.actor_lr,
                critic_lr: cfg.critic_lr,
                temperature_lr: cfg.temperature_lr,
                gamma: cfg.gamma,
                tau: cfg.tau,
                target_entropy: cfg.target_entropy_for(d),
            },
        );
        let mut explore = stream(key, Purpose::Exploration, 0);
        let mut rollout = stream(key, Purpose::Policy, 0);
        let mut update_rng = stream(key, Purpose::Policy, 1);
        let mut replay_rng = stream(key, Purpose::Replay, 0);
        let mut replay = ReplayBuffer::new(cfg.replay_capacity);

        let mut episode = 0u32;
        let mut env = ToyEnv::new(
            self.env_cfg.clone(),
            episode_seed(key, Purpose::TrainEpisode, 0),
        )?;
        for step in 1..=cfg.max_steps {
            let s = env.state().s.clone();
            let a = if step <= cfg.start_steps {
                (0..d).map(|_| explore.random_range(-1.0..=1.0)).collect()
            } else {
                let (mu, sigma) = policy_forward(&agent.nets.actor, &s);
                sample_action_train(&mu, &sigma, &mut rollout).0
            };
            let st = env.step(&a)?;
            replay.push(Transition {
                s,
                a,
                r: st.reward,
                s_next: st.state.s,
                done: st.done,
            });
            if st.done {
                episode += 1;
                env.reset(episode_seed(key, Purpose::TrainEpisode, episode));
            }
            if step > cfg.start_steps && replay.len() >= cfg.batch_size {
                let batch = replay.sample(cfg.batch_size, &mut replay_rng);
                agent.update(&batch, &mut update_rng)?;
            }
            if step % cfg.eval_interval == 0 {
                self.evaluate(&agent.nets, step)?;
            }
        }
        Ok(TrainOutput {
            records: self.evals.into_iter().map(|e| e.record).collect(),
            replay,
        })
    }

    fn evaluate(&mut self, nets: &Nets, steps: usize) -> Result<()> {
        let solver = self.cfg.corrected_solver;
        for ev in &mut self.evals {
            let mut scores = Vec::with_capacity(self.eval_seeds.len());
            let mut normalized = Vec::with_capacity(self.eval_seeds.len());
            for (&seed, &opt) in self.eval_seeds.iter().zip(&self.eval_optimal) {
                let mut env = ToyEnv::new(self.env_cfg.clone(), seed)?;
                let mut ret = 0.0;
                loop {
                    let (mu, sigma) = policy_forward(&nets.actor, &env.state().s);
                    let a = match ev.mode {
                        InferenceMode::Standard => infer_standard(&mu),
                        InferenceMode::Corrected => {
                            let a = infer_corrected(&mu, &sigma, solver);
                            for ((&m, &s), &y) in mu.iter().zip(&sigma).zip(&a) {
                                ev.record.density_checks += 1;
                                if density_violation(&SquashedGaussian1D::new(m, s)?, y) {
                                    ev.record.density_violations += 1;
                                }
                            }
                            a
                        }
                    };
                    let st = env.step(&a)?;
                    ret += st.reward;
                    if st.done {
                        break;
                    }
                }
                scores.push(ret);
                normalized.push(self.env_cfg.normalized_score(ret, opt));
            }
            ev.record.checkpoints.push(Checkpoint {
                steps,
                scores,
                normalized,
            });
        }
        Ok(())
    }
}

/// Like [`train_modes`] but also returns the final replay buffer.
pub fn train_with_replay(
    env_cfg: &EnvConfig,
    sac_cfg: &SacConfig,
    seed: u64,
    modes: &[InferenceMode],
) -> Result<TrainOutput> {
    Trainer::new(env_cfg, sac_cfg, seed, modes)?.run()
}
