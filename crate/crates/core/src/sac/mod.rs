//! Desk-scale soft actor-critic with explicit networks and gradients.

mod adam;
pub mod agent;
pub mod mlp;
pub mod policy;
pub mod replay;
mod train;

pub use adam::Adam;
pub use agent::{Agent, LossReport, Nets, UpdateParams};
pub use mlp::{Cache, Mlp};
pub use policy::{
    infer_corrected, infer_standard, policy_forward, sample_action_train, ModeSolver,
};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use train::{
    train, train_modes, train_with_replay, Checkpoint, InferenceMode, RunConfig, RunRecord,
    SacConfig, SeedRange, TrainOutput,
};
