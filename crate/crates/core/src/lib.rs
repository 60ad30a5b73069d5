//! Exact density, mode and bias machinery for tanh-squashed Gaussian
//! action distributions, plus a small soft actor-critic testbed that
//! compares `tanh(mu)` inference with mode-based inference.
//!
//! ```
//! use tanhshift::dist::SquashedGaussian1D;
//! use tanhshift::mode::{analytic_mode, naive_action};
//!
//! let d = SquashedGaussian1D::new(1.0, 0.5)?;
//! let mode = analytic_mode(&d)?;
//! assert!((mode.y_star - 0.895219).abs() < 1e-6);
//! assert!(mode.y_star > naive_action(&d));
//! # Ok::<(), tanhshift::Error>(())
//! ```

pub mod bias;
pub mod dist;
pub mod env;
mod error;
pub mod mode;
pub mod rng;
pub mod sac;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/densities.md")]
    mod densities {}
    #[doc = include_str!("../../../book/src/modes.md")]
    mod modes {}
    #[doc = include_str!("../../../book/src/bias.md")]
    mod bias {}
    #[doc = include_str!("../../../book/src/sac.md")]
    mod sac {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
