//! Gaussian and tanh-squashed Gaussian densities.
//!
//! For `u ~ N(mu, sigma^2)` and `y = tanh(u)` the change of variables gives
//!
//! ```text
//! p(y) = 1/(1 - y^2) * N(artanh(y); mu, sigma^2),   y in (-1, 1)
//! ```
//!
//! Everything is evaluated in the log domain first. Near `|y| = 1` the
//! Jacobian factor overflows while the Gaussian factor underflows, and only
//! their sum of logs is representable.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// `ln(sqrt(2π))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Inputs to `artanh` are clamped to `|y| <= 1 - CLAMP_MARGIN`.
pub const CLAMP_MARGIN: f64 = 1e-12;

/// Largest magnitude a squashed value is evaluated at.
pub const Y_MAX: f64 = 1.0 - CLAMP_MARGIN;

fn check_support(y: f64) -> Result<()> {
    if y.is_finite() && y.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { value: y })
    }
}

/// Clamp to `[-Y_MAX, Y_MAX]`. Used where a value produced by `tanh` may have
/// rounded onto the boundary.
pub fn clamp_to_support(y: f64) -> f64 {
    y.clamp(-Y_MAX, Y_MAX)
}

/// Inverse hyperbolic tangent on the open interval (-1, 1), with the input
/// clamped to `|y| <= 1 - 1e-12`.
pub fn artanh(y: f64) -> Result<f64> {
    check_support(y)?;
    Ok(clamp_to_support(y).atanh())
}

/// `ln(1 - tanh(u)^2)` without cancellation, valid for every finite `u`.
///
/// Uses `1 - tanh^2 u = 4 e^{-2|u|} / (1 + e^{-2|u|})^2`.
pub fn log1m_tanh_sq(u: f64) -> f64 {
    let a = u.abs();
    2.0 * (std::f64::consts::LN_2 - a - (-2.0 * a).exp().ln_1p())
}

/// `ln(1 - y^2)` for `|y| < 1`, split as `ln(1 - y) + ln(1 + y)`.
fn log1m_sq(y: f64) -> f64 {
    (-y).ln_1p() + y.ln_1p()
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// A univariate Gaussian `N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    mu: f64,
    sigma: f64,
}

impl Gaussian1D {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", format!("must be finite, got {mu}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(invalid(
                "sigma",
                format!("must be finite and > 0, got {sigma}"),
            ));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn log_pdf(&self, u: f64) -> f64 {
        let z = (u - self.mu) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - LN_SQRT_2PI
    }

    pub fn pdf(&self, u: f64) -> f64 {
        self.log_pdf(u).exp()
    }

    pub fn cdf(&self, u: f64) -> f64 {
        std_normal_cdf((u - self.mu) / self.sigma)
    }
}

/// Distribution of `tanh(u)` for `u ~ N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashedGaussian1D {
    base: Gaussian1D,
}

impl SquashedGaussian1D {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Self {
            base: Gaussian1D::new(mu, sigma)?,
        })
    }

    pub fn from_base(base: Gaussian1D) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &Gaussian1D {
        &self.base
    }

    pub fn mu(&self) -> f64 {
        self.base.mu
    }

    pub fn sigma(&self) -> f64 {
        self.base.sigma
    }

    /// `-ln(1 - y^2) + ln N(artanh(y); mu, sigma^2)`.
    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        let y = clamp_to_support(y);
        Ok(-log1m_sq(y) + self.base.log_pdf(y.atanh()))
    }

    /// Density of the squashed variable, `exp(log_pdf(y))`.
    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.log_pdf(y).map(f64::exp)
    }

    /// `Phi((artanh(y) - mu) / sigma)`.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        Ok(self.base.cdf(artanh(y)?))
    }

    /// Map a standard normal draw `eps` to the squashed value
    /// `tanh(mu + sigma * eps)`.
    pub fn squash(&self, eps: f64) -> f64 {
        (self.base.mu + self.base.sigma * eps).tanh()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let eps: f64 = rng.sample(StandardNormal);
        self.squash(eps)
    }

    /// Log-probability of the action `tanh(u)`, expressed through the
    /// pre-squash draw `u`: `ln N(u; mu, sigma^2) - ln(1 - tanh^2 u)`.
    ///
    /// Stays finite for every finite `u`, unlike `log_pdf(tanh(u))`, which
    /// saturates once `tanh(u)` rounds to 1.
    pub fn action_log_prob(&self, u: f64) -> f64 {
        self.base.log_pdf(u) - log1m_tanh_sq(u)
    }
}

/// `d` independent squashed Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagSquashedGaussian {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl DiagSquashedGaussian {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(invalid("mu", "need at least one dimension"));
        }
        if mu.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                got: sigma.len(),
            });
        }
        for (&m, &s) in mu.iter().zip(&sigma) {
            Gaussian1D::new(m, s)?;
        }
        Ok(Self { mu, sigma })
    }

    /// `d` copies of the same `(mu, sigma)`.
    pub fn identical(d: usize, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![mu; d], vec![sigma; d])
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn component(&self, i: usize) -> SquashedGaussian1D {
        SquashedGaussian1D {
            base: Gaussian1D {
                mu: self.mu[i],
                sigma: self.sigma[i],
            },
        }
    }

    pub fn components(&self) -> impl ExactSizeIterator<Item = SquashedGaussian1D> + '_ {
        (0..self.dim()).map(|i| self.component(i))
    }

    /// Sum of per-dimension log densities.
    pub fn joint_log_pdf(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        self.components().zip(y).map(|(c, &yi)| c.log_pdf(yi)).sum()
    }

    pub fn joint_pdf(&self, y: &[f64]) -> Result<f64> {
        self.joint_log_pdf(y).map(f64::exp)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.components().map(|c| c.sample(rng)).collect()
    }
}
