//! Model parameters of the limiting random walk.
//!
//! The walk lives on the number of idle servers `(n1, n2)` of the two data
//! centers. Only the arrival rates and the products `mu_i * c_i` enter the
//! limiting dynamics, so those four rates plus the reservation threshold are
//! all that is stored here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StabilityViolation};

/// Raw, unvalidated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1c1: f64,
    pub mu2c2: f64,
    /// Trunk reservation threshold: overflow from DC 1 is accepted only while
    /// more than `a` servers are idle at DC 2.
    pub a: usize,
}

/// Per-server description, as given in figure captions and config files.
/// A missing `a` in a config file means no reservation (`a = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub a: usize,
}

impl From<ModelConfig> for ModelParams {
    fn from(c: ModelConfig) -> Self {
        ModelParams {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            mu1c1: c.mu1 * c.c1,
            mu2c2: c.mu2 * c.c2,
            a: c.a,
        }
    }
}

impl ModelParams {
    pub fn new(lambda1: f64, lambda2: f64, mu1c1: f64, mu2c2: f64, a: usize) -> Self {
        ModelParams {
            lambda1,
            lambda2,
            mu1c1,
            mu2c2,
            a,
        }
    }

    pub fn with_threshold(self, a: usize) -> Self {
        ModelParams { a, ..self }
    }

    /// Multiply all four rates by `t`. The stationary law is unchanged.
    pub fn scaled(self, t: f64) -> Self {
        ModelParams {
            lambda1: self.lambda1 * t,
            lambda2: self.lambda2 * t,
            mu1c1: self.mu1c1 * t,
            mu2c2: self.mu2c2 * t,
            a: self.a,
        }
    }

    pub fn validate(self) -> Result<Model> {
        for (name, value) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("mu1c1", self.mu1c1),
            ("mu2c2", self.mu2c2),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveRate { name, value });
            }
        }
        if self.lambda1 <= self.mu1c1 {
            return Err(Error::Unstable(StabilityViolation::FirstQueue));
        }
        if self.mu1c1 + self.mu2c2 >= self.lambda1 + self.lambda2 {
            return Err(Error::Unstable(StabilityViolation::TotalLoad));
        }
        Ok(Model(self))
    }
}

/// Parameters that passed [`ModelParams::validate`]. Every analytic and
/// oracle routine takes this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Model(ModelParams);

impl Model {
    pub fn params(&self) -> &ModelParams {
        &self.0
    }
    pub fn lambda1(&self) -> f64 {
        self.0.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.0.lambda2
    }
    pub fn mu1c1(&self) -> f64 {
        self.0.mu1c1
    }
    pub fn mu2c2(&self) -> f64 {
        self.0.mu2c2
    }
    pub fn threshold(&self) -> usize {
        self.0.a
    }

    /// Same rates, different threshold. Stability does not depend on `a`.
    pub fn with_threshold(&self, a: usize) -> Model {
        Model(self.0.with_threshold(a))
    }

    /// `lambda1 + lambda2 + mu1c1 + mu2c2`, the diagonal coefficient of the kernel.
    pub fn total_rate(&self) -> f64 {
        self.0.lambda1 + self.0.lambda2 + self.0.mu1c1 + self.0.mu2c2
    }

    /// Right-hand side of the rate conservation law, `lambda1 + lambda2 - mu1c1 - mu2c2`.
    pub fn excess_load(&self) -> f64 {
        self.0.lambda1 + self.0.lambda2 - self.0.mu1c1 - self.0.mu2c2
    }

    /// Radius of the circle traced by `X0` on the cut `[y1, y2]`.
    pub fn r1(&self) -> f64 {
        (self.0.lambda1 / self.0.mu1c1).sqrt()
    }

    /// Radius of the circle traced by `Y0` on the cut `[x1, x2]`.
    pub fn r2(&self) -> f64 {
        (self.0.lambda2 / self.0.mu2c2).sqrt()
    }

    /// Blocking pair of two isolated data centers (threshold `a -> infinity`).
    pub fn isolated_limits(&self) -> BlockingPair {
        let b1 = 1.0 - self.0.mu1c1 / self.0.lambda1;
        // At lambda2 == mu2c2 both branches agree on 0.
        let b2 = if self.0.lambda2 <= self.0.mu2c2 {
            0.0
        } else {
            1.0 - self.0.mu2c2 / self.0.lambda2
        };
        BlockingPair { b1, b2 }
    }
}

/// Loss probabilities of requests originally sent to DC 1 and DC 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockingPair {
    pub b1: f64,
    pub b2: f64,
}

impl BlockingPair {
    pub fn max_abs_diff(&self, other: &BlockingPair) -> f64 {
        (self.b1 - other.b1).abs().max((self.b2 - other.b2).abs())
    }
}

/// Parameter sets of the three published experiments.
pub mod presets {
    use super::ModelParams;

    /// `lambda = (3, 5)`, `mu = (1, 2)`, `c = (1, 1)`.
    pub fn fig3(a: usize) -> ModelParams {
        ModelParams::new(3.0, 5.0, 1.0, 2.0, a)
    }

    /// `lambda = (1.2, 9.9)`, `mu = (1, 1)`, `c = (1, 10)`: DC 2 underloaded.
    pub fn fig4(a: usize) -> ModelParams {
        ModelParams::new(1.2, 9.9, 1.0, 10.0, a)
    }

    /// `lambda = (1.2, 11)`, `mu = (1, 1)`, `c = (1, 10)`: both overloaded.
    pub fn fig5(a: usize) -> ModelParams {
        ModelParams::new(1.2, 11.0, 1.0, 10.0, a)
    }
}
