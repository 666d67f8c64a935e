use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Regularization {
    #[default]
    None,
    L1,
    L2,
}

impl Regularization {
    pub fn as_str(self) -> &'static str {
        match self {
            Regularization::None => "none",
            Regularization::L1 => "l1",
            Regularization::L2 => "l2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Regularization::None),
            "l1" => Ok(Regularization::L1),
            "l2" => Ok(Regularization::L2),
            other => Err(Error::Config(format!("unknown regularization '{other}' (none, l1, l2)"))),
        }
    }
}

/// Data term of the training loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Objective {
    /// Class sum for softmax outputs, per-output for sigmoid outputs.
    #[default]
    Auto,
    /// `−(1/N) Σ [y₁ ln p₁ + y₂ ln p₂]`.
    ClassSum,
    /// Adds the `(1 − y) ln(1 − p)` terms.
    Elementwise,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Auto => "auto",
            Objective::ClassSum => "class_sum",
            Objective::Elementwise => "elementwise",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Objective::Auto),
            "class_sum" => Ok(Objective::ClassSum),
            "elementwise" => Ok(Objective::Elementwise),
            other => Err(Error::Config(format!("unknown objective '{other}' (auto, class_sum, elementwise)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub regularization: Regularization,
    pub lambda: f64,
    pub objective: Objective,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            epochs: 50,
            adam: AdamConfig::default(),
            regularization: Regularization::None,
            lambda: 1e-4,
            objective: Objective::Auto,
            seed: 0,
        }
    }
}

impl TrainConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negations also reject NaN
    pub fn validate(&self) -> Result<()> {
        let a = &self.adam;
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate {} must be positive", a.learning_rate)));
        }
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) {
            return Err(Error::Config(format!("adam betas ({}, {}) outside [0, 1)", a.beta1, a.beta2)));
        }
        if !(a.epsilon > 0.0) {
            return Err(Error::Config(format!("adam epsilon {} must be positive", a.epsilon)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda {} must be >= 0", self.lambda)));
        }
        Ok(())
    }
}
