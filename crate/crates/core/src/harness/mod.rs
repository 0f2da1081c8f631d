//! Property suites for the axiom systems and the agreement between routes.

pub mod axioms;
pub mod capacity;
pub mod coherence;
pub mod corpus;
pub mod equivalence;
pub mod evaluator;
pub mod random;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::ConvergenceControls;
use crate::oracle::EnvelopeControls;

pub use axioms::check_global_axioms;
pub use capacity::check_capacity;
pub use coherence::check_tree_coherence;
pub use equivalence::{equivalence_report, finitary_instances, NamedVariable};
pub use evaluator::{Evaluator, Fault, Faulty, GameEvaluator, OracleEvaluator};
pub use report::{PropertyReport, Violation};

/// Settings shared by every suite. Echoed into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Tolerance for finitary comparisons.
    pub tol: f64,
    /// Tolerance for comparisons between limits.
    pub limit_tol: f64,
    /// Largest number of vertex-selection trees enumerated exactly.
    pub budget: u128,
    /// Random selections tried once the budget is exceeded.
    pub oracle_samples: usize,
    /// Random cases per property.
    pub samples: usize,
    pub seed: u64,
    pub max_horizon: usize,
    /// Paths examined by hedging checks.
    pub paths: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol: crate::TOLERANCE,
            limit_tol: 1e-6,
            budget: 1_000_000,
            oracle_samples: 1024,
            samples: 200,
            seed: 0,
            max_horizon: 64,
            paths: 4096,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tol) || !positive(self.limit_tol) {
            return Err(Error::Spec("tolerances must be positive".into()));
        }
        if self.budget < 1 || self.oracle_samples < 1 || self.samples < 1 || self.paths < 1 {
            return Err(Error::Spec("budgets must be at least 1".into()));
        }
        if self.max_horizon < 1 {
            return Err(Error::Spec("max_horizon must be at least 1".into()));
        }
        Ok(())
    }

    pub fn envelope(&self) -> EnvelopeControls {
        EnvelopeControls {
            budget: self.budget,
            samples: self.oracle_samples,
            seed: self.seed,
            ..Default::default()
        }
    }

    /// Controller settings for limits: stalls are detected at a thousandth of
    /// the limit tolerance so the reported estimate is within it.
    pub fn convergence(&self) -> ConvergenceControls {
        ConvergenceControls {
            tol: self.limit_tol * 1e-3,
            max_horizon: self.max_horizon,
            ..Default::default()
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
