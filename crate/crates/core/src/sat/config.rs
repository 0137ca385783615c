use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Tunables of the CDCL engine. Defaults are pinned; experiments override
/// individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    /// Multiplicative decay of variable activity per conflict.
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Fraction of decisions made on a random variable.
    pub random_var_freq: f64,
    /// Conflicts before the first geometric restart.
    pub restart_first: u64,
    pub restart_inc: f64,
    /// After this many conflicts the geometric schedule gives way to
    /// restarts driven by the moving average of learnt-clause LBD.
    pub adaptive_after: u64,
    /// Restart when the fast LBD average exceeds the slow one by this factor.
    pub adaptive_margin: f64,
    /// Conflicts before the first learnt-clause reduction.
    pub reduce_first: u64,
    /// Added to the reduction interval after every reduction.
    pub reduce_inc: u64,
    /// Learnt clauses with LBD at or below this are never reduced.
    pub keep_lbd: u32,
    pub conflict_budget: Option<u64>,
    #[serde(with = "opt_secs")]
    pub time_budget: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            var_decay: 0.95,
            clause_decay: 0.999,
            random_var_freq: 0.0,
            restart_first: 100,
            restart_inc: 1.5,
            adaptive_after: 10_000,
            adaptive_margin: 1.25,
            reduce_first: 2_000,
            reduce_inc: 300,
            keep_lbd: 2,
            conflict_budget: None,
            time_budget: None,
        }
    }
}

mod opt_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map(Duration::from_secs_f64))
    }
}
