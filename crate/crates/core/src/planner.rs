//! Planner-agnostic result type and dispatch.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::arrangement::{Instance, Plan};
use crate::baseline::{baseline_plan, randperm_plan, BaselineConfig};
use crate::mcts::{plan as mcts_plan, SearchConfig};

/// Outcome of one planner invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub solved: bool,
    pub plan: Plan,
    /// MCTS iterations, or completed baseline runs.
    pub iterations: u64,
    pub collision_checks: u64,
    #[serde(rename = "wall_time_ms", with = "duration_ms")]
    pub wall_time: Duration,
}

impl PlanResult {
    pub fn n_motions(&self) -> usize {
        self.plan.len()
    }

    /// Same result with the wall-clock measurement cleared. Everything that
    /// remains is a pure function of (instance, planner, seed).
    pub fn without_timing(mut self) -> Self {
        self.wall_time = Duration::ZERO;
        self
    }
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Duration::try_from_secs_f64(ms / 1e3).map_err(serde::de::Error::custom)
    }
}

/// Any of the planners, with its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Planner {
    Mcts(SearchConfig),
    Baseline(BaselineConfig),
    Randperm(BaselineConfig),
}

impl Planner {
    pub fn solve(&self, instance: &Instance) -> PlanResult {
        match self {
            Planner::Mcts(cfg) => mcts_plan(instance, cfg),
            Planner::Baseline(cfg) => baseline_plan(instance, cfg),
            Planner::Randperm(cfg) => randperm_plan(instance, cfg),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Planner::Mcts(cfg) => cfg.seed,
            Planner::Baseline(cfg) | Planner::Randperm(cfg) => cfg.seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Planner {
        let mut p = self.clone();
        match &mut p {
            Planner::Mcts(cfg) => cfg.seed = seed,
            Planner::Baseline(cfg) | Planner::Randperm(cfg) => cfg.seed = seed,
        }
        p
    }
}
