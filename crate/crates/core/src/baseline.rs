//! Greedy baseline and its random-restart variant.
//!
//! The baseline visits every object once in a random order. Before placing
//! object `k` on its target it clears every object overlapping that target,
//! sending each one to its own target when that spot is free and to a random
//! free spot clear of `T_k` otherwise. The restart variant reruns the baseline
//! with fresh orders until a collision-check budget is spent and keeps the
//! shortest plan.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{is_solved, Arrangement, Instance, Motion, Plan};
use crate::error::{Error, Result};
use crate::geometry::{discs_overlap, is_placement_valid, sample_free_position, CollisionCounter, DEFAULT_MAX_TRIES};
use crate::planner::PlanResult;
use crate::seed::rng_from_seed;

pub const DEFAULT_TIME_LIMIT_MS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub seed: u64,
    /// Collision checks after which no new restart is started. Only used by
    /// [`randperm_plan`].
    pub collision_budget: Option<u64>,
    pub time_limit_ms: u64,
    pub max_tries: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            collision_budget: None,
            time_limit_ms: DEFAULT_TIME_LIMIT_MS,
            max_tries: DEFAULT_MAX_TRIES,
        }
    }
}

impl BaselineConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.collision_budget = Some(budget);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.collision_budget == Some(0) {
            return Err(Error::InvalidConfig("collision budget must be >= 1".into()));
        }
        if self.max_tries == 0 {
            return Err(Error::InvalidConfig("max_tries must be >= 1".into()));
        }
        Ok(())
    }

    fn time_limit(&self) -> Duration {
        Duration::from_millis(self.time_limit_ms)
    }
}

/// One greedy pass in a fresh random order. `None` if a relocation found no
/// free spot or the deadline passed.
fn greedy_pass<R: Rng + ?Sized>(
    instance: &Instance,
    max_tries: usize,
    deadline: Instant,
    rng: &mut R,
    ctr: &mut CollisionCounter,
) -> Option<Plan> {
    let n = instance.n_objects();
    let (r, ws) = (instance.radius, &instance.workspace);
    let eps2 = instance.epsilon * instance.epsilon;
    let target = instance.target.positions();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut state: Arrangement = instance.initial.clone();
    let mut motions = Vec::new();
    for k in order {
        if Instant::now() > deadline {
            return None;
        }
        let tk = target[k];
        if state.0[k].distance_squared(tk) <= eps2 {
            continue;
        }
        for j in 0..n {
            let cj = state.0[j];
            if j == k || !discs_overlap(cj, tk, r) {
                continue;
            }
            let place = if is_placement_valid(state.others(j), target[j], r, ws, ctr) {
                target[j]
            } else {
                let obstacles = state.others(j).chain(std::iter::once(&tk));
                sample_free_position(obstacles, r, ws, rng, max_tries, ctr)?
            };
            motions.push(Motion { object: j, pick: cj, place });
            state.0[j] = place;
        }
        if !is_placement_valid(state.others(k), tk, r, ws, ctr) {
            return None;
        }
        motions.push(Motion {
            object: k,
            pick: state.0[k],
            place: tk,
        });
        state.0[k] = tk;
    }
    is_solved(&state, &instance.target, instance.epsilon).then_some(Plan { motions })
}

fn solved_empty(started: Instant) -> PlanResult {
    PlanResult {
        solved: true,
        plan: Plan::default(),
        iterations: 0,
        collision_checks: 0,
        wall_time: started.elapsed(),
    }
}

/// Single greedy pass.
pub fn baseline_plan(instance: &Instance, config: &BaselineConfig) -> PlanResult {
    let started = Instant::now();
    if is_solved(&instance.initial, &instance.target, instance.epsilon) {
        return solved_empty(started);
    }
    let mut rng = rng_from_seed(config.seed);
    let mut ctr = CollisionCounter::new();
    let plan = greedy_pass(
        instance,
        config.max_tries,
        started + config.time_limit(),
        &mut rng,
        &mut ctr,
    );
    PlanResult {
        solved: plan.is_some(),
        plan: plan.unwrap_or_default(),
        iterations: 1,
        collision_checks: ctr.count(),
        wall_time: started.elapsed(),
    }
}

/// Greedy passes with fresh random orders while the collision budget lasts.
/// A pass that starts under budget always runs to completion. The first pass
/// draws the same order as [`baseline_plan`] with the same seed.
///
/// Without a budget this is a single pass.
pub fn randperm_plan(instance: &Instance, config: &BaselineConfig) -> PlanResult {
    let started = Instant::now();
    if is_solved(&instance.initial, &instance.target, instance.epsilon) {
        return solved_empty(started);
    }
    let budget = config.collision_budget.unwrap_or(1);
    let deadline = started + config.time_limit();
    let mut rng = rng_from_seed(config.seed);
    let mut ctr = CollisionCounter::new();
    let mut best: Option<Plan> = None;
    let mut runs = 0;
    while runs == 0 || (ctr.count() < budget && Instant::now() <= deadline) {
        runs += 1;
        if let Some(p) = greedy_pass(instance, config.max_tries, deadline, &mut rng, &mut ctr) {
            if best.as_ref().map_or(true, |b| p.len() < b.len()) {
                best = Some(p);
            }
        }
    }
    PlanResult {
        solved: best.is_some(),
        plan: best.unwrap_or_default(),
        iterations: runs,
        collision_checks: ctr.count(),
        wall_time: started.elapsed(),
    }
}
