//! Closed-loop execution.
//!
//! At every step the executor fires the perturbations scheduled for that
//! step, stops if the goal is reached, replans from the current arrangement
//! and executes only the first motion of the new plan.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{reward, Arrangement, Instance, Motion};
use crate::error::{Error, Result};
use crate::geometry::{in_workspace, is_placement_valid, CollisionCounter, Point2, Workspace};
use crate::planner::Planner;
use crate::seed::{derive_seed, rng_from_seed, stream};

/// An external displacement of one object, fired before planning at
/// `trigger_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub trigger_step: usize,
    pub object: usize,
    pub new_position: Point2,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecConfig {
    /// Planning rounds before giving up. Defaults to `2·N + 5·|perturbations|`.
    pub max_steps: Option<usize>,
    /// Half-width of the uniform noise added to every observed coordinate.
    pub observation_noise: f64,
    /// Per-step planner seeds are derived from this.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecStep {
    pub step: usize,
    pub before: Arrangement,
    pub perturbations: Vec<Perturbation>,
    /// Executed motion; `None` when the plan was empty or its first motion
    /// was not executable in the true state.
    pub motion: Option<Motion>,
    pub plan_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecSummary {
    pub success: bool,
    pub final_reward: usize,
    pub n_objects: usize,
    pub total_motions: usize,
    pub replans: usize,
    pub final_state: Arrangement,
    /// Perturbations fired after the last planning round.
    pub late_perturbations: Vec<Perturbation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecTrace {
    pub steps: Vec<ExecStep>,
    pub summary: ExecSummary,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TraceLine {
    Step(ExecStep),
    Summary(ExecSummary),
}

impl ExecTrace {
    pub fn success(&self) -> bool {
        self.summary.success
    }

    /// One JSON object per line: every step, then the summary.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(&TraceLine::Step(s.clone()))?);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&TraceLine::Summary(self.summary.clone()))?);
        out.push('\n');
        Ok(out)
    }

    pub fn from_json_lines(s: &str) -> Result<Self> {
        let mut steps = Vec::new();
        let mut summary = None;
        for line in s.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str(line)? {
                TraceLine::Step(st) => steps.push(st),
                TraceLine::Summary(sm) => summary = Some(sm),
            }
        }
        let summary = summary.ok_or_else(|| Error::InvalidConfig("trace has no summary line".into()))?;
        Ok(Self { steps, summary })
    }
}

/// Relocates one object. The new spot must be a valid placement among the
/// other objects.
pub fn apply_perturbation(
    state: &Arrangement,
    p: &Perturbation,
    radius: f64,
    ws: &Workspace,
) -> Result<Arrangement> {
    if p.object >= state.len() {
        return Err(Error::IndexOutOfRange {
            index: p.object,
            n: state.len(),
        });
    }
    let mut scratch = CollisionCounter::new();
    if !p.new_position.is_finite()
        || !is_placement_valid(state.others(p.object), p.new_position, radius, ws, &mut scratch)
    {
        return Err(Error::InvalidPerturbation(format!(
            "object {} cannot be placed at ({}, {}) at step {}",
            p.object, p.new_position.x, p.new_position.y, p.trigger_step
        )));
    }
    let mut next = state.clone();
    next.0[p.object] = p.new_position;
    Ok(next)
}

/// Static schedule checks. Occupancy can only be checked when a
/// perturbation fires, since it depends on where the executor has moved
/// things by then.
pub fn validate_schedule(instance: &Instance, schedule: &[Perturbation]) -> Result<()> {
    for p in schedule {
        if p.object >= instance.n_objects() {
            return Err(Error::IndexOutOfRange {
                index: p.object,
                n: instance.n_objects(),
            });
        }
        if !p.new_position.is_finite() || !in_workspace(p.new_position, instance.radius, &instance.workspace) {
            return Err(Error::InvalidPerturbation(format!(
                "target ({}, {}) of object {} is outside the workspace",
                p.new_position.x, p.new_position.y, p.object
            )));
        }
    }
    Ok(())
}

pub fn default_max_steps(n_objects: usize, n_perturbations: usize) -> usize {
    2 * n_objects + 5 * n_perturbations
}

/// Stepwise closed-loop executor. [`run_closed_loop`] drives it to the end;
/// driving it by hand lets callers inject perturbations chosen on the fly.
pub struct Executor<'a> {
    instance: &'a Instance,
    planner: &'a Planner,
    config: ExecConfig,
    state: Arrangement,
    step: usize,
    steps: Vec<ExecStep>,
    pending: Vec<Perturbation>,
    total_motions: usize,
    replans: usize,
}

/// What happened in one call to [`Executor::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Solved,
    PlannerFailed,
}

impl<'a> Executor<'a> {
    pub fn new(instance: &'a Instance, planner: &'a Planner, config: ExecConfig) -> Self {
        Self {
            instance,
            planner,
            config,
            state: instance.initial.clone(),
            step: 0,
            steps: Vec::new(),
            pending: Vec::new(),
            total_motions: 0,
            replans: 0,
        }
    }

    pub fn state(&self) -> &Arrangement {
        &self.state
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_solved(&self) -> bool {
        reward(&self.state, &self.instance.target, self.instance.epsilon) == self.instance.n_objects()
    }

    /// Applies a perturbation immediately; it is logged with the next step.
    pub fn perturb(&mut self, p: Perturbation) -> Result<()> {
        self.state = apply_perturbation(&self.state, &p, self.instance.radius, &self.instance.workspace)?;
        self.pending.push(Perturbation {
            trigger_step: self.step,
            ..p
        });
        Ok(())
    }

    fn observe(&self) -> Arrangement {
        let a = self.config.observation_noise;
        if a <= 0.0 {
            return self.state.clone();
        }
        let mut rng = rng_from_seed(derive_seed(self.config.seed, &[stream::NOISE, self.step as u64]));
        let ws = &self.instance.workspace;
        let r = self.instance.radius;
        Arrangement(
            self.state
                .positions()
                .iter()
                .map(|p| Point2 {
                    x: (p.x + rng.gen_range(-a..=a)).clamp(ws.x_min + r, ws.x_max - r),
                    y: (p.y + rng.gen_range(-a..=a)).clamp(ws.y_min + r, ws.y_max - r),
                })
                .collect(),
        )
    }

    /// One planning round: goal test, replan, execute the first motion.
    pub fn step(&mut self) -> StepOutcome {
        if self.is_solved() {
            return StepOutcome::Solved;
        }
        let observed = self.observe();
        let planner = self
            .planner
            .with_seed(derive_seed(self.config.seed, &[stream::EXECUTOR, self.step as u64]));
        let result = planner.solve(&self.instance.from_state(observed));
        self.replans += 1;
        let before = self.state.clone();
        let perturbations = std::mem::take(&mut self.pending);
        if !result.solved {
            self.steps.push(ExecStep {
                step: self.step,
                before,
                perturbations,
                motion: None,
                plan_length: 0,
            });
            self.step += 1;
            return StepOutcome::PlannerFailed;
        }
        // Under observation noise the plan's pick positions are estimates;
        // the gripper takes the object from where it really is.
        let executed = result.plan.motions.first().and_then(|m| {
            let pick = self.state.positions()[m.object];
            let mut scratch = CollisionCounter::new();
            is_placement_valid(
                self.state.others(m.object),
                m.place,
                self.instance.radius,
                &self.instance.workspace,
                &mut scratch,
            )
            .then_some(Motion { pick, ..*m })
        });
        if let Some(m) = executed {
            self.state.0[m.object] = m.place;
            self.total_motions += 1;
        }
        self.steps.push(ExecStep {
            step: self.step,
            before,
            perturbations,
            motion: executed,
            plan_length: result.plan.len(),
        });
        self.step += 1;
        StepOutcome::Continue
    }

    pub fn finish(self) -> ExecTrace {
        let final_reward = reward(&self.state, &self.instance.target, self.instance.epsilon);
        let n = self.instance.n_objects();
        ExecTrace {
            steps: self.steps,
            summary: ExecSummary {
                success: final_reward == n,
                final_reward,
                n_objects: n,
                total_motions: self.total_motions,
                replans: self.replans,
                final_state: self.state,
                late_perturbations: self.pending,
            },
        }
    }
}

/// Runs one closed-loop episode with a fixed perturbation schedule.
pub fn run_closed_loop(
    instance: &Instance,
    planner: &Planner,
    schedule: &[Perturbation],
    config: &ExecConfig,
) -> Result<ExecTrace> {
    validate_schedule(instance, schedule)?;
    let max_steps = config
        .max_steps
        .unwrap_or_else(|| default_max_steps(instance.n_objects(), schedule.len()));
    if max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be >= 1".into()));
    }
    let mut exec = Executor::new(instance, planner, config.clone());
    loop {
        let now = exec.step_index();
        for p in schedule.iter().filter(|p| p.trigger_step == now) {
            exec.perturb(*p)?;
        }
        if exec.is_solved() || now >= max_steps {
            break;
        }
        if exec.step() == StepOutcome::PlannerFailed {
            break;
        }
    }
    Ok(exec.finish())
}
