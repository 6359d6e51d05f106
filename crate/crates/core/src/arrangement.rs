//! Arrangements, instances, motions and plans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{discs_overlap, in_workspace, Point2, Workspace, DEFAULT_RADIUS};

/// Default goal tolerance: half the default radius.
pub const DEFAULT_EPSILON: f64 = 0.015;

/// One position per object, indexed by object id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Arrangement(pub Vec<Point2>);

impl Arrangement {
    pub fn new(positions: Vec<Point2>) -> Self {
        Self(positions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positions(&self) -> &[Point2] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<Point2> {
        self.0.get(index).copied()
    }

    /// Positions of every object except `skip`.
    pub fn others(&self, skip: usize) -> impl Iterator<Item = &Point2> + Clone {
        self.0
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != skip)
            .map(|(_, p)| p)
    }

    /// Checks finiteness, workspace containment and pairwise separation.
    pub fn validate(&self, radius: f64, ws: &Workspace) -> Result<()> {
        for (i, p) in self.0.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidArrangement(format!("object {i} has a non-finite position")));
            }
            if !in_workspace(*p, radius, ws) {
                return Err(Error::InvalidArrangement(format!(
                    "object {i} at ({}, {}) leaves the workspace",
                    p.x, p.y
                )));
            }
        }
        for i in 0..self.0.len() {
            for j in (i + 1)..self.0.len() {
                if discs_overlap(self.0[i], self.0[j], radius) {
                    return Err(Error::InvalidArrangement(format!("objects {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// A rearrangement problem.
///
/// Serialized field order is fixed: workspace, radius, epsilon, initial, target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    pub workspace: Workspace,
    pub radius: f64,
    pub epsilon: f64,
    pub initial: Arrangement,
    pub target: Arrangement,
}

#[derive(Deserialize)]
struct RawInstance {
    workspace: Workspace,
    radius: f64,
    epsilon: f64,
    initial: Arrangement,
    target: Arrangement,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        Instance::new(raw.workspace, raw.radius, raw.epsilon, raw.initial, raw.target)
    }
}

impl Instance {
    pub fn new(
        workspace: Workspace,
        radius: f64,
        epsilon: f64,
        initial: Arrangement,
        target: Arrangement,
    ) -> Result<Self> {
        workspace.validate_for_radius(radius)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        if initial.len() != target.len() {
            return Err(Error::SizeMismatch {
                initial: initial.len(),
                target: target.len(),
            });
        }
        if initial.is_empty() {
            return Err(Error::NoObjects);
        }
        initial.validate(radius, &workspace)?;
        target.validate(radius, &workspace)?;
        Ok(Self {
            workspace,
            radius,
            epsilon,
            initial,
            target,
        })
    }

    /// Instance on the default table with default radius and tolerance.
    pub fn with_defaults(initial: Vec<Point2>, target: Vec<Point2>) -> Result<Self> {
        Self::new(
            Workspace::default(),
            DEFAULT_RADIUS,
            DEFAULT_EPSILON,
            Arrangement(initial),
            Arrangement(target),
        )
    }

    pub fn n_objects(&self) -> usize {
        self.initial.len()
    }

    /// Same problem restarted from `current`.
    pub fn from_state(&self, current: Arrangement) -> Instance {
        Instance {
            initial: current,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A single pick-and-place of object `object`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub object: usize,
    pub pick: Point2,
    pub place: Point2,
}

impl Motion {
    pub fn noop(object: usize, at: Point2) -> Self {
        Self {
            object,
            pick: at,
            place: at,
        }
    }

    pub fn is_noop(&self) -> bool {
        self.pick == self.place
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    pub motions: Vec<Motion>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.motions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motions.is_empty()
    }
}

/// Number of objects within `epsilon` of their targets (inclusive).
pub fn reward(current: &Arrangement, target: &Arrangement, epsilon: f64) -> usize {
    assert_eq!(
        current.len(),
        target.len(),
        "reward needs arrangements of equal size"
    );
    let eps2 = epsilon * epsilon;
    current
        .0
        .iter()
        .zip(&target.0)
        .filter(|(c, t)| c.distance_squared(**t) <= eps2)
        .count()
}

pub fn is_solved(current: &Arrangement, target: &Arrangement, epsilon: f64) -> bool {
    reward(current, target, epsilon) == target.len()
}

/// Moves one object. Fails if the motion does not pick the object where it is.
pub fn apply_motion(a: &Arrangement, m: &Motion) -> Result<Arrangement> {
    let actual = a.get(m.object).ok_or(Error::IndexOutOfRange {
        index: m.object,
        n: a.len(),
    })?;
    if actual != m.pick {
        return Err(Error::StaleMotion {
            index: m.object,
            expected: [m.pick.x, m.pick.y],
            actual: [actual.x, actual.y],
        });
    }
    let mut next = a.clone();
    next.0[m.object] = m.place;
    Ok(next)
}

/// Replays `plan` from the instance's initial arrangement, validating every
/// intermediate state. Returns the final arrangement.
pub fn replay_plan(instance: &Instance, plan: &Plan) -> Result<Arrangement> {
    let mut state = instance.initial.clone();
    for (step, m) in plan.motions.iter().enumerate() {
        state = apply_motion(&state, m)?;
        state
            .validate(instance.radius, &instance.workspace)
            .map_err(|e| Error::InvalidArrangement(format!("after motion {step}: {e}")))?;
    }
    Ok(state)
}

/// Replays `plan` and additionally requires that it ends at the goal.
pub fn verify_solution(instance: &Instance, plan: &Plan) -> Result<()> {
    let end = replay_plan(instance, plan)?;
    let r = reward(&end, &instance.target, instance.epsilon);
    if r != instance.n_objects() {
        return Err(Error::InvalidArrangement(format!(
            "plan ends with reward {r} of {}",
            instance.n_objects()
        )));
    }
    if plan.motions.iter().any(Motion::is_noop) {
        return Err(Error::InvalidArrangement("plan contains a no-op motion".into()));
    }
    Ok(())
}
