//! Instance generators and the buffer-space probe.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arrangement::{Arrangement, Instance, Motion, Plan};
use crate::error::{Error, Result};
use crate::geometry::{is_placement_valid, CollisionCounter, Point2, Workspace};

/// Placement attempts allowed per arrangement before giving up.
pub const DEFAULT_GENERATION_BUDGET: usize = 5000;
/// Default sample count for [`buffer_space_available`].
pub const DEFAULT_BUFFER_PROBES: usize = 1000;

/// Geometry shared by every generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub workspace: Workspace,
    pub radius: f64,
    pub epsilon: f64,
    pub budget: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            workspace: Workspace::default(),
            radius: crate::geometry::DEFAULT_RADIUS,
            epsilon: crate::arrangement::DEFAULT_EPSILON,
            budget: DEFAULT_GENERATION_BUDGET,
        }
    }
}

/// A monotone instance together with the move sequence that built its target.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneInstance {
    pub instance: Instance,
    pub witness: Plan,
}

fn random_arrangement<R: Rng + ?Sized>(n: usize, params: &GenParams, rng: &mut R) -> Result<Arrangement> {
    let mut placed: Vec<Point2> = Vec::with_capacity(n);
    let mut attempts = 0;
    let mut scratch = CollisionCounter::new();
    while placed.len() < n {
        if attempts >= params.budget {
            return Err(Error::InfeasibleDensity {
                requested: n,
                placed: placed.len(),
                attempts,
            });
        }
        attempts += 1;
        let p = params.workspace.sample_center(params.radius, rng);
        if is_placement_valid(&placed, p, params.radius, &params.workspace, &mut scratch) {
            placed.push(p);
        }
    }
    Ok(Arrangement(placed))
}

fn check_params(n: usize, params: &GenParams) -> Result<()> {
    if n == 0 {
        return Err(Error::NoObjects);
    }
    params.workspace.validate_for_radius(params.radius)?;
    if !(params.epsilon > 0.0 && params.epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(params.epsilon));
    }
    Ok(())
}

/// Independent random initial and target arrangements of `n` objects.
pub fn gen_random_instance<R: Rng + ?Sized>(n: usize, params: &GenParams, rng: &mut R) -> Result<Instance> {
    check_params(n, params)?;
    let initial = random_arrangement(n, params, rng)?;
    let target = random_arrangement(n, params, rng)?;
    Instance::new(params.workspace, params.radius, params.epsilon, initial, target)
}

/// Random initial arrangement whose target is reached by relocating each
/// object once, in random order, to free space. The relocation sequence is
/// returned as a witness solution of exactly `n` motions.
pub fn gen_monotone_instance<R: Rng + ?Sized>(
    n: usize,
    params: &GenParams,
    rng: &mut R,
) -> Result<MonotoneInstance> {
    check_params(n, params)?;
    let initial = random_arrangement(n, params, rng)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut current = initial.clone();
    let mut witness = Vec::with_capacity(n);
    let mut attempts = 0;
    let mut scratch = CollisionCounter::new();
    for (moved, &k) in order.iter().enumerate() {
        let place = loop {
            if attempts >= params.budget {
                return Err(Error::InfeasibleDensity {
                    requested: n,
                    placed: moved,
                    attempts,
                });
            }
            attempts += 1;
            let p = params.workspace.sample_center(params.radius, rng);
            // Landing within tolerance of the start would make the object
            // count as already placed, breaking the n-move guarantee.
            if p.distance(current.0[k]) <= params.epsilon {
                continue;
            }
            if is_placement_valid(current.others(k), p, params.radius, &params.workspace, &mut scratch) {
                break p;
            }
        };
        witness.push(Motion {
            object: k,
            pick: current.0[k],
            place,
        });
        current.0[k] = place;
    }
    let instance = Instance::new(params.workspace, params.radius, params.epsilon, initial, current)?;
    Ok(MonotoneInstance {
        instance,
        witness: Plan { motions: witness },
    })
}

/// Monte-Carlo probe for buffer space: a disc position overlapping no disc of
/// the initial or target arrangement.
pub fn buffer_space_available<R: Rng + ?Sized>(inst: &Instance, rng: &mut R, probes: usize) -> bool {
    let occupied: Vec<Point2> = inst
        .initial
        .positions()
        .iter()
        .chain(inst.target.positions())
        .copied()
        .collect();
    let mut scratch = CollisionCounter::new();
    (0..probes.max(1)).any(|_| {
        let p = inst.workspace.sample_center(inst.radius, rng);
        is_placement_valid(&occupied, p, inst.radius, &inst.workspace, &mut scratch)
    })
}
