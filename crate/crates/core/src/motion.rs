//! Action parametrization: turns "act on object k" into a concrete
//! pick-and-place.
//!
//! If object `k` can go straight to its target it does. Otherwise the
//! obstructing object nearest to that target is moved to a sampled free spot
//! that keeps the target clear. When no such spot is found the action is a
//! no-op.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, Instance, Motion};
use crate::geometry::{
    discs_overlap, is_placement_valid, sample_free_in, CollisionCounter, Point2, Workspace,
    DEFAULT_MAX_TRIES,
};

/// Optional refinements of the action parametrization. Both default off.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionHeuristics {
    /// Keep relocated obstructors off every other object's target.
    #[serde(default)]
    pub avoid_other_targets: bool,
    /// Sample relocation spots only within this half-width of the
    /// obstructor's current position.
    #[serde(default)]
    pub neighborhood: Option<f64>,
}

/// Everything [`get_motion`] needs besides the two arrangements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionContext {
    pub workspace: Workspace,
    pub radius: f64,
    pub epsilon: f64,
    pub max_tries: usize,
    pub heuristics: MotionHeuristics,
}

impl MotionContext {
    pub fn for_instance(inst: &Instance) -> Self {
        Self {
            workspace: inst.workspace,
            radius: inst.radius,
            epsilon: inst.epsilon,
            max_tries: DEFAULT_MAX_TRIES,
            heuristics: MotionHeuristics::default(),
        }
    }

    pub fn with_heuristics(mut self, heuristics: MotionHeuristics) -> Self {
        self.heuristics = heuristics;
        self
    }
}

/// Nearest object other than `k` whose disc overlaps a disc at `target_pos`.
/// Ties go to the lowest index. `None` when nothing overlaps.
pub fn find_closest_obstructor(
    current: &Arrangement,
    k: usize,
    target_pos: Point2,
    radius: f64,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &c) in current.positions().iter().enumerate() {
        if i == k || !discs_overlap(c, target_pos, radius) {
            continue;
        }
        let d = c.distance_squared(target_pos);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Concrete motion for action `k` in state `current`.
pub fn get_motion<R: Rng + ?Sized>(
    current: &Arrangement,
    target: &Arrangement,
    k: usize,
    ctx: &MotionContext,
    rng: &mut R,
    ctr: &mut CollisionCounter,
) -> Motion {
    let ck = current.positions()[k];
    let tk = target.positions()[k];
    // Already placed: nothing to do for this object.
    if ck.distance_squared(tk) <= ctx.epsilon * ctx.epsilon {
        return Motion::noop(k, ck);
    }
    if is_placement_valid(current.others(k), tk, ctx.radius, &ctx.workspace, ctr) {
        return Motion {
            object: k,
            pick: ck,
            place: tk,
        };
    }
    let Some(j) = find_closest_obstructor(current, k, tk, ctx.radius) else {
        return Motion::noop(k, ck);
    };
    let cj = current.positions()[j];
    let extra_targets = if ctx.heuristics.avoid_other_targets {
        usize::MAX
    } else {
        0
    };
    let obstacles = current
        .others(j)
        .chain(std::iter::once(&tk))
        .chain(target.others(j).take(extra_targets));
    let region = match ctx.heuristics.neighborhood {
        Some(h) => Workspace {
            x_min: cj.x - h,
            x_max: cj.x + h,
            y_min: cj.y - h,
            y_max: cj.y + h,
        },
        None => ctx.workspace,
    };
    match sample_free_in(
        obstacles,
        ctx.radius,
        &ctx.workspace,
        &region,
        rng,
        ctx.max_tries,
        ctr,
    ) {
        Some(p) => Motion {
            object: j,
            pick: cj,
            place: p,
        },
        None => Motion::noop(k, ck),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::in_workspace;
    use crate::seed::rng_from_seed;

    const R: f64 = 0.03;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn ctx() -> MotionContext {
        MotionContext {
            workspace: Workspace::default(),
            radius: R,
            epsilon: 0.015,
            max_tries: 100,
            heuristics: MotionHeuristics::default(),
        }
    }

    #[test]
    fn obstructor_on_target() {
        let cur = Arrangement(vec![p(0.1, 0.1), p(0.3, 0.2)]);
        assert_eq!(find_closest_obstructor(&cur, 0, p(0.3, 0.2), R), Some(1));
    }

    #[test]
    fn nearer_obstructor_wins() {
        let t = p(0.3, 0.2);
        let cur = Arrangement(vec![p(0.1, 0.1), p(0.32, 0.2), p(0.3, 0.21)]);
        assert_eq!(find_closest_obstructor(&cur, 0, t, R), Some(2));
        // equal distance: lowest index
        let t = p(0.5, 0.25);
        let cur = Arrangement(vec![p(0.1, 0.1), p(0.53125, 0.25), p(0.46875, 0.25)]);
        assert_eq!(find_closest_obstructor(&cur, 0, t, R), Some(1));
    }

    #[test]
    fn moving_object_is_never_its_own_obstructor() {
        let t = p(0.3, 0.2);
        let cur = Arrangement(vec![p(0.301, 0.2), p(0.35, 0.2)]);
        assert_eq!(find_closest_obstructor(&cur, 0, t, R), Some(1));
        let cur = Arrangement(vec![p(0.301, 0.2), p(0.5, 0.3)]);
        assert_eq!(find_closest_obstructor(&cur, 0, t, R), None);
    }

    #[test]
    fn free_target_gives_direct_move() {
        let cur = Arrangement(vec![p(0.1, 0.1), p(0.5, 0.3)]);
        let tgt = Arrangement(vec![p(0.3, 0.2), p(0.5, 0.1)]);
        let mut ctr = CollisionCounter::new();
        let m = get_motion(&cur, &tgt, 0, &ctx(), &mut rng_from_seed(0), &mut ctr);
        assert_eq!(m, Motion { object: 0, pick: p(0.1, 0.1), place: p(0.3, 0.2) });
        assert_eq!(ctr.count(), 1);
    }

    #[test]
    fn blocked_target_relocates_obstructor_clear_of_it() {
        let cur = Arrangement(vec![p(0.1, 0.1), p(0.3, 0.2)]);
        let tgt = Arrangement(vec![p(0.3, 0.2), p(0.5, 0.1)]);
        for seed in 0..50 {
            let mut ctr = CollisionCounter::new();
            let m = get_motion(&cur, &tgt, 0, &ctx(), &mut rng_from_seed(seed), &mut ctr);
            assert_eq!(m.object, 1);
            assert_eq!(m.pick, p(0.3, 0.2));
            assert!(!discs_overlap(m.place, tgt.0[0], R));
            assert!(!discs_overlap(m.place, cur.0[0], R));
            assert!(in_workspace(m.place, R, &ctx().workspace));
            assert!(ctr.count() >= 2);
        }
    }

    #[test]
    fn packed_workspace_gives_noop() {
        let ws = Workspace::new(0.0, 0.12, 0.0, 0.12).unwrap();
        let ctx = MotionContext { workspace: ws, ..ctx() };
        let cur = Arrangement(vec![p(0.03, 0.03), p(0.09, 0.03), p(0.03, 0.09), p(0.09, 0.09)]);
        let tgt = Arrangement(vec![p(0.09, 0.03), p(0.03, 0.03), p(0.09, 0.09), p(0.03, 0.09)]);
        let mut ctr = CollisionCounter::new();
        let m = get_motion(&cur, &tgt, 0, &ctx, &mut rng_from_seed(1), &mut ctr);
        assert!(m.is_noop());
        assert_eq!(m.object, 0);
        assert_eq!(ctr.count(), 1 + 100);
    }

    #[test]
    fn object_at_target_is_noop_without_checks() {
        let cur = Arrangement(vec![p(0.1, 0.1)]);
        let tgt = Arrangement(vec![p(0.105, 0.1)]);
        let mut ctr = CollisionCounter::new();
        let m = get_motion(&cur, &tgt, 0, &ctx(), &mut rng_from_seed(1), &mut ctr);
        assert!(m.is_noop());
        assert_eq!(ctr.count(), 0);
    }

    #[test]
    fn heuristics_constrain_relocation() {
        let cur = Arrangement(vec![p(0.1, 0.1), p(0.3, 0.2), p(0.5, 0.3)]);
        let tgt = Arrangement(vec![p(0.3, 0.2), p(0.5, 0.1), p(0.2, 0.3)]);
        let h = MotionHeuristics {
            avoid_other_targets: true,
            neighborhood: Some(0.1),
        };
        let c = ctx().with_heuristics(h);
        for seed in 0..50 {
            let mut ctr = CollisionCounter::new();
            let m = get_motion(&cur, &tgt, 0, &c, &mut rng_from_seed(seed), &mut ctr);
            assert_eq!(m.object, 1);
            assert!((m.place.x - 0.3).abs() <= 0.1 && (m.place.y - 0.2).abs() <= 0.1);
            assert!(!discs_overlap(m.place, tgt.0[2], R));
            assert!(!discs_overlap(m.place, tgt.0[0], R));
        }
    }
}
