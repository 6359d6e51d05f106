//! Monte-Carlo Tree Search task planner.
//!
//! Each tree node is an arrangement and has one action slot per object.
//! An iteration selects down the tree by UCB, expands one random unvisited
//! slot of the first node that still has one, scores the new arrangement by
//! its reward and backs that reward up to the root. There is no rollout: the
//! reward is defined in every state. The search stops at the first expanded
//! node in which every object is at its target.
//!
//! The motion for a slot is computed once at expansion and cached on the
//! child, so the plan is read back along the parent chain.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{reward, Arrangement, Instance, Motion, Plan};
use crate::error::{Error, Result};
use crate::geometry::{CollisionCounter, Point2, DEFAULT_MAX_TRIES};
use crate::motion::{get_motion, MotionContext, MotionHeuristics};
use crate::planner::PlanResult;
use crate::seed::rng_from_seed;

pub const DEFAULT_EXPLORATION: f64 = 1.0;
pub const DEFAULT_MAX_ITERATIONS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub exploration_c: f64,
    pub max_iterations: u64,
    /// Back up `reward / N` instead of the raw object count.
    pub normalize_reward: bool,
    pub seed: u64,
    /// Sampling budget for relocating an obstructor.
    pub max_tries: usize,
    pub heuristics: MotionHeuristics,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            exploration_c: DEFAULT_EXPLORATION,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            normalize_reward: false,
            seed: 0,
            max_tries: DEFAULT_MAX_TRIES,
            heuristics: MotionHeuristics::default(),
        }
    }
}

impl SearchConfig {
    pub fn with_c(mut self, c: f64) -> Self {
        self.exploration_c = c;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exploration_c >= 0.0 && self.exploration_c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "exploration constant must be finite and >= 0, got {}",
                self.exploration_c
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.max_tries == 0 {
            return Err(Error::InvalidConfig("max_tries must be >= 1".into()));
        }
        Ok(())
    }
}

/// `Q + c·sqrt(2·ln(n_parent) / n_child)`.
#[inline]
pub fn ucb_score(q: f64, parent_visits: u64, child_visits: u64, c: f64) -> f64 {
    debug_assert!(parent_visits >= 1 && child_visits >= 1);
    if c == 0.0 {
        return q;
    }
    q + c * (2.0 * (parent_visits as f64).ln() / child_visits as f64).sqrt()
}

pub type NodeId = u32;

const UNVISITED: NodeId = NodeId::MAX;
pub const ROOT: NodeId = 0;

#[derive(Debug, Clone)]
struct Node {
    parent: NodeId,
    /// Slot of this node in its parent's row.
    action: u32,
    /// Motion on the edge from the parent; meaningless for the root.
    motion: Motion,
}

/// Per-child bookkeeping, stored in the parent's row so that descending one
/// level reads a single contiguous block.
#[derive(Debug, Clone, Copy)]
struct Slot {
    total_reward: f64,
    visits: u64,
    /// `UNVISITED` until the action is expanded.
    child: NodeId,
    /// Number of expanded actions of `child`.
    expanded: u32,
}

const EMPTY_SLOT: Slot = Slot {
    total_reward: 0.0,
    visits: 0,
    child: UNVISITED,
    expanded: 0,
};

/// Arena-backed search tree. Node states and child slots are stored in flat
/// buffers with stride `n_objects`.
#[derive(Debug, Clone)]
pub struct SearchTree {
    n: usize,
    nodes: Vec<Node>,
    states: Vec<Point2>,
    /// `slots[p * n + a]` describes the child reached by action `a` of `p`.
    slots: Vec<Slot>,
    root: Slot,
}

impl SearchTree {
    /// Tree holding only `root`. The root starts with one visit so the
    /// logarithm in the UCB bonus is never negative.
    pub fn new(root: &Arrangement) -> Self {
        let n = root.len();
        assert!(n > 0, "search tree needs at least one object");
        Self {
            n,
            nodes: vec![Node {
                parent: UNVISITED,
                action: 0,
                motion: Motion::noop(0, root.positions()[0]),
            }],
            states: root.positions().to_vec(),
            slots: vec![EMPTY_SLOT; n],
            root: Slot {
                visits: 1,
                child: ROOT,
                ..EMPTY_SLOT
            },
        }
    }

    pub fn n_objects(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn state(&self, id: NodeId) -> &[Point2] {
        let s = id as usize * self.n;
        &self.states[s..s + self.n]
    }

    fn slot_index(&self, id: NodeId) -> Option<usize> {
        let node = &self.nodes[id as usize];
        (node.parent != UNVISITED).then(|| node.parent as usize * self.n + node.action as usize)
    }

    fn slot(&self, id: NodeId) -> &Slot {
        match self.slot_index(id) {
            Some(i) => &self.slots[i],
            None => &self.root,
        }
    }

    fn slot_mut(&mut self, id: NodeId) -> &mut Slot {
        match self.slot_index(id) {
            Some(i) => &mut self.slots[i],
            None => &mut self.root,
        }
    }

    pub fn visits(&self, id: NodeId) -> u64 {
        self.slot(id).visits
    }

    pub fn cumulative_reward(&self, id: NodeId) -> f64 {
        self.slot(id).total_reward
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.nodes[id as usize].parent;
        (p != UNVISITED).then_some(p)
    }

    /// Cached motion on the edge into `id`; `None` for the root.
    pub fn edge_motion(&self, id: NodeId) -> Option<Motion> {
        self.parent(id).map(|_| self.nodes[id as usize].motion)
    }

    pub fn child(&self, id: NodeId, action: usize) -> Option<NodeId> {
        let c = self.slots[id as usize * self.n + action].child;
        (c != UNVISITED).then_some(c)
    }

    pub fn is_expandable(&self, id: NodeId) -> bool {
        (self.slot(id).expanded as usize) < self.n
    }

    /// Mean backed-up reward of `id`.
    pub fn q(&self, id: NodeId) -> f64 {
        let s = self.slot(id);
        s.total_reward / s.visits as f64
    }

    /// UCB descent from the root. Returns the `(node, action)` edges taken and
    /// the expandable node reached.
    pub fn select(&self, c: f64) -> (Vec<(NodeId, usize)>, NodeId) {
        let mut path = Vec::new();
        let mut node = ROOT;
        while !self.is_expandable(node) {
            let action = self.best_action(node, c);
            path.push((node, action));
            node = self.slots[node as usize * self.n + action].child;
        }
        (path, node)
    }

    /// [`Self::select`] without recording the path.
    pub fn select_leaf(&self, c: f64) -> NodeId {
        let mut cur = self.root;
        while cur.expanded as usize == self.n {
            let action = self.best_in_row(cur.child, cur.visits, c);
            cur = self.slots[cur.child as usize * self.n + action];
        }
        cur.child
    }

    /// Argmax of the UCB score over the children of a fully expanded node;
    /// ties go to the lowest action index.
    pub fn best_action(&self, node: NodeId, c: f64) -> usize {
        self.best_in_row(node, self.slot(node).visits, c)
    }

    fn best_in_row(&self, node: NodeId, parent_visits: u64, c: f64) -> usize {
        let row = &self.slots[node as usize * self.n..(node as usize + 1) * self.n];
        let mut best = (0, f64::NEG_INFINITY);
        for (a, ch) in row.iter().enumerate() {
            debug_assert_ne!(ch.child, UNVISITED);
            let q = ch.total_reward / ch.visits as f64;
            let u = ucb_score(q, parent_visits, ch.visits, c);
            if u > best.1 {
                best = (a, u);
            }
        }
        best.0
    }

    /// Adds the child for `action` of `parent` with the given cached motion.
    /// The child starts with zero visits and zero reward.
    ///
    /// Panics if the slot is already filled or the motion does not apply.
    pub fn insert_child(&mut self, parent: NodeId, action: usize, motion: Motion) -> NodeId {
        let slot = parent as usize * self.n + action;
        assert_eq!(self.slots[slot].child, UNVISITED, "action {action} of node {parent} already expanded");
        let id = NodeId::try_from(self.nodes.len()).expect("search tree exceeds u32 nodes");
        assert_ne!(id, UNVISITED, "search tree exceeds u32 nodes");
        let start = parent as usize * self.n;
        self.states.extend_from_within(start..start + self.n);
        let s = self.states.len() - self.n;
        assert_eq!(
            self.states[s + motion.object],
            motion.pick,
            "cached motion does not start at the object's position"
        );
        self.states[s + motion.object] = motion.place;
        self.nodes.push(Node {
            parent,
            action: action as u32,
            motion,
        });
        self.slots.extend(std::iter::repeat(EMPTY_SLOT).take(self.n));
        self.slots[slot].child = id;
        self.slot_mut(parent).expanded += 1;
        id
    }

    /// Expands one uniformly chosen unvisited action of `node`, computing and
    /// caching its motion.
    pub fn expand<R: Rng + ?Sized>(
        &mut self,
        node: NodeId,
        target: &Arrangement,
        ctx: &MotionContext,
        rng: &mut R,
        ctr: &mut CollisionCounter,
    ) -> NodeId {
        let free = self.n - self.slot(node).expanded as usize;
        assert!(free > 0, "node {node} has no unvisited action");
        let pick = rng.gen_range(0..free);
        let base = node as usize * self.n;
        let action = (0..self.n)
            .filter(|a| self.slots[base + a].child == UNVISITED)
            .nth(pick)
            .expect("unvisited action count out of sync");
        let current = Arrangement(self.state(node).to_vec());
        let motion = get_motion(&current, target, action, ctx, rng, ctr);
        self.insert_child(node, action, motion)
    }

    /// Adds one visit and `leaf_reward` to `leaf` and all of its ancestors.
    pub fn backpropagate(&mut self, leaf: NodeId, leaf_reward: f64) {
        let mut id = leaf;
        loop {
            let slot = self.slot_mut(id);
            slot.visits += 1;
            slot.total_reward += leaf_reward;
            match self.parent(id) {
                Some(p) => id = p,
                None => break,
            }
        }
    }

    /// Cached motions from the root down to `leaf`, no-ops dropped.
    pub fn extract_plan(&self, leaf: NodeId) -> Result<Plan> {
        if leaf as usize >= self.nodes.len() {
            return Err(Error::InvalidConfig(format!("node {leaf} is not in the tree")));
        }
        let mut motions = Vec::new();
        let mut id = leaf;
        while let Some(parent) = self.parent(id) {
            let m = self.nodes[id as usize].motion;
            if !m.is_noop() {
                motions.push(m);
            }
            id = parent;
        }
        motions.reverse();
        Ok(Plan { motions })
    }
}

/// Runs the search on `instance` until the first solution or the iteration cap.
pub fn plan(instance: &Instance, config: &SearchConfig) -> PlanResult {
    let started = Instant::now();
    let n = instance.n_objects();
    let mut ctr = CollisionCounter::new();
    if reward(&instance.initial, &instance.target, instance.epsilon) == n {
        return PlanResult {
            solved: true,
            plan: Plan::default(),
            iterations: 0,
            collision_checks: 0,
            wall_time: started.elapsed(),
        };
    }

    let mut rng = rng_from_seed(config.seed);
    let ctx = MotionContext {
        max_tries: config.max_tries,
        ..MotionContext::for_instance(instance)
    }
    .with_heuristics(config.heuristics);
    let scale = if config.normalize_reward { 1.0 / n as f64 } else { 1.0 };
    let eps2 = instance.epsilon * instance.epsilon;
    let target = instance.target.positions();

    let mut tree = SearchTree::new(&instance.initial);
    for iteration in 1..=config.max_iterations {
        let leaf = tree.select_leaf(config.exploration_c);
        let child = tree.expand(leaf, &instance.target, &ctx, &mut rng, &mut ctr);
        let r = tree
            .state(child)
            .iter()
            .zip(target)
            .filter(|(c, t)| c.distance_squared(**t) <= eps2)
            .count();
        tree.backpropagate(child, r as f64 * scale);
        if r == n {
            let plan = tree.extract_plan(child).expect("child was just inserted");
            return PlanResult {
                solved: true,
                plan,
                iterations: iteration,
                collision_checks: ctr.count(),
                wall_time: started.elapsed(),
            };
        }
    }
    PlanResult {
        solved: false,
        plan: Plan::default(),
        iterations: config.max_iterations,
        collision_checks: ctr.count(),
        wall_time: started.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{apply_motion, verify_solution};
    use crate::geometry::Workspace;
    use approx::assert_abs_diff_eq;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn ucb_examples() {
        // 0.5 + sqrt(2 ln 10 / 2) = 0.5 + sqrt(2.302585...) = 2.017427...
        assert_abs_diff_eq!(ucb_score(0.5, 10, 2, 1.0), 2.017427, epsilon = 1e-6);
        assert_eq!(ucb_score(0.37, 1000, 3, 0.0), 0.37);
        assert_eq!(ucb_score(0.0, 1, 1, 1.0), 0.0);
    }

    #[test]
    fn fresh_root_is_selected_itself() {
        let tree = SearchTree::new(&Arrangement(vec![p(0.1, 0.1), p(0.3, 0.3)]));
        let (path, leaf) = tree.select(1.0);
        assert!(path.is_empty());
        assert_eq!(leaf, ROOT);
        assert_eq!(tree.visits(ROOT), 1);
    }

    fn two_child_tree() -> SearchTree {
        let root = Arrangement(vec![p(0.1, 0.1), p(0.3, 0.3)]);
        let mut tree = SearchTree::new(&root);
        let a = tree.insert_child(ROOT, 0, Motion { object: 0, pick: p(0.1, 0.1), place: p(0.2, 0.1) });
        let b = tree.insert_child(ROOT, 1, Motion { object: 1, pick: p(0.3, 0.3), place: p(0.4, 0.3) });
        assert_eq!((a, b), (1, 2));
        tree
    }

    #[test]
    fn equal_scores_pick_lowest_action() {
        let mut tree = two_child_tree();
        tree.backpropagate(1, 0.5);
        tree.backpropagate(2, 0.5);
        let (path, leaf) = tree.select(1.0);
        assert_eq!(path, vec![(ROOT, 0)]);
        assert_eq!(leaf, 1);
    }

    #[test]
    fn pure_exploitation_follows_higher_q() {
        let mut tree = two_child_tree();
        tree.backpropagate(1, 0.1);
        tree.backpropagate(2, 0.9);
        let (path, leaf) = tree.select(0.0);
        assert_eq!(path, vec![(ROOT, 1)]);
        assert_eq!(leaf, 2);
        // with a large bonus the less-visited child wins instead
        tree.backpropagate(2, 0.9);
        tree.backpropagate(2, 0.9);
        assert_eq!(tree.select(10.0).1, 1);
    }

    #[test]
    fn backprop_accumulates_along_path() {
        let mut tree = two_child_tree();
        let g = tree.insert_child(1, 1, Motion { object: 1, pick: p(0.3, 0.3), place: p(0.5, 0.3) });
        tree.backpropagate(g, 0.2);
        assert_eq!(tree.visits(g), 1);
        assert_abs_diff_eq!(tree.cumulative_reward(g), 0.2);
        tree.backpropagate(g, 0.4);
        assert_abs_diff_eq!(tree.q(g), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(tree.q(1), 0.3, epsilon = 1e-12);
        assert_eq!(tree.visits(ROOT), 3);
        assert_eq!(tree.visits(2), 0);
    }

    #[test]
    #[should_panic(expected = "already expanded")]
    fn slot_cannot_be_expanded_twice() {
        let mut tree = two_child_tree();
        tree.insert_child(ROOT, 0, Motion::noop(0, p(0.1, 0.1)));
    }

    #[test]
    fn extract_plan_drops_noops() {
        let mut tree = two_child_tree();
        let a = tree.insert_child(1, 1, Motion::noop(1, p(0.3, 0.3)));
        let b = tree.insert_child(a, 1, Motion { object: 1, pick: p(0.3, 0.3), place: p(0.5, 0.3) });
        let plan = tree.extract_plan(b).unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.motions[0].object, 0);
        assert_eq!(tree.extract_plan(1).unwrap().len(), 1);
        assert!(tree.extract_plan(99).is_err());
    }

    #[test]
    fn one_object_root_has_single_direct_child() {
        let inst = Instance::with_defaults(vec![p(0.1, 0.1)], vec![p(0.4, 0.3)]).unwrap();
        let mut tree = SearchTree::new(&inst.initial);
        let ctx = MotionContext::for_instance(&inst);
        let mut ctr = CollisionCounter::new();
        let c = tree.expand(ROOT, &inst.target, &ctx, &mut rng_from_seed(0), &mut ctr);
        assert_eq!(tree.edge_motion(c), Some(Motion { object: 0, pick: p(0.1, 0.1), place: p(0.4, 0.3) }));
        assert!(!tree.is_expandable(ROOT));
    }

    #[test]
    fn identity_instance_is_solved_without_search() {
        let inst = Instance::with_defaults(vec![p(0.1, 0.1)], vec![p(0.1, 0.1)]).unwrap();
        let r = plan(&inst, &SearchConfig::default());
        assert!(r.solved);
        assert_eq!((r.plan.len(), r.iterations, r.collision_checks), (0, 0, 0));
    }

    #[test]
    fn two_object_swap_takes_three_moves() {
        let inst = Instance::with_defaults(vec![p(0.2, 0.2), p(0.4, 0.2)], vec![p(0.4, 0.2), p(0.2, 0.2)]).unwrap();
        for seed in 0..20 {
            let r = plan(&inst, &SearchConfig::default().with_seed(seed));
            assert!(r.solved);
            assert_eq!(r.plan.len(), 3, "seed {seed}");
            verify_solution(&inst, &r.plan).unwrap();
        }
    }

    #[test]
    fn search_is_deterministic() {
        let inst = crate::generate::gen_random_instance(
            12,
            &crate::generate::GenParams::default(),
            &mut rng_from_seed(3),
        )
        .unwrap();
        let cfg = SearchConfig::default().with_seed(11);
        let a = plan(&inst, &cfg).without_timing();
        let b = plan(&inst, &cfg).without_timing();
        assert_eq!(a, b);
        assert!(a.solved);
    }

    #[test]
    fn tree_stays_consistent_during_search() {
        let inst = crate::generate::gen_random_instance(
            8,
            &crate::generate::GenParams::default(),
            &mut rng_from_seed(21),
        )
        .unwrap();
        let ctx = MotionContext::for_instance(&inst);
        let mut rng = rng_from_seed(1);
        let mut ctr = CollisionCounter::new();
        let mut tree = SearchTree::new(&inst.initial);
        for it in 1..=300u64 {
            let (_, leaf) = tree.select(1.0);
            let child = tree.expand(leaf, &inst.target, &ctx, &mut rng, &mut ctr);
            let r = reward(&Arrangement(tree.state(child).to_vec()), &inst.target, inst.epsilon);
            tree.backpropagate(child, r as f64 / 8.0);
            assert_eq!(tree.visits(ROOT), it + 1);
            assert_eq!(tree.len() as u64, it + 1);
        }
        for id in 1..tree.len() as NodeId {
            let parent = tree.parent(id).unwrap();
            let expect = apply_motion(&Arrangement(tree.state(parent).to_vec()), &tree.edge_motion(id).unwrap()).unwrap();
            assert_eq!(expect.positions(), tree.state(id));
            assert!(tree.cumulative_reward(id) >= 0.0);
            let child_visits: u64 = (0..8).filter_map(|a| tree.child(id, a)).map(|c| tree.visits(c)).sum();
            assert_eq!(tree.visits(id), 1 + child_visits);
        }
    }

    #[test]
    fn zero_exploration_selects_argmax_q() {
        let inst = crate::generate::gen_random_instance(
            6,
            &crate::generate::GenParams::default(),
            &mut rng_from_seed(8),
        )
        .unwrap();
        let ctx = MotionContext::for_instance(&inst);
        let mut rng = rng_from_seed(2);
        let mut ctr = CollisionCounter::new();
        let mut tree = SearchTree::new(&inst.initial);
        for _ in 0..60 {
            let (path, leaf) = tree.select(0.0);
            for &(node, action) in &path {
                let qs: Vec<f64> = (0..6).map(|a| tree.q(tree.child(node, a).unwrap())).collect();
                let max = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let first = qs.iter().position(|&q| q == max).unwrap();
                assert_eq!(action, first);
            }
            let child = tree.expand(leaf, &inst.target, &ctx, &mut rng, &mut ctr);
            let r = reward(&Arrangement(tree.state(child).to_vec()), &inst.target, inst.epsilon);
            tree.backpropagate(child, r as f64 / 6.0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        assert!(SearchConfig::default().with_c(-1.0).validate().is_err());
        let cfg = SearchConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unsolvable_within_cap_reports_failure() {
        // four discs packed into a table that only fits four: every action is a no-op
        let ws = Workspace::new(0.0, 0.12, 0.0, 0.12).unwrap();
        let inst = Instance::new(
            ws,
            0.03,
            0.015,
            Arrangement(vec![p(0.03, 0.03), p(0.09, 0.03), p(0.03, 0.09), p(0.09, 0.09)]),
            Arrangement(vec![p(0.09, 0.03), p(0.03, 0.03), p(0.09, 0.09), p(0.03, 0.09)]),
        )
        .unwrap();
        let cfg = SearchConfig {
            max_iterations: 50,
            ..Default::default()
        };
        let r = plan(&inst, &cfg);
        assert!(!r.solved);
        assert_eq!(r.iterations, 50);
        assert!(r.plan.is_empty());
        assert_eq!(r.collision_checks, 50 * 101);
    }
}
