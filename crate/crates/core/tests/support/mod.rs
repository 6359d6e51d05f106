//! Shared helpers for integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use rearrange_core::geometry::{discs_overlap, in_workspace};
use rearrange_core::{Instance, Point2};

/// Breadth-first search over a discretized placement set: a regular grid of
/// spacing `spacing` over the inset workspace plus every initial and target
/// position. Returns the minimum number of single-object moves from the
/// initial to the target arrangement, or `None` if the discretized problem
/// has no solution. Meant for 2 or 3 objects.
pub fn bfs_optimal_moves(inst: &Instance, spacing: f64) -> Option<usize> {
    let n = inst.n_objects();
    assert!((1..=3).contains(&n), "oracle is sized for 1 to 3 objects");
    let (r, ws) = (inst.radius, &inst.workspace);
    let eps2 = inst.epsilon * inst.epsilon;

    let mut cands: Vec<Point2> = inst.initial.positions().to_vec();
    cands.extend_from_slice(inst.target.positions());
    let nx = ((ws.width() - 2.0 * r) / spacing).floor() as usize;
    let ny = ((ws.height() - 2.0 * r) / spacing).floor() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let p = Point2::new(ws.x_min + r + i as f64 * spacing, ws.y_min + r + j as f64 * spacing);
            if in_workspace(p, r, ws) {
                cands.push(p);
            }
        }
    }
    let m = cands.len();
    let at_target: Vec<Vec<bool>> = (0..n)
        .map(|k| {
            let t = inst.target.positions()[k];
            cands.iter().map(|c| c.distance_squared(t) <= eps2).collect()
        })
        .collect();
    // overlap[a * m + b]
    let overlap: Vec<bool> = (0..m * m)
        .map(|ab| discs_overlap(cands[ab / m], cands[ab % m], r))
        .collect();

    let encode = |s: &[usize]| s.iter().fold(0usize, |acc, &v| acc * m + v);
    let mut dist = vec![u8::MAX; m.pow(n as u32)];
    let start: Vec<usize> = (0..n).collect();
    let is_goal = |s: &[usize]| s.iter().enumerate().all(|(k, &v)| at_target[k][v]);
    if is_goal(&start) {
        return Some(0);
    }
    dist[encode(&start)] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let d = dist[encode(&s)];
        for k in 0..n {
            for v in 0..m {
                if v == s[k] || (0..n).any(|o| o != k && overlap[s[o] * m + v]) {
                    continue;
                }
                let mut next = s.clone();
                next[k] = v;
                let code = encode(&next);
                if dist[code] != u8::MAX {
                    continue;
                }
                dist[code] = d + 1;
                if is_goal(&next) {
                    return Some(d as usize + 1);
                }
                queue.push_back(next);
            }
        }
    }
    None
}

/// Workspace small enough that 2 or 3 discs routinely block each other.
pub fn compact_workspace() -> rearrange_core::Workspace {
    rearrange_core::Workspace::new(0.0, 0.30, 0.0, 0.20).unwrap()
}

pub const ORACLE_SPACING: f64 = 0.025;

/// Seeded random instance with `n` objects on [`compact_workspace`].
pub fn compact_instance(n: usize, seed: u64) -> Instance {
    use rearrange_core::generate::{gen_random_instance, GenParams};
    let params = GenParams {
        workspace: compact_workspace(),
        ..GenParams::default()
    };
    gen_random_instance(n, &params, &mut rearrange_core::seed::rng_from_seed(seed)).unwrap()
}
