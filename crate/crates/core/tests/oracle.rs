mod support;

use rearrange_core::arrangement::verify_solution;
use rearrange_core::{plan, Arrangement, Instance, Point2, SearchConfig};

use support::{bfs_optimal_moves, compact_instance, ORACLE_SPACING};

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

#[test]
fn oracle_swap_needs_three_moves() {
    let inst = Instance::with_defaults(vec![p(0.2, 0.2), p(0.4, 0.2)], vec![p(0.4, 0.2), p(0.2, 0.2)]).unwrap();
    assert_eq!(bfs_optimal_moves(&inst, 0.05), Some(3));
    let r = plan(&inst, &SearchConfig::default());
    assert_eq!(r.plan.len(), 3);
}

#[test]
fn oracle_identity_and_direct_moves() {
    let same = Instance::with_defaults(vec![p(0.1, 0.1), p(0.3, 0.3)], vec![p(0.1, 0.1), p(0.3, 0.3)]).unwrap();
    assert_eq!(bfs_optimal_moves(&same, 0.05), Some(0));
    let free = Instance::with_defaults(vec![p(0.1, 0.1), p(0.3, 0.3)], vec![p(0.5, 0.1), p(0.3, 0.1)]).unwrap();
    assert_eq!(bfs_optimal_moves(&free, 0.05), Some(2));
}

#[test]
fn oracle_chain_is_monotone() {
    // 0 -> where 1 sits, 1 -> where 2 sits, 2 -> free spot: order 2, 1, 0
    let inst = Instance::with_defaults(
        vec![p(0.1, 0.2), p(0.2, 0.2), p(0.3, 0.2)],
        vec![p(0.2, 0.2), p(0.3, 0.2), p(0.45, 0.2)],
    )
    .unwrap();
    assert_eq!(bfs_optimal_moves(&inst, 0.05), Some(3));
    let r = plan(&inst, &SearchConfig::default());
    assert_eq!(r.plan.len(), 3);
}

#[test]
fn oracle_reports_unsolvable_discretization() {
    use rearrange_core::Workspace;
    // two slots and no room beside them: a swap has nowhere to go
    let ws = Workspace::new(0.0, 0.125, 0.0, 0.09375).unwrap();
    let inst = Instance::new(
        ws,
        0.03125,
        0.015,
        Arrangement::new(vec![p(0.03125, 0.03125), p(0.09375, 0.03125)]),
        Arrangement::new(vec![p(0.09375, 0.03125), p(0.03125, 0.03125)]),
    )
    .unwrap();
    assert_eq!(bfs_optimal_moves(&inst, 0.01), None);
}

#[test]
fn mcts_never_beats_the_oracle_on_compact_instances() {
    for seed in 0..10 {
        let n = 2 + (seed as usize % 2);
        let inst = compact_instance(n, seed);
        let opt = bfs_optimal_moves(&inst, ORACLE_SPACING).expect("compact instances are solvable");
        let r = plan(&inst, &SearchConfig::default().with_seed(seed));
        assert!(r.solved, "seed {seed}");
        verify_solution(&inst, &r.plan).unwrap();
        assert!(r.plan.len() >= opt, "seed {seed}: {} < {opt}", r.plan.len());
    }
}
