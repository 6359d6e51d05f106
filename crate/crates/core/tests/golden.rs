//! Frozen outputs. Run with `BLESS=1` to rewrite the fixtures after an
//! intentional format or algorithm change.

use std::fs;
use std::path::PathBuf;

use rearrange_core::bench::{aggregate, records_from_csv, run_suite, to_csv, SuiteSpec};
use rearrange_core::generate::{gen_monotone_instance, gen_random_instance, GenParams};
use rearrange_core::render::{render_svg, Overlay};
use rearrange_core::seed::rng_from_seed;
use rearrange_core::{
    plan, run_closed_loop, BaselineConfig, ExecConfig, Instance, Perturbation, Planner, Point2, SearchConfig,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from fixture:\n{actual}");
}

fn small_suite() -> SuiteSpec {
    SuiteSpec::new(2024, 4, 4, 5)
        .with_planner("baseline", Planner::Baseline(BaselineConfig::default()))
        .with_planner("mcts", Planner::Mcts(SearchConfig::default()))
}

#[test]
fn seeded_instance_json() {
    let inst = gen_random_instance(5, &GenParams::default(), &mut rng_from_seed(7)).unwrap();
    check("instance_n5_seed7.json", &inst.to_json().unwrap());
}

#[test]
fn seeded_monotone_instance_json() {
    let m = gen_monotone_instance(4, &GenParams::default(), &mut rng_from_seed(7)).unwrap();
    check("monotone_n4_seed7.json", &m.instance.to_json().unwrap());
}

#[test]
fn solve_result_json() {
    let inst = gen_random_instance(8, &GenParams::default(), &mut rng_from_seed(3)).unwrap();
    let r = plan(&inst, &SearchConfig::default().with_seed(5)).without_timing();
    check("solve_n8_seed3.json", &serde_json::to_string_pretty(&r).unwrap());
}

#[test]
fn bench_csv_ten_records() {
    let records = run_suite(&small_suite(), 1).unwrap();
    assert_eq!(records.len(), 10);
    let csv = to_csv(&records).unwrap();
    check("bench_small.csv", &csv);
    assert_eq!(records_from_csv(&csv).unwrap(), records);
}

#[test]
fn bench_summary_csv() {
    let records = run_suite(&small_suite(), 1).unwrap();
    check("bench_small_summary.csv", &to_csv(&aggregate(&records)).unwrap());
}

fn three_objects() -> Instance {
    let p = Point2::new;
    Instance::with_defaults(
        vec![p(0.1, 0.1), p(0.3, 0.2), p(0.45, 0.3)],
        vec![p(0.3, 0.2), p(0.1, 0.1), p(0.5, 0.1)],
    )
    .unwrap()
}

#[test]
fn three_object_svg() {
    let inst = three_objects();
    check("three_objects.svg", &render_svg(&inst, Overlay::None));
    let r = plan(&inst, &SearchConfig::default().with_seed(1));
    assert!(r.solved);
    check("three_objects_plan.svg", &render_svg(&inst, Overlay::Plan(&r.plan)));
}

#[test]
fn closed_loop_trace_jsonl() {
    let inst = three_objects();
    let schedule = [Perturbation {
        trigger_step: 1,
        object: 2,
        new_position: Point2::new(0.2, 0.32),
    }];
    let planner = Planner::Mcts(SearchConfig::default());
    let trace = run_closed_loop(&inst, &planner, &schedule, &ExecConfig { seed: 9, ..ExecConfig::default() }).unwrap();
    assert!(trace.success());
    check("three_objects_trace.jsonl", &trace.to_json_lines().unwrap());
}
