//! `rearrange` command-line tool.
//!
//! Exit status: 0 when solved / successful, 2 when the planner or episode
//! failed, 1 on bad input.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rearrange_core::bench::{aggregate, emit, run_suite, Format, SuiteSpec};
use rearrange_core::generate::{gen_monotone_instance, gen_random_instance, GenParams};
use rearrange_core::render::{render_svg, Overlay};
use rearrange_core::seed::rng_from_seed;
use rearrange_core::sim::{run_closed_loop, ExecConfig, ExecTrace, Perturbation};
use rearrange_core::{BaselineConfig, Instance, Plan, PlanResult, Planner, SearchConfig, Workspace};

#[derive(Parser)]
#[command(name = "rearrange", version, about = "Tabletop rearrangement planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random or monotone instance as JSON.
    Gen(GenArgs),
    /// Plan for an instance and print the result as JSON.
    Solve(SolveArgs),
    /// Run a benchmark suite described by a JSON spec file.
    Bench(BenchArgs),
    /// Closed-loop execution with optional perturbations; JSON lines out.
    Simulate(SimulateArgs),
    /// Draw an instance, optionally with a plan or trace, as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Monotone,
}

#[derive(Args)]
struct GenArgs {
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GenKind::Random)]
    kind: GenKind,
    #[arg(long, default_value_t = rearrange_core::geometry::DEFAULT_WIDTH)]
    width: f64,
    #[arg(long, default_value_t = rearrange_core::geometry::DEFAULT_HEIGHT)]
    height: f64,
    #[arg(long, default_value_t = rearrange_core::geometry::DEFAULT_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = rearrange_core::arrangement::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlannerKind {
    Mcts,
    Baseline,
    Randperm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct PlannerArgs {
    #[arg(long, value_enum, default_value_t = PlannerKind::Mcts)]
    planner: PlannerKind,
    /// Exploration constant.
    #[arg(long, default_value_t = rearrange_core::mcts::DEFAULT_EXPLORATION)]
    c: f64,
    #[arg(long, default_value_t = rearrange_core::mcts::DEFAULT_MAX_ITERATIONS)]
    max_iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    normalize_reward: OnOff,
    /// Collision-check budget for `randperm`.
    #[arg(long)]
    budget: Option<u64>,
}

impl PlannerArgs {
    fn build(&self) -> Result<Planner> {
        let planner = match self.planner {
            PlannerKind::Mcts => {
                let cfg = SearchConfig {
                    exploration_c: self.c,
                    max_iterations: self.max_iters,
                    normalize_reward: self.normalize_reward == OnOff::On,
                    seed: self.seed,
                    ..SearchConfig::default()
                };
                cfg.validate()?;
                Planner::Mcts(cfg)
            }
            PlannerKind::Baseline | PlannerKind::Randperm => {
                let cfg = BaselineConfig {
                    seed: self.seed,
                    collision_budget: self.budget,
                    ..BaselineConfig::default()
                };
                cfg.validate()?;
                if self.planner == PlannerKind::Randperm {
                    if cfg.collision_budget.is_none() {
                        bail!("--planner randperm needs --budget");
                    }
                    Planner::Randperm(cfg)
                } else {
                    Planner::Baseline(cfg)
                }
            }
        };
        Ok(planner)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file, `-` for stdin.
    instance: PathBuf,
    #[command(flatten)]
    planner: PlannerArgs,
    /// Override the instance's goal tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Report measured wall time (otherwise 0, keeping output reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite spec JSON file.
    spec: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Emit per-(planner, n) summaries instead of raw records.
    #[arg(long)]
    summary: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    /// JSON array of perturbations.
    #[arg(long)]
    perturbations: Option<PathBuf>,
    #[command(flatten)]
    planner: PlannerArgs,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Half-width of uniform observation noise, meters.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    instance: PathBuf,
    /// PlanResult or bare plan JSON.
    #[arg(long, conflicts_with = "trace")]
    plan: Option<PathBuf>,
    /// Trace in JSON-lines form, as written by `simulate`.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(out: Option<&Path>, doc: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, doc).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(doc.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = read_input(path)?;
    Instance::from_json(&text).with_context(|| format!("parsing instance {}", path.display()))
}

fn cmd_gen(a: GenArgs) -> Result<bool> {
    let params = GenParams {
        workspace: Workspace::new(0.0, a.width, 0.0, a.height)?,
        radius: a.radius,
        epsilon: a.epsilon,
        ..GenParams::default()
    };
    let mut rng = rng_from_seed(a.seed);
    let inst = match a.kind {
        GenKind::Random => gen_random_instance(a.n, &params, &mut rng)?,
        GenKind::Monotone => gen_monotone_instance(a.n, &params, &mut rng)?.instance,
    };
    write_output(a.out.as_deref(), &(inst.to_json()? + "\n"))?;
    Ok(true)
}

fn cmd_solve(a: SolveArgs) -> Result<bool> {
    let mut inst = load_instance(&a.instance)?;
    if let Some(eps) = a.epsilon {
        inst = Instance::new(inst.workspace, inst.radius, eps, inst.initial, inst.target)?;
    }
    let planner = a.planner.build()?;
    let mut result = planner.solve(&inst);
    if !a.timing {
        result = result.without_timing();
    }
    write_output(a.out.as_deref(), &(serde_json::to_string_pretty(&result)? + "\n"))?;
    Ok(result.solved)
}

fn cmd_bench(a: BenchArgs) -> Result<bool> {
    let format: Format = a.format.parse()?;
    let spec: SuiteSpec = serde_json::from_str(&read_input(&a.spec)?).context("parsing suite spec")?;
    let records = run_suite(&spec, a.jobs)?;
    let doc = if a.summary {
        emit(&aggregate(&records), format)?
    } else {
        emit(&records, format)?
    };
    write_output(a.out.as_deref(), &doc)?;
    Ok(true)
}

fn cmd_simulate(a: SimulateArgs) -> Result<bool> {
    let inst = load_instance(&a.instance)?;
    let schedule: Vec<Perturbation> = match &a.perturbations {
        Some(p) => serde_json::from_str(&read_input(p)?).context("parsing perturbation schedule")?,
        None => Vec::new(),
    };
    let planner = a.planner.build()?;
    let cfg = ExecConfig {
        max_steps: a.max_steps,
        observation_noise: a.noise,
        seed: a.planner.seed,
    };
    let trace = run_closed_loop(&inst, &planner, &schedule, &cfg)?;
    write_output(a.out.as_deref(), &trace.to_json_lines()?)?;
    Ok(trace.success())
}

fn cmd_render(a: RenderArgs) -> Result<bool> {
    let inst = load_instance(&a.instance)?;
    let svg = if let Some(p) = &a.plan {
        let text = read_input(p)?;
        let plan: Plan = match serde_json::from_str::<PlanResult>(&text) {
            Ok(r) => r.plan,
            Err(_) => serde_json::from_str(&text).context("parsing plan")?,
        };
        render_svg(&inst, Overlay::Plan(&plan))
    } else if let Some(t) = &a.trace {
        let trace = ExecTrace::from_json_lines(&read_input(t)?)?;
        render_svg(&inst, Overlay::Trace(&trace))
    } else {
        render_svg(&inst, Overlay::None)
    };
    write_output(a.out.as_deref(), &svg)?;
    Ok(true)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as "unsolved".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Render(a) => cmd_render(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
