//! Tabletop rearrangement planning.
//!
//! Objects are equal-radius discs on a rectangular table. A planner must find
//! a short sequence of pick-and-place [`Motion`]s taking an initial
//! [`Arrangement`] to a target one without ever overlapping two discs.
//!
//! * [`geometry`] – workspace, disc collisions, free-space sampling.
//! * [`arrangement`] – state, instances, reward, plan replay.
//! * [`generate`] – random / monotone instance generators and the buffer probe.
//! * [`mcts`] – the Monte-Carlo Tree Search task planner.
//! * [`baseline`] – the greedy baseline and its random-restart variant.
//! * [`sim`] – closed-loop execution with perturbations.
//! * [`bench`] – benchmark suites, aggregation, CSV/JSON output.
//! * [`render`] – SVG rendering of instances, plans and traces.

pub mod arrangement;
pub mod baseline;
pub mod bench;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod mcts;
pub mod motion;
pub mod planner;
pub mod render;
pub mod seed;
pub mod sim;

pub use arrangement::{apply_motion, is_solved, replay_plan, reward, Arrangement, Instance, Motion, Plan};
pub use baseline::{baseline_plan, randperm_plan, BaselineConfig};
pub use error::{Error, Result};
pub use geometry::{CollisionCounter, Point2, Workspace};
pub use mcts::{plan, SearchConfig};
pub use motion::MotionHeuristics;
pub use planner::{PlanResult, Planner};
pub use sim::{run_closed_loop, ExecConfig, ExecTrace, Perturbation};
