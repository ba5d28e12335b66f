//! Shepherding simulator and genetic-programming engine.
//!
//! Sheep flock under fixed attraction/repulsion rules inside a fenced
//! square field; dogs are steered by pair-rooted expression trees evolved
//! to herd the sheep into a pen in the top-left corner.

pub mod config;
pub mod controllers;
pub mod evaluation;
pub mod expr;
pub mod gp;
pub mod rng;
pub mod settings;
pub mod sim;
pub mod trace;
pub mod vec2;

pub use config::{ConfigError, Geometry, PenAnchor, SimConfig, SpawnRegion};
pub use controllers::{Controller, TerminalSet};
pub use evaluation::{evaluate_trials, fitness, run_scenarios, FitnessSpec, Scenario, TrialReport};
pub use expr::{parse_tree, Expr, ExprTree, Op};
pub use gp::{evolve, EvolutionLog, GpConfig, Individual, SeedMode};
pub use sim::{run_episode, step_world, DogPolicy, EpisodeResult, WorldState};
pub use vec2::Vec2;
