//! Association of end-to-end entanglement requests to quantum switches.
//!
//! The crate samples a single-slot multi-switch network (binomial link-level
//! pair generation, Werner fidelities), solves each switch's action-selection
//! problem exactly, runs the swap-matching association algorithm, compares it
//! against exact, greedy and random baselines, and drives seeded Monte Carlo
//! sweeps that emit CSV or JSON tables.

pub mod baselines;
pub mod fidelity;
pub mod harness;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod scheduler;
mod search;
pub mod verify;

pub use baselines::{solve_greedy, solve_optimal, solve_random, Objective, Solution};
pub use fidelity::{Action, Fidelity};
pub use matching::{rqsa, MatchConfig, Matching, StabilityScope, SwapRecord};
pub use model::{Instance, Request, ScenarioParams, SlotState, Topology};
pub use scheduler::{solve_p1, ActionPlan};
pub use search::Limits;
