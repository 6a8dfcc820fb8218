//! Optimal fixed-horizon signal timing for a single intersection.
//!
//! The planning problem: a controller serves `P` phases over a horizon
//! of `T` one-second steps, each green must last at least `min_green`
//! seconds, and every switch inserts a `clearance`-second all-red gap.
//! Arrivals per phase and step are known, and the objective is the
//! total number of arrivals that hit a non-served phase (optionally
//! weighted per phase).
//!
//! [`solver::solve`] finds a provably optimal plan by dynamic
//! programming over a compact controller-state graph whose size depends
//! only on the signal geometry, never on the horizon, so its work grows
//! linearly in `T` with two value rows of live memory. The
//! [`baselines`] module carries an exhaustive oracle and a classic
//! stage-based formulation (cubic in `T`) used for cross-validation and
//! for the scaling comparison in [`bench`].
//!
//! ```
//! use phasedp::costs::StopsCost;
//! use phasedp::model::{ArrivalTable, ProblemInstance};
//! use phasedp::solver::solve;
//!
//! let arrivals = ArrivalTable::new(vec![
//!     vec![3, 3, 3, 0, 0, 0, 0, 0, 0, 0],
//!     vec![0, 0, 0, 0, 3, 3, 3, 3, 0, 0],
//! ]);
//! let instance = ProblemInstance::new(10, 2, 1, 3, arrivals).unwrap();
//! let result = solve(&instance, &StopsCost).unwrap();
//! assert_eq!(result.optimal_cost, 0);
//! ```

pub mod baselines;
pub mod bench;
pub mod costs;
pub mod model;
pub mod solver;
pub mod state_space;
pub mod workload;

pub use baselines::{brute_force, cop_solve, BaselineError, CopResult};
pub use costs::{CostModel, CostValue, StopsCost, WeightedStopsCost};
pub use model::{
    validate_plan, ArrivalTable, PhaseId, PlanEntry, ProblemInstance, TimingPlan,
};
pub use solver::{solve, solve_from, SolveError, SolveResult};
pub use state_space::{SignalState, StateGraph};
