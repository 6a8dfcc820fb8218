//! Per-step objective models and a post-hoc queue simulator for comparing
//! finished plans.
//!
//! The solver and baselines are generic over [`CostModel`]. Integral
//! models accumulate in `u64` so cross-checks against the exhaustive
//! oracle compare exactly; weighted models accumulate in `f64` and tests
//! compare at [`WEIGHTED_COST_TOLERANCE`].

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{PlanViolation, ProblemInstance, TimingPlan};
use crate::state_space::SignalState;

/// Absolute tolerance for comparing real-valued plan costs produced by
/// different algorithms on the same instance.
pub const WEIGHTED_COST_TOLERANCE: f64 = 1e-9;

/// Scalar a cost model accumulates in: ordered, additive, with an
/// unfeasible sentinel that addition saturates at.
pub trait CostValue: Copy + PartialOrd + PartialEq + Add<Output = Self> + fmt::Debug + fmt::Display {
    const ZERO: Self;
    /// Sentinel for "no feasible way to reach this state".
    const INFEASIBLE: Self;
    fn is_infeasible(self) -> bool;
    fn saturating_add(self, other: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl CostValue for u64 {
    const ZERO: Self = 0;
    const INFEASIBLE: Self = u64::MAX;

    fn is_infeasible(self) -> bool {
        self == u64::MAX
    }

    fn saturating_add(self, other: Self) -> Self {
        u64::saturating_add(self, other)
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl CostValue for f64 {
    const ZERO: Self = 0.0;
    const INFEASIBLE: Self = f64::INFINITY;

    fn is_infeasible(self) -> bool {
        self.is_infinite()
    }

    fn saturating_add(self, other: Self) -> Self {
        self + other
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// Per-step cost of occupying a controller state at a given time. The
/// value depends only on which phase the state serves, the step, and the
/// instance data; the objective of a plan is the sum over its steps.
pub trait CostModel {
    type Value: CostValue;

    /// Cost of occupying `state` at 1-indexed step `t`.
    ///
    /// Panics if `t` is outside `1..=instance.horizon()`.
    fn step_cost(&self, state: SignalState, t: usize, instance: &ProblemInstance) -> Self::Value;
}

fn check_step(t: usize, instance: &ProblemInstance) {
    assert!(
        (1..=instance.horizon()).contains(&t),
        "step {t} outside horizon 1..={}",
        instance.horizon()
    );
}

/// Counts every vehicle that arrives while its phase is not green. During
/// clearance all arrivals count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StopsCost;

impl CostModel for StopsCost {
    type Value = u64;

    fn step_cost(&self, state: SignalState, t: usize, instance: &ProblemInstance) -> u64 {
        check_step(t, instance);
        let served = state.serves();
        let mut total = 0u64;
        for phase in instance.phases() {
            if Some(phase) != served {
                total += u64::from(instance.arrivals().at(phase, t));
            }
        }
        total
    }
}

/// Like [`StopsCost`] but each phase's stopped vehicles are scaled by a
/// non-negative weight, e.g. to prioritize transit approaches.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStopsCost {
    weights: Vec<f64>,
}

impl WeightedStopsCost {
    /// One finite, non-negative weight per phase.
    pub fn new(weights: Vec<f64>) -> Self {
        assert!(
            weights.iter().all(|w| w.is_finite() && *w >= 0.0),
            "weights must be finite and non-negative"
        );
        WeightedStopsCost { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl CostModel for WeightedStopsCost {
    type Value = f64;

    fn step_cost(&self, state: SignalState, t: usize, instance: &ProblemInstance) -> f64 {
        check_step(t, instance);
        assert_eq!(
            self.weights.len(),
            instance.phase_count(),
            "one weight per phase"
        );
        let served = state.serves();
        let mut total = 0.0;
        for phase in instance.phases() {
            if Some(phase) != served {
                total += self.weights[phase.index()] * f64::from(instance.arrivals().at(phase, t));
            }
        }
        total
    }
}

/// Parsed cost-model selector: `stops` or `weighted-stops:w0,w1,...`.
#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec {
    Stops,
    WeightedStops(Vec<f64>),
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CostSpecError {
    #[error("unknown cost model '{0}', expected 'stops' or 'weighted-stops:w0,w1,...'")]
    UnknownModel(String),
    #[error("weighted-stops needs a comma-separated weight list")]
    MissingWeights,
    #[error("weight '{0}' is not a finite non-negative number")]
    BadWeight(String),
    #[error("cost model has {got} weights, instance has {expected} phases")]
    WeightCountMismatch { got: usize, expected: usize },
}

impl CostSpec {
    /// Checks phase-count compatibility with an instance shape.
    pub fn validate_for(&self, phase_count: usize) -> Result<(), CostSpecError> {
        match self {
            CostSpec::Stops => Ok(()),
            CostSpec::WeightedStops(weights) if weights.len() == phase_count => Ok(()),
            CostSpec::WeightedStops(weights) => Err(CostSpecError::WeightCountMismatch {
                got: weights.len(),
                expected: phase_count,
            }),
        }
    }
}

impl FromStr for CostSpec {
    type Err = CostSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "stops" {
            return Ok(CostSpec::Stops);
        }
        if let Some(rest) = s.strip_prefix("weighted-stops:") {
            if rest.is_empty() {
                return Err(CostSpecError::MissingWeights);
            }
            let mut weights = Vec::new();
            for part in rest.split(',') {
                let w: f64 = part
                    .parse()
                    .map_err(|_| CostSpecError::BadWeight(part.to_string()))?;
                if !w.is_finite() || w < 0.0 {
                    return Err(CostSpecError::BadWeight(part.to_string()));
                }
                weights.push(w);
            }
            return Ok(CostSpec::WeightedStops(weights));
        }
        Err(CostSpecError::UnknownModel(s.to_string()))
    }
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::Stops => f.write_str("stops"),
            CostSpec::WeightedStops(weights) => {
                f.write_str("weighted-stops:")?;
                for (i, w) in weights.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
        }
    }
}

/// Queue-simulation summary for a finished plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanMetrics {
    /// Vehicles that did not discharge in the step they arrived.
    pub total_stops: u64,
    /// Sum over steps of end-of-step queue lengths (vehicle-steps).
    pub total_delay: u64,
    /// Per phase, the largest end-of-step queue.
    pub max_queue: Vec<u64>,
    /// Per phase, the queue remaining after the last step.
    pub final_queues: Vec<u64>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvaluateError {
    #[error("saturation flow must be positive")]
    ZeroSaturationFlow,
    #[error("plan is invalid: {}", format_violations(.0))]
    InvalidPlan(Vec<PlanViolation>),
}

fn format_violations(violations: &[PlanViolation]) -> String {
    violations
        .iter()
        .map(PlanViolation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Simulates FIFO queues under a plan. Each step, arrivals join their
/// phase queue, then the green phase discharges up to `saturation_flow`
/// vehicles (same-step arrivals may discharge behind the existing queue).
/// Delay accumulates queue sizes after discharge.
pub fn evaluate_plan(
    plan: &TimingPlan,
    instance: &ProblemInstance,
    saturation_flow: u32,
) -> Result<PlanMetrics, EvaluateError> {
    if saturation_flow == 0 {
        return Err(EvaluateError::ZeroSaturationFlow);
    }
    let report = crate::model::validate_plan(plan, instance);
    if !report.is_valid() {
        return Err(EvaluateError::InvalidPlan(report.violations().to_vec()));
    }

    let phase_count = instance.phase_count();
    let timeline = plan.served_timeline(instance.horizon());
    let mut queues = vec![0u64; phase_count];
    let mut max_queue = vec![0u64; phase_count];
    let mut total_stops = 0u64;
    let mut total_delay = 0u64;

    for (slot, served) in timeline.iter().enumerate() {
        let t = slot + 1;
        for phase in instance.phases() {
            let queue = &mut queues[phase.index()];
            let before = *queue;
            let arrived = u64::from(instance.arrivals().at(phase, t));
            *queue += arrived;
            let mut served_new = 0;
            if *served == Some(phase) {
                let discharged = (*queue).min(u64::from(saturation_flow));
                let from_old = discharged.min(before);
                served_new = discharged - from_old;
                *queue -= discharged;
            }
            total_stops += arrived - served_new;
            total_delay += *queue;
            max_queue[phase.index()] = max_queue[phase.index()].max(*queue);
        }
    }

    Ok(PlanMetrics {
        total_stops,
        total_delay,
        max_queue,
        final_queues: queues,
    })
}
