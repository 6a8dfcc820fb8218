//! Exact timing-plan optimization in time linear in the horizon.
//!
//! One value row per time step is computed over the controller states;
//! each state folds the previous row over its constant-size predecessor
//! list, so total work is `edge_count * (horizon - 1)` relaxations. Only
//! two value rows are alive at any point; a predecessor index per (step,
//! state) supports reconstructing one optimal plan.
//!
//! Ties are broken deterministically: predecessor lists are scanned in
//! ascending state index (which prefers extending the current phase), and
//! the final state is the first minimum among stable phases in phase
//! order, then completed clearance.

use thiserror::Error;

use crate::costs::{CostModel, CostValue};
use crate::model::{PhaseId, PlanEntry, ProblemInstance, TimingPlan};
use crate::state_space::{SignalState, StateGraph};

const NO_PRED: u32 = u32::MAX;

/// Rolling value rows plus the predecessor matrix of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct DpTables<V> {
    /// Values at step `horizon - 1` (all infeasible when `horizon == 1`).
    value_prev: Vec<V>,
    /// Values at the final step.
    value_curr: Vec<V>,
    /// Chosen predecessor per (step, state), `NO_PRED` at step 1 and for
    /// unreachable states. Row-major: `(t - 1) * state_count + state`.
    pred: Vec<u32>,
    horizon: usize,
    state_count: usize,
    relaxation_count: u64,
}

impl<V: CostValue> DpTables<V> {
    /// Objective values at the final step, indexed by state.
    pub fn final_values(&self) -> &[V] {
        &self.value_curr
    }

    /// Objective values one step before the final one.
    pub fn penultimate_values(&self) -> &[V] {
        &self.value_prev
    }

    /// The predecessor chosen for `state` at step `t >= 2`, if the state
    /// is reachable there.
    pub fn predecessor(&self, t: usize, state: usize) -> Option<usize> {
        assert!((2..=self.horizon).contains(&t), "no predecessors at step 1");
        let p = self.pred[(t - 1) * self.state_count + state];
        (p != NO_PRED).then_some(p as usize)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    /// Number of (state, step, predecessor) candidates examined.
    pub fn relaxation_count(&self) -> u64 {
        self.relaxation_count
    }
}

/// An optimal plan together with the summed objective, the per-step state
/// labels behind it, and the work counter of the algorithm that found it.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<V> {
    pub plan: TimingPlan,
    pub optimal_cost: V,
    /// State index occupied at each step, length `horizon`.
    pub state_sequence: Vec<usize>,
    /// Algorithm-specific operation count: relaxations for the linear
    /// solver, node expansions for exhaustive search, transition
    /// evaluations for the stage-based baseline.
    pub relaxation_count: u64,
}

impl<V> SolveResult<V> {
    pub fn state_labels(&self, graph: &StateGraph) -> Vec<String> {
        self.state_sequence
            .iter()
            .map(|&s| graph.label(s))
            .collect()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("no feasible plan: no admissible final state is reachable at the horizon")]
    NoFeasiblePlan,
    #[error("controller state does not exist for this instance shape")]
    UnknownControllerState,
}

/// Runs the forward pass from the standard entry states (a phase begins
/// at step 1).
pub fn forward_recursion<M: CostModel>(
    instance: &ProblemInstance,
    graph: &StateGraph,
    model: &M,
) -> DpTables<M::Value> {
    forward_recursion_from(instance, graph, model, graph.initial_states())
}

/// Forward pass with an explicit set of states admissible at step 1, used
/// for warm starts from a known controller state.
pub fn forward_recursion_from<M: CostModel>(
    instance: &ProblemInstance,
    graph: &StateGraph,
    model: &M,
    initial: &[usize],
) -> DpTables<M::Value> {
    type V<M> = <M as CostModel>::Value;
    let horizon = instance.horizon();
    let state_count = graph.state_count();
    let mut prev = vec![V::<M>::INFEASIBLE; state_count];
    let mut curr = vec![V::<M>::INFEASIBLE; state_count];
    let mut pred = vec![NO_PRED; horizon * state_count];
    let mut relaxation_count = 0u64;

    for &s in initial {
        curr[s] = model.step_cost(graph.state(s), 1, instance);
    }

    for t in 2..=horizon {
        std::mem::swap(&mut prev, &mut curr);
        let row = &mut pred[(t - 1) * state_count..t * state_count];
        for s in 0..state_count {
            let step = model.step_cost(graph.state(s), t, instance);
            let mut best = V::<M>::INFEASIBLE;
            let mut best_pred = NO_PRED;
            for &p in graph.preds(s) {
                relaxation_count += 1;
                let base = prev[p];
                if base.is_infeasible() {
                    continue;
                }
                let candidate = base.saturating_add(step);
                if candidate.is_infeasible() {
                    continue;
                }
                if best.is_infeasible() || candidate < best {
                    best = candidate;
                    best_pred = p as u32;
                }
            }
            curr[s] = best;
            row[s] = best_pred;
        }
    }

    DpTables {
        value_prev: prev,
        value_curr: curr,
        pred,
        horizon,
        state_count,
        relaxation_count,
    }
}

/// Picks the best admissible final state and walks the predecessor matrix
/// back to step 1, compressing the state run into plan entries.
pub fn trace_back<V: CostValue>(
    tables: &DpTables<V>,
    graph: &StateGraph,
) -> Result<SolveResult<V>, SolveError> {
    let horizon = tables.horizon;
    let mut best: Option<(usize, V)> = None;
    for &s in graph.final_states() {
        let value = tables.value_curr[s];
        if value.is_infeasible() {
            continue;
        }
        if best.map_or(true, |(_, current)| value < current) {
            best = Some((s, value));
        }
    }
    let (last, optimal_cost) = best.ok_or(SolveError::NoFeasiblePlan)?;

    let mut state_sequence = vec![usize::MAX; horizon];
    state_sequence[horizon - 1] = last;
    for t in (2..=horizon).rev() {
        let here = state_sequence[t - 1];
        let pred = tables
            .predecessor(t, here)
            .expect("reachable states carry a predecessor");
        state_sequence[t - 2] = pred;
    }

    let plan = compress_state_sequence(&state_sequence, graph, optimal_cost.to_f64());
    Ok(SolveResult {
        plan,
        optimal_cost,
        state_sequence,
        relaxation_count: tables.relaxation_count,
    })
}

/// Computes one provably optimal timing plan for the instance.
pub fn solve<M: CostModel>(
    instance: &ProblemInstance,
    model: &M,
) -> Result<SolveResult<M::Value>, SolveError> {
    let graph = StateGraph::for_instance(instance);
    let tables = forward_recursion(instance, &graph, model);
    trace_back(&tables, &graph)
}

/// Warm start: like [`solve`], but step 1 is restricted to the successors
/// of `controller_state`, for rolling re-solves from a controller already
/// mid-phase or mid-clearance. The result describes the continuation; a
/// continuation beginning inside a clearance run does not satisfy the
/// cold-start plan grammar checked by `validate_plan`.
pub fn solve_from<M: CostModel>(
    instance: &ProblemInstance,
    model: &M,
    controller_state: SignalState,
) -> Result<SolveResult<M::Value>, SolveError> {
    let graph = StateGraph::for_instance(instance);
    let index = graph
        .state_index(controller_state)
        .ok_or(SolveError::UnknownControllerState)?;
    let initial = graph.successors()[index].clone();
    let tables = forward_recursion_from(instance, &graph, model, &initial);
    trace_back(&tables, &graph)
}

/// Folds a per-step state sequence into plan entries: each maximal green
/// run becomes one entry, clearance runs become the implicit gaps.
pub fn compress_state_sequence(
    sequence: &[usize],
    graph: &StateGraph,
    total_cost: f64,
) -> TimingPlan {
    let mut entries: Vec<PlanEntry> = Vec::new();
    let mut current: Option<(PhaseId, usize)> = None;
    for (slot, &s) in sequence.iter().enumerate() {
        let t = slot + 1;
        match (graph.state(s).serves(), current) {
            (Some(phase), Some((open, _))) if open == phase => {}
            (Some(phase), open_run) => {
                if let Some((open, start)) = open_run {
                    entries.push(PlanEntry {
                        phase: open,
                        start,
                        duration: t - start,
                    });
                }
                current = Some((phase, t));
            }
            (None, Some((open, start))) => {
                entries.push(PlanEntry {
                    phase: open,
                    start,
                    duration: t - start,
                });
                current = None;
            }
            (None, None) => {}
        }
    }
    if let Some((open, start)) = current {
        entries.push(PlanEntry {
            phase: open,
            start,
            duration: sequence.len() + 1 - start,
        });
    }
    TimingPlan {
        entries,
        total_cost,
    }
}

/// Inverse of [`compress_state_sequence`] for well-formed plans: expands
/// entries and gaps back into the per-step states the controller passes
/// through (entry chain, stable hold, clearance chain).
pub fn expand_plan_to_states(
    plan: &TimingPlan,
    graph: &StateGraph,
    horizon: usize,
) -> Vec<usize> {
    let min_green = graph.min_green();
    let clearance = graph.clearance();
    let mut sequence = Vec::with_capacity(horizon);
    let index_of = |state: SignalState| {
        graph
            .state_index(state)
            .expect("plan states exist in the shape")
    };
    for entry in &plan.entries {
        assert_eq!(entry.start, sequence.len() + 1, "entries must abut gaps");
        for held in 0..entry.duration {
            let state = if held + 1 < min_green {
                SignalState::UnstablePhase {
                    phase: entry.phase,
                    elapsed: held + 1,
                }
            } else {
                SignalState::StablePhase(entry.phase)
            };
            sequence.push(index_of(state));
        }
        if sequence.len() < horizon {
            for elapsed in 1..clearance {
                sequence.push(index_of(SignalState::UnstableClearance { elapsed }));
            }
            sequence.push(index_of(SignalState::StableClearance));
        }
    }
    assert_eq!(sequence.len(), horizon, "plan must cover the horizon");
    sequence
}
