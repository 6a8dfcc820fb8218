//! Controller states and the predecessor relation the solver recurses
//! over.
//!
//! A controller is always in one of `min_green * phase_count + clearance`
//! states: a phase that has been green for fewer than `min_green` steps
//! (unstable, must be held), a phase green at least `min_green` steps
//! (stable, may be held or ended), an all-red clearance in progress
//! (unstable), or a completed clearance (stable, must hand over to a
//! phase). Edges encode which state may directly precede which at the
//! next time step:
//!
//! - a clearance run can only start from a stable phase and must run for
//!   exactly `clearance` steps, so it cannot open a plan or extend itself;
//! - a phase can only be entered from a completed clearance, except that
//!   a stable phase may also extend itself (the only self-loops);
//! - plans start by entering a phase at step 1 and may end either on a
//!   stable phase or on a completed clearance.

use std::fmt;

use crate::model::{PhaseId, ProblemInstance};

/// One controller state. `elapsed` counts the steps already spent in the
/// current green (`1..min_green`) or clearance (`1..clearance`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignalState {
    /// Green for at least `min_green` steps; may extend or end.
    StablePhase(PhaseId),
    /// Green for `elapsed < min_green` steps; must be held.
    UnstablePhase { phase: PhaseId, elapsed: usize },
    /// All-red for `elapsed < clearance` steps; must continue.
    UnstableClearance { elapsed: usize },
    /// All-red for exactly `clearance` steps; must hand over to a phase.
    StableClearance,
}

impl SignalState {
    /// The phase receiving green in this state, if any.
    pub fn serves(&self) -> Option<PhaseId> {
        match *self {
            SignalState::StablePhase(p) => Some(p),
            SignalState::UnstablePhase { phase, .. } => Some(phase),
            SignalState::UnstableClearance { .. } | SignalState::StableClearance => None,
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(
            self,
            SignalState::StablePhase(_) | SignalState::StableClearance
        )
    }

    /// Compact display label: `A` (stable phase), `2A` (second green step
    /// of phase A), `10` (first clearance step), `0` (completed
    /// clearance).
    pub fn label(&self) -> String {
        match *self {
            SignalState::StablePhase(p) => p.label(),
            SignalState::UnstablePhase { phase, elapsed } => format!("{elapsed}{}", phase.label()),
            SignalState::UnstableClearance { elapsed } => format!("{elapsed}0"),
            SignalState::StableClearance => "0".to_string(),
        }
    }
}

impl fmt::Display for SignalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The full state set for one intersection shape, with predecessor lists,
/// entry states (legal at step 1) and exit states (legal at the horizon).
///
/// States are indexed canonically: for each phase `p` a block
/// `[StablePhase(p), UnstablePhase(p, 1..min_green)]`, then the clearance
/// chain `UnstableClearance(1..clearance)`, then `StableClearance` last.
/// Predecessor lists are sorted ascending, so scanning them in order and
/// keeping strict improvements prefers extending the current phase on
/// cost ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateGraph {
    phase_count: usize,
    min_green: usize,
    clearance: usize,
    states: Vec<SignalState>,
    preds: Vec<Vec<usize>>,
    initial_states: Vec<usize>,
    final_states: Vec<usize>,
}

impl StateGraph {
    /// Builds the graph for a shape. Callers must pass validated
    /// parameters: `phase_count >= 2` and `1 <= clearance <= min_green`.
    pub fn build(phase_count: usize, min_green: usize, clearance: usize) -> Self {
        assert!(phase_count >= 2, "need at least two phases");
        assert!(min_green >= 1, "min green must be positive");
        assert!(
            (1..=min_green).contains(&clearance),
            "clearance must lie in 1..=min_green"
        );

        let mut states = Vec::with_capacity(min_green * phase_count + clearance);
        for p in 0..phase_count {
            states.push(SignalState::StablePhase(PhaseId::new(p)));
            for elapsed in 1..min_green {
                states.push(SignalState::UnstablePhase {
                    phase: PhaseId::new(p),
                    elapsed,
                });
            }
        }
        for elapsed in 1..clearance {
            states.push(SignalState::UnstableClearance { elapsed });
        }
        states.push(SignalState::StableClearance);

        let stable_phase = |p: usize| p * min_green;
        let unstable_phase = |p: usize, k: usize| p * min_green + k;
        let unstable_clearance = |k: usize| phase_count * min_green + (k - 1);
        let stable_clearance = phase_count * min_green + clearance - 1;

        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); states.len()];

        // Clearance chain: entered only from stable phases, advanced one
        // step at a time, never extended once complete.
        let first_clearance = if clearance >= 2 {
            unstable_clearance(1)
        } else {
            stable_clearance
        };
        preds[first_clearance] = (0..phase_count).map(stable_phase).collect();
        for k in 2..clearance {
            preds[unstable_clearance(k)] = vec![unstable_clearance(k - 1)];
        }
        if clearance >= 2 {
            preds[stable_clearance] = vec![unstable_clearance(clearance - 1)];
        }

        // Phase blocks: entered from a completed clearance, held through
        // the unstable chain, self-extending once stable.
        for p in 0..phase_count {
            if min_green >= 2 {
                preds[unstable_phase(p, 1)] = vec![stable_clearance];
                for k in 2..min_green {
                    preds[unstable_phase(p, k)] = vec![unstable_phase(p, k - 1)];
                }
                preds[stable_phase(p)] = vec![stable_phase(p), unstable_phase(p, min_green - 1)];
            } else {
                preds[stable_phase(p)] = vec![stable_phase(p), stable_clearance];
            }
        }
        for list in &mut preds {
            debug_assert!(list.windows(2).all(|w| w[0] < w[1]), "sorted and unique");
        }

        let initial_states: Vec<usize> = if min_green >= 2 {
            (0..phase_count).map(|p| unstable_phase(p, 1)).collect()
        } else {
            (0..phase_count).map(stable_phase).collect()
        };
        let mut final_states: Vec<usize> = (0..phase_count).map(stable_phase).collect();
        final_states.push(stable_clearance);

        StateGraph {
            phase_count,
            min_green,
            clearance,
            states,
            preds,
            initial_states,
            final_states,
        }
    }

    pub fn for_instance(instance: &ProblemInstance) -> Self {
        StateGraph::build(
            instance.phase_count(),
            instance.min_green(),
            instance.clearance(),
        )
    }

    pub fn phase_count(&self) -> usize {
        self.phase_count
    }

    pub fn min_green(&self) -> usize {
        self.min_green
    }

    pub fn clearance(&self) -> usize {
        self.clearance
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Total number of predecessor edges, counting self-loops once.
    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> &[SignalState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> SignalState {
        self.states[index]
    }

    /// States that may occupy step `t - 1` when `index` occupies step
    /// `t`, sorted ascending.
    pub fn preds(&self, index: usize) -> &[usize] {
        &self.preds[index]
    }

    /// States a plan may occupy at step 1, in phase order.
    pub fn initial_states(&self) -> &[usize] {
        &self.initial_states
    }

    /// States a plan may occupy at the horizon: stable phases in phase
    /// order, then completed clearance. Tie scans follow this order.
    pub fn final_states(&self) -> &[usize] {
        &self.final_states
    }

    pub fn label(&self, index: usize) -> String {
        self.states[index].label()
    }

    /// Canonical index of a state, if it exists in this shape.
    pub fn state_index(&self, state: SignalState) -> Option<usize> {
        let index = match state {
            SignalState::StablePhase(p) if p.index() < self.phase_count => {
                p.index() * self.min_green
            }
            SignalState::UnstablePhase { phase, elapsed }
                if phase.index() < self.phase_count && (1..self.min_green).contains(&elapsed) =>
            {
                phase.index() * self.min_green + elapsed
            }
            SignalState::UnstableClearance { elapsed }
                if (1..self.clearance).contains(&elapsed) =>
            {
                self.phase_count * self.min_green + elapsed - 1
            }
            SignalState::StableClearance => self.phase_count * self.min_green + self.clearance - 1,
            _ => return None,
        };
        debug_assert_eq!(self.states[index], state);
        Some(index)
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s.label() == label)
    }

    /// Successor lists derived by reversing the predecessor relation;
    /// each list is sorted ascending.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); self.states.len()];
        for (state, preds) in self.preds.iter().enumerate() {
            for &p in preds {
                succs[p].push(state);
            }
        }
        for list in &mut succs {
            list.sort_unstable();
        }
        succs
    }

    /// Graphviz rendering with edges in successor direction. Entry states
    /// are filled, exit states double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph signal_states {\n    rankdir=LR;\n");
        for (index, state) in self.states.iter().enumerate() {
            let shape = if self.final_states.contains(&index) {
                "doublecircle"
            } else {
                "circle"
            };
            let fill = if self.initial_states.contains(&index) {
                ", style=filled, fillcolor=lightgray"
            } else {
                ""
            };
            out.push_str(&format!(
                "    \"{}\" [shape={shape}{fill}];\n",
                state.label()
            ));
        }
        for (state, preds) in self.preds.iter().enumerate() {
            for &p in preds {
                out.push_str(&format!(
                    "    \"{}\" -> \"{}\";\n",
                    self.states[p].label(),
                    self.states[state].label()
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}
