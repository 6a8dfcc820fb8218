//! Problem data for a single signalized intersection: phases, per-step
//! arrival counts over a fixed horizon, and timing plans with validation.
//!
//! Time is discrete and 1-indexed: steps run `1..=horizon`. A timing plan
//! is a sequence of green entries; consecutive entries are separated by an
//! implicit all-red clearance gap of exactly `clearance` steps, and a plan
//! may end with one trailing clearance gap of the same length.

use std::fmt;

use thiserror::Error;

/// Identifies one signal phase by zero-based index.
///
/// Phases are displayed as letters: `A`, `B`, ..., `Z`, `AA`, `AB`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseId(usize);

impl PhaseId {
    pub fn new(index: usize) -> Self {
        PhaseId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// Spreadsheet-style letter label for this phase.
    pub fn label(self) -> String {
        let mut n = self.0;
        let mut out = Vec::new();
        loop {
            out.push(b'A' + (n % 26) as u8);
            if n < 26 {
                break;
            }
            n = n / 26 - 1;
        }
        out.reverse();
        String::from_utf8(out).expect("labels are ASCII")
    }

    /// Inverse of [`PhaseId::label`]. Returns `None` for anything that is
    /// not a non-empty string of ASCII uppercase letters.
    pub fn from_label(label: &str) -> Option<Self> {
        if label.is_empty() || !label.bytes().all(|b| b.is_ascii_uppercase()) {
            return None;
        }
        let mut n: usize = 0;
        for b in label.bytes() {
            n = n.checked_mul(26)?.checked_add((b - b'A') as usize + 1)?;
        }
        Some(PhaseId(n - 1))
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Vehicle arrival counts per phase and time step.
///
/// Row `p` holds the counts for phase `p`; column `t-1` holds step `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrivalTable {
    counts: Vec<Vec<u32>>,
}

impl ArrivalTable {
    pub fn new(counts: Vec<Vec<u32>>) -> Self {
        ArrivalTable { counts }
    }

    pub fn zeros(phase_count: usize, horizon: usize) -> Self {
        ArrivalTable {
            counts: vec![vec![0; horizon]; phase_count],
        }
    }

    pub fn phase_count(&self) -> usize {
        self.counts.len()
    }

    pub fn horizon(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    /// Arrivals for `phase` at 1-indexed step `t`.
    pub fn at(&self, phase: PhaseId, t: usize) -> u32 {
        self.counts[phase.index()][t - 1]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.counts
    }
}

/// A validated problem instance.
///
/// Invariants established at construction: at least two phases, a positive
/// horizon of at least `min_green` steps, and `1 <= clearance <= min_green`.
/// The arrival table is rectangular with one row per phase and one column
/// per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    horizon: usize,
    phase_count: usize,
    clearance: usize,
    min_green: usize,
    arrivals: ArrivalTable,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("phase count must be at least 2, got {0}")]
    TooFewPhases(usize),
    #[error("clearance must be positive")]
    ZeroClearance,
    #[error("minimum green must be positive")]
    ZeroMinGreen,
    #[error("clearance {clearance} exceeds minimum green {min_green}")]
    ClearanceExceedsMinGreen { clearance: usize, min_green: usize },
    #[error("horizon {horizon} is shorter than minimum green {min_green}; no phase can complete")]
    HorizonShorterThanMinGreen { horizon: usize, min_green: usize },
    #[error("arrival table has {rows} rows, expected one per phase ({expected})")]
    ArrivalRowMismatch { rows: usize, expected: usize },
    #[error("arrival row {row} has {cols} columns, expected horizon {expected}")]
    ArrivalColumnMismatch {
        row: usize,
        cols: usize,
        expected: usize,
    },
}

impl ProblemInstance {
    pub fn new(
        horizon: usize,
        phase_count: usize,
        clearance: usize,
        min_green: usize,
        arrivals: ArrivalTable,
    ) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::ZeroHorizon);
        }
        if phase_count < 2 {
            return Err(ModelError::TooFewPhases(phase_count));
        }
        if clearance == 0 {
            return Err(ModelError::ZeroClearance);
        }
        if min_green == 0 {
            return Err(ModelError::ZeroMinGreen);
        }
        if clearance > min_green {
            return Err(ModelError::ClearanceExceedsMinGreen {
                clearance,
                min_green,
            });
        }
        if horizon < min_green {
            return Err(ModelError::HorizonShorterThanMinGreen { horizon, min_green });
        }
        if arrivals.phase_count() != phase_count {
            return Err(ModelError::ArrivalRowMismatch {
                rows: arrivals.phase_count(),
                expected: phase_count,
            });
        }
        for (row, counts) in arrivals.rows().iter().enumerate() {
            if counts.len() != horizon {
                return Err(ModelError::ArrivalColumnMismatch {
                    row,
                    cols: counts.len(),
                    expected: horizon,
                });
            }
        }
        Ok(ProblemInstance {
            horizon,
            phase_count,
            clearance,
            min_green,
            arrivals,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn phase_count(&self) -> usize {
        self.phase_count
    }

    pub fn clearance(&self) -> usize {
        self.clearance
    }

    pub fn min_green(&self) -> usize {
        self.min_green
    }

    pub fn arrivals(&self) -> &ArrivalTable {
        &self.arrivals
    }

    pub fn phases(&self) -> impl Iterator<Item = PhaseId> {
        (0..self.phase_count).map(PhaseId::new)
    }
}

/// One green interval of a timing plan. `start` is 1-indexed; the entry
/// occupies steps `start..start + duration`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    pub phase: PhaseId,
    pub start: usize,
    pub duration: usize,
}

impl PlanEntry {
    /// Last step covered by this entry.
    pub fn end(&self) -> usize {
        self.start + self.duration - 1
    }
}

/// A timing plan: ordered green entries plus the objective value they
/// achieve. Clearance gaps are implicit, exactly `clearance` steps between
/// consecutive entries, plus at most one trailing gap of the same length.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingPlan {
    pub entries: Vec<PlanEntry>,
    pub total_cost: f64,
}

impl TimingPlan {
    /// Which phase is green at each step, `None` during clearance. The
    /// result has one slot per step of `horizon`; entries beyond the
    /// horizon are ignored (validation catches them).
    pub fn served_timeline(&self, horizon: usize) -> Vec<Option<PhaseId>> {
        let mut timeline = vec![None; horizon];
        for entry in &self.entries {
            for t in entry.start..=entry.end() {
                if (1..=horizon).contains(&t) {
                    timeline[t - 1] = Some(entry.phase);
                }
            }
        }
        timeline
    }
}

/// A single violated plan invariant. Entry indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanViolation {
    Empty,
    FirstEntryNotAtStepOne { start: usize },
    MinGreenViolated {
        entry: usize,
        duration: usize,
        min_green: usize,
    },
    PhaseOutOfRange {
        entry: usize,
        phase: usize,
        phase_count: usize,
    },
    GapMismatch {
        entry: usize,
        expected_start: usize,
        actual_start: usize,
    },
    HorizonMismatch {
        plan_end: usize,
        horizon: usize,
        clearance: usize,
    },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::Empty => write!(f, "plan has no entries"),
            PlanViolation::FirstEntryNotAtStepOne { start } => {
                write!(f, "first entry starts at step {start}, expected step 1")
            }
            PlanViolation::MinGreenViolated {
                entry,
                duration,
                min_green,
            } => write!(
                f,
                "min green violated at entry {entry}: duration {duration} < {min_green}"
            ),
            PlanViolation::PhaseOutOfRange {
                entry,
                phase,
                phase_count,
            } => write!(
                f,
                "entry {entry} names phase index {phase}, instance has {phase_count} phases"
            ),
            PlanViolation::GapMismatch {
                entry,
                expected_start,
                actual_start,
            } => write!(
                f,
                "entry {entry} starts at step {actual_start}, expected {expected_start} \
                 (exactly one clearance gap after the previous entry)"
            ),
            PlanViolation::HorizonMismatch {
                plan_end,
                horizon,
                clearance,
            } => write!(
                f,
                "last entry ends at step {plan_end}; it must end at {horizon} or at {} \
                 (trailing clearance of {clearance})",
                horizon.saturating_sub(*clearance)
            ),
        }
    }
}

/// Outcome of [`validate_plan`]: empty means the plan is well formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<PlanViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[PlanViolation] {
        &self.violations
    }
}

/// Checks a plan against an instance without mutating either.
///
/// Verified invariants: at least one entry starting at step 1, every
/// duration at least `min_green`, every phase index in range, consecutive
/// entries separated by exactly one clearance gap, and full coverage of
/// the horizon (the last entry ends at `horizon`, or at
/// `horizon - clearance` with a trailing gap).
pub fn validate_plan(plan: &TimingPlan, instance: &ProblemInstance) -> ValidationReport {
    let mut violations = Vec::new();
    if plan.entries.is_empty() {
        return ValidationReport {
            violations: vec![PlanViolation::Empty],
        };
    }

    let first = &plan.entries[0];
    if first.start != 1 {
        violations.push(PlanViolation::FirstEntryNotAtStepOne { start: first.start });
    }

    for (i, entry) in plan.entries.iter().enumerate() {
        if entry.duration < instance.min_green() {
            violations.push(PlanViolation::MinGreenViolated {
                entry: i,
                duration: entry.duration,
                min_green: instance.min_green(),
            });
        }
        if entry.phase.index() >= instance.phase_count() {
            violations.push(PlanViolation::PhaseOutOfRange {
                entry: i,
                phase: entry.phase.index(),
                phase_count: instance.phase_count(),
            });
        }
        if i > 0 {
            let expected = plan.entries[i - 1].end() + instance.clearance() + 1;
            if entry.start != expected {
                violations.push(PlanViolation::GapMismatch {
                    entry: i,
                    expected_start: expected,
                    actual_start: entry.start,
                });
            }
        }
    }

    let plan_end = plan.entries.last().expect("non-empty").end();
    let horizon = instance.horizon();
    let with_trailing = horizon.checked_sub(instance.clearance());
    if plan_end != horizon && Some(plan_end) != with_trailing {
        violations.push(PlanViolation::HorizonMismatch {
            plan_end,
            horizon,
            clearance: instance.clearance(),
        });
    }

    ValidationReport { violations }
}
