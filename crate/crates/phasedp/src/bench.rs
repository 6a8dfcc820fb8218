//! Benchmark harness for the complexity-scaling experiment.
//!
//! A sweep times one algorithm over a range of horizons on workloads
//! regenerated from a fixed seed, so reruns time identical inputs. Wall
//! times are the minimum over repetitions after a discarded warmup run;
//! operation counts come from the algorithms themselves and are exactly
//! reproducible. Scaling is judged by a least-squares line through the
//! log-log points, ignoring runs too fast to time reliably.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::baselines::{
    brute_force_with_cap, cop_default_stage_budget, cop_solve, BaselineError,
    DEFAULT_BRUTE_FORCE_HORIZON_CAP,
};
use crate::costs::StopsCost;
use crate::model::ProblemInstance;
use crate::solver::{solve, SolveError};
use crate::workload::{generate_arrivals, RateProfile};

/// Runs faster than this are dominated by timer noise and are excluded
/// from log-log fits by default.
pub const DEFAULT_FIT_FLOOR_S: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Linear,
    Cop,
    Brute,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Linear => "linear",
            Algorithm::Cop => "cop",
            Algorithm::Brute => "brute",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub horizon: usize,
    pub seed: u64,
    pub reps: usize,
    pub wall_time_s: f64,
    pub op_count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub algorithm: Algorithm,
    pub horizons: Vec<usize>,
    pub phase_count: usize,
    pub clearance: usize,
    pub min_green: usize,
    pub profile: RateProfile,
    pub seed: u64,
    pub reps: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("log-log fit needs at least {needed} points above the floor, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no horizon was benchmarked by both algorithms")]
    NoCommonHorizon,
}

fn run_once(
    algorithm: Algorithm,
    instance: &ProblemInstance,
) -> Result<(f64, u64), BenchError> {
    let started = Instant::now();
    let ops = match algorithm {
        Algorithm::Linear => solve(instance, &StopsCost)
            .map_err(|e: SolveError| BenchError::InvalidConfig(e.to_string()))?
            .relaxation_count,
        Algorithm::Cop => {
            cop_solve(instance, &StopsCost, cop_default_stage_budget(instance))
                .map_err(|e: BaselineError| BenchError::InvalidConfig(e.to_string()))?
                .result
                .relaxation_count
        }
        Algorithm::Brute => {
            brute_force_with_cap(instance, &StopsCost, DEFAULT_BRUTE_FORCE_HORIZON_CAP)
                .map_err(|e: BaselineError| BenchError::InvalidConfig(e.to_string()))?
                .relaxation_count
        }
    };
    Ok((started.elapsed().as_secs_f64(), ops))
}

/// Times `config.algorithm` at every horizon in the sweep. Horizons the
/// algorithm cannot handle (shorter than the minimum green, or past the
/// exhaustive-search cap) are skipped rather than failing the whole
/// sweep. `reps` must be at least 1; one extra warmup run per horizon is
/// discarded.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if config.reps == 0 {
        return Err(BenchError::InvalidConfig("reps must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(config.horizons.len());
    for &horizon in &config.horizons {
        if horizon < config.min_green {
            continue;
        }
        if config.algorithm == Algorithm::Brute && horizon > DEFAULT_BRUTE_FORCE_HORIZON_CAP {
            continue;
        }
        let arrivals =
            generate_arrivals(config.phase_count, horizon, config.seed, &config.profile);
        let instance = ProblemInstance::new(
            horizon,
            config.phase_count,
            config.clearance,
            config.min_green,
            arrivals,
        )
        .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        run_once(config.algorithm, &instance)?;
        let mut best_wall = f64::INFINITY;
        let mut op_count = 0u64;
        for rep in 0..config.reps {
            let (wall, ops) = run_once(config.algorithm, &instance)?;
            if rep == 0 {
                op_count = ops;
            } else {
                assert_eq!(ops, op_count, "operation counts must not vary across reps");
            }
            best_wall = best_wall.min(wall);
        }
        records.push(BenchRecord {
            algorithm: config.algorithm,
            horizon,
            seed: config.seed,
            reps: config.reps,
            wall_time_s: best_wall,
            op_count,
        });
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "algorithm,T,seed,reps,wall_time_s,op_count";

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{:.9},{}\n",
            r.algorithm, r.horizon, r.seed, r.reps, r.wall_time_s, r.op_count
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoglogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Least-squares line through `(ln T, ln wall_time_s)` over the records
/// whose wall time is at least `floor_s`. The caller filters to a single
/// algorithm first. Needs four usable points for a meaningful slope.
pub fn fit_loglog(records: &[BenchRecord], floor_s: f64) -> Result<LoglogFit, BenchError> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.wall_time_s >= floor_s)
        .map(|r| ((r.horizon as f64).ln(), r.wall_time_s.ln()))
        .collect();
    if points.len() < 4 {
        return Err(BenchError::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LoglogFit {
        slope,
        intercept,
        r_squared,
        points_used: points.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRow {
    pub horizon: usize,
    pub linear_s: f64,
    pub cop_s: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupReport {
    pub rows: Vec<SpeedupRow>,
}

impl SpeedupReport {
    pub fn at_largest_horizon(&self) -> &SpeedupRow {
        self.rows.last().expect("report is never empty")
    }
}

/// Pairs linear and stage-based wall times at every horizon both cover,
/// sorted by horizon.
pub fn speedup_report(records: &[BenchRecord]) -> Result<SpeedupReport, BenchError> {
    let mut rows = Vec::new();
    for linear in records.iter().filter(|r| r.algorithm == Algorithm::Linear) {
        if let Some(cop) = records
            .iter()
            .find(|r| r.algorithm == Algorithm::Cop && r.horizon == linear.horizon)
        {
            rows.push(SpeedupRow {
                horizon: linear.horizon,
                linear_s: linear.wall_time_s,
                cop_s: cop.wall_time_s,
                speedup: cop.wall_time_s / linear.wall_time_s,
            });
        }
    }
    rows.sort_by_key(|r| r.horizon);
    if rows.is_empty() {
        return Err(BenchError::NoCommonHorizon);
    }
    Ok(SpeedupReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_space::StateGraph;

    fn synthetic(algorithm: Algorithm, horizon: usize, wall: f64) -> BenchRecord {
        BenchRecord {
            algorithm,
            horizon,
            seed: 0,
            reps: 1,
            wall_time_s: wall,
            op_count: 0,
        }
    }

    #[test]
    fn algorithms_print_their_csv_names() {
        assert_eq!(Algorithm::Linear.to_string(), "linear");
        assert_eq!(Algorithm::Cop.to_string(), "cop");
        assert_eq!(Algorithm::Brute.to_string(), "brute");
    }

    #[test]
    fn csv_starts_with_the_exact_header() {
        let records = vec![synthetic(Algorithm::Linear, 8, 0.25)];
        let csv = records_to_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("algorithm,T,seed,reps,wall_time_s,op_count"));
        assert_eq!(lines.next(), Some("linear,8,0,1,0.250000000,0"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn fit_recovers_synthetic_power_laws() {
        let linear: Vec<BenchRecord> = (0..6)
            .map(|i| {
                let horizon = 64usize << i;
                synthetic(Algorithm::Linear, horizon, 2e-3 * (horizon as f64 / 64.0))
            })
            .collect();
        let fit = fit_loglog(&linear, DEFAULT_FIT_FLOOR_S).expect("enough points");
        assert!((fit.slope - 1.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!(fit.r_squared > 0.999999);
        assert_eq!(fit.points_used, 6);

        let cubic: Vec<BenchRecord> = (0..4)
            .map(|i| {
                let horizon = 64usize << i;
                synthetic(
                    Algorithm::Cop,
                    horizon,
                    2e-3 * (horizon as f64 / 64.0).powi(3),
                )
            })
            .collect();
        let fit = fit_loglog(&cubic, DEFAULT_FIT_FLOOR_S).expect("enough points");
        assert!((fit.slope - 3.0).abs() < 1e-9, "slope {}", fit.slope);
    }

    #[test]
    fn fit_excludes_points_below_the_floor() {
        let mut records: Vec<BenchRecord> = (0..6)
            .map(|i| {
                let horizon = 64usize << i;
                synthetic(Algorithm::Linear, horizon, 2e-3 * (horizon as f64 / 64.0))
            })
            .collect();
        records.push(synthetic(Algorithm::Linear, 32, 1e-5));
        let fit = fit_loglog(&records, DEFAULT_FIT_FLOOR_S).expect("enough points");
        assert_eq!(fit.points_used, 6);
        assert!((fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_demands_four_usable_points() {
        let records: Vec<BenchRecord> = (0..3)
            .map(|i| synthetic(Algorithm::Linear, 64 << i, 1.0))
            .collect();
        assert_eq!(
            fit_loglog(&records, DEFAULT_FIT_FLOOR_S).unwrap_err(),
            BenchError::TooFewPoints { needed: 4, got: 3 }
        );
    }

    #[test]
    fn sweep_records_follow_the_relaxation_law() {
        let config = SweepConfig {
            algorithm: Algorithm::Linear,
            horizons: (3..=12).map(|i| 1usize << i).collect(),
            phase_count: 3,
            clearance: 1,
            min_green: 1,
            profile: RateProfile::Uniform { mean: 2.0 },
            seed: 42,
            reps: 1,
        };
        let records = run_sweep(&config).expect("sweep runs");
        assert_eq!(records.len(), 10);
        let graph = StateGraph::build(3, 1, 1);
        for record in &records {
            assert_eq!(
                record.op_count,
                graph.edge_count() as u64 * (record.horizon as u64 - 1)
            );
            assert!(record.wall_time_s > 0.0);
        }
    }

    #[test]
    fn sweep_skips_horizons_past_the_exhaustive_cap() {
        let config = SweepConfig {
            algorithm: Algorithm::Brute,
            horizons: vec![8, 16],
            phase_count: 2,
            clearance: 1,
            min_green: 1,
            profile: RateProfile::Uniform { mean: 1.0 },
            seed: 1,
            reps: 1,
        };
        let records = run_sweep(&config).expect("sweep runs");
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].horizon, 8);
    }

    #[test]
    fn sweep_skips_horizons_shorter_than_the_minimum_green() {
        let config = SweepConfig {
            algorithm: Algorithm::Linear,
            horizons: vec![8, 16, 32],
            phase_count: 2,
            clearance: 2,
            min_green: 10,
            profile: RateProfile::Uniform { mean: 1.0 },
            seed: 1,
            reps: 1,
        };
        let records = run_sweep(&config).expect("sweep runs");
        let horizons: Vec<usize> = records.iter().map(|r| r.horizon).collect();
        assert_eq!(horizons, vec![16, 32]);
    }

    #[test]
    fn sweep_operation_counts_are_reproducible() {
        let config = SweepConfig {
            algorithm: Algorithm::Cop,
            horizons: vec![16, 32],
            phase_count: 2,
            clearance: 1,
            min_green: 2,
            profile: RateProfile::Uniform { mean: 1.5 },
            seed: 7,
            reps: 2,
        };
        let first = run_sweep(&config).expect("sweep runs");
        let second = run_sweep(&config).expect("sweep runs");
        let ops = |records: &[BenchRecord]| -> Vec<u64> {
            records.iter().map(|r| r.op_count).collect()
        };
        assert_eq!(ops(&first), ops(&second));
    }

    #[test]
    fn speedups_pair_algorithms_by_horizon() {
        let records = vec![
            synthetic(Algorithm::Linear, 64, 0.002),
            synthetic(Algorithm::Linear, 128, 0.004),
            synthetic(Algorithm::Linear, 256, 0.008),
            synthetic(Algorithm::Cop, 64, 0.2),
            synthetic(Algorithm::Cop, 128, 1.6),
        ];
        let report = speedup_report(&records).expect("common horizons exist");
        assert_eq!(report.rows.len(), 2);
        let last = report.at_largest_horizon();
        assert_eq!(last.horizon, 128);
        assert!((last.speedup - 400.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_sweeps_cannot_be_compared() {
        let records = vec![
            synthetic(Algorithm::Linear, 64, 0.002),
            synthetic(Algorithm::Cop, 128, 1.6),
        ];
        assert_eq!(
            speedup_report(&records).unwrap_err(),
            BenchError::NoCommonHorizon
        );
    }
}
