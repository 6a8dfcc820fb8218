//! Seeded synthetic arrival tables.
//!
//! Benchmarks and the command line generate inputs from a compact textual
//! profile plus a seed, so any table can be reproduced from its
//! description alone.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::model::ArrivalTable;

/// How arrival counts are distributed over phases and steps.
#[derive(Clone, Debug, PartialEq)]
pub enum RateProfile {
    /// Every phase sees independent Poisson(`mean`) arrivals each step.
    Uniform { mean: f64 },
    /// Demand sweeps across phases: in each window of `period` steps one
    /// phase sees Poisson(`mean`) arrivals and the others see none.
    AlternatingPulse { period: usize, mean: f64 },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RateProfileError {
    #[error("unknown rate profile {0:?}: expected uniform:<mean> or alternating-pulse:<period>,<mean>")]
    UnknownKind(String),
    #[error("invalid mean {0:?}: expected a finite non-negative number")]
    InvalidMean(String),
    #[error("invalid period {0:?}: expected a positive integer")]
    InvalidPeriod(String),
}

fn parse_mean(text: &str) -> Result<f64, RateProfileError> {
    let mean: f64 = text
        .parse()
        .map_err(|_| RateProfileError::InvalidMean(text.to_string()))?;
    if !mean.is_finite() || mean < 0.0 {
        return Err(RateProfileError::InvalidMean(text.to_string()));
    }
    Ok(mean)
}

impl FromStr for RateProfile {
    type Err = RateProfileError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| RateProfileError::UnknownKind(text.to_string()))?;
        match kind {
            "uniform" => Ok(RateProfile::Uniform {
                mean: parse_mean(args)?,
            }),
            "alternating-pulse" => {
                let (period, mean) = args
                    .split_once(',')
                    .ok_or_else(|| RateProfileError::UnknownKind(text.to_string()))?;
                let period: usize = period
                    .parse()
                    .map_err(|_| RateProfileError::InvalidPeriod(period.to_string()))?;
                if period == 0 {
                    return Err(RateProfileError::InvalidPeriod("0".to_string()));
                }
                Ok(RateProfile::AlternatingPulse {
                    period,
                    mean: parse_mean(mean)?,
                })
            }
            _ => Err(RateProfileError::UnknownKind(text.to_string())),
        }
    }
}

impl fmt::Display for RateProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateProfile::Uniform { mean } => write!(f, "uniform:{mean}"),
            RateProfile::AlternatingPulse { period, mean } => {
                write!(f, "alternating-pulse:{period},{mean}")
            }
        }
    }
}

fn poisson_count(rng: &mut ChaCha8Rng, distribution: &Poisson<f64>) -> u32 {
    distribution.sample(rng).min(u32::MAX as f64) as u32
}

/// Deterministic arrival table: the same arguments always produce the
/// same counts. Cells are filled row-major (phase by phase, step by
/// step); cells with zero mean draw nothing from the stream.
pub fn generate_arrivals(
    phase_count: usize,
    horizon: usize,
    seed: u64,
    profile: &RateProfile,
) -> ArrivalTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0u32; horizon]; phase_count];
    match profile {
        RateProfile::Uniform { mean } => {
            if *mean > 0.0 {
                let distribution = Poisson::new(*mean).expect("mean is positive and finite");
                for row in &mut rows {
                    for cell in row.iter_mut() {
                        *cell = poisson_count(&mut rng, &distribution);
                    }
                }
            }
        }
        RateProfile::AlternatingPulse { period, mean } => {
            if *mean > 0.0 {
                let distribution = Poisson::new(*mean).expect("mean is positive and finite");
                for (phase, row) in rows.iter_mut().enumerate() {
                    for (offset, cell) in row.iter_mut().enumerate() {
                        if (offset / period) % phase_count == phase {
                            *cell = poisson_count(&mut rng, &distribution);
                        }
                    }
                }
            }
        }
    }
    ArrivalTable::new(rows)
}
