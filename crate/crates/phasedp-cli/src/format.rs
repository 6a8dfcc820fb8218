//! Line-based text formats for problem instances and timing plans.
//!
//! Instance files:
//!
//! ```text
//! # comment
//! horizon 10
//! phases 2
//! clearance 1
//! min_green 3
//! cost stops
//! arrivals
//! 3 3 3 0 0 0 0 0 0 0
//! 0 0 0 0 3 3 3 3 0 0
//! end
//! ```
//!
//! Header keys may come in any order before the `arrivals` block; `cost`
//! is optional and defaults to `stops` (the other form is
//! `weighted-stops:<w0>,<w1>,...`). The block holds one row per phase
//! with one count per step. Blank lines and `#` comments are ignored.
//!
//! Plan documents:
//!
//! ```text
//! algorithm linear
//! optimal_cost 3
//! op_count 288
//! plan
//! A 1 3
//! B 5 6
//! end
//! states A A A 0 1B 2B B B B B
//! ```
//!
//! Each plan line is `<phase label> <start> <duration>` with 1-indexed
//! starts; the `states` line is optional. Parsing is lenient about key
//! order and spacing, serialization always emits this canonical shape.

use std::fmt::Write as _;

use phasedp::costs::CostSpec;
use phasedp::model::{ArrivalTable, PhaseId, PlanEntry, ProblemInstance};
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for {key}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("missing key {key:?}")]
    MissingKey { key: String },
    #[error("missing {block:?} block")]
    MissingBlock { block: String },
    #[error("line {line}: arrivals row {row} has {got} counts, expected {expected}")]
    RowWidth {
        line: usize,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("arrivals block has {got} rows, expected {expected}")]
    RowCount { got: usize, expected: usize },
    #[error("line {line}: expected {expected}, found {found:?}")]
    Unexpected {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub instance: ProblemInstance,
    pub cost: CostSpec,
}

/// Numbered, trimmed, non-blank, non-comment lines.
fn meaningful_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, FormatError> {
    let lines = meaningful_lines(text);
    let mut horizon: Option<usize> = None;
    let mut phases: Option<usize> = None;
    let mut clearance: Option<usize> = None;
    let mut min_green: Option<usize> = None;
    let mut cost: Option<CostSpec> = None;
    let mut cursor = 0;

    fn set<T>(
        slot: &mut Option<T>,
        value: T,
        line: usize,
        key: &str,
    ) -> Result<(), FormatError> {
        if slot.is_some() {
            return Err(FormatError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        *slot = Some(value);
        Ok(())
    }

    fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, FormatError> {
        value.parse().map_err(|_| FormatError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })
    }

    while cursor < lines.len() {
        let (line, content) = lines[cursor];
        cursor += 1;
        let (key, value) = match content.split_once(char::is_whitespace) {
            Some((k, v)) => (k, v.trim()),
            None => (content, ""),
        };
        match key {
            "horizon" => set(&mut horizon, parse_usize(line, key, value)?, line, key)?,
            "phases" => set(&mut phases, parse_usize(line, key, value)?, line, key)?,
            "clearance" => set(&mut clearance, parse_usize(line, key, value)?, line, key)?,
            "min_green" => set(&mut min_green, parse_usize(line, key, value)?, line, key)?,
            "cost" => {
                let spec: CostSpec =
                    value.parse().map_err(|_| FormatError::InvalidValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                    })?;
                set(&mut cost, spec, line, key)?;
            }
            "arrivals" => {
                let horizon = horizon.ok_or(FormatError::MissingKey {
                    key: "horizon".to_string(),
                })?;
                let phases = phases.ok_or(FormatError::MissingKey {
                    key: "phases".to_string(),
                })?;
                let clearance = clearance.ok_or(FormatError::MissingKey {
                    key: "clearance".to_string(),
                })?;
                let min_green = min_green.ok_or(FormatError::MissingKey {
                    key: "min_green".to_string(),
                })?;
                let mut rows: Vec<Vec<u32>> = Vec::with_capacity(phases);
                loop {
                    let Some(&(line, content)) = lines.get(cursor) else {
                        return Err(FormatError::MissingBlock {
                            block: "arrivals end".to_string(),
                        });
                    };
                    cursor += 1;
                    if content == "end" {
                        break;
                    }
                    let mut row = Vec::with_capacity(horizon);
                    for token in content.split_whitespace() {
                        row.push(token.parse().map_err(|_| FormatError::InvalidValue {
                            line,
                            key: "arrivals".to_string(),
                            value: token.to_string(),
                        })?);
                    }
                    if row.len() != horizon {
                        return Err(FormatError::RowWidth {
                            line,
                            row: rows.len(),
                            got: row.len(),
                            expected: horizon,
                        });
                    }
                    rows.push(row);
                }
                if rows.len() != phases {
                    return Err(FormatError::RowCount {
                        got: rows.len(),
                        expected: phases,
                    });
                }
                if let Some(&(line, content)) = lines.get(cursor) {
                    return Err(FormatError::Unexpected {
                        line,
                        expected: "end of file after the arrivals block".to_string(),
                        found: content.to_string(),
                    });
                }
                let cost = cost.unwrap_or(CostSpec::Stops);
                cost.validate_for(phases).map_err(|e| FormatError::Invalid {
                    line,
                    message: e.to_string(),
                })?;
                let instance = ProblemInstance::new(
                    horizon,
                    phases,
                    clearance,
                    min_green,
                    ArrivalTable::new(rows),
                )
                .map_err(|e| FormatError::Invalid {
                    line,
                    message: e.to_string(),
                })?;
                return Ok(InstanceFile { instance, cost });
            }
            _ => {
                return Err(FormatError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }
    Err(FormatError::MissingBlock {
        block: "arrivals".to_string(),
    })
}

pub fn serialize_instance(instance: &ProblemInstance, cost: &CostSpec) -> String {
    let mut out = String::new();
    writeln!(out, "horizon {}", instance.horizon()).unwrap();
    writeln!(out, "phases {}", instance.phase_count()).unwrap();
    writeln!(out, "clearance {}", instance.clearance()).unwrap();
    writeln!(out, "min_green {}", instance.min_green()).unwrap();
    writeln!(out, "cost {cost}").unwrap();
    out.push_str("arrivals\n");
    for row in instance.arrivals().rows() {
        let counts: Vec<String> = row.iter().map(u32::to_string).collect();
        writeln!(out, "{}", counts.join(" ")).unwrap();
    }
    out.push_str("end\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanDocument {
    pub algorithm: String,
    pub optimal_cost: f64,
    pub op_count: u64,
    pub entries: Vec<PlanEntry>,
    pub states: Option<Vec<String>>,
}

pub fn parse_plan(text: &str) -> Result<PlanDocument, FormatError> {
    let lines = meaningful_lines(text);
    let mut algorithm: Option<String> = None;
    let mut optimal_cost: Option<f64> = None;
    let mut op_count: Option<u64> = None;
    let mut entries: Option<Vec<PlanEntry>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut cursor = 0;

    while cursor < lines.len() {
        let (line, content) = lines[cursor];
        cursor += 1;
        let (key, value) = match content.split_once(char::is_whitespace) {
            Some((k, v)) => (k, v.trim()),
            None => (content, ""),
        };
        let invalid = |value: &str| FormatError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "algorithm" => {
                if algorithm.is_some() {
                    return Err(FormatError::DuplicateKey {
                        line,
                        key: key.to_string(),
                    });
                }
                algorithm = Some(value.to_string());
            }
            "optimal_cost" => {
                if optimal_cost.is_some() {
                    return Err(FormatError::DuplicateKey {
                        line,
                        key: key.to_string(),
                    });
                }
                optimal_cost = Some(value.parse().map_err(|_| invalid(value))?);
            }
            "op_count" => {
                if op_count.is_some() {
                    return Err(FormatError::DuplicateKey {
                        line,
                        key: key.to_string(),
                    });
                }
                op_count = Some(value.parse().map_err(|_| invalid(value))?);
            }
            "plan" => {
                if entries.is_some() {
                    return Err(FormatError::DuplicateKey {
                        line,
                        key: key.to_string(),
                    });
                }
                let mut parsed = Vec::new();
                loop {
                    let Some(&(line, content)) = lines.get(cursor) else {
                        return Err(FormatError::MissingBlock {
                            block: "plan end".to_string(),
                        });
                    };
                    cursor += 1;
                    if content == "end" {
                        break;
                    }
                    let fields: Vec<&str> = content.split_whitespace().collect();
                    if fields.len() != 3 {
                        return Err(FormatError::Unexpected {
                            line,
                            expected: "<phase> <start> <duration>".to_string(),
                            found: content.to_string(),
                        });
                    }
                    let phase = PhaseId::from_label(fields[0]).ok_or_else(|| {
                        FormatError::InvalidValue {
                            line,
                            key: "phase".to_string(),
                            value: fields[0].to_string(),
                        }
                    })?;
                    let start = fields[1].parse().map_err(|_| FormatError::InvalidValue {
                        line,
                        key: "start".to_string(),
                        value: fields[1].to_string(),
                    })?;
                    let duration =
                        fields[2].parse().map_err(|_| FormatError::InvalidValue {
                            line,
                            key: "duration".to_string(),
                            value: fields[2].to_string(),
                        })?;
                    parsed.push(PlanEntry {
                        phase,
                        start,
                        duration,
                    });
                }
                entries = Some(parsed);
            }
            "states" => {
                if states.is_some() {
                    return Err(FormatError::DuplicateKey {
                        line,
                        key: key.to_string(),
                    });
                }
                states = Some(value.split_whitespace().map(str::to_string).collect());
            }
            _ => {
                return Err(FormatError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }

    Ok(PlanDocument {
        algorithm: algorithm.ok_or(FormatError::MissingKey {
            key: "algorithm".to_string(),
        })?,
        optimal_cost: optimal_cost.ok_or(FormatError::MissingKey {
            key: "optimal_cost".to_string(),
        })?,
        op_count: op_count.ok_or(FormatError::MissingKey {
            key: "op_count".to_string(),
        })?,
        entries: entries.ok_or(FormatError::MissingBlock {
            block: "plan".to_string(),
        })?,
        states,
    })
}

pub fn serialize_plan(doc: &PlanDocument) -> String {
    let mut out = String::new();
    writeln!(out, "algorithm {}", doc.algorithm).unwrap();
    writeln!(out, "optimal_cost {}", doc.optimal_cost).unwrap();
    writeln!(out, "op_count {}", doc.op_count).unwrap();
    out.push_str("plan\n");
    for entry in &doc.entries {
        writeln!(
            out,
            "{} {} {}",
            entry.phase.label(),
            entry.start,
            entry.duration
        )
        .unwrap();
    }
    out.push_str("end\n");
    if let Some(states) = &doc.states {
        writeln!(out, "states {}", states.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# demand spike on the second phase
horizon 6
phases 2
clearance 1
min_green 2

cost stops
arrivals
1 0 2 0 0 0
0 3 0 0 1 0
end
";

    #[test]
    fn instance_files_round_trip() {
        let parsed = parse_instance(SAMPLE).expect("parses");
        assert_eq!(parsed.instance.horizon(), 6);
        assert_eq!(parsed.instance.phase_count(), 2);
        assert_eq!(parsed.cost, CostSpec::Stops);
        let canonical = serialize_instance(&parsed.instance, &parsed.cost);
        let reparsed = parse_instance(&canonical).expect("canonical form parses");
        assert_eq!(reparsed, parsed);
        assert_eq!(serialize_instance(&reparsed.instance, &reparsed.cost), canonical);
    }

    #[test]
    fn header_keys_accept_any_order() {
        let shuffled = "\
min_green 2
horizon 6
phases 2
clearance 1
arrivals
1 0 2 0 0 0
0 3 0 0 1 0
end
";
        let parsed = parse_instance(shuffled).expect("parses");
        assert_eq!(parsed.cost, CostSpec::Stops);
        assert_eq!(parsed.instance.min_green(), 2);
    }

    #[test]
    fn instance_errors_name_the_problem() {
        let err = parse_instance("horizon x\n").unwrap_err();
        assert_eq!(
            err.to_string(),
            "line 1: invalid value \"x\" for horizon"
        );
        let err = parse_instance("horizon 4\nhorizon 5\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2: duplicate key \"horizon\"");
        let err = parse_instance("speed 3\n").unwrap_err();
        assert_eq!(err.to_string(), "line 1: unknown key \"speed\"");
        let missing = "\
horizon 4
phases 2
clearance 1
min_green 1
arrivals
1 2 3
0 0 0 0
end
";
        let err = parse_instance(missing).unwrap_err();
        assert_eq!(
            err.to_string(),
            "line 6: arrivals row 0 has 3 counts, expected 4"
        );
        let err = parse_instance("horizon 4\nphases 2\n").unwrap_err();
        assert_eq!(err.to_string(), "missing \"arrivals\" block");
    }

    #[test]
    fn weighted_cost_specs_parse() {
        let text = "\
horizon 4
phases 2
clearance 1
min_green 1
cost weighted-stops:2,0.5
arrivals
1 1 1 1
1 1 1 1
end
";
        let parsed = parse_instance(text).expect("parses");
        assert_eq!(
            parsed.cost,
            CostSpec::WeightedStops(vec![2.0, 0.5])
        );
    }

    #[test]
    fn weight_arity_must_match_phases() {
        let text = "\
horizon 4
phases 2
clearance 1
min_green 1
cost weighted-stops:2
arrivals
1 1 1 1
1 1 1 1
end
";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("2 phases"), "{err}");
    }

    #[test]
    fn plan_documents_round_trip() {
        let doc = PlanDocument {
            algorithm: "linear".to_string(),
            optimal_cost: 3.0,
            op_count: 288,
            entries: vec![
                PlanEntry {
                    phase: PhaseId::new(0),
                    start: 1,
                    duration: 3,
                },
                PlanEntry {
                    phase: PhaseId::new(1),
                    start: 5,
                    duration: 6,
                },
            ],
            states: Some(
                "A A A 0 1B 2B B B B B"
                    .split_whitespace()
                    .map(str::to_string)
                    .collect(),
            ),
        };
        let text = serialize_plan(&doc);
        assert_eq!(
            text,
            "algorithm linear\noptimal_cost 3\nop_count 288\nplan\nA 1 3\nB 5 6\nend\nstates A A A 0 1B 2B B B B B\n"
        );
        assert_eq!(parse_plan(&text).expect("parses"), doc);
    }

    #[test]
    fn plan_errors_name_the_field() {
        let err = parse_plan("algorithm linear\noptimal_cost 1\nop_count 2\nplan\nA 1\nend\n")
            .unwrap_err();
        assert_eq!(
            err.to_string(),
            "line 5: expected <phase> <start> <duration>, found \"A 1\""
        );
        let err = parse_plan("algorithm linear\noptimal_cost 1\nop_count 2\nplan\n9 1 3\nend\n")
            .unwrap_err();
        assert_eq!(err.to_string(), "line 5: invalid value \"9\" for phase");
        let err = parse_plan("optimal_cost 1\nop_count 2\nplan\nend\n").unwrap_err();
        assert_eq!(err.to_string(), "missing key \"algorithm\"");
    }

    #[test]
    fn fractional_costs_round_trip() {
        let doc = PlanDocument {
            algorithm: "linear".to_string(),
            optimal_cost: 2.5,
            op_count: 10,
            entries: vec![PlanEntry {
                phase: PhaseId::new(0),
                start: 1,
                duration: 4,
            }],
            states: None,
        };
        let reparsed = parse_plan(&serialize_plan(&doc)).expect("parses");
        assert_eq!(reparsed.optimal_cost, 2.5);
    }
}
