//! Command line for the signal-timing solver.
//!
//! Exit codes: 0 on success, 1 when the request is well-formed but fails
//! (no feasible plan, plan invalid, cost mismatch), 2 on input errors.

mod format;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use format::{
    parse_instance, parse_plan, serialize_instance, serialize_plan, InstanceFile, PlanDocument,
};
use phasedp::baselines::{brute_force, cop_default_stage_budget, cop_solve, BaselineError};
use phasedp::bench::{
    fit_loglog, records_to_csv, run_sweep, speedup_report, Algorithm, BenchError, BenchRecord,
    SweepConfig, DEFAULT_FIT_FLOOR_S,
};
use phasedp::costs::{CostModel, CostSpec, CostValue, StopsCost, WeightedStopsCost,
    WEIGHTED_COST_TOLERANCE};
use phasedp::model::{PhaseId, ProblemInstance, TimingPlan};
use phasedp::solver::{solve, SolveError, SolveResult};
use phasedp::state_space::StateGraph;
use phasedp::workload::{generate_arrivals, RateProfile};

#[derive(Parser)]
#[command(
    name = "phasedp",
    version,
    about = "Optimal fixed-horizon signal timing for one intersection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic problem instance
    Generate(GenerateArgs),
    /// Compute an optimal timing plan for an instance file
    Solve(SolveArgs),
    /// Check a plan document against its instance
    Validate(ValidateArgs),
    /// Time the algorithms over doubling horizons and emit CSV
    Bench(BenchArgs),
    /// Print the controller-state graph for a signal shape
    GraphDump(GraphDumpArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Number of signal phases
    #[arg(long)]
    phases: usize,
    /// Steps in the planning horizon
    #[arg(long)]
    horizon: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Arrival profile: uniform:<mean> or alternating-pulse:<period>,<mean>
    #[arg(long, default_value = "uniform:2")]
    profile: String,
    #[arg(long, default_value_t = 3)]
    min_green: usize,
    #[arg(long, default_value_t = 2)]
    clearance: usize,
    /// Cost model: stops or weighted-stops:w0,w1,...
    #[arg(long, default_value = "stops")]
    cost: String,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Linear,
    Cop,
    Brute,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Instance file path, or - for stdin
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Linear)]
    algorithm: AlgorithmArg,
    /// Append the per-step controller states to the plan document
    #[arg(long)]
    emit_states: bool,
    /// Stage budget for the stage-based method (default: enough to be exact)
    #[arg(long)]
    cop_stages: Option<usize>,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ValidateArgs {
    /// Instance file the plan claims to solve
    #[arg(long)]
    instance: PathBuf,
    /// Plan document to check
    #[arg(long)]
    plan: PathBuf,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Largest horizon: the sweep doubles from 8 up to this
    #[arg(long, default_value_t = 4096)]
    t_max: usize,
    /// Largest horizon the cubic method is asked to run
    #[arg(long, default_value_t = 512)]
    t_max_cop: usize,
    /// Comma-separated subset of linear,cop,brute
    #[arg(long, default_value = "linear,cop")]
    algorithms: String,
    #[arg(long, default_value_t = 3)]
    phases: usize,
    #[arg(long, default_value_t = 3)]
    min_green: usize,
    #[arg(long, default_value_t = 2)]
    clearance: usize,
    #[arg(long, default_value = "uniform:2")]
    profile: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Timed repetitions per point (one warmup run is discarded)
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Report log-log fits and speedups on stderr after the CSV
    #[arg(long)]
    fit: bool,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DumpFormat {
    Dot,
    Labels,
}

#[derive(clap::Args)]
struct GraphDumpArgs {
    #[arg(long)]
    phases: usize,
    #[arg(long, default_value_t = 3)]
    min_green: usize,
    #[arg(long, default_value_t = 2)]
    clearance: usize,
    #[arg(long, value_enum, default_value_t = DumpFormat::Dot)]
    format: DumpFormat,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Failed(String),
}

fn usage(message: impl ToString) -> CliError {
    CliError::Usage(message.to_string())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Solve(args) => run_solve(args),
        Command::Validate(args) => run_validate(args),
        Command::Bench(args) => run_bench(args),
        Command::GraphDump(args) => run_graph_dump(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
        Err(CliError::Failed(message)) => {
            eprintln!("error: {message}");
            std::process::exit(1);
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        std::io::read_to_string(std::io::stdin())
            .map_err(|e| usage(format!("cannot read stdin: {e}")))
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let profile: RateProfile = args.profile.parse().map_err(usage)?;
    let cost: CostSpec = args.cost.parse().map_err(usage)?;
    cost.validate_for(args.phases).map_err(usage)?;
    let arrivals = generate_arrivals(args.phases, args.horizon, args.seed, &profile);
    let instance = ProblemInstance::new(
        args.horizon,
        args.phases,
        args.clearance,
        args.min_green,
        arrivals,
    )
    .map_err(usage)?;
    emit(&args.output, &serialize_instance(&instance, &cost))
}

fn map_solve_error(error: SolveError) -> CliError {
    match error {
        SolveError::NoFeasiblePlan => CliError::Failed(error.to_string()),
        SolveError::UnknownControllerState => usage(error.to_string()),
    }
}

fn map_baseline_error(error: BaselineError) -> CliError {
    match error {
        BaselineError::HorizonCapExceeded { .. } => usage(error.to_string()),
        BaselineError::NoFeasiblePlan => CliError::Failed(error.to_string()),
    }
}

fn solve_document<M: CostModel>(
    instance: &ProblemInstance,
    model: &M,
    args: &SolveArgs,
) -> Result<PlanDocument, CliError> {
    let (result, algorithm): (SolveResult<M::Value>, &str) = match args.algorithm {
        AlgorithmArg::Linear => (solve(instance, model).map_err(map_solve_error)?, "linear"),
        AlgorithmArg::Cop => {
            let budget = args
                .cop_stages
                .unwrap_or_else(|| cop_default_stage_budget(instance));
            let cop = cop_solve(instance, model, budget).map_err(map_baseline_error)?;
            if cop.stage_budget_exhausted {
                eprintln!(
                    "note: stage budget {budget} is below the {} needed to guarantee optimality",
                    cop_default_stage_budget(instance)
                );
            }
            (cop.result, "cop")
        }
        AlgorithmArg::Brute => (
            brute_force(instance, model).map_err(map_baseline_error)?,
            "brute",
        ),
    };
    let states = if args.emit_states {
        let graph = StateGraph::for_instance(instance);
        Some(result.state_labels(&graph))
    } else {
        None
    };
    Ok(PlanDocument {
        algorithm: algorithm.to_string(),
        optimal_cost: result.optimal_cost.to_f64(),
        op_count: result.relaxation_count,
        entries: result.plan.entries,
        states,
    })
}

fn run_solve(args: SolveArgs) -> Result<(), CliError> {
    let text = read_input(&args.input)?;
    let InstanceFile { instance, cost } = parse_instance(&text).map_err(usage)?;
    let doc = match cost {
        CostSpec::Stops => solve_document(&instance, &StopsCost, &args)?,
        CostSpec::WeightedStops(weights) => {
            solve_document(&instance, &WeightedStopsCost::new(weights), &args)?
        }
    };
    emit(&args.output, &serialize_plan(&doc))
}

/// Cost of a plan under the instance's cost selector, recomputed from
/// the served timeline: every arrival on a step its phase is not served
/// counts, weighted when a weight list is configured.
fn replay_cost(plan: &TimingPlan, instance: &ProblemInstance, cost: &CostSpec) -> f64 {
    let weights: Vec<f64> = match cost {
        CostSpec::Stops => vec![1.0; instance.phase_count()],
        CostSpec::WeightedStops(weights) => weights.clone(),
    };
    let timeline = plan.served_timeline(instance.horizon());
    let mut total = 0.0;
    for t in 1..=instance.horizon() {
        for phase in 0..instance.phase_count() {
            if timeline[t - 1] != Some(PhaseId::new(phase)) {
                total += weights[phase] * instance.arrivals().at(PhaseId::new(phase), t) as f64;
            }
        }
    }
    total
}

fn run_validate(args: ValidateArgs) -> Result<(), CliError> {
    let InstanceFile { instance, cost } =
        parse_instance(&read_file(&args.instance)?).map_err(usage)?;
    let doc = parse_plan(&read_file(&args.plan)?).map_err(usage)?;
    let plan = TimingPlan {
        entries: doc.entries.clone(),
        total_cost: doc.optimal_cost,
    };
    let report = phasedp::model::validate_plan(&plan, &instance);
    if !report.is_valid() {
        for violation in report.violations() {
            println!("violation: {violation}");
        }
        return Err(CliError::Failed(format!(
            "plan has {} violation(s)",
            report.violations().len()
        )));
    }
    let replayed = replay_cost(&plan, &instance, &cost);
    if (replayed - doc.optimal_cost).abs() > WEIGHTED_COST_TOLERANCE {
        println!(
            "declared cost {} does not match replayed cost {replayed}",
            doc.optimal_cost
        );
        return Err(CliError::Failed("declared cost mismatch".to_string()));
    }
    println!("plan is valid");
    println!("declared cost {} matches replay", doc.optimal_cost);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    let profile: RateProfile = args.profile.parse().map_err(usage)?;
    if args.t_max < 8 {
        return Err(usage("--t-max must be at least 8"));
    }
    if args.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let mut algorithms = Vec::new();
    for name in args.algorithms.split(',') {
        match name.trim() {
            "linear" => algorithms.push(Algorithm::Linear),
            "cop" => algorithms.push(Algorithm::Cop),
            "brute" => algorithms.push(Algorithm::Brute),
            other => return Err(usage(format!("unknown algorithm {other:?}"))),
        }
    }
    let mut horizons = Vec::new();
    let mut horizon = 8usize;
    while horizon <= args.t_max {
        horizons.push(horizon);
        horizon *= 2;
    }
    let mut records: Vec<BenchRecord> = Vec::new();
    for &algorithm in &algorithms {
        let algorithm_horizons: Vec<usize> = match algorithm {
            Algorithm::Cop => horizons
                .iter()
                .copied()
                .filter(|&h| h <= args.t_max_cop)
                .collect(),
            _ => horizons.clone(),
        };
        let config = SweepConfig {
            algorithm,
            horizons: algorithm_horizons,
            phase_count: args.phases,
            clearance: args.clearance,
            min_green: args.min_green,
            profile: profile.clone(),
            seed: args.seed,
            reps: args.reps,
        };
        eprintln!(
            "timing {algorithm} over {} horizon(s), {} rep(s) each",
            config.horizons.len(),
            config.reps
        );
        let swept = run_sweep(&config).map_err(|e| match e {
            BenchError::InvalidConfig(_) => usage(e),
            other => CliError::Failed(other.to_string()),
        })?;
        records.extend(swept);
    }
    emit(&args.output, &records_to_csv(&records))?;
    if args.fit {
        for &algorithm in &algorithms {
            let subset: Vec<BenchRecord> = records
                .iter()
                .filter(|r| r.algorithm == algorithm)
                .cloned()
                .collect();
            match fit_loglog(&subset, DEFAULT_FIT_FLOOR_S) {
                Ok(fit) => eprintln!(
                    "{algorithm}: slope {:.3} over {} point(s), r^2 {:.4}",
                    fit.slope, fit.points_used, fit.r_squared
                ),
                Err(e) => eprintln!("{algorithm}: {e}"),
            }
        }
        match speedup_report(&records) {
            Ok(report) => {
                for row in &report.rows {
                    eprintln!(
                        "T={}: linear {:.6}s, cop {:.6}s, speedup {:.1}x",
                        row.horizon, row.linear_s, row.cop_s, row.speedup
                    );
                }
            }
            Err(e) => eprintln!("speedup: {e}"),
        }
    }
    Ok(())
}

fn run_graph_dump(args: GraphDumpArgs) -> Result<(), CliError> {
    if args.phases < 2 {
        return Err(usage("--phases must be at least 2"));
    }
    if args.min_green == 0 {
        return Err(usage("--min-green must be at least 1"));
    }
    if args.clearance == 0 || args.clearance > args.min_green {
        return Err(usage(
            "--clearance must be between 1 and --min-green inclusive",
        ));
    }
    let graph = StateGraph::build(args.phases, args.min_green, args.clearance);
    let text = match args.format {
        DumpFormat::Dot => graph.to_dot(),
        DumpFormat::Labels => {
            let mut out = String::new();
            out.push_str(&format!("state_count {}\n", graph.state_count()));
            out.push_str(&format!("edge_count {}\n", graph.edge_count()));
            let labels = |indices: &[usize]| {
                indices
                    .iter()
                    .map(|&s| graph.label(s))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str(&format!("initial {}\n", labels(graph.initial_states())));
            out.push_str(&format!("final {}\n", labels(graph.final_states())));
            for s in 0..graph.state_count() {
                out.push_str(&format!("preds {}: {}\n", graph.label(s), labels(graph.preds(s))));
            }
            out
        }
    };
    emit(&args.output, &text)
}
