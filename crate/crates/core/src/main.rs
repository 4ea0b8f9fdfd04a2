use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stl_synth::bench::{self, plot_trajectory, run_benchmarks, write_csv, write_json, Scenario, SolverChoice};
use stl_synth::encoder::{encode, EncodedProblem, EncoderConfig, Encoding};
use stl_synth::parser::{load_regions, parse, SpecSource};
use stl_synth::solver::{export_lp, import_solution, report, solve, write_solution, BnBOptions, SolveStatus};
use stl_synth::system::LinearSystem;

#[derive(Parser)]
#[command(name = "stl-synth", version, about = "Trajectory synthesis from STL specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a specification and solve it, or export it for an external solver.
    Solve(SolveArgs),
    /// Run the bundled benchmark scenarios.
    Bench(BenchArgs),
    /// Print encoding statistics for both encodings.
    Count(CountArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Proposed,
    Standard,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Proposed => Encoding::Proposed,
            EncodingArg::Standard => Encoding::Standard,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Internal,
    Lpfile,
}

#[derive(Args)]
struct ProblemArgs {
    /// File containing the specification text.
    #[arg(long)]
    spec: PathBuf,
    /// Region file (`{"regions": [...]}`).
    #[arg(long)]
    regions: PathBuf,
    #[arg(long)]
    horizon: usize,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,1,0,0")]
    x0: Vec<f64>,
    #[arg(long)]
    flatten: bool,
    /// Big-M constant; derived from the output box when omitted.
    #[arg(long = "M")]
    big_m: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "proposed")]
    encoding: EncodingArg,
    #[arg(long, value_enum, default_value = "internal")]
    solver: SolverArg,
    /// Verify a `name value` solution file from an external solver instead of solving.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    export: Option<PathBuf>,
    /// Write the solved variable values as a `name value` file.
    #[arg(long)]
    write_solution: Option<PathBuf>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "builtin")]
    suite: String,
    /// Comma separated horizons; each scenario's own list when omitted.
    #[arg(long, value_delimiter = ',')]
    horizons: Vec<usize>,
    #[arg(long, conflicts_with = "solve")]
    counts_only: bool,
    #[arg(long)]
    solve: bool,
    /// Add a running cost and export LP files instead of solving internally.
    #[arg(long, conflicts_with_all = ["solve", "counts_only"])]
    quadratic: bool,
    /// Diagonal of Q and R used by --quadratic when a scenario has none.
    #[arg(long, default_value_t = 0.01, requires = "quadratic")]
    cost_scale: f64,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    problem: ProblemArgs,
}

fn load_problem(args: &ProblemArgs, encoding: Encoding) -> Result<EncodedProblem> {
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let regions_json =
        std::fs::read_to_string(&args.regions).with_context(|| format!("reading {}", args.regions.display()))?;
    let regions = load_regions(&regions_json)?;
    let formula = parse(&SpecSource::new(text, regions))?;
    let cfg = EncoderConfig {
        encoding,
        flatten: args.flatten,
        big_m: args.big_m,
        ..EncoderConfig::default()
    };
    Ok(encode(&formula, &LinearSystem::double_integrator(), &args.x0, args.horizon, &cfg)?)
}

fn exit_for(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(2),
        SolveStatus::NodeLimit | SolveStatus::TimeLimit => ExitCode::from(3),
    }
}

fn plot_scenario(args: &ProblemArgs) -> Result<Scenario> {
    let regions_json = std::fs::read_to_string(&args.regions)?;
    Ok(Scenario {
        name: "custom".into(),
        regions: load_regions(&regions_json)?.into_values().collect(),
        spec: std::fs::read_to_string(&args.spec)?,
        system: LinearSystem::double_integrator(),
        x0: args.x0.clone(),
        q_diag: Vec::new(),
        r_diag: Vec::new(),
        horizons: vec![args.horizon],
        min_horizon: 0,
        flatten: args.flatten,
        published_counts: Default::default(),
    })
}

fn run_solve(args: SolveArgs) -> Result<ExitCode> {
    let problem = load_problem(&args.problem, args.encoding.into())?;
    if let Some(path) = &args.export {
        std::fs::write(path, export_lp(&problem.model))?;
    }
    let result = if let Some(sol) = &args.solution {
        import_solution(&problem, &std::fs::read_to_string(sol)?)?
    } else if args.solver == SolverArg::Lpfile {
        if args.export.is_none() {
            bail!("--solver lpfile needs --export <model.lp>");
        }
        println!("exported {} binaries", problem.stats.binary_count);
        return Ok(ExitCode::SUCCESS);
    } else {
        let opts = BnBOptions {
            node_limit: args.node_limit,
            time_limit_ms: args.time_limit_ms,
            ..BnBOptions::default()
        };
        solve(&problem, &opts)?
    };
    let out = serde_json::to_string_pretty(&report(&problem, &result))?;
    match &args.out {
        Some(path) => std::fs::write(path, out + "\n")?,
        None => println!("{out}"),
    }
    if let (Some(path), Some(values)) = (&args.write_solution, &result.values) {
        std::fs::write(path, write_solution(&problem.model, values))?;
    }
    if let (Some(path), Some(t)) = (&args.plot, &result.trajectory) {
        plot_trajectory(&plot_scenario(&args.problem)?, t, path)?;
    }
    Ok(exit_for(result.status))
}

fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.suite != "builtin" {
        bail!("unknown suite `{}`", args.suite);
    }
    let choice = if args.quadratic {
        SolverChoice::LpFile(args.out.join("lp"))
    } else if args.solve {
        SolverChoice::Internal(BnBOptions {
            time_limit_ms: args.time_limit_ms,
            ..BnBOptions::default()
        })
    } else {
        SolverChoice::CountsOnly
    };
    std::fs::create_dir_all(&args.out)?;
    let mut suite = bench::builtin_suite();
    if args.quadratic {
        for s in &mut suite {
            if s.q_diag.is_empty() && s.r_diag.is_empty() {
                s.q_diag = vec![args.cost_scale; s.system.n()];
                s.r_diag = vec![args.cost_scale; s.system.m()];
            }
        }
    }
    let records = run_benchmarks(&suite, &[Encoding::Standard, Encoding::Proposed], &args.horizons, &choice);
    write_csv(&records, &args.out.join("results.csv"))?;
    write_json(&records, &args.out.join("results.json"))?;
    println!(
        "{:<16} {:>4} {:<9} {:>8} {:>9} {:>8} {:>12}",
        "scenario", "T", "encoding", "binary", "published", "rows", "status"
    );
    for r in &records {
        println!(
            "{:<16} {:>4} {:<9} {:>8} {:>9} {:>8} {:>12}",
            r.scenario,
            r.horizon,
            r.encoding.to_string(),
            r.binary_count,
            r.published_binary_count.map_or("-".to_string(), |c| c.to_string()),
            r.constraint_count,
            r.status
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_count(args: CountArgs) -> Result<ExitCode> {
    println!("{:<9} {:>8} {:>10} {:>11} {:>7}", "encoding", "binary", "continuous", "constraints", "leaves");
    for enc in [Encoding::Standard, Encoding::Proposed] {
        let p = load_problem(&args.problem, enc)?;
        let s = &p.stats;
        println!(
            "{:<9} {:>8} {:>10} {:>11} {:>7}",
            enc.to_string(),
            s.binary_count,
            s.continuous_count,
            s.constraint_count,
            s.leaf_count
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Count(a) => run_count(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
