use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tfcdr::harness::{emit_csv, emit_plot, parse_levels, run_study, StudyFile};
use tfcdr::weights::{check_inequalities, FractionalParams, Inequality};
use tfcdr::{Coupling, ErrorNorm, ProblemSource, StudyConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_PROPERTIES: u8 = 3;

#[derive(Parser)]
#[command(name = "tfcdr", version, about = "Fourth-order solver for the time-fractional convection-diffusion-reaction equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write a CSV report
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// example1, example2 or a path to a TOML problem file
    #[arg(long)]
    problem: String,
    /// Fractional order λ in (0, 1)
    #[arg(long)]
    lambda: Option<f64>,
    /// Refinement exponents, h = 2^-l: `3..6` or `3,4,5`
    #[arg(long)]
    levels: Option<String>,
    /// Couple the time step to the mesh, k = h^(4/(2-λ/2)) (default)
    #[arg(long, conflicts_with = "k")]
    couple_time: bool,
    /// Explicit time steps, comma separated
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    /// Error norm for the report: l2-l2 or linf-l2
    #[arg(long)]
    norm: Option<String>,
    /// Stop once the error drops below this value (after one rate)
    #[arg(long)]
    stop_below: Option<f64>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Check the weight inequalities for λ before the study
    #[arg(long)]
    check_properties: bool,
    /// Largest step index for --check-properties
    #[arg(long, default_value_t = 50)]
    max_step: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Cli { command: Command::Run(args) } = Cli::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

/// Ok(exit code) once the configuration is usable; Err for config errors.
fn run(args: RunArgs) -> Result<u8, String> {
    let (source, file) = match args.problem.as_str() {
        "example1" => (ProblemSource::Example1, StudyFile::default()),
        "example2" => (ProblemSource::Example2, StudyFile::default()),
        path => {
            let f = StudyFile::read(path.as_ref()).map_err(|e| e.to_string())?;
            (ProblemSource::Config(f.problem.clone()), f)
        }
    };
    let lambda = args
        .lambda
        .or(file.lambda)
        .ok_or("--lambda is required")?;
    let params = FractionalParams::new(lambda).map_err(|e| e.to_string())?;

    let mut code = 0;
    if args.check_properties {
        let report = check_inequalities(&params, args.max_step);
        if report.skipped {
            println!("weight inequalities: skipped (they are only claimed for lambda < 2/3)");
        } else {
            for which in Inequality::ALL {
                let fails = report.failures_of(which);
                println!(
                    "{} {:<16} {} checks, {} failures",
                    if fails == 0 { "PASS" } else { "FAIL" },
                    which.name(),
                    report.checks_of(which),
                    fails
                );
            }
            if !report.passed() {
                code = EXIT_PROPERTIES;
            }
        }
    }

    let levels = match &args.levels {
        Some(s) => Some(parse_levels(s).map_err(|e| e.to_string())?),
        None => file.levels().map_err(|e| e.to_string())?,
    };
    let Some(levels) = levels else {
        if args.check_properties {
            return Ok(code);
        }
        return Err("--levels is required".into());
    };
    let coupling = match (&args.k, args.couple_time) {
        (Some(k), _) => Coupling::Independent(k.clone()),
        (None, true) => Coupling::TimeCoupled,
        (None, false) => match (&file.k, file.couple_time) {
            (Some(k), Some(false) | None) => Coupling::Independent(k.clone()),
            _ => Coupling::TimeCoupled,
        },
    };
    let norm: ErrorNorm = args
        .norm
        .as_deref()
        .or(file.norm.as_deref())
        .map(str::parse)
        .transpose()
        .map_err(|e: tfcdr::Error| e.to_string())?
        .unwrap_or_default();
    let mut cfg = StudyConfig::new(source, lambda, levels)
        .with_coupling(coupling)
        .with_norm(norm);
    cfg.stop_below = args.stop_below;

    let report = run_study(&cfg).map_err(|e| e.to_string())?;
    print!("{}", report.to_table());

    if let Some(path) = args.out_csv.or(file.out_csv) {
        emit_csv(&report, &path).map_err(|e| e.to_string())?;
    }
    if let Some(path) = args.out_svg.or(file.out_svg) {
        if let Err(e) = emit_plot(&report, &path) {
            eprintln!("warning: {e}");
        }
    }
    if report.has_failures() {
        return Ok(EXIT_SOLVER);
    }
    Ok(code)
}
