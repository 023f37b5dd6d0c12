//! Build a problem from a TOML file and run a short study on it.
//!
//!     cargo run --example config_problem -- examples/data/heat.toml

use std::path::PathBuf;

use tfcdr::harness::StudyFile;
use tfcdr::{run_study, ProblemSource, StudyConfig};

fn main() -> Result<(), tfcdr::Error> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/heat.toml"));
    let file = StudyFile::read(&path)?;
    let lambda = file.lambda.unwrap_or(0.5);
    let levels = file.levels()?.unwrap_or_else(|| vec![3, 4]);
    let prob = file.problem.build(lambda)?;
    let signs = prob.sign_conditions();
    println!(
        "{}: q >= {:.3}, p >= {:.3}, g >= {:.3}",
        prob.name(),
        signs.q_min,
        signs.p_min,
        signs.g_min
    );
    let report = run_study(&StudyConfig::new(ProblemSource::Config(file.problem), lambda, levels))?;
    print!("{}", report.to_table());
    Ok(())
}
