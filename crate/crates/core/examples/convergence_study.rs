//! Coupled-mesh convergence study for both examples, written as CSV and
//! SVG into the system temp directory.

use tfcdr::{emit_csv, emit_plot, run_study, ProblemSource, StudyConfig};

fn main() -> Result<(), tfcdr::Error> {
    let out = std::env::temp_dir();
    for (source, lambda) in [(ProblemSource::Example1, 0.9), (ProblemSource::Example2, 0.66)] {
        let cfg = StudyConfig::new(source, lambda, vec![3, 4, 5]);
        let report = run_study(&cfg)?;
        print!("{}", report.to_table());
        let stem = format!("{}_{lambda}", report.problem);
        let csv = out.join(format!("{stem}.csv"));
        let svg = out.join(format!("{stem}.svg"));
        emit_csv(&report, &csv)?;
        emit_plot(&report, &svg)?;
        println!("wrote {} and {}\n", csv.display(), svg.display());
    }
    Ok(())
}
