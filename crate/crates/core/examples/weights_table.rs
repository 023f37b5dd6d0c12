//! Print the combined weight sequences for a few levels and check the
//! weight inequalities.
//!
//!     cargo run --example weights_table -- 0.5 6

use tfcdr::weights::{a_sequence, check_inequalities, stability_condition, FractionalParams, Inequality, Level};

fn main() -> Result<(), tfcdr::Error> {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().map_or(Ok(0.5), |s| s.parse()).unwrap_or(0.5);
    let max_i: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let p = FractionalParams::new(lambda)?;
    println!("lambda {lambda}, alpha {:.4}", p.alpha());

    for i in 0..=max_i {
        for level in [Level::Half(i), Level::Full(i)] {
            let a = a_sequence(&p, level);
            let vals: Vec<String> = a.values.iter().map(|v| format!("{v:.5}")).collect();
            let stab = match stability_condition(&p, level) {
                Ok((ok, r)) => format!("stability {} ({r:+.3e})", if ok { "holds" } else { "fails" }),
                Err(_) => "stability n/a".to_string(),
            };
            println!("{:>6}: {stab}  [{}]", level.to_string(), vals.join(" "));
        }
    }

    let report = check_inequalities(&p, 50);
    if report.skipped {
        println!("inequalities only claimed for lambda < 2/3");
        return Ok(());
    }
    for which in Inequality::ALL {
        println!("{:<16} {:>6} checks {:>3} failures", which.name(), report.checks_of(which), report.failures_of(which));
    }
    Ok(())
}
