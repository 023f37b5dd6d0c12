//! One solve of either example, stepping by hand, then the final profile
//! against the exact solution.
//!
//!     cargo run --release --example single_solve -- example2 0.66 16 200

use tfcdr::weights::FractionalParams;
use tfcdr::{error_vs_exact, example1, example2, StepState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let which = args.first().map_or("example1", String::as_str);
    let lambda: f64 = args.get(1).map_or(Ok(0.5), |s| s.parse())?;
    let m: usize = args.get(2).map_or(Ok(16), |s| s.parse())?;
    let n: usize = args.get(3).map_or(Ok(100), |s| s.parse())?;

    let prob = match which {
        "example2" => example2(lambda)?,
        _ => example1(lambda)?,
    };
    let grid = prob.grid(m, n)?;
    let mut state = StepState::init(&prob, grid, FractionalParams::new(lambda)?)?;
    while !state.is_finished() {
        state.step()?;
        let i = state.steps_done();
        if i % (n / 4).max(1) == 0 {
            println!("step {i:>5}/{n}");
        }
    }
    let d = state.diagnostics();
    println!(
        "{} solves, max residual {:.2e}, stability flag failures {}",
        d.solves.len(),
        d.max_residual(),
        d.stability_violations()
    );
    let (hist, _) = state.into_parts();
    let err = error_vs_exact(&hist, &prob)?;
    println!("error: linf-l2 {:.4e}, l2-l2 {:.4e}", err.linf_l2, err.l2_l2);

    let last = hist.last().unwrap_or_default();
    println!("{:>8} {:>14} {:>14}", "x", "U(x,T)", "u(x,T)");
    for (j, x) in grid.nodes().into_iter().enumerate().step_by((m / 8).max(1)) {
        println!("{x:>8.4} {:>14.8} {:>14.8}", last[j], prob.exact(x, prob.final_time())?);
    }
    Ok(())
}
