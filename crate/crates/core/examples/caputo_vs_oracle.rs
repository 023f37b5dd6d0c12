//! Compare the two discrete Caputo operators against adaptive quadrature
//! on u(t) = t sin t and report the observed order.

use tfcdr::weights::FractionalParams;
use tfcdr::{caputo_quadrature_oracle, discrete_caputo_full, discrete_caputo_half, GridSpec, HalfStepHistory};

fn main() -> Result<(), tfcdr::Error> {
    let u = |t: f64| t * t.sin();
    let du = |t: f64| t.sin() + t * t.cos();
    for lambda in [0.3, 0.7] {
        let p = FractionalParams::new(lambda)?;
        println!("lambda {lambda} (expected order {:.2})", 2.0 - lambda);
        let mut prev: Option<f64> = None;
        for n in [16usize, 32, 64, 128, 256] {
            let grid = GridSpec::new(4, n, 1.0, 1.0)?;
            let hist = HalfStepHistory::from_fn(grid, 2 * n + 1, |m, _| u(grid.t_half(m)));
            let k = grid.k();
            let mut err = 0.0f64;
            for i in 0..n {
                let t = (i as f64 + 0.5 + p.alpha()) * k;
                err = err.max((discrete_caputo_half(&hist, &p, i)?[0] - caputo_quadrature_oracle(du, lambda, t, 8)?).abs());
                let t = (i as f64 + 1.0 + p.alpha()) * k;
                err = err.max((discrete_caputo_full(&hist, &p, i)?[0] - caputo_quadrature_oracle(du, lambda, t, 8)?).abs());
            }
            let order = prev.map(|e| format!("{:.3}", (e / err).log2())).unwrap_or_else(|| "-".into());
            println!("  N = {n:>4}  max error {err:.3e}  order {order}");
            prev = Some(err);
        }
    }
    Ok(())
}
