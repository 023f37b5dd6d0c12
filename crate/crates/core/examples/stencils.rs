//! Fourth-order stencils on sin x: errors and observed rates.

use tfcdr::{stencil_dx4, stencil_dxx4, GridSpec};

fn main() -> Result<(), tfcdr::Error> {
    let mut prev: Option<(f64, f64)> = None;
    println!("{:>5} {:>12} {:>12} {:>7} {:>7}", "M", "err u_x", "err u_xx", "rate", "rate");
    for m in [8usize, 16, 32, 64, 128] {
        let g = GridSpec::new(m, 1, 1.0, 1.0)?;
        let u: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for j in g.interior() {
            let x = g.x(j);
            e1 = e1.max((stencil_dx4(&g, &u, j)? - x.cos()).abs());
            e2 = e2.max((stencil_dxx4(&g, &u, j)? + x.sin()).abs());
        }
        let (r1, r2) = match prev {
            Some((a, b)) => (format!("{:.3}", (a / e1).log2()), format!("{:.3}", (b / e2).log2())),
            None => ("-".into(), "-".into()),
        };
        println!("{m:>5} {e1:>12.4e} {e2:>12.4e} {r1:>7} {r2:>7}");
        prev = Some((e1, e2));
    }
    Ok(())
}
