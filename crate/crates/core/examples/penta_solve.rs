//! Solve a random pentadiagonal system with the banded LU and report the
//! residual, then show the singular-matrix error.

use rand::{Rng, SeedableRng};
use tfcdr::{solve_penta, Error, PentaSystem};

fn main() {
    let n = 200;
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let mut sys = PentaSystem::zeros(n);
    for (o, band) in sys.bands.iter_mut().enumerate() {
        for r in 0..n {
            let c = r as isize + o as isize - 2;
            if c >= 0 && (c as usize) < n {
                band[r] = rng.random_range(-1.0..1.0);
            }
        }
    }
    sys.rhs = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = solve_penta(&sys).expect("random system is regular");
    println!("n = {n}, diagonally dominant: {}", sys.is_diagonally_dominant());
    println!("relative residual {:.3e}", sys.relative_residual(&x));

    let zero = PentaSystem::zeros(5);
    match solve_penta(&zero) {
        Err(Error::SingularMatrix { row, .. }) => println!("zero matrix: singular at row {row}"),
        other => println!("unexpected: {other:?}"),
    }
}
