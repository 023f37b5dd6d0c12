//! Gamma function.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for x > 0, Lanczos approximation (g = 7, n = 9) with the
/// reflection formula below 1/2.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::GammaDomain(x));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return PI / ((PI * x).sin() * gamma_positive(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        return (1..x as u64).map(|n| n as f64).product();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (n, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + n as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}
