//! Half-step history and the discrete Caputo operators at the shifted
//! times t_{i+1/2+α} and t_{i+1+α}, plus a quadrature oracle for the
//! continuous derivative.

use crate::error::{Error, Result};
use crate::special::gamma_fn;
use crate::spatial::GridSpec;
use crate::weights::{
    a_sequence, full_level_weights, half_level_weights, ASequence, FractionalParams, Level,
};

/// Solution vectors at every half level t_0, t_{1/2}, t_1, …
///
/// Levels are addressed by their doubled index m (level m/2). The δ_t
/// differences are stored alongside as soon as both neighbours exist.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfStepHistory {
    grid: GridSpec,
    values: Vec<f64>,
    deltas: Vec<f64>,
    len: usize,
}

impl HalfStepHistory {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            grid,
            values: Vec::new(),
            deltas: Vec::new(),
            len: 0,
        }
    }

    /// Build from a closure u(m, x) giving the value at doubled level m.
    pub fn from_fn(grid: GridSpec, levels: usize, u: impl Fn(usize, f64) -> f64) -> Self {
        let mut hist = Self::new(grid);
        let x = grid.nodes();
        for m in 0..levels {
            let v: Vec<f64> = x.iter().map(|&x| u(m, x)).collect();
            hist.push_unchecked(v);
        }
        hist
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of stored half levels.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Append the next half level.
    pub fn push(&mut self, level: Vec<f64>) -> Result<()> {
        self.grid.check_vector(&level)?;
        self.push_unchecked(level);
        Ok(())
    }

    fn push_unchecked(&mut self, level: Vec<f64>) {
        let w = self.grid.width();
        if self.len > 0 {
            let scale = 2.0 / self.grid.k();
            let prev = &self.values[(self.len - 1) * w..];
            let d: Vec<f64> = level.iter().zip(prev).map(|(a, b)| (a - b) * scale).collect();
            self.deltas.extend_from_slice(&d);
        }
        self.values.extend_from_slice(&level);
        self.len += 1;
    }

    /// Values at doubled level m.
    pub fn level(&self, m: usize) -> Result<&[f64]> {
        if m >= self.len {
            return Err(Error::MissingLevel {
                wanted: m,
                available: self.len,
            });
        }
        Ok(self.level_unchecked(m))
    }

    pub(crate) fn level_unchecked(&self, m: usize) -> &[f64] {
        let w = self.grid.width();
        &self.values[m * w..(m + 1) * w]
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.len.checked_sub(1).map(|m| self.level_unchecked(m))
    }

    /// δ_t u^{m/2} = (u^{(m+1)/2} − u^{m/2}) / (k/2).
    pub fn delta_t(&self, m: usize) -> Result<&[f64]> {
        if m + 1 >= self.len {
            return Err(Error::MissingLevel {
                wanted: m + 1,
                available: self.len,
            });
        }
        Ok(self.delta_unchecked(m))
    }

    pub(crate) fn delta_unchecked(&self, m: usize) -> &[f64] {
        let w = self.grid.width();
        &self.deltas[m * w..(m + 1) * w]
    }

    /// Levels 0..=2N all present.
    pub fn is_complete(&self) -> bool {
        self.len == 2 * self.grid.n() + 1
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.len < 2 * self.grid.n() + 1 {
            return Err(Error::MissingLevel {
                wanted: 2 * self.grid.n(),
                available: self.len,
            });
        }
        Ok(())
    }

    /// Iterate over (doubled level, values).
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        (0..self.len).map(move |m| (m, self.level_unchecked(m)))
    }
}

/// Σ_{n < upto} a[n] δ_t u^{n/2} added into `out`.
pub(crate) fn accumulate_memory(hist: &HalfStepHistory, a: &[f64], upto: usize, out: &mut [f64]) {
    for (n, &w) in a.iter().enumerate().take(upto) {
        let d = hist.delta_unchecked(n);
        for (o, dv) in out.iter_mut().zip(d) {
            *o += w * dv;
        }
    }
}

fn require_levels(hist: &HalfStepHistory, level: Level) -> Result<()> {
    let need = level.doubled() + 1;
    if hist.len() < need {
        return Err(Error::MissingLevel {
            wanted: level.doubled(),
            available: hist.len(),
        });
    }
    Ok(())
}

/// ᶜΔ^λ u at t_{i+1/2+α}, expanded-weight form. Needs levels 0..=i+1/2.
pub fn discrete_caputo_half(hist: &HalfStepHistory, p: &FractionalParams, i: usize) -> Result<Vec<f64>> {
    require_levels(hist, Level::Half(i))?;
    let c = p.scale(hist.grid().k());
    let w = half_level_weights(p, i).scaled(c);
    let (f, d) = (&w.f_tilde, &w.d_tilde);
    let mut out = vec![0.0; hist.grid().width()];
    let mut add = |coef: f64, m: usize| {
        for (o, dv) in out.iter_mut().zip(hist.delta_unchecked(m)) {
            *o += coef * dv;
        }
    };
    match w.fdot_tilde {
        None => add(f[0], 0),
        Some(fdot) => {
            add(fdot, 0);
            for l in 0..i {
                add(f[l], 2 * l + 2);
                add(d[l] - f[l], 2 * l + 1);
            }
            add(f[i], 2 * i);
        }
    }
    Ok(out)
}

/// ᶜΔ^λ u at t_{i+1+α}, expanded-weight form. Needs levels 0..=i+1.
pub fn discrete_caputo_full(hist: &HalfStepHistory, p: &FractionalParams, i: usize) -> Result<Vec<f64>> {
    require_levels(hist, Level::Full(i))?;
    let c = p.scale(hist.grid().k());
    let w = full_level_weights(p, i).scaled(c);
    let (f, d) = (&w.f_tilde, &w.d_tilde);
    let mut out = vec![0.0; hist.grid().width()];
    let mut add = |coef: f64, m: usize| {
        for (o, dv) in out.iter_mut().zip(hist.delta_unchecked(m)) {
            *o += coef * dv;
        }
    };
    for l in 0..=i {
        add(f[l], 2 * l + 1);
        add(d[l] - f[l], 2 * l);
    }
    add(f[i + 1], 2 * i + 1);
    Ok(out)
}

/// The same operator written as k^{1−λ}/Γ(2−λ) · Σ_l a_{level,l+1/2} δ_t u^l.
pub fn discrete_caputo_aseq(hist: &HalfStepHistory, p: &FractionalParams, level: Level) -> Result<Vec<f64>> {
    require_levels(hist, level)?;
    let a = a_sequence(p, level);
    Ok(apply_aseq(hist, p, &a))
}

pub(crate) fn apply_aseq(hist: &HalfStepHistory, p: &FractionalParams, a: &ASequence) -> Vec<f64> {
    let mut out = vec![0.0; hist.grid().width()];
    accumulate_memory(hist, &a.values, a.values.len(), &mut out);
    let c = p.scale(hist.grid().k());
    out.iter_mut().for_each(|v| *v *= c);
    out
}

const GAUSS_POINTS: usize = 10;
const ORACLE_RTOL: f64 = 1e-8;
const MAX_PANELS: usize = 1 << 18;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// (1/Γ(1−λ)) ∫₀ᵗ f′(τ)(t−τ)^{−λ} dτ by composite Gauss–Legendre.
///
/// The substitution s = (t−τ)^{1−λ} removes the endpoint singularity;
/// uniform panels in s are graded towards τ = t with exponent 1/(1−λ).
/// Panels double from `n_panels` until two successive sums agree to 1e−8
/// relative.
pub fn caputo_quadrature_oracle(
    df: impl Fn(f64) -> f64,
    lambda: f64,
    t: f64,
    n_panels: usize,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("order {lambda} outside (0, 1)")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("oracle needs t > 0, got {t}")));
    }
    let (xs, ws) = gauss_legendre(GAUSS_POINTS);
    let beta = 1.0 / (1.0 - lambda);
    let s_max = t.powf(1.0 - lambda);
    let integrate = |panels: usize| -> f64 {
        let hs = s_max / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * hs;
            let mut sum = 0.0;
            for (x, w) in xs.iter().zip(&ws) {
                let s = mid + 0.5 * hs * x;
                sum += w * df(t - s.powf(beta));
            }
            total += 0.5 * hs * sum;
        }
        total
    };
    let norm = 1.0 / ((1.0 - lambda) * gamma_fn(1.0 - lambda)?);
    let mut panels = n_panels.max(1);
    let mut prev = integrate(panels);
    let mut achieved = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = integrate(panels);
        let diff = (next - prev).abs();
        achieved = if next == 0.0 { diff } else { diff / next.abs() };
        if diff <= ORACLE_RTOL * next.abs() || diff == 0.0 {
            return Ok(norm * next);
        }
        prev = next;
    }
    Err(Error::Quadrature {
        target: ORACLE_RTOL,
        achieved,
    })
}
