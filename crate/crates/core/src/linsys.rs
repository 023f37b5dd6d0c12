//! Pentadiagonal systems for the averaged unknowns and a banded LU solver.

use crate::caputo::{accumulate_memory, HalfStepHistory};
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::weights::{ASequence, FractionalParams, Level};

/// A_{r,r+o} stored in `bands[o + 2][r]` for offsets o = −2..=2.
#[derive(Debug, Clone, PartialEq)]
pub struct PentaSystem {
    pub bands: [Vec<f64>; 5],
    pub rhs: Vec<f64>,
}

impl PentaSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            bands: std::array::from_fn(|_| vec![0.0; n]),
            rhs: vec![0.0; n],
        }
    }

    /// Build from a dense matrix, keeping only the five central bands.
    pub fn from_dense(a: &[Vec<f64>], rhs: Vec<f64>) -> Result<Self> {
        let n = rhs.len();
        let mut sys = Self::zeros(n);
        for (r, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for o in -2i64..=2 {
                let c = r as i64 + o;
                if (0..n as i64).contains(&c) {
                    sys.bands[(o + 2) as usize][r] = row[c as usize];
                }
            }
        }
        sys.rhs = rhs;
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// A_{r,c}; zero outside the band or the matrix.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let o = c as i64 - r as i64;
        if !(-2..=2).contains(&o) || r >= self.n() || c >= self.n() {
            return 0.0;
        }
        self.bands[(o + 2) as usize][r]
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n).map(|r| (0..n).map(|c| self.get(r, c)).collect()).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|r| {
                let lo = r.saturating_sub(2);
                let hi = (r + 2).min(n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }

    /// ‖A‖∞
    pub fn norm_inf(&self) -> f64 {
        (0..self.n())
            .map(|r| (0..5).map(|b| self.bands[b][r].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// ‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r = ax.iter().zip(&self.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let xn = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let bn = self.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let denom = self.norm_inf() * xn + bn;
        if denom == 0.0 {
            r
        } else {
            r / denom
        }
    }

    /// |A_rr| > Σ_{c≠r} |A_rc| for every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.n()).all(|r| {
            let off: f64 = [0, 1, 3, 4].iter().map(|&b| self.bands[b][r].abs()).sum();
            self.bands[2][r].abs() > off
        })
    }

    /// Entries outside the matrix are zero.
    pub fn bands_clean(&self) -> bool {
        let n = self.n();
        (0..5).all(|b| {
            (0..n).all(|r| {
                let c = r as i64 + b as i64 - 2;
                (0..n as i64).contains(&c) || self.bands[b][r] == 0.0
            })
        })
    }
}

/// Solve by banded Gaussian elimination with partial pivoting.
///
/// Row swaps can widen the upper band to four; the working storage holds
/// columns r−2..=r+4 of each row.
pub fn solve_penta(sys: &PentaSystem) -> Result<Vec<f64>> {
    const W: usize = 7;
    let n = sys.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty system".into()));
    }
    for b in &sys.bands {
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
    }
    // a[r*W + (c + 2 - r)] = A_{r,c}
    let mut a = vec![0.0; n * W];
    for r in 0..n {
        for b in 0..5 {
            let c = r as i64 + b as i64 - 2;
            if (0..n as i64).contains(&c) {
                a[r * W + b] = sys.bands[b][r];
            }
        }
    }
    let at = |r: usize, c: usize| r * W + c + 2 - r;
    let mut x = sys.rhs.clone();
    let tiny = sys.norm_inf() * f64::EPSILON * n as f64;

    for k in 0..n {
        let last = (k + 2).min(n - 1);
        let mut piv = k;
        for r in k + 1..=last {
            if a[at(r, k)].abs() > a[at(piv, k)].abs() {
                piv = r;
            }
        }
        let pv = a[at(piv, k)];
        if !pv.is_finite() || pv.abs() <= tiny {
            return Err(Error::SingularMatrix { row: k, step: None });
        }
        let cmax = (k + 4).min(n - 1);
        if piv != k {
            for c in k..=cmax {
                let (i, j) = (at(k, c), at(piv, c));
                a.swap(i, j);
            }
            x.swap(k, piv);
        }
        for r in k + 1..=last {
            let l = a[at(r, k)] / a[at(k, k)];
            if l == 0.0 {
                continue;
            }
            a[at(r, k)] = 0.0;
            for c in k + 1..=cmax {
                a[at(r, c)] -= l * a[at(k, c)];
            }
            x[r] -= l * x[k];
        }
    }
    for k in (0..n).rev() {
        let cmax = (k + 4).min(n - 1);
        let mut s = x[k];
        for c in k + 1..=cmax {
            s -= a[at(k, c)] * x[c];
        }
        x[k] = s / a[at(k, k)];
    }
    Ok(x)
}

/// Assembled system together with the data needed to recover the level.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub system: PentaSystem,
    /// Averaged values (1+2α)ψ − 2αU^{prev} at j = 0, 1, M−1, M.
    pub boundary_avg: [f64; 4],
    /// Boundary data at the new level, j = 0, 1, M−1, M.
    pub boundary_new: [f64; 4],
}

/// System at t_{i+1/2+α} in the unknowns U^{α_i}_j = (1+2α)U^{i+1/2}_j − 2αU^i_j,
/// j = 2..=M−2. `a` is the (unscaled) a-sequence of `Level::Half(i)`.
pub fn assemble_half(
    prob: &Problem,
    p: &FractionalParams,
    i: usize,
    a: &ASequence,
    hist: &HalfStepHistory,
) -> Result<Assembled> {
    assemble(prob, p, Level::Half(i), a, hist)
}

/// System at t_{i+1+α} in U^{θ_i}_j = (1+2α)U^{i+1}_j − 2αU^{i+1/2}_j.
pub fn assemble_full(
    prob: &Problem,
    p: &FractionalParams,
    i: usize,
    a: &ASequence,
    hist: &HalfStepHistory,
) -> Result<Assembled> {
    assemble(prob, p, Level::Full(i), a, hist)
}

pub(crate) fn assemble(
    prob: &Problem,
    p: &FractionalParams,
    level: Level,
    a: &ASequence,
    hist: &HalfStepHistory,
) -> Result<Assembled> {
    if a.level != level || a.values.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "a-sequence for level {} passed to assembly at level {level}",
            a.level
        )));
    }
    let new = level.doubled();
    let prev = new - 1;
    if hist.len() < new {
        return Err(Error::MissingLevel {
            wanted: prev,
            available: hist.len(),
        });
    }
    let grid = *hist.grid();
    let (mm, h, k) = (grid.m(), grid.h(), grid.k());
    let alpha = p.alpha();
    let c = p.scale(k);
    let t_eval = (level.value() + alpha) * k;
    let t_new = grid.t_half(new);
    prob.check_time(t_eval)?;

    let u_prev = hist.level_unchecked(prev);
    let last = a.values.len() - 1;
    let fsum = c * a.values[last];
    let mut memory = vec![0.0; grid.width()];
    accumulate_memory(hist, &a.values, last, &mut memory);
    memory.iter_mut().for_each(|v| *v *= c);

    let q = prob.q(t_eval);
    let pc = prob.p(t_eval);
    for (what, v) in [("q", q), ("p", pc)] {
        if !v.is_finite() {
            return Err(Error::NonFinite { what, x: 0.0, t: t_eval });
        }
    }
    let w = 1.0 + 2.0 * alpha;
    let cc = w * k / (24.0 * h * h);
    let off = [
        cc * (q + h * pc),
        -cc * (16.0 * q + 8.0 * h * pc),
        0.0,
        -cc * (16.0 * q - 8.0 * h * pc),
        cc * (q - h * pc),
    ];

    let bd_idx = [0, 1, mm - 1, mm];
    let mut boundary_new = [0.0; 4];
    let mut boundary_avg = [0.0; 4];
    for (n, &j) in bd_idx.iter().enumerate() {
        let v = prob.boundary(grid.x(j), t_new);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "boundary data", x: grid.x(j), t: t_new });
        }
        boundary_new[n] = v;
        boundary_avg[n] = w * v - 2.0 * alpha * u_prev[j];
    }
    let bd_avg = |j: usize| -> f64 {
        match j {
            0 => boundary_avg[0],
            1 => boundary_avg[1],
            j if j == mm - 1 => boundary_avg[2],
            _ => boundary_avg[3],
        }
    };

    let n = mm - 3;
    let mut sys = PentaSystem::zeros(n);
    for (r, j) in grid.interior().enumerate() {
        let x = grid.x(j);
        let g = prob.g(x, t_eval);
        let s = prob.source(x, t_eval);
        if !g.is_finite() {
            return Err(Error::NonFinite { what: "g", x, t: t_eval });
        }
        if !s.is_finite() {
            return Err(Error::NonFinite { what: "source", x, t: t_eval });
        }
        sys.bands[2][r] = fsum + cc * (30.0 * q + 12.0 * h * h * g);
        let mut rhs = fsum * u_prev[j] - w * k / 2.0 * (memory[j] - s);
        for (b, &coef) in off.iter().enumerate() {
            if b == 2 {
                continue;
            }
            let jj = j + b - 2;
            if (2..=mm - 2).contains(&jj) {
                sys.bands[b][r] = coef;
            } else {
                rhs -= coef * bd_avg(jj);
            }
        }
        sys.rhs[r] = rhs;
    }
    Ok(Assembled {
        system: sys,
        boundary_avg,
        boundary_new,
    })
}
