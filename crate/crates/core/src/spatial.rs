//! Uniform mesh, five-point fourth-order stencils, the discrete spatial
//! operator L_h and the discrete L² norms.

use crate::caputo::HalfStepHistory;
use crate::error::{Error, Result};
use crate::problem::Problem;

/// Uniform space-time mesh x_j = jh (j = 0..=M), t_i = ik (i = 0..=N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    m: usize,
    n: usize,
    length: f64,
    final_time: f64,
}

impl GridSpec {
    pub fn new(m: usize, n: usize, length: f64, final_time: f64) -> Result<Self> {
        if m < 4 {
            return Err(Error::InvalidParameter(format!(
                "need at least 4 space intervals for the five-point stencil, got {m}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one time step".into()));
        }
        if !(length > 0.0 && length.is_finite()) || !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "domain length and final time must be positive and finite (got {length}, {final_time})"
            )));
        }
        Ok(Self {
            m,
            n,
            length,
            final_time,
        })
    }

    /// Number of space intervals M.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of time steps N.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn h(&self) -> f64 {
        self.length / self.m as f64
    }

    pub fn k(&self) -> f64 {
        self.final_time / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m).map(|j| self.x(j)).collect()
    }

    /// Time of the half level with doubled index `m` (t_{m/2}).
    pub fn t_half(&self, m: usize) -> f64 {
        m as f64 * self.k() / 2.0
    }

    /// Entries per grid vector (M + 1).
    pub fn width(&self) -> usize {
        self.m + 1
    }

    /// Interior unknowns of the linear systems, j = 2..=M−2.
    pub fn interior(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.m - 2
    }

    pub(crate) fn check_vector(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                got: u.len(),
            });
        }
        Ok(())
    }

    fn check_stencil(&self, u: &[f64], j: usize) -> Result<()> {
        self.check_vector(u)?;
        if j < 2 || j > self.m - 2 {
            return Err(Error::StencilRange { j, max: self.m - 2 });
        }
        Ok(())
    }
}

/// (−u_{j+2} + 16u_{j+1} − 30u_j + 16u_{j−1} − u_{j−2}) / (12h²)
pub fn stencil_dxx4(grid: &GridSpec, u: &[f64], j: usize) -> Result<f64> {
    grid.check_stencil(u, j)?;
    Ok(dxx4(u, j, grid.h()))
}

/// (−u_{j+2} + 8u_{j+1} − 8u_{j−1} + u_{j−2}) / (12h)
pub fn stencil_dx4(grid: &GridSpec, u: &[f64], j: usize) -> Result<f64> {
    grid.check_stencil(u, j)?;
    Ok(dx4(u, j, grid.h()))
}

#[inline]
fn dxx4(u: &[f64], j: usize, h: f64) -> f64 {
    (-u[j + 2] + 16.0 * u[j + 1] - 30.0 * u[j] + 16.0 * u[j - 1] - u[j - 2]) / (12.0 * h * h)
}

#[inline]
fn dx4(u: &[f64], j: usize, h: f64) -> f64 {
    (-u[j + 2] + 8.0 * u[j + 1] - 8.0 * u[j - 1] + u[j - 2]) / (12.0 * h)
}

/// L_h u = q·dxx4 − p·dx4 − g·u at j = 2..=M−2 (returned in that order).
pub fn apply_lh(grid: &GridSpec, u: &[f64], prob: &Problem, t: f64) -> Result<Vec<f64>> {
    grid.check_vector(u)?;
    prob.check_time(t)?;
    let h = grid.h();
    let q = prob.q(t);
    let p = prob.p(t);
    grid.interior()
        .map(|j| {
            let x = grid.x(j);
            let g = prob.g(x, t);
            let v = q * dxx4(u, j, h) - p * dx4(u, j, h) - g * u[j];
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { what: "L_h u", x, t })
            }
        })
        .collect()
}

/// Discrete inner product h Σ_{j=1}^{M−1} u_j v_j (boundary nodes excluded).
pub fn inner(grid: &GridSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    grid.check_vector(u)?;
    grid.check_vector(v)?;
    Ok(inner_unchecked(grid.h(), u, v))
}

pub fn l2_norm(grid: &GridSpec, u: &[f64]) -> Result<f64> {
    inner(grid, u, u).map(f64::sqrt)
}

pub(crate) fn inner_unchecked(h: f64, u: &[f64], v: &[f64]) -> f64 {
    let m = u.len() - 1;
    h * (1..m).map(|j| u[j] * v[j]).sum::<f64>()
}

/// ((k/2) Σ_{l=1/2,1,…,N} ‖u^l‖²)^{1/2} over a complete history.
pub fn space_time_l2_norm(hist: &HalfStepHistory) -> Result<f64> {
    let grid = hist.grid();
    hist.require_complete()?;
    let h = grid.h();
    let sum: f64 = (1..hist.len())
        .map(|m| {
            let u = hist.level_unchecked(m);
            inner_unchecked(h, u, u)
        })
        .sum();
    Ok((grid.k() / 2.0 * sum).sqrt())
}

/// max_{l=1/2,…,N} ‖u^l‖ over a complete history.
pub fn linf_l2_norm(hist: &HalfStepHistory) -> Result<f64> {
    let grid = hist.grid();
    hist.require_complete()?;
    let h = grid.h();
    Ok((1..hist.len())
        .map(|m| {
            let u = hist.level_unchecked(m);
            inner_unchecked(h, u, u).sqrt()
        })
        .fold(0.0, f64::max))
}
