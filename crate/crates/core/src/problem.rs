//! Problem definitions: coefficients, source, initial and boundary data and
//! an optional exact solution, plus the two manufactured test problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::caputo::HalfStepHistory;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::special::gamma_fn;
use crate::spatial::{inner_unchecked, GridSpec};

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Fraction of the final time added to the time domain, so coefficients
/// can be evaluated at the shifted times past T.
pub const HORIZON_EXTENSION: f64 = 0.25;

const SIGN_SAMPLES: usize = 64;
const CONSISTENCY_TOL: f64 = 1e-13;

/// cᴰ^λ u − q(t)u_xx + p(t)u_x + g(x,t)u = s(x,t) on (0, L) × (0, T].
#[derive(Clone)]
pub struct Problem {
    name: String,
    length: f64,
    final_time: f64,
    horizon: f64,
    q: TimeFn,
    p: TimeFn,
    g: SpaceTimeFn,
    s: SpaceTimeFn,
    initial: SpaceFn,
    boundary: SpaceTimeFn,
    exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("length", &self.length)
            .field("final_time", &self.final_time)
            .field("horizon", &self.horizon)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn builder(name: impl Into<String>) -> ProblemBuilder {
        ProblemBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// End of the extended time domain [0, T + T/4].
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn q(&self, t: f64) -> f64 {
        (self.q)(t)
    }

    pub fn p(&self, t: f64) -> f64 {
        (self.p)(t)
    }

    pub fn g(&self, x: f64, t: f64) -> f64 {
        (self.g)(x, t)
    }

    pub fn source(&self, x: f64, t: f64) -> f64 {
        (self.s)(x, t)
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    /// Boundary data; used on the two layers next to each end.
    pub fn boundary(&self, x: f64, t: f64) -> f64 {
        (self.boundary)(x, t)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, x: f64, t: f64) -> Result<f64> {
        match &self.exact {
            Some(u) => Ok(u(x, t)),
            None => Err(Error::MissingExact(self.name.clone())),
        }
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon * (1.0 + 1e-12)) {
            return Err(Error::TimeDomain {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// A grid with M space intervals and N time steps over this problem's domain.
    pub fn grid(&self, m: usize, n: usize) -> Result<GridSpec> {
        GridSpec::new(m, n, self.length, self.final_time)
    }

    /// Sample q, p, g on a 64×64 grid of [0, L] × [0, horizon].
    pub fn sign_conditions(&self) -> SignReport {
        let mut r = SignReport {
            q_min: f64::INFINITY,
            p_min: f64::INFINITY,
            g_min: f64::INFINITY,
        };
        for a in 0..SIGN_SAMPLES {
            let t = self.horizon * a as f64 / (SIGN_SAMPLES - 1) as f64;
            r.q_min = r.q_min.min(self.q(t));
            r.p_min = r.p_min.min(self.p(t));
            for b in 0..SIGN_SAMPLES {
                let x = self.length * b as f64 / (SIGN_SAMPLES - 1) as f64;
                r.g_min = r.g_min.min(self.g(x, t));
            }
        }
        r
    }

    /// Exact solution sampled at every half level of `grid`.
    pub fn exact_history(&self, grid: &GridSpec) -> Result<HalfStepHistory> {
        let u = self.exact.as_ref().ok_or_else(|| Error::MissingExact(self.name.clone()))?;
        Ok(HalfStepHistory::from_fn(*grid, 2 * grid.n() + 1, |m, x| {
            u(x, grid.t_half(m))
        }))
    }

    fn check_consistency(&self) -> Result<()> {
        let Some(u) = &self.exact else {
            return Ok(());
        };
        let close = |a: f64, b: f64| (a - b).abs() <= CONSISTENCY_TOL * b.abs().max(1.0);
        for b in 0..=SIGN_SAMPLES {
            let x = self.length * b as f64 / SIGN_SAMPLES as f64;
            if !close(self.initial(x), u(x, 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "initial data disagrees with exact solution at x = {x}"
                )));
            }
        }
        let eighth = self.length / 8.0;
        for a in 0..SIGN_SAMPLES {
            let t = self.horizon * a as f64 / (SIGN_SAMPLES - 1) as f64;
            for b in 0..=8 {
                for x in [eighth * b as f64 / 8.0, self.length - eighth * b as f64 / 8.0] {
                    if !close(self.boundary(x, t), u(x, t)) {
                        return Err(Error::InvalidParameter(format!(
                            "boundary data disagrees with exact solution at x = {x}, t = {t}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sampled minima of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignReport {
    /// Estimate of the lower bound γ of q.
    pub q_min: f64,
    pub p_min: f64,
    /// Estimate of the lower bound β of g.
    pub g_min: f64,
}

impl SignReport {
    /// q > 0, p ≥ 0 and g ≥ 0 at every sample.
    pub fn holds(&self) -> bool {
        self.q_min > 0.0 && self.p_min >= 0.0 && self.g_min >= 0.0
    }
}

pub struct ProblemBuilder {
    name: String,
    length: f64,
    final_time: f64,
    q: TimeFn,
    p: TimeFn,
    g: SpaceTimeFn,
    s: SpaceTimeFn,
    initial: Option<SpaceFn>,
    boundary: Option<SpaceTimeFn>,
    exact: Option<SpaceTimeFn>,
}

impl ProblemBuilder {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            length: 1.0,
            final_time: 1.0,
            q: Arc::new(|_| 1.0),
            p: Arc::new(|_| 0.0),
            g: Arc::new(|_, _| 0.0),
            s: Arc::new(|_, _| 0.0),
            initial: None,
            boundary: None,
            exact: None,
        }
    }

    pub fn length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn final_time(mut self, t: f64) -> Self {
        self.final_time = t;
        self
    }

    pub fn q(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.q = Arc::new(f);
        self
    }

    pub fn p(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.p = Arc::new(f);
        self
    }

    pub fn g(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g = Arc::new(f);
        self
    }

    pub fn source(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.s = Arc::new(f);
        self
    }

    pub fn initial(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.initial = Some(Arc::new(f));
        self
    }

    pub fn boundary(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.boundary = Some(Arc::new(f));
        self
    }

    /// Exact solution; also supplies initial and boundary data when those
    /// are not set explicitly.
    pub fn exact(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(f));
        self
    }

    pub fn build(self) -> Result<Problem> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParameter(format!("domain length {}", self.length)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time {}", self.final_time)));
        }
        let initial = match (self.initial, &self.exact) {
            (Some(f), _) => f,
            (None, Some(u)) => {
                let u = Arc::clone(u);
                Arc::new(move |x| u(x, 0.0))
            }
            (None, None) => {
                return Err(Error::InvalidParameter(format!(
                    "problem `{}` needs initial data or an exact solution",
                    self.name
                )))
            }
        };
        let boundary = match (self.boundary, &self.exact) {
            (Some(f), _) => f,
            (None, Some(u)) => Arc::clone(u),
            (None, None) => {
                return Err(Error::InvalidParameter(format!(
                    "problem `{}` needs boundary data or an exact solution",
                    self.name
                )))
            }
        };
        let prob = Problem {
            name: self.name,
            length: self.length,
            final_time: self.final_time,
            horizon: self.final_time * (1.0 + HORIZON_EXTENSION),
            q: self.q,
            p: self.p,
            g: self.g,
            s: self.s,
            initial,
            boundary,
            exact: self.exact,
        };
        prob.check_consistency()?;
        let signs = prob.sign_conditions();
        if !signs.holds() {
            log::warn!(
                "problem `{}` violates the sign conditions on its sample grid: min q = {:.3e}, min p = {:.3e}, min g = {:.3e}",
                prob.name,
                signs.q_min,
                signs.p_min,
                signs.g_min
            );
        }
        Ok(prob)
    }
}

/// u = t sin x, q = 1, p = 1, g = 0 on (0, 1) × (0, 1].
pub fn example1(lambda: f64) -> Result<Problem> {
    let g2 = gamma_fn(2.0 - lambda)?;
    check_order(lambda)?;
    Problem::builder("example1")
        .q(|_| 1.0)
        .p(|_| 1.0)
        .g(|_, _| 0.0)
        .source(move |x, t| t.powf(1.0 - lambda) * x.sin() / g2 + t * (x.sin() + x.cos()))
        .exact(|x, t| t * x.sin())
        .build()
}

/// u = t² sin πx, q = eᵗ, p = 0, g = 1 − sin 2t on (0, 1) × (0, 1].
pub fn example2(lambda: f64) -> Result<Problem> {
    let g3 = gamma_fn(3.0 - lambda)?;
    check_order(lambda)?;
    Problem::builder("example2")
        .q(f64::exp)
        .p(|_| 0.0)
        .g(|_, t| 1.0 - (2.0 * t).sin())
        .source(move |x, t| {
            let t2 = t * t;
            (PI * PI * t2 * t.exp() + t2 * (1.0 - (2.0 * t).sin()) + 2.0 * t.powf(2.0 - lambda) / g3)
                * (PI * x).sin()
        })
        .exact(|x, t| t * t * (PI * x).sin())
        .build()
}

fn check_order(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional order must lie in (0, 1), got {lambda}"
        )));
    }
    Ok(())
}

/// Problem given by expressions in x, t and lambda.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
pub struct ProblemConfig {
    pub name: Option<String>,
    pub length: Option<f64>,
    pub final_time: Option<f64>,
    pub q: Option<String>,
    pub p: Option<String>,
    pub g: Option<String>,
    pub source: Option<String>,
    pub initial: Option<String>,
    /// Data on both ends.
    pub boundary: Option<String>,
    /// Data on the two left layers (overrides `boundary` there).
    pub boundary_left: Option<String>,
    /// Data on the two right layers.
    pub boundary_right: Option<String>,
    pub exact: Option<String>,
}

impl ProblemConfig {
    pub fn build(&self, lambda: f64) -> Result<Problem> {
        check_order(lambda)?;
        let parse = |key: &str, v: &Option<String>| -> Result<Option<Expr>> {
            v.as_deref()
                .map(|s| Expr::parse(s).map_err(|e| Error::Config(format!("`{key}`: {e}"))))
                .transpose()
        };
        let time_only = |key: &str, e: &Option<Expr>| -> Result<()> {
            match e {
                Some(e) if e.uses(Var::X) => Err(Error::Config(format!("`{key}` may depend on t only"))),
                _ => Ok(()),
            }
        };
        let no_time = |key: &str, e: &Option<Expr>| -> Result<()> {
            match e {
                Some(e) if e.uses(Var::T) => Err(Error::Config(format!("`{key}` may depend on x only"))),
                _ => Ok(()),
            }
        };

        let q = parse("q", &self.q)?;
        let p = parse("p", &self.p)?;
        time_only("q", &q)?;
        time_only("p", &p)?;
        let g = parse("g", &self.g)?;
        let s = parse("source", &self.source)?;
        let initial = parse("initial", &self.initial)?;
        no_time("initial", &initial)?;
        let both = parse("boundary", &self.boundary)?;
        let left = parse("boundary_left", &self.boundary_left)?.or_else(|| both.clone());
        let right = parse("boundary_right", &self.boundary_right)?.or_else(|| both.clone());
        let exact = parse("exact", &self.exact)?;

        let length = self.length.unwrap_or(1.0);
        let mut b = Problem::builder(self.name.clone().unwrap_or_else(|| "config".into()))
            .length(length)
            .final_time(self.final_time.unwrap_or(1.0));
        if let Some(e) = q {
            b = b.q(move |t| e.eval(0.0, t, lambda));
        }
        if let Some(e) = p {
            b = b.p(move |t| e.eval(0.0, t, lambda));
        }
        if let Some(e) = g {
            b = b.g(move |x, t| e.eval(x, t, lambda));
        }
        if let Some(e) = s {
            b = b.source(move |x, t| e.eval(x, t, lambda));
        }
        if let Some(e) = initial {
            b = b.initial(move |x| e.eval(x, 0.0, lambda));
        }
        if let Some(e) = exact {
            b = b.exact(move |x, t| e.eval(x, t, lambda));
        }
        match (left, right) {
            (Some(l), Some(r)) => {
                let mid = length / 2.0;
                b = b.boundary(move |x, t| {
                    if x < mid {
                        l.eval(x, t, lambda)
                    } else {
                        r.eval(x, t, lambda)
                    }
                });
            }
            (None, None) => {}
            _ => {
                return Err(Error::Config(
                    "boundary data must cover both ends (set `boundary` or both sides)".into(),
                ))
            }
        }
        b.build()
    }
}

/// Error norms of a computed history against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// max over half levels of ‖U^l − u(t_l)‖.
    pub linf_l2: f64,
    /// ((k/2) Σ_l ‖U^l − u(t_l)‖²)^{1/2}.
    pub l2_l2: f64,
}

pub fn error_vs_exact(hist: &HalfStepHistory, prob: &Problem) -> Result<ErrorNorms> {
    let u = prob.exact.as_ref().ok_or_else(|| Error::MissingExact(prob.name.clone()))?;
    let grid = hist.grid();
    hist.require_complete()?;
    let (h, k) = (grid.h(), grid.k());
    let x = grid.nodes();
    let mut e = vec![0.0; grid.width()];
    let (mut sum, mut max) = (0.0f64, 0.0f64);
    for (m, level) in hist.iter().skip(1) {
        let t = grid.t_half(m);
        for ((ej, uj), xj) in e.iter_mut().zip(level).zip(&x) {
            *ej = uj - u(*xj, t);
        }
        let n2 = inner_unchecked(h, &e, &e);
        sum += n2;
        max = max.max(n2.sqrt());
    }
    Ok(ErrorNorms {
        linf_l2: max,
        l2_l2: (k / 2.0 * sum).sqrt(),
    })
}
