//! Convergence studies over refined meshes, CSV reports and SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::problem::{error_vs_exact, example1, example2, Problem, ProblemConfig};
use crate::spatial::{linf_l2_norm, space_time_l2_norm};
use crate::stepper::run;
use crate::weights::FractionalParams;

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Example1,
    Example2,
    Config(ProblemConfig),
}

impl ProblemSource {
    pub fn build(&self, lambda: f64) -> Result<Problem> {
        match self {
            ProblemSource::Example1 => example1(lambda),
            ProblemSource::Example2 => example2(lambda),
            ProblemSource::Config(c) => c.build(lambda),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::Example1 => "example1".into(),
            ProblemSource::Example2 => "example2".into(),
            ProblemSource::Config(c) => c.name.clone().unwrap_or_else(|| "config".into()),
        }
    }
}

/// How the time step follows the mesh size.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// k = h^{4/(2−λ/2)}, snapped up to k = T/N.
    TimeCoupled,
    /// Explicit time steps: one per level, one for all levels, or, with a
    /// single level, one row per time step.
    Independent(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// ((k/2) Σ_l ‖E^l‖²)^{1/2}
    #[default]
    L2L2,
    /// max_l ‖E^l‖
    LinfL2,
}

impl std::str::FromStr for ErrorNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2-l2" | "l2" => Ok(ErrorNorm::L2L2),
            "linf-l2" | "linf" => Ok(ErrorNorm::LinfL2),
            _ => Err(Error::Config(format!("unknown norm `{s}` (use l2-l2 or linf-l2)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemSource,
    pub lambda: f64,
    /// Refinement exponents l, h = L·2^{−l}; strictly increasing.
    pub levels: Vec<u32>,
    pub coupling: Coupling,
    pub norm: ErrorNorm,
    /// Stop after the first level whose error falls below this value,
    /// provided at least one rate has been measured. Levels then run in
    /// order instead of concurrently.
    pub stop_below: Option<f64>,
}

impl StudyConfig {
    pub fn new(problem: ProblemSource, lambda: f64, levels: Vec<u32>) -> Self {
        Self {
            problem,
            lambda,
            levels,
            coupling: Coupling::TimeCoupled,
            norm: ErrorNorm::L2L2,
            stop_below: None,
        }
    }

    pub fn with_coupling(mut self, c: Coupling) -> Self {
        self.coupling = c;
        self
    }

    pub fn with_norm(mut self, n: ErrorNorm) -> Self {
        self.norm = n;
        self
    }

    pub fn with_stop_below(mut self, tol: f64) -> Self {
        self.stop_below = Some(tol);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Config("no refinement levels given".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "levels must be strictly increasing, got {:?}",
                self.levels
            )));
        }
        if let Some(&l) = self.levels.iter().find(|&&l| !(2..=20).contains(&l)) {
            return Err(Error::Config(format!("level {l} outside 2..=20")));
        }
        if let Coupling::Independent(ks) = &self.coupling {
            if ks.is_empty() || ks.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
                return Err(Error::Config(format!("time steps must be positive, got {ks:?}")));
            }
            let ok = ks.len() == 1 || ks.len() == self.levels.len() || self.levels.len() == 1;
            if !ok {
                return Err(Error::Config(format!(
                    "{} time steps do not match {} levels",
                    ks.len(),
                    self.levels.len()
                )));
            }
        }
        FractionalParams::new(self.lambda).map(|_| ())
    }
}

/// k = h^{4/(2−λ/2)}.
pub fn coupled_time_step(h: f64, lambda: f64) -> f64 {
    h.powf(4.0 / (2.0 - lambda / 2.0))
}

/// Smallest N with T/N ≤ k.
pub fn snap_steps(final_time: f64, k: f64) -> usize {
    ((final_time / k) - 1e-9).ceil().max(1.0) as usize
}

/// (M, N) pairs the study will run, coarse to fine.
pub fn plan_meshes(cfg: &StudyConfig, prob: &Problem) -> Result<Vec<(usize, usize)>> {
    cfg.validate()?;
    let t = prob.final_time();
    let ms: Vec<usize> = cfg.levels.iter().map(|&l| 1usize << l).collect();
    Ok(match &cfg.coupling {
        Coupling::TimeCoupled => ms
            .iter()
            .map(|&m| {
                let h = prob.length() / m as f64;
                (m, snap_steps(t, coupled_time_step(h, cfg.lambda)))
            })
            .collect(),
        Coupling::Independent(ks) => {
            let steps: Vec<usize> = ks.iter().map(|&k| snap_steps(t, k)).collect();
            if ms.len() == 1 {
                steps.iter().map(|&n| (ms[0], n)).collect()
            } else if steps.len() == 1 {
                ms.iter().map(|&m| (m, steps[0])).collect()
            } else {
                ms.into_iter().zip(steps).collect()
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub h: f64,
    pub k: f64,
    pub m: usize,
    pub n: usize,
    /// Norm of the sampled exact solution (same norm as `error`).
    pub exact_norm: Option<f64>,
    pub numeric_norm: Option<f64>,
    /// Error in the study's norm.
    pub error: Option<f64>,
    pub linf_l2: Option<f64>,
    pub l2_l2: Option<f64>,
    /// log2(error_{r−1}/error_r); absent in the first row.
    pub rate: Option<f64>,
    pub wall_seconds: f64,
    pub stability_violations: usize,
    pub max_residual: f64,
    pub failure: Option<String>,
}

/// Exact and computed values at t = T on the finest completed mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub exact: Option<Vec<f64>>,
    pub numeric: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub lambda: f64,
    pub norm: ErrorNorm,
    pub rows: Vec<ReportRow>,
    pub profile: Option<Profile>,
}

impl ConvergenceReport {
    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    pub fn errors(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.failure.is_some())
    }

    /// Plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem {} lambda {}", self.problem, self.lambda);
        let _ = writeln!(
            s,
            "{:>10} {:>11} {:>7} {:>12} {:>12} {:>12} {:>8} {:>9}",
            "h", "k", "N", "exact_norm", "numeric", "error", "rate", "seconds"
        );
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.5e}"));
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>10.4e} {:>11.4e} {:>7} {:>12} {:>12} {:>12} {:>8} {:>9.2}{}",
                r.h,
                r.k,
                r.n,
                opt(r.exact_norm),
                opt(r.numeric_norm),
                opt(r.error),
                r.rate.map_or_else(|| "-".to_string(), |v| format!("{v:.4}")),
                r.wall_seconds,
                r.failure.as_deref().map(|f| format!("  FAILED: {f}")).unwrap_or_default()
            );
        }
        s
    }
}

fn run_level(prob: &Problem, params: FractionalParams, norm: ErrorNorm, m: usize, n: usize) -> (ReportRow, Option<Profile>) {
    let start = Instant::now();
    let mut row = ReportRow {
        h: prob.length() / m as f64,
        k: prob.final_time() / n as f64,
        m,
        n,
        exact_norm: None,
        numeric_norm: None,
        error: None,
        linf_l2: None,
        l2_l2: None,
        rate: None,
        wall_seconds: 0.0,
        stability_violations: 0,
        max_residual: 0.0,
        failure: None,
    };
    let grid = match prob.grid(m, n) {
        Ok(g) => g,
        Err(e) => {
            row.failure = Some(e.to_string());
            return (row, None);
        }
    };
    let out = match run(prob, grid, params) {
        Ok(o) => o,
        Err(f) => {
            log::error!("level M={m}, N={n}: {f}");
            row.failure = Some(f.to_string());
            row.wall_seconds = start.elapsed().as_secs_f64();
            return (row, None);
        }
    };
    let hist = &out.history;
    row.stability_violations = out.diagnostics.stability_violations();
    row.max_residual = out.diagnostics.max_residual();
    let pick = |h: &crate::caputo::HalfStepHistory| match norm {
        ErrorNorm::L2L2 => space_time_l2_norm(h),
        ErrorNorm::LinfL2 => linf_l2_norm(h),
    };
    row.numeric_norm = pick(hist).ok();
    let x = grid.nodes();
    let mut profile = Profile {
        x: x.clone(),
        exact: None,
        numeric: hist.last().map(<[f64]>::to_vec).unwrap_or_default(),
    };
    if prob.has_exact() {
        if let Ok(ex) = prob.exact_history(&grid) {
            row.exact_norm = pick(&ex).ok();
            profile.exact = ex.last().map(<[f64]>::to_vec);
        }
        match error_vs_exact(hist, prob) {
            Ok(e) => {
                row.linf_l2 = Some(e.linf_l2);
                row.l2_l2 = Some(e.l2_l2);
                row.error = Some(match norm {
                    ErrorNorm::L2L2 => e.l2_l2,
                    ErrorNorm::LinfL2 => e.linf_l2,
                });
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
    }
    row.wall_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "M={m} N={n}: error {:?} in {:.2}s",
        row.error,
        row.wall_seconds
    );
    (row, Some(profile))
}

fn fill_rates(rows: &mut [ReportRow]) {
    for r in 1..rows.len() {
        rows[r].rate = match (rows[r - 1].error, rows[r].error) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
            _ => None,
        };
    }
}

/// Run one solve per mesh. Configuration problems are errors; solver
/// failures are recorded in their row and the study carries on.
pub fn run_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    let prob = cfg.problem.build(cfg.lambda)?;
    let params = FractionalParams::new(cfg.lambda)?;
    let meshes = plan_meshes(cfg, &prob)?;
    let signs = prob.sign_conditions();
    if !signs.holds() {
        log::warn!("sign conditions fail on the sample grid: {signs:?}");
    }

    let results: Vec<(ReportRow, Option<Profile>)> = match cfg.stop_below {
        None => meshes
            .par_iter()
            .map(|&(m, n)| run_level(&prob, params, cfg.norm, m, n))
            .collect(),
        Some(tol) => {
            let mut out: Vec<(ReportRow, Option<Profile>)> = Vec::new();
            for &(m, n) in &meshes {
                out.push(run_level(&prob, params, cfg.norm, m, n));
                let errs: Vec<f64> = out.iter().filter_map(|(r, _)| r.error).collect();
                if errs.len() >= 2 && errs.last().is_some_and(|&e| e < tol) {
                    break;
                }
            }
            out
        }
    };
    let mut rows = Vec::with_capacity(results.len());
    let mut profile = None;
    for (row, p) in results {
        if p.is_some() && row.failure.is_none() {
            profile = p;
        }
        rows.push(row);
    }
    fill_rates(&mut rows);
    Ok(ConvergenceReport {
        problem: cfg.problem.label(),
        lambda: cfg.lambda,
        norm: cfg.norm,
        rows,
        profile,
    })
}

/// Least-squares slope of log2(y) against log2(x).
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn sci(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.5e}")).unwrap_or_default()
}

/// Header `h,k,exact_norm,numeric_norm,error,rate`, six significant digits.
pub fn emit_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter("empty report".into()));
    }
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["h", "k", "exact_norm", "numeric_norm", "error", "rate"])
        .map_err(io)?;
    for r in &report.rows {
        w.write_record([
            sci(Some(r.h)),
            sci(Some(r.k)),
            sci(r.exact_norm),
            sci(r.numeric_norm),
            sci(r.error),
            sci(r.rate),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const SVG_W: f64 = 960.0;
const SVG_H: f64 = 420.0;
const PANEL: f64 = 400.0;
const PAD: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

/// Two panels: log2(h) against log2(error) with a slope-4 reference line,
/// and exact/computed solutions at t = T on the finest mesh.
pub fn emit_plot(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter_map(|r| r.error.filter(|e| *e > 0.0).map(|e| (r.h, e)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Plot(format!(
            "log-log panel needs at least two rows with errors, got {}",
            pts.len()
        )));
    }
    // With a fixed mesh the interesting abscissa is k.
    let use_k = pts.iter().all(|p| p.0 == pts[0].0);
    let pts: Vec<(f64, f64)> = if use_k {
        report
            .rows
            .iter()
            .filter_map(|r| r.error.filter(|e| *e > 0.0).map(|e| (r.k, e)))
            .collect()
    } else {
        pts
    };
    let lp: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (x.log2(), y.log2())).collect();
    let (x0, y0) = lp[0];
    let x1 = lp[lp.len() - 1].0;
    let reference = [(x0, y0), (x1, y0 + 4.0 * (x1 - x0))];
    let ax = Axis::fit(lp.iter().map(|p| p.0));
    let ay = Axis::fit(lp.iter().map(|p| p.1).chain(reference.iter().map(|p| p.1)));
    let (left, top) = (PAD, 10.0);
    let px = |x: f64| ax.map(x, left, left + PANEL - PAD);
    let py = |y: f64| ay.map(y, top + PANEL - PAD, top);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g id="convergence">"#);
    frame(&mut s, left, top, &ax, &ay, if use_k { "log2 k" } else { "log2 h" }, "log2 error");
    let poly: Vec<String> = lp.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline class="data-line" points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        poly.join(" ")
    );
    for &(x, y) in &lp {
        let _ = writeln!(
            s,
            r#"<circle class="data-point" cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#,
            px(x),
            py(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        px(reference[0].0),
        py(reference[0].1),
        px(reference[1].0),
        py(reference[1].1)
    );
    let slope = fit_slope(&pts).unwrap_or(f64::NAN);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">fitted slope {slope:.3}; dashed: slope 4</text>"#,
        left + 10.0,
        top + 16.0
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="profile">"#);
    let left = PANEL + 2.0 * PAD;
    match &report.profile {
        Some(p) if !p.x.is_empty() => {
            let ax = Axis::fit(p.x.iter().copied());
            let ay = Axis::fit(
                p.numeric
                    .iter()
                    .chain(p.exact.iter().flatten())
                    .copied(),
            );
            frame(&mut s, left, top, &ax, &ay, "x", "u(x, T)");
            let line = |vals: &[f64]| -> String {
                p.x.iter()
                    .zip(vals)
                    .map(|(&x, &y)| {
                        format!(
                            "{:.2},{:.2}",
                            ax.map(x, left, left + PANEL - PAD),
                            ay.map(y, top + PANEL - PAD, top)
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            if let Some(ex) = &p.exact {
                let _ = writeln!(
                    s,
                    r#"<polyline class="exact" points="{}" fill="none" stroke="green" stroke-width="2"/>"#,
                    line(ex)
                );
            }
            let _ = writeln!(
                s,
                r#"<polyline class="numeric" points="{}" fill="none" stroke="blue" stroke-dasharray="4 3" stroke-width="1.5"/>"#,
                line(&p.numeric)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">exact (green), computed (blue)</text>"#,
                left + 10.0,
                top + 16.0
            );
        }
        _ => {
            let _ = writeln!(s, r#"<text x="{left}" y="40">no solution profile</text>"#);
        }
    }
    let _ = writeln!(s, "</g>\n</svg>");
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn frame(s: &mut String, left: f64, top: f64, ax: &Axis, ay: &Axis, xlabel: &str, ylabel: &str) {
    let (right, bottom) = (left + PANEL - PAD, top + PANEL - PAD);
    let _ = writeln!(
        s,
        r#"<path class="axis" d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
    );
    for n in 0..=4 {
        let f = n as f64 / 4.0;
        let xv = ax.lo + f * (ax.hi - ax.lo);
        let yv = ay.lo + f * (ay.hi - ay.lo);
        let x = left + f * (right - left);
        let y = bottom - f * (bottom - top);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#, bottom + 16.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{yv:.2}</text>"#, left - 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#,
        (left + right) / 2.0,
        bottom + 34.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
        left - 44.0,
        (top + bottom) / 2.0,
        left - 44.0,
        (top + bottom) / 2.0
    );
}

/// Levels written as `3..6`, `3..=6` (both inclusive) or `3,4,5`.
pub fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::Config(format!("cannot read levels `{s}`"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.trim_start_matches('=');
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum LevelsSpec {
    Range(String),
    List(Vec<u32>),
}

/// Contents of a study config file: problem expressions plus any study
/// fields. Command-line values take precedence over the file.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
pub struct StudyFile {
    pub lambda: Option<f64>,
    pub levels: Option<LevelsSpec>,
    pub couple_time: Option<bool>,
    pub k: Option<Vec<f64>>,
    pub norm: Option<String>,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    #[serde(flatten)]
    pub problem: ProblemConfig,
}

impl StudyFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn levels(&self) -> Result<Option<Vec<u32>>> {
        match &self.levels {
            None => Ok(None),
            Some(LevelsSpec::Range(s)) => parse_levels(s).map(Some),
            Some(LevelsSpec::List(v)) => Ok(Some(v.clone())),
        }
    }
}
