//! Caputo discretization weights d̃, f̃, ḟ̃, the combined a-sequences and
//! the inequality checks that go with them.
//!
//! All tilde weights are dimensionless; multiply by
//! [`FractionalParams::scale`] (k^{1−λ}/Γ(2−λ)) to get the weights that act
//! on δ_t differences.

use std::fmt;

use crate::error::{Error, Result};
use crate::special::gamma_fn;

/// Fractional order λ and the derived shift α = 1 − λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    lambda: f64,
    alpha: f64,
    gamma_2ml: f64,
}

impl FractionalParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order must lie in (0, 1), got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            alpha: 1.0 - lambda,
            gamma_2ml: gamma_fn(2.0 - lambda)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Γ(2 − λ).
    pub fn gamma_2ml(&self) -> f64 {
        self.gamma_2ml
    }

    /// k^{1−λ}/Γ(2−λ), the factor between tilde and scaled weights.
    pub fn scale(&self, k: f64) -> f64 {
        pow(k, 1.0 - self.lambda) / self.gamma_2ml
    }

    /// Whether the weight inequalities are expected to hold (λ < 2/3).
    pub fn lemma_applies(&self) -> bool {
        self.lambda < 2.0 / 3.0
    }
}

#[inline]
fn pow(base: f64, e: f64) -> f64 {
    debug_assert!(base > 0.0, "power base must be positive, got {base}");
    (e * base.ln()).exp()
}

/// (d̃, f̃) of one interval [B, A] with A − B = 1.
#[inline]
fn interval_pair(lambda: f64, a: f64) -> (f64, f64) {
    let b = a - 1.0;
    let e1 = 1.0 - lambda;
    let e2 = 2.0 - lambda;
    let (pa1, pb1) = (pow(a, e1), pow(b, e1));
    let d = pa1 - pb1;
    let f = 2.0 / e2 * (pow(a, e2) - pow(b, e2)) - 0.5 * (pa1 + 3.0 * pb1);
    (d, f)
}

/// Weights of the operator at t_{i+1/2+α}.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLevelWeights {
    pub i: usize,
    /// f̃_{i+1/2,l}, l = 0..=i.
    pub f_tilde: Vec<f64>,
    /// d̃_{i+1/2,l}, l = 0..i.
    pub d_tilde: Vec<f64>,
    /// ḟ̃_{i+1/2,0}; `None` for i = 0.
    pub fdot_tilde: Option<f64>,
}

/// Weights of the operator at t_{i+1+α}.
#[derive(Debug, Clone, PartialEq)]
pub struct FullLevelWeights {
    pub i: usize,
    /// f̃_{i+1,l}, l = 0..=i+1.
    pub f_tilde: Vec<f64>,
    /// d̃_{i+1,l}, l = 0..=i.
    pub d_tilde: Vec<f64>,
}

pub fn half_level_weights(p: &FractionalParams, i: usize) -> HalfLevelWeights {
    let (lambda, alpha) = (p.lambda, p.alpha);
    if i == 0 {
        return HalfLevelWeights {
            i,
            f_tilde: vec![pow(0.5 + alpha, 1.0 - lambda)],
            d_tilde: Vec::new(),
            fdot_tilde: None,
        };
    }
    let mut f_tilde = Vec::with_capacity(i + 1);
    let mut d_tilde = Vec::with_capacity(i);
    for l in 0..i {
        let (d, f) = interval_pair(lambda, (i - l) as f64 + alpha);
        d_tilde.push(d);
        f_tilde.push(f);
    }
    f_tilde.push(pow(alpha, 1.0 - lambda));
    let fi = i as f64;
    let fdot = pow(fi + 0.5 + alpha, 1.0 - lambda) - pow(fi + alpha, 1.0 - lambda);
    HalfLevelWeights {
        i,
        f_tilde,
        d_tilde,
        fdot_tilde: Some(fdot),
    }
}

pub fn full_level_weights(p: &FractionalParams, i: usize) -> FullLevelWeights {
    let (lambda, alpha) = (p.lambda, p.alpha);
    let mut f_tilde = Vec::with_capacity(i + 2);
    let mut d_tilde = Vec::with_capacity(i + 1);
    for l in 0..=i {
        let (d, f) = interval_pair(lambda, (i + 1 - l) as f64 + alpha);
        d_tilde.push(d);
        f_tilde.push(f);
    }
    f_tilde.push(pow(alpha, 1.0 - lambda));
    FullLevelWeights { i, f_tilde, d_tilde }
}

impl HalfLevelWeights {
    /// Multiply every weight by `c` (normally [`FractionalParams::scale`]).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            i: self.i,
            f_tilde: self.f_tilde.iter().map(|w| c * w).collect(),
            d_tilde: self.d_tilde.iter().map(|w| c * w).collect(),
            fdot_tilde: self.fdot_tilde.map(|w| c * w),
        }
    }
}

impl FullLevelWeights {
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            i: self.i,
            f_tilde: self.f_tilde.iter().map(|w| c * w).collect(),
            d_tilde: self.d_tilde.iter().map(|w| c * w).collect(),
        }
    }
}

/// A time level at which the discrete operator is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// t_{i+1/2}
    Half(usize),
    /// t_{i+1}
    Full(usize),
}

impl Level {
    /// Twice the level value, e.g. `Half(2)` → 5.
    pub fn doubled(self) -> usize {
        match self {
            Level::Half(i) => 2 * i + 1,
            Level::Full(i) => 2 * i + 2,
        }
    }

    pub fn value(self) -> f64 {
        self.doubled() as f64 / 2.0
    }

    pub fn step(self) -> usize {
        match self {
            Level::Half(i) | Level::Full(i) => i,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Half(i) => write!(f, "{i}+1/2"),
            Level::Full(i) => write!(f, "{}", i + 1),
        }
    }
}

/// Combined weights a_{level,l}, l = 1/2, 1, …, level.
///
/// `values[n]` is a_{level,(n+1)/2} and multiplies δ_t u^{n/2}, so the
/// operator at `level` is `scale · Σ_n values[n] δ_t u^{n/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ASequence {
    pub level: Level,
    pub values: Vec<f64>,
}

impl ASequence {
    /// a_{level,l} with l given doubled (l = 1/2 → 1).
    pub fn get(&self, l_doubled: usize) -> Option<f64> {
        l_doubled
            .checked_sub(1)
            .and_then(|n| self.values.get(n))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn a_sequence(p: &FractionalParams, level: Level) -> ASequence {
    let values = match level {
        Level::Half(i) => {
            let w = half_level_weights(p, i);
            match w.fdot_tilde {
                None => vec![w.f_tilde[0]],
                Some(fdot) => {
                    let (f, d) = (&w.f_tilde, &w.d_tilde);
                    let mut v = Vec::with_capacity(2 * i + 1);
                    v.push(fdot);
                    for m in 0..i {
                        v.push(d[m] - f[m]);
                        if m + 1 < i {
                            v.push(f[m]);
                        }
                    }
                    v.push(f[i - 1] + f[i]);
                    v
                }
            }
        }
        Level::Full(i) => {
            let w = full_level_weights(p, i);
            let (f, d) = (&w.f_tilde, &w.d_tilde);
            let mut v = Vec::with_capacity(2 * i + 2);
            for m in 0..=i {
                v.push(d[m] - f[m]);
                if m < i {
                    v.push(f[m]);
                }
            }
            v.push(f[i] + f[i + 1]);
            v
        }
    };
    ASequence { level, values }
}

/// Interval weights d̃, f̃ for A = n + α, n = 1..=n_max, computed once.
///
/// Every half and full level weight with the same A − α is the same number,
/// so a run of N steps needs only N + 1 distinct pairs. Sequences built
/// here are bitwise equal to [`a_sequence`].
#[derive(Debug, Clone)]
pub struct WeightTable {
    params: FractionalParams,
    d: Vec<f64>,
    f: Vec<f64>,
    f_terminal: f64,
    f_first: f64,
}

impl WeightTable {
    pub fn new(p: &FractionalParams, n_max: usize) -> Self {
        let (d, f) = (1..=n_max.max(1))
            .map(|n| interval_pair(p.lambda, n as f64 + p.alpha))
            .unzip();
        Self {
            params: *p,
            d,
            f,
            f_terminal: pow(p.alpha, 1.0 - p.lambda),
            f_first: pow(0.5 + p.alpha, 1.0 - p.lambda),
        }
    }

    /// Largest step index whose sequences the table can build.
    pub fn max_step(&self) -> usize {
        self.d.len() - 1
    }

    #[inline]
    fn pair(&self, n: usize) -> (f64, f64) {
        (self.d[n - 1], self.f[n - 1])
    }

    /// Writes the a-sequence of `level` into `out` (cleared first).
    pub fn a_sequence_into(&self, level: Level, out: &mut Vec<f64>) -> Result<()> {
        let i = level.step();
        let need = match level {
            Level::Half(_) => i,
            Level::Full(_) => i + 1,
        };
        if need > self.d.len() {
            return Err(Error::InvalidParameter(format!(
                "weight table holds {} intervals, level {level} needs {need}",
                self.d.len()
            )));
        }
        out.clear();
        match level {
            Level::Half(0) => out.push(self.f_first),
            Level::Half(i) => {
                let (lambda, alpha) = (self.params.lambda, self.params.alpha);
                let fi = i as f64;
                out.push(pow(fi + 0.5 + alpha, 1.0 - lambda) - pow(fi + alpha, 1.0 - lambda));
                for m in 0..i {
                    let (d, f) = self.pair(i - m);
                    out.push(d - f);
                    if m + 1 < i {
                        out.push(f);
                    }
                }
                out.push(self.pair(1).1 + self.f_terminal);
            }
            Level::Full(i) => {
                for m in 0..=i {
                    let (d, f) = self.pair(i + 1 - m);
                    out.push(d - f);
                    if m < i {
                        out.push(f);
                    }
                }
                out.push(self.pair(1).1 + self.f_terminal);
            }
        }
        Ok(())
    }

    pub fn a_sequence(&self, level: Level) -> Result<ASequence> {
        let mut values = Vec::new();
        self.a_sequence_into(level, &mut values)?;
        Ok(ASequence { level, values })
    }
}

/// 4α² − (1+4α)(ratio − 1), where ratio = a_{level,level}/a_{level,level−1/2}.
pub fn stability_residual(alpha: f64, ratio: f64) -> f64 {
    4.0 * alpha * alpha - (1.0 + 4.0 * alpha) * (ratio - 1.0)
}

/// Stability hypothesis at `level`: returns (residual ≤ 0, residual).
///
/// The half-level form needs i ≥ 1; the full-level form holds for i ≥ 0.
/// Advisory only; the stepper records the flag but never stops on it.
pub fn stability_condition(p: &FractionalParams, level: Level) -> Result<(bool, f64)> {
    if let Level::Half(0) = level {
        return Err(Error::InvalidParameter(
            "half-level stability condition needs i >= 1".into(),
        ));
    }
    let a = a_sequence(p, level);
    let n = a.values.len();
    let ratio = a.values[n - 1] / a.values[n - 2];
    let r = stability_residual(p.alpha, ratio);
    Ok((r <= 0.0, r))
}

/// The four coefficient inequalities checked by [`check_inequalities`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Inequality {
    /// Every weight, every d̃ − f̃ and every a-value is positive.
    Positivity,
    /// f̃_{j−1} + f̃_j − d̃_j < 0 and 2f̃_j − d̃_j > 0.
    SignConditions,
    /// a_{·,l} < a_{·,l+1/2}.
    Monotonicity,
    /// a_{·,l} > (2−3λ)(1−λ)/(2(2−λ)) · (level+α−l)^{−λ}.
    LowerBound,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [
        Inequality::Positivity,
        Inequality::SignConditions,
        Inequality::Monotonicity,
        Inequality::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Positivity => "positivity",
            Inequality::SignConditions => "sign-conditions",
            Inequality::Monotonicity => "monotonicity",
            Inequality::LowerBound => "lower-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyFailure {
    pub inequality: Inequality,
    pub lambda: f64,
    pub level: Level,
    /// Index of the offending entry (doubled for a-sequence checks).
    pub index: usize,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropertyReport {
    /// Number of individual comparisons made, per inequality.
    pub checks: [usize; 4],
    pub failures: Vec<PropertyFailure>,
    /// Set when λ ≥ 2/3 and nothing was checked.
    pub skipped: bool,
}

impl PropertyReport {
    pub fn total_checks(&self) -> usize {
        self.checks.iter().sum()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures_of(&self, which: Inequality) -> usize {
        self.failures.iter().filter(|f| f.inequality == which).count()
    }

    pub fn checks_of(&self, which: Inequality) -> usize {
        self.checks[which as usize]
    }

    pub fn merge(&mut self, other: PropertyReport) {
        for (a, b) in self.checks.iter_mut().zip(other.checks) {
            *a += b;
        }
        self.failures.extend(other.failures);
        self.skipped &= other.skipped;
    }
}

struct Checker<'a> {
    report: &'a mut PropertyReport,
    lambda: f64,
    level: Level,
}

impl Checker<'_> {
    /// Record the comparison `value > bound`.
    fn greater(&mut self, which: Inequality, index: usize, value: f64, bound: f64) {
        self.report.checks[which as usize] += 1;
        if !(value > bound) {
            self.report.failures.push(PropertyFailure {
                inequality: which,
                lambda: self.lambda,
                level: self.level,
                index,
                value,
                bound,
            });
        }
    }

    fn weights(&mut self, f: &[f64], d: &[f64], extra: Option<f64>) {
        use Inequality::*;
        for (n, &w) in f.iter().chain(d).chain(extra.iter()).enumerate() {
            self.greater(Positivity, n, w, 0.0);
        }
        for (j, (&dj, &fj)) in d.iter().zip(f).enumerate() {
            self.greater(Positivity, j, dj - fj, 0.0);
            self.greater(SignConditions, j, 2.0 * fj - dj, 0.0);
            if j >= 1 {
                self.greater(SignConditions, j, dj, f[j - 1] + fj);
            }
        }
    }

    fn sequence(&mut self, a: &ASequence, alpha: f64) {
        use Inequality::*;
        let lambda = self.lambda;
        let c = (2.0 - 3.0 * lambda) * (1.0 - lambda) / (2.0 * (2.0 - lambda));
        let level = a.level.value();
        for (n, &v) in a.values.iter().enumerate() {
            let l = (n + 1) as f64 / 2.0;
            self.greater(Positivity, n + 1, v, 0.0);
            self.greater(LowerBound, n + 1, v, c * pow(level + alpha - l, -lambda));
            if let Some(&next) = a.values.get(n + 1) {
                self.greater(Monotonicity, n + 1, next, v);
            }
        }
    }
}

/// Check positivity, the sign conditions, monotonicity and the lower bound
/// for every half and full level with step index 0..=max_i.
///
/// For λ ≥ 2/3 the inequalities are not expected to hold and the report
/// comes back empty with `skipped` set.
pub fn check_inequalities(p: &FractionalParams, max_i: usize) -> PropertyReport {
    let mut report = PropertyReport::default();
    if !p.lemma_applies() {
        report.skipped = true;
        return report;
    }
    for i in 0..=max_i {
        let level = Level::Half(i);
        let w = half_level_weights(p, i);
        let mut ck = Checker {
            report: &mut report,
            lambda: p.lambda,
            level,
        };
        ck.weights(&w.f_tilde, &w.d_tilde, w.fdot_tilde);
        ck.sequence(&a_sequence(p, level), p.alpha);

        let level = Level::Full(i);
        let w = full_level_weights(p, i);
        ck.level = level;
        ck.weights(&w.f_tilde, &w.d_tilde, None);
        ck.sequence(&a_sequence(p, level), p.alpha);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64) -> FractionalParams {
        FractionalParams::new(l).unwrap()
    }

    #[test]
    fn rejects_out_of_range_order() {
        for l in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(FractionalParams::new(l).is_err(), "{l}");
        }
    }

    #[test]
    fn alpha_is_derived() {
        let p = params(0.3);
        assert_eq!(p.alpha(), 1.0 - 0.3);
    }

    #[test]
    fn half_level_example_values() {
        let p = params(0.5);
        let w = half_level_weights(&p, 1);
        let d = 1.5f64.sqrt() - 0.5f64.sqrt();
        let f = 4.0 / 3.0 * (1.5f64.powf(1.5) - 0.5f64.powf(1.5)) - 0.5 * (1.5f64.sqrt() + 3.0 * 0.5f64.sqrt());
        assert!((w.d_tilde[0] - d).abs() < 1e-14);
        assert!((w.f_tilde[0] - f).abs() < 1e-14);
        assert!((w.d_tilde[0] - 0.51764).abs() < 5e-6);
        assert!((w.f_tilde[0] - 0.30505).abs() < 5e-6);
    }

    #[test]
    fn first_half_level_is_single_entry() {
        let w = half_level_weights(&params(0.9), 0);
        assert_eq!(w.f_tilde.len(), 1);
        assert!(w.d_tilde.is_empty() && w.fdot_tilde.is_none());
        assert!((w.f_tilde[0] - 0.6f64.powf(0.1)).abs() < 1e-15);
    }

    #[test]
    fn terminal_weights_are_alpha_power() {
        for lambda in [0.2, 0.5, 0.9] {
            let p = params(lambda);
            let a = p.alpha().powf(1.0 - lambda);
            for i in 1..6 {
                let h = half_level_weights(&p, i);
                assert!((h.f_tilde[i] - a).abs() < 1e-15);
            }
            for i in 0..6 {
                let f = full_level_weights(&p, i);
                assert!((f.f_tilde[i + 1] - a).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shift_identity() {
        let p = params(0.5);
        let full = full_level_weights(&p, 3);
        let half = half_level_weights(&p, 3);
        for l in 1..=3 {
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            assert!(rel(full.f_tilde[l], half.f_tilde[l - 1]) < 1e-14);
            assert!(rel(full.d_tilde[l], half.d_tilde[l - 1]) < 1e-14);
        }
    }

    #[test]
    fn a_sequence_small_levels() {
        let p = params(0.5);
        let a = a_sequence(&p, Level::Half(0));
        assert_eq!(a.values, vec![1.0]);
        let a = a_sequence(&p, Level::Full(0));
        let w = full_level_weights(&p, 0);
        assert_eq!(a.get(1), Some(w.d_tilde[0] - w.f_tilde[0]));
        assert_eq!(a.get(2), Some(w.f_tilde[0] + w.f_tilde[1]));
        assert_eq!(a.get(0), None);
        assert_eq!(a.get(3), None);
    }

    #[test]
    fn a_sequence_lengths() {
        let p = params(0.4);
        for i in 0..10 {
            assert_eq!(a_sequence(&p, Level::Half(i)).len(), 2 * i + 1);
            assert_eq!(a_sequence(&p, Level::Full(i)).len(), 2 * i + 2);
        }
    }

    #[test]
    fn scaled_weights_are_products() {
        let p = params(0.7);
        let c = p.scale(0.01);
        let w = half_level_weights(&p, 4);
        let s = w.scaled(c);
        for (a, b) in s.f_tilde.iter().zip(&w.f_tilde) {
            assert_eq!(*a, c * b);
        }
        assert_eq!(s.fdot_tilde.unwrap(), c * w.fdot_tilde.unwrap());
    }

    #[test]
    fn table_matches_closed_forms_bitwise() {
        let p = params(0.37);
        let t = WeightTable::new(&p, 30);
        for i in 0..30 {
            assert_eq!(t.a_sequence(Level::Half(i)).unwrap(), a_sequence(&p, Level::Half(i)));
            assert_eq!(t.a_sequence(Level::Full(i)).unwrap(), a_sequence(&p, Level::Full(i)));
        }
        assert!(t.a_sequence(Level::Full(30)).is_err());
        assert!(t.a_sequence(Level::Half(30)).is_ok());
    }

    #[test]
    fn stability_half_needs_step_one() {
        assert!(stability_condition(&params(0.5), Level::Half(0)).is_err());
        assert!(stability_condition(&params(0.5), Level::Half(1)).is_ok());
        assert!(stability_condition(&params(0.5), Level::Full(0)).is_ok());
    }

    #[test]
    fn stability_residual_zero_alpha() {
        // α = 0: residual is −(ratio − 1), non-positive whenever ratio ≥ 1
        assert_eq!(stability_residual(0.0, 1.0), 0.0);
        assert!(stability_residual(0.0, 1.3) < 0.0);
    }

    #[test]
    fn lemma_suite_skipped_above_two_thirds() {
        let r = check_inequalities(&params(0.9), 10);
        assert!(r.skipped);
        assert_eq!(r.total_checks(), 0);
    }

    #[test]
    fn lemma_suite_passes_small_order() {
        let r = check_inequalities(&params(0.3), 20);
        assert!(!r.skipped);
        assert!(r.passed(), "{:?}", &r.failures[..r.failures.len().min(5)]);
        for which in Inequality::ALL {
            assert!(r.checks_of(which) > 0);
        }
    }
}
