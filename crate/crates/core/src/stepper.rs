//! Time marching: two implicit sub-steps per step, each solved in the
//! averaged unknown and mapped back to the new half level.

use crate::caputo::HalfStepHistory;
use crate::error::{Error, Result};
use crate::linsys::{assemble, solve_penta};
use crate::problem::Problem;
use crate::spatial::GridSpec;
use crate::weights::{stability_condition, FractionalParams, Level, WeightTable};

/// Per-solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub level: Level,
    /// Stability hypothesis (flag, residual); `None` where it is not defined.
    pub stability: Option<(bool, f64)>,
    /// ‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞) of the solve.
    pub residual: f64,
    pub diagonally_dominant: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub solves: Vec<SolveRecord>,
}

impl Diagnostics {
    pub fn max_residual(&self) -> f64 {
        self.solves.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Number of solves whose stability flag was recorded as false.
    pub fn stability_violations(&self) -> usize {
        self.solves
            .iter()
            .filter(|s| matches!(s.stability, Some((false, _))))
            .count()
    }

    pub fn all_diagonally_dominant(&self) -> bool {
        self.solves.iter().all(|s| s.diagonally_dominant)
    }
}

/// The marching state; after step i completes the history holds levels
/// 0..=i+1 (doubled indices 0..=2i+2).
pub struct StepState<'a> {
    hist: HalfStepHistory,
    problem: &'a Problem,
    params: FractionalParams,
    table: WeightTable,
    a_buf: Vec<f64>,
    diagnostics: Diagnostics,
}

impl<'a> StepState<'a> {
    /// Level 0 is U^0_j = ψ₁(x_j) for every j.
    pub fn init(problem: &'a Problem, grid: GridSpec, params: FractionalParams) -> Result<Self> {
        let reach = grid.final_time() + grid.k();
        if reach > problem.horizon() * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "time step {} too large: coefficients are evaluated up to {reach}, problem is defined on [0, {}]",
                grid.k(),
                problem.horizon()
            )));
        }
        if (grid.length() - problem.length()).abs() > 1e-12 * problem.length() {
            return Err(Error::InvalidParameter(format!(
                "grid length {} differs from problem length {}",
                grid.length(),
                problem.length()
            )));
        }
        let mut hist = HalfStepHistory::new(grid);
        let u0: Vec<f64> = grid.nodes().iter().map(|&x| problem.initial(x)).collect();
        if let Some((j, _)) = u0.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "initial data",
                x: grid.x(j),
                t: 0.0,
            });
        }
        hist.push(u0)?;
        Ok(Self {
            hist,
            problem,
            params,
            table: WeightTable::new(&params, grid.n() + 1),
            a_buf: Vec::new(),
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn history(&self) -> &HalfStepHistory {
        &self.hist
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn grid(&self) -> &GridSpec {
        self.hist.grid()
    }

    /// Full steps completed so far.
    pub fn steps_done(&self) -> usize {
        (self.hist.len() - 1) / 2
    }

    pub fn is_finished(&self) -> bool {
        self.hist.len() > 2 * self.grid().n()
    }

    /// Level of the next sub-step.
    pub fn next_level(&self) -> Level {
        let m = self.hist.len();
        if m % 2 == 1 {
            Level::Half((m - 1) / 2)
        } else {
            Level::Full((m - 2) / 2)
        }
    }

    /// Solve for U^{i+1/2}.
    pub fn advance_half(&mut self) -> Result<()> {
        match self.next_level() {
            level @ Level::Half(_) => self.advance(level),
            other => Err(Error::InvalidParameter(format!(
                "next level is {other}, not a half level"
            ))),
        }
    }

    /// Solve for U^{i+1}.
    pub fn advance_full(&mut self) -> Result<()> {
        match self.next_level() {
            level @ Level::Full(_) => self.advance(level),
            other => Err(Error::InvalidParameter(format!(
                "next level is {other}, not a full level"
            ))),
        }
    }

    /// One full step (both sub-steps).
    pub fn step(&mut self) -> Result<()> {
        self.advance_half()?;
        self.advance_full()
    }

    fn advance(&mut self, level: Level) -> Result<()> {
        if self.is_finished() {
            return Err(Error::InvalidParameter("run already reached the final time".into()));
        }
        let step = level.step();
        let a = self.take_sequence(level)?;
        let assembled = assemble(self.problem, &self.params, level, &a, &self.hist);
        self.a_buf = a.values;
        let assembled = assembled.map_err(|e| e.at_step(step))?;
        let sys = &assembled.system;
        let avg = solve_penta(sys).map_err(|e| e.at_step(step))?;

        let stability = match level {
            Level::Half(0) => None,
            _ => stability_condition(&self.params, level).ok(),
        };
        if let Some((false, r)) = stability {
            log::warn!("stability hypothesis fails at level {level} (residual {r:.4e})");
        }
        self.diagnostics.solves.push(SolveRecord {
            level,
            stability,
            residual: sys.relative_residual(&avg),
            diagonally_dominant: sys.is_diagonally_dominant(),
        });

        let grid = *self.hist.grid();
        let mm = grid.m();
        let alpha = self.params.alpha();
        let w = 1.0 + 2.0 * alpha;
        let prev = self.hist.level_unchecked(level.doubled() - 1);
        let mut next = vec![0.0; grid.width()];
        for (r, j) in grid.interior().enumerate() {
            next[j] = (avg[r] + 2.0 * alpha * prev[j]) / w;
        }
        for (n, j) in [0, 1, mm - 1, mm].into_iter().enumerate() {
            next[j] = assembled.boundary_new[n];
        }
        if let Some(j) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "solution",
                x: grid.x(j),
                t: grid.t_half(level.doubled()),
            });
        }
        self.hist.push(next)
    }

    fn take_sequence(&mut self, level: Level) -> Result<crate::weights::ASequence> {
        let mut values = std::mem::take(&mut self.a_buf);
        self.table.a_sequence_into(level, &mut values)?;
        Ok(crate::weights::ASequence { level, values })
    }

    pub fn into_parts(self) -> (HalfStepHistory, Diagnostics) {
        (self.hist, self.diagnostics)
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub history: HalfStepHistory,
    pub diagnostics: Diagnostics,
}

/// A run that stopped early; the levels computed so far are kept.
#[derive(Debug, thiserror::Error)]
#[error("run failed at time step {step}: {source}")]
pub struct RunFailure {
    pub partial: HalfStepHistory,
    pub diagnostics: Diagnostics,
    pub step: usize,
    #[source]
    pub source: Error,
}

/// March from t = 0 to t = T.
pub fn run(problem: &Problem, grid: GridSpec, params: FractionalParams) -> Result<RunOutput, Box<RunFailure>> {
    let mut state = match StepState::init(problem, grid, params) {
        Ok(s) => s,
        Err(source) => {
            return Err(Box::new(RunFailure {
                partial: HalfStepHistory::new(grid),
                diagnostics: Diagnostics::default(),
                step: 0,
                source,
            }))
        }
    };
    while !state.is_finished() {
        let step = state.next_level().step();
        if let Err(source) = state.step() {
            let (partial, diagnostics) = state.into_parts();
            return Err(Box::new(RunFailure {
                partial,
                diagnostics,
                step,
                source,
            }));
        }
    }
    let (history, diagnostics) = state.into_parts();
    Ok(RunOutput { history, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::example1;

    fn zero_problem() -> Problem {
        Problem::builder("zero")
            .q(|_| 0.0)
            .initial(|_| 0.0)
            .boundary(|_, _| 0.0)
            .build()
            .unwrap()
    }

    #[test]
    fn zero_problem_stays_zero() {
        let prob = zero_problem();
        let grid = prob.grid(8, 5).unwrap();
        let out = run(&prob, grid, FractionalParams::new(0.5).unwrap()).unwrap();
        assert!(out.history.is_complete());
        for (_, v) in out.history.iter() {
            assert!(v.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn sub_steps_alternate() {
        let prob = example1(0.5).unwrap();
        let grid = prob.grid(8, 4).unwrap();
        let mut st = StepState::init(&prob, grid, FractionalParams::new(0.5).unwrap()).unwrap();
        assert_eq!(st.next_level(), Level::Half(0));
        assert!(st.advance_full().is_err());
        st.advance_half().unwrap();
        assert_eq!(st.next_level(), Level::Full(0));
        assert!(st.advance_half().is_err());
        st.advance_full().unwrap();
        assert_eq!(st.steps_done(), 1);
        assert_eq!(st.history().len(), 3);
    }

    #[test]
    fn too_large_step_rejected() {
        let prob = example1(0.5).unwrap();
        let grid = prob.grid(8, 2).unwrap();
        let err = run(&prob, grid, FractionalParams::new(0.5).unwrap()).unwrap_err();
        assert!(matches!(err.source, Error::InvalidParameter(_)));
    }

    #[test]
    fn boundary_layers_follow_data() {
        let prob = example1(0.7).unwrap();
        let grid = prob.grid(8, 6).unwrap();
        let out = run(&prob, grid, FractionalParams::new(0.7).unwrap()).unwrap();
        for (m, v) in out.history.iter() {
            let t = grid.t_half(m);
            for j in [0, 1, 7, 8] {
                assert_eq!(v[j], prob.boundary(grid.x(j), t));
            }
        }
    }
}
