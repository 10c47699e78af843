//! Incremental load stepping with a global Newton–Raphson iteration.

pub mod linear;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{Formulation, System};
pub use linear::{linear_solve, Factorization, LinearSolver};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveSettings {
    pub n_load_steps: usize,
    pub newton_rel_tol: f64,
    /// Absolute residual tolerance in force units.
    pub newton_abs_tol: f64,
    pub max_newton_iters: usize,
    /// Halve the Newton update while the residual norm grows.
    pub line_search: bool,
    /// After each converged step, take one extra Newton update and record
    /// the resulting residual as the roundoff floor of that step.
    pub measure_floor: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self { n_load_steps: 10, newton_rel_tol: 1e-10, newton_abs_tol: 1e-12, max_newton_iters: 25, line_search: false, measure_floor: false }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_load_steps == 0 || self.max_newton_iters == 0 {
            return Err(Error::InvalidSettings("load steps and Newton iterations must be positive".into()));
        }
        if !(self.newton_rel_tol > 0.0) || !(self.newton_abs_tol > 0.0) {
            return Err(Error::InvalidSettings("Newton tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub step: usize,
    pub iter: usize,
    pub residual_norm: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceLog {
    pub records: Vec<IterationRecord>,
    /// Largest number of inner plane stress iterations seen in each step.
    pub max_inner: Vec<usize>,
    /// Largest `|S33| / μ` at the converged state of each step.
    pub max_s33: Vec<f64>,
    /// Measured residual floor per step; zero when not measured.
    pub floors: Vec<f64>,
}

impl ConvergenceLog {
    pub fn step_residuals(&self, step: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.step == step).map(|r| r.residual_norm).collect()
    }

    pub fn n_steps(&self) -> usize {
        self.max_inner.len()
    }

    /// Fitted order `log(r₃/r₂) / log(r₂/r₁)` over the last three residuals
    /// of a step that lie above ten times its measured floor. `None` when
    /// fewer than three such residuals exist.
    pub fn fitted_order(&self, step: usize) -> Option<f64> {
        let r = self.above_floor(step);
        order_of_last_three(&r)
    }

    pub fn above_floor(&self, step: usize) -> Vec<f64> {
        let floor = 10.0 * self.floors.get(step.wrapping_sub(1)).copied().unwrap_or(0.0);
        self.step_residuals(step).into_iter().filter(|&v| v > floor).collect()
    }

    /// Same fit on the raw last three residuals, floor included.
    pub fn raw_fitted_order(&self, step: usize) -> Option<f64> {
        order_of_last_three(&self.step_residuals(step))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,iter,residual_norm\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{:e}", r.step, r.iter, r.residual_norm);
        }
        s
    }
}

fn order_of_last_three(r: &[f64]) -> Option<f64> {
    if r.len() < 3 {
        return None;
    }
    let (r1, r2, r3) = (r[r.len() - 3], r[r.len() - 2], r[r.len() - 1]);
    Some((r3 / r2).ln() / (r2 / r1).ln())
}

/// Converged fields of one load step.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub load: f64,
    /// Full dof vector: displacements, then element pressure/dilatation coefficients.
    pub q: Vec<f64>,
    /// Converged out-of-plane stretch per quadrature point (plane stress only).
    pub c33: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SolutionHistory {
    pub steps: Vec<StepRecord>,
}

impl SolutionHistory {
    pub fn last(&self) -> Option<&StepRecord> {
        self.steps.last()
    }
}

/// Smallest step fraction tried by the backtracking line search.
const MIN_STEP: f64 = 1.0 / 64.0;

/// Solves the problem over `n_load_steps` equal increments of the load factor.
pub fn run(system: &System, settings: &SolveSettings) -> Result<(SolutionHistory, ConvergenceLog)> {
    settings.validate()?;
    let prefer = match system.problem.formulation {
        Formulation::OneField => Factorization::Cholesky,
        Formulation::ThreeField => Factorization::Lu,
    };
    let p = &system.pattern;
    let mut lin = LinearSolver::new(p.n, &p.col_ptr, &p.row_idx, prefer);
    let mut q = system.initial_state();
    let mut c33 = system.initial_c33();
    let mut history = SolutionHistory::default();
    let mut log = ConvergenceLog::default();
    let n = settings.n_load_steps;
    for step in 1..=n {
        let load = step as f64 / n as f64;
        let targets = system.prescribed(load);
        let mut r0 = 0.0;
        let mut max_inner = 0;
        let mut converged = None;
        let mut current = system.assemble(&q, &c33, load, true)?;
        for iter in 0..=settings.max_newton_iters {
            // Whatever part of the prescribed increment a damped step left behind.
            let inc: Vec<(usize, f64)> = targets.iter().map(|&(d, v)| (d, v - q[d])).collect();
            let mut rhs = current.residual.clone();
            let mut values = std::mem::take(&mut current.values);
            system.eliminate(&mut values, &mut rhs, &inc);
            let norm = system.free_norm(&rhs);
            max_inner = max_inner.max(current.max_inner);
            log.records.push(IterationRecord { step, iter, residual_norm: norm });
            if iter == 0 {
                r0 = norm;
            }
            if !norm.is_finite() {
                return Err(Error::NewtonDiverged { step, iters: iter, residual: norm });
            }
            let tol = (settings.newton_rel_tol * r0).max(settings.newton_abs_tol);
            let pending = inc.iter().any(|(_, v)| *v != 0.0);
            if norm <= tol && !pending {
                converged = Some(iter);
                break;
            }
            if iter == settings.max_newton_iters {
                return Err(Error::NewtonDiverged { step, iters: iter, residual: norm });
            }
            let dx = lin.solve(&values, &rhs)?;
            let mut alpha = 1.0;
            loop {
                let mut trial: Vec<f64> = q.iter().zip(&dx).map(|(a, b)| a + alpha * b).collect();
                if alpha == 1.0 {
                    for &(d, v) in &targets {
                        trial[d] = v;
                    }
                }
                let next = system.assemble(&trial, &c33, load, true);
                if settings.line_search && alpha > MIN_STEP {
                    let worse = match &next {
                        Ok(a) => !(system.free_norm(&a.residual) <= norm),
                        Err(_) => true,
                    };
                    if worse {
                        alpha *= 0.5;
                        continue;
                    }
                }
                q = trial;
                current = next?;
                break;
            }
        }
        let iterations = converged.unwrap_or(settings.max_newton_iters);
        let floor = if settings.measure_floor { residual_floor(system, &mut lin, &q, &c33, load)? } else { 0.0 };
        log.floors.push(floor);
        c33 = current.c33;
        log.max_inner.push(max_inner);
        log.max_s33.push(current.max_s33);
        log::info!("step {step}/{n}: converged in {iterations} iterations");
        history.steps.push(StepRecord { step, load, q: q.clone(), c33: c33.clone(), iterations });
    }
    Ok((history, log))
}

/// Residual after one more Newton update from a converged state.
fn residual_floor(system: &System, lin: &mut LinearSolver, q: &[f64], c33: &[f64], load: f64) -> Result<f64> {
    let a = system.assemble(q, c33, load, true)?;
    let (mut values, mut rhs) = (a.values, a.residual);
    system.eliminate(&mut values, &mut rhs, &[]);
    let dx = lin.solve(&values, &rhs)?;
    let trial: Vec<f64> = q.iter().zip(&dx).map(|(a, b)| a + b).collect();
    let next = system.assemble(&trial, c33, load, false)?;
    Ok(system.free_norm(&next.residual))
}
