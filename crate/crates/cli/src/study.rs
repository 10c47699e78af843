//! Refinement and thickness studies.

use std::fmt::Write as _;

use psfem::scenarios::{
    cook_material, cook_problem, punch_compression, punch_probe, punch_problem, punch_settings, CookOptions, PunchOptions,
    COOK_POINT_A,
};
use psfem::{solver, Probe, Regime, SolveSettings, System};
use rayon::prelude::*;

use crate::config::{ScenarioId, StudyConfig};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub regime: Regime,
    pub order: usize,
    pub n: usize,
    pub thickness: f64,
    /// Cook: `u2` at point A. Punch: compression in percent.
    pub metric: f64,
}

fn solve_case(cfg: &StudyConfig, regime: Regime, order: usize, n: usize, thickness: f64) -> Result<StudyRow, psfem::Error> {
    let formulation = psfem::scenarios::default_formulation(regime);
    let (problem, probe, settings) = match cfg.scenario {
        ScenarioId::Punch => {
            let o = PunchOptions { n, order, regime, load: cfg.load };
            (punch_problem(&o, formulation, cook_material())?, punch_probe(regime), punch_settings())
        }
        _ => {
            let o = CookOptions { n, order, regime, thickness, walls: cfg.walls, traction: cfg.load };
            (cook_problem(&o, formulation, cook_material())?, COOK_POINT_A, SolveSettings::default())
        }
    };
    let system = System::new(problem)?;
    let p = Probe::at(&system.problem.mesh, "probe", probe)?;
    let (history, _) = solver::run(&system, &cfg.solver.unwrap_or(settings))?;
    let u2 = history.last().expect("load steps").q[system.layout().u_dof(p.node, 1)];
    let metric = if cfg.scenario == ScenarioId::Punch { punch_compression(u2) } else { u2 };
    Ok(StudyRow { regime, order, n, thickness, metric })
}

pub fn run_study(cfg: &StudyConfig, jobs: usize) -> Result<Vec<StudyRow>, CliError> {
    cfg.validate()?;
    let mut cases = Vec::new();
    for &regime in &cfg.regimes {
        for &order in &cfg.orders {
            for &t in &cfg.thickness {
                for &n in &cfg.n {
                    cases.push((regime, order, n, t));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| CliError::config("jobs", e))?;
    let rows: Vec<Result<StudyRow, psfem::Error>> =
        pool.install(|| cases.par_iter().map(|&(r, o, n, t)| solve_case(cfg, r, o, n, t)).collect());
    Ok(rows.into_iter().collect::<Result<_, _>>()?)
}

pub fn to_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from("regime,order,n,thickness,metric\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.regime.name(), r.order, r.n, r.thickness, r.metric);
    }
    s
}
