//! Builds a problem from a [`RunConfig`], solves it and writes the outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use psfem::mesh::Mesh;
use psfem::postprocess::{snapshot_step, write_vtk, FieldSnapshot};
use psfem::scenarios::{
    composite_mesh, cook_material, cook_problem, inclusion_fraction, midplane_contraction, punch_compression, punch_probe,
    punch_problem, punch_settings, CompositeKind, CompositeOptions, CookOptions, PunchOptions, COOK_POINT_A,
};
use psfem::solver::{self, ConvergenceLog, SolutionHistory};
use psfem::{MaterialModel, MaterialParams, Probe, ProbeTable, Problem, Regime, SolveSettings, System};

use crate::config::{MaterialSpec, MeshSource, ProbeSpec, RunConfig, ScenarioId, VtkSteps};
use crate::CliError;

/// A configured problem ready to solve.
pub struct Prepared {
    pub system: System,
    pub probes: Vec<Probe>,
    pub settings: SolveSettings,
    /// Block length of a composite run, for the contraction metric.
    pub composite_length: Option<f64>,
}

fn composite_options(cfg: &RunConfig, kind: CompositeKind) -> CompositeOptions {
    let spec = cfg.composite.clone().unwrap_or_default();
    let base = match kind {
        CompositeKind::Particles => CompositeOptions::particles(cfg.seed, 0.3),
        CompositeKind::Fibres => CompositeOptions::fibres(cfg.seed, 0.3),
    };
    CompositeOptions {
        n: cfg.n.unwrap_or(base.n),
        order: cfg.order.unwrap_or(base.order),
        elongation: cfg.load.unwrap_or(base.elongation),
        matrix_mu: spec.matrix_mu.unwrap_or(base.matrix_mu),
        matrix_nu: spec.matrix_nu.unwrap_or(base.matrix_nu),
        inclusion_mu: spec.inclusion_mu.unwrap_or(base.inclusion_mu),
        inclusion_nu: spec.inclusion_nu.unwrap_or(base.inclusion_nu),
        count: spec.count.unwrap_or(base.count),
        fraction: spec.fraction.unwrap_or(base.fraction),
        aspect_ratio: spec.aspect_ratio.unwrap_or(base.aspect_ratio),
        length: spec.length.unwrap_or(base.length),
        ..base
    }
}

fn materials(cfg: &RunConfig, default: MaterialModel) -> Result<Vec<MaterialModel>, CliError> {
    if cfg.materials.is_empty() {
        return Ok(vec![default]);
    }
    cfg.materials.iter().enumerate().map(|(i, m)| m.to_model(&format!("materials[{i}]"))).collect()
}

fn scenario_error(e: psfem::Error) -> CliError {
    CliError::config("scenario", e)
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    cfg.validate()?;
    let formulation = cfg.formulation();
    let mut settings = SolveSettings::default();
    let mut probes = Vec::new();
    let mut composite_length = None;
    let mut problem: Problem = match cfg.scenario {
        ScenarioId::Cook => {
            let d = CookOptions::default();
            let o = CookOptions {
                n: cfg.n.unwrap_or(d.n),
                order: cfg.order.unwrap_or(d.order),
                regime: cfg.regime,
                thickness: cfg.thickness.unwrap_or(d.thickness),
                walls: cfg.walls,
                traction: cfg.load.unwrap_or(d.traction),
            };
            let mut p = cook_problem(&o, formulation, cook_material()).map_err(scenario_error)?;
            p.materials = materials(cfg, cook_material())?;
            probes.push(Probe::at(&p.mesh, "A", COOK_POINT_A).map_err(scenario_error)?);
            p
        }
        ScenarioId::Punch => {
            let d = PunchOptions::default();
            let o = PunchOptions {
                n: cfg.n.unwrap_or(d.n),
                order: cfg.order.unwrap_or(d.order),
                regime: cfg.regime,
                load: cfg.load.unwrap_or(d.load),
            };
            let mut p = punch_problem(&o, formulation, cook_material()).map_err(scenario_error)?;
            p.materials = materials(cfg, cook_material())?;
            probes.push(Probe::at(&p.mesh, "centre", punch_probe(cfg.regime)).map_err(scenario_error)?);
            settings = punch_settings();
            p
        }
        ScenarioId::CompositeParticles | ScenarioId::CompositeFibres => {
            let o = composite_options(cfg, cfg.scenario.composite_kind().expect("composite scenario"));
            let (mesh, boundary, _) = composite_mesh(&o).map_err(scenario_error)?;
            let param = |mu, nu, path| MaterialParams::from_mu_nu(mu, nu).map_err(|e| CliError::config(path, e));
            composite_length = Some(o.length);
            Problem {
                mesh,
                regime: Regime::PlaneStress,
                formulation,
                materials: vec![
                    MaterialModel::decoupled(param(o.matrix_mu, o.matrix_nu, "composite.matrix_nu")?),
                    MaterialModel::decoupled(param(o.inclusion_mu, o.inclusion_nu, "composite.inclusion_nu")?),
                ],
                boundary,
                condensation: Default::default(),
            }
        }
        ScenarioId::Mesh => {
            let src = cfg.mesh.as_ref().expect("validated");
            let text = std::fs::read_to_string(&src.file).map_err(|e| CliError::config("mesh.file", format!("{}: {e}", src.file.display())))?;
            let mesh = Mesh::from_text(&text).map_err(|e| CliError::config("mesh.file", e))?;
            if cfg.order.is_some_and(|o| o != mesh.order) {
                return Err(CliError::config("order", format!("the mesh file has order {}", mesh.order)));
            }
            let n_ids = mesh.material.iter().max().map_or(0, |m| m + 1);
            if cfg.materials.len() < n_ids {
                return Err(CliError::config("materials", format!("the mesh uses {n_ids} material ids")));
            }
            let mut boundary = src.boundary.clone();
            let scale = cfg.load.unwrap_or(1.0);
            for t in &mut boundary.tractions {
                t.traction = t.traction.map(|v| v * scale);
            }
            for (i, p) in src.probes.iter().enumerate() {
                probes.push(Probe::at(&mesh, &p.name, p.x).map_err(|e| CliError::config(&format!("mesh.probes[{i}]"), e))?);
            }
            Problem {
                mesh,
                regime: cfg.regime,
                formulation,
                materials: materials(cfg, cook_material())?,
                boundary,
                condensation: Default::default(),
            }
        }
    };
    if let Some(c) = cfg.condensation {
        problem.condensation = c;
    }
    if let Some(s) = cfg.solver {
        settings = s;
    }
    let system = System::new(problem).map_err(scenario_error)?;
    Ok(Prepared { system, probes, settings, composite_length })
}

/// Result of a completed run.
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Vec<(String, f64)>,
    pub history: SolutionHistory,
    pub log: ConvergenceLog,
}

fn summary(prep: &Prepared, cfg: &RunConfig, history: &SolutionHistory, log: &ConvergenceLog, last: &FieldSnapshot) -> Vec<(String, f64)> {
    let mesh = &prep.system.problem.mesh;
    let dim = mesh.dim;
    let mut out = vec![
        ("steps".to_string(), history.steps.len() as f64),
        ("newton_iterations".into(), history.steps.iter().map(|s| s.iterations).sum::<usize>() as f64),
        ("max_inner_iterations".into(), log.max_inner.iter().copied().max().unwrap_or(0) as f64),
    ];
    for p in &prep.probes {
        for c in 0..dim {
            out.push((format!("{}.u{}", p.name, c + 1), last.displacement[p.node][c]));
        }
    }
    if cfg.scenario == ScenarioId::Punch {
        out.push(("compression_percent".into(), punch_compression(last.displacement[prep.probes[0].node][1])));
    }
    if let Some(l) = prep.composite_length {
        out.push(("inclusion_fraction".into(), inclusion_fraction(mesh)));
        out.push(("midplane_contraction".into(), midplane_contraction(mesh, |i| last.displacement[i], l)));
    }
    out.push(("max_von_mises".into(), last.von_mises.iter().copied().fold(0.0, f64::max)));
    if prep.system.problem.regime == Regime::PlaneStress {
        out.push(("sigma33_over_sigma_eff".into(), last.out_of_plane_ratio()));
    }
    out
}

pub fn summary_csv(summary: &[(String, f64)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in summary {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

/// Runs `cfg`, writing into its output directory under `root`.
pub fn execute(cfg: &RunConfig, root: &Path) -> Result<RunOutcome, CliError> {
    let prep = prepare(cfg)?;
    let dir = cfg.output.dir.clone().unwrap_or_else(|| root.join(&cfg.name));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let (history, log) = solver::run(&prep.system, &prep.settings)?;
    std::fs::write(dir.join("convergence.csv"), log.to_csv())?;
    let mesh = &prep.system.problem.mesh;
    let mut table = ProbeTable::new(mesh.dim);
    let mut last = None;
    for (i, step) in history.steps.iter().enumerate() {
        let snap = snapshot_step(&prep.system, step)?;
        table.record(step.step, &snap, &prep.probes);
        let is_last = i + 1 == history.steps.len();
        if cfg.output.vtk == VtkSteps::All || (cfg.output.vtk == VtkSteps::Last && is_last) {
            write_vtk(&dir, step.step, mesh, &snap)?;
        }
        if is_last {
            last = Some(snap);
        }
    }
    std::fs::write(dir.join("probes.csv"), table.to_csv())?;
    let last = last.expect("at least one load step");
    let summary = summary(&prep, cfg, &history, &log, &last);
    std::fs::write(dir.join("summary.csv"), summary_csv(&summary))?;
    Ok(RunOutcome { dir, summary, history, log })
}

/// Writes the scenario mesh as `mesh.txt` next to `run.toml`, a config
/// that solves the same problem through `scenario = "mesh"`. Returns the
/// config path.
pub fn export_mesh(cfg: &RunConfig, root: &Path) -> Result<PathBuf, CliError> {
    let prep = prepare(cfg)?;
    let problem = &prep.system.problem;
    let dir = cfg.output.dir.clone().unwrap_or_else(|| root.join(&cfg.name));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("mesh.txt"), problem.mesh.to_text())?;
    let materials = problem
        .materials
        .iter()
        .map(|m| MaterialSpec { model: m.kind(), mu: m.mu(), nu: None, kappa: Some(m.kappa()), volumetric: Some(m.vol_law()) })
        .collect();
    let probes = prep.probes.iter().map(|p| ProbeSpec { name: p.name.clone(), x: problem.mesh.nodes[p.node] }).collect();
    let run = RunConfig {
        name: format!("{}-mesh", cfg.name),
        scenario: ScenarioId::Mesh,
        regime: problem.regime,
        formulation: Some(problem.formulation),
        order: None,
        n: None,
        load: None,
        seed: cfg.seed,
        thickness: None,
        walls: false,
        materials,
        composite: None,
        mesh: Some(MeshSource { file: "mesh.txt".into(), boundary: problem.boundary.clone(), probes }),
        solver: Some(prep.settings),
        condensation: Some(problem.condensation),
        output: Default::default(),
    };
    let path = dir.join("run.toml");
    std::fs::write(&path, run.to_toml())?;
    Ok(path)
}
