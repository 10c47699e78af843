//! Stress recovery, element averages, nodal probes and file output.
//!
//! VTK output is legacy 2.0 ASCII with point displacements and cell data
//! (averaged Cauchy stress, von Mises stress, material id and, for the mixed
//! formulation, averaged pressure and dilatation).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fem::element::{displacement_gradient, embedded_deformation_gradient};
use crate::fem::{Formulation, Regime, System};
use crate::mesh::Mesh;
use crate::plane_stress::condense_strain;
use crate::solver::StepRecord;
use crate::tensor::Tensor2;

/// Post-processed fields of one converged load step.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSnapshot {
    pub load: f64,
    pub regime: Regime,
    /// Nodal displacements; unused components are zero.
    pub displacement: Vec<[f64; 3]>,
    /// Element-averaged Cauchy stress: 3×3, or 2×2 in flatland.
    pub stress: Vec<Tensor2>,
    pub von_mises: Vec<f64>,
    /// Element-averaged independent pressure (three-field only).
    pub pressure: Option<Vec<f64>>,
    /// Element-averaged independent volume ratio (three-field only).
    pub dilatation: Option<Vec<f64>>,
}

impl FieldSnapshot {
    /// `max_e |σ33| / max_e σ_eff`; zero in flatland where no σ33 exists.
    pub fn out_of_plane_ratio(&self) -> f64 {
        let vm = self.von_mises.iter().copied().fold(0.0, f64::max);
        if vm == 0.0 || self.stress.first().is_none_or(|s| s.dim() < 3) {
            return 0.0;
        }
        self.stress.iter().map(|s| s[(2, 2)].abs()).fold(0.0, f64::max) / vm
    }
}

/// `σ = J⁻¹ F S Fᵀ`.
pub fn cauchy_from_state(f: &Tensor2, s: &Tensor2) -> Result<Tensor2> {
    let j = f.det();
    if !(j > 0.0) {
        return Err(Error::InvertedElement { det: j });
    }
    Ok((*f * *s * f.transpose()) * (1.0 / j))
}

/// `√(3/2 σ_dev : σ_dev)` with `σ_dev = σ − tr(σ)/d I`.
pub fn von_mises(sigma: &Tensor2, d: usize) -> f64 {
    let dev = *sigma - Tensor2::identity(sigma.dim()) * (sigma.trace() / d as f64);
    (1.5 * dev.ddot(&dev)).sqrt()
}

/// Weighted mean of point values.
pub fn element_average(values: &[Tensor2], weights: &[f64]) -> Tensor2 {
    let dim = values.first().map_or(3, |v| v.dim());
    let mut sum = Tensor2::zeros(dim);
    let mut w = 0.0;
    for (v, &wq) in values.iter().zip(weights) {
        sum += *v * wq;
        w += wq;
    }
    sum * (1.0 / w)
}

/// Cauchy stress and, for the mixed formulation, `(p̃, J̃)` at every
/// quadrature point of element `e`.
fn element_points(system: &System, e: usize, q: &[f64], c33: &[f64]) -> Result<(Vec<Tensor2>, Vec<(f64, f64)>)> {
    let regime = system.problem.regime;
    let disc = &system.disc;
    let g = disc.element(e);
    let model = &system.models[system.problem.mesh.material[e]];
    let mut qe = Vec::new();
    system.element_state(e, q, &mut qe);
    let d = g.dim;
    let (ue, rest) = qe.split_at(g.nn * d);
    let mut sig = Vec::with_capacity(g.nq);
    let mut mixed = Vec::new();
    for qp in 0..g.nq {
        let at = |err: Error| err.at(e, qp);
        let h = displacement_gradient(&g, qp, ue);
        let f = Tensor2::identity(d) + h;
        let m = h + h.transpose() + h.transpose() * h;
        let s = match disc.formulation {
            Formulation::ThreeField => {
                let fm = embedded_deformation_gradient(regime, &f, 1.0).map_err(at)?;
                let (tau_iso, _, j) = model.iso_kirchhoff(&fm).map_err(at)?;
                let nm = g.n_modal;
                let vals = g.modal(qp);
                let pt: f64 = (0..nm).map(|r| vals[r] * rest[r]).sum();
                let theta: f64 = (0..nm).map(|r| vals[r] * rest[nm + r]).sum();
                mixed.push((pt, 1.0 + theta));
                sig.push((tau_iso + Tensor2::identity(fm.dim()) * (pt * j)) * (1.0 / j));
                continue;
            }
            Formulation::OneField => match regime {
                Regime::Flatland | Regime::ThreeD => (f, model.evaluate_strain(&m).map_err(at)?.s),
                Regime::PlaneStrain => (f.embed(1.0), model.evaluate_strain(&m.embed(0.0)).map_err(at)?.s),
                Regime::PlaneStress => {
                    let init = c33.get(e * g.nq + qp).copied().unwrap_or(1.0);
                    let cs = condense_strain(model, &m, init, &system.problem.condensation).map_err(at)?;
                    let st = model.evaluate_strain(&m.embed(cs.c33 - 1.0)).map_err(at)?;
                    (f.embed(cs.c33.sqrt()), st.s)
                }
            },
        };
        sig.push(cauchy_from_state(&s.0, &s.1).map_err(at)?);
    }
    Ok((sig, mixed))
}

/// Builds the snapshot of state `q`; `c33` holds the converged out-of-plane
/// stretches of a plane-stress run and may be empty otherwise.
pub fn snapshot(system: &System, q: &[f64], c33: &[f64], load: f64) -> Result<FieldSnapshot> {
    let mesh = &system.problem.mesh;
    let regime = system.problem.regime;
    let layout = system.layout();
    let displacement = (0..mesh.n_nodes())
        .map(|n| {
            let mut u = [0.0; 3];
            for (c, v) in u.iter_mut().enumerate().take(layout.dim) {
                *v = q[layout.u_dof(n, c)];
            }
            u
        })
        .collect();
    let nq = system.disc.nq();
    let mixed = system.problem.formulation == Formulation::ThreeField;
    let mut stress = Vec::with_capacity(mesh.n_elements());
    let mut pressure = Vec::new();
    let mut dilatation = Vec::new();
    for e in 0..mesh.n_elements() {
        let (sig, pj) = element_points(system, e, q, c33)?;
        let w = &system.disc.dv[e * nq..(e + 1) * nq];
        stress.push(element_average(&sig, w));
        if mixed {
            let vol: f64 = w.iter().sum();
            pressure.push(pj.iter().zip(w).map(|(v, w)| v.0 * w).sum::<f64>() / vol);
            dilatation.push(pj.iter().zip(w).map(|(v, w)| v.1 * w).sum::<f64>() / vol);
        }
    }
    let von_mises = stress.iter().map(|s| von_mises(s, regime.von_mises_dim())).collect();
    Ok(FieldSnapshot {
        load,
        regime,
        displacement,
        stress,
        von_mises,
        pressure: mixed.then_some(pressure),
        dilatation: mixed.then_some(dilatation),
    })
}

pub fn snapshot_step(system: &System, step: &StepRecord) -> Result<FieldSnapshot> {
    snapshot(system, &step.q, &step.c33, step.load)
}

/// Position of each VTK cell node in the lexicographic element ordering.
pub fn vtk_cell_order(dim: usize, order: usize) -> Result<Vec<usize>> {
    let m = order + 1;
    let lex = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    let quad = |k: usize, p: usize| [lex(0, 0, k), lex(p, 0, k), lex(p, p, k), lex(0, p, k)];
    Ok(match (dim, order) {
        (2, 1) => quad(0, 1).to_vec(),
        (2, 2) => {
            let mut v = quad(0, 2).to_vec();
            v.extend([lex(1, 0, 0), lex(2, 1, 0), lex(1, 2, 0), lex(0, 1, 0), lex(1, 1, 0)]);
            v
        }
        (3, 1) => [quad(0, 1), quad(1, 1)].concat(),
        (3, 2) => {
            let mut v = [quad(0, 2), quad(2, 2)].concat();
            for k in [0, 2] {
                v.extend([lex(1, 0, k), lex(2, 1, k), lex(1, 2, k), lex(0, 1, k)]);
            }
            v.extend([lex(0, 0, 1), lex(2, 0, 1), lex(2, 2, 1), lex(0, 2, 1)]);
            v.extend([lex(0, 1, 1), lex(2, 1, 1), lex(1, 0, 1), lex(1, 2, 1), lex(1, 1, 0), lex(1, 1, 2)]);
            v.push(lex(1, 1, 1));
            v
        }
        _ => return Err(Error::InvalidMesh(format!("no VTK cell for dim {dim} / order {order}"))),
    })
}

fn vtk_cell_type(dim: usize, order: usize) -> u8 {
    match (dim, order) {
        (2, 1) => 9,
        (2, 2) => 28,
        (3, 1) => 12,
        _ => 29,
    }
}

/// Legacy VTK unstructured grid of `mesh` carrying `snap`.
pub fn vtk_string(mesh: &Mesh, snap: &FieldSnapshot) -> Result<String> {
    let ord = vtk_cell_order(mesh.dim, mesh.order)?;
    let (nn, ne) = (mesh.n_nodes(), mesh.n_elements());
    if snap.displacement.len() != nn || snap.stress.len() != ne || snap.von_mises.len() != ne {
        return Err(Error::InvalidMesh("snapshot does not match the mesh".into()));
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 2.0");
    let _ = writeln!(s, "psfem {} load {}", snap.regime.name(), snap.load);
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nn} double");
    for x in &mesh.nodes {
        let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", ne * (ord.len() + 1));
    for e in 0..ne {
        let el = mesh.element(e);
        let _ = write!(s, "{}", ord.len());
        for &a in &ord {
            let _ = write!(s, " {}", el[a]);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    let ty = vtk_cell_type(mesh.dim, mesh.order);
    for _ in 0..ne {
        let _ = writeln!(s, "{ty}");
    }
    let _ = writeln!(s, "POINT_DATA {nn}\nVECTORS displacement double");
    for u in &snap.displacement {
        let _ = writeln!(s, "{} {} {}", u[0], u[1], u[2]);
    }
    let _ = writeln!(s, "CELL_DATA {ne}\nTENSORS cauchy_stress double");
    for t in &snap.stress {
        let t3 = if t.dim() == 3 { *t } else { t.embed(0.0) };
        for i in 0..3 {
            let _ = writeln!(s, "{} {} {}", t3[(i, 0)], t3[(i, 1)], t3[(i, 2)]);
        }
    }
    let mut scalar = |name: &str, ty: &str, vals: Vec<String>| {
        let _ = writeln!(s, "SCALARS {name} {ty} 1\nLOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(s, "{v}");
        }
    };
    scalar("von_mises", "double", snap.von_mises.iter().map(f64::to_string).collect());
    scalar("material", "int", mesh.material.iter().map(usize::to_string).collect());
    if let Some(p) = &snap.pressure {
        scalar("pressure", "double", p.iter().map(f64::to_string).collect());
    }
    if let Some(j) = &snap.dilatation {
        scalar("dilatation", "double", j.iter().map(f64::to_string).collect());
    }
    Ok(s)
}

/// Writes `<dir>/<step>.vtk` and returns its path.
pub fn write_vtk(dir: &Path, step: usize, mesh: &Mesh, snap: &FieldSnapshot) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{step}.vtk"));
    std::fs::write(&path, vtk_string(mesh, snap)?)?;
    Ok(path)
}

/// Named nodal probe.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub name: String,
    pub node: usize,
}

impl Probe {
    /// Probe at the mesh node located exactly at `x`.
    pub fn at(mesh: &Mesh, name: &str, x: [f64; 3]) -> Result<Self> {
        let node = mesh.nearest_node(x);
        let y = mesh.nodes[node];
        let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let dist = (0..3).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>().sqrt();
        if dist > 1e-9 * scale {
            return Err(Error::ProbeNotFound(x));
        }
        Ok(Self { name: name.into(), node })
    }
}

/// Probe displacements per load step as CSV: `step,load,probe,u1,u2[,u3]`.
#[derive(Clone, Debug, Default)]
pub struct ProbeTable {
    dim: usize,
    rows: Vec<(usize, f64, String, [f64; 3])>,
}

impl ProbeTable {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new() }
    }

    pub fn record(&mut self, step: usize, snap: &FieldSnapshot, probes: &[Probe]) {
        for p in probes {
            self.rows.push((step, snap.load, p.name.clone(), snap.displacement[p.node]));
        }
    }

    pub fn rows(&self) -> &[(usize, f64, String, [f64; 3])] {
        &self.rows
    }

    pub fn header(dim: usize) -> &'static str {
        if dim == 3 {
            "step,load,probe,u1,u2,u3"
        } else {
            "step,load,probe,u1,u2"
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::header(self.dim));
        for (step, load, name, u) in &self.rows {
            let _ = write!(s, "{step},{load},{name}");
            for v in &u[..self.dim] {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}
