//! Global assembly into a fixed compressed-column pattern and Dirichlet
//! elimination.

use rayon::prelude::*;

use crate::constitutive::MaterialModel;
use crate::error::{Error, Result};
use crate::fem::boundary::{external_load, BoundaryProgram, Constraints};
use crate::fem::element::{element_onefield, element_threefield, ElementOutput};
use crate::fem::{Discretization, DofLayout, Formulation, Regime};
use crate::mesh::Mesh;
use crate::plane_stress::{CondensationSettings, InitStrategy};

/// Elements processed per parallel batch before the serial scatter.
const BATCH: usize = 512;

/// Mesh, regime, formulation, materials and boundary data: what the solver consumes.
#[derive(Clone, Debug)]
pub struct Problem {
    pub mesh: Mesh,
    pub regime: Regime,
    pub formulation: Formulation,
    /// Indexed by the mesh material id. Three-dimensional models; flatland
    /// substitutes its two-dimensional counterpart.
    pub materials: Vec<MaterialModel>,
    pub boundary: BoundaryProgram,
    pub condensation: CondensationSettings,
}

/// Compressed sparse column pattern with per-element scatter positions.
#[derive(Clone, Debug)]
pub struct SparsityPattern {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    element_ndofs: usize,
    elem_pos: Vec<u32>,
}

impl SparsityPattern {
    pub fn build(mesh: &Mesh, layout: &DofLayout) -> Result<Self> {
        let d = layout.dim;
        let nm2 = 2 * layout.n_modal;
        let ne = mesh.n_elements();
        let mut node_elems = vec![Vec::new(); mesh.n_nodes()];
        for e in 0..ne {
            for &n in mesh.element(e) {
                node_elems[n].push(e as u32);
            }
        }
        let n = layout.n_total();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        let mut adj: Vec<usize> = Vec::new();
        let mut els: Vec<usize> = Vec::new();
        for node in 0..mesh.n_nodes() {
            adj.clear();
            els.clear();
            for &e in &node_elems[node] {
                adj.extend_from_slice(mesh.element(e as usize));
                els.push(e as usize);
            }
            adj.sort_unstable();
            adj.dedup();
            els.sort_unstable();
            for _ in 0..d {
                for &a in &adj {
                    row_idx.extend((0..d).map(|c| layout.u_dof(a, c)));
                }
                for &e in &els {
                    let s = layout.pressure_dof(e, 0);
                    row_idx.extend(s..s + nm2);
                }
                col_ptr.push(row_idx.len());
            }
        }
        if nm2 > 0 {
            for e in 0..ne {
                adj.clear();
                adj.extend_from_slice(mesh.element(e));
                adj.sort_unstable();
                adj.dedup();
                for _ in 0..nm2 {
                    for &a in &adj {
                        row_idx.extend((0..d).map(|c| layout.u_dof(a, c)));
                    }
                    let s = layout.pressure_dof(e, 0);
                    row_idx.extend(s..s + nm2);
                    col_ptr.push(row_idx.len());
                }
            }
        }
        if row_idx.len() > u32::MAX as usize {
            return Err(Error::InvalidMesh("system too large for the sparse pattern".into()));
        }
        let element_ndofs = mesh.nodes_per_element() * d + nm2;
        let mut elem_pos = Vec::with_capacity(ne * element_ndofs * element_ndofs);
        let mut dofs = Vec::new();
        for e in 0..ne {
            layout.element_dofs(mesh.element(e), e, &mut dofs);
            for &r in &dofs {
                for &c in &dofs {
                    let col = &row_idx[col_ptr[c]..col_ptr[c + 1]];
                    let k = col.binary_search(&r).map_err(|_| Error::InvalidMesh("pattern is missing a coupling".into()))?;
                    elem_pos.push((col_ptr[c] + k) as u32);
                }
            }
        }
        Ok(Self { n, col_ptr, row_idx, element_ndofs, elem_pos })
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    fn positions(&self, e: usize) -> &[u32] {
        let m = self.element_ndofs * self.element_ndofs;
        &self.elem_pos[e * m..(e + 1) * m]
    }

    /// `y = A x` for values laid out on this pattern.
    pub fn matvec(&self, values: &[f64], x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += values[k] * xc;
            }
        }
        y
    }

    /// Dense copy, for tests and small diagnostics.
    pub fn to_dense(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                a[self.row_idx[k]][c] += values[k];
            }
        }
        a
    }
}

/// Result of a global assembly pass.
#[derive(Clone, Debug)]
pub struct Assembled {
    /// `R = λ f_ext − f_int` (plus the mixed-field residuals).
    pub residual: Vec<f64>,
    /// Tangent values on the pattern; empty when not requested.
    pub values: Vec<f64>,
    /// Converged out-of-plane stretch per quadrature point (plane stress).
    pub c33: Vec<f64>,
    pub max_inner: usize,
    /// Largest `|S33| / μ` over all quadrature points (plane stress).
    pub max_s33: f64,
}

/// A problem compiled to dofs, cached geometry, loads and sparsity.
#[derive(Clone, Debug)]
pub struct System {
    pub problem: Problem,
    pub disc: Discretization,
    pub models: Vec<MaterialModel>,
    pub constraints: Constraints,
    pub f_ext: Vec<f64>,
    pub pattern: SparsityPattern,
    constrained_positions: Vec<(usize, bool)>,
}

impl System {
    pub fn new(problem: Problem) -> Result<Self> {
        problem.mesh.validate()?;
        let disc = Discretization::new(&problem.mesh, problem.regime, problem.formulation)?;
        let n_mat = problem.mesh.material.iter().copied().max().map_or(0, |m| m + 1);
        if problem.materials.len() < n_mat {
            return Err(Error::InvalidMaterial(format!(
                "mesh uses {n_mat} material ids but {} models were given",
                problem.materials.len()
            )));
        }
        let models = problem.materials.iter().map(|m| problem.regime.adapt_model(m)).collect::<Result<Vec<_>>>()?;
        if problem.regime == Regime::PlaneStress {
            if let Some(m) = models.iter().find(|m| m.dim() != 3) {
                return Err(Error::UnsupportedModel(m.kind().name()));
            }
        }
        let constraints = Constraints::resolve(&problem.boundary, &problem.mesh, &disc.layout)?;
        let f_ext = external_load(&problem.boundary, &problem.mesh, &disc.layout)?;
        let pattern = SparsityPattern::build(&problem.mesh, &disc.layout)?;
        let mut constrained_positions = Vec::new();
        for c in 0..pattern.n {
            for k in pattern.col_ptr[c]..pattern.col_ptr[c + 1] {
                let r = pattern.row_idx[k];
                if constraints.is_fixed[r] || constraints.is_fixed[c] {
                    constrained_positions.push((k, r == c));
                }
            }
        }
        Ok(Self { problem, disc, models, constraints, f_ext, pattern, constrained_positions })
    }

    pub fn layout(&self) -> &DofLayout {
        &self.disc.layout
    }

    pub fn regime(&self) -> Regime {
        self.problem.regime
    }

    pub fn n_dofs(&self) -> usize {
        self.disc.layout.n_total()
    }

    /// Reference state: zero displacement, zero pressure and `J̃ = 1`.
    /// The dilatation dofs store `J̃ − 1`.
    pub fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.disc.layout.n_total()]
    }

    pub fn initial_c33(&self) -> Vec<f64> {
        if self.problem.regime == Regime::PlaneStress {
            vec![1.0; self.disc.layout.n_elements * self.disc.nq()]
        } else {
            Vec::new()
        }
    }

    /// Gathers element `e`'s dofs from the global vector `q` into `buf`.
    pub fn element_state(&self, e: usize, q: &[f64], buf: &mut Vec<f64>) {
        let l = &self.disc.layout;
        buf.clear();
        for &n in self.problem.mesh.element(e) {
            for c in 0..l.dim {
                buf.push(q[l.u_dof(n, c)]);
            }
        }
        if l.is_mixed() {
            let s = l.pressure_dof(e, 0);
            buf.extend_from_slice(&q[s..s + 2 * l.n_modal]);
        }
    }

    fn compute_element(&self, e: usize, q: &[f64], c33: &mut [f64], want_k: bool) -> Result<ElementOutput> {
        let mut qe = Vec::with_capacity(self.disc.element_ndofs());
        self.element_state(e, q, &mut qe);
        let model = &self.models[self.problem.mesh.material[e]];
        let g = self.disc.element(e);
        let out = match self.problem.formulation {
            Formulation::OneField => {
                element_onefield(self.problem.regime, model, &g, &qe, c33, &self.problem.condensation, want_k)
            }
            Formulation::ThreeField => element_threefield(self.problem.regime, model, &g, &qe, want_k),
        };
        out.map_err(|err| match err {
            Error::AtQuadraturePoint { qp, source, .. } => Error::AtQuadraturePoint { element: e, qp, source },
            other => other.at(e, 0),
        })
    }

    /// Assembles the residual at load factor `load` and, if requested, the tangent.
    /// `c33_init` holds the warm-start values (the previous converged step).
    pub fn assemble(&self, q: &[f64], c33_init: &[f64], load: f64, want_k: bool) -> Result<Assembled> {
        let ne = self.disc.layout.n_elements;
        let nq = self.disc.nq();
        let ps = self.problem.regime == Regime::PlaneStress;
        let mut c33 = if ps {
            match self.problem.condensation.init_strategy {
                InitStrategy::PreviousConverged => c33_init.to_vec(),
                InitStrategy::Unity => vec![1.0; ne * nq],
            }
        } else {
            Vec::new()
        };
        let mut residual: Vec<f64> = self.f_ext.iter().map(|f| f * load).collect();
        let mut values = if want_k { vec![0.0; self.pattern.nnz()] } else { Vec::new() };
        let mut max_inner = 0;
        let mut max_s33: f64 = 0.0;
        let mut dofs = Vec::new();
        let mut start = 0;
        while start < ne {
            let end = (start + BATCH).min(ne);
            let outputs: Vec<Result<ElementOutput>> = if ps {
                c33[start * nq..end * nq]
                    .par_chunks_mut(nq)
                    .enumerate()
                    .map(|(i, c)| self.compute_element(start + i, q, c, want_k))
                    .collect()
            } else {
                (start..end).into_par_iter().map(|e| self.compute_element(e, q, &mut [], want_k)).collect()
            };
            for (i, out) in outputs.into_iter().enumerate() {
                let e = start + i;
                let out = out?;
                max_inner = max_inner.max(out.max_inner);
                max_s33 = max_s33.max(out.max_s33);
                self.disc.layout.element_dofs(self.problem.mesh.element(e), e, &mut dofs);
                for (r, &dof) in out.r.iter().zip(&dofs) {
                    residual[dof] += r;
                }
                if want_k {
                    for (v, &p) in out.k.iter().zip(self.pattern.positions(e)) {
                        values[p as usize] += v;
                    }
                }
            }
            start = end;
        }
        Ok(Assembled { residual, values, c33, max_inner, max_s33 })
    }

    /// Prescribed values of the constrained dofs at load factor `load`.
    pub fn prescribed(&self, load: f64) -> Vec<(usize, f64)> {
        self.constraints.dofs.iter().map(|&(d, v, r)| (d, self.constraints.value_at(v, r, load))).collect()
    }

    /// Norm of the residual over unconstrained dofs.
    pub fn free_norm(&self, r: &[f64]) -> f64 {
        r.iter().zip(&self.constraints.is_fixed).filter(|(_, f)| !**f).map(|(v, _)| v * v).sum::<f64>().sqrt()
    }

    /// Turns `K Δ = R` into the eliminated system: constrained rows and
    /// columns become identity, their right-hand side carries the prescribed
    /// increment, and the coupling `K_fd Δg` moves to the free rows.
    pub fn eliminate(&self, values: &mut [f64], rhs: &mut [f64], increments: &[(usize, f64)]) {
        let p = &self.pattern;
        for &(c, dg) in increments {
            if dg == 0.0 {
                continue;
            }
            for k in p.col_ptr[c]..p.col_ptr[c + 1] {
                let r = p.row_idx[k];
                if !self.constraints.is_fixed[r] {
                    rhs[r] -= values[k] * dg;
                }
            }
        }
        for &(k, diag) in &self.constrained_positions {
            values[k] = if diag { 1.0 } else { 0.0 };
        }
        for &(d, _, _) in &self.constraints.dofs {
            rhs[d] = 0.0;
        }
        for &(d, dg) in increments {
            rhs[d] = dg;
        }
    }
}
