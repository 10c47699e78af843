//! Dirichlet and Neumann data applied through the load program.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::DofLayout;
use crate::mesh::Mesh;

/// Prescribed displacement component on a node set. Ramped values grow
/// linearly with the load factor; unramped values are held from the start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpec {
    pub set: String,
    pub component: usize,
    #[serde(default)]
    pub value: f64,
    #[serde(default)]
    pub ramped: bool,
}

impl DirichletSpec {
    pub fn fixed(set: &str, component: usize) -> Self {
        Self { set: set.into(), component, value: 0.0, ramped: false }
    }

    pub fn ramped(set: &str, component: usize, value: f64) -> Self {
        Self { set: set.into(), component, value, ramped: true }
    }
}

/// Dead-load traction per unit reference area on a facet set, scaled by the load factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TractionSpec {
    pub set: String,
    pub traction: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProgram {
    #[serde(default)]
    pub dirichlet: Vec<DirichletSpec>,
    #[serde(default)]
    pub tractions: Vec<TractionSpec>,
    /// Body force per unit reference volume, scaled by the load factor.
    #[serde(default)]
    pub body_force: [f64; 3],
}

/// Dirichlet data resolved to global dofs.
#[derive(Clone, Debug, Default)]
pub struct Constraints {
    /// Sorted constrained dofs with `(value, ramped)`.
    pub dofs: Vec<(usize, f64, bool)>,
    pub is_fixed: Vec<bool>,
}

impl Constraints {
    pub fn resolve(program: &BoundaryProgram, mesh: &Mesh, layout: &DofLayout) -> Result<Self> {
        let mut map: BTreeMap<usize, (f64, bool)> = BTreeMap::new();
        for spec in &program.dirichlet {
            if spec.component >= layout.dim {
                return Err(Error::DimensionMismatch { expected: layout.dim, got: spec.component + 1 });
            }
            for &node in mesh.node_set(&spec.set)? {
                let dof = layout.u_dof(node, spec.component);
                let new = (spec.value, spec.ramped && spec.value != 0.0);
                if let Some(old) = map.insert(dof, new) {
                    if old != new {
                        return Err(Error::ConstraintConflict { dof, a: old.0, b: new.0 });
                    }
                }
            }
        }
        let mut is_fixed = vec![false; layout.n_total()];
        let dofs: Vec<(usize, f64, bool)> = map.into_iter().map(|(d, (v, r))| (d, v, r)).collect();
        for &(d, _, _) in &dofs {
            is_fixed[d] = true;
        }
        Ok(Self { dofs, is_fixed })
    }

    pub fn value_at(&self, value: f64, ramped: bool, load: f64) -> f64 {
        if ramped {
            value * load
        } else {
            value
        }
    }

    pub fn n_fixed(&self) -> usize {
        self.dofs.len()
    }
}

/// Unit-load external force vector `∫ N T̄ dA + ∫ N B̄ dV`.
pub fn external_load(program: &BoundaryProgram, mesh: &Mesh, layout: &DofLayout) -> Result<Vec<f64>> {
    let mut f = vec![0.0; layout.n_total()];
    let d = layout.dim;
    for spec in &program.tractions {
        for &facet in mesh.facet_set(&spec.set)? {
            let el = mesh.element(facet.element);
            for (_, n, da) in mesh.facet_quadrature(facet) {
                for (a, &node) in el.iter().enumerate() {
                    if n[a] == 0.0 {
                        continue;
                    }
                    for c in 0..d {
                        f[layout.u_dof(node, c)] += n[a] * spec.traction[c] * da;
                    }
                }
            }
        }
    }
    if program.body_force.iter().any(|b| *b != 0.0) {
        let disc_rule = crate::fem::quadrature::QuadratureRule::tensor(d, mesh.order + 1);
        let b = mesh.basis();
        let nn = b.n_nodes();
        let mut n = vec![0.0; nn];
        let mut dn = vec![[0.0; 3]; nn];
        let scale = if d == 2 { mesh.thickness } else { 1.0 };
        for e in 0..mesh.n_elements() {
            for (xi, w) in disc_rule.points.iter().zip(&disc_rule.weights) {
                b.eval(*xi, &mut n, &mut dn);
                let jac = mesh.jacobian(e, *xi);
                let (det, _) = crate::fem::invert_small(&jac, d);
                for (a, &node) in mesh.element(e).iter().enumerate() {
                    for c in 0..d {
                        f[layout.u_dof(node, c)] += n[a] * program.body_force[c] * det * w * scale;
                    }
                }
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(mesh: &Mesh) -> DofLayout {
        DofLayout { dim: mesh.dim, n_nodes: mesh.n_nodes(), n_elements: mesh.n_elements(), n_modal: 0 }
    }

    #[test]
    fn traction_matches_hand_quadrature() {
        // Right edge of a 2×2 Q2 mesh on [0,2]×[0,1]: Simpson-like weights 1/6, 4/6, 1/6 per element of length ½.
        let mesh = Mesh::structured(2, 2, [2, 2, 0], |s| [2.0 * s[0], s[1], 0.0]).unwrap();
        let l = layout(&mesh);
        let prog = BoundaryProgram {
            tractions: vec![TractionSpec { set: "right".into(), traction: [0.0, 3.0, 0.0] }],
            ..Default::default()
        };
        let f = external_load(&prog, &mesh, &l).unwrap();
        let total: f64 = f.iter().sum();
        assert!((total - 3.0).abs() < 1e-14);
        let right = mesh.node_set("right").unwrap();
        let mut ys: Vec<(f64, f64)> = right.iter().map(|&n| (mesh.nodes[n][1], f[l.u_dof(n, 1)])).collect();
        ys.sort_by(|a, b| a.0.total_cmp(&b.0));
        let expect = [1.0 / 12.0, 4.0 / 12.0, 2.0 / 12.0, 4.0 / 12.0, 1.0 / 12.0];
        for ((_, v), e) in ys.iter().zip(expect) {
            assert!((v - 3.0 * e).abs() < 1e-14);
        }
    }

    #[test]
    fn body_force_resultant() {
        let mesh = Mesh::structured(3, 2, [2, 1, 1], |s| [s[0] * 2.0, s[1], s[2] * 0.5]).unwrap();
        let prog = BoundaryProgram { body_force: [0.0, 0.0, -2.0], ..Default::default() };
        let f = external_load(&prog, &mesh, &layout(&mesh)).unwrap();
        assert!((f.iter().sum::<f64>() + 2.0).abs() < 1e-13);
    }

    #[test]
    fn conflicting_constraints_rejected() {
        let mesh = Mesh::structured(2, 1, [2, 2, 0], |s| s).unwrap();
        let l = layout(&mesh);
        let ok = BoundaryProgram {
            dirichlet: vec![DirichletSpec::fixed("left", 0), DirichletSpec::fixed("bottom", 0)],
            ..Default::default()
        };
        let c = Constraints::resolve(&ok, &mesh, &l).unwrap();
        assert_eq!(c.n_fixed(), 5);
        let bad = BoundaryProgram {
            dirichlet: vec![DirichletSpec::fixed("left", 0), DirichletSpec::ramped("bottom", 0, 1.0)],
            ..Default::default()
        };
        assert!(matches!(Constraints::resolve(&bad, &mesh, &l), Err(Error::ConstraintConflict { .. })));
        let missing = BoundaryProgram { dirichlet: vec![DirichletSpec::fixed("nowhere", 0)], ..Default::default() };
        assert!(matches!(Constraints::resolve(&missing, &mesh, &l), Err(Error::UnknownSet(_))));
    }
}
