//! Elements, quadrature and global assembly.

pub mod assembly;
pub mod basis;
pub mod boundary;
pub mod element;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::constitutive::{MaterialModel, ModelKind};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use basis::{LagrangeBasis, ModalBasis};
use quadrature::QuadratureRule;

pub use assembly::{Assembled, SparsityPattern, System};
pub use boundary::{BoundaryProgram, DirichletSpec, TractionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Flatland,
    PlaneStrain,
    PlaneStress,
    ThreeD,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::Flatland, Regime::PlaneStrain, Regime::PlaneStress, Regime::ThreeD];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Flatland => "flatland",
            Regime::PlaneStrain => "plane-strain",
            Regime::PlaneStress => "plane-stress",
            Regime::ThreeD => "three-d",
        }
    }

    pub fn spatial_dim(self) -> usize {
        if self == Regime::ThreeD {
            3
        } else {
            2
        }
    }

    /// Dimension used in the deviatoric part of the von Mises stress.
    pub fn von_mises_dim(self) -> usize {
        if self == Regime::Flatland {
            2
        } else {
            3
        }
    }

    /// Material model as evaluated in this regime: flatland swaps the
    /// decoupled three-dimensional model for its two-dimensional counterpart.
    pub fn adapt_model(self, model: &MaterialModel) -> Result<MaterialModel> {
        match (self, model.kind()) {
            (Regime::Flatland, ModelKind::NeoHookeanDecoupled | ModelKind::FlatlandNeoHookean) => {
                Ok(model.with_kind(ModelKind::FlatlandNeoHookean))
            }
            (Regime::Flatland, k) => Err(Error::UnsupportedModel(k.name())),
            (_, ModelKind::FlatlandNeoHookean) => Ok(model.with_kind(ModelKind::NeoHookeanDecoupled)),
            _ => Ok(*model),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    #[default]
    OneField,
    ThreeField,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::OneField => "one-field",
            Formulation::ThreeField => "three-field",
        }
    }
}

/// Plane stress is only available with the displacement formulation.
pub fn check_compatible(regime: Regime, formulation: Formulation) -> Result<()> {
    if regime == Regime::PlaneStress && formulation == Formulation::ThreeField {
        return Err(Error::UnsupportedRegime { regime: regime.name(), what: "the three-field formulation" });
    }
    Ok(())
}

/// Global numbering: displacement dofs `node * dim + c` first, then per
/// element `n_modal` pressure and `n_modal` dilatation coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLayout {
    pub dim: usize,
    pub n_nodes: usize,
    pub n_elements: usize,
    pub n_modal: usize,
}

impl DofLayout {
    pub fn n_u(&self) -> usize {
        self.dim * self.n_nodes
    }

    pub fn n_total(&self) -> usize {
        self.n_u() + 2 * self.n_modal * self.n_elements
    }

    pub fn is_mixed(&self) -> bool {
        self.n_modal > 0
    }

    pub fn u_dof(&self, node: usize, c: usize) -> usize {
        node * self.dim + c
    }

    pub fn pressure_dof(&self, e: usize, q: usize) -> usize {
        self.n_u() + 2 * self.n_modal * e + q
    }

    pub fn dilatation_dof(&self, e: usize, q: usize) -> usize {
        self.n_u() + 2 * self.n_modal * e + self.n_modal + q
    }

    /// Element dofs in local order: `u` (node-major), then `p̃`, then `J̃`.
    pub fn element_dofs(&self, conn: &[usize], e: usize, out: &mut Vec<usize>) {
        out.clear();
        for &n in conn {
            for c in 0..self.dim {
                out.push(self.u_dof(n, c));
            }
        }
        let start = self.n_u() + 2 * self.n_modal * e;
        out.extend(start..start + 2 * self.n_modal);
    }
}

/// Reference-configuration data cached per element and quadrature point.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub regime: Regime,
    pub formulation: Formulation,
    pub basis: LagrangeBasis,
    pub modal: Option<ModalBasis>,
    pub rule: QuadratureRule,
    pub layout: DofLayout,
    /// Shape values, `nq × nn`.
    pub shape: Vec<f64>,
    /// Modal values, `nq × n_modal`.
    pub modal_values: Vec<f64>,
    /// Weighted reference volume per point, `ne × nq`.
    pub dv: Vec<f64>,
    /// Reference gradients `∇_X N`, `ne × nq × nn × dim`.
    pub grad: Vec<f64>,
}

/// Borrowed view of one element's cached geometry.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeom<'a> {
    pub dim: usize,
    pub nn: usize,
    pub nq: usize,
    pub n_modal: usize,
    pub dv: &'a [f64],
    pub grad: &'a [f64],
    pub modal: &'a [f64],
}

impl ElementGeom<'_> {
    #[inline]
    pub fn grad(&self, q: usize, a: usize) -> &[f64] {
        let o = (q * self.nn + a) * self.dim;
        &self.grad[o..o + self.dim]
    }

    #[inline]
    pub fn modal(&self, q: usize) -> &[f64] {
        &self.modal[q * self.n_modal..(q + 1) * self.n_modal]
    }
}

impl Discretization {
    pub fn new(mesh: &Mesh, regime: Regime, formulation: Formulation) -> Result<Self> {
        check_compatible(regime, formulation)?;
        if mesh.dim != regime.spatial_dim() {
            return Err(Error::DimensionMismatch { expected: regime.spatial_dim(), got: mesh.dim });
        }
        let dim = mesh.dim;
        let basis = mesh.basis();
        let rule = QuadratureRule::tensor(dim, mesh.order + 1);
        let modal = (formulation == Formulation::ThreeField).then(|| ModalBasis::for_order(dim, mesh.order));
        let n_modal = modal.map_or(0, |m| m.len());
        let nn = basis.n_nodes();
        let nq = rule.len();
        let mut shape = vec![0.0; nq * nn];
        let mut dshape = vec![[0.0; 3]; nq * nn];
        let mut modal_values = vec![0.0; nq * n_modal];
        for (q, xi) in rule.points.iter().enumerate() {
            basis.eval(*xi, &mut shape[q * nn..(q + 1) * nn], &mut dshape[q * nn..(q + 1) * nn]);
            if let Some(m) = modal {
                m.eval(*xi, &mut modal_values[q * n_modal..(q + 1) * n_modal]);
            }
        }
        let ne = mesh.n_elements();
        let scale = if dim == 2 { mesh.thickness } else { 1.0 };
        let mut dv = vec![0.0; ne * nq];
        let mut grad = vec![0.0; ne * nq * nn * dim];
        for e in 0..ne {
            let el = mesh.element(e);
            for q in 0..nq {
                let mut jac = [[0.0; 3]; 3];
                for a in 0..nn {
                    let x = mesh.nodes[el[a]];
                    for i in 0..dim {
                        for c in 0..dim {
                            jac[i][c] += x[i] * dshape[q * nn + a][c];
                        }
                    }
                }
                let (det, inv) = invert_small(&jac, dim);
                if !(det > 0.0) {
                    return Err(Error::InvertedElement { det }.at(e, q));
                }
                dv[e * nq + q] = det * rule.weights[q] * scale;
                for a in 0..nn {
                    let dn = dshape[q * nn + a];
                    let o = ((e * nq + q) * nn + a) * dim;
                    // ∇_X N = J⁻ᵀ ∇_ξ N
                    for i in 0..dim {
                        grad[o + i] = (0..dim).map(|c| inv[c][i] * dn[c]).sum();
                    }
                }
            }
        }
        let layout = DofLayout { dim, n_nodes: mesh.n_nodes(), n_elements: ne, n_modal };
        Ok(Self { regime, formulation, basis, modal, rule, layout, shape, modal_values, dv, grad })
    }

    pub fn nq(&self) -> usize {
        self.rule.len()
    }

    pub fn element(&self, e: usize) -> ElementGeom<'_> {
        let nq = self.nq();
        let nn = self.basis.n_nodes();
        let dim = self.layout.dim;
        ElementGeom {
            dim,
            nn,
            nq,
            n_modal: self.layout.n_modal,
            dv: &self.dv[e * nq..(e + 1) * nq],
            grad: &self.grad[e * nq * nn * dim..(e + 1) * nq * nn * dim],
            modal: &self.modal_values,
        }
    }

    pub fn element_ndofs(&self) -> usize {
        self.basis.n_nodes() * self.layout.dim + 2 * self.layout.n_modal
    }
}

/// Determinant and inverse of the leading `dim × dim` block.
pub(crate) fn invert_small(a: &[[f64; 3]; 3], dim: usize) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    if dim == 2 {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        inv[0][0] = a[1][1] / det;
        inv[0][1] = -a[0][1] / det;
        inv[1][0] = -a[1][0] / det;
        inv[1][1] = a[0][0] / det;
        (det, inv)
    } else {
        let c = |i: usize, j: usize| {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]
        };
        let det = a[0][0] * c(0, 0) + a[0][1] * c(0, 1) + a[0][2] * c(0, 2);
        for i in 0..3 {
            for j in 0..3 {
                inv[i][j] = c(j, i) / det;
            }
        }
        (det, inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MaterialParams;

    #[test]
    fn regime_model_adaptation() {
        let p = MaterialParams::from_mu_kappa(1.0, 5.0).unwrap();
        let m = MaterialModel::decoupled(p);
        assert_eq!(Regime::Flatland.adapt_model(&m).unwrap().kind(), ModelKind::FlatlandNeoHookean);
        assert_eq!(Regime::PlaneStress.adapt_model(&m).unwrap().kind(), ModelKind::NeoHookeanDecoupled);
        assert!(Regime::Flatland.adapt_model(&MaterialModel::alternative(p)).is_err());
        assert!(check_compatible(Regime::PlaneStress, Formulation::ThreeField).is_err());
        assert!(check_compatible(Regime::PlaneStrain, Formulation::ThreeField).is_ok());
    }

    #[test]
    fn layout_numbering() {
        let l = DofLayout { dim: 2, n_nodes: 9, n_elements: 4, n_modal: 3 };
        assert_eq!(l.n_u(), 18);
        assert_eq!(l.n_total(), 18 + 24);
        assert_eq!(l.pressure_dof(1, 0), 24);
        assert_eq!(l.dilatation_dof(1, 2), 29);
        let mut d = Vec::new();
        l.element_dofs(&[0, 1, 3, 4], 1, &mut d);
        assert_eq!(d, vec![0, 1, 2, 3, 6, 7, 8, 9, 24, 25, 26, 27, 28, 29]);
    }

    #[test]
    fn cached_volumes_match_mesh() {
        let mesh = Mesh::structured(2, 2, [3, 2, 0], |s| [3.0 * s[0] + s[1] * s[0], 2.0 * s[1], 0.0]).unwrap();
        let d = Discretization::new(&mesh, Regime::PlaneStress, Formulation::OneField).unwrap();
        assert!((d.dv.iter().sum::<f64>() - mesh.volume()).abs() < 1e-12);
        let h = Mesh::structured(3, 1, [1, 1, 1], |s| s).unwrap();
        assert!(Discretization::new(&h, Regime::PlaneStrain, Formulation::OneField).is_err());
    }
}
