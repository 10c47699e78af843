//! Element residuals and tangents.
//!
//! Sign convention: `R = f_ext − f_int` and `K = −∂R/∂q`, so a Newton
//! update solves `K Δq = R`.

use crate::constitutive::{vol_derivs_shifted, MaterialModel};
use crate::error::{Error, Result};
use crate::fem::{ElementGeom, Regime};
use crate::plane_stress::{condense_strain, CondensationSettings};
use crate::tensor::{det_shifted, Tensor2, Tensor4};

type A4 = [[[[f64; 3]; 3]; 3]; 3];

#[derive(Clone, Debug, Default)]
pub struct ElementOutput {
    pub r: Vec<f64>,
    /// Row-major `n × n`; empty when not requested.
    pub k: Vec<f64>,
    pub max_inner: usize,
    /// Largest `|S33| / μ` left by the plane stress condensation.
    pub max_s33: f64,
}

/// Constitutive response at one point, in the regime's working dimension.
#[derive(Clone, Debug)]
pub struct PointResponse {
    pub s: Tensor2,
    pub cc: Tensor4,
    pub c33: f64,
    pub inner: usize,
    /// `|S33|` left by the condensation; zero outside plane stress.
    pub s33: f64,
}

/// Displacement gradient `H = ∇_X u` at quadrature point `q`.
pub fn displacement_gradient(g: &ElementGeom, q: usize, ue: &[f64]) -> Tensor2 {
    let d = g.dim;
    let mut h = Tensor2::zeros(d);
    for a in 0..g.nn {
        let gr = g.grad(q, a);
        for i in 0..d {
            let u = ue[a * d + i];
            for j in 0..d {
                h[(i, j)] += u * gr[j];
            }
        }
    }
    h
}

/// In-plane (or full 3D) deformation gradient `F = I + H`.
pub fn deformation_gradient(g: &ElementGeom, q: usize, ue: &[f64]) -> Tensor2 {
    Tensor2::identity(g.dim) + displacement_gradient(g, q, ue)
}

/// `C − I = H + Hᵀ + HᵀH`.
fn strain_from_gradient(h: &Tensor2) -> Tensor2 {
    *h + h.transpose() + h.transpose() * *h
}

/// Three-dimensional deformation gradient implied by the regime:
/// `F33 = 1` in plane strain, `F33 = √C33` in plane stress.
pub fn embedded_deformation_gradient(regime: Regime, f: &Tensor2, c33: f64) -> Result<Tensor2> {
    let d = f.det();
    if !(d > 0.0) {
        return Err(Error::InvertedElement { det: d });
    }
    Ok(match regime {
        Regime::Flatland | Regime::ThreeD => *f,
        Regime::PlaneStrain => f.embed(1.0),
        Regime::PlaneStress => f.embed(c33.sqrt()),
    })
}

/// Stress and material tangent at a point for the displacement formulation,
/// given the displacement gradient `h`. `model` must already be adapted to
/// the regime.
pub fn material_point(
    regime: Regime,
    model: &MaterialModel,
    h: &Tensor2,
    c33_init: f64,
    settings: &CondensationSettings,
) -> Result<PointResponse> {
    let jd = det_shifted(h);
    if !(jd > -1.0) {
        return Err(Error::InvertedElement { det: 1.0 + jd });
    }
    let m = strain_from_gradient(h);
    match regime {
        Regime::Flatland | Regime::ThreeD => {
            let st = model.evaluate_strain(&m)?;
            Ok(PointResponse { s: st.s, cc: st.cc, c33: 1.0, inner: 0, s33: 0.0 })
        }
        Regime::PlaneStrain => {
            let st = model.evaluate_strain(&m.embed(0.0))?;
            Ok(PointResponse { s: st.s.in_plane(), cc: st.cc.in_plane(), c33: 1.0, inner: 0, s33: 0.0 })
        }
        Regime::PlaneStress => {
            let cs = condense_strain(model, &m, c33_init, settings)?;
            Ok(PointResponse { s: cs.sbar, cc: cs.ccbar, c33: cs.c33, inner: cs.inner_iters, s33: cs.residual_s33.abs() })
        }
    }
}

/// `A_iJkL = F_iI ℂ_IJKL F_kK`.
fn material_to_mixed(f: &Tensor2, cc: &Tensor4) -> A4 {
    let d = f.dim();
    let mut t: A4 = [[[[0.0; 3]; 3]; 3]; 3];
    // First contract K, then I.
    let mut tmp: A4 = [[[[0.0; 3]; 3]; 3]; 3];
    for ii in 0..d {
        for jj in 0..d {
            for k in 0..d {
                for ll in 0..d {
                    let mut s = 0.0;
                    for kk in 0..d {
                        s += f[(k, kk)] * cc.get(ii, jj, kk, ll);
                    }
                    tmp[ii][jj][k][ll] = s;
                }
            }
        }
    }
    for i in 0..d {
        for jj in 0..d {
            for k in 0..d {
                for ll in 0..d {
                    let mut s = 0.0;
                    for ii in 0..d {
                        s += f[(i, ii)] * tmp[ii][jj][k][ll];
                    }
                    t[i][jj][k][ll] = s;
                }
            }
        }
    }
    t
}

fn spatial_to_array(c: &Tensor4) -> A4 {
    let d = c.dim();
    let mut t: A4 = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    t[i][j][k][l] = c.get(i, j, k, l);
                }
            }
        }
    }
    t
}

/// Adds `∫ G_a : A : G_b + δ_ik [G_a · σ · G_b]` into the leading `nn·d` block.
fn add_uu(d: usize, nn: usize, grads: &[[f64; 3]], a4: &A4, stress: &Tensor2, dv: f64, k: &mut [f64], n: usize) {
    // T_a[i][k][L] = Σ_J g_a[J] A[i][J][k][L]
    let mut t = vec![[[[0.0f64; 3]; 3]; 3]; nn];
    let mut sg = vec![[0.0f64; 3]; nn];
    for a in 0..nn {
        let ga = grads[a];
        for i in 0..d {
            for kk in 0..d {
                for l in 0..d {
                    let mut s = 0.0;
                    for j in 0..d {
                        s += ga[j] * a4[i][j][kk][l];
                    }
                    t[a][i][kk][l] = s * dv;
                }
            }
        }
        for l in 0..d {
            sg[a][l] = (0..d).map(|j| ga[j] * stress[(j, l)]).sum::<f64>() * dv;
        }
    }
    for a in 0..nn {
        for b in a..nn {
            let gb = grads[b];
            let geo: f64 = (0..d).map(|l| sg[a][l] * gb[l]).sum();
            for i in 0..d {
                for kk in 0..d {
                    let mut s: f64 = (0..d).map(|l| t[a][i][kk][l] * gb[l]).sum();
                    if i == kk {
                        s += geo;
                    }
                    let (r, c) = (a * d + i, b * d + kk);
                    k[r * n + c] += s;
                    if a != b {
                        k[c * n + r] += s;
                    }
                }
            }
        }
    }
}

/// Displacement-formulation element. `c33` holds one warm-start value per
/// quadrature point on entry and the converged values on exit (plane stress).
pub fn element_onefield(
    regime: Regime,
    model: &MaterialModel,
    g: &ElementGeom,
    ue: &[f64],
    c33: &mut [f64],
    settings: &CondensationSettings,
    want_k: bool,
) -> Result<ElementOutput> {
    let d = g.dim;
    let n = g.nn * d;
    let mut out = ElementOutput { r: vec![0.0; n], k: if want_k { vec![0.0; n * n] } else { Vec::new() }, max_inner: 0, max_s33: 0.0 };
    let mut grads = vec![[0.0; 3]; g.nn];
    for q in 0..g.nq {
        let h = displacement_gradient(g, q, ue);
        let f = Tensor2::identity(d) + h;
        let init = if regime == Regime::PlaneStress { c33[q] } else { 1.0 };
        let pr = material_point(regime, model, &h, init, settings).map_err(|e| e.at(0, q))?;
        if regime == Regime::PlaneStress {
            c33[q] = pr.c33;
        }
        out.max_inner = out.max_inner.max(pr.inner);
        out.max_s33 = out.max_s33.max(pr.s33 / model.mu());
        let p = f * pr.s;
        let dv = g.dv[q];
        for a in 0..g.nn {
            let gr = g.grad(q, a);
            grads[a] = [0.0; 3];
            grads[a][..d].copy_from_slice(gr);
            for i in 0..d {
                let fi: f64 = (0..d).map(|j| p[(i, j)] * gr[j]).sum();
                out.r[a * d + i] -= fi * dv;
            }
        }
        if want_k {
            let a4 = material_to_mixed(&f, &pr.cc);
            add_uu(d, g.nn, &grads, &a4, &pr.s, dv, &mut out.k, n);
        }
    }
    Ok(out)
}

/// Three-field Hu–Washizu element. `qe` stacks element displacements, the
/// pressure coefficients and the coefficients of `J̃ − 1`.
pub fn element_threefield(regime: Regime, model: &MaterialModel, g: &ElementGeom, qe: &[f64], want_k: bool) -> Result<ElementOutput> {
    if regime == Regime::PlaneStress {
        return Err(Error::UnsupportedRegime { regime: regime.name(), what: "the three-field formulation" });
    }
    let d = g.dim;
    let nm = g.n_modal;
    let nu = g.nn * d;
    let n = nu + 2 * nm;
    let (ue, rest) = qe.split_at(nu);
    let (pe, je) = rest.split_at(nm);
    let kappa = model.kappa();
    let mut out = ElementOutput { r: vec![0.0; n], k: if want_k { vec![0.0; n * n] } else { Vec::new() }, max_inner: 0, max_s33: 0.0 };
    let mut grads = vec![[0.0; 3]; g.nn];
    for q in 0..g.nq {
        let h = displacement_gradient(g, q, ue);
        let f = Tensor2::identity(d) + h;
        let fm = embedded_deformation_gradient(regime, &f, 1.0).map_err(|e| e.at(0, q))?;
        let (tau_iso, jc_iso, j) = model.iso_kirchhoff(&fm).map_err(|e| e.at(0, q))?;
        let jm1 = det_shifted(&h);
        let nq_vals = g.modal(q);
        let pt: f64 = (0..nm).map(|r| nq_vals[r] * pe[r]).sum();
        let theta: f64 = (0..nm).map(|r| nq_vals[r] * je[r]).sum();
        let (_, g1, g2) = vol_derivs_shifted(model.vol_law(), theta).map_err(|e| e.at(0, q))?;
        let dm = fm.dim();
        let eye = Tensor2::identity(dm);
        let mut tau = tau_iso + eye * (pt * j);
        let mut jc = jc_iso;
        for i in 0..dm {
            for k in 0..dm {
                jc.add_at(i, i, k, k, pt * j);
                jc.add_at(i, k, i, k, -pt * j);
                jc.add_at(i, k, k, i, -pt * j);
            }
        }
        if dm != d {
            tau = tau.in_plane();
            jc = jc.in_plane();
        }
        let finv = f.inverse().map_err(|e| e.at(0, q))?;
        let dv = g.dv[q];
        for a in 0..g.nn {
            let gr = g.grad(q, a);
            let mut gx = [0.0; 3];
            for jj in 0..d {
                gx[jj] = (0..d).map(|c| gr[c] * finv[(c, jj)]).sum();
            }
            grads[a] = gx;
            for i in 0..d {
                let fi: f64 = (0..d).map(|jj| tau[(i, jj)] * gx[jj]).sum();
                out.r[a * d + i] -= fi * dv;
            }
        }
        for r in 0..nm {
            out.r[nu + r] -= nq_vals[r] * (jm1 - theta) * dv;
            out.r[nu + nm + r] -= nq_vals[r] * (kappa * g1 - pt) * dv;
        }
        if want_k {
            add_uu(d, g.nn, &grads, &spatial_to_array(&jc), &tau, dv, &mut out.k, n);
            for a in 0..g.nn {
                for i in 0..d {
                    let row = a * d + i;
                    for r in 0..nm {
                        let v = grads[a][i] * j * nq_vals[r] * dv;
                        out.k[row * n + nu + r] += v;
                        out.k[(nu + r) * n + row] += v;
                    }
                }
            }
            for r in 0..nm {
                for s in 0..nm {
                    let m = nq_vals[r] * nq_vals[s] * dv;
                    out.k[(nu + r) * n + nu + nm + s] -= m;
                    out.k[(nu + nm + r) * n + nu + s] -= m;
                    out.k[(nu + nm + r) * n + nu + nm + s] += kappa * g2 * m;
                }
            }
        }
    }
    Ok(out)
}
