//! Hyperelastic strain energies with analytic stresses and tangents.
//!
//! All models are isotropic neo-Hookean variants written in terms of the
//! right Cauchy–Green tensor `C`. The returned tangent is `ℂ = 2 ∂S/∂C`,
//! i.e. the second derivative of the energy with respect to the Green–Lagrange
//! strain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{det, det_shifted, odot, otimes, Tensor2, Tensor4};

/// Volumetric energy `𝒢(J)`, scaled by the bulk modulus in the energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumetricLaw {
    /// `½ [J − 1]²`
    SquaredJminus1,
    /// `¼ [J² − 1 − 2 ln J]`
    #[default]
    QuarterJsqMinusLog,
    /// `½ [ln J]²`
    LogSquared,
    /// `J ln J − J + 1`
    JLogJ,
}

impl VolumetricLaw {
    pub const ALL: [VolumetricLaw; 4] =
        [Self::SquaredJminus1, Self::QuarterJsqMinusLog, Self::LogSquared, Self::JLogJ];

    /// `(𝒢, 𝒢′, 𝒢″)` at `j`.
    pub fn derivs(self, j: f64) -> Result<(f64, f64, f64)> {
        vol_derivs(self, j)
    }
}

pub fn vol_derivs(law: VolumetricLaw, j: f64) -> Result<(f64, f64, f64)> {
    vol_derivs_shifted(law, j - 1.0)
}

/// `(𝒢, 𝒢′, 𝒢″)` at `J = 1 + jm1`, written so that `𝒢` and `𝒢′` keep full
/// relative accuracy for small `jm1`.
pub fn vol_derivs_shifted(law: VolumetricLaw, jm1: f64) -> Result<(f64, f64, f64)> {
    let j = 1.0 + jm1;
    if !(jm1 > -1.0) || !(j > 0.0) {
        return Err(Error::NonPositiveJ(j));
    }
    let ln = jm1.ln_1p();
    Ok(match law {
        VolumetricLaw::SquaredJminus1 => (0.5 * jm1 * jm1, jm1, 1.0),
        VolumetricLaw::QuarterJsqMinusLog => {
            (0.25 * (jm1 * (2.0 + jm1) - 2.0 * ln), 0.5 * jm1 * (2.0 + jm1) / j, 0.5 * (1.0 + 1.0 / (j * j)))
        }
        VolumetricLaw::LogSquared => (0.5 * ln * ln, ln / j, (1.0 - ln) / (j * j)),
        VolumetricLaw::JLogJ => (j * ln - jm1, ln, 1.0 / j),
    })
}

/// `J − 1` for `C = I + M`.
pub fn jacobian_shifted(m: &Tensor2) -> f64 {
    let dm1 = det_shifted(m);
    dm1 / (1.0 + (1.0 + dm1).max(0.0).sqrt())
}

/// Shear and bulk moduli (MPa). Poisson's ratio is kept alongside for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub mu: f64,
    pub kappa: f64,
    pub nu: f64,
}

impl MaterialParams {
    pub fn from_mu_kappa(mu: f64, kappa: f64) -> Result<Self> {
        if !(mu > 0.0) || !(kappa > 0.0) {
            return Err(Error::InvalidMaterial(format!("mu = {mu}, kappa = {kappa} must be positive")));
        }
        let nu = (3.0 * kappa - 2.0 * mu) / (2.0 * (3.0 * kappa + mu));
        Ok(Self { mu, kappa, nu })
    }

    /// `κ = 2μ(1 + ν) / (3(1 − 2ν))`.
    pub fn from_mu_nu(mu: f64, nu: f64) -> Result<Self> {
        if !(nu < 0.5) || !(nu > -1.0) {
            return Err(Error::InvalidMaterial(format!("Poisson's ratio {nu} must lie in (-1, 0.5)")));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidMaterial(format!("mu = {mu} must be positive")));
        }
        let kappa = 2.0 * mu * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu));
        Ok(Self { mu, kappa, nu })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `μ/2 [I_Ĉ − 3] + κ 𝒢(J)`, three-dimensional.
    NeoHookeanDecoupled,
    /// `μ/2 [I_C − 3 − 2 ln J] + κ/2 [J − 1]²`, three-dimensional.
    NeoHookeanAlternative,
    /// `μ/2 [I_Ĉ̄ − 2] + κ 𝒢(J̄)` with `Ĉ̄ = J̄⁻¹ C̄`, two-dimensional.
    FlatlandNeoHookean,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::NeoHookeanDecoupled => "neo-hookean-decoupled",
            ModelKind::NeoHookeanAlternative => "neo-hookean-alternative",
            ModelKind::FlatlandNeoHookean => "flatland-neo-hookean",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    kind: ModelKind,
    params: MaterialParams,
    vol_law: VolumetricLaw,
}

/// Energy, second Piola–Kirchhoff stress and `ℂ = 2 ∂S/∂C`.
///
/// `coefficient` is the factor multiplying `C⁻¹` in the stress: `γ` for the
/// decoupled models, `α = κJ[J − 1]` for the alternative model.
#[derive(Clone, Debug)]
pub struct StressTangent {
    pub psi: f64,
    pub s: Tensor2,
    pub cc: Tensor4,
    pub coefficient: f64,
}

/// Isochoric/volumetric pieces of the spatial tangent and Kirchhoff stress.
#[derive(Clone, Debug)]
pub struct EulerianSplit {
    pub c_iso: Tensor4,
    pub c_vol: Tensor4,
    pub tau_iso: Tensor2,
    pub tau_vol: Tensor2,
}

impl MaterialModel {
    pub fn new(kind: ModelKind, params: MaterialParams, vol_law: VolumetricLaw) -> Result<Self> {
        if !(params.mu > 0.0) || !(params.kappa > 0.0) {
            return Err(Error::InvalidMaterial("moduli must be positive".into()));
        }
        if kind == ModelKind::NeoHookeanAlternative && vol_law != VolumetricLaw::SquaredJminus1 {
            return Err(Error::InvalidMaterial("the alternative neo-Hookean model uses the ½[J − 1]² volumetric law".into()));
        }
        Ok(Self { kind, params, vol_law })
    }

    pub fn decoupled(params: MaterialParams) -> Self {
        Self { kind: ModelKind::NeoHookeanDecoupled, params, vol_law: VolumetricLaw::QuarterJsqMinusLog }
    }

    pub fn alternative(params: MaterialParams) -> Self {
        Self { kind: ModelKind::NeoHookeanAlternative, params, vol_law: VolumetricLaw::SquaredJminus1 }
    }

    pub fn flatland(params: MaterialParams) -> Self {
        Self { kind: ModelKind::FlatlandNeoHookean, params, vol_law: VolumetricLaw::QuarterJsqMinusLog }
    }

    /// Same moduli, different kind. Alternative models switch to `½[J − 1]²`.
    pub fn with_kind(&self, kind: ModelKind) -> Self {
        let vol_law = if kind == ModelKind::NeoHookeanAlternative { VolumetricLaw::SquaredJminus1 } else { self.vol_law };
        Self { kind, params: self.params, vol_law }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn mu(&self) -> f64 {
        self.params.mu
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    pub fn vol_law(&self) -> VolumetricLaw {
        self.vol_law
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::FlatlandNeoHookean => 2,
            _ => 3,
        }
    }

    fn is_decoupled(&self) -> bool {
        matches!(self.kind, ModelKind::NeoHookeanDecoupled | ModelKind::FlatlandNeoHookean)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: d });
        }
        Ok(())
    }

    /// `p = κ 𝒢′(J)` and `dp/dJ = κ 𝒢″(J)`.
    pub fn pressure(&self, j: f64) -> Result<(f64, f64)> {
        self.pressure_shifted(j - 1.0)
    }

    /// Pressure at `J = 1 + jm1`.
    pub fn pressure_shifted(&self, jm1: f64) -> Result<(f64, f64)> {
        let (_, g1, g2) = vol_derivs_shifted(self.vol_law, jm1)?;
        Ok((self.params.kappa * g1, self.params.kappa * g2))
    }

    pub fn evaluate(&self, c: &Tensor2) -> Result<StressTangent> {
        self.evaluate_strain(&(*c - Tensor2::identity(c.dim())))
    }

    /// As [`evaluate`](Self::evaluate) at `C = I + M`. Passing `M` directly
    /// keeps `J − 1`, and with it the volumetric stress, free of cancellation
    /// when the bulk modulus is large.
    pub fn evaluate_strain(&self, m: &Tensor2) -> Result<StressTangent> {
        self.check_dim(m.dim())?;
        let d = m.dim();
        let eye = Tensor2::identity(d);
        let c = eye + *m;
        let det_c = det(&c);
        if !(det_c > 0.0) {
            return Err(Error::NonSpd { det: det_c });
        }
        let jm1 = jacobian_shifted(m);
        let j = 1.0 + jm1;
        let c_inv = c.inverse()?;
        let i_c = c.trace();
        let mu = self.params.mu;
        let (g, g1, g2) = vol_derivs_shifted(self.vol_law, jm1)?;
        let kappa = self.params.kappa;
        let p = kappa * g1;
        let dp = kappa * g2;
        let inv_odot = odot(&c_inv, &c_inv);
        let inv_otimes = otimes(&c_inv, &c_inv);

        match self.kind {
            ModelKind::NeoHookeanDecoupled | ModelKind::FlatlandNeoHookean => {
                let df = d as f64;
                let s_iso = j.powf(-2.0 / df);
                let gamma = p * j - mu / df * s_iso * i_c;
                let s = eye * (mu * s_iso) + c_inv * gamma;
                let psi = 0.5 * mu * (s_iso * i_c - df) + kappa * g;

                let mut cc = &otimes(&eye, &c_inv) + &otimes(&c_inv, &eye);
                cc = cc.scaled(-2.0 / df);
                cc += &inv_otimes.scaled(2.0 / (df * df) * i_c);
                cc += &inv_odot.scaled(2.0 / df * i_c);
                cc = cc.scaled(mu * s_iso);
                cc += &inv_otimes.scaled(j * (p + j * dp));
                cc -= &inv_odot.scaled(2.0 * p * j);
                Ok(StressTangent { psi, s, cc, coefficient: gamma })
            }
            ModelKind::NeoHookeanAlternative => {
                let alpha = p * j;
                let s = (eye - c_inv) * mu + c_inv * alpha;
                let psi = 0.5 * mu * (i_c - 3.0 - 2.0 * j.ln()) + kappa * g;
                let mut cc = inv_odot.scaled(2.0 * (mu - alpha));
                cc += &inv_otimes.scaled(j * (p + j * dp));
                Ok(StressTangent { psi, s, cc, coefficient: alpha })
            }
        }
    }

    /// Strain energy only.
    pub fn energy(&self, c: &Tensor2) -> Result<f64> {
        self.check_dim(c.dim())?;
        let inv = crate::tensor::invariants(c)?;
        let (g, _, _) = vol_derivs(self.vol_law, inv.j)?;
        let mu = self.params.mu;
        let df = c.dim() as f64;
        Ok(match self.kind {
            ModelKind::NeoHookeanAlternative => 0.5 * mu * (inv.i_c - 3.0 - 2.0 * inv.j.ln()) + self.params.kappa * g,
            _ => 0.5 * mu * (inv.j.powf(-2.0 / df) * inv.i_c - df) + self.params.kappa * g,
        })
    }

    /// `S = ℙ : [2 ∂ψ_iso/∂Ĉ] + pJ C⁻¹` with `ℙ = J^{-2/d} [𝕀 − (1/d) C⁻¹ ⊗ C]`.
    ///
    /// Returns `(S_iso, S_vol, p, ℙ)`.
    pub fn split_stress(&self, c: &Tensor2) -> Result<(Tensor2, Tensor2, f64, Tensor4)> {
        if !self.is_decoupled() {
            return Err(Error::UnsupportedModel(self.kind.name()));
        }
        self.check_dim(c.dim())?;
        let d = c.dim();
        let df = d as f64;
        let det_c = det(c);
        if !(det_c > 0.0) {
            return Err(Error::NonSpd { det: det_c });
        }
        let j = det_c.sqrt();
        let c_inv = c.inverse()?;
        let mut proj = Tensor4::sym_identity(d);
        proj -= &otimes(&c_inv, c).scaled(1.0 / df);
        let proj = proj.scaled(j.powf(-2.0 / df));
        // 2 ∂ψ_iso/∂Ĉ = μ I for neo-Hookean.
        let s_iso = proj.ddot2(&(Tensor2::identity(d) * self.params.mu));
        let (p, _) = self.pressure(j)?;
        let s_vol = c_inv * (p * j);
        Ok((s_iso, s_vol, p, proj))
    }

    /// Isochoric Kirchhoff stress `τ_iso = 𝔻 : τ̂` and `J 𝕔_iso`.
    pub fn iso_kirchhoff(&self, f: &Tensor2) -> Result<(Tensor2, Tensor4, f64)> {
        if !self.is_decoupled() {
            return Err(Error::UnsupportedModel(self.kind.name()));
        }
        self.check_dim(f.dim())?;
        let d = f.dim();
        let df = d as f64;
        let j = det(f);
        if !(j > 0.0) {
            return Err(Error::InvertedElement { det: j });
        }
        let eye = Tensor2::identity(d);
        let b_hat = (*f * f.transpose()) * j.powf(-2.0 / df);
        let tau_hat = b_hat * self.params.mu;
        let tr_tau_hat = tau_hat.trace();
        let tau_iso = tau_hat - eye * (tr_tau_hat / df);
        let mut dev = Tensor4::sym_identity(d);
        dev -= &otimes(&eye, &eye).scaled(1.0 / df);
        let mut jc_iso = dev.scaled(2.0 / df * tr_tau_hat);
        jc_iso -= &(&otimes(&eye, &tau_iso) + &otimes(&tau_iso, &eye)).scaled(2.0 / df);
        Ok((tau_iso, jc_iso, j))
    }

    /// Spatial split `𝕔 = 𝕔_iso + 𝕔_vol`, `τ = τ_iso + τ_vol`.
    pub fn eulerian_split_tangent(&self, f: &Tensor2) -> Result<EulerianSplit> {
        let (tau_iso, jc_iso, j) = self.iso_kirchhoff(f)?;
        let d = f.dim();
        let eye = Tensor2::identity(d);
        let (p, dp) = self.pressure(j)?;
        let mut c_vol = otimes(&eye, &eye).scaled(p + j * dp);
        c_vol -= &Tensor4::sym_identity(d).scaled(2.0 * p);
        Ok(EulerianSplit { c_iso: jc_iso.scaled(1.0 / j), c_vol, tau_iso, tau_vol: eye * (p * j) })
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use rand::Rng;

    pub fn random_f(rng: &mut impl Rng, dim: usize, amp: f64) -> Tensor2 {
        Tensor2::identity(dim) + Tensor2::from_fn(dim, |_, _| rng.random_range(-amp..amp))
    }

    pub fn random_spd(rng: &mut impl Rng, dim: usize, amp: f64) -> Tensor2 {
        let f = random_f(rng, dim, amp);
        f.transpose() * f
    }

    pub fn random_rotation(rng: &mut impl Rng) -> Tensor2 {
        // Rodrigues formula for a random axis/angle.
        let mut axis: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        axis.iter_mut().for_each(|a| *a /= n);
        let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let k = Tensor2::from_rows3([[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]);
        Tensor2::identity(3) + k * th.sin() + (k * k) * (1.0 - th.cos())
    }

    /// Symmetric unit perturbation in slot (i, j).
    pub fn sym_unit(dim: usize, i: usize, j: usize) -> Tensor2 {
        let mut e = Tensor2::zeros(dim);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        e
    }
}
