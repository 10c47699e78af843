//! Strong plane stress at a single quadrature point.
//!
//! Given the in-plane right Cauchy–Green block `C̄`, the out-of-plane
//! component `C33` is found by Newton iteration on `S33(C̄, C33) = 0`, using
//! `∂S33/∂C33 = ½ ℂ3333` from the full three-dimensional tangent. The
//! condensed tangent follows from the implicit function theorem:
//!
//! ```text
//! ℂ̄_IJKL = ℂ_IJKL − ℂ_IJ33 ℂ_33KL / ℂ_3333
//! ```
//!
//! This works for any three-dimensional model. The neo-Hookean closed forms
//! in [`closed_form_decoupled`] and [`closed_form_alternative`] are kept as
//! independent cross-checks.

use serde::{Deserialize, Serialize};

use crate::constitutive::{MaterialModel, MaterialParams, ModelKind};
use crate::error::{Error, Result};
use crate::tensor::{det, odot, otimes, Tensor2, Tensor4};

const MAX_HALVINGS: usize = 20;
const STALL_ULPS: f64 = 32.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Start from the value converged at the same point in the previous load step.
    #[default]
    PreviousConverged,
    Unity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CondensationSettings {
    /// Tolerance on `|S33|` in MPa. `None` means `1e-10 μ` of the material at hand.
    pub abs_tol: Option<f64>,
    pub max_iters: usize,
    pub init_strategy: InitStrategy,
    /// Extra Newton steps taken once the tolerance is met. Each one is kept
    /// only if it lowers `|S33|`, so the outer residual is not polluted by
    /// the inner tolerance.
    pub polish_steps: usize,
}

impl Default for CondensationSettings {
    fn default() -> Self {
        Self { abs_tol: None, max_iters: 50, init_strategy: InitStrategy::PreviousConverged, polish_steps: 1 }
    }
}

impl CondensationSettings {
    pub fn tolerance(&self, model: &MaterialModel) -> f64 {
        self.abs_tol.unwrap_or(1e-10 * model.mu())
    }
}

/// Converged plane stress state at one quadrature point.
#[derive(Clone, Debug)]
pub struct CondensedState {
    pub cbar: Tensor2,
    pub c33: f64,
    pub sbar: Tensor2,
    pub ccbar: Tensor4,
    pub inner_iters: usize,
    pub residual_s33: f64,
}

fn check_model(model: &MaterialModel, cbar: &Tensor2) -> Result<()> {
    if model.dim() != 3 {
        return Err(Error::UnsupportedModel(model.kind().name()));
    }
    if cbar.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: cbar.dim() });
    }
    let d = det(cbar);
    if !(d > 0.0) || !(cbar[(0, 0)] > 0.0) {
        return Err(Error::NonSpd { det: d });
    }
    Ok(())
}

/// Newton iteration for `C33` such that `|S33| <= tol`. Returns
/// `(C33, iterations, final S33)`.
pub fn solve_c33(
    model: &MaterialModel,
    cbar: &Tensor2,
    init: f64,
    settings: &CondensationSettings,
) -> Result<(f64, usize, f64)> {
    solve_c33_traced(model, cbar, init, settings, None)
}

/// As [`solve_c33`], additionally recording `|S33|` before every update.
pub fn solve_c33_traced(
    model: &MaterialModel,
    cbar: &Tensor2,
    init: f64,
    settings: &CondensationSettings,
    trace: Option<&mut Vec<f64>>,
) -> Result<(f64, usize, f64)> {
    let mbar = *cbar - Tensor2::identity(2);
    let (m33, iters, r) = solve_strain(model, &mbar, init, settings, trace)?;
    Ok((1.0 + m33, iters, r))
}

/// Newton iteration on `m33 = C33 − 1` for `C̄ = I + M̄`.
fn solve_strain(
    model: &MaterialModel,
    mbar: &Tensor2,
    init: f64,
    settings: &CondensationSettings,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(f64, usize, f64)> {
    check_model(model, &(*mbar + Tensor2::identity(2)))?;
    if !(init > 0.0) {
        return Err(Error::NonPhysicalRoot { c33: init });
    }
    let tol = settings.tolerance(model);
    let mut m33 = init - 1.0;
    let mut iters = 0;
    loop {
        let st = model.evaluate_strain(&mbar.embed(m33))?;
        let r = st.s[(2, 2)];
        if let Some(t) = trace.as_deref_mut() {
            t.push(r.abs());
        }
        if r.abs() <= tol {
            return Ok(polish(model, mbar, m33, iters, r, st.cc.get(2, 2, 2, 2), settings.polish_steps));
        }
        if !r.is_finite() || iters >= settings.max_iters {
            return Err(Error::NoConvergence { iters, residual: r.abs() });
        }
        let slope = 0.5 * st.cc.get(2, 2, 2, 2);
        if !(slope.abs() > 1e-12 * model.mu()) {
            return Err(Error::SingularCondensation(slope));
        }
        let mut dm = -r / slope;
        if dm.abs() <= STALL_ULPS * f64::EPSILON * (1.0 + m33.abs()) {
            // The root is resolved to a few ulps of `m33`; what is left of
            // `S33` is evaluation roundoff, which grows like κ/C33².
            log::debug!("inner solve stalled at |S33| = {:e} after {iters} iterations", r.abs());
            return Ok((m33, iters, r));
        }
        let mut halvings = 0;
        while 1.0 + m33 + dm <= 0.0 {
            if halvings == MAX_HALVINGS {
                return Err(Error::NonPhysicalRoot { c33: 1.0 + m33 + dm });
            }
            dm *= 0.5;
            halvings += 1;
        }
        m33 += dm;
        iters += 1;
    }
}

fn polish(model: &MaterialModel, mbar: &Tensor2, mut m33: f64, mut iters: usize, mut r: f64, mut c3333: f64, steps: usize) -> (f64, usize, f64) {
    for _ in 0..steps {
        if r == 0.0 || c3333 == 0.0 {
            break;
        }
        let trial = m33 - 2.0 * r / c3333;
        let Ok(st) = model.evaluate_strain(&mbar.embed(trial)) else { break };
        let rt = st.s[(2, 2)];
        if !(trial > -1.0) || !(rt.abs() < r.abs()) {
            break;
        }
        (m33, r, c3333) = (trial, rt, st.cc.get(2, 2, 2, 2));
        iters += 1;
    }
    (m33, iters, r)
}

/// In-plane block of the three-dimensional stress at `C̄ ⊕ C33`.
pub fn condensed_stress(model: &MaterialModel, cbar: &Tensor2, c33: f64) -> Result<Tensor2> {
    check_model(model, cbar)?;
    Ok(model.evaluate(&cbar.embed(c33))?.s.in_plane())
}

fn condense_tangent(model: &MaterialModel, cc: &Tensor4) -> Result<Tensor4> {
    let c3333 = cc.get(2, 2, 2, 2);
    if !(c3333.abs() > 2e-12 * model.mu()) {
        return Err(Error::SingularCondensation(0.5 * c3333));
    }
    Ok(Tensor4::from_fn(2, |i, j, k, l| cc.get(i, j, k, l) - cc.get(i, j, 2, 2) * cc.get(2, 2, k, l) / c3333))
}

/// Consistent condensed tangent `ℂ̄ = 2 dS̄/dC̄` at a converged `C33`.
pub fn condensed_tangent(model: &MaterialModel, cbar: &Tensor2, c33: f64) -> Result<Tensor4> {
    check_model(model, cbar)?;
    let st = model.evaluate(&cbar.embed(c33))?;
    condense_tangent(model, &st.cc)
}

/// Solve for `C33` and return the full condensed state.
pub fn condense(
    model: &MaterialModel,
    cbar: &Tensor2,
    init: f64,
    settings: &CondensationSettings,
) -> Result<CondensedState> {
    condense_strain(model, &(*cbar - Tensor2::identity(2)), init, settings)
}

/// As [`condense`] for `C̄ = I + M̄`, with the unknown carried as `C33 − 1`.
pub fn condense_strain(
    model: &MaterialModel,
    mbar: &Tensor2,
    init: f64,
    settings: &CondensationSettings,
) -> Result<CondensedState> {
    let (m33, inner_iters, residual_s33) = solve_strain(model, mbar, init, settings, None)?;
    let st = model.evaluate_strain(&mbar.embed(m33))?;
    Ok(CondensedState {
        cbar: *mbar + Tensor2::identity(2),
        c33: 1.0 + m33,
        sbar: st.s.in_plane(),
        ccbar: condense_tangent(model, &st.cc)?,
        inner_iters,
        residual_s33,
    })
}

/// Closed-form plane stress quantities for the decoupled neo-Hookean model
/// with `𝒢 = ¼[J² − 1 − 2 ln J]`.
#[derive(Clone, Debug)]
pub struct DecoupledClosedForm {
    pub sbar: Tensor2,
    pub ccbar: Tensor4,
    /// `γ = κ/2 [J² − 1] − μ/3 I_C J^{-2/3}`; equals `−μ C33 J^{-2/3}` once `S33 = 0`.
    pub gamma: f64,
    /// `dS33/dC̄` at fixed `C33`.
    pub beta: Tensor2,
    pub ds33_dc33: f64,
    pub dc33_dcbar: Tensor2,
    pub dj_dcbar: Tensor2,
    pub dj_dc33: f64,
}

pub fn closed_form_decoupled(cbar: &Tensor2, c33: f64, params: &MaterialParams) -> Result<DecoupledClosedForm> {
    let (mu, kappa) = (params.mu, params.kappa);
    let jbar2 = det(cbar);
    if !(jbar2 > 0.0) || !(c33 > 0.0) {
        return Err(Error::NonSpd { det: jbar2 * c33 });
    }
    let ci = cbar.inverse()?;
    let eye = Tensor2::identity(2);
    let j = (c33 * jbar2).sqrt();
    let i_c = cbar.trace() + c33;
    let jm23 = j.powf(-2.0 / 3.0);
    let jm53 = j.powf(-5.0 / 3.0);

    // J² = C33 J̄²
    let dj_dcbar = ci * (0.5 / j * c33 * jbar2);
    let dj_dc33 = 0.5 / j * jbar2;
    let djm23_dcbar = dj_dcbar * (-2.0 / 3.0 * jm53);
    let djm23_dc33 = -2.0 / 3.0 * jm53 * dj_dc33;

    let gamma = 0.5 * kappa * (j * j - 1.0) - mu / 3.0 * i_c * jm23;
    let bracket = eye - ci * c33;
    let sbar = bracket * (mu * jm23);

    let mut dsbar_dcbar = odot(&ci, &ci).scaled(c33 * mu * jm23);
    dsbar_dcbar -= &otimes(&bracket, &dj_dcbar).scaled(2.0 / 3.0 * mu * jm53);
    let dsbar_dc33 = ci * (-mu * jm23) - bracket * (2.0 / 3.0 * mu * jm53 * dj_dc33);

    let dgamma_dc33 = 0.5 * kappa * jbar2 - mu / 3.0 * (i_c * djm23_dc33 + jm23);
    let ds33_dc33 = mu * djm23_dc33 + dgamma_dc33 / c33 - gamma / (c33 * c33);
    let beta = djm23_dcbar * mu + ci * (0.5 * kappa * jbar2) - (eye * jm23 + djm23_dcbar * i_c) * (mu / (3.0 * c33));
    if !(ds33_dc33.abs() > 1e-12 * mu) {
        return Err(Error::SingularCondensation(ds33_dc33));
    }
    let dc33_dcbar = beta * (-1.0 / ds33_dc33);

    let mut ccbar = dsbar_dcbar;
    ccbar += &otimes(&dsbar_dc33, &dc33_dcbar);
    Ok(DecoupledClosedForm {
        sbar,
        ccbar: ccbar.scaled(2.0),
        gamma,
        beta,
        ds33_dc33,
        dc33_dcbar,
        dj_dcbar,
        dj_dc33,
    })
}

/// Closed-form plane stress quantities for the alternative neo-Hookean model.
#[derive(Clone, Debug)]
pub struct AlternativeClosedForm {
    pub sbar: Tensor2,
    pub ccbar: Tensor4,
    /// `α = κ J [J − 1]`.
    pub alpha: f64,
    /// `∂α/∂C̄ = κ C33 C̄⁻¹ det C̄ [1 − ½ J⁻¹]`.
    pub dalpha_dcbar: Tensor2,
    pub ds33_dc33: f64,
}

pub fn closed_form_alternative(cbar: &Tensor2, c33: f64, params: &MaterialParams) -> Result<AlternativeClosedForm> {
    let (mu, kappa) = (params.mu, params.kappa);
    let jbar2 = det(cbar);
    if !(jbar2 > 0.0) || !(c33 > 0.0) {
        return Err(Error::NonSpd { det: jbar2 * c33 });
    }
    let ci = cbar.inverse()?;
    let j = (c33 * jbar2).sqrt();
    let alpha = kappa * j * (j - 1.0);
    let sbar = (Tensor2::identity(2) - ci * c33) * mu;
    let dalpha_dcbar = ci * (kappa * c33 * jbar2 * (1.0 - 0.5 / j));
    let dalpha_dc33 = kappa * (2.0 * j - 1.0) * 0.5 / j * jbar2;
    // S33 = μ + [α − μ] / C33
    let ds33_dc33 = dalpha_dc33 / c33 - (alpha - mu) / (c33 * c33);
    if !(ds33_dc33.abs() > 1e-12 * mu) {
        return Err(Error::SingularCondensation(ds33_dc33));
    }
    let dc33_dcbar = dalpha_dcbar * (-1.0 / (c33 * ds33_dc33));
    let mut ccbar = odot(&ci, &ci).scaled(c33 * mu);
    ccbar += &otimes(&(ci * -mu), &dc33_dcbar);
    Ok(AlternativeClosedForm { sbar, ccbar: ccbar.scaled(2.0), alpha, dalpha_dcbar, ds33_dc33 })
}

/// Dispatches to the matching closed form, if the model has one.
pub fn closed_form(model: &MaterialModel, cbar: &Tensor2, c33: f64) -> Result<(Tensor2, Tensor4)> {
    match model.kind() {
        ModelKind::NeoHookeanDecoupled if model.vol_law() == crate::constitutive::VolumetricLaw::QuarterJsqMinusLog => {
            let cf = closed_form_decoupled(cbar, c33, model.params())?;
            Ok((cf.sbar, cf.ccbar))
        }
        ModelKind::NeoHookeanAlternative => {
            let cf = closed_form_alternative(cbar, c33, model.params())?;
            Ok((cf.sbar, cf.ccbar))
        }
        _ => Err(Error::UnsupportedModel(model.kind().name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::testing::sym_unit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(mu: f64, kappa: f64) -> MaterialParams {
        MaterialParams::from_mu_kappa(mu, kappa).unwrap()
    }

    fn settings() -> CondensationSettings {
        CondensationSettings::default()
    }

    fn random_cbar(rng: &mut impl Rng) -> Tensor2 {
        let f = Tensor2::identity(2) + Tensor2::from_fn(2, |_, _| rng.random_range(-0.35..0.35));
        f.transpose() * f
    }

    fn models() -> Vec<MaterialModel> {
        vec![
            MaterialModel::decoupled(params(1.0, 10.0)),
            MaterialModel::decoupled(params(80.1938, 400_930.0)),
            MaterialModel::alternative(params(1.0, 2.0)),
            MaterialModel::alternative(params(2.0, 300.0)),
        ]
    }

    fn solve(m: &MaterialModel, cbar: &Tensor2) -> f64 {
        solve_c33(m, cbar, 1.0, &settings()).unwrap().0
    }

    #[test]
    fn reference_state_is_stress_free() {
        for m in models() {
            let (c33, iters, r) = solve_c33(&m, &Tensor2::identity(2), 1.0, &settings()).unwrap();
            assert_eq!((c33, iters), (1.0, 0));
            assert!(r.abs() < 1e-14);
            assert!(condensed_stress(&m, &Tensor2::identity(2), 1.0).unwrap().max_abs() < 1e-14);
        }
        let cf = closed_form_decoupled(&Tensor2::identity(2), 1.0, &params(3.0, 9.0)).unwrap();
        assert!((cf.gamma + 3.0).abs() < 1e-14 && cf.sbar.max_abs() < 1e-14);
        let cf = closed_form_alternative(&Tensor2::identity(2), 1.0, &params(3.0, 9.0)).unwrap();
        assert!(cf.alpha == 0.0 && cf.sbar.max_abs() < 1e-14);
    }

    #[test]
    fn alternative_root_matches_bisection() {
        // Root of μ[C33 − 1] + κJ[J − 1] = 0 with J = √(1.4641 C33), by bisection on (0, 1].
        let golden = 0.808_512_661_624_633_4;
        let m = MaterialModel::alternative(params(1.0, 2.0));
        let tight = CondensationSettings { abs_tol: Some(1e-15), ..settings() };
        let c33 = solve_c33(&m, &Tensor2::from_diag(&[1.21, 1.21]), 1.0, &tight).unwrap().0;
        assert!((c33 - golden).abs() < 1e-12, "{c33}");
    }

    #[test]
    fn near_incompressible_root_matches_bisection() {
        let golden = 0.694_493_101_354_244_4;
        let m = MaterialModel::decoupled(params(1.0, 1e4));
        let cbar = Tensor2::from_diag(&[1.44, 1.0]);
        let c33 = solve(&m, &cbar);
        assert!((c33 - golden).abs() < 1e-10, "{c33}");
        assert!((c33 * det(&cbar) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn uniaxial_curve_matches_energy_minimization() {
        // S̄11(λ) for uniaxial plane stress, from stationarity of ψ over (C22, C33).
        let golden = [
            (1.25, 0.453_125_337_709_127_26),
            (1.5, 0.669_609_098_280_324_5),
            (1.75, 0.785_548_867_886_255_2),
            (2.0, 0.853_076_183_790_111_7),
        ];
        let m = MaterialModel::alternative(params(1.0, 2.0));
        for (lam, s11) in golden {
            let s22 = |c22: f64| {
                let cbar = Tensor2::from_diag(&[lam * lam, c22]);
                condensed_stress(&m, &cbar, solve(&m, &cbar)).unwrap()[(1, 1)]
            };
            let (mut a, mut b) = (0.1, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if s22(mid) > 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let cbar = Tensor2::from_diag(&[lam * lam, 0.5 * (a + b)]);
            let s = condensed_stress(&m, &cbar, solve(&m, &cbar)).unwrap();
            assert!((s[(0, 0)] - s11).abs() < 1e-10, "λ = {lam}: {} vs {s11}", s[(0, 0)]);
        }
    }

    #[test]
    fn small_strain_limit_is_plane_stress_elasticity() {
        for m in models() {
            let cc = condensed_tangent(&m, &Tensor2::identity(2), 1.0).unwrap();
            let (mu, kappa) = (m.mu(), m.kappa());
            // The alternative model linearizes with Lamé λ = κ.
            let lambda = match m.kind() {
                ModelKind::NeoHookeanAlternative => kappa,
                _ => kappa - 2.0 / 3.0 * mu,
            };
            let lambda_ps = 2.0 * lambda * mu / (lambda + 2.0 * mu);
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let expect =
                Tensor4::from_fn(2, |i, j, k, l| lambda_ps * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k)));
            assert!((&cc - &expect).max_abs() <= 1e-10 * expect.max_abs(), "{:?}", m.kind());
        }
    }

    #[test]
    fn condensed_tangent_matches_resolved_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for m in models() {
            for _ in 0..20 {
                let cbar = random_cbar(&mut rng);
                let c33 = solve(&m, &cbar);
                let cc = condensed_tangent(&m, &cbar, c33).unwrap();
                let tight = CondensationSettings { abs_tol: Some(1e-13 * m.mu().max(m.kappa())), ..settings() };
                let h = 1e-6 * cbar.norm();
                let mut fd = Tensor4::zeros(2);
                for k in 0..2 {
                    for l in 0..2 {
                        let e = sym_unit(2, k, l) * if k == l { 1.0 } else { 0.5 };
                        let eval = |c: Tensor2| {
                            let (c33, _, _) = solve_c33(&m, &c, c33, &tight).unwrap();
                            condensed_stress(&m, &c, c33).unwrap()
                        };
                        let ds = (eval(cbar + e * h) - eval(cbar - e * h)) * (1.0 / (2.0 * h));
                        for i in 0..2 {
                            for j in 0..2 {
                                fd.set(i, j, k, l, 2.0 * ds[(i, j)]);
                            }
                        }
                    }
                }
                let err = (&fd - &cc).max_abs() / cc.max_abs();
                assert!(err < 1e-6, "{:?}: {err}", m.kind());
                assert!(cc.major_asymmetry() <= 1e-12 * cc.max_abs());
            }
        }
    }

    /// Root of S33 refined with extra Newton steps down to roundoff.
    fn polished_root(m: &MaterialModel, cbar: &Tensor2) -> f64 {
        let mut c33 = solve(m, cbar);
        let mut best = (f64::INFINITY, c33);
        for _ in 0..4 {
            let st = m.evaluate(&cbar.embed(c33)).unwrap();
            let r = st.s[(2, 2)].abs();
            if r < best.0 {
                best = (r, c33);
            }
            c33 -= st.s[(2, 2)] / (0.5 * st.cc.get(2, 2, 2, 2));
        }
        best.1
    }

    fn closed_form_mismatch(m: &MaterialModel, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut es, mut ec) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let cbar = random_cbar(&mut rng);
            let c33 = polished_root(m, &cbar);
            let sbar = condensed_stress(m, &cbar, c33).unwrap();
            let cc = condensed_tangent(m, &cbar, c33).unwrap();
            let (sbar_cf, cc_cf) = closed_form(m, &cbar, c33).unwrap();
            es = es.max((sbar - sbar_cf).max_abs() / sbar.max_abs().max(m.mu()));
            ec = ec.max((&cc - &cc_cf).max_abs() / cc.max_abs());
        }
        (es, ec)
    }

    #[test]
    fn generic_path_matches_closed_forms() {
        let cases = [
            MaterialModel::decoupled(params(1.0, 10.0)),
            MaterialModel::decoupled(params(3.0, 400.0)),
            MaterialModel::decoupled(MaterialParams::from_mu_nu(80.1938, 0.4999).unwrap()),
            MaterialModel::alternative(params(1.0, 2.0)),
            MaterialModel::alternative(params(2.0, 300.0)),
        ];
        for (n, m) in cases.iter().enumerate() {
            let (es, ec) = closed_form_mismatch(m, 37 + n as u64);
            assert!(es <= 1e-12, "{:?}: stress {es:e}", m.kind());
            assert!(ec <= 1e-10, "{:?}: tangent {ec:e}", m.kind());
        }
    }

    #[test]
    fn decoupled_gamma_and_volume_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let p = params(1.0, 25.0);
        let m = MaterialModel::decoupled(p);
        for _ in 0..20 {
            let cbar = random_cbar(&mut rng);
            let c33 = solve(&m, &cbar);
            let cf = closed_form_decoupled(&cbar, c33, &p).unwrap();
            let j = (c33 * det(&cbar)).sqrt();
            // S33 = 0 gives γ = −μ C33 J^{-2/3}.
            assert!((cf.gamma + p.mu * c33 * j.powf(-2.0 / 3.0)).abs() < 1e-9);
            let h = 1e-6;
            let jf = |c: f64| (c * det(&cbar)).sqrt();
            let fd = (jf(c33 + h) - jf(c33 - h)) / (2.0 * h);
            assert!((fd - cf.dj_dc33).abs() <= 1e-8 * cf.dj_dc33);
        }
    }

    #[test]
    fn alpha_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let p = params(1.0, 5.0);
        for _ in 0..20 {
            let cbar = random_cbar(&mut rng);
            let c33 = 0.7 + rng.random_range(0.0..0.6);
            let cf = closed_form_alternative(&cbar, c33, &p).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                for l in 0..2 {
                    let e = sym_unit(2, k, l) * if k == l { 1.0 } else { 0.5 };
                    let a = |c: Tensor2| closed_form_alternative(&c, c33, &p).unwrap().alpha;
                    let fd = (a(cbar + e * h) - a(cbar - e * h)) / (2.0 * h);
                    assert!((fd - cf.dalpha_dcbar[(k, l)]).abs() <= 1e-7 * cf.dalpha_dcbar.max_abs());
                }
            }
        }
    }

    #[test]
    fn inner_newton_converges_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let mut checked = 0;
        for m in models() {
            for _ in 0..25 {
                let cbar = random_cbar(&mut rng);
                let mut trace = Vec::new();
                let tight = CondensationSettings { abs_tol: Some(1e-300), max_iters: 60, ..settings() };
                let _ = solve_c33_traced(&m, &cbar, 1.0, &tight, Some(&mut trace));
                let mu = m.mu();
                let floor = 1e-12 * m.kappa().max(mu);
                let r: Vec<f64> = trace.into_iter().filter(|r| *r > floor).collect();
                for w in r.windows(2) {
                    if w[0] < 1e-2 * mu {
                        // r_{k+1} <= c r_k² with a modest constant in units of 1/μ.
                        assert!(w[1] <= 1e3 / mu * w[0] * w[0] + floor, "{w:?}");
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn in_plane_rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for m in models() {
            for _ in 0..20 {
                let cbar = random_cbar(&mut rng);
                let th: f64 = rng.random_range(0.0..6.28);
                let q = Tensor2::from_rows2([[th.cos(), -th.sin()], [th.sin(), th.cos()]]);
                let tight = CondensationSettings { abs_tol: Some(1e-14 * m.kappa()), ..settings() };
                let a = solve_c33(&m, &cbar, 1.0, &tight).unwrap().0;
                let b = solve_c33(&m, &(q.transpose() * cbar * q), 1.0, &tight).unwrap().0;
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn incompressibility_limit_is_monotone() {
        let cbar = Tensor2::from_rows2([[1.5, 0.2], [0.2, 0.8]]);
        let jbar = det(&cbar).sqrt();
        let mut last = f64::INFINITY;
        for ratio in [1e2, 1e3, 1e4] {
            let m = MaterialModel::decoupled(params(1.0, ratio));
            let c33 = solve(&m, &cbar);
            let dev = (c33.sqrt() * jbar - 1.0).abs();
            assert!(dev < last);
            last = dev;
        }
    }

    #[test]
    fn residual_within_tolerance_and_errors() {
        let m = MaterialModel::decoupled(params(2.0, 50.0));
        let st = condense(&m, &Tensor2::from_diag(&[2.0, 0.6]), 1.0, &settings()).unwrap();
        assert!(st.residual_s33.abs() <= 1e-10 * 2.0);
        assert!(st.c33 > 0.0);
        let few = CondensationSettings { max_iters: 1, ..settings() };
        assert!(matches!(
            solve_c33(&m, &Tensor2::from_diag(&[3.0, 0.4]), 1.0, &few),
            Err(Error::NoConvergence { .. })
        ));
        let flat = MaterialModel::flatland(params(1.0, 1.0));
        assert!(matches!(solve_c33(&flat, &Tensor2::identity(2), 1.0, &settings()), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn roundoff_limited_state_stops_at_resolution() {
        // Strongly stretched, nearly incompressible point where one ulp of
        // m33 moves S33 by more than 1e-11 μ.
        let m = MaterialModel::decoupled(MaterialParams::from_mu_nu(1.0, 0.4999).unwrap());
        let mbar = Tensor2::from_rows2([[13.110277492158037, -5.202805180405776], [-5.202805180405776, 1.799559808638826]]);
        let cbar = mbar + Tensor2::identity(2);
        let (c33, _, r) = solve_c33(&m, &cbar, 0.1, &settings()).unwrap();
        assert!(r.abs() < 1e-9, "{r:e}");
        let full = m.evaluate(&cbar.embed(c33 * (1.0 + 1e-12))).unwrap().s[(2, 2)];
        assert!(full.abs() > r.abs(), "a 1e-12 relative change in C33 must matter more than the roundoff left");
    }
}
