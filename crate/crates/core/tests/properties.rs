use proptest::prelude::*;

use psfem::constitutive::{MaterialModel, MaterialParams, VolumetricLaw};
use psfem::plane_stress::{closed_form, condense, condensed_stress, solve_c33};
use psfem::postprocess::von_mises;
use psfem::tensor::{det, invariants, iso_split, odot, otimes, push_forward_tangent};
use psfem::{CondensationSettings, ModelKind, Tensor2, Tensor4};

fn tensor(dim: usize, amp: f64) -> impl Strategy<Value = Tensor2> {
    prop::collection::vec(-amp..amp, dim * dim)
        .prop_map(move |v| Tensor2::identity(dim) + Tensor2::from_fn(dim, |i, j| v[i * dim + j]))
        .prop_filter("orientation preserving", |f| det(f) > 0.2)
}

fn spd(dim: usize, amp: f64) -> impl Strategy<Value = Tensor2> {
    tensor(dim, amp).prop_map(|f| f.transpose() * f)
}

fn rotation3() -> impl Strategy<Value = Tensor2> {
    (0.0..std::f64::consts::TAU, -1.0..1.0f64, 0.0..std::f64::consts::PI).prop_map(|(phi, z, th)| {
        let r = (1.0 - z * z).sqrt();
        let a = [r * phi.cos(), r * phi.sin(), z];
        let k = Tensor2::from_rows3([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]);
        Tensor2::identity(3) + k * th.sin() + (k * k) * (1.0 - th.cos())
    })
}

fn rotation2() -> impl Strategy<Value = Tensor2> {
    (0.0..std::f64::consts::TAU).prop_map(|t| Tensor2::from_rows2([[t.cos(), -t.sin()], [t.sin(), t.cos()]]))
}

fn models3() -> Vec<MaterialModel> {
    let p = MaterialParams::from_mu_nu(1.3, 0.35).unwrap();
    let mut out: Vec<MaterialModel> = VolumetricLaw::ALL
        .iter()
        .map(|&law| MaterialModel::new(ModelKind::NeoHookeanDecoupled, p, law).unwrap())
        .collect();
    out.push(MaterialModel::alternative(p));
    out
}

fn sym_unit(dim: usize, i: usize, j: usize) -> Tensor2 {
    let mut e = Tensor2::zeros(dim);
    e[(i, j)] = 1.0;
    e[(j, i)] = 1.0;
    e
}

/// Largest mismatch between `ℂ : E` and the central difference of `2S`
/// over all symmetric unit directions `E`, relative to `‖ℂ‖`.
fn fd_mismatch(cc: &Tensor4, c: &Tensor2, stress: impl Fn(&Tensor2) -> Tensor2) -> f64 {
    let d = c.dim();
    let h = 1e-6 * c.norm();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            let e = sym_unit(d, i, j);
            let fd = (stress(&(*c + e * h)) - stress(&(*c - e * h))) * (1.0 / h);
            worst = worst.max((cc.ddot2(&e) - fd).max_abs());
        }
    }
    worst / cc.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_squared_is_det_c(c in spd(3, 0.4)) {
        let inv = invariants(&c).unwrap();
        prop_assert!((inv.j * inv.j - det(&c)).abs() <= 1e-13 * det(&c));
    }

    #[test]
    fn iso_split_recombines(f in tensor(3, 0.4)) {
        let (j, fhat) = iso_split(&f).unwrap();
        prop_assert!((det(&fhat) - 1.0).abs() < 1e-13);
        prop_assert!((fhat * j.cbrt() - f).max_abs() < 1e-13);
    }

    #[test]
    fn push_forward_keeps_major_symmetry(f in tensor(3, 0.4), a in spd(3, 0.4), b in spd(3, 0.4)) {
        let cc = &otimes(&a, &a) + &odot(&b, &b);
        let c = push_forward_tangent(&f, &cc).unwrap();
        prop_assert!(c.major_asymmetry() < 1e-12 * c.norm());
    }

    #[test]
    fn tangents_match_stress_differences(c in spd(3, 0.3), c2 in spd(2, 0.3)) {
        for m in models3() {
            let cc = m.evaluate(&c).unwrap().cc;
            let err = fd_mismatch(&cc, &c, |x| m.evaluate(x).unwrap().s);
            prop_assert!(err < 1e-6, "{:?}: {err:e}", m.kind());
        }
        let flat = MaterialModel::flatland(MaterialParams::from_mu_kappa(1.3, 4.0).unwrap());
        let cc = flat.evaluate(&c2).unwrap().cc;
        prop_assert!(fd_mismatch(&cc, &c2, |x| flat.evaluate(x).unwrap().s) < 1e-6);
    }

    #[test]
    fn stress_rotates_with_the_frame(c in spd(3, 0.4), q in rotation3()) {
        for m in models3() {
            let s = m.evaluate(&c).unwrap().s;
            let rotated = m.evaluate(&(q.transpose() * c * q)).unwrap().s;
            prop_assert!((rotated - q.transpose() * s * q).max_abs() < 1e-12 * (1.0 + s.max_abs()));
        }
    }

    #[test]
    fn condensation_meets_its_tolerance(cbar in spd(2, 0.4), nu in 0.0..0.4999f64) {
        let m = MaterialModel::decoupled(MaterialParams::from_mu_nu(2.0, nu).unwrap());
        let st = condense(&m, &cbar, 1.0, &CondensationSettings::default()).unwrap();
        prop_assert!(st.residual_s33.abs() <= 1e-10 * 2.0);
        prop_assert!(st.c33 > 0.0);
    }

    #[test]
    fn condensation_is_in_plane_frame_indifferent(cbar in spd(2, 0.4), q in rotation2()) {
        let s = CondensationSettings::default();
        for m in models3() {
            let (a, _, _) = solve_c33(&m, &cbar, 1.0, &s).unwrap();
            let (b, _, _) = solve_c33(&m, &(q.transpose() * cbar * q), 1.0, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn generic_condensation_matches_closed_forms(cbar in spd(2, 0.4), nu in 0.1..0.4999f64) {
        let p = MaterialParams::from_mu_nu(1.0, nu).unwrap();
        for m in [MaterialModel::decoupled(p), MaterialModel::alternative(p)] {
            let st = condense(&m, &cbar, 1.0, &CondensationSettings::default()).unwrap();
            let (sbar, ccbar) = closed_form(&m, &cbar, st.c33).unwrap();
            prop_assert!((st.sbar - sbar).max_abs() <= 1e-12 * (1.0 + sbar.max_abs()));
            let mut diff = st.ccbar.clone();
            diff -= &ccbar;
            prop_assert!(diff.max_abs() <= 1e-10 * ccbar.max_abs());
        }
    }

    #[test]
    fn condensed_tangent_matches_resolved_differences(cbar in spd(2, 0.3)) {
        let s = CondensationSettings { abs_tol: Some(1e-14), ..Default::default() };
        for m in models3() {
            let st = condense(&m, &cbar, 1.0, &s).unwrap();
            let resolved = |x: &Tensor2| {
                let (c33, _, _) = solve_c33(&m, x, st.c33, &s).unwrap();
                condensed_stress(&m, x, c33).unwrap()
            };
            let err = fd_mismatch(&st.ccbar, &cbar, resolved);
            prop_assert!(err < 1e-6, "{:?}: {err:e}", m.kind());
        }
    }

    #[test]
    fn hydrostatic_states_have_no_von_mises_stress(p in -1e3..1e3f64) {
        prop_assert!(von_mises(&(Tensor2::identity(3) * p), 3).abs() <= 1e-12 * p.abs());
        prop_assert!(von_mises(&(Tensor2::identity(2) * p), 2).abs() <= 1e-12 * p.abs());
    }
}
