use psfem::postprocess::{snapshot_step, von_mises, vtk_string, write_vtk};
use psfem::scenarios::{composite_mesh, cook_mesh, punch_mesh, CompositeOptions, CookOptions, PunchOptions};
use psfem::{
    solver, BoundaryProgram, CondensationSettings, DirichletSpec, FieldSnapshot, Formulation, MaterialModel,
    MaterialParams, Mesh, Problem, Regime, SolveSettings, System, Tensor2,
};

fn two_by_two() -> Mesh {
    Mesh::structured(2, 1, [2, 2, 1], |s| [2.0 * s[0], s[1], 0.0]).unwrap()
}

fn fixed_snapshot(mesh: &Mesh) -> FieldSnapshot {
    let stress: Vec<Tensor2> = (0..mesh.n_elements()).map(|e| Tensor2::from_diag(&[e as f64 + 1.0, 0.5, 0.0])).collect();
    FieldSnapshot {
        load: 1.0,
        regime: Regime::PlaneStrain,
        displacement: mesh.nodes.iter().map(|x| [0.125 * x[0], -0.0625 * x[1], 0.0]).collect(),
        von_mises: stress.iter().map(|s| von_mises(s, 3)).collect(),
        stress,
        pressure: Some(vec![-0.5, -1.0, -1.5, -2.0]),
        dilatation: Some(vec![1.0, 0.75, 1.25, 1.0]),
    }
}

#[test]
fn vtk_matches_golden_file() {
    let mesh = two_by_two();
    let text = vtk_string(&mesh, &fixed_snapshot(&mesh)).unwrap();
    assert_eq!(text, include_str!("golden/two_by_two.vtk"));
}

#[test]
fn vtk_rejects_mismatched_snapshot() {
    let mesh = two_by_two();
    let mut snap = fixed_snapshot(&mesh);
    snap.stress.pop();
    assert!(vtk_string(&mesh, &snap).is_err());
}

#[test]
fn stretched_strip_is_uniaxial_after_a_solve() {
    let mesh = Mesh::structured(2, 2, [4, 2, 1], |s| [4.0 * s[0], s[1], 0.0]).unwrap();
    let boundary = BoundaryProgram {
        dirichlet: vec![
            DirichletSpec::fixed("left", 0),
            DirichletSpec::fixed("bottom", 1),
            DirichletSpec::ramped("right", 0, 2.0),
        ],
        ..Default::default()
    };
    let sys = System::new(Problem {
        mesh,
        regime: Regime::PlaneStress,
        formulation: Formulation::OneField,
        materials: vec![MaterialModel::decoupled(MaterialParams::from_mu_nu(1.0, 0.45).unwrap())],
        boundary,
        condensation: CondensationSettings::default(),
    })
    .unwrap();
    let (hist, log) = solver::run(&sys, &SolveSettings { n_load_steps: 5, ..Default::default() }).unwrap();
    assert_eq!(log.n_steps(), 5);
    let snap = snapshot_step(&sys, hist.last().unwrap()).unwrap();
    let s11 = snap.stress[0][(0, 0)];
    assert!(s11 > 0.0);
    for (s, vm) in snap.stress.iter().zip(&snap.von_mises) {
        assert!((s[(0, 0)] - s11).abs() < 1e-8 * s11);
        assert!(s[(1, 1)].abs() < 1e-8 * s11 && s[(2, 2)].abs() < 1e-8 * s11);
        assert!((vm - s11).abs() < 1e-8 * s11);
    }
    assert!(snap.out_of_plane_ratio() < 1e-8);

    let dir = tempfile::tempdir().unwrap();
    let path = write_vtk(dir.path(), 5, &sys.problem.mesh, &snap).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let points: Vec<[f64; 3]> = text
        .lines()
        .skip_while(|l| !l.starts_with("POINTS"))
        .skip(1)
        .take(sys.problem.mesh.n_nodes())
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(points, sys.problem.mesh.nodes);
}

#[test]
fn scenario_meshes_have_positive_jacobians() {
    for order in [1, 2] {
        for regime in [Regime::PlaneStress, Regime::ThreeD] {
            let (m, _) = cook_mesh(&CookOptions { n: 4, order, regime, ..Default::default() }).unwrap();
            m.validate().unwrap();
            let (m, _) = punch_mesh(&PunchOptions { n: 4, order, regime, ..Default::default() }).unwrap();
            m.validate().unwrap();
        }
        let (m, _, _) = composite_mesh(&CompositeOptions { n: 32, order, ..CompositeOptions::fibres(3, 0.3) }).unwrap();
        m.validate().unwrap();
    }
}
