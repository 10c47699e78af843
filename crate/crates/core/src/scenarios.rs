//! Benchmark geometries: the tapered Cook panel, the half punch block and
//! square composites with random stiff inclusions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constitutive::{MaterialModel, MaterialParams};
use crate::error::{Error, Result};
use crate::fem::assembly::Problem;
use crate::fem::{BoundaryProgram, DirichletSpec, Formulation, Regime, TractionSpec};
use crate::mesh::{Facet, Mesh};
use crate::plane_stress::CondensationSettings;
use crate::solver::SolveSettings;

pub const COOK_MU: f64 = 80.1938;
pub const COOK_NU: f64 = 0.4999;
/// Tip point A in millimetres.
pub const COOK_POINT_A: [f64; 3] = [48.0, 60.0, 0.0];
/// Panel area in mm².
pub const COOK_AREA: f64 = 48.0 * (44.0 + 16.0) / 2.0;
pub const PUNCH_HEIGHT: f64 = 10.0;
/// Width of the loaded strip measured from the symmetry plane.
pub const PUNCH_LOAD_WIDTH: f64 = 5.0;
/// Length dividing the benchmark load parameter `f` to give the traction on
/// the strip, so `f = 6000` loads the strip with 600 N/mm².
pub const PUNCH_LOAD_SCALE: f64 = 10.0;

const MAX_N: usize = 512;

/// Reference tip displacements `u2` at point A in mm, per `(f, n)` row with
/// columns flatland, plane strain, plane stress, three-d, each for
/// element orders 1 and 2. The three-d panel is one element thick.
pub const COOK_REFERENCE: [(f64, usize, [f64; 8]); 12] = [
    (24.0, 2, [13.91, 18.45, 13.77, 18.29, 14.42, 19.26, 15.47, 19.85]),
    (24.0, 4, [16.69, 18.20, 16.65, 18.17, 17.85, 19.75, 18.40, 19.89]),
    (24.0, 8, [17.70, 18.20, 17.68, 18.18, 19.24, 19.88, 19.47, 19.93]),
    (24.0, 16, [18.00, 18.20, 17.99, 18.19, 19.71, 19.93, 19.79, 19.95]),
    (24.0, 32, [18.11, 18.21, 18.10, 18.20, 19.87, 19.95, 19.89, 19.96]),
    (24.0, 64, [18.15, 18.22, 18.15, 18.21, 19.93, 19.97, 19.93, 19.96]),
    (40.0, 2, [19.56, 24.27, 19.67, 24.16, 21.23, 25.17, 21.73, 25.78]),
    (40.0, 4, [22.40, 24.20, 22.46, 24.17, 24.18, 25.78, 24.42, 26.01]),
    (40.0, 8, [23.54, 24.23, 23.55, 24.22, 25.29, 25.98, 25.50, 26.10]),
    (40.0, 16, [23.93, 24.25, 23.93, 24.25, 25.75, 26.07, 25.88, 26.15]),
    (40.0, 32, [24.08, 24.28, 24.10, 24.27, 25.96, 26.13, 26.02, 26.17]),
    (40.0, 64, [24.16, 24.31, 24.16, 24.30, 26.06, 26.16, 26.09, 26.18]),
];

/// Reference `u2` for one cell, if tabulated.
pub fn cook_reference(regime: Regime, order: usize, n: usize, traction: f64) -> Option<f64> {
    let col = Regime::ALL.iter().position(|&r| r == regime)? * 2 + order.checked_sub(1)?;
    if order > 2 {
        return None;
    }
    COOK_REFERENCE.iter().find(|r| r.0 == traction && r.1 == n).map(|r| r.2[col])
}

/// Formulation used for the benchmarks: the mixed one wherever it applies.
pub fn default_formulation(regime: Regime) -> Formulation {
    if regime == Regime::PlaneStress {
        Formulation::OneField
    } else {
        Formulation::ThreeField
    }
}

/// Near-incompressible material shared by the Cook and punch problems.
pub fn cook_material() -> MaterialModel {
    MaterialModel::decoupled(MaterialParams::from_mu_nu(COOK_MU, COOK_NU).expect("valid constants"))
}

fn check_n(n: usize, even: bool) -> Result<()> {
    if n == 0 || n > MAX_N || (even && n % 2 == 1) {
        let rule = if even { "an even count" } else { "positive" };
        return Err(Error::InvalidMesh(format!("element count {n} must be {rule} and at most {MAX_N}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CookOptions {
    pub n: usize,
    pub order: usize,
    pub regime: Regime,
    pub thickness: f64,
    /// Fix `u3` on both faces of the three-dimensional panel.
    pub walls: bool,
    /// Shear traction on the right edge, N/mm².
    pub traction: f64,
}

impl Default for CookOptions {
    fn default() -> Self {
        Self { n: 8, order: 2, regime: Regime::PlaneStress, thickness: 1.0, walls: false, traction: 24.0 }
    }
}

/// Bilinear map of the unit square onto the panel with corners
/// (0,0), (48,44), (48,60), (0,44).
pub fn cook_map(s: [f64; 3], thickness: f64) -> [f64; 3] {
    let x = 48.0 * s[0];
    let bottom = 44.0 * s[0];
    let top = 44.0 + 16.0 * s[0];
    [x, bottom + (top - bottom) * s[1], thickness * s[2]]
}

pub fn cook_mesh(o: &CookOptions) -> Result<(Mesh, BoundaryProgram)> {
    check_n(o.n, false)?;
    if !(o.thickness > 0.0) {
        return Err(Error::InvalidMesh(format!("thickness {} must be positive", o.thickness)));
    }
    let dim = o.regime.spatial_dim();
    let t = o.thickness;
    let mut mesh = Mesh::structured(dim, o.order, [o.n, o.n, 1], |s| cook_map(s, t))?;
    if dim == 2 {
        mesh.thickness = t;
    }
    let mut dirichlet: Vec<DirichletSpec> = (0..dim).map(|c| DirichletSpec::fixed("left", c)).collect();
    if dim == 3 && o.walls {
        dirichlet.push(DirichletSpec::fixed("back", 2));
        dirichlet.push(DirichletSpec::fixed("front", 2));
    }
    let prog = BoundaryProgram {
        dirichlet,
        tractions: vec![TractionSpec { set: "right".into(), traction: [0.0, o.traction, 0.0] }],
        body_force: [0.0; 3],
    };
    Ok((mesh, prog))
}

fn problem_for(mesh: Mesh, regime: Regime, formulation: Formulation, model: MaterialModel, boundary: BoundaryProgram) -> Problem {
    Problem {
        mesh,
        regime,
        formulation,
        materials: vec![model],
        boundary,
        condensation: CondensationSettings::default(),
    }
}

pub fn cook_problem(o: &CookOptions, formulation: Formulation, model: MaterialModel) -> Result<Problem> {
    let (mesh, prog) = cook_mesh(o)?;
    Ok(problem_for(mesh, o.regime, formulation, model, prog))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PunchOptions {
    pub n: usize,
    pub order: usize,
    pub regime: Regime,
    /// Benchmark load parameter `f`; see [`PUNCH_LOAD_SCALE`].
    pub load: f64,
}

impl Default for PunchOptions {
    fn default() -> Self {
        Self { n: 16, order: 2, regime: Regime::PlaneStress, load: 6000.0 }
    }
}

impl PunchOptions {
    /// Downward traction on the loaded strip, N/mm².
    pub fn traction(&self) -> f64 {
        self.load / PUNCH_LOAD_SCALE
    }
}

/// Half block `[0,10]^d` with the symmetry plane at `x1 = 0`. The loaded
/// strip `x1 ≤ 5` of the top face is the facet set `load`.
pub fn punch_mesh(o: &PunchOptions) -> Result<(Mesh, BoundaryProgram)> {
    check_n(o.n, true)?;
    let dim = o.regime.spatial_dim();
    let h = PUNCH_HEIGHT;
    let mut mesh = Mesh::structured(dim, o.order, [o.n, o.n, o.n], |s| [h * s[0], h * s[1], h * s[2]])?;
    let centroids = mesh.element_centroids();
    let load: Vec<Facet> =
        mesh.facet_set("top")?.iter().copied().filter(|f| centroids[f.element][0] < PUNCH_LOAD_WIDTH).collect();
    mesh.facet_sets.insert("load".into(), load);
    mesh.derive_node_sets();
    let mut dirichlet =
        vec![DirichletSpec::fixed("left", 0), DirichletSpec::fixed("bottom", 1), DirichletSpec::fixed("top", 0)];
    if dim == 3 {
        dirichlet.push(DirichletSpec::fixed("back", 2));
        dirichlet.push(DirichletSpec::fixed("front", 2));
    }
    let prog = BoundaryProgram {
        dirichlet,
        tractions: vec![TractionSpec { set: "load".into(), traction: [0.0, -o.traction(), 0.0] }],
        body_force: [0.0; 3],
    };
    Ok((mesh, prog))
}

pub fn punch_problem(o: &PunchOptions, formulation: Formulation, model: MaterialModel) -> Result<Problem> {
    let (mesh, prog) = punch_mesh(o)?;
    Ok(problem_for(mesh, o.regime, formulation, model, prog))
}

/// Solver settings for the punch. Near full compression the roundoff floor
/// of the residual reaches a few 1e-8 N, above `1e-10 ‖R₀‖`.
pub fn punch_settings() -> SolveSettings {
    SolveSettings { newton_abs_tol: 1e-6, ..Default::default() }
}

/// Probe at the middle of the top face on the symmetry plane.
pub fn punch_probe(regime: Regime) -> [f64; 3] {
    let z = if regime == Regime::ThreeD { 0.5 * PUNCH_HEIGHT } else { 0.0 };
    [0.0, PUNCH_HEIGHT, z]
}

/// Compression in percent of the block height from the probe displacement.
pub fn punch_compression(u2: f64) -> f64 {
    -100.0 * u2 / PUNCH_HEIGHT
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositeKind {
    Particles,
    Fibres,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompositeOptions {
    pub kind: CompositeKind,
    pub seed: u64,
    /// Elements per edge.
    pub n: usize,
    pub order: usize,
    /// Edge length of the square block.
    pub length: f64,
    pub matrix_mu: f64,
    pub matrix_nu: f64,
    pub inclusion_mu: f64,
    pub inclusion_nu: f64,
    pub count: usize,
    /// Target area fraction of the stiff phase.
    pub fraction: f64,
    /// Fibre length over diameter.
    pub aspect_ratio: f64,
    /// Right-end displacement over the block length.
    pub elongation: f64,
    pub max_attempts: usize,
}

impl CompositeOptions {
    pub fn particles(seed: u64, matrix_nu: f64) -> Self {
        Self {
            kind: CompositeKind::Particles,
            seed,
            n: 128,
            order: 1,
            length: 1.0,
            matrix_mu: 1.0,
            matrix_nu,
            inclusion_mu: 50.0,
            inclusion_nu: 0.3,
            count: 10,
            fraction: 0.25,
            aspect_ratio: 10.0,
            elongation: 1.0,
            max_attempts: 100_000,
        }
    }

    pub fn fibres(seed: u64, matrix_nu: f64) -> Self {
        Self { kind: CompositeKind::Fibres, count: 25, fraction: 0.03, ..Self::particles(seed, matrix_nu) }
    }

    pub fn element_size(&self) -> f64 {
        self.length / self.n as f64
    }
}

impl Default for CompositeOptions {
    fn default() -> Self {
        Self::particles(1, 0.3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Inclusion {
    Disc { centre: [f64; 2], radius: f64 },
    /// Rectangle of length `2 half_length` along `angle` and width `2 half_width`.
    Rect { centre: [f64; 2], half_length: f64, half_width: f64, angle: f64 },
}

impl Inclusion {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Inclusion::Disc { centre, radius } => (p[0] - centre[0]).hypot(p[1] - centre[1]) <= radius,
            Inclusion::Rect { centre, half_length, half_width, angle } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (p[0] - centre[0], p[1] - centre[1]);
                (c * dx + s * dy).abs() <= half_length && (-s * dx + c * dy).abs() <= half_width
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Inclusion::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
            Inclusion::Rect { half_length, half_width, .. } => 4.0 * half_length * half_width,
        }
    }

    /// Corners of a rectangle grown by `pad` on every side.
    fn corners(&self, pad: f64) -> Vec<[f64; 2]> {
        match *self {
            Inclusion::Disc { .. } => Vec::new(),
            Inclusion::Rect { centre, half_length, half_width, angle } => {
                let (s, c) = angle.sin_cos();
                let (a, b) = (half_length + pad, half_width + pad);
                [(a, b), (-a, b), (-a, -b), (a, -b)]
                    .iter()
                    .map(|&(u, v)| [centre[0] + c * u - s * v, centre[1] + s * u + c * v])
                    .collect()
            }
        }
    }

    /// Whether the inclusion stays at least `margin` inside `[0, length]²`.
    fn inside(&self, length: f64, margin: f64) -> bool {
        match *self {
            Inclusion::Disc { centre, radius } => {
                centre.iter().all(|&x| x - radius >= margin && x + radius <= length - margin)
            }
            Inclusion::Rect { .. } => {
                self.corners(margin).iter().all(|p| p.iter().all(|&x| (0.0..=length).contains(&x)))
            }
        }
    }

    /// Whether two inclusions are closer than `gap`.
    fn conflicts(&self, other: &Inclusion, gap: f64) -> bool {
        match (self, other) {
            (Inclusion::Disc { centre: a, radius: ra }, Inclusion::Disc { centre: b, radius: rb }) => {
                (a[0] - b[0]).hypot(a[1] - b[1]) < ra + rb + gap
            }
            (Inclusion::Rect { .. }, Inclusion::Rect { .. }) => {
                let (p, q) = (self.corners(0.5 * gap), other.corners(0.5 * gap));
                !separated(&p, &q)
            }
            _ => true,
        }
    }
}

/// Separating axis test for two convex quadrilaterals.
fn separated(p: &[[f64; 2]], q: &[[f64; 2]]) -> bool {
    for poly in [p, q] {
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let axis = [a[1] - b[1], b[0] - a[0]];
            let proj = |pts: &[[f64; 2]]| {
                pts.iter().map(|v| v[0] * axis[0] + v[1] * axis[1]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                })
            };
            let ((l1, h1), (l2, h2)) = (proj(p), proj(q));
            if h1 < l2 || h2 < l1 {
                return true;
            }
        }
    }
    false
}

/// Places the inclusions by uniform rejection sampling. Inclusions keep one
/// element size apart from each other and from the block edges.
pub fn place_inclusions(o: &CompositeOptions) -> Result<Vec<Inclusion>> {
    if o.count == 0 || !(o.fraction > 0.0 && o.fraction < 1.0) || !(o.length > 0.0) {
        return Err(Error::InvalidMesh("composite needs a positive count and a fraction in (0, 1)".into()));
    }
    check_n(o.n, false)?;
    let area = o.fraction * o.length * o.length / o.count as f64;
    let gap = o.element_size();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut placed: Vec<Inclusion> = Vec::with_capacity(o.count);
    let mut attempts = 0;
    while placed.len() < o.count {
        if attempts == o.max_attempts {
            return Err(Error::PlacementFailed(placed.len()));
        }
        attempts += 1;
        let centre = [rng.random_range(0.0..o.length), rng.random_range(0.0..o.length)];
        let cand = match o.kind {
            CompositeKind::Particles => Inclusion::Disc { centre, radius: (area / std::f64::consts::PI).sqrt() },
            CompositeKind::Fibres => {
                let d = (area / o.aspect_ratio).sqrt();
                let angle = rng.random_range(0.0..std::f64::consts::PI);
                Inclusion::Rect { centre, half_length: 0.5 * o.aspect_ratio * d, half_width: 0.5 * d, angle }
            }
        };
        if cand.inside(o.length, gap) && placed.iter().all(|p| !p.conflicts(&cand, gap)) {
            placed.push(cand);
        }
    }
    Ok(placed)
}

/// Square block with material id 1 on elements whose centroid lies in an
/// inclusion. Left end clamped; right end pulled to `(1 + elongation) L`
/// with `u2 = 0`.
pub fn composite_mesh(o: &CompositeOptions) -> Result<(Mesh, BoundaryProgram, Vec<Inclusion>)> {
    let inclusions = place_inclusions(o)?;
    let l = o.length;
    let mut mesh = Mesh::structured(2, o.order, [o.n, o.n, 1], |s| [l * s[0], l * s[1], 0.0])?;
    for (e, c) in mesh.element_centroids().iter().enumerate() {
        if inclusions.iter().any(|inc| inc.contains([c[0], c[1]])) {
            mesh.material[e] = 1;
        }
    }
    let prog = BoundaryProgram {
        dirichlet: vec![
            DirichletSpec::fixed("left", 0),
            DirichletSpec::fixed("left", 1),
            DirichletSpec::ramped("right", 0, o.elongation * l),
            DirichletSpec::fixed("right", 1),
        ],
        tractions: Vec::new(),
        body_force: [0.0; 3],
    };
    Ok((mesh, prog, inclusions))
}

pub fn composite_problem(o: &CompositeOptions) -> Result<Problem> {
    let (mesh, prog, _) = composite_mesh(o)?;
    let matrix = MaterialModel::decoupled(MaterialParams::from_mu_nu(o.matrix_mu, o.matrix_nu)?);
    let stiff = MaterialModel::decoupled(MaterialParams::from_mu_nu(o.inclusion_mu, o.inclusion_nu)?);
    Ok(Problem {
        mesh,
        regime: Regime::PlaneStress,
        formulation: Formulation::OneField,
        materials: vec![matrix, stiff],
        boundary: prog,
        condensation: CondensationSettings::default(),
    })
}

/// Area fraction of elements with a nonzero material id.
pub fn inclusion_fraction(mesh: &Mesh) -> f64 {
    let m = mesh.element_measures();
    let total: f64 = m.iter().sum();
    m.iter().zip(&mesh.material).filter(|(_, &id)| id != 0).map(|(a, _)| a).sum::<f64>() / total
}

/// Relative lateral contraction `1 − h/L` of the section through the
/// reference mid-plane `x1 = L/2`, where `h` is its deformed height.
pub fn midplane_contraction(mesh: &Mesh, u: impl Fn(usize) -> [f64; 3], length: f64) -> f64 {
    let tol = 1e-9 * length;
    let ys: Vec<f64> = (0..mesh.n_nodes())
        .filter(|&i| (mesh.nodes[i][0] - 0.5 * length).abs() < tol)
        .map(|i| mesh.nodes[i][1] + u(i)[1])
        .collect();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    1.0 - (hi - lo) / length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::System;

    #[test]
    fn cook_geometry_and_sets() {
        for regime in Regime::ALL {
            for order in [1, 2] {
                let o = CookOptions { n: 4, order, regime, thickness: 1.0, ..Default::default() };
                let (mesh, prog) = cook_mesh(&o).unwrap();
                mesh.validate().unwrap();
                assert!((mesh.volume() - COOK_AREA).abs() < 1e-12 * COOK_AREA);
                assert!((mesh.facet_set_measure("right").unwrap() - 16.0).abs() < 1e-12);
                assert!((mesh.facet_set_measure("left").unwrap() - 44.0).abs() < 1e-12);
                let a = mesh.nearest_node(COOK_POINT_A);
                assert_eq!(mesh.nodes[a], COOK_POINT_A);
                assert_eq!(prog.dirichlet.len(), regime.spatial_dim());
            }
        }
        let (mesh, _) = cook_mesh(&CookOptions { n: 2, order: 1, ..Default::default() }).unwrap();
        assert_eq!(mesh.n_elements(), 4);
    }

    #[test]
    fn cook_thickness_scales_volume() {
        for regime in [Regime::PlaneStress, Regime::ThreeD] {
            let o = CookOptions { n: 3, order: 2, regime, thickness: 2.5, walls: true, ..Default::default() };
            let (mesh, prog) = cook_mesh(&o).unwrap();
            assert!((mesh.volume() - 2.5 * COOK_AREA).abs() < 1e-11 * COOK_AREA);
            assert!((mesh.facet_set_measure("right").unwrap() - 40.0).abs() < 1e-12);
            if regime == Regime::ThreeD {
                assert_eq!(prog.dirichlet.len(), 5);
            }
        }
    }

    #[test]
    fn cook_dof_count() {
        let o = CookOptions { n: 64, order: 2, ..Default::default() };
        let sys = System::new(cook_problem(&o, Formulation::OneField, cook_material()).unwrap()).unwrap();
        assert_eq!(sys.n_dofs(), 2 * 129 * 129);
        assert_eq!(sys.constraints.n_fixed(), 2 * 129);
    }

    #[test]
    fn invalid_counts_rejected() {
        assert!(cook_mesh(&CookOptions { n: 0, ..Default::default() }).is_err());
        assert!(punch_mesh(&PunchOptions { n: 3, ..Default::default() }).is_err());
    }

    #[test]
    fn punch_sets_and_resultant() {
        for regime in [Regime::PlaneStress, Regime::PlaneStrain, Regime::ThreeD] {
            let o = PunchOptions { n: 2, order: 2, regime, load: 30.0 };
            let (mesh, prog) = punch_mesh(&o).unwrap();
            let sys = System::new(punch_problem(&o, Formulation::OneField, cook_material()).unwrap()).unwrap();
            let strip = if regime == Regime::ThreeD { 50.0 } else { 5.0 };
            assert!((mesh.facet_set_measure("load").unwrap() - strip).abs() < 1e-12);
            let fy: f64 = (0..mesh.n_nodes()).map(|n| sys.f_ext[sys.layout().u_dof(n, 1)]).sum();
            assert!((fy + 3.0 * strip).abs() < 1e-11);
            let expect = if regime == Regime::ThreeD { 5 } else { 3 };
            assert_eq!(prog.dirichlet.len(), expect);
            let probe = mesh.nearest_node(punch_probe(regime));
            assert_eq!(mesh.nodes[probe], punch_probe(regime));
            let d = |set: &str, c: usize| mesh.node_set(set).unwrap().iter().all(|&n| sys.constraints.is_fixed[sys.layout().u_dof(n, c)]);
            assert!(d("left", 0) && d("bottom", 1) && d("top", 0));
            assert!(!d("bottom", 0) && !d("top", 1));
        }
        assert_eq!(punch_compression(-8.67), 86.7);
    }

    #[test]
    fn composite_fractions_hit_targets() {
        for seed in 0..4 {
            let (mesh, _, inc) = composite_mesh(&CompositeOptions::particles(seed, 0.3)).unwrap();
            assert_eq!(inc.len(), 10);
            let f = inclusion_fraction(&mesh);
            assert!((f - 0.25).abs() < 0.01, "particles seed {seed}: {f}");
            let (mesh, _, inc) = composite_mesh(&CompositeOptions::fibres(seed, 0.3)).unwrap();
            assert_eq!(inc.len(), 25);
            let f = inclusion_fraction(&mesh);
            assert!((f - 0.03).abs() < 0.005, "fibres seed {seed}: {f}");
            let exact: f64 = inc.iter().map(|i| i.area()).sum();
            assert!((exact - 0.03).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_is_deterministic() {
        let o = CompositeOptions::fibres(17, 0.4999);
        let (a, _, _) = composite_mesh(&o).unwrap();
        let (b, _, _) = composite_mesh(&o).unwrap();
        assert_eq!(a.material, b.material);
        let (c, _, _) = composite_mesh(&CompositeOptions { seed: 18, ..o }).unwrap();
        assert_ne!(a.material, c.material);
    }

    #[test]
    fn inclusions_keep_their_distance() {
        for o in [CompositeOptions::particles(3, 0.3), CompositeOptions::fibres(3, 0.3)] {
            let inc = place_inclusions(&o).unwrap();
            let gap = o.element_size();
            for (i, a) in inc.iter().enumerate() {
                assert!(a.inside(o.length, gap));
                for b in &inc[i + 1..] {
                    assert!(!a.conflicts(b, gap));
                }
            }
        }
    }

    #[test]
    fn rectangle_overlap_test() {
        let r = |x: f64, angle: f64| Inclusion::Rect { centre: [x, 0.0], half_length: 1.0, half_width: 0.1, angle };
        assert!(r(0.0, 0.0).conflicts(&r(1.5, 0.0), 0.0));
        assert!(!r(0.0, 0.0).conflicts(&r(2.5, 0.0), 0.0));
        assert!(r(0.0, 0.0).conflicts(&r(2.05, 0.0), 0.1));
        assert!(r(0.0, 0.0).conflicts(&r(1.0, std::f64::consts::FRAC_PI_2), 0.0));
        assert!(!r(0.0, std::f64::consts::FRAC_PI_2).conflicts(&r(0.5, std::f64::consts::FRAC_PI_2), 0.0));
        assert!(r(0.0, 0.3).contains([0.9 * 0.3f64.cos(), 0.9 * 0.3f64.sin()]));
    }

    #[test]
    fn overcrowded_placement_fails() {
        let o = CompositeOptions { fraction: 0.9, max_attempts: 2000, ..CompositeOptions::particles(1, 0.3) };
        assert!(matches!(place_inclusions(&o), Err(Error::PlacementFailed(_))));
    }

    #[test]
    fn contraction_of_a_uniform_squeeze() {
        let mesh = Mesh::structured(2, 1, [4, 4, 1], |s| s).unwrap();
        let c = midplane_contraction(&mesh, |i| [0.0, -0.2 * mesh.nodes[i][1], 0.0], 1.0);
        assert!((c - 0.2).abs() < 1e-14);
    }
}
