//! Fixtures shared by the benchmarks.

use psfem::scenarios::{cook_material, cook_problem, default_formulation, CookOptions};
use psfem::{Regime, System, Tensor2};

/// Cook panel at `f = 24` with the default formulation of `regime`.
pub fn cook_system(regime: Regime, order: usize, n: usize) -> System {
    let o = CookOptions { n, order, regime, ..Default::default() };
    System::new(cook_problem(&o, default_formulation(regime), cook_material()).expect("valid options")).expect("valid problem")
}

/// A moderately sheared and stretched in-plane right Cauchy–Green tensor.
pub fn sample_cbar() -> Tensor2 {
    let f = Tensor2::from_rows2([[1.3, 0.2], [-0.1, 0.9]]);
    f.transpose() * f
}

/// Small deterministic displacement field for assembly benchmarks.
pub fn perturbed_state(sys: &System, amp: f64) -> Vec<f64> {
    let mut q = sys.initial_state();
    let l = sys.layout();
    for (n, x) in sys.problem.mesh.nodes.iter().enumerate() {
        for c in 0..l.dim {
            q[l.u_dof(n, c)] = amp * (x[0] * 0.01 + x[1] * 0.02 * (c as f64 + 1.0)).sin();
        }
    }
    q
}
