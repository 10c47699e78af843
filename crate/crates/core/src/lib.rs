//! Total Lagrangian finite elements for compressible hyperelasticity in
//! plane strain, plane stress, flatland and three dimensions.

pub mod constitutive;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod plane_stress;
pub mod postprocess;
pub mod scenarios;
pub mod solver;
pub mod tensor;

pub use constitutive::{MaterialModel, MaterialParams, ModelKind, VolumetricLaw};
pub use error::{Error, Result};
pub use fem::assembly::Problem;
pub use fem::{BoundaryProgram, DirichletSpec, Formulation, Regime, System, TractionSpec};
pub use mesh::{Facet, Mesh};
pub use plane_stress::{CondensationSettings, CondensedState, InitStrategy};
pub use postprocess::{FieldSnapshot, Probe, ProbeTable};
pub use solver::{ConvergenceLog, SolutionHistory, SolveSettings, StepRecord};
pub use tensor::{Tensor2, Tensor4};
