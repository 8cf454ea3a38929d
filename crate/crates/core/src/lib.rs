//! Lowest-order Whitney finite elements on a cube-with-hole shell mesh and
//! Crank–Nicolson time stepping for Maxwell's equations with an impedance
//! boundary condition on the inner surface.
//!
//! The numerical core is generic over [`Real`]; `f64` aliases are provided
//! for the common case.

// `!(x > 0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod derham;
pub mod error;
pub mod evolve;
pub mod fields;
pub mod fmt;
pub mod geom;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod sparsela;
pub mod whitney;

pub use assembly::{assemble_system, SystemMatrices};
pub use derham::{enumerate_dofs, incidence, DofMap, DofMaps, IncidenceMatrices, Space};
pub use error::{Error, Result};
pub use evolve::{
    build_operator, lemma_monitor, run_simulation, setup_problem, EvolutionOperator, LemmaDiagnostics, Problem,
    SimReport, SimulationConfig, StepRecord,
};
pub use fields::{r_of_gamma, AdsParameters};
pub use mesh::{build_shell_mesh, mesh_statistics, LatticeSpec, Mesh, MeshStatistics, Tag};
pub use scalar::{Real, Scalar};
pub use sparsela::{BlockVector, CsrMatrix, SolveStats, SolverOptions};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type CsrMatrix64 = CsrMatrix<f64>;
pub type DofMaps64 = DofMaps<f64>;
pub type SystemMatrices64 = SystemMatrices<f64>;
pub type Problem64 = Problem<f64>;
