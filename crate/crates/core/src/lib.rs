//! Discrete exterior calculus for the Hodge wave equation
//! u_tt + Δu = 0 on simplicial manifolds with boundary, written as the
//! first-order system in (ω, ν) = (ρ·u_t, du) with dissipative boundary
//! conditions V1·tr ω + V2·tr⋆ ν = 0.

pub mod boundary_conditions;
pub mod cochain;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod mesh;
pub mod metric;
pub mod operators;
pub mod profiles;

pub use boundary_conditions::{check_admissible, constraint_matrix, AdmissibilityReport, BcSpec};
pub use cochain::Cochain;
pub use dynamics::{
    assemble_generator, initial_state, simulate, step_midpoint, Generator, MidpointStepper, SimOptions, State,
    Trajectory,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use mesh::{build_complex, extract_boundary, parse_off, read_off, validate_manifold, RawMesh, SimplicialComplex};
pub use metric::{material_matrices, DualKind, HodgeMetric, MaterialFields};
pub use operators::{Discretization, TraceOperators};
pub use profiles::Profile;

/// Directory of the bundled OFF meshes.
pub fn bundled_mesh_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("meshes")
}
