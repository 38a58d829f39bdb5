//! Structure-preserving finite element solver for the first-order Maxwell
//! system in the `(p, E, H)` formulation on the unit square, with two
//! fourth-order energy-conserving implicit time steppers.

pub mod assembly;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod mms;
pub mod poly;
pub mod quadrature;
pub mod schemes;
pub mod sparse;
pub mod whitney;

pub use assembly::{assemble_operators, MaterialParams, OperatorSet};
pub use error::{Error, Result};
pub use harness::{run, RunConfig, RunReport, SweepMode};
pub use mesh::{refine_uniform, unit_square_mesh, DiagonalPattern, TriMesh};
pub use mms::{ErrorReport, Example, ExactSolution, Manufactured};
pub use schemes::{BootstrapVariant, BoundaryMode, EnergyTrace, Lf4, Lf4Options, SchemeKind, SchemeState, Ts4};
pub use sparse::{factorize, Factorization, SparseMatrix};
pub use whitney::{build_space, DeRhamComplex, DeRhamSpace, Field};
