pub mod analysis;
pub mod error;
pub mod function;
pub mod increments;
pub mod io;
pub mod kernels;
pub mod quadrature;
pub mod seminorms;
pub mod solver;

pub use error::{Error, Result};
pub use function::{Analytic, Domain1D, Exterior, GridFunction, RealFn, UniformMesh};
pub use kernels::{KernelSpec, Weight};
pub use seminorms::SeminormReport;
pub use solver::{Rhs, StiffnessSystem, WeakProblem};
