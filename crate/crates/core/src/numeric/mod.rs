//! Dense linear algebra, a self-contained certificate-producing simplex
//! solver, and double description between H- and generator representations
//! of convex polyhedral cones.

pub mod dd;
pub mod lp;
pub mod matrix;
pub mod subspace;
pub mod tolerance;

pub use dd::{dd_h_to_v, dd_v_to_h, generator_contains, hrep_cone_contains, GeneratorRep};
pub use lp::{solve_lp, LpOutcome, LpProblem, Sense};
pub use matrix::Matrix;
pub use tolerance::Tolerance;
