//! First- and second-order variational analysis of polyhedral disjunctive
//! systems: tangent cones, directional normal cones, second-order tangent
//! sets, support functions, second subderivatives, multiplier sets, and
//! second-order optimality checks for disjunctive programs.
//!
//! The geometry lives on finite unions of convex polyhedra (H-representation
//! pieces). Everything is driven by a self-contained dense simplex solver
//! with primal/dual/Farkas certificates and a double-description converter
//! between H- and generator representations of convex polyhedral cones.

pub mod cones;
pub mod encodings;
pub mod error;
pub mod extreal;
pub mod expr;
pub mod numeric;
pub mod optimality;
pub mod oracles;
pub mod polyhedra;
pub mod supports;
pub mod systems;

pub use error::Error;
pub use extreal::ExtReal;
pub use numeric::{GeneratorRep, LpOutcome, LpProblem, Matrix, Tolerance};
pub use polyhedra::{ConvexPolyhedron, Face, PolyhedralCone, PolyhedralSet};
