//! Exact tropical and combinatorial machinery for plane curves: tropical
//! graphs and their moduli cones, evaluation fibers, floor decomposed
//! enumeration, the elevator walk across simple walls, node markings of line
//! arrangements and families of parametrized curves.

pub mod canon;
pub mod corpus;
pub mod evalmap;
pub mod floorplan;
pub mod error;
pub mod families;
pub mod linalg;
pub mod markings;
pub mod moduli;
pub mod rational;
pub mod tropgraph;
pub mod wallwalk;

pub use error::{Error, Result};
pub use rational::{Point, Rational};
