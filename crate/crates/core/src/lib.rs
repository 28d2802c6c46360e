//! Central-force motion of a particle on the surface of a cone.
//!
//! The cone is described by its scale factor `s` (angular range `2πs`).
//! The crate provides the reduced Hamiltonian dynamics, the apsidal-angle and
//! period quadratures used to single out the Kepler and oscillator potentials,
//! action variables and frequency ratios, and the complex integrals `C`,
//! `Z = Cⁿ` together with numerical Poisson-bracket checks.

pub mod actions;
pub mod bertrand;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod phase;
pub mod potential;
pub mod quadrature;
pub mod rational;
pub mod roots;
pub mod symmetry;

pub use error::{ConeError, Result};
pub use geometry::{ConeGeometry, Ratio};
pub use phase::{from_cartesian, to_cartesian, CartesianPoint, Params, PhasePoint};
pub use potential::{potential_d1, potential_d2, potential_value, ClosedFamily, PotentialSpec};
