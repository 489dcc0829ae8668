//! Flat symplectic phase spaces, observables, Poisson brackets and the Liouville measure.

pub mod bracket;
pub mod observable;
pub mod poly;
pub mod space;
pub mod spectral;
pub mod symplectic;

pub use bracket::{gradient, hamiltonian_vector_field, poisson_bracket};
pub use observable::{Observable, Representation};
pub use poly::{Monomial, Poly};
pub use space::{liouville_measure, MeasureDescriptor, Normalization, PhaseSpace, SpaceKind, Support};
pub use spectral::{FourierSeries, Grid, Interpolator};
pub use symplectic::{symplectic_check, FnMap, Jacobian, MembershipReport, Point, PointMap, PolyMap};
