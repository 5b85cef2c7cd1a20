//! Inversive distance circle packings on closed triangulated surfaces.
//!
//! The crate covers weighted triangulations and their file format, edge
//! lengths and angles in Euclidean and hyperbolic background geometry,
//! vertex curvatures with their Jacobian and Laplacian, combinatorial
//! Ricci flows, and the convex potential behind prescribed-curvature
//! problems. The [`tetra`] module reproduces a tetrahedron on which two
//! constant-curvature metrics exist that are not scalings of each other.

pub mod curvature;
pub mod flow;
pub mod geom;
pub mod potential;
pub mod quadrature;
pub mod surface;
pub mod tetra;

pub use curvature::{CurvatureError, CurvatureField, CurvatureJacobian, Spectrum, UConvention};
pub use flow::{EventKind, FlowError, FlowKind, FlowOutcome, FlowSpec, FlowTrace, Integrator};
pub use geom::{GeomError, PackingMetric};
pub use potential::{PotentialError, PotentialQuery, Target};
pub use surface::{Geometry, SurfaceError, WeightRegime, WeightedTriangulation};
