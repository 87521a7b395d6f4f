//! Exact combinatorics of the path tower over a ball in the (q+1)-regular
//! tree: cochains, harmonic forms, the geodesic Radon transform, and the
//! lattice-class model of the tree for PGL(2, ℚ_p).
//!
//! All arithmetic is over ℚ (`num::BigRational`); nothing is approximate.

pub mod checks;
pub mod cochain;
pub mod error;
pub mod forest;
pub mod linalg;
pub mod padic;
pub mod radon;
pub mod scalar;
pub mod tower;
pub mod tree;

pub use cochain::{
    adjoint, coboundary, h1c_dimension, harmonic_space, intersect_harmonic_exact, l2_norm_squared, pairing,
    Cochain, HarmonicBasis, Level,
};
pub use error::{Error, Result};
pub use padic::{
    act, canonicalize, embed_ball, in_gamma0, tree_distance, GroupElement, LatticeBall, LatticeClassVertex,
    PadicScalar, Side,
};
pub use radon::{
    exactness_check, induced_apartments, path_integral, primitive, radon_kernel_interior, radon_transform,
    span_check, ApartmentSet, ExactnessReport, OrientedApartment, RadonImage, WalkWithSigns,
};
pub use scalar::Scalar;
pub use tower::{build_path_graph, Incidence, KPath, PathGraph, PathMap};
pub use tree::{build_ball, BallAutomorphism, GeodesicSegment, TreeBall, TreeParams};
