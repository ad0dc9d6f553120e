//! Geometric lattices realized as arrangements of homotopy spheres, and the
//! cellular resolutions of matroid Steiner ideals read off their bounded
//! subcomplexes.
//!
//! Everything is computed exactly: ranks and closures from full rank tables,
//! Möbius functions by recursion over the lattice of flats, and homology by
//! Smith normal form over the integers.

pub mod arrangement;
pub mod bits;
pub mod builder;
pub mod cw;
pub mod homology;
pub mod lattice;
pub mod matroid;
pub mod resolution;
pub mod simplicial;

pub use arrangement::{IntersectionLattice, SphereArrangement};
pub use builder::{build, BuildPlan, Policy};
pub use cw::{CellSet, CwComplex};
pub use homology::{HomologyProfile, Ring};
pub use lattice::{GeometricLattice, PointedLattice};
pub use matroid::Matroid;
pub use resolution::{BettiTable, LabeledComplex, MonomialIdeal};
pub use simplicial::SimplicialComplex;
