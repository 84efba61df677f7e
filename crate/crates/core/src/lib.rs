//! Weighted polynomial spaces `Poly(nP)` on convex lattice bodies `P`.
//!
//! The building blocks are exact lattice geometry ([`geometry`],
//! [`basis`]), discrete measures and weights ([`measure`]), and the
//! numerical objects built from them: weighted Vandermonde determinants
//! and Fekete points ([`fekete`]), Gram matrices and Bergman functions
//! ([`gram`]), D-optimal measures ([`design`]), extremal functions and the
//! one-variable discrete energy ([`extremal`], [`energy`], [`experiments`]).
//!
//! ```
//! use pluripot::{dims, ConvexBody};
//!
//! let d = dims(&ConvexBody::simplex(2).unwrap(), 2).unwrap();
//! assert_eq!((d.d_n, d.l_n), (6, 8));
//! ```

pub mod acceptance;
pub mod basis;
pub mod cli;
pub mod design;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod extremal;
pub mod fekete;
pub mod geometry;
pub mod gram;
pub mod linalg;
pub mod measure;
pub mod output;

pub use basis::{dims, DimInfo, MultiIndexBasis};
pub use design::{optimal_measure, DesignResult};
pub use energy::{energy_1d, GridFunction1D};
pub use error::{Error, Result};
pub use extremal::ExtremalCase;
pub use fekete::{fekete_search, FeketeResult};
pub use geometry::ConvexBody;
pub use gram::GramSystem;
pub use measure::{make_grid, DiscreteMeasure, GridSpec, IntervalRule, WeightSpec};
