//! Newton maps of planar real polynomial maps.
//!
//! The crate builds the Newton map `N_f(z) = z - Df(z)^{-1} f(z)` of a polynomial
//! map `f = (p, q)` as an explicit rational map, reduces quadratic pencils to their
//! parabolic / hyperbolic normal forms, and studies both directions of the
//! dynamics:
//!
//! * forward: orbit classification, basin rasters, chaotic-attractor detection,
//!   parameter-space sweeps ([`newton`], [`raster`], [`mps`]);
//! * backward: closed-form inverse branches, preimage trees, restricted-branch
//!   chaos games and Hausdorff diagnostics ([`inverse`], [`hausdorff`]).
//!
//! ```
//! use newton_planar::{families, newton::NewtonMapModel};
//!
//! let f = families::parabolic(0.0, 0.0);
//! let model = NewtonMapModel::new(f).unwrap();
//! let z = model.eval([2.0, 1.0]).unwrap();
//! assert!((z[0] - 9.0 / 7.0).abs() < 1e-14 && (z[1] - 8.0 / 7.0).abs() < 1e-14);
//! ```

pub mod error;
pub mod families;
pub mod hausdorff;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod mps;
pub mod newton;
pub mod pencil;
pub mod poly2;
pub mod raster;
pub mod univariate;

pub use error::{Error, Result};
pub use poly2::{AffineMap2, PlanarMap, Poly2};

/// A point of the real plane.
pub type Point = [f64; 2];
