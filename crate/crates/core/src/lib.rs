//! Rotation theory and circle-factor construction for torus homeomorphisms.
//!
//! The crate works with lifts of torus homeomorphisms in the isotopy class of
//! a Dehn twist `I_k = [[1, k], [0, 1]]`. Orbits are measured against a
//! rotation vector, and for maps with bounded vertical deviations a
//! `ρ`-centralized skew-product over a circle rotation is rasterized in order
//! to build a semi-conjugacy onto an irrational rotation.

pub mod circle_maps;
pub mod error;
pub mod factor_builder;
pub mod gallery;
pub mod mapdef;
pub mod metric;
pub mod output;
pub mod rotation_theory;
pub mod skew_product;
pub mod torus_maps;

pub use error::{Error, Result};

/// Golden mean conjugate `(√5 − 1)/2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// Silver mean conjugate `√2 − 1`.
pub const SILVER: f64 = 0.414_213_562_373_095_1;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
