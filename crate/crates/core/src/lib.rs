//! Statistics on Kendall's planar shape space.
//!
//! A k-ad (k labeled planar landmarks, k > 2) determines a shape after
//! quotienting out translation, scale and rotation. The resulting space is
//! the complex projective space CP^{k-2} of real dimension 2k-4. This crate
//! provides the two standard geometries on it — the extrinsic (full
//! Procrustes) distance induced by the Veronese-Whitney embedding into
//! Hermitian matrices, and the intrinsic (geodesic) distance — together with
//! Frechet mean and variation estimators and the associated large-sample
//! two-sample tests for equality of mean shapes and of variations.
//!
//! Modules:
//! - [`shape`]: k-ads, preshapes, shapes, distances, rotation alignment.
//! - [`frechet`]: Frechet functions, variation summaries, the variation test.
//! - [`extrinsic`]: embedding, eigendecomposition-based mean/variation,
//!   tangent coordinates, extrinsic two-sample tests.
//! - [`intrinsic`]: exp/log maps, Karcher mean, CLT parameter estimates,
//!   intrinsic two-sample test and confidence region.
//! - [`statdist`]: chi-squared and normal reference distributions.
//!
//! ```
//! use shapestat_core::{extrinsic, KAd, Shape};
//!
//! // Two samples of noisy unit squares (deterministic scatter; any real use
//! // would read landmarks from data).
//! let quad = |i: usize, spread: f64| -> Shape {
//!     let t = i as f64;
//!     let w = |f: f64| spread * (f * t).sin();
//!     let kad = KAd::from_xy(&[
//!         (w(0.9), w(1.3)),
//!         (1.0 + w(0.7), w(1.9)),
//!         (1.0 + w(2.3), 1.0 + w(0.5)),
//!         (w(1.1), 1.0 + w(2.9)),
//!     ])
//!     .unwrap();
//!     Shape::from_kad(&kad).unwrap()
//! };
//! let a: Vec<Shape> = (0..12).map(|i| quad(i, 0.02)).collect();
//! let b: Vec<Shape> = (0..12).map(|i| quad(i + 7, 0.025)).collect();
//!
//! let (mean, eig) = extrinsic::extrinsic_mean(&a).unwrap();
//! assert!(extrinsic::extrinsic_variation(&eig) < 0.1);
//! assert_eq!(mean.k(), 4);
//!
//! let report = extrinsic::extrinsic_mean_test(&a, &b, 0.05).unwrap();
//! assert!(report.p_value > 0.0 && report.p_value <= 1.0);
//! ```

pub mod error;
pub mod extrinsic;
pub mod frechet;
pub mod intrinsic;
mod linalg;
pub mod shape;
pub mod statdist;

pub use error::{Result, ShapeError};
pub use frechet::{MetricKind, ReferenceDistribution, TestReport, VariationSummary};
pub use shape::{KAd, Preshape, Shape};

/// Re-exported so downstream code can name the vector and matrix types this
/// crate's API uses without pinning its own copy of the dependency.
pub use nalgebra;

/// Complex scalar used throughout (re-export of `nalgebra::Complex<f64>`).
pub type Complex64 = nalgebra::Complex<f64>;
