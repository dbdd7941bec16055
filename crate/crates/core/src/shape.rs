//! k-ads, preshapes, shapes and the two distances on the shape space.
//!
//! A k-ad is an ordered list of k planar landmarks viewed as a complex
//! k-vector. Centering and normalizing gives the preshape, a point on the
//! unit sphere in the centered hyperplane; its rotation orbit `e^{i theta} u`
//! is the shape. Every exposed function of [`Shape`] is invariant under the
//! choice of representative within the orbit.

use nalgebra::{Complex, DVector};

use crate::error::{Result, ShapeError};

/// Tolerance for the preshape centering and unit-norm invariants.
pub const PRESHAPE_TOL: f64 = 1e-12;

/// Largest supported landmark count.
pub const MAX_LANDMARKS: usize = 512;

type C64 = Complex<f64>;

/// An ordered configuration of k planar landmarks, stored as complex numbers
/// `x + iy`. Units are arbitrary; translation and scale are removed by
/// [`KAd::to_preshape`].
#[derive(Debug, Clone, PartialEq)]
pub struct KAd {
    points: Vec<C64>,
}

impl KAd {
    /// Builds a k-ad from complex landmark coordinates. Requires
    /// `2 < k <= 512`. Degeneracy (all landmarks coincident) is detected by
    /// [`KAd::to_preshape`], not here, so that malformed configurations can
    /// still be represented and reported with context.
    pub fn new(points: Vec<C64>) -> Result<Self> {
        let k = points.len();
        if k <= 2 {
            return Err(ShapeError::TooFewLandmarks { k });
        }
        if k > MAX_LANDMARKS {
            return Err(ShapeError::TooManyLandmarks { k, max: MAX_LANDMARKS });
        }
        Ok(KAd { points })
    }

    /// Builds a k-ad from `(x, y)` pairs.
    pub fn from_xy(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, y)| C64::new(x, y)).collect())
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// Centroid size: the Euclidean norm of the centered configuration.
    pub fn centroid_size(&self) -> f64 {
        let centroid = self.centroid();
        self.points
            .iter()
            .map(|z| (z - centroid).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn centroid(&self) -> C64 {
        self.points.iter().sum::<C64>() / self.points.len() as f64
    }

    /// Removes translation and scale: `u = (z - <z>) / ||z - <z>||`.
    ///
    /// Translating or positively scaling the input leaves the output
    /// unchanged; rotating the input by theta rotates the output by theta.
    pub fn to_preshape(&self) -> Result<Preshape> {
        let centroid = self.centroid();
        let mut u = DVector::from_iterator(self.k(), self.points.iter().map(|z| z - centroid));
        let norm = u.norm();
        if norm == 0.0 {
            return Err(ShapeError::DegenerateConfiguration);
        }
        u /= C64::new(norm, 0.0);
        Ok(Preshape { u })
    }
}

/// A centered, unit-norm complex k-vector: a point on the preshape sphere
/// S^{2k-3}.
#[derive(Debug, Clone, PartialEq)]
pub struct Preshape {
    u: DVector<C64>,
}

impl Preshape {
    /// Validates the centering and unit-norm invariants at [`PRESHAPE_TOL`].
    pub fn new(u: DVector<C64>) -> Result<Self> {
        if u.len() <= 2 {
            return Err(ShapeError::TooFewLandmarks { k: u.len() });
        }
        let mean = u.iter().sum::<C64>() / u.len() as f64;
        if mean.norm() > PRESHAPE_TOL {
            return Err(ShapeError::InvalidPreshape { what: "component sum is not zero" });
        }
        if (u.norm() - 1.0).abs() > PRESHAPE_TOL {
            return Err(ShapeError::InvalidPreshape { what: "norm is not one" });
        }
        Ok(Preshape { u })
    }

    /// Internal constructor for vectors that are centered and normalized by
    /// construction; renormalizes to keep the invariants tight.
    pub(crate) fn from_unit_centered(mut u: DVector<C64>) -> Self {
        let norm = u.norm();
        debug_assert!((norm - 1.0).abs() < 1e-6, "caller must pass a near-unit vector");
        u /= C64::new(norm, 0.0);
        Preshape { u }
    }

    pub fn k(&self) -> usize {
        self.u.len()
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.u
    }

    /// Hermitian inner product `self* other` (conjugate-linear in `self`).
    pub fn hermitian_dot(&self, other: &Preshape) -> C64 {
        self.u.dotc(&other.u)
    }

    /// Rotates `self` to minimize the Euclidean distance to `m`:
    /// returns `e^{i theta*} u` with `theta* = -arg(m* u)`. When `m* u = 0`
    /// every rotation is equally bad and `self` is returned unchanged.
    pub fn align_to(&self, m: &Preshape) -> Preshape {
        let c = m.hermitian_dot(self);
        let modulus = c.norm();
        if modulus == 0.0 {
            return self.clone();
        }
        let phase = c.conj() / modulus;
        Preshape { u: &self.u * phase }
    }
}

/// A point of the shape space: the rotation orbit of a preshape. The stored
/// representative is gauge-unfixed; all exposed functions are invariant
/// under `rep -> e^{i theta} rep`.
#[derive(Debug, Clone)]
pub struct Shape {
    rep: Preshape,
}

impl Shape {
    pub fn new(rep: Preshape) -> Self {
        Shape { rep }
    }

    /// Shape of a k-ad (centering + normalizing + forgetting rotation).
    pub fn from_kad(kad: &KAd) -> Result<Self> {
        Ok(Shape { rep: kad.to_preshape()? })
    }

    pub fn rep(&self) -> &Preshape {
        &self.rep
    }

    pub fn k(&self) -> usize {
        self.rep.k()
    }

    /// Squared full Procrustes distance `2(1 - |u* v|^2)`, the extrinsic
    /// distance induced by the Veronese-Whitney embedding. Symmetric, in
    /// [0, 2], and independent of the chosen representatives.
    pub fn procrustes_distance_sq(&self, other: &Shape) -> f64 {
        let c = self.rep.hermitian_dot(&other.rep).norm_sqr();
        (2.0 * (1.0 - c)).max(0.0)
    }

    /// Geodesic distance `arccos |u* v|` in [0, pi/2], the Fubini-Study
    /// distance normalized so sectional curvatures lie in [1, 4]. Satisfies
    /// `procrustes_distance_sq = 2 sin^2(geodesic_distance)`.
    pub fn geodesic_distance(&self, other: &Shape) -> f64 {
        let c = self.rep.hermitian_dot(&other.rep).norm().clamp(0.0, 1.0);
        c.acos()
    }
}
