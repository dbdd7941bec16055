//! Intrinsic (geodesic) statistics on the shape space.
//!
//! The shape space carries the Fubini-Study metric normalized so that
//! sectional curvatures lie in [1, 4]; geodesic distance is
//! `arccos |u* v| <= pi/2`. Tangent vectors are represented by horizontal
//! lifts: centered complex vectors orthogonal to the base preshape. With the
//! curvature bound C = 4, a sample supported in a geodesic ball of radius
//! below pi/4 around the initial point satisfies the uniqueness condition
//! for a local Frechet minimum; the Karcher fixed point is found by
//! fixed-step Riemannian gradient descent on the sample Frechet function.
//!
//! The central-limit parameters at the mean are estimated in normal
//! coordinates: the gradient of a squared distance is `-2 log` (exact at the
//! chart origin), and the Hessian of the Frechet function is estimated by
//! symmetric central differences, since no closed form is used here.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Result, ShapeError};
use crate::extrinsic;
use crate::frechet::{self, MetricKind, ReferenceDistribution, TestReport};
use crate::linalg;
use crate::shape::{Preshape, Shape};
use crate::statdist;

type C64 = Complex<f64>;

/// Targets at overlap `|u* v| <= CUT_TOL` are treated as lying on the cut
/// locus, where the log map is undefined.
pub const CUT_TOL: f64 = 1e-9;

/// Condition-number ceiling for the estimated Hessian.
pub const MAX_LAMBDA_CONDITION: f64 = 1e10;

/// Uniqueness support radius `pi / (2 sqrt(C))` for the curvature bound C = 4.
pub const SUPPORT_RADIUS: f64 = std::f64::consts::FRAC_PI_4;

/// Default step for the finite-difference Hessian.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

const TANGENT_TOL: f64 = 1e-12;

/// A tangent vector to the shape space at `base`, stored as its horizontal
/// lift: a centered complex k-vector Hermitian-orthogonal to the base
/// preshape.
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: Preshape,
    w: DVector<C64>,
}

impl TangentVector {
    /// Validates centering and horizontality at 1e-12.
    pub fn new(base: Preshape, w: DVector<C64>) -> Result<Self> {
        if w.len() != base.k() {
            return Err(ShapeError::MismatchedLandmarkCounts { a: base.k(), b: w.len() });
        }
        let sum: C64 = w.iter().sum();
        if sum.norm() > TANGENT_TOL * (w.len() as f64) {
            return Err(ShapeError::InvalidPreshape { what: "tangent vector is not centered" });
        }
        if base.coords().dotc(&w).norm() > TANGENT_TOL {
            return Err(ShapeError::InvalidPreshape { what: "tangent vector is not horizontal" });
        }
        Ok(TangentVector { base, w })
    }

    pub(crate) fn from_parts(base: Preshape, w: DVector<C64>) -> Self {
        TangentVector { base, w }
    }

    pub fn base(&self) -> &Preshape {
        &self.base
    }

    pub fn components(&self) -> &DVector<C64> {
        &self.w
    }

    /// Euclidean norm of the lift, which equals the Riemannian norm and the
    /// geodesic length of the segment the vector spans.
    pub fn norm(&self) -> f64 {
        self.w.norm()
    }

    /// Same base, components scaled by `t`.
    pub fn scaled(&self, t: f64) -> TangentVector {
        TangentVector { base: self.base.clone(), w: &self.w * C64::new(t, 0.0) }
    }
}

/// Exponential map: the shape of `cos(|w|) base + sin(|w|) w/|w|`.
///
/// Defined for `|w| < pi/2` (the injectivity radius); the zero vector maps
/// to the base shape, and `geodesic_distance(base, exp(v)) = |v|`.
pub fn exp_map(v: &TangentVector) -> Result<Shape> {
    let d = v.norm();
    if d >= std::f64::consts::FRAC_PI_2 {
        return Err(ShapeError::OutOfInjectivityRadius { norm: d });
    }
    if d == 0.0 {
        return Ok(Shape::new(v.base.clone()));
    }
    let u = v.base.coords();
    let result = u * C64::new(d.cos(), 0.0) + &v.w * C64::new(d.sin() / d, 0.0);
    Ok(Shape::new(Preshape::from_unit_centered(result)))
}

/// Logarithm map: the horizontal lift at `base` of the minimizing geodesic
/// to `target`. With `c = u* v`, `vt = v conj(c)/|c|` and `d = arccos |c|`,
/// the lift is `(d / sin d)(vt - cos(d) u)`; its norm equals the geodesic
/// distance.
///
/// Fails with `CutLocus` when `|c| <= CUT_TOL`: the target is at or beyond
/// the cut locus of the base and no unique minimizing geodesic exists.
pub fn log_map(base: &Shape, target: &Shape) -> Result<TangentVector> {
    let u = base.rep().coords();
    let c = base.rep().hermitian_dot(target.rep());
    let overlap = c.norm();
    if overlap <= CUT_TOL {
        return Err(ShapeError::CutLocus);
    }
    let cos_d = overlap.min(1.0);
    let d = cos_d.acos();
    if d == 0.0 {
        return Ok(TangentVector::from_parts(base.rep().clone(), DVector::zeros(u.len())));
    }
    let aligned = target.rep().coords() * (c.conj() / overlap);
    let w = (aligned - u * C64::new(cos_d, 0.0)) * C64::new(d / d.sin(), 0.0);
    Ok(TangentVector::from_parts(base.rep().clone(), w))
}

/// Tuning of the Karcher fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct KarcherConfig {
    /// Gradient-descent step factor.
    pub step: f64,
    /// Stop when the mean log norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KarcherConfig {
    fn default() -> Self {
        KarcherConfig { step: 1.0, tol: 1e-9, max_iter: 100 }
    }
}

/// Result of a Karcher iteration. `support_ok` records whether the sample
/// was inside the uniqueness ball of radius pi/4 around the initial point;
/// the condition is sufficient, not necessary, so a violation is reported
/// rather than treated as a failure.
#[derive(Debug, Clone)]
pub struct KarcherOutcome {
    pub mean: Shape,
    pub iterations: usize,
    pub grad_norm: f64,
    pub support_ok: bool,
    /// Largest geodesic distance from the initial point to a sample point.
    pub support_radius: f64,
}

/// Sample Karcher (intrinsic) mean by fixed-step gradient descent:
/// `mu <- exp_mu(step * mean_j log_mu(X_j))` until the mean log norm falls
/// below `tol`. The returned point satisfies the sample fixed-point
/// condition to that tolerance.
pub fn karcher_mean(sample: &[Shape], init: &Shape, config: &KarcherConfig) -> Result<KarcherOutcome> {
    if sample.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let k = init.k();
    let mut support_radius = 0.0f64;
    for x in sample {
        if x.k() != k {
            return Err(ShapeError::MismatchedLandmarkCounts { a: k, b: x.k() });
        }
        support_radius = support_radius.max(init.geodesic_distance(x));
    }
    let support_ok = support_radius < SUPPORT_RADIUS;

    let n = sample.len() as f64;
    let mut current = init.clone();
    let mut grad_norm = f64::INFINITY;
    for iteration in 1..=config.max_iter {
        let mut grad = DVector::<C64>::zeros(k);
        for x in sample {
            grad += log_map(&current, x)?.components();
        }
        grad /= C64::new(n, 0.0);
        grad_norm = grad.norm();
        if grad_norm < config.tol {
            return Ok(KarcherOutcome {
                mean: current,
                iterations: iteration,
                grad_norm,
                support_ok,
                support_radius,
            });
        }
        let step = TangentVector::from_parts(
            current.rep().clone(),
            grad * C64::new(config.step, 0.0),
        );
        current = exp_map(&step)?;
    }
    Err(ShapeError::NoConvergence { iterations: config.max_iter, grad_norm })
}

/// Normal-coordinate chart at a base shape: 2k-4 horizontal lifts forming a
/// real-orthonormal basis of the tangent space.
#[derive(Debug, Clone)]
pub struct Chart {
    base: Shape,
    frame: Vec<DVector<C64>>,
}

impl Chart {
    pub fn base(&self) -> &Shape {
        &self.base
    }

    pub fn frame(&self) -> &[DVector<C64>] {
        &self.frame
    }

    /// Real dimension 2k-4 of the shape space.
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Real coordinates `Re(f_r* w)` of a horizontal lift in this frame.
    pub fn coords_of(&self, w: &DVector<C64>) -> DVector<f64> {
        DVector::from_iterator(self.frame.len(), self.frame.iter().map(|f| f.dotc(w).re))
    }

    /// Normal coordinates of a target shape: the frame coordinates of
    /// `log_map(base, target)`.
    pub fn normal_coords(&self, target: &Shape) -> Result<DVector<f64>> {
        Ok(self.coords_of(log_map(&self.base, target)?.components()))
    }

    /// Tangent vector with the given frame coordinates.
    pub fn tangent_from_coords(&self, t: &DVector<f64>) -> TangentVector {
        let k = self.base.k();
        let mut w = DVector::<C64>::zeros(k);
        for (coeff, f) in t.iter().zip(&self.frame) {
            w += f * C64::new(*coeff, 0.0);
        }
        TangentVector::from_parts(self.base.rep().clone(), w)
    }

    /// The shape at the given normal coordinates.
    pub fn point_at(&self, t: &DVector<f64>) -> Result<Shape> {
        exp_map(&self.tangent_from_coords(t))
    }
}

/// Builds the normal-coordinate chart at `base`: Gram-Schmidt over the
/// centered, base-orthogonal projections of the standard directions yields
/// k-2 complex basis vectors; together with their i-multiples they form the
/// 2k-4 real-orthonormal frame. Deterministic for a fixed base.
pub fn build_chart(base: &Shape) -> Chart {
    let k = base.k();
    let u = base.rep().coords();
    let ones = DVector::<C64>::from_element(k, C64::new(1.0 / (k as f64).sqrt(), 0.0));

    let mut complex_basis: Vec<DVector<C64>> = Vec::with_capacity(k - 2);
    for j in 0..k {
        if complex_basis.len() == k - 2 {
            break;
        }
        let mut v = DVector::<C64>::zeros(k);
        v[j] = C64::new(1.0, 0.0);
        // Two projection passes keep the frame orthonormal to well below the
        // 1e-10 invariant even for nearly dependent candidates.
        for _ in 0..2 {
            let c = ones.dotc(&v);
            v -= &ones * c;
            let c = u.dotc(&v);
            v -= u * c;
            for b in &complex_basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            complex_basis.push(v / C64::new(norm, 0.0));
        }
    }
    debug_assert_eq!(complex_basis.len(), k - 2);

    let mut frame = complex_basis.clone();
    frame.extend(complex_basis.iter().map(|b| b * C64::new(0.0, 1.0)));
    Chart { base: base.clone(), frame }
}

/// Central-limit parameters at a Frechet mean, in a normal-coordinate chart:
/// `lambda` estimates the Hessian of the Frechet function and `sigma` the
/// covariance of the gradient of the squared distance.
#[derive(Debug, Clone)]
pub struct CltParams {
    lambda: DMatrix<f64>,
    sigma: DMatrix<f64>,
}

impl CltParams {
    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// The sandwich `lambda^{-1} sigma lambda^{-1}` appearing in the CLT
    /// covariance.
    pub fn sandwich(&self) -> Result<DMatrix<f64>> {
        let inv = linalg::invert_symmetric(&self.lambda).ok_or(ShapeError::SingularLambda {
            condition: f64::INFINITY,
        })?;
        let s = &inv * &self.sigma * &inv;
        Ok((&s + s.transpose()) * 0.5)
    }
}

/// Estimates the CLT parameters of a sample at its Karcher mean.
///
/// Gradients are exact: for each observation the gradient of
/// `y -> d_g^2(X_j, y)` at the mean is `-2 log_mean(X_j)` in frame
/// coordinates. The Hessian of the sample Frechet function is estimated by
/// symmetric central differences with step `fd_step`, taken at the chart
/// position of the mean (the origin when the chart is based at the mean).
pub fn estimate_clt_params(
    sample: &[Shape],
    mean: &Shape,
    chart: &Chart,
    fd_step: f64,
) -> Result<CltParams> {
    if sample.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let n = sample.len() as f64;
    let d = chart.dim();

    // Horizontal lifts at the mean are only comparable with the chart frame
    // in a common rotation gauge: rotating a representative by e^{i theta}
    // rotates its lifts the same way, and the mean's representative carries
    // an arbitrary phase relative to the chart base's. Align it first; when
    // the chart is based at the mean this is the identity.
    let gauge_mean = Shape::new(mean.rep().align_to(chart.base().rep()));

    let mut sigma = DMatrix::<f64>::zeros(d, d);
    let mut grad_mean = DVector::<f64>::zeros(d);
    for x in sample {
        let g = chart.coords_of(log_map(&gauge_mean, x)?.components()) * -2.0;
        sigma.ger(1.0, &g, &g, 1.0);
        grad_mean += &g;
    }
    sigma /= n;
    grad_mean /= n;
    sigma.ger(-1.0, &grad_mean, &grad_mean, 1.0);

    let y0 = chart.normal_coords(&gauge_mean)?;
    let f = |y: &DVector<f64>| -> Result<f64> {
        frechet::frechet_function(&chart.point_at(y)?, sample, MetricKind::Intrinsic)
    };
    let h = fd_step;
    let f0 = f(&y0)?;
    let mut lambda = DMatrix::<f64>::zeros(d, d);
    let shifted = |r: usize, s_r: f64, c: usize, s_c: f64| {
        let mut y = y0.clone();
        y[r] += s_r * h;
        y[c] += s_c * h;
        y
    };
    for r in 0..d {
        let fp = f(&shifted(r, 1.0, r, 0.0))?;
        let fm = f(&shifted(r, -1.0, r, 0.0))?;
        lambda[(r, r)] = (fp - 2.0 * f0 + fm) / (h * h);
        for s in (r + 1)..d {
            let fpp = f(&shifted(r, 1.0, s, 1.0))?;
            let fpm = f(&shifted(r, 1.0, s, -1.0))?;
            let fmp = f(&shifted(r, -1.0, s, 1.0))?;
            let fmm = f(&shifted(r, -1.0, s, -1.0))?;
            let value = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            lambda[(r, s)] = value;
            lambda[(s, r)] = value;
        }
    }

    let condition = linalg::symmetric_condition(&lambda);
    if !condition.is_finite() || condition > MAX_LAMBDA_CONDITION {
        return Err(ShapeError::SingularLambda { condition });
    }
    Ok(CltParams { lambda, sigma })
}

/// Outcome of the intrinsic two-sample mean test, carrying the Karcher means
/// it computed and whether every iteration's support condition held.
#[derive(Debug, Clone)]
pub struct IntrinsicMeanTest {
    pub report: TestReport,
    pub mean_a: Shape,
    pub mean_b: Shape,
    pub pooled_mean: Shape,
    pub support_ok: bool,
}

/// Two-sample test for equality of intrinsic means.
///
/// Both samples are expressed in normal coordinates at the pooled Karcher
/// mean; the statistic is
/// `(n+m)(mu1 - mu2)' Sigma^{-1} (mu1 - mu2)` with
/// `Sigma = (n+m)(L1^{-1} S1 L1^{-1} / n + L2^{-1} S2 L2^{-1} / m)`,
/// referred to chi-squared with 2k-4 degrees of freedom. Karcher iterations
/// start from the extrinsic means.
pub fn intrinsic_mean_test(
    a: &[Shape],
    b: &[Shape],
    alpha: f64,
    karcher: &KarcherConfig,
    fd_step: f64,
) -> Result<IntrinsicMeanTest> {
    if a.is_empty() || b.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let k = a[0].k();
    if b[0].k() != k {
        return Err(ShapeError::MismatchedLandmarkCounts { a: k, b: b[0].k() });
    }
    let n = a.len() as f64;
    let m = b.len() as f64;

    let pooled: Vec<Shape> = a.iter().chain(b.iter()).cloned().collect();
    let fit = |sample: &[Shape]| -> Result<KarcherOutcome> {
        let (init, _) = extrinsic::extrinsic_mean(sample)?;
        karcher_mean(sample, &init, karcher)
    };
    let out_a = fit(a)?;
    let out_b = fit(b)?;
    let out_p = fit(&pooled)?;

    let chart = build_chart(&out_p.mean);
    let mu1 = chart.normal_coords(&out_a.mean)?;
    let mu2 = chart.normal_coords(&out_b.mean)?;

    let clt_a = estimate_clt_params(a, &out_a.mean, &chart, fd_step)?;
    let clt_b = estimate_clt_params(b, &out_b.mean, &chart, fd_step)?;

    let sigma_hat = (&clt_a.sandwich()? / n + &clt_b.sandwich()? / m) * (n + m);
    let condition = linalg::symmetric_condition(&sigma_hat);
    if !condition.is_finite() || condition > extrinsic::MAX_COVARIANCE_CONDITION {
        return Err(ShapeError::SingularCovariance { condition });
    }
    let diff = mu1 - mu2;
    let solved = linalg::solve_spd(&sigma_hat, &diff)
        .ok_or(ShapeError::SingularCovariance { condition })?;
    let statistic = (n + m) * diff.dot(&solved);

    let report = TestReport::new(statistic, ReferenceDistribution::ChiSquared { df: 2 * k - 4 }, alpha)?;
    Ok(IntrinsicMeanTest {
        report,
        mean_a: out_a.mean,
        mean_b: out_b.mean,
        pooled_mean: out_p.mean,
        support_ok: out_a.support_ok && out_b.support_ok && out_p.support_ok,
    })
}

/// Ellipsoidal confidence region for the intrinsic mean, described in the
/// normal-coordinate chart at the sample Karcher mean: the set of coordinate
/// vectors `y` with
/// `(y - center)' shape_matrix (y - center) <= threshold`, where
/// `shape_matrix = n ((L^{-1} S L^{-1})^{-1})` and `threshold` is the upper
/// chi-squared quantile with 2k-4 degrees of freedom.
#[derive(Debug, Clone)]
pub struct ConfidenceRegion {
    pub chart: Chart,
    pub center: DVector<f64>,
    pub shape_matrix: DMatrix<f64>,
    pub threshold: f64,
    pub support_ok: bool,
}

impl ConfidenceRegion {
    /// Quadratic form of a candidate mean shape.
    pub fn mahalanobis_sq(&self, candidate: &Shape) -> Result<f64> {
        let y = self.chart.normal_coords(candidate)?;
        let centered = y - &self.center;
        Ok((&self.shape_matrix * &centered).dot(&centered))
    }

    pub fn contains(&self, candidate: &Shape) -> Result<bool> {
        Ok(self.mahalanobis_sq(candidate)? <= self.threshold)
    }

    /// Euclidean volume of the ellipsoid in chart coordinates. Shrinks as the
    /// sample grows; useful for monotonicity diagnostics.
    pub fn volume(&self) -> f64 {
        let d = self.center.len() as f64;
        let det = self.shape_matrix.determinant();
        let ln_unit_ball = 0.5 * d * std::f64::consts::PI.ln() - statdist::ln_gamma(d / 2.0 + 1.0);
        (ln_unit_ball + 0.5 * d * self.threshold.ln() - 0.5 * det.ln()).exp()
    }
}

/// Asymptotic `1 - alpha` confidence region for the intrinsic mean, centered
/// at the sample Karcher mean (the chart origin).
pub fn intrinsic_confidence_region(
    sample: &[Shape],
    alpha: f64,
    karcher: &KarcherConfig,
    fd_step: f64,
) -> Result<ConfidenceRegion> {
    if sample.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let k = sample[0].k();
    let n = sample.len() as f64;
    let (init, _) = extrinsic::extrinsic_mean(sample)?;
    let out = karcher_mean(sample, &init, karcher)?;
    let chart = build_chart(&out.mean);
    let clt = estimate_clt_params(sample, &out.mean, &chart, fd_step)?;

    let sandwich = clt.sandwich()?;
    let condition = linalg::symmetric_condition(&sandwich);
    if !condition.is_finite() || condition > extrinsic::MAX_COVARIANCE_CONDITION {
        return Err(ShapeError::SingularCovariance { condition });
    }
    let inv = linalg::invert_symmetric(&sandwich)
        .ok_or(ShapeError::SingularCovariance { condition })?;
    let shape_matrix = (&inv + inv.transpose()) * (0.5 * n);
    let threshold = statdist::chi2_quantile(1.0 - alpha, 2 * k - 4)?;
    let center = DVector::<f64>::zeros(chart.dim());
    Ok(ConfidenceRegion { chart, center, shape_matrix, threshold, support_ok: out.support_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_preshape(k: usize, rng: &mut ChaCha8Rng) -> Preshape {
        let mut u = DVector::from_iterator(
            k,
            (0..k).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
        );
        let mean = u.iter().sum::<C64>() / k as f64;
        u.apply(|z| *z -= mean);
        let norm = u.norm();
        Preshape::new(u / C64::new(norm, 0.0)).unwrap()
    }

    fn random_shape(k: usize, rng: &mut ChaCha8Rng) -> Shape {
        Shape::new(random_preshape(k, rng))
    }

    /// Random horizontal tangent at `base` with the given norm.
    fn random_tangent(base: &Shape, norm: f64, rng: &mut ChaCha8Rng) -> TangentVector {
        let k = base.k();
        let u = base.rep().coords();
        let mut w = DVector::from_iterator(
            k,
            (0..k).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
        );
        let mean = w.iter().sum::<C64>() / k as f64;
        w.apply(|z| *z -= mean);
        let c = u.dotc(&w);
        w -= u * c;
        let current = w.norm();
        w *= C64::new(norm / current, 0.0);
        TangentVector::new(base.rep().clone(), w).unwrap()
    }

    /// Shapes near `center`, all within geodesic distance `radius`.
    fn concentrated_sample(
        center: &Shape,
        radius: f64,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Shape> {
        (0..n)
            .map(|_| {
                let d = radius * rng.gen_range(0.05..1.0);
                exp_map(&random_tangent(center, d, rng)).unwrap()
            })
            .collect()
    }

    #[test]
    fn exp_of_zero_is_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = random_shape(5, &mut rng);
        let v = TangentVector::new(base.rep().clone(), DVector::zeros(5)).unwrap();
        let out = exp_map(&v).unwrap();
        assert_eq!(out.rep().coords(), base.rep().coords());
    }

    #[test]
    fn exp_reaches_the_prescribed_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let base = random_shape(4, &mut rng);
            let d = rng.gen_range(1e-4..1.5);
            let v = random_tangent(&base, d, &mut rng);
            let out = exp_map(&v).unwrap();
            assert!((base.geodesic_distance(&out) - d).abs() < 1e-10);
        }
    }

    #[test]
    fn exp_rejects_vectors_beyond_injectivity_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = random_shape(4, &mut rng);
        let v = random_tangent(&base, 1.6, &mut rng);
        assert!(matches!(exp_map(&v), Err(ShapeError::OutOfInjectivityRadius { .. })));
    }

    #[test]
    fn log_of_base_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = random_shape(6, &mut rng);
        let v = log_map(&base, &base).unwrap();
        // At worst the overlap |u* u| rounds one ulp below 1, leaving a
        // machine-precision residual rather than an exact zero.
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn log_at_cut_locus_fails() {
        let a = Shape::new(
            Preshape::new(DVector::from_vec(vec![
                C64::new(1.0 / 2.0f64.sqrt(), 0.0),
                C64::new(-1.0 / 2.0f64.sqrt(), 0.0),
                C64::new(0.0, 0.0),
            ]))
            .unwrap(),
        );
        let b = Shape::new(
            Preshape::new(DVector::from_vec(vec![
                C64::new(1.0 / 6.0f64.sqrt(), 0.0),
                C64::new(1.0 / 6.0f64.sqrt(), 0.0),
                C64::new(-2.0 / 6.0f64.sqrt(), 0.0),
            ]))
            .unwrap(),
        );
        assert_eq!(log_map(&a, &b).unwrap_err(), ShapeError::CutLocus);
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let base = random_shape(5, &mut rng);
            let target = exp_map(&random_tangent(
                &base,
                rng.gen_range(1e-3..std::f64::consts::FRAC_PI_4),
                &mut rng,
            ))
            .unwrap();
            let v = log_map(&base, &target).unwrap();
            assert!((v.norm() - base.geodesic_distance(&target)).abs() < 1e-12);
            let back = exp_map(&v).unwrap();
            assert!(back.procrustes_distance_sq(&target) < 1e-14);
            // Linear comparison of aligned representatives resolves far below
            // what the arccos-based distance can certify.
            let aligned = back.rep().align_to(target.rep());
            assert!((aligned.coords() - target.rep().coords()).norm() < 1e-12);
        }
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let base = random_shape(4, &mut rng);
            let v = random_tangent(&base, rng.gen_range(1e-3..0.7), &mut rng);
            let target = exp_map(&v).unwrap();
            let w = log_map(&base, &target).unwrap();
            assert!((w.components() - v.components()).norm() < 1e-10);
        }
    }

    #[test]
    fn exp_matches_sphere_geodesics_under_hopf_map() {
        // Sigma_2^3 with this metric is isometric to the sphere of radius
        // 1/2; the unit-radius Hopf image of an exponential must follow the
        // closed-form great circle with doubled angle.
        let b1 = DVector::from_vec(vec![
            C64::new(1.0 / 2.0f64.sqrt(), 0.0),
            C64::new(-1.0 / 2.0f64.sqrt(), 0.0),
            C64::new(0.0, 0.0),
        ]);
        let b2 = DVector::from_vec(vec![
            C64::new(1.0 / 6.0f64.sqrt(), 0.0),
            C64::new(1.0 / 6.0f64.sqrt(), 0.0),
            C64::new(-2.0 / 6.0f64.sqrt(), 0.0),
        ]);
        let hopf = |z1: C64, z2: C64| {
            let cross = z1.conj() * z2;
            [2.0 * cross.re, 2.0 * cross.im, z1.norm_sqr() - z2.norm_sqr()]
        };

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let base = random_shape(3, &mut rng);
            let d = rng.gen_range(1e-3..1.4);
            let v = random_tangent(&base, d, &mut rng);
            let out = exp_map(&v).unwrap();

            let z = (b1.dotc(base.rep().coords()), b2.dotc(base.rep().coords()));
            let w = (b1.dotc(v.components()), b2.dotc(v.components()));
            let p0 = hopf(z.0, z.1);
            let cross_d = w.0.conj() * z.1 + z.0.conj() * w.1;
            let mut tangent = [
                2.0 * cross_d.re,
                2.0 * cross_d.im,
                2.0 * (z.0.conj() * w.0).re - 2.0 * (z.1.conj() * w.1).re,
            ];
            let speed = (tangent.iter().map(|t| t * t).sum::<f64>()).sqrt();
            // The Hopf map to the unit sphere doubles speeds.
            assert!((speed - 2.0 * d).abs() < 1e-10);
            for t in tangent.iter_mut() {
                *t /= speed;
            }
            let expected: Vec<f64> = (0..3)
                .map(|i| (2.0 * d).cos() * p0[i] + (2.0 * d).sin() * tangent[i])
                .collect();

            let zo = (b1.dotc(out.rep().coords()), b2.dotc(out.rep().coords()));
            let got = hopf(zo.0, zo.1);
            for i in 0..3 {
                assert!((got[i] - expected[i]).abs() < 1e-10, "component {i}");
            }
        }
    }

    #[test]
    fn karcher_of_point_mass_converges_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let s = random_shape(5, &mut rng);
        let sample = vec![s.clone(), s.clone(), s.clone()];
        let out = karcher_mean(&sample, &s, &KarcherConfig::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.mean.procrustes_distance_sq(&s) < 1e-20);
        assert!(out.support_ok);
    }

    #[test]
    fn karcher_of_two_shapes_is_the_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_shape(4, &mut rng);
        let v = random_tangent(&a, 0.6, &mut rng);
        let b = exp_map(&v).unwrap();
        let d = a.geodesic_distance(&b);

        // 1-D grid oracle along the connecting geodesic.
        let mut best_t = 0.0;
        let mut best_f = f64::INFINITY;
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0;
            let p = exp_map(&v.scaled(t)).unwrap();
            let f = frechet::frechet_function(&p, &[a.clone(), b.clone()], MetricKind::Intrinsic)
                .unwrap();
            if f < best_f {
                best_f = f;
                best_t = t;
            }
        }
        assert!((best_t - 0.5).abs() < 1e-3);

        let out = karcher_mean(&[a.clone(), b.clone()], &a, &KarcherConfig::default()).unwrap();
        assert!((out.mean.geodesic_distance(&a) - d / 2.0).abs() < 1e-8);
        assert!((out.mean.geodesic_distance(&b) - d / 2.0).abs() < 1e-8);
        let midpoint = exp_map(&v.scaled(0.5)).unwrap();
        assert!(out.mean.procrustes_distance_sq(&midpoint) < 1e-16);
    }

    #[test]
    fn karcher_satisfies_fixed_point_and_decreases_frechet_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let center = random_shape(6, &mut rng);
        let sample = concentrated_sample(&center, 0.3, 40, &mut rng);
        let init = sample[0].clone();
        let config = KarcherConfig::default();
        let out = karcher_mean(&sample, &init, &config).unwrap();
        assert!(out.support_ok);

        let mut grad = DVector::<C64>::zeros(6);
        for x in &sample {
            grad += log_map(&out.mean, x).unwrap().components();
        }
        grad /= C64::new(sample.len() as f64, 0.0);
        assert!(grad.norm() < config.tol);

        let f_init = frechet::frechet_function(&init, &sample, MetricKind::Intrinsic).unwrap();
        let f_mean = frechet::frechet_function(&out.mean, &sample, MetricKind::Intrinsic).unwrap();
        assert!(f_mean <= f_init);
    }

    #[test]
    fn karcher_flags_wide_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = random_shape(4, &mut rng);
        let far = exp_map(&random_tangent(&base, 1.2, &mut rng)).unwrap();
        let near = exp_map(&random_tangent(&base, 0.1, &mut rng)).unwrap();
        let out = karcher_mean(
            &[base.clone(), near, far],
            &base,
            &KarcherConfig { max_iter: 500, ..Default::default() },
        )
        .unwrap();
        assert!(!out.support_ok);
        assert!(out.support_radius > SUPPORT_RADIUS);
    }

    #[test]
    fn chart_frame_is_orthonormal_and_horizontal() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for k in [3usize, 5, 9] {
            let base = random_shape(k, &mut rng);
            let chart = build_chart(&base);
            assert_eq!(chart.dim(), 2 * k - 4);
            for (i, f) in chart.frame().iter().enumerate() {
                TangentVector::new(base.rep().clone(), f.clone()).unwrap();
                for (j, g) in chart.frame().iter().enumerate() {
                    let inner = f.dotc(g).re;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((inner - want).abs() < 1e-10, "gram({i},{j}) = {inner}");
                }
            }
        }
    }

    #[test]
    fn chart_coords_reconstruct_log_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let base = random_shape(5, &mut rng);
        let chart = build_chart(&base);
        for _ in 0..20 {
            let target = exp_map(&random_tangent(&base, rng.gen_range(0.01..0.7), &mut rng))
                .unwrap();
            let w = log_map(&base, &target).unwrap();
            let coords = chart.coords_of(w.components());
            let rebuilt = chart.tangent_from_coords(&coords);
            assert!((rebuilt.components() - w.components()).norm() < 1e-10);
        }
    }

    #[test]
    fn gradient_vanishes_at_karcher_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let center = random_shape(4, &mut rng);
        let sample = concentrated_sample(&center, 0.2, 30, &mut rng);
        let config = KarcherConfig::default();
        let out = karcher_mean(&sample, &sample[0], &config).unwrap();
        let chart = build_chart(&out.mean);
        let clt = estimate_clt_params(&sample, &out.mean, &chart, DEFAULT_FD_STEP).unwrap();
        assert_eq!(clt.sigma().nrows(), 4);

        let mut grad = DVector::<f64>::zeros(chart.dim());
        for x in &sample {
            grad += chart.coords_of(log_map(&out.mean, x).unwrap().components()) * -2.0;
        }
        grad /= sample.len() as f64;
        assert!(grad.norm() <= 2.0 * config.tol);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let center = random_shape(5, &mut rng);
        let sample = concentrated_sample(&center, 0.25, 25, &mut rng);
        // Evaluate at an arbitrary (non-mean) chart origin: the identity
        // gradient = -2 mean-log holds at the origin of any normal chart.
        let base = exp_map(&random_tangent(&center, 0.05, &mut rng)).unwrap();
        let chart = build_chart(&base);
        let h = DEFAULT_FD_STEP;

        let mut analytic = DVector::<f64>::zeros(chart.dim());
        for x in &sample {
            analytic += chart.coords_of(log_map(&base, x).unwrap().components()) * -2.0;
        }
        analytic /= sample.len() as f64;

        let tol = (10.0 * h * h).max(1e-6);
        for r in 0..chart.dim() {
            let mut plus = DVector::<f64>::zeros(chart.dim());
            plus[r] = h;
            let minus = -&plus;
            let fp = frechet::frechet_function(
                &chart.point_at(&plus).unwrap(),
                &sample,
                MetricKind::Intrinsic,
            )
            .unwrap();
            let fm = frechet::frechet_function(
                &chart.point_at(&minus).unwrap(),
                &sample,
                MetricKind::Intrinsic,
            )
            .unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!((fd - analytic[r]).abs() < tol, "coord {r}: {fd} vs {}", analytic[r]);
        }
    }

    #[test]
    fn lambda_is_twice_identity_in_the_flat_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let center = random_shape(4, &mut rng);
        let sample = concentrated_sample(&center, 1e-3, 30, &mut rng);
        let out = karcher_mean(&sample, &sample[0], &KarcherConfig::default()).unwrap();
        let chart = build_chart(&out.mean);
        let clt = estimate_clt_params(&sample, &out.mean, &chart, DEFAULT_FD_STEP).unwrap();
        for r in 0..chart.dim() {
            for s in 0..chart.dim() {
                let want = if r == s { 2.0 } else { 0.0 };
                assert!(
                    (clt.lambda()[(r, s)] - want).abs() < 5e-3,
                    "lambda({r},{s}) = {}",
                    clt.lambda()[(r, s)]
                );
            }
        }
    }

    #[test]
    fn lambda_passes_richardson_half_step_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let center = random_shape(4, &mut rng);
        let sample = concentrated_sample(&center, 0.15, 25, &mut rng);
        let out = karcher_mean(&sample, &sample[0], &KarcherConfig::default()).unwrap();
        let chart = build_chart(&out.mean);
        let h = 1e-3;
        let full = estimate_clt_params(&sample, &out.mean, &chart, h).unwrap();
        let half = estimate_clt_params(&sample, &out.mean, &chart, h / 2.0).unwrap();
        let tol = (10.0 * h * h).max(1e-6);
        for r in 0..chart.dim() {
            for s in 0..chart.dim() {
                assert!(
                    (full.lambda()[(r, s)] - half.lambda()[(r, s)]).abs() < tol,
                    "lambda({r},{s})"
                );
            }
        }
    }

    #[test]
    fn mean_test_on_identical_samples_is_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let center = random_shape(4, &mut rng);
        let sample = concentrated_sample(&center, 0.1, 25, &mut rng);
        let out =
            intrinsic_mean_test(&sample, &sample, 0.05, &KarcherConfig::default(), DEFAULT_FD_STEP)
                .unwrap();
        assert!(out.report.statistic.abs() < 1e-18);
        assert_eq!(out.report.p_value, 1.0);
        assert!(!out.report.reject);
        assert!(out.support_ok);
        assert_eq!(out.report.distribution, ReferenceDistribution::ChiSquared { df: 4 });
    }

    #[test]
    fn confidence_region_contains_its_own_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let center = random_shape(4, &mut rng);
        let sample = concentrated_sample(&center, 0.15, 40, &mut rng);
        let region =
            intrinsic_confidence_region(&sample, 0.05, &KarcherConfig::default(), DEFAULT_FD_STEP)
                .unwrap();
        let mean = region.chart.base().clone();
        assert!(region.mahalanobis_sq(&mean).unwrap() < 1e-12);
        assert!(region.contains(&mean).unwrap());
        assert!(region.volume().is_finite());
        assert!(region.volume() > 0.0);
    }
}
