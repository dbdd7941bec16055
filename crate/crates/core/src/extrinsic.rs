//! Extrinsic shape statistics through the Veronese-Whitney embedding.
//!
//! A shape `[u]` embeds as the rank-1 Hermitian projector `uu*`. Euclidean
//! averages of embedded samples live in the convex hull of the embedded
//! shape space, and projecting the average back amounts to taking the top
//! unit eigenvector: that eigenvector is the sample extrinsic mean, and
//! `2(1 - lambda_top)` is the sample extrinsic variation. The two-sample
//! mean test compares per-observation tangent coordinates at the pooled
//! mean via a chi-squared quadratic form; the variation test compares top
//! eigenvalues via the normal statistic of the `frechet` module.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Result, ShapeError};
use crate::frechet::{self, MetricKind, ReferenceDistribution, TestReport, VariationSummary};
use crate::linalg;
use crate::shape::{Preshape, Shape};

type C64 = Complex<f64>;

/// A focal (non-unique) projection is declared when the top eigenvalue gap
/// drops to `FOCAL_GAP_TOL * max(1, lambda_top)`.
pub const FOCAL_GAP_TOL: f64 = 1e-10;

/// Condition-number ceiling for inverting coordinate covariances.
pub const MAX_COVARIANCE_CONDITION: f64 = 1e12;

/// Entrywise tolerance for the self-adjointness invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A k x k complex self-adjoint matrix: the image of the embedding, or a
/// Euclidean average of such images.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Validates self-adjointness entrywise at [`HERMITIAN_TOL`].
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let k = entries.nrows();
        if entries.ncols() != k {
            return Err(ShapeError::NotHermitian { max_asymmetry: f64::INFINITY });
        }
        let mut max_asymmetry = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let delta = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                max_asymmetry = max_asymmetry.max(delta);
            }
        }
        if max_asymmetry > HERMITIAN_TOL {
            return Err(ShapeError::NotHermitian { max_asymmetry });
        }
        Ok(HermitianMatrix { entries })
    }

    /// For matrices that are self-adjoint by construction.
    pub(crate) fn from_self_adjoint(entries: DMatrix<C64>) -> Self {
        HermitianMatrix { entries }
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

/// Veronese-Whitney embedding `[u] -> uu*`. The result has trace 1, rank 1,
/// zero row sums, and does not depend on the representative chosen.
pub fn embed(s: &Shape) -> HermitianMatrix {
    let u = s.rep().coords();
    let k = u.len();
    let mut entries = DMatrix::<C64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            entries[(i, j)] = u[i] * u[j].conj();
        }
    }
    HermitianMatrix { entries }
}

/// Coordinatewise average `(1/n) sum_j embed(X_j)` of an embedded sample.
pub fn average_embedding(sample: &[Shape]) -> Result<HermitianMatrix> {
    if sample.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let k = sample[0].k();
    let mut acc = DMatrix::<C64>::zeros(k, k);
    for s in sample {
        if s.k() != k {
            return Err(ShapeError::MismatchedLandmarkCounts { a: k, b: s.k() });
        }
        acc += embed(s).entries;
    }
    acc /= C64::new(sample.len() as f64, 0.0);
    Ok(HermitianMatrix { entries: acc })
}

/// Full spectral decomposition of a Hermitian matrix with real eigenvalues in
/// ascending order and orthonormal eigenvector columns in matching order.
///
/// Each eigenvector's phase is fixed by making its largest-modulus entry real
/// and positive, so the decomposition is deterministic for a fixed input.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl EigenSystem {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns match the eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.k() - 1]
    }

    pub fn top_eigenvector(&self) -> DVector<C64> {
        self.eigenvectors.column(self.k() - 1).into_owned()
    }

    /// Gap `lambda_k - lambda_{k-1}` between the top two eigenvalues.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues[self.k() - 1] - self.eigenvalues[self.k() - 2]
    }
}

/// Spectral decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. The input is symmetrized as `(A + A*)/2` before factoring so
/// the invariant tolerance cannot leak into the result.
///
/// Jacobi is chosen deliberately: eigenvalues are read off the diagonal that
/// the accumulated unitary rotations themselves produced, so an eigenvalue
/// can never be paired with the wrong eigenvector, and the sweep order makes
/// the output deterministic for a fixed input. Every returned pair is also
/// verified against the residual bound `|A u - lambda u| <= 1e-8 |A|`.
pub fn hermitian_eigensystem(a: &HermitianMatrix) -> Result<EigenSystem> {
    let k = a.k();
    let sym = (&a.entries + a.entries.adjoint()) * C64::new(0.5, 0.0);
    let scale = sym.norm().max(f64::MIN_POSITIVE);

    let mut m = sym.clone();
    let mut v = DMatrix::<C64>::identity(k, k);
    let off = |m: &DMatrix<C64>| -> f64 {
        let mut total = 0.0;
        for p in 0..k {
            for q in (p + 1)..k {
                total += m[(p, q)].norm_sqr();
            }
        }
        total.sqrt()
    };

    let mut converged = false;
    for _sweep in 0..60 {
        if off(&m) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let b = m[(p, q)];
                let b_mod = b.norm();
                if b_mod <= 1e-300 {
                    continue;
                }
                // Unitary 2x2 annihilating m[p][q]: factor out the phase of
                // b, then a standard symmetric Givens rotation.
                let phase = b / b_mod;
                let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * b_mod);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U[p][p] = c, U[p][q] = s, U[q][p] = -s conj(phase),
                // U[q][q] = c conj(phase).
                let upq = C64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                // Rows p and q of U* M.
                for j in 0..k {
                    let mp = m[(p, j)];
                    let mq = m[(q, j)];
                    m[(p, j)] = mp * c + mq * uqp.conj();
                    m[(q, j)] = mp * upq.conj() + mq * uqq.conj();
                }
                // Columns p and q of (U* M) U, and of the accumulated basis.
                for i in 0..k {
                    let mp = m[(i, p)];
                    let mq = m[(i, q)];
                    m[(i, p)] = mp * c + mq * uqp;
                    m[(i, q)] = mp * upq + mq * uqq;

                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c + vq * uqp;
                    v[(i, q)] = vp * upq + vq * uqq;
                }
                // The rotation zeroes this entry exactly in exact arithmetic;
                // pin it and keep the iterate Hermitian.
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged && off(&m) > 1e-12 * scale {
        return Err(ShapeError::NumericalFailure {
            what: "Hermitian eigendecomposition did not converge",
        });
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());

    let eigenvalues = DVector::from_iterator(k, order.iter().map(|&i| m[(i, i)].re));
    let mut eigenvectors = DMatrix::<C64>::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        let residual = (&sym * &col - &col * C64::new(eigenvalues[dst], 0.0)).norm();
        if residual > 1e-8 * scale.max(1.0) {
            return Err(ShapeError::NumericalFailure {
                what: "eigenpair residual exceeds tolerance",
            });
        }
        // Phase convention: largest-modulus entry real positive.
        let mut best = 0usize;
        let mut best_mod = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            let modulus = z.norm();
            if modulus > best_mod {
                best_mod = modulus;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let unit = col[best].conj() / best_mod;
            col *= unit;
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

fn focal_gap_check(eig: &EigenSystem) -> Result<()> {
    let gap = eig.spectral_gap();
    if gap <= FOCAL_GAP_TOL * eig.top_eigenvalue().max(1.0) {
        return Err(ShapeError::FocalMean { gap });
    }
    Ok(())
}

/// Sample extrinsic mean: the shape of the top unit eigenvector of the
/// averaged embedding, returned together with the full eigensystem (the
/// tests downstream reuse it).
///
/// Fails with `FocalMean` when the top eigenvalue is not numerically simple,
/// in which case the extrinsic mean set is not a singleton.
pub fn extrinsic_mean(sample: &[Shape]) -> Result<(Shape, EigenSystem)> {
    let avg = average_embedding(sample)?;
    let eig = hermitian_eigensystem(&avg)?;
    focal_gap_check(&eig)?;
    let mean = Shape::new(Preshape::from_unit_centered(eig.top_eigenvector()));
    Ok((mean, eig))
}

/// Sample extrinsic variation `2(1 - lambda_top)` of an averaged embedding.
pub fn extrinsic_variation(eig: &EigenSystem) -> f64 {
    (2.0 * (1.0 - eig.top_eigenvalue())).max(0.0)
}

/// Real tangent coordinates of an embedded observation at the base given by
/// `eig`: the vector
/// `(Re(U_a* X U_k))_{a=2..k-1}` followed by `(Im(U_a* X U_k))_{a=2..k-1}`,
/// of length 2k-4. The `a = 1` entries are omitted because they vanish for
/// every centered observation (U_1 spans the constant vector).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicCoords {
    t: DVector<f64>,
}

impl ExtrinsicCoords {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.t
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.t
    }
}

/// Projects an embedded observation onto the tangent coordinates at the base
/// eigensystem. Requires a simple top eigenvalue of the base.
pub fn tangent_coords(x: &HermitianMatrix, eig: &EigenSystem) -> ExtrinsicCoords {
    let k = eig.k();
    let d = 2 * k - 4;
    let top = eig.eigenvectors.column(k - 1);
    let x_top = &x.entries * top;
    let mut t = DVector::<f64>::zeros(d);
    for a in 1..=k - 2 {
        let z = eig.eigenvectors.column(a).dotc(&x_top);
        t[a - 1] = z.re;
        t[k - 3 + a] = z.im;
    }
    ExtrinsicCoords { t }
}

/// Quadratic-form statistic for two coordinate samples:
/// `(tbar - sbar)' (Sigma1/n + Sigma2/m)^{-1} (tbar - sbar)` with the 1/n
/// covariance divisor. Fails when the pooled covariance has condition number
/// above [`MAX_COVARIANCE_CONDITION`].
fn coordinate_mean_statistic(t: &[DVector<f64>], s: &[DVector<f64>]) -> Result<f64> {
    let d = t[0].len();
    let mean = |cols: &[DVector<f64>]| {
        let mut acc = DVector::<f64>::zeros(d);
        for c in cols {
            acc += c;
        }
        acc / cols.len() as f64
    };
    let covariance = |cols: &[DVector<f64>], mu: &DVector<f64>| {
        let mut acc = DMatrix::<f64>::zeros(d, d);
        for c in cols {
            acc.ger(1.0, c, c, 1.0);
        }
        acc /= cols.len() as f64;
        acc.ger(-1.0, mu, mu, 1.0);
        acc
    };
    let tbar = mean(t);
    let sbar = mean(s);
    let pooled = covariance(t, &tbar) / t.len() as f64 + covariance(s, &sbar) / s.len() as f64;

    let condition = linalg::symmetric_condition(&pooled);
    if !condition.is_finite() || condition > MAX_COVARIANCE_CONDITION {
        return Err(ShapeError::SingularCovariance { condition });
    }
    let diff = tbar - sbar;
    let solved = linalg::solve_spd(&pooled, &diff)
        .ok_or(ShapeError::SingularCovariance { condition })?;
    Ok(diff.dot(&solved))
}

/// Two-sample test for equality of extrinsic mean shapes.
///
/// Both samples are coordinatized at the pooled averaged embedding
/// `(n Xbar + m Ybar)/(n + m)`; the statistic is the quadratic form in the
/// difference of coordinate means and is referred to chi-squared with 2k-4
/// degrees of freedom.
pub fn extrinsic_mean_test(a: &[Shape], b: &[Shape], alpha: f64) -> Result<TestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let k = a[0].k();
    if b[0].k() != k {
        return Err(ShapeError::MismatchedLandmarkCounts { a: k, b: b[0].k() });
    }
    let n = a.len() as f64;
    let m = b.len() as f64;
    let xbar = average_embedding(a)?;
    let ybar = average_embedding(b)?;
    let pooled = HermitianMatrix::from_self_adjoint(
        (xbar.entries() * C64::new(n, 0.0) + ybar.entries() * C64::new(m, 0.0))
            / C64::new(n + m, 0.0),
    );
    let eig = hermitian_eigensystem(&pooled)?;
    focal_gap_check(&eig)?;

    let coords = |sample: &[Shape]| -> Vec<DVector<f64>> {
        sample.iter().map(|s| tangent_coords(&embed(s), &eig).into_vector()).collect()
    };
    let statistic = coordinate_mean_statistic(&coords(a), &coords(b))?;
    TestReport::new(statistic, ReferenceDistribution::ChiSquared { df: 2 * k - 4 }, alpha)
}

/// Two-sample test for equality of extrinsic variations: the normal statistic
/// `2(lambda_top(Ybar) - lambda_top(Xbar)) / sqrt(s1^2/n + s2^2/m)`, i.e. the
/// generic variation test fed the eigenvalue form of each sample variation.
pub fn extrinsic_variation_test(a: &[Shape], b: &[Shape], alpha: f64) -> Result<TestReport> {
    let (mean_a, eig_a) = extrinsic_mean(a)?;
    let (mean_b, eig_b) = extrinsic_mean(b)?;
    let mut summary_a = frechet::variation_summary(a, &mean_a, MetricKind::Extrinsic)?;
    let mut summary_b = frechet::variation_summary(b, &mean_b, MetricKind::Extrinsic)?;
    summary_a.variation = extrinsic_variation(&eig_a);
    summary_b.variation = extrinsic_variation(&eig_b);
    frechet::variation_test(&summary_a, &summary_b, alpha)
}

/// Per-sample summary used by reporting: the extrinsic mean together with the
/// eigenvalue form of the variation and the squared-distance variance.
pub fn extrinsic_summary(sample: &[Shape]) -> Result<(Shape, VariationSummary)> {
    let (mean, eig) = extrinsic_mean(sample)?;
    let mut summary = frechet::variation_summary(sample, &mean, MetricKind::Extrinsic)?;
    summary.variation = extrinsic_variation(&eig);
    Ok((mean, summary))
}
