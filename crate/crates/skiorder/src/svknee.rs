//! Descending singular-value curves and triangle-method knee detection.
//!
//! The knee is the interior curve point with maximum deviation from the chord
//! joining the first and last singular values. Because the chord is fixed,
//! maximizing perpendicular distance and maximizing vertical deviation select
//! the same index, and the selection is invariant under independent positive
//! affine rescaling of either axis; the deviation scan therefore runs on the
//! raw `(index, sigma)` pairs. The reported geometry lives in the normalized
//! plane with `P1 = (0, 1)`, `Pk = (i_k/r_D, sigma_k/sigma_1)`, `P3 = (1, 0)`
//! and both knee vectors anchored at `Pk` (`v1 = P1 - Pk`, `v2 = P3 - Pk`), so
//! a near-collinear curve subtends a knee angle near 180 degrees.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::trajmat::PreprocessedMatrix;

/// 2D point / vector used by the knee geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: &Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product of the embedded vectors.
    pub fn cross(&self, other: &Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Singular values of a matrix in descending order plus shape metadata.
#[derive(Debug, Clone)]
pub struct SingularCurve {
    /// All `min(m, n)` singular values, descending.
    pub sigmas: Vec<f64>,
    /// Numerical rank: count of values above `max(m,n) * sigma_1 * eps`
    /// (or a caller-supplied absolute tolerance).
    pub rank: usize,
    pub m_rows: usize,
    pub n_cols: usize,
    /// Aspect ratio `min(m,n) / max(m,n)`, in (0, 1].
    pub kappa: f64,
}

impl SingularCurve {
    /// Decompose an arbitrary real matrix. The numerical-rank tolerance
    /// defaults to `max(m,n) * sigma_1 * machine-epsilon`.
    pub fn from_matrix(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix_with_tol(matrix, None)
    }

    /// As [`from_matrix`](Self::from_matrix) with an absolute rank tolerance
    /// override.
    pub fn from_matrix_with_tol(matrix: &DMatrix<f64>, rank_tol: Option<f64>) -> Result<Self> {
        let (m, n) = (matrix.nrows(), matrix.ncols());
        if m == 0 || n == 0 {
            return Err(Error::InvalidShape { rows: m, cols: n });
        }
        // Rectangular inputs are first reduced to a square triangular factor
        // by a QR factorization of the taller orientation; the orthogonal
        // factor leaves singular values unchanged and the subsequent SVD runs
        // on a min(m,n)-sized matrix.
        let reduced: DMatrix<f64> = if m < n {
            matrix.transpose().qr().r()
        } else if m > n {
            matrix.clone().qr().r()
        } else {
            matrix.clone()
        };
        let svd = nalgebra::linalg::SVD::try_new(reduced, false, false, f64::EPSILON, 0)
            .ok_or(Error::SvdFailed { rows: m, cols: n })?;
        let mut sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
        sigmas.sort_by(|a, b| b.total_cmp(a));
        Self::from_sigmas_with_tol(sigmas, m, n, rank_tol)
    }

    /// Build a curve from already-computed singular values (descending).
    pub fn from_sigmas(sigmas: Vec<f64>, m_rows: usize, n_cols: usize) -> Result<Self> {
        Self::from_sigmas_with_tol(sigmas, m_rows, n_cols, None)
    }

    fn from_sigmas_with_tol(
        sigmas: Vec<f64>,
        m_rows: usize,
        n_cols: usize,
        rank_tol: Option<f64>,
    ) -> Result<Self> {
        if m_rows == 0 || n_cols == 0 || sigmas.is_empty() {
            return Err(Error::InvalidShape {
                rows: m_rows,
                cols: n_cols,
            });
        }
        debug_assert!(sigmas.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(*sigmas.last().unwrap() >= 0.0);
        let tol = rank_tol
            .unwrap_or_else(|| m_rows.max(n_cols) as f64 * sigmas[0] * f64::EPSILON);
        let rank = sigmas.iter().filter(|&&s| s > tol).count();
        if rank == 0 {
            return Err(Error::RankZero {
                rows: m_rows,
                cols: n_cols,
            });
        }
        let kappa = m_rows.min(n_cols) as f64 / m_rows.max(n_cols) as f64;
        Ok(SingularCurve {
            sigmas,
            rank,
            m_rows,
            n_cols,
            kappa,
        })
    }

    /// Number of stored singular values, `min(m, n)`.
    pub fn full_length(&self) -> usize {
        self.sigmas.len()
    }

    /// Sum of squared singular values (= squared Frobenius norm).
    pub fn energy(&self) -> f64 {
        self.sigmas.iter().map(|s| s * s).sum()
    }
}

/// Curve of a preprocessed trajectory matrix.
pub fn singular_curve(x: &PreprocessedMatrix) -> Result<SingularCurve> {
    SingularCurve::from_matrix(&x.values)
}

/// Knee location plus the normalized-plane points and vectors derived from it.
#[derive(Debug, Clone)]
pub struct KneeGeometry {
    /// 1-based knee index, in `[2, rank - 1]`.
    pub knee_index: usize,
    pub p1: Vec2,
    pub pk: Vec2,
    pub p3: Vec2,
    /// Pre-knee vector `P1 - Pk`.
    pub v1: Vec2,
    /// Post-knee vector `P3 - Pk`.
    pub v2: Vec2,
}

/// Locate the knee of a descending singular-value curve.
///
/// Scans interior indices `2..=rank-1` for the maximum absolute vertical
/// deviation from the chord `(1, sigma_1)..(rank, sigma_rank)`; ties break
/// toward the smallest index.
pub fn detect_knee(curve: &SingularCurve) -> Result<KneeGeometry> {
    let r = curve.rank;
    if r < 3 {
        return Err(Error::KneeUndefined { rank: r });
    }
    let s = &curve.sigmas;
    let slope = (s[r - 1] - s[0]) / (r as f64 - 1.0);
    let mut best_i = 0usize;
    let mut best_dev = f64::NEG_INFINITY;
    for i in 2..r {
        let chord = s[0] + slope * (i as f64 - 1.0);
        let dev = (s[i - 1] - chord).abs();
        if dev > best_dev {
            best_dev = dev;
            best_i = i;
        }
    }
    let p1 = Vec2::new(0.0, 1.0);
    let p3 = Vec2::new(1.0, 0.0);
    let pk = Vec2::new(best_i as f64 / r as f64, s[best_i - 1] / s[0]);
    Ok(KneeGeometry {
        knee_index: best_i,
        p1,
        pk,
        p3,
        v1: p1 - pk,
        v2: p3 - pk,
    })
}
