//! Spectral order/disorder metrics evaluated at the singular-value knee,
//! together with the random-matrix noise bounds they are compared against.
//!
//! For a properly scaled i.i.d. noise matrix of aspect ratio `kappa`, the
//! singular values fall asymptotically in `(1 - sqrt(kappa), 1 + sqrt(kappa))`
//! (the square roots of the Marchenko-Pastur support edges). Values exactly on
//! a bound count as outside: the bounds are open-interval support edges and
//! boundary mass is measure-zero, so the closed-set exclusion is a fixed
//! convention rather than a modelling choice.

use crate::error::{Error, Result};
use crate::svknee::{self, KneeGeometry, SingularCurve};
use crate::trajmat::PreprocessedMatrix;

/// Noise-floor interval for singular values of a unit-scaled noise matrix.
#[derive(Debug, Clone, Copy)]
pub struct NoiseBounds {
    pub lower: f64,
    pub upper: f64,
    pub kappa: f64,
}

/// Bounds `1 -+ sqrt(kappa)` for a matrix of the given shape, with
/// `kappa = min(m,n)/max(m,n)`.
pub fn noise_bounds(m_rows: usize, n_cols: usize) -> Result<NoiseBounds> {
    if m_rows == 0 || n_cols == 0 {
        return Err(Error::InvalidShape {
            rows: m_rows,
            cols: n_cols,
        });
    }
    let kappa = m_rows.min(n_cols) as f64 / m_rows.max(n_cols) as f64;
    let root = kappa.sqrt();
    Ok(NoiseBounds {
        lower: 1.0 - root,
        upper: 1.0 + root,
        kappa,
    })
}

/// Asymptotic top singular value of a unit-scaled noise matrix carrying a
/// rank-1 spike of strength `x`: `sqrt((x + 1/x)(x + kappa/x))` once the spike
/// exceeds the detectability threshold `kappa^(1/4)`, and the bulk edge
/// `1 + sqrt(kappa)` below it.
pub fn asymptotic_spiked_sv(x: f64, kappa: f64) -> f64 {
    if x > kappa.powf(0.25) {
        ((x + 1.0 / x) * (x + kappa / x)).sqrt()
    } else {
        1.0 + kappa.sqrt()
    }
}

/// `sigma_k / sigma_1`.
pub fn normalized_sv_at_knee(curve: &SingularCurve, knee: &KneeGeometry) -> f64 {
    curve.sigmas[knee.knee_index - 1] / curve.sigmas[0]
}

/// Fraction of the first `rank` singular values falling outside the open
/// interval `(lower, upper)`.
pub fn fraction_outside_bounds(curve: &SingularCurve, bounds: &NoiseBounds) -> f64 {
    let outside = curve.sigmas[..curve.rank]
        .iter()
        .filter(|&&s| s <= bounds.lower || s >= bounds.upper)
        .count();
    outside as f64 / curve.rank as f64
}

/// 1 iff the knee singular value lies outside the open noise interval.
pub fn knee_outside_bounds(
    curve: &SingularCurve,
    knee: &KneeGeometry,
    bounds: &NoiseBounds,
) -> bool {
    let s = curve.sigmas[knee.knee_index - 1];
    s <= bounds.lower || s >= bounds.upper
}

/// `i_k / rank`.
pub fn normalized_knee_position(curve: &SingularCurve, knee: &KneeGeometry) -> f64 {
    knee.knee_index as f64 / curve.rank as f64
}

/// Trapezoidal integral of `sigma_i/sigma_1` over `x = i/rank` from the knee
/// to the end of the curve.
pub fn area_after_knee(curve: &SingularCurve, knee: &KneeGeometry) -> f64 {
    let r = curve.rank;
    let s1 = curve.sigmas[0];
    let mut area = 0.0;
    for i in knee.knee_index..r {
        let y0 = curve.sigmas[i - 1] / s1;
        let y1 = curve.sigmas[i] / s1;
        area += 0.5 * (y0 + y1) / r as f64;
    }
    area
}

/// Angle subtended at the knee between the pre- and post-knee vectors, in
/// degrees within [0, 180].
pub fn knee_angle_deg(knee: &KneeGeometry) -> Result<f64> {
    if knee.v1.norm() == 0.0 {
        return Err(Error::ZeroVector("v1"));
    }
    if knee.v2.norm() == 0.0 {
        return Err(Error::ZeroVector("v2"));
    }
    let cross = knee.v1.cross(&knee.v2).abs();
    let dot = knee.v1.dot(&knee.v2);
    Ok(cross.atan2(dot).to_degrees())
}

/// Curvature `sin(theta) / |v2 - v1|` at the knee.
///
/// This is the literal published formula; with both vectors anchored at the
/// knee, `v2 - v1 = P3 - P1`, so the value is exactly half the textbook
/// Menger curvature of the triangle (P1, Pk, P3).
pub fn knee_curvature(knee: &KneeGeometry) -> Result<f64> {
    let theta = knee_angle_deg(knee)?.to_radians();
    let base = (knee.v2 - knee.v1).norm();
    debug_assert!(base > 0.0);
    Ok(theta.sin() / base)
}

/// `|v2| / |v1|`.
pub fn knee_vector_ratio(knee: &KneeGeometry) -> Result<f64> {
    let n1 = knee.v1.norm();
    if n1 == 0.0 {
        return Err(Error::ZeroVector("v1"));
    }
    Ok(knee.v2.norm() / n1)
}

/// All knee-dependent metrics for one curve.
#[derive(Debug, Clone)]
pub struct KneeMetrics {
    pub geometry: KneeGeometry,
    pub normalized_sv_at_knee: f64,
    pub knee_outside_bounds: bool,
    pub normalized_knee_position: f64,
    pub area_after_knee: f64,
    pub knee_angle_deg: f64,
    pub curvature: f64,
    pub knee_vector_ratio: f64,
}

/// Full metric report for one trial. `knee` is `None` when the numerical rank
/// is below 3 and the knee is undefined; the curve-level fields are still
/// populated.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub m_rows: usize,
    pub n_cols: usize,
    pub rank: usize,
    pub kappa: f64,
    pub bounds: NoiseBounds,
    pub fraction_outside_bounds: f64,
    pub knee: Option<KneeMetrics>,
}

fn knee_metrics(curve: &SingularCurve, bounds: &NoiseBounds) -> Result<Option<KneeMetrics>> {
    let geometry = match svknee::detect_knee(curve) {
        Ok(g) => g,
        Err(Error::KneeUndefined { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(KneeMetrics {
        normalized_sv_at_knee: normalized_sv_at_knee(curve, &geometry),
        knee_outside_bounds: knee_outside_bounds(curve, &geometry, bounds),
        normalized_knee_position: normalized_knee_position(curve, &geometry),
        area_after_knee: area_after_knee(curve, &geometry),
        knee_angle_deg: knee_angle_deg(&geometry)?,
        curvature: knee_curvature(&geometry)?,
        knee_vector_ratio: knee_vector_ratio(&geometry)?,
        geometry,
    }))
}

/// Metrics for an already-computed curve.
pub fn report_from_curve(curve: &SingularCurve) -> Result<MetricsReport> {
    let bounds = noise_bounds(curve.m_rows, curve.n_cols)?;
    Ok(MetricsReport {
        m_rows: curve.m_rows,
        n_cols: curve.n_cols,
        rank: curve.rank,
        kappa: curve.kappa,
        bounds,
        fraction_outside_bounds: fraction_outside_bounds(curve, &bounds),
        knee: knee_metrics(curve, &bounds)?,
    })
}

/// Decompose a preprocessed matrix and evaluate every metric.
pub fn compute_all(x: &PreprocessedMatrix) -> Result<MetricsReport> {
    let curve = svknee::singular_curve(x)?;
    report_from_curve(&curve)
}
