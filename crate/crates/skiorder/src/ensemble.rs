//! Batch execution of simulation trials and distribution summaries.
//!
//! Trials are seeded from `(base_seed, model index, trial index)` so results
//! do not depend on scheduling; runs may execute on a rayon pool but the
//! output table is always identical to serial execution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, MetricsReport};
use crate::seeds::derive_seed;
use crate::swarmsim::{simulate, Model, SimConfig};
use crate::trajmat::{preprocess, DEFAULT_VARIANCE_FLOOR};

/// One entry of an ensemble's model list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    pub with_noise: bool,
}

impl ModelSpec {
    pub fn new(model: Model, with_noise: bool) -> Self {
        ModelSpec { model, with_noise }
    }

    /// Label used in output tables, e.g. `vicsek+noise`.
    pub fn label(&self) -> String {
        if self.with_noise {
            format!("{}+noise", self.model)
        } else {
            self.model.to_string()
        }
    }

    /// Parse `model` or `model+noise`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, noise) = match s.strip_suffix("+noise") {
            Some(base) => (base, true),
            None => (s, false),
        };
        Ok(ModelSpec::new(name.parse()?, noise))
    }
}

/// The eleven-model list in the disordered-to-ordered axis order.
pub fn paper_default_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(Model::PureNoise, false),
        ModelSpec::new(Model::PositionWalk, false),
        ModelSpec::new(Model::KinematicNoise, false),
        ModelSpec::new(Model::VelocityWalk, false),
        ModelSpec::new(Model::AccelerationNoise, false),
        ModelSpec::new(Model::CuckerSmale, true),
        ModelSpec::new(Model::Vicsek, true),
        ModelSpec::new(Model::SpiralIn, true),
        ModelSpec::new(Model::CuckerSmale, false),
        ModelSpec::new(Model::Vicsek, false),
        ModelSpec::new(Model::SpiralIn, false),
    ]
}

/// Batch specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub models: Vec<ModelSpec>,
    pub trials_per_model: usize,
    pub base_seed: u64,
    /// Template for every trial; `model`, `measurement_noise` and `seed` are
    /// overridden per trial.
    pub sim_defaults: SimConfig,
}

impl EnsembleSpec {
    /// Eleven models, 25 trials each, 50 agents over 500 steps.
    pub fn paper_default(base_seed: u64) -> Self {
        EnsembleSpec {
            models: paper_default_models(),
            trials_per_model: 25,
            base_seed,
            sim_defaults: SimConfig::default(),
        }
    }
}

/// Result of one trial; failures are recorded, never propagated.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub model: ModelSpec,
    pub trial: usize,
    pub seed: u64,
    pub outcome: std::result::Result<MetricsReport, String>,
}

fn run_trial(spec: &EnsembleSpec, model_idx: usize, trial: usize) -> TrialRecord {
    let ms = spec.models[model_idx];
    let seed = derive_seed(spec.base_seed, &[model_idx as u64, trial as u64]);
    let mut cfg = spec.sim_defaults.clone();
    cfg.model = ms.model;
    cfg.measurement_noise = ms.with_noise;
    cfg.seed = seed;
    let outcome = simulate(&cfg)
        .and_then(|m| preprocess(&m, DEFAULT_VARIANCE_FLOOR))
        .and_then(|p| metrics::compute_all(&p))
        .map_err(|e| e.to_string());
    TrialRecord {
        model: ms,
        trial,
        seed,
        outcome,
    }
}

/// Run every (model, trial) pair. The output row order is models-major and
/// identical regardless of how many threads execute the trials.
pub fn run_ensemble(spec: &EnsembleSpec) -> Vec<TrialRecord> {
    let total = spec.models.len() * spec.trials_per_model;
    (0..total)
        .into_par_iter()
        .map(|i| run_trial(spec, i / spec.trials_per_model, i % spec.trials_per_model))
        .collect()
}

/// Distribution summary of one metric over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatSummary {
    pub mean: f64,
    pub median: f64,
    pub std_sample: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub n: usize,
}

/// Linear-interpolation quantile (the "type 7" convention) on sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Mean, median, sample std and type-7 quartiles of a sample.
pub fn summarize(values: &[f64]) -> Result<StatSummary> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_sample = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    Ok(StatSummary {
        mean,
        median,
        std_sample,
        q1,
        q3,
        iqr: q3 - q1,
        n,
    })
}

/// Names of the eight per-trial metrics, in report order.
pub const METRIC_NAMES: [&str; 8] = [
    "normalized_sv_at_knee",
    "fraction_outside_bounds",
    "knee_outside_bounds",
    "normalized_knee_position",
    "area_after_knee",
    "knee_angle_deg",
    "curvature",
    "knee_vector_ratio",
];

/// Extract one named metric from a report; knee-dependent metrics are absent
/// when the knee is undefined.
pub fn metric_value(report: &MetricsReport, name: &str) -> Option<f64> {
    match name {
        "fraction_outside_bounds" => Some(report.fraction_outside_bounds),
        _ => {
            let k = report.knee.as_ref()?;
            match name {
                "normalized_sv_at_knee" => Some(k.normalized_sv_at_knee),
                "knee_outside_bounds" => Some(if k.knee_outside_bounds { 1.0 } else { 0.0 }),
                "normalized_knee_position" => Some(k.normalized_knee_position),
                "area_after_knee" => Some(k.area_after_knee),
                "knee_angle_deg" => Some(k.knee_angle_deg),
                "curvature" => Some(k.curvature),
                "knee_vector_ratio" => Some(k.knee_vector_ratio),
                _ => None,
            }
        }
    }
}

/// Collect the values of one metric across a model's successful trials.
pub fn metric_values(records: &[TrialRecord], model: ModelSpec, name: &str) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.model == model)
        .filter_map(|r| r.outcome.as_ref().ok())
        .filter_map(|rep| metric_value(rep, name))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn summarize_type7_example() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(s.mean, 2.5);
        assert_relative_eq!(s.median, 2.5);
        assert_relative_eq!(s.std_sample, (5.0f64 / 3.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(s.q1, 1.75);
        assert_relative_eq!(s.q3, 3.25);
        assert_relative_eq!(s.iqr, 1.5);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn summarize_degenerate_samples() {
        let one = summarize(&[5.0]).unwrap();
        assert_eq!((one.mean, one.median, one.std_sample, one.iqr), (5.0, 5.0, 0.0, 0.0));

        let flat = summarize(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(flat.std_sample, 0.0);
        assert_eq!(flat.iqr, 0.0);

        assert!(matches!(summarize(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn summarize_permutation_invariant_and_affine_equivariant() {
        let xs = [3.0, -1.0, 7.5, 2.25, 0.0, 9.0, 4.4];
        let a = summarize(&xs).unwrap();
        let mut rev = xs;
        rev.reverse();
        let b = summarize(&rev).unwrap();
        assert_eq!(a, b);

        let (scale, shift) = (-2.5, 4.0);
        let ys: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
        let c = summarize(&ys).unwrap();
        assert_relative_eq!(c.mean, scale * a.mean + shift, max_relative = 1e-12);
        assert_relative_eq!(c.std_sample, scale.abs() * a.std_sample, max_relative = 1e-12);
        assert_relative_eq!(c.iqr, scale.abs() * a.iqr, max_relative = 1e-12);
        assert_relative_eq!(c.median, scale * a.median + shift, max_relative = 1e-12);
    }

    #[test]
    fn single_trial_ensemble() {
        let spec = EnsembleSpec {
            models: vec![ModelSpec::new(Model::PureNoise, false)],
            trials_per_model: 1,
            base_seed: 5,
            sim_defaults: SimConfig {
                n_agents: 10,
                n_steps: 60,
                ..SimConfig::default()
            },
        };
        let records = run_ensemble(&spec);
        assert_eq!(records.len(), 1);
        assert!(records[0].outcome.is_ok());
    }

    #[test]
    fn ensemble_reruns_identically() {
        let spec = EnsembleSpec {
            models: vec![
                ModelSpec::new(Model::PureNoise, false),
                ModelSpec::new(Model::Vicsek, true),
            ],
            trials_per_model: 3,
            base_seed: 77,
            sim_defaults: SimConfig {
                n_agents: 8,
                n_steps: 50,
                ..SimConfig::default()
            },
        };
        let a = run_ensemble(&spec);
        let b = run_ensemble(&spec);
        assert_eq!(a.len(), 6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.seed, y.seed);
            let (rx, ry) = (x.outcome.as_ref().unwrap(), y.outcome.as_ref().unwrap());
            assert_eq!(rx.fraction_outside_bounds, ry.fraction_outside_bounds);
            assert_eq!(
                rx.knee.as_ref().map(|k| k.knee_angle_deg),
                ry.knee.as_ref().map(|k| k.knee_angle_deg)
            );
        }
    }

    #[test]
    fn failed_trials_are_recorded_not_propagated() {
        // An invalid per-trial config fails every trial; the batch completes
        // and records the error text in each row.
        let spec = EnsembleSpec {
            models: vec![ModelSpec::new(Model::PureNoise, false)],
            trials_per_model: 3,
            base_seed: 1,
            sim_defaults: SimConfig {
                n_steps: 1,
                ..SimConfig::default()
            },
        };
        let records = run_ensemble(&spec);
        assert_eq!(records.len(), 3);
        for r in &records {
            let msg = r.outcome.as_ref().unwrap_err();
            assert!(msg.contains("timesteps"), "unexpected message: {msg}");
        }
        // The CSV writer keeps one (metric-empty) row per failed trial.
        let mut buf = Vec::new();
        crate::io::write_ensemble_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("pure_noise,0,"));
        assert!(text.lines().nth(1).unwrap().ends_with(&",".repeat(13)));
    }

    #[test]
    fn model_spec_labels_parse_back() {
        for spec in paper_default_models() {
            assert_eq!(ModelSpec::parse(&spec.label()).unwrap(), spec);
        }
        assert!(ModelSpec::parse("nope+noise").is_err());
    }
}
