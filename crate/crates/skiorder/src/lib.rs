//! Singular-knee analysis of multi-agent trajectory data.
//!
//! The pipeline arranges recorded trajectories (or cellular-automaton traces)
//! into a signals-by-timesteps matrix, centers and row-normalizes it, takes
//! the descending singular-value curve, locates the curve's knee by the
//! triangle method, and evaluates eight spectral metrics against
//! random-matrix noise bounds. Ordered collective motion compresses into few
//! dominant directions (sharp knee, small knee angle, most singular values
//! outside the noise floor) while unstructured noise yields a flat curve
//! hugging the Marchenko-Pastur support.
//!
//! ```
//! use skiorder::{swarmsim, trajmat, metrics};
//!
//! let cfg = swarmsim::SimConfig {
//!     model: swarmsim::Model::Vicsek,
//!     n_agents: 20,
//!     n_steps: 100,
//!     seed: 7,
//!     ..Default::default()
//! };
//! let traj = swarmsim::simulate(&cfg)?;
//! let pre = trajmat::preprocess(&traj, trajmat::DEFAULT_VARIANCE_FLOOR)?;
//! let report = metrics::compute_all(&pre)?;
//! assert!(report.knee.is_some());
//! # Ok::<(), skiorder::Error>(())
//! ```

pub mod ensemble;
pub mod error;
pub mod io;
pub mod lambda_ca;
pub mod metrics;
pub mod seeds;
pub mod svknee;
pub mod swarmsim;
pub mod trajmat;

pub use ensemble::{run_ensemble, summarize, EnsembleSpec, ModelSpec, StatSummary, TrialRecord};
pub use error::{Error, Result};
pub use lambda_ca::{CAConfig, CARuleSet, CATrace};
pub use metrics::{MetricsReport, NoiseBounds};
pub use svknee::{detect_knee, singular_curve, KneeGeometry, SingularCurve};
pub use swarmsim::{simulate, Model, SimConfig};
pub use trajmat::{assemble_trajectory, preprocess, PreprocessedMatrix, SignalMatrix};
