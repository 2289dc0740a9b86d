//! Seeded generators for the seven simulated trajectory classes plus optional
//! measurement-noise corruption.
//!
//! All models emit a `2*n_agents x n_steps` position matrix (agent-major rows)
//! and are bit-reproducible for a fixed config: every draw comes from ChaCha8
//! streams derived from `cfg.seed`, with a fixed draw order.
//!
//! Streams and draw order:
//! - init stream: first each agent's initial position (x then y, uniform in
//!   `[0, 10)`), then per model either each agent's initial velocity (vx, vy;
//!   standard normal), heading (uniform in `[0, 2pi)`), or spiral identity
//!   draws (n1, n2, n3; standard normal) — agent-major throughout.
//! - step-noise stream: per timestep, agent-major, x component then y.
//! - measurement stream: row-major over the finished matrix.
//!
//! The multiplicative gain `|X_i|` / `|V_i|` in the kinematic and acceleration
//! models is the Euclidean norm of the agent's 2D position/velocity; the two
//! components of each step draw are independent standard normals scaled by
//! that common magnitude.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::derive_seed;
use crate::trajmat::SignalMatrix;

const STREAM_INIT: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_MEASUREMENT: u64 = 3;

/// Side of the square from which initial positions are drawn.
pub const INIT_POSITION_RANGE: f64 = 10.0;
/// Spiral trajectories are sampled on a uniform time grid over `[0, 5]`.
pub const SPIRAL_T_MAX: f64 = 5.0;
/// Measurement noise std as a fraction of each signal's temporal range.
pub const MEASUREMENT_NOISE_FRACTION: f64 = 0.05;

/// The seven motion models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    PureNoise,
    PositionWalk,
    VelocityWalk,
    KinematicNoise,
    AccelerationNoise,
    CuckerSmale,
    Vicsek,
    SpiralIn,
}

impl Model {
    pub const ALL: [Model; 8] = [
        Model::PureNoise,
        Model::PositionWalk,
        Model::VelocityWalk,
        Model::KinematicNoise,
        Model::AccelerationNoise,
        Model::CuckerSmale,
        Model::Vicsek,
        Model::SpiralIn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Model::PureNoise => "pure_noise",
            Model::PositionWalk => "position_walk",
            Model::VelocityWalk => "velocity_walk",
            Model::KinematicNoise => "kinematic_noise",
            Model::AccelerationNoise => "acceleration_noise",
            Model::CuckerSmale => "cucker_smale",
            Model::Vicsek => "vicsek",
            Model::SpiralIn => "spiral_in",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .iter()
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| Error::UnknownModel {
                got: s.to_string(),
                expected: Model::ALL.map(|m| m.name()).join(", "),
            })
    }
}

/// Simulation configuration. Field names double as CLI/config-file keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub model: Model,
    pub n_agents: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    /// Gain of the kinematic/acceleration multiplicative noise.
    pub mu: f64,
    /// Cucker-Smale interaction strength.
    pub k: f64,
    /// Cucker-Smale distance-decay exponent.
    pub beta: f64,
    /// Vicsek interaction radius.
    pub radius: f64,
    /// Vicsek constant speed.
    pub speed: f64,
    /// Vicsek periodic box side.
    pub box_size: f64,
    /// Spiral base frequency.
    pub freq_f: f64,
    /// Corrupt the output with 5%-of-range Gaussian measurement noise.
    pub measurement_noise: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: Model::PureNoise,
            n_agents: 50,
            n_steps: 500,
            dt: 1.0,
            seed: 0,
            mu: 0.3,
            k: 1.0,
            beta: 0.4,
            radius: 1.0,
            speed: 0.5,
            box_size: 10.0,
            freq_f: 1.0,
            measurement_noise: false,
        }
    }
}

impl SimConfig {
    pub fn new(model: Model) -> Self {
        SimConfig {
            model,
            ..SimConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::EmptyInput);
        }
        if self.n_steps < 2 {
            return Err(Error::TooFewSteps {
                found: self.n_steps,
            });
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidSimConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidSimConfig(format!(
                "mu must be in [0, 1], got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Cucker-Smale interaction weight `K / (1 + d^2)^beta`.
pub fn cucker_smale_weight(k: f64, beta: f64, dist_sq: f64) -> f64 {
    k / (1.0 + dist_sq).powf(beta)
}

/// One synchronous Cucker-Smale velocity update from the state at time t.
pub fn cucker_smale_step(
    positions: &[[f64; 2]],
    velocities: &[[f64; 2]],
    k: f64,
    beta: f64,
) -> Vec<[f64; 2]> {
    let n = positions.len();
    let mut next = velocities.to_vec();
    for i in 0..n {
        let mut acc = [0.0f64; 2];
        for j in 0..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let a = cucker_smale_weight(k, beta, dx * dx + dy * dy);
            acc[0] += a * (velocities[j][0] - velocities[i][0]);
            acc[1] += a * (velocities[j][1] - velocities[i][1]);
        }
        next[i][0] += acc[0];
        next[i][1] += acc[1];
    }
    next
}

/// One synchronous Vicsek heading update: each agent adopts the arctangent of
/// the mean sine/cosine of every heading within `radius` (itself included),
/// with distances measured under minimum-image convention in the periodic box.
pub fn vicsek_step(
    wrapped_positions: &[[f64; 2]],
    headings: &[f64],
    radius: f64,
    box_size: f64,
) -> Vec<f64> {
    let n = wrapped_positions.len();
    let r_sq = radius * radius;
    let min_image = |d: f64| d - box_size * (d / box_size).round();
    (0..n)
        .map(|i| {
            let mut sin_sum = 0.0;
            let mut cos_sum = 0.0;
            for j in 0..n {
                let dx = min_image(wrapped_positions[i][0] - wrapped_positions[j][0]);
                let dy = min_image(wrapped_positions[i][1] - wrapped_positions[j][1]);
                if dx * dx + dy * dy <= r_sq {
                    sin_sum += headings[j].sin();
                    cos_sum += headings[j].cos();
                }
            }
            sin_sum.atan2(cos_sum)
        })
        .collect()
}

/// Closed-form spiral position at time `t` for identity draws `(n1, n2, n3)`:
/// an inward spiral of decaying envelope plus a `(+5t, +2t)` convection.
pub fn spiral_position(t: f64, freq_f: f64, n1: f64, n2: f64, n3: f64) -> [f64; 2] {
    let phase = std::f64::consts::TAU * (freq_f + n1) * t;
    [
        (-t).exp() * (phase + n2).sin() + 5.0 * t,
        (-t).exp() * (phase + n3).cos() + 2.0 * t,
    ]
}

struct TrajectoryRecorder {
    values: DMatrix<f64>,
    model: &'static str,
}

impl TrajectoryRecorder {
    fn new(cfg: &SimConfig) -> Self {
        TrajectoryRecorder {
            values: DMatrix::zeros(2 * cfg.n_agents, cfg.n_steps),
            model: cfg.model.name(),
        }
    }

    fn record(&mut self, step: usize, positions: &[[f64; 2]]) -> Result<()> {
        for (i, p) in positions.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::SimulationDiverged {
                    model: self.model,
                    step,
                });
            }
            self.values[(2 * i, step)] = p[0];
            self.values[(2 * i + 1, step)] = p[1];
        }
        Ok(())
    }

    fn finish(self, cfg: &SimConfig) -> SignalMatrix {
        let row_labels = (0..2 * cfg.n_agents)
            .map(|r| format!("a{}.{}", r / 2, if r % 2 == 0 { "x" } else { "y" }))
            .collect();
        SignalMatrix {
            values: self.values,
            row_labels,
            n_agents: cfg.n_agents,
            n_steps: cfg.n_steps,
        }
    }
}

fn init_positions(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            [
                rng.random_range(0.0..INIT_POSITION_RANGE),
                rng.random_range(0.0..INIT_POSITION_RANGE),
            ]
        })
        .collect()
}

fn init_velocities(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [normal(rng), normal(rng)]).collect()
}

/// Run one simulation and return the recorded position matrix.
pub fn simulate(cfg: &SimConfig) -> Result<SignalMatrix> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[STREAM_INIT]));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[STREAM_NOISE]));
    let n = cfg.n_agents;
    let mut rec = TrajectoryRecorder::new(cfg);

    match cfg.model {
        Model::PureNoise => {
            // Every sample is a fresh standard-normal draw.
            let mut pos = vec![[0.0; 2]; n];
            for t in 0..cfg.n_steps {
                for p in pos.iter_mut() {
                    p[0] = normal(&mut noise_rng);
                    p[1] = normal(&mut noise_rng);
                }
                rec.record(t, &pos)?;
            }
        }
        Model::PositionWalk => {
            let mut pos = init_positions(&mut init_rng, n);
            rec.record(0, &pos)?;
            for t in 1..cfg.n_steps {
                for p in pos.iter_mut() {
                    p[0] += normal(&mut noise_rng);
                    p[1] += normal(&mut noise_rng);
                }
                rec.record(t, &pos)?;
            }
        }
        Model::VelocityWalk => {
            let mut pos = init_positions(&mut init_rng, n);
            let mut vel = init_velocities(&mut init_rng, n);
            rec.record(0, &pos)?;
            for t in 1..cfg.n_steps {
                for (p, v) in pos.iter_mut().zip(vel.iter()) {
                    p[0] += v[0] * cfg.dt;
                    p[1] += v[1] * cfg.dt;
                }
                for v in vel.iter_mut() {
                    v[0] += normal(&mut noise_rng);
                    v[1] += normal(&mut noise_rng);
                }
                rec.record(t, &pos)?;
            }
        }
        Model::KinematicNoise => {
            let mut pos = init_positions(&mut init_rng, n);
            rec.record(0, &pos)?;
            for t in 1..cfg.n_steps {
                for p in pos.iter_mut() {
                    let mag = cfg.mu * p[0].hypot(p[1]);
                    p[0] += mag * normal(&mut noise_rng);
                    p[1] += mag * normal(&mut noise_rng);
                }
                rec.record(t, &pos)?;
            }
        }
        Model::AccelerationNoise => {
            let mut pos = init_positions(&mut init_rng, n);
            let mut vel = init_velocities(&mut init_rng, n);
            rec.record(0, &pos)?;
            for t in 1..cfg.n_steps {
                for (p, v) in pos.iter_mut().zip(vel.iter()) {
                    p[0] += v[0] * cfg.dt;
                    p[1] += v[1] * cfg.dt;
                }
                for v in vel.iter_mut() {
                    let mag = cfg.mu * v[0].hypot(v[1]);
                    v[0] += mag * normal(&mut noise_rng);
                    v[1] += mag * normal(&mut noise_rng);
                }
                rec.record(t, &pos)?;
            }
        }
        Model::CuckerSmale => {
            let pos0 = init_positions(&mut init_rng, n);
            let mut vel = init_velocities(&mut init_rng, n);
            let mut pos = pos0;
            rec.record(0, &pos)?;
            for t in 1..cfg.n_steps {
                let new_vel = cucker_smale_step(&pos, &vel, cfg.k, cfg.beta);
                for (p, v) in pos.iter_mut().zip(vel.iter()) {
                    p[0] += v[0] * cfg.dt;
                    p[1] += v[1] * cfg.dt;
                }
                vel = new_vel;
                rec.record(t, &pos)?;
            }
        }
        Model::Vicsek => {
            let mut pos = init_positions(&mut init_rng, n);
            let mut wrapped = pos.clone();
            let mut headings: Vec<f64> = (0..n)
                .map(|_| init_rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            rec.record(0, &pos)?;
            for t in 1..cfg.n_steps {
                headings = vicsek_step(&wrapped, &headings, cfg.radius, cfg.box_size);
                for ((p, w), &h) in pos.iter_mut().zip(wrapped.iter_mut()).zip(headings.iter()) {
                    let dx = cfg.speed * cfg.dt * h.cos();
                    let dy = cfg.speed * cfg.dt * h.sin();
                    p[0] += dx;
                    p[1] += dy;
                    w[0] = (w[0] + dx).rem_euclid(cfg.box_size);
                    w[1] = (w[1] + dy).rem_euclid(cfg.box_size);
                }
                rec.record(t, &pos)?;
            }
        }
        Model::SpiralIn => {
            let draws: Vec<[f64; 3]> = (0..n)
                .map(|_| [normal(&mut init_rng), normal(&mut init_rng), normal(&mut init_rng)])
                .collect();
            let mut pos = vec![[0.0; 2]; n];
            for t in 0..cfg.n_steps {
                let time = SPIRAL_T_MAX * t as f64 / (cfg.n_steps - 1) as f64;
                for (p, d) in pos.iter_mut().zip(draws.iter()) {
                    *p = spiral_position(time, cfg.freq_f, d[0], d[1], d[2]);
                }
                rec.record(t, &pos)?;
            }
        }
    }

    let matrix = rec.finish(cfg);
    if cfg.measurement_noise {
        let seed = derive_seed(cfg.seed, &[STREAM_MEASUREMENT]);
        Ok(add_measurement_noise(
            &matrix,
            MEASUREMENT_NOISE_FRACTION,
            seed,
        ))
    } else {
        Ok(matrix)
    }
}

/// Add per-row Gaussian noise with std equal to `fraction` of the row's
/// temporal range (max - min). Constant rows are returned unchanged and the
/// draw order (row-major) is independent of row content.
pub fn add_measurement_noise(x: &SignalMatrix, fraction: f64, seed: u64) -> SignalMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for i in 0..out.values.nrows() {
        let row = x.values.row(i);
        let std = fraction * (row.max() - row.min());
        for j in 0..out.values.ncols() {
            out.values[(i, j)] += std * normal(&mut rng);
        }
    }
    out
}
