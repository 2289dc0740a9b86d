//! Lambda-parameterized 1D cellular automaton over a multi-state isotropic
//! neighborhood, producing analysis-ready state grids.
//!
//! A rule table maps every size-`neighbors` window (encoded base-`states`,
//! leftmost cell most significant) to a live next state; `lambda` selects the
//! fraction of non-quiescent rule classes that are enabled. A cell whose
//! window code is disabled (or all-dead) becomes dead, so `lambda = 0` kills
//! any world in one step and larger `lambda` admits progressively richer
//! dynamics. Isotropic tables assign a window and its mirror image the same
//! output; enabling is monotone in `lambda` because the shuffled class path is
//! consumed as a prefix. The world wraps circularly.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajmat::SignalMatrix;

/// Seeded rule table plus the lambda enablement path.
#[derive(Debug, Clone)]
pub struct CARuleSet {
    pub states: usize,
    pub neighbors: usize,
    pub isotropic: bool,
    /// Next-state table, indexed by window code; `rule[0] = 0` always.
    pub rule: Vec<u8>,
    /// Enablement flags, kept isotropy-symmetric.
    pub rule_is_used: Vec<bool>,
    /// One representative per non-dead rule class, shuffled; enabling consumes
    /// a prefix of this path.
    pub lambda_path: Vec<usize>,
    /// Number of non-dead rule classes.
    pub lambda_ct: usize,
    /// Count of currently enabled classes (prefix length of `lambda_path`).
    pub rules_used: usize,
    pub rule_seed: u64,
}

/// Index of the window whose base-`states` digit string is the reverse of the
/// input's (same length `neighbors`).
pub fn isotropic_mate(index: usize, states: usize, neighbors: usize) -> Result<usize> {
    let size = states.pow(neighbors as u32);
    if index >= size {
        return Err(Error::RuleIndexOutOfRange { index, size });
    }
    Ok(mate_unchecked(index, states, neighbors))
}

fn mate_unchecked(index: usize, states: usize, neighbors: usize) -> usize {
    let mut rest = index;
    let mut out = 0;
    for _ in 0..neighbors {
        out = out * states + rest % states;
        rest /= states;
    }
    out
}

/// Build a fresh seeded rule table with all classes disabled.
///
/// Semantics follow the reference generator: every non-zero index receives a
/// uniform live state in `[1, states-1]` (isotropic tables copy each draw to
/// the mirror index, so the later of a mirror pair wins), then one
/// representative per non-dead class is collected in index order and shuffled
/// to form the lambda path.
pub fn new_rule_set(rule_seed: u64, states: usize, neighbors: usize, isotropic: bool) -> CARuleSet {
    assert!(states >= 2, "need at least 2 states");
    assert!(neighbors >= 1 && neighbors % 2 == 1, "neighbors must be odd");
    let rule_ct = states
        .checked_pow(neighbors as u32)
        .expect("rule table size overflow");

    let mut rng = ChaCha8Rng::seed_from_u64(rule_seed);
    let mut rule = vec![0u8; rule_ct];
    for i in 1..rule_ct {
        rule[i] = rng.random_range(1..=states - 1) as u8;
        if isotropic {
            let m = mate_unchecked(i, states, neighbors);
            rule[m] = rule[i];
        }
    }

    let lambda_ct = if isotropic {
        (rule_ct + states.pow(neighbors.div_ceil(2) as u32)) / 2 - 1
    } else {
        rule_ct - 1
    };
    let mut seen = vec![false; rule_ct];
    let mut lambda_path = Vec::with_capacity(lambda_ct);
    for i in 1..rule_ct {
        if !seen[i] {
            lambda_path.push(i);
            seen[i] = true;
            if isotropic {
                seen[mate_unchecked(i, states, neighbors)] = true;
            }
        }
    }
    debug_assert_eq!(lambda_path.len(), lambda_ct);
    lambda_path.shuffle(&mut rng);

    CARuleSet {
        states,
        neighbors,
        isotropic,
        rule,
        rule_is_used: vec![false; rule_ct],
        lambda_path,
        lambda_ct,
        rules_used: 0,
        rule_seed,
    }
}

impl CARuleSet {
    /// Enable the first `round(lambda * lambda_ct)` classes of the lambda path
    /// (and their mirror mates) and disable the rest. `lambda` outside [0, 1]
    /// is clamped with a warning.
    pub fn set_rules_used(&mut self, lambda: f64) {
        let lambda = if (0.0..=1.0).contains(&lambda) {
            lambda
        } else {
            log::warn!("lambda {lambda} outside [0, 1]; clamping");
            lambda.clamp(0.0, 1.0)
        };
        let used = (lambda * self.lambda_ct as f64).round() as usize;
        self.rules_used = used.min(self.lambda_ct);
        for (pos, &idx) in self.lambda_path.iter().enumerate() {
            let on = pos < self.rules_used;
            self.rule_is_used[idx] = on;
            if self.isotropic {
                let m = mate_unchecked(idx, self.states, self.neighbors);
                self.rule_is_used[m] = on;
            }
        }
    }
}

/// One synchronous update of a circular world: each cell looks up its window
/// code and becomes `rule[code]` if that code is enabled, else dead.
pub fn step(world: &[u8], rules: &CARuleSet) -> Vec<u8> {
    let n = world.len();
    debug_assert!(n >= rules.neighbors);
    let half = rules.neighbors / 2;
    (0..n)
        .map(|c| {
            let mut code = 0usize;
            for j in 0..rules.neighbors {
                let cell = world[(c + n + j - half) % n];
                code = code * rules.states + cell as usize;
            }
            if rules.rule_is_used[code] {
                rules.rule[code]
            } else {
                0
            }
        })
        .collect()
}

/// Automaton run configuration. Field names double as CLI/config-file keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CAConfig {
    pub lambda: f64,
    pub n_cells: usize,
    pub n_steps: usize,
    pub states: usize,
    pub neighbors: usize,
    pub isotropic: bool,
    /// Probability that a cell starts dead; live cells draw a uniform state.
    pub dead_probability: f64,
    pub world_seed: u64,
    pub rule_seed: u64,
}

impl Default for CAConfig {
    fn default() -> Self {
        CAConfig {
            lambda: 0.5,
            n_cells: 230,
            n_steps: 443,
            states: 4,
            neighbors: 5,
            isotropic: true,
            dead_probability: 0.5,
            world_seed: 0,
            rule_seed: 0,
        }
    }
}

impl CAConfig {
    pub fn validate(&self) -> Result<()> {
        if self.states < 2 {
            return Err(Error::InvalidCaConfig(format!(
                "states must be >= 2, got {}",
                self.states
            )));
        }
        if self.neighbors.is_multiple_of(2) || self.neighbors == 0 {
            return Err(Error::InvalidCaConfig(format!(
                "neighbors must be odd, got {}",
                self.neighbors
            )));
        }
        if self.n_cells < self.neighbors {
            return Err(Error::InvalidCaConfig(format!(
                "world of {} cells is smaller than the {}-cell neighborhood",
                self.n_cells, self.neighbors
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidCaConfig("n_steps must be >= 1".into()));
        }
        if self.states.checked_pow(self.neighbors as u32).is_none()
            || self.states.pow(self.neighbors as u32) > (1 << 26)
        {
            return Err(Error::InvalidCaConfig(format!(
                "rule table of {}^{} entries is too large",
                self.states, self.neighbors
            )));
        }
        if !(0.0..=1.0).contains(&self.dead_probability) {
            return Err(Error::InvalidCaConfig(format!(
                "dead_probability must be in [0, 1], got {}",
                self.dead_probability
            )));
        }
        Ok(())
    }
}

/// Cell states over time: `n_cells` rows by `n_steps` columns, column 0 being
/// the initial world.
#[derive(Debug, Clone)]
pub struct CATrace {
    pub grid: DMatrix<u8>,
    pub states: usize,
}

impl CATrace {
    pub fn n_cells(&self) -> usize {
        self.grid.nrows()
    }

    pub fn n_steps(&self) -> usize {
        self.grid.ncols()
    }

    /// View the grid as a signal matrix (one row per cell) for the analysis
    /// pipeline.
    pub fn to_signal_matrix(&self) -> SignalMatrix {
        let values = self.grid.map(|v| v as f64);
        SignalMatrix {
            row_labels: (0..self.grid.nrows()).map(|i| format!("c{i}")).collect(),
            n_agents: self.grid.nrows(),
            n_steps: self.grid.ncols(),
            values,
        }
    }
}

/// Generate a rule set, enable `lambda` of it, seed the initial world, and
/// record `n_steps` generations (the initial world included).
pub fn run(cfg: &CAConfig) -> Result<CATrace> {
    cfg.validate()?;
    let mut rules = new_rule_set(cfg.rule_seed, cfg.states, cfg.neighbors, cfg.isotropic);
    rules.set_rules_used(cfg.lambda);

    let mut world_rng = ChaCha8Rng::seed_from_u64(cfg.world_seed);
    let mut world: Vec<u8> = (0..cfg.n_cells)
        .map(|_| {
            if world_rng.random::<f64>() < cfg.dead_probability {
                0
            } else {
                world_rng.random_range(1..=cfg.states - 1) as u8
            }
        })
        .collect();

    let mut grid = DMatrix::zeros(cfg.n_cells, cfg.n_steps);
    for (i, &s) in world.iter().enumerate() {
        grid[(i, 0)] = s;
    }
    for t in 1..cfg.n_steps {
        world = step(&world, &rules);
        for (i, &s) in world.iter().enumerate() {
            grid[(i, t)] = s;
        }
    }
    Ok(CATrace {
        grid,
        states: cfg.states,
    })
}
