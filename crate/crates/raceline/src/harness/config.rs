//! Experiment configuration: the flat key-value config file, the algorithm
//! grid, per-run configs, and seed derivation.

use thiserror::Error;

use crate::algos::{PolicySpace, PpoConfig, SpgConfig};
use crate::replay::Regime;
use crate::scalar::Scalar;

/// The six trainer variants of the benchmark grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    PpoLinear,
    PpoLog,
    SpgSingle,
    SpgMulti,
    SpgpSingle,
    SpgpMulti,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::PpoLinear,
        Algorithm::PpoLog,
        Algorithm::SpgSingle,
        Algorithm::SpgMulti,
        Algorithm::SpgpSingle,
        Algorithm::SpgpMulti,
    ];

    /// Stable CLI/file name.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PpoLinear => "ppo-linear",
            Algorithm::PpoLog => "ppo-log",
            Algorithm::SpgSingle => "spg-single",
            Algorithm::SpgMulti => "spg-multi",
            Algorithm::SpgpSingle => "spgp-single",
            Algorithm::SpgpMulti => "spgp-multi",
        }
    }

    pub fn from_name(name: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.name() == name)
    }

    /// Column label in the summary table.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::PpoLinear => "PPO linear",
            Algorithm::PpoLog => "PPO log",
            Algorithm::SpgSingle => "SPG single",
            Algorithm::SpgMulti => "SPG multiple",
            Algorithm::SpgpSingle => "SPG-p single",
            Algorithm::SpgpMulti => "SPG-p multiple",
        }
    }

    /// Seed-derivation tag; 0 is reserved for the random baseline.
    pub fn tag(self) -> u64 {
        match self {
            Algorithm::PpoLinear => 1,
            Algorithm::PpoLog => 2,
            Algorithm::SpgSingle => 3,
            Algorithm::SpgMulti => 4,
            Algorithm::SpgpSingle => 5,
            Algorithm::SpgpMulti => 6,
        }
    }

    pub fn is_ppo(self) -> bool {
        matches!(self, Algorithm::PpoLinear | Algorithm::PpoLog)
    }
}

/// Error parsing the key-value config file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
}

/// Every tunable of the benchmark, defaulting to the published values.
///
/// Serialized as a flat `key = value` text file; `#` starts a comment and
/// blank lines are ignored. Unknown keys are an error so typos cannot pass
/// silently.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnessConfig<F> {
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub buffer_size: usize,
    pub gamma: F,
    pub track_seeds: Vec<u64>,
    // Shared across all trainers.
    pub critic_lr: F,
    pub value_epochs: usize,
    pub minibatch: usize,
    // PPO.
    pub epsilon: F,
    pub beta: F,
    pub ppo_actor_lr: F,
    pub ppo_policy_epochs: usize,
    // SPG (both prioritized and plain share everything but the actor step).
    pub spg_single_actor_lr: F,
    pub spg_single_policy_epochs: usize,
    pub spg_multi_actor_lr: F,
    pub spg_multi_policy_epochs: usize,
    pub n_action_samples: usize,
    /// Initial exploration temperature T.
    pub temperature: F,
    /// Per-episode temperature decay gamma_T.
    pub temp_decay: F,
}

impl<F: Scalar> Default for HarnessConfig<F> {
    fn default() -> Self {
        HarnessConfig {
            episodes: 200,
            steps_per_episode: 200,
            buffer_size: 10_000,
            gamma: F::of(0.9),
            track_seeds: vec![1, 2, 3, 4, 5],
            critic_lr: F::of(0.0005),
            value_epochs: 50,
            minibatch: 200,
            epsilon: F::of(0.2),
            beta: F::of(0.02),
            ppo_actor_lr: F::of(0.001),
            ppo_policy_epochs: 10,
            spg_single_actor_lr: F::of(0.01),
            spg_single_policy_epochs: 1,
            spg_multi_actor_lr: F::of(0.001),
            spg_multi_policy_epochs: 10,
            n_action_samples: 5,
            temperature: F::of(1.0),
            temp_decay: F::of(0.01),
        }
    }
}

impl<F: Scalar> HarnessConfig<F> {
    /// Parse a config file, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = HarnessConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed { line, text: content.to_string() })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            let real = |slot: &mut F| -> Result<(), ConfigError> {
                *slot = F::of(value.parse::<f64>().map_err(|_| bad())?);
                Ok(())
            };
            match key {
                "episodes" => cfg.episodes = value.parse().map_err(|_| bad())?,
                "steps_per_episode" => cfg.steps_per_episode = value.parse().map_err(|_| bad())?,
                "buffer_size" => cfg.buffer_size = value.parse().map_err(|_| bad())?,
                "gamma" => real(&mut cfg.gamma)?,
                "track_seeds" => {
                    cfg.track_seeds = value
                        .split(',')
                        .map(|s| s.trim().parse::<u64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad())?;
                    if cfg.track_seeds.is_empty() {
                        return Err(bad());
                    }
                }
                "critic_lr" => real(&mut cfg.critic_lr)?,
                "value_epochs" => cfg.value_epochs = value.parse().map_err(|_| bad())?,
                "minibatch" => cfg.minibatch = value.parse().map_err(|_| bad())?,
                "epsilon" => real(&mut cfg.epsilon)?,
                "beta" => real(&mut cfg.beta)?,
                "ppo_actor_lr" => real(&mut cfg.ppo_actor_lr)?,
                "ppo_policy_epochs" => cfg.ppo_policy_epochs = value.parse().map_err(|_| bad())?,
                "spg_single_actor_lr" => real(&mut cfg.spg_single_actor_lr)?,
                "spg_single_policy_epochs" => {
                    cfg.spg_single_policy_epochs = value.parse().map_err(|_| bad())?
                }
                "spg_multi_actor_lr" => real(&mut cfg.spg_multi_actor_lr)?,
                "spg_multi_policy_epochs" => {
                    cfg.spg_multi_policy_epochs = value.parse().map_err(|_| bad())?
                }
                "n_action_samples" => cfg.n_action_samples = value.parse().map_err(|_| bad())?,
                "T" => real(&mut cfg.temperature)?,
                "gamma_T" => real(&mut cfg.temp_decay)?,
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }
        Ok(cfg)
    }

    pub fn ppo_config(&self, space: PolicySpace) -> PpoConfig<F> {
        PpoConfig {
            epsilon: self.epsilon,
            beta: self.beta,
            actor_lr: self.ppo_actor_lr,
            critic_lr: self.critic_lr,
            value_epochs: self.value_epochs,
            policy_epochs: self.ppo_policy_epochs,
            minibatch: self.minibatch,
            space,
        }
    }

    pub fn spg_config(&self, multi_epoch: bool, prioritized: bool) -> SpgConfig<F> {
        let (actor_lr, policy_epochs) = if multi_epoch {
            (self.spg_multi_actor_lr, self.spg_multi_policy_epochs)
        } else {
            (self.spg_single_actor_lr, self.spg_single_policy_epochs)
        };
        SpgConfig {
            n_samples: self.n_action_samples,
            temperature: self.temperature,
            temp_decay: self.temp_decay,
            prioritized,
            actor_lr,
            critic_lr: self.critic_lr,
            value_epochs: self.value_epochs,
            policy_epochs,
            minibatch: self.minibatch,
        }
    }

    fn algo_config(&self, algorithm: Algorithm) -> AlgoConfig<F> {
        match algorithm {
            Algorithm::PpoLinear => AlgoConfig::Ppo(self.ppo_config(PolicySpace::Linear)),
            Algorithm::PpoLog => AlgoConfig::Ppo(self.ppo_config(PolicySpace::Log)),
            Algorithm::SpgSingle => AlgoConfig::Spg(self.spg_config(false, false)),
            Algorithm::SpgMulti => AlgoConfig::Spg(self.spg_config(true, false)),
            Algorithm::SpgpSingle => AlgoConfig::Spg(self.spg_config(false, true)),
            Algorithm::SpgpMulti => AlgoConfig::Spg(self.spg_config(true, true)),
        }
    }
}

/// The algorithm-specific part of a run config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgoConfig<F> {
    Ppo(PpoConfig<F>),
    Spg(SpgConfig<F>),
}

/// Requested a grid cell the benchmark cannot run.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CellError {
    #[error("ppo-linear trains on replayed data only unstably; it supports only the recent regime")]
    PpoLinearReplay,
}

/// One independent training run: a grid cell at one track seed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig<F> {
    pub algorithm: Algorithm,
    pub regime: Regime,
    pub track_seed: u64,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub gamma: F,
    pub buffer_capacity: usize,
    pub algo: AlgoConfig<F>,
}

impl<F: Scalar> RunConfig<F> {
    pub fn new(
        algorithm: Algorithm,
        regime: Regime,
        track_seed: u64,
        hc: &HarnessConfig<F>,
    ) -> Result<Self, CellError> {
        if algorithm == Algorithm::PpoLinear && regime != Regime::Recent {
            return Err(CellError::PpoLinearReplay);
        }
        Ok(RunConfig {
            algorithm,
            regime,
            track_seed,
            episodes: hc.episodes,
            steps_per_episode: hc.steps_per_episode,
            gamma: hc.gamma,
            buffer_capacity: hc.buffer_size,
            algo: hc.algo_config(algorithm),
        })
    }

    /// `algo:regime`, the cell's name in filters, filenames, and reports.
    pub fn cell_id(&self) -> String {
        cell_id(self.algorithm, self.regime)
    }

    /// Log-space PPO with both data sources runs but reliably explodes;
    /// it is excluded from the default grid and flagged when requested.
    pub fn unstable(&self) -> bool {
        self.algorithm == Algorithm::PpoLog && self.regime == Regime::Both
    }
}

pub fn cell_id(algorithm: Algorithm, regime: Regime) -> String {
    format!("{}:{}", algorithm.name(), regime.name())
}

/// The benchmark's populated summary-table cells: all six algorithms on
/// recent-only data, everything but linear PPO on the full buffer, and only
/// the SPG variants on both sources.
pub fn table_cells() -> Vec<(Algorithm, Regime)> {
    let mut cells = Vec::new();
    for regime in Regime::ALL {
        for algo in Algorithm::ALL {
            let populated = match regime {
                Regime::Recent => true,
                Regime::Memory => algo != Algorithm::PpoLinear,
                Regime::Both => !algo.is_ppo(),
            };
            if populated {
                cells.push((algo, regime));
            }
        }
    }
    cells
}

/// Every runnable cell: the table cells plus unstable log-PPO on both
/// sources, which must be requested explicitly.
pub fn runnable_cells() -> Vec<(Algorithm, Regime)> {
    let mut cells = Vec::new();
    for regime in Regime::ALL {
        for algo in Algorithm::ALL {
            if !(algo == Algorithm::PpoLinear && regime != Regime::Recent) {
                cells.push((algo, regime));
            }
        }
    }
    cells
}

/// Expand cells × track seeds into run configs, keeping cell-major order.
pub fn expand_runs<F: Scalar>(
    cells: &[(Algorithm, Regime)],
    hc: &HarnessConfig<F>,
) -> Vec<RunConfig<F>> {
    cells
        .iter()
        .flat_map(|&(algo, regime)| {
            hc.track_seeds.iter().map(move |&seed| {
                RunConfig::new(algo, regime, seed, hc).expect("cells are pre-validated")
            })
        })
        .collect()
}

/// Select cells from [`runnable_cells`] by a comma-separated filter whose
/// tokens are algorithm names, regime names, or `algo:regime` ids.
pub fn filter_cells(filter: &str) -> Result<Vec<(Algorithm, Regime)>, String> {
    let universe = runnable_cells();
    let mut selected = vec![false; universe.len()];
    for token in filter.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let matches: Vec<usize> = universe
            .iter()
            .enumerate()
            .filter(|(_, &(a, r))| {
                token == a.name() || token == r.name() || token == cell_id(a, r)
            })
            .map(|(i, _)| i)
            .collect();
        if matches.is_empty() {
            return Err(format!(
                "cell filter token {token:?} matches nothing; use algorithm names \
                 (e.g. spg-single), regime names (recent/memory/both), or algo:regime ids"
            ));
        }
        for i in matches {
            selected[i] = true;
        }
    }
    Ok(universe
        .into_iter()
        .zip(selected)
        .filter_map(|(cell, sel)| sel.then_some(cell))
        .collect())
}

/// Seeds for one run, all derived from (track seed, algorithm tag).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSeeds {
    /// Action sampling, minibatch draws, and SPG candidate noise.
    pub policy: u64,
    pub actor: u64,
    pub critic: u64,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a run's three seeds. The track seed stays shared across algorithms
/// (same circuit for every contender); everything else is decorrelated by
/// hashing in the algorithm tag.
pub fn derive_seeds(track_seed: u64, algo_tag: u64) -> RunSeeds {
    let policy = splitmix64(track_seed ^ algo_tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    RunSeeds {
        policy,
        actor: splitmix64(policy ^ 1),
        critic: splitmix64(policy ^ 2),
    }
}
