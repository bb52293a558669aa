//! Experiment orchestration: run the algorithm × replay-regime grid over
//! seeded tracks, collect per-episode rewards, and emit reward curves plus
//! the final-performance summary table.
//!
//! Every run is fully determined by (track seed, algorithm tag): the track
//! generator, network inits, and the policy/minibatch RNG stream all derive
//! from them, so re-running a cell reproduces every reward bit for bit and
//! results do not depend on how many worker threads executed the grid.

mod config;

pub use config::{
    cell_id, derive_seeds, expand_runs, filter_cells, runnable_cells, table_cells, AlgoConfig,
    Algorithm, CellError, ConfigError, HarnessConfig, RunConfig, RunSeeds,
};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algos::{make_actor, PpoTrainer, SpgTrainer, Trainer};
use crate::env::{reset, step, EnvAction, Track, DT};
use crate::nn::{Mlp, Workspace};
use crate::policy::{policy_forward_into, sample_action};
use crate::replay::ReplayBuffer;
use crate::returns::EpisodeTrace;
use crate::scalar::Scalar;

/// Episodes averaged for a run's final performance.
pub const FINAL_WINDOW: usize = 20;

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Training diverged while learning from `episode`'s data; the reward
    /// history keeps the completed prefix including that episode's rollout.
    AbortedNonFinite { episode: usize },
}

/// One run's outcome.
#[derive(Clone, Debug)]
pub struct RunResult<F> {
    /// Total reward per episode; full length unless the run aborted.
    pub rewards: Vec<F>,
    pub status: RunStatus,
    pub wall_time: Duration,
    /// Sampling-stream seed, recorded in the manifest.
    pub policy_seed: u64,
}

/// Play one episode from a fresh grid start, sampling from the actor.
///
/// Transitions store the raw (unclamped) sampled action with its sampling
/// log-probability; the environment clamps controls internally.
pub fn rollout<F: Scalar, R: Rng + ?Sized>(
    track: &Track<F>,
    actor: &Mlp<F>,
    episode: usize,
    steps: usize,
    gamma: F,
    rng: &mut R,
) -> EpisodeTrace<F> {
    let mut trace = EpisodeTrace::new(episode, gamma, steps);
    let mut ws = Workspace::for_net(actor);
    let (mut car, mut obs) = reset(track);
    for _ in 0..steps {
        let out = policy_forward_into(actor, obs.as_array(), &mut ws);
        let sample = sample_action(&out, rng);
        let action = EnvAction { throttle: sample.action[0], steering: sample.action[1] };
        let (next, outcome) = step(&car, action, track, F::of(DT));
        trace.push(*obs.as_array(), sample.action, outcome.reward, sample.log_prob);
        car = next;
        obs = outcome.observation;
    }
    trace.finalize();
    trace
}

fn build_trainer<F: Scalar>(cfg: &RunConfig<F>, seeds: RunSeeds) -> Trainer<F> {
    match cfg.algo {
        AlgoConfig::Ppo(ppo) => Trainer::Ppo(PpoTrainer::new(ppo, seeds.actor, seeds.critic)),
        AlgoConfig::Spg(spg) => Trainer::Spg(SpgTrainer::new(spg, seeds.actor, seeds.critic)),
    }
}

/// Train one grid cell at one track seed.
///
/// Per episode: roll out, push the episode into the replay buffer, update
/// critic then actor on the regime's schedule, and record the total reward.
pub fn run_cell<F: Scalar>(cfg: &RunConfig<F>) -> RunResult<F> {
    let started = Instant::now();
    let seeds = derive_seeds(cfg.track_seed, cfg.algorithm.tag());
    let track = Track::generate(cfg.track_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.policy);
    let mut trainer = build_trainer(cfg, seeds);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut rewards = Vec::with_capacity(cfg.episodes);
    let mut status = RunStatus::Completed;
    for episode in 0..cfg.episodes {
        let trace = rollout(
            &track,
            trainer.actor(),
            episode,
            cfg.steps_per_episode,
            cfg.gamma,
            &mut rng,
        );
        rewards.push(trace.total_reward());
        buffer.push_episode(&trace);
        if trainer.update(&trace, &buffer, cfg.regime, &mut rng).is_err() {
            status = RunStatus::AbortedNonFinite { episode };
            break;
        }
    }
    RunResult { rewards, status, wall_time: started.elapsed(), policy_seed: seeds.policy }
}

/// Episode rewards of an untrained actor frozen at its initialization,
/// using the baseline's reserved seed tag. The floor every trained
/// configuration is measured against.
pub fn run_random_baseline<F: Scalar>(
    track_seed: u64,
    episodes: usize,
    steps_per_episode: usize,
    gamma: F,
) -> RunResult<F> {
    let started = Instant::now();
    let seeds = derive_seeds(track_seed, 0);
    let track = Track::generate(track_seed);
    let actor: Mlp<F> = make_actor(seeds.actor);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.policy);
    let rewards = (0..episodes)
        .map(|ep| rollout(&track, &actor, ep, steps_per_episode, gamma, &mut rng).total_reward())
        .collect();
    RunResult {
        rewards,
        status: RunStatus::Completed,
        wall_time: started.elapsed(),
        policy_seed: seeds.policy,
    }
}

/// Callback invoked as each run finishes: (input index, its config, its result).
pub type RunObserver<'a, F> = &'a (dyn Fn(usize, &RunConfig<F>, &RunResult<F>) + Sync);

/// Run every config, `jobs` at a time, reporting each finished run to
/// `on_done`. Results come back in input order regardless of scheduling.
pub fn run_grid_with<F>(
    runs: &[RunConfig<F>],
    jobs: usize,
    on_done: RunObserver<'_, F>,
) -> Vec<RunResult<F>>
where
    F: Scalar + Send + Sync,
{
    let jobs = jobs.clamp(1, runs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<RunResult<F>>>> =
        runs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= runs.len() {
                    break;
                }
                let result = run_cell(&runs[i]);
                on_done(i, &runs[i], &result);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every run slot is filled"))
        .collect()
}

pub fn run_grid<F>(runs: &[RunConfig<F>], jobs: usize) -> Vec<RunResult<F>>
where
    F: Scalar + Send + Sync,
{
    run_grid_with(runs, jobs, &|_, _, _| {})
}

/// Mean of the last [`FINAL_WINDOW`] episode rewards (all of them when the
/// history is shorter, flagged by the second component). None when empty.
pub fn final_performance<F: Scalar>(rewards: &[F]) -> Option<(F, bool)> {
    if rewards.is_empty() {
        return None;
    }
    let window = rewards.len().min(FINAL_WINDOW);
    let tail = &rewards[rewards.len() - window..];
    let mean = tail.iter().fold(F::zero(), |acc, &r| acc + r) / F::of(window as f64);
    Some((mean, window < FINAL_WINDOW))
}

/// Final performance of one grid cell across its seeds.
#[derive(Clone, Debug)]
pub struct CellSummary<F> {
    pub algorithm: Algorithm,
    pub regime: crate::replay::Regime,
    /// (track seed, final performance); None when that seed's run aborted.
    pub finals: Vec<(u64, Option<F>)>,
    /// Cross-seed mean over completed runs; None when all aborted.
    pub mean: Option<F>,
    /// Standard error (sample std / √n); None with fewer than 2 completed.
    pub se: Option<F>,
    pub n_aborted: usize,
    /// Some run had fewer episodes than the averaging window.
    pub short_history: bool,
}

impl<F: Scalar> CellSummary<F> {
    pub fn cell_id(&self) -> String {
        cell_id(self.algorithm, self.regime)
    }
}

/// Group runs by grid cell (in first-seen order) and compute each cell's
/// final performance: per seed the mean of the last [`FINAL_WINDOW`]
/// episodes, across seeds a mean and standard error over completed runs.
pub fn summarize<F: Scalar>(runs: &[(RunConfig<F>, RunResult<F>)]) -> Vec<CellSummary<F>> {
    let mut order: Vec<(Algorithm, crate::replay::Regime)> = Vec::new();
    for (cfg, _) in runs {
        if !order.contains(&(cfg.algorithm, cfg.regime)) {
            order.push((cfg.algorithm, cfg.regime));
        }
    }
    order
        .into_iter()
        .map(|(algorithm, regime)| {
            let mut finals = Vec::new();
            let mut short_history = false;
            let mut n_aborted = 0;
            for (cfg, result) in runs {
                if (cfg.algorithm, cfg.regime) != (algorithm, regime) {
                    continue;
                }
                let value = match result.status {
                    RunStatus::Completed => {
                        let (mean, short) =
                            final_performance(&result.rewards).expect("completed run has rewards");
                        short_history |= short;
                        Some(mean)
                    }
                    RunStatus::AbortedNonFinite { .. } => {
                        n_aborted += 1;
                        None
                    }
                };
                finals.push((cfg.track_seed, value));
            }
            let values: Vec<F> = finals.iter().filter_map(|&(_, v)| v).collect();
            let (mean, se) = mean_and_se(&values);
            CellSummary { algorithm, regime, finals, mean, se, n_aborted, short_history }
        })
        .collect()
}

/// Cross-seed mean and standard error (sample std / √n). The mean needs at
/// least one value, the spread estimate at least two.
pub fn mean_and_se<F: Scalar>(values: &[F]) -> (Option<F>, Option<F>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = F::of(values.len() as f64);
    let mean = values.iter().fold(F::zero(), |acc, &v| acc + v) / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values
        .iter()
        .fold(F::zero(), |acc, &v| acc + (v - mean) * (v - mean))
        / (n - F::one());
    (Some(mean), Some(var.sqrt() / n.sqrt()))
}

fn fmt_f<F: Scalar>(v: F) -> String {
    format!("{}", v.as_f64())
}

/// Render one cell's reward curves: a row per episode with every seed's
/// reward and their mean. Aborted runs leave their column empty past the
/// completed prefix and drop out of the mean there.
pub fn render_curve_csv<F: Scalar>(seeds: &[(u64, &[F])], episodes: usize) -> String {
    let mut out = String::from("episode");
    for (seed, _) in seeds {
        write!(out, ",seed_{seed}").unwrap();
    }
    out.push_str(",mean\n");
    for ep in 0..episodes {
        write!(out, "{ep}").unwrap();
        let mut sum = 0.0;
        let mut n = 0;
        for (_, rewards) in seeds {
            match rewards.get(ep) {
                Some(&r) => {
                    write!(out, ",{}", fmt_f(r)).unwrap();
                    sum += r.as_f64();
                    n += 1;
                }
                None => out.push(','),
            }
        }
        if n > 0 {
            write!(out, ",{}", sum / n as f64).unwrap();
        } else {
            out.push(',');
        }
        out.push('\n');
    }
    out
}

/// Parse a curve CSV back into (seed, rewards) columns, ignoring the mean.
pub fn parse_curve_csv(text: &str) -> Result<Vec<(u64, Vec<f64>)>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty curve file")?;
    let names: Vec<&str> = header.split(',').collect();
    if names.first() != Some(&"episode") || names.last() != Some(&"mean") {
        return Err(format!("unexpected curve header {header:?}"));
    }
    let mut columns: Vec<(u64, Vec<f64>)> = names[1..names.len() - 1]
        .iter()
        .map(|name| {
            name.strip_prefix("seed_")
                .and_then(|s| s.parse().ok())
                .map(|seed| (seed, Vec::new()))
                .ok_or_else(|| format!("unexpected curve column {name:?}"))
        })
        .collect::<Result<_, _>>()?;
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(format!("row {row}: expected {} fields", names.len()));
        }
        for (col, &field) in columns.iter_mut().zip(&fields[1..fields.len() - 1]) {
            if field.is_empty() {
                continue;
            }
            if col.1.len() < row {
                return Err(format!("row {row}: seed_{} resumes after a gap", col.0));
            }
            col.1.push(field.parse().map_err(|_| format!("row {row}: bad value {field:?}"))?);
        }
    }
    Ok(columns)
}

/// Machine-readable summary, one row per grid cell.
pub fn render_summary_csv<F: Scalar>(cells: &[CellSummary<F>]) -> String {
    let mut out =
        String::from("algorithm,regime,n_seeds,n_aborted,final_mean,final_se,short_history\n");
    for c in cells {
        let n_seeds = c.finals.iter().filter(|(_, v)| v.is_some()).count();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.algorithm.name(),
            c.regime.name(),
            n_seeds,
            c.n_aborted,
            c.mean.map(fmt_f).unwrap_or_default(),
            c.se.map(fmt_f).unwrap_or_default(),
            c.short_history,
        )
        .unwrap();
    }
    out
}

fn summary_cell_text<F: Scalar>(c: &CellSummary<F>) -> String {
    let mut text = match (c.mean, c.se) {
        (Some(m), Some(s)) => format!("{:.1} ± {:.1}", m.as_f64(), s.as_f64()),
        (Some(m), None) => format!("{:.1}", m.as_f64()),
        (None, _) => "aborted".to_string(),
    };
    if c.n_aborted > 0 && c.mean.is_some() {
        write!(text, " [{} aborted]", c.n_aborted).unwrap();
    }
    text
}

/// Aligned text table in the benchmark's layout: regimes as rows, algorithms
/// as columns, `mean ± se` in populated cells and `-` elsewhere.
pub fn render_summary_table<F: Scalar>(cells: &[CellSummary<F>]) -> String {
    use crate::replay::Regime;
    let regime_label = |r: Regime| match r {
        Regime::Recent => "Recent",
        Regime::Memory => "Memory",
        Regime::Both => "Both",
    };
    let body: Vec<Vec<String>> = Regime::ALL
        .iter()
        .map(|&regime| {
            let mut row = vec![regime_label(regime).to_string()];
            row.extend(Algorithm::ALL.iter().map(|&algo| {
                cells
                    .iter()
                    .find(|c| (c.algorithm, c.regime) == (algo, regime))
                    .map(summary_cell_text)
                    .unwrap_or_else(|| "-".to_string())
            }));
            row
        })
        .collect();
    let mut header = vec![String::new()];
    header.extend(Algorithm::ALL.iter().map(|a| a.label().to_string()));
    let mut widths = vec![0usize; header.len()];
    for row in std::iter::once(&header).chain(&body) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&body) {
        for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            write!(out, "{cell:<w$}").unwrap();
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// Plain-text run metadata: one line per run.
pub fn render_manifest<F: Scalar>(runs: &[(RunConfig<F>, RunResult<F>)]) -> String {
    let mut out = format!("runs {}\n", runs.len());
    for (cfg, result) in runs {
        let status = match result.status {
            RunStatus::Completed => "completed".to_string(),
            RunStatus::AbortedNonFinite { episode } => format!("aborted-nonfinite@{episode}"),
        };
        writeln!(
            out,
            "cell={} track_seed={} policy_seed={:#018x} episodes={} status={} wall={:.2}s",
            cfg.cell_id(),
            cfg.track_seed,
            result.policy_seed,
            result.rewards.len(),
            status,
            result.wall_time.as_secs_f64(),
        )
        .unwrap();
    }
    out
}

pub fn curve_file_name(algorithm: Algorithm, regime: crate::replay::Regime) -> String {
    format!("curve_{}_{}.csv", algorithm.name(), regime.name())
}

/// Write all artifacts for a finished grid into `dir`: per-cell curve CSVs,
/// `summary.csv`, `summary.txt`, and `manifest.txt`. Returns written paths.
pub fn emit_outputs<F: Scalar>(
    dir: &Path,
    runs: &[(RunConfig<F>, RunResult<F>)],
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summaries = summarize(runs);
    for cell in &summaries {
        let group: Vec<(u64, &[F])> = runs
            .iter()
            .filter(|(cfg, _)| (cfg.algorithm, cfg.regime) == (cell.algorithm, cell.regime))
            .map(|(cfg, result)| (cfg.track_seed, result.rewards.as_slice()))
            .collect();
        let episodes = runs
            .iter()
            .find(|(cfg, _)| (cfg.algorithm, cfg.regime) == (cell.algorithm, cell.regime))
            .map(|(cfg, _)| cfg.episodes)
            .unwrap_or(0);
        let path = dir.join(curve_file_name(cell.algorithm, cell.regime));
        std::fs::write(&path, render_curve_csv(&group, episodes))?;
        written.push(path);
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, render_summary_csv(&summaries))?;
    written.push(path);
    let path = dir.join("summary.txt");
    std::fs::write(&path, render_summary_table(&summaries))?;
    written.push(path);
    let path = dir.join("manifest.txt");
    std::fs::write(&path, render_manifest(runs))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::Regime;
    use approx::assert_abs_diff_eq;

    /// Small-but-real config so unit tests stay fast.
    fn tiny_config() -> HarnessConfig<f64> {
        HarnessConfig {
            episodes: 2,
            steps_per_episode: 12,
            minibatch: 6,
            value_epochs: 2,
            ppo_policy_epochs: 2,
            spg_multi_policy_epochs: 2,
            buffer_size: 100,
            track_seeds: vec![1, 2],
            ..HarnessConfig::default()
        }
    }

    fn tiny_run(algo: Algorithm, regime: Regime, seed: u64) -> RunConfig<f64> {
        RunConfig::new(algo, regime, seed, &tiny_config()).unwrap()
    }

    #[test]
    fn single_episode_run_records_one_reward() {
        let mut cfg = tiny_run(Algorithm::SpgSingle, Regime::Recent, 1);
        cfg.episodes = 1;
        let result = run_cell(&cfg);
        assert_eq!(result.rewards.len(), 1);
        assert_eq!(result.status, RunStatus::Completed);
    }

    #[test]
    fn identical_configs_reproduce_identical_rewards() {
        let cfg = tiny_run(Algorithm::PpoLog, Regime::Memory, 2);
        let a = run_cell(&cfg);
        let b = run_cell(&cfg);
        assert_eq!(a.rewards, b.rewards);
        assert_eq!(a.policy_seed, b.policy_seed);
    }

    #[test]
    fn episode_rewards_stay_in_range() {
        let cfg = tiny_run(Algorithm::SpgpMulti, Regime::Both, 3);
        let result = run_cell(&cfg);
        assert_eq!(result.rewards.len(), 2);
        let steps = cfg.steps_per_episode as f64;
        for &r in &result.rewards {
            assert!(r >= -10.0 * steps && r <= steps, "episode reward {r} out of range");
        }
    }

    #[test]
    fn grid_results_keep_input_order_and_parallelism_is_immaterial() {
        let runs = vec![
            tiny_run(Algorithm::SpgSingle, Regime::Recent, 1),
            tiny_run(Algorithm::PpoLinear, Regime::Recent, 2),
            tiny_run(Algorithm::SpgpSingle, Regime::Memory, 1),
        ];
        let serial = run_grid(&runs, 1);
        let parallel = run_grid(&runs, 3);
        assert_eq!(serial.len(), 3);
        for (s, p) in serial.iter().zip(&parallel) {
            assert_eq!(s.rewards, p.rewards);
        }
        assert_eq!(serial[0].rewards, run_cell(&runs[0]).rewards);
    }

    #[test]
    fn baseline_runs_without_training() {
        let result = run_random_baseline::<f64>(1, 3, 12, 0.9);
        assert_eq!(result.rewards.len(), 3);
        assert_eq!(result.status, RunStatus::Completed);
    }

    #[test]
    fn final_performance_averages_the_tail() {
        let rewards: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let (mean, short) = final_performance(&rewards).unwrap();
        assert_abs_diff_eq!(mean, 189.5, epsilon = 1e-12);
        assert!(!short);
        let (mean, short) = final_performance(&rewards[..5]).unwrap();
        assert_abs_diff_eq!(mean, 2.0, epsilon = 1e-12);
        assert!(short);
        assert!(final_performance::<f64>(&[]).is_none());
    }

    fn synthetic_run(
        algo: Algorithm,
        regime: Regime,
        seed: u64,
        rewards: Vec<f64>,
        status: RunStatus,
    ) -> (RunConfig<f64>, RunResult<f64>) {
        let mut cfg = tiny_run(algo, regime, seed);
        cfg.episodes = 200;
        (cfg, RunResult { rewards, status, wall_time: Duration::ZERO, policy_seed: seed })
    }

    #[test]
    fn summary_statistics_match_hand_computation() {
        let constant = vec![100.0; 200];
        let runs: Vec<_> = [90.0, 100.0, 110.0]
            .iter()
            .enumerate()
            .map(|(i, &level)| {
                synthetic_run(
                    Algorithm::SpgSingle,
                    Regime::Memory,
                    i as u64 + 1,
                    vec![level; 200],
                    RunStatus::Completed,
                )
            })
            .chain([synthetic_run(
                Algorithm::PpoLog,
                Regime::Recent,
                1,
                constant,
                RunStatus::Completed,
            )])
            .collect();
        let cells = summarize(&runs);
        assert_eq!(cells.len(), 2);
        let spread = &cells[0];
        assert_abs_diff_eq!(spread.mean.unwrap(), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spread.se.unwrap(), 10.0 / 3.0f64.sqrt(), epsilon = 1e-12);
        let flat = &cells[1];
        assert_abs_diff_eq!(flat.mean.unwrap(), 100.0, epsilon = 1e-12);
        assert!(flat.se.is_none(), "single seed has no spread estimate");
    }

    #[test]
    fn aborted_runs_are_annotated_and_excluded() {
        let runs = vec![
            synthetic_run(
                Algorithm::PpoLog,
                Regime::Both,
                1,
                vec![50.0; 40],
                RunStatus::AbortedNonFinite { episode: 39 },
            ),
            synthetic_run(Algorithm::PpoLog, Regime::Both, 2, vec![80.0; 200], RunStatus::Completed),
        ];
        let cells = summarize(&runs);
        assert_eq!(cells.len(), 1);
        let cell = &cells[0];
        assert_eq!(cell.n_aborted, 1);
        assert_eq!(cell.finals[0], (1, None));
        assert_abs_diff_eq!(cell.mean.unwrap(), 80.0, epsilon = 1e-12);
        assert!(render_summary_table(&cells).contains("[1 aborted]"));
        let all_aborted = summarize(&runs[..1]);
        assert!(all_aborted[0].mean.is_none());
        assert!(render_summary_table(&all_aborted).contains("aborted"));
    }

    #[test]
    fn curve_csv_layout_and_mean_column() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 4.0];
        let csv = render_curve_csv::<f64>(&[(1, &a), (2, &b)], 3);
        let expected = "episode,seed_1,seed_2,mean\n\
                        0,1,2,1.5\n\
                        1,2,4,3\n\
                        2,3,,3\n";
        assert_eq!(csv, expected);
        // Re-rendering is byte-identical.
        assert_eq!(render_curve_csv::<f64>(&[(1, &a), (2, &b)], 3), expected);
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn curve_csv_round_trips() {
        let a = [0.125, -10.0, 3.5000001];
        let b = [2.0, 4.25];
        let csv = render_curve_csv::<f64>(&[(7, &a), (9, &b)], 3);
        let parsed = parse_curve_csv(&csv).unwrap();
        assert_eq!(parsed, vec![(7, a.to_vec()), (9, b.to_vec())]);
        assert!(parse_curve_csv("bogus\n").is_err());
    }

    #[test]
    fn summary_csv_lists_cells_in_order() {
        let runs = vec![
            synthetic_run(Algorithm::SpgMulti, Regime::Memory, 1, vec![10.0; 30], RunStatus::Completed),
            synthetic_run(Algorithm::SpgMulti, Regime::Memory, 2, vec![20.0; 30], RunStatus::Completed),
        ];
        let csv = render_summary_csv(&summarize(&runs));
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "algorithm,regime,n_seeds,n_aborted,final_mean,final_se,short_history"
        );
        assert_eq!(lines.next().unwrap(), "spg-multi,memory,2,0,15,5,false");
    }

    #[test]
    fn summary_table_mirrors_the_grid_layout() {
        let runs = vec![synthetic_run(
            Algorithm::SpgpMulti,
            Regime::Memory,
            1,
            vec![141.1; 200],
            RunStatus::Completed,
        )];
        let table = render_summary_table(&summarize(&runs));
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4, "header + one row per regime");
        assert!(lines[0].contains("PPO linear") && lines[0].contains("SPG-p multiple"));
        assert!(lines[1].starts_with("Recent"));
        assert!(lines[2].starts_with("Memory") && lines[2].contains("141.1"));
        assert!(lines[3].starts_with("Both"));
        assert!(lines[1].contains('-'));
    }

    #[test]
    fn outputs_land_in_the_directory() {
        let dir = std::env::temp_dir().join(format!("raceline-test-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let runs = vec![
            synthetic_run(Algorithm::SpgSingle, Regime::Both, 1, vec![5.0; 25], RunStatus::Completed),
            synthetic_run(Algorithm::SpgSingle, Regime::Both, 2, vec![6.0; 25], RunStatus::Completed),
        ];
        let written = emit_outputs(&dir, &runs).unwrap();
        assert_eq!(written.len(), 4);
        let curve = std::fs::read_to_string(dir.join("curve_spg-single_both.csv")).unwrap();
        // Header plus one row per configured episode (200 in these configs).
        assert_eq!(curve.lines().count(), 201);
        let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
        assert!(manifest.starts_with("runs 2\n"));
        assert!(manifest.contains("cell=spg-single:both track_seed=1"));
        assert!(manifest.contains("status=completed"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
