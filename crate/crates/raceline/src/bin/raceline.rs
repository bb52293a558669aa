//! Command-line front end: run the benchmark grid, summarize a finished
//! output directory, or export a generated track.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use raceline::harness::{
    self, expand_runs, filter_cells, table_cells, Algorithm, HarnessConfig, RunStatus,
};
use raceline::replay::Regime;
use raceline::{Real, Track};

#[derive(Parser)]
#[command(name = "raceline", version, about = "Actor-critic racing benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the algorithm × replay-regime grid and write curves + summary.
    Run {
        /// Key-value config file; defaults to the published hyperparameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for CSVs and the manifest.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated cell filter: algorithm names, regime names, or
        /// algo:regime ids (e.g. "spg-single,ppo-log:memory").
        #[arg(long)]
        cells: Option<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Recompute and print the summary table from curve CSVs in a directory.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Generate a track and export its quad list as text.
    GenTrack {
        #[arg(long)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, cells, jobs } => run(config.as_deref(), &out, cells.as_deref(), jobs),
        Command::Summarize { input } => summarize(&input),
        Command::GenTrack { seed, out } => gen_track(seed, out.as_deref()),
    }
    .map_or_else(
        |err| {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        },
        |()| ExitCode::SUCCESS,
    )
}

fn run(config: Option<&Path>, out: &Path, cells: Option<&str>, jobs: usize) -> Result<(), String> {
    let hc: HarnessConfig<Real> = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            HarnessConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => HarnessConfig::default(),
    };
    let cells = match cells {
        Some(filter) => filter_cells(filter)?,
        None => table_cells(),
    };
    for &(algo, regime) in &cells {
        if algo == Algorithm::PpoLog && regime == Regime::Both {
            eprintln!("note: ppo-log:both is expected to diverge and abort");
        }
    }
    let runs = expand_runs(&cells, &hc);
    eprintln!(
        "{} runs ({} cells x {} seeds), {} episodes each, {jobs} worker(s)",
        runs.len(),
        cells.len(),
        hc.track_seeds.len(),
        hc.episodes
    );
    let done = Mutex::new(0usize);
    let results = harness::run_grid_with(&runs, jobs, &|_, cfg, result| {
        let mut done = done.lock().unwrap();
        *done += 1;
        let status = match result.status {
            RunStatus::Completed => "ok".to_string(),
            RunStatus::AbortedNonFinite { episode } => format!("aborted@{episode}"),
        };
        eprintln!(
            "[{:>3}/{}] {} seed {} [{status}] {:.1}s",
            done,
            runs.len(),
            cfg.cell_id(),
            cfg.track_seed,
            result.wall_time.as_secs_f64()
        );
    });
    let paired: Vec<_> = runs.into_iter().zip(results).collect();
    let written =
        harness::emit_outputs(out, &paired).map_err(|e| format!("writing outputs: {e}"))?;
    eprintln!("wrote {} files to {}", written.len(), out.display());
    print!("{}", harness::render_summary_table(&harness::summarize(&paired)));
    Ok(())
}

fn summarize(input: &Path) -> Result<(), String> {
    let mut cells = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(input)
        .map_err(|e| format!("reading {}: {e}", input.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(cell) = name.strip_prefix("curve_").and_then(|n| n.strip_suffix(".csv")) else {
            continue;
        };
        let (algo, regime) = cell
            .split_once('_')
            .and_then(|(a, r)| Algorithm::from_name(a).zip(Regime::from_name(r)))
            .ok_or_else(|| format!("unrecognized curve file name {name:?}"))?;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("reading {}: {e}", path.display()))?;
        let columns = harness::parse_curve_csv(&text).map_err(|e| format!("{name}: {e}"))?;
        cells.push((algo, regime, columns));
    }
    if cells.is_empty() {
        return Err(format!("no curve_*.csv files in {}", input.display()));
    }
    // A column shorter than the cell's episode count is an aborted run's
    // prefix; mark it the way the live summary would.
    let episodes = cells
        .iter()
        .flat_map(|(_, _, cols)| cols.iter().map(|(_, r)| r.len()))
        .max()
        .unwrap_or(0);
    let summaries: Vec<_> = cells
        .into_iter()
        .map(|(algorithm, regime, columns)| {
            let mut finals = Vec::new();
            let mut n_aborted = 0;
            let mut short_history = false;
            for (seed, rewards) in &columns {
                if rewards.len() < episodes {
                    n_aborted += 1;
                    finals.push((*seed, None));
                    continue;
                }
                let (mean, short) = harness::final_performance(rewards)
                    .expect("curve columns at full length are non-empty");
                short_history |= short;
                finals.push((*seed, Some(mean)));
            }
            let values: Vec<Real> = finals.iter().filter_map(|&(_, v)| v).collect();
            let (mean, se) = harness::mean_and_se(&values);
            harness::CellSummary { algorithm, regime, finals, mean, se, n_aborted, short_history }
        })
        .collect();
    print!("{}", harness::render_summary_table(&summaries));
    Ok(())
}

fn gen_track(seed: u64, out: Option<&Path>) -> Result<(), String> {
    let text = Track::generate(seed).export_text();
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
