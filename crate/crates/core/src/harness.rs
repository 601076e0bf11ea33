//! Reproduction driver: builds environments from declarative specs, runs
//! the learner over repetitions, assembles exact regret accounting and
//! suboptimality censuses, sweeps the exploration parameter, and emits
//! machine-readable artifacts (CSV runs, JSON sidecars with content hashes).

use crate::envs::{chain_mdp, contextual_bandit, grid_world, tree_mdp, ChainSpec, GridSpec, TreeVariant};
use crate::error::{Error, Result};
use crate::explore::ExplorationMapping;
use crate::gap::{myopic_gap_tabular, BoundTable, CandidateSet, GapReport};
use crate::io::mdp_content_hash;
use crate::learner::{run_myopic_rl, suboptimality_census, LearnerConfig, RunLog};
use crate::mdp::{QTable, TabularMdp};
use crate::util::sha256_hex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Caps rayon's global pool from MYOPIC_GAP_THREADS. Call once at startup;
/// later calls are no-ops.
pub fn init_parallelism() {
    if let Ok(v) = std::env::var("MYOPIC_GAP_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Declarative environment selection, by name plus parameters or by a JSON
/// document path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum EnvSpec {
    Tree { depth: usize, variant: TreeVariant },
    Grid(GridSpec),
    Chain(ChainSpec),
    Bandit { means: Vec<Vec<f64>>, horizon: usize },
    File { path: String },
}

impl EnvSpec {
    pub fn build(&self) -> Result<TabularMdp> {
        let m = match self {
            EnvSpec::Tree { depth, variant } => tree_mdp(*depth, *variant)?.mdp,
            EnvSpec::Grid(spec) => grid_world(spec)?.mdp,
            EnvSpec::Chain(spec) => chain_mdp(spec)?,
            EnvSpec::Bandit { means, horizon } => contextual_bandit(means, *horizon)?,
            EnvSpec::File { path } => crate::io::load_mdp(&std::fs::read_to_string(path)?)?,
        };
        let report = m.validate();
        if !report.ok() {
            return Err(Error::InvalidMdp(report.violations.join("; ")));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub env: EnvSpec,
    pub learner: LearnerConfig,
    pub repetitions: usize,
    /// Explicit per-repetition seeds; defaults to 0..repetitions.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Suboptimality thresholds for the census.
    #[serde(default)]
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl ExperimentConfig {
    pub fn resolved_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.repetitions as u64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let seeds = self.resolved_seeds();
        if seeds.len() != self.repetitions {
            return Err(Error::InvalidArgument(format!(
                "{} seeds for {} repetitions",
                seeds.len(),
                self.repetitions
            )));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(Error::InvalidArgument("repetition seeds must be distinct".into()));
        }
        if self.lambda_grid.iter().any(|&l| !(0.0..=1.0).contains(&l)) {
            return Err(Error::InvalidArgument("lambda values must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretRow {
    pub episode: usize,
    pub cum_regret: f64,
    pub greedy_term: f64,
    pub explore_term: f64,
}

/// Exact regret accounting for one run. The cumulative regret is the sum
/// of its two terms by construction, so the decomposition identity holds
/// bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretReport {
    pub per_episode: Vec<RegretRow>,
    /// (lambda, episodes whose greedy policy is > lambda suboptimal).
    pub census: Vec<(f64, usize)>,
}

pub fn regret_report(
    log: &RunLog,
    m: &TabularMdp,
    lambda_grid: &[f64],
) -> Result<RegretReport> {
    let v_star = m.optimal_values().initial_value;
    let mut greedy_term = 0.0;
    let mut explore_term = 0.0;
    let per_episode = log
        .records
        .iter()
        .map(|r| {
            greedy_term += v_star - r.greedy_value;
            explore_term += r.greedy_value - r.explore_value;
            RegretRow {
                episode: r.episode,
                cum_regret: greedy_term + explore_term,
                greedy_term,
                explore_term,
            }
        })
        .collect();
    let census = lambda_grid
        .iter()
        .map(|&l| Ok((l, suboptimality_census(log, m, l)?.0)))
        .collect::<Result<_>>()?;
    Ok(RegretReport { per_episode, census })
}

#[derive(Clone, Debug)]
pub struct RepetitionResult {
    pub seed: u64,
    pub log: RunLog,
    pub regret: RegretReport,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub env_hash: String,
    pub v_star: f64,
    pub repetitions: Vec<RepetitionResult>,
}

/// Runs every repetition (concurrently; the merge order is fixed by the
/// seed list) and optionally writes artifacts to `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let m = config.env.build()?;
    let env_hash = mdp_content_hash(&m);
    let v_star = m.optimal_values().initial_value;
    let seeds = config.resolved_seeds();
    let repetitions: Vec<RepetitionResult> = seeds
        .par_iter()
        .map(|&seed| {
            let mut learner = config.learner.clone();
            learner.seed = seed;
            let log = run_myopic_rl(&m, &learner)?;
            let regret = regret_report(&log, &m, &config.lambda_grid)?;
            Ok(RepetitionResult { seed, log, regret })
        })
        .collect::<Result<_>>()?;
    let result = ExperimentResult {
        config: config.clone(),
        env_hash,
        v_star,
        repetitions,
    };
    if let Some(dir) = &config.out_dir {
        write_artifacts(&result, Path::new(dir))?;
    }
    Ok(result)
}

/// CSV for one run: one row per episode with exact DP values.
pub fn render_run_csv(log: &RunLog, v_star: f64) -> String {
    let mut out = String::from("episode,greedy_value,explore_value,realized_return,subopt_gap\n");
    for r in &log.records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.episode,
            r.greedy_value,
            r.explore_value,
            r.realized_return,
            v_star - r.greedy_value
        ));
    }
    out
}

pub fn render_regret_csv(report: &RegretReport) -> String {
    let mut out = String::from("episode,cum_regret,greedy_term,explore_term\n");
    for r in &report.per_episode {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.episode, r.cum_regret, r.greedy_term, r.explore_term
        ));
    }
    out
}

pub fn render_census_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("seed,lambda,count\n");
    for rep in &result.repetitions {
        for &(l, c) in &rep.regret.census {
            out.push_str(&format!("{},{},{}\n", rep.seed, l, c));
        }
    }
    out
}

/// Writes the artifact tree: config echo, per-repetition run and regret
/// CSVs with JSON sidecars, a census table, and a summary with content
/// hashes of every emitted file.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut hashes: Vec<(String, String)> = Vec::new();
    let mut write = |name: String, bytes: &[u8]| -> Result<()> {
        std::fs::write(dir.join(&name), bytes)?;
        hashes.push((name, sha256_hex(bytes)));
        Ok(())
    };

    let config_json = serde_json::to_string_pretty(&result.config)?;
    write("config.json".into(), config_json.as_bytes())?;

    for rep in &result.repetitions {
        let run_csv = render_run_csv(&rep.log, result.v_star);
        write(format!("run_{}.csv", rep.seed), run_csv.as_bytes())?;
        let regret_csv = render_regret_csv(&rep.regret);
        write(format!("regret_{}.csv", rep.seed), regret_csv.as_bytes())?;
        let sidecar = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "seed": rep.seed,
            "env_hash": result.env_hash,
            "learner": rep.log.config,
            "final_q": rep.log.final_q,
            "census": rep.regret.census,
        });
        write(
            format!("run_{}.json", rep.seed),
            serde_json::to_string_pretty(&sidecar)?.as_bytes(),
        )?;
    }
    let census_csv = render_census_csv(result);
    write("census.csv".into(), census_csv.as_bytes())?;

    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "env_hash": result.env_hash,
        "v_star": result.v_star,
        "repetitions": result.repetitions.len(),
        "artifacts": hashes.iter().map(|(n, h)| serde_json::json!({"file": n, "sha256": h})).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Epsilon sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    /// Mean over repetitions of the final cumulative regret.
    pub final_regret: f64,
    pub final_greedy_term: f64,
    pub final_explore_term: f64,
    /// Mean census count per lambda, aligned with the config grid.
    pub census: Vec<(f64, f64)>,
}

/// One experiment per epsilon on a shared environment; exposes the
/// exploration/estimation trade-off.
pub fn sweep_epsilon(config: &ExperimentConfig, eps_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if eps_grid.iter().any(|&e| !(0.0..=1.0).contains(&e) || e == 0.0) {
        return Err(Error::InvalidArgument("eps grid must lie in (0, 1]".into()));
    }
    eps_grid
        .iter()
        .map(|&eps| {
            let mut cfg = config.clone();
            cfg.out_dir = None;
            cfg.learner.explore = ExplorationMapping::EpsGreedy { eps };
            let result = run_experiment(&cfg)?;
            let n = result.repetitions.len().max(1) as f64;
            let mut final_regret = 0.0;
            let mut final_greedy = 0.0;
            let mut final_explore = 0.0;
            let mut census = vec![0.0; cfg.lambda_grid.len()];
            for rep in &result.repetitions {
                if let Some(last) = rep.regret.per_episode.last() {
                    final_regret += last.cum_regret;
                    final_greedy += last.greedy_term;
                    final_explore += last.explore_term;
                }
                for (i, &(_, c)) in rep.regret.census.iter().enumerate() {
                    census[i] += c as f64;
                }
            }
            Ok(SweepRow {
                eps,
                final_regret: final_regret / n,
                final_greedy_term: final_greedy / n,
                final_explore_term: final_explore / n,
                census: cfg
                    .lambda_grid
                    .iter()
                    .zip(census)
                    .map(|(&l, c)| (l, c / n))
                    .collect(),
            })
        })
        .collect()
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("eps,final_regret,final_greedy_term,final_explore_term\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.eps, r.final_regret, r.final_greedy_term, r.final_explore_term
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Bounds side-by-side
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BoundsComparison {
    pub computed_alpha: f64,
    pub suboptimality_gap: f64,
    pub bounds: BoundTable,
    /// True when every attached bound is <= computed alpha + 1e-9 (always
    /// the case in exhaustive mode; certified mode may under-shoot).
    pub dominated: bool,
}

/// Computed gap next to every applicable closed-form lower bound.
pub fn report_bounds(
    m: &TabularMdp,
    f: &QTable,
    phi: &ExplorationMapping,
    candidates: &CandidateSet,
) -> Result<(GapReport, BoundsComparison)> {
    let report = myopic_gap_tabular(m, f, phi, candidates)?;
    let bounds = report.bounds.clone();
    let dominated = [
        bounds.likelihood_ratio,
        bounds.eps_greedy_worst_case,
        bounds.softmax_worst_case,
        bounds.action_variation,
        bounds.contextual_bandit,
    ]
    .into_iter()
    .flatten()
    .all(|b| b <= report.alpha + 1e-9);
    let cmp = BoundsComparison {
        computed_alpha: report.alpha,
        suboptimality_gap: report.suboptimality_gap,
        bounds,
        dominated,
    };
    Ok((report, cmp))
}

/// Default exploration parameter ((h H A^h d / T)^{1/(2+h)}, clamped to
/// (0, 1]) for a structural exponent h supplied by the caller.
pub fn default_epsilon(h: f64, horizon: usize, num_actions: usize, d: f64, episodes: usize) -> f64 {
    let a = num_actions as f64;
    let raw = (h * horizon as f64 * a.powf(h) * d / episodes as f64).powf(1.0 / (2.0 + h));
    raw.clamp(f64::MIN_POSITIVE, 1.0)
}
