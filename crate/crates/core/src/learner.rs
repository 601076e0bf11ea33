//! Episodic RL with least-squares fitted Q-iteration and a myopic
//! exploration mapping.
//!
//! Each episode refits the Q-table from all data collected so far, samples
//! one episode with the mapped exploration policy, and appends the
//! transitions. The tabular least-squares minimizer is the per-pair mean of
//! regression targets, so the refit is done from per-pair sufficient
//! statistics (count, reward sum, next-state counts); this is exactly the
//! from-scratch regression, just O(SAH) per episode instead of O(t).

use crate::error::{Error, Result};
use crate::explore::{greedy, ExplorationMapping};
use crate::io::mdp_content_hash;
use crate::mdp::{QTable, TabularMdp};
use crate::util::{episode_seed, rng_from_seed, sample_discrete};
use serde::{Deserialize, Serialize};

/// Per-(x, a) sufficient statistics of a transition multiset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairStats {
    pub count: u64,
    pub reward_sum: f64,
    /// (next state, visit count); insertion order is deterministic.
    pub next_counts: Vec<(usize, u64)>,
}

impl PairStats {
    fn push(&mut self, reward: f64, next_state: usize) {
        self.count += 1;
        self.reward_sum += reward;
        match self.next_counts.iter_mut().find(|(x2, _)| *x2 == next_state) {
            Some((_, c)) => *c += 1,
            None => self.next_counts.push((next_state, 1)),
        }
    }
}

/// Per-step transition datasets D_h with derived visit counts.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionDataset {
    pub num_states: usize,
    pub num_actions: usize,
    /// Raw tuples (x, a, r, x') per step, in insertion order.
    pub tuples: Vec<Vec<(usize, usize, f64, usize)>>,
    /// stats[h][x][a]
    pub stats: Vec<Vec<Vec<PairStats>>>,
}

impl TransitionDataset {
    pub fn empty(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        TransitionDataset {
            num_states,
            num_actions,
            tuples: vec![Vec::new(); horizon],
            stats: vec![vec![vec![PairStats::default(); num_actions]; num_states]; horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.tuples.len()
    }

    pub fn push(&mut self, h: usize, x: usize, a: usize, r: f64, x2: usize) {
        self.tuples[h].push((x, a, r, x2));
        self.stats[h][x][a].push(r, x2);
    }

    pub fn visit_count(&self, h: usize, x: usize, a: usize) -> u64 {
        self.stats[h][x][a].count
    }
}

/// Value assigned to (h, x, a) pairs with no data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DefaultValueRule {
    Constant { value: f64 },
    RangeMax,
    RangeMin,
}

impl Default for DefaultValueRule {
    fn default() -> Self {
        DefaultValueRule::Constant { value: 0.0 }
    }
}

/// Optional dataset initialization before the first episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSeeding {
    None,
    /// One sampled transition (x, a, r, x') for every (h, x, a).
    OneSamplePerPair { seed: u64 },
}

impl Default for DatasetSeeding {
    fn default() -> Self {
        DatasetSeeding::None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub explore: ExplorationMapping,
    /// Episode count T.
    pub episodes: usize,
    /// Master seed; per-episode seeds derive from it.
    pub seed: u64,
    #[serde(default)]
    pub default_value: DefaultValueRule,
    #[serde(default)]
    pub seeding: DatasetSeeding,
    /// Per-step value range the regression clips into. Defaults to [0, 1]
    /// per step in standard reward mode, [-1, 1] in relaxed mode.
    #[serde(default)]
    pub value_range: Option<Vec<(f64, f64)>>,
}

impl LearnerConfig {
    pub fn validate(&self, m: &TabularMdp) -> Result<()> {
        self.explore.validate()?;
        let range = self.resolved_range(m);
        if range.len() != m.horizon {
            return Err(Error::InvalidArgument(
                "value_range length must equal the horizon".into(),
            ));
        }
        if let DefaultValueRule::Constant { value } = self.default_value {
            for &(lo, hi) in &range {
                if value < lo || value > hi {
                    return Err(Error::InvalidArgument(format!(
                        "default value {value} outside value range [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn resolved_range(&self, m: &TabularMdp) -> Vec<(f64, f64)> {
        match &self.value_range {
            Some(r) => r.clone(),
            None => match m.mode {
                crate::mdp::RewardRangeMode::Standard => vec![(0.0, 1.0); m.horizon],
                crate::mdp::RewardRangeMode::Relaxed => vec![(-1.0, 1.0); m.horizon],
            },
        }
    }
}

/// One row of a run log. Values come from exact DP, not Monte Carlo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode index.
    pub episode: usize,
    /// V_1 of the greedy policy of the fitted table, by exact DP.
    pub greedy_value: f64,
    /// V_1 of the exploration policy actually sampled with, by exact DP.
    pub explore_value: f64,
    pub realized_return: f64,
    pub episode_seed: u64,
    /// Fingerprint of the fitted Q-table for this episode.
    pub qtable_hash: u64,
}

/// Full log of one run of the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub records: Vec<EpisodeRecord>,
    /// Q-table fitted from all data after the final episode.
    pub final_q: QTable,
    pub env_hash: String,
    pub config: LearnerConfig,
}

/// Exact least-squares fit over the tabular class: visited pairs get the
/// clipped mean of `r + max_a' f(x', a')`, unvisited pairs the default rule.
pub fn fit_q(
    data: &TransitionDataset,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    default_value: DefaultValueRule,
    range: &[(f64, f64)],
) -> QTable {
    let mut values = vec![vec![vec![0.0; num_actions]; num_states]; horizon];
    let mut vmax_next = vec![0.0f64; num_states];
    for h in (0..horizon).rev() {
        let (lo, hi) = range[h];
        for x in 0..num_states {
            for a in 0..num_actions {
                let st = &data.stats[h][x][a];
                values[h][x][a] = if st.count > 0 {
                    let mut target_sum = st.reward_sum;
                    for &(x2, c) in &st.next_counts {
                        target_sum += c as f64 * vmax_next[x2];
                    }
                    (target_sum / st.count as f64).clamp(lo, hi)
                } else {
                    match default_value {
                        DefaultValueRule::Constant { value } => value.clamp(lo, hi),
                        DefaultValueRule::RangeMax => hi,
                        DefaultValueRule::RangeMin => lo,
                    }
                };
            }
        }
        for x in 0..num_states {
            vmax_next[x] = values[h][x].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    QTable { values, range: range.to_vec() }
}

/// Empirical squared regression loss L_h(f, f') over the step-h dataset.
pub fn squared_loss(
    data: &TransitionDataset,
    h: usize,
    f_h: &[Vec<f64>],
    f_next: Option<&[Vec<f64>]>,
) -> f64 {
    data.tuples[h]
        .iter()
        .map(|&(x, a, r, x2)| {
            let cont = match f_next {
                Some(layer) => layer[x2].iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                None => 0.0,
            };
            let d = f_h[x][a] - r - cont;
            d * d
        })
        .sum()
}

/// Dataset produced by `OneSamplePerPair` seeding: one draw of (r, x') from
/// the true distributions for every (h, x, a), in canonical pair order.
pub fn seeded_dataset(m: &TabularMdp, seed: u64) -> TransitionDataset {
    let mut data = TransitionDataset::empty(m.horizon, m.num_states, m.num_actions);
    let mut rng = rng_from_seed(seed);
    for h in 0..m.horizon {
        for x in 0..m.num_states {
            for a in 0..m.num_actions {
                let r = m.rewards[h][x][a].sample(&mut rng);
                let x2 = sample_discrete(&mut rng, &m.transitions[h][x][a]);
                data.push(h, x, a, r, x2);
            }
        }
    }
    data
}

/// Runs the full myopic-exploration RL loop for `cfg.episodes` episodes.
/// Deterministic: identical (M, cfg) produce identical logs.
pub fn run_myopic_rl(m: &TabularMdp, cfg: &LearnerConfig) -> Result<RunLog> {
    cfg.validate(m)?;
    let range = cfg.resolved_range(m);
    let mut data = match cfg.seeding {
        DatasetSeeding::None => TransitionDataset::empty(m.horizon, m.num_states, m.num_actions),
        DatasetSeeding::OneSamplePerPair { seed } => seeded_dataset(m, seed),
    };
    let mut records = Vec::with_capacity(cfg.episodes);
    for t in 1..=cfg.episodes {
        let fitted = fit_q(
            &data,
            m.horizon,
            m.num_states,
            m.num_actions,
            cfg.default_value,
            &range,
        );
        let greedy_pi = greedy(&fitted);
        let explore_pi = cfg.explore.apply(&fitted);
        let greedy_value = m.policy_value(&greedy_pi).initial_value;
        let explore_value = m.policy_value(&explore_pi).initial_value;
        let seed = episode_seed(cfg.seed, t as u64);
        let ep = m.sample_episode(&explore_pi, seed);
        for (h, step) in ep.steps.iter().enumerate() {
            data.push(h, step.state, step.action, step.reward, step.next_state);
        }
        records.push(EpisodeRecord {
            episode: t,
            greedy_value,
            explore_value,
            realized_return: ep.realized_return(),
            episode_seed: seed,
            qtable_hash: fitted.hash(),
        });
    }
    let final_q = fit_q(
        &data,
        m.horizon,
        m.num_states,
        m.num_actions,
        cfg.default_value,
        &range,
    );
    Ok(RunLog {
        records,
        final_q,
        env_hash: mdp_content_hash(m),
        config: cfg.clone(),
    })
}

/// Episodes whose greedy policy is more than `lambda` below optimal.
/// Returns the count and the 1-based episode indices.
pub fn suboptimality_census(
    log: &RunLog,
    m: &TabularMdp,
    lambda: f64,
) -> Result<(usize, Vec<usize>)> {
    let actual = mdp_content_hash(m);
    if actual != log.env_hash {
        return Err(Error::EnvHashMismatch { expected: log.env_hash.clone(), actual });
    }
    let v_star = m.optimal_values().initial_value;
    let indices: Vec<usize> = log
        .records
        .iter()
        .filter(|r| v_star - r.greedy_value > lambda)
        .map(|r| r.episode)
        .collect();
    Ok((indices.len(), indices))
}
