//! Finite episodic MDPs with exact dynamic-programming analysis.
//!
//! An MDP here is `(X, A, H, P, R)` with a fixed start state (or an optional
//! start distribution), per-step transition kernels, and finite discrete
//! reward distributions. Everything downstream (occupancies, values, Bellman
//! residuals, exploration gaps) is computed exactly in f64, so the only
//! stochastic component of the whole crate is episode sampling.

use crate::error::{Error, Result};
use crate::util::{rng_from_seed, sample_discrete};
use serde::{Deserialize, Serialize};

pub const PROB_TOL: f64 = 1e-12;
pub const BUDGET_TOL: f64 = 1e-12;

/// Reward-range regime. `Standard` enforces nonnegative rewards and a total
/// episode return of at most 1 along every trajectory; `Relaxed` admits
/// shaped rewards with support in [-1, 1] and no episode budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardRangeMode {
    Standard,
    Relaxed,
}

/// Finite discrete reward distribution: support values with probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardDist {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl RewardDist {
    pub fn constant(v: f64) -> Self {
        RewardDist { support: vec![v], probs: vec![1.0] }
    }

    pub fn bernoulli(p: f64) -> Self {
        RewardDist { support: vec![0.0, 1.0], probs: vec![1.0 - p, p] }
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(s, p)| s * p).sum()
    }

    pub fn max_support(&self) -> f64 {
        self.support.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        let entries: Vec<(usize, f64)> =
            self.probs.iter().cloned().enumerate().collect();
        self.support[sample_discrete(rng, &entries)]
    }

    /// Shifts every support value by `delta` (used by potential-based shaping).
    pub fn shifted(&self, delta: f64) -> Self {
        RewardDist {
            support: self.support.iter().map(|s| s + delta).collect(),
            probs: self.probs.clone(),
        }
    }
}

/// Sparse transition row: (next state, probability) with positive entries.
pub type TransitionRow = Vec<(usize, f64)>;

/// Tabular episodic MDP. Transitions are stored sparsely per (h, x, a);
/// rewards densely as finite discrete distributions.
#[derive(Clone, Debug)]
pub struct TabularMdp {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    /// Canonical start state; when `initial_dist` is set this is the
    /// lowest-index state with positive initial mass.
    pub initial_state: usize,
    /// Optional start distribution over states (e.g. uniform over copies).
    pub initial_dist: Option<Vec<f64>>,
    /// `transitions[h][x][a]` is a probability vector over next states.
    pub transitions: Vec<Vec<Vec<TransitionRow>>>,
    /// `rewards[h][x][a]` is a finite discrete reward distribution.
    pub rewards: Vec<Vec<Vec<RewardDist>>>,
    pub mode: RewardRangeMode,
}

/// Non-stationary stochastic policy: `probs[h][x]` is a distribution over
/// actions. Deterministic policies are one-hot rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticPolicy {
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl StochasticPolicy {
    pub fn deterministic(horizon: usize, num_states: usize, num_actions: usize,
                         action: impl Fn(usize, usize) -> usize) -> Self {
        let probs = (0..horizon)
            .map(|h| {
                (0..num_states)
                    .map(|x| {
                        let mut row = vec![0.0; num_actions];
                        row[action(h, x)] = 1.0;
                        row
                    })
                    .collect()
            })
            .collect();
        StochasticPolicy { probs }
    }

    pub fn uniform(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let row = vec![1.0 / num_actions as f64; num_actions];
        StochasticPolicy {
            probs: vec![vec![row; num_states]; horizon],
        }
    }

    pub fn action_probs(&self, h: usize, x: usize) -> &[f64] {
        &self.probs[h][x]
    }

    /// For one-hot rows, the action taken at (h, x).
    pub fn action_at(&self, h: usize, x: usize) -> usize {
        self.probs[h][x]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    }

    pub fn validate(&self, m: &TabularMdp) -> Result<()> {
        if self.probs.len() != m.horizon {
            return Err(Error::InvalidArgument(format!(
                "policy has {} steps, MDP horizon is {}",
                self.probs.len(),
                m.horizon
            )));
        }
        for (h, layer) in self.probs.iter().enumerate() {
            if layer.len() != m.num_states {
                return Err(Error::InvalidArgument(format!(
                    "policy step {} covers {} states, MDP has {}",
                    h + 1,
                    layer.len(),
                    m.num_states
                )));
            }
            for (x, row) in layer.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > PROB_TOL || row.iter().any(|&p| p < 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "policy row (h={}, x={}) sums to {}",
                        h + 1,
                        x,
                        sum
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStep {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// One sampled episode: H steps plus the seed that generated them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub seed: u64,
    pub steps: Vec<EpisodeStep>,
}

impl Episode {
    pub fn realized_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Occupancy measure mu[h][x][a] = P_pi(x_h = x, a_h = a).
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyTensor {
    pub mu: Vec<Vec<Vec<f64>>>,
}

impl OccupancyTensor {
    pub fn slice_sum(&self, h: usize) -> f64 {
        self.mu[h].iter().flatten().sum()
    }
}

/// Candidate value function f = {f_h}: one real per (h, x, a) with a closed
/// per-step value range. Q^pi, Q*, and Bellman-residual tables reuse the
/// same shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    /// `values[h][x][a]`, h in 1..H.
    pub values: Vec<Vec<Vec<f64>>>,
    /// Closed interval per step; entries must lie inside.
    pub range: Vec<(f64, f64)>,
}

impl QTable {
    pub fn zeros(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        QTable {
            values: vec![vec![vec![0.0; num_actions]; num_states]; horizon],
            range: vec![(0.0, 1.0); horizon],
        }
    }

    pub fn with_range(mut self, range: Vec<(f64, f64)>) -> Self {
        self.range = range;
        self
    }

    pub fn in_range(&self) -> bool {
        self.values.iter().zip(&self.range).all(|(layer, &(lo, hi))| {
            layer
                .iter()
                .flatten()
                .all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12)
        })
    }

    pub fn hash(&self) -> u64 {
        crate::util::fnv1a_f64(self.values.iter().flatten().flatten().cloned())
    }
}

/// Validation outcome: empty `violations` means the MDP satisfies every
/// structural invariant of its declared mode.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// Worst-case cumulative reward over all trajectories (max-support DP).
    pub max_return: f64,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Q^pi / V^pi tables plus the start-state value.
#[derive(Clone, Debug)]
pub struct PolicyValues {
    /// q[h][x][a], h in 1..H.
    pub q: Vec<Vec<Vec<f64>>>,
    /// v[h][x], h in 1..H+1 (terminal layer all zero).
    pub v: Vec<Vec<f64>>,
    pub initial_value: f64,
}

/// Q*, V*, and a greedy optimal policy (ties to the lowest action index).
#[derive(Clone, Debug)]
pub struct OptimalValues {
    pub q: Vec<Vec<Vec<f64>>>,
    pub v: Vec<Vec<f64>>,
    pub greedy: StochasticPolicy,
    pub initial_value: f64,
}

/// Bellman residual tables E_h f and squared residuals E_h^2 f.
#[derive(Clone, Debug)]
pub struct BellmanResiduals {
    pub residual: Vec<Vec<Vec<f64>>>,
    pub squared: Vec<Vec<Vec<f64>>>,
}

impl TabularMdp {
    /// Start distribution as (state, probability) pairs.
    pub fn initial_support(&self) -> Vec<(usize, f64)> {
        match &self.initial_dist {
            Some(d) => d
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(x, &p)| (x, p))
                .collect(),
            None => vec![(self.initial_state, 1.0)],
        }
    }

    pub fn mean_reward(&self, h: usize, x: usize, a: usize) -> f64 {
        self.rewards[h][x][a].mean()
    }

    /// States reachable at each step under some action sequence.
    pub fn reachable(&self) -> Vec<Vec<bool>> {
        let mut reach = vec![vec![false; self.num_states]; self.horizon];
        for (x, _) in self.initial_support() {
            reach[0][x] = true;
        }
        for h in 0..self.horizon.saturating_sub(1) {
            for x in 0..self.num_states {
                if !reach[h][x] {
                    continue;
                }
                for a in 0..self.num_actions {
                    for &(x2, p) in &self.transitions[h][x][a] {
                        if p > 0.0 {
                            reach[h + 1][x2] = true;
                        }
                    }
                }
            }
        }
        reach
    }

    /// Structural validation plus the episode-budget check.
    ///
    /// The budget check is a backward DP over max-support rewards:
    /// W_{H+1} = 0, W_h(x) = max_a [max support R_h(x,a) + max_{x': P>0} W_{h+1}(x')].
    /// Standard mode requires W_1(x_init) <= 1 + 1e-12 and nonnegative supports.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let shape_ok = self.transitions.len() == self.horizon
            && self.rewards.len() == self.horizon
            && self
                .transitions
                .iter()
                .chain(std::iter::empty())
                .all(|layer| layer.len() == self.num_states)
            && self.rewards.iter().all(|layer| layer.len() == self.num_states);
        if !shape_ok {
            violations.push("table shapes do not match (S, A, H)".to_string());
            return ValidationReport { violations, max_return: f64::NAN };
        }

        for h in 0..self.horizon {
            for x in 0..self.num_states {
                if self.transitions[h][x].len() != self.num_actions
                    || self.rewards[h][x].len() != self.num_actions
                {
                    violations.push(format!("(h={}, x={}) has wrong action count", h + 1, x));
                    continue;
                }
                for a in 0..self.num_actions {
                    let row = &self.transitions[h][x][a];
                    let mut sum = 0.0;
                    for &(x2, p) in row {
                        if x2 >= self.num_states {
                            violations.push(format!(
                                "transition (h={}, x={}, a={}) targets out-of-range state {}",
                                h + 1, x, a, x2
                            ));
                        }
                        if p < 0.0 {
                            violations.push(format!(
                                "transition (h={}, x={}, a={}) has negative probability {}",
                                h + 1, x, a, p
                            ));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > PROB_TOL {
                        violations.push(format!(
                            "transition row (h={}, x={}, a={}) sums to {}",
                            h + 1, x, a, sum
                        ));
                    }

                    let r = &self.rewards[h][x][a];
                    if r.support.len() != r.probs.len() || r.support.is_empty() {
                        violations.push(format!(
                            "reward (h={}, x={}, a={}) malformed support",
                            h + 1, x, a
                        ));
                        continue;
                    }
                    let psum: f64 = r.probs.iter().sum();
                    if (psum - 1.0).abs() > PROB_TOL || r.probs.iter().any(|&p| p < 0.0) {
                        violations.push(format!(
                            "reward probabilities (h={}, x={}, a={}) sum to {}",
                            h + 1, x, a, psum
                        ));
                    }
                    match self.mode {
                        RewardRangeMode::Standard => {
                            if r.support.iter().any(|&s| s < 0.0) {
                                violations.push(format!(
                                    "negative reward support at (h={}, x={}, a={}) in standard mode",
                                    h + 1, x, a
                                ));
                            }
                        }
                        RewardRangeMode::Relaxed => {
                            if r.support.iter().any(|&s| !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&s)) {
                                violations.push(format!(
                                    "reward support outside [-1, 1] at (h={}, x={}, a={})",
                                    h + 1, x, a
                                ));
                            }
                        }
                    }
                }
            }
        }

        if let Some(d) = &self.initial_dist {
            let sum: f64 = d.iter().sum();
            if d.len() != self.num_states || (sum - 1.0).abs() > PROB_TOL || d.iter().any(|&p| p < 0.0) {
                violations.push(format!("initial distribution sums to {}", sum));
            }
        } else if self.initial_state >= self.num_states {
            violations.push("initial state out of range".to_string());
        }

        // Worst-case cumulative reward regardless of transition probabilities
        // (any positive-probability branch counts).
        let mut w_next = vec![0.0f64; self.num_states];
        for h in (0..self.horizon).rev() {
            let mut w = vec![f64::NEG_INFINITY; self.num_states];
            for x in 0..self.num_states {
                for a in 0..self.num_actions.min(self.transitions[h][x].len()) {
                    let cont = self.transitions[h][x][a]
                        .iter()
                        .filter(|&&(_, p)| p > 0.0)
                        .map(|&(x2, _)| w_next[x2.min(self.num_states - 1)])
                        .fold(f64::NEG_INFINITY, f64::max);
                    let cont = if cont.is_finite() { cont } else { 0.0 };
                    let val = self.rewards[h][x][a].max_support() + cont;
                    if val > w[x] {
                        w[x] = val;
                    }
                }
                if !w[x].is_finite() {
                    w[x] = 0.0;
                }
            }
            w_next = w;
        }
        let max_return = self
            .initial_support()
            .iter()
            .map(|&(x, _)| w_next[x])
            .fold(f64::NEG_INFINITY, f64::max);

        if self.mode == RewardRangeMode::Standard && max_return > 1.0 + BUDGET_TOL {
            violations.push(format!(
                "episode budget violated: worst-case return {} exceeds 1",
                max_return
            ));
        }

        ValidationReport { violations, max_return }
    }

    /// Samples one episode under `pi`. Deterministic given `seed`.
    pub fn sample_episode(&self, pi: &StochasticPolicy, seed: u64) -> Episode {
        let mut rng = rng_from_seed(seed);
        let mut state = match &self.initial_dist {
            Some(d) => {
                let entries: Vec<(usize, f64)> = d.iter().cloned().enumerate().collect();
                sample_discrete(&mut rng, &entries)
            }
            None => self.initial_state,
        };
        let mut steps = Vec::with_capacity(self.horizon);
        for h in 0..self.horizon {
            let row = pi.action_probs(h, state);
            let entries: Vec<(usize, f64)> = row.iter().cloned().enumerate().collect();
            let action = sample_discrete(&mut rng, &entries);
            let reward = self.rewards[h][state][action].sample(&mut rng);
            let next_state = sample_discrete(&mut rng, &self.transitions[h][state][action]);
            steps.push(EpisodeStep { state, action, reward, next_state });
            state = next_state;
        }
        Episode { seed, steps }
    }

    /// Exact occupancy measure of `pi` by forward recursion.
    pub fn occupancy(&self, pi: &StochasticPolicy) -> OccupancyTensor {
        let mut mu = vec![vec![vec![0.0; self.num_actions]; self.num_states]; self.horizon];
        let mut state_dist = vec![0.0; self.num_states];
        for (x, p) in self.initial_support() {
            state_dist[x] = p;
        }
        for h in 0..self.horizon {
            let mut next_dist = vec![0.0; self.num_states];
            for x in 0..self.num_states {
                let dx = state_dist[x];
                if dx == 0.0 {
                    continue;
                }
                for a in 0..self.num_actions {
                    let pa = pi.probs[h][x][a];
                    if pa == 0.0 {
                        continue;
                    }
                    let m = dx * pa;
                    mu[h][x][a] = m;
                    for &(x2, p) in &self.transitions[h][x][a] {
                        next_dist[x2] += m * p;
                    }
                }
            }
            state_dist = next_dist;
        }
        OccupancyTensor { mu }
    }

    /// Exact policy evaluation by backward recursion.
    pub fn policy_value(&self, pi: &StochasticPolicy) -> PolicyValues {
        let mut v = vec![vec![0.0; self.num_states]; self.horizon + 1];
        let mut q = vec![vec![vec![0.0; self.num_actions]; self.num_states]; self.horizon];
        for h in (0..self.horizon).rev() {
            for x in 0..self.num_states {
                let mut vx = 0.0;
                for a in 0..self.num_actions {
                    let mut qa = self.mean_reward(h, x, a);
                    for &(x2, p) in &self.transitions[h][x][a] {
                        qa += p * v[h + 1][x2];
                    }
                    q[h][x][a] = qa;
                    vx += pi.probs[h][x][a] * qa;
                }
                v[h][x] = vx;
            }
        }
        let initial_value = self
            .initial_support()
            .iter()
            .map(|&(x, p)| p * v[0][x])
            .sum();
        PolicyValues { q, v, initial_value }
    }

    /// Backward value iteration; greedy ties break to the lowest action index.
    pub fn optimal_values(&self) -> OptimalValues {
        let mut v = vec![vec![0.0; self.num_states]; self.horizon + 1];
        let mut q = vec![vec![vec![0.0; self.num_actions]; self.num_states]; self.horizon];
        let mut actions = vec![vec![0usize; self.num_states]; self.horizon];
        for h in (0..self.horizon).rev() {
            for x in 0..self.num_states {
                let mut best = f64::NEG_INFINITY;
                let mut best_a = 0usize;
                for a in 0..self.num_actions {
                    let mut qa = self.mean_reward(h, x, a);
                    for &(x2, p) in &self.transitions[h][x][a] {
                        qa += p * v[h + 1][x2];
                    }
                    q[h][x][a] = qa;
                    if qa > best {
                        best = qa;
                        best_a = a;
                    }
                }
                v[h][x] = best;
                actions[h][x] = best_a;
            }
        }
        let greedy = StochasticPolicy::deterministic(
            self.horizon,
            self.num_states,
            self.num_actions,
            |h, x| actions[h][x],
        );
        let initial_value = self
            .initial_support()
            .iter()
            .map(|&(x, p)| p * v[0][x])
            .sum();
        OptimalValues { q, v, greedy, initial_value }
    }

    /// One application of the Bellman operator at step `h` (1-based step is
    /// `h + 1`): (T_h f)(x,a) = mean R_h(x,a) + sum_x' P_h(x'|x,a) max_a' f(x',a').
    /// `f_next` is the layer at h+1; pass an empty slice for h = H.
    pub fn bellman_apply(&self, h: usize, f_next: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let vmax: Vec<f64> = if f_next.is_empty() {
            vec![0.0; self.num_states]
        } else {
            f_next
                .iter()
                .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect()
        };
        (0..self.num_states)
            .map(|x| {
                (0..self.num_actions)
                    .map(|a| {
                        let mut t = self.mean_reward(h, x, a);
                        for &(x2, p) in &self.transitions[h][x][a] {
                            t += p * vmax[x2];
                        }
                        t
                    })
                    .collect()
            })
            .collect()
    }

    /// Bellman residuals E_h f = f_h - T_h f_{h+1} and their squares,
    /// with the convention f_{H+1} = 0.
    pub fn bellman_residual(&self, f: &QTable) -> BellmanResiduals {
        let mut residual = Vec::with_capacity(self.horizon);
        let mut squared = Vec::with_capacity(self.horizon);
        for h in 0..self.horizon {
            let applied = if h + 1 < self.horizon {
                self.bellman_apply(h, &f.values[h + 1])
            } else {
                self.bellman_apply(h, &[])
            };
            let layer: Vec<Vec<f64>> = (0..self.num_states)
                .map(|x| {
                    (0..self.num_actions)
                        .map(|a| f.values[h][x][a] - applied[x][a])
                        .collect()
                })
                .collect();
            let sq = layer
                .iter()
                .map(|row| row.iter().map(|&e| e * e).collect())
                .collect();
            residual.push(layer);
            squared.push(sq);
        }
        BellmanResiduals { residual, squared }
    }

    /// E_pi[E_h f] and E_pi[E_h^2 f] per step, via exact occupancies.
    pub fn residual_expectations(
        &self,
        f: &QTable,
        pi: &StochasticPolicy,
    ) -> (Vec<f64>, Vec<f64>) {
        let res = self.bellman_residual(f);
        let occ = self.occupancy(pi);
        let dot = |table: &Vec<Vec<Vec<f64>>>| -> Vec<f64> {
            (0..self.horizon)
                .map(|h| {
                    let mut acc = 0.0;
                    for x in 0..self.num_states {
                        for a in 0..self.num_actions {
                            acc += occ.mu[h][x][a] * table[h][x][a];
                        }
                    }
                    acc
                })
                .collect()
        };
        (dot(&res.residual), dot(&res.squared))
    }

    /// Q* wrapped as a `QTable` with per-step ranges wide enough to hold it.
    pub fn q_star_table(&self) -> QTable {
        let opt = self.optimal_values();
        let range = match self.mode {
            RewardRangeMode::Standard => vec![(0.0, 1.0); self.horizon],
            RewardRangeMode::Relaxed => vec![(-1.0 * self.horizon as f64, self.horizon as f64); self.horizon],
        };
        QTable { values: opt.q, range }
    }
}
