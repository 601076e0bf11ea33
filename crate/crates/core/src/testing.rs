//! Seeded random instance generators. Exposed so integration tests and the
//! acceptance suite can draw the same reproducible instances as unit tests.

use crate::mdp::{RewardDist, RewardRangeMode, StochasticPolicy, TabularMdp, QTable};
use crate::util::rng_from_seed;
use rand::Rng;

/// Random dense MDP with strictly positive transition rows and constant
/// per-pair rewards scaled so the episode budget stays below 1.
pub fn random_mdp(num_states: usize, num_actions: usize, horizon: usize, seed: u64) -> TabularMdp {
    let mut rng = rng_from_seed(seed);
    let mut transitions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let reward_cap = 0.9 / horizon as f64;
    for _ in 0..horizon {
        let mut t_layer = Vec::with_capacity(num_states);
        let mut r_layer = Vec::with_capacity(num_states);
        for _ in 0..num_states {
            let mut t_row = Vec::with_capacity(num_actions);
            let mut r_row = Vec::with_capacity(num_actions);
            for _ in 0..num_actions {
                let raw: Vec<f64> = (0..num_states).map(|_| rng.gen::<f64>() + 0.05).collect();
                let sum: f64 = raw.iter().sum();
                t_row.push(
                    raw.iter()
                        .enumerate()
                        .map(|(x2, &w)| (x2, w / sum))
                        .collect::<Vec<_>>(),
                );
                r_row.push(RewardDist::constant(rng.gen::<f64>() * reward_cap));
            }
            t_layer.push(t_row);
            r_layer.push(r_row);
        }
        transitions.push(t_layer);
        rewards.push(r_layer);
    }
    TabularMdp {
        num_states,
        num_actions,
        horizon,
        initial_state: 0,
        initial_dist: None,
        transitions,
        rewards,
        mode: RewardRangeMode::Standard,
    }
}

/// Random stochastic policy with strictly positive rows.
pub fn random_policy(m: &TabularMdp, seed: u64) -> StochasticPolicy {
    let mut rng = rng_from_seed(seed);
    let probs = (0..m.horizon)
        .map(|_| {
            (0..m.num_states)
                .map(|_| {
                    let raw: Vec<f64> =
                        (0..m.num_actions).map(|_| rng.gen::<f64>() + 0.05).collect();
                    let sum: f64 = raw.iter().sum();
                    raw.iter().map(|&w| w / sum).collect()
                })
                .collect()
        })
        .collect();
    StochasticPolicy { probs }
}

/// Random deterministic policy.
pub fn random_deterministic_policy(m: &TabularMdp, seed: u64) -> StochasticPolicy {
    let mut rng = rng_from_seed(seed);
    let actions: Vec<Vec<usize>> = (0..m.horizon)
        .map(|_| (0..m.num_states).map(|_| rng.gen_range(0..m.num_actions)).collect())
        .collect();
    StochasticPolicy::deterministic(m.horizon, m.num_states, m.num_actions, |h, x| actions[h][x])
}

/// Random Q-table with entries in [0, 1].
pub fn random_qtable(m: &TabularMdp, seed: u64) -> QTable {
    let mut rng = rng_from_seed(seed);
    let values = (0..m.horizon)
        .map(|_| {
            (0..m.num_states)
                .map(|_| (0..m.num_actions).map(|_| rng.gen::<f64>()).collect())
                .collect()
        })
        .collect();
    QTable { values, range: vec![(0.0, 1.0); m.horizon] }
}
