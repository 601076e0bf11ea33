//! Greedy-policy extraction and the myopic exploration mappings that turn a
//! point Q-estimate into a sampling policy (epsilon-greedy, softmax). The
//! mappings use no uncertainty information and are stationary across
//! episodes.

use crate::error::{Error, Result};
use crate::mdp::{QTable, StochasticPolicy};
use serde::{Deserialize, Serialize};

/// Exploration mapping applied per (h, x) to a Q-table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplorationMapping {
    /// (1 - eps) * onehot(greedy) + eps / A uniform, eps in (0, 1].
    EpsGreedy { eps: f64 },
    /// Probabilities proportional to exp(beta * f_h(x, a)), beta >= 0.
    Softmax { beta: f64 },
    /// Pure exploitation: the greedy policy itself.
    None,
}

impl ExplorationMapping {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExplorationMapping::EpsGreedy { eps } => {
                if !(eps > 0.0 && eps <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "eps must be in (0, 1], got {eps}"
                    )));
                }
            }
            ExplorationMapping::Softmax { beta } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "beta must be finite and >= 0, got {beta}"
                    )));
                }
            }
            ExplorationMapping::None => {}
        }
        Ok(())
    }

    /// Applies the mapping to `f`.
    pub fn apply(&self, f: &QTable) -> StochasticPolicy {
        match *self {
            ExplorationMapping::EpsGreedy { eps } => eps_greedy(f, eps),
            ExplorationMapping::Softmax { beta } => softmax(f, beta),
            ExplorationMapping::None => greedy(f),
        }
    }
}

fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0usize;
    for (a, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = a;
        }
    }
    best
}

/// One-hot greedy policy of `f`; ties break to the lowest action index.
pub fn greedy(f: &QTable) -> StochasticPolicy {
    let probs = f
        .values
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|row| {
                    let mut p = vec![0.0; row.len()];
                    p[argmax_lowest(row)] = 1.0;
                    p
                })
                .collect()
        })
        .collect();
    StochasticPolicy { probs }
}

/// Epsilon-greedy mixture of the greedy policy with the uniform policy.
pub fn eps_greedy(f: &QTable, eps: f64) -> StochasticPolicy {
    let probs = f
        .values
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|row| {
                    let a_count = row.len() as f64;
                    let star = argmax_lowest(row);
                    (0..row.len())
                        .map(|a| {
                            let base = eps / a_count;
                            if a == star {
                                1.0 - eps + base
                            } else {
                                base
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    StochasticPolicy { probs }
}

/// Softmax policy with max-subtraction for numerical stability.
pub fn softmax(f: &QTable, beta: f64) -> StochasticPolicy {
    let probs = f
        .values
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|row| {
                    let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let weights: Vec<f64> =
                        row.iter().map(|&v| (beta * (v - top)).exp()).collect();
                    let sum: f64 = weights.iter().sum();
                    weights.into_iter().map(|w| w / sum).collect()
                })
                .collect()
        })
        .collect();
    StochasticPolicy { probs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::QTable;
    use crate::testing::{random_mdp, random_qtable};

    fn single_state_table(row: Vec<f64>) -> QTable {
        QTable { values: vec![vec![row]], range: vec![(0.0, 1.0)] }
    }

    #[test]
    fn greedy_picks_argmax() {
        let f = single_state_table(vec![0.2, 0.9]);
        assert_eq!(greedy(&f).probs[0][0], vec![0.0, 1.0]);
    }

    #[test]
    fn greedy_tie_breaks_to_lowest_index() {
        let f = single_state_table(vec![0.5, 0.5]);
        assert_eq!(greedy(&f).probs[0][0], vec![1.0, 0.0]);
    }

    #[test]
    fn eps_one_is_uniform() {
        let f = single_state_table(vec![0.9, 0.1, 0.3]);
        let pi = eps_greedy(&f, 1.0);
        for &p in &pi.probs[0][0] {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eps_greedy_matches_formula() {
        let f = single_state_table(vec![0.2, 0.9]);
        let pi = eps_greedy(&f, 0.1);
        assert!((pi.probs[0][0][1] - 0.95).abs() < 1e-15);
        assert!((pi.probs[0][0][0] - 0.05).abs() < 1e-15);

        let f4 = single_state_table(vec![0.9, 0.1, 0.2, 0.3]);
        let pi4 = eps_greedy(&f4, 0.5);
        assert!((pi4.probs[0][0][0] - 0.625).abs() < 1e-15);
        for a in 1..4 {
            assert!((pi4.probs[0][0][a] - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_zero_beta_is_uniform() {
        let f = single_state_table(vec![0.9, 0.0]);
        let pi = softmax(&f, 0.0);
        assert_eq!(pi.probs[0][0], vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_ln3_case() {
        let f = single_state_table(vec![1.0, 0.0]);
        let pi = softmax(&f, 3.0f64.ln());
        assert!((pi.probs[0][0][0] - 0.75).abs() < 1e-12);
        assert!((pi.probs[0][0][1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let f = single_state_table(vec![0.3, 0.8, 0.1]);
        let mut g = f.clone();
        for v in &mut g.values[0][0] {
            *v += 0.37;
        }
        let a = softmax(&f, 2.5);
        let b = softmax(&g, 2.5);
        for i in 0..3 {
            assert!((a.probs[0][0][i] - b.probs[0][0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn produced_policies_are_valid_distributions() {
        let m = random_mdp(4, 3, 3, 5);
        let f = random_qtable(&m, 6);
        for phi in [
            ExplorationMapping::EpsGreedy { eps: 0.3 },
            ExplorationMapping::Softmax { beta: 4.0 },
            ExplorationMapping::None,
        ] {
            let pi = phi.apply(&f);
            pi.validate(&m).unwrap();
        }
    }

    #[test]
    fn eps_greedy_min_probability_is_eps_over_a() {
        let m = random_mdp(3, 4, 2, 9);
        let f = random_qtable(&m, 10);
        let pi = eps_greedy(&f, 0.2);
        for layer in &pi.probs {
            for row in layer {
                for &p in row {
                    assert!(p >= 0.2 / 4.0 - 1e-15);
                }
            }
        }
    }

    #[test]
    fn positive_scaling_preserves_greedy() {
        let m = random_mdp(3, 3, 3, 11);
        let f = random_qtable(&m, 12);
        let mut g = f.clone();
        for layer in &mut g.values {
            for row in layer {
                for v in row.iter_mut() {
                    *v *= 7.3;
                }
            }
        }
        assert_eq!(greedy(&f), greedy(&g));
        // softmax argmax agrees with greedy where the argmax is unique
        let sm = softmax(&f, 5.0);
        let gr = greedy(&f);
        for h in 0..f.values.len() {
            for x in 0..f.values[h].len() {
                let row = &f.values[h][x];
                let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let unique = row.iter().filter(|&&v| v == top).count() == 1;
                if unique {
                    let sm_arg = sm.probs[h][x]
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .unwrap()
                        .0;
                    assert_eq!(gr.probs[h][x][sm_arg], 1.0);
                }
            }
        }
    }
}
