//! Brute-force distributional Eluder dimensions on finite function grids
//! and finite measure families, at toy scale.
//!
//! A measure nu is eps'-independent of predecessors mu_1..mu_n w.r.t. a
//! function list G when some g in G has sqrt(sum_i E_{mu_i}[g]^2) <= eps'
//! but |E_nu[g]| > eps'. The distributional Eluder dimension at eps is the
//! longest sequence from the family in which every element is
//! eps'-independent of its prefix for a single eps' >= eps.
//!
//! The search tracks the feasible eps' window [lo, hi) directly: each
//! (measure, witness) choice intersects it with [prefix norm, |E_nu[g]|).
//! The window endpoints are exactly the finite thresholds induced by the
//! expectation matrix, so this is exact. A measure can never repeat inside
//! a valid sequence (its own prefix norm would exceed any feasible eps'),
//! so sequence length is bounded by the family size.

use crate::error::{Error, Result};

use crate::mdp::{QTable, StochasticPolicy, TabularMdp};
use serde::{Deserialize, Serialize};

/// Expectation matrix E[g][mu] for a finite function list against a finite
/// measure list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluatedClass {
    pub matrix: Vec<Vec<f64>>,
}

impl EvaluatedClass {
    pub fn num_functions(&self) -> usize {
        self.matrix.len()
    }

    pub fn num_measures(&self) -> usize {
        self.matrix.first().map_or(0, |row| row.len())
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.num_measures();
        if self.matrix.iter().any(|row| row.len() != w) {
            return Err(Error::InvalidArgument("ragged expectation matrix".into()));
        }
        if self.matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite expectation entry".into()));
        }
        Ok(())
    }
}

/// Checks eps-independence of measure `nu_index` from `prefix_indices`;
/// returns the witness function index if independent.
pub fn eps_independent(
    class: &EvaluatedClass,
    nu_index: usize,
    prefix_indices: &[usize],
    eps: f64,
) -> Option<usize> {
    for (g, row) in class.matrix.iter().enumerate() {
        let norm_sq: f64 = prefix_indices.iter().map(|&i| row[i] * row[i]).sum();
        if norm_sq.sqrt() <= eps && row[nu_index].abs() > eps {
            return Some(g);
        }
    }
    None
}

#[derive(Clone, Copy, Debug)]
pub struct DimOptions {
    /// Whether sequence elements may repeat (immaterial for the result, but
    /// kept as a switch; a repeat can never be independent of its prefix).
    pub allow_repeats: bool,
    /// Search-node budget; exceeding it yields a flagged lower bound.
    pub node_cap: u64,
}

impl Default for DimOptions {
    fn default() -> Self {
        DimOptions { allow_repeats: true, node_cap: 1 << 22 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DimResult {
    pub length: usize,
    /// False when the node cap was hit; the length is then a lower bound.
    pub exact: bool,
    pub nodes_visited: u64,
}

struct DimSearch<'a> {
    class: &'a EvaluatedClass,
    opts: DimOptions,
    sums_sq: Vec<f64>,
    used: Vec<bool>,
    nodes: u64,
    capped: bool,
    best: usize,
}

impl<'a> DimSearch<'a> {
    fn run(class: &'a EvaluatedClass, eps: f64, opts: DimOptions) -> DimResult {
        let mut s = DimSearch {
            class,
            opts,
            sums_sq: vec![0.0; class.num_functions()],
            used: vec![false; class.num_measures()],
            nodes: 0,
            capped: false,
            best: 0,
        };
        s.dfs(0, eps, f64::INFINITY);
        DimResult { length: s.best, exact: !s.capped, nodes_visited: s.nodes }
    }

    fn dfs(&mut self, depth: usize, lo: f64, hi: f64) {
        if depth > self.best {
            self.best = depth;
        }
        if self.best >= self.class.num_measures() {
            return; // cannot do better: no measure can repeat
        }
        for mu in 0..self.class.num_measures() {
            if !self.opts.allow_repeats && self.used[mu] {
                continue;
            }
            // Collect maximal feasible eps' windows over the witnesses.
            let mut windows: Vec<(f64, f64)> = Vec::new();
            for (g, row) in self.class.matrix.iter().enumerate() {
                let new_lo = lo.max(self.sums_sq[g].sqrt());
                let new_hi = hi.min(row[mu].abs());
                if new_lo < new_hi {
                    let dominated = windows
                        .iter()
                        .any(|&(a, b)| a <= new_lo && b >= new_hi);
                    if !dominated {
                        windows.retain(|&(a, b)| !(new_lo <= a && new_hi >= b));
                        windows.push((new_lo, new_hi));
                    }
                }
            }
            for (new_lo, new_hi) in windows {
                self.nodes += 1;
                if self.nodes > self.opts.node_cap {
                    self.capped = true;
                    return;
                }
                let was_used = self.used[mu];
                self.used[mu] = true;
                for (g, row) in self.class.matrix.iter().enumerate() {
                    self.sums_sq[g] += row[mu] * row[mu];
                }
                self.dfs(depth + 1, new_lo, new_hi);
                for (g, row) in self.class.matrix.iter().enumerate() {
                    self.sums_sq[g] -= row[mu] * row[mu];
                }
                self.used[mu] = was_used;
                if self.capped {
                    return;
                }
            }
        }
    }
}

/// Distributional Eluder dimension of the evaluated class at `eps`.
pub fn dim_de(class: &EvaluatedClass, eps: f64, opts: DimOptions) -> Result<DimResult> {
    class.validate()?;
    if class.num_measures() > 8 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive sequence search supports at most 8 measures, got {}",
            class.num_measures()
        )));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    Ok(DimSearch::run(class, eps, opts))
}

/// Evaluates the step-h Bellman residuals of `qtable_grid` against the
/// step-h occupancy slices of `policy_family`.
pub fn residual_class_at_step(
    m: &TabularMdp,
    qtable_grid: &[QTable],
    policy_family: &[StochasticPolicy],
    h: usize,
) -> EvaluatedClass {
    let occupancies: Vec<Vec<Vec<f64>>> = policy_family
        .iter()
        .map(|pi| m.occupancy(pi).mu[h].clone())
        .collect();
    let matrix = qtable_grid
        .iter()
        .map(|f| {
            let res = m.bellman_residual(f);
            occupancies
                .iter()
                .map(|mu| {
                    let mut acc = 0.0;
                    for x in 0..m.num_states {
                        for a in 0..m.num_actions {
                            acc += mu[x][a] * res.residual[h][x][a];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    EvaluatedClass { matrix }
}

/// Bellman-Eluder dimension: max over steps of the distributional Eluder
/// dimension of the residual class against the family's occupancy slices.
/// Finite grids make this a lower bound of the full-class dimension.
pub fn dim_be(
    m: &TabularMdp,
    qtable_grid: &[QTable],
    policy_family: &[StochasticPolicy],
    eps: f64,
    opts: DimOptions,
) -> Result<DimResult> {
    let entries = qtable_grid.len() * policy_family.len() * m.horizon;
    if entries > 1_000_000 {
        return Err(Error::InvalidArgument(format!(
            "grid x family x horizon = {entries} matrix entries exceed the 1e6 cap"
        )));
    }
    let mut best = DimResult { length: 0, exact: true, nodes_visited: 0 };
    for h in 0..m.horizon {
        let class = residual_class_at_step(m, qtable_grid, policy_family, h);
        let r = dim_de(&class, eps, opts)?;
        best = DimResult {
            length: best.length.max(r.length),
            exact: best.exact && r.exact,
            nodes_visited: best.nodes_visited + r.nodes_visited,
        };
    }
    Ok(best)
}

/// All {0, 1}-valued Q-tables on the shape of `m` (2^(SAH) tables).
pub fn full_binary_grid(m: &TabularMdp) -> Result<Vec<QTable>> {
    let cells = m.horizon * m.num_states * m.num_actions;
    if cells > 20 {
        return Err(Error::InvalidArgument(format!(
            "binary grid over {cells} cells is too large"
        )));
    }
    let total = 1usize << cells;
    Ok((0..total)
        .map(|code| {
            let mut q = QTable::zeros(m.horizon, m.num_states, m.num_actions);
            let mut bit = 0;
            for h in 0..m.horizon {
                for x in 0..m.num_states {
                    for a in 0..m.num_actions {
                        q.values[h][x][a] = ((code >> bit) & 1) as f64;
                        bit += 1;
                    }
                }
            }
            q
        })
        .collect())
}

/// All deterministic policies of `m` (A^(SH) policies); small shapes only.
pub fn all_deterministic_policies(m: &TabularMdp) -> Result<Vec<StochasticPolicy>> {
    let points = m.horizon * m.num_states;
    let total = (m.num_actions as u128).pow(points as u32);
    if total > 1 << 16 {
        return Err(Error::InvalidArgument("policy family too large".into()));
    }
    Ok((0..total as u64)
        .map(|code| {
            let mut c = code;
            let mut actions = vec![vec![0usize; m.num_states]; m.horizon];
            for h in 0..m.horizon {
                for x in 0..m.num_states {
                    actions[h][x] = (c % m.num_actions as u64) as usize;
                    c /= m.num_actions as u64;
                }
            }
            StochasticPolicy::deterministic(m.horizon, m.num_states, m.num_actions, |h, x| {
                actions[h][x]
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::contextual_bandit;

    fn one_hot_class(m: usize) -> EvaluatedClass {
        EvaluatedClass {
            matrix: (0..m)
                .map(|g| (0..m).map(|mu| if g == mu { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    #[test]
    fn independence_examples() {
        // One function with prefix expectation 0 and nu expectation 1.
        let class = EvaluatedClass { matrix: vec![vec![0.0, 1.0]] };
        assert_eq!(eps_independent(&class, 1, &[0], 0.5), Some(0));

        let zeros = EvaluatedClass { matrix: vec![vec![0.0, 0.0]] };
        assert_eq!(eps_independent(&zeros, 1, &[0], 0.5), None);
        assert_eq!(eps_independent(&zeros, 1, &[], 1e-9), None);

        // Empty prefix: independent iff some |E_nu[g]| > eps.
        let class2 = EvaluatedClass { matrix: vec![vec![0.3, 0.7]] };
        assert_eq!(eps_independent(&class2, 1, &[], 0.5), Some(0));
        assert_eq!(eps_independent(&class2, 0, &[], 0.5), None);
    }

    #[test]
    fn one_hot_measures_have_dimension_m() {
        for m in 1..=6 {
            let class = one_hot_class(m);
            let r = dim_de(&class, 0.5, DimOptions::default()).unwrap();
            assert!(r.exact);
            assert_eq!(r.length, m, "m = {m}");
        }
    }

    #[test]
    fn eps_above_all_entries_gives_zero() {
        let class = one_hot_class(4);
        let r = dim_de(&class, 1.5, DimOptions::default()).unwrap();
        assert_eq!(r.length, 0);
    }

    #[test]
    fn dimension_is_non_increasing_in_eps() {
        let class = EvaluatedClass {
            matrix: vec![
                vec![0.9, 0.1, 0.0],
                vec![0.2, 0.8, 0.3],
                vec![0.0, 0.4, 0.6],
            ],
        };
        let grid = [0.05, 0.15, 0.3, 0.5, 0.7, 1.0];
        let mut prev = usize::MAX;
        for eps in grid {
            let r = dim_de(&class, eps, DimOptions::default()).unwrap();
            assert!(r.length <= prev, "eps {eps}");
            prev = r.length;
        }
    }

    #[test]
    fn bandit_full_grid_dimension_equals_action_count() {
        let m = contextual_bandit(&[vec![0.0, 0.0, 0.0]], 1).unwrap();
        let grid = full_binary_grid(&m).unwrap();
        let family = all_deterministic_policies(&m).unwrap();
        let r = dim_be(&m, &grid, &family, 0.5, DimOptions::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.length, 3);
    }

    #[test]
    fn rewardless_q_star_grid_has_dimension_zero() {
        let m = contextual_bandit(&[vec![0.0, 0.0]], 1).unwrap();
        let q_star = m.q_star_table();
        let family = all_deterministic_policies(&m).unwrap();
        let r = dim_be(&m, &[q_star], &family, 0.25, DimOptions::default()).unwrap();
        assert_eq!(r.length, 0);
    }

    #[test]
    fn adding_functions_never_decreases_dim_be() {
        let m = contextual_bandit(&[vec![0.0, 0.0]], 1).unwrap();
        let grid = full_binary_grid(&m).unwrap();
        let family = all_deterministic_policies(&m).unwrap();
        let small = dim_be(&m, &grid[..2], &family, 0.5, DimOptions::default()).unwrap();
        let large = dim_be(&m, &grid, &family, 0.5, DimOptions::default()).unwrap();
        assert!(large.length >= small.length);
    }

    #[test]
    fn more_than_eight_measures_is_refused() {
        let class = one_hot_class(9);
        assert!(dim_de(&class, 0.5, DimOptions::default()).is_err());
    }
}
