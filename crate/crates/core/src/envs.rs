//! Constructors for the benchmark environments: binary trees with three
//! reward variants, first-visit breadcrumb grid worlds, good/bad chains
//! (single and multi-copy), contextual bandits, and the potential-based
//! reward-shaping transform.

use crate::error::{Error, Result};
use crate::mdp::{RewardDist, RewardRangeMode, StochasticPolicy, TabularMdp, TransitionRow};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Binary tree
// ---------------------------------------------------------------------------

/// Reward variants for the binary-tree task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeVariant {
    /// Reward 1 on the final transition into the goal leaf.
    Goal,
    /// Reward 1/H on each of the H-1 transitions along the optimal path.
    Path,
    /// Shaped goal reward: +1 for the first correct action, -1 for leaving
    /// the path afterwards (relaxed reward mode).
    Shaped,
}

/// Depth-`depth` binary tree with 2^depth - 1 states in heap layout
/// (children of node i are 2i+1 and 2i+2). The episode has depth-1 steps;
/// leaves are terminal-layer states that are never acted in. The designated
/// optimal path is the all-right path to the rightmost leaf.
#[derive(Clone, Debug)]
pub struct TreeEnv {
    pub mdp: TabularMdp,
    /// Tree depth parameter (state count is 2^depth - 1).
    pub depth: usize,
    /// (state, action) pairs along the optimal path, one per step.
    pub optimal_path: Vec<(usize, usize)>,
    pub goal_state: usize,
}

pub fn tree_mdp(depth: usize, variant: TreeVariant) -> Result<TreeEnv> {
    if !(2..=12).contains(&depth) {
        return Err(Error::InvalidArgument(format!(
            "tree depth must be in [2, 12], got {depth}"
        )));
    }
    let num_states = (1usize << depth) - 1;
    let num_actions = 2usize;
    let horizon = depth - 1;

    // Rightmost path: s'_k = 2^k - 2 taking action 1 at every step.
    let path: Vec<(usize, usize)> = (1..depth)
        .map(|k| ((1usize << k) - 2, 1usize))
        .collect();
    let goal_state = (1usize << depth) - 2;

    let mut transitions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut t_layer: Vec<Vec<TransitionRow>> = Vec::with_capacity(num_states);
        let mut r_layer = Vec::with_capacity(num_states);
        for x in 0..num_states {
            let mut t_row = Vec::with_capacity(num_actions);
            let mut r_row = Vec::with_capacity(num_actions);
            for a in 0..num_actions {
                let child = 2 * x + 1 + a;
                if child < num_states {
                    t_row.push(vec![(child, 1.0)]);
                } else {
                    // Leaf-layer states are never acted in; self-loop keeps
                    // the row a valid distribution.
                    t_row.push(vec![(x, 1.0)]);
                }
                let on_path = path[h].0 == x;
                let r = match variant {
                    TreeVariant::Goal => {
                        if h == horizon - 1 && on_path && a == 1 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    TreeVariant::Path => {
                        if on_path && a == 1 {
                            1.0 / depth as f64
                        } else {
                            0.0
                        }
                    }
                    TreeVariant::Shaped => {
                        if h == 0 && on_path && a == 1 {
                            1.0
                        } else if h > 0 && on_path && a != 1 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                };
                r_row.push(RewardDist::constant(r));
            }
            t_layer.push(t_row);
            r_layer.push(r_row);
        }
        transitions.push(t_layer);
        rewards.push(r_layer);
    }

    let mdp = TabularMdp {
        num_states,
        num_actions,
        horizon,
        initial_state: 0,
        initial_dist: None,
        transitions,
        rewards,
        mode: match variant {
            TreeVariant::Shaped => RewardRangeMode::Relaxed,
            _ => RewardRangeMode::Standard,
        },
    };
    Ok(TreeEnv { mdp, depth, optimal_path: path, goal_state })
}

/// The potential that turns the goal reward into the shaped variant:
/// -1 on the interior optimal-path states, 0 elsewhere and on the
/// boundary layers.
pub fn tree_goal_potential(tree: &TreeEnv) -> PotentialFunction {
    let m = &tree.mdp;
    let mut phi = vec![vec![0.0; m.num_states]; m.horizon + 1];
    for (level, &(state, _)) in tree.optimal_path.iter().enumerate().skip(1) {
        // level k (0-based) corresponds to potential layer k+1.
        phi[level][state] = -1.0;
    }
    PotentialFunction { phi }
}

// ---------------------------------------------------------------------------
// Grid world
// ---------------------------------------------------------------------------

/// Grid actions, in index order: up, down, left, right.
pub const GRID_ACTIONS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum GridVariant {
    /// Only the goal pays (reward 1, first visit).
    Sparse,
    /// Breadcrumbs every `b` steps along a canonical shortest path, each
    /// paying 1/(2H) on first visit; the goal pays the remaining mass.
    Helpful { b: usize },
    /// Breadcrumbs every `b` steps along a trail that diverges toward a
    /// trap cell; collecting the whole trail forfeits the goal.
    Distracting {
        b: usize,
        trap: (usize, usize),
        /// Explicit trail (walk from start to trap, start excluded). When
        /// absent, the canonical row-then-column walk to the trap is used.
        trail: Option<Vec<(usize, usize)>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub variant: GridVariant,
}

impl GridSpec {
    /// Canonical 4x4 instance: start (0,0), goal (2,3), H = 5, breadcrumb
    /// spacing 2. Helpful breadcrumbs sit at steps 2 and 4 of the canonical
    /// shortest path with the goal one step past the last crumb, so the
    /// crumbs can only be collected in path order within the budget. The
    /// distracting trail turns down into the far corner; finishing it
    /// leaves the goal out of reach.
    pub fn canonical_4x4(variant: &str) -> Result<GridSpec> {
        let v = match variant {
            "sparse" => GridVariant::Sparse,
            "helpful" => GridVariant::Helpful { b: 2 },
            "distracting" => GridVariant::Distracting {
                b: 2,
                trap: (3, 1),
                trail: Some(vec![(1, 0), (2, 0), (3, 0), (3, 1)]),
            },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown grid variant {other:?}"
                )))
            }
        };
        Ok(GridSpec {
            width: 4,
            height: 4,
            start: (0, 0),
            goal: (2, 3),
            variant: v,
        })
    }
}

/// Grid world with first-visit rewards, made Markov by augmenting the cell
/// with a collected-target bitmask.
#[derive(Clone, Debug)]
pub struct GridEnv {
    pub mdp: TabularMdp,
    pub spec: GridSpec,
    /// Horizon = Manhattan distance from start to goal.
    pub shortest_path_len: usize,
    /// Breadcrumb cells, in trail/path order.
    pub crumbs: Vec<usize>,
    pub goal_cell: usize,
    pub crumb_reward: f64,
    pub goal_reward: f64,
    mask_bits: usize,
    width: usize,
}

impl GridEnv {
    pub fn cell(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn state_of(&self, cell: usize, mask: usize) -> usize {
        cell * (1 << self.mask_bits) + mask
    }

    pub fn cell_of_state(&self, state: usize) -> usize {
        state >> self.mask_bits
    }
}

fn manhattan(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Row-then-column walk between cells, excluding `from`, including `to`.
fn canonical_walk(from: (usize, usize), to: (usize, usize)) -> Vec<(usize, usize)> {
    let mut walk = Vec::new();
    let (mut r, mut c) = from;
    while r != to.0 {
        r = if r < to.0 { r + 1 } else { r - 1 };
        walk.push((r, c));
    }
    while c != to.1 {
        c = if c < to.1 { c + 1 } else { c - 1 };
        walk.push((r, c));
    }
    walk
}

pub fn grid_world(spec: &GridSpec) -> Result<GridEnv> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 || spec.start == spec.goal {
        return Err(Error::InvalidArgument("degenerate grid".into()));
    }
    for &(r, c) in [&spec.start, &spec.goal] {
        if r >= h || c >= w {
            return Err(Error::InvalidArgument("start/goal outside grid".into()));
        }
    }
    let horizon = manhattan(spec.start, spec.goal);

    // Breadcrumb cells along the relevant walk.
    let (crumb_cells, trail_check): (Vec<(usize, usize)>, Option<(Vec<(usize, usize)>, (usize, usize))>) =
        match &spec.variant {
            GridVariant::Sparse => (Vec::new(), None),
            GridVariant::Helpful { b } => {
                if *b == 0 {
                    return Err(Error::InvalidArgument("breadcrumb spacing must be positive".into()));
                }
                let walk = canonical_walk(spec.start, spec.goal);
                let crumbs = walk
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i + 1) % b == 0 && i + 1 < horizon)
                    .map(|(_, &cell)| cell)
                    .collect();
                (crumbs, None)
            }
            GridVariant::Distracting { b, trap, trail } => {
                if *b == 0 {
                    return Err(Error::InvalidArgument("breadcrumb spacing must be positive".into()));
                }
                let walk = match trail {
                    Some(t) => t.clone(),
                    None => canonical_walk(spec.start, *trap),
                };
                if walk.last() != Some(trap) {
                    return Err(Error::InvalidArgument("trail must end at the trap cell".into()));
                }
                let crumbs: Vec<(usize, usize)> = walk
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i + 1) % b == 0)
                    .map(|(_, &cell)| cell)
                    .collect();
                (crumbs, Some((walk, *trap)))
            }
        };

    if let Some((walk, trap)) = &trail_check {
        // The trail must be a proper walk and the trap must really trap:
        // finishing the trail leaves too little budget to reach the goal.
        let mut prev = spec.start;
        for &cell in walk {
            if manhattan(prev, cell) != 1 || cell.0 >= h || cell.1 >= w {
                return Err(Error::InvalidArgument("trail is not an adjacent walk".into()));
            }
            prev = cell;
        }
        if walk.len() + manhattan(*trap, spec.goal) <= horizon {
            return Err(Error::InvalidArgument(
                "trap does not trap: trail plus return fits the horizon".into(),
            ));
        }
    }

    if crumb_cells.len() > 16 {
        return Err(Error::InvalidArgument(format!(
            "{} breadcrumbs exceed the 16-bit mask budget",
            crumb_cells.len()
        )));
    }

    let mask_bits = crumb_cells.len() + 1; // one bit per crumb plus the goal
    let num_cells = w * h;
    let num_states = num_cells << mask_bits;
    if num_states > 50_000 {
        return Err(Error::InvalidArgument(format!(
            "augmented state count {num_states} exceeds 50000"
        )));
    }

    let cell_id = |(r, c): (usize, usize)| r * w + c;
    let crumbs: Vec<usize> = crumb_cells.iter().map(|&c| cell_id(c)).collect();
    let goal_cell = cell_id(spec.goal);
    let crumb_reward = 1.0 / (2.0 * horizon as f64);
    let goal_reward = 1.0 - crumbs.len() as f64 * crumb_reward;
    let goal_bit = crumbs.len();

    let step_cell = |cell: usize, a: usize| -> usize {
        let (r, c) = (cell / w, cell % w);
        let (nr, nc) = match a {
            0 => (r.saturating_sub(1), c),
            1 => ((r + 1).min(h - 1), c),
            2 => (r, c.saturating_sub(1)),
            _ => (r, (c + 1).min(w - 1)),
        };
        nr * w + nc
    };
    let new_bits = |cell: usize, mask: usize| -> (usize, f64) {
        let mut add = 0usize;
        let mut reward = 0.0;
        for (i, &cc) in crumbs.iter().enumerate() {
            if cc == cell && mask & (1 << i) == 0 {
                add |= 1 << i;
                reward += crumb_reward;
            }
        }
        if cell == goal_cell && mask & (1 << goal_bit) == 0 {
            add |= 1 << goal_bit;
            reward += goal_reward;
        }
        (add, reward)
    };

    let mut t_layer: Vec<Vec<TransitionRow>> = Vec::with_capacity(num_states);
    let mut r_layer = Vec::with_capacity(num_states);
    for state in 0..num_states {
        let cell = state >> mask_bits;
        let mask = state & ((1 << mask_bits) - 1);
        let mut t_row = Vec::with_capacity(GRID_ACTIONS);
        let mut r_row = Vec::with_capacity(GRID_ACTIONS);
        for a in 0..GRID_ACTIONS {
            let next_cell = step_cell(cell, a);
            let (add, reward) = new_bits(next_cell, mask);
            let next_state = (next_cell << mask_bits) | (mask | add);
            t_row.push(vec![(next_state, 1.0)]);
            r_row.push(RewardDist::constant(reward));
        }
        t_layer.push(t_row);
        r_layer.push(r_row);
    }

    let start_state = cell_id(spec.start) << mask_bits;
    let mdp = TabularMdp {
        num_states,
        num_actions: GRID_ACTIONS,
        horizon,
        initial_state: start_state,
        initial_dist: None,
        transitions: vec![t_layer; horizon],
        rewards: vec![r_layer; horizon],
        mode: RewardRangeMode::Standard,
    };
    Ok(GridEnv {
        mdp,
        spec: spec.clone(),
        shortest_path_len: horizon,
        crumbs,
        goal_cell,
        crumb_reward,
        goal_reward,
        mask_bits,
        width: w,
    })
}

// ---------------------------------------------------------------------------
// Good/bad chain
// ---------------------------------------------------------------------------

/// Two-chain construction: action 0 stays on the good chain, any other
/// action absorbs into the bad chain. A Bernoulli(3/8) reward sits on the
/// good chain at step `h_star`; every off-chain pair up to `h_star` pays
/// 1/(8 h_star).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub horizon: usize,
    pub num_actions: usize,
    /// Exploration parameter the instance is tuned for (recorded only).
    pub eps: f64,
    pub h_star: usize,
    /// Number of independent copies; S = 2 * copies. With more than one
    /// copy the start distribution is uniform over the good states.
    pub copies: usize,
}

impl ChainSpec {
    /// h* that makes the smallest positive exploration gap about `v`:
    /// ceil(2 log_{eps/A}(4 v)), clamped into [1, H].
    pub fn h_star_for_target_gap(horizon: usize, num_actions: usize, eps: f64, v: f64) -> usize {
        let base = eps / num_actions as f64;
        let raw = (2.0 * (4.0 * v).ln() / base.ln()).ceil();
        (raw.max(1.0) as usize).min(horizon).max(1)
    }

    /// The gap scale this instance realizes: (eps/A)^{h*/2} / 4.
    pub fn implied_target_gap(&self) -> f64 {
        (self.eps / self.num_actions as f64).powf(self.h_star as f64 / 2.0) / 4.0
    }

    pub fn good_state(&self, copy: usize) -> usize {
        2 * copy
    }

    pub fn bad_state(&self, copy: usize) -> usize {
        2 * copy + 1
    }
}

pub const CHAIN_GOOD_ACTION: usize = 0;

pub fn chain_mdp(spec: &ChainSpec) -> Result<TabularMdp> {
    if spec.h_star == 0 || spec.h_star > spec.horizon {
        return Err(Error::InvalidArgument(format!(
            "h* = {} must lie in [1, H = {}]",
            spec.h_star, spec.horizon
        )));
    }
    if spec.num_actions < 2 || spec.copies == 0 {
        return Err(Error::InvalidArgument("need at least 2 actions and 1 copy".into()));
    }
    let n = spec.copies;
    let num_states = 2 * n;
    let a_count = spec.num_actions;
    let off_reward = 1.0 / (8.0 * spec.h_star as f64);

    let mut transitions = Vec::with_capacity(spec.horizon);
    let mut rewards = Vec::with_capacity(spec.horizon);
    for h in 0..spec.horizon {
        let step = h + 1;
        let mut t_layer: Vec<Vec<TransitionRow>> = Vec::with_capacity(num_states);
        let mut r_layer = Vec::with_capacity(num_states);
        for state in 0..num_states {
            let copy = state / 2;
            let is_good = state % 2 == 0;
            let mut t_row = Vec::with_capacity(a_count);
            let mut r_row = Vec::with_capacity(a_count);
            for a in 0..a_count {
                let next = if is_good && a == CHAIN_GOOD_ACTION {
                    spec.good_state(copy)
                } else {
                    spec.bad_state(copy)
                };
                t_row.push(vec![(next, 1.0)]);
                let r = if step > spec.h_star {
                    RewardDist::constant(0.0)
                } else if is_good && a == CHAIN_GOOD_ACTION {
                    if step == spec.h_star {
                        RewardDist::bernoulli(3.0 / 8.0)
                    } else {
                        RewardDist::constant(0.0)
                    }
                } else {
                    RewardDist::constant(off_reward)
                };
                r_row.push(r);
            }
            t_layer.push(t_row);
            r_layer.push(r_row);
        }
        transitions.push(t_layer);
        rewards.push(r_layer);
    }

    let initial_dist = if n > 1 {
        let mut d = vec![0.0; num_states];
        for i in 0..n {
            d[spec.good_state(i)] = 1.0 / n as f64;
        }
        Some(d)
    } else {
        None
    };

    Ok(TabularMdp {
        num_states,
        num_actions: a_count,
        horizon: spec.horizon,
        initial_state: 0,
        initial_dist,
        transitions,
        rewards,
        mode: RewardRangeMode::Standard,
    })
}

/// Certified improvement candidates for the chain when exhaustive
/// enumeration is out of reach: the greedy policy itself, the optimal
/// policy, and per-copy repairs of the greedy policy.
pub fn chain_certified_candidates(
    spec: &ChainSpec,
    m: &TabularMdp,
    pi_f: &StochasticPolicy,
) -> Vec<StochasticPolicy> {
    let mut out = vec![pi_f.clone(), m.optimal_values().greedy];
    for i in 0..spec.copies {
        let good = spec.good_state(i);
        let mut fixed = pi_f.clone();
        for h in 0..m.horizon {
            for a in 0..m.num_actions {
                fixed.probs[h][good][a] = if a == CHAIN_GOOD_ACTION { 1.0 } else { 0.0 };
            }
        }
        out.push(fixed);
    }
    out
}

// ---------------------------------------------------------------------------
// Contextual bandit
// ---------------------------------------------------------------------------

/// MDP in which actions never affect the next-state distribution: contexts
/// are drawn uniformly at every step, and pair (x, a) pays 1/H with
/// probability `means[x][a]`.
pub fn contextual_bandit(means: &[Vec<f64>], horizon: usize) -> Result<TabularMdp> {
    let num_states = means.len();
    if num_states == 0 || horizon == 0 {
        return Err(Error::InvalidArgument("empty bandit".into()));
    }
    let num_actions = means[0].len();
    if num_actions == 0 || means.iter().any(|row| row.len() != num_actions) {
        return Err(Error::InvalidArgument("ragged mean-reward table".into()));
    }
    if means.iter().flatten().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidArgument(
            "mean rewards must lie in [0, 1] to respect the episode budget".into(),
        ));
    }
    let unit = 1.0 / horizon as f64;
    let context_dist: TransitionRow = (0..num_states)
        .map(|x| (x, 1.0 / num_states as f64))
        .collect();

    let t_layer: Vec<Vec<TransitionRow>> = (0..num_states)
        .map(|_| (0..num_actions).map(|_| context_dist.clone()).collect())
        .collect();
    let r_layer: Vec<Vec<RewardDist>> = means
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| RewardDist {
                    support: vec![0.0, unit],
                    probs: vec![1.0 - p, p],
                })
                .collect()
        })
        .collect();

    let initial_dist = if num_states > 1 {
        Some(vec![1.0 / num_states as f64; num_states])
    } else {
        None
    };
    Ok(TabularMdp {
        num_states,
        num_actions,
        horizon,
        initial_state: 0,
        initial_dist,
        transitions: vec![t_layer; horizon],
        rewards: vec![r_layer; horizon],
        mode: RewardRangeMode::Standard,
    })
}

// ---------------------------------------------------------------------------
// Potential-based reward shaping
// ---------------------------------------------------------------------------

/// State potential per layer h in 1..H+1 with zero boundary: zero at the
/// start layer on initial states and identically zero at layer H+1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialFunction {
    /// phi[h][x] for h = 0..H (layer H is the terminal layer H+1).
    pub phi: Vec<Vec<f64>>,
}

impl PotentialFunction {
    pub fn zero(horizon: usize, num_states: usize) -> Self {
        PotentialFunction { phi: vec![vec![0.0; num_states]; horizon + 1] }
    }

    pub fn validate(&self, m: &TabularMdp) -> Result<()> {
        if self.phi.len() != m.horizon + 1 || self.phi.iter().any(|l| l.len() != m.num_states) {
            return Err(Error::InvalidArgument(
                "potential must cover layers 1..H+1 over all states".into(),
            ));
        }
        for (x, _) in m.initial_support() {
            if self.phi[0][x] != 0.0 {
                return Err(Error::InvalidArgument(
                    "potential must vanish on initial states".into(),
                ));
            }
        }
        if self.phi[m.horizon].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument(
                "potential must vanish on the terminal layer".into(),
            ));
        }
        Ok(())
    }
}

/// Shifts every reward support value by phi_h(x) - E[phi_{h+1}(x') | x, a].
/// Returns a relaxed-mode MDP; errors if a shifted support leaves [-1, 1].
pub fn potential_shape(m: &TabularMdp, phi: &PotentialFunction) -> Result<TabularMdp> {
    phi.validate(m)?;
    let mut out = m.clone();
    out.mode = RewardRangeMode::Relaxed;
    for h in 0..m.horizon {
        for x in 0..m.num_states {
            for a in 0..m.num_actions {
                let expected_next: f64 = m.transitions[h][x][a]
                    .iter()
                    .map(|&(x2, p)| p * phi.phi[h + 1][x2])
                    .sum();
                let delta = phi.phi[h][x] - expected_next;
                let shifted = m.rewards[h][x][a].shifted(delta);
                if shifted
                    .support
                    .iter()
                    .any(|&s| !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&s))
                {
                    return Err(Error::RewardRange(format!(
                        "(h={}, x={}, a={}) shifted support leaves [-1, 1]",
                        h + 1,
                        x,
                        a
                    )));
                }
                out.rewards[h][x][a] = shifted;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::StochasticPolicy;
    use crate::testing::{random_mdp, random_deterministic_policy};
    use crate::util::rng_from_seed;
    use rand::Rng;

    fn enumerate_policies(m: &TabularMdp) -> Vec<StochasticPolicy> {
        // Policies over reachable decision points; unreachable choices
        // cannot affect returns.
        let enumeration = crate::gap::PolicyEnumeration::new(m);
        (0..enumeration.count() as u64)
            .map(|code| enumeration.decode(code))
            .collect()
    }

    #[test]
    fn tree_goal_value_is_one() {
        for depth in 2..=5 {
            let env = tree_mdp(depth, TreeVariant::Goal).unwrap();
            assert!(env.mdp.validate().ok());
            let opt = env.mdp.optimal_values();
            assert!((opt.initial_value - 1.0).abs() < 1e-12);
        }
        assert!(tree_mdp(1, TreeVariant::Goal).is_err());
        assert!(tree_mdp(13, TreeVariant::Goal).is_err());
    }

    #[test]
    fn tree_path_value_matches_edge_count() {
        let env = tree_mdp(4, TreeVariant::Path).unwrap();
        let opt = env.mdp.optimal_values();
        assert!((opt.initial_value - 3.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn tree_dynamics_are_deterministic_one_hot() {
        let env = tree_mdp(4, TreeVariant::Goal).unwrap();
        for layer in &env.mdp.transitions {
            for row in layer {
                for entries in row {
                    assert_eq!(entries.len(), 1);
                    assert_eq!(entries[0].1, 1.0);
                }
            }
        }
    }

    #[test]
    fn shaped_tree_preserves_every_policy_return() {
        for depth in [3usize, 4] {
            let goal = tree_mdp(depth, TreeVariant::Goal).unwrap();
            let shaped = tree_mdp(depth, TreeVariant::Shaped).unwrap();
            assert!(shaped.mdp.validate().ok());
            for pi in enumerate_policies(&goal.mdp) {
                let a = goal.mdp.policy_value(&pi).initial_value;
                let b = shaped.mdp.policy_value(&pi).initial_value;
                assert!((a - b).abs() < 1e-12, "depth {depth}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn canonical_potential_maps_goal_to_shaped() {
        for depth in [3usize, 4, 5] {
            let goal = tree_mdp(depth, TreeVariant::Goal).unwrap();
            let shaped = tree_mdp(depth, TreeVariant::Shaped).unwrap();
            let phi = tree_goal_potential(&goal);
            let mapped = potential_shape(&goal.mdp, &phi).unwrap();
            for h in 0..goal.mdp.horizon {
                for x in 0..goal.mdp.num_states {
                    for a in 0..goal.mdp.num_actions {
                        let want = shaped.mdp.rewards[h][x][a].mean();
                        let got = mapped.rewards[h][x][a].mean();
                        assert!((want - got).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_potential_is_identity() {
        let m = random_mdp(4, 2, 3, 5);
        let phi = PotentialFunction::zero(m.horizon, m.num_states);
        let shaped = potential_shape(&m, &phi).unwrap();
        for h in 0..m.horizon {
            for x in 0..m.num_states {
                for a in 0..m.num_actions {
                    assert_eq!(shaped.rewards[h][x][a], m.rewards[h][x][a]);
                }
            }
        }
    }

    #[test]
    fn random_potentials_preserve_returns() {
        let mut rng = rng_from_seed(71);
        for trial in 0..1000 {
            let m = random_mdp(4, 2, 3, 2000 + trial);
            let mut phi = PotentialFunction::zero(m.horizon, m.num_states);
            for h in 1..m.horizon {
                for x in 0..m.num_states {
                    phi.phi[h][x] = rng.gen::<f64>() * 0.1 - 0.05;
                }
            }
            let shaped = potential_shape(&m, &phi).unwrap();
            let pi = random_deterministic_policy(&m, 3000 + trial);
            let a = m.policy_value(&pi).initial_value;
            let b = shaped.policy_value(&pi).initial_value;
            assert!((a - b).abs() < 1e-10, "trial {trial}: {a} vs {b}");
        }
    }

    #[test]
    fn chain_values_depend_only_on_good_chain_length() {
        for h_star in [2usize, 3] {
            let spec = ChainSpec {
                horizon: h_star,
                num_actions: 2,
                eps: 0.5,
                h_star,
                copies: 1,
            };
            let m = chain_mdp(&spec).unwrap();
            let report = m.validate();
            assert!(report.ok(), "{:?}", report.violations);
            assert!(report.max_return <= 1.0 + 1e-12);
            let opt = m.optimal_values();
            assert!((opt.initial_value - 3.0 / 8.0).abs() < 1e-12);

            for pi in enumerate_policies(&m) {
                // L = steps the policy stays on the good chain from the start.
                let mut l = 0usize;
                for h in 0..m.horizon {
                    if pi.action_at(h, 0) == CHAIN_GOOD_ACTION {
                        l += 1;
                    } else {
                        break;
                    }
                }
                let expect = if l >= spec.h_star {
                    3.0 / 8.0
                } else {
                    (1.0 - l as f64 / spec.h_star as f64) / 8.0
                };
                let got = m.policy_value(&pi).initial_value;
                assert!((got - expect).abs() < 1e-12, "L={l}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn chain_h_star_inversion_matches_target_gap() {
        // eps = 0.5, A = 2, h* = 2 realizes v = (eps/A)^{h*/2} / 4 = 1/16.
        let spec = ChainSpec { horizon: 2, num_actions: 2, eps: 0.5, h_star: 2, copies: 1 };
        assert!((spec.implied_target_gap() - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(ChainSpec::h_star_for_target_gap(8, 2, 0.5, 1.0 / 16.0), 2);
    }

    #[test]
    fn chain_copies_use_uniform_start_and_validate() {
        let spec = ChainSpec { horizon: 2, num_actions: 2, eps: 0.5, h_star: 2, copies: 4 };
        let m = chain_mdp(&spec).unwrap();
        assert_eq!(m.num_states, 8);
        assert!(m.validate().ok());
        let opt = m.optimal_values();
        assert!((opt.initial_value - 3.0 / 8.0).abs() < 1e-12);
        assert!(chain_mdp(&ChainSpec { h_star: 5, ..spec }).is_err());
    }

    #[test]
    fn sparse_grid_has_exactly_one_rewarding_pair() {
        let env = grid_world(&GridSpec::canonical_4x4("sparse").unwrap()).unwrap();
        assert!(env.mdp.validate().ok());
        let mut rewarding: Vec<(usize, usize)> = Vec::new();
        for x in 0..env.mdp.num_states {
            for a in 0..env.mdp.num_actions {
                if env.mdp.rewards[0][x][a].mean() != 0.0 {
                    rewarding.push((x, a));
                }
            }
        }
        // Every rewarding pair moves into the uncollected goal.
        assert!(!rewarding.is_empty());
        for (x, a) in rewarding {
            let (next, _) = env.mdp.transitions[0][x][a][0];
            assert_eq!(env.cell_of_state(next), env.goal_cell);
        }
        let opt = env.mdp.optimal_values();
        assert!((opt.initial_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn helpful_grid_optimal_policy_collects_everything() {
        let env = grid_world(&GridSpec::canonical_4x4("helpful").unwrap()).unwrap();
        assert!(env.mdp.validate().ok());
        assert_eq!(env.crumbs.len(), 2);
        assert_eq!(env.shortest_path_len, 5);
        let opt = env.mdp.optimal_values();
        let expect = env.crumbs.len() as f64 * env.crumb_reward + env.goal_reward;
        assert!((opt.initial_value - expect).abs() < 1e-12);
        assert!((opt.initial_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distracting_grid_trades_goal_for_trail() {
        let env = grid_world(&GridSpec::canonical_4x4("distracting").unwrap()).unwrap();
        assert!(env.mdp.validate().ok());
        assert_eq!(env.crumbs.len(), 2);
        let opt = env.mdp.optimal_values();
        // The first trail crumb still combines with the goal; the second
        // does not, so the optimum collects one crumb plus the goal and the
        // full trail is strictly worse.
        assert!((opt.initial_value - (env.goal_reward + env.crumb_reward)).abs() < 1e-12);
        assert!(env.crumbs.len() as f64 * env.crumb_reward < opt.initial_value);
        assert!(opt.initial_value < 1.0 - 1e-12);
    }

    #[test]
    fn oversized_grid_is_refused() {
        let spec = GridSpec {
            width: 60,
            height: 60,
            start: (0, 0),
            goal: (59, 59),
            variant: GridVariant::Helpful { b: 2 },
        };
        assert!(grid_world(&spec).is_err());
    }

    #[test]
    fn bandit_has_action_independent_transitions() {
        let m = contextual_bandit(&[vec![0.5, 0.25], vec![0.25, 0.5]], 2).unwrap();
        assert!(m.validate().ok());
        for h in 0..m.horizon {
            for x in 0..m.num_states {
                for a in 1..m.num_actions {
                    assert_eq!(m.transitions[h][x][a], m.transitions[h][x][0]);
                }
            }
        }
        assert!(contextual_bandit(&[vec![1.5]], 1).is_err());
    }
}
