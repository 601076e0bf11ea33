//! Exact computation of the myopic exploration gap and exploration radius
//! on tabular instances, plus every closed-form lower bound evaluated
//! side by side.
//!
//! The gap of a value function f against a candidate policy pi' is
//! (V^{pi'} - V^{pi_f}) / sqrt(c), where the radius c >= 1 is the smallest
//! constant with mu^{pi'} <= c mu^{phi(f)} and mu^{pi_f} <= c mu^{phi(f)}
//! pointwise over (h, x, a). The gap of f is the supremum over candidates.
//! Candidates are deterministic policies over reachable decision points,
//! enumerated exhaustively when the count permits, or supplied explicitly
//! as a certified list (the result is then a lower bound).

use crate::error::{Error, Result};
use crate::explore::{greedy, ExplorationMapping};
use crate::mdp::{OccupancyTensor, QTable, StochasticPolicy, TabularMdp};
use rayon::prelude::*;
use serde::Serialize;

/// Hard ceiling on exhaustive candidate enumeration.
pub const ENUMERATION_CAP: u128 = 1 << 24;

fn ser_radius<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("+inf")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    CertifiedLowerBound,
}

/// Candidate policies for the gap optimization.
#[derive(Clone, Debug)]
pub enum CandidateSet {
    /// All deterministic policies over reachable decision points
    /// (unreachable points are fixed to action 0).
    Exhaustive,
    /// Explicit list; the resulting gap is a certified lower bound.
    Certified(Vec<StochasticPolicy>),
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateEval {
    /// Lexicographic encoding (exhaustive mode) or list index (certified).
    pub encoding: u64,
    pub gap: f64,
    #[serde(serialize_with = "ser_radius")]
    pub radius: f64,
}

/// Closed-form lower bounds on the exploration gap, evaluated from instance
/// parameters. Each entry is a lower bound on alpha for its applicability
/// condition.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundTable {
    /// ratio^{-1/2} * Delta with the trajectory likelihood-ratio supremum.
    pub likelihood_ratio: Option<f64>,
    /// (eps/A)^{H/2} * Delta, the epsilon-greedy worst case.
    pub eps_greedy_worst_case: Option<f64>,
    /// (A e^beta)^{-H/2} * Delta for softmax exploration.
    pub softmax_worst_case: Option<f64>,
    /// sqrt(eps / (A delta_P^H)) * Delta; needs delta_P < inf.
    pub action_variation: Option<f64>,
    /// sqrt(eps/A) * Delta; applies when actions do not move the state
    /// distribution (delta_P = 1).
    pub contextual_bandit: Option<f64>,
    /// (1/2H) (eps/A)^{B/2} for breadcrumb spacing B (absolute, not scaled
    /// by Delta).
    pub breadcrumb: Option<f64>,
}

/// Result of a gap computation for one value function.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub alpha: f64,
    /// V* - V^{pi_f}.
    pub suboptimality_gap: f64,
    pub achieving_policy: StochasticPolicy,
    /// Radius of the achieving candidate.
    #[serde(serialize_with = "ser_radius")]
    pub radius_c: f64,
    pub search_mode: SearchMode,
    pub candidates_evaluated: u64,
    /// Per-candidate table when the candidate set is small enough to record.
    pub candidates: Vec<CandidateEval>,
    pub bounds: BoundTable,
}

const RECORD_CANDIDATE_LIMIT: u64 = 4096;

// ---------------------------------------------------------------------------
// Enumeration of deterministic policies over reachable decision points
// ---------------------------------------------------------------------------

/// Reachable (h, x) decision points in (h, x) order.
pub fn reachable_points(m: &TabularMdp) -> Vec<(usize, usize)> {
    let reach = m.reachable();
    let mut points = Vec::new();
    for h in 0..m.horizon {
        for x in 0..m.num_states {
            if reach[h][x] {
                points.push((h, x));
            }
        }
    }
    points
}

/// Mixed-radix enumeration of deterministic policies restricted to the
/// reachable decision points; the first point is the most significant
/// digit, so smaller codes are lexicographically earlier policies.
pub struct PolicyEnumeration {
    pub points: Vec<(usize, usize)>,
    pub num_actions: usize,
    horizon: usize,
    num_states: usize,
}

impl PolicyEnumeration {
    pub fn new(m: &TabularMdp) -> Self {
        PolicyEnumeration {
            points: reachable_points(m),
            num_actions: m.num_actions,
            horizon: m.horizon,
            num_states: m.num_states,
        }
    }

    pub fn count(&self) -> u128 {
        (self.num_actions as u128)
            .checked_pow(self.points.len() as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn decode(&self, code: u64) -> StochasticPolicy {
        let mut actions = vec![vec![0usize; self.num_states]; self.horizon];
        let mut c = code;
        for &(h, x) in self.points.iter().rev() {
            actions[h][x] = (c % self.num_actions as u64) as usize;
            c /= self.num_actions as u64;
        }
        StochasticPolicy::deterministic(self.horizon, self.num_states, self.num_actions, |h, x| {
            actions[h][x]
        })
    }

    /// Encoding of an arbitrary policy restricted to the decision points.
    pub fn encode(&self, pi: &StochasticPolicy) -> u64 {
        let mut code = 0u64;
        for &(h, x) in &self.points {
            code = code * self.num_actions as u64 + pi.action_at(h, x) as u64;
        }
        code
    }
}

/// One representative Q-table per deterministic policy over reachable
/// decision points: 1 on the chosen action, 0 elsewhere. Sufficient for
/// class-level gaps because the gap depends on f only through its greedy
/// policy and the mapped exploration policy.
pub fn greedy_policy_representatives(m: &TabularMdp) -> Result<Vec<QTable>> {
    let enumeration = PolicyEnumeration::new(m);
    let count = enumeration.count();
    if count > ENUMERATION_CAP {
        return Err(Error::CandidateOverflow { candidates: count, cap: ENUMERATION_CAP });
    }
    Ok((0..count as u64)
        .map(|code| {
            let pi = enumeration.decode(code);
            let values = (0..m.horizon)
                .map(|h| {
                    (0..m.num_states)
                        .map(|x| {
                            let mut row = vec![0.0; m.num_actions];
                            row[pi.action_at(h, x)] = 1.0;
                            row
                        })
                        .collect()
                })
                .collect();
            QTable { values, range: vec![(0.0, 1.0); m.horizon] }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Exploration radius
// ---------------------------------------------------------------------------

/// Smallest c >= 1 with mu_candidate <= c mu_explore and
/// mu_greedy <= c mu_explore pointwise. Conventions: 0/0 contributes
/// nothing, positive/0 gives +inf.
pub fn min_radius(
    mu_explore: &OccupancyTensor,
    mu_greedy: &OccupancyTensor,
    mu_candidate: &OccupancyTensor,
) -> f64 {
    let mut c = 1.0f64;
    for (num_tensor, den_tensor) in [
        (&mu_candidate.mu, &mu_explore.mu),
        (&mu_greedy.mu, &mu_explore.mu),
    ] {
        for (num_layer, den_layer) in num_tensor.iter().zip(den_tensor) {
            for (num_row, den_row) in num_layer.iter().zip(den_layer) {
                for (&num, &den) in num_row.iter().zip(den_row) {
                    if num > 0.0 {
                        if den <= 0.0 {
                            return f64::INFINITY;
                        }
                        let r = num / den;
                        if r > c {
                            c = r;
                        }
                    }
                }
            }
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Gap computation (occupancy form)
// ---------------------------------------------------------------------------

struct Prepared {
    pi_f: StochasticPolicy,
    explore_pi: StochasticPolicy,
    mu_phi: OccupancyTensor,
    mu_f: OccupancyTensor,
    v_f: f64,
    v_star: f64,
}

fn prepare(m: &TabularMdp, f: &QTable, phi: &ExplorationMapping) -> Result<Prepared> {
    phi.validate()?;
    let pi_f = greedy(f);
    let explore_pi = phi.apply(f);
    let mu_phi = m.occupancy(&explore_pi);
    let mu_f = m.occupancy(&pi_f);
    let v_f = m.policy_value(&pi_f).initial_value;
    let v_star = m.optimal_values().initial_value;
    Ok(Prepared { pi_f, explore_pi, mu_phi, mu_f, v_f, v_star })
}

#[derive(Clone, Copy)]
struct Best {
    score: f64,
    encoding: u64,
    radius: f64,
}

impl Best {
    fn better_than(&self, other: &Best) -> bool {
        self.score > other.score || (self.score == other.score && self.encoding < other.encoding)
    }
}

fn reduce_best(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x.better_than(&y) { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Evaluates one candidate against prepared context. Returns the candidate's
/// (gap, radius, score); infeasible candidates (infinite radius) score -inf.
fn eval_candidate(m: &TabularMdp, prep: &Prepared, candidate: &StochasticPolicy) -> (f64, f64, f64) {
    let v_c = m.policy_value(candidate).initial_value;
    let mu_c = m.occupancy(candidate);
    let radius = min_radius(&prep.mu_phi, &prep.mu_f, &mu_c);
    let gap = v_c - prep.v_f;
    let score = if radius.is_finite() {
        gap / radius.sqrt()
    } else {
        f64::NEG_INFINITY
    };
    (gap, radius, score)
}

fn search(
    m: &TabularMdp,
    prep: &Prepared,
    candidates: &CandidateSet,
) -> Result<(Best, SearchMode, u64, Vec<CandidateEval>)> {
    match candidates {
        CandidateSet::Exhaustive => {
            let enumeration = PolicyEnumeration::new(m);
            let count = enumeration.count();
            if count > ENUMERATION_CAP {
                return Err(Error::CandidateOverflow { candidates: count, cap: ENUMERATION_CAP });
            }
            let count = count as u64;
            let record = count <= RECORD_CANDIDATE_LIMIT;
            let evals: Vec<(u64, f64, f64, f64)> = (0..count)
                .into_par_iter()
                .map(|code| {
                    let pi = enumeration.decode(code);
                    let (gap, radius, score) = eval_candidate(m, prep, &pi);
                    (code, gap, radius, score)
                })
                .collect();
            let best = evals
                .par_iter()
                .map(|&(code, _, radius, score)| {
                    Some(Best { score, encoding: code, radius })
                })
                .reduce(|| None, reduce_best)
                .expect("at least one candidate");
            let table = if record {
                evals
                    .iter()
                    .map(|&(code, gap, radius, _)| CandidateEval { encoding: code, gap, radius })
                    .collect()
            } else {
                Vec::new()
            };
            Ok((best, SearchMode::Exhaustive, count, table))
        }
        CandidateSet::Certified(list) => {
            // The greedy policy itself is always a feasible candidate with
            // gap 0, so the certified bound is never negative.
            let mut all: Vec<&StochasticPolicy> = vec![&prep.pi_f];
            all.extend(list.iter());
            let evals: Vec<(u64, f64, f64, f64)> = all
                .par_iter()
                .enumerate()
                .map(|(i, pi)| {
                    let (gap, radius, score) = eval_candidate(m, prep, pi);
                    (i as u64, gap, radius, score)
                })
                .collect();
            let best = evals
                .iter()
                .map(|&(code, _, radius, score)| {
                    Some(Best { score, encoding: code, radius })
                })
                .fold(None, reduce_best)
                .expect("at least one candidate");
            let table = evals
                .iter()
                .map(|&(code, gap, radius, _)| CandidateEval { encoding: code, gap, radius })
                .collect();
            Ok((best, SearchMode::CertifiedLowerBound, all.len() as u64, table))
        }
    }
}

fn finish_report(
    m: &TabularMdp,
    prep: &Prepared,
    phi: &ExplorationMapping,
    best: Best,
    mode: SearchMode,
    evaluated: u64,
    table: Vec<CandidateEval>,
    achieving: StochasticPolicy,
) -> GapReport {
    let alpha = best.score.max(0.0);
    let delta = prep.v_star - prep.v_f;
    let av = action_variation(m);
    let ratio = sup_likelihood_ratio_deterministic(m, &prep.explore_pi);
    let mut bounds = BoundTable {
        likelihood_ratio: Some(bound_lemma51(ratio, delta)),
        ..BoundTable::default()
    };
    match *phi {
        ExplorationMapping::EpsGreedy { eps } => {
            let a = m.num_actions as f64;
            let h = m.horizon as f64;
            bounds.eps_greedy_worst_case = Some((eps / a).powf(h / 2.0) * delta);
            if av.delta_p.is_finite() {
                bounds.action_variation =
                    Some((eps / (a * av.delta_p.powf(h))).sqrt() * delta);
            }
            if av.delta_p == 1.0 {
                bounds.contextual_bandit = Some((eps / a).sqrt() * delta);
            }
        }
        ExplorationMapping::Softmax { beta } => {
            let a = m.num_actions as f64;
            let h = m.horizon as f64;
            bounds.softmax_worst_case = Some((a * beta.exp()).powf(-h / 2.0) * delta);
        }
        ExplorationMapping::None => {}
    }
    GapReport {
        alpha,
        suboptimality_gap: delta,
        achieving_policy: achieving,
        radius_c: best.radius,
        search_mode: mode,
        candidates_evaluated: evaluated,
        candidates: table,
        bounds,
    }
}

/// Exploration gap of `f` via the occupancy-ratio form. Exact in exhaustive
/// mode; a certified lower bound with an explicit candidate list.
pub fn myopic_gap_tabular(
    m: &TabularMdp,
    f: &QTable,
    phi: &ExplorationMapping,
    candidates: &CandidateSet,
) -> Result<GapReport> {
    let prep = prepare(m, f, phi)?;
    let (best, mode, evaluated, table) = search(m, &prep, candidates)?;
    let achieving = match candidates {
        CandidateSet::Exhaustive => PolicyEnumeration::new(m).decode(best.encoding),
        CandidateSet::Certified(list) => {
            if best.encoding == 0 {
                prep.pi_f.clone()
            } else {
                list[(best.encoding - 1) as usize].clone()
            }
        }
    };
    Ok(finish_report(m, &prep, phi, best, mode, evaluated, table, achieving))
}

// ---------------------------------------------------------------------------
// Gap computation (test-function form)
// ---------------------------------------------------------------------------

/// Exploration gap with the constraint family supplied as explicit test
/// functions: for each candidate, the radius is the smallest c with
/// E_{pi'}[E_h^2 f'] <= c E_{phi(f)}[E_h^2 f'] and the same for pi_f, over
/// all supplied f' and steps h. Fewer test functions mean weaker
/// constraints, so the result is an upper bound of the occupancy form and
/// coincides with it for a family of single-pair indicator residuals.
pub fn myopic_gap_testfns(
    m: &TabularMdp,
    f: &QTable,
    phi: &ExplorationMapping,
    candidates: &CandidateSet,
    test_functions: &[QTable],
) -> Result<GapReport> {
    let prep = prepare(m, f, phi)?;

    // Squared-residual tensors and their expectations under phi(f) and pi_f.
    let squared: Vec<Vec<Vec<Vec<f64>>>> = test_functions
        .iter()
        .map(|tf| m.bellman_residual(tf).squared)
        .collect();
    let expect = |mu: &OccupancyTensor, sq: &Vec<Vec<Vec<f64>>>, h: usize| -> f64 {
        let mut acc = 0.0;
        for x in 0..m.num_states {
            for a in 0..m.num_actions {
                acc += mu.mu[h][x][a] * sq[h][x][a];
            }
        }
        acc
    };
    let rhs: Vec<Vec<f64>> = squared
        .iter()
        .map(|sq| (0..m.horizon).map(|h| expect(&prep.mu_phi, sq, h)).collect())
        .collect();
    let lhs_greedy: Vec<Vec<f64>> = squared
        .iter()
        .map(|sq| (0..m.horizon).map(|h| expect(&prep.mu_f, sq, h)).collect())
        .collect();

    let radius_for = |mu_c: &OccupancyTensor| -> f64 {
        let mut c = 1.0f64;
        for (i, sq) in squared.iter().enumerate() {
            for h in 0..m.horizon {
                let den = rhs[i][h];
                for num in [expect(mu_c, sq, h), lhs_greedy[i][h]] {
                    if num > 0.0 {
                        if den <= 0.0 {
                            return f64::INFINITY;
                        }
                        let r = num / den;
                        if r > c {
                            c = r;
                        }
                    }
                }
            }
        }
        c
    };

    let eval = |pi: &StochasticPolicy| -> (f64, f64, f64) {
        let v_c = m.policy_value(pi).initial_value;
        let mu_c = m.occupancy(pi);
        let radius = radius_for(&mu_c);
        let gap = v_c - prep.v_f;
        let score = if radius.is_finite() { gap / radius.sqrt() } else { f64::NEG_INFINITY };
        (gap, radius, score)
    };

    let (best, mode, evaluated, table, achieving) = match candidates {
        CandidateSet::Exhaustive => {
            let enumeration = PolicyEnumeration::new(m);
            let count = enumeration.count();
            if count > ENUMERATION_CAP {
                return Err(Error::CandidateOverflow { candidates: count, cap: ENUMERATION_CAP });
            }
            let count = count as u64;
            let evals: Vec<(u64, f64, f64, f64)> = (0..count)
                .into_par_iter()
                .map(|code| {
                    let pi = enumeration.decode(code);
                    let (gap, radius, score) = eval(&pi);
                    (code, gap, radius, score)
                })
                .collect();
            let best = evals
                .iter()
                .map(|&(code, _, radius, score)| Some(Best { score, encoding: code, radius }))
                .fold(None, reduce_best)
                .unwrap();
            let table = if count <= RECORD_CANDIDATE_LIMIT {
                evals
                    .iter()
                    .map(|&(code, gap, radius, _)| CandidateEval { encoding: code, gap, radius })
                    .collect()
            } else {
                Vec::new()
            };
            let achieving = enumeration.decode(best.encoding);
            (best, SearchMode::Exhaustive, count, table, achieving)
        }
        CandidateSet::Certified(list) => {
            let mut all: Vec<&StochasticPolicy> = vec![&prep.pi_f];
            all.extend(list.iter());
            let evals: Vec<(u64, f64, f64, f64)> = all
                .iter()
                .enumerate()
                .map(|(i, pi)| {
                    let (gap, radius, score) = eval(pi);
                    (i as u64, gap, radius, score)
                })
                .collect();
            let best = evals
                .iter()
                .map(|&(code, _, radius, score)| Some(Best { score, encoding: code, radius }))
                .fold(None, reduce_best)
                .unwrap();
            let table = evals
                .iter()
                .map(|&(code, gap, radius, _)| CandidateEval { encoding: code, gap, radius })
                .collect();
            let achieving = (*all[best.encoding as usize]).clone();
            (best, SearchMode::CertifiedLowerBound, all.len() as u64, table, achieving)
        }
    };
    Ok(finish_report(m, &prep, phi, best, mode, evaluated, table, achieving))
}

/// Test functions whose squared Bellman residual is `magnitude^2` at a
/// single (h, x, a) pair and exactly zero elsewhere: Bellman-consistent
/// layers everywhere, with one perturbed entry. One table per pair.
pub fn indicator_residual_surrogates(m: &TabularMdp, magnitude: f64) -> Vec<QTable> {
    let mut out = Vec::with_capacity(m.horizon * m.num_states * m.num_actions);
    for h0 in 0..m.horizon {
        for x0 in 0..m.num_states {
            for a0 in 0..m.num_actions {
                let mut values = vec![Vec::new(); m.horizon];
                for h in (0..m.horizon).rev() {
                    let mut layer = if h + 1 < m.horizon {
                        m.bellman_apply(h, &values[h + 1])
                    } else {
                        m.bellman_apply(h, &[])
                    };
                    if h == h0 {
                        layer[x0][a0] += magnitude;
                    }
                    values[h] = layer;
                }
                let range = values
                    .iter()
                    .map(|layer| {
                        let lo = layer.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
                        let hi = layer.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
                        (lo, hi)
                    })
                    .collect();
                out.push(QTable { values, range });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Class-level gap
// ---------------------------------------------------------------------------

/// Class-level result: infimum of alpha and supremum of the radius over the
/// value functions whose greedy policy is more than `lambda` suboptimal.
#[derive(Clone, Debug, Serialize)]
pub struct ClassGapReport {
    /// +inf sentinel when no function clears the lambda threshold.
    #[serde(serialize_with = "ser_radius")]
    pub alpha: f64,
    #[serde(serialize_with = "ser_radius")]
    pub radius: f64,
    /// Index into the enumeration achieving the infimum.
    pub witness: Option<usize>,
    pub class_size: usize,
}

/// inf_f alpha(f) and sup_f c(f) over F' = { f : V* - V^{pi_f} > lambda }.
pub fn gap_over_class(
    m: &TabularMdp,
    f_enumeration: &[QTable],
    phi: &ExplorationMapping,
    lambda: f64,
    candidates: &CandidateSet,
) -> Result<ClassGapReport> {
    phi.validate()?;
    let v_star = m.optimal_values().initial_value;
    let members: Vec<(usize, &QTable)> = f_enumeration
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            let v_f = m.policy_value(&greedy(f)).initial_value;
            v_star - v_f > lambda
        })
        .collect();
    if members.is_empty() {
        return Ok(ClassGapReport { alpha: f64::INFINITY, radius: 1.0, witness: None, class_size: 0 });
    }
    let evals: Vec<(usize, f64, f64)> = members
        .par_iter()
        .map(|&(idx, f)| {
            let report = myopic_gap_tabular(m, f, phi, candidates)?;
            Ok((idx, report.alpha, report.radius_c))
        })
        .collect::<Result<_>>()?;
    let mut alpha = f64::INFINITY;
    let mut radius = 1.0f64;
    let mut witness = None;
    for &(idx, a, c) in &evals {
        if a < alpha || (a == alpha && witness.map_or(true, |w| idx < w)) {
            alpha = a;
            witness = Some(idx);
        }
        if c > radius {
            radius = c;
        }
    }
    Ok(ClassGapReport { alpha, radius, witness, class_size: members.len() })
}

// ---------------------------------------------------------------------------
// Likelihood ratios and closed-form bounds
// ---------------------------------------------------------------------------

/// sup over trajectories (feasible under the dynamics and `target`) of the
/// product of per-step probability ratios target/base. Dynamics cancel in
/// trajectory likelihood ratios, so this is a backward DP over per-step
/// action ratios. +inf when `target` can place mass on an action with zero
/// `base` probability at a reachable state.
pub fn likelihood_ratio_sup(
    m: &TabularMdp,
    target: &StochasticPolicy,
    base: &StochasticPolicy,
) -> f64 {
    let mut next = vec![1.0f64; m.num_states];
    for h in (0..m.horizon).rev() {
        let mut cur = vec![f64::NEG_INFINITY; m.num_states];
        for x in 0..m.num_states {
            for a in 0..m.num_actions {
                let pt = target.probs[h][x][a];
                if pt <= 0.0 {
                    continue;
                }
                let pb = base.probs[h][x][a];
                let step = if pb <= 0.0 { f64::INFINITY } else { pt / pb };
                let cont = m.transitions[h][x][a]
                    .iter()
                    .filter(|&&(_, p)| p > 0.0)
                    .map(|&(x2, _)| next[x2])
                    .fold(f64::NEG_INFINITY, f64::max);
                let val = step * cont.max(0.0);
                if val > cur[x] {
                    cur[x] = val;
                }
            }
        }
        next = cur;
    }
    m.initial_support()
        .iter()
        .map(|&(x, _)| next[x])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// max over deterministic target policies of [`likelihood_ratio_sup`]:
/// the worst trajectory picks the action maximizing 1/base at every step.
pub fn sup_likelihood_ratio_deterministic(m: &TabularMdp, base: &StochasticPolicy) -> f64 {
    let mut next = vec![1.0f64; m.num_states];
    for h in (0..m.horizon).rev() {
        let mut cur = vec![f64::NEG_INFINITY; m.num_states];
        for x in 0..m.num_states {
            for a in 0..m.num_actions {
                let pb = base.probs[h][x][a];
                let step = if pb <= 0.0 { f64::INFINITY } else { 1.0 / pb };
                let cont = m.transitions[h][x][a]
                    .iter()
                    .filter(|&&(_, p)| p > 0.0)
                    .map(|&(x2, _)| next[x2])
                    .fold(f64::NEG_INFINITY, f64::max);
                let val = step * cont.max(0.0);
                if val > cur[x] {
                    cur[x] = val;
                }
            }
        }
        next = cur;
    }
    m.initial_support()
        .iter()
        .map(|&(x, _)| next[x])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lower bound on alpha from a likelihood-ratio supremum: ratio^{-1/2} * Delta.
pub fn bound_lemma51(ratio: f64, delta: f64) -> f64 {
    if ratio.is_finite() {
        delta / ratio.sqrt()
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClosedFormParams {
    pub delta: f64,
    pub eps: f64,
    pub num_actions: usize,
    pub horizon: usize,
    pub breadcrumb_spacing: Option<usize>,
    pub delta_p: Option<f64>,
    pub softmax_beta: Option<f64>,
}

/// Pure formula evaluation of every applicable closed-form lower bound.
pub fn closed_form_bounds(p: &ClosedFormParams) -> BoundTable {
    let a = p.num_actions as f64;
    let h = p.horizon as f64;
    let mut t = BoundTable {
        eps_greedy_worst_case: Some((p.eps / a).powf(h / 2.0) * p.delta),
        ..BoundTable::default()
    };
    if let Some(beta) = p.softmax_beta {
        t.softmax_worst_case = Some((a * beta.exp()).powf(-h / 2.0) * p.delta);
    }
    if let Some(dp) = p.delta_p {
        if dp.is_finite() {
            t.action_variation = Some((p.eps / (a * dp.powf(h))).sqrt() * p.delta);
            if dp == 1.0 {
                t.contextual_bandit = Some((p.eps / a).sqrt() * p.delta);
            }
        }
    }
    if let Some(b) = p.breadcrumb_spacing {
        t.breadcrumb = Some((p.eps / a).powf(b as f64 / 2.0) / (2.0 * h));
    }
    t
}

// ---------------------------------------------------------------------------
// Multiplicative action variation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ActionVariationReport {
    #[serde(serialize_with = "ser_radius")]
    pub delta_p: f64,
    /// (h, x, a, a', x') achieving the maximal ratio P(x'|x,a)/P(x'|x,a').
    pub witness: Option<(usize, usize, usize, usize, usize)>,
}

/// delta_P = max over (h, x, a, a', x') of P(x'|x,a) / P(x'|x,a'), skipping
/// 0/0 and reporting +inf for positive/0.
pub fn action_variation(m: &TabularMdp) -> ActionVariationReport {
    let mut best = 1.0f64;
    let mut witness = None;
    for h in 0..m.horizon {
        for x in 0..m.num_states {
            let dense: Vec<Vec<f64>> = (0..m.num_actions)
                .map(|a| {
                    let mut row = vec![0.0; m.num_states];
                    for &(x2, p) in &m.transitions[h][x][a] {
                        row[x2] += p;
                    }
                    row
                })
                .collect();
            for a in 0..m.num_actions {
                for a2 in 0..m.num_actions {
                    if a == a2 {
                        continue;
                    }
                    for x2 in 0..m.num_states {
                        let (num, den) = (dense[a][x2], dense[a2][x2]);
                        if num <= 0.0 {
                            continue;
                        }
                        let r = if den <= 0.0 { f64::INFINITY } else { num / den };
                        if r > best {
                            best = r;
                            witness = Some((h + 1, x, a, a2, x2));
                            if best.is_infinite() {
                                return ActionVariationReport { delta_p: best, witness };
                            }
                        }
                    }
                }
            }
        }
    }
    ActionVariationReport { delta_p: best, witness }
}

// ---------------------------------------------------------------------------
// Covering length
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    /// Median episodes to full coverage; None when more than half the
    /// trials exhausted the budget.
    pub empirical_median: Option<u64>,
    /// Per-trial episode counts (None = budget exhausted).
    pub per_trial: Vec<Option<u64>>,
    pub p_min: f64,
    /// ln 2 / (-ln(1 - p_min)): episodes needed before the rarest pair is
    /// seen with probability 1/2.
    pub analytic_lower: f64,
    /// (h, x, a) triplets with zero occupancy, excluded from the target.
    pub excluded: Vec<(usize, usize, usize)>,
}

/// Simulates episodes until every positive-occupancy (h, x, a) triplet has
/// been visited, `trials` times; reports the median against the geometric
/// lower bound for the rarest pair.
pub fn covering_length(
    m: &TabularMdp,
    pi: &StochasticPolicy,
    trials: usize,
    budget: u64,
    seed: u64,
) -> Result<CoveringReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    pi.validate(m)?;
    let occ = m.occupancy(pi);
    let mut target = vec![false; m.horizon * m.num_states * m.num_actions];
    let mut excluded = Vec::new();
    let mut p_min = f64::INFINITY;
    let mut target_count = 0usize;
    let flat = |h: usize, x: usize, a: usize| (h * m.num_states + x) * m.num_actions + a;
    for h in 0..m.horizon {
        for x in 0..m.num_states {
            for a in 0..m.num_actions {
                let p = occ.mu[h][x][a];
                if p > 0.0 {
                    target[flat(h, x, a)] = true;
                    target_count += 1;
                    if p < p_min {
                        p_min = p;
                    }
                } else {
                    excluded.push((h + 1, x, a));
                }
            }
        }
    }
    let analytic_lower = if p_min < 1.0 {
        2.0f64.ln() / -(1.0 - p_min).ln()
    } else {
        0.0
    };

    let per_trial: Vec<Option<u64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = crate::util::episode_seed(seed, trial as u64);
            let mut visited = vec![false; target.len()];
            let mut remaining = target_count;
            for episode in 1..=budget {
                let ep = m.sample_episode(pi, crate::util::episode_seed(trial_seed, episode));
                for (h, s) in ep.steps.iter().enumerate() {
                    let idx = flat(h, s.state, s.action);
                    if target[idx] && !visited[idx] {
                        visited[idx] = true;
                        remaining -= 1;
                    }
                }
                if remaining == 0 {
                    return Some(episode);
                }
            }
            None
        })
        .collect();

    let mut sorted: Vec<Option<u64>> = per_trial.clone();
    sorted.sort_by_key(|v| v.unwrap_or(u64::MAX));
    let empirical_median = sorted[(trials - 1) / 2];

    Ok(CoveringReport { empirical_median, per_trial, p_min, analytic_lower, excluded })
}

// ---------------------------------------------------------------------------
// Value-difference decomposition check
// ---------------------------------------------------------------------------

/// Both sides of the value-difference bound
/// V^{pi'} - V^{pi_f} <= sum_h E_{pi_f}[E_h f] - sum_h E_{pi'}[E_h f],
/// computed by exact DP. Returns (lhs, rhs).
pub fn regret_decomp_check(
    m: &TabularMdp,
    f: &QTable,
    pi_prime: &StochasticPolicy,
) -> (f64, f64) {
    let pi_f = greedy(f);
    let lhs = m.policy_value(pi_prime).initial_value - m.policy_value(&pi_f).initial_value;
    let (e_f, _) = m.residual_expectations(f, &pi_f);
    let (e_p, _) = m.residual_expectations(f, pi_prime);
    let rhs = e_f.iter().sum::<f64>() - e_p.iter().sum::<f64>();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{
        chain_mdp, contextual_bandit, tree_mdp, ChainSpec, TreeVariant,
    };
    use crate::testing::{random_mdp, random_policy, random_qtable};

    /// All-zero Q-table: greedy takes action 0 everywhere, which is wrong at
    /// every step of the all-right optimal tree path.
    fn all_wrong_tree_f(depth: usize) -> QTable {
        let env = tree_mdp(depth, TreeVariant::Goal).unwrap();
        QTable::zeros(env.mdp.horizon, env.mdp.num_states, env.mdp.num_actions)
    }

    #[test]
    fn min_radius_is_one_for_pure_exploitation() {
        let m = random_mdp(3, 2, 3, 1);
        let f = random_qtable(&m, 2);
        let pi = greedy(&f);
        let mu = m.occupancy(&pi);
        assert_eq!(min_radius(&mu, &mu, &mu), 1.0);
    }

    #[test]
    fn bandit_radius_is_at_most_a_over_eps() {
        let m = contextual_bandit(&[vec![0.6, 0.2], vec![0.1, 0.4]], 2).unwrap();
        let eps = 0.3;
        for seed in 0..10 {
            let f = random_qtable(&m, seed);
            let phi_pi = ExplorationMapping::EpsGreedy { eps }.apply(&f);
            let mu_phi = m.occupancy(&phi_pi);
            let mu_f = m.occupancy(&greedy(&f));
            let cand = crate::testing::random_deterministic_policy(&m, 100 + seed);
            let mu_c = m.occupancy(&cand);
            let c = min_radius(&mu_phi, &mu_f, &mu_c);
            assert!(c <= m.num_actions as f64 / eps + 1e-12, "c = {c}");
        }
    }

    #[test]
    fn tree_radius_matches_reciprocal_reach_probability() {
        // Optimal policy vs epsilon-greedy around an all-wrong f: the
        // binding ratio is the last path step, (2/eps)^{H-1} for depth H.
        for depth in [3usize, 4] {
            let env = tree_mdp(depth, TreeVariant::Goal).unwrap();
            let m = &env.mdp;
            let eps = 0.1;
            let f = all_wrong_tree_f(depth);
            let phi_pi = ExplorationMapping::EpsGreedy { eps }.apply(&f);
            let mu_phi = m.occupancy(&phi_pi);
            let mu_f = m.occupancy(&greedy(&f));
            let mu_star = m.occupancy(&m.optimal_values().greedy);
            let c = min_radius(&mu_phi, &mu_f, &mu_star);
            let expect = (2.0 / eps).powi(depth as i32 - 1);
            assert!(
                (c - expect).abs() < expect * 1e-12,
                "depth {depth}: c = {c}, expect {expect}"
            );
        }
    }

    #[test]
    fn gap_is_zero_for_optimal_greedy() {
        let m = random_mdp(3, 2, 3, 5);
        let q_star = m.q_star_table();
        let report = myopic_gap_tabular(
            &m,
            &q_star,
            &ExplorationMapping::EpsGreedy { eps: 0.2 },
            &CandidateSet::Exhaustive,
        )
        .unwrap();
        assert!(report.alpha.abs() < 1e-12);
        assert!(report.suboptimality_gap.abs() < 1e-12);
    }

    #[test]
    fn tree_goal_gap_matches_closed_form() {
        for depth in [2usize, 3] {
            for eps in [0.1, 0.3] {
                let env = tree_mdp(depth, TreeVariant::Goal).unwrap();
                let f = all_wrong_tree_f(depth);
                let report = myopic_gap_tabular(
                    &env.mdp,
                    &f,
                    &ExplorationMapping::EpsGreedy { eps },
                    &CandidateSet::Exhaustive,
                )
                .unwrap();
                let expect = (eps / 2.0).powf((depth as f64 - 1.0) / 2.0);
                assert!(
                    (report.alpha - expect).abs() < 1e-9,
                    "depth {depth} eps {eps}: {} vs {expect}",
                    report.alpha
                );
                // The achieving policy follows the optimal path.
                for &(s, a) in &env.optimal_path {
                    let h = env
                        .optimal_path
                        .iter()
                        .position(|&(ss, _)| ss == s)
                        .unwrap();
                    assert_eq!(report.achieving_policy.action_at(h, s), a);
                }
            }
        }
    }

    #[test]
    fn tree_path_gap_has_exact_per_function_values() {
        // Depth 3, horizon 2, eps-greedy. With e = eps/2 and g = 1 - eps/2,
        // hand enumeration of the 8 deterministic policies gives
        //   alpha = (1/3) sqrt(e g)  for greedy policies wrong at the root's
        //                            successor or wrong at the root only,
        //   alpha = (2/3) sqrt(e g)  for the policy wrong at the root but
        //                            right afterwards.
        let env = tree_mdp(3, TreeVariant::Path).unwrap();
        let m = &env.mdp;
        let eps = 0.1;
        let (e, g) = (eps / 2.0, 1.0 - eps / 2.0);
        let phi = ExplorationMapping::EpsGreedy { eps };
        let reps = greedy_policy_representatives(m).unwrap();
        let v_star = m.optimal_values().initial_value;
        let mut seen = 0usize;
        for f in &reps {
            let pi = greedy(f);
            let v = m.policy_value(&pi).initial_value;
            if v_star - v <= 1e-12 {
                continue;
            }
            let report = myopic_gap_tabular(m, f, &phi, &CandidateSet::Exhaustive).unwrap();
            // Fixing the root alone recovers both path rewards exactly when
            // the greedy policy is wrong at the root but already right at
            // the on-path successor (state 2).
            let root_wrong = pi.action_at(0, 0) == 0;
            let below_right = pi.action_at(1, 2) == 1;
            let expect = if root_wrong && below_right {
                (2.0 / 3.0) * (e * g).sqrt()
            } else {
                (1.0 / 3.0) * (e * g).sqrt()
            };
            assert!(
                (report.alpha - expect).abs() < 1e-9,
                "pi = ({}, {}, {}): alpha {} vs {expect}",
                pi.action_at(0, 0),
                pi.action_at(1, 1),
                pi.action_at(1, 2),
                report.alpha
            );
            seen += 1;
        }
        assert_eq!(seen, 6);
    }

    #[test]
    fn chain_class_gap_matches_closed_form() {
        for h_star in [2usize, 3] {
            let spec = ChainSpec {
                horizon: h_star,
                num_actions: 2,
                eps: 0.5,
                h_star,
                copies: 1,
            };
            let m = chain_mdp(&spec).unwrap();
            let reps = greedy_policy_representatives(&m).unwrap();
            let report = gap_over_class(
                &m,
                &reps,
                &ExplorationMapping::EpsGreedy { eps: spec.eps },
                0.0,
                &CandidateSet::Exhaustive,
            )
            .unwrap();
            let expect = 0.25 * (spec.eps / 2.0).powf(h_star as f64 / 2.0);
            assert!(
                (report.alpha - expect).abs() < 1e-9,
                "h* = {h_star}: {} vs {expect}",
                report.alpha
            );
        }
    }

    #[test]
    fn empty_class_gives_sentinel() {
        let m = random_mdp(3, 2, 2, 3);
        let reps = greedy_policy_representatives(&m).unwrap();
        let report = gap_over_class(
            &m,
            &reps,
            &ExplorationMapping::EpsGreedy { eps: 0.5 },
            1.0,
            &CandidateSet::Exhaustive,
        )
        .unwrap();
        assert!(report.alpha.is_infinite());
        assert_eq!(report.radius, 1.0);
        assert_eq!(report.class_size, 0);
    }

    #[test]
    fn enumeration_refuses_oversized_spaces() {
        let m = random_mdp(10, 4, 10, 4); // 4^100 candidates
        let f = random_qtable(&m, 1);
        let err = myopic_gap_tabular(
            &m,
            &f,
            &ExplorationMapping::EpsGreedy { eps: 0.5 },
            &CandidateSet::Exhaustive,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CandidateOverflow { .. }));
    }

    #[test]
    fn testfns_empty_family_maximizes_plain_gap() {
        let m = random_mdp(3, 2, 3, 6);
        let f = random_qtable(&m, 7);
        let report = myopic_gap_testfns(
            &m,
            &f,
            &ExplorationMapping::EpsGreedy { eps: 0.3 },
            &CandidateSet::Exhaustive,
            &[],
        )
        .unwrap();
        assert_eq!(report.radius_c, 1.0);
        let delta = report.suboptimality_gap;
        assert!((report.alpha - delta).abs() < 1e-12);
    }

    #[test]
    fn testfns_indicator_family_matches_occupancy_form() {
        for seed in 0..5 {
            let m = random_mdp(3, 2, 3, 30 + seed);
            let f = random_qtable(&m, 60 + seed);
            let phi = ExplorationMapping::EpsGreedy { eps: 0.25 };
            let tab = myopic_gap_tabular(&m, &f, &phi, &CandidateSet::Exhaustive).unwrap();
            let fam = indicator_residual_surrogates(&m, 0.5);
            let tf = myopic_gap_testfns(&m, &f, &phi, &CandidateSet::Exhaustive, &fam).unwrap();
            assert!(
                (tab.alpha - tf.alpha).abs() < 1e-9,
                "seed {seed}: {} vs {}",
                tab.alpha,
                tf.alpha
            );
        }
    }

    #[test]
    fn testfns_alpha_grows_as_family_shrinks() {
        let m = random_mdp(3, 2, 3, 70);
        let f = random_qtable(&m, 71);
        let phi = ExplorationMapping::EpsGreedy { eps: 0.25 };
        let fam = indicator_residual_surrogates(&m, 0.5);
        let full = myopic_gap_testfns(&m, &f, &phi, &CandidateSet::Exhaustive, &fam).unwrap();
        let half = myopic_gap_testfns(&m, &f, &phi, &CandidateSet::Exhaustive, &fam[..fam.len() / 2])
            .unwrap();
        assert!(half.alpha >= full.alpha - 1e-12);
    }

    #[test]
    fn likelihood_ratio_examples() {
        let m = random_mdp(3, 2, 3, 9);
        let pi = random_policy(&m, 10);
        assert!((likelihood_ratio_sup(&m, &pi, &pi) - 1.0).abs() < 1e-12);

        let eps = 0.2;
        let f = random_qtable(&m, 11);
        let pi_f = greedy(&f);
        let phi_pi = ExplorationMapping::EpsGreedy { eps }.apply(&f);
        let aligned = likelihood_ratio_sup(&m, &pi_f, &phi_pi);
        let expect = (1.0 - eps + eps / m.num_actions as f64).powi(-(m.horizon as i32));
        assert!((aligned - expect).abs() < 1e-9);

        let cap = (m.num_actions as f64 / eps).powi(m.horizon as i32);
        for seed in 0..10 {
            let det = crate::testing::random_deterministic_policy(&m, 500 + seed);
            assert!(likelihood_ratio_sup(&m, &det, &phi_pi) <= cap + 1e-9);
        }
        assert!(sup_likelihood_ratio_deterministic(&m, &phi_pi) <= cap + 1e-9);
    }

    #[test]
    fn closed_form_bound_examples() {
        let t = closed_form_bounds(&ClosedFormParams {
            delta: 0.5,
            eps: 0.1,
            num_actions: 2,
            horizon: 2,
            breadcrumb_spacing: None,
            delta_p: None,
            softmax_beta: None,
        });
        assert!((t.eps_greedy_worst_case.unwrap() - 0.025).abs() < 1e-15);

        // delta_P = 1 makes the action-variation bound the bandit bound.
        let t1 = closed_form_bounds(&ClosedFormParams {
            delta: 0.5,
            eps: 0.1,
            num_actions: 2,
            horizon: 3,
            breadcrumb_spacing: None,
            delta_p: Some(1.0),
            softmax_beta: None,
        });
        assert!(
            (t1.action_variation.unwrap() - t1.contextual_bandit.unwrap()).abs() < 1e-15
        );

        // H = 1 collapses the worst case to the bandit bound.
        let t2 = closed_form_bounds(&ClosedFormParams {
            delta: 0.5,
            eps: 0.1,
            num_actions: 2,
            horizon: 1,
            breadcrumb_spacing: None,
            delta_p: Some(1.0),
            softmax_beta: None,
        });
        assert!(
            (t2.eps_greedy_worst_case.unwrap() - t2.contextual_bandit.unwrap()).abs() < 1e-15
        );
    }

    #[test]
    fn action_variation_examples() {
        let bandit = contextual_bandit(&[vec![0.5, 0.2], vec![0.1, 0.6]], 2).unwrap();
        let r = action_variation(&bandit);
        assert_eq!(r.delta_p, 1.0);

        let spec = ChainSpec { horizon: 2, num_actions: 2, eps: 0.5, h_star: 2, copies: 1 };
        let chain = chain_mdp(&spec).unwrap();
        assert!(action_variation(&chain).delta_p.is_infinite());

        let mut m = random_mdp(2, 2, 1, 1);
        m.transitions[0][0][0] = vec![(0, 0.5), (1, 0.5)];
        m.transitions[0][0][1] = vec![(0, 0.25), (1, 0.75)];
        m.transitions[0][1][0] = vec![(0, 0.5), (1, 0.5)];
        m.transitions[0][1][1] = vec![(0, 0.5), (1, 0.5)];
        let r = action_variation(&m);
        assert!((r.delta_p - 2.0).abs() < 1e-12);
        assert_eq!(r.witness.unwrap(), (1, 0, 0, 1, 0));
    }

    #[test]
    fn covering_single_pair_takes_one_episode() {
        let m = contextual_bandit(&[vec![0.5]], 1).unwrap();
        let pi = StochasticPolicy::uniform(1, 1, 1);
        let report = covering_length(&m, &pi, 11, 100, 3).unwrap();
        assert_eq!(report.empirical_median, Some(1));
        assert!(report.excluded.is_empty());
        assert_eq!(report.p_min, 1.0);
    }

    #[test]
    fn covering_zero_occupancy_pairs_are_excluded() {
        let env = tree_mdp(3, TreeVariant::Goal).unwrap();
        let pi = env.mdp.optimal_values().greedy;
        let report = covering_length(&env.mdp, &pi, 5, 10, 1).unwrap();
        // The deterministic policy covers its own path immediately and
        // everything else is excluded.
        assert_eq!(report.empirical_median, Some(1));
        assert!(!report.excluded.is_empty());
    }

    #[test]
    fn regret_decomp_examples_hold() {
        let m = random_mdp(4, 2, 3, 12);
        let q_star = m.q_star_table();
        let pi = random_policy(&m, 13);
        let (lhs, rhs) = regret_decomp_check(&m, &q_star, &pi);
        assert!(lhs <= 1e-12);
        assert!(rhs.abs() < 1e-10);

        let mut rewardless = m.clone();
        for layer in &mut rewardless.rewards {
            for row in layer {
                for r in row {
                    *r = crate::mdp::RewardDist::constant(0.0);
                }
            }
        }
        let f0 = QTable::zeros(m.horizon, m.num_states, m.num_actions);
        let (l0, r0) = regret_decomp_check(&rewardless, &f0, &pi);
        assert!(l0.abs() < 1e-12 && r0.abs() < 1e-12);
    }

    #[test]
    fn gap_report_invariants_on_random_instances() {
        for seed in 0..10 {
            let m = random_mdp(3, 2, 3, 700 + seed);
            let f = random_qtable(&m, 800 + seed);
            let report = myopic_gap_tabular(
                &m,
                &f,
                &ExplorationMapping::EpsGreedy { eps: 0.3 },
                &CandidateSet::Exhaustive,
            )
            .unwrap();
            assert!(report.alpha >= 0.0);
            assert!(report.alpha <= report.suboptimality_gap + 1e-9);
            assert!(report.radius_c >= 1.0);
            for b in [
                report.bounds.likelihood_ratio,
                report.bounds.eps_greedy_worst_case,
                report.bounds.action_variation,
                report.bounds.contextual_bandit,
            ]
            .into_iter()
            .flatten()
            {
                assert!(b <= report.alpha + 1e-9, "bound {b} vs alpha {}", report.alpha);
            }
        }
    }

    #[test]
    fn certified_mode_is_a_lower_bound() {
        let m = random_mdp(3, 2, 3, 900);
        let f = random_qtable(&m, 901);
        let phi = ExplorationMapping::EpsGreedy { eps: 0.3 };
        let full = myopic_gap_tabular(&m, &f, &phi, &CandidateSet::Exhaustive).unwrap();
        let certified = myopic_gap_tabular(
            &m,
            &f,
            &phi,
            &CandidateSet::Certified(vec![m.optimal_values().greedy]),
        )
        .unwrap();
        assert_eq!(certified.search_mode, SearchMode::CertifiedLowerBound);
        assert!(certified.alpha <= full.alpha + 1e-12);
        assert!(certified.alpha >= 0.0);
    }
}
