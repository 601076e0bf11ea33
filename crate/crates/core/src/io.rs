//! Canonical JSON dump/load for MDPs.
//!
//! The dump is hand-rendered so the byte stream is canonical: fixed key
//! order, probabilities as decimals with 17 significant digits (lossless
//! f64 round-trip). Content hashes of environments are SHA-256 over these
//! bytes.

use crate::error::{Error, Result};
use crate::mdp::{RewardDist, RewardRangeMode, TabularMdp};
use crate::util::{fmt_f64, sha256_hex};
use serde::Deserialize;

fn push_floats(out: &mut String, vals: &[f64]) {
    out.push('[');
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*v));
    }
    out.push(']');
}

/// Renders the canonical JSON document for `m`.
pub fn dump_mdp(m: &TabularMdp) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{{\"S\":{},\"A\":{},\"H\":{},\"x_init\":{}",
        m.num_states, m.num_actions, m.horizon, m.initial_state
    ));
    if let Some(d) = &m.initial_dist {
        out.push_str(",\"init_dist\":");
        push_floats(&mut out, d);
    }
    out.push_str(",\"P\":[");
    for h in 0..m.horizon {
        if h > 0 {
            out.push(',');
        }
        out.push('[');
        for x in 0..m.num_states {
            if x > 0 {
                out.push(',');
            }
            out.push('[');
            for a in 0..m.num_actions {
                if a > 0 {
                    out.push(',');
                }
                let mut dense = vec![0.0; m.num_states];
                for &(x2, p) in &m.transitions[h][x][a] {
                    dense[x2] += p;
                }
                push_floats(&mut out, &dense);
            }
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("],\"R\":[");
    for h in 0..m.horizon {
        if h > 0 {
            out.push(',');
        }
        out.push('[');
        for x in 0..m.num_states {
            if x > 0 {
                out.push(',');
            }
            out.push('[');
            for a in 0..m.num_actions {
                if a > 0 {
                    out.push(',');
                }
                let r = &m.rewards[h][x][a];
                out.push_str("{\"support\":");
                push_floats(&mut out, &r.support);
                out.push_str(",\"probs\":");
                push_floats(&mut out, &r.probs);
                out.push('}');
            }
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("],\"mode\":\"");
    out.push_str(match m.mode {
        RewardRangeMode::Standard => "standard",
        RewardRangeMode::Relaxed => "relaxed",
    });
    out.push_str("\"}");
    out
}

/// SHA-256 hex digest of the canonical dump.
pub fn mdp_content_hash(m: &TabularMdp) -> String {
    sha256_hex(dump_mdp(m).as_bytes())
}

#[derive(Deserialize)]
struct RewardSchema {
    support: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct MdpSchema {
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "A")]
    a: usize,
    #[serde(rename = "H")]
    h: usize,
    x_init: usize,
    #[serde(default)]
    init_dist: Option<Vec<f64>>,
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "R")]
    r: Vec<Vec<Vec<RewardSchema>>>,
    mode: String,
}

/// Parses a JSON document produced by [`dump_mdp`] (or handwritten in the
/// same schema) and validates it.
pub fn load_mdp(json: &str) -> Result<TabularMdp> {
    let schema: MdpSchema = serde_json::from_str(json)?;
    let mode = match schema.mode.as_str() {
        "standard" => RewardRangeMode::Standard,
        "relaxed" => RewardRangeMode::Relaxed,
        other => {
            return Err(Error::InvalidMdp(format!("unknown mode {:?}", other)));
        }
    };
    let transitions = schema
        .p
        .into_iter()
        .map(|layer| {
            layer
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|dense| {
                            dense
                                .into_iter()
                                .enumerate()
                                .filter(|&(_, p)| p != 0.0)
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let rewards = schema
        .r
        .into_iter()
        .map(|layer| {
            layer
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|r| RewardDist { support: r.support, probs: r.probs })
                        .collect()
                })
                .collect()
        })
        .collect();
    let m = TabularMdp {
        num_states: schema.s,
        num_actions: schema.a,
        horizon: schema.h,
        initial_state: schema.x_init,
        initial_dist: schema.init_dist,
        transitions,
        rewards,
        mode,
    };
    let report = m.validate();
    if !report.ok() {
        return Err(Error::InvalidMdp(report.violations.join("; ")));
    }
    Ok(m)
}
