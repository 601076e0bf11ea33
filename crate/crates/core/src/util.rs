//! Seeding, hashing, and number-formatting helpers shared across modules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic RNG used everywhere. ChaCha8 keeps streams stable across
/// platforms and library versions, which the byte-for-byte reproducibility
/// contract depends on.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the per-episode seed for episode `t` (1-based) of a run.
pub fn episode_seed(master: u64, t: u64) -> u64 {
    let mut rng = rng_from_seed(master ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(t));
    rng.gen()
}

/// Samples an index from a discrete distribution given as (index, probability)
/// pairs by inverse-CDF walk. Falls back to the last positive-probability
/// entry when rounding pushes the draw past the cumulative sum.
pub fn sample_discrete<R: Rng>(rng: &mut R, entries: &[(usize, f64)]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for &(idx, p) in entries {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(idx);
        if u < acc {
            return idx;
        }
    }
    last.expect("discrete distribution has no positive mass")
}

/// Formats a float with 17 significant digits so the decimal form
/// round-trips to the exact same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{:02x}", b));
    }
    s
}

/// Cheap structural hash for per-episode Q-table fingerprints in run logs.
pub fn fnv1a_f64(values: impl Iterator<Item = f64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips_exactly() {
        for &v in &[0.1, 1.0 / 3.0, 0.5625, 3.0 / 8.0, 1e-300, 0.0] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn discrete_sampler_is_deterministic() {
        let entries = vec![(0usize, 0.25), (1, 0.75)];
        let a: Vec<usize> = {
            let mut rng = rng_from_seed(7);
            (0..20).map(|_| sample_discrete(&mut rng, &entries)).collect()
        };
        let b: Vec<usize> = {
            let mut rng = rng_from_seed(7);
            (0..20).map(|_| sample_discrete(&mut rng, &entries)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn discrete_sampler_skips_zero_mass() {
        let entries = vec![(0usize, 0.0), (1, 1.0)];
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            assert_eq!(sample_discrete(&mut rng, &entries), 1);
        }
    }
}
