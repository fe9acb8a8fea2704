//! Splittable, counter-addressed random streams.
//!
//! A stream is named by a master seed and a path of integer labels. Each
//! path hashes to an independent ChaCha8 key, so a draw depends only on
//! where it sits in the label tree and never on the order in which other
//! streams were consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    master_seed: u64,
    stream_path: Vec<u64>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used to turn stage and spec names into stable labels.
pub fn label_of(name: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream {
            master_seed,
            stream_path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.stream_path
    }

    /// Child stream one level below this one.
    pub fn derive(&self, label: u64) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.push(label);
        RngStream {
            master_seed: self.master_seed,
            stream_path,
        }
    }

    pub fn derive_named(&self, name: &str) -> Self {
        self.derive(label_of(name))
    }

    fn key(&self) -> [u8; 32] {
        let mut h = splitmix(self.master_seed);
        for (depth, &label) in self.stream_path.iter().enumerate() {
            h = splitmix(h ^ splitmix(label ^ (depth as u64).wrapping_mul(GOLDEN)));
        }
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            h = splitmix(h.wrapping_add(i as u64));
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        key
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}

/// `n` i.i.d. draws from Normal(mu, sigma²). With `sigma == 0` every draw
/// is exactly `mu`.
pub fn gaussian_draw(stream: &RngStream, mu: f64, sigma: f64, n: usize) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian_draw needs finite mu and sigma >= 0, got mu={mu}, sigma={sigma}"
        )));
    }
    let mut rng = stream.rng();
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mu + sigma * z
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_path_same_sequence() {
        let a = RngStream::new(7).derive(3).derive(1);
        let b = RngStream::new(7).derive(3).derive(1);
        let (mut ra, mut rb) = (a.rng(), b.rng());
        for _ in 0..16 {
            assert_eq!(ra.random::<u64>(), rb.random::<u64>());
        }
    }

    #[test]
    fn distinct_paths_differ() {
        let root = RngStream::new(7);
        let mut seen = std::collections::HashSet::new();
        for path in [vec![], vec![0], vec![1], vec![0, 1], vec![1, 0], vec![0, 0]] {
            let s = path.iter().fold(root.clone(), |s, &l| s.derive(l));
            let v: u64 = s.rng().random();
            assert!(seen.insert(v), "collision for {path:?}");
        }
        let other: u64 = RngStream::new(8).rng().random();
        assert!(seen.insert(other));
    }

    #[test]
    fn zero_sigma_is_constant() {
        let d = gaussian_draw(&RngStream::new(1), 0.0, 0.0, 3).unwrap();
        assert_eq!(d, vec![0.0, 0.0, 0.0]);
        let d = gaussian_draw(&RngStream::new(1), 2.5, 0.0, 4).unwrap();
        assert!(d.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(gaussian_draw(&RngStream::new(1), 0.0, -1.0, 3).is_err());
    }

    #[test]
    fn monte_carlo_moments() {
        let n = 1_000_000;
        let d = gaussian_draw(&RngStream::new(2024).derive(5), 0.0, 0.01, n).unwrap();
        let m = crate::series::mean(&d);
        let s = crate::series::pop_std(&d);
        assert!(m.abs() < 5e-5, "mean {m}");
        assert!((s / 0.01 - 1.0).abs() < 0.02, "std {s}");
    }
}
