use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::{Error, Result};

/// Sample indices drawn for round `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniBatch {
    pub indices: Vec<usize>,
    pub t: u64,
}

impl MiniBatch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Generator for round `t` of a run seeded with `seed`. Each round reads its
/// own ChaCha stream, so any round can be replayed without the others.
pub fn round_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// With-replacement uniform mini-batch of size `m` for round `t`.
///
/// `m` equal to the dataset size selects full-batch mode and returns every
/// index in order.
pub fn sample_batch(dataset: &Dataset, m: usize, t: u64, seed: u64) -> Result<MiniBatch> {
    let n = dataset.len();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("batch size {m} outside 1..={n}")));
    }
    if m == n {
        return Ok(MiniBatch { indices: (0..n).collect(), t });
    }
    let mut rng = round_rng(seed, t);
    let indices = (0..m).map(|_| rng.random_range(0..n)).collect();
    Ok(MiniBatch { indices, t })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        Dataset::new((0..n).map(|i| vec![i as f64]).collect(), (0..n).map(|i| i % 2).collect()).unwrap()
    }

    #[test]
    fn full_batch() {
        let ds = toy(6);
        assert_eq!(sample_batch(&ds, 6, 1, 0).unwrap().indices, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn keyed_by_seed_and_round() {
        let ds = toy(100);
        let a = sample_batch(&ds, 8, 3, 7).unwrap();
        assert_eq!(a, sample_batch(&ds, 8, 3, 7).unwrap());
        assert_ne!(a.indices, sample_batch(&ds, 8, 4, 7).unwrap().indices);
        assert_ne!(a.indices, sample_batch(&ds, 8, 3, 8).unwrap().indices);
        assert!(a.indices.iter().all(|&i| i < 100));
    }

    #[test]
    fn out_of_range_sizes() {
        let ds = toy(5);
        assert!(sample_batch(&ds, 0, 1, 0).is_err());
        assert!(sample_batch(&ds, 6, 1, 0).is_err());
    }

    #[test]
    fn frequencies_are_uniform() {
        let n = 20;
        let ds = toy(n);
        let mut counts = vec![0u64; n];
        let draws = 100_000u64;
        let m = 10;
        for t in 1..=draws / m as u64 {
            for i in sample_batch(&ds, m, t, 11).unwrap().indices {
                counts[i] += 1;
            }
        }
        let p = 1.0 / n as f64;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "index {i}: {c} vs {mean} +- {sd}");
        }
    }
}
