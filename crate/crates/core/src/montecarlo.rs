//! Chunked Monte-Carlo driver and streaming moment accumulators.
//!
//! Samples are split into fixed-size chunks. Chunk `i` always draws from
//! sub-stream `i` of the caller's generator and partial results are merged
//! in chunk order, so the outcome does not depend on the rayon pool size.

use rayon::prelude::*;

use crate::randmat::Rng;

/// Samples per chunk. Part of the reproducibility contract: changing it
/// changes every Monte-Carlo output.
pub const CHUNK_SIZE: usize = 256;

/// Running mean and co-moment matrix of a `D`-dimensional sample.
#[derive(Clone, Debug)]
pub struct Moments<const D: usize> {
    n: u64,
    mean: [f64; D],
    comoment: [[f64; D]; D],
}

impl<const D: usize> Default for Moments<D> {
    fn default() -> Self {
        Self { n: 0, mean: [0.0; D], comoment: [[0.0; D]; D] }
    }
}

#[allow(clippy::needless_range_loop)]
impl<const D: usize> Moments<D> {
    pub fn push(&mut self, x: [f64; D]) {
        self.n += 1;
        let n = self.n as f64;
        let mut delta = [0.0; D];
        for k in 0..D {
            delta[k] = x[k] - self.mean[k];
            self.mean[k] += delta[k] / n;
        }
        for i in 0..D {
            for j in 0..D {
                self.comoment[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    /// Chan's pairwise combination.
    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let mut delta = [0.0; D];
        for k in 0..D {
            delta[k] = other.mean[k] - self.mean[k];
        }
        for i in 0..D {
            for j in 0..D {
                self.comoment[i][j] += other.comoment[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for k in 0..D {
            self.mean[k] += delta[k] * nb / n;
        }
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> [f64; D] {
        self.mean
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> [[f64; D]; D] {
        let mut out = [[0.0; D]; D];
        if self.n < 2 {
            return out;
        }
        let denom = (self.n - 1) as f64;
        for i in 0..D {
            for j in 0..D {
                out[i][j] = self.comoment[i][j] / denom;
            }
        }
        out
    }

    /// Standard error of each component mean.
    pub fn std_errors(&self) -> [f64; D] {
        let cov = self.covariance();
        let mut out = [0.0; D];
        for k in 0..D {
            out[k] = (cov[k][k] / self.n as f64).sqrt();
        }
        out
    }
}

/// A Monte-Carlo value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl MonteCarloEstimate {
    pub fn from_moments(m: &Moments<1>) -> Self {
        Self { value: m.mean()[0], std_error: m.std_errors()[0], n_samples: m.count() }
    }
}

/// Runs `chunk(rng, count)` over `ceil(n_samples / CHUNK_SIZE)` chunks in
/// parallel and returns the per-chunk results in chunk order.
pub fn run_chunks<T, F>(n_samples: usize, base: &Rng, chunk: F) -> Vec<T>
where
    T: Send,
    F: Fn(Rng, usize) -> T + Sync,
{
    let n_chunks = n_samples.div_ceil(CHUNK_SIZE);
    (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let count = CHUNK_SIZE.min(n_samples - i * CHUNK_SIZE);
            chunk(base.substream(i as u64), count)
        })
        .collect()
}
