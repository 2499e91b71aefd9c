//! Seeded randomness: admissible test profiles and Monte Carlo accumulation.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`, so batches can
//! run in parallel and still merge into byte-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::profile::{LogBump, Profile};
use crate::scalar::{lit, to_f64, Real};
use crate::weight::Interval;

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Log-radius window used to place random bumps inside `interval`.
fn log_window<T: Real>(interval: &Interval<T>) -> (f64, f64) {
    let lower = to_f64(interval.lower);
    let upper = to_f64(interval.upper);
    let (lo, hi) = match (lower > 0.0, upper.is_finite()) {
        (true, true) => (lower.ln(), upper.ln()),
        (true, false) => (lower.ln(), lower.ln() + 8.0),
        (false, true) => (upper.ln() - 8.0, upper.ln()),
        (false, false) => (-5.0, 5.0),
    };
    let margin = 0.02 * (hi - lo);
    (lo + margin, hi - margin)
}

/// A random smooth profile compactly supported strictly inside `interval`.
pub fn random_profile<T: Real, R: Rng>(interval: &Interval<T>, rng: &mut R) -> Result<Profile<T>> {
    let (lo, hi) = log_window(interval);
    let len = hi - lo;
    let count = rng.gen_range(1..=4);
    let mut bumps = Vec::with_capacity(count);
    for i in 0..count {
        let width = rng.gen_range(0.05..0.5) * len;
        let center = rng.gen_range((lo + width)..=(hi - width));
        let amplitude = if i == 0 {
            rng.gen_range(0.5..1.0)
        } else {
            rng.gen_range(-1.0..1.0)
        };
        bumps.push(LogBump {
            amplitude: lit(amplitude),
            center: lit(center),
            width: lit(width),
        });
    }
    Profile::log_bump_sum(bumps)
}

/// `count` random profiles from stream 0 of `seed`.
pub fn random_profiles<T: Real>(interval: &Interval<T>, count: usize, seed: u64) -> Result<Vec<Profile<T>>> {
    let mut rng = stream_rng(seed, 0);
    (0..count).map(|_| random_profile(interval, &mut rng)).collect()
}

/// Mean, standard error and provenance of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
    pub seed: u64,
}

/// Running sums for a ratio estimator `mean(a) / mean(b)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioAccumulator {
    pub n: usize,
    pub sa: f64,
    pub sb: f64,
    pub saa: f64,
    pub sbb: f64,
    pub sab: f64,
}

impl RatioAccumulator {
    pub fn push(&mut self, a: f64, b: f64) {
        self.n += 1;
        self.sa += a;
        self.sb += b;
        self.saa += a * a;
        self.sbb += b * b;
        self.sab += a * b;
    }

    pub fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.sa += o.sa;
        self.sb += o.sb;
        self.saa += o.saa;
        self.sbb += o.sbb;
        self.sab += o.sab;
    }

    pub fn mean_a(&self) -> f64 {
        self.sa / self.n as f64
    }

    pub fn mean_b(&self) -> f64 {
        self.sb / self.n as f64
    }

    /// Standard error of `mean(a)`.
    pub fn std_error_a(&self) -> f64 {
        let n = self.n as f64;
        let ma = self.mean_a();
        ((self.saa / n - ma * ma).max(0.0) / n).sqrt()
    }

    /// Ratio and its delta-method standard error.
    pub fn ratio(&self) -> (f64, f64) {
        let n = self.n as f64;
        let (ma, mb) = (self.mean_a(), self.mean_b());
        let r = ma / mb;
        let va = self.saa / n - ma * ma;
        let vb = self.sbb / n - mb * mb;
        let cab = self.sab / n - ma * mb;
        let var = (va - 2.0 * r * cab + r * r * vb).max(0.0) / (n * mb * mb);
        (r, var.sqrt())
    }
}

/// Runs `samples` draws split into fixed-size batches, each on its own stream,
/// and merges the per-batch results in batch order.
pub fn parallel_batches<A, F>(samples: usize, seed: u64, stream_offset: u64, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> A + Sync,
{
    const BATCH: usize = 1 << 14;
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|i| {
            let n = BATCH.min(samples - i * BATCH);
            let mut rng = stream_rng(seed, stream_offset + i as u64);
            f(&mut rng, n)
        })
        .collect()
}

/// Ratio estimator over `samples` draws; `draw` returns one `(a, b)` pair.
pub fn ratio_estimate<F>(samples: usize, seed: u64, stream_offset: u64, draw: F) -> RatioAccumulator
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
{
    let parts = parallel_batches(samples, seed, stream_offset, |rng, n| {
        let mut acc = RatioAccumulator::default();
        for _ in 0..n {
            let (a, b) = draw(rng);
            acc.push(a, b);
        }
        acc
    });
    let mut total = RatioAccumulator::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_stay_inside_interval() {
        for interval in [
            Interval::new(0.0f64, f64::INFINITY),
            Interval::new(0.0, 1.0),
            Interval::new(1.0, 2.0),
            Interval::new(0.5, f64::INFINITY),
        ] {
            for p in random_profiles(&interval, 50, 3).unwrap() {
                let (lo, hi) = p.support();
                assert!(lo > interval.lower && hi < interval.upper);
            }
        }
    }

    #[test]
    fn seeded_profiles_reproduce() {
        let i = Interval::new(0.0f64, f64::INFINITY);
        let a = random_profiles(&i, 5, 11).unwrap();
        let b = random_profiles(&i, 5, 11).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.support(), y.support());
            assert_eq!(x.value(1.0), y.value(1.0));
        }
    }

    #[test]
    fn ratio_of_uniform_means() {
        let acc = ratio_estimate(100_000, 1, 0, |rng| {
            let u: f64 = rng.gen();
            (u, 1.0)
        });
        let (r, se) = acc.ratio();
        assert!((r - 0.5).abs() < 4.0 * se);
        assert!(se > 0.0 && se < 0.002);
    }

    #[test]
    fn parallel_merge_is_deterministic() {
        let draw = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.gen();
            (u * u, u)
        };
        let a = ratio_estimate(70_000, 9, 0, draw);
        let b = ratio_estimate(70_000, 9, 0, draw);
        assert_eq!(a, b);
    }
}
