//! Monte Carlo estimation of a policy's gain.
//!
//! Randomness comes from ChaCha8 keyed by the user seed, with the sample index
//! as the stream id. Round `r` of a sample consumes the `r`-th 64-bit draw of
//! that stream, so every outcome is a function of `(seed, sample, round)` and
//! the result does not depend on how samples are split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MatchSpec, StyleDistribution};
use crate::policies::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    /// Average of `sign(X_N)` over the samples.
    pub mean: f64,
    /// Unbiased sample standard deviation over `sqrt(samples)`; `None` for one sample.
    pub std_error: Option<f64>,
    pub samples: u64,
    pub seed: u64,
}

/// Inverse-CDF sampling, comparing against win first and then draw.
pub fn sample_outcome(style: &StyleDistribution, u: f64) -> i64 {
    if u < style.win() {
        1
    } else if u < style.win() + style.draw() {
        0
    } else {
        -1
    }
}

/// The random stream of one sample.
pub fn sample_stream(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng
}

/// Plays one `n`-game match and returns `sign(X_N)`.
pub fn simulate_match<R: Rng + ?Sized>(
    spec: &MatchSpec,
    policy: &impl Policy,
    n: usize,
    rng: &mut R,
) -> Result<i64> {
    if n < 1 {
        return Err(Error::InvalidHorizon(n));
    }
    Ok(play(spec, policy, n, rng))
}

fn play<R: Rng + ?Sized>(spec: &MatchSpec, policy: &impl Policy, n: usize, rng: &mut R) -> i64 {
    let (mut score, mut switched) = (0i64, false);
    for round in 0..n {
        let style = spec.style(policy.decide(n - round, score, switched));
        score += sample_outcome(style, rng.gen::<f64>());
        switched |= score == 1;
    }
    score.signum()
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
struct Tally {
    wins: u64,
    losses: u64,
}

impl Tally {
    fn record(mut self, outcome: i64) -> Self {
        match outcome {
            1 => self.wins += 1,
            -1 => self.losses += 1,
            _ => {}
        }
        self
    }

    fn merge(self, other: Self) -> Self {
        Self {
            wins: self.wins + other.wins,
            losses: self.losses + other.losses,
        }
    }
}

fn summarize(t: Tally, samples: u64, seed: u64) -> SimEstimate {
    let n = samples as f64;
    let net = t.wins as f64 - t.losses as f64;
    let std_error = (samples > 1).then(|| {
        // sum of squares of sign outcomes is wins + losses
        let var = (n * (t.wins + t.losses) as f64 - net * net) / (n * (n - 1.0));
        (var.max(0.0) / n).sqrt()
    });
    SimEstimate {
        mean: net / n,
        std_error,
        samples,
        seed,
    }
}

/// Averages `samples` independent matches. Deterministic in
/// `(spec, policy, n, samples, seed)` regardless of the thread count.
pub fn estimate_gain(
    spec: &MatchSpec,
    policy: &(impl Policy + Sync),
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<SimEstimate> {
    check(n, samples)?;
    let tally = (0..samples)
        .into_par_iter()
        .fold(Tally::default, |t, i| {
            t.record(play(spec, policy, n, &mut sample_stream(seed, i)))
        })
        .reduce(Tally::default, Tally::merge);
    Ok(summarize(tally, samples, seed))
}

/// Single-threaded [`estimate_gain`].
pub fn estimate_gain_serial(
    spec: &MatchSpec,
    policy: &impl Policy,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<SimEstimate> {
    check(n, samples)?;
    let tally = (0..samples).fold(Tally::default(), |t, i| {
        t.record(play(spec, policy, n, &mut sample_stream(seed, i)))
    });
    Ok(summarize(tally, samples, seed))
}

fn check(n: usize, samples: u64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidHorizon(n));
    }
    if samples < 1 {
        return Err(Error::InvalidSampleCount);
    }
    Ok(())
}
