//! Closed-form quantities for a single fixed style and the asymptotic limits
//! of catenaccio and the optimal policy.
//!
//! The probability that a fixed-style walk ends positive is a trinomial sum
//! over (wins, losses). Terms are evaluated in log space from a compensated
//! log-factorial table so that horizons in the tens of thousands neither
//! overflow nor underflow. [`score_distribution`] propagates the full law of
//! the score instead and is the independent second route used to cross-check
//! the sum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MatchSpec, StyleDistribution, PROB_TOL};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `ln(k!)` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::default();
    table.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        table.push(acc.value());
    }
    table
}

/// `Σ C(n,i) C(n-i,j) w^i l^j d^(n-i-j)` over the `(i, j)` pairs accepted by `keep`.
fn trinomial_mass(style: &StyleDistribution, n: usize, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let lf = ln_factorials(n);
    let (ln_w, ln_d, ln_l) = (style.win().ln(), style.draw().ln(), style.loss().ln());
    // 0^0 = 1, 0^k = 0 for k > 0.
    let pow_term = |ln_p: f64, k: usize| -> Option<f64> {
        match k {
            0 => Some(0.0),
            _ if ln_p == f64::NEG_INFINITY => None,
            _ => Some(k as f64 * ln_p),
        }
    };
    let mut total = CompensatedSum::default();
    for i in 0..=n {
        let Some(wins) = pow_term(ln_w, i) else { break };
        for j in 0..=(n - i) {
            if !keep(i, j) {
                continue;
            }
            let draws = n - i - j;
            let (Some(losses), Some(ties)) = (pow_term(ln_l, j), pow_term(ln_d, draws)) else {
                continue;
            };
            let ln_term = lf[n] - lf[i] - lf[j] - lf[draws] + wins + losses + ties;
            total.add(ln_term.exp());
        }
    }
    total.value()
}

fn check_horizon(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidHorizon(n));
    }
    Ok(())
}

/// `P(X_N > 0)` when every round is played with `style`.
pub fn fixed_style_positive_prob(style: &StyleDistribution, n: usize) -> Result<f64> {
    check_horizon(n)?;
    Ok(trinomial_mass(style, n, |i, j| i > j).clamp(0.0, 1.0))
}

/// `P(X_N = 0)` when every round is played with `style`.
pub fn fixed_style_tie_prob(style: &StyleDistribution, n: usize) -> Result<f64> {
    check_horizon(n)?;
    Ok(trinomial_mass(style, n, |i, j| i == j).clamp(0.0, 1.0))
}

/// `E[sign(X_N)] = P(X_N > 0) - P(X_N < 0)` under a fixed style.
pub fn fixed_style_gain(style: &StyleDistribution, n: usize) -> Result<f64> {
    let up = fixed_style_positive_prob(style, n)?;
    let down = fixed_style_positive_prob(&style.mirror(), n)?;
    Ok(up - down)
}

/// Law of `X_n` under a fixed style, indexed by `x + n` for `x` in `-n..=n`.
pub fn score_distribution(style: &StyleDistribution, n: usize) -> Vec<f64> {
    let mut dist = vec![1.0];
    for _ in 0..n {
        dist = convolve_step(style, &dist);
    }
    dist
}

fn convolve_step(style: &StyleDistribution, prev: &[f64]) -> Vec<f64> {
    let (w, d, l) = (style.win(), style.draw(), style.loss());
    let mut next = vec![0.0; prev.len() + 2];
    for (idx, &mass) in prev.iter().enumerate() {
        // prev[idx] sits at next[idx + 1]
        next[idx] += l * mass;
        next[idx + 1] += d * mass;
        next[idx + 2] += w * mass;
    }
    next
}

/// Fixed-style gains for every horizon `1..=n_max` from one pass of the
/// iterated score distribution.
pub fn fixed_style_gain_curve(style: &StyleDistribution, n_max: usize) -> Vec<f64> {
    let mut dist = vec![1.0];
    let mut gains = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        dist = convolve_step(style, &dist);
        let mut g = CompensatedSum::default();
        for (idx, &mass) in dist.iter().enumerate() {
            match idx.cmp(&n) {
                std::cmp::Ordering::Greater => g.add(mass),
                std::cmp::Ordering::Less => g.add(-mass),
                std::cmp::Ordering::Equal => {}
            }
        }
        gains.push(g.value());
    }
    gains
}

/// Probability that the walk driven by `offense` and started at 0 ever reaches +1.
pub fn hitting_probability(offense: &StyleDistribution) -> f64 {
    let (w, l) = (offense.win(), offense.loss());
    if w == 0.0 {
        0.0
    } else if l == 0.0 || w >= l {
        1.0
    } else {
        w / l
    }
}

/// Which case of the asymptotic classification a weak spec falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    BothStrictlyLosing,
    FairNonSafe,
    SafeDefense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticVerdict {
    pub regime: Regime,
    /// `lim g_N*` as `N` grows.
    pub optimal_limit: f64,
    /// `lim g_N^cat`, when known.
    pub cat_limit: Option<f64>,
}

/// Limiting catenaccio gain for a weak player whose defense is safe or fair.
pub fn cat_limit(spec: &MatchSpec) -> Result<f64> {
    let class = spec.classification();
    if !class.weak {
        return Err(Error::RegimeNotCovered(
            "catenaccio limit requires a weak player",
        ));
    }
    let hit = hitting_probability(spec.offense());
    if class.safe_defense {
        Ok(2.0 * hit - 1.0)
    } else if class.fair_non_safe {
        Ok(hit - 1.0)
    } else {
        Err(Error::RegimeNotCovered(
            "catenaccio limit requires a safe or fair defense",
        ))
    }
}

/// Limiting optimal gain for a weak player with a strictly losing offense.
pub fn optimal_limit(spec: &MatchSpec) -> Result<AsymptoticVerdict> {
    let class = spec.classification();
    let p = spec.offense();
    if !class.weak {
        return Err(Error::RegimeNotCovered(
            "asymptotics are classified for weak players only",
        ));
    }
    if p.win() >= p.loss() - PROB_TOL {
        return Err(Error::RegimeNotCovered("offense must be strictly losing"));
    }
    let cat = cat_limit(spec).ok();
    let verdict = if class.safe_defense {
        AsymptoticVerdict {
            regime: Regime::SafeDefense,
            optimal_limit: (2.0 * p.win() / p.loss() - 1.0).max(0.0),
            cat_limit: cat,
        }
    } else if class.fair_defense {
        AsymptoticVerdict {
            regime: Regime::FairNonSafe,
            optimal_limit: 0.0,
            cat_limit: cat,
        }
    } else {
        AsymptoticVerdict {
            regime: Regime::BothStrictlyLosing,
            optimal_limit: -1.0,
            cat_limit: cat,
        }
    };
    Ok(verdict)
}
