//! Exhaustive oracle for the optimal gain of short matches.
//!
//! Probabilities are decimals with at most six fractional digits, held as
//! integer millionths. The probability of any length-`n` outcome path is then
//! an integer over `10^(6n)`, which fits in `i128` for `n <= 5`. Every Markov
//! policy on the unforced lattice is evaluated by walking its full outcome
//! tree, and the best one is kept.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Action, MatchSpec, StyleDistribution};

pub const ORACLE_MAX_HORIZON: usize = 5;

const SCALE: i128 = 1_000_000;
const FRACTION_DIGITS: usize = 6;

/// A style with probabilities in integer millionths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactStyle {
    win: i128,
    draw: i128,
    loss: i128,
}

fn parse_millionths(text: &str) -> Result<i128> {
    let bad = || Error::NotDecimal(text.to_string());
    let t = text.trim();
    let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let frac = frac_part.trim_end_matches('0');
    if frac.len() > FRACTION_DIGITS || int_part.len() > 6 {
        return Err(bad());
    }
    let int: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let mut frac_value: i128 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    for _ in frac.len()..FRACTION_DIGITS {
        frac_value *= 10;
    }
    Ok(int * SCALE + frac_value)
}

impl ExactStyle {
    fn from_millionths(
        win: i128,
        draw: i128,
        loss: i128,
        source: impl Fn() -> String,
    ) -> Result<Self> {
        if [win, draw, loss].iter().any(|v| !(0..=SCALE).contains(v)) || win + draw + loss != SCALE
        {
            return Err(Error::NotDecimal(source()));
        }
        Ok(Self { win, draw, loss })
    }

    /// Parses three decimal strings such as `"0.45"`.
    pub fn parse(win: &str, draw: &str, loss: &str) -> Result<Self> {
        Self::from_millionths(
            parse_millionths(win)?,
            parse_millionths(draw)?,
            parse_millionths(loss)?,
            || format!("({win}, {draw}, {loss})"),
        )
    }

    /// Recovers the decimal values behind a floating-point distribution.
    pub fn from_distribution(style: &StyleDistribution) -> Result<Self> {
        let to_millionths = |v: f64| -> Result<i128> {
            let scaled = v * SCALE as f64;
            let rounded = scaled.round();
            if (scaled - rounded).abs() > 1e-6 {
                return Err(Error::NotDecimal(v.to_string()));
            }
            Ok(rounded as i128)
        };
        Self::from_millionths(
            to_millionths(style.win())?,
            to_millionths(style.draw())?,
            to_millionths(style.loss())?,
            || style.to_string(),
        )
    }

    pub fn win(&self) -> Ratio<i128> {
        Ratio::new(self.win, SCALE)
    }

    pub fn draw(&self) -> Ratio<i128> {
        Ratio::new(self.draw, SCALE)
    }

    pub fn loss(&self) -> Ratio<i128> {
        Ratio::new(self.loss, SCALE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactSpec {
    offense: ExactStyle,
    defense: ExactStyle,
}

impl ExactSpec {
    pub fn new(offense: ExactStyle, defense: ExactStyle) -> Self {
        Self { offense, defense }
    }

    pub fn parse(p: [&str; 3], q: [&str; 3]) -> Result<Self> {
        Ok(Self::new(
            ExactStyle::parse(p[0], p[1], p[2])?,
            ExactStyle::parse(q[0], q[1], q[2])?,
        ))
    }

    pub fn from_spec(spec: &MatchSpec) -> Result<Self> {
        Ok(Self::new(
            ExactStyle::from_distribution(spec.offense())?,
            ExactStyle::from_distribution(spec.defense())?,
        ))
    }

    fn style(&self, action: Action) -> &ExactStyle {
        match action {
            Action::Off => &self.offense,
            Action::Def => &self.defense,
        }
    }
}

fn check_oracle_horizon(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidHorizon(n));
    }
    if n > ORACLE_MAX_HORIZON {
        return Err(Error::OracleHorizonTooLarge {
            requested: n,
            limit: ORACLE_MAX_HORIZON,
        });
    }
    Ok(())
}

/// Sum of `sign(X_n) * path weight` over the outcome tree, in units of
/// `SCALE^-n`.
fn tree_numerator(spec: &ExactSpec, n: usize, decide: &impl Fn(usize, i64) -> Action) -> i128 {
    fn walk(
        spec: &ExactSpec,
        n: usize,
        round: usize,
        score: i64,
        weight: i128,
        decide: &impl Fn(usize, i64) -> Action,
    ) -> i128 {
        if round == n {
            return score.signum() as i128 * weight;
        }
        let style = spec.style(decide(round, score));
        let mut total = 0;
        for (delta, p) in [(1, style.win), (0, style.draw), (-1, style.loss)] {
            if p != 0 {
                total += walk(spec, n, round + 1, score + delta, weight * p, decide);
            }
        }
        total
    }
    walk(spec, n, 0, 0, 1, decide)
}

/// Exact gain of a Markov policy given as `(round, score) -> Action`.
pub fn evaluate_markov_policy(
    spec: &ExactSpec,
    n: usize,
    decide: impl Fn(usize, i64) -> Action,
) -> Result<Ratio<i128>> {
    check_oracle_horizon(n)?;
    Ok(Ratio::new(
        tree_numerator(spec, n, &decide),
        SCALE.pow(n as u32),
    ))
}

/// Best gain over all deterministic Markov policies on the unforced lattice.
pub fn brute_force_optimal(spec: &ExactSpec, n: usize) -> Result<Ratio<i128>> {
    check_oracle_horizon(n)?;

    // Bit index of each unforced reachable state, by (round, score + n).
    let mut index = vec![vec![None; 2 * n + 1]; n];
    let mut states = 0u32;
    for (round, row) in index.iter_mut().enumerate() {
        let radius = round.min(n - round) as i64;
        for x in -radius..=radius {
            row[(x + n as i64) as usize] = Some(states);
            states += 1;
        }
    }

    let best = (0u64..1 << states)
        .into_par_iter()
        .map(|mask| {
            tree_numerator(spec, n, &|round, score| {
                match index[round][(score + n as i64) as usize] {
                    Some(bit) if mask >> bit & 1 == 1 => Action::Off,
                    // forced states: any action gives the same result
                    _ => Action::Def,
                }
            })
        })
        .max()
        .expect("at least one policy");
    Ok(Ratio::new(best, SCALE.pow(n as u32)))
}

/// [`brute_force_optimal`] for a floating-point spec whose probabilities are
/// short decimals, converted to `f64` at the end.
pub fn brute_force_optimal_f64(spec: &MatchSpec, n: usize) -> Result<f64> {
    let exact = brute_force_optimal(&ExactSpec::from_spec(spec)?, n)?;
    Ok(exact
        .to_f64()
        .unwrap_or_else(|| *exact.numer() as f64 / *exact.denom() as f64))
}
