//! Finite-horizon backward induction on the score lattice.
//!
//! Stages are indexed by games remaining: `U_k(x)` is the optimal value with
//! `k` games left at score `x`, so `U_0(x) = sign(x)` and the optimal gain of
//! an `N`-game match is `U_N(0)`. The dynamics and terminal reward do not
//! depend on the round number, so one backward pass up to `n_max` yields
//! `g_N*` for every `N <= n_max`.
//!
//! Row `k` of an `N`-game solve stores the scores reachable from the origin,
//! `|x| <= N - k`. Cells with `|x| > k` are forced (the result can no longer
//! change) and, with pruning enabled, are filled with `sign(x)` instead of
//! being evaluated.

use serde::Serialize;

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::{sign, Action, MatchSpec, StyleDistribution};
use crate::policies;

/// Bellman backup for one style: `w U(x+1) + d U(x) + l U(x-1)`, written
/// relative to `U(x)` so that forced cells reproduce `±1` exactly.
#[inline]
fn backup(style: &StyleDistribution, down: f64, here: f64, up: f64) -> f64 {
    here + style.win() * (up - here) - style.loss() * (here - down)
}

/// Value and argmax of the Bellman operator; ties go to `Def`.
#[inline]
pub(crate) fn bellman(spec: &MatchSpec, down: f64, here: f64, up: f64) -> (f64, Action) {
    let off = backup(spec.offense(), down, here, up);
    let def = backup(spec.defense(), down, here, up);
    if off > def {
        (off, Action::Off)
    } else {
        (def, Action::Def)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Skip Bellman evaluations in the forced region `|x| > k`.
    pub prune: bool,
    /// Largest horizon accepted when only values along the origin are kept.
    pub max_stages_value: usize,
    /// Largest horizon accepted when the full value and policy tables are kept.
    pub max_stages_policy: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            prune: true,
            max_stages_value: 100_000,
            max_stages_policy: 20_000,
        }
    }
}

/// `U_k(x)` for `0 <= k <= N` and every score reachable from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    horizon: usize,
    /// Row `k` starts at `offsets[k]` and holds `x = -(N-k) ..= N-k`.
    offsets: Vec<usize>,
    cells: Vec<f64>,
}

impl ValueTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Value with `games_remaining` games left at `score`. Forced cells are
    /// answered even outside the stored triangle; unreachable, unforced
    /// cells are `None`.
    pub fn value(&self, games_remaining: usize, score: i64) -> Option<f64> {
        if games_remaining > self.horizon {
            return None;
        }
        let radius = (self.horizon - games_remaining) as i64;
        if score.abs() <= radius {
            let idx = self.offsets[games_remaining] + (score + radius) as usize;
            Some(self.cells[idx])
        } else if score.unsigned_abs() as usize > games_remaining {
            Some(sign(score))
        } else {
            None
        }
    }

    /// Stored row for `games_remaining`, from the lowest reachable score up.
    pub fn row(&self, games_remaining: usize) -> &[f64] {
        let start = self.offsets[games_remaining];
        let len = 2 * (self.horizon - games_remaining) + 1;
        &self.cells[start..start + len]
    }
}

/// Optimal action for every unforced, reachable state with at least one game left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyTable {
    horizon: usize,
    offsets: Vec<usize>,
    actions: Vec<Action>,
}

impl PolicyTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn radius(&self, games_remaining: usize) -> usize {
        games_remaining.min(self.horizon - games_remaining)
    }

    /// Optimal action at the state. Outside the unforced region the choice is
    /// irrelevant and reported as `Def`.
    pub fn action(&self, games_remaining: usize, score: i64) -> Action {
        if games_remaining == 0 || games_remaining > self.horizon {
            return Action::Def;
        }
        let r = self.radius(games_remaining) as i64;
        if score.abs() > r {
            return Action::Def;
        }
        self.actions[self.offsets[games_remaining - 1] + (score + r) as usize]
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub values: ValueTable,
    pub policy: PolicyTable,
    /// `g_N* = U_N(0)`.
    pub gain: f64,
    /// Number of Bellman evaluations performed.
    pub evaluations: u64,
}

/// Which gain series a [`GainCurve`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CurveLabel {
    Optimal,
    Catenaccio,
    CatenaccioPlus,
    Offense,
    Defense,
}

impl CurveLabel {
    pub const ALL: [CurveLabel; 5] = [
        CurveLabel::Optimal,
        CurveLabel::Catenaccio,
        CurveLabel::CatenaccioPlus,
        CurveLabel::Offense,
        CurveLabel::Defense,
    ];

    /// Column name used in CSV and JSON output.
    pub fn column(&self) -> &'static str {
        match self {
            CurveLabel::Optimal => "gain_opt",
            CurveLabel::Catenaccio => "gain_cat",
            CurveLabel::CatenaccioPlus => "gain_catplus",
            CurveLabel::Offense => "gain_off",
            CurveLabel::Defense => "gain_def",
        }
    }
}

/// Gains for horizons `1..=n_max`, one series per policy label.
#[derive(Debug, Clone, PartialEq)]
pub struct GainCurve {
    n_max: usize,
    series: Vec<(CurveLabel, Vec<f64>)>,
}

impl GainCurve {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn labels(&self) -> impl Iterator<Item = CurveLabel> + '_ {
        self.series.iter().map(|(label, _)| *label)
    }

    pub fn series(&self, label: CurveLabel) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, gains)| gains.as_slice())
    }

    /// Gain of `label` at horizon `n` (1-based).
    pub fn gain(&self, label: CurveLabel, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.series(label).and_then(|s| s.get(i).copied()))
    }

    /// Rows `(N, gains in label order)`, sorted by `N`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, Vec<f64>)> + '_ {
        (0..self.n_max).map(move |i| {
            let gains = self.series.iter().map(|(_, s)| s[i]).collect();
            (i + 1, gains)
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Solver {
    config: SolverConfig,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn check(&self, n: usize, limit: usize) -> Result<()> {
        if n < 1 {
            return Err(Error::InvalidHorizon(n));
        }
        if n > limit {
            return Err(Error::HorizonTooLarge {
                requested: n,
                limit,
            });
        }
        Ok(())
    }

    /// Full solve of an `n`-game match, keeping every value and action.
    pub fn solve(&self, spec: &MatchSpec, n: usize) -> Result<Solution> {
        self.check(n, self.config.max_stages_policy)?;

        let mut offsets = Vec::with_capacity(n + 1);
        let mut cells = Vec::with_capacity((n + 1) * (n + 1));
        let mut act_offsets = Vec::with_capacity(n);
        let mut actions = Vec::new();
        let mut evaluations = 0u64;

        offsets.push(0);
        cells.extend((-(n as i64)..=n as i64).map(sign));

        for k in 1..=n {
            let radius = (n - k) as i64;
            let prev_start = offsets[k - 1];
            let prev_radius = radius + 1;
            let free = k.min(n - k) as i64;
            offsets.push(cells.len());
            act_offsets.push(actions.len());
            for x in -radius..=radius {
                let forced = x.abs() > k as i64;
                let value = if forced && self.config.prune {
                    sign(x)
                } else {
                    let at = |y: i64| cells[prev_start + (y + prev_radius) as usize];
                    evaluations += 1;
                    let (v, a) = bellman(spec, at(x - 1), at(x), at(x + 1));
                    if x.abs() <= free {
                        actions.push(a);
                    }
                    v
                };
                cells.push(value);
            }
        }

        let values = ValueTable {
            horizon: n,
            offsets,
            cells,
        };
        let gain = values.value(n, 0).expect("origin is always stored");
        Ok(Solution {
            values,
            policy: PolicyTable {
                horizon: n,
                offsets: act_offsets,
                actions,
            },
            gain,
            evaluations,
        })
    }

    /// `g_N*` for every `N` in `1..=n_max` from one backward pass with two
    /// rolling rows.
    pub fn optimal_gains(&self, spec: &MatchSpec, n_max: usize) -> Result<Vec<f64>> {
        self.optimal_gains_counted(spec, n_max).map(|(g, _)| g)
    }

    /// As [`Solver::optimal_gains`], also returning the number of Bellman
    /// evaluations.
    pub fn optimal_gains_counted(&self, spec: &MatchSpec, n_max: usize) -> Result<(Vec<f64>, u64)> {
        self.check(n_max, self.config.max_stages_value)?;
        let n = n_max as i64;
        let mut prev: Vec<f64> = (-n..=n).map(sign).collect();
        let mut next = Vec::with_capacity(prev.len());
        let mut gains = Vec::with_capacity(n_max);
        let mut evaluations = 0u64;

        for k in 1..=n_max {
            let radius = n - k as i64;
            let prev_radius = radius + 1;
            next.clear();
            for x in -radius..=radius {
                if self.config.prune && x.abs() > k as i64 {
                    next.push(sign(x));
                    continue;
                }
                let at = |y: i64| prev[(y + prev_radius) as usize];
                evaluations += 1;
                next.push(bellman(spec, at(x - 1), at(x), at(x + 1)).0);
            }
            gains.push(next[radius as usize]);
            std::mem::swap(&mut prev, &mut next);
        }
        Ok((gains, evaluations))
    }

    /// Optimal gain of an `n`-game match without storing the tables.
    pub fn optimal_gain(&self, spec: &MatchSpec, n: usize) -> Result<f64> {
        Ok(*self.optimal_gains(spec, n)?.last().expect("n >= 1"))
    }

    pub fn gain_curve(
        &self,
        spec: &MatchSpec,
        n_max: usize,
        labels: &[CurveLabel],
    ) -> Result<GainCurve> {
        self.check(n_max, self.config.max_stages_value)?;
        let mut series = Vec::with_capacity(labels.len());
        for &label in labels {
            let gains = match label {
                CurveLabel::Optimal => self.optimal_gains(spec, n_max)?,
                CurveLabel::Catenaccio => policies::catenaccio_gain_curve(spec, n_max, false)?,
                CurveLabel::CatenaccioPlus => policies::catenaccio_gain_curve(spec, n_max, true)?,
                CurveLabel::Offense => analytic::fixed_style_gain_curve(spec.offense(), n_max),
                CurveLabel::Defense => analytic::fixed_style_gain_curve(spec.defense(), n_max),
            };
            series.push((label, gains));
        }
        Ok(GainCurve { n_max, series })
    }

    /// Smallest `N <= n_max` maximizing `g_N*`. Gains within `1e-12` of the
    /// running best count as ties.
    pub fn find_optimal_horizon(&self, spec: &MatchSpec, n_max: usize) -> Result<(usize, f64)> {
        let gains = self.optimal_gains(spec, n_max)?;
        Ok(argmax_first(&gains))
    }
}

pub(crate) const TIE_TOL: f64 = 1e-12;

fn argmax_first(gains: &[f64]) -> (usize, f64) {
    let mut best = (1, gains[0]);
    for (i, &g) in gains.iter().enumerate().skip(1) {
        if g > best.1 + TIE_TOL {
            best = (i + 1, g);
        }
    }
    best
}

pub fn solve(spec: &MatchSpec, n: usize) -> Result<Solution> {
    Solver::default().solve(spec, n)
}

pub fn gain_curve(spec: &MatchSpec, n_max: usize, labels: &[CurveLabel]) -> Result<GainCurve> {
    Solver::default().gain_curve(spec, n_max, labels)
}

pub fn find_optimal_horizon(spec: &MatchSpec, n_max: usize) -> Result<(usize, f64)> {
    Solver::default().find_optimal_horizon(spec, n_max)
}
