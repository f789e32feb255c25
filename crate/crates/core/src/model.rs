//! Domain types shared by every solver: per-style outcome distributions, the
//! two-style match specification and its regime classification.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance for every probability comparison.
pub const PROB_TOL: f64 = 1e-12;

/// One of the two styles Player 1 may choose for a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Action {
    Off,
    Def,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Off => f.write_str("Off"),
            Action::Def => f.write_str("Def"),
        }
    }
}

/// Win/draw/loss probabilities of a single round under one style.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StyleDistribution {
    win: f64,
    draw: f64,
    loss: f64,
}

impl StyleDistribution {
    pub fn new(win: f64, draw: f64, loss: f64) -> Result<Self> {
        let bad = |reason| Error::InvalidProbability {
            win,
            draw,
            loss,
            reason,
        };
        if !(win.is_finite() && draw.is_finite() && loss.is_finite()) {
            return Err(bad("values must be finite"));
        }
        if [win, draw, loss]
            .iter()
            .any(|v| !(-PROB_TOL..=1.0 + PROB_TOL).contains(v))
        {
            return Err(bad("each value must lie in [0, 1]"));
        }
        if (win + draw + loss - 1.0).abs() > PROB_TOL {
            return Err(bad("values must sum to 1"));
        }
        // rounding noise such as 1 - 0.3 - 0.7 is snapped back into [0, 1]
        let clamp = |v: f64| v.clamp(0.0, 1.0);
        Ok(Self {
            win: clamp(win),
            draw: clamp(draw),
            loss: clamp(loss),
        })
    }

    pub fn win(&self) -> f64 {
        self.win
    }

    pub fn draw(&self) -> f64 {
        self.draw
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    /// Expected score change of one round.
    pub fn drift(&self) -> f64 {
        self.win - self.loss
    }

    /// The same style seen from the opponent's side: win and loss swapped.
    pub fn mirror(&self) -> Self {
        Self {
            win: self.loss,
            draw: self.draw,
            loss: self.win,
        }
    }

    /// First-order stochastic dominance: `self` wins at least as often and
    /// loses at most as often as `other`.
    pub fn dominates(&self, other: &StyleDistribution) -> bool {
        dominates(self, other)
    }
}

impl fmt::Display for StyleDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.win, self.draw, self.loss)
    }
}

/// Shorthand for [`StyleDistribution::new`].
pub fn make_distribution(win: f64, draw: f64, loss: f64) -> Result<StyleDistribution> {
    StyleDistribution::new(win, draw, loss)
}

/// True iff `a.win >= b.win` and `a.loss <= b.loss` up to [`PROB_TOL`].
pub fn dominates(a: &StyleDistribution, b: &StyleDistribution) -> bool {
    a.win >= b.win - PROB_TOL && a.loss <= b.loss + PROB_TOL
}

/// Regime flags derived from a [`MatchSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// Both pure styles are losing or fair in expectation.
    pub weak: bool,
    /// Both pure styles are strictly losing.
    pub strictly_weak: bool,
    /// Defense is a sure draw.
    pub safe_defense: bool,
    /// Defense wins and loses equally often.
    pub fair_defense: bool,
    pub fair_non_safe: bool,
    pub defense_dominates_offense: bool,
    pub offense_dominates_defense: bool,
}

impl Classification {
    pub fn of(offense: &StyleDistribution, defense: &StyleDistribution) -> Self {
        let (p, q) = (offense, defense);
        let weak = p.win <= p.loss + PROB_TOL && q.win <= q.loss + PROB_TOL;
        let strictly_weak = p.win < p.loss - PROB_TOL && q.win < q.loss - PROB_TOL;
        let safe_defense = (q.draw - 1.0).abs() <= PROB_TOL;
        let fair_defense = (q.win - q.loss).abs() <= PROB_TOL;
        Self {
            weak,
            strictly_weak,
            safe_defense,
            fair_defense,
            fair_non_safe: fair_defense && !safe_defense,
            defense_dominates_offense: dominates(q, p),
            offense_dominates_defense: dominates(p, q),
        }
    }

    /// Flag names and values, in declaration order.
    pub fn flags(&self) -> [(&'static str, bool); 7] {
        [
            ("weak", self.weak),
            ("strictly_weak", self.strictly_weak),
            ("safe_defense", self.safe_defense),
            ("fair_defense", self.fair_defense),
            ("fair_non_safe", self.fair_non_safe),
            ("defense_dominates_offense", self.defense_dominates_offense),
            ("offense_dominates_defense", self.offense_dominates_defense),
        ]
    }
}

/// The offensive style `p`, the defensive style `q`, and their cached
/// classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchSpec {
    offense: StyleDistribution,
    defense: StyleDistribution,
    class: Classification,
}

impl MatchSpec {
    /// Fails with [`Error::NotDefensive`] when `defense.draw < offense.draw`;
    /// the styles are never swapped silently.
    pub fn new(offense: StyleDistribution, defense: StyleDistribution) -> Result<Self> {
        if defense.draw < offense.draw - PROB_TOL {
            return Err(Error::NotDefensive {
                offense_draw: offense.draw,
                defense_draw: defense.draw,
            });
        }
        let class = Classification::of(&offense, &defense);
        if class.weak {
            // q_w <= q_l and q_d >= p_d force q_w <= p_l.
            debug_assert!(defense.win <= offense.loss + PROB_TOL);
        }
        Ok(Self {
            offense,
            defense,
            class,
        })
    }

    /// Builds a spec from the six raw probabilities `(p_w, p_d, p_l, q_w, q_d, q_l)`.
    pub fn from_probs(p: [f64; 3], q: [f64; 3]) -> Result<Self> {
        Self::new(
            StyleDistribution::new(p[0], p[1], p[2])?,
            StyleDistribution::new(q[0], q[1], q[2])?,
        )
    }

    pub fn offense(&self) -> &StyleDistribution {
        &self.offense
    }

    pub fn defense(&self) -> &StyleDistribution {
        &self.defense
    }

    pub fn style(&self, action: Action) -> &StyleDistribution {
        match action {
            Action::Off => &self.offense,
            Action::Def => &self.defense,
        }
    }

    pub fn classification(&self) -> &Classification {
        &self.class
    }
}

pub fn classify(spec: &MatchSpec) -> Classification {
    *spec.classification()
}

/// A point of the score lattice: `round` games played, score `wins - losses`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchState {
    round: usize,
    score: i64,
}

impl MatchState {
    pub fn new(round: usize, score: i64) -> Option<Self> {
        (score.unsigned_abs() as usize <= round).then_some(Self { round, score })
    }

    pub fn origin() -> Self {
        Self { round: 0, score: 0 }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn score(&self) -> i64 {
        self.score
    }

    /// The state after one more round with score change `delta` in {-1, 0, 1}.
    pub fn advance(&self, delta: i64) -> Self {
        debug_assert!((-1..=1).contains(&delta));
        Self {
            round: self.round + 1,
            score: self.score + delta,
        }
    }
}

/// `sign(x)` with `sign(0) = 0`, as a match result.
pub fn sign(x: i64) -> f64 {
    match x.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}
