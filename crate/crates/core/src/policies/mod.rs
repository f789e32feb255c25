//! Benchmark policies and their exact evaluation.
//!
//! A policy sees the games remaining, the current score and whether the score
//! has ever reached +1. That flag is all the history catenaccio needs, so
//! exact evaluation only has to track the joint law of `(score, switched)`.

mod oracle;

pub use oracle::{
    brute_force_optimal, brute_force_optimal_f64, evaluate_markov_policy, ExactSpec, ExactStyle,
    ORACLE_MAX_HORIZON,
};

use serde::Serialize;

use crate::dp::{PolicyTable, Solver};
use crate::error::{Error, Result};
use crate::model::{sign, Action, MatchSpec, PROB_TOL};

/// Largest horizon accepted by [`exact_policy_gain`].
pub const MAX_EVAL_HORIZON: usize = 100_000;

pub trait Policy {
    /// Action for the next round given `games_remaining >= 1`, the current
    /// score, and whether the score has ever been +1.
    fn decide(&self, games_remaining: usize, score: i64, switched: bool) -> Action;
}

impl<P: Policy + ?Sized> Policy for &P {
    fn decide(&self, games_remaining: usize, score: i64, switched: bool) -> Action {
        (**self).decide(games_remaining, score, switched)
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn decide(&self, games_remaining: usize, score: i64, switched: bool) -> Action {
        (**self).decide(games_remaining, score, switched)
    }
}

/// Always plays the same style.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedStyle(pub Action);

impl Policy for FixedStyle {
    fn decide(&self, _: usize, _: i64, _: bool) -> Action {
        self.0
    }
}

pub fn fixed_policy(style: Action) -> FixedStyle {
    FixedStyle(style)
}

/// Offense until the score first reaches +1, defense from then on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Catenaccio;

impl Policy for Catenaccio {
    fn decide(&self, _: usize, _: i64, switched: bool) -> Action {
        if switched {
            Action::Def
        } else {
            Action::Off
        }
    }
}

pub fn cat_policy() -> Catenaccio {
    Catenaccio
}

/// Catenaccio, except that with one game left at score 0 it plays the
/// style with the larger one-round drift (`Off` only when it beats `Def` by
/// more than [`PROB_TOL`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatenaccioPlus {
    last_game_at_zero: Action,
}

impl CatenaccioPlus {
    pub fn new(spec: &MatchSpec) -> Self {
        let last_game_at_zero = if spec.offense().drift() > spec.defense().drift() + PROB_TOL {
            Action::Off
        } else {
            Action::Def
        };
        Self { last_game_at_zero }
    }
}

impl Policy for CatenaccioPlus {
    fn decide(&self, games_remaining: usize, score: i64, switched: bool) -> Action {
        if games_remaining == 1 && score == 0 {
            self.last_game_at_zero
        } else {
            Catenaccio.decide(games_remaining, score, switched)
        }
    }
}

pub fn cat_plus_policy(spec: &MatchSpec) -> CatenaccioPlus {
    CatenaccioPlus::new(spec)
}

impl Policy for PolicyTable {
    fn decide(&self, games_remaining: usize, score: i64, _: bool) -> Action {
        self.action(games_remaining, score)
    }
}

/// Adapts a closure `(games_remaining, score, switched) -> Action`.
#[derive(Clone, Copy)]
pub struct FnPolicy<F>(pub F);

impl<F: Fn(usize, i64, bool) -> Action> Policy for FnPolicy<F> {
    fn decide(&self, games_remaining: usize, score: i64, switched: bool) -> Action {
        (self.0)(games_remaining, score, switched)
    }
}

/// Joint law of `(score, switched)` after some rounds of an `N`-game match.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDistribution {
    horizon: usize,
    round: usize,
    /// `mass[switched][x + horizon]`
    mass: [Vec<f64>; 2],
    scratch: [Vec<f64>; 2],
}

impl AugmentedDistribution {
    /// All mass at the origin, not switched.
    pub fn new(horizon: usize) -> Self {
        let width = 2 * horizon + 1;
        let mut mass = [vec![0.0; width], vec![0.0; width]];
        mass[0][horizon] = 1.0;
        Self {
            horizon,
            round: 0,
            mass,
            scratch: [vec![0.0; width], vec![0.0; width]],
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn games_remaining(&self) -> usize {
        self.horizon - self.round
    }

    pub fn mass(&self, score: i64, switched: bool) -> f64 {
        let idx = score + self.horizon as i64;
        if idx < 0 || idx as usize >= self.mass[0].len() {
            return 0.0;
        }
        self.mass[switched as usize][idx as usize]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().flatten().sum()
    }

    pub fn min_mass(&self) -> f64 {
        self.mass
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `E[sign(X_round)]`.
    pub fn expected_sign(&self) -> f64 {
        let h = self.horizon as i64;
        let mut g = 0.0;
        for s in 0..2 {
            for (idx, &m) in self.mass[s].iter().enumerate() {
                g += sign(idx as i64 - h) * m;
            }
        }
        g
    }

    /// Plays one more round under `policy`.
    pub fn step(&mut self, spec: &MatchSpec, policy: &impl Policy) {
        assert!(self.round < self.horizon, "match already over");
        let k = self.games_remaining();
        let h = self.horizon as i64;
        let r = self.round as i64;
        for buf in &mut self.scratch {
            let lo = (h - r - 1) as usize;
            buf[lo..=(h + r + 1) as usize].fill(0.0);
        }
        for s in 0..2 {
            for x in -r..=r {
                let m = self.mass[s][(x + h) as usize];
                if m == 0.0 {
                    continue;
                }
                let style = spec.style(policy.decide(k, x, s == 1));
                for (dx, p) in [(1, style.win()), (0, style.draw()), (-1, style.loss())] {
                    let y = x + dx;
                    let latched = (s == 1 || y == 1) as usize;
                    self.scratch[latched][(y + h) as usize] += m * p;
                }
            }
        }
        std::mem::swap(&mut self.mass, &mut self.scratch);
        self.round += 1;
    }
}

fn check_eval_horizon(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidHorizon(n));
    }
    if n > MAX_EVAL_HORIZON {
        return Err(Error::HorizonTooLarge {
            requested: n,
            limit: MAX_EVAL_HORIZON,
        });
    }
    Ok(())
}

/// Exact `E[sign(X_N)]` under `policy`, by forward propagation of the
/// augmented distribution. `O(N^2)` time, `O(N)` memory.
pub fn exact_policy_gain(spec: &MatchSpec, policy: &impl Policy, n: usize) -> Result<f64> {
    check_eval_horizon(n)?;
    let mut dist = AugmentedDistribution::new(n);
    for _ in 0..n {
        dist.step(spec, policy);
    }
    Ok(dist.expected_sign())
}

/// Catenaccio (or catenaccio+) gains for every horizon `1..=n_max` from a
/// single forward pass.
///
/// Catenaccio ignores the horizon, so the stage-`n` distribution serves every
/// `N = n`. Catenaccio+ deviates only in the last game from score 0, where
/// the final sign equals that game's result; its gain is the catenaccio gain
/// plus the drift difference weighted by the mass at 0 one round earlier.
pub fn catenaccio_gain_curve(spec: &MatchSpec, n_max: usize, plus: bool) -> Result<Vec<f64>> {
    check_eval_horizon(n_max)?;
    let last = CatenaccioPlus::new(spec).last_game_at_zero;
    let last_drift = spec.style(last).drift();
    let mut dist = AugmentedDistribution::new(n_max);
    let mut gains = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let correction = if plus {
            [false, true]
                .iter()
                .map(|&s| {
                    let cat = spec.style(Catenaccio.decide(1, 0, s)).drift();
                    dist.mass(0, s) * (last_drift - cat)
                })
                .sum()
        } else {
            0.0
        };
        dist.step(spec, &Catenaccio);
        gains.push(dist.expected_sign() + correction);
    }
    Ok(gains)
}

/// Both sides of `g_N* = max(0, max_{n<=N} g_n^cat+)` for a safe defense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub horizon: usize,
    /// `g_n*` for `n = 1..=N`.
    pub optimal: Vec<f64>,
    /// `g_n^cat+` for `n = 1..=N`, each evaluated exactly at its own horizon.
    pub cat_plus: Vec<f64>,
    /// `max(0, max_{m<=n} g_m^cat+)`.
    pub envelope: Vec<f64>,
    pub max_discrepancy: f64,
    /// Horizon at which the discrepancy is largest.
    pub worst_horizon: usize,
}

pub fn cat_plus_identity_check(spec: &MatchSpec, n: usize) -> Result<IdentityReport> {
    if !spec.classification().safe_defense {
        return Err(Error::RegimeNotCovered(
            "identity requires a safe defense (q_d = 1)",
        ));
    }
    if spec.offense().win() >= spec.offense().loss() - PROB_TOL {
        return Err(Error::RegimeNotCovered("identity requires p_w < p_l"));
    }
    let optimal = Solver::default().optimal_gains(spec, n)?;
    let policy = cat_plus_policy(spec);
    let cat_plus = (1..=n)
        .map(|m| exact_policy_gain(spec, &policy, m))
        .collect::<Result<Vec<_>>>()?;
    let mut envelope = Vec::with_capacity(n);
    let mut running = 0.0f64;
    for &g in &cat_plus {
        running = running.max(g);
        envelope.push(running);
    }
    let (mut max_discrepancy, mut worst_horizon) = (0.0, 1);
    for (i, (a, b)) in optimal.iter().zip(&envelope).enumerate() {
        let d = (a - b).abs();
        if d > max_discrepancy {
            max_discrepancy = d;
            worst_horizon = i + 1;
        }
    }
    Ok(IdentityReport {
        horizon: n,
        optimal,
        cat_plus,
        envelope,
        max_discrepancy,
        worst_horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::dp;

    fn spec(p: [f64; 3], q: [f64; 3]) -> MatchSpec {
        MatchSpec::from_probs(p, q).unwrap()
    }

    fn chess() -> MatchSpec {
        spec([0.45, 0.0, 0.55], [0.10, 0.75, 0.15])
    }

    /// The two-game rule: Off first, then Def after a win and Off otherwise.
    fn chess_rule() -> impl Policy {
        FnPolicy(|k: usize, x: i64, _| {
            if k == 1 && x > 0 {
                Action::Def
            } else {
                Action::Off
            }
        })
    }

    #[test]
    fn policy_decisions() {
        assert_eq!(fixed_policy(Action::Def).decide(7, -3, true), Action::Def);
        assert_eq!(cat_policy().decide(5, 0, false), Action::Off);
        assert_eq!(cat_policy().decide(5, 0, true), Action::Def);

        assert_eq!(cat_plus_policy(&chess()).decide(1, 0, false), Action::Def);
        let off_better = spec([0.4, 0.0, 0.6], [0.05, 0.65, 0.30]);
        assert_eq!(
            cat_plus_policy(&off_better).decide(1, 0, false),
            Action::Off
        );
        assert_eq!(cat_plus_policy(&off_better).decide(1, 0, true), Action::Off);
        let tied = spec([0.4, 0.0, 0.6], [0.05, 0.7, 0.25]);
        assert_eq!(cat_plus_policy(&tied).decide(1, 0, false), Action::Def);
        assert_eq!(cat_plus_policy(&chess()).decide(3, 0, false), Action::Off);
    }

    #[test]
    fn chess_rule_gains_eight_hundredths() {
        let g = exact_policy_gain(&chess(), &chess_rule(), 2).unwrap();
        assert!((g - 0.08).abs() < 1e-12);
    }

    #[test]
    fn fixed_offense_chess_two_games() {
        // 9-leaf enumeration with p = (0.45, 0, 0.55): WW - LL.
        let expected = 0.45 * 0.45 - 0.55 * 0.55;
        let g = exact_policy_gain(&chess(), &fixed_policy(Action::Off), 2).unwrap();
        assert!((g - expected).abs() < 1e-15);
    }

    #[test]
    fn fixed_policies_match_trinomial_sum() {
        let s = spec([0.31, 0.17, 0.52], [0.12, 0.71, 0.17]);
        for n in [1, 2, 3, 10, 77, 200, 500] {
            for a in [Action::Off, Action::Def] {
                let exact = exact_policy_gain(&s, &fixed_policy(a), n).unwrap();
                let closed = analytic::fixed_style_gain(s.style(a), n).unwrap();
                assert!((exact - closed).abs() < 1e-10, "n={n} {a}");
            }
        }
    }

    #[test]
    fn fair_defense_always_zero() {
        let s = spec([0.4, 0.0, 0.6], [0.15, 0.7, 0.15]);
        for n in [1, 2, 5, 50, 301] {
            assert!(
                exact_policy_gain(&s, &fixed_policy(Action::Def), n)
                    .unwrap()
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn catenaccio_with_safe_defense_approaches_limit() {
        let s = spec([0.45, 0.0, 0.55], [0.0, 1.0, 0.0]);
        let g = exact_policy_gain(&s, &cat_policy(), 200).unwrap();
        assert!((g - (2.0 * 0.45 / 0.55 - 1.0)).abs() < 0.02, "{g}");

        let s = spec([0.3, 0.0, 0.7], [0.0, 1.0, 0.0]);
        let g = exact_policy_gain(&s, &cat_policy(), 500).unwrap();
        assert!((g + 1.0 / 7.0).abs() < 1e-3, "{g}");
    }

    #[test]
    fn mass_is_conserved() {
        let s = spec([0.33, 0.21, 0.46], [0.08, 0.8, 0.12]);
        let policy = cat_plus_policy(&s);
        let mut dist = AugmentedDistribution::new(300);
        while dist.games_remaining() > 0 {
            dist.step(&s, &policy);
            assert!((dist.total_mass() - 1.0).abs() < 1e-12);
            assert!(dist.min_mass() >= 0.0);
        }
    }

    #[test]
    fn safe_defense_freezes_score_after_switch() {
        let s = spec([0.45, 0.0, 0.55], [0.0, 1.0, 0.0]);
        let mut dist = AugmentedDistribution::new(20);
        for _ in 0..20 {
            dist.step(&s, &cat_policy());
        }
        for x in -20..=20 {
            if x != 1 {
                assert_eq!(dist.mass(x, true), 0.0);
            }
            if x > 0 {
                assert_eq!(dist.mass(x, false), 0.0);
            }
        }
    }

    #[test]
    fn one_pass_curves_match_per_horizon_evaluation() {
        for s in [
            chess(),
            spec([0.4, 0.0, 0.6], [0.05, 0.65, 0.30]),
            spec([0.3, 0.2, 0.5], [0.0, 1.0, 0.0]),
        ] {
            let cat = catenaccio_gain_curve(&s, 40, false).unwrap();
            let plus = catenaccio_gain_curve(&s, 40, true).unwrap();
            for n in 1..=40 {
                let a = exact_policy_gain(&s, &cat_policy(), n).unwrap();
                let b = exact_policy_gain(&s, &cat_plus_policy(&s), n).unwrap();
                assert!((cat[n - 1] - a).abs() < 1e-12);
                assert!((plus[n - 1] - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cat_plus_never_worse_than_cat() {
        for s in [
            chess(),
            spec([0.4, 0.0, 0.6], [0.05, 0.65, 0.30]),
            spec([0.2, 0.1, 0.7], [0.1, 0.8, 0.1]),
        ] {
            let cat = catenaccio_gain_curve(&s, 100, false).unwrap();
            let plus = catenaccio_gain_curve(&s, 100, true).unwrap();
            assert!(cat.iter().zip(&plus).all(|(c, p)| *p >= c - 1e-12));
        }
    }

    #[test]
    fn optimal_table_as_policy_reproduces_gain() {
        let s = spec([0.43, 0.0, 0.57], [0.06, 0.84, 0.10]);
        for n in [1, 4, 17] {
            let sol = dp::solve(&s, n).unwrap();
            let g = exact_policy_gain(&s, &sol.policy, n).unwrap();
            assert!((g - sol.gain).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_check_no_draw_offense() {
        let s = spec([0.45, 0.0, 0.55], [0.0, 1.0, 0.0]);
        let report = cat_plus_identity_check(&s, 50).unwrap();
        assert!(report.max_discrepancy <= 1e-12, "{report:?}");
        let r1 = cat_plus_identity_check(&s, 1).unwrap();
        assert_eq!(r1.envelope, vec![0.0]);
        assert!(r1.optimal[0].abs() < 1e-15);
    }

    #[test]
    fn identity_check_counterexample_with_offensive_draws() {
        // With p_d > 0 the optimum can draw, wait with Def, and only then
        // attack; catenaccio+ never waits after its first round.
        let s = spec([0.3, 0.2, 0.5], [0.0, 1.0, 0.0]);
        let report = cat_plus_identity_check(&s, 50).unwrap();
        let first_gap = (0..50)
            .find(|&i| (report.optimal[i] - report.envelope[i]).abs() > 1e-12)
            .map(|i| i + 1);
        assert_eq!(first_gap, Some(4));
        assert_eq!(report.envelope[3], 0.0);
        assert!((report.optimal[3] - 0.0085).abs() < 1e-12);
        let exact = brute_force_optimal(
            &ExactSpec::parse(["0.3", "0.2", "0.5"], ["0", "1", "0"]).unwrap(),
            4,
        )
        .unwrap();
        assert_eq!(exact, num_rational::Ratio::new(17, 2000));
    }

    #[test]
    fn identity_check_rejects_unsafe_defense() {
        assert!(matches!(
            cat_plus_identity_check(&chess(), 5),
            Err(Error::RegimeNotCovered(_))
        ));
        let fair_offense = spec([0.5, 0.0, 0.5], [0.0, 1.0, 0.0]);
        assert!(cat_plus_identity_check(&fair_offense, 5).is_err());
    }

    #[test]
    fn evaluation_horizon_errors() {
        assert_eq!(
            exact_policy_gain(&chess(), &cat_policy(), 0),
            Err(Error::InvalidHorizon(0))
        );
        assert!(
            exact_policy_gain(&chess(), &cat_policy(), MAX_EVAL_HORIZON + 1)
                .unwrap_err()
                .is_budget()
        );
    }
}
