//! Structural property checks on the optimal gain, run over built-in
//! parameter grids and randomized draws.
//!
//! Every check takes its optimal gains from a [`GainSource`], so the suite
//! can be pointed at an alternative (or deliberately broken) solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic;
use crate::dp::{self, Solver};
use crate::error::Result;
use crate::model::{dominates, MatchSpec};
use crate::policies::{self, ExactSpec};

pub const CHECK_TOL: f64 = 1e-12;

pub trait GainSource: Sync {
    /// `g_N*` for `N = 1..=n_max`.
    fn optimal_gains(&self, spec: &MatchSpec, n_max: usize) -> Result<Vec<f64>>;
}

impl GainSource for Solver {
    fn optimal_gains(&self, spec: &MatchSpec, n_max: usize) -> Result<Vec<f64>> {
        Solver::optimal_gains(self, spec, n_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, value: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            value: value.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn errored(name: &str, err: crate::error::Error) -> Self {
        Self::new(name, "error", false, err.to_string())
    }

    /// `name=value PASS` (or `FAIL (detail)`).
    pub fn line(&self) -> String {
        if self.passed {
            format!("{}={} PASS", self.name, self.value)
        } else {
            format!("{}={} FAIL ({})", self.name, self.value, self.detail)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Parameter sets of the worked examples, as decimal strings.
pub const REFERENCE_SPECS: [([&str; 3], [&str; 3]); 11] = [
    (["0.45", "0", "0.55"], ["0.10", "0.75", "0.15"]),
    (["0.43", "0", "0.57"], ["0.06", "0.84", "0.10"]),
    (["0.43", "0", "0.57"], ["0.06", "0.86", "0.08"]),
    (["0.49", "0", "0.51"], ["0.02", "0.95", "0.03"]),
    (["0.4", "0", "0.6"], ["0.15", "0.7", "0.15"]),
    (["0.4", "0", "0.6"], ["0.1", "0.7", "0.2"]),
    (["0.45", "0", "0.55"], ["0", "1", "0"]),
    (["0.3", "0", "0.7"], ["0", "1", "0"]),
    (["0.45", "0", "0.55"], ["0.1", "0.8", "0.1"]),
    (["0.3", "0.2", "0.5"], ["0", "1", "0"]),
    (["0.4", "0", "0.6"], ["0.05", "0.65", "0.30"]),
];

/// Additional specs covering draws on both sides, fair and winning styles.
pub const EXTRA_SPECS: [([&str; 3], [&str; 3]); 10] = [
    (["0.5", "0", "0.5"], ["0.2", "0.6", "0.2"]),
    (["0.2", "0.3", "0.5"], ["0.1", "0.8", "0.1"]),
    (["0.35", "0.1", "0.55"], ["0.05", "0.9", "0.05"]),
    (["0.6", "0", "0.4"], ["0.3", "0.4", "0.3"]),
    (["0.25", "0.25", "0.5"], ["0.125", "0.75", "0.125"]),
    (["0.48", "0.02", "0.5"], ["0.01", "0.97", "0.02"]),
    (["0.1", "0", "0.9"], ["0", "1", "0"]),
    (["0.33", "0.33", "0.34"], ["0.3", "0.4", "0.3"]),
    (["0.45", "0.1", "0.45"], ["0.2", "0.6", "0.2"]),
    (["0.7", "0.1", "0.2"], ["0.5", "0.3", "0.2"]),
];

pub fn parse_spec(p: [&str; 3], q: [&str; 3]) -> Result<MatchSpec> {
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| crate::error::Error::NotDecimal(s.to_string()))
    };
    MatchSpec::from_probs(
        [num(p[0])?, num(p[1])?, num(p[2])?],
        [num(q[0])?, num(q[1])?, num(q[2])?],
    )
}

/// [`REFERENCE_SPECS`] followed by [`EXTRA_SPECS`].
pub fn oracle_grid() -> Vec<(MatchSpec, ExactSpec)> {
    REFERENCE_SPECS
        .iter()
        .chain(EXTRA_SPECS.iter())
        .map(|&(p, q)| {
            (
                parse_spec(p, q).expect("grid spec"),
                ExactSpec::parse(p, q).expect("grid spec"),
            )
        })
        .collect()
}

/// Random specs on a 1/1000 grid.
pub struct SpecSampler {
    rng: ChaCha8Rng,
}

fn millis(v: u32) -> f64 {
    v as f64 / 1000.0
}

impl SpecSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A style with `draw >= min_draw` and `win <= loss` when `losing`.
    fn style(&mut self, min_draw: u32, losing: bool) -> [u32; 3] {
        let d = self.rng.gen_range(min_draw..=1000);
        let rest = 1000 - d;
        let w = if losing {
            self.rng.gen_range(0..=rest / 2)
        } else {
            self.rng.gen_range(0..=rest)
        };
        [w, d, rest - w]
    }

    fn build(p: [u32; 3], q: [u32; 3]) -> MatchSpec {
        MatchSpec::from_probs(p.map(millis), q.map(millis)).expect("sampled spec is valid")
    }

    /// Weak player, defensive convention honoured. Offense draws are capped
    /// at 0.9 so both styles keep some randomness on average.
    pub fn weak(&mut self) -> MatchSpec {
        let p = {
            let d = self.rng.gen_range(0..=900);
            let w = self.rng.gen_range(0..=(1000 - d) / 2);
            [w, d, 1000 - d - w]
        };
        let q = self.style(p[1], true);
        Self::build(p, q)
    }

    /// Any valid spec (not necessarily weak).
    pub fn any(&mut self) -> MatchSpec {
        let p = self.style(0, false);
        let q = self.style(p[1], false);
        Self::build(p, q)
    }

    /// `(p, q, q')` with `q'` dominating `q`, both defensive w.r.t. `p`.
    pub fn dominance_triple(&mut self) -> (MatchSpec, MatchSpec) {
        let p = self.style(0, false);
        let q = self.style(p[1], false);
        let shift_loss = self.rng.gen_range(0..=q[2]);
        let shift_win = self.rng.gen_range(0..=(q[1] + shift_loss - p[1]));
        let q2 = [
            q[0] + shift_win,
            q[1] + shift_loss - shift_win,
            q[2] - shift_loss,
        ];
        (Self::build(p, q), Self::build(p, q2))
    }

    /// Weak, no draws under either style.
    pub fn weak_no_draw(&mut self) -> MatchSpec {
        let pw = self.rng.gen_range(0..=500);
        let qw = self.rng.gen_range(0..=500);
        Self::build([pw, 0, 1000 - pw], [qw, 0, 1000 - qw])
    }

    /// Weak with `q_l >= p_w`.
    pub fn weak_defense_outloses_offense(&mut self) -> MatchSpec {
        loop {
            let s = self.weak();
            if s.defense().loss() >= s.offense().win() {
                return s;
            }
        }
    }

    /// Weak with a fair, non-safe defense; `offense_beats_defense` forces `q_w < p_w`.
    pub fn weak_fair_defense(&mut self, offense_beats_defense: bool) -> MatchSpec {
        loop {
            let pd = self.rng.gen_range(0..=900);
            let pw = self.rng.gen_range(0..=(1000 - pd) / 2);
            let qw = self.rng.gen_range(1..=(1000 - pd) / 2);
            if offense_beats_defense && qw >= pw {
                continue;
            }
            return Self::build([pw, pd, 1000 - pd - pw], [qw, 1000 - 2 * qw, qw]);
        }
    }

    /// Weak, strictly losing offense, safe defense.
    pub fn safe_defense(&mut self) -> MatchSpec {
        let d = self.rng.gen_range(0..=900);
        let w = self.rng.gen_range(0..(1001 - d) / 2);
        Self::build([w, d, 1000 - d - w], [0, 1000, 0])
    }
}

fn fmt_value(v: f64) -> String {
    let r = (v * 1e12).round() / 1e12;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

fn spec_label(s: &MatchSpec) -> String {
    format!("p={} q={}", s.offense(), s.defense())
}

/// Optimal two-game gain of the chess example.
pub fn check_chess(source: &dyn GainSource) -> CheckResult {
    let spec = parse_spec(REFERENCE_SPECS[0].0, REFERENCE_SPECS[0].1).expect("valid");
    match source.optimal_gains(&spec, 2) {
        Ok(g) => CheckResult::new(
            "g2_chess",
            fmt_value(g[1]),
            (g[1] - 0.08).abs() <= CHECK_TOL,
            "expected 0.08",
        ),
        Err(e) => CheckResult::errored("g2_chess", e),
    }
}

/// Runs `check` on `draws` sampled specs and reports the first violation.
fn sampled_check(
    name: &str,
    draws: usize,
    mut sample: impl FnMut() -> Result<Option<String>>,
) -> CheckResult {
    for i in 0..draws {
        match sample() {
            Ok(None) => {}
            Ok(Some(why)) => return CheckResult::new(name, format!("draw {i}"), false, why),
            Err(e) => return CheckResult::errored(name, e),
        }
    }
    CheckResult::new(name, format!("{draws} draws"), true, "")
}

/// A dominating defense never lowers the optimal gain, `N <= 100`.
pub fn check_defense_dominance(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("defense_dominance", draws, || {
        let (weaker, stronger) = sampler.dominance_triple();
        debug_assert!(dominates(stronger.defense(), weaker.defense()));
        let a = source.optimal_gains(&weaker, 100)?;
        let b = source.optimal_gains(&stronger, 100)?;
        Ok(a.iter()
            .zip(&b)
            .position(|(x, y)| *x > y + CHECK_TOL)
            .map(|i| {
                format!(
                    "{} vs q'={}: N={} {} > {}",
                    spec_label(&weaker),
                    stronger.defense(),
                    i + 1,
                    a[i],
                    b[i]
                )
            }))
    })
}

/// Without draws an odd horizon is never better than the even one before it.
pub fn check_no_draw_parity(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("no_draw_parity", draws, || {
        let spec = sampler.weak_no_draw();
        let g = source.optimal_gains(&spec, 101)?;
        Ok((1..=50)
            .find(|&n| g[2 * n] > g[2 * n - 1] + CHECK_TOL)
            .map(|n| {
                format!(
                    "{}: g_{} = {} > g_{} = {}",
                    spec_label(&spec),
                    2 * n + 1,
                    g[2 * n],
                    2 * n,
                    g[2 * n - 1]
                )
            }))
    })
}

/// With draws the parity inequality can fail; returns the smallest witness
/// `N <= 50` with `g_{2N+1} > g_{2N}`.
pub fn draw_parity_witness(source: &dyn GainSource, spec: &MatchSpec) -> Result<Option<usize>> {
    let g = source.optimal_gains(spec, 101)?;
    Ok((1..=50).find(|&n| g[2 * n] > g[2 * n - 1]))
}

pub fn check_draw_parity_counterexample(source: &dyn GainSource) -> CheckResult {
    let spec = parse_spec(["0.4", "0", "0.6"], ["0.15", "0.7", "0.15"]).expect("valid");
    match draw_parity_witness(source, &spec) {
        Ok(Some(n)) => CheckResult::new(
            "draw_parity_counterexample",
            format!("g{}>g{}", 2 * n + 1, 2 * n),
            true,
            "",
        ),
        Ok(None) => CheckResult::new(
            "draw_parity_counterexample",
            "none",
            false,
            "no N <= 50 with g_{2N+1} > g_{2N}",
        ),
        Err(e) => CheckResult::errored("draw_parity_counterexample", e),
    }
}

/// `q_l >= p_w` keeps the optimal gain non-positive, `N <= 100`.
pub fn check_nonpositive_gain(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("nonpositive_gain", draws, || {
        let spec = sampler.weak_defense_outloses_offense();
        let g = source.optimal_gains(&spec, 100)?;
        Ok(g.iter()
            .position(|v| *v > CHECK_TOL)
            .map(|i| format!("{}: g_{} = {}", spec_label(&spec), i + 1, g[i])))
    })
}

/// A fair defense guarantees a non-negative optimal gain, `N <= 100`.
pub fn check_fair_defense_nonnegative(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("fair_defense_nonnegative", draws, || {
        let spec = sampler.weak_fair_defense(false);
        let g = source.optimal_gains(&spec, 100)?;
        Ok(g.iter()
            .position(|v| *v < -CHECK_TOL)
            .map(|i| format!("{}: g_{} = {}", spec_label(&spec), i + 1, g[i])))
    })
}

/// A fair non-safe defense that wins less often than the offense gives a
/// strictly positive optimal gain for `2 <= N <= 100`.
pub fn check_fair_defense_positive(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("fair_defense_positive", draws, || {
        let spec = sampler.weak_fair_defense(true);
        let g = source.optimal_gains(&spec, 100)?;
        Ok((2..=100)
            .find(|&n| g[n - 1] <= 0.0)
            .map(|n| format!("{}: g_{} = {}", spec_label(&spec), n, g[n - 1])))
    })
}

/// With a safe defense the optimal gain is non-decreasing in `N`.
pub fn check_safe_defense_monotone(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("safe_defense_monotone", draws, || {
        let spec = sampler.safe_defense();
        let g = source.optimal_gains(&spec, 100)?;
        Ok(g.windows(2).position(|w| w[1] < w[0] - CHECK_TOL).map(|i| {
            format!(
                "{}: g_{} = {} < g_{} = {}",
                spec_label(&spec),
                i + 2,
                g[i + 1],
                i + 1,
                g[i]
            )
        }))
    })
}

/// `g_N*` is at least the gain of both fixed styles, catenaccio and catenaccio+.
pub fn policy_bound_violation(
    source: &dyn GainSource,
    spec: &MatchSpec,
    n_max: usize,
) -> Result<Option<String>> {
    let opt = source.optimal_gains(spec, n_max)?;
    let others = [
        (
            "off",
            analytic::fixed_style_gain_curve(spec.offense(), n_max),
        ),
        (
            "def",
            analytic::fixed_style_gain_curve(spec.defense(), n_max),
        ),
        ("cat", policies::catenaccio_gain_curve(spec, n_max, false)?),
        ("cat+", policies::catenaccio_gain_curve(spec, n_max, true)?),
    ];
    for (name, curve) in &others {
        if let Some(i) = opt.iter().zip(curve).position(|(o, c)| *o < c - CHECK_TOL) {
            return Ok(Some(format!(
                "{}: g_{}* = {} < {name} {}",
                spec_label(spec),
                i + 1,
                opt[i],
                curve[i]
            )));
        }
    }
    Ok(None)
}

pub fn check_policy_bounds(
    source: &dyn GainSource,
    sampler: &mut SpecSampler,
    draws: usize,
) -> CheckResult {
    sampled_check("policy_lower_bounds", draws, || {
        policy_bound_violation(source, &sampler.any(), 60)
    })
}

/// Rows of the value table are non-decreasing in the score.
pub fn score_monotone_violation(spec: &MatchSpec, n: usize) -> Result<Option<String>> {
    let sol = dp::solve(spec, n)?;
    for k in 0..=n {
        if sol.values.row(k).windows(2).any(|w| w[0] > w[1]) {
            return Ok(Some(format!("{}: row k={k} decreases", spec_label(spec))));
        }
    }
    Ok(None)
}

pub fn check_score_monotone(sampler: &mut SpecSampler, draws: usize) -> CheckResult {
    sampled_check("score_monotone", draws, || {
        score_monotone_violation(&sampler.any(), 40)
    })
}

/// Largest `|g_N* - oracle|` over `N <= n_max`.
pub fn oracle_discrepancy(
    source: &dyn GainSource,
    spec: &MatchSpec,
    exact: &ExactSpec,
    n_max: usize,
) -> Result<f64> {
    let g = source.optimal_gains(spec, n_max)?;
    let mut worst = 0.0f64;
    for n in 1..=n_max {
        let oracle = policies::brute_force_optimal(exact, n)?;
        let oracle = num_traits::ToPrimitive::to_f64(&oracle).expect("finite ratio");
        worst = worst.max((g[n - 1] - oracle).abs());
    }
    Ok(worst)
}

pub fn check_oracle_equivalence(source: &dyn GainSource, n_max: usize) -> CheckResult {
    let grid = oracle_grid();
    let mut worst = 0.0f64;
    for (spec, exact) in &grid {
        match oracle_discrepancy(source, spec, exact, n_max) {
            Ok(d) if d > CHECK_TOL => {
                return CheckResult::new(
                    "oracle_equivalence",
                    fmt_value(d),
                    false,
                    spec_label(spec),
                )
            }
            Ok(d) => worst = worst.max(d),
            Err(e) => return CheckResult::errored("oracle_equivalence", e),
        }
    }
    CheckResult::new(
        "oracle_equivalence",
        format!("{} specs, max diff {worst:.1e}", grid.len()),
        true,
        "",
    )
}

/// No-draw offenses for the catenaccio+ envelope check. Offenses that can
/// draw admit counterexamples (the optimum may wait after a draw), so they
/// are not part of the default grid.
pub const ENVELOPE_OFFENSES: [[f64; 3]; 5] = [
    [0.45, 0.0, 0.55],
    [0.3, 0.0, 0.7],
    [0.4, 0.0, 0.6],
    [0.49, 0.0, 0.51],
    [0.1, 0.0, 0.9],
];

pub fn check_catplus_envelope(spec: &MatchSpec, n: usize) -> CheckResult {
    match policies::cat_plus_identity_check(spec, n) {
        Ok(r) => CheckResult::new(
            "catplus_envelope",
            format!("{:.1e}", r.max_discrepancy),
            r.max_discrepancy <= CHECK_TOL,
            format!("{}: worst at N={}", spec_label(spec), r.worst_horizon),
        ),
        Err(e) => CheckResult::errored("catplus_envelope", e),
    }
}

/// A spec supplied by the caller, with its exact form when the inputs were
/// short decimals.
#[derive(Debug, Clone)]
pub struct UserSpec {
    pub spec: MatchSpec,
    pub exact: Option<ExactSpec>,
}

impl UserSpec {
    /// Parses decimal strings once as floats and once as exact rationals.
    pub fn parse(p: [&str; 3], q: [&str; 3]) -> Result<Self> {
        Ok(Self {
            spec: parse_spec(p, q)?,
            exact: ExactSpec::parse(p, q).ok(),
        })
    }
}

impl From<MatchSpec> for UserSpec {
    fn from(spec: MatchSpec) -> Self {
        let exact = ExactSpec::from_spec(&spec).ok();
        Self { spec, exact }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Randomized draws per sampled check.
    pub draws: usize,
    pub seed: u64,
    /// Specs checked in addition to the built-in grids.
    pub extra: Vec<UserSpec>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            draws: 100,
            seed: 0x5eed,
            extra: Vec::new(),
        }
    }
}

/// Checks that apply to one user-supplied spec.
pub fn spec_checks(source: &dyn GainSource, user: &UserSpec) -> Vec<CheckResult> {
    let spec = &user.spec;
    let mut out = Vec::new();
    let tag = |r: CheckResult| CheckResult {
        name: format!("{}[user]", r.name),
        ..r
    };
    let outcome = |name: &str, res: Result<Option<String>>| match res {
        Ok(None) => CheckResult::new(name, "ok", true, ""),
        Ok(Some(why)) => CheckResult::new(name, "violated", false, why),
        Err(e) => CheckResult::errored(name, e),
    };
    out.push(tag(outcome(
        "policy_lower_bounds",
        policy_bound_violation(source, spec, 100),
    )));
    out.push(tag(outcome(
        "score_monotone",
        score_monotone_violation(spec, 60),
    )));
    if let Some(exact) = &user.exact {
        let r = match oracle_discrepancy(source, spec, exact, 4) {
            Ok(d) => CheckResult::new(
                "oracle_equivalence",
                fmt_value(d),
                d <= CHECK_TOL,
                "dp vs exhaustive search",
            ),
            Err(e) => CheckResult::errored("oracle_equivalence", e),
        };
        out.push(tag(r));
    }
    let c = spec.classification();
    if c.safe_defense && spec.offense().win() < spec.offense().loss() {
        out.push(tag(check_catplus_envelope(spec, 100)));
    }
    if c.weak && c.fair_defense {
        let r = match source.optimal_gains(spec, 100) {
            Ok(g) => {
                let min = g.iter().copied().fold(f64::INFINITY, f64::min);
                CheckResult::new(
                    "fair_defense_nonnegative",
                    fmt_value(min),
                    min >= -CHECK_TOL,
                    "min over N <= 100",
                )
            }
            Err(e) => CheckResult::errored("fair_defense_nonnegative", e),
        };
        out.push(tag(r));
    }
    out
}

pub fn run_suite(source: &dyn GainSource, config: &SuiteConfig) -> SuiteReport {
    let mut sampler = SpecSampler::new(config.seed);
    let n = config.draws;
    let mut checks = vec![
        check_chess(source),
        check_defense_dominance(source, &mut sampler, n),
        check_no_draw_parity(source, &mut sampler, n),
        check_draw_parity_counterexample(source),
        check_nonpositive_gain(source, &mut sampler, n),
        check_fair_defense_nonnegative(source, &mut sampler, n),
        check_fair_defense_positive(source, &mut sampler, n),
        check_safe_defense_monotone(source, &mut sampler, n),
        check_policy_bounds(source, &mut sampler, n),
        check_score_monotone(&mut sampler, n),
        check_oracle_equivalence(source, 4),
    ];
    for p in ENVELOPE_OFFENSES {
        let spec = MatchSpec::from_probs(p, [0.0, 1.0, 0.0]).expect("valid");
        checks.push(check_catplus_envelope(&spec, 100));
    }
    for user in &config.extra {
        checks.extend(spec_checks(source, user));
    }
    SuiteReport { checks }
}
