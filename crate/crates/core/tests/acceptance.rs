//! Acceptance criteria, run serially so the timings are not disturbed by
//! other tests. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adaptplay::dp::{self, CurveLabel, Solver};
use adaptplay::policies::{self, brute_force_optimal, cat_plus_identity_check, exact_policy_gain};
use adaptplay::report::curve_to_csv;
use adaptplay::sim::estimate_gain;
use adaptplay::verify::{self, SpecSampler};
use adaptplay::{Action, Catenaccio, CatenaccioPlus, FixedStyle, MatchSpec, Policy};
use num_traits::ToPrimitive;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn spec(p: [f64; 3], q: [f64; 3]) -> MatchSpec {
    MatchSpec::from_probs(p, q).unwrap()
}

const SAFE: [f64; 3] = [0.0, 1.0, 0.0];

fn chess() -> Outcome {
    let s = spec([0.45, 0.0, 0.55], [0.10, 0.75, 0.15]);
    let sol = dp::solve(&s, 2).unwrap();
    let actions = (
        sol.policy.action(2, 0),
        sol.policy.action(1, 1),
        sol.policy.action(1, -1),
    );
    outcome(
        (sol.gain - 0.08).abs() <= 1e-12 && actions == (Action::Off, Action::Def, Action::Off),
        format!("g2*={:.15}, actions {:?}", sol.gain, actions),
    )
}

fn long_match_horizon() -> Outcome {
    let s = spec([0.49, 0.0, 0.51], [0.02, 0.95, 0.03]);
    let (n, g) = dp::find_optimal_horizon(&s, 64).unwrap();
    outcome(
        n == 32 && (g - 0.453).abs() <= 1e-3,
        format!("N*={n}, gain={g:.10}"),
    )
}

fn golden_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden"))
}

/// Returns the timed part separately so the oracle cross-check is not counted.
fn short_match_curves() -> (Outcome, Duration) {
    let specs = [
        ("peak_at_four", spec([0.43, 0.0, 0.57], [0.06, 0.84, 0.10])),
        ("peak_at_six", spec([0.43, 0.0, 0.57], [0.06, 0.86, 0.08])),
    ];
    let start = Instant::now();
    let curves: Vec<_> = specs
        .iter()
        .map(|(_, s)| dp::gain_curve(s, 20, &CurveLabel::ALL).unwrap())
        .collect();
    let csvs: Vec<_> = curves.iter().map(curve_to_csv).collect();
    let elapsed = start.elapsed();

    let mut notes = Vec::new();
    let mut ok = true;
    let mut any_peak_at_four = false;
    for (((name, s), curve), csv) in specs.iter().zip(&curves).zip(&csvs) {
        let golden = std::fs::read_to_string(golden_dir().join(format!("{name}.csv")));
        let matches = golden.is_ok_and(|g| g == *csv);
        ok &= matches;
        let opt = curve.series(CurveLabel::Optimal).unwrap();
        let (n_star, _) = dp::find_optimal_horizon(s, 20).unwrap();
        any_peak_at_four |= opt[3] > 0.0 && n_star == 4;
        for n in 1..=4 {
            let oracle = policies::brute_force_optimal_f64(s, n).unwrap();
            ok &= (opt[n - 1] - oracle).abs() <= 1e-12;
        }
        notes.push(format!(
            "{name}: g4*={:.6} N*={n_star} golden {}",
            opt[3],
            if matches { "match" } else { "MISMATCH" }
        ));
    }
    (outcome(ok && any_peak_at_four, notes.join("; ")), elapsed)
}

fn oracle_equivalence() -> Outcome {
    let grid = verify::oracle_grid();
    let mut worst = 0.0f64;
    for (s, exact) in &grid {
        for n in 1..=4 {
            let g = dp::solve(s, n).unwrap().gain;
            let oracle = brute_force_optimal(exact, n).unwrap().to_f64().unwrap();
            worst = worst.max((g - oracle).abs());
        }
    }
    outcome(
        grid.len() >= 20 && worst <= 1e-12,
        format!(
            "{} specs, N<=4, max |dp - oracle| = {worst:.1e}",
            grid.len()
        ),
    )
}

fn safe_defense_cat_limit() -> Outcome {
    let s = spec([0.3, 0.0, 0.7], SAFE);
    let g = exact_policy_gain(&s, &Catenaccio, 500).unwrap();
    let err = (g + 1.0 / 7.0).abs();
    outcome(err <= 1e-3, format!("g500_cat={g:.8}, |err|={err:.2e}"))
}

fn fair_defense_cat_trend() -> Outcome {
    let s = spec([0.45, 0.0, 0.55], [0.1, 0.8, 0.1]);
    let limit = 0.45 / 0.55 - 1.0;
    let e1000 = (exact_policy_gain(&s, &Catenaccio, 1000).unwrap() - limit).abs();
    let e4000 = (exact_policy_gain(&s, &Catenaccio, 4000).unwrap() - limit).abs();
    outcome(
        e4000 <= e1000 && e4000 <= 0.05,
        format!("|err| at N=1000 {e1000:.5}, at N=4000 {e4000:.5}"),
    )
}

/// Losing offenses from the worked examples plus a spread of draw
/// probabilities. None were selected by outcome.
const IDENTITY_OFFENSES: [[f64; 3]; 12] = [
    [0.45, 0.0, 0.55],
    [0.3, 0.2, 0.5],
    [0.3, 0.0, 0.7],
    [0.4, 0.0, 0.6],
    [0.49, 0.0, 0.51],
    [0.43, 0.0, 0.57],
    [0.1, 0.0, 0.9],
    [0.4, 0.1, 0.5],
    [0.45, 0.05, 0.5],
    [0.2, 0.3, 0.5],
    [0.25, 0.25, 0.5],
    [0.35, 0.1, 0.55],
];

fn catplus_identity() -> Outcome {
    let mut worst = (0.0f64, [0.0; 3], 0);
    let mut failing = Vec::new();
    for p in IDENTITY_OFFENSES {
        let r = cat_plus_identity_check(&spec(p, SAFE), 200).unwrap();
        if r.max_discrepancy > 1e-12 {
            failing.push(format!("{p:?}"));
        }
        if r.max_discrepancy > worst.0 {
            worst = (r.max_discrepancy, p, r.worst_horizon);
        }
    }
    outcome(
        failing.is_empty(),
        format!(
            "{} offenses, N<=200, max discrepancy {:.2e} at p={:?} N={}; over 1e-12: [{}]",
            IDENTITY_OFFENSES.len(),
            worst.0,
            worst.1,
            worst.2,
            failing.join(", ")
        ),
    )
}

fn regime_tails() -> Outcome {
    let solver = Solver::default();
    let losing = spec([0.4, 0.0, 0.6], [0.1, 0.7, 0.2]);
    let g500 = solver.optimal_gain(&losing, 500).unwrap();
    let fair = spec([0.4, 0.0, 0.6], [0.15, 0.7, 0.15]);
    let g = solver.optimal_gains(&fair, 2000).unwrap();
    let min = g.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        g500 <= -0.9 && min >= 0.0 && g[1999] < g[63],
        format!(
            "losing g500*={g500:.6}; fair min g*={min:.3e}, g64*={:.6}, g2000*={:.6}",
            g[63], g[1999]
        ),
    )
}

fn property_suites() -> Outcome {
    let source = Solver::default();
    let mut sampler = SpecSampler::new(0x5eed);
    let draws = 100;
    let checks = [
        verify::check_defense_dominance(&source, &mut sampler, draws),
        verify::check_no_draw_parity(&source, &mut sampler, draws),
        verify::check_draw_parity_counterexample(&source),
        verify::check_nonpositive_gain(&source, &mut sampler, draws),
        verify::check_fair_defense_positive(&source, &mut sampler, draws),
        verify::check_safe_defense_monotone(&source, &mut sampler, draws),
    ];
    let failed: Vec<_> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.line())
        .collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            checks
                .iter()
                .map(|c| c.line())
                .collect::<Vec<_>>()
                .join("; ")
        } else {
            failed.join("; ")
        },
    )
}

#[derive(Clone, Copy)]
enum PolicyKind {
    Optimal,
    Cat,
    CatPlus,
    Fixed(Action),
}

fn mc_triple(p: [f64; 3], q: [f64; 3], kind: PolicyKind, n: usize, seed: u64) -> bool {
    let s = spec(p, q);
    let run = |policy: &(dyn Policy + Sync), exact: f64| {
        let est = estimate_gain(&s, &policy, n, 100_000, seed).unwrap();
        (est.mean - exact).abs() <= 5.0 * est.std_error.unwrap()
    };
    match kind {
        PolicyKind::Optimal => {
            let sol = dp::solve(&s, n).unwrap();
            run(&sol.policy, sol.gain)
        }
        PolicyKind::Cat => run(&Catenaccio, exact_policy_gain(&s, &Catenaccio, n).unwrap()),
        PolicyKind::CatPlus => {
            let cp = CatenaccioPlus::new(&s);
            run(&cp, exact_policy_gain(&s, &cp, n).unwrap())
        }
        PolicyKind::Fixed(a) => {
            let exact = adaptplay::analytic::fixed_style_gain(s.style(a), n).unwrap();
            run(&FixedStyle(a), exact)
        }
    }
}

fn monte_carlo() -> Outcome {
    use PolicyKind::*;
    let chess = ([0.45, 0.0, 0.55], [0.10, 0.75, 0.15]);
    let long = ([0.49, 0.0, 0.51], [0.02, 0.95, 0.03]);
    let short = ([0.43, 0.0, 0.57], [0.06, 0.84, 0.10]);
    let safe = ([0.3, 0.0, 0.7], SAFE);
    let drawn = ([0.3, 0.2, 0.5], SAFE);
    let fair = ([0.4, 0.0, 0.6], [0.15, 0.7, 0.15]);
    let triples = [
        (chess, Optimal, 2),
        (chess, Cat, 2),
        (chess, CatPlus, 7),
        (chess, Fixed(Action::Off), 10),
        (chess, Fixed(Action::Def), 10),
        (long, Optimal, 32),
        (long, Cat, 32),
        (long, Fixed(Action::Def), 40),
        (short, Optimal, 4),
        (short, CatPlus, 20),
        (short, Fixed(Action::Off), 20),
        (safe, Optimal, 25),
        (safe, Cat, 50),
        (safe, CatPlus, 50),
        (drawn, Optimal, 4),
        (drawn, CatPlus, 15),
        (fair, Optimal, 64),
        (fair, Cat, 64),
        (fair, Fixed(Action::Def), 30),
        (fair, Optimal, 9),
    ];
    let hits = triples
        .into_iter()
        .enumerate()
        .filter(|(i, ((p, q), kind, n))| mc_triple(*p, *q, *kind, *n, 1000 + *i as u64))
        .count();
    outcome(
        hits >= 19,
        format!("{hits}/20 within 5 standard errors at 1e5 samples"),
    )
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 9] = [
        (1, "chess two-game example", chess, Duration::from_millis(1)),
        (
            2,
            "optimal horizon of a long match",
            long_match_horizon,
            Duration::from_millis(100),
        ),
        (
            4,
            "oracle equivalence",
            oracle_equivalence,
            Duration::from_secs(30),
        ),
        (
            5,
            "safe-defense catenaccio limit",
            safe_defense_cat_limit,
            Duration::from_secs(1),
        ),
        (
            6,
            "fair-defense catenaccio trend",
            fair_defense_cat_trend,
            Duration::from_secs(60),
        ),
        (
            7,
            "catenaccio+ envelope identity",
            catplus_identity,
            Duration::from_secs(10),
        ),
        (8, "regime tails", regime_tails, Duration::from_secs(60)),
        (
            9,
            "property suites",
            property_suites,
            Duration::from_secs(300),
        ),
        (
            10,
            "Monte Carlo consistency",
            monte_carlo,
            Duration::from_secs(120),
        ),
    ];

    let mut failures = 0;
    let mut report = |id: u32, name: &str, out: Outcome, elapsed: Duration, budget: Duration| {
        let in_time = elapsed <= budget;
        let passed = out.passed && in_time;
        failures += usize::from(!passed);
        println!(
            "criterion {id:>2} {name}: {} ({}; {:.3?} of {:?}{})",
            if passed { "PASS" } else { "FAIL" },
            out.detail,
            elapsed,
            budget,
            if in_time { "" } else { ", over budget" }
        );
    };

    for (id, name, run, budget) in criteria {
        if id == 4 {
            let (out, elapsed) = short_match_curves();
            report(
                3,
                "gain curve reproduction",
                out,
                elapsed,
                Duration::from_millis(10),
            );
        }
        let start = Instant::now();
        let out = run();
        report(id, name, out, start.elapsed(), budget);
    }

    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
