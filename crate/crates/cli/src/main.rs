//! `adaptplay`: solve, tabulate and check style-switching strategies for a
//! weaker player in a finite match.
//!
//! Exit codes: 0 success, 2 invalid input, 3 resource budget exceeded,
//! 4 verification failure.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use adaptplay::analytic;
use adaptplay::dp::{CurveLabel, Solver};
use adaptplay::policies::{exact_policy_gain, Policy};
use adaptplay::report::{self, format_sig17};
use adaptplay::sim;
use adaptplay::verify::{self, SuiteConfig, UserSpec};
use adaptplay::{Action, Catenaccio, CatenaccioPlus, FixedStyle, MatchSpec};
use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

#[derive(Parser, Debug)]
#[command(
    name = "adaptplay",
    version,
    about = "Adaptive style switching in a finite match"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime flags and one-game gains of both styles.
    Classify,
    /// Gain of every policy for N = 1..=n-max.
    Curve,
    /// Horizon N <= n-max with the largest optimal gain.
    Nstar,
    /// Limiting gains as the horizon grows.
    Limits,
    /// Monte Carlo estimate of a policy's gain at --horizon.
    Simulate {
        #[arg(long, value_enum, default_value_t = PolicyArg::Opt)]
        policy: PolicyArg,
    },
    /// Structural checks on built-in grids plus the given spec.
    Verify {
        /// Randomized draws per sampled check.
        #[arg(long, default_value_t = 100)]
        draws: usize,
    },
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Offense win probability.
    #[arg(long, global = true, default_value = "0.45")]
    pw: String,
    #[arg(long, global = true, default_value = "0")]
    pd: String,
    #[arg(long, global = true, default_value = "0.55")]
    pl: String,
    /// Defense win probability.
    #[arg(long, global = true, default_value = "0.10")]
    qw: String,
    #[arg(long, global = true, default_value = "0.75")]
    qd: String,
    #[arg(long, global = true, default_value = "0.15")]
    ql: String,
    /// Match length for `simulate`.
    #[arg(long, global = true, default_value_t = 2)]
    horizon: usize,
    /// Largest horizon for `curve` and `nstar`.
    #[arg(long, global = true, default_value_t = 20)]
    n_max: usize,
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Output format; `verify` prints plain check lines when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PolicyArg {
    Opt,
    Cat,
    Catplus,
    Off,
    Def,
}

impl RunConfig {
    fn p(&self) -> [&str; 3] {
        [&self.pw, &self.pd, &self.pl]
    }

    fn q(&self) -> [&str; 3] {
        [&self.qw, &self.qd, &self.ql]
    }

    fn spec(&self) -> adaptplay::Result<MatchSpec> {
        verify::parse_spec(self.p(), self.q())
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }
}

/// Ordered key/value report rendered as two-column CSV or a JSON object.
#[derive(Default)]
struct Report(Vec<(String, Value)>);

impl Report {
    fn push(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    fn float(&mut self, key: &str, v: f64) -> &mut Self {
        self.push(key, v)
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::from("key,value\n");
                for (k, v) in &self.0 {
                    let text = match v {
                        Value::Number(n) if n.is_f64() => format_sig17(n.as_f64().expect("f64")),
                        Value::String(s) => s.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k},{}\n", csv_field(&text)));
                }
                out
            }
            Format::Json => {
                let obj: Map<String, Value> = self.0.iter().cloned().collect();
                json_text(&Value::Object(obj))
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(run: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &run.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn cmd_classify(run: &RunConfig) -> anyhow::Result<String> {
    let spec = run.spec()?;
    let mut r = Report::default();
    for (name, flag) in spec.classification().flags() {
        r.push(name, flag);
    }
    r.float("g1_off", spec.offense().drift());
    r.float("g1_def", spec.defense().drift());
    Ok(r.render(run.format()))
}

fn cmd_curve(run: &RunConfig) -> anyhow::Result<String> {
    let spec = run.spec()?;
    let curve = Solver::default().gain_curve(&spec, run.n_max, &CurveLabel::ALL)?;
    Ok(match run.format() {
        Format::Csv => report::curve_to_csv(&curve),
        Format::Json => json_text(&report::curve_to_json(&curve)),
    })
}

fn cmd_nstar(run: &RunConfig) -> anyhow::Result<String> {
    let spec = run.spec()?;
    let (n_star, gain) = Solver::default().find_optimal_horizon(&spec, run.n_max)?;
    let mut r = Report::default();
    r.push("n_max", run.n_max)
        .push("n_star", n_star)
        .float("gain", gain);
    Ok(r.render(run.format()))
}

fn cmd_limits(run: &RunConfig) -> anyhow::Result<String> {
    let spec = run.spec()?;
    let verdict = analytic::optimal_limit(&spec)?;
    let mut r = Report::default();
    r.push("regime", format!("{:?}", verdict.regime))
        .float("optimal_limit", verdict.optimal_limit)
        .push(
            "cat_limit",
            verdict.cat_limit.map_or(Value::Null, Value::from),
        )
        .float(
            "hitting_probability",
            analytic::hitting_probability(spec.offense()),
        );
    Ok(r.render(run.format()))
}

fn simulate_with(
    run: &RunConfig,
    spec: &MatchSpec,
    policy: &(impl Policy + Sync),
    exact: f64,
) -> anyhow::Result<String> {
    let est = sim::estimate_gain(spec, policy, run.horizon, run.samples, run.seed)?;
    let mut r = Report::default();
    r.push("horizon", run.horizon)
        .push("samples", est.samples)
        .push("seed", est.seed)
        .float("mean", est.mean)
        .push("std_error", est.std_error.map_or(Value::Null, Value::from))
        .float("exact", exact);
    Ok(r.render(run.format()))
}

fn cmd_simulate(run: &RunConfig, policy: PolicyArg) -> anyhow::Result<String> {
    let spec = run.spec()?;
    let n = run.horizon;
    match policy {
        PolicyArg::Opt => {
            let sol = Solver::default().solve(&spec, n)?;
            simulate_with(run, &spec, &sol.policy, sol.gain)
        }
        PolicyArg::Cat => {
            let exact = exact_policy_gain(&spec, &Catenaccio, n)?;
            simulate_with(run, &spec, &Catenaccio, exact)
        }
        PolicyArg::Catplus => {
            let p = CatenaccioPlus::new(&spec);
            simulate_with(run, &spec, &p, exact_policy_gain(&spec, &p, n)?)
        }
        PolicyArg::Off | PolicyArg::Def => {
            let action = if policy == PolicyArg::Off {
                Action::Off
            } else {
                Action::Def
            };
            let exact = analytic::fixed_style_gain(spec.style(action), n)?;
            simulate_with(run, &spec, &FixedStyle(action), exact)
        }
    }
}

fn cmd_verify(run: &RunConfig, draws: usize) -> anyhow::Result<(String, bool)> {
    let user = UserSpec::parse(run.p(), run.q())?;
    let config = SuiteConfig {
        draws,
        seed: run.seed,
        extra: vec![user],
    };
    let suite = verify::run_suite(&Solver::default(), &config);
    let text = match run.format {
        None => suite.checks.iter().map(|c| c.line() + "\n").collect(),
        Some(Format::Csv) => {
            let mut out = String::from("check,value,status,detail\n");
            for c in &suite.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                out.push_str(&format!(
                    "{},{},{status},{}\n",
                    csv_field(&c.name),
                    csv_field(&c.value),
                    csv_field(&c.detail)
                ));
            }
            out
        }
        Some(Format::Json) => json_text(&serde_json::to_value(&suite.checks)?),
    };
    Ok((text, suite.all_passed()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<adaptplay::Error>() {
        Some(e) if e.is_budget() => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let run = &cli.run;
    let (text, code) = match &cli.command {
        Command::Classify => (cmd_classify(run)?, 0),
        Command::Curve => (cmd_curve(run)?, 0),
        Command::Nstar => (cmd_nstar(run)?, 0),
        Command::Limits => (cmd_limits(run)?, 0),
        Command::Simulate { policy } => (cmd_simulate(run, *policy)?, 0),
        Command::Verify { draws } => {
            let (text, ok) = cmd_verify(run, *draws)?;
            (text, if ok { 0 } else { 4 })
        }
    };
    emit(run, &text)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
