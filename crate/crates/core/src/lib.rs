//! Optimal style switching for a weaker player in a finite repeated match.
//!
//! Player 1 picks, before every round, an offensive style with outcome law
//! `p = (p_w, p_d, p_l)` or a defensive one with `q = (q_w, q_d, q_l)`. The
//! match pays `sign(wins - losses)` after `N` rounds. This crate solves for
//! the optimal adaptive gain, evaluates benchmark policies exactly, estimates
//! gains by simulation, and checks the known structural properties of the
//! optimal gain.
//!
//! ```
//! use adaptplay::{dp, MatchSpec};
//!
//! let spec = MatchSpec::from_probs([0.45, 0.0, 0.55], [0.10, 0.75, 0.15]).unwrap();
//! let solution = dp::solve(&spec, 2).unwrap();
//! assert!((solution.gain - 0.08).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod dp;
pub mod error;
pub mod model;
pub mod policies;
pub mod report;
pub mod sim;
pub mod verify;

pub use analytic::{AsymptoticVerdict, Regime};
pub use dp::{CurveLabel, GainCurve, PolicyTable, Solution, Solver, SolverConfig, ValueTable};
pub use error::{Error, Result};
pub use model::{
    classify, dominates, make_distribution, Action, Classification, MatchSpec, MatchState,
    StyleDistribution, PROB_TOL,
};
pub use policies::{
    cat_plus_policy, cat_policy, exact_policy_gain, fixed_policy, Catenaccio, CatenaccioPlus,
    FixedStyle, FnPolicy, Policy,
};
pub use sim::SimEstimate;
