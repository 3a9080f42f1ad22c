//! Solver toolkit for *dicey games*: zero-sum matrix games in which a team of
//! players coordinates through shared sources of randomness ("dice", uniform
//! on `[0,1]`) against a single adversary, the Devil, who sees the team's
//! strategy but never the dice.
//!
//! The library models games and grid strategies, evaluates per-Devil-action
//! expectations exactly in rational arithmetic, normalizes arbitrary grid
//! strategies to `k`-grid form without value loss, searches scheme space for
//! maximin-optimal strategies, certifies candidate optima via Fritz John
//! stationarity, allocates dice packs, encodes DQBF and quadratic-system
//! instances as threshold games, and exports threshold questions as SMT-LIB
//! (QF_NRA) documents for exact external solvers.
//!
//! ```
//! use dicey::game::DiceyGame;
//! use dicey::strategy::GridStrategy;
//! use dicey::eval::{evaluate, ArithmeticMode};
//!
//! let game = DiceyGame::from_json(include_str!("../tests/data/triangular.json")).unwrap();
//! let s = GridStrategy::from_json(&game, include_str!("../tests/data/thirds.json")).unwrap();
//! let r = evaluate(&game, &s, ArithmeticMode::ExactRational).unwrap();
//! assert_eq!(r.value().to_string(), "7/27");
//! ```

pub mod allocator;
pub mod eval;
pub mod fritz_john;
pub mod game;
pub mod optimizer;
pub mod pennies;
pub mod rational;
pub mod reductions;
pub mod simplex;
pub mod slicer;
pub mod smt;
pub mod strategy;

use std::sync::OnceLock;

/// Errors produced by parsing, validation, and solving.
///
/// Syntax errors (malformed documents) and semantic errors (well-formed but
/// inconsistent content) are deliberately distinct variants so callers can
/// tell a broken file from a wrong one.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Document is not well-formed (JSON syntax, bad number format, ...).
    #[error("syntax error: {0}")]
    Syntax(String),
    /// Document is well-formed but violates a model invariant.
    #[error("semantic error: {0}")]
    Semantic(String),
    /// Validation report with one entry per violation.
    #[error("validation failed:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    /// An enumeration would exceed the configured budget.
    #[error("scheme count {count} exceeds budget {budget}; pass force to override")]
    BudgetExceeded { count: String, budget: u128 },
    /// Failure in an external process (SMT solver subprocess).
    #[error("external solver: {0}")]
    External(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Root of `X³ − 3X + 1` in `[0,1]`, computed by bisection to width `1e−12`.
///
/// This is the optimal cut position for the triangular (3-clique) matching
/// pennies game: each player says Heads iff both accessible rolls exceed α.
pub fn alpha() -> f64 {
    static ALPHA: OnceLock<f64> = OnceLock::new();
    *ALPHA.get_or_init(|| {
        let f = |x: f64| x * x * x - 3.0 * x + 1.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        // f(0) = 1 > 0 > -1 = f(1); keep the sign change inside [lo, hi].
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Value of triangular matching pennies: `β = 3α² − 2α³`.
///
/// Algebraically `β = (1−α)³` as well, since `α³ = 3α − 1`; the two forms
/// agree and double as a sanity check on the root. β ≈ 0.2780661.
pub fn beta() -> f64 {
    let a = alpha();
    3.0 * a * a - 2.0 * a * a * a
}
