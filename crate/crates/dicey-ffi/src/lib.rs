//! C interface to the dicey solver.
//!
//! Documents cross the boundary as JSON strings in the same shapes the CLI
//! reads and writes; games and strategies live behind opaque handles. Every
//! fallible call returns a [`DiceyStatus`]; on failure a per-thread message
//! is available through [`dicey_last_error`]. Strings returned through out
//! parameters are owned by the caller and released with
//! [`dicey_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::Deserialize;
use serde_json::{json, Value};

use dicey::eval::{evaluate, monte_carlo, ArithmeticMode, Scalar};
use dicey::game::DiceyGame;
use dicey::optimizer::{solve, SchemeSearchResult, SearchMode, SolveOptions};
use dicey::rational::q_to_string;
use dicey::slicer::normalize;
use dicey::strategy::{validate_strategy, GridStrategy};
use dicey::Error;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiceyStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An input string was not valid UTF-8.
    Utf8 = 2,
    /// Malformed document (JSON syntax, bad number format, ...).
    Syntax = 3,
    /// Well-formed document that violates a model invariant.
    Semantic = 4,
    /// Validation failed; the message lists one violation per line.
    Invalid = 5,
    /// The requested search exceeds the configured budget.
    BudgetExceeded = 6,
    /// An external process failed.
    External = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

/// Opaque handle to a parsed, validated game document.
pub struct DiceyGameHandle {
    game: DiceyGame,
}

/// Opaque handle to a grid strategy, validated against its game at parse time.
pub struct DiceyStrategyHandle {
    strategy: GridStrategy,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap_or_default());
}

fn fail(status: DiceyStatus, msg: &str) -> DiceyStatus {
    set_error(msg);
    status
}

fn fail_with(e: &Error) -> DiceyStatus {
    let status = match e {
        Error::Syntax(_) => DiceyStatus::Syntax,
        Error::Semantic(_) => DiceyStatus::Semantic,
        Error::Invalid(_) => DiceyStatus::Invalid,
        Error::BudgetExceeded { .. } => DiceyStatus::BudgetExceeded,
        Error::External(_) => DiceyStatus::External,
    };
    fail(status, &e.to_string())
}

/// Runs a body with panics converted to [`DiceyStatus::Panic`].
fn guarded(body: impl FnOnce() -> DiceyStatus) -> DiceyStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(DiceyStatus::Panic, "internal panic caught at the C boundary"),
    }
}

/// Reads a caller string; `Err` carries the already-set status.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, DiceyStatus> {
    if p.is_null() {
        return Err(fail(DiceyStatus::NullArgument, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(DiceyStatus::Utf8, &format!("{what} is not valid UTF-8")))
}

/// Hands a string to the caller through `out`.
fn write_out_string(out: *mut *mut c_char, text: String) {
    let c = CString::new(text.replace('\0', " ")).unwrap_or_default();
    unsafe { *out = c.into_raw() };
}

fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(q) => json!(q_to_string(q)),
        Scalar::Float(x) => json!(x),
    }
}

/// Library version as a static string; never freed.
#[no_mangle]
pub extern "C" fn dicey_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread, empty when none.
/// The pointer stays valid until the next failing dicey call on the same
/// thread; copy it if you need it longer.
#[no_mangle]
pub extern "C" fn dicey_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be a pointer previously handed out by a dicey call and not yet
/// freed; anything else is undefined behavior.
#[no_mangle]
pub extern "C" fn dicey_string_free(s: *mut c_char) {
    if !s.is_null() {
        unsafe { drop(CString::from_raw(s)) };
    }
}

/// Parses and validates a game document.
///
/// # Safety
/// `json` must be a NUL-terminated string. On `Ok`, `*out` owns the handle
/// until `dicey_game_free`.
#[no_mangle]
pub extern "C" fn dicey_game_parse(
    json: *const c_char,
    out: *mut *mut DiceyGameHandle,
) -> DiceyStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DiceyStatus::NullArgument, "out is null");
        }
        let text = match unsafe { read_str(json, "game document") } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match DiceyGame::from_json(text) {
            Ok(game) => {
                unsafe { *out = Box::into_raw(Box::new(DiceyGameHandle { game })) };
                DiceyStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Releases a game handle. Null is a no-op.
///
/// # Safety
/// `game` must come from `dicey_game_parse` and not be freed twice.
#[no_mangle]
pub extern "C" fn dicey_game_free(game: *mut DiceyGameHandle) {
    if !game.is_null() {
        unsafe { drop(Box::from_raw(game)) };
    }
}

/// Writes the canonical JSON form of a game.
#[no_mangle]
pub extern "C" fn dicey_game_to_json(
    game: *const DiceyGameHandle,
    out: *mut *mut c_char,
) -> DiceyStatus {
    guarded(|| {
        if game.is_null() || out.is_null() {
            return fail(DiceyStatus::NullArgument, "game and out must be non-null");
        }
        let g = unsafe { &*game };
        write_out_string(out, g.game.to_canonical_json());
        DiceyStatus::Ok
    })
}

/// Parses a strategy document and validates it against `game`.
///
/// The strategy handle does not borrow the game; freeing the game first is
/// fine.
#[no_mangle]
pub extern "C" fn dicey_strategy_parse(
    game: *const DiceyGameHandle,
    json: *const c_char,
    out: *mut *mut DiceyStrategyHandle,
) -> DiceyStatus {
    guarded(|| {
        if game.is_null() || out.is_null() {
            return fail(DiceyStatus::NullArgument, "game and out must be non-null");
        }
        let text = match unsafe { read_str(json, "strategy document") } {
            Ok(t) => t,
            Err(status) => return status,
        };
        let g = unsafe { &*game };
        match GridStrategy::from_json(&g.game, text) {
            Ok(strategy) => {
                let violations = validate_strategy(&g.game, &strategy);
                if !violations.is_empty() {
                    return fail_with(&Error::Invalid(violations));
                }
                unsafe { *out = Box::into_raw(Box::new(DiceyStrategyHandle { strategy })) };
                DiceyStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Releases a strategy handle. Null is a no-op.
///
/// # Safety
/// `strategy` must come from a dicey call and not be freed twice.
#[no_mangle]
pub extern "C" fn dicey_strategy_free(strategy: *mut DiceyStrategyHandle) {
    if !strategy.is_null() {
        unsafe { drop(Box::from_raw(strategy)) };
    }
}

/// Writes the canonical JSON form of a strategy.
#[no_mangle]
pub extern "C" fn dicey_strategy_to_json(
    strategy: *const DiceyStrategyHandle,
    out: *mut *mut c_char,
) -> DiceyStatus {
    guarded(|| {
        if strategy.is_null() || out.is_null() {
            return fail(DiceyStatus::NullArgument, "strategy and out must be non-null");
        }
        let s = unsafe { &*strategy };
        write_out_string(out, s.strategy.to_canonical_json());
        DiceyStatus::Ok
    })
}

/// Evaluates a strategy. The result document carries per-Devil-action
/// expectations and their minimum; exact mode renders rationals as "p/q"
/// strings, floating mode as numbers.
#[no_mangle]
pub extern "C" fn dicey_evaluate(
    game: *const DiceyGameHandle,
    strategy: *const DiceyStrategyHandle,
    exact: bool,
    out: *mut *mut c_char,
) -> DiceyStatus {
    guarded(|| {
        if game.is_null() || strategy.is_null() || out.is_null() {
            return fail(DiceyStatus::NullArgument, "game, strategy and out must be non-null");
        }
        let (g, s) = unsafe { (&*game, &*strategy) };
        let mode = if exact { ArithmeticMode::ExactRational } else { ArithmeticMode::Floating };
        match evaluate(&g.game, &s.strategy, mode) {
            Ok(r) => {
                let per: BTreeMap<&String, Value> =
                    r.per_action.iter().map(|(k, v)| (k, scalar_json(v))).collect();
                let doc = json!({
                    "mode": mode,
                    "per_action": per,
                    "value": scalar_json(r.value()),
                });
                write_out_string(out, doc.to_string());
                DiceyStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Monte Carlo estimate of the per-action expectations; deterministic for a
/// given seed. The result document carries mean, standard error and sample
/// count per Devil action.
#[no_mangle]
pub extern "C" fn dicey_monte_carlo(
    game: *const DiceyGameHandle,
    strategy: *const DiceyStrategyHandle,
    samples: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> DiceyStatus {
    guarded(|| {
        if game.is_null() || strategy.is_null() || out.is_null() {
            return fail(DiceyStatus::NullArgument, "game, strategy and out must be non-null");
        }
        let (g, s) = unsafe { (&*game, &*strategy) };
        match monte_carlo(&g.game, &s.strategy, samples, seed) {
            Ok(est) => {
                write_out_string(out, serde_json::to_string(&est).expect("estimate document"));
                DiceyStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Rewrites a strategy onto at most k pieces per die (k = Devil action
/// count) without losing value against any Devil action.
#[no_mangle]
pub extern "C" fn dicey_normalize(
    game: *const DiceyGameHandle,
    strategy: *const DiceyStrategyHandle,
    out: *mut *mut DiceyStrategyHandle,
) -> DiceyStatus {
    guarded(|| {
        if game.is_null() || strategy.is_null() || out.is_null() {
            return fail(DiceyStatus::NullArgument, "game, strategy and out must be non-null");
        }
        let (g, s) = unsafe { (&*game, &*strategy) };
        match normalize(&g.game, &s.strategy) {
            Ok(strategy) => {
                unsafe { *out = Box::into_raw(Box::new(DiceyStrategyHandle { strategy })) };
                DiceyStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Solver knobs accepted by `dicey_solve`, all optional.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct SolveRequest {
    mode: Option<String>,
    k: Option<usize>,
    budget: Option<u128>,
    starts: Option<usize>,
    iters: Option<usize>,
    seed: Option<u64>,
    force: Option<bool>,
    samples: Option<u64>,
    moves: Option<usize>,
}

impl SolveRequest {
    fn mode(&self) -> Result<SearchMode, Error> {
        match self.mode.as_deref() {
            None | Some("exhaustive") => Ok(SearchMode::Exhaustive),
            Some("hybrid") => Ok(SearchMode::Hybrid),
            Some(other) => Err(Error::Semantic(format!(
                "unknown mode {other:?}; expected \"exhaustive\" or \"hybrid\""
            ))),
        }
    }

    fn options(&self) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions {
            k: self.k.or(d.k),
            budget: self.budget.unwrap_or(d.budget),
            starts: self.starts.unwrap_or(d.starts),
            iters: self.iters.unwrap_or(d.iters),
            seed: self.seed.unwrap_or(d.seed),
            force: self.force.unwrap_or(d.force),
            samples: self.samples.unwrap_or(d.samples),
            moves: self.moves.unwrap_or(d.moves),
        }
    }
}

fn summary_json(r: &SchemeSearchResult) -> String {
    json!({
        "value": r.value,
        "k": r.k,
        "active_actions": r.maximin.active_actions,
        "iterations": r.maximin.iterations,
        "starts_used": r.maximin.starts_used,
        "schemes_examined": r.stats.schemes_examined.to_string(),
        "best_cursor": r.stats.best_cursor.map(|c| c.to_string()),
    })
    .to_string()
}

/// Searches scheme space for the best grid strategy.
///
/// `options_json` may be null or `"{}"`; recognized fields are `mode`
/// ("exhaustive" or "hybrid"), `k`, `budget`, `starts`, `iters`, `seed`,
/// `force`, `samples` and `moves`. Either out parameter may be null to skip
/// that output: `out_strategy` receives the witness strategy,
/// `out_summary` a JSON document with the solved value and search counters.
#[no_mangle]
pub extern "C" fn dicey_solve(
    game: *const DiceyGameHandle,
    options_json: *const c_char,
    out_strategy: *mut *mut DiceyStrategyHandle,
    out_summary: *mut *mut c_char,
) -> DiceyStatus {
    guarded(|| {
        if game.is_null() {
            return fail(DiceyStatus::NullArgument, "game is null");
        }
        let request: SolveRequest = if options_json.is_null() {
            SolveRequest::default()
        } else {
            let text = match unsafe { read_str(options_json, "options document") } {
                Ok(t) => t,
                Err(status) => return status,
            };
            match serde_json::from_str(text) {
                Ok(r) => r,
                Err(e) => return fail(DiceyStatus::Syntax, &format!("options document: {e}")),
            }
        };
        let mode = match request.mode() {
            Ok(m) => m,
            Err(e) => return fail_with(&e),
        };
        let g = unsafe { &*game };
        match solve(&g.game, mode, &request.options()) {
            Ok(r) => {
                if !out_summary.is_null() {
                    write_out_string(out_summary, summary_json(&r));
                }
                if !out_strategy.is_null() {
                    let strategy = r.witness;
                    unsafe {
                        *out_strategy = Box::into_raw(Box::new(DiceyStrategyHandle { strategy }))
                    };
                }
                DiceyStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}
