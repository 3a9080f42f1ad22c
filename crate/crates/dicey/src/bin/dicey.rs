//! Command-line front end for the dicey games toolkit.
//!
//! Every subcommand prints a single JSON result document to stdout (except
//! `export-smt` without `--check`, which prints the raw SMT-LIB document so
//! it can be piped straight into a solver). Exit codes: 0 success or YES,
//! 3 threshold answered NO_WITHIN_SEARCH, 2 usage error, 1 internal error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dicey::allocator::allocate_solve;
use dicey::eval::{evaluate, monte_carlo, ArithmeticMode, Scalar};
use dicey::fritz_john::{certify_fritz_john, CertificateStatus};
use dicey::game::{DicePack, DiceyGame};
use dicey::optimizer::{
    check_threshold, solve, strategy_to_scheme, SchemeSearchResult, SearchMode, SolveOptions,
    ThresholdAnswer,
};
use dicey::pennies::{build_conjecture_strategy, conjecture_value, gen_clique_mp};
use dicey::rational::{q_from_str, q_to_f64, q_to_string, Q};
use dicey::reductions::{encode_dqbf, encode_quad, parse_dqbf, parse_quad};
use dicey::slicer::normalize_traced;
use dicey::smt::{emit_fixed_scheme, emit_full, run_external_solver, validate_smt, SolverVerdict};
use dicey::strategy::GridStrategy;
use dicey::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dicey",
    version,
    about = "Model, evaluate, and solve dicey games (team vs. Devil with shared dice)",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel search (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search scheme space for the best k-grid strategy.
    Solve {
        /// Game document (JSON).
        game: String,
        #[command(flatten)]
        knobs: Knobs,
        /// Write the witness strategy document here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Evaluate a strategy's per-Devil-action expectations and value.
    Eval {
        game: String,
        strategy: String,
        /// Exact rational arithmetic instead of floating point.
        #[arg(long)]
        exact: bool,
    },
    /// Monte Carlo estimate of a strategy's expectations.
    Mc {
        game: String,
        strategy: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rewrite a strategy as a k-grid strategy without losing value
    /// (k = number of Devil actions).
    Normalize {
        game: String,
        strategy: String,
        /// Write the normalized strategy document here.
        #[arg(long)]
        out: Option<String>,
        /// Include the slice profiles of every rewritten die.
        #[arg(long)]
        dump_profiles: bool,
    },
    /// Search for a strategy of value at least t. Exits 0 on YES with a
    /// verified witness, 3 when the search finds none (not a refutation).
    Threshold {
        game: String,
        /// Threshold, e.g. "1/4" or "0.25".
        #[arg(short, long)]
        t: String,
        #[command(flatten)]
        knobs: Knobs,
        /// Write the witness strategy document here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Check first-order optimality of (strategy, t) via Fritz John
    /// multipliers.
    Certify {
        game: String,
        strategy: String,
        /// Candidate value, e.g. "7/27".
        #[arg(short, long)]
        t: String,
        /// Residual and active-set tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Assign a dice pack's access sets to maximize the solved value.
    Allocate {
        /// Game document without dice.
        game: String,
        /// Pack document: {"dice": [{"id": ..., "acc": n}, ...]}.
        pack: String,
        #[command(flatten)]
        knobs: Knobs,
        /// Report every candidate structure's value, not just the best.
        #[arg(long)]
        log: bool,
        /// Write the winning witness strategy document here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Emit an SMT-LIB (QF_NRA) threshold query.
    ///
    /// With --strategy the query fixes that strategy's scheme and asks
    /// whether any cut lengths reach t; with --full the scheme itself is
    /// unknown (Boolean selectors). Only threshold queries are emitted; to
    /// maximize t, drive this command from a bisection loop, e.g.
    ///
    ///   lo=0; hi=1
    ///   while ...; do
    ///     mid=$(midpoint $lo $hi)
    ///     if dicey export-smt game.json --strategy s.json -t $mid --check
    ///     then lo=$mid; else hi=$mid; fi
    ///   done
    ExportSmt {
        game: String,
        /// Threshold, e.g. "278/1000".
        #[arg(short, long)]
        t: String,
        /// Strategy whose scheme the query fixes (all dice must share one
        /// piece count).
        #[arg(long, conflicts_with = "full")]
        strategy: Option<String>,
        /// Quantify over schemes too (requires --k unless the game fixes it).
        #[arg(long)]
        full: bool,
        /// Pieces per die for --full (default: number of Devil actions).
        #[arg(long)]
        k: Option<usize>,
        /// Write the document here instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Run the external solver on the document and report its verdict.
        #[arg(long)]
        check: bool,
        /// Solver command, e.g. "z3 -smt2"; falls back to $DICEY_SMT_SOLVER.
        #[arg(long)]
        solver: Option<String>,
    },
    /// Encode a decision problem as a threshold dicey game.
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// Generate benchmark games.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Evaluate the pairing strategy for n-player clique matching pennies
    /// and compare against its conjectured value.
    ConjectureCheck {
        #[arg(short, long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum ReduceCmd {
    /// Dependency-quantified Boolean formula (forall/exists/clause lines).
    Dqbf {
        input: String,
        /// Write the encoded game document here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Quadratic inequality system over the simplex (vars/ineq lines).
    Quad {
        input: String,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// n-player matching pennies with one shared die per pair of players.
    CliqueMp {
        #[arg(short, long)]
        n: usize,
        /// Write the game document here.
        #[arg(long)]
        out: Option<String>,
        /// Write the all-acc-2 dice pack document here.
        #[arg(long)]
        pack_out: Option<String>,
        /// Strip the dice structure from the game (for `allocate`, which
        /// assigns access sets from the pack itself).
        #[arg(long)]
        diceless: bool,
    },
}

/// Search knobs shared by the solving subcommands; unset flags take the
/// library defaults.
#[derive(Args)]
struct Knobs {
    /// "exhaustive" (budgeted enumeration) or "hybrid" (sampling plus hill
    /// climbing).
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    /// Pieces per die (default: number of Devil actions).
    #[arg(long)]
    k: Option<usize>,
    /// Refuse exhaustive enumeration beyond this many schemes.
    #[arg(long)]
    budget: Option<u128>,
    /// Ascent restarts per scheme.
    #[arg(long)]
    starts: Option<usize>,
    /// Ascent iteration cap per start.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumerate past the budget anyway.
    #[arg(long)]
    force: bool,
    /// Hybrid mode: random schemes sampled before hill climbing.
    #[arg(long)]
    samples: Option<u64>,
    /// Hybrid mode: cap on hill-climbing moves.
    #[arg(long)]
    moves: Option<usize>,
}

impl Knobs {
    fn mode(&self) -> Result<SearchMode> {
        match self.mode.as_str() {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "hybrid" => Ok(SearchMode::Hybrid),
            other => Err(Error::Semantic(format!(
                "unknown mode {other:?}; expected \"exhaustive\" or \"hybrid\""
            ))),
        }
    }

    fn options(&self) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions {
            k: self.k,
            budget: self.budget.unwrap_or(d.budget),
            starts: self.starts.unwrap_or(d.starts),
            iters: self.iters.unwrap_or(d.iters),
            seed: self.seed.unwrap_or(d.seed),
            force: self.force,
            samples: self.samples.unwrap_or(d.samples),
            moves: self.moves.unwrap_or(d.moves),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Semantic(format!("{path}: {e}")))
}

fn write(path: &str, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::Semantic(format!("{path}: {e}")))
}

fn load_game(path: &str) -> Result<DiceyGame> {
    DiceyGame::from_json(&read(path)?)
}

fn load_strategy(game: &DiceyGame, path: &str) -> Result<GridStrategy> {
    GridStrategy::from_json(game, &read(path)?)
}

/// Accepts "p/q", integers, and decimal strings ("0.279" = 279/1000 exactly).
fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    match s.split_once('.') {
        Some((int, frac))
            if !frac.is_empty() && frac.chars().all(|c| c.is_ascii_digit()) =>
        {
            let int = if int.is_empty() { "0" } else { int };
            let (sign, digits) = match int.strip_prefix('-') {
                Some(rest) => ("-", rest),
                None => ("", int),
            };
            let scale = "1".to_string() + &"0".repeat(frac.len());
            q_from_str(&format!("{sign}{digits}{frac}/{scale}"))
        }
        _ => q_from_str(s),
    }
}

fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(q) => json!(q_to_string(q)),
        Scalar::Float(x) => json!(x),
    }
}

fn strategy_json(s: &GridStrategy) -> Value {
    serde_json::from_str(&s.to_canonical_json()).expect("canonical strategy document")
}

fn game_json(g: &DiceyGame) -> Value {
    serde_json::from_str(&g.to_canonical_json()).expect("canonical game document")
}

fn q_map_json(m: &BTreeMap<String, Q>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), json!(q_to_string(v)))).collect())
}

/// Shared JSON shape for solver outputs.
fn search_result_json(r: &SchemeSearchResult) -> Value {
    json!({
        "value": r.value,
        "k": r.k,
        "active_actions": r.maximin.active_actions,
        "iterations": r.maximin.iterations,
        "starts_used": r.maximin.starts_used,
        "schemes_examined": r.stats.schemes_examined.to_string(),
        "best_cursor": r.stats.best_cursor.map(|c| c.to_string()),
        "witness": strategy_json(&r.witness),
    })
}

/// Prints to stdout, treating a closed pipe (e.g. `| head`) as a normal end
/// of output rather than an error.
fn print_out(text: &str) {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => {
            eprintln!("error: stdout: {e}");
            std::process::exit(1);
        }
    }
}

fn emit(doc: &Value) {
    let mut text = serde_json::to_string_pretty(doc).expect("result document");
    text.push('\n');
    print_out(&text);
}

fn exact_value(game: &DiceyGame, s: &GridStrategy) -> Result<Q> {
    let per = dicey::eval::expectations_exact(game, s)?;
    Ok(per.values().min().expect("devil actions are nonempty").clone())
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Solve { game, knobs, out } => {
            let game = load_game(&game)?;
            let r = solve(&game, knobs.mode()?, &knobs.options())?;
            if let Some(path) = out {
                write(&path, &r.witness.to_canonical_json())?;
            }
            let mut doc = search_result_json(&r);
            doc["command"] = json!("solve");
            doc["mode"] = json!(knobs.mode);
            emit(&doc);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eval { game, strategy, exact } => {
            let game = load_game(&game)?;
            let s = load_strategy(&game, &strategy)?;
            let mode =
                if exact { ArithmeticMode::ExactRational } else { ArithmeticMode::Floating };
            let r = evaluate(&game, &s, mode)?;
            emit(&json!({
                "command": "eval",
                "mode": if exact { "exact-rational" } else { "floating" },
                "per_action": Value::Object(
                    r.per_action.iter().map(|(k, v)| (k.clone(), scalar_json(v))).collect()
                ),
                "value": scalar_json(&r.value),
                "value_float": r.value.to_f64(),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Mc { game, strategy, samples, seed } => {
            let game = load_game(&game)?;
            let s = load_strategy(&game, &strategy)?;
            let est = monte_carlo(&game, &s, samples, seed)?;
            let mut doc = serde_json::to_value(&est).expect("estimate document");
            doc["command"] = json!("mc");
            emit(&doc);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Normalize { game, strategy, out, dump_profiles } => {
            let game = load_game(&game)?;
            let s = load_strategy(&game, &strategy)?;
            let before = exact_value(&game, &s)?;
            let (normalized, profiles) = normalize_traced(&game, &s)?;
            let after = exact_value(&game, &normalized)?;
            if let Some(path) = out {
                write(&path, &normalized.to_canonical_json())?;
            }
            let pieces =
                |s: &GridStrategy| -> Value {
                    Value::Object(
                        s.cuts.iter().map(|(d, v)| (d.clone(), json!(v.len()))).collect(),
                    )
                };
            let mut doc = json!({
                "command": "normalize",
                "k": game.devil_actions.len(),
                "value_before": q_to_string(&before),
                "value_after": q_to_string(&after),
                "pieces_before": pieces(&s),
                "pieces_after": pieces(&normalized),
                "sliced_dice": profiles.iter().map(|p| p.die.clone()).collect::<Vec<_>>(),
                "strategy": strategy_json(&normalized),
            });
            if dump_profiles {
                doc["profiles"] =
                    Value::Array(profiles.iter().map(|p| p.to_json_value()).collect());
            }
            emit(&doc);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Threshold { game, t, knobs, out } => {
            let game = load_game(&game)?;
            let t = parse_rational(&t)?;
            let answer = check_threshold(&game, &t, knobs.mode()?, &knobs.options())?;
            let (verdict, r, code) = match &answer {
                ThresholdAnswer::Yes(r) => ("yes", r, ExitCode::SUCCESS),
                ThresholdAnswer::NoWithinSearch(r) => ("no-within-search", r, ExitCode::from(3)),
            };
            if let Some(path) = out {
                write(&path, &r.witness.to_canonical_json())?;
            }
            let exact = exact_value(&game, &r.witness)?;
            let mut doc = search_result_json(r);
            doc["command"] = json!("threshold");
            doc["t"] = json!(q_to_string(&t));
            doc["answer"] = json!(verdict);
            doc["witness_value_exact"] = json!(q_to_string(&exact));
            emit(&doc);
            Ok(code)
        }
        Cmd::Certify { game, strategy, t, tol } => {
            let game = load_game(&game)?;
            let s = load_strategy(&game, &strategy)?;
            let t = parse_rational(&t)?;
            let cert = certify_fritz_john(&game, &s, &t, tol)?;
            emit(&json!({
                "command": "certify",
                "t": q_to_string(&t),
                "tol": tol,
                "status": match cert.status {
                    CertificateStatus::Feasible => "feasible",
                    CertificateStatus::Infeasible => "infeasible",
                },
                "alpha0": q_to_string(&cert.alpha0),
                "alpha0_positive": cert.alpha0_positive,
                "residual": q_to_string(&cert.residual),
                "residual_float": q_to_f64(&cert.residual),
                "alpha_payoff": q_map_json(&cert.alpha_payoff),
                "alpha_nonneg": q_map_json(&cert.alpha_nonneg),
                "mu": q_map_json(&cert.mu),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Allocate { game, pack, knobs, log, out } => {
            let game = load_game(&game)?;
            let pack = DicePack::from_json(&read(&pack)?)?;
            let r = allocate_solve(&game, &pack, knobs.mode()?, &knobs.options(), log)?;
            if let Some(path) = out {
                write(&path, &r.solution.witness.to_canonical_json())?;
            }
            let mut doc = search_result_json(&r.solution);
            doc["command"] = json!("allocate");
            doc["structures_examined"] = json!(r.structures_examined);
            doc["best_structure"] = serde_json::to_value(&r.best_structure).expect("dice");
            if let Some(log) = &r.per_structure_log {
                doc["per_structure"] = Value::Array(
                    log.iter()
                        .map(|(structure, value)| {
                            json!({
                                "structure": serde_json::to_value(structure).expect("dice"),
                                "value": value,
                            })
                        })
                        .collect(),
                );
            }
            emit(&doc);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ExportSmt { game, t, strategy, full, k, out, check, solver } => {
            let game = load_game(&game)?;
            let t = parse_rational(&t)?;
            let sys = if full {
                let k = k.unwrap_or_else(|| game.devil_actions.len().max(1));
                emit_full(&game, k, &t)?
            } else {
                let path = strategy.ok_or_else(|| {
                    Error::Semantic("pass --strategy for a fixed-scheme query or --full".into())
                })?;
                let s = load_strategy(&game, &path)?;
                let (ks, scheme) = strategy_to_scheme(&game, &s)?;
                if let Some(k) = k {
                    if k != ks {
                        return Err(Error::Semantic(format!(
                            "--k {k} disagrees with the strategy's piece count {ks}"
                        )));
                    }
                }
                emit_fixed_scheme(&game, ks, &scheme, &t)?
            };
            let doc = sys.to_document();
            validate_smt(&doc)?;
            if let Some(path) = &out {
                write(path, &doc)?;
            }
            if check {
                let command = solver
                    .or_else(|| std::env::var("DICEY_SMT_SOLVER").ok())
                    .ok_or_else(|| {
                        Error::Semantic(
                            "--check needs --solver or $DICEY_SMT_SOLVER".into(),
                        )
                    })?;
                let verdict = run_external_solver(&command, &doc)?;
                emit(&json!({
                    "command": "export-smt",
                    "t": q_to_string(&t),
                    "query": if full { "full" } else { "fixed-scheme" },
                    "solver": command,
                    "verdict": match verdict {
                        SolverVerdict::Sat => "sat",
                        SolverVerdict::Unsat => "unsat",
                        SolverVerdict::Unknown => "unknown",
                    },
                }));
                // Same exit contract as `threshold`: 0 means t is reached.
                return Ok(match verdict {
                    SolverVerdict::Sat => ExitCode::SUCCESS,
                    SolverVerdict::Unsat => ExitCode::from(3),
                    SolverVerdict::Unknown => {
                        return Err(Error::External("solver returned unknown".into()))
                    }
                });
            } else if out.is_none() {
                print_out(&doc);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Reduce(reduce) => {
            let (kind, input, out) = match &reduce {
                ReduceCmd::Dqbf { input, out } => ("dqbf", input, out),
                ReduceCmd::Quad { input, out } => ("quad", input, out),
            };
            let text = read(input)?;
            let (game, threshold) = match reduce {
                ReduceCmd::Dqbf { .. } => encode_dqbf(&parse_dqbf(&text)?)?,
                ReduceCmd::Quad { .. } => encode_quad(&parse_quad(&text)?)?,
            };
            if let Some(path) = out {
                write(path, &game.to_canonical_json())?;
            }
            emit(&json!({
                "command": "reduce",
                "kind": kind,
                "threshold": q_to_string(&threshold),
                "players": game.players.len(),
                "devil_actions": game.devil_actions.len(),
                "dice": game.dice.len(),
                "game": game_json(&game),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Gen(GenCmd::CliqueMp { n, out, pack_out, diceless }) => {
            let (mut game, pack) = gen_clique_mp(n)?;
            if diceless {
                game.dice.clear();
            }
            if let Some(path) = out {
                write(&path, &game.to_canonical_json())?;
            }
            if let Some(path) = pack_out {
                write(&path, &pack.to_canonical_json())?;
            }
            emit(&json!({
                "command": "gen",
                "family": "clique-mp",
                "n": n,
                "dice": game.dice.len(),
                "game": game_json(&game),
                "pack": serde_json::from_str::<Value>(&pack.to_canonical_json())
                    .expect("canonical pack document"),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ConjectureCheck { n } => {
            let (game, _) = gen_clique_mp(n)?;
            let s = build_conjecture_strategy(&game)?;
            let exact = exact_value(&game, &s)?;
            let conjectured = conjecture_value(n);
            let matches = if n % 2 == 0 {
                // Even n: (1/2)^(n/2), checked exactly.
                exact == q_from_str(&format!("1/{}", 1u128 << (n / 2)))?
            } else {
                (q_to_f64(&exact) - conjectured).abs() < 1e-6
            };
            emit(&json!({
                "command": "conjecture-check",
                "n": n,
                "constants": { "alpha": dicey::alpha(), "beta": dicey::beta() },
                "conjectured_value": conjectured,
                "evaluated_exact": q_to_string(&exact),
                "evaluated": q_to_f64(&exact),
                "match": matches,
                "strategy": strategy_json(&s),
            }));
            if matches {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(Error::Semantic(format!(
                    "conjecture mismatch at n = {n}: evaluated {} vs conjectured {conjectured}",
                    q_to_string(&exact)
                )))
            }
        }
    }
}
