//! SMT-LIB export of the polynomial systems behind grid strategies.
//!
//! Two query shapes are emitted, both in quantifier-free nonlinear real
//! arithmetic (QF_NRA). The fixed-scheme query asks whether some piece-length
//! assignment makes a given scheme's value reach a threshold: one real per
//! (die, piece) plus `t`, nonnegativity and sum-to-one constraints, and one
//! polynomial inequality per Devil action. The full query additionally makes
//! the scheme itself unknown, with one Boolean selector per (player, cell,
//! action) and exactly-one constraints, so satisfiability decides whether any
//! k-grid strategy reaches the threshold.
//!
//! Only threshold queries are emitted; maximizing the value is left to an
//! external bisection driver over `t` (see the CLI documentation).

use std::collections::BTreeMap;
use std::io::Write as _;
use std::process::Command;

use crate::game::{DiceyGame, GameIndex};
use crate::optimizer::{SchemeSpace, SchemeTables};
use crate::rational::{q_to_string, Q};
use crate::strategy::cells;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Piece lengths are nonnegative.
    Nonneg,
    /// Each die's piece lengths sum to one.
    SimplexSum,
    /// A Devil action's expected payoff meets the threshold.
    Payoff,
    /// Binds `t` to the queried rational.
    ThresholdBinding,
    /// Exactly one action selected per table cell (full query only).
    SchemeSelection,
}

impl ConstraintKind {
    fn comment(self) -> &'static str {
        match self {
            ConstraintKind::Nonneg => "; piece lengths are nonnegative",
            ConstraintKind::SimplexSum => "; piece lengths of each die sum to one",
            ConstraintKind::Payoff => "; every Devil action meets the threshold",
            ConstraintKind::ThresholdBinding => "; threshold under test",
            ConstraintKind::SchemeSelection => "; exactly one action per table cell",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaggedConstraint {
    pub kind: ConstraintKind,
    /// The assertion body, an s-expression over the declared symbols.
    pub body: String,
}

/// A polynomial (in)equality system ready to render as an SMT-LIB document.
#[derive(Debug, Clone)]
pub struct PolySystem {
    pub reals: Vec<String>,
    pub bools: Vec<String>,
    pub constraints: Vec<TaggedConstraint>,
}

impl PolySystem {
    pub fn to_document(&self) -> String {
        let mut doc = String::from("(set-logic QF_NRA)\n");
        for r in &self.reals {
            doc.push_str(&format!("(declare-const {r} Real)\n"));
        }
        for b in &self.bools {
            doc.push_str(&format!("(declare-const {b} Bool)\n"));
        }
        let mut last_kind = None;
        for c in &self.constraints {
            if last_kind != Some(c.kind) {
                doc.push_str(c.kind.comment());
                doc.push('\n');
                last_kind = Some(c.kind);
            }
            doc.push_str(&format!("(assert {})\n", c.body));
        }
        doc.push_str("(check-sat)\n");
        doc
    }
}

/// Collapses a raw id to an SMT symbol fragment: alphanumerics and `_` are
/// kept, everything else becomes `_`.
fn sanitize(raw: &str) -> String {
    raw.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

/// Tracks sanitized symbols and rejects collisions, which would silently
/// merge distinct variables.
#[derive(Default)]
struct Symbols {
    seen: BTreeMap<String, String>,
}

impl Symbols {
    fn claim(&mut self, symbol: String, origin: String) -> Result<String> {
        if let Some(prev) = self.seen.get(&symbol) {
            return Err(Error::Semantic(format!(
                "SMT symbol collision: {prev} and {origin} both map to {symbol:?}; rename one"
            )));
        }
        self.seen.insert(symbol.clone(), origin);
        Ok(symbol)
    }
}

fn smt_rational(q: &Q) -> String {
    let s = q_to_string(q);
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.as_str()),
    };
    let core = match s.split_once('/') {
        Some((p, qq)) => format!("(/ {p} {qq})"),
        None => s.to_string(),
    };
    if neg { format!("(- {core})") } else { core }
}

fn smt_int(v: i64) -> String {
    if v < 0 { format!("(- {})", v.unsigned_abs()) } else { v.to_string() }
}

fn smt_sum(terms: &[String]) -> String {
    match terms {
        [] => "0".to_string(),
        [one] => one.clone(),
        many => format!("(+ {})", many.join(" ")),
    }
}

/// `coeff · Π factors`, eliding a coefficient of one.
fn smt_product(coeff: i64, factors: &[String]) -> String {
    let mut parts: Vec<String> = Vec::new();
    if coeff != 1 || factors.is_empty() {
        parts.push(smt_int(coeff));
    }
    parts.extend_from_slice(factors);
    if parts.len() == 1 { parts.pop().unwrap() } else { format!("(* {})", parts.join(" ")) }
}

struct LambdaVars {
    /// `names[die][piece]`, in the game's sorted die order.
    names: Vec<Vec<String>>,
}

fn declare_lambdas(ix: &GameIndex, k: usize, symbols: &mut Symbols) -> Result<LambdaVars> {
    let mut names = Vec::new();
    for die in &ix.dice {
        let mut per_die = Vec::new();
        for j in 1..=k {
            per_die.push(symbols.claim(
                format!("lambda_{}_{j}", sanitize(die)),
                format!("piece {j} of die {die:?}"),
            )?);
        }
        names.push(per_die);
    }
    Ok(LambdaVars { names })
}

fn simplex_constraints(vars: &LambdaVars, constraints: &mut Vec<TaggedConstraint>) {
    for per_die in &vars.names {
        for name in per_die {
            constraints.push(TaggedConstraint {
                kind: ConstraintKind::Nonneg,
                body: format!("(>= {name} 0)"),
            });
        }
    }
    for per_die in &vars.names {
        constraints.push(TaggedConstraint {
            kind: ConstraintKind::SimplexSum,
            body: format!("(= {} 1)", smt_sum(per_die)),
        });
    }
}

fn check_scheme(space: &SchemeSpace, scheme: &SchemeTables) -> Result<()> {
    if scheme.len() != space.cells_per_player.len() {
        return Err(Error::Semantic(format!(
            "scheme has {} tables for {} players",
            scheme.len(),
            space.cells_per_player.len()
        )));
    }
    for (p, table) in scheme.iter().enumerate() {
        if table.len() != space.cells_per_player[p] {
            return Err(Error::Semantic(format!(
                "player {p} table has {} cells, expected {}",
                table.len(),
                space.cells_per_player[p]
            )));
        }
        if let Some(bad) = table.iter().find(|&&a| a >= space.action_counts[p]) {
            return Err(Error::Semantic(format!("player {p} table selects action {bad} out of range")));
        }
    }
    Ok(())
}

/// Emits the satisfiability query "does this scheme admit piece lengths of
/// value ≥ t". The document declares one real per (die, piece) plus `t`,
/// binds `t` to the given rational, and is satisfiable exactly when such
/// piece lengths exist.
pub fn emit_fixed_scheme(
    game: &DiceyGame,
    k: usize,
    scheme: &SchemeTables,
    t: &Q,
) -> Result<PolySystem> {
    game.validate()?;
    let ix = GameIndex::new(game);
    let space = SchemeSpace::new(game, k)?;
    check_scheme(&space, scheme)?;
    let mut symbols = Symbols::default();
    let t_name = symbols.claim("t".into(), "the threshold variable".into())?;
    let vars = declare_lambdas(&ix, k, &mut symbols)?;
    let mut constraints = Vec::new();
    simplex_constraints(&vars, &mut constraints);
    let dims = vec![k; ix.dice.len()];
    let mut team = vec![0usize; ix.players.len()];
    for b in 0..ix.devil_actions.len() {
        let mut terms = Vec::new();
        for joint in cells(&dims) {
            for (p, slot) in team.iter_mut().enumerate() {
                let cell = ix.access[p].iter().fold(0usize, |off, &die| off * k + joint[die]);
                *slot = scheme[p][cell];
            }
            let mu = ix.payoff(&team, b);
            if mu == 0 {
                continue;
            }
            let factors: Vec<String> =
                joint.iter().enumerate().map(|(d, &j)| vars.names[d][j].clone()).collect();
            terms.push(smt_product(mu, &factors));
        }
        constraints.push(TaggedConstraint {
            kind: ConstraintKind::Payoff,
            body: format!("(>= (- {} {t_name}) 0)", smt_sum(&terms)),
        });
    }
    constraints.push(TaggedConstraint {
        kind: ConstraintKind::ThresholdBinding,
        body: format!("(= {t_name} {})", smt_rational(t)),
    });
    Ok(PolySystem { reals: symbols_to_reals(&vars, &t_name), bools: Vec::new(), constraints })
}

fn symbols_to_reals(vars: &LambdaVars, t_name: &str) -> Vec<String> {
    let mut reals = vec![t_name.to_string()];
    reals.extend(vars.names.iter().flatten().cloned());
    reals
}

/// Emits the satisfiability query "does any k-grid strategy have value ≥ t".
/// Scheme choices become Boolean selectors with exactly-one constraints; the
/// payoff polynomials select coefficients through those Booleans.
pub fn emit_full(game: &DiceyGame, k: usize, t: &Q) -> Result<PolySystem> {
    game.validate()?;
    let ix = GameIndex::new(game);
    let space = SchemeSpace::new(game, k)?;
    let mut symbols = Symbols::default();
    let t_name = symbols.claim("t".into(), "the threshold variable".into())?;
    let vars = declare_lambdas(&ix, k, &mut symbols)?;
    // selectors[p][cell][action]
    let mut selectors: Vec<Vec<Vec<String>>> = Vec::new();
    for (p, player) in ix.players.iter().enumerate() {
        let mut per_cell = Vec::new();
        for cell in 1..=space.cells_per_player[p] {
            let mut per_action = Vec::new();
            for action in &ix.actions[p] {
                per_action.push(symbols.claim(
                    format!("b_{}_{cell}_{}", sanitize(player), sanitize(action)),
                    format!("player {player:?} cell {cell} action {action:?}"),
                )?);
            }
            per_cell.push(per_action);
        }
        selectors.push(per_cell);
    }
    let mut constraints = Vec::new();
    simplex_constraints(&vars, &mut constraints);
    for per_cell in &selectors {
        for per_action in per_cell {
            constraints.push(TaggedConstraint {
                kind: ConstraintKind::SchemeSelection,
                body: format!("(or {})", per_action.join(" ")),
            });
            for i in 0..per_action.len() {
                for j in i + 1..per_action.len() {
                    constraints.push(TaggedConstraint {
                        kind: ConstraintKind::SchemeSelection,
                        body: format!("(not (and {} {}))", per_action[i], per_action[j]),
                    });
                }
            }
        }
    }
    let dims = vec![k; ix.dice.len()];
    let action_dims: Vec<usize> = space.action_counts.clone();
    for b in 0..ix.devil_actions.len() {
        let mut terms = Vec::new();
        for joint in cells(&dims) {
            let factors: Vec<String> =
                joint.iter().enumerate().map(|(d, &j)| vars.names[d][j].clone()).collect();
            for team in cells(&action_dims) {
                let mu = ix.payoff(&team, b);
                if mu == 0 {
                    continue;
                }
                let guards: Vec<String> = team
                    .iter()
                    .enumerate()
                    .map(|(p, &a)| {
                        let cell =
                            ix.access[p].iter().fold(0usize, |off, &die| off * k + joint[die]);
                        selectors[p][cell][a].clone()
                    })
                    .collect();
                let guard = if guards.len() == 1 {
                    guards[0].clone()
                } else {
                    format!("(and {})", guards.join(" "))
                };
                terms.push(format!("(ite {guard} {} 0)", smt_product(mu, &factors)));
            }
        }
        constraints.push(TaggedConstraint {
            kind: ConstraintKind::Payoff,
            body: format!("(>= (- {} {t_name}) 0)", smt_sum(&terms)),
        });
    }
    constraints.push(TaggedConstraint {
        kind: ConstraintKind::ThresholdBinding,
        body: format!("(= {t_name} {})", smt_rational(t)),
    });
    Ok(PolySystem {
        reals: symbols_to_reals(&vars, &t_name),
        bools: selectors.into_iter().flatten().flatten().collect(),
        constraints,
    })
}

/// Tokenizer-level syntax check for the documents this module emits.
///
/// Verifies balanced parentheses, legal atoms (numerals or SMT simple
/// symbols), non-empty lists, a leading `set-logic`, and a single trailing
/// `check-sat`. Not a full SMT-LIB parser.
pub fn validate_smt(doc: &str) -> Result<()> {
    const SYMBOL_EXTRA: &str = "~!@$%^&*_+=<>.?/-";
    let mut depth = 0usize;
    // (head of form, arity so far) per open paren; tracks top-level heads.
    let mut top_level: Vec<String> = Vec::new();
    let mut head_pending = false;
    let mut empty_list = false;
    let fail = |msg: String| Err(Error::Syntax(format!("SMT document: {msg}")));
    let mut chars = doc.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                if head_pending {
                    return fail("list in head position".into());
                }
                depth += 1;
                head_pending = true;
                empty_list = true;
            }
            ')' => {
                if depth == 0 {
                    return fail("unbalanced ')'".into());
                }
                if empty_list {
                    return fail("empty list".into());
                }
                depth -= 1;
                empty_list = false;
            }
            c if c.is_whitespace() => {}
            c if c.is_ascii_alphanumeric() || SYMBOL_EXTRA.contains(c) => {
                let mut atom = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || SYMBOL_EXTRA.contains(n) {
                        atom.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let numeral = atom.chars().all(|c| c.is_ascii_digit());
                if !numeral && atom.starts_with(|c: char| c.is_ascii_digit()) {
                    return fail(format!("malformed atom {atom:?}"));
                }
                if depth == 0 {
                    return fail(format!("bare atom {atom:?} at top level"));
                }
                if head_pending && depth == 1 {
                    top_level.push(atom.clone());
                }
                head_pending = false;
                empty_list = false;
            }
            other => return fail(format!("illegal character {other:?}")),
        }
    }
    if depth != 0 {
        return fail("unbalanced '('".into());
    }
    if top_level.first().map(String::as_str) != Some("set-logic") {
        return fail("document must start with set-logic".into());
    }
    match top_level.iter().position(|h| h == "check-sat") {
        None => fail("missing check-sat".into()),
        Some(i) if i + 1 != top_level.len() => fail("content after check-sat".into()),
        Some(_) => {
            const ALLOWED: [&str; 7] = [
                "set-logic",
                "set-info",
                "declare-const",
                "define-fun",
                "assert",
                "check-sat",
                "exit",
            ];
            match top_level.iter().find(|h| !ALLOWED.contains(&h.as_str())) {
                Some(h) => fail(format!("unexpected top-level form {h:?}")),
                None => Ok(()),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverVerdict {
    Sat,
    Unsat,
    Unknown,
}

/// Runs an external SMT solver on the document. `command` is split on
/// whitespace; the document is written to a temporary `.smt2` file whose
/// path is appended as the final argument. The first output line reading
/// `sat`, `unsat`, or `unknown` decides the verdict.
pub fn run_external_solver(command: &str, doc: &str) -> Result<SolverVerdict> {
    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::External("empty solver command".into()))?;
    let mut file = tempfile::Builder::new()
        .prefix("dicey-query-")
        .suffix(".smt2")
        .tempfile()
        .map_err(|e| Error::External(format!("temp file: {e}")))?;
    file.write_all(doc.as_bytes())
        .map_err(|e| Error::External(format!("temp file: {e}")))?;
    let output = Command::new(program)
        .args(parts)
        .arg(file.path())
        .output()
        .map_err(|e| Error::External(format!("failed to launch {program:?}: {e}")))?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    for line in stdout.lines() {
        match line.trim() {
            "sat" => return Ok(SolverVerdict::Sat),
            "unsat" => return Ok(SolverVerdict::Unsat),
            "unknown" => return Ok(SolverVerdict::Unknown),
            _ => {}
        }
    }
    let stderr = String::from_utf8_lossy(&output.stderr);
    Err(Error::External(format!(
        "solver produced no verdict (status {}); stdout: {}; stderr: {}",
        output.status,
        stdout.trim(),
        stderr.trim()
    )))
}
