//! Encodings of other decision problems as dicey-game threshold instances.
//!
//! Two reductions are provided. DQBF: each universal variable becomes a die
//! whose accessors are the variable's player and every existential depending
//! on it; `rand` actions force the universal players to play both bits with
//! probability exactly 1/2, and clause actions pay 1 when some literal is
//! satisfied, so the instance has value ≥ 1 iff the formula is true.
//! Quadratic systems: Ada and Bertrand each pick a variable index from a
//! private die; paired ≤/≥ actions force their marginal distributions to be
//! equal, and each inequality action pays its coefficient, so value ≥ 0 iff
//! the system has a nonnegative solution summing to one.

use std::collections::{BTreeMap, BTreeSet};

use crate::game::{DiceyGame, Die, PayoffRules, Rule, DEVIL};
use crate::rational::Q;
use crate::{Error, Result};
use num_traits::{One, Zero};

// ---------------------------------------------------------------------------
// DQBF

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DqbfInstance {
    pub universals: Vec<String>,
    /// Existential variables with their dependency sets (subsets of the
    /// universals).
    pub existentials: Vec<(String, Vec<String>)>,
    /// Clauses of one to three literals; `true` marks a positive literal.
    pub clauses: Vec<Vec<(String, bool)>>,
}

impl DqbfInstance {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut names = BTreeSet::new();
        for v in self.universals.iter().chain(self.existentials.iter().map(|(y, _)| y)) {
            if v.is_empty() || v == DEVIL || v.starts_with('-') {
                errs.push(format!("bad variable name {v:?}"));
            }
            if !names.insert(v.clone()) {
                errs.push(format!("duplicate variable {v:?}"));
            }
        }
        let universals: BTreeSet<&String> = self.universals.iter().collect();
        for (y, deps) in &self.existentials {
            for d in deps {
                if !universals.contains(d) {
                    errs.push(format!("dependency {d:?} of {y:?} is not a universal"));
                }
            }
            let mut seen = BTreeSet::new();
            if !deps.iter().all(|d| seen.insert(d)) {
                errs.push(format!("duplicate dependency in {y:?}"));
            }
        }
        for (k, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() {
                errs.push(format!("clause {} is empty", k + 1));
            }
            if clause.len() > 3 {
                errs.push(format!("clause {} has more than 3 literals", k + 1));
            }
            for (v, _) in clause {
                if !names.contains(v) {
                    errs.push(format!("clause {} references undeclared variable {v:?}", k + 1));
                }
            }
        }
        if errs.is_empty() { Ok(()) } else { Err(Error::Invalid(errs)) }
    }
}

/// Parses the DQBF text format:
///
/// ```text
/// forall x1 x2
/// exists y1 : x1 x2
/// exists y2 :
/// clause x1 -y1 y2
/// ```
///
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_dqbf(text: &str) -> Result<DqbfInstance> {
    let mut inst = DqbfInstance { universals: Vec::new(), existentials: Vec::new(), clauses: Vec::new() };
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        let err = |msg: &str| Error::Syntax(format!("line {}: {msg}", ln + 1));
        match head {
            "forall" => inst.universals.extend(tokens.map(str::to_string)),
            "exists" => {
                let name = tokens.next().ok_or_else(|| err("missing variable after exists"))?;
                match tokens.next() {
                    Some(":") => {}
                    _ => return Err(err("expected ':' after the existential variable")),
                }
                inst.existentials.push((name.to_string(), tokens.map(str::to_string).collect()));
            }
            "clause" => {
                let lits: Vec<(String, bool)> = tokens
                    .map(|t| match t.strip_prefix('-') {
                        Some(v) => (v.to_string(), false),
                        None => (t.to_string(), true),
                    })
                    .collect();
                if lits.is_empty() {
                    return Err(err("clause needs at least one literal"));
                }
                inst.clauses.push(lits);
            }
            other => return Err(err(&format!("unknown directive {other:?}"))),
        }
    }
    inst.validate()?;
    Ok(inst)
}

/// Builds the threshold instance for a DQBF formula. The game has value ≥ 1
/// iff the formula is true; solve it as a 2-grid game.
pub fn encode_dqbf(inst: &DqbfInstance) -> Result<(DiceyGame, Q)> {
    inst.validate()?;
    let players: Vec<String> = inst
        .universals
        .iter()
        .chain(inst.existentials.iter().map(|(y, _)| y))
        .cloned()
        .collect();
    let actions: BTreeMap<String, Vec<String>> =
        players.iter().map(|p| (p.clone(), vec!["0".into(), "1".into()])).collect();
    let dice: Vec<Die> = inst
        .universals
        .iter()
        .map(|x| {
            let mut access = vec![x.clone()];
            access.extend(
                inst.existentials.iter().filter(|(_, deps)| deps.contains(x)).map(|(y, _)| y.clone()),
            );
            Die { id: format!("die_{x}"), access }
        })
        .collect();
    let mut devil_actions = Vec::new();
    let mut rules = Vec::new();
    for x in &inst.universals {
        for b in ["0", "1"] {
            let action = format!("rand{b}_{x}");
            rules.push(Rule {
                when: [(DEVIL.to_string(), action.clone()), (x.clone(), b.to_string())]
                    .into_iter()
                    .collect(),
                value: 2,
            });
            devil_actions.push(action);
        }
    }
    for (k, clause) in inst.clauses.iter().enumerate() {
        let action = format!("clause{}", k + 1);
        for (v, positive) in clause {
            let bit = if *positive { "1" } else { "0" };
            rules.push(Rule {
                when: [(DEVIL.to_string(), action.clone()), (v.clone(), bit.to_string())]
                    .into_iter()
                    .collect(),
                value: 1,
            });
        }
        devil_actions.push(action);
    }
    let game = DiceyGame {
        players,
        devil_actions,
        actions,
        payoff: PayoffRules { rules, default: 0 },
        dice,
    };
    game.validate()?;
    Ok((game, Q::one()))
}

/// Reference decision procedure: enumerates every collection of Skolem
/// tables. Exponential; refuses instances with more than 6 variables.
pub fn dqbf_brute_force(inst: &DqbfInstance) -> Result<bool> {
    inst.validate()?;
    let n = inst.universals.len();
    let m = inst.existentials.len();
    if n + m > 6 {
        return Err(Error::Semantic(format!(
            "brute force is gated to at most 6 variables; got {}",
            n + m
        )));
    }
    let index: BTreeMap<&String, usize> =
        inst.universals.iter().enumerate().map(|(i, x)| (x, i)).collect();
    // Dependency positions per existential, and table sizes 2^|deps|.
    let deps: Vec<Vec<usize>> = inst
        .existentials
        .iter()
        .map(|(_, d)| d.iter().map(|x| index[x]).collect())
        .collect();
    let table_bits: Vec<u32> = deps.iter().map(|d| 1u32 << d.len()).collect();
    let mut tables = vec![0u64; m];
    loop {
        let mut all_ok = true;
        'assignments: for a in 0..(1u64 << n) {
            let value = |v: &String| -> bool {
                if let Some(&i) = index.get(v) {
                    return a >> i & 1 == 1;
                }
                let j = inst.existentials.iter().position(|(y, _)| y == v).unwrap();
                let input = deps[j]
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (pos, &i)| acc | (((a >> i & 1) as u32) << pos));
                tables[j] >> input & 1 == 1
            };
            for clause in &inst.clauses {
                if !clause.iter().any(|(v, positive)| value(v) == *positive) {
                    all_ok = false;
                    break 'assignments;
                }
            }
        }
        if all_ok {
            return Ok(true);
        }
        // Next combination of tables, mixed radix with base 2^table_bits[j].
        let mut j = 0;
        loop {
            if j == m {
                return Ok(false);
            }
            tables[j] += 1;
            if tables[j] < 1u64 << table_bits[j] {
                break;
            }
            tables[j] = 0;
            j += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Quadratic inequality systems

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSystem {
    pub n: usize,
    /// Each inequality is a list of (i, j, c) triples, 1-based indices,
    /// meaning Σ c · x_i · x_j ≥ 0.
    pub inequalities: Vec<Vec<(usize, usize, i64)>>,
}

impl QuadSystem {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.n == 0 {
            errs.push("variable count must be positive".into());
        }
        for (k, ineq) in self.inequalities.iter().enumerate() {
            for &(i, j, _) in ineq {
                if i == 0 || i > self.n || j == 0 || j > self.n {
                    errs.push(format!("inequality {}: index ({i}, {j}) out of range", k + 1));
                }
            }
        }
        if errs.is_empty() { Ok(()) } else { Err(Error::Invalid(errs)) }
    }
}

/// Parses the quadratic system format:
///
/// ```text
/// vars 2
/// ineq
/// 1 2 1
/// 2 1 1
/// ineq
/// 1 1 -1
/// ```
pub fn parse_quad(text: &str) -> Result<QuadSystem> {
    let mut n = None;
    let mut inequalities: Vec<Vec<(usize, usize, i64)>> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Syntax(format!("line {}: {msg}", ln + 1));
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "vars" => {
                if n.is_some() {
                    return Err(err("vars declared twice".into()));
                }
                let count = tokens
                    .get(1)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err("vars needs a count".into()))?;
                n = Some(count);
            }
            "ineq" => inequalities.push(Vec::new()),
            _ => {
                if tokens.len() != 3 {
                    return Err(err(format!("expected a triple `i j c`, got {line:?}")));
                }
                let triple = (
                    tokens[0].parse::<usize>().map_err(|e| err(format!("bad index: {e}")))?,
                    tokens[1].parse::<usize>().map_err(|e| err(format!("bad index: {e}")))?,
                    tokens[2].parse::<i64>().map_err(|e| err(format!("bad coefficient: {e}")))?,
                );
                inequalities
                    .last_mut()
                    .ok_or_else(|| err("triple before any ineq line".into()))?
                    .push(triple);
            }
        }
    }
    let sys = QuadSystem {
        n: n.ok_or_else(|| Error::Syntax("missing vars line".into()))?,
        inequalities,
    };
    sys.validate()?;
    Ok(sys)
}

/// Builds the threshold instance for a quadratic system. The game has value
/// ≥ 0 iff the system has a normal solution (x ≥ 0, Σx = 1, all
/// inequalities ≥ 0); solve it as an n-grid game.
pub fn encode_quad(sys: &QuadSystem) -> Result<(DiceyGame, Q)> {
    sys.validate()?;
    let players = vec!["ada".to_string(), "bertrand".to_string()];
    let var = |i: usize| format!("x{i}");
    let action_list: Vec<String> = (1..=sys.n).map(var).collect();
    let actions: BTreeMap<String, Vec<String>> =
        players.iter().map(|p| (p.clone(), action_list.clone())).collect();
    let dice = vec![
        Die { id: "da".into(), access: vec!["ada".into()] },
        Die { id: "db".into(), access: vec!["bertrand".into()] },
    ];
    let mut devil_actions = Vec::new();
    let mut rules = Vec::new();
    for i in 1..=sys.n {
        for (dir, ada_alone) in [("le", -1i64), ("ge", 1)] {
            let action = format!("{dir}_{}", var(i));
            // The both-play rule must precede the single-player rules.
            rules.push(Rule {
                when: [
                    (DEVIL.to_string(), action.clone()),
                    ("ada".to_string(), var(i)),
                    ("bertrand".to_string(), var(i)),
                ]
                .into_iter()
                .collect(),
                value: 0,
            });
            rules.push(Rule {
                when: [(DEVIL.to_string(), action.clone()), ("ada".to_string(), var(i))]
                    .into_iter()
                    .collect(),
                value: ada_alone,
            });
            rules.push(Rule {
                when: [(DEVIL.to_string(), action.clone()), ("bertrand".to_string(), var(i))]
                    .into_iter()
                    .collect(),
                value: -ada_alone,
            });
            devil_actions.push(action);
        }
    }
    for (k, ineq) in sys.inequalities.iter().enumerate() {
        let action = format!("ineq{}", k + 1);
        // First-match would drop repeated (i, j) pairs, so merge them.
        let mut merged: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for &(i, j, c) in ineq {
            *merged.entry((i, j)).or_insert(0) += c;
        }
        for ((i, j), c) in merged {
            if c == 0 {
                continue;
            }
            rules.push(Rule {
                when: [
                    (DEVIL.to_string(), action.clone()),
                    ("ada".to_string(), var(i)),
                    ("bertrand".to_string(), var(j)),
                ]
                .into_iter()
                .collect(),
                value: c,
            });
        }
        devil_actions.push(action);
    }
    let game = DiceyGame {
        players,
        devil_actions,
        actions,
        payoff: PayoffRules { rules, default: 0 },
        dice,
    };
    game.validate()?;
    Ok((game, Q::zero()))
}

/// Reference search: maximizes the minimal inequality value over the simplex
/// grid with denominators `resolution`. Returns the best value scaled by
/// `resolution²` (exact integer) and the grid point achieving it, scaled by
/// `resolution`.
pub fn quad_grid_search(sys: &QuadSystem, resolution: usize) -> Result<(i64, Vec<usize>)> {
    sys.validate()?;
    let r = resolution;
    let mut best: Option<(i64, Vec<usize>)> = None;
    let mut point = vec![0usize; sys.n];
    fn rec(
        sys: &QuadSystem,
        point: &mut Vec<usize>,
        pos: usize,
        left: usize,
        best: &mut Option<(i64, Vec<usize>)>,
    ) {
        if pos + 1 == point.len() {
            point[pos] = left;
            let value = sys
                .inequalities
                .iter()
                .map(|ineq| {
                    ineq.iter()
                        .map(|&(i, j, c)| c * point[i - 1] as i64 * point[j - 1] as i64)
                        .sum::<i64>()
                })
                .min()
                .unwrap_or(0);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                *best = Some((value, point.clone()));
            }
            return;
        }
        for k in 0..=left {
            point[pos] = k;
            rec(sys, point, pos + 1, left - k, best);
        }
    }
    rec(sys, &mut point, 0, r, &mut best);
    let (value, point) = best.expect("n >= 1 guarantees at least one grid point");
    Ok((value, point))
}
