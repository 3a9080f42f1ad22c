//! Grid strategies: per-die piece-length vectors plus per-player action
//! tables over cells of accessible dice.
//!
//! A grid strategy cuts each die's `[0,1]` into pieces; a player's behavior
//! depends only on which piece each accessible die fell into. Cell tuples are
//! indexed 1-based, over the player's accessible dice sorted by die id. A
//! strategy is *k-grid* when no die has more than `k` pieces.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::game::DiceyGame;
use crate::rational::{q_from_f64, QField, Q};
use crate::{Error, Result};

/// A player's action table: one action per cell tuple over `dice`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerTable {
    /// Die ids indexing cell tuples, ascending; must equal the player's
    /// accessible dice for the table to be measurable.
    pub dice: Vec<String>,
    /// Cell tuple (1-based piece indices, one per die in `dice`) → action.
    pub entries: BTreeMap<Vec<usize>, String>,
}

/// Cuts + tables; the document form is
/// `{"cuts": {die: [lengths]}, "tables": {player: {"i,j,..": action}}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridStrategy {
    /// Piece lengths per die; each vector must be nonnegative with sum 1.
    pub cuts: BTreeMap<String, Vec<Q>>,
    pub tables: BTreeMap<String, PlayerTable>,
}

#[derive(Serialize, Deserialize)]
struct StrategyDoc {
    cuts: BTreeMap<String, Vec<QField>>,
    tables: BTreeMap<String, BTreeMap<String, String>>,
}

fn parse_cell_key(key: &str) -> Result<Vec<usize>> {
    if key.is_empty() {
        return Ok(Vec::new());
    }
    key.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Syntax(format!("bad cell key {key:?}")))
        })
        .collect()
}

fn cell_key(cell: &[usize]) -> String {
    cell.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl GridStrategy {
    /// Parses a strategy document. The game fixes each table's die order
    /// (the player's accessible dice); key arity mismatches are kept and
    /// reported by [`validate_strategy`], not here.
    pub fn from_json(game: &DiceyGame, text: &str) -> Result<Self> {
        let doc: StrategyDoc = serde_json::from_str(text)
            .map_err(|e| Error::Syntax(format!("strategy document: {e}")))?;
        let cuts = doc
            .cuts
            .into_iter()
            .map(|(die, v)| (die, v.into_iter().map(|q| q.0).collect()))
            .collect();
        let mut tables = BTreeMap::new();
        for (player, raw) in doc.tables {
            let dice: Vec<String> =
                game.accessible_dice(&player).into_iter().map(String::from).collect();
            let mut entries = BTreeMap::new();
            for (key, action) in raw {
                entries.insert(parse_cell_key(&key)?, action);
            }
            tables.insert(player, PlayerTable { dice, entries });
        }
        Ok(GridStrategy { cuts, tables })
    }

    /// Canonical document: sorted keys, rational lengths as `"p/q"` strings.
    pub fn to_canonical_json(&self) -> String {
        let doc = StrategyDoc {
            cuts: self
                .cuts
                .iter()
                .map(|(die, v)| (die.clone(), v.iter().cloned().map(QField).collect()))
                .collect(),
            tables: self
                .tables
                .iter()
                .map(|(p, t)| {
                    let rows = t
                        .entries
                        .iter()
                        .map(|(cell, action)| (cell_key(cell), action.clone()))
                        .collect();
                    (p.clone(), rows)
                })
                .collect(),
        };
        crate::game::canonical_json(&doc)
    }

    /// Piece count of a die (0 when the die has no cut vector).
    pub fn pieces(&self, die: &str) -> usize {
        self.cuts.get(die).map_or(0, Vec::len)
    }

    /// `true` iff every die has at most `k` pieces.
    pub fn is_k_grid(&self, k: usize) -> bool {
        self.cuts.values().all(|v| v.len() <= k)
    }

    /// Behavior at a cell, by 1-based piece indices over `table.dice`.
    pub fn action_at(&self, player: &str, cell: &[usize]) -> Option<&str> {
        self.tables.get(player)?.entries.get(cell).map(String::as_str)
    }
}

/// Checks every invariant; returns one entry per violation (empty = valid).
pub fn validate_strategy(game: &DiceyGame, s: &GridStrategy) -> Vec<String> {
    let mut report = Vec::new();
    for die in &game.dice {
        match s.cuts.get(&die.id) {
            None => report.push(format!("die {:?}: no cut vector", die.id)),
            Some(v) => {
                if v.is_empty() {
                    report.push(format!("die {:?}: empty cut vector", die.id));
                }
                if v.iter().any(Signed::is_negative) {
                    report.push(format!("die {:?}: negative piece length", die.id));
                }
                let total: Q = v.iter().sum();
                if !total.is_one() {
                    report.push(format!(
                        "die {:?}: piece lengths sum to {}, not 1",
                        die.id,
                        crate::rational::q_to_string(&total)
                    ));
                }
            }
        }
    }
    for die in s.cuts.keys() {
        if !game.dice.iter().any(|d| &d.id == die) {
            report.push(format!("cuts for undeclared die {die:?}"));
        }
    }
    for player in &game.players {
        let Some(table) = s.tables.get(player) else {
            report.push(format!("player {player:?}: no table"));
            continue;
        };
        let accessible: Vec<String> =
            game.accessible_dice(player).into_iter().map(String::from).collect();
        if table.dice != accessible {
            report.push(format!(
                "player {player:?}: table indexed by {:?}, accessible dice are {:?}",
                table.dice, accessible
            ));
            continue;
        }
        let dims: Vec<usize> = accessible.iter().map(|d| s.pieces(d)).collect();
        let expected: usize = dims.iter().product();
        let mut covered = 0usize;
        for (cell, action) in &table.entries {
            if cell.len() != dims.len()
                || cell.iter().zip(&dims).any(|(&c, &m)| c < 1 || c > m)
            {
                report.push(format!(
                    "player {player:?}: cell {:?} out of range for piece counts {:?}",
                    cell, dims
                ));
                continue;
            }
            covered += 1;
            if !game.actions[player].contains(action) {
                report.push(format!(
                    "player {player:?}: cell {:?} uses undeclared action {action:?}",
                    cell
                ));
            }
        }
        if covered < expected {
            report.push(format!(
                "player {player:?}: table covers {covered} of {expected} cells"
            ));
        }
    }
    for player in s.tables.keys() {
        if !game.players.contains(player) {
            report.push(format!("table for undeclared player {player:?}"));
        }
    }
    report
}

/// [`validate_strategy`] as a `Result`, for call sites that need a hard stop.
pub fn validate_strategy_ok(game: &DiceyGame, s: &GridStrategy) -> Result<()> {
    let report = validate_strategy(game, s);
    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(report))
    }
}

/// Piece index (1-based) of a roll under a cut vector.
///
/// Pieces partition `[0,1]` into cumulative intervals, left-open and
/// right-closed except the first, which is closed at 0. Zero-length pieces
/// carry no mass and never win; a roll of exactly 0 lands in the first piece
/// of positive mass.
pub fn piece_of(cuts: &[Q], roll: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&roll) {
        return Err(Error::Semantic(format!("roll {roll} outside [0,1]")));
    }
    let r = q_from_f64(roll)?;
    if r.is_zero() {
        let j = cuts.iter().position(|l| !l.is_zero()).unwrap_or(0);
        return Ok(j + 1);
    }
    let mut cum = Q::zero();
    for (j, len) in cuts.iter().enumerate() {
        cum += len;
        if !len.is_zero() && r <= cum {
            return Ok(j + 1);
        }
    }
    // Mass sums to 1 for valid strategies; tolerate float slop upward.
    Ok(cuts.len())
}

/// Resolves one roll per die into each player's action.
pub fn play_roll(
    game: &DiceyGame,
    s: &GridStrategy,
    rolls: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, String>> {
    validate_strategy_ok(game, s)?;
    let mut pieces = BTreeMap::new();
    for die in &game.dice {
        let roll = rolls
            .get(&die.id)
            .ok_or_else(|| Error::Semantic(format!("no roll for die {:?}", die.id)))?;
        pieces.insert(die.id.clone(), piece_of(&s.cuts[&die.id], *roll)?);
    }
    let mut out = BTreeMap::new();
    for player in &game.players {
        let table = &s.tables[player];
        let cell: Vec<usize> = table.dice.iter().map(|d| pieces[d]).collect();
        let action = table.entries.get(&cell).ok_or_else(|| {
            Error::Semantic(format!("player {player:?}: no entry for cell {cell:?}"))
        })?;
        out.insert(player.clone(), action.clone());
    }
    Ok(out)
}

/// Iterator over all index tuples `0..dims[i]` in lexicographic order.
pub(crate) fn cells(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    let n = dims.len();
    (0..total).map(move |mut ix| {
        let mut cell = vec![0usize; n];
        for i in (0..n).rev() {
            cell[i] = ix % dims[i];
            ix /= dims[i];
        }
        cell
    })
}

/// Splits pieces at the given absolute positions (per die, in `[0,1]`) and
/// replicates table entries, leaving behavior unchanged. Positions that
/// coincide with existing boundaries are no-ops; an empty map is the
/// identity. Evaluation of the output equals the input exactly.
pub fn refine_common_grid(
    game: &DiceyGame,
    s: &GridStrategy,
    extra: &BTreeMap<String, Vec<Q>>,
) -> Result<GridStrategy> {
    validate_strategy_ok(game, s)?;
    for (die, positions) in extra {
        if !s.cuts.contains_key(die) {
            return Err(Error::Semantic(format!("extra cuts for unknown die {die:?}")));
        }
        if positions.iter().any(|x| x.is_negative() || *x > Q::one()) {
            return Err(Error::Semantic(format!("extra cut outside [0,1] for die {die:?}")));
        }
    }
    // Per die: new cut vector plus a map new piece -> old piece (1-based).
    let mut new_cuts: BTreeMap<String, Vec<Q>> = BTreeMap::new();
    let mut back: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (die, lens) in &s.cuts {
        let mut positions: Vec<Q> = extra.get(die).cloned().unwrap_or_default();
        positions.sort();
        positions.dedup();
        let mut lens_out = Vec::new();
        let mut back_out = Vec::new();
        let mut lo = Q::zero();
        for (j, len) in lens.iter().enumerate() {
            let hi = &lo + len;
            let mut inner: Vec<&Q> =
                positions.iter().filter(|x| **x > lo && **x < hi).collect();
            inner.sort();
            let mut prev = lo.clone();
            for x in inner {
                lens_out.push(x - &prev);
                back_out.push(j + 1);
                prev = x.clone();
            }
            lens_out.push(&hi - &prev);
            back_out.push(j + 1);
            lo = hi;
        }
        new_cuts.insert(die.clone(), lens_out);
        back.insert(die.clone(), back_out);
    }
    let mut tables = BTreeMap::new();
    for (player, table) in &s.tables {
        let dims: Vec<usize> = table.dice.iter().map(|d| new_cuts[d].len()).collect();
        let mut entries = BTreeMap::new();
        for cell in cells(&dims) {
            let old_cell: Vec<usize> = cell
                .iter()
                .zip(&table.dice)
                .map(|(&c, die)| back[die][c])
                .collect();
            let action = table.entries.get(&old_cell).ok_or_else(|| {
                Error::Semantic(format!("player {player:?}: no entry for cell {old_cell:?}"))
            })?;
            entries.insert(cell.iter().map(|c| c + 1).collect(), action.clone());
        }
        tables.insert(player.clone(), PlayerTable { dice: table.dice.clone(), entries });
    }
    Ok(GridStrategy { cuts: new_cuts, tables })
}
