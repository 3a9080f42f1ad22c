//! Dice allocation: turning a pack of accessibility budgets into the best
//! concrete dice structure.
//!
//! A pack die with budget `acc` may be handed to any set of at most `acc`
//! players. Enlarging an access set never hurts (a player is free to ignore
//! a die), so only saturated sets of size `min(acc, |players|)` are
//! enumerated. Dice with equal budgets are interchangeable, so structures
//! are generated as multisets per budget class rather than tuples.

use std::collections::BTreeMap;

use crate::game::{DiceyGame, DicePack, Die};
use crate::optimizer::{solve, SchemeSearchResult, SearchMode, SolveOptions};
use crate::{Error, Result};

/// A concrete assignment of access sets, usable as a game's `dice` field.
pub type DiceStructure = Vec<Die>;

#[derive(Debug)]
pub struct AllocationResult {
    pub best_structure: DiceStructure,
    pub value: f64,
    pub structures_examined: usize,
    /// Canonical structure and solved value for every candidate, in
    /// enumeration order; only collected on request.
    pub per_structure_log: Option<Vec<(DiceStructure, f64)>>,
    /// Full solver output for the winning structure.
    pub solution: SchemeSearchResult,
}

/// All k-subsets of `items`, lexicographic. `items` must be sorted.
fn subsets(items: &[String], k: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn rec(items: &[String], k: usize, from: usize, pick: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if pick.len() == k {
            out.push(pick.clone());
            return;
        }
        for i in from..items.len() {
            pick.push(items[i].clone());
            rec(items, k, i + 1, pick, out);
            pick.pop();
        }
    }
    rec(items, k, 0, &mut pick, &mut out);
    out
}

/// Non-decreasing index tuples of length `len` over `0..n`: the multisets
/// of size `len` drawn from `n` options, lexicographic.
fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(len);
    fn rec(n: usize, len: usize, from: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pick.len() == len {
            out.push(pick.clone());
            return;
        }
        for i in from..n {
            pick.push(i);
            rec(n, len, i, pick, out);
            pick.pop();
        }
    }
    rec(n, len, 0, &mut pick, &mut out);
    out
}

/// Enumerates the canonical dice structures matching `pack`.
///
/// Every die receives an access set of size exactly `min(acc, |players|)`;
/// dice of equal budget are treated as interchangeable, with the multiset of
/// access sets assigned to their ids in sorted order. Structures appear in a
/// fixed lexicographic order (budget classes ascending, subset choices
/// ascending), which defines the tie-break for [`allocate_solve`].
pub fn enumerate_structures(game: &DiceyGame, pack: &DicePack) -> Result<Vec<DiceStructure>> {
    game.validate()?;
    let mut players = game.players.clone();
    players.sort();
    // Budget class → sorted die ids.
    let mut classes: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for d in &pack.dice {
        if d.acc == 0 {
            return Err(Error::Semantic(format!("pack die {:?} has zero accessibility", d.id)));
        }
        classes.entry(d.acc).or_default().push(d.id.clone());
    }
    // Per class: the list of multiset choices over that class's subsets.
    let mut per_class: Vec<(Vec<String>, Vec<Vec<String>>, Vec<Vec<usize>>)> = Vec::new();
    for (acc, mut ids) in classes {
        ids.sort();
        let size = (acc as usize).min(players.len());
        let options = subsets(&players, size);
        let choices = multisets(options.len(), ids.len());
        per_class.push((ids, options, choices));
    }
    let mut structures = Vec::new();
    let mut cursor = vec![0usize; per_class.len()];
    loop {
        let mut dice = Vec::new();
        for (ci, (ids, options, choices)) in per_class.iter().enumerate() {
            for (id, &opt) in ids.iter().zip(&choices[cursor[ci]]) {
                dice.push(Die { id: id.clone(), access: options[opt].clone() });
            }
        }
        dice.sort_by(|a, b| a.id.cmp(&b.id));
        structures.push(dice);
        // Mixed-radix increment, last class fastest.
        let mut ci = per_class.len();
        loop {
            if ci == 0 {
                return Ok(structures);
            }
            ci -= 1;
            cursor[ci] += 1;
            if cursor[ci] < per_class[ci].2.len() {
                break;
            }
            cursor[ci] = 0;
        }
    }
}

/// Solves the game under every structure matching the pack and returns the
/// best. Ties go to the earliest structure in enumeration order.
///
/// The input game must not fix a dice structure of its own.
pub fn allocate_solve(
    game: &DiceyGame,
    pack: &DicePack,
    mode: SearchMode,
    opts: &SolveOptions,
    log: bool,
) -> Result<AllocationResult> {
    if !game.dice.is_empty() {
        return Err(Error::Semantic(
            "allocation expects a game without dice; remove the dice field and supply a pack".into(),
        ));
    }
    let structures = enumerate_structures(game, pack)?;
    let mut per_log = log.then(Vec::new);
    let mut best: Option<(usize, SchemeSearchResult)> = None;
    for (i, structure) in structures.iter().enumerate() {
        let mut candidate = game.clone();
        candidate.dice = structure.clone();
        let result = solve(&candidate, mode, opts).map_err(|e| {
            let ids: Vec<&str> = structure.iter().map(|d| d.id.as_str()).collect();
            Error::Semantic(format!("structure {ids:?}: {e}"))
        })?;
        if let Some(log) = per_log.as_mut() {
            log.push((structure.clone(), result.value));
        }
        let improves = match &best {
            Some((_, incumbent)) => result.value > incumbent.value,
            None => true,
        };
        if improves {
            best = Some((i, result));
        }
    }
    let (winner, solution) =
        best.ok_or_else(|| Error::Semantic("pack admits no structure".into()))?;
    Ok(AllocationResult {
        best_structure: structures[winner].clone(),
        value: solution.value,
        structures_examined: structures.len(),
        per_structure_log: per_log,
        solution,
    })
}
