//! Clique matching pennies: `n` players, one shared die per pair, everyone
//! (Devil included) must show the same face for the team to score.
//!
//! The generator is the benchmark family for the solver; the conjectured
//! optimum pairs players off on their shared dice (plus one three-player
//! triangle when `n` is odd) and is built here in closed form.

use std::collections::BTreeMap;

use num_traits::One;

use crate::game::{DicePack, DiceyGame, Die, PackDie, PayoffRules, Rule, DEVIL};
use crate::rational::{q_from_f64, q_from_str, Q};
use crate::strategy::{cells, GridStrategy, PlayerTable};
use crate::{Error, Result};

/// Builds the `n`-player clique game and its all-acc-2 dice pack.
pub fn gen_clique_mp(n: usize) -> Result<(DiceyGame, DicePack)> {
    if n < 2 {
        return Err(Error::Semantic("clique matching pennies needs ≥ 2 players".into()));
    }
    let players: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    let mut dice = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            dice.push(Die {
                id: format!("d{i}_{j}"),
                access: vec![format!("p{i}"), format!("p{j}")],
            });
        }
    }
    let all = |action: &str| -> Rule {
        let mut when: BTreeMap<String, String> =
            players.iter().map(|p| (p.clone(), action.to_string())).collect();
        when.insert(DEVIL.to_string(), action.to_string());
        Rule { when, value: 1 }
    };
    let game = DiceyGame {
        players: players.clone(),
        devil_actions: vec!["H".into(), "T".into()],
        actions: players
            .iter()
            .map(|p| (p.clone(), vec!["H".to_string(), "T".to_string()]))
            .collect(),
        payoff: PayoffRules { rules: vec![all("H"), all("T")], default: 0 },
        dice: dice.clone(),
    };
    game.validate()?;
    let pack = DicePack {
        dice: dice.iter().map(|d| PackDie { id: d.id.clone(), acc: 2 }).collect(),
    };
    Ok((game, pack))
}

/// Detects the clique access pattern: every pair of players shares exactly
/// one die and no other dice exist. Returns the player count.
pub fn is_clique_shaped(game: &DiceyGame) -> Option<usize> {
    let n = game.players.len();
    if game.dice.len() != n * (n - 1) / 2 {
        return None;
    }
    let mut seen = std::collections::BTreeSet::new();
    for die in &game.dice {
        if die.access.len() != 2 {
            return None;
        }
        let mut pair: Vec<&str> = die.access.iter().map(String::as_str).collect();
        pair.sort_unstable();
        if !seen.insert((pair[0].to_string(), pair[1].to_string())) {
            return None;
        }
    }
    Some(n)
}

/// Partner of 0-based player `i` in the pairing scheme: triangle players
/// (the first three when `n` is odd) have no partner.
fn partner(n: usize, i: usize) -> Option<usize> {
    if n % 2 == 0 {
        Some(i ^ 1)
    } else if i < 3 {
        None
    } else if (i - 3) % 2 == 0 {
        Some(i + 1)
    } else {
        Some(i - 1)
    }
}

fn die_for_pair(game: &DiceyGame, a: &str, b: &str) -> Option<String> {
    game.dice
        .iter()
        .find(|d| {
            d.access.len() == 2
                && ((d.access[0] == a && d.access[1] == b)
                    || (d.access[0] == b && d.access[1] == a))
        })
        .map(|d| d.id.clone())
}

/// Cut lengths used by the conjectured optimum: (1/2, 1/2) on pairing dice,
/// (α, 1−α) on the triangle's three dice, a single full piece elsewhere.
/// Also useful as a warm start for the optimizer. `None` when the game is
/// not clique shaped.
pub fn conjecture_cuts(game: &DiceyGame) -> Option<BTreeMap<String, Vec<Q>>> {
    let n = is_clique_shaped(game)?;
    if n < 2 {
        return None;
    }
    let mut cuts: BTreeMap<String, Vec<Q>> =
        game.dice.iter().map(|d| (d.id.clone(), vec![Q::one()])).collect();
    let half = q_from_str("1/2").unwrap();
    let alpha = q_from_f64(crate::alpha()).unwrap();
    let co = Q::one() - &alpha;
    if n % 2 == 1 {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let id = die_for_pair(game, &game.players[a], &game.players[b])?;
            cuts.insert(id, vec![alpha.clone(), co.clone()]);
        }
    }
    for i in 0..n {
        if let Some(j) = partner(n, i) {
            if j > i {
                let id = die_for_pair(game, &game.players[i], &game.players[j])?;
                cuts.insert(id, vec![half.clone(), half.clone()]);
            }
        }
    }
    Some(cuts)
}

/// The conjectured-optimal grid strategy for a clique game: paired players
/// copy their shared die's coin flip; for odd `n` the first three players
/// run the triangle profile (first action iff both their dice land in the
/// long piece). 2-grid by construction.
pub fn build_conjecture_strategy(game: &DiceyGame) -> Result<GridStrategy> {
    let n = is_clique_shaped(game)
        .ok_or_else(|| Error::Semantic("not a clique matching pennies game".into()))?;
    let cuts =
        conjecture_cuts(game).ok_or_else(|| Error::Semantic("missing pair die".into()))?;
    let mut tables = BTreeMap::new();
    for (i, p) in game.players.iter().enumerate() {
        let dice: Vec<String> = game.accessible_dice(p).into_iter().map(String::from).collect();
        // Dice this player keys its action on.
        let special: Vec<usize> = match partner(n, i) {
            Some(j) => {
                let id = die_for_pair(game, p, &game.players[j]).unwrap();
                vec![dice.iter().position(|d| *d == id).unwrap()]
            }
            None => {
                let mut v = Vec::new();
                for other in 0..3 {
                    if other != i {
                        let id = die_for_pair(game, p, &game.players[other]).unwrap();
                        v.push(dice.iter().position(|d| *d == id).unwrap());
                    }
                }
                v
            }
        };
        let dims: Vec<usize> = dice.iter().map(|d| cuts[d].len()).collect();
        let actions = &game.actions[p];
        let mut entries = BTreeMap::new();
        for cell in cells(&dims) {
            let key: Vec<usize> = cell.iter().map(|c| c + 1).collect();
            let first = if partner(n, i).is_some() {
                key[special[0]] == 1
            } else {
                key[special[0]] == 2 && key[special[1]] == 2
            };
            let action = if first { actions[0].clone() } else { actions[1].clone() };
            entries.insert(key, action);
        }
        tables.insert(p.clone(), PlayerTable { dice, entries });
    }
    Ok(GridStrategy { cuts, tables })
}

/// Value achieved by the conjectured strategy: `(1/2)^(n/2)` for even `n`,
/// `β · (1/2)^((n−3)/2)` for odd `n`.
pub fn conjecture_value(n: usize) -> f64 {
    if n % 2 == 0 {
        0.5f64.powi((n / 2) as i32)
    } else {
        crate::beta() * 0.5f64.powi(((n - 3) / 2) as i32)
    }
}
