//! Game data model: players, actions, rule-list payoffs, dice, packs.
//!
//! A dicey game is a zero-sum matrix game between a team and the Devil,
//! plus a set of dice with per-die access sets. The payoff function is an
//! ordered if-then-else rule list: the first rule whose partial assignment
//! matches the full action tuple wins, otherwise the default applies. Rule
//! conditions may reference the Devil through the reserved id [`DEVIL`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reserved identifier for the Devil in payoff rule conditions.
/// No team player may use this id.
pub const DEVIL: &str = "devil";

/// One payoff rule: fires when every listed player plays the listed action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    /// Partial assignment over team players and optionally [`DEVIL`].
    pub when: BTreeMap<String, String>,
    pub value: i64,
}

/// Ordered rule list with first-match semantics and a default payoff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffRules {
    pub rules: Vec<Rule>,
    pub default: i64,
}

/// A die and the team players who can see it. The Devil never has access.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Die {
    pub id: String,
    pub access: Vec<String>,
}

/// A game plus its dice structure; the single-document form used on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiceyGame {
    /// Team players, in declaration order.
    pub players: Vec<String>,
    pub devil_actions: Vec<String>,
    /// Per-team-player action lists, in declaration order.
    pub actions: BTreeMap<String, Vec<String>>,
    pub payoff: PayoffRules,
    /// Dice structure; may be empty (players then act deterministically).
    #[serde(default)]
    pub dice: Vec<Die>,
}

/// A die with an accessibility budget but no assigned access set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackDie {
    pub id: String,
    pub acc: u32,
}

/// A dice pack: budgets to be turned into a structure by the allocator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DicePack {
    pub dice: Vec<PackDie>,
}

impl DiceyGame {
    /// Parses and validates a game document.
    pub fn from_json(text: &str) -> Result<Self> {
        let game: DiceyGame = serde_json::from_str(text)
            .map_err(|e| Error::Syntax(format!("game document: {e}")))?;
        game.validate()?;
        Ok(game)
    }

    /// Canonical form: sorted object keys, arrays in declaration order,
    /// two-space indentation, trailing newline. Parsing the output yields a
    /// structurally equal game, and re-serializing is byte-identical.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }

    /// Checks all model invariants, collecting every violation.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.players.is_empty() {
            errs.push("no team players declared".into());
        }
        let mut seen = BTreeSet::new();
        for p in &self.players {
            if p == DEVIL {
                errs.push(format!("player id {DEVIL:?} is reserved for the Devil"));
            }
            if !seen.insert(p.clone()) {
                errs.push(format!("duplicate player id {p:?}"));
            }
        }
        if self.devil_actions.is_empty() {
            errs.push("devil_actions must be nonempty".into());
        }
        if has_dupes(&self.devil_actions) {
            errs.push("duplicate devil action".into());
        }
        for p in &self.players {
            match self.actions.get(p) {
                None => errs.push(format!("player {p:?} has no action list")),
                Some(a) if a.is_empty() => errs.push(format!("player {p:?} has no actions")),
                Some(a) if has_dupes(a) => errs.push(format!("duplicate action for {p:?}")),
                Some(_) => {}
            }
        }
        for key in self.actions.keys() {
            if !self.players.contains(key) {
                errs.push(format!("action list for undeclared player {key:?}"));
            }
        }
        for (i, rule) in self.payoff.rules.iter().enumerate() {
            for (pid, act) in &rule.when {
                let declared: Option<&Vec<String>> = if pid == DEVIL {
                    Some(&self.devil_actions)
                } else {
                    self.actions.get(pid).filter(|_| self.players.contains(pid))
                };
                match declared {
                    None => errs.push(format!("rule {i}: unknown player {pid:?}")),
                    Some(acts) if !acts.contains(act) => {
                        errs.push(format!("rule {i}: {pid:?} has no action {act:?}"));
                    }
                    Some(_) => {}
                }
            }
        }
        errs.extend(validate_structure(self, &self.dice, None));
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Semantic(errs.join("; ")))
        }
    }

    /// Payoff of a full action tuple (every team player plus [`DEVIL`]):
    /// first matching rule, else the default.
    pub fn payoff(&self, tuple: &BTreeMap<String, String>) -> Result<i64> {
        for p in self.players.iter() {
            let act = tuple
                .get(p)
                .ok_or_else(|| Error::Semantic(format!("tuple misses player {p:?}")))?;
            if !self.actions[p].contains(act) {
                return Err(Error::Semantic(format!("{p:?} has no action {act:?}")));
            }
        }
        let devil_act = tuple
            .get(DEVIL)
            .ok_or_else(|| Error::Semantic("tuple misses the Devil".into()))?;
        if !self.devil_actions.contains(devil_act) {
            return Err(Error::Semantic(format!("unknown Devil action {devil_act:?}")));
        }
        for rule in &self.payoff.rules {
            if rule.when.iter().all(|(pid, act)| tuple.get(pid) == Some(act)) {
                return Ok(rule.value);
            }
        }
        Ok(self.payoff.default)
    }

    /// Die ids accessible to `player`, sorted lexicographically; this is the
    /// cell index order used by strategy tables.
    pub fn accessible_dice(&self, player: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .dice
            .iter()
            .filter(|d| d.access.iter().any(|p| p == player))
            .map(|d| d.id.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    /// Replaces the dice structure (used by the allocator).
    pub fn with_dice(&self, dice: Vec<Die>) -> DiceyGame {
        DiceyGame { dice, ..self.clone() }
    }
}

impl DicePack {
    pub fn from_json(text: &str) -> Result<Self> {
        let pack: DicePack = serde_json::from_str(text)
            .map_err(|e| Error::Syntax(format!("pack document: {e}")))?;
        let mut ids = BTreeSet::new();
        for d in &pack.dice {
            if !ids.insert(d.id.clone()) {
                return Err(Error::Semantic(format!("duplicate pack die {:?}", d.id)));
            }
        }
        Ok(pack)
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }
}

/// Structure validation report: duplicate dice, undeclared or duplicated
/// players in access sets, Devil access, and (when a pack is given) the
/// matching condition `|Acc(D)| ≤ acc(D)` per die.
pub fn validate_structure(game: &DiceyGame, dice: &[Die], pack: Option<&DicePack>) -> Vec<String> {
    let mut report = Vec::new();
    let mut ids = BTreeSet::new();
    for die in dice {
        if !ids.insert(die.id.clone()) {
            report.push(format!("duplicate die id {:?}", die.id));
        }
        let mut seen = BTreeSet::new();
        for p in &die.access {
            if p == DEVIL {
                report.push(format!("die {:?}: the Devil cannot have die access", die.id));
            } else if !game.players.contains(p) {
                report.push(format!("die {:?}: undeclared player {p:?} in access set", die.id));
            }
            if !seen.insert(p.clone()) {
                report.push(format!("die {:?}: player {p:?} listed twice", die.id));
            }
        }
    }
    if let Some(pack) = pack {
        let budgets: BTreeMap<&str, u32> =
            pack.dice.iter().map(|d| (d.id.as_str(), d.acc)).collect();
        for die in dice {
            match budgets.get(die.id.as_str()) {
                None => report.push(format!("die {:?} not in pack", die.id)),
                Some(&acc) if die.access.len() as u32 > acc => report.push(format!(
                    "die {:?}: access set size {} exceeds acc {}",
                    die.id,
                    die.access.len(),
                    acc
                )),
                Some(_) => {}
            }
        }
    }
    report
}

/// Canonical JSON for any serializable value: serde_json's default map is
/// ordered, so converting through `Value` sorts every object's keys.
pub(crate) fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn has_dupes(items: &[String]) -> bool {
    let set: BTreeSet<&String> = items.iter().collect();
    set.len() != items.len()
}

/// Index-based view of a game: players, actions, and dice mapped to dense
/// indices, with the rule list compiled for fast repeated payoff lookups.
/// Dice are ordered lexicographically by id; this order defines cell tuples
/// everywhere (tables, schemes, slice profiles).
#[derive(Debug, Clone)]
pub struct GameIndex {
    pub players: Vec<String>,
    pub actions: Vec<Vec<String>>,
    pub devil_actions: Vec<String>,
    /// Sorted die ids.
    pub dice: Vec<String>,
    /// Per player: indices into `dice`, ascending.
    pub access: Vec<Vec<usize>>,
    rules: Vec<CompiledRule>,
    default: i64,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    /// One entry per team player; `Some(a)` requires action index `a`.
    team: Vec<Option<usize>>,
    devil: Option<usize>,
    value: i64,
}

impl GameIndex {
    pub fn new(game: &DiceyGame) -> Self {
        let players = game.players.clone();
        let actions: Vec<Vec<String>> = players.iter().map(|p| game.actions[p].clone()).collect();
        let mut dice: Vec<String> = game.dice.iter().map(|d| d.id.clone()).collect();
        dice.sort_unstable();
        let access: Vec<Vec<usize>> = players
            .iter()
            .map(|p| {
                dice.iter()
                    .enumerate()
                    .filter(|(_, id)| {
                        game.dice
                            .iter()
                            .any(|d| &d.id == *id && d.access.iter().any(|q| q == p))
                    })
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let rules = game
            .payoff
            .rules
            .iter()
            .map(|rule| CompiledRule {
                team: players
                    .iter()
                    .enumerate()
                    .map(|(pi, p)| {
                        rule.when
                            .get(p)
                            .map(|a| actions[pi].iter().position(|x| x == a).expect("validated"))
                    })
                    .collect(),
                devil: rule
                    .when
                    .get(DEVIL)
                    .map(|a| game.devil_actions.iter().position(|x| x == a).expect("validated")),
                value: rule.value,
            })
            .collect();
        GameIndex {
            players,
            actions,
            devil_actions: game.devil_actions.clone(),
            dice,
            access,
            rules,
            default: game.payoff.default,
        }
    }

    /// Payoff for indexed team actions (one per player) and Devil action.
    pub fn payoff(&self, team: &[usize], devil: usize) -> i64 {
        'rules: for rule in &self.rules {
            if rule.devil.is_some_and(|d| d != devil) {
                continue;
            }
            for (req, &got) in rule.team.iter().zip(team) {
                if req.is_some_and(|r| r != got) {
                    continue 'rules;
                }
            }
            return rule.value;
        }
        self.default
    }

    pub fn die_index(&self, id: &str) -> Option<usize> {
        self.dice.binary_search_by(|d| d.as_str().cmp(id)).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn matching_pennies(n: usize) -> DiceyGame {
        crate::pennies::gen_clique_mp(n).unwrap().0
    }

    #[test]
    fn parse_three_player_matching_pennies() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/data/triangular.json"
        ))
        .unwrap();
        let g = DiceyGame::from_json(&text).unwrap();
        assert_eq!(g.players.len(), 3);
        assert_eq!(g.devil_actions.len(), 2);
        assert_eq!(g.dice.len(), 3);
        assert_eq!(g.accessible_dice("ada"), vec!["d1", "d3"]);
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/data/triangular.json"
        ))
        .unwrap();
        let g = DiceyGame::from_json(&text).unwrap();
        let c = g.to_canonical_json();
        let g2 = DiceyGame::from_json(&c).unwrap();
        assert_eq!(g, g2);
        assert_eq!(c, g2.to_canonical_json());
    }

    #[test]
    fn payoff_first_match() {
        let g = matching_pennies(3);
        let tuple = |a: &str, b: &str, c: &str, d: &str| {
            [("p1", a), ("p2", b), ("p3", c), (DEVIL, d)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect::<BTreeMap<_, _>>()
        };
        assert_eq!(g.payoff(&tuple("H", "H", "H", "H")).unwrap(), 1);
        assert_eq!(g.payoff(&tuple("H", "H", "T", "H")).unwrap(), 0);
        assert_eq!(g.payoff(&tuple("T", "T", "T", "T")).unwrap(), 1);
        assert_eq!(g.payoff(&tuple("T", "T", "T", "H")).unwrap(), 0);
    }

    #[test]
    fn payoff_rejects_bad_tuples() {
        let g = matching_pennies(2);
        let mut t = BTreeMap::new();
        t.insert("p1".to_string(), "H".to_string());
        t.insert("p2".to_string(), "H".to_string());
        assert!(g.payoff(&t).is_err()); // Devil missing
        t.insert(DEVIL.to_string(), "X".to_string());
        assert!(g.payoff(&t).is_err()); // undeclared action
    }

    #[test]
    fn devil_in_access_set_is_semantic_error() {
        let mut g = matching_pennies(2);
        g.dice[0].access.push(DEVIL.to_string());
        let err = g.validate().unwrap_err();
        assert!(err.to_string().contains("Devil"));
    }

    #[test]
    fn empty_dice_list_is_valid() {
        let mut g = matching_pennies(2);
        g.dice.clear();
        g.validate().unwrap();
        assert!(g.accessible_dice("p1").is_empty());
    }

    #[test]
    fn duplicate_access_sets_are_allowed() {
        let mut g = matching_pennies(2);
        let mut extra = g.dice[0].clone();
        extra.id = "d_extra".into();
        g.dice.push(extra);
        g.validate().unwrap();
    }

    #[test]
    fn structure_pack_matching() {
        let g = matching_pennies(3);
        let pack2 = DicePack {
            dice: g.dice.iter().map(|d| PackDie { id: d.id.clone(), acc: 2 }).collect(),
        };
        assert!(validate_structure(&g, &g.dice, Some(&pack2)).is_empty());
        let pack1 = DicePack {
            dice: g.dice.iter().map(|d| PackDie { id: d.id.clone(), acc: 1 }).collect(),
        };
        assert_eq!(validate_structure(&g, &g.dice, Some(&pack1)).len(), 3);
    }

    #[test]
    fn game_index_payoff_agrees_with_rule_list() {
        let g = matching_pennies(3);
        let ix = GameIndex::new(&g);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let names = ["H", "T"];
                        let tuple: BTreeMap<String, String> = [
                            ("p1".to_string(), names[a].to_string()),
                            ("p2".to_string(), names[b].to_string()),
                            ("p3".to_string(), names[c].to_string()),
                            (DEVIL.to_string(), names[d].to_string()),
                        ]
                        .into_iter()
                        .collect();
                        assert_eq!(ix.payoff(&[a, b, c], d), g.payoff(&tuple).unwrap());
                    }
                }
            }
        }
    }
}
