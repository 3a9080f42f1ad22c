//! Grid normalization: any valid grid strategy is rewritten, die by die, to
//! one with at most `|Devil actions|` pieces per die and no value loss.
//!
//! The construction slices a strategy along one die: each piece of the die
//! yields a vector of conditional expectations (one entry per Devil action),
//! and the strategy's expectation vector is the piece-length-weighted sum of
//! slice vectors. Carathéodory reduction picks at most `k` slices whose
//! convex combination dominates that sum componentwise; replaying the chosen
//! slices with the new weights as cuts gives a `k`-piecewise strategy on the
//! die that is at least as good against every Devil action. All arithmetic
//! is exact rational.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::eval::compile;
use crate::game::{DiceyGame, GameIndex};
use crate::rational::{q_to_string, Q};
use crate::simplex::{solve_lp, LpOutcome};
use crate::strategy::{cells, GridStrategy, PlayerTable};
use crate::{Error, Result};

/// One piece of the sliced die: its conditional expectation vector (indexed
/// like the game's Devil actions) and its cut length.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePoint {
    /// 1-based piece index on the sliced die.
    pub piece: usize,
    pub v: Vec<Q>,
    pub weight: Q,
}

/// All slices of a strategy along one die.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceProfile {
    pub die: String,
    pub devil_actions: Vec<String>,
    pub points: Vec<SlicePoint>,
    /// `Σ_j weight_j · v_j`, the strategy's expectation vector.
    pub integral: Vec<Q>,
}

impl SliceProfile {
    /// Diagnostic document (rationals as strings).
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "die": self.die,
            "devil_actions": self.devil_actions,
            "points": self.points.iter().map(|p| json!({
                "piece": p.piece,
                "v": p.v.iter().map(q_to_string).collect::<Vec<_>>(),
                "weight": q_to_string(&p.weight),
            })).collect::<Vec<_>>(),
            "integral": self.integral.iter().map(q_to_string).collect::<Vec<_>>(),
        })
    }
}

/// At most `k` slices and convex weights whose combination dominates the
/// profile integral componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSelection {
    /// (1-based piece index, new cut length) in output order.
    pub chosen: Vec<(usize, Q)>,
    pub dominated_target: Vec<Q>,
}

/// Conditional expectation vectors per piece of `die`, with piece lengths as
/// weights. Zero-length pieces still get a well-defined vector (it only
/// involves the other dice's masses).
pub fn slice_profile(game: &DiceyGame, s: &GridStrategy, die: &str) -> Result<SliceProfile> {
    let ix = GameIndex::new(game);
    let cs = compile(game, &ix, s)?;
    let di = ix
        .die_index(die)
        .ok_or_else(|| Error::Semantic(format!("unknown die '{die}'")))?;
    let nb = ix.devil_actions.len();
    let mut points = Vec::with_capacity(cs.dims[di]);
    for piece in 0..cs.dims[di] {
        let mut v = vec![Q::zero(); nb];
        let mut other_dims = cs.dims.clone();
        other_dims[di] = 1;
        for mut joint in cells(&other_dims) {
            joint[di] = piece;
            let mut mass = Q::one();
            let mut zero = false;
            for (d, &j) in joint.iter().enumerate() {
                if d == di {
                    continue;
                }
                let l = &cs.lens[d][j];
                if l.is_zero() {
                    zero = true;
                    break;
                }
                mass *= l;
            }
            if zero {
                continue;
            }
            let team = cs.team_actions(&ix, &joint);
            for (b, slot) in v.iter_mut().enumerate() {
                let pay = ix.payoff(&team, b);
                if pay != 0 {
                    *slot += &mass * Q::from_integer(pay.into());
                }
            }
        }
        points.push(SlicePoint { piece: piece + 1, v, weight: cs.lens[di][piece].clone() });
    }
    let mut integral = vec![Q::zero(); nb];
    for p in &points {
        for (b, slot) in integral.iter_mut().enumerate() {
            *slot += &p.weight * &p.v[b];
        }
    }
    Ok(SliceProfile {
        die: die.to_string(),
        devil_actions: ix.devil_actions.clone(),
        points,
        integral,
    })
}

/// A nonzero kernel vector of the column system `M c = 0`, or `None` when
/// the columns are linearly independent. Exact Gaussian elimination; the
/// first free column is set to 1, so the result is deterministic.
fn kernel_vector(mut m: Vec<Vec<Q>>) -> Option<Vec<Q>> {
    let rows = m.len();
    let cols = if rows == 0 { return None } else { m[0].len() };
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][col].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push((r, col));
        r += 1;
        if r == rows {
            break;
        }
    }
    let free = (0..cols).find(|c| !pivots.iter().any(|&(_, pc)| pc == *c))?;
    let mut c = vec![Q::zero(); cols];
    c[free] = Q::one();
    for &(pr, pc) in pivots.iter().rev() {
        // Row is reduced: entry 1 at pc, zeros at other pivot columns.
        c[pc] = -&m[pr][free];
    }
    Some(c)
}

/// Is there a convex combination of `points` that dominates `target`
/// componentwise? Returns the weights if so. Exact.
fn dominating_combination(points: &[&SlicePoint], target: &[Q]) -> Option<Vec<Q>> {
    let n = points.len();
    let nb = target.len();
    // Variables: w_1..w_n, slack per component. Rows: Σw = 1; Σ w_j v_j − s = t.
    let vars = n + nb;
    let mut a = Vec::with_capacity(1 + nb);
    let mut row = vec![Q::zero(); vars];
    row[..n].fill(Q::one());
    a.push(row);
    let mut b = vec![Q::one()];
    for comp in 0..nb {
        let mut row = vec![Q::zero(); vars];
        for (j, p) in points.iter().enumerate() {
            row[j] = p.v[comp].clone();
        }
        row[n + comp] = -Q::one();
        a.push(row);
        b.push(target[comp].clone());
    }
    match solve_lp(&a, &b, &vec![Q::zero(); vars]) {
        LpOutcome::Optimal { x, .. } => Some(x[..n].to_vec()),
        _ => None,
    }
}

/// Reduces the profile to at most `k` slices whose convex combination
/// dominates the integral. Pipeline: drop zero-weight slices, merge slices
/// with identical vectors, Carathéodory-eliminate affine dependencies down
/// to `k+1` points, then search the `k+1` drop-one subsets for one whose
/// hull meets the dominance orthant.
pub fn caratheodory_select(profile: &SliceProfile, k: usize) -> Result<SliceSelection> {
    if k == 0 {
        return Err(Error::Semantic("selection size k must be ≥ 1".into()));
    }
    // Merge duplicates so "all slices alike" collapses to one point; keep
    // the lowest piece index of each group.
    let mut points: Vec<SlicePoint> = Vec::new();
    for p in &profile.points {
        if p.weight.is_zero() {
            continue;
        }
        match points.iter_mut().find(|q| q.v == p.v) {
            Some(q) => q.weight += &p.weight,
            None => points.push(p.clone()),
        }
    }
    if points.is_empty() {
        return Err(Error::Semantic("profile has no positive-weight slices".into()));
    }
    while points.len() > k + 1 {
        let mut m: Vec<Vec<Q>> = (0..profile.integral.len())
            .map(|b| points.iter().map(|p| p.v[b].clone()).collect())
            .collect();
        m.push(vec![Q::one(); points.len()]);
        let c = kernel_vector(m).expect("more points than affine dimension");
        // Σc = 0 and c ≠ 0, so both signs occur; each direction zeroes at
        // least one weight. Take the longer step, ties to the direction
        // whose first zeroed slice has the lower piece index.
        let step = |dir: &[Q]| -> (Q, usize) {
            let mut theta: Option<Q> = None;
            let mut at = usize::MAX;
            for (j, d) in dir.iter().enumerate() {
                if d.is_positive() {
                    let ratio = &points[j].weight / d;
                    if theta.as_ref().is_none_or(|t| ratio < *t) {
                        theta = Some(ratio);
                        at = points[j].piece;
                    }
                }
            }
            (theta.unwrap(), at)
        };
        let neg: Vec<Q> = c.iter().map(|x| -x).collect();
        let pos_step = step(&c);
        let neg_step = step(&neg);
        let take_pos = (&pos_step.0, std::cmp::Reverse(pos_step.1))
            > (&neg_step.0, std::cmp::Reverse(neg_step.1));
        let (dir, theta) = if take_pos { (&c, pos_step.0) } else { (&neg, neg_step.0) };
        for (j, p) in points.iter_mut().enumerate() {
            let delta = &theta * &dir[j];
            p.weight -= delta;
        }
        points.retain(|p| !p.weight.is_zero());
    }
    if points.len() > k {
        // k+1 points: some drop-one subset admits a dominating combination.
        let found = (0..points.len()).find_map(|drop| {
            let subset: Vec<&SlicePoint> =
                points.iter().enumerate().filter(|&(j, _)| j != drop).map(|(_, p)| p).collect();
            dominating_combination(&subset, &profile.integral)
                .map(|w| (subset.iter().map(|p| p.piece).collect::<Vec<_>>(), w))
        });
        let Some((pieces, weights)) = found else {
            return Err(Error::Semantic(format!(
                "no dominating facet for die '{}'",
                profile.die
            )));
        };
        return Ok(SliceSelection {
            chosen: pieces.into_iter().zip(weights).filter(|(_, w)| !w.is_zero()).collect(),
            dominated_target: profile.integral.clone(),
        });
    }
    Ok(SliceSelection {
        chosen: points.into_iter().map(|p| (p.piece, p.weight)).collect(),
        dominated_target: profile.integral.clone(),
    })
}

/// Rewrites `s` so `die` has one piece per selected slice: cut lengths are
/// the selection weights, and every accessor's table replays the chosen old
/// pieces. Other dice and non-accessors are untouched.
pub fn apply_phi(
    game: &DiceyGame,
    s: &GridStrategy,
    die: &str,
    sel: &SliceSelection,
) -> Result<GridStrategy> {
    crate::strategy::validate_strategy_ok(game, s)?;
    let old = s
        .cuts
        .get(die)
        .ok_or_else(|| Error::Semantic(format!("unknown die '{die}'")))?;
    if sel.chosen.is_empty() {
        return Err(Error::Semantic("selection is empty".into()));
    }
    let total: Q = sel.chosen.iter().map(|(_, w)| w.clone()).sum();
    if !total.is_one() || sel.chosen.iter().any(|(_, w)| w.is_negative()) {
        return Err(Error::Semantic("selection weights are not convex".into()));
    }
    for &(piece, _) in &sel.chosen {
        if piece == 0 || piece > old.len() {
            return Err(Error::Semantic(format!(
                "selection references piece {piece} of die '{die}' which has {} pieces",
                old.len()
            )));
        }
    }
    let mut out = s.clone();
    out.cuts.insert(die.to_string(), sel.chosen.iter().map(|(_, w)| w.clone()).collect());
    for (player, table) in &s.tables {
        let Some(pos) = table.dice.iter().position(|d| d == die) else {
            continue;
        };
        let mut dims: Vec<usize> = table.dice.iter().map(|d| s.cuts[d].len()).collect();
        dims[pos] = sel.chosen.len();
        let mut entries = BTreeMap::new();
        for cell in cells(&dims) {
            let mut key: Vec<usize> = cell.iter().map(|c| c + 1).collect();
            let mut source = key.clone();
            source[pos] = sel.chosen[cell[pos]].0;
            let action = table
                .entries
                .get(&source)
                .ok_or_else(|| Error::Semantic("selection does not match strategy".into()))?;
            key[pos] = cell[pos] + 1;
            entries.insert(key, action.clone());
        }
        out.tables.insert(player.clone(), PlayerTable { dice: table.dice.clone(), entries });
    }
    Ok(out)
}

/// Normalizes `s` to a `|Devil actions|`-grid strategy with no value loss,
/// slicing dice in lexicographic order. Dice already within the bound are
/// left untouched.
pub fn normalize(game: &DiceyGame, s: &GridStrategy) -> Result<GridStrategy> {
    Ok(normalize_traced(game, s)?.0)
}

/// [`normalize`], also returning the slice profile of every die that was
/// actually rewritten (diagnostics).
pub fn normalize_traced(
    game: &DiceyGame,
    s: &GridStrategy,
) -> Result<(GridStrategy, Vec<SliceProfile>)> {
    let k = game.devil_actions.len();
    let dice: Vec<String> = s.cuts.keys().cloned().collect();
    let mut cur = s.clone();
    let mut trace = Vec::new();
    for die in dice {
        if cur.cuts[&die].len() <= k {
            continue;
        }
        let profile = slice_profile(game, &cur, &die)?;
        let sel = caratheodory_select(&profile, k)?;
        cur = apply_phi(game, &cur, &die, &sel)?;
        trace.push(profile);
    }
    Ok((cur, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::expectations_exact;
    use crate::rational::{q_from_i64, q_from_str};
    use crate::strategy::validate_strategy;

    fn q(s: &str) -> Q {
        q_from_str(s).unwrap()
    }

    fn fixture() -> (DiceyGame, GridStrategy) {
        let game = DiceyGame::from_json(include_str!("../tests/data/triangular.json")).unwrap();
        let s = GridStrategy::from_json(&game, include_str!("../tests/data/sigma0.json")).unwrap();
        (game, s)
    }

    #[test]
    fn sigma0_profile_on_d1() {
        let (game, s) = fixture();
        let p = slice_profile(&game, &s, "d1").unwrap();
        assert_eq!(p.devil_actions, vec!["H", "T"]);
        assert_eq!(p.points.len(), 3);
        let outer = vec![q("4/9"), q("1/9")];
        let middle = vec![q("0"), q("5/9")];
        assert_eq!(p.points[0].v, outer);
        assert_eq!(p.points[1].v, middle);
        assert_eq!(p.points[2].v, outer);
        assert!(p.points.iter().all(|pt| pt.weight == q("1/3")));
        assert_eq!(p.integral, vec![q("8/27"), q("7/27")]);
        let per = expectations_exact(&game, &s).unwrap();
        assert_eq!(p.integral, vec![per["H"].clone(), per["T"].clone()]);
    }

    #[test]
    fn identical_slices_collapse_to_one() {
        // Constant-H strategy: every slice has the same vector.
        let (game, mut s) = fixture();
        for t in s.tables.values_mut() {
            for a in t.entries.values_mut() {
                *a = "H".into();
            }
        }
        let p = slice_profile(&game, &s, "d2").unwrap();
        assert!(p.points.iter().all(|pt| pt.v == p.integral));
        let sel = caratheodory_select(&p, 2).unwrap();
        assert_eq!(sel.chosen, vec![(1, q("1"))]);
    }

    #[test]
    fn sigma0_selection_merges_outer_slices() {
        let (game, s) = fixture();
        let p = slice_profile(&game, &s, "d1").unwrap();
        let sel = caratheodory_select(&p, 2).unwrap();
        assert_eq!(sel.chosen, vec![(1, q("2/3")), (2, q("1/3"))]);
        assert_eq!(sel.dominated_target, vec![q("8/27"), q("7/27")]);
    }

    #[test]
    fn two_point_profile_is_reweighted_identically() {
        let (game, _) = fixture();
        let s = GridStrategy::from_json(&game, include_str!("../tests/data/thirds.json")).unwrap();
        let p = slice_profile(&game, &s, "d3").unwrap();
        assert_eq!(p.points.len(), 2);
        let sel = caratheodory_select(&p, 2).unwrap();
        assert_eq!(sel.chosen, vec![(1, q("1/3")), (2, q("2/3"))]);
    }

    #[test]
    fn zero_mass_piece_has_defined_vector_and_is_dropped() {
        let (game, mut s) = fixture();
        s.cuts.insert("d1".into(), vec![q("1/3"), q("0"), q("2/3")]);
        let p = slice_profile(&game, &s, "d1").unwrap();
        assert_eq!(p.points[1].weight, q("0"));
        assert_eq!(p.points[1].v, vec![q("0"), q("5/9")]);
        let sel = caratheodory_select(&p, 2).unwrap();
        assert!(sel.chosen.iter().all(|&(piece, _)| piece != 2));
    }

    #[test]
    fn phi_on_d1_dominates_and_shrinks() {
        let (game, s) = fixture();
        let before = expectations_exact(&game, &s).unwrap();
        let p = slice_profile(&game, &s, "d1").unwrap();
        let sel = caratheodory_select(&p, 2).unwrap();
        let out = apply_phi(&game, &s, "d1", &sel).unwrap();
        assert_eq!(validate_strategy(&game, &out), Vec::<String>::new());
        assert_eq!(out.pieces("d1"), 2);
        assert_eq!(out.pieces("d2"), 3);
        assert_eq!(out.pieces("d3"), 3);
        let after = expectations_exact(&game, &out).unwrap();
        for (b, v) in &before {
            assert!(after[b] >= *v, "{b}: {} < {}", after[b], v);
        }
    }

    #[test]
    fn phi_on_constant_strategy_is_behaviorally_identity() {
        let (game, mut s) = fixture();
        for t in s.tables.values_mut() {
            for a in t.entries.values_mut() {
                *a = "H".into();
            }
        }
        let before = expectations_exact(&game, &s).unwrap();
        let p = slice_profile(&game, &s, "d1").unwrap();
        let sel = caratheodory_select(&p, 2).unwrap();
        let out = apply_phi(&game, &s, "d1", &sel).unwrap();
        assert_eq!(expectations_exact(&game, &out).unwrap(), before);
    }

    #[test]
    fn selection_mismatch_is_rejected() {
        let (game, s) = fixture();
        let sel = SliceSelection {
            chosen: vec![(9, q("1"))],
            dominated_target: vec![q("0"), q("0")],
        };
        assert!(apply_phi(&game, &s, "d1", &sel).is_err());
        let sel = SliceSelection {
            chosen: vec![(1, q("1/2"))],
            dominated_target: vec![q("0"), q("0")],
        };
        assert!(apply_phi(&game, &s, "d1", &sel).is_err());
    }

    #[test]
    fn normalize_sigma0_to_2_grid() {
        let (game, s) = fixture();
        let out = normalize(&game, &s).unwrap();
        assert_eq!(validate_strategy(&game, &out), Vec::<String>::new());
        assert!(out.is_k_grid(2));
        let per = expectations_exact(&game, &out).unwrap();
        assert!(per.values().min().unwrap() >= &q("7/27"));
    }

    #[test]
    fn normalize_keeps_2_grid_untouched() {
        let (game, _) = fixture();
        let mut s =
            GridStrategy::from_json(&game, include_str!("../tests/data/thirds.json")).unwrap();
        let a = crate::rational::q_from_f64(crate::alpha()).unwrap();
        let rest = Q::one() - &a;
        for die in ["d1", "d2", "d3"] {
            s.cuts.insert(die.into(), vec![a.clone(), rest.clone()]);
        }
        let out = normalize(&game, &s).unwrap();
        assert_eq!(out, s);
        let per = expectations_exact(&game, &out).unwrap();
        let value = per.values().min().unwrap();
        assert!((crate::rational::q_to_f64(value) - crate::beta()).abs() < 1e-9);
    }

    #[test]
    fn random_4_grids_normalize_without_value_loss() {
        use rand::{Rng, SeedableRng};
        let (game, _) = fixture();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x51ce);
        for round in 0..200 {
            let mut cuts = BTreeMap::new();
            for die in ["d1", "d2", "d3"] {
                let raw: Vec<i64> = (0..4).map(|_| rng.random_range(0..=8)).collect();
                let total: i64 = raw.iter().sum::<i64>().max(1);
                let mut lens: Vec<Q> =
                    raw.iter().map(|&r| q_from_i64(r) / q_from_i64(total)).collect();
                let fixup = Q::one() - lens.iter().cloned().sum::<Q>();
                lens[3] += fixup;
                cuts.insert(die.to_string(), lens);
            }
            let mut tables = BTreeMap::new();
            for p in &game.players {
                let dice: Vec<String> =
                    game.accessible_dice(p).into_iter().map(String::from).collect();
                let mut entries = BTreeMap::new();
                for cell in cells(&[4, 4]) {
                    let key: Vec<usize> = cell.iter().map(|c| c + 1).collect();
                    let action = if rng.random_bool(0.5) { "H" } else { "T" };
                    entries.insert(key, action.to_string());
                }
                tables.insert(p.clone(), PlayerTable { dice, entries });
            }
            let s = GridStrategy { cuts, tables };
            assert_eq!(validate_strategy(&game, &s), Vec::<String>::new());
            let before = expectations_exact(&game, &s).unwrap();
            let out = normalize(&game, &s).unwrap();
            assert_eq!(validate_strategy(&game, &out), Vec::<String>::new(), "round {round}");
            assert!(out.is_k_grid(2), "round {round}");
            for die in ["d1", "d2", "d3"] {
                assert!(out.pieces(die) <= s.pieces(die), "round {round}");
            }
            let after = expectations_exact(&game, &out).unwrap();
            let vb = before.values().min().unwrap();
            let va = after.values().min().unwrap();
            assert!(va >= vb, "round {round}: {va} < {vb}");
        }
    }
}
