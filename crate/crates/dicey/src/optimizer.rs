//! Maximin search over strategy schemes.
//!
//! A scheme fixes every player's piece-indexed action table; what remains is
//! the continuous choice of cut lengths λ. For a fixed scheme the value
//! `g(λ) = min_b E_b(λ)` is a min of multilinear forms; it is maximized by
//! projected subgradient ascent with backtracking line search. The solver
//! then takes the max over schemes, either exhaustively (budgeted) or by
//! seeded sampling plus table hill climbing. Results are deterministic for a
//! given seed regardless of worker count: every scheme's ascent is seeded
//! from the scheme cursor, and the reduction is an associative max with
//! lexicographic tie-break.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{DiceyGame, GameIndex};
use crate::rational::{q_from_f64, Q};
use crate::strategy::{cells, GridStrategy, PlayerTable};
use crate::{Error, Result};

/// Per-player dense tables: `scheme[p][cell] = action index`, cells running
/// over the player's accessible dice (ascending), row-major, 0-based.
pub type SchemeTables = Vec<Vec<usize>>;

/// Convergence threshold for the ascent (`|Δg|`).
pub const EPS_OPT: f64 = 1e-6;
/// Active-set tolerance (Devil actions within this of the min).
pub const EPS_ACT: f64 = 1e-6;
/// Evaluation agreement tolerance (reported value vs exact witness value).
pub const EPS_VAL: f64 = 1e-9;

/// The space of measurability-consistent schemes for one game at piece
/// count `k`.
#[derive(Debug, Clone)]
pub struct SchemeSpace {
    pub k: usize,
    /// Table-domain size per player: `k^{|accessible dice|}`.
    pub cells_per_player: Vec<usize>,
    pub action_counts: Vec<usize>,
    /// `∏_p |A_p|^(k^{|Δ_p|})`; `None` when the count overflows u128.
    pub total: Option<u128>,
}

impl SchemeSpace {
    pub fn new(game: &DiceyGame, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Semantic("piece count k must be ≥ 1".into()));
        }
        let ix = GameIndex::new(game);
        let mut cells_per_player = Vec::new();
        let mut action_counts = Vec::new();
        let mut total: Option<u128> = Some(1);
        for p in 0..ix.players.len() {
            let cells = ix.access[p]
                .len()
                .try_into()
                .ok()
                .and_then(|e| (k as u128).checked_pow(e))
                .filter(|&c| c <= usize::MAX as u128)
                .map(|c| c as usize);
            let Some(cells) = cells else {
                return Err(Error::Semantic(format!(
                    "table domain for player '{}' overflows",
                    ix.players[p]
                )));
            };
            let na = ix.actions[p].len();
            let count = if na == 1 {
                Some(1u128)
            } else {
                cells
                    .try_into()
                    .ok()
                    .and_then(|e: u32| (na as u128).checked_pow(e))
            };
            total = match (total, count) {
                (Some(t), Some(c)) => t.checked_mul(c),
                _ => None,
            };
            cells_per_player.push(cells);
            action_counts.push(na);
        }
        Ok(SchemeSpace { k, cells_per_player, action_counts, total })
    }

    /// Human-readable scheme count, even past u128.
    pub fn count_string(&self) -> String {
        match self.total {
            Some(t) => t.to_string(),
            None => "more than 2^128".into(),
        }
    }

    /// Decodes a cursor into tables. Mixed radix: the first player is the
    /// most significant digit group; within a player, the first cell is the
    /// most significant digit.
    pub fn decode(&self, cursor: u128) -> SchemeTables {
        let n = self.cells_per_player.len();
        // Per-player radix contribution.
        let weights: Vec<u128> = (0..n)
            .map(|p| (self.action_counts[p] as u128).pow(self.cells_per_player[p] as u32))
            .collect();
        let mut rest = cursor;
        let mut tables = Vec::with_capacity(n);
        for p in 0..n {
            let below: u128 = weights[p + 1..].iter().product();
            let mut t = rest / below;
            rest %= below;
            let na = self.action_counts[p] as u128;
            let mut table = vec![0usize; self.cells_per_player[p]];
            for slot in table.iter_mut().rev() {
                *slot = (t % na) as usize;
                t /= na;
            }
            tables.push(table);
        }
        tables
    }
}

/// Deterministic lexicographic stream of `(cursor, tables)`. Refuses when
/// the space exceeds `budget` unless `force` is set.
pub fn enumerate_schemes(
    game: &DiceyGame,
    k: usize,
    budget: u128,
    force: bool,
) -> Result<impl Iterator<Item = (u128, SchemeTables)>> {
    let space = SchemeSpace::new(game, k)?;
    let total = match space.total {
        Some(t) if t <= budget || force => t,
        _ => {
            return Err(Error::BudgetExceeded { count: space.count_string(), budget });
        }
    };
    Ok((0..total).map(move |c| (c, space.decode(c))))
}

/// Payoff tensor for one (game, k) pair: joint cells over all dice with the
/// per-player table offsets precomputed. Scheme-independent.
struct Tensor {
    dims: Vec<usize>,
    joints: Vec<Vec<usize>>,
    /// `offsets[p][cell]` indexes player p's scheme table.
    offsets: Vec<Vec<usize>>,
    nb: usize,
}

impl Tensor {
    fn new(ix: &GameIndex, k: usize) -> Tensor {
        let dims = vec![k; ix.dice.len()];
        let joints: Vec<Vec<usize>> = cells(&dims).collect();
        let offsets = (0..ix.players.len())
            .map(|p| {
                joints
                    .iter()
                    .map(|joint| {
                        ix.access[p].iter().fold(0usize, |off, &die| off * k + joint[die])
                    })
                    .collect()
            })
            .collect();
        Tensor { dims, joints, offsets, nb: ix.devil_actions.len() }
    }

    /// `pay[cell * nb + b]` for a fixed scheme.
    fn payoffs(&self, ix: &GameIndex, scheme: &SchemeTables) -> Vec<i64> {
        let mut pay = Vec::with_capacity(self.joints.len() * self.nb);
        let mut team = vec![0usize; ix.players.len()];
        for cell in 0..self.joints.len() {
            for (p, slot) in team.iter_mut().enumerate() {
                *slot = scheme[p][self.offsets[p][cell]];
            }
            for b in 0..self.nb {
                pay.push(ix.payoff(&team, b));
            }
        }
        pay
    }
}

/// Euclidean projection onto the probability simplex (sorting method).
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

/// `E_b(λ)` for every Devil action.
fn expectations(joints: &[Vec<usize>], pay: &[i64], nb: usize, lam: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; nb];
    for (cell, joint) in joints.iter().enumerate() {
        let mut mass = 1.0;
        for (d, &j) in joint.iter().enumerate() {
            mass *= lam[d][j];
        }
        if mass == 0.0 {
            continue;
        }
        for (b, slot) in out.iter_mut().enumerate() {
            *slot += mass * pay[cell * nb + b] as f64;
        }
    }
    out
}

fn min_with_index(e: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (b, &v) in e.iter().enumerate() {
        if v < best.0 {
            best = (v, b);
        }
    }
    best
}

/// Gradient of `E_b` with respect to every λ coordinate.
fn gradient(joints: &[Vec<usize>], pay: &[i64], nb: usize, b: usize, lam: &[Vec<f64>], dims: &[usize]) -> Vec<Vec<f64>> {
    let nd = dims.len();
    let mut grad: Vec<Vec<f64>> = dims.iter().map(|&k| vec![0.0; k]).collect();
    let mut pre = vec![1.0; nd + 1];
    let mut suf = vec![1.0; nd + 1];
    for (cell, joint) in joints.iter().enumerate() {
        let p = pay[cell * nb + b];
        if p == 0 {
            continue;
        }
        for d in 0..nd {
            pre[d + 1] = pre[d] * lam[d][joint[d]];
        }
        for d in (0..nd).rev() {
            suf[d] = suf[d + 1] * lam[d][joint[d]];
        }
        for d in 0..nd {
            grad[d][joint[d]] += pre[d] * suf[d + 1] * p as f64;
        }
    }
    grad
}

/// Best λ found for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximinResult {
    /// Per-die weights, dice in ascending id order.
    pub lambda: Vec<Vec<f64>>,
    /// `min_b E_b(lambda)`.
    pub value: f64,
    /// Devil actions within [`EPS_ACT`] of the min.
    pub active_actions: Vec<String>,
    pub iterations: usize,
    pub starts_used: usize,
}

/// Solver knobs; `Default` gives the CLI defaults.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Pieces per die; defaults to the Devil action count.
    pub k: Option<usize>,
    pub budget: u128,
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
    /// Enumerate past the budget anyway.
    pub force: bool,
    /// Hybrid mode: random schemes sampled before hill climbing.
    pub samples: u64,
    /// Hybrid mode: cap on hill-climbing moves.
    pub moves: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            k: None,
            budget: 1_000_000,
            starts: 6,
            iters: 300,
            seed: 0,
            force: false,
            samples: 128,
            moves: 256,
        }
    }
}

pub(crate) fn splitmix64(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

struct Ascent<'a> {
    dims: &'a [usize],
    joints: &'a [Vec<usize>],
    pay: Vec<i64>,
    nb: usize,
    iters: usize,
}

impl Ascent<'_> {
    fn g(&self, lam: &[Vec<f64>]) -> (f64, usize) {
        min_with_index(&expectations(self.joints, &self.pay, self.nb, lam))
    }

    /// Projected subgradient ascent from one start. The subgradient is the
    /// gradient of the min-attaining action (lowest index on ties); the
    /// direction is normalized so that affinely rescaled payoffs trace the
    /// same path; the line search halves from 0.25 until improvement.
    fn run(&self, mut lam: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64, usize) {
        let (mut g, mut bmin) = self.g(&lam);
        let mut used = 0;
        for _ in 0..self.iters {
            used += 1;
            let grad = gradient(self.joints, &self.pay, self.nb, bmin, &lam, self.dims);
            let norm: f64 = grad.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-15 {
                break;
            }
            let mut step = 0.25;
            let mut improved = None;
            for _ in 0..=25 {
                let mut cand = lam.clone();
                for (d, row) in cand.iter_mut().enumerate() {
                    for (j, x) in row.iter_mut().enumerate() {
                        *x += step * grad[d][j] / norm;
                    }
                    project_simplex(row);
                }
                let (gc, bc) = self.g(&cand);
                if gc > g {
                    improved = Some((cand, gc, bc));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, gc, bc)) = improved else {
                break;
            };
            let delta = gc - g;
            lam = cand;
            g = gc;
            bmin = bc;
            if delta <= EPS_OPT {
                break;
            }
        }
        (lam, g, used)
    }
}

fn check_scheme_shape(ix: &GameIndex, space: &SchemeSpace, scheme: &SchemeTables) -> Result<()> {
    if scheme.len() != ix.players.len() {
        return Err(Error::Semantic("scheme has wrong player count".into()));
    }
    for (p, table) in scheme.iter().enumerate() {
        if table.len() != space.cells_per_player[p] {
            return Err(Error::Semantic(format!(
                "table for player '{}' has {} cells, expected {}",
                ix.players[p],
                table.len(),
                space.cells_per_player[p]
            )));
        }
        if table.iter().any(|&a| a >= ix.actions[p].len()) {
            return Err(Error::Semantic(format!(
                "table for player '{}' uses an undeclared action index",
                ix.players[p]
            )));
        }
    }
    Ok(())
}

fn starts_for(
    ix: &GameIndex,
    game: &DiceyGame,
    k: usize,
    starts: usize,
    seed: u64,
) -> Vec<Vec<Vec<f64>>> {
    let nd = ix.dice.len();
    let uniform: Vec<Vec<f64>> = vec![vec![1.0 / k as f64; k]; nd];
    let mut list = vec![uniform];
    if let Some(cuts) = crate::pennies::conjecture_cuts(game) {
        if cuts.values().all(|c| c.len() <= k) {
            let lam = ix
                .dice
                .iter()
                .map(|d| {
                    let mut row: Vec<f64> =
                        cuts[d].iter().map(crate::rational::q_to_f64).collect();
                    row.resize(k, 0.0);
                    row
                })
                .collect();
            list.push(lam);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while list.len() < starts.max(1) {
        let lam = (0..nd)
            .map(|_| {
                let mut row: Vec<f64> =
                    (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln().max(1e-12)).collect();
                let total: f64 = row.iter().sum();
                for x in row.iter_mut() {
                    *x /= total;
                }
                row
            })
            .collect();
        list.push(lam);
    }
    list.truncate(starts.max(1));
    list
}

/// Maximizes `min_b E_b(λ)` for a fixed scheme by multi-start projected
/// subgradient ascent. Always returns the best point found (a lower bound
/// on the scheme's true maximin); deterministic given the seed.
pub fn maximin_lambda(
    game: &DiceyGame,
    scheme: &SchemeTables,
    opts: &SolveOptions,
) -> Result<MaximinResult> {
    let ix = GameIndex::new(game);
    let k = opts.k.unwrap_or(ix.devil_actions.len());
    let space = SchemeSpace::new(game, k)?;
    check_scheme_shape(&ix, &space, scheme)?;
    let tensor = Tensor::new(&ix, k);
    Ok(maximin_inner(game, &ix, &tensor, k, scheme, opts, opts.seed))
}

fn maximin_inner(
    game: &DiceyGame,
    ix: &GameIndex,
    tensor: &Tensor,
    k: usize,
    scheme: &SchemeTables,
    opts: &SolveOptions,
    seed: u64,
) -> MaximinResult {
    let ascent = Ascent {
        dims: &tensor.dims,
        joints: &tensor.joints,
        pay: tensor.payoffs(ix, scheme),
        nb: tensor.nb,
        iters: opts.iters,
    };
    let starts = starts_for(ix, game, k, opts.starts, seed);
    let starts_used = starts.len();
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    let mut iterations = 0;
    for s in starts {
        let (lam, g, used) = ascent.run(s);
        iterations += used;
        if best.as_ref().is_none_or(|(_, bg)| g > *bg) {
            best = Some((lam, g));
        }
    }
    let (lambda, value) = best.expect("at least one start");
    let e = expectations(&tensor.joints, &ascent.pay, tensor.nb, &lambda);
    let active_actions = ix
        .devil_actions
        .iter()
        .zip(&e)
        .filter(|(_, &eb)| eb - value <= EPS_ACT)
        .map(|(name, _)| name.clone())
        .collect();
    MaximinResult { lambda, value, active_actions, iterations, starts_used }
}

/// Builds the grid strategy induced by a scheme and λ. Cuts are converted
/// losslessly from f64 and renormalized exactly so each die sums to 1.
pub fn scheme_to_strategy(
    game: &DiceyGame,
    k: usize,
    scheme: &SchemeTables,
    lambda: &[Vec<f64>],
) -> GridStrategy {
    let ix = GameIndex::new(game);
    let mut cuts = BTreeMap::new();
    for (d, die) in ix.dice.iter().enumerate() {
        let mut lens: Vec<Q> =
            lambda[d].iter().map(|&x| q_from_f64(x.max(0.0)).unwrap()).collect();
        let total: Q = lens.iter().cloned().sum();
        if total.is_zero() {
            lens = vec![Q::from_integer(1.into()) / Q::from_integer((k as i64).into()); k];
        } else {
            for l in lens.iter_mut() {
                *l /= &total;
            }
        }
        cuts.insert(die.clone(), lens);
    }
    let mut tables = BTreeMap::new();
    for (p, player) in ix.players.iter().enumerate() {
        let dice: Vec<String> = ix.access[p].iter().map(|&d| ix.dice[d].clone()).collect();
        let dims = vec![k; dice.len()];
        let mut entries = BTreeMap::new();
        for (flat, cell) in cells(&dims).enumerate() {
            let key: Vec<usize> = cell.iter().map(|c| c + 1).collect();
            entries.insert(key, ix.actions[p][scheme[p][flat]].clone());
        }
        tables.insert(player.clone(), PlayerTable { dice, entries });
    }
    GridStrategy { cuts, tables }
}

/// Extracts the scheme of a strategy, forgetting the cut lengths (the
/// inverse of [`scheme_to_strategy`]). Every die must carry the same piece
/// count; refine first when they differ.
pub fn strategy_to_scheme(game: &DiceyGame, s: &GridStrategy) -> Result<(usize, SchemeTables)> {
    crate::strategy::validate_strategy_ok(game, s)?;
    let ix = GameIndex::new(game);
    let mut k = 1usize;
    for (i, die) in ix.dice.iter().enumerate() {
        let n = s.cuts[die].len();
        if i == 0 {
            k = n;
        } else if n != k {
            return Err(Error::Semantic(format!(
                "dice carry different piece counts ({k} and {n}); refine to a common grid first"
            )));
        }
    }
    let mut tables = Vec::with_capacity(ix.players.len());
    for (p, player) in ix.players.iter().enumerate() {
        let table = &s.tables[player];
        let dims = vec![k; ix.access[p].len()];
        let mut flat = Vec::with_capacity(dims.iter().product());
        for cell in cells(&dims) {
            let key: Vec<usize> = cell.iter().map(|c| c + 1).collect();
            let action = &table.entries[&key];
            let a = ix.actions[p].iter().position(|x| x == action).expect("validated");
            flat.push(a);
        }
        tables.push(flat);
    }
    Ok((k, tables))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub schemes_examined: u128,
    /// Cursor of the winning scheme; `None` in hybrid mode when the space
    /// size overflows and cursors are not well-defined.
    pub best_cursor: Option<u128>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSearchResult {
    pub value: f64,
    pub witness: GridStrategy,
    pub maximin: MaximinResult,
    pub scheme: SchemeTables,
    pub k: usize,
    pub stats: SolveStats,
}

struct Candidate {
    value: f64,
    cursor: u128,
    scheme: SchemeTables,
    maximin: MaximinResult,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.value > b.value || (a.value == b.value && a.cursor < b.cursor)
}

fn fold_cursor(cursor: u128) -> u64 {
    (cursor as u64) ^ ((cursor >> 64) as u64).wrapping_mul(0x9E3779B97F4A7C15)
}

/// Searches scheme space for the best k-grid strategy.
pub fn solve(game: &DiceyGame, mode: SearchMode, opts: &SolveOptions) -> Result<SchemeSearchResult> {
    game.validate()?;
    let ix = GameIndex::new(game);
    let k = opts.k.unwrap_or_else(|| ix.devil_actions.len().max(1));
    let space = SchemeSpace::new(game, k)?;
    let tensor = Tensor::new(&ix, k);
    let best = match mode {
        SearchMode::Exhaustive => {
            let total = match space.total {
                Some(t) if (t <= opts.budget || opts.force) && t <= u64::MAX as u128 => t as u64,
                _ => {
                    return Err(Error::BudgetExceeded {
                        count: space.count_string(),
                        budget: opts.budget,
                    });
                }
            };
            let best = (0..total)
                .into_par_iter()
                .map(|c| {
                    let cursor = c as u128;
                    let scheme = space.decode(cursor);
                    let seed = splitmix64(opts.seed, fold_cursor(cursor));
                    let maximin = maximin_inner(game, &ix, &tensor, k, &scheme, opts, seed);
                    Some(Candidate { value: maximin.value, cursor, scheme, maximin })
                })
                .reduce(
                    || None,
                    |a, b| match (a, b) {
                        (Some(x), Some(y)) => Some(if better(&x, &y) { x } else { y }),
                        (x, None) | (None, x) => x,
                    },
                );
            let best = best.ok_or_else(|| Error::Semantic("no schemes to search".into()))?;
            (best, total as u128, space.total.is_some())
        }
        SearchMode::Hybrid => {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(opts.seed, 0x5a3b1e));
            let mut examined: u128 = 0;
            let mut eval_seq: u64 = 0;
            let mut eval = |scheme: SchemeTables, cursor: u128| -> Candidate {
                let seed = splitmix64(opts.seed, {
                    eval_seq += 1;
                    eval_seq
                });
                let maximin = maximin_inner(game, &ix, &tensor, k, &scheme, opts, seed);
                Candidate { value: maximin.value, cursor, scheme, maximin }
            };
            let sample = |rng: &mut ChaCha8Rng| -> (u128, SchemeTables) {
                match space.total {
                    Some(t) => {
                        let c = rng.random::<u128>() % t;
                        (c, space.decode(c))
                    }
                    None => {
                        let tables = (0..ix.players.len())
                            .map(|p| {
                                (0..space.cells_per_player[p])
                                    .map(|_| rng.random_range(0..space.action_counts[p]))
                                    .collect()
                            })
                            .collect();
                        (0, tables)
                    }
                }
            };
            let mut best: Option<Candidate> = None;
            for _ in 0..opts.samples.max(1) {
                let (cursor, scheme) = sample(&mut rng);
                examined += 1;
                let cand = eval(scheme, cursor);
                if best.as_ref().is_none_or(|b| cand.value > b.value) {
                    best = Some(cand);
                }
            }
            let mut best = best.expect("at least one sample");
            // Greedy single-cell hill climbing with λ re-optimization.
            let mut moves = 0;
            'climb: while moves < opts.moves {
                for p in 0..ix.players.len() {
                    for cell in 0..space.cells_per_player[p] {
                        for a in 0..space.action_counts[p] {
                            if a == best.scheme[p][cell] {
                                continue;
                            }
                            let mut scheme = best.scheme.clone();
                            scheme[p][cell] = a;
                            examined += 1;
                            moves += 1;
                            let cand = eval(scheme, best.cursor);
                            if cand.value > best.value + EPS_VAL {
                                best = cand;
                                continue 'climb;
                            }
                            if moves >= opts.moves {
                                break 'climb;
                            }
                        }
                    }
                }
                break;
            }
            (best, examined, space.total.is_some())
        }
    };
    let (cand, examined, cursor_known) = best;
    let witness = scheme_to_strategy(game, k, &cand.scheme, &cand.maximin.lambda);
    Ok(SchemeSearchResult {
        value: cand.value,
        witness,
        maximin: cand.maximin,
        scheme: cand.scheme,
        k,
        stats: SolveStats {
            schemes_examined: examined,
            best_cursor: cursor_known.then_some(cand.cursor),
        },
    })
}

/// Threshold verdict: `Yes` carries a witness whose exact value meets `t`
/// within [`EPS_VAL`]; `NoWithinSearch` is an honest "not found", not a
/// refutation.
#[derive(Debug, Clone)]
pub enum ThresholdAnswer {
    Yes(Box<SchemeSearchResult>),
    NoWithinSearch(Box<SchemeSearchResult>),
}

/// Searches for a strategy of value ≥ `t`. The witness check is exact.
pub fn check_threshold(
    game: &DiceyGame,
    t: &Q,
    mode: SearchMode,
    opts: &SolveOptions,
) -> Result<ThresholdAnswer> {
    let result = solve(game, mode, opts)?;
    let per = crate::eval::expectations_exact(game, &result.witness)?;
    let exact = per.values().min().expect("devil actions are nonempty");
    let slack = q_from_f64(EPS_VAL).unwrap();
    if *exact >= t - slack {
        Ok(ThresholdAnswer::Yes(Box::new(result)))
    } else {
        Ok(ThresholdAnswer::NoWithinSearch(Box::new(result)))
    }
}
