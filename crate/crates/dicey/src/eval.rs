//! Exact and floating evaluation of grid strategies, plus a seeded Monte
//! Carlo estimator for cross-validation.
//!
//! The expectation against a Devil action `b` is the cell-mass-weighted
//! payoff sum `E_b = Σ_cells ∏_D λ_{D,j_D} · μ(cell actions, b)`; the value
//! is `min_b E_b`. Exact mode works in big rationals (cut lengths are always
//! stored as rationals, so exact mode is total); floating mode trades
//! exactness for speed on large grids.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::game::{DiceyGame, GameIndex};
use crate::rational::{q_to_f64, q_to_string, Q};
use crate::strategy::{cells, validate_strategy_ok, GridStrategy};
use crate::{Error, Result};

/// Which arithmetic produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithmeticMode {
    ExactRational,
    Floating,
}

/// An exact rational or a float, depending on the evaluation mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Q),
    Float(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q_to_f64(q),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Q> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{}", q_to_string(q)),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Per-Devil-action expectations and their minimum.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub per_action: BTreeMap<String, Scalar>,
    /// `min_b per_action[b]`.
    pub value: Scalar,
    pub mode: ArithmeticMode,
}

impl EvalResult {
    pub fn value(&self) -> &Scalar {
        &self.value
    }
}

/// Dense, index-based view of a strategy against a [`GameIndex`].
#[derive(Debug, Clone)]
pub(crate) struct CompiledStrategy {
    /// Piece count per die, in `GameIndex::dice` order.
    pub dims: Vec<usize>,
    /// Exact piece lengths per die.
    pub lens: Vec<Vec<Q>>,
    /// Per player: flattened cell → action index. Cells run over the
    /// player's accessible dice (ascending), row-major, 0-based.
    pub tables: Vec<Vec<usize>>,
}

impl CompiledStrategy {
    /// Flattened table offset for a joint cell (0-based piece per die).
    #[inline]
    pub fn table_offset(&self, player: usize, ix: &GameIndex, joint: &[usize]) -> usize {
        let mut off = 0usize;
        for &die in &ix.access[player] {
            off = off * self.dims[die] + joint[die];
        }
        off
    }

    /// Team action indices at a joint cell.
    pub fn team_actions(&self, ix: &GameIndex, joint: &[usize]) -> Vec<usize> {
        (0..ix.players.len())
            .map(|p| self.tables[p][self.table_offset(p, ix, joint)])
            .collect()
    }
}

pub(crate) fn compile(game: &DiceyGame, ix: &GameIndex, s: &GridStrategy) -> Result<CompiledStrategy> {
    validate_strategy_ok(game, s)?;
    let dims: Vec<usize> = ix.dice.iter().map(|d| s.cuts[d].len()).collect();
    let lens: Vec<Vec<Q>> = ix.dice.iter().map(|d| s.cuts[d].clone()).collect();
    let mut tables = Vec::with_capacity(ix.players.len());
    for (p, player) in ix.players.iter().enumerate() {
        let table = &s.tables[player];
        let pdims: Vec<usize> = ix.access[p].iter().map(|&d| dims[d]).collect();
        let mut dense = Vec::with_capacity(pdims.iter().product());
        for cell in cells(&pdims) {
            let key: Vec<usize> = cell.iter().map(|c| c + 1).collect();
            let action = &table.entries[&key];
            let a = ix.actions[p]
                .iter()
                .position(|x| x == action)
                .expect("validated action");
            dense.push(a);
        }
        tables.push(dense);
    }
    Ok(CompiledStrategy { dims, lens, tables })
}

/// Exact per-Devil-action expectations, in Devil action declaration order.
pub(crate) fn expectations_exact_ix(ix: &GameIndex, cs: &CompiledStrategy) -> Vec<Q> {
    let nb = ix.devil_actions.len();
    let mut totals = vec![Q::zero(); nb];
    for joint in cells(&cs.dims) {
        let mut mass = Q::from_integer(1.into());
        let mut zero = false;
        for (die, &j) in joint.iter().enumerate() {
            let l = &cs.lens[die][j];
            if l.is_zero() {
                zero = true;
                break;
            }
            mass *= l;
        }
        if zero {
            continue;
        }
        let team = cs.team_actions(ix, &joint);
        for (b, total) in totals.iter_mut().enumerate() {
            let pay = ix.payoff(&team, b);
            if pay != 0 {
                *total += &mass * Q::from_integer(pay.into());
            }
        }
    }
    totals
}

fn expectations_float_ix(ix: &GameIndex, cs: &CompiledStrategy) -> Vec<f64> {
    let nb = ix.devil_actions.len();
    let lens: Vec<Vec<f64>> =
        cs.lens.iter().map(|v| v.iter().map(q_to_f64).collect()).collect();
    let mut totals = vec![0.0f64; nb];
    for joint in cells(&cs.dims) {
        let mut mass = 1.0f64;
        for (die, &j) in joint.iter().enumerate() {
            mass *= lens[die][j];
        }
        if mass == 0.0 {
            continue;
        }
        let team = cs.team_actions(ix, &joint);
        for (b, total) in totals.iter_mut().enumerate() {
            *total += mass * ix.payoff(&team, b) as f64;
        }
    }
    totals
}

/// Exact expectations keyed by Devil action id.
pub fn expectations_exact(game: &DiceyGame, s: &GridStrategy) -> Result<BTreeMap<String, Q>> {
    let ix = GameIndex::new(game);
    let cs = compile(game, &ix, s)?;
    let totals = expectations_exact_ix(&ix, &cs);
    Ok(ix.devil_actions.iter().cloned().zip(totals).collect())
}

/// Evaluates a strategy; `mode` picks the arithmetic.
pub fn evaluate(game: &DiceyGame, s: &GridStrategy, mode: ArithmeticMode) -> Result<EvalResult> {
    let ix = GameIndex::new(game);
    let cs = compile(game, &ix, s)?;
    match mode {
        ArithmeticMode::ExactRational => {
            let totals = expectations_exact_ix(&ix, &cs);
            let value = totals.iter().min().cloned().ok_or_else(|| {
                Error::Semantic("game has no Devil actions".into())
            })?;
            Ok(EvalResult {
                per_action: ix
                    .devil_actions
                    .iter()
                    .cloned()
                    .zip(totals.into_iter().map(Scalar::Exact))
                    .collect(),
                value: Scalar::Exact(value),
                mode,
            })
        }
        ArithmeticMode::Floating => {
            let totals = expectations_float_ix(&ix, &cs);
            let value = totals.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(EvalResult {
                per_action: ix
                    .devil_actions
                    .iter()
                    .cloned()
                    .zip(totals.into_iter().map(Scalar::Float))
                    .collect(),
                value: Scalar::Float(value),
                mode,
            })
        }
    }
}

/// One Devil action's empirical summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McStat {
    pub mean: f64,
    /// Sample standard deviation over √N (0 when N = 1 or payoff constant).
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo estimate; bit-identical for identical seeds, independent of
/// worker count (per-chunk generators, integer accumulation).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub per_action: BTreeMap<String, McStat>,
    pub seed: u64,
    /// `min_b mean_b`.
    pub value_estimate: f64,
}

const MC_CHUNK: u64 = 4096;

/// Estimates per-action expectations from `samples` seeded rolls.
pub fn monte_carlo(
    game: &DiceyGame,
    s: &GridStrategy,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Semantic("samples must be ≥ 1".into()));
    }
    let ix = GameIndex::new(game);
    let cs = compile(game, &ix, s)?;
    let nb = ix.devil_actions.len();
    // Cumulative f64 boundaries per die; zero pieces are skipped by lookup.
    let bounds: Vec<Vec<f64>> = cs
        .lens
        .iter()
        .map(|lens| {
            let mut cum = 0.0;
            lens.iter()
                .map(|l| {
                    cum += q_to_f64(l);
                    cum
                })
                .collect()
        })
        .collect();
    let lens_f: Vec<Vec<f64>> =
        cs.lens.iter().map(|v| v.iter().map(q_to_f64).collect()).collect();
    let chunks = samples.div_ceil(MC_CHUNK);
    let (sums, squares) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut sums = vec![0i128; nb];
            let mut squares = vec![0i128; nb];
            let mut joint = vec![0usize; cs.dims.len()];
            for _ in 0..count {
                for (die, slot) in joint.iter_mut().enumerate() {
                    let r: f64 = rng.random();
                    let mut piece = cs.dims[die] - 1;
                    for j in 0..cs.dims[die] {
                        if lens_f[die][j] > 0.0 && r <= bounds[die][j] {
                            piece = j;
                            break;
                        }
                    }
                    *slot = piece;
                }
                let team = cs.team_actions(&ix, &joint);
                for b in 0..nb {
                    let pay = ix.payoff(&team, b) as i128;
                    sums[b] += pay;
                    squares[b] += pay * pay;
                }
            }
            (sums, squares)
        })
        .reduce(
            || (vec![0i128; nb], vec![0i128; nb]),
            |(mut s1, mut q1), (s2, q2)| {
                for i in 0..nb {
                    s1[i] += s2[i];
                    q1[i] += q2[i];
                }
                (s1, q1)
            },
        );
    let n = samples as f64;
    let mut per_action = BTreeMap::new();
    let mut value_estimate = f64::INFINITY;
    for (b, action) in ix.devil_actions.iter().enumerate() {
        let sum = sums[b].to_f64().unwrap();
        let sumsq = squares[b].to_f64().unwrap();
        let mean = sum / n;
        let stderr = if samples > 1 {
            let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        value_estimate = value_estimate.min(mean);
        per_action.insert(action.clone(), McStat { mean, stderr, samples });
    }
    Ok(McEstimate { per_action, seed, value_estimate })
}
