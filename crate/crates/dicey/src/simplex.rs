//! Dense two-phase simplex over exact rationals.
//!
//! Minimizes `c·x` subject to `Ax = b`, `x ≥ 0`. Bland's rule everywhere, so
//! the method terminates on degenerate tableaus and the result is
//! deterministic. Problem sizes in this crate are tiny (tens of rows), so a
//! dense rational tableau is the simplest correct tool.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Q>, obj: Q },
}

struct Tableau {
    /// m rows × (cols + 1); last column is the rhs.
    rows: Vec<Vec<Q>>,
    /// Reduced-cost row, same width (last entry = −objective).
    cost: Vec<Q>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for j in 0..=self.cols {
                let delta = &f * &self.rows[row][j];
                self.rows[i][j] -= delta;
            }
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for j in 0..=self.cols {
                let delta = &f * &self.rows[row][j];
                self.cost[j] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland-rule simplex on the current cost row. `allowed` bounds the
    /// entering column index (used to lock artificials out in phase 2).
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<usize> = None;
            let mut best: Option<Q> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][enter].is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][self.cols] / &self.rows[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b
                            || (ratio == *b && self.basis[i] < self.basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
            let Some(row) = leave else {
                return false;
            };
            self.pivot(row, enter);
        }
    }
}

/// Minimizes `c·x` subject to `Ax = b`, `x ≥ 0`, exactly.
pub fn solve_lp(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, arow) in a.iter().enumerate() {
        assert_eq!(arow.len(), n);
        let flip = b[i].is_negative();
        let mut row: Vec<Q> = Vec::with_capacity(cols + 1);
        for v in arow {
            row.push(if flip { -v } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i { Q::one() } else { Q::zero() });
        }
        row.push(if flip { -&b[i] } else { b[i].clone() });
        rows.push(row);
    }
    // Phase 1: minimize the artificial sum. With the artificial basis the
    // reduced cost of column j is −Σ_i row_i[j].
    let mut cost = vec![Q::zero(); cols + 1];
    for row in &rows {
        for j in 0..=cols {
            cost[j] -= &row[j];
        }
    }
    for j in n..cols {
        cost[j] += Q::one();
    }
    let mut t = Tableau { rows, cost, basis: (n..cols).collect(), cols };
    t.optimize(cols);
    // Phase-1 objective = −cost[rhs].
    if !t.cost[t.cols].is_zero() {
        return LpOutcome::Infeasible;
    }
    // Drive leftover artificials out of the basis; a row with no structural
    // coefficient is redundant and dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    // Phase 2: reduced costs for the real objective over the current basis.
    let mut cost = vec![Q::zero(); cols + 1];
    cost[..n].clone_from_slice(c);
    for (i, &bj) in t.basis.iter().enumerate() {
        if c[bj].is_zero() {
            continue;
        }
        let f = c[bj].clone();
        for j in 0..=cols {
            let delta = &f * &t.rows[i][j];
            cost[j] -= delta;
        }
    }
    t.cost = cost;
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rows[i][t.cols].clone();
        }
    }
    let obj = -t.cost[t.cols].clone();
    LpOutcome::Optimal { x, obj }
}
