//! First-order certificates for candidate optima.
//!
//! A maximin candidate is a point (λ, t) of the system "λ lies on the
//! per-die simplices and every Devil expectation is ≥ t". At a maximizer of
//! t there must exist multipliers, not all zero: α_0 for the objective,
//! α_b ≥ 0 per active payoff constraint, α_{D,j} ≥ 0 per active
//! nonnegativity constraint, and a free μ_D per die for the equality
//! Σ_j λ_{D,j} = 1, satisfying stationarity:
//!
//! * t-coordinate: α_0 − Σ_b α_b = 0
//! * (D,j)-coordinate: Σ_b α_b · ∂E_b/∂λ_{D,j} + α_{D,j} + μ_D = 0
//!
//! Any nonzero multiplier vector has Σα > 0 (with all α zero the λ-rows
//! force every μ_D to zero), so the search normalizes α_0 + Σα = 1 and
//! minimizes the stationarity residual exactly with the rational simplex.
//! The gradients ∂E_b/∂λ_{D,j} are the slice vectors of the strategy, so
//! everything is computed in exact arithmetic; the reported certificate is
//! rescaled so that α_0 + Σα + Σ|μ| = 1.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::game::{DiceyGame, GameIndex};
use crate::rational::{q_from_f64, q_to_string, Q};
use crate::simplex::{solve_lp, LpOutcome};
use crate::slicer::slice_profile;
use crate::strategy::{validate_strategy_ok, GridStrategy};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateStatus {
    /// A nonzero multiplier vector satisfies stationarity within tolerance.
    Feasible,
    /// Even the best multipliers leave a residual above tolerance: the point
    /// does not satisfy the first-order optimality conditions.
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct FritzJohnCertificate {
    pub status: CertificateStatus,
    pub alpha0: Q,
    /// Multipliers of active payoff constraints, by Devil action. Inactive
    /// constraints are omitted (their multipliers are zero by definition).
    pub alpha_payoff: BTreeMap<String, Q>,
    /// Multipliers of active nonnegativity constraints, keyed "die:piece"
    /// (piece 1-based).
    pub alpha_nonneg: BTreeMap<String, Q>,
    /// Free equality multipliers per die.
    pub mu: BTreeMap<String, Q>,
    /// Max-norm of the stationarity vector at the reported multipliers.
    pub residual: Q,
    /// Whether some certificate within tolerance has α_0 > 0 (maximized
    /// exactly). Only meaningful when `status` is `Feasible`.
    pub alpha0_positive: bool,
}

struct System {
    /// Stationarity rows over [α_0, α_b.., α_{D,j}.., μ_1.., μ_d..]
    /// (μ columns carry the signed coefficient; split happens in the LP).
    rows: Vec<Vec<Q>>,
    n_alpha: usize,
    n_mu: usize,
    active_payoff: Vec<String>,
    active_nonneg: Vec<String>,
    dice: Vec<String>,
}

fn build_system(
    game: &DiceyGame,
    s: &GridStrategy,
    t: &Q,
    eps_act: &Q,
) -> Result<System> {
    validate_strategy_ok(game, s)?;
    let ix = GameIndex::new(game);
    let per = crate::eval::expectations_exact(game, s)?;
    // Feasibility of (λ, t) for the system itself.
    let mut violations = Vec::new();
    let neg = -eps_act.clone();
    for (b, e) in &per {
        if (e - t) < neg {
            violations.push(format!(
                "payoff constraint for Devil action '{b}' violated: E = {}, t = {}",
                q_to_string(e),
                q_to_string(t)
            ));
        }
    }
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    // Gradients: ∂E_b/∂λ_{D,j} is the slice vector v_{j,b} of die D.
    let mut profiles = Vec::new();
    for die in &ix.dice {
        profiles.push(slice_profile(game, s, die)?);
    }
    let active_b: Vec<usize> = ix
        .devil_actions
        .iter()
        .enumerate()
        .filter(|(_, b)| &(&per[*b] - t) <= eps_act)
        .map(|(i, _)| i)
        .collect();
    let mut active_nn: Vec<(usize, usize)> = Vec::new(); // (die index, piece 0-based)
    for (d, die) in ix.dice.iter().enumerate() {
        for (j, len) in s.cuts[die].iter().enumerate() {
            if len <= eps_act {
                active_nn.push((d, j));
            }
        }
    }
    let n_alpha = 1 + active_b.len() + active_nn.len();
    let n_mu = ix.dice.len();
    let width = n_alpha + n_mu;
    let mut rows = Vec::new();
    // t-coordinate row: α_0 − Σ α_b.
    let mut row = vec![Q::zero(); width];
    row[0] = Q::one();
    for (i, _) in active_b.iter().enumerate() {
        row[1 + i] = -Q::one();
    }
    rows.push(row);
    // One row per λ coordinate.
    for (d, die) in ix.dice.iter().enumerate() {
        for j in 0..s.cuts[die].len() {
            let mut row = vec![Q::zero(); width];
            for (i, &b) in active_b.iter().enumerate() {
                row[1 + i] = profiles[d].points[j].v[b].clone();
            }
            if let Some(pos) = active_nn.iter().position(|&(dd, jj)| dd == d && jj == j) {
                row[1 + active_b.len() + pos] = Q::one();
            }
            row[n_alpha + d] = Q::one();
            rows.push(row);
        }
    }
    Ok(System {
        rows,
        n_alpha,
        n_mu,
        active_payoff: active_b.iter().map(|&b| ix.devil_actions[b].clone()).collect(),
        active_nonneg: active_nn
            .iter()
            .map(|&(d, j)| format!("{}:{}", ix.dice[d], j + 1))
            .collect(),
        dice: ix.dice.clone(),
    })
}

/// LP over x = [α.., μ⁺.., μ⁻.., r, slacks..]: stationarity |row·x| ≤ r,
/// α_0 + Σα = 1, optionally r ≤ cap; minimizes `objective` (a vector over
/// the non-slack prefix).
fn solve_multiplier_lp(sys: &System, objective: &[Q], cap: Option<&Q>) -> Option<Vec<Q>> {
    let ns = sys.rows.len();
    let core = sys.n_alpha + 2 * sys.n_mu + 1; // α's, μ split, r
    let slacks = 2 * ns + usize::from(cap.is_some());
    let vars = core + slacks;
    let r_col = sys.n_alpha + 2 * sys.n_mu;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let expand = |row: &[Q]| -> Vec<Q> {
        // Signed μ column → μ⁺ coefficient, negated for μ⁻.
        let mut out = vec![Q::zero(); vars];
        out[..sys.n_alpha].clone_from_slice(&row[..sys.n_alpha]);
        for d in 0..sys.n_mu {
            out[sys.n_alpha + d] = row[sys.n_alpha + d].clone();
            out[sys.n_alpha + sys.n_mu + d] = -&row[sys.n_alpha + d];
        }
        out
    };
    for (i, row) in sys.rows.iter().enumerate() {
        let mut up = expand(row);
        up[r_col] = -Q::one();
        up[core + 2 * i] = Q::one();
        a.push(up);
        b.push(Q::zero());
        let mut down: Vec<Q> = expand(row).iter().map(|v| -v).collect();
        down[r_col] = -Q::one();
        down[core + 2 * i + 1] = Q::one();
        a.push(down);
        b.push(Q::zero());
    }
    let mut norm = vec![Q::zero(); vars];
    norm[..sys.n_alpha].fill(Q::one());
    a.push(norm);
    b.push(Q::one());
    if let Some(cap) = cap {
        let mut row = vec![Q::zero(); vars];
        row[r_col] = Q::one();
        row[core + 2 * ns] = Q::one();
        a.push(row);
        b.push(cap.clone());
    }
    let mut c = vec![Q::zero(); vars];
    c[..objective.len()].clone_from_slice(objective);
    match solve_lp(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

fn extract(sys: &System, x: &[Q]) -> FritzJohnCertificate {
    let alpha0 = x[0].clone();
    let alpha_payoff: BTreeMap<String, Q> = sys
        .active_payoff
        .iter()
        .enumerate()
        .map(|(i, b)| (b.clone(), x[1 + i].clone()))
        .collect();
    let alpha_nonneg: BTreeMap<String, Q> = sys
        .active_nonneg
        .iter()
        .enumerate()
        .map(|(i, key)| (key.clone(), x[1 + sys.active_payoff.len() + i].clone()))
        .collect();
    let mu: BTreeMap<String, Q> = sys
        .dice
        .iter()
        .enumerate()
        .map(|(d, die)| {
            (die.clone(), &x[sys.n_alpha + d] - &x[sys.n_alpha + sys.n_mu + d])
        })
        .collect();
    // Exact residual of the signed system at these multipliers, with the
    // vector laid out in system order.
    let mut signed = Vec::with_capacity(sys.n_alpha + sys.n_mu);
    signed.push(alpha0.clone());
    for (i, _) in sys.active_payoff.iter().enumerate() {
        signed.push(x[1 + i].clone());
    }
    for (i, _) in sys.active_nonneg.iter().enumerate() {
        signed.push(x[1 + sys.active_payoff.len() + i].clone());
    }
    for d in 0..sys.n_mu {
        signed.push(&x[sys.n_alpha + d] - &x[sys.n_alpha + sys.n_mu + d]);
    }
    let residual = sys
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&signed)
                .map(|(c, v)| c * v)
                .fold(Q::zero(), |acc, term| acc + term)
                .abs()
        })
        .max()
        .unwrap_or_else(Q::zero);
    // Rescale so α_0 + Σα + Σ|μ| = 1.
    let total = signed[..sys.n_alpha].iter().fold(Q::zero(), |acc, v| acc + v)
        + mu.values().map(|m| m.abs()).fold(Q::zero(), |acc, v| acc + v);
    let scale = if total.is_zero() { Q::one() } else { total };
    FritzJohnCertificate {
        status: CertificateStatus::Infeasible,
        alpha0: alpha0 / &scale,
        alpha_payoff: alpha_payoff.into_iter().map(|(k, v)| (k, v / &scale)).collect(),
        alpha_nonneg: alpha_nonneg.into_iter().map(|(k, v)| (k, v / &scale)).collect(),
        mu: mu.into_iter().map(|(k, v)| (k, v / &scale)).collect(),
        residual: residual / &scale,
        alpha0_positive: false,
    }
}

/// Checks the first-order conditions at the point (cuts of `s`, `t`).
///
/// Rejects points that violate the constraint system itself. Otherwise
/// reports the best multipliers: `Feasible` when the minimal stationarity
/// residual is ≤ `tol`, along with whether a certificate with α_0 > 0
/// exists at that tolerance.
pub fn certify_fritz_john(
    game: &DiceyGame,
    s: &GridStrategy,
    t: &Q,
    tol: f64,
) -> Result<FritzJohnCertificate> {
    let tol_q = q_from_f64(tol)
        .ok().filter(|q| q.is_positive())
        .ok_or_else(|| Error::Semantic("tolerance must be positive and finite".into()))?;
    let sys = build_system(game, s, t, &tol_q)?;
    // Phase A: minimize the residual.
    let mut obj = vec![Q::zero(); sys.n_alpha + 2 * sys.n_mu + 1];
    *obj.last_mut().unwrap() = Q::one();
    let x = solve_multiplier_lp(&sys, &obj, None)
        .ok_or_else(|| Error::Semantic("multiplier program unexpectedly unsolvable".into()))?;
    let r_col = sys.n_alpha + 2 * sys.n_mu;
    let min_residual = x[r_col].clone();
    if min_residual > tol_q {
        // Canonicalize: among residual-minimal multipliers, take the ones
        // with least total |μ| so the report carries no arbitrary vertex
        // artifacts from the first solve.
        let mut obj = vec![Q::zero(); sys.n_alpha + 2 * sys.n_mu + 1];
        obj[sys.n_alpha..sys.n_alpha + 2 * sys.n_mu].fill(Q::one());
        let x = solve_multiplier_lp(&sys, &obj, Some(&min_residual))
            .ok_or_else(|| Error::Semantic("multiplier program unexpectedly unsolvable".into()))?;
        let mut cert = extract(&sys, &x);
        cert.status = CertificateStatus::Infeasible;
        return Ok(cert);
    }
    // Phase B: among certificates within tolerance, maximize α_0.
    let mut obj = vec![Q::zero(); sys.n_alpha + 2 * sys.n_mu + 1];
    obj[0] = -Q::one();
    let x = solve_multiplier_lp(&sys, &obj, Some(&tol_q))
        .ok_or_else(|| Error::Semantic("multiplier program unexpectedly unsolvable".into()))?;
    let mut cert = extract(&sys, &x);
    cert.status = CertificateStatus::Feasible;
    cert.alpha0_positive = cert.alpha0.is_positive();
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_from_str;
    use crate::strategy::PlayerTable;

    fn q(s: &str) -> Q {
        q_from_str(s).unwrap()
    }

    fn one_player_pennies() -> (DiceyGame, GridStrategy) {
        let game = DiceyGame::from_json(
            r#"{
              "players": ["u"],
              "devil_actions": ["H", "T"],
              "actions": {"u": ["H", "T"]},
              "payoff": {
                "rules": [
                  {"when": {"u": "H", "devil": "H"}, "value": 1},
                  {"when": {"u": "T", "devil": "T"}, "value": 1}
                ],
                "default": 0
              },
              "dice": [{"id": "e", "access": ["u"]}]
            }"#,
        )
        .unwrap();
        let cuts = [("e".to_string(), vec![q("1/2"), q("1/2")])].into_iter().collect();
        let entries =
            [(vec![1], "H".to_string()), (vec![2], "T".to_string())].into_iter().collect();
        let tables = [(
            "u".to_string(),
            PlayerTable { dice: vec!["e".into()], entries },
        )]
        .into_iter()
        .collect();
        (game, GridStrategy { cuts, tables })
    }

    #[test]
    fn pennies_optimum_is_feasible_with_positive_alpha0() {
        let (game, s) = one_player_pennies();
        let cert = certify_fritz_john(&game, &s, &q("1/2"), 1e-6).unwrap();
        assert_eq!(cert.status, CertificateStatus::Feasible);
        assert!(cert.alpha0_positive);
        assert!(cert.residual <= q_from_f64(1e-6).unwrap());
        // The exact zero-residual solution is α_H = α_T = 1/4, α_0 = 1/2,
        // μ = −1/4, which the |μ|-normalization rescales by 5/4. Maximizing
        // α_0 may spend the residual allowance, so compare loosely.
        let near = |v: &Q, want: f64| (crate::rational::q_to_f64(v) - want).abs() < 1e-4;
        assert!(near(&cert.alpha0, 0.4), "alpha0 = {}", q_to_string(&cert.alpha0));
        assert!(near(&cert.alpha_payoff["H"], 0.2));
        assert!(near(&cert.alpha_payoff["T"], 0.2));
        assert!(near(&cert.mu["e"], -0.2));
        assert!(cert.alpha_nonneg.is_empty());
    }

    #[test]
    fn interior_point_has_no_certificate() {
        let (game, s) = one_player_pennies();
        let cert = certify_fritz_john(&game, &s, &q("1/4"), 1e-6).unwrap();
        assert_eq!(cert.status, CertificateStatus::Infeasible);
        // No active constraints: normalization forces α_0 = 1 while the
        // t-row demands α_0 = 0, so the residual is exactly 1.
        assert_eq!(cert.residual, Q::one());
        assert!(cert.mu.values().all(Zero::is_zero));
    }

    #[test]
    fn infeasible_point_is_rejected_with_violations() {
        let (game, s) = one_player_pennies();
        match certify_fritz_john(&game, &s, &q("3/5"), 1e-6) {
            Err(Error::Invalid(v)) => {
                assert_eq!(v.len(), 2);
                assert!(v[0].contains("Devil action"));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn triangular_optimum_certifies() {
        let game =
            DiceyGame::from_json(include_str!("../tests/data/triangular.json")).unwrap();
        let mut s =
            GridStrategy::from_json(&game, include_str!("../tests/data/thirds.json")).unwrap();
        let a = q_from_f64(crate::alpha()).unwrap();
        let rest = Q::one() - &a;
        for die in ["d1", "d2", "d3"] {
            s.cuts.insert(die.into(), vec![a.clone(), rest.clone()]);
        }
        let per = crate::eval::expectations_exact(&game, &s).unwrap();
        let t = per.values().min().unwrap().clone();
        let cert = certify_fritz_john(&game, &s, &t, 1e-6).unwrap();
        assert_eq!(cert.status, CertificateStatus::Feasible);
        assert!(cert.alpha0_positive, "alpha0 = {}", q_to_string(&cert.alpha0));
        assert_eq!(cert.alpha_payoff.len(), 2);
    }

    #[test]
    fn boundary_optimum_uses_nonneg_multipliers() {
        // Single Devil action paying 1 when u says H: the optimum pushes all
        // mass onto piece 1, so the nonnegativity of piece 2 is active and
        // must carry a positive multiplier for stationarity to close.
        let game = DiceyGame::from_json(
            r#"{
              "players": ["u"],
              "devil_actions": ["b"],
              "actions": {"u": ["H", "T"]},
              "payoff": {"rules": [{"when": {"u": "H"}, "value": 1}], "default": 0},
              "dice": [{"id": "e", "access": ["u"]}]
            }"#,
        )
        .unwrap();
        let cuts = [("e".to_string(), vec![Q::one(), Q::zero()])].into_iter().collect();
        let entries =
            [(vec![1], "H".to_string()), (vec![2], "T".to_string())].into_iter().collect();
        let tables = [(
            "u".to_string(),
            PlayerTable { dice: vec!["e".into()], entries },
        )]
        .into_iter()
        .collect();
        let s = GridStrategy { cuts, tables };
        let cert = certify_fritz_john(&game, &s, &Q::one(), 1e-6).unwrap();
        assert_eq!(cert.status, CertificateStatus::Feasible);
        assert!(cert.alpha0_positive);
        assert!(cert.alpha_nonneg["e:2"].is_positive());
    }

    #[test]
    fn non_optimal_boundary_point_fails() {
        // All mass on H with t = 0: E_T − t is active yet t can still grow,
        // so only the zero multiplier vector satisfies stationarity.
        let (game, mut s) = one_player_pennies();
        s.cuts.insert("e".into(), vec![Q::one(), Q::zero()]);
        let cert = certify_fritz_john(&game, &s, &q("0"), 1e-6).unwrap();
        assert_eq!(cert.status, CertificateStatus::Infeasible);
    }
}
