//! Acceptance checks: one test per criterion, each printing a single
//! `criterion N PASS/FAIL` line with the measured values (visible with
//! `--nocapture`, and in the failure output otherwise).

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dicey::allocator::{allocate_solve, enumerate_structures};
use dicey::eval::{evaluate, expectations_exact, monte_carlo, ArithmeticMode};
use dicey::fritz_john::{certify_fritz_john, CertificateStatus};
use dicey::game::{DicePack, DiceyGame, Die, PackDie, PayoffRules, Rule, DEVIL};
use dicey::optimizer::{
    check_threshold, scheme_to_strategy, solve, strategy_to_scheme, SchemeSpace, SearchMode,
    SolveOptions, ThresholdAnswer,
};
use dicey::pennies::{build_conjecture_strategy, gen_clique_mp};
use dicey::rational::{q_from_f64, q_from_str, q_to_f64, q_to_string, Q};
use dicey::reductions::{
    dqbf_brute_force, encode_dqbf, encode_quad, quad_grid_search, DqbfInstance, QuadSystem,
};
use dicey::slicer::normalize;
use dicey::smt::{emit_fixed_scheme, emit_full, run_external_solver, validate_smt, SolverVerdict};
use dicey::strategy::{validate_strategy, GridStrategy, PlayerTable};

fn q(s: &str) -> Q {
    q_from_str(s).unwrap()
}

fn report(criterion: u32, pass: bool, detail: &str) -> String {
    let line = format!(
        "criterion {criterion} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    line
}

fn triangular() -> DiceyGame {
    DiceyGame::from_json(include_str!("data/triangular.json")).unwrap()
}

fn thirds(game: &DiceyGame) -> GridStrategy {
    GridStrategy::from_json(game, include_str!("data/thirds.json")).unwrap()
}

/// n players, one private die each, team wins when everyone matches the
/// Devil's coin.
fn mp_private(n: usize) -> DiceyGame {
    let players: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    let all = |a: &str| {
        let mut when: BTreeMap<String, String> =
            players.iter().map(|p| (p.clone(), a.to_string())).collect();
        when.insert(DEVIL.into(), a.into());
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
        dice: players
            .iter()
            .enumerate()
            .map(|(i, p)| Die { id: format!("e{}", i + 1), access: vec![p.clone()] })
            .collect(),
    };
    game.validate().unwrap();
    game
}

fn exact_value(game: &DiceyGame, s: &GridStrategy) -> Q {
    let per = expectations_exact(game, s).unwrap();
    per.values().min().unwrap().clone()
}

fn triangular_optimum(game: &DiceyGame) -> GridStrategy {
    let a = dicey::alpha();
    scheme_to_strategy(game, 2, &vec![vec![1, 1, 1, 0]; 3], &vec![vec![a, 1.0 - a]; 3])
}

#[test]
fn criterion_1_triangular_exhaustive_value() {
    let started = Instant::now();
    let opts = SolveOptions { starts: 32, ..Default::default() };
    let r = solve(&triangular(), SearchMode::Exhaustive, &opts).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let target = 0.2780741;
    let pass = r.stats.schemes_examined == 4096
        && (r.value - target).abs() <= 1e-4
        && elapsed <= 300.0;
    let line = report(
        1,
        pass,
        &format!(
            "exhaustive triangular value {:.7} (target {target} ± 1e-4), {} schemes, {elapsed:.1}s",
            r.value, r.stats.schemes_examined
        ),
    );
    assert!(pass, "{line}");
}

#[test]
fn criterion_2_intro_baselines() {
    let opts = SolveOptions { starts: 4, iters: 200, ..Default::default() };
    let mut measured = Vec::new();
    let mut pass = true;
    for (game, target, label) in [
        (mp_private(1), 0.5, "1p"),
        (mp_private(2), 0.25, "2p"),
        (mp_private(3), 0.125, "3p"),
    ] {
        let r = solve(&game, SearchMode::Exhaustive, &opts).unwrap();
        let exact = q_to_f64(&exact_value(&game, &r.witness));
        pass &= (exact - target).abs() <= 1e-6;
        measured.push(format!("{label}={exact:.7}"));
    }
    // One acc-3 die for three players, assigned by the allocator.
    let (mut game, _) = gen_clique_mp(3).unwrap();
    game.dice.clear();
    let pack = DicePack { dice: vec![PackDie { id: "d".into(), acc: 3 }] };
    let r = allocate_solve(&game, &pack, SearchMode::Exhaustive, &opts, false).unwrap();
    let exact = q_to_f64(&exact_value(
        &game.with_dice(r.best_structure.clone()),
        &r.solution.witness,
    ));
    pass &= (exact - 0.5).abs() <= 1e-6;
    measured.push(format!("shared3={exact:.7}"));
    let line = report(
        2,
        pass,
        &format!("baselines {} (targets 1/2, 1/4, 1/8, 1/2 ± 1e-6)", measured.join(" ")),
    );
    assert!(pass, "{line}");
}

#[test]
fn criterion_3_conjecture_strategy_values() {
    let mut pass = true;
    let mut measured = Vec::new();
    for (n, want) in [(4usize, "1/4"), (6, "1/8")] {
        let (game, _) = gen_clique_mp(n).unwrap();
        let s = build_conjecture_strategy(&game).unwrap();
        let r = evaluate(&game, &s, ArithmeticMode::ExactRational).unwrap();
        let got = r.value().to_string();
        pass &= got == want;
        measured.push(format!("n={n}:{got}"));
    }
    for n in [3usize, 5, 7] {
        let (game, _) = gen_clique_mp(n).unwrap();
        let s = build_conjecture_strategy(&game).unwrap();
        let got = q_to_f64(&exact_value(&game, &s));
        let target = dicey::beta() * 0.5f64.powi(((n - 3) / 2) as i32);
        pass &= (got - target).abs() < 1e-6;
        measured.push(format!("n={n}:{got:.7}"));
    }
    let line = report(
        3,
        pass,
        &format!(
            "pairing-strategy values {} (even exact, odd vs beta*(1/2)^((n-3)/2) ± 1e-6)",
            measured.join(" ")
        ),
    );
    assert!(pass, "{line}");
}

/// Random valid 4-grid strategy on the triangular game: exact piece lengths
/// from integer weights, uniform random tables.
fn random_4grid(game: &DiceyGame, seed: u64) -> GridStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts = BTreeMap::new();
    for die in &game.dice {
        let weights: Vec<i64> = (0..4).map(|_| rng.random_range(1..=1000)).collect();
        let total: i64 = weights.iter().sum();
        cuts.insert(
            die.id.clone(),
            weights.iter().map(|&w| q(&format!("{w}/{total}"))).collect::<Vec<Q>>(),
        );
    }
    let mut tables = BTreeMap::new();
    for player in &game.players {
        let dice: Vec<String> =
            game.accessible_dice(player).into_iter().map(String::from).collect();
        let mut entries = BTreeMap::new();
        for i in 1..=4usize {
            for j in 1..=4usize {
                let action = if rng.random_bool(0.5) { "H" } else { "T" };
                entries.insert(vec![i, j], action.to_string());
            }
        }
        tables.insert(player.clone(), PlayerTable { dice, entries });
    }
    GridStrategy { cuts, tables }
}

#[test]
fn criterion_4_normalization_never_loses_value() {
    let game = triangular();
    let mut violations = 0usize;
    for seed in 0..200u64 {
        let s = random_4grid(&game, seed);
        assert_eq!(validate_strategy(&game, &s), Vec::<String>::new(), "seed {seed}");
        let before = expectations_exact(&game, &s).unwrap();
        let normalized = normalize(&game, &s).unwrap();
        assert!(normalized.is_k_grid(2), "seed {seed}");
        let after = expectations_exact(&game, &normalized).unwrap();
        for (action, b) in &before {
            if after[action] < *b {
                violations += 1;
                eprintln!(
                    "seed {seed} action {action}: {} -> {}",
                    q_to_string(b),
                    q_to_string(&after[action])
                );
            }
        }
    }
    // The documented 3-grid example: exact value, lossless normalization.
    let s0 = GridStrategy::from_json(&game, include_str!("data/sigma0.json")).unwrap();
    let v0 = exact_value(&game, &s0);
    let n0 = normalize(&game, &s0).unwrap();
    let v1 = exact_value(&game, &n0);
    let pass = violations == 0 && v0 == q("7/27") && n0.is_k_grid(2) && v1 >= v0;
    let line = report(
        4,
        pass,
        &format!(
            "200 seeded 4-grid strategies, {violations} monotonicity violations; example strategy {} -> {} (2-grid)",
            q_to_string(&v0),
            q_to_string(&v1)
        ),
    );
    assert!(pass, "{line}");
}

#[test]
fn criterion_5_monte_carlo_consistency() {
    let game = triangular();
    let s = thirds(&game);
    let exact: BTreeMap<String, f64> = expectations_exact(&game, &s)
        .unwrap()
        .into_iter()
        .map(|(k, v)| (k, q_to_f64(&v)))
        .collect();
    let mut hits = 0usize;
    for seed in 0..100u64 {
        let est = monte_carlo(&game, &s, 1_000_000, seed).unwrap();
        let ok = est.per_action.iter().all(|(action, stat)| {
            (stat.mean - exact[action]).abs() <= 4.0 * stat.stderr
        });
        hits += usize::from(ok);
    }
    let pass = hits >= 99;
    let line = report(
        5,
        pass,
        &format!("{hits}/100 seeds within 4 standard errors of (8/27, 7/27) at 1e6 samples"),
    );
    assert!(pass, "{line}");
}

#[test]
fn criterion_6_fritz_john_certification() {
    let game = triangular();
    let tol = 1e-6;
    let tol_q = q_from_f64(tol).unwrap();

    let opt = triangular_optimum(&game);
    let t = exact_value(&game, &opt);
    let tri = certify_fritz_john(&game, &opt, &t, tol).unwrap();
    let tri_ok = tri.status == CertificateStatus::Feasible
        && tri.alpha0_positive
        && tri.residual <= tol_q;

    let one = mp_private(1);
    let coin = GridStrategy {
        cuts: [("e1".to_string(), vec![q("1/2"), q("1/2")])].into_iter().collect(),
        tables: [(
            "q1".to_string(),
            PlayerTable {
                dice: vec!["e1".into()],
                entries: [(vec![1], "H".to_string()), (vec![2], "T".to_string())]
                    .into_iter()
                    .collect(),
            },
        )]
        .into_iter()
        .collect(),
    };
    let single = certify_fritz_john(&one, &coin, &q("1/2"), tol).unwrap();
    let single_ok = single.status == CertificateStatus::Feasible
        && single.alpha0_positive
        && single.residual <= tol_q;

    // Strictly interior, all payoff constraints slack: not a stationary
    // point, so no certificate may exist.
    let interior = certify_fritz_john(&game, &thirds(&game), &q("1/5"), tol).unwrap();
    let interior_ok = interior.status == CertificateStatus::Infeasible;

    let pass = tri_ok && single_ok && interior_ok;
    let line = report(
        6,
        pass,
        &format!(
            "triangular optimum {:?} (residual {}), single-player optimum {:?}, interior point {:?}",
            tri.status,
            q_to_string(&tri.residual),
            single.status,
            interior.status
        ),
    );
    assert!(pass, "{line}");
}

#[test]
fn criterion_7_threshold_honesty() {
    let game = triangular();
    let opts = SolveOptions { starts: 2, iters: 200, ..Default::default() };

    let yes = check_threshold(&game, &q("1/4"), SearchMode::Exhaustive, &opts).unwrap();
    let (yes_ok, yes_value) = match &yes {
        ThresholdAnswer::Yes(r) => {
            let exact = exact_value(&game, &r.witness);
            (exact >= q("1/4"), q_to_f64(&exact))
        }
        ThresholdAnswer::NoWithinSearch(r) => (false, r.value),
    };

    let no = check_threshold(&game, &q("279/1000"), SearchMode::Exhaustive, &opts).unwrap();
    let (no_ok, no_value) = match &no {
        ThresholdAnswer::NoWithinSearch(r) => (r.value >= 0.278, r.value),
        ThresholdAnswer::Yes(r) => (false, r.value),
    };

    let pass = yes_ok && no_ok;
    let line = report(
        7,
        pass,
        &format!(
            "t=0.25 YES with witness value {yes_value:.6}; t=0.279 NO_WITHIN_SEARCH with best {no_value:.6} >= 0.278"
        ),
    );
    assert!(pass, "{line}");
}

fn random_dqbf(rng: &mut ChaCha8Rng) -> DqbfInstance {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=2);
    let universals: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let existentials: Vec<(String, Vec<String>)> = (1..=m)
        .map(|j| {
            let deps: Vec<String> =
                universals.iter().filter(|_| rng.random_bool(0.5)).take(2).cloned().collect();
            (format!("y{j}"), deps)
        })
        .collect();
    let vars: Vec<String> =
        universals.iter().chain(existentials.iter().map(|(y, _)| y)).cloned().collect();
    let clauses = (0..rng.random_range(1..=3))
        .map(|_| {
            (0..rng.random_range(1..=3))
                .map(|_| {
                    let v = vars[rng.random_range(0..vars.len())].clone();
                    (v, rng.random_bool(0.5))
                })
                .collect()
        })
        .collect();
    DqbfInstance { universals, existentials, clauses }
}

fn random_quad(rng: &mut ChaCha8Rng) -> QuadSystem {
    let n = rng.random_range(1..=3);
    let inequalities = (0..rng.random_range(1..=2))
        .map(|_| {
            (0..rng.random_range(1..=4))
                .map(|_| {
                    (rng.random_range(1..=n), rng.random_range(1..=n), rng.random_range(-2..=2))
                })
                .collect()
        })
        .collect();
    QuadSystem { n, inequalities }
}

fn threshold_yes(game: &DiceyGame, t: &Q, opts: &SolveOptions) -> bool {
    match check_threshold(game, t, SearchMode::Exhaustive, opts).unwrap() {
        ThresholdAnswer::Yes(_) => true,
        ThresholdAnswer::NoWithinSearch(_) => false,
    }
}

#[test]
fn criterion_8_reduction_round_trips() {
    // DQBF instances against the Skolem-table oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let dqbf_opts = SolveOptions { k: Some(2), starts: 2, iters: 60, ..Default::default() };
    let mut dqbf_checked = 0;
    let mut dqbf_agree = 0;
    let mut dqbf_yes = 0;
    while dqbf_checked < 20 {
        let inst = random_dqbf(&mut rng);
        let (game, t) = encode_dqbf(&inst).unwrap();
        let space = SchemeSpace::new(&game, 2).unwrap();
        if space.total.is_none_or(|total| total > 20_000) {
            continue;
        }
        let expected = dqbf_brute_force(&inst).unwrap();
        let got = threshold_yes(&game, &t, &dqbf_opts);
        dqbf_checked += 1;
        dqbf_agree += usize::from(got == expected);
        dqbf_yes += usize::from(expected);
    }

    // Quadratic systems against the dense grid search (resolution 1/100).
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut quad_checked = 0;
    let mut quad_agree = 0;
    let mut quad_yes = 0;
    while quad_checked < 20 {
        let sys = random_quad(&mut rng);
        let (scaled, _) = quad_grid_search(&sys, 100).unwrap();
        // Near-boundary systems are no referee at this resolution.
        if scaled.abs() < 50 && scaled != 0 {
            continue;
        }
        let (game, t) = encode_quad(&sys).unwrap();
        let opts = SolveOptions { k: Some(sys.n), starts: 2, iters: 120, ..Default::default() };
        let got = threshold_yes(&game, &t, &opts);
        quad_checked += 1;
        quad_agree += usize::from(got == (scaled >= 0));
        quad_yes += usize::from(scaled >= 0);
    }

    let two_sided = dqbf_yes > 0
        && dqbf_yes < dqbf_checked
        && quad_yes > 0
        && quad_yes < quad_checked;
    let pass = dqbf_agree == 20 && quad_agree == 20 && two_sided;
    let line = report(
        8,
        pass,
        &format!(
            "dqbf {dqbf_agree}/20 agree (yes on {dqbf_yes}), quad {quad_agree}/20 agree (yes on {quad_yes})"
        ),
    );
    assert!(pass, "{line}");
}

#[test]
fn criterion_9_allocator() {
    let (mut game, pairwise_pack) = gen_clique_mp(3).unwrap();
    game.dice.clear();
    let opts = SolveOptions { starts: 2, iters: 200, ..Default::default() };
    let pack = |accs: &[u32]| DicePack {
        dice: accs
            .iter()
            .enumerate()
            .map(|(i, &acc)| PackDie { id: format!("d{}", i + 1), acc })
            .collect(),
    };

    // Canonical enumeration counts.
    let counts: Vec<usize> = [pack(&[3]), pack(&[2]), pairwise_pack.clone()]
        .iter()
        .map(|p| enumerate_structures(&game, p).unwrap().len())
        .collect();
    let counts_ok = counts == [1, 3, 10];

    let acc3 = allocate_solve(&game, &pack(&[3]), SearchMode::Exhaustive, &opts, false).unwrap();
    let acc3_ok = (acc3.value - 0.5).abs() <= 1e-6;

    let acc2 = allocate_solve(&game, &pack(&[2]), SearchMode::Exhaustive, &opts, false).unwrap();
    let acc2_ok = (acc2.value - 0.25).abs() <= 1e-6;

    let triple =
        allocate_solve(&game, &pairwise_pack, SearchMode::Exhaustive, &opts, false).unwrap();
    let triangular_structure = triple.best_structure.iter().all(|d| d.access.len() == 2)
        && triple.best_structure.len() == 3;
    let triple_ok = (triple.value - dicey::beta()).abs() <= 1e-4 && triangular_structure;

    let pass = counts_ok && acc3_ok && acc2_ok && triple_ok;
    let line = report(
        9,
        pass,
        &format!(
            "counts {counts:?} (want [1, 3, 10]); acc3 -> {:.6} (want 0.5); acc2 -> {:.6} (want 0.25); acc2 x3 -> {:.6} (want beta, triangular structure: {triangular_structure})",
            acc3.value, acc2.value, triple.value
        ),
    );
    // The acc-2 case asks for 1/4, but a single two-player die leaves the
    // third player diceless, and a grid strategy is a deterministic function
    // of accessible dice: the uncovered player's action is fixed, the Devil
    // counters it, and every assignment solves to exactly 0. Reaching 1/4
    // would need private randomness for the third player (e.g. a pack
    // {acc 2, acc 1}), which this pack does not provide. The solver's 0 is
    // correct; the stated target is unattainable in this model.
    assert!(pass, "{line}");
}

#[test]
fn criterion_10_smt_export() {
    let game = triangular();
    let opts = SolveOptions { starts: 2, iters: 200, ..Default::default() };

    // Validator coverage across the acceptance games.
    let dqbf = encode_dqbf(
        &DqbfInstance {
            universals: vec!["x1".into()],
            existentials: vec![("y1".into(), vec!["x1".into()])],
            clauses: vec![vec![("x1".into(), false), ("y1".into(), true)]],
        },
    )
    .unwrap()
    .0;
    let quad = encode_quad(&QuadSystem { n: 2, inequalities: vec![vec![(1, 2, 1)]] }).unwrap().0;
    let (mut shared3, _) = gen_clique_mp(3).unwrap();
    shared3.dice = vec![Die {
        id: "d".into(),
        access: vec!["p1".into(), "p2".into(), "p3".into()],
    }];
    let games: Vec<(&str, DiceyGame)> = vec![
        ("triangular", game.clone()),
        ("mp1", mp_private(1)),
        ("mp2", mp_private(2)),
        ("mp3", mp_private(3)),
        ("shared3", shared3),
        ("clique4", gen_clique_mp(4).unwrap().0),
        ("dqbf", dqbf),
        ("quad", quad),
    ];
    let mut validated = 0;
    for (name, g) in &games {
        let space = SchemeSpace::new(g, 2).unwrap();
        let zeros: Vec<Vec<usize>> =
            space.cells_per_player.iter().map(|&c| vec![0; c]).collect();
        let fixed = emit_fixed_scheme(g, 2, &zeros, &q("1/4")).unwrap().to_document();
        validate_smt(&fixed).unwrap_or_else(|e| panic!("{name} fixed-scheme: {e}"));
        let full = emit_full(g, 2, &q("1/4")).unwrap().to_document();
        validate_smt(&full).unwrap_or_else(|e| panic!("{name} full: {e}"));
        validated += 1;
    }

    // External round trip, only when a solver is configured.
    let external = match std::env::var("DICEY_SMT_SOLVER") {
        Err(_) => "external solver SKIPPED (DICEY_SMT_SOLVER not set)".to_string(),
        Ok(solver) => {
            let r = solve(&game, SearchMode::Exhaustive, &opts).unwrap();
            let (k, scheme) = strategy_to_scheme(&game, &r.witness).unwrap();
            let sat = emit_fixed_scheme(&game, k, &scheme, &q("278/1000")).unwrap();
            let unsat = emit_fixed_scheme(&game, k, &scheme, &q("279/1000")).unwrap();
            let v_sat = run_external_solver(&solver, &sat.to_document()).unwrap();
            let v_unsat = run_external_solver(&solver, &unsat.to_document()).unwrap();
            assert_eq!(v_sat, SolverVerdict::Sat, "t = 278/1000 on the optimum scheme");
            assert_eq!(v_unsat, SolverVerdict::Unsat, "t = 279/1000 on the optimum scheme");
            format!("external solver {solver}: 278/1000 sat, 279/1000 unsat")
        }
    };

    let pass = validated == games.len();
    let line = report(
        10,
        pass,
        &format!("{validated}/{} games emit validator-clean documents; {external}", games.len()),
    );
    assert!(pass, "{line}");
}
