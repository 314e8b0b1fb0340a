//! Randomized and grid-based checks of the library's structural
//! invariants: distance metric laws, codebook constructions, conflict
//! counting against the closed form, cover validity, model accounting,
//! LP round trips, solver monotonicity, and the decoding pipeline
//! identities.

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ecoc::attack::{pgd_attack, AttackConfig, LossKind};
use ecoc::classify::{
    class_scores_from_probs, decode_hamming, make_gaussian_toy, predict, train, BinaryLearnerSpec,
    Dataset, Hypothesis, PredictMode, TrainedEcoc,
};
use ecoc::codebook::{generalized_hamming, Alphabet, Codebook};
use ecoc::conflict::{
    build_graph, classify_pairs, edge_clique_cover, infeasible_count_closed_form, merge_covers,
    partition_edges, validate_cover, ConflictGraph, UpperBound,
};
use ecoc::model::{
    build_ip2, build_ip3, model_stats, parse_lp, set_objective_distribution, ConLabel,
    TargetDistances, VarName,
};
use ecoc::solve::{bound_plotkin, brute_force, certify};

fn ternary_entries(k: usize, l: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop_oneof![Just(-1i8), Just(0i8), Just(1i8)], k * l)
}

fn binary_entries(k: usize, l: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop_oneof![Just(-1i8), Just(1i8)], k * l)
}

fn codebook_from_flat(k: usize, l: usize, entries: &[i8], alphabet: Alphabet) -> Codebook {
    let rows: Vec<Vec<i8>> = (0..k).map(|r| entries[r * l..(r + 1) * l].to_vec()).collect();
    Codebook::from_rows(rows, alphabet).expect("entries drawn from the alphabet")
}

// Exhaustive codes: full column count, structural validity, and exact
// equidistance of every row pair.
#[test]
fn exhaustive_codes_are_complete_valid_and_equidistant() {
    for k in 2..=10usize {
        let m = Codebook::exhaustive(k).unwrap();
        assert_eq!(m.n_columns(), (1usize << (k - 1)) - 1);
        assert!(m.validate().is_empty(), "k={k}");
        let expect = (1u64 << (k - 2).max(0)) as f64;
        let expect = if k == 2 { 1.0 } else { expect };
        for a in 0..k {
            for b in a + 1..k {
                assert_eq!(m.row_distance(a, b), expect, "k={k} rows {a},{b}");
            }
        }
    }
}

#[test]
fn one_vs_all_min_row_distance_is_two() {
    for k in 3..=12usize {
        let summary = Codebook::one_vs_all(k).unwrap().distance_summary();
        assert_eq!(summary.min_row_distance, 2.0, "k={k}");
    }
}

proptest! {
    // The distance is symmetric, bounded by the vector length, zero only
    // on equal sign patterns, and obeys the triangle inequality even with
    // zeros (each coordinate contributes 0, 1/2, or 1).
    #[test]
    fn distance_is_a_metric_up_to_zero_entries(
        len in 1usize..12,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<i8> {
            (0..len).map(|_| [-1i8, 0, 1][rng.random_range(0..3)]).collect()
        };
        let (u, v, w) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let duv = generalized_hamming(&u, &v);
        prop_assert!(duv >= 0.0 && duv <= len as f64);
        prop_assert_eq!(duv, generalized_hamming(&v, &u));
        // A zero coordinate is half-distant even from itself.
        let zeros = u.iter().filter(|&&e| e == 0).count() as f64;
        prop_assert_eq!(generalized_hamming(&u, &u), zeros / 2.0);
        let (duw, dvw) = (generalized_hamming(&u, &w), generalized_hamming(&v, &w));
        prop_assert!(duw <= duv + dvw + 1e-12);
    }

    // Same construction parameters, same matrix. Columns must outnumber
    // log2(k), or rows collide by pigeonhole and no draw can be valid.
    #[test]
    fn random_codebooks_are_reproducible(
        k in 6usize..=8,
        extra in 0usize..=2,
        sparse in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let l = k + extra;
        let alphabet = if sparse { Alphabet::Ternary } else { Alphabet::Binary };
        // Sparse draws zero out half the entries, so short columns often
        // miss a sign and need far more trials to find a valid draw.
        let trials = if sparse { 400 } else { 40 };
        let a = Codebook::random(k, l, alphabet, trials, seed).unwrap();
        let b = Codebook::random(k, l, alphabet, trials, seed).unwrap();
        prop_assert_eq!(a.to_csv_string(), b.to_csv_string());
    }

    // Filtering is idempotent, and filtering a column permutation keeps
    // exactly the permuted survivors.
    #[test]
    fn balance_filter_is_idempotent_and_permutation_stable(
        (k, l, entries) in (2usize..=7, 1usize..=10)
            .prop_flat_map(|(k, l)| (Just(k), Just(l), ternary_entries(k, l))),
        tau in 0u32..=3,
        perm_seed in any::<u64>(),
    ) {
        let m = codebook_from_flat(k, l, &entries, Alphabet::Ternary);
        let mut perm: Vec<usize> = (0..l).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let permuted = m.select_columns(&perm).unwrap();

        match m.filter_balanced(tau) {
            Err(_) => prop_assert!(permuted.filter_balanced(tau).is_err()),
            Ok(once) => {
                let twice = once.filter_balanced(tau).unwrap();
                prop_assert_eq!(once.to_csv_string(), twice.to_csv_string());

                let filtered_perm = permuted.filter_balanced(tau).unwrap();
                let survivors: Vec<Vec<i8>> = perm
                    .iter()
                    .map(|&c| m.column(c))
                    .filter(|col| {
                        let plus = col.iter().filter(|&&e| e == 1).count() as i64;
                        let minus = col.iter().filter(|&&e| e == -1).count() as i64;
                        (plus - minus).unsigned_abs() <= u64::from(tau)
                    })
                    .collect();
                let got: Vec<Vec<i8>> =
                    (0..filtered_perm.n_columns()).map(|c| filtered_perm.column(c)).collect();
                prop_assert_eq!(got, survivors);
            }
        }
    }
}

// Violating-pair counts match the closed form over the whole parameter
// range, and an independent entry-level recount agrees where affordable.
#[test]
fn pair_counts_match_closed_form_and_naive_recount() {
    for k in 4..=14usize {
        let m = Codebook::exhaustive(k).unwrap();
        let columns: Vec<Vec<i8>> = (0..m.n_columns()).map(|c| m.column(c)).collect();
        for rho in 1..=(k as u32 / 2) {
            let pc = classify_pairs(&m, rho, UpperBound::Inactive);
            let n = m.n_columns() as u64;
            assert_eq!(pc.n_pairs_total, n * (n - 1) / 2);
            assert_eq!(
                pc.infeasible_pairs.len() as u64,
                infeasible_count_closed_form(k, rho).unwrap(),
                "k={k} rho={rho}"
            );
            assert_eq!(pc.n_feasible, pc.n_pairs_total - pc.infeasible_pairs.len() as u64);
            if k <= 11 {
                let mut naive = 0u64;
                for s in 0..columns.len() {
                    for t in s + 1..columns.len() {
                        if generalized_hamming(&columns[s], &columns[t]) < f64::from(rho) {
                            naive += 1;
                        }
                    }
                }
                assert_eq!(naive, pc.infeasible_pairs.len() as u64, "k={k} rho={rho}");
                for &(s, t) in &pc.infeasible_pairs {
                    assert!(
                        generalized_hamming(&columns[s as usize], &columns[t as usize])
                            < f64::from(rho)
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Covers from the greedy heuristic are always valid and never larger
    // than the trivial all-edges cover; merging per-part covers of an
    // edge partition covers the whole graph.
    #[test]
    fn covers_and_merged_partitions_are_valid(
        n in 2usize..60,
        p in 0.0f64..0.2,
        seed in any::<u64>(),
        parts in 1usize..=8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = ConflictGraph::from_edges(n, edges).unwrap();

        let cover = edge_clique_cover(&g, seed);
        prop_assert!(validate_cover(&g, &cover).is_empty());
        prop_assert!(cover.cliques.len() <= g.n_edges().max(1));

        // Partitioning requires at least one edge per part.
        if g.n_edges() > 0 {
            let pieces = partition_edges(&g, parts.min(g.n_edges()), seed).unwrap();
            prop_assert_eq!(pieces.iter().map(ConflictGraph::n_edges).sum::<usize>(), g.n_edges());
            let covers: Vec<_> = pieces.iter().map(|part| edge_clique_cover(part, seed)).collect();
            let merged = merge_covers(&covers, &g).unwrap();
            prop_assert!(validate_cover(&g, &merged).is_empty());
        }
    }
}

// Per-pair column contributions enter link rows with coefficient one,
// and over a full exhaustive pool every row pair draws on exactly a
// quarter of the candidate space (in canonical form, 2^(k-2) columns).
#[test]
fn link_rows_have_unit_coefficients_summing_to_quarter_pool() {
    for k in 4..=8usize {
        let m = Codebook::exhaustive(k).unwrap();
        let cover = edge_clique_cover(&build_graph(&classify_pairs(&m, 2, UpperBound::Inactive)), 0);
        for model in [
            build_ip2(&m, 2 * k, 2, UpperBound::Inactive).unwrap(),
            build_ip3(&m, 2 * k, 2, UpperBound::Inactive, &cover).unwrap(),
        ] {
            let mut pairs_seen = 0usize;
            for c in &model.constraints {
                let ConLabel::Link(_, _) = c.label else { continue };
                pairs_seen += 1;
                let mut x_terms = 0usize;
                for &(v, coef) in &c.terms {
                    match model.variables[v].name {
                        VarName::X(_) => {
                            assert_eq!(coef, -1.0, "k={k}: columns contribute 0 or 1");
                            x_terms += 1;
                        }
                        _ => assert_eq!(coef, 1.0, "k={k}: auxiliary side of the link row"),
                    }
                }
                assert_eq!(x_terms, 1 << (k - 2), "k={k}");
            }
            assert_eq!(pairs_seen, k * (k - 1) / 2);
        }
    }
}

// Stats accounting: family breakdown sums to the total, and the pairwise
// formulation carries exactly one exclusion row per violating pair.
#[test]
fn model_stats_families_sum_and_pair_rows_match() {
    for k in 4..=6usize {
        let m = Codebook::exhaustive(k).unwrap();
        for rho in 1..=2u32 {
            let model = build_ip2(&m, 2 * k, rho, UpperBound::Inactive).unwrap();
            let stats = model_stats(&model);
            let b = &stats.breakdown;
            assert_eq!(
                b.budget + b.column_separation + b.and_linearization + b.distance_link + b.clique,
                stats.n_constraints
            );
            assert_eq!(
                b.column_separation as u64,
                infeasible_count_closed_form(k, rho).unwrap(),
                "k={k} rho={rho}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Writing a model to LP text and parsing it back is the identity on
    // the textual form and preserves the full structure.
    #[test]
    fn lp_round_trip_is_a_fixed_point(
        k in 4usize..=6,
        rho in 1u32..=2,
        clique_form in any::<bool>(),
        capped in any::<bool>(),
        fit in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let m = Codebook::exhaustive(k).unwrap();
        let upper = if capped {
            UpperBound::Value((k as u32 - rho) as f64)
        } else {
            UpperBound::Inactive
        };
        let base = if clique_form {
            let cover =
                edge_clique_cover(&build_graph(&classify_pairs(&m, rho, upper)), seed);
            build_ip3(&m, 2 * k, rho, upper, &cover).unwrap()
        } else {
            build_ip2(&m, 2 * k, rho, upper).unwrap()
        };
        let model = if fit {
            set_objective_distribution(&base, &TargetDistances::uniform(k, k as f64 / 2.0)).unwrap()
        } else {
            base
        };

        let text = model.to_lp_string();
        let back = parse_lp(&text, "round-trip.lp").unwrap();
        prop_assert_eq!(back.to_lp_string(), text);
        prop_assert_eq!(back.variables.len(), model.variables.len());
        prop_assert_eq!(back.constraints.len(), model.constraints.len());
        prop_assert_eq!(&back.provenance, &model.provenance);
        for (a, b) in back.constraints.iter().zip(&model.constraints) {
            prop_assert_eq!(a.sense, b.sense);
            prop_assert_eq!(a.rhs, b.rhs);
            prop_assert_eq!(&a.terms, &b.terms);
        }
    }
}

// Optimal separation never shrinks with a larger column budget and never
// grows with a stricter band; every oracle solution certifies and sits
// under both bounds.
#[test]
fn optimum_is_monotone_in_budget_and_band() {
    let m = Codebook::exhaustive(5).unwrap();
    for rho in 1..=2u32 {
        let mut last = 0.0f64;
        for l in 1..=10usize {
            let sol = brute_force(&m, l, rho, UpperBound::Inactive).unwrap();
            assert!(sol.objective_value >= last, "L={l} rho={rho}");
            assert!(sol.objective_value <= sol.best_bound);
            assert!(sol.best_bound <= bound_plotkin(5, l));
            let report = certify(&m, &sol.selected_columns, l, rho, UpperBound::Inactive, sol.objective_value);
            assert!(report.confirmed, "L={l} rho={rho}: {:?}", report.violations);
            last = sol.objective_value;
        }
    }
    for l in [4usize, 8] {
        let loose = brute_force(&m, l, 1, UpperBound::Inactive).unwrap();
        let strict = brute_force(&m, l, 2, UpperBound::Inactive).unwrap();
        assert!(strict.objective_value <= loose.objective_value, "L={l}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // With hard per-column decisions, raw-score maximization and Hamming
    // decoding are the same classifier, tie rules included.
    #[test]
    fn hard_decisions_make_scores_agree_with_hamming(
        (k, l, entries) in (2usize..=8, 1usize..=20)
            .prop_flat_map(|(k, l)| (Just(k), Just(l), binary_entries(k, l))),
        bits in prop::collection::vec(any::<bool>(), 20),
    ) {
        let m = codebook_from_flat(k, l, &entries, Alphabet::Binary);
        let r: Vec<f64> = bits[..l].iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let f: Vec<i8> = r.iter().map(|&p| if p > 0.5 { 1 } else { -1 }).collect();

        let scores = class_scores_from_probs(&m, &r, false);
        let mut best = 0usize;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        prop_assert_eq!(best as u32, decode_hamming(&m, &f).unwrap());
    }

    // Score mass balances column by column: each column hands out its
    // probability to the positive rows and the complement to the negative
    // rows, so the class total is a fixed linear form in r.
    #[test]
    fn raw_score_total_matches_column_sign_counts(
        (k, l, entries) in (2usize..=8, 1usize..=12)
            .prop_flat_map(|(k, l)| (Just(k), Just(l), binary_entries(k, l))),
        probs in prop::collection::vec(0.0f64..=1.0, 12),
    ) {
        let m = codebook_from_flat(k, l, &entries, Alphabet::Binary);
        let r = &probs[..l];
        let total: f64 = class_scores_from_probs(&m, r, false).iter().sum();
        let mut expect = 0.0;
        for (c, &rc) in r.iter().enumerate() {
            let plus = (0..k).filter(|&row| m.get(row, c) == 1).count() as f64;
            expect += plus * rc + (k as f64 - plus) * (1.0 - rc);
        }
        prop_assert!((total - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }

    // Raw scores live in [0, row support]; normalized scores in [0, 1].
    #[test]
    fn scores_respect_support_bounds(
        (k, l, entries) in (2usize..=8, 1usize..=12)
            .prop_flat_map(|(k, l)| (Just(k), Just(l), ternary_entries(k, l))),
        probs in prop::collection::vec(0.0f64..=1.0, 12),
    ) {
        let m = codebook_from_flat(k, l, &entries, Alphabet::Ternary);
        let r = &probs[..l];
        let raw = class_scores_from_probs(&m, r, false);
        let norm = class_scores_from_probs(&m, r, true);
        for i in 0..k {
            let support = (0..l).filter(|&c| m.get(i, c) != 0).count() as f64;
            prop_assert!(raw[i] >= -1e-12 && raw[i] <= support + 1e-12);
            prop_assert!(norm[i] >= -1e-12 && norm[i] <= 1.0 + 1e-12);
        }
    }
}

// All-zero hypotheses leave every column at probability exactly 1/2:
// encoding takes the tie branch to -1, Hamming distances tie across
// classes, and score argmaxes tie. Every tie resolves to class 0.
#[test]
fn prediction_ties_resolve_to_the_lowest_class() {
    let m = Codebook::one_vs_all(3).unwrap();
    let te = TrainedEcoc {
        hypotheses: (0..m.n_columns())
            .map(|_| Hypothesis::Logistic { weights: vec![0.0, 0.0], bias: 0.0 })
            .collect(),
        codebook: m,
        spec: BinaryLearnerSpec::default(),
    };
    let x = [0.3, -0.7];
    for mode in [PredictMode::Hamming, PredictMode::ScoresRaw, PredictMode::ScoresNormalized] {
        assert_eq!(predict(&te, &x, mode).unwrap(), 0, "{mode:?}");
    }

    // A duplicated codeword forces an exact distance tie at the decoder.
    let dup = Codebook::from_rows(
        vec![vec![1, -1, 1], vec![1, -1, 1], vec![-1, 1, 1]],
        Alphabet::Binary,
    )
    .unwrap();
    assert_eq!(decode_hamming(&dup, &[1, -1, 1]).unwrap(), 0);
    assert_eq!(decode_hamming(&dup, &[-1, 1, -1]).unwrap(), 2);
}

fn attacked_model() -> &'static (TrainedEcoc, Dataset) {
    static MODEL: OnceLock<(TrainedEcoc, Dataset)> = OnceLock::new();
    MODEL.get_or_init(|| {
        let ds = make_gaussian_toy(3, 12, 5, 3.0, 0.6).unwrap();
        let m = Codebook::one_vs_one(3).unwrap();
        let te = train(&ds, &m, &BinaryLearnerSpec::default(), 0).unwrap();
        (te, ds)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // The clean point always stays a candidate, so attacks never report
    // an accuracy above clean, and every perturbation stays in the ball.
    #[test]
    fn attacks_never_help_and_stay_inside_the_ball(
        epsilon in 0.0f64..=1.0,
        steps in 1usize..=8,
        margin in any::<bool>(),
        random_start in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let (te, ds) = attacked_model();
        let cfg = AttackConfig {
            epsilon,
            steps,
            loss: if margin { LossKind::Margin } else { LossKind::CrossEntropy },
            random_start,
            seed,
            ..AttackConfig::default()
        };
        let result = pgd_attack(te, ds, &cfg).unwrap();
        prop_assert!(result.adversarial_accuracy <= result.clean_accuracy + 1e-12);
        for pe in &result.per_example {
            prop_assert!(pe.perturbation_norm <= epsilon + 1e-9);
        }
    }
}
