mod common;

use common::*;
use densray_core::analogy::{intcos_scores, Space};
use densray_core::linalg::{dot, orthogonality_error};
use densray_core::linear::{fit_svm, logreg_gradient, logreg_objective, svm_objective, Dataset};
use densray_core::*;
use proptest::prelude::*;
use rand::Rng;

fn random_embeddings(n: usize, d: usize, seed: u64) -> Embeddings {
    let mut r = rng(seed);
    let rows: Vec<(String, Vec<f64>)> = (0..n)
        .map(|i| (format!("w{i}"), random_unit(d, &mut r)))
        .collect();
    Embeddings::from_pairs(&rows).unwrap().normalized().unwrap()
}

fn split_signal(n: usize, n_pos: usize) -> BinarySignal {
    BinarySignal::new(
        "s",
        (0..n_pos).map(|i| format!("w{i}")),
        (n_pos..n).map(|i| format!("w{i}")),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn word2vec_roundtrip(n in 1usize..12, d in 1usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rows: Vec<(String, Vec<f64>)> = (0..n)
            .map(|i| (format!("tök{i}"), (0..d).map(|_| r.random_range(-5.0..5.0)).collect()))
            .collect();
        let emb = Embeddings::from_pairs(&rows).unwrap();
        let mut buf = Vec::new();
        write_word2vec_text(&mut buf, &emb).unwrap();
        let back = read_word2vec_text(buf.as_slice(), None).unwrap();
        prop_assert_eq!(back.vocab().words(), emb.vocab().words());
        prop_assert!(back.matrix().matrix().max_abs_diff(emb.matrix().matrix()) <= 1e-6);
    }

    #[test]
    fn normalization_is_idempotent(n in 1usize..10, d in 1usize..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(0.1..3.0)).collect()).collect();
        let m = EmbeddingMatrix::new(Matrix::from_rows(&rows)).unwrap();
        let once = normalize_rows(m).unwrap();
        let twice = normalize_rows(once.clone()).unwrap();
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()) <= 1e-12);
    }

    #[test]
    fn nearest_ranks_whole_vocabulary(n in 1usize..20, d in 1usize..6, seed in any::<u64>()) {
        let emb = random_embeddings(n, d, seed);
        let q = random_unit(d, &mut rng(seed ^ 1));
        let hits = nearest(&emb, &q, &[], n).unwrap();
        let mut words: Vec<&str> = hits.iter().map(|h| h.0.as_str()).collect();
        prop_assert!(hits.windows(2).all(|w| w[0].1 >= w[1].1));
        words.sort_unstable();
        let mut vocab: Vec<&str> = emb.vocab().words().iter().map(String::as_str).collect();
        vocab.sort_unstable();
        prop_assert_eq!(words, vocab);
    }

    #[test]
    fn spectrum_matches_characteristic_polynomial(d in 1usize..=3, seed in any::<u64>()) {
        let m = random_symmetric(d, 10.0, &mut rng(seed));
        let eb = eig_symmetric(&SymmetricMatrix::new(m.clone()).unwrap()).unwrap();
        for (a, b) in eb.values.iter().zip(char_poly_eigenvalues(&m)) {
            prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace(d in 1usize..20, seed in any::<u64>()) {
        let m = random_symmetric(d, 5.0, &mut rng(seed));
        let eb = eig_symmetric(&SymmetricMatrix::new(m.clone()).unwrap()).unwrap();
        let sum: f64 = eb.values.iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-7 * (1.0 + m.trace().abs()));
        prop_assert!(eb.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn spectrum_is_rotation_invariant(d in 1usize..12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_symmetric(d, 3.0, &mut r);
        let q = random_orthogonal(d, &mut r);
        let rotated = q.matmul(&m).matmul(&q.transpose());
        let a = eig_symmetric(&SymmetricMatrix::new(m).unwrap()).unwrap();
        let b = eig_symmetric(&SymmetricMatrix::new(rotated).unwrap()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-7);
        }
    }

    #[test]
    fn densray_top_direction_attains_top_eigenvalue(n in 4usize..30, d in 2usize..8, seed in any::<u64>()) {
        let emb = random_embeddings(n, d, seed);
        let sig = split_signal(n, n / 2);
        let a = build_a_binary(&emb, &sig, WeightMode::default(), true).unwrap();
        let rot = densray(&emb, &sig.clone().into(), WeightMode::default()).unwrap();
        let q = rot.direction(0);
        let top = rot.eigenvalues().unwrap()[0];
        prop_assert!((a.quadratic_form(&q) - top).abs() <= 1e-7);
        let mut r = rng(seed ^ 7);
        for _ in 0..50 {
            let v = random_unit(d, &mut r);
            prop_assert!(a.quadratic_form(&q) >= a.quadratic_form(&v) - 1e-9);
        }
    }

    #[test]
    fn common_weight_scale_leaves_rotation(n in 4usize..30, d in 2usize..8, scale in 0.05f64..1.0, seed in any::<u64>()) {
        let emb = random_embeddings(n, d, seed);
        let sig: Signal = split_signal(n, n / 3 + 1).into();
        let base = densray(&emb, &sig, WeightMode::fixed(0.8, 0.6).unwrap()).unwrap();
        let scaled = densray(&emb, &sig, WeightMode::fixed(0.8 * scale, 0.6 * scale).unwrap()).unwrap();
        let vals = base.eigenvalues().unwrap();
        // directions are only determined up to sign and within degenerate eigenspaces
        let gap = vals[0] - vals[1];
        prop_assume!(gap.abs() > 1e-6 * (1.0 + vals[0].abs()));
        let (p, q) = (base.direction(0), scaled.direction(0));
        prop_assert!((dot(&p, &q).abs() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn fast_matrix_matches_pair_enumeration(n in 2usize..50, d in 1usize..16, n_pos in 1usize..49, seed in any::<u64>()) {
        let n_pos = n_pos.min(n - 1);
        let emb = random_embeddings(n, d, seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|i| emb.matrix().row(i).to_vec()).collect();
        let sig = split_signal(n, n_pos);
        let w = WeightMode::Averaged;
        let (np, nn) = (n_pos as f64, (n - n_pos) as f64);
        let (a_ne, a_eq) = (1.0 / (2.0 * np * nn), 1.0 / (np * np + nn * nn));
        let oracle = naive_binary_a(&rows[..n_pos], &rows[n_pos..], a_ne, a_eq);
        let fast = build_a_binary(&emb, &sig, w, true).unwrap();
        prop_assert!(fast.matrix().max_abs_diff(&oracle) <= 1e-9);

        let mut r = rng(seed ^ 3);
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let cs = ContinuousSignal::new("c", (0..n).map(|i| (format!("w{i}"), scores[i])).collect()).unwrap();
        let fast = build_a_continuous(&emb, &cs, true).unwrap();
        prop_assert!(fast.matrix().max_abs_diff(&naive_continuous_a(&rows, &scores)) <= 1e-9);
    }

    #[test]
    fn projection_preserves_distances(n in 2usize..15, d in 1usize..8, seed in any::<u64>()) {
        let emb = random_embeddings(n, d, seed);
        let q = random_orthogonal(d, &mut rng(seed ^ 5));
        let rot = Rotation::new(q, None, Method::Svm, "r").unwrap();
        let p = project(&emb, &rot).unwrap();
        for i in 0..n {
            for j in 0..n {
                let dist = |e: &Embeddings| {
                    let (a, b) = (e.matrix().row(i), e.matrix().row(j));
                    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
                };
                prop_assert!((dist(&emb) - dist(&p)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn completion_is_orthogonal(d in 1usize..20, seed in any::<u64>()) {
        let q = random_unit(d, &mut rng(seed));
        let m = complete_orthogonal(&q, seed).unwrap();
        prop_assert!(orthogonality_error(&m) <= 1e-8);
        for i in 0..d {
            prop_assert_eq!(m[(i, 0)], q[i]);
        }
    }

    #[test]
    fn tau_symmetry_and_negation(n in 2usize..60, levels in 2u32..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        prop_assume!(a.iter().any(|x| *x != a[0]));
        let t = kendall_tau(&a, &b).unwrap();
        prop_assert_eq!(t, kendall_tau(&b, &a).unwrap());
        let neg: Vec<f64> = b.iter().map(|x| -x).collect();
        prop_assert_eq!(kendall_tau(&a, &neg).unwrap(), -t);
        prop_assert_eq!(Some(t), brute_tau(&a, &b));
    }

    #[test]
    fn intcos_original_equals_scaled_raw_cosine(n in 3usize..20, d in 2usize..8, seed in any::<u64>()) {
        let emb = random_embeddings(n, d, seed);
        let q = random_unit(d, &mut rng(seed ^ 9));
        let scores = intcos_scores(&emb, 0, Some(&q), Space::Original);
        let coord: Vec<f64> = (0..n).map(|v| dot(emb.matrix().row(v), &q)).collect();
        let norm = densray_core::analogy::min_max(&coord);
        for v in 0..n {
            let raw = cosine(emb.matrix().row(0), emb.matrix().row(v)).unwrap();
            prop_assert!((scores[v] - norm[v] * raw).abs() <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn induction_is_rank_based(seed in any::<u64>()) {
        let p = densray_core::synthetic::planted_lexicon(40, 30, 6, 0.05, seed);
        let train = Lexicon::new("t", LexiconKind::Continuous, p.train.clone()).unwrap();
        let test = Lexicon::new("t", LexiconKind::Continuous, p.test.clone()).unwrap();
        let model = train_svr(&p.embeddings, &train.continuous_signal().unwrap(), &Hyperparams::default()).unwrap();
        let base = induce(&p.embeddings, Predictor::Model(&model), &train, &test).unwrap();
        // a strictly increasing transform of the predictions: positive rescale plus shift
        let stretched = LinearModel {
            weights: model.weights.iter().map(|w| 3.0 * w).collect(),
            bias: 3.0 * model.bias - 1.5,
            ..model.clone()
        };
        let other = induce(&p.embeddings, Predictor::Model(&stretched), &train, &test).unwrap();
        prop_assert_eq!(base.tau, other.tau);
        let ranks = |r: &InductionResult| r.predicted.iter().map(|x| x.1.exp()).collect::<Vec<_>>();
        let gold: Vec<f64> = test.entries().iter().map(|x| x.1).collect();
        prop_assert_eq!(kendall_tau(&gold, &ranks(&base)).unwrap(), base.tau);
    }
}

#[test]
fn trainers_are_deterministic() {
    let p = densray_core::synthetic::planted_direction(60, 8, 0.1, 2);
    let hp = Hyperparams {
        seed: 11,
        epochs: 20,
        ..Hyperparams::default()
    };
    let sig = p.binary_signal();
    let cs = p.continuous_signal();
    assert_eq!(
        train_svm(&p.embeddings, &sig, &hp).unwrap().weights,
        train_svm(&p.embeddings, &sig, &hp).unwrap().weights
    );
    assert_eq!(
        train_svr(&p.embeddings, &cs, &hp).unwrap().weights,
        train_svr(&p.embeddings, &cs, &hp).unwrap().weights
    );
    assert_eq!(
        train_logreg(&p.embeddings, &sig, &hp).unwrap().weights,
        train_logreg(&p.embeddings, &sig, &hp).unwrap().weights
    );
}

#[test]
fn hinge_objective_never_increases() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let d = 5;
        let rows: Vec<Vec<f64>> = (0..60).map(|_| random_unit(d, &mut r)).collect();
        let u = random_unit(d, &mut r);
        let targets: Vec<f64> = rows
            .iter()
            .map(|x| {
                if dot(x, &u) + r.random_range(-0.3..0.3) > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        assert_both_classes(&targets);
        let data = Dataset::new(rows, targets).unwrap();
        let hp = Hyperparams {
            seed,
            epochs: 40,
            ..Hyperparams::default()
        };
        let fit = fit_svm(&data, &hp).unwrap();
        for w in fit.objective_history.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12 * w[0].abs(),
                "seed {seed}: {} -> {}",
                w[0],
                w[1]
            );
        }
        let last = *fit.objective_history.last().unwrap();
        let direct = svm_objective(&data, &fit.weights, fit.bias, hp.c, hp.balanced);
        assert!((last - direct).abs() <= 1e-9 * (1.0 + direct));
    }
}

fn assert_both_classes(t: &[f64]) {
    assert!(t.contains(&1.0) && t.contains(&-1.0));
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut r = rng(5);
    for trial in 0..10 {
        let d = 4;
        let rows: Vec<Vec<f64>> = (0..30).map(|_| random_unit(d, &mut r)).collect();
        let targets: Vec<f64> = (0..30)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let data = Dataset::new(rows, targets).unwrap();
        let hp = Hyperparams {
            c: 0.5 + trial as f64,
            balanced: trial % 2 == 1,
            ..Hyperparams::default()
        };
        let w: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let b = r.random_range(-1.0..1.0);
        let (gw, gb) = logreg_gradient(&data, &w, b, &hp);
        let h = 1e-6;
        let check = |analytic: f64, numeric: f64| {
            let scale = analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(
                (analytic - numeric).abs() / scale <= 1e-5,
                "{analytic} vs {numeric}"
            );
        };
        for i in 0..d {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += h;
            wm[i] -= h;
            let num = (logreg_objective(&data, &wp, b, &hp) - logreg_objective(&data, &wm, b, &hp))
                / (2.0 * h);
            check(gw[i], num);
        }
        let num = (logreg_objective(&data, &w, b + h, &hp)
            - logreg_objective(&data, &w, b - h, &hp))
            / (2.0 * h);
        check(gb, num);
    }
}

#[test]
fn planted_directions_agree_pairwise() {
    let p = densray_core::synthetic::planted_direction(200, 20, 0.05, 1);
    let hp = Hyperparams::default();
    let sig = p.binary_signal();
    let unit = |w: &[f64]| {
        let n = dot(w, w).sqrt();
        w.iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let dirs = [
        densray(&p.embeddings, &sig.clone().into(), WeightMode::default())
            .unwrap()
            .direction(0),
        unit(&train_svm(&p.embeddings, &sig, &hp).unwrap().weights),
        unit(
            &train_svr(&p.embeddings, &p.continuous_signal(), &hp)
                .unwrap()
                .weights,
        ),
        unit(&train_logreg(&p.embeddings, &sig, &hp).unwrap().weights),
    ];
    for i in 0..dirs.len() {
        for j in 0..i {
            assert!(dot(&dirs[i], &dirs[j]).abs() >= 0.95);
        }
    }
}
