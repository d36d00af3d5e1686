mod common;

use common::*;
use credal_core::hartley::generalized_hartley;
use credal_core::hull::{reduce_with_certificates, HullOptions, MemberCertificate};
use credal_core::metrics::{auroc_auprc, ece, ScoreKind, ScoredSample};
use credal_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ensemble(rows: &[Vec<f64>]) -> PredictiveEnsemble {
    PredictiveEnsemble::from_rows(rows.iter().cloned(), 1e-9).unwrap()
}

fn credal(rows: &[Vec<f64>]) -> CredalSet {
    CredalSet::from_ensemble(&ensemble(rows)).unwrap()
}

fn rows_from(seed: u64, k: usize, s: usize) -> Vec<Vec<f64>> {
    random_rows(&mut ChaCha8Rng::seed_from_u64(seed), k, s)
}

fn subset_of(bits: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|j| bits >> j & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entropy_is_permutation_invariant_and_bounded(seed in any::<u64>(), k in 2usize..12, rot in 0usize..12) {
        let p = rows_from(seed, k, 1).remove(0);
        let mut q = p.clone();
        q.rotate_left(rot % k);
        let hp = entropy(&CategoricalPmf::new(p.clone()).unwrap());
        let hq = entropy(&CategoricalPmf::new(q.clone()).unwrap());
        prop_assert!((hp - hq).abs() < 1e-12);
        prop_assert!(hp >= 0.0 && hp <= (k as f64).log2() + 1e-12);
        prop_assert!((measure_entropy(&p).unwrap() - measure_entropy(&q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn validate_is_idempotent(seed in any::<u64>(), k in 2usize..12, noise in -1e-10f64..1e-10) {
        let mut raw = rows_from(seed, k, 1).remove(0);
        raw[0] += noise;
        let once = validate_pmf(raw, 1e-9).unwrap();
        let twice = validate_pmf(once.probs().to_vec(), 1e-9).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn posterior_predictive_is_monotone(counts in prop::collection::vec(0.0f64..100.0, 2..8), j in 0usize..8, bump in 0.01f64..10.0) {
        let j = j % counts.len();
        let base = posterior_predictive(&VirtualCounts::new(counts.clone()).unwrap()).unwrap();
        let mut more = counts;
        more[j] += bump;
        let bumped = posterior_predictive(&VirtualCounts::new(more).unwrap()).unwrap();
        prop_assert!(bumped.get(j) > base.get(j));
        prop_assert!((bumped.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_probability_is_superadditive(seed in any::<u64>(), k in 2usize..9, s in 1usize..6, a in any::<u32>(), b in any::<u32>()) {
        let cs = credal(&rows_from(seed, k, s));
        let full = (1u32 << k) - 1;
        let a = a & full;
        let b = b & full & !a;
        let la = lower_probability(&cs, &subset_of(a, k)).unwrap();
        let lb = lower_probability(&cs, &subset_of(b, k)).unwrap();
        let lab = lower_probability(&cs, &subset_of(a | b, k)).unwrap();
        prop_assert!(lab >= la + lb - 1e-12);
        // Conjugacy and the singleton-sum bound.
        let up = upper_probability(&cs, &subset_of(a, k)).unwrap();
        let lc = lower_probability(&cs, &subset_of(full & !a, k)).unwrap();
        if a != 0 {
            prop_assert_eq!(up, 1.0 - lc);
        }
        prop_assert!(ihdr_lower_bound(&cs, &subset_of(a, k)).unwrap() <= la + 1e-12);
    }

    #[test]
    fn reduction_is_idempotent_and_certified(seed in any::<u64>(), k in 2usize..8, s in 1usize..9) {
        let rows = rows_from(seed, k, s);
        let e = ensemble(&rows);
        let red = reduce_with_certificates(&e, HullOptions::default()).unwrap();
        let again = reduce_to_extremes(&red.credal_set.to_ensemble(), HullOptions::default()).unwrap();
        prop_assert_eq!(again.extremes(), red.credal_set.extremes());
        for (i, cert) in red.certificates.iter().enumerate() {
            match cert {
                MemberCertificate::Interior { weights, residual } => {
                    prop_assert!(*residual <= 1e-8);
                    for (j, &target) in e.members()[i].probs().iter().enumerate() {
                        let rebuilt: f64 = weights.iter().map(|&(m, w)| w * rows[m][j]).sum();
                        prop_assert!((rebuilt - target).abs() <= 1e-8);
                    }
                    prop_assert!(weights.iter().all(|(m, _)| red.credal_set.source_indices().contains(m)));
                }
                MemberCertificate::Extreme { distance, margin } => {
                    prop_assert!(*distance > 1e-8 && *margin > 0.0);
                }
                MemberCertificate::Duplicate { of } => prop_assert!(*of < i),
            }
        }
    }

    #[test]
    fn ihdr_regions_cover_every_extreme(seed in any::<u64>(), k in 2usize..9, s in 1usize..6, g1 in 0.0f64..1.0, g2 in 0.0f64..1.0) {
        let cs = credal(&rows_from(seed, k, s));
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let wide = ihdr_greedy(&cs, lo).unwrap();
        let narrow = ihdr_greedy(&cs, hi).unwrap();
        for r in [&wide, &narrow] {
            for p in cs.extremes() {
                prop_assert!(p.mass(&r.labels) >= 1.0 - r.gamma - 1e-12);
            }
        }
        prop_assert!(narrow.labels.iter().all(|j| wide.labels.contains(j)));
        let exact = ihdr_exact(&cs, lo).unwrap();
        prop_assert!(exact.len() <= wide.len());
        prop_assert!(exact.achieved_lower_prob >= 1.0 - lo - 1e-12);

        let lower = cs.singleton_lower();
        let top = lower.iter().copied().fold(0.0, f64::max);
        if lo <= 1.0 - top {
            for j in cdec_point_prediction(&cs) {
                prop_assert!(wide.contains(j));
            }
        }
    }

    #[test]
    fn interval_conjugacy_and_singletons(seed in any::<u64>(), k in 2usize..11, d in 0.0f64..20.0) {
        let p = CategoricalPmf::new(rows_from(seed, k, 1).remove(0)).unwrap();
        let model = IntervalModel::new(p.clone(), d).unwrap();
        let full = (1u32 << k) - 1;
        for bits in 0..=full {
            let a = subset_of(bits, k);
            let (lo, hi) = interval_lower_upper(&model, &a).unwrap();
            let (clo, chi) = interval_lower_upper(&model, &subset_of(full & !bits, k)).unwrap();
            prop_assert!((lo - (1.0 - chi)).abs() < 1e-12);
            prop_assert!((hi - (1.0 - clo)).abs() < 1e-12);
            prop_assert!(lo <= hi + 1e-15);
        }
        for j in 0..k {
            let rest: f64 = (0..k).filter(|&i| i != j).map(|i| p.get(i)).sum();
            let (lo, hi) = interval_lower_upper(&model, &[j]).unwrap();
            if p.get(j) > 0.0 {
                prop_assert!((lo - 1.0 / (1.0 + (1.0 + d) * rest / p.get(j))).abs() < 1e-12);
                prop_assert!((hi - 1.0 / (1.0 + rest / ((1.0 + d) * p.get(j)))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hdr_grows_with_inflation(seed in any::<u64>(), k in 2usize..11, gamma in 0.01f64..0.5, d1 in 0.0f64..50.0, d2 in 0.0f64..50.0) {
        let p = CategoricalPmf::new(rows_from(seed, k, 1).remove(0)).unwrap();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let small = precise_hdr(&p, xi_of_d(gamma, lo));
        let large = precise_hdr(&p, xi_of_d(gamma, hi));
        prop_assert!(small.iter().all(|j| large.contains(j)));
        if let Ok(inf) = optimal_d(&p, gamma) {
            prop_assert!(inf.d_star >= 0.0);
            prop_assert!((xi_of_d(gamma, inf.d_star) - inf.xi).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_identities(seed in any::<u64>(), k in 2usize..30, d in 0.0f64..100.0) {
        let p = CategoricalPmf::new(rows_from(seed, k, 1).remove(0)).unwrap();
        let dec = variance_decomposition(&p, d);
        let tol = 1e-9 * dec.tu.max(1.0);
        prop_assert!((dec.tu - (dec.au + dec.eu)).abs() <= tol);
        prop_assert!((dec.tu - (1.0 + d).powi(2) * dec.au).abs() <= tol);
        prop_assert!((dec.eu - (d * d + 2.0 * d) * dec.au).abs() <= tol);
        prop_assert!(dec.au >= 0.0 && dec.au <= ((k - 1) * (k - 1)) as f64 / 4.0 + 1e-9);
    }

    #[test]
    fn auroc_symmetry_and_transform_invariance(scores in prop::collection::hash_set(0u32..100_000, 4..60), split in 1usize..59) {
        let scores: Vec<f64> = scores.into_iter().map(|s| s as f64 / 1000.0).collect();
        let split = 1 + split % (scores.len() - 1);
        let mk = |v: f64, i: usize| ScoredSample { eu: Some(v), au: Some(-v), tu: Some((v / 10.0).exp()), is_ood: i < split, ..Default::default() };
        let samples: Vec<_> = scores.iter().enumerate().map(|(i, &v)| mk(v, i)).collect();
        let (a, _) = auroc_auprc(&samples, ScoreKind::Eu).unwrap();
        let (neg, _) = auroc_auprc(&samples, ScoreKind::Au).unwrap();
        let (mono, _) = auroc_auprc(&samples, ScoreKind::Tu).unwrap();
        prop_assert!((a + neg - 1.0).abs() < 1e-12);
        prop_assert!((a - mono).abs() < 1e-12);
    }

    #[test]
    fn ece_is_order_free_and_single_bin_is_mean_gap(confs in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 1..80), rot in 0usize..80) {
        let samples: Vec<ScoredSample> = confs.iter().map(|&(c, ok)| ScoredSample {
            conf: Some(c), predicted_label: Some(0), true_label: Some(if ok { 0 } else { 1 }), ..Default::default()
        }).collect();
        let mut rotated = samples.clone();
        rotated.rotate_left(rot % samples.len());
        let a = ece(&samples, 15).unwrap().ece;
        let b = ece(&rotated, 15).unwrap().ece;
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
        let n = samples.len() as f64;
        let mean_conf: f64 = confs.iter().map(|c| c.0).sum::<f64>() / n;
        let mean_acc = confs.iter().filter(|c| c.1).count() as f64 / n;
        prop_assert!((ece(&samples, 1).unwrap().ece - (mean_conf - mean_acc).abs()).abs() < 1e-12);
    }
}

#[test]
fn uniform_variance_closed_form() {
    for k in 2..=100 {
        let v = categorical_variance(&CategoricalPmf::uniform(k).unwrap());
        let expected = ((k * k - 1) as f64) / 12.0;
        assert!((v - expected).abs() <= 1e-9 * expected, "k={k}: {v} vs {expected}");
    }
}

#[test]
fn entropy_is_maximal_only_at_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 2..10 {
        let u = entropy(&CategoricalPmf::uniform(k).unwrap());
        assert!((u - (k as f64).log2()).abs() < 1e-9);
        for _ in 0..50 {
            let p = CategoricalPmf::new(random_pmf(&mut rng, k, 1.0)).unwrap();
            assert!(entropy(&p) < (k as f64).log2() - 1e-9);
        }
    }
}

#[test]
fn hartley_matches_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let k = 2 + (rand::Rng::random_range(&mut rng, 0..4usize));
        let s = 1 + (rand::Rng::random_range(&mut rng, 0..5usize));
        let rows = random_rows(&mut rng, k, s);
        let cs = credal(&rows);
        let ex: Vec<Vec<f64>> = cs.extremes().iter().map(|p| p.probs().to_vec()).collect();
        let gh = generalized_hartley(&cs).unwrap();
        assert!((gh - hartley_double_sum(&ex)).abs() < 1e-9);
        assert!(gh >= -1e-9);
    }
}

#[test]
fn exact_upper_entropy_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let k = 2 + rand::Rng::random_range(&mut rng, 0..3usize);
        let s = 1 + rand::Rng::random_range(&mut rng, 0..3usize);
        let rows = random_rows(&mut rng, k, s);
        let cs = credal(&rows);
        let ex: Vec<Vec<f64>> = cs.extremes().iter().map(|p| p.probs().to_vec()).collect();
        let exact = exact_upper_entropy(&cs, MaxEntOptions::default()).unwrap();
        let grid = grid_max_entropy(&ex, 1e-3);
        assert!(exact >= grid - 1e-9, "exact {exact} below grid {grid}");
        assert!((exact - grid).abs() <= 2e-3, "exact {exact} grid {grid}");
    }
}

#[test]
fn tight_bound_matches_grid_of_its_objective() {
    // sup_beta sum beta_s h_s + H(beta) over a grid, against the closed form.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let rows = random_rows(&mut rng, 4, 3);
        let cs = credal(&rows);
        let h: Vec<f64> = cs.extremes().iter().map(|p| entropy_bits(p.probs())).collect();
        let m = h.len();
        let n = 400;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let w = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
                let w = &w[..m];
                if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    continue;
                }
                let val: f64 = w.iter().zip(&h).map(|(b, x)| b * x).sum::<f64>() + entropy_bits(w);
                best = best.max(val);
            }
        }
        let d = entropy_decomposition(&cs, false).unwrap();
        assert!(d.tu_upper_tight >= best - 1e-12);
        assert!(d.tu_upper_tight - best < 1e-2, "{} vs {best}", d.tu_upper_tight);
    }
}

#[test]
fn exact_ihdr_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let k = 2 + rand::Rng::random_range(&mut rng, 0..7usize);
        let s = 1 + rand::Rng::random_range(&mut rng, 0..5usize);
        let gamma = rand::Rng::random_range(&mut rng, 0.0..0.5);
        let rows = random_rows(&mut rng, k, s);
        let cs = credal(&rows);
        let ex: Vec<Vec<f64>> = cs.extremes().iter().map(|p| p.probs().to_vec()).collect();
        assert_eq!(ihdr_exact(&cs, gamma).unwrap().len(), brute_min_cover(&ex, gamma));
    }
}

#[test]
fn many_extremes_always_abstain() {
    for k in 2..=4 {
        let rows: Vec<Vec<f64>> =
            (0..k).map(|j| (0..k).map(|i| if i == j { 0.7 } else { 0.3 / (k - 1) as f64 }).collect()).collect();
        let e = ensemble(&rows);
        for eps in [1e-9, 0.01, 0.5, 3.0] {
            let d = cdec_decide(&e, 0.1, eps, &CdecOptions::default()).unwrap();
            assert_eq!(d.n_extremes, k);
            assert_ne!(d.kind, DecisionKind::Predict);
        }
    }
}
