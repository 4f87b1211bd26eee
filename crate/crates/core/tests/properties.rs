mod common;

use kherd::discrepancy::{alpha_from_lambda, alpha_mmd_sq, lambda_from_alpha, weighted_alpha_mmd_sq, AlphaParam, WeightVector};
use kherd::herding::{gkh, gkhr};
use kherd::kernel::{kernel_eval, median_bandwidth, Dataset, KernelContext, KernelSpec};
use kherd::oracle::{exhaustive_min, min_eigenvalue, optimal_affine_weights};
use kherd::synthbench::baselines::{apportion, stratified};
use proptest::prelude::*;

fn rows_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n, 1..=max_d).prop_flat_map(|(n, d)| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n))
}

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.2f64..4.0).prop_map(|sigma| KernelSpec::Gaussian { sigma }),
        (0.2f64..4.0).prop_map(|sigma| KernelSpec::Laplacian { sigma }),
        (1u32..4, 0.0f64..2.0).prop_map(|(degree, offset)| KernelSpec::Polynomial { degree, offset }),
    ]
}

fn ctx(rows: &[Vec<f64>], sigma: f64, gram: bool) -> KernelContext {
    KernelContext::build(Dataset::from_rows(rows).unwrap(), KernelSpec::Gaussian { sigma }, gram).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_symmetric_and_bounded(rows in rows_strategy(6, 3), spec in kernel_strategy()) {
        for x in &rows {
            for y in &rows {
                let a = kernel_eval(&spec, x, y).unwrap();
                prop_assert_eq!(a, kernel_eval(&spec, y, x).unwrap());
                if spec.is_characteristic() {
                    prop_assert!((0.0..=1.0).contains(&a));
                }
            }
        }
    }

    #[test]
    fn gaussian_gram_is_psd(rows in rows_strategy(20, 3), sigma in 0.2f64..4.0) {
        prop_assert!(min_eigenvalue(&ctx(&rows, sigma, true)) >= -1e-8);
    }

    #[test]
    fn mean_similarity_matches_gram(rows in rows_strategy(30, 3), spec in kernel_strategy()) {
        let lazy = KernelContext::build(Dataset::from_rows(&rows).unwrap(), spec, false).unwrap();
        let cached = KernelContext::build(Dataset::from_rows(&rows).unwrap(), spec, true).unwrap();
        let n = rows.len();
        let mut row = vec![0.0; n];
        for i in 0..n {
            lazy.row_into(i, &mut row);
            let direct = row.iter().sum::<f64>() / n as f64;
            prop_assert!((lazy.mu()[i] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            prop_assert!((cached.mu()[i] - lazy.mu()[i]).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn median_bandwidth_scales(rows in rows_strategy(30, 3), c in 0.1f64..10.0) {
        let ds = Dataset::from_rows(&rows).unwrap();
        if let Ok(s) = median_bandwidth(&ds) {
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
            let t = median_bandwidth(&Dataset::from_rows(&scaled).unwrap()).unwrap();
            prop_assert!((t - c * s).abs() <= 1e-9 * c * s);
        }
    }

    #[test]
    fn alpha_mmd_matches_naive_and_is_nonnegative(
        rows in rows_strategy(25, 3), sigma in 0.2f64..4.0, alpha in 0.0f64..=1.0, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..10)
    ) {
        let c = ctx(&rows, sigma, false);
        let idx: Vec<usize> = picks.iter().map(|p| p.index(rows.len())).collect();
        let v = alpha_mmd_sq(&c, &idx, alpha).unwrap();
        prop_assert!(v >= 0.0);
        let naive = common::alpha_mmd_sq(&common::gram(&rows, sigma), &idx, alpha);
        prop_assert!((v - naive.max(0.0)).abs() <= 1e-10);
        let w = WeightVector::uniform_over(&idx, rows.len()).unwrap();
        prop_assert!((weighted_alpha_mmd_sq(&c, &w, alpha).unwrap() - v).abs() <= 1e-10);
    }

    #[test]
    fn lambda_round_trip(alpha in 0.01f64..=1.0, m in 1usize..1000) {
        let back = alpha_from_lambda(lambda_from_alpha(alpha, m).unwrap(), m).unwrap();
        prop_assert!((back - alpha).abs() <= 1e-12);
    }

    #[test]
    fn gkhr_distinct_and_permutation_equivariant(
        rows in rows_strategy(40, 2), sigma in 0.2f64..4.0, alpha in 0.0f64..=1.0, frac in 0.05f64..1.0, seed in any::<u64>()
    ) {
        let n = rows.len();
        let m = ((n as f64 * frac) as usize).clamp(1, n);
        let a = AlphaParam::explicit(alpha).unwrap();
        let base = gkhr(&ctx(&rows, sigma, false), m, a).unwrap();
        let mut seen = base.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), m);

        // Permuting the rows permutes the selected set, up to ties.
        let mut rng = common::rng(seed);
        let perm = common::random_subset(&mut rng, n, n);
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let other = gkhr(&ctx(&permuted, sigma, false), m, a).unwrap();
        let mapped: Vec<usize> = other.indices.iter().map(|&j| perm[j]).collect();
        let c = ctx(&rows, sigma, false);
        let v1 = alpha_mmd_sq(&c, &base.indices, alpha).unwrap();
        let v2 = alpha_mmd_sq(&c, &mapped, alpha).unwrap();
        prop_assert!((v1 - v2).abs() <= 1e-9, "{:?} vs {:?}", base.indices, mapped);
    }

    #[test]
    fn gkh_equals_gkhr_without_repeats(rows in rows_strategy(30, 2), sigma in 0.2f64..4.0, alpha in 0.0f64..=1.0, m in 1usize..8) {
        let c = ctx(&rows, sigma, true);
        let m = m.min(rows.len());
        let a = AlphaParam::explicit(alpha).unwrap();
        let with = gkh(&c, m, a).unwrap();
        let mut seen = with.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() == m {
            prop_assert_eq!(with.indices, gkhr(&c, m, a).unwrap().indices);
        }
    }

    #[test]
    fn lazy_and_cached_selections_agree(rows in rows_strategy(40, 3), sigma in 0.2f64..4.0, alpha in 0.0f64..=1.0, m in 1usize..10) {
        let m = m.min(rows.len());
        let a = AlphaParam::explicit(alpha).unwrap();
        let lazy = gkhr(&ctx(&rows, sigma, false), m, a).unwrap();
        let cached = gkhr(&ctx(&rows, sigma, true), m, a).unwrap();
        prop_assert_eq!(lazy.indices, cached.indices);
    }

    #[test]
    fn oracle_chain(rows in rows_strategy(9, 2), sigma in 0.3f64..3.0, alpha in 0.0f64..=1.0, m in 1usize..4) {
        let m = m.min(rows.len());
        let c = ctx(&rows, sigma, true);
        let report = exhaustive_min(&c, m, alpha, false).unwrap();
        let (_, naive) = common::brute_force_min(&common::gram(&rows, sigma), m, alpha);
        prop_assert!((report.best_value - naive.max(0.0)).abs() <= 1e-10);
        prop_assert!(report.best_value <= report.greedy_value + 1e-12);
        if let Ok(w) = optimal_affine_weights(&c, alpha, true) {
            prop_assert!(weighted_alpha_mmd_sq(&c, &w.weights, alpha).unwrap() <= report.best_value + 1e-9);
        }
    }

    #[test]
    fn apportionment_sums_and_is_fair(sizes in prop::collection::vec(0usize..50, 1..8), frac in 0.0f64..=1.0) {
        let total: usize = sizes.iter().sum();
        let m = (total as f64 * frac) as usize;
        let quota = apportion(&sizes, m);
        prop_assert_eq!(quota.iter().sum::<usize>(), m);
        for (q, s) in quota.iter().zip(&sizes) {
            prop_assert!(q <= s);
            if total > 0 {
                let exact = m as f64 * *s as f64 / total as f64;
                prop_assert!((*q as f64 - exact).abs() < 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn stratified_respects_labels(labels in prop::collection::vec(0u32..4, 4..60), frac in 0.05f64..1.0, seed in any::<u64>()) {
        let n = labels.len();
        let ds = Dataset::new((0..n).map(|i| i as f64).collect(), n, 1, Some(labels.clone())).unwrap();
        let m = ((n as f64 * frac) as usize).clamp(1, n);
        let mut classes = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        if m < classes.len() {
            prop_assert!(stratified(&ds, m, seed).is_err());
            return Ok(());
        }
        let picked = stratified(&ds, m, seed).unwrap();
        prop_assert_eq!(picked.len(), m);
        let sizes: Vec<usize> = classes.iter().map(|c| labels.iter().filter(|l| *l == c).count()).collect();
        let quota = apportion(&sizes, m);
        for (c, q) in classes.iter().zip(&quota) {
            prop_assert_eq!(picked.iter().filter(|&&i| labels[i] == *c).count(), *q);
        }
        let mut seen = picked.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), m);
    }
}
