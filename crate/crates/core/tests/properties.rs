//! Invariants over randomly generated priors, datasets and channels.

use latent_idm::idm::log_marginal;
use latent_idm::observation::{LatentPredictive, Observation};
use latent_idm::parallel::with_sequential;
use latent_idm::*;
use proptest::prelude::*;

fn prior_strategy(k: usize) -> impl Strategy<Value = DirichletParams> {
    (0.1f64..20.0, prop::collection::vec(0.01f64..1.0, k)).prop_map(|(s, raw)| {
        DirichletParams::new(s, SimplexPoint::normalized(raw).unwrap()).unwrap()
    })
}

fn freq_strategy(k: usize, max: u32) -> impl Strategy<Value = FrequencyVector> {
    prop::collection::vec(0..=max, k).prop_map(FrequencyVector::new)
}

fn channel_strategy() -> impl Strategy<Value = (f64, f64)> {
    (0.001f64..0.45, 0.001f64..0.45)
}

/// Emission matrix with some zero entries, columns summing to one.
fn sparse_matrix(k: usize) -> impl Strategy<Value = EmissionMatrix> {
    prop::collection::vec(
        prop::collection::vec(prop::option::weighted(0.7, 0.05f64..1.0), 3),
        k,
    )
    .prop_filter_map("column of zeros", |cols| {
        let cols: Option<Vec<Vec<f64>>> = cols
            .into_iter()
            .map(|c| {
                let raw: Vec<f64> = c.into_iter().map(|v| v.unwrap_or(0.0)).collect();
                let total: f64 = raw.iter().sum();
                (total > 0.0).then(|| {
                    let mut col: Vec<f64> = raw.iter().map(|v| v / total).collect();
                    let i = col.iter().position(|v| *v > 0.0).unwrap();
                    col[i] += 1.0 - col.iter().sum::<f64>();
                    col
                })
            })
            .collect();
        EmissionMatrix::from_columns(cols?).ok()
    })
}

fn sparse_dataset(k: usize, max_n: usize) -> impl Strategy<Value = ManifestDataset> {
    (
        sparse_matrix(k),
        sparse_matrix(k),
        prop::collection::vec((0..2usize, 0..3usize), 0..=max_n),
    )
        .prop_filter_map("observed an all-zero row", |(a, b, obs)| {
            let obs = obs
                .into_iter()
                .map(|(matrix, row)| Observation { matrix, row })
                .collect();
            ManifestDataset::new(vec![a, b], obs).ok()
        })
}

fn binomial(n: u32, r: u32) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_strength_and_mean(prior in prior_strategy(3), freq in freq_strategy(3, 10)) {
        let (post, _) = posterior_update(&prior, &freq).unwrap();
        let n = freq.n() as f64;
        prop_assert!((post.s() - (n + prior.s())).abs() < 1e-12);
        for j in 0..3 {
            let expected = (freq.get(j) as f64 + prior.s() * prior.t()[j]) / (n + prior.s());
            prop_assert!((post.t()[j] - expected).abs() < 1e-12);
        }
        prop_assert!((post.t().coords().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_chain_rule(prior in prior_strategy(3), x in freq_strategy(3, 5), y in freq_strategy(3, 5)) {
        let joint = log_marginal(&prior, &x.add(&y).unwrap()).unwrap();
        let (post, first) = posterior_update(&prior, &x).unwrap();
        let second = log_marginal(&post, &y).unwrap();
        prop_assert!((joint - (first + second)).abs() < 1e-9 * joint.abs().max(1.0));
    }

    #[test]
    fn marginal_sums_to_one_over_datasets(prior in prior_strategy(2), n in 0u32..=8) {
        let total: f64 = (0..=n)
            .map(|a| {
                let f = FrequencyVector::new(vec![a, n - a]);
                binomial(n, a) * log_marginal(&prior, &f).unwrap().exp()
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "{}", total);
    }

    #[test]
    fn idm_bounds_complement(s in 0.1f64..20.0, freq in freq_strategy(2, 20)) {
        let b0 = standard_idm_predictive_bounds(s, &freq, 0).unwrap();
        let b1 = standard_idm_predictive_bounds(s, &freq, 1).unwrap();
        prop_assert!((b0.lower + b1.upper - 1.0).abs() < 1e-12);
        prop_assert!((b0.upper + b1.lower - 1.0).abs() < 1e-12);
        prop_assert!((b0.width() - s / (freq.n() as f64 + s)).abs() < 1e-12);
    }

    #[test]
    fn likelihood_factorizes_through_weights(
        data in sparse_dataset(3, 6),
        raw in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-3);
        let theta = SimplexPoint::normalized(raw).unwrap();
        let direct = latent_likelihood(&data, &theta).unwrap();
        let via = frequency_weights(&data).unwrap().likelihood_at(&theta);
        prop_assert!((direct - via).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn weights_total_is_product_of_row_sums(data in sparse_dataset(3, 6)) {
        let expected: f64 = (0..data.n()).map(|i| data.emission_row(i).iter().sum::<f64>()).product();
        let total = frequency_weights(&data).unwrap().total();
        prop_assert!((total - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn predictive_is_coherent(data in sparse_dataset(3, 6), prior in prior_strategy(3)) {
        let model = LatentPredictive::new(&frequency_weights(&data).unwrap(), prior.s()).unwrap();
        let dist = model.distribution(prior.t());
        prop_assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist.iter().all(|p| (0.0..=1.0).contains(p)));
        let single: f64 = (0..3).map(|j| posterior_predictive_at_t(&data, &prior, j).unwrap()).sum();
        prop_assert!((single - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_agree(data in sparse_dataset(2, 8), s in 0.5f64..5.0) {
        let spec = SearchSpec::for_k(2);
        let par = predictive_bounds(&data, s, 0, &spec).unwrap();
        let seq = with_sequential(|| predictive_bounds(&data, s, 0, &spec).unwrap());
        prop_assert_eq!(par.lower.to_bits(), seq.lower.to_bits());
        prop_assert_eq!(par.upper.to_bits(), seq.upper.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictive_lies_within_bounds(data in sparse_dataset(2, 8), prior in prior_strategy(2)) {
        for j in 0..2 {
            let b = predictive_bounds(&data, prior.s(), j, &SearchSpec::for_k(2)).unwrap();
            let p = posterior_predictive_at_t(&data, &prior, j).unwrap();
            prop_assert!(b.lower - 1e-9 <= p && p <= b.upper + 1e-9, "{} not in [{}, {}]", p, b.lower, b.upper);
        }
    }

    /// The combinatorial flags agree with the numerical bounds, and a flag
    /// keeps the bound at least 1/(n+s) away from the vacuous value.
    #[test]
    fn diagnosis_agrees_with_bounds(data in sparse_dataset(2, 6), s in 0.5f64..5.0) {
        let diag = vacuity_diagnosis(&data);
        let floor = 1.0 / (data.n() as f64 + s);
        for (j, d) in diag.outcomes.iter().enumerate() {
            let b = predictive_bounds(&data, s, j, &SearchSpec::for_k(2)).unwrap();
            if d.upper_strictly_below_one {
                prop_assert!(b.upper <= 1.0 - floor + 1e-9, "upper {} for {:?}", b.upper, d);
            } else {
                prop_assert!(b.upper >= 1.0 - 1e-6, "upper {} for {:?}", b.upper, d);
            }
            if d.lower_strictly_above_zero {
                prop_assert!(b.lower >= floor - 1e-9, "lower {} for {:?}", b.lower, d);
            } else {
                prop_assert!(b.lower <= 1e-6, "lower {} for {:?}", b.lower, d);
            }
        }
    }

    #[test]
    fn diagnosis_agrees_with_bounds_k3(data in sparse_dataset(3, 4), s in 0.5f64..5.0) {
        let diag = vacuity_diagnosis(&data);
        for (j, d) in diag.outcomes.iter().enumerate() {
            let b = predictive_bounds(&data, s, j, &SearchSpec::for_k(3)).unwrap();
            prop_assert_eq!(d.upper_strictly_below_one, b.upper < 1.0 - 1e-6);
            prop_assert_eq!(d.lower_strictly_above_zero, b.lower > 1e-6);
        }
    }

    #[test]
    fn positive_channel_is_vacuous(
        (e1, e2) in channel_strategy(),
        rows in prop::collection::vec(0..2usize, 0..=10),
        s in 0.5f64..5.0,
    ) {
        let data = ManifestDataset::with_shared(EmissionMatrix::binary_channel(e1, e2).unwrap(), &rows).unwrap();
        prop_assert!(vacuity_diagnosis(&data).total_vacuity);
        for j in 0..2 {
            let b = predictive_bounds(&data, s, j, &SearchSpec::for_k(2)).unwrap();
            prop_assert!(b.lower <= 1e-6 && b.upper >= 1.0 - 1e-6);
        }
    }
}

#[test]
fn vacuity_persists_as_channel_sharpens() {
    for eps in [0.2, 0.05, 0.01, 0.001] {
        for positives in [0, 3, 10] {
            let rows: Vec<usize> = (0..10).map(|i| usize::from(i >= positives)).collect();
            let data = ManifestDataset::with_shared(
                EmissionMatrix::binary_channel(eps, eps).unwrap(),
                &rows,
            )
            .unwrap();
            let b = predictive_bounds(&data, 2.0, 0, &SearchSpec::for_k(2)).unwrap();
            assert!(b.lower <= 1e-6 && b.upper >= 1.0 - 1e-6, "eps {eps}: {b:?}");
        }
    }
}

#[test]
fn exact_observation_recovers_standard_idm() {
    // identity emissions: the latent outcome is seen directly
    let data =
        ManifestDataset::with_shared(EmissionMatrix::identity(2).unwrap(), &[0, 0, 1]).unwrap();
    let b = predictive_bounds(&data, 2.0, 0, &SearchSpec::for_k(2)).unwrap();
    assert!(
        (b.lower - 0.4).abs() < 1e-6 && (b.upper - 0.8).abs() < 1e-6,
        "{b:?}"
    );
    assert!(b.argmin_t.is_limit() && b.argmax_t.is_limit());
}
