use ekr_core::combinatorics::graph_constants;
use ekr_core::kneser::Colex;
use ekr_core::sampler::{sample_with_colex, trial_seed, AutoBackend, DEFAULT_MATERIALIZE_CAP};
use ekr_core::solver::count_y;
use ekr_core::theory::{expected_y, xi_upper_bound};
use std::sync::Arc;

/// `E[X_1]` by listing every family `S_x - {A} + {B}` with `B` outside
/// `S_x` and summing `(1 - p)^e` over its Kneser edges.
fn exact_x1(n: u32, r: u32, p: f64) -> f64 {
    let colex = Colex::new(n, r).unwrap();
    let sets: Vec<_> = colex.sets().collect();
    let mut total = 0.0;
    for x in 1..=n {
        let star: Vec<_> = sets.iter().filter(|a| a.contains(x)).collect();
        for b in sets.iter().filter(|b| !b.contains(x)) {
            for skip in 0..star.len() {
                let edges = star
                    .iter()
                    .enumerate()
                    .filter(|&(i, a)| i != skip && a.intersection_size(b) == 0)
                    .count();
                total += (1.0 - p).powi(edges as i32);
            }
        }
    }
    total
}

#[test]
fn x1_oracle_reference_value() {
    assert!((exact_x1(10, 2, 0.5) - 45.0).abs() < 1e-9);
}

#[test]
fn x1_bound_dominates_oracle() {
    for (n, r) in [(8, 2), (10, 2), (9, 3)] {
        for p in [0.3, 0.5] {
            let exact = exact_x1(n, r, p);
            let bound = xi_upper_bound(n, r, p, 1).unwrap().value();
            assert!(bound >= exact, "K({n},{r}) p={p}: {bound} < {exact}");
        }
    }
}

#[test]
fn expected_y_matches_monte_carlo() {
    for (n, r) in [(5, 2), (10, 2)] {
        let spec = graph_constants(n, r, 0).unwrap();
        let colex = Arc::new(Colex::new(n, r).unwrap());
        for (j, p) in [0.05, 0.2, 0.5].into_iter().enumerate() {
            let trials = 20_000u64;
            let master = 0xE7 + j as u64;
            let ys: Vec<f64> = (0..trials)
                .map(|t| {
                    let s = sample_with_colex(
                        &spec,
                        colex.clone(),
                        p,
                        trial_seed(master, t),
                        &AutoBackend,
                        DEFAULT_MATERIALIZE_CAP,
                    )
                    .unwrap();
                    count_y(&s).unwrap() as f64
                })
                .collect();
            let mean = ys.iter().sum::<f64>() / trials as f64;
            let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            let se = (var / trials as f64).sqrt();
            let want = expected_y(n, r, p).unwrap().value();
            assert!(
                (mean - want).abs() <= 3.0 * se,
                "K({n},{r}) p={p}: mean {mean} vs {want} (se {se})"
            );
        }
    }
}
