use onescan::baselines::{biht_decode, marginal_regression_decode, marginal_statistics, BihtParams, GaussianDesignSeed};
use onescan::encoder::{encode_with_design, quantize, Design, SignMeasurements, SparseSignal};
use onescan::metrics::exact_sign_recovery;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn measure(x: &SparseSignal, seed: u64, m: usize) -> (SignMeasurements, GaussianDesignSeed) {
    let g = GaussianDesignSeed::new(seed, x.n(), m);
    (quantize(&encode_with_design(x, Design::Gaussian(g)).unwrap()), g)
}

fn one_sparse(rng: &mut ChaCha8Rng, n: usize) -> SparseSignal {
    let i = rng.random_range(0..n);
    let v = rng.random_range(0.5..5.0) * if rng.random() { 1.0 } else { -1.0 };
    SparseSignal::new(n, vec![(i, v)]).unwrap()
}

#[test]
fn marginal_regression_recovers_one_sparse() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 100;
    let hits = (0..trials)
        .filter(|&t| {
            let x = one_sparse(&mut rng, 200);
            let (s, g) = measure(&x, 100 + t, 10_000);
            exact_sign_recovery(&marginal_regression_decode(&s, &g, 1).unwrap(), &x)
        })
        .count();
    assert!(hits as f64 / trials as f64 >= 0.99, "{hits}/{trials}");
}

#[test]
fn biht_recovers_one_sparse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 100;
    let hits = (0..trials)
        .filter(|&t| {
            let x = one_sparse(&mut rng, 200);
            let (s, g) = measure(&x, 200 + t, 2000);
            exact_sign_recovery(&biht_decode(&s, &g, 1, BihtParams::default()).unwrap(), &x)
        })
        .count();
    assert!(hits as f64 / trials as f64 >= 0.95, "{hits}/{trials}");
}

#[test]
fn marginal_statistic_matches_dense_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = SparseSignal::new(30, vec![(2, 1.0), (9, -2.0), (20, 0.5)]).unwrap();
    let (s, g) = measure(&x, 4, 50);
    let stat = marginal_statistics(&s, &g).unwrap();
    for _ in 0..10 {
        let i = rng.random_range(0..30);
        let dense: f64 = (0..50).map(|j| f64::from(s.signs[j]) * g.cell(i, j).unwrap()).sum::<f64>() / 50.0;
        assert!((stat[i] - dense).abs() < 1e-12);
    }
}

#[test]
fn baselines_are_deterministic() {
    let x = SparseSignal::new(300, (0..10).map(|i| (i * 29, (i as f64 - 4.5) * 0.7)).collect()).unwrap();
    let (s, g) = measure(&x, 5, 800);
    assert_eq!(marginal_regression_decode(&s, &g, 10).unwrap(), marginal_regression_decode(&s, &g, 10).unwrap());
    let p = BihtParams { iters: 30, step: 0.5 };
    assert_eq!(biht_decode(&s, &g, 10, p).unwrap(), biht_decode(&s, &g, 10, p).unwrap());
}

#[test]
fn biht_support_has_k_entries() {
    let x = SparseSignal::new(100, vec![(3, 1.0), (50, -1.0), (77, 2.0)]).unwrap();
    let (s, g) = measure(&x, 6, 400);
    let e = biht_decode(&s, &g, 3, BihtParams::default()).unwrap();
    assert_eq!(e.support.len(), 3);
    assert_eq!(e.signs.iter().filter(|&&v| v != 0).count(), 3);
    assert!(biht_decode(&s, &g, 101, BihtParams::default()).is_err());
}
