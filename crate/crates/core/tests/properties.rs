use proptest::prelude::*;

use onescan::decoder::{compute_scores, estimate_signs_threshold, estimate_signs_topk, ScoreTable};
use onescan::encoder::{apply_flip_noise, encode, quantize, FlipNoise, SparseSignal};
use onescan::formats::{read_measurements, read_signal, write_measurements, write_signal, MeasurementFile};
use onescan::metrics::{false_positives, recall, sign_error};
use onescan::stable::{cms_transform, DesignSeed};

fn signal(n: usize) -> impl Strategy<Value = SparseSignal> {
    proptest::collection::btree_map(0..n, prop::num::f64::NORMAL.prop_filter("moderate", |v| v.abs() < 1e6 && v.abs() > 1e-6), 1..6)
        .prop_map(move |m| SparseSignal::new(n, m.into_iter().collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_sign_follows_u(u in -1.5699f64..1.5699, w in 1e-6f64..50.0, alpha in 0.01f64..=2.0) {
        let g = cms_transform(u, w, alpha).unwrap();
        prop_assert!(!g.is_nan());
        if u != 0.0 && g != 0.0 {
            prop_assert_eq!(g > 0.0, u > 0.0);
        }
    }

    #[test]
    fn never_two_positive_scores(x in signal(30), m in 1usize..120, seed in any::<u64>(), gamma in 0.0f64..0.45, k in 1.0f64..8.0) {
        let ds = DesignSeed::new(seed, 30, m);
        let signs = apply_flip_noise(&quantize(&encode(&x, ds, 0.05).unwrap()), FlipNoise::new(gamma, seed ^ 1).unwrap());
        let s = compute_scores(&signs, &ds, k).unwrap();
        for i in 0..30 {
            prop_assert!(!(s.q_plus[i] > 0.0 && s.q_minus[i] > 0.0));
            prop_assert!(s.q_plus[i].is_finite() && s.q_minus[i].is_finite());
        }
    }

    #[test]
    fn precision_identity(
        qp in proptest::collection::vec(-5.0f64..5.0, 40),
        qm in proptest::collection::vec(-5.0f64..5.0, 40),
        x in signal(40),
        beta in 1.0f64..4.0,
    ) {
        let k = x.k();
        let s = ScoreTable { q_plus: qp, q_minus: qm, k_used: k as f64 };
        let e = estimate_signs_topk(&s, k as f64, beta).unwrap();
        let rec = recall(&e, &x);
        let fp = false_positives(&e, &x);
        prop_assert!(((rec * k as f64).round() as usize + fp) == e.support.len());
        prop_assert!(e.support.len() == (beta * k as f64 + 1e-9).floor() as usize);
        let top = estimate_signs_topk(&s, k as f64, 1.0).unwrap();
        let err = sign_error(&top, &x, k).unwrap();
        prop_assert!((0.0..=2.0).contains(&err));
        prop_assert!(recall(&top, &x) <= rec);
    }

    #[test]
    fn threshold_support_is_where_a_score_is_positive(qp in proptest::collection::vec(-3.0f64..3.0, 1..50)) {
        let qm: Vec<f64> = qp.iter().map(|v| -v - 0.1).collect();
        let s = ScoreTable { q_plus: qp.clone(), q_minus: qm, k_used: 2.0 };
        let e = estimate_signs_threshold(&s);
        for (i, &v) in qp.iter().enumerate() {
            let want = if v > 0.0 { 1 } else if -v - 0.1 > 0.0 { -1 } else { 0 };
            prop_assert_eq!(e.signs[i], want);
        }
    }

    #[test]
    fn signal_files_roundtrip(x in signal(500)) {
        let mut buf = Vec::new();
        write_signal(&mut buf, &x).unwrap();
        prop_assert_eq!(read_signal(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn measurement_files_roundtrip(x in signal(20), m in 1usize..50, seed in any::<u64>(), gamma in 0.0f64..0.4) {
        let ds = DesignSeed::new(seed, 20, m);
        let raw = encode(&x, ds, 0.3).unwrap();
        let signs = apply_flip_noise(&quantize(&raw), FlipNoise::new(gamma, 3).unwrap());
        for file in [MeasurementFile::Raw(raw), MeasurementFile::Signs(signs)] {
            let mut buf = Vec::new();
            write_measurements(&mut buf, &file).unwrap();
            prop_assert_eq!(read_measurements(buf.as_slice(), None).unwrap(), file);
        }
    }
}
