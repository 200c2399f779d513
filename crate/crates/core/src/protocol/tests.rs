use super::*;
use crate::representation::FeatureVector;
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

/// `categories` clusters in `dim` dimensions, each concentrated on its own
/// coordinate.
fn separable(categories: usize, per: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01).unwrap();
    Dataset::from_features((0..categories).map(|c| {
        let feats = (0..per)
            .map(|_| {
                let v: Vec<f64> = (0..dim)
                    .map(|i| {
                        let base: f64 = if i == c { 1.0 } else { 0.02 };
                        (base + noise.sample(&mut rng)).abs()
                    })
                    .collect();
                FeatureVector::normalized(v).unwrap()
            })
            .collect();
        (format!("c{c}"), feats)
    }))
    .unwrap()
}

fn constant(categories: usize, per: usize) -> Dataset {
    let v = FeatureVector::normalized(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    Dataset::from_features((0..categories).map(|c| (format!("k{c:02}"), vec![v.clone(); per])))
        .unwrap()
}

#[test]
fn default_thresholds() {
    let c = ProtocolConfig::default();
    assert_eq!(c.tau, 0.75);
    assert_eq!(c.window_factor, 3);
    assert_eq!(c.breakpoint_iters, 100);
    assert_eq!(c.instances_per_teach, 3);
}

#[test]
fn window_examples() {
    assert_eq!(sliding_accuracy(&[true; 6], 2, 3), Some(1.0));
    let w = [true, true, false, true, false, true];
    assert!((sliding_accuracy(&w, 2, 3).unwrap() - 4.0 / 6.0).abs() < 1e-12);
    assert_eq!(sliding_accuracy(&[true, false], 5, 3), Some(0.5));
    assert_eq!(sliding_accuracy(&[], 1, 3), None);
    // Only the most recent 3n answers count.
    let mut long = vec![false; 10];
    long.extend([true; 3]);
    assert_eq!(sliding_accuracy(&long, 1, 3), Some(1.0));
}

#[test]
fn separable_categories_are_all_learned() {
    let data = separable(5, 20, 16, 1);
    let r = run_experiment(&ProtocolConfig::default(), &data).unwrap();
    assert_eq!(r.alc, 5);
    assert_eq!(r.stop_reason, StopReason::LackOfData);
    r.verify().unwrap();
    let mut seen: Vec<_> = r.introduced.clone();
    seen.sort();
    assert_eq!(seen, data.labels().collect::<Vec<_>>());
}

#[test]
fn identical_instances_stall_at_the_breakpoint() {
    let data = constant(20, 150);
    let r = run_experiment(&ProtocolConfig::default(), &data).unwrap();
    assert_eq!(r.stop_reason, StopReason::Breakpoint);
    let last_teach = r
        .timeline
        .iter()
        .filter_map(|e| match e {
            Event::Teach { iteration, .. } => Some(*iteration),
            _ => None,
        })
        .next_back()
        .unwrap();
    let last_ask = r
        .timeline
        .iter()
        .filter_map(|e| match e {
            Event::Ask { iteration, .. } => Some(*iteration),
            _ => None,
        })
        .next_back()
        .unwrap();
    assert_eq!(last_ask - last_teach, 100);
    assert!(r.alc < 20);
}

#[test]
fn no_instance_is_asked_after_being_used() {
    let data = separable(4, 12, 8, 3);
    let r = run_experiment(
        &ProtocolConfig {
            seed: 5,
            ..Default::default()
        },
        &data,
    )
    .unwrap();
    let mut used = std::collections::BTreeSet::new();
    for e in &r.timeline {
        match e {
            Event::Teach { instances, .. } => {
                for i in instances {
                    assert!(used.insert(i.clone()));
                }
            }
            Event::Ask { instance, .. } => assert!(used.insert(instance.clone())),
            Event::Correct { .. } => {}
        }
    }
}

#[test]
fn undersized_categories_are_rejected() {
    let data = separable(2, 3, 4, 0);
    assert!(matches!(
        run_experiment(&ProtocolConfig::default(), &data),
        Err(Error::InvalidArgument(_))
    ));
    assert!(run_experiment(&ProtocolConfig::default(), &Dataset::new()).is_err());
    let bad = ProtocolConfig {
        tau: 1.0,
        ..Default::default()
    };
    assert!(run_experiment(&bad, &separable(2, 5, 4, 0)).is_err());
}

#[test]
fn aggregation() {
    let data = separable(3, 8, 6, 2);
    let one = run_experiment(&ProtocolConfig::default(), &data).unwrap();
    let s = aggregate_runs(std::slice::from_ref(&one)).unwrap();
    assert_eq!(s.mean.alc, one.alc as f64);
    assert_eq!(s.mean.gca, one.gca);
    assert_eq!(s.mean.apa, one.apa);
    assert_eq!(s.std.alc, 0.0);

    let mut a = one.clone();
    let mut b = one.clone();
    a.alc = 4;
    b.alc = 6;
    let s = aggregate_runs(&[a, b]).unwrap();
    assert_eq!(s.mean.alc, 5.0);
    assert!((s.std.alc - 2f64.sqrt()).abs() < 1e-12);
    assert!(aggregate_runs(&[]).is_err());
}

#[test]
fn ten_seeds_on_separable_data() {
    let data = separable(5, 20, 16, 4);
    let seeds: Vec<u64> = (1..=10).collect();
    let reports = run_seeds(&ProtocolConfig::default(), &data, &seeds).unwrap();
    let s = aggregate_runs(&reports).unwrap();
    assert_eq!(s.mean.alc, 5.0);
    for r in &reports {
        r.verify().unwrap();
        let corrections = r
            .timeline
            .iter()
            .filter(|e| matches!(e, Event::Correct { .. }))
            .count();
        assert!(r.aic <= 3.0 + corrections as f64 / r.alc as f64 + 1e-12);
    }
}

#[test]
fn timeline_csv_layout() {
    let data = separable(2, 5, 4, 0);
    let r = run_experiment(&ProtocolConfig::default(), &data).unwrap();
    let mut buf = Vec::new();
    r.write_timeline_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("iteration,event,label,predicted,correct")
    );
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,teach,"), "{first}");
    assert_eq!(text.lines().count(), r.timeline.len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_deterministic_and_consistent(
        seed in any::<u64>(),
        cats in 1usize..5,
        per in 4usize..10,
        tau in 0.3f64..0.95,
    ) {
        let data = separable(cats, per, 8, seed ^ 0x55);
        let config = ProtocolConfig { seed, tau, ..Default::default() };
        let a = run_experiment(&config, &data).unwrap();
        let b = run_experiment(&config, &data).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(a.verify().is_ok());
        prop_assert!((0.0..=1.0).contains(&a.gca));
        prop_assert!((0.0..=1.0).contains(&a.apa));
        let mut intro = a.introduced.clone();
        intro.sort();
        intro.dedup();
        prop_assert_eq!(intro.len(), a.introduced.len());
    }
}
