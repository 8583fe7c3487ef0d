use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rfim_core::*;

fn model(alpha: f64, j1: f64, beta: f64, theta: f64) -> Model {
    Model::new(ModelParams::new(alpha, j1, beta, theta, DisorderKind::Gaussian).unwrap(), 16).unwrap()
}

fn window(n: i64) -> Interval {
    Interval::new(-(n / 2), n - 1 - n / 2).unwrap()
}

#[test]
fn complementary_events_sum_to_one() {
    let m = model(0.3, 1.2, 1.0, 0.5);
    let w = window(10);
    let h = sample_disorder(DisorderKind::Gaussian, w, 9);
    let mu = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    for site in w.sites() {
        let p = mu
            .event_probabilities(&[
                EventSpec::SpinAt { site, sign: Sign::Plus },
                EventSpec::SpinAt { site, sign: Sign::Minus },
            ])
            .unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn nested_events_are_monotone() {
    let m = model(0.3, 1.2, 1.0, 0.5);
    let w = window(10);
    let h = sample_disorder(DisorderKind::Gaussian, w, 2);
    let mu = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    let small = EventSpec::RunEquals { interval: Interval::new(-1, 1).unwrap(), sign: Sign::Plus };
    let big = EventSpec::RunEquals { interval: Interval::new(-3, 3).unwrap(), sign: Sign::Plus };
    let any = EventSpec::RunAny { interval: Interval::new(-1, 1).unwrap() };
    let long = EventSpec::LongRun { region: w, min_len: 3 };
    let p = mu.event_probabilities(&[big, small, any, long]).unwrap();
    assert!(p[0] <= p[1] && p[1] <= p[2] && p[2] <= p[3], "{p:?}");
}

#[test]
fn zero_field_boundary_symmetry() {
    let m = model(0.5, 1.2, 0.8, 0.0);
    let w = window(11);
    let h = sample_disorder(DisorderKind::Gaussian, w, 4);
    let plus = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    let minus = ExactMeasure::new(&m, &h, w, Sign::Minus).unwrap();
    let events = [
        EventSpec::SpinAt { site: 0, sign: Sign::Plus },
        EventSpec::Well { interval: Interval::new(0, 1).unwrap(), sign: Sign::Minus },
        EventSpec::SmallWellAt { site: 2, max_len: 3, sign: Sign::Plus },
    ];
    let conj: Vec<EventSpec> = events.iter().map(EventSpec::conjugate).collect();
    let a = plus.event_probabilities(&events).unwrap();
    let b = minus.event_probabilities(&conj).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn field_flip_symmetry_with_disorder() {
    let m = model(0.2, 1.2, 1.0, 0.6);
    let w = window(9);
    let h = sample_disorder(DisorderKind::Gaussian, w, 8);
    let hn = h.negated();
    let plus = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    let minus = ExactMeasure::new(&m, &hn, w, Sign::Minus).unwrap();
    assert!((plus.log_partition() - minus.log_partition()).abs() < 1e-10);
}

#[test]
fn relabelled_window_gives_same_probabilities() {
    let m = model(0.3, 1.2, 1.0, 0.5);
    let w = window(8);
    let h = sample_disorder(DisorderKind::Gaussian, w, 6);
    let shift = 100;
    let w2 = Interval::new(w.lo + shift, w.hi + shift).unwrap();
    let h2 = DisorderField::from_values(w2.lo, h.values().to_vec(), 6, DisorderKind::Gaussian).unwrap();
    let a = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    let b = ExactMeasure::new(&m, &h2, w2, Sign::Plus).unwrap();
    assert!((a.log_partition() - b.log_partition()).abs() < 1e-10);
    let pa = a.event_probability(&EventSpec::SpinAt { site: 1, sign: Sign::Minus }).unwrap();
    let pb = b.event_probability(&EventSpec::SpinAt { site: 1 + shift, sign: Sign::Minus }).unwrap();
    assert!((pa - pb).abs() < 1e-12);
}

#[test]
fn configuration_probabilities_sum_to_one() {
    let m = model(0.3, 1.2, 1.0, 0.5);
    let w = window(8);
    let h = sample_disorder(DisorderKind::Gaussian, w, 1);
    let mu = ExactMeasure::new(&m, &h, w, Sign::Minus).unwrap();
    let total: f64 = (0..1u64 << 8)
        .map(|b| mu.probability_of(&SpinWindow::from_bits(w.lo, 8, b, Sign::Minus)).unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn exact_sampler_frequencies_agree() {
    let m = model(0.3, 1.2, 1.0, 0.5);
    let w = window(10);
    let h = sample_disorder(DisorderKind::Gaussian, w, 3);
    let mu = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    let sampler = mu.sampler().unwrap();
    let events = [
        EventSpec::SpinAt { site: 0, sign: Sign::Plus },
        EventSpec::RunAny { interval: Interval::new(-2, 1).unwrap() },
        EventSpec::AnySmallWell { region: w, max_len: 2 },
    ];
    let exact = mu.event_probabilities(&events).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 40_000;
    let mut hits = [0usize; 3];
    for _ in 0..n {
        let s = sampler.sample(&mut rng);
        for (k, e) in events.iter().enumerate() {
            hits[k] += e.evaluate(&s) as usize;
        }
    }
    for k in 0..3 {
        let p = exact[k];
        let freq = hits[k] as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
        assert!((freq - p).abs() <= 4.0 * se, "event {k}: {freq} vs {p}");
    }
}

#[test]
fn oversized_windows_are_rejected() {
    let m = model(0.3, 1.2, 1.0, 0.5);
    let w = Interval::new(0, 30).unwrap();
    let h = sample_disorder(DisorderKind::Gaussian, w, 1);
    assert!(matches!(ExactMeasure::new(&m, &h, w, Sign::Plus), Err(Error::Size { .. })));
}
