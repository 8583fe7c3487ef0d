use rfim_core::*;

fn model(alpha: f64, j1: f64, beta: f64, theta: f64) -> Model {
    Model::new(ModelParams::new(alpha, j1, beta, theta, DisorderKind::Bernoulli).unwrap(), 16).unwrap()
}

fn config(sweeps: u64, seed: u64, rule: UpdateRule) -> ChainConfig {
    ChainConfig {
        sweeps,
        burn_in: sweeps / 10,
        thinning: 1,
        seed,
        rule,
        initial: InitialState::AllBoundary,
    }
}

#[test]
fn spin_at_origin_matches_enumeration() {
    let m = model(0.3, 1.2, 1.5, 0.2);
    let w = Interval::new(-5, 4).unwrap();
    let h = sample_disorder(DisorderKind::Bernoulli, w, 17);
    let event = EventSpec::SpinAt { site: 0, sign: Sign::Plus };
    let exact = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap().event_probability(&event).unwrap();
    for rule in [UpdateRule::Metropolis, UpdateRule::HeatBath] {
        let est = estimate_event(&m, &h, w, Sign::Plus, &event, &config(200_000, 5, rule)).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.std_error,
            "{rule:?}: {} ± {} vs {exact}",
            est.mean,
            est.std_error
        );
    }
}

#[test]
fn every_event_kind_agrees_within_four_errors() {
    let w = Interval::new(-6, 5).unwrap();
    let events = [
        EventSpec::SpinAt { site: 1, sign: Sign::Minus },
        EventSpec::RunEquals { interval: Interval::new(-1, 1).unwrap(), sign: Sign::Plus },
        EventSpec::RunAny { interval: Interval::new(0, 2).unwrap() },
        EventSpec::LongRun { region: w, min_len: 6 },
        EventSpec::Well { interval: Interval::new(0, 0).unwrap(), sign: Sign::Minus },
        EventSpec::SmallWellAt { site: 0, max_len: 2, sign: Sign::Minus },
        EventSpec::AnySmallWell { region: Interval::new(-3, 3).unwrap(), max_len: 2 },
    ];
    for (k, (alpha, boundary)) in [(0.0, Sign::Plus), (0.5, Sign::Minus)].into_iter().enumerate() {
        let m = model(alpha, 1.2, 1.0, 0.4);
        let h = sample_disorder(DisorderKind::Bernoulli, w, 40 + k as u64);
        let exact = ExactMeasure::new(&m, &h, w, boundary).unwrap().event_probabilities(&events).unwrap();
        let est = estimate_events(&m, &h, w, boundary, &events, &config(150_000, 9, UpdateRule::HeatBath)).unwrap();
        for ((e, p), x) in events.iter().zip(&exact).zip(&est) {
            assert!((x.mean - p).abs() <= 4.0 * x.std_error, "{e}: {} ± {} vs {p}", x.mean, x.std_error);
        }
    }
}

#[test]
#[allow(clippy::needless_range_loop)]
fn two_site_transition_frequencies_balance() {
    // Count transitions between every ordered pair of the four states.
    let m = model(0.2, 1.2, 1.0, 0.5);
    let w = Interval::new(0, 1).unwrap();
    let h = sample_disorder(DisorderKind::Bernoulli, w, 3);
    let mu = ExactMeasure::new(&m, &h, w, Sign::Plus).unwrap();
    let mut chain = Chain::new(&m, &h, w, Sign::Plus, UpdateRule::Metropolis, InitialState::AllBoundary, 12).unwrap();
    let idx = |s: &SpinWindow| s.spins().iter().fold(0usize, |a, &x| 2 * a + (x > 0) as usize);
    let mut counts = [[0f64; 4]; 4];
    let mut prev = idx(chain.spins());
    let n = 400_000;
    for _ in 0..n {
        chain.sweep();
        let cur = idx(chain.spins());
        counts[prev][cur] += 1.0;
        prev = cur;
    }
    for a in 0..4 {
        for b in a + 1..4 {
            let (f, r) = (counts[a][b], counts[b][a]);
            if f + r > 100.0 {
                let se = (f + r).sqrt();
                assert!((f - r).abs() <= 4.0 * se, "{a}->{b}: {f} vs {r}");
            }
        }
    }
    let states: Vec<SpinWindow> = (0..4u64)
        .map(|b| SpinWindow::new(0, vec![if b & 2 != 0 { 1 } else { -1 }, if b & 1 != 0 { 1 } else { -1 }], Sign::Plus).unwrap())
        .collect();
    for (k, s) in states.iter().enumerate() {
        let p = mu.probability_of(s).unwrap();
        let freq = counts[k].iter().sum::<f64>() / n as f64;
        assert!((freq - p).abs() < 0.01, "state {k}: {freq} vs {p}");
    }
}

#[test]
fn standard_error_shrinks_like_root_n() {
    let m = model(0.3, 1.2, 1.0, 0.3);
    let w = Interval::new(-5, 5).unwrap();
    let h = sample_disorder(DisorderKind::Bernoulli, w, 2);
    let event = EventSpec::SpinAt { site: 0, sign: Sign::Plus };
    let mut ratios = Vec::new();
    for seed in 0..4 {
        let a = estimate_event(&m, &h, w, Sign::Plus, &event, &config(40_000, seed, UpdateRule::HeatBath)).unwrap();
        let b = estimate_event(&m, &h, w, Sign::Plus, &event, &config(80_000, seed + 100, UpdateRule::HeatBath)).unwrap();
        ratios.push(b.std_error / a.std_error);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let target = 0.5f64.sqrt();
    assert!((mean - target).abs() <= 0.3 * target, "{ratios:?}");
}

#[test]
fn tracked_energy_follows_direct_recomputation() {
    let m = model(0.4, 1.2, 1.0, 0.5);
    let w = Interval::new(0, 30).unwrap();
    let h = sample_disorder(DisorderKind::Bernoulli, w, 5);
    let mut chain = Chain::new(&m, &h, w, Sign::Plus, UpdateRule::Metropolis, InitialState::Random, 1).unwrap();
    for _ in 0..500 {
        chain.sweep();
    }
    let direct = m.total_energy(chain.spins(), &h).unwrap();
    assert!((chain.tracked_energy() - direct).abs() < 1e-8 * direct.abs().max(1.0));
}

#[test]
fn snapshots_roundtrip() {
    let m = model(0.4, 1.2, 1.0, 0.5);
    let w = Interval::new(-3, 3).unwrap();
    let h = sample_disorder(DisorderKind::Bernoulli, w, 5);
    let snaps = collect_snapshots(&m, &h, w, Sign::Minus, &config(50, 3, UpdateRule::Metropolis)).unwrap();
    let mut buf = Vec::new();
    mcmc::write_snapshots(&mut buf, &snaps).unwrap();
    let back = mcmc::read_snapshots(buf.as_slice()).unwrap();
    assert_eq!(snaps, back);
}
