use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfim_core::*;

fn params(alpha: f64, theta: f64) -> ModelParams {
    ModelParams::new(alpha, 10.0, 1.0, theta, DisorderKind::Gaussian).unwrap()
}

#[test]
fn flip_delta_matches_total_energy_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let window = Interval::new(-12, 11).unwrap();
    for k in 0..1000u64 {
        let alpha = [0.0, 0.25, 0.5, 0.9][(k % 4) as usize];
        let model = Model::new(params(alpha, rng.random_range(0.0..2.0)), 24).unwrap();
        let disorder = sample_disorder(DisorderKind::Gaussian, window, k);
        let boundary = if rng.random() { Sign::Plus } else { Sign::Minus };
        let bits = rng.random::<u64>() & 0xFF_FFFF;
        let s = SpinWindow::from_bits(window.lo, 24, bits, boundary);
        let site = rng.random_range(window.lo..=window.hi);
        let mut t = s.clone();
        t.flip(site);
        let direct = model.total_energy(&t, &disorder).unwrap() - model.total_energy(&s, &disorder).unwrap();
        let local = model.flip_delta(&s, &disorder, site).unwrap();
        assert!((direct - local).abs() <= 1e-9 * direct.abs().max(1.0), "{direct} vs {local}");
    }
}

#[test]
fn tails_decrease_and_sit_inside_crude_brackets() {
    for alpha in [0.0, 0.3, 0.5, 0.8] {
        let table = CouplingTable::new(alpha, 10.0, 512).unwrap();
        for d in 1..400 {
            assert!(table.tail(d + 1) < table.tail(d));
            assert!((table.tail(d) - table.tail(d + 1) - table.coupling(d)).abs() < 1e-9 * table.tail(d));
        }
        for d in [2usize, 5, 17] {
            let (lo, hi) = table.crude_bracket(d, 200);
            assert!(lo <= table.tail(d) && table.tail(d) <= hi, "alpha {alpha} d {d}");
        }
    }
}

proptest! {
    #[test]
    fn spin_flip_symmetry(bits in 0u64..(1 << 16), seed in any::<u64>(), alpha in 0.0f64..0.95, theta in 0.0f64..2.0) {
        let window = Interval::new(0, 15).unwrap();
        let model = Model::new(params(alpha, theta), 16).unwrap();
        let h = sample_disorder(DisorderKind::Gaussian, window, seed);
        let s = SpinWindow::from_bits(0, 16, bits, Sign::Plus);
        let a = model.total_energy(&s, &h).unwrap();
        let b = model.total_energy(&s.negated(), &h.negated()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn zero_field_energy_is_nonnegative(bits in 0u64..(1 << 16), alpha in 0.0f64..0.95) {
        let window = Interval::new(0, 15).unwrap();
        let model = Model::new(params(alpha, 0.0), 16).unwrap();
        let h = sample_disorder(DisorderKind::Gaussian, window, 0);
        let s = SpinWindow::from_bits(0, 16, bits, Sign::Minus);
        let e = model.total_energy(&s, &h).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert_eq!(e == 0.0, s.spins().iter().all(|&x| x == -1));
    }

    #[test]
    fn translation_invariance(bits in 0u64..(1 << 12), shift in -50i64..50, seed in any::<u64>()) {
        let model = Model::new(params(0.4, 0.7), 12).unwrap();
        let h = sample_disorder(DisorderKind::Gaussian, Interval::new(0, 11).unwrap(), seed);
        let moved = DisorderField::from_values(shift, h.values().to_vec(), seed, DisorderKind::Gaussian).unwrap();
        let s = SpinWindow::from_bits(0, 12, bits, Sign::Plus);
        let t = SpinWindow::from_bits(shift, 12, bits, Sign::Plus);
        let a = model.total_energy(&s, &h).unwrap();
        let b = model.total_energy(&t, &moved).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn disorder_is_reproducible(seed in any::<u64>()) {
        let w = Interval::new(-5, 5).unwrap();
        prop_assert_eq!(
            sample_disorder(DisorderKind::Bernoulli, w, seed),
            sample_disorder(DisorderKind::Bernoulli, w, seed)
        );
    }
}
