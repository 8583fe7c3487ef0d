use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfim_core::geometry::*;
use rfim_core::{CouplingTable, Interval, Sign, SpinWindow};

fn window_config(lo: i64, n: usize, bits: u64) -> SpinWindow {
    SpinWindow::from_bits(lo, n, bits, Sign::Plus)
}

#[test]
fn roundtrip_is_identity_on_all_16_site_configurations() {
    for bits in 0..1u64 << 16 {
        let s = window_config(-8, 16, bits);
        let f = triangles_from_spins(&s).unwrap();
        assert_eq!(spins_from_triangles(&f).unwrap(), s, "bits {bits:016b}");
        let back = triangles_from_spins(&spins_from_triangles(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}

#[test]
fn constructed_families_are_compatible_on_14_sites() {
    for bits in 0..1u64 << 14 {
        let s = window_config(0, 14, bits);
        let f = triangles_from_spins(&s).unwrap();
        assert!(compatible(&f.triangles), "bits {bits:014b}: {:?}", f.triangles);
        let interfaces = (s.lo() - 1..=s.hi()).filter(|&x| s.spin(x) != s.spin(x + 1)).count();
        assert_eq!(2 * f.len(), interfaces);
    }
}

#[test]
fn supports_are_laminar() {
    for bits in (0..1u64 << 16).step_by(7) {
        let f = triangles_from_spins(&window_config(0, 16, bits)).unwrap();
        for (k, a) in f.triangles.iter().enumerate() {
            for b in &f.triangles[k + 1..] {
                assert!(!a.crosses(b));
            }
        }
    }
}

fn random_family(rng: &mut ChaCha8Rng, n: usize) -> Vec<Triangle> {
    let bits = rng.random::<u64>() & ((1u64 << n) - 1);
    triangles_from_spins(&window_config(0, n, bits)).unwrap().triangles
}

#[test]
fn peierls_margins_nonnegative_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for alpha in [0.0, 0.25, 0.5] {
        let table = CouplingTable::new(alpha, 10.0, 64).unwrap();
        for _ in 0..500 {
            let f = random_family(&mut rng, 24);
            let r = peierls_check(&f, &table, DEFAULT_SEPARATION).unwrap();
            assert_eq!(r.violations(), 0, "alpha {alpha}: {f:?} {r:?}");
        }
    }
}

#[test]
fn nested_pair_margins_quarter() {
    let s = SpinWindow::parse(-2, "++----++----++", Sign::Plus).unwrap();
    let f = triangles_from_spins(&s).unwrap();
    let table = CouplingTable::new(0.25, 10.0, 64).unwrap();
    let r = peierls_check(&f.triangles, &table, 3).unwrap();
    assert_eq!(r.sequential.len(), 2);
    assert!(r.min_margin() > 0.0);
}

#[test]
fn erase_energy_matches_window_energy_difference() {
    // H_0 of a + boundary window equals bulk + boundary energy.
    let table = CouplingTable::new(0.25, 10.0, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let bits = rng.random::<u64>() & 0xFFFFF;
        let s = window_config(0, 20, bits);
        let f = triangles_from_spins(&s).unwrap();
        let direct = rfim_core::bulk_energy(&s, &table) + rfim_core::boundary_energy(&s, &table);
        let via = erase_energy(&f.triangles, &f.triangles, &table).unwrap();
        assert!((direct - via).abs() < 1e-9 * direct.max(1.0), "{direct} vs {via}");
    }
}

#[test]
fn decomposition_audits_on_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let f = random_family(&mut rng, 30);
        let contours = decompose_contours(&f, DEFAULT_SEPARATION);
        let report = verify_contours(&f, &contours, DEFAULT_SEPARATION);
        assert!(report.passed(), "{f:?}: {report:?}");
    }
}

#[test]
fn far_separated_unions_decompose_independently() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let a = random_family(&mut rng, 12);
        let b = random_family(&mut rng, 12);
        let mass = a.iter().chain(&b).map(Triangle::mass).sum::<usize>().max(1) as i64;
        let shift = 12 + 3 * mass.pow(3) + 1;
        let b: Vec<Triangle> = b
            .iter()
            .map(|t| Triangle::new(t.lo + shift, t.hi + shift).unwrap())
            .collect();
        assert_eq!(independence_holds(&[a, b], 3), Some(true));
    }
}

proptest! {
    #[test]
    fn decomposition_ignores_input_order(bits in 0u64..(1 << 20), seed in any::<u64>()) {
        let f = triangles_from_spins(&window_config(0, 20, bits)).unwrap().triangles;
        let mut shuffled = f.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in (1..shuffled.len()).rev() {
            shuffled.swap(k, rng.random_range(0..=k));
        }
        prop_assert_eq!(decompose_contours(&f, 3), decompose_contours(&shuffled, 3));
    }

    #[test]
    fn runs_tile_and_alternate(bits in 0u64..(1 << 15)) {
        let s = window_config(-7, 15, bits);
        let r = runs(&s, Interval::new(-7, 7).unwrap()).unwrap();
        let total: usize = r.runs.iter().map(Run::len).sum();
        prop_assert_eq!(total, 15);
        for w in r.runs.windows(2) {
            prop_assert_eq!(w[0].end + 1, w[1].start);
            prop_assert_ne!(w[0].sign, w[1].sign);
            prop_assert_eq!(w[0].index + 1, w[1].index);
        }
        prop_assert!(r.origin_run().contains(0));
        let neg = runs(&s.negated(), Interval::new(-7, 7).unwrap()).unwrap();
        for (a, b) in r.runs.iter().zip(&neg.runs) {
            prop_assert_eq!((a.start, a.end, a.index), (b.start, b.end, b.index));
            prop_assert_eq!(a.sign, b.sign.flip());
        }
    }

    #[test]
    fn erase_energy_telescopes(bits in 0u64..(1 << 18), split in any::<u64>()) {
        let table = CouplingTable::new(0.25, 10.0, 64).unwrap();
        let f = triangles_from_spins(&window_config(0, 18, bits)).unwrap().triangles;
        let s1: Vec<Triangle> = f
            .iter()
            .enumerate()
            .filter(|(k, _)| split >> (k % 64) & 1 == 1)
            .map(|(_, t)| *t)
            .collect();
        let s2: Vec<Triangle> = f.iter().filter(|t| !s1.contains(t)).copied().collect();
        let rest: Vec<Triangle> = f.iter().filter(|t| !s1.contains(t)).copied().collect();
        let both: Vec<Triangle> = s1.iter().chain(&s2).copied().collect();
        let lhs = erase_energy(&both, &f, &table).unwrap();
        let rhs = erase_energy(&s1, &f, &table).unwrap() + erase_energy(&s2, &rest, &table).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1.0));
    }
}

/// Independent count: every subset of intervals in the window with total
/// mass `m`, filtered by the same acceptance rules, without pruning.
fn brute_force_count(m: usize, c: u64) -> usize {
    let reach = c as i64 * (m as i64).pow(3) + m as i64;
    let mut intervals = Vec::new();
    for lo in -reach..=reach {
        for mass in 1..=m as i64 {
            if lo + mass - 1 <= reach {
                intervals.push(Triangle::new(lo, lo + mass - 1).unwrap());
            }
        }
    }
    let mut count = 0;
    let mut stack: Vec<Triangle> = Vec::new();
    fn rec(
        intervals: &[Triangle],
        from: usize,
        left: usize,
        c: u64,
        stack: &mut Vec<Triangle>,
        count: &mut usize,
    ) {
        if left == 0 {
            let lo = stack.iter().map(|t| t.lo).min().unwrap();
            let hi = stack.iter().map(|t| t.hi).max().unwrap();
            if lo <= 0 && 0 <= hi && is_realizable(stack) && decompose_contours(stack, c).len() == 1 {
                *count += 1;
            }
            return;
        }
        for k in from..intervals.len() {
            if intervals[k].mass() <= left {
                stack.push(intervals[k]);
                rec(intervals, k + 1, left - intervals[k].mass(), c, stack, count);
                stack.pop();
            }
        }
    }
    rec(&intervals, 0, m, c, &mut stack, &mut count);
    count
}

#[test]
fn entropy_counts_match_brute_force_and_golden_file() {
    let golden: serde_json::Value =
        serde_json::from_str(include_str!("golden/entropy_counts.json")).expect("golden file parses");
    for m in 1..=3usize {
        let e = entropy_sum(m, 10.0, 0.5, 3, OriginConvention::CoveringTriangle).unwrap();
        assert_eq!(e.count, brute_force_count(m, 3), "m = {m}");
        assert_eq!(
            e.count as u64,
            golden["covering_triangle"][m.to_string()].as_u64().unwrap(),
            "m = {m}"
        );
        let member = enumerate_contours(m, 3, OriginConvention::MemberSupport).unwrap();
        assert_eq!(
            member.len() as u64,
            golden["member_support"][m.to_string()].as_u64().unwrap()
        );
    }
}

#[test]
fn entropy_bound_holds_on_the_grid() {
    for m in 1..=3 {
        for b in [5.0, 10.0] {
            for alpha in [0.0, 0.5] {
                let e = entropy_sum(m, b, alpha, 3, OriginConvention::CoveringTriangle).unwrap();
                assert!(e.holds, "{e:?}");
            }
        }
    }
}

#[test]
fn entropy_sum_decreases_in_b() {
    let mut last = f64::INFINITY;
    for b in [1.0, 2.0, 4.0, 8.0] {
        let e = entropy_sum(3, b, 0.5, 3, OriginConvention::CoveringTriangle).unwrap();
        assert!(e.sum < last);
        last = e.sum;
    }
}
