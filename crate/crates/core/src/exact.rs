//! Exact finite-volume Gibbs measure by enumeration of all `2^|window|`
//! configurations.
//!
//! Configurations are visited in Gray-code order so that each step is a
//! single spin flip with an `O(|window|)` energy update. The space is
//! sharded on the top bits; shards are reduced in index order so results
//! do not depend on scheduling.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::EventSpec;
use crate::interval::Interval;
use crate::lattice::{DisorderField, Model, Sign, SpinWindow};

pub const DEFAULT_ENUMERATION_CAP: usize = 22;
const SAMPLER_CAP: usize = 20;

/// Streaming `log sum exp` with a running maximum.
///
/// The terms other than the current maximum are kept apart (`rest`), so
/// `log(1 + tiny)` is evaluated with `ln_1p` instead of rounding to zero.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    rest: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            rest: 0.0,
        }
    }
}

impl LogSumExp {
    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            self.max = x;
        } else if x <= self.max {
            self.rest += (x - self.max).exp();
        } else {
            self.rest = (1.0 + self.rest) * (self.max - x).exp();
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
        } else if other.max <= self.max {
            self.rest += (1.0 + other.rest) * (other.max - self.max).exp();
        } else {
            self.rest = (1.0 + self.rest) * (self.max - other.max).exp() + other.rest;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.rest.ln_1p()
        }
    }
}

fn check_size(window: Interval, cap: usize) -> Result<()> {
    if window.len() > cap || window.len() > 62 {
        return Err(Error::Size {
            sites: window.len(),
            cap: cap.min(62),
        });
    }
    Ok(())
}

/// Visits every configuration of `window` as `(bits, spins, energy)`, one
/// accumulator per shard, returned in shard order. Bit `k` set means site
/// `window.lo + k` is `-1`.
fn fold_configurations<A, I, V>(
    model: &Model,
    disorder: &DisorderField,
    window: Interval,
    boundary: Sign,
    init: I,
    visit: V,
) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, u64, &SpinWindow, f64) + Sync,
{
    disorder.covers(window)?;
    let n = window.len();
    let shard_bits = if n >= 12 { 4 } else { 0 };
    let low_bits = n - shard_bits;
    let table = &model.table;

    (0..1u64 << shard_bits)
        .into_par_iter()
        .map(|shard| -> Result<A> {
            let base = shard << low_bits;
            let mut spins = SpinWindow::from_bits(window.lo, n, base, boundary);
            let mut energy = model.total_energy(&spins, disorder)?;
            let mut fields: Vec<f64> = window
                .sites()
                .map(|site| model.local_field(&spins, disorder, site))
                .collect();
            let mut acc = init();
            visit(&mut acc, base, &spins, energy);
            for k in 1..1u64 << low_bits {
                let bit = k.trailing_zeros() as usize;
                let s_old = spins.spin_at_offset(bit) as f64;
                energy += 2.0 * s_old * fields[bit];
                spins.flip_offset(bit);
                for (j, f) in fields.iter_mut().enumerate() {
                    if j != bit {
                        *f -= 2.0 * s_old * table.coupling(j.abs_diff(bit));
                    }
                }
                let gray = k ^ (k >> 1);
                visit(&mut acc, base | gray, &spins, energy);
            }
            Ok(acc)
        })
        .collect()
}

/// The Gibbs measure `mu^eta` on a small window, with its log partition
/// function precomputed.
#[derive(Debug, Clone)]
pub struct ExactMeasure<'a> {
    model: &'a Model,
    disorder: &'a DisorderField,
    window: Interval,
    boundary: Sign,
    log_z: f64,
}

impl<'a> ExactMeasure<'a> {
    pub fn new(model: &'a Model, disorder: &'a DisorderField, window: Interval, boundary: Sign) -> Result<Self> {
        Self::with_cap(model, disorder, window, boundary, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(
        model: &'a Model,
        disorder: &'a DisorderField,
        window: Interval,
        boundary: Sign,
        cap: usize,
    ) -> Result<Self> {
        check_size(window, cap)?;
        let beta = model.beta();
        let shards = fold_configurations(model, disorder, window, boundary, LogSumExp::default, |acc, _, _, e| {
            acc.add(-beta * e)
        })?;
        let mut total = LogSumExp::default();
        for s in &shards {
            total.merge(s);
        }
        Ok(Self {
            model,
            disorder,
            window,
            boundary,
            log_z: total.value(),
        })
    }

    pub fn window(&self) -> Interval {
        self.window
    }

    pub fn boundary(&self) -> Sign {
        self.boundary
    }

    /// `log Z = log sum_sigma exp(-beta H(sigma))`.
    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    pub fn event_probability(&self, event: &EventSpec) -> Result<f64> {
        Ok(self.event_probabilities(std::slice::from_ref(event))?[0])
    }

    /// Probabilities of several events from one enumeration pass.
    pub fn event_probabilities(&self, events: &[EventSpec]) -> Result<Vec<f64>> {
        for e in events {
            e.validate(self.window)?;
        }
        let beta = self.model.beta();
        let shards = fold_configurations(
            self.model,
            self.disorder,
            self.window,
            self.boundary,
            || vec![LogSumExp::default(); events.len()],
            |acc, _, spins, e| {
                let lw = -beta * e;
                for (a, ev) in acc.iter_mut().zip(events) {
                    if ev.evaluate(spins) {
                        a.add(lw);
                    }
                }
            },
        )?;
        let mut totals = vec![LogSumExp::default(); events.len()];
        for shard in &shards {
            for (t, s) in totals.iter_mut().zip(shard) {
                t.merge(s);
            }
        }
        Ok(totals
            .iter()
            .map(|t| (t.value() - self.log_z).exp().clamp(0.0, 1.0))
            .collect())
    }

    /// Probability of a single configuration.
    pub fn probability_of(&self, spins: &SpinWindow) -> Result<f64> {
        if spins.interval() != self.window || spins.boundary() != self.boundary {
            return Err(Error::Domain("configuration does not match the measure's window".into()));
        }
        let e = self.model.total_energy(spins, self.disorder)?;
        Ok((-self.model.beta() * e - self.log_z).exp())
    }

    /// Materializes the measure for inverse-CDF sampling.
    pub fn sampler(&self) -> Result<ExactSampler> {
        check_size(self.window, SAMPLER_CAP)?;
        let beta = self.model.beta();
        let shards = fold_configurations(
            self.model,
            self.disorder,
            self.window,
            self.boundary,
            Vec::new,
            |acc: &mut Vec<(u64, f64)>, bits, _, e| acc.push((bits, -beta * e)),
        )?;
        let mut configs = Vec::with_capacity(1 << self.window.len());
        let mut cdf = Vec::with_capacity(1 << self.window.len());
        let mut running = 0.0;
        for (bits, lw) in shards.into_iter().flatten() {
            running += (lw - self.log_z).exp();
            configs.push(bits);
            cdf.push(running);
        }
        Ok(ExactSampler {
            window: self.window,
            boundary: self.boundary,
            configs,
            cdf,
        })
    }
}

/// `log Z` for one window.
pub fn log_partition(model: &Model, disorder: &DisorderField, window: Interval, boundary: Sign) -> Result<f64> {
    Ok(ExactMeasure::new(model, disorder, window, boundary)?.log_partition())
}

/// `mu^eta(event)` for one window.
pub fn event_probability(
    model: &Model,
    disorder: &DisorderField,
    window: Interval,
    boundary: Sign,
    event: &EventSpec,
) -> Result<f64> {
    event.validate(window)?;
    ExactMeasure::new(model, disorder, window, boundary)?.event_probability(event)
}

/// Independent draws from an enumerated measure.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    window: Interval,
    boundary: Sign,
    configs: Vec<u64>,
    cdf: Vec<f64>,
}

impl ExactSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinWindow {
        let total = *self.cdf.last().expect("non-empty measure");
        let u = rng.random::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        SpinWindow::from_bits(self.window.lo, self.window.len(), self.configs[idx], self.boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_disorder, DisorderKind, ModelParams};

    const K1: f64 = 10.0 + 0.644_934_066_848_226_4;

    fn model(alpha: f64, beta: f64, theta: f64) -> Model {
        Model::new(ModelParams::bernoulli(alpha, beta, theta).unwrap(), 32).unwrap()
    }

    #[test]
    fn single_site_closed_form() {
        let m = model(0.0, 1.0, 0.0);
        let w = Interval::new(0, 0).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 1);
        let lz = log_partition(&m, &h, w, Sign::Plus).unwrap();
        let expected = (-4.0 * K1).exp().ln_1p();
        assert!((lz - expected).abs() < 1e-30, "{lz} vs {expected}");
        assert!((lz - 3.22e-19).abs() < 0.01e-19);
    }

    #[test]
    fn single_site_event() {
        let m = model(0.0, 0.1, 0.0);
        let w = Interval::new(0, 0).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 1);
        let p = event_probability(&m, &h, w, Sign::Plus, &EventSpec::SpinAt { site: 0, sign: Sign::Plus }).unwrap();
        let expected = 1.0 / (1.0 + (-0.4 * K1).exp());
        assert!((p - expected).abs() < 1e-14);
        assert!((p - 0.98605).abs() < 1e-5);
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let m = model(0.3, 0.0, 0.5);
        let w = Interval::new(-3, 4).unwrap();
        let h = sample_disorder(DisorderKind::Gaussian, w, 3);
        let lz = log_partition(&m, &h, w, Sign::Minus).unwrap();
        assert!((lz - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gray_code_energies_match_direct_evaluation() {
        let m = model(0.25, 1.0, 0.4);
        let w = Interval::new(-6, 7).unwrap(); // 14 sites, sharded
        let h = sample_disorder(DisorderKind::Gaussian, w, 11);
        let shards = fold_configurations(&m, &h, w, Sign::Plus, Vec::new, |acc: &mut Vec<(u64, f64)>, bits, s, e| {
            if bits % 97 == 0 {
                acc.push((bits, e));
                assert_eq!(SpinWindow::from_bits(w.lo, w.len(), bits, Sign::Plus), *s);
            }
        })
        .unwrap();
        let mut seen = 0;
        for (bits, e) in shards.into_iter().flatten() {
            let s = SpinWindow::from_bits(w.lo, w.len(), bits, Sign::Plus);
            let direct = m.total_energy(&s, &h).unwrap();
            assert!((e - direct).abs() <= 1e-9 * direct.abs().max(1.0));
            seen += 1;
        }
        assert_eq!(seen, (1u64 << 14).div_ceil(97));
    }

    #[test]
    fn size_guard() {
        let m = model(0.0, 1.0, 0.1);
        let w = Interval::new(0, 22).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 1);
        assert!(matches!(log_partition(&m, &h, w, Sign::Plus), Err(Error::Size { .. })));
        let bad = EventSpec::SpinAt { site: 30, sign: Sign::Plus };
        let w = Interval::new(0, 3).unwrap();
        assert!(matches!(event_probability(&m, &h, w, Sign::Plus, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn log_sum_exp_merge_is_consistent() {
        let xs = [-3.0, 700.0, 2.5, -1e3, 699.0];
        let mut a = LogSumExp::default();
        for x in xs {
            a.add(x);
        }
        let mut left = LogSumExp::default();
        let mut right = LogSumExp::default();
        for x in &xs[..2] {
            left.add(*x);
        }
        for x in &xs[2..] {
            right.add(*x);
        }
        left.merge(&right);
        assert!((a.value() - left.value()).abs() < 1e-12);
        assert!((a.value() - (700.0 + (1.0 + (-1f64).exp()).ln())).abs() < 1e-9);
    }
}
