//! Single-site Metropolis and heat-bath dynamics for the Gibbs measure on
//! windows far beyond the enumeration cap.
//!
//! Each chain keeps the local field `f_i` of every site, so proposing an
//! update costs `O(1)` and an accepted flip costs `O(|window|)`. The cache
//! is rebuilt from scratch every [`FIELD_REFRESH_SWEEPS`] sweeps.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventSpec;
use crate::interval::Interval;
use crate::lattice::{DisorderField, Model, Sign, SpinWindow};

pub const MIN_BATCHES: usize = 20;
pub const FIELD_REFRESH_SWEEPS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    Metropolis,
    HeatBath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Every spin equal to the boundary sign.
    AllBoundary,
    /// Independent fair coin flips drawn from the chain's generator.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Total sweeps, burn-in included.
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub rule: UpdateRule,
    pub initial: InitialState,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.thinning == 0 {
            return Err(Error::Domain("sweeps and thinning must be positive".into()));
        }
        if self.burn_in >= self.sweeps {
            return Err(Error::Domain(format!(
                "burn-in ({}) must be shorter than the run ({} sweeps)",
                self.burn_in, self.sweeps
            )));
        }
        Ok(())
    }

    /// Number of recorded samples.
    pub fn samples(&self) -> usize {
        ((self.sweeps - self.burn_in) / self.thinning) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepStats {
    pub accepted: u64,
    /// Sum of the energy changes of accepted updates.
    pub delta_sum: f64,
}

/// Spins plus the cached local fields and running energy.
#[derive(Debug, Clone)]
struct LocalState {
    spins: SpinWindow,
    fields: Vec<f64>,
    energy: f64,
}

impl LocalState {
    fn new(model: &Model, disorder: &DisorderField, spins: SpinWindow) -> Result<Self> {
        let energy = model.total_energy(&spins, disorder)?;
        let fields = spins
            .interval()
            .sites()
            .map(|site| model.local_field(&spins, disorder, site))
            .collect();
        Ok(Self { spins, fields, energy })
    }

    fn refresh_fields(&mut self, model: &Model, disorder: &DisorderField) {
        for (k, site) in self.spins.interval().sites().enumerate() {
            self.fields[k] = model.local_field(&self.spins, disorder, site);
        }
    }

    fn apply_flip(&mut self, model: &Model, k: usize, delta: f64) {
        let s_old = self.spins.spin_at_offset(k) as f64;
        self.spins.flip_offset(k);
        self.energy += delta;
        let table = &model.table;
        for (j, f) in self.fields.iter_mut().enumerate() {
            if j != k {
                *f -= 2.0 * s_old * table.coupling(j.abs_diff(k));
            }
        }
    }

    /// One update at offset `k`; returns the accepted energy change.
    fn update<R: Rng + ?Sized>(
        &mut self,
        model: &Model,
        k: usize,
        rule: UpdateRule,
        rng: &mut R,
        sign_fault: bool,
    ) -> Option<f64> {
        let beta = model.beta();
        let s = self.spins.spin_at_offset(k) as f64;
        let mut delta = 2.0 * s * self.fields[k];
        if sign_fault {
            delta = -delta;
        }
        let u: f64 = rng.random();
        let flip = match rule {
            UpdateRule::Metropolis => delta <= 0.0 || u < (-beta * delta).exp(),
            UpdateRule::HeatBath => {
                // H(s_k = -1) - H(s_k = +1)
                let gap = if s > 0.0 { delta } else { -delta };
                let p_plus = 1.0 / (1.0 + (-beta * gap).exp());
                let want_plus = u < p_plus;
                want_plus != (s > 0.0)
            }
        };
        if flip {
            self.apply_flip(model, k, delta);
            Some(delta)
        } else {
            None
        }
    }
}

/// One random-scan sweep (`|window|` single-site updates at uniformly
/// chosen sites) applied to `spins` in place.
pub fn sweep<R: Rng + ?Sized>(
    model: &Model,
    disorder: &DisorderField,
    spins: &mut SpinWindow,
    rule: UpdateRule,
    rng: &mut R,
) -> Result<SweepStats> {
    let mut state = LocalState::new(model, disorder, spins.clone())?;
    let mut stats = SweepStats::default();
    let n = state.spins.len();
    for _ in 0..n {
        let k = rng.random_range(0..n);
        if let Some(d) = state.update(model, k, rule, rng, false) {
            stats.accepted += 1;
            stats.delta_sum += d;
        }
    }
    *spins = state.spins;
    Ok(stats)
}

/// A seeded Markov chain on one window.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    model: &'a Model,
    disorder: &'a DisorderField,
    state: LocalState,
    rng: ChaCha8Rng,
    rule: UpdateRule,
    sweeps_done: u64,
    sign_fault: bool,
}

impl<'a> Chain<'a> {
    pub fn new(
        model: &'a Model,
        disorder: &'a DisorderField,
        window: Interval,
        boundary: Sign,
        rule: UpdateRule,
        initial: InitialState,
        seed: u64,
    ) -> Result<Self> {
        disorder.covers(window)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = match initial {
            InitialState::AllBoundary => SpinWindow::uniform(window, boundary, boundary),
            InitialState::Random => {
                let spins = (0..window.len())
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect();
                SpinWindow::new(window.lo, spins, boundary)?
            }
        };
        Self::from_state(model, disorder, spins, rule, rng)
    }

    /// Chain started from an explicit configuration.
    pub fn from_spins(
        model: &'a Model,
        disorder: &'a DisorderField,
        spins: SpinWindow,
        rule: UpdateRule,
        seed: u64,
    ) -> Result<Self> {
        disorder.covers(spins.interval())?;
        Self::from_state(model, disorder, spins, rule, ChaCha8Rng::seed_from_u64(seed))
    }

    fn from_state(
        model: &'a Model,
        disorder: &'a DisorderField,
        spins: SpinWindow,
        rule: UpdateRule,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        Ok(Self {
            model,
            disorder,
            state: LocalState::new(model, disorder, spins)?,
            rng,
            rule,
            sweeps_done: 0,
            sign_fault: false,
        })
    }

    /// Deliberately negates every energy difference the chain computes.
    /// Test fixture for the telescoping check; never used by estimators.
    #[doc(hidden)]
    pub fn inject_flip_sign_fault(&mut self) {
        self.sign_fault = true;
    }

    pub fn spins(&self) -> &SpinWindow {
        &self.state.spins
    }

    /// Initial energy plus every accepted energy change so far.
    pub fn tracked_energy(&self) -> f64 {
        self.state.energy
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    pub fn sweep(&mut self) -> SweepStats {
        let n = self.state.spins.len();
        let mut stats = SweepStats::default();
        for _ in 0..n {
            let k = self.rng.random_range(0..n);
            if let Some(d) = self
                .state
                .update(self.model, k, self.rule, &mut self.rng, self.sign_fault)
            {
                stats.accepted += 1;
                stats.delta_sum += d;
            }
        }
        self.sweeps_done += 1;
        if self.sweeps_done.is_multiple_of(FIELD_REFRESH_SWEEPS) {
            self.state.refresh_fields(self.model, self.disorder);
        }
        stats
    }

    /// Runs `config`, calling `observe` on every retained sample.
    pub fn run<F: FnMut(&SpinWindow)>(&mut self, config: &ChainConfig, mut observe: F) -> Result<()> {
        config.validate()?;
        for t in 1..=config.sweeps {
            self.sweep();
            if t > config.burn_in && (t - config.burn_in).is_multiple_of(config.thinning) {
                observe(&self.state.spins);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub effective_samples: f64,
    pub samples: usize,
    pub batches: usize,
}

/// Batch-means estimate of the mean of a stationary series.
///
/// Uses `max(20, floor(sqrt(n)))` batches of equal size. The reported
/// standard error never drops below `1/n`, the resolution of a frequency
/// over `n` samples; a run that never (or always) sees the event would
/// otherwise claim zero uncertainty.
pub fn batch_means(series: &[f64]) -> Result<EventEstimate> {
    let n = series.len();
    let batches = MIN_BATCHES.max((n as f64).sqrt() as usize);
    if n < MIN_BATCHES || n / batches == 0 {
        return Err(Error::InsufficientSamples {
            samples: n,
            batches: MIN_BATCHES,
        });
    }
    let size = n / batches;
    let mean = series.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = series
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let batch_se = (var / batches as f64).sqrt();
    let std_error = batch_se.max(1.0 / n as f64);
    let iid_var = mean * (1.0 - mean);
    let effective_samples = if batch_se > 0.0 && iid_var > 0.0 {
        iid_var / (batch_se * batch_se)
    } else {
        n as f64
    };
    Ok(EventEstimate {
        mean,
        std_error,
        effective_samples,
        samples: n,
        batches,
    })
}

/// Frequencies of several events along one sample path.
pub fn estimate_events(
    model: &Model,
    disorder: &DisorderField,
    window: Interval,
    boundary: Sign,
    events: &[EventSpec],
    config: &ChainConfig,
) -> Result<Vec<EventEstimate>> {
    config.validate()?;
    for e in events {
        e.validate(window)?;
    }
    if config.samples() < MIN_BATCHES {
        return Err(Error::InsufficientSamples {
            samples: config.samples(),
            batches: MIN_BATCHES,
        });
    }
    let mut chain = Chain::new(model, disorder, window, boundary, config.rule, config.initial, config.seed)?;
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(config.samples()); events.len()];
    chain.run(config, |spins| {
        for (s, e) in series.iter_mut().zip(events) {
            s.push(if e.evaluate(spins) { 1.0 } else { 0.0 });
        }
    })?;
    series.iter().map(|s| batch_means(s)).collect()
}

pub fn estimate_event(
    model: &Model,
    disorder: &DisorderField,
    window: Interval,
    boundary: Sign,
    event: &EventSpec,
    config: &ChainConfig,
) -> Result<EventEstimate> {
    Ok(estimate_events(model, disorder, window, boundary, std::slice::from_ref(event), config)?[0])
}

/// Retained samples of a run.
pub fn collect_snapshots(
    model: &Model,
    disorder: &DisorderField,
    window: Interval,
    boundary: Sign,
    config: &ChainConfig,
) -> Result<Vec<SpinWindow>> {
    let mut chain = Chain::new(model, disorder, window, boundary, config.rule, config.initial, config.seed)?;
    let mut out = Vec::with_capacity(config.samples());
    chain.run(config, |s| out.push(s.clone()))?;
    Ok(out)
}

/// Writes snapshots as `+`/`-` lines after a `# window lo..hi boundary s` header.
pub fn write_snapshots<W: Write>(mut out: W, snapshots: &[SpinWindow]) -> std::io::Result<()> {
    if let Some(first) = snapshots.first() {
        writeln!(out, "# window {} boundary {}", first.interval(), first.boundary())?;
    }
    for s in snapshots {
        writeln!(out, "{}", s.to_line())?;
    }
    Ok(())
}

pub fn read_snapshots<R: BufRead>(input: R) -> Result<Vec<SpinWindow>> {
    let mut header: Option<(Interval, Sign)> = None;
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if let ["window", iv, "boundary", sign] = words.as_slice() {
                header = Some((iv.parse()?, sign.parse()?));
            }
            continue;
        }
        let (window, boundary) = header.ok_or_else(|| Error::Parse("snapshot before window header".into()))?;
        let s = SpinWindow::parse(window.lo, line, boundary)?;
        if s.len() != window.len() {
            return Err(Error::Parse(format!(
                "snapshot has {} sites, header says {}",
                s.len(),
                window.len()
            )));
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_disorder, DisorderKind, ModelParams};

    fn model(alpha: f64, j1: f64, beta: f64, theta: f64) -> Model {
        Model::new(ModelParams::new(alpha, j1, beta, theta, DisorderKind::Bernoulli).unwrap(), 64).unwrap()
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
    fn config_validation() {
        let mut c = config(100, 1, UpdateRule::HeatBath);
        assert!(c.validate().is_ok());
        c.burn_in = 100;
        assert!(c.validate().is_err());
        c.burn_in = 0;
        c.thinning = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn infinite_temperature_heat_bath_is_fair() {
        let m = model(0.2, 10.0, 0.0, 0.3);
        let w = Interval::new(0, 0).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut plus = 0;
        let trials = 20_000;
        let mut s = SpinWindow::uniform(w, Sign::Plus, Sign::Plus);
        for _ in 0..trials {
            sweep(&m, &h, &mut s, UpdateRule::HeatBath, &mut rng).unwrap();
            plus += (s.spin(0) > 0) as usize;
        }
        let freq = plus as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 4.0 * 0.5 / (trials as f64).sqrt(), "{freq}");
    }

    #[test]
    fn cold_ground_state_is_stable() {
        let m = model(0.0, 10.0, 50.0, 0.0);
        let w = Interval::new(-10, 10).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 1);
        for rule in [UpdateRule::Metropolis, UpdateRule::HeatBath] {
            let mut chain = Chain::new(&m, &h, w, Sign::Plus, rule, InitialState::AllBoundary, 9).unwrap();
            for _ in 0..1000 {
                chain.sweep();
            }
            assert!(chain.spins().spins().iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn telescoping_energy() {
        let m = model(0.3, 1.5, 1.0, 0.5);
        let w = Interval::new(-12, 12).unwrap();
        let h = sample_disorder(DisorderKind::Gaussian, w, 4);
        for rule in [UpdateRule::Metropolis, UpdateRule::HeatBath] {
            let mut chain = Chain::new(&m, &h, w, Sign::Minus, rule, InitialState::Random, 17).unwrap();
            let e0 = chain.tracked_energy();
            let mut sum = 0.0;
            for _ in 0..2500 {
                sum += chain.sweep().delta_sum;
            }
            let actual = m.total_energy(chain.spins(), &h).unwrap();
            assert!((e0 + sum - actual).abs() < 1e-6, "{rule:?}: {} vs {actual}", e0 + sum);
            assert!((chain.tracked_energy() - actual).abs() < 1e-6);
        }
    }

    #[test]
    fn sign_fault_breaks_telescoping() {
        let m = model(0.3, 1.5, 1.0, 0.5);
        let w = Interval::new(-12, 12).unwrap();
        let h = sample_disorder(DisorderKind::Gaussian, w, 4);
        let mut chain = Chain::new(&m, &h, w, Sign::Plus, UpdateRule::Metropolis, InitialState::Random, 3).unwrap();
        chain.inject_flip_sign_fault();
        for _ in 0..50 {
            chain.sweep();
        }
        let actual = m.total_energy(chain.spins(), &h).unwrap();
        assert!((chain.tracked_energy() - actual).abs() > 1e-6);
    }

    #[test]
    fn same_seed_same_path() {
        let m = model(0.25, 1.2, 0.2, 0.4);
        let w = Interval::new(-8, 8).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 2);
        let mut cfg = config(300, 77, UpdateRule::Metropolis);
        cfg.initial = InitialState::Random;
        let a = collect_snapshots(&m, &h, w, Sign::Plus, &cfg).unwrap();
        let b = collect_snapshots(&m, &h, w, Sign::Plus, &cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 78;
        let c = collect_snapshots(&m, &h, w, Sign::Plus, &cfg).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn complement_estimates_sum_to_one() {
        let m = model(0.3, 1.2, 0.7, 0.3);
        let w = Interval::new(-4, 5).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 8);
        let e = EventSpec::SpinAt { site: 0, sign: Sign::Plus };
        let est = estimate_events(&m, &h, w, Sign::Plus, &[e, e.conjugate()], &config(2000, 3, UpdateRule::HeatBath))
            .unwrap();
        assert_eq!(est[0].mean + est[1].mean, 1.0);
    }

    #[test]
    fn too_few_samples() {
        let m = model(0.3, 1.2, 0.7, 0.3);
        let w = Interval::new(0, 3).unwrap();
        let h = sample_disorder(DisorderKind::Bernoulli, w, 8);
        let e = EventSpec::SpinAt { site: 0, sign: Sign::Plus };
        let cfg = config(21, 3, UpdateRule::HeatBath);
        assert!(matches!(
            estimate_event(&m, &h, w, Sign::Plus, &e, &cfg),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(batch_means(&[1.0; 19]).is_err());
    }

    #[test]
    fn batch_means_of_iid_coin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..40_000).map(|_| rng.random::<bool>() as u8 as f64).collect();
        let est = batch_means(&xs).unwrap();
        assert_eq!(est.batches, 200);
        let iid = (0.25f64 / 40_000.0).sqrt();
        assert!((est.std_error / iid - 1.0).abs() < 0.25, "{} vs {iid}", est.std_error);
        let constant = batch_means(&[1.0; 400]).unwrap();
        assert_eq!(constant.mean, 1.0);
        assert_eq!(constant.std_error, 1.0 / 400.0);
    }

    #[test]
    fn snapshot_text_roundtrip() {
        let w = Interval::new(-2, 3).unwrap();
        let snaps = vec![
            SpinWindow::parse(-2, "++--+-", Sign::Minus).unwrap(),
            SpinWindow::parse(-2, "------", Sign::Minus).unwrap(),
        ];
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &snaps).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("# window {w} boundary -\n++--+-\n")));
        assert_eq!(read_snapshots(&buf[..]).unwrap(), snaps);
        assert!(read_snapshots(&b"++-\n"[..]).is_err());
    }
}
