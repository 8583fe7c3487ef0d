//! The model: couplings, disorder, spin windows and the energy functionals.
//!
//! The pair coupling is `J(1) = j1` and `J(n) = n^(alpha - 2)` for `n >= 2`.
//! The Hamiltonian on a finite window `[lo, hi]` with homogeneous boundary
//! sign `eta` is
//!
//! ```text
//! H(sigma) = 1/2 sum_{i,j in window} J(|i-j|) (1 - s_i s_j)
//!          - theta sum_i h_i s_i
//!          + sum_{i in window} sum_{j outside} J(|i-j|) (1 - s_i eta)
//! ```
//!
//! The exterior sum is evaluated with tail sums `K(d) = sum_{n >= d} J(n)`,
//! cached in a [`CouplingTable`].

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interval::Interval;

pub const DEFAULT_J1: f64 = 10.0;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// A spin value or a homogeneous boundary sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_spin(s: i8) -> Sign {
        if s > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("bad sign {other:?}"))),
        }
    }
}

/// Distribution of the i.i.d. symmetric random fields `h_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisorderKind {
    Bernoulli,
    Gaussian,
    /// `X / a` with `X` uniform on `[-a, a]`.
    UniformSubgaussian { a: f64 },
}

impl fmt::Display for DisorderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisorderKind::Bernoulli => write!(f, "bernoulli"),
            DisorderKind::Gaussian => write!(f, "gaussian"),
            DisorderKind::UniformSubgaussian { a } => write!(f, "uniform:{a}"),
        }
    }
}

impl FromStr for DisorderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "bernoulli" => Ok(DisorderKind::Bernoulli),
            "gaussian" => Ok(DisorderKind::Gaussian),
            _ => {
                let a = s
                    .strip_prefix("uniform:")
                    .or_else(|| s.strip_prefix("uniform_subgaussian:"))
                    .ok_or_else(|| Error::Parse(format!("unknown disorder kind {s:?}")))?;
                let a: f64 = a
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad uniform scale {a:?}: {e}")))?;
                if !(a > 0.0) {
                    return Err(Error::Parse(format!("uniform scale must be positive, got {a}")));
                }
                Ok(DisorderKind::UniformSubgaussian { a })
            }
        }
    }
}

/// The quenched model specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub j1: f64,
    pub beta: f64,
    pub theta: f64,
    pub disorder: DisorderKind,
}

impl ModelParams {
    pub fn new(alpha: f64, j1: f64, beta: f64, theta: f64, disorder: DisorderKind) -> Result<Self> {
        let p = Self {
            alpha,
            j1,
            beta,
            theta,
            disorder,
        };
        p.validate()?;
        Ok(p)
    }

    /// Bernoulli disorder with the default `J(1)`.
    pub fn bernoulli(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_J1, beta, theta, DisorderKind::Bernoulli)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return domain(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        if !(self.j1 > 1.0) || !self.j1.is_finite() {
            return domain(format!("j1 must exceed 1, got {}", self.j1));
        }
        // beta = 0 is admitted: it is the uniform-measure limit used in tests.
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return domain(format!("beta must be non-negative, got {}", self.beta));
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return domain(format!("theta must be non-negative, got {}", self.theta));
        }
        Ok(())
    }
}

/// `J(n)`: `j1` at distance one, `n^(alpha-2)` beyond.
pub fn coupling(params: &ModelParams, n: i64) -> Result<f64> {
    if n <= 0 {
        return domain(format!("coupling distance must be positive, got {n}"));
    }
    Ok(raw_coupling(params.alpha, params.j1, n as u64))
}

fn raw_coupling(alpha: f64, j1: f64, n: u64) -> f64 {
    if n == 1 {
        j1
    } else {
        (n as f64).powf(alpha - 2.0)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Rigorous bracket for `sum_{n >= h} n^(alpha-2)`, `h >= 2`.
///
/// `x^(alpha-2)` is convex, so the trapezoid rule overestimates and the
/// midpoint rule underestimates its integral:
/// `int_h^inf f + f(h)/2 <= sum <= int_{h-1/2}^inf f`.
fn remainder_bracket(alpha: f64, h: u64) -> (f64, f64) {
    let p = alpha - 1.0;
    let hf = h as f64;
    let integral_from = |x: f64| x.powf(p) / (1.0 - alpha);
    let lower = integral_from(hf) + 0.5 * hf.powf(alpha - 2.0);
    let upper = integral_from(hf - 0.5);
    (lower, upper)
}

/// Smallest horizon `>= start` (doubling search) whose bracket half-width
/// is within `tol`.
fn horizon_for(alpha: f64, start: u64, tol: f64) -> u64 {
    let mut h = start.max(2);
    loop {
        let (lo, hi) = remainder_bracket(alpha, h);
        if 0.5 * (hi - lo) <= tol || h > 1 << 40 {
            return h;
        }
        h *= 2;
    }
}

/// `sum_{n >= d} n^(alpha-2)` for `d >= 2`, with its half-width.
fn power_tail(alpha: f64, d: u64, tol: f64) -> (f64, f64) {
    let h = horizon_for(alpha, d, tol);
    let (lo, hi) = remainder_bracket(alpha, h);
    let mut acc = Compensated::default();
    acc.add(0.5 * (lo + hi));
    // smallest terms first
    for n in (d..h).rev() {
        acc.add((n as f64).powf(alpha - 2.0));
    }
    (acc.value(), 0.5 * (hi - lo))
}

/// Cached couplings `J(n)` and tail sums `K(d) = sum_{n >= d} J(n)`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    alpha: f64,
    j1: f64,
    tail_tolerance: f64,
    couplings: Vec<f64>,
    tails: Vec<f64>,
    tail_half_width: f64,
}

impl CouplingTable {
    /// Table with tails cached for `d <= horizon + 1`.
    pub fn new(alpha: f64, j1: f64, horizon: usize) -> Result<Self> {
        Self::with_tolerance(alpha, j1, horizon, DEFAULT_TAIL_TOLERANCE)
    }

    pub fn with_tolerance(alpha: f64, j1: f64, horizon: usize, tail_tolerance: f64) -> Result<Self> {
        if alpha >= 1.0 || alpha.is_nan() {
            return Err(Error::DivergentSeries(alpha));
        }
        if alpha < 0.0 {
            return domain(format!("alpha must be non-negative, got {alpha}"));
        }
        if !(tail_tolerance > 0.0) {
            return domain("tail tolerance must be positive");
        }
        let horizon = horizon.max(2);
        let couplings: Vec<f64> = (0..=horizon as u64 + 1)
            .map(|n| if n == 0 { 0.0 } else { raw_coupling(alpha, j1, n) })
            .collect();

        // K(horizon + 1) directly, then K(d) = J(d) + K(d + 1) downwards.
        let top = horizon as u64 + 1;
        let (k_top, half_width) = power_tail(alpha, top, tail_tolerance);
        let mut tails = vec![0.0; horizon + 2];
        let mut acc = Compensated::default();
        acc.add(k_top);
        tails[top as usize] = k_top;
        for d in (1..top as usize).rev() {
            acc.add(couplings[d]);
            tails[d] = acc.value();
        }
        Ok(Self {
            alpha,
            j1,
            tail_tolerance,
            couplings,
            tails,
            tail_half_width: half_width,
        })
    }

    pub fn for_params(params: &ModelParams, horizon: usize) -> Result<Self> {
        Self::new(params.alpha, params.j1, horizon)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// Largest `d` with a cached tail sum.
    pub fn horizon(&self) -> usize {
        self.tails.len() - 1
    }

    /// Bracket half-width of the directly computed top tail.
    pub fn tail_half_width(&self) -> f64 {
        self.tail_half_width
    }

    /// `J(n)` for `n >= 1`.
    #[inline]
    pub fn coupling(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match self.couplings.get(n) {
            Some(&v) => v,
            None => raw_coupling(self.alpha, self.j1, n as u64),
        }
    }

    /// `K(d)` for `d >= 1`.
    #[inline]
    pub fn tail(&self, d: usize) -> f64 {
        debug_assert!(d >= 1);
        match self.tails.get(d) {
            Some(&v) => v,
            None => power_tail(self.alpha, d as u64, self.tail_tolerance).0,
        }
    }

    /// Checked `K(d)`.
    pub fn tail_sum(&self, d: i64) -> Result<f64> {
        if d < 1 {
            return domain(format!("tail sum index must be positive, got {d}"));
        }
        Ok(self.tail(d as usize))
    }

    /// Coarse bracket from truncation at `h`:
    /// `partial + int_h^inf <= K(d) <= partial + int_{h-1}^inf`, where
    /// `partial = sum_{d <= n < h} J(n)`.
    pub fn crude_bracket(&self, d: usize, h: usize) -> (f64, f64) {
        assert!(d >= 1 && h > d && h >= 2);
        let mut partial = Compensated::default();
        for n in (d..h).rev() {
            partial.add(self.coupling(n));
        }
        let p = self.alpha - 1.0;
        let lower = (h as f64).powf(p) / (1.0 - self.alpha);
        let upper = ((h - 1) as f64).powf(p) / (1.0 - self.alpha);
        let partial = partial.value();
        (partial + lower, partial + upper)
    }

    /// Exterior coupling of site `i` in `window`: `K(i-lo+1) + K(hi-i+1)`.
    #[inline]
    pub fn exterior(&self, window: Interval, site: i64) -> f64 {
        self.tail((site - window.lo + 1) as usize) + self.tail((window.hi - site + 1) as usize)
    }
}

/// Spins on a finite window with a homogeneous boundary sign outside it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinWindow {
    lo: i64,
    spins: Vec<i8>,
    boundary: Sign,
}

impl SpinWindow {
    pub fn new(lo: i64, spins: Vec<i8>, boundary: Sign) -> Result<Self> {
        if spins.is_empty() {
            return domain("spin window must contain at least one site");
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return domain(format!("spin values must be +1 or -1, got {bad}"));
        }
        Ok(Self { lo, spins, boundary })
    }

    /// Every site set to `fill`.
    pub fn uniform(window: Interval, fill: Sign, boundary: Sign) -> Self {
        Self {
            lo: window.lo,
            spins: vec![fill.value(); window.len()],
            boundary,
        }
    }

    /// Parses `"+,+,-"`, `"++-"` or `"+ + -"`.
    pub fn parse(lo: i64, text: &str, boundary: Sign) -> Result<Self> {
        let spins = text
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Parse(format!("bad spin character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(lo, spins, boundary)
    }

    /// Sites `lo..lo+n` decoded from the low `n` bits of `bits`
    /// (bit set means spin -1).
    pub fn from_bits(lo: i64, n: usize, bits: u64, boundary: Sign) -> Self {
        let spins = (0..n)
            .map(|k| if bits >> k & 1 == 1 { -1 } else { 1 })
            .collect();
        Self { lo, spins, boundary }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.spins.len() as i64 - 1
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.lo,
            hi: self.hi(),
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn boundary(&self) -> Sign {
        self.boundary
    }

    pub fn set_boundary(&mut self, boundary: Sign) {
        self.boundary = boundary;
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Spin at `site`, falling back to the boundary sign outside the window.
    #[inline]
    pub fn spin(&self, site: i64) -> i8 {
        let k = site - self.lo;
        if k >= 0 && (k as usize) < self.spins.len() {
            self.spins[k as usize]
        } else {
            self.boundary.value()
        }
    }

    #[inline]
    pub fn spin_at_offset(&self, k: usize) -> i8 {
        self.spins[k]
    }

    pub fn set(&mut self, site: i64, value: Sign) {
        let k = self.offset(site).expect("site outside window");
        self.spins[k] = value.value();
    }

    pub fn flip(&mut self, site: i64) {
        let k = self.offset(site).expect("site outside window");
        self.spins[k] = -self.spins[k];
    }

    #[inline]
    pub fn flip_offset(&mut self, k: usize) {
        self.spins[k] = -self.spins[k];
    }

    pub fn offset(&self, site: i64) -> Option<usize> {
        let k = site - self.lo;
        (k >= 0 && (k as usize) < self.spins.len()).then_some(k as usize)
    }

    /// Global spin flip, boundary included.
    pub fn negated(&self) -> Self {
        Self {
            lo: self.lo,
            spins: self.spins.iter().map(|s| -s).collect(),
            boundary: self.boundary.flip(),
        }
    }

    /// `'+'`/`'-'` characters, one per site.
    pub fn to_line(&self) -> String {
        self.spins
            .iter()
            .map(|&s| if s > 0 { '+' } else { '-' })
            .collect()
    }
}

/// A realization of the random field on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderField {
    lo: i64,
    values: Vec<f64>,
    seed: u64,
    kind: DisorderKind,
}

impl DisorderField {
    /// Field with explicit values (seed recorded as given).
    pub fn from_values(lo: i64, values: Vec<f64>, seed: u64, kind: DisorderKind) -> Result<Self> {
        if values.is_empty() {
            return domain("disorder field must cover at least one site");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("disorder values must be finite");
        }
        Ok(Self {
            lo,
            values,
            seed,
            kind,
        })
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.lo,
            hi: self.lo + self.values.len() as i64 - 1,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> DisorderKind {
        self.kind
    }

    /// `h_site`; panics outside the field's window.
    #[inline]
    pub fn h(&self, site: i64) -> f64 {
        self.values[(site - self.lo) as usize]
    }

    /// Global relabeling `h -> -h`.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn covers(&self, window: Interval) -> Result<()> {
        if self.interval().contains_interval(&window) {
            Ok(())
        } else {
            Err(Error::Coverage {
                have: self.interval().to_string(),
                need: window.to_string(),
            })
        }
    }

    /// Writes the `site,h` column pair.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "site,h")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.lo + k as i64, v)?;
        }
        Ok(())
    }

    /// Reads a `site,h` CSV written by [`DisorderField::write_csv`].
    pub fn read_csv<R: BufRead>(input: R, seed: u64, kind: DisorderKind) -> Result<Self> {
        let mut lo = None;
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "site,h" {
                continue;
            }
            let (site, h) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected site,h", lineno + 1)))?;
            let site: i64 = site
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let h: f64 = h
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let expected = *lo.get_or_insert(site) + values.len() as i64;
            if site != expected {
                return Err(Error::Parse(format!(
                    "line {}: sites must be consecutive (expected {expected}, got {site})",
                    lineno + 1
                )));
            }
            values.push(h);
        }
        Self::from_values(lo.unwrap_or(0), values, seed, kind)
    }
}

/// Draws `h_i` for every site of `window`.
///
/// Site `i` uses its own ChaCha stream keyed by `(seed, i)`, so values do not
/// depend on the window they were drawn for.
pub fn sample_disorder(kind: DisorderKind, window: Interval, seed: u64) -> DisorderField {
    let values = window
        .sites()
        .map(|site| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(site as u64);
            match kind {
                DisorderKind::Bernoulli => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                DisorderKind::Gaussian => rng.sample(StandardNormal),
                DisorderKind::UniformSubgaussian { a } => rng.random_range(-a..=a) / a,
            }
        })
        .collect();
    DisorderField {
        lo: window.lo,
        values,
        seed,
        kind,
    }
}

/// `1/2 sum_{i,j} J(|i-j|)(1 - s_i s_j)` over the window.
pub fn bulk_energy(spins: &SpinWindow, table: &CouplingTable) -> f64 {
    let s = spins.spins();
    let mut acc = Compensated::default();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[i] != s[j] {
                acc.add(2.0 * table.coupling(j - i));
            }
        }
    }
    acc.value()
}

/// `-theta sum_i h_i s_i`.
pub fn field_energy(spins: &SpinWindow, disorder: &DisorderField, theta: f64) -> Result<f64> {
    disorder.covers(spins.interval())?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = spins
        .interval()
        .sites()
        .zip(spins.spins())
        .map(|(site, &s)| disorder.h(site) * s as f64)
        .sum();
    Ok(-theta * sum)
}

/// Interaction with the homogeneous exterior:
/// `sum_i (1 - s_i eta) [K(i-lo+1) + K(hi-i+1)]`.
pub fn boundary_energy(spins: &SpinWindow, table: &CouplingTable) -> f64 {
    let window = spins.interval();
    let eta = spins.boundary().value();
    let mut acc = Compensated::default();
    for (site, &s) in window.sites().zip(spins.spins()) {
        if s != eta {
            acc.add(2.0 * table.exterior(window, site));
        }
    }
    acc.value()
}

/// Parameters together with a coupling table sized for the windows in use.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub table: CouplingTable,
}

impl Model {
    /// Model whose table caches tails for windows of up to `max_window` sites.
    pub fn new(params: ModelParams, max_window: usize) -> Result<Self> {
        params.validate()?;
        let table = CouplingTable::for_params(&params, max_window.max(64) + 1)?;
        Ok(Self { params, table })
    }

    pub fn with_table(params: ModelParams, table: CouplingTable) -> Result<Self> {
        params.validate()?;
        if table.alpha() != params.alpha || table.j1() != params.j1 {
            return domain("coupling table does not match model parameters");
        }
        Ok(Self { params, table })
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn theta(&self) -> f64 {
        self.params.theta
    }

    /// `H^eta(sigma) = bulk + field + boundary`.
    pub fn total_energy(&self, spins: &SpinWindow, disorder: &DisorderField) -> Result<f64> {
        let field = field_energy(spins, disorder, self.params.theta)?;
        Ok(bulk_energy(spins, &self.table) + field + boundary_energy(spins, &self.table))
    }

    /// `sum_{j != i} J s_j + eta [K(i-lo+1) + K(hi-i+1)] + theta h_i`.
    ///
    /// The energy is `const - s_i * local_field(i)` as a function of `s_i`.
    pub fn local_field(&self, spins: &SpinWindow, disorder: &DisorderField, site: i64) -> f64 {
        let window = spins.interval();
        let k = (site - window.lo) as usize;
        let s = spins.spins();
        let mut f = 0.0;
        for (j, &sj) in s.iter().enumerate() {
            if j != k {
                f += self.table.coupling(k.abs_diff(j)) * sj as f64;
            }
        }
        f + spins.boundary().value() as f64 * self.table.exterior(window, site)
            + self.params.theta * disorder.h(site)
    }

    /// `H(sigma flipped at site) - H(sigma)`.
    pub fn flip_delta(&self, spins: &SpinWindow, disorder: &DisorderField, site: i64) -> Result<f64> {
        let window = spins.interval();
        if !window.contains(site) {
            return domain(format!("site {site} outside window {window}"));
        }
        disorder.covers(window)?;
        Ok(2.0 * spins.spin(site) as f64 * self.local_field(spins, disorder, site))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZETA2_MINUS_1: f64 = 0.644_934_066_848_226_4;

    fn table(alpha: f64) -> CouplingTable {
        CouplingTable::new(alpha, 10.0, 256).unwrap()
    }

    #[test]
    fn coupling_branches() {
        let p0 = ModelParams::bernoulli(0.0, 1.0, 0.0).unwrap();
        assert_eq!(coupling(&p0, 1).unwrap(), 10.0);
        assert_eq!(coupling(&p0, 2).unwrap(), 0.25);
        let p = ModelParams::bernoulli(0.5, 1.0, 0.0).unwrap();
        assert!((coupling(&p, 2).unwrap() - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!(matches!(coupling(&p, 0), Err(Error::Domain(_))));
        assert!(matches!(coupling(&p, -3), Err(Error::Domain(_))));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::bernoulli(1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::bernoulli(-0.1, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0.2, 1.0, 1.0, 0.1, DisorderKind::Bernoulli).is_err());
        assert!(ModelParams::bernoulli(0.2, -1.0, 0.1).is_err());
        assert!(ModelParams::bernoulli(0.2, 0.0, 0.1).is_ok());
    }

    #[test]
    fn tail_sum_matches_zeta_two() {
        let t = table(0.0);
        assert!((t.tail_sum(2).unwrap() - ZETA2_MINUS_1).abs() < 1e-12);
        assert!((t.tail_sum(1).unwrap() - (10.0 + ZETA2_MINUS_1)).abs() < 1e-12);
        // beyond the cache
        let direct = t.tail_sum(5000).unwrap();
        let trigamma_approx = 1.0 / 4999.5; // psi'(d) ~ 1/(d - 1/2)
        assert!((direct - trigamma_approx).abs() < 1e-10);
        assert!(matches!(t.tail_sum(0), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_sum_divergence_is_an_error() {
        assert!(matches!(
            CouplingTable::new(1.0, 10.0, 16),
            Err(Error::DivergentSeries(_))
        ));
    }

    #[test]
    fn tail_invariants() {
        for alpha in [0.0, 0.25, 0.5, 0.9] {
            let t = table(alpha);
            assert!(t.tail_half_width() <= t.tail_tolerance());
            for d in 1..t.horizon() {
                assert!(t.tail(d) > t.tail(d + 1), "alpha {alpha} d {d}");
                assert!(t.tail(d) >= t.coupling(d));
            }
            for d in [1, 2, 3, 10, 100] {
                let (lo, hi) = t.crude_bracket(d, 400);
                assert!(lo <= t.tail(d) && t.tail(d) <= hi, "alpha {alpha} d {d}");
            }
        }
    }

    #[test]
    fn bulk_energy_examples() {
        let t = table(0.0);
        let all_plus = SpinWindow::uniform(Interval::new(-4, 4).unwrap(), Sign::Plus, Sign::Plus);
        assert_eq!(bulk_energy(&all_plus, &t), 0.0);
        let pm = SpinWindow::parse(0, "+-", Sign::Plus).unwrap();
        assert_eq!(bulk_energy(&pm, &t), 20.0);
        let pmp = SpinWindow::parse(0, "+-+", Sign::Plus).unwrap();
        assert_eq!(bulk_energy(&pmp, &t), 40.0);
    }

    #[test]
    fn field_energy_examples() {
        let window = Interval::new(0, 4).unwrap();
        let spins = SpinWindow::parse(0, "+-+--", Sign::Plus).unwrap();
        let aligned = DisorderField::from_values(
            0,
            spins.spins().iter().map(|&s| s as f64).collect(),
            0,
            DisorderKind::Bernoulli,
        )
        .unwrap();
        assert_eq!(field_energy(&spins, &aligned, 0.0).unwrap(), 0.0);
        assert!((field_energy(&spins, &aligned, 0.3).unwrap() + 1.5).abs() < 1e-15);

        let h = DisorderField::from_values(0, vec![1.0, -1.0], 0, DisorderKind::Bernoulli).unwrap();
        let pp = SpinWindow::parse(0, "++", Sign::Plus).unwrap();
        assert_eq!(field_energy(&pp, &h, 0.2).unwrap(), 0.0);

        let short = sample_disorder(DisorderKind::Bernoulli, Interval::new(1, 4).unwrap(), 3);
        let s = SpinWindow::uniform(window, Sign::Plus, Sign::Plus);
        assert!(matches!(field_energy(&s, &short, 0.1), Err(Error::Coverage { .. })));
    }

    #[test]
    fn boundary_energy_examples() {
        let t = table(0.0);
        let k1 = 10.0 + ZETA2_MINUS_1;
        let single = SpinWindow::parse(0, "-", Sign::Plus).unwrap();
        assert!((boundary_energy(&single, &t) - 4.0 * k1).abs() < 1e-11);
        assert!((4.0 * k1 - 42.579_736_267_392_9).abs() < 1e-9);

        let pair = SpinWindow::parse(0, "--", Sign::Plus).unwrap();
        let expected = 2.0 * (t.tail(1) + t.tail(2)) * 2.0;
        assert!((boundary_energy(&pair, &t) - expected).abs() < 1e-12);

        // direct truncated double sum over exterior sites
        let mut direct = 0.0;
        for i in 0..2i64 {
            for j in 2..200_000i64 {
                direct += 2.0 * t.coupling((j - i) as usize);
            }
            for j in -200_000..0i64 {
                direct += 2.0 * t.coupling((i - j) as usize);
            }
        }
        assert!((direct - expected).abs() < 1e-4);

        let aligned = SpinWindow::uniform(Interval::new(0, 5).unwrap(), Sign::Minus, Sign::Minus);
        assert_eq!(boundary_energy(&aligned, &t), 0.0);
    }

    #[test]
    fn total_energy_examples() {
        let params = ModelParams::bernoulli(0.0, 1.0, 0.2).unwrap();
        let model = Model::new(params, 16).unwrap();
        let window = Interval::new(0, 0).unwrap();
        let plus = DisorderField::from_values(0, vec![1.0], 0, DisorderKind::Bernoulli).unwrap();
        let s = SpinWindow::parse(0, "-", Sign::Plus).unwrap();
        let e = model.total_energy(&s, &plus).unwrap();
        assert!((e - (4.0 * (10.0 + ZETA2_MINUS_1) + 0.2)).abs() < 1e-11);

        let model0 = Model::new(ModelParams::bernoulli(0.0, 1.0, 0.0).unwrap(), 16).unwrap();
        let all_plus = SpinWindow::uniform(window, Sign::Plus, Sign::Plus);
        assert_eq!(model0.total_energy(&all_plus, &plus).unwrap(), 0.0);
    }

    #[test]
    fn flip_delta_in_plus_sea() {
        let model = Model::new(ModelParams::bernoulli(0.0, 1.0, 0.0).unwrap(), 64).unwrap();
        let window = Interval::new(-20, 20).unwrap();
        let s = SpinWindow::uniform(window, Sign::Plus, Sign::Plus);
        let h = sample_disorder(DisorderKind::Bernoulli, window, 1);
        let d = model.flip_delta(&s, &h, 0).unwrap();
        assert!((d - 4.0 * (10.0 + ZETA2_MINUS_1)).abs() < 1e-11);
        assert!(matches!(model.flip_delta(&s, &h, 21), Err(Error::Domain(_))));
    }

    #[test]
    fn disorder_support_and_determinism() {
        let window = Interval::new(-50, 50).unwrap();
        let a = sample_disorder(DisorderKind::Bernoulli, window, 42);
        let b = sample_disorder(DisorderKind::Bernoulli, window, 42);
        assert_eq!(a, b);
        assert!(a.values().iter().all(|&v| v == 1.0 || v == -1.0));
        let u = sample_disorder(DisorderKind::UniformSubgaussian { a: 3.0 }, window, 7);
        assert!(u.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        // nested windows agree site by site
        let inner = sample_disorder(DisorderKind::Gaussian, Interval::new(-5, 5).unwrap(), 9);
        let outer = sample_disorder(DisorderKind::Gaussian, window, 9);
        for site in -5..=5 {
            assert_eq!(inner.h(site).to_bits(), outer.h(site).to_bits());
        }
    }

    #[test]
    fn disorder_csv_roundtrip() {
        let f = sample_disorder(DisorderKind::Gaussian, Interval::new(-3, 4).unwrap(), 5);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = DisorderField::read_csv(&buf[..], 5, DisorderKind::Gaussian).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn bernoulli_mean_is_centered() {
        let n = 1_000_000;
        let f = sample_disorder(DisorderKind::Bernoulli, Interval::new(0, n - 1).unwrap(), 2024);
        let mean: f64 = f.values().iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }
}
