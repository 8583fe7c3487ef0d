//! Run-length statistics across disorder realizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rfim_core::bounds::{plan_lower, plan_upper, summary_g, DEFAULT_B, DEFAULT_D};
use rfim_core::geometry::runs;
use rfim_core::mcmc::Chain;
use rfim_core::{sample_disorder, Interval, Model, ModelParams, Sign};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::seeds::{derive, Stream};
use crate::{header_lines, HarnessError};

pub const RECORDS_SCHEMA: &str = "run-length-records/1";
pub const SUMMARY_SCHEMA: &str = "run-length-summary/1";

/// One run of one retained sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLengthRecord {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    pub disorder_seed: u64,
    pub chain_seed: u64,
    pub sample: usize,
    /// Run index, 1 for the run containing the origin.
    pub run: i64,
    pub length: usize,
    pub sign: char,
    pub contains_origin: bool,
    /// Neither end of the run touches the window edge.
    pub interior: bool,
}

/// Median, mean and percentile bootstrap intervals of one sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub median: f64,
    pub median_lo: f64,
    pub median_hi: f64,
    pub mean: f64,
    pub mean_lo: f64,
    pub mean_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
    pub origin_n: usize,
    pub origin_median: f64,
    pub origin_median_lo: f64,
    pub origin_median_hi: f64,
    pub origin_mean: f64,
    pub origin_mean_lo: f64,
    pub origin_mean_hi: f64,
    pub interior_n: usize,
    pub interior_median: f64,
    pub interior_median_lo: f64,
    pub interior_median_hi: f64,
    pub interior_mean: f64,
    pub interior_mean_lo: f64,
    pub interior_mean_hi: f64,
    /// `ln L_min` of the lower plan, empty when out of regime.
    pub plan_ln_l_min: Option<f64>,
    pub plan_ln_l_max: Option<f64>,
    pub plan_status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOutput {
    pub header: Vec<String>,
    pub records: Vec<RunLengthRecord>,
    pub summary: Vec<SummaryRow>,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1);
    sorted[k]
}

/// Percentile bootstrap (2.5%, 97.5%) with a seeded generator.
pub fn describe(values: &[f64], resamples: usize, seed: u64) -> Stat {
    let n = values.len();
    if n == 0 {
        return Stat {
            n,
            median: f64::NAN,
            median_lo: f64::NAN,
            median_hi: f64::NAN,
            mean: f64::NAN,
            mean_lo: f64::NAN,
            mean_hi: f64::NAN,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medians = Vec::with_capacity(resamples);
    let mut means = Vec::with_capacity(resamples);
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        for b in buf.iter_mut() {
            *b = values[rng.random_range(0..n)];
        }
        means.push(buf.iter().sum::<f64>() / n as f64);
        medians.push(median(&mut buf));
    }
    medians.sort_by(f64::total_cmp);
    means.sort_by(f64::total_cmp);
    Stat {
        n,
        median: median(&mut values.to_vec()),
        median_lo: percentile(&medians, 0.025),
        median_hi: percentile(&medians, 0.975),
        mean: values.iter().sum::<f64>() / n as f64,
        mean_lo: percentile(&means, 0.025),
        mean_hi: percentile(&means, 0.975),
    }
}

struct Cell {
    alpha_idx: usize,
    theta_idx: usize,
    disorder_idx: usize,
}

fn run_cell(config: &ExperimentConfig, cell: &Cell, index: u64) -> Result<Vec<RunLengthRecord>, HarnessError> {
    let alpha = config.alphas[cell.alpha_idx];
    let theta = config.thetas[cell.theta_idx];
    let beta = config.beta.beta(alpha, theta)?;
    let params = ModelParams::new(alpha, config.j1, beta, theta, config.disorder)?;
    let model = Model::new(params, config.window)?;
    let window = Interval::centered(config.window);
    let disorder_seed = derive(config.master_seed, Stream::Disorder, cell.disorder_idx as u64);
    let chain_seed = derive(config.master_seed, Stream::Chain, index);
    let disorder = sample_disorder(config.disorder, window, disorder_seed);
    let c = &config.chain;
    let mut chain = Chain::new(&model, &disorder, window, Sign::Plus, c.rule, c.initial, chain_seed)?;
    let chain_config = rfim_core::ChainConfig {
        sweeps: c.sweeps,
        burn_in: c.burn_in,
        thinning: c.thinning,
        seed: chain_seed,
        rule: c.rule,
        initial: c.initial,
    };
    let mut out = Vec::new();
    let mut sample = 0;
    let mut failure = None;
    chain.run(&chain_config, |spins| {
        match runs(spins, window) {
            Ok(dec) => {
                for r in &dec.runs {
                    out.push(RunLengthRecord {
                        alpha,
                        theta,
                        beta,
                        disorder_seed,
                        chain_seed,
                        sample,
                        run: r.index,
                        length: r.len(),
                        sign: r.sign.symbol(),
                        contains_origin: r.contains(0),
                        interior: r.index != dec.b_v && r.index != dec.e_v,
                    });
                }
            }
            Err(e) => failure = Some(e),
        }
        sample += 1;
    })?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}

fn bracket(config: &ExperimentConfig, alpha: f64, theta: f64, beta: f64) -> (Option<f64>, Option<f64>, String) {
    let g = summary_g(alpha, theta);
    let upper = plan_upper(alpha, theta, config.j1, beta, DEFAULT_B, &|t| summary_g(alpha, t));
    let lower = plan_lower(alpha, theta, beta, DEFAULT_D, &|_| g);
    let status = match (&lower, &upper) {
        (Ok(_), Ok(_)) => "ok".to_string(),
        (Err(e), Ok(_)) => format!("lower: {e}"),
        (Ok(_), Err(e)) => format!("upper: {e}"),
        (Err(a), Err(b)) => format!("lower: {a}; upper: {b}"),
    };
    (
        lower.ok().map(|p| p.ln_l_min),
        upper.ok().map(|p| p.ln_l_max),
        status,
    )
}

/// Runs every `(alpha, theta, disorder seed)` cell and summarizes.
///
/// Cells run on the current rayon pool; results are merged in cell order,
/// so the output does not depend on the number of workers.
pub fn run_scaling(config: &ExperimentConfig) -> Result<ScalingOutput, HarnessError> {
    let warnings = config.validate()?;
    let mut cells = Vec::new();
    for alpha_idx in 0..config.alphas.len() {
        for theta_idx in 0..config.thetas.len() {
            for disorder_idx in 0..config.disorder_seeds {
                cells.push(Cell {
                    alpha_idx,
                    theta_idx,
                    disorder_idx,
                });
            }
        }
    }
    let results: Vec<Result<Vec<RunLengthRecord>, HarnessError>> = cells
        .par_iter()
        .enumerate()
        .map(|(k, cell)| run_cell(config, cell, k as u64))
        .collect();
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }

    let mut summary = Vec::new();
    for (ai, &alpha) in config.alphas.iter().enumerate() {
        for (ti, &theta) in config.thetas.iter().enumerate() {
            let beta = config.beta.beta(alpha, theta)?;
            let here = records.iter().filter(|r| r.alpha == alpha && r.theta == theta);
            let origin: Vec<f64> = here.clone().filter(|r| r.contains_origin).map(|r| r.length as f64).collect();
            let interior: Vec<f64> = here.filter(|r| r.interior).map(|r| r.length as f64).collect();
            let cell = (ai * config.thetas.len() + ti) as u64;
            let o = describe(&origin, config.bootstrap, derive(config.master_seed, Stream::Bootstrap, 2 * cell));
            let i = describe(&interior, config.bootstrap, derive(config.master_seed, Stream::Bootstrap, 2 * cell + 1));
            let (plan_ln_l_min, plan_ln_l_max, plan_status) = bracket(config, alpha, theta, beta);
            summary.push(SummaryRow {
                alpha,
                theta,
                beta,
                origin_n: o.n,
                origin_median: o.median,
                origin_median_lo: o.median_lo,
                origin_median_hi: o.median_hi,
                origin_mean: o.mean,
                origin_mean_lo: o.mean_lo,
                origin_mean_hi: o.mean_hi,
                interior_n: i.n,
                interior_median: i.median,
                interior_median_lo: i.median_lo,
                interior_median_hi: i.median_hi,
                interior_mean: i.mean,
                interior_mean_lo: i.mean_lo,
                interior_mean_hi: i.mean_hi,
                plan_ln_l_min,
                plan_ln_l_max,
                plan_status,
            });
        }
    }

    let disorder_seeds: Vec<u64> = (0..config.disorder_seeds as u64)
        .map(|d| derive(config.master_seed, Stream::Disorder, d))
        .collect();
    let chain_seeds: Vec<u64> = (0..cells.len() as u64)
        .map(|k| derive(config.master_seed, Stream::Chain, k))
        .collect();
    let echoed = ExperimentConfig {
        output_dir: None,
        ..config.clone()
    };
    let mut header = header_lines(&echoed, config.master_seed)?;
    header.push(format!("disorder_seeds: {disorder_seeds:?}"));
    header.push(format!("chain_seeds: {chain_seeds:?}"));
    for w in warnings {
        header.push(format!("warning: {w}"));
    }
    Ok(ScalingOutput {
        header,
        records,
        summary,
    })
}

fn write_csv<T: Serialize>(schema: &str, header: &[String], rows: &[T]) -> Result<Vec<u8>, HarnessError> {
    let mut out = Vec::new();
    out.extend_from_slice(format!("# schema: {schema}\n").as_bytes());
    for line in header {
        out.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Output(e.to_string()))
}

impl ScalingOutput {
    pub fn records_csv(&self) -> Result<Vec<u8>, HarnessError> {
        write_csv(RECORDS_SCHEMA, &self.header, &self.records)
    }

    pub fn summary_csv(&self) -> Result<Vec<u8>, HarnessError> {
        write_csv(SUMMARY_SCHEMA, &self.header, &self.summary)
    }

    /// Origin-run medians in the configured theta order for one alpha.
    pub fn origin_medians(&self, alpha: f64) -> Vec<(f64, f64)> {
        self.summary
            .iter()
            .filter(|r| r.alpha == alpha)
            .map(|r| (r.theta, r.origin_median))
            .collect()
    }

    /// Gnuplot-ready columns: theta, origin median and its interval.
    pub fn plot_data(&self) -> String {
        let mut s = String::from("# theta origin_median lo hi interior_median lo hi\n");
        for r in &self.summary {
            s.push_str(&format!(
                "{} {} {} {} {} {} {}\n",
                r.theta,
                r.origin_median,
                r.origin_median_lo,
                r.origin_median_hi,
                r.interior_median,
                r.interior_median_lo,
                r.interior_median_hi
            ));
        }
        s
    }

    pub fn write_to(&self, dir: &std::path::Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir.to_path_buf(), e))?;
        let put = |name: &str, bytes: &[u8]| {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| HarnessError::io(p, e))
        };
        put("records.csv", &self.records_csv()?)?;
        put("summary.csv", &self.summary_csv()?)?;
        put("summary.dat", self.plot_data().as_bytes())?;
        put(
            "summary.gp",
            b"set logscale x\nset xlabel 'theta'\nset ylabel 'run length'\n\
plot 'summary.dat' using 1:2:3:4 with yerrorlines title 'origin run', \\\n     \
'' using 1:5:6:7 with yerrorlines title 'interior runs'\n",
        )?;
        Ok(())
    }
}
