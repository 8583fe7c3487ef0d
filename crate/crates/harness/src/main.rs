use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rfim_core::bounds::{
    b_bar, beta_saturating, e_alpha, plan_lower, plan_upper, summary_g, theorem_summary,
};
use rfim_core::geometry::{
    decompose_contours, entropy_sum, min_separation_constant, peierls_check, runs, separation_series, to_json_lines,
    triangles_from_spins, verify_contours, OriginConvention, DEFAULT_SEPARATION,
};
use rfim_core::lattice::DEFAULT_J1;
use rfim_core::mcmc::{collect_snapshots, estimate_events, write_snapshots};
use rfim_core::{
    sample_disorder, ChainConfig, CouplingTable, DisorderKind, EventSpec, ExactMeasure, InitialState, Interval, Model,
    ModelParams, Sign, SpinWindow, UpdateRule,
};
use rfim_harness::checks::{run_suite, SuiteOptions};
use rfim_harness::config::{BetaRule, ChainSettings, ExperimentConfig};
use rfim_harness::scaling::run_scaling;
use rfim_harness::{header_lines, with_workers, HarnessError};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "rfim", version, about = "Long-range random-field Ising chain: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the acceptance suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Run-length statistics across disorder realizations.
    Scaling(ScalingArgs),
    /// Parameter plans and bound evaluations.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Exact enumeration on small windows.
    #[command(subcommand)]
    Exact(ExactCmd),
    /// Markov chain estimates and samples.
    #[command(subcommand)]
    Mcmc(McmcCmd),
    /// Runs, triangles and contours of a configuration.
    #[command(subcommand)]
    Geometry(GeometryCmd),
}

#[derive(Args)]
struct VerifyArgs {
    /// Check ids to run (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long, default_value_t = SuiteOptions::default().master_seed)]
    seed: u64,
    /// Experiment config for the scaling check.
    #[arg(long)]
    scaling_config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Negate energy differences in the telescoping audit.
    #[arg(long)]
    inject_flip_sign_fault: bool,
}

#[derive(Args)]
struct ScalingArgs {
    /// JSON config file; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0])]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.35, 0.25])]
    theta: Vec<f64>,
    /// Fixed inverse temperature; default is zeta / (256 theta^2) per cell.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_J1)]
    j1: f64,
    #[arg(long, default_value_t = 2000)]
    window: usize,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value = "bernoulli")]
    disorder: DisorderKind,
    #[arg(long, default_value_t = 2000)]
    sweeps: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: u64,
    #[arg(long, default_value_t = 50)]
    thinning: u64,
    #[arg(long, value_parser = parse_rule, default_value = "heat-bath")]
    rule: UpdateRule,
    #[arg(long, value_parser = parse_initial, default_value = "random")]
    initial: InitialState,
    #[arg(long, default_value_t = 20_240_601)]
    master_seed: u64,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long)]
    allow_small_window: bool,
    /// Output directory for records.csv, summary.csv and plot files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_rule(s: &str) -> Result<UpdateRule, String> {
    match s {
        "metropolis" => Ok(UpdateRule::Metropolis),
        "heat-bath" | "heat_bath" | "heatbath" => Ok(UpdateRule::HeatBath),
        _ => Err(format!("unknown update rule {s:?} (metropolis, heat-bath)")),
    }
}

fn parse_initial(s: &str) -> Result<InitialState, String> {
    match s {
        "boundary" | "all-boundary" => Ok(InitialState::AllBoundary),
        "random" => Ok(InitialState::Random),
        _ => Err(format!("unknown initial state {s:?} (boundary, random)")),
    }
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Block plan bounding the longest run.
    PlanUpper {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long = "B", default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = DEFAULT_J1)]
        j1: f64,
        /// Defaults to the saturating value.
        #[arg(long)]
        beta: Option<f64>,
        /// Constant g1 instead of the default g(theta).
        #[arg(long)]
        g1: Option<f64>,
    },
    /// Contour plan bounding the shortest run.
    PlanLower {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        /// Defaults to the saturating value.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "D", default_value_t = 2.0)]
        d: f64,
        /// Constant g2 (default g(theta)).
        #[arg(long)]
        g2: Option<f64>,
    },
    /// Both plans with the default parameters.
    Summary {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_J1)]
        j1: f64,
    },
    EAlpha {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_J1)]
        j1: f64,
        #[arg(long)]
        size: f64,
    },
    BBar {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        beta: f64,
    },
    /// The separation constant and its series.
    Separation,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_J1)]
    j1: f64,
    /// Defaults to the saturating value.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value = "bernoulli")]
    disorder: DisorderKind,
    #[arg(long, default_value_t = 1)]
    disorder_seed: u64,
    /// Window as lo..hi.
    #[arg(long, allow_hyphen_values = true)]
    window: Interval,
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    boundary: Sign,
}

impl ModelArgs {
    fn build(&self) -> Result<(Model, rfim_core::DisorderField)> {
        let beta = beta_or_saturating(self.beta, self.alpha, self.theta)?;
        let params = ModelParams::new(self.alpha, self.j1, beta, self.theta, self.disorder)?;
        let model = Model::new(params, self.window.len())?;
        let disorder = sample_disorder(self.disorder, self.window, self.disorder_seed);
        Ok((model, disorder))
    }
}

#[derive(Subcommand)]
enum ExactCmd {
    /// Probabilities of events, e.g. --event spin_at:0:+ --event run_any:-2..2.
    Event {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, required = true, allow_hyphen_values = true)]
        event: Vec<EventSpec>,
    },
    /// Log partition function.
    Logz {
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long, default_value_t = 20_000)]
    sweeps: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: u64,
    #[arg(long, default_value_t = 1)]
    thinning: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_rule, default_value = "heat-bath")]
    rule: UpdateRule,
    #[arg(long, value_parser = parse_initial, default_value = "boundary")]
    initial: InitialState,
}

impl ChainArgs {
    fn config(&self) -> ChainConfig {
        ChainConfig {
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thinning: self.thinning,
            seed: self.seed,
            rule: self.rule,
            initial: self.initial,
        }
    }
}

#[derive(Subcommand)]
enum McmcCmd {
    /// Batch-means estimates of event probabilities.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, required = true, allow_hyphen_values = true)]
        event: Vec<EventSpec>,
    },
    /// Write retained configurations to a file.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SpinArgs {
    /// Spins as a string of + and - (commas allowed).
    #[arg(long, allow_hyphen_values = true)]
    spins: String,
    /// Coordinate of the first spin.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    lo: i64,
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    boundary: Sign,
}

impl SpinArgs {
    fn window(&self) -> Result<SpinWindow> {
        Ok(SpinWindow::parse(self.lo, &self.spins, self.boundary)?)
    }
}

#[derive(Subcommand)]
enum GeometryCmd {
    /// Triangles of a + boundary configuration, one JSON object per line.
    Triangles {
        #[command(flatten)]
        spins: SpinArgs,
    },
    /// Run decomposition; the window must contain the origin.
    Runs {
        #[command(flatten)]
        spins: SpinArgs,
    },
    /// Contours of the triangle family, with the property audit.
    Contours {
        #[command(flatten)]
        spins: SpinArgs,
        #[arg(long, default_value_t = DEFAULT_SEPARATION)]
        c: u64,
    },
    /// Erasure-cost margins of the triangle family.
    Peierls {
        #[command(flatten)]
        spins: SpinArgs,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_J1)]
        j1: f64,
        #[arg(long, default_value_t = DEFAULT_SEPARATION)]
        c: u64,
    },
    /// Enumerated contour sum at fixed mass.
    Entropy {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_SEPARATION)]
        c: u64,
        #[arg(long)]
        member_support: bool,
    },
}

fn beta_or_saturating(beta: Option<f64>, alpha: f64, theta: f64) -> Result<f64> {
    Ok(match beta {
        Some(b) => b,
        None => beta_saturating(alpha, theta)?,
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(format!("{}\n", serde_json::to_string_pretty(value)?).as_bytes())
}

/// Writes to stdout; a closed pipe ends output quietly.
fn emit(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut opts = SuiteOptions {
        master_seed: args.seed,
        only: args.only,
        inject_flip_sign_fault: args.inject_flip_sign_fault,
        ..SuiteOptions::default()
    };
    if let Some(p) = &args.scaling_config {
        opts.scaling = ExperimentConfig::load(p)?;
    }
    let report = with_workers(|| run_suite(&opts))?;
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    let text = serde_json::to_string_pretty(&report)?;
    match &args.report {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(format!("{text}\n").as_bytes())?,
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn scaling(args: ScalingArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig {
            alphas: args.alpha.clone(),
            thetas: args.theta.clone(),
            beta: args.beta.map_or(BetaRule::Saturate, BetaRule::Fixed),
            j1: args.j1,
            window: args.window,
            disorder_seeds: args.seeds,
            disorder: args.disorder,
            chain: ChainSettings {
                sweeps: args.sweeps,
                burn_in: args.burn_in,
                thinning: args.thinning,
                rule: args.rule,
                initial: args.initial,
            },
            master_seed: args.master_seed,
            bootstrap: args.bootstrap,
            allow_small_window: args.allow_small_window,
            output_dir: None,
        },
    };
    if let Some(out) = args.out {
        config.output_dir = Some(out);
    }
    let Some(dir) = config.output_dir.clone() else {
        bail!(HarnessError::Config("an output directory is required (--out or output_dir)".into()));
    };
    let out = with_workers(|| run_scaling(&config))??;
    out.write_to(&dir)?;
    for w in out.header.iter().filter(|h| h.starts_with("warning:")) {
        eprintln!("{w}");
    }
    emit(&out.summary_csv()?)?;
    Ok(ExitCode::SUCCESS)
}

fn bounds(cmd: BoundsCmd) -> Result<ExitCode> {
    match cmd {
        BoundsCmd::PlanUpper {
            alpha,
            theta,
            b,
            j1,
            beta,
            g1,
        } => {
            let beta = beta_or_saturating(beta, alpha, theta)?;
            let g1 = move |t| g1.unwrap_or_else(|| summary_g(alpha, t));
            print_json(&plan_upper(alpha, theta, j1, beta, b, &g1)?)?;
        }
        BoundsCmd::PlanLower {
            alpha,
            theta,
            beta,
            d,
            g2,
        } => {
            let beta = beta_or_saturating(beta, alpha, theta)?;
            let g = g2.unwrap_or_else(|| summary_g(alpha, theta));
            print_json(&plan_lower(alpha, theta, beta, d, &|_| g)?)?;
        }
        BoundsCmd::Summary { alpha, theta, beta, j1 } => {
            let beta = beta_or_saturating(beta, alpha, theta)?;
            print_json(&theorem_summary(alpha, theta, beta, j1)?)?;
        }
        BoundsCmd::EAlpha { alpha, j1, size } => {
            print_json(&json!({ "alpha": alpha, "j1": j1, "size": size, "e_alpha": e_alpha(alpha, j1, size)? }))?;
        }
        BoundsCmd::BBar { alpha, theta, beta } => {
            print_json(&json!({ "alpha": alpha, "theta": theta, "beta": beta, "b_bar": b_bar(beta, theta, alpha)? }))?;
        }
        BoundsCmd::Separation => {
            let rows: Vec<_> = (1..=4)
                .map(|c| {
                    let (v, hw) = separation_series(c);
                    json!({ "c": c, "sum": v, "half_width": hw })
                })
                .collect();
            print_json(&json!({ "min_separation_constant": min_separation_constant(), "series": rows }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exact(cmd: ExactCmd) -> Result<ExitCode> {
    match cmd {
        ExactCmd::Event { model, event } => {
            let (m, h) = model.build()?;
            let mu = ExactMeasure::new(&m, &h, model.window, model.boundary)?;
            let p = mu.event_probabilities(&event)?;
            let rows: Vec<_> = event
                .iter()
                .zip(p)
                .map(|(e, p)| json!({ "event": e.to_string(), "probability": p }))
                .collect();
            print_json(&json!({ "params": m.params, "window": model.window.to_string(),
                "boundary": model.boundary.symbol(), "disorder_seed": model.disorder_seed,
                "log_partition": mu.log_partition(), "events": rows }))?;
        }
        ExactCmd::Logz { model } => {
            let (m, h) = model.build()?;
            let mu = ExactMeasure::new(&m, &h, model.window, model.boundary)?;
            print_json(&json!({ "window": model.window.to_string(), "log_partition": mu.log_partition() }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn mcmc(cmd: McmcCmd) -> Result<ExitCode> {
    match cmd {
        McmcCmd::Estimate { model, chain, event } => {
            let (m, h) = model.build()?;
            let est = estimate_events(&m, &h, model.window, model.boundary, &event, &chain.config())?;
            let rows: Vec<_> = event
                .iter()
                .zip(est)
                .map(|(e, x)| json!({ "event": e.to_string(), "estimate": x }))
                .collect();
            print_json(&json!({ "params": m.params, "window": model.window.to_string(),
                "boundary": model.boundary.symbol(), "disorder_seed": model.disorder_seed,
                "config": chain.config(), "events": rows }))?;
        }
        McmcCmd::Sample { model, chain, out } => {
            let (m, h) = model.build()?;
            let config = chain.config();
            let snaps = collect_snapshots(&m, &h, model.window, model.boundary, &config)?;
            let mut bytes = Vec::new();
            let setup = json!({ "model": m.params, "window": model.window.to_string(),
                "boundary": model.boundary.symbol(), "disorder_seed": model.disorder_seed, "chain": config });
            for line in header_lines(&setup, config.seed)? {
                writeln!(bytes, "# {line}")?;
            }
            write_snapshots(&mut bytes, &snaps)?;
            std::fs::write(&out, bytes).with_context(|| format!("writing {}", out.display()))?;
            print_json(&json!({ "samples": snaps.len(), "out": out }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn geometry(cmd: GeometryCmd) -> Result<ExitCode> {
    match cmd {
        GeometryCmd::Triangles { spins } => {
            let s = spins.window()?;
            let f = triangles_from_spins(&s)?;
            eprintln!("window {} boundary {}", s.interval(), s.boundary());
            emit(to_json_lines(&f.triangles).as_bytes())?;
        }
        GeometryCmd::Runs { spins } => {
            let s = spins.window()?;
            print_json(&runs(&s, s.interval())?)?;
        }
        GeometryCmd::Contours { spins, c } => {
            let f = triangles_from_spins(&spins.window()?)?;
            let contours = decompose_contours(&f.triangles, c);
            let report = verify_contours(&f.triangles, &contours, c);
            print_json(&json!({ "contours": contours, "audit": report }))?;
        }
        GeometryCmd::Peierls { spins, alpha, j1, c } => {
            let s = spins.window()?;
            let f = triangles_from_spins(&s)?;
            let table = CouplingTable::new(alpha, j1, s.len().max(64))?;
            print_json(&peierls_check(&f.triangles, &table, c)?)?;
        }
        GeometryCmd::Entropy {
            m,
            b,
            alpha,
            c,
            member_support,
        } => {
            let convention = if member_support {
                OriginConvention::MemberSupport
            } else {
                OriginConvention::CoveringTriangle
            };
            print_json(&entropy_sum(m, b, alpha, c, convention)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Scaling(a) => scaling(a),
        Command::Bounds(c) => bounds(c),
        Command::Exact(c) => exact(c),
        Command::Mcmc(c) => mcmc(c),
        Command::Geometry(c) => geometry(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<rfim_core::Error>().is_some()
                || matches!(e.downcast_ref::<HarnessError>(), Some(HarnessError::Config(_) | HarnessError::Core(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
