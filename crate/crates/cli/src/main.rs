//! `ekr`: experiments on random subgraphs of Kneser graphs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ekr_core::combinatorics::{graph_constants, LogValue};
use ekr_core::harness::{
    fmt_real, run_trials, sweep, threshold_bisect, verify_suite, write_records, ExperimentConfig,
    Format, RunMetadata, Status, SweepResult, ThresholdConfig, TrialRecord, VerifyLimits,
};
use ekr_core::sampler::{sample_with_colex, trial_seed, BackendRegistry, DEFAULT_MATERIALIZE_CAP};
use ekr_core::solver::{count_y, AlphaMode};
use ekr_core::theory::{expected_y, moment_report, p_critical};
use ekr_core::{Error, Result};

const EXIT_PARAMETER: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "ekr",
    version,
    about = "Stability of maximum intersecting families in random Kneser subgraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form quantities.
    #[command(subcommand)]
    Calc(Calc),
    /// Kneser graph constants.
    #[command(subcommand)]
    Graph(Graph),
    /// Independent trials at one p.
    Trial(TrialArgs),
    /// Coupled trials over a grid of p values.
    Sweep(SweepArgs),
    /// Locate the p at which the stable fraction reaches a target.
    Threshold(ThresholdArgs),
    /// Run the deterministic property battery.
    Verify(VerifyArgs),
    /// Monte Carlo mean of Y against its closed form.
    CountY(CountYArgs),
}

#[derive(Subcommand)]
enum Calc {
    /// Critical retention probability.
    Pc {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
    },
    /// E[Y], the second factorial moment and the X_i bounds.
    Moments {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        p: f64,
        /// Indices for the X_i bounds.
        #[arg(long = "i", num_args = 1..)]
        indices: Vec<u64>,
    },
}

#[derive(Subcommand)]
enum Graph {
    /// Vertex count, star sizes, degree and edge count of K(n, r, s).
    Stats {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 0)]
        s: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Decide alpha > N only.
    Exceeds,
    /// Compute alpha exactly.
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("'{s}' is not a 64-bit seed: {e}"))
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    trials: u64,
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed)]
    seed: u64,
    #[arg(long, default_value = "bnb")]
    solver: String,
    #[arg(long, default_value = "auto")]
    backend: String,
    /// Search nodes per solver call.
    #[arg(long, default_value_t = 50_000_000)]
    max_nodes: u64,
    /// Wall-clock limit per solver call.
    #[arg(long)]
    max_time_ms: Option<u64>,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Write rows here (plus a `.meta.json` sidecar) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record per-row wall-clock time. Output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value = "exceeds")]
    mode: ModeArg,
    /// Also decide whether stars are the only maximum families.
    #[arg(long)]
    classify: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long, value_enum, default_value = "exceeds")]
    mode: ModeArg,
    #[arg(long)]
    classify: bool,
    /// Fresh randomness at every grid point instead of coupling.
    #[arg(long)]
    independent: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.5)]
    target: f64,
    #[arg(long, default_value_t = 0.0)]
    plo: f64,
    #[arg(long, default_value_t = 1.0)]
    phi: f64,
    /// Bisection resolution in p.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 12)]
    max_n: u32,
    #[arg(long, default_value_t = 3)]
    max_r: u32,
}

#[derive(Args)]
struct CountYArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long, value_parser = parse_seed)]
    seed: u64,
    #[arg(long, default_value = "auto")]
    backend: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Infeasible(_) => EXIT_INFEASIBLE,
                Error::Budget { .. } => EXIT_BUDGET,
                _ => EXIT_PARAMETER,
            })
        }
    }
}

fn run(command: Command) -> Result<u8> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Calc(Calc::Pc { n, r }) => {
            let t = p_critical(n, r)?;
            writeln!(out, "p_c {}", fmt_real(t.p_c))?;
        }
        Command::Calc(Calc::Moments { n, r, p, indices }) => {
            calc_moments(&mut out, n, r, p, &indices)?
        }
        Command::Graph(Graph::Stats { n, r, s }) => {
            let g = graph_constants(n, r, s)?;
            writeln!(out, "n {}\nr {}\ns {}", g.n, g.r, g.s)?;
            writeln!(
                out,
                "vertices {}\nstar_size {}\nstar_disjoint {}",
                g.vertices, g.star_size, g.star_disjoint
            )?;
            writeln!(
                out,
                "degree {}\nedges {}\nedgeless {}",
                g.degree, g.edges, g.edgeless
            )?;
        }
        Command::Trial(args) => {
            let mut cfg = experiment(
                &args.common,
                vec![args.p],
                args.mode,
                args.classify,
                &args.output,
            );
            cfg.coupled = true;
            let records = run_trials(&cfg)?;
            emit(&mut out, "trial", &cfg, &records, &args.output)?;
            return Ok(budget_exit(&records));
        }
        Command::Sweep(args) => {
            let mut cfg = experiment(
                &args.common,
                args.grid,
                args.mode,
                args.classify,
                &args.output,
            );
            cfg.coupled = !args.independent;
            let (records, result) = sweep(&cfg)?;
            emit(&mut out, "sweep", &cfg, &records, &args.output)?;
            if args.output.out.is_some() {
                print_curve(&mut out, &result)?;
            } else {
                print_curve(&mut io::stderr().lock(), &result)?;
            }
            return Ok(budget_exit(&records));
        }
        Command::Threshold(args) => {
            let c = &args.common;
            let mut cfg = ThresholdConfig::new(c.n, c.r, c.trials, c.seed);
            cfg.target = args.target;
            cfg.plo = args.plo;
            cfg.phi = args.phi;
            cfg.tol = args.tol;
            cfg.solver = c.solver.clone();
            cfg.backend = c.backend.clone();
            cfg.max_nodes = Some(c.max_nodes);
            let est = threshold_bisect(&cfg)?;
            writeln!(out, "p_hat {}", fmt_real(est.p_hat))?;
            writeln!(
                out,
                "ci{} {} {}",
                (est.level * 100.0).round(),
                fmt_real(est.ci_lo),
                fmt_real(est.ci_hi)
            )?;
            writeln!(out, "trials {}\nexcluded {}", est.trials, est.excluded)?;
            writeln!(
                out,
                "p_c {}\nratio {}",
                fmt_real(est.p_c),
                fmt_real(est.ratio)
            )?;
            writeln!(
                out,
                "sanity_band {} (ratio in [0.4, 1.6], a finite-n heuristic)",
                if est.in_sanity_band {
                    "inside"
                } else {
                    "outside"
                }
            )?;
        }
        Command::Verify(args) => {
            let report = verify_suite(VerifyLimits {
                max_n: args.max_n,
                max_r: args.max_r,
            })?;
            writeln!(out, "{report}")?;
            if !report.passed() {
                return Ok(EXIT_VERIFY);
            }
        }
        Command::CountY(args) => count_y_summary(&mut out, &args)?,
    }
    Ok(0)
}

fn experiment(
    c: &Common,
    grid: Vec<f64>,
    mode: ModeArg,
    classify: bool,
    output: &Output,
) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(c.n, c.r, grid, c.trials, c.seed);
    cfg.mode = match mode {
        ModeArg::Exceeds => AlphaMode::ExceedsN,
        ModeArg::Exact => AlphaMode::Exact,
    };
    cfg.classify = classify;
    cfg.timing = output.timing;
    cfg.solver = c.solver.clone();
    cfg.backend = c.backend.clone();
    cfg.max_nodes = Some(c.max_nodes);
    cfg.max_time_ms = c.max_time_ms;
    cfg
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn emit(
    out: &mut impl Write,
    command: &str,
    cfg: &ExperimentConfig,
    records: &[TrialRecord],
    output: &Output,
) -> Result<()> {
    let format = Format::from(output.format);
    match &output.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write_records(&mut file, records, format)?;
            file.flush()?;
            std::fs::write(
                sidecar(path),
                RunMetadata::new(command, cfg).to_json() + "\n",
            )?;
            writeln!(out, "wrote {} rows to {}", records.len(), path.display())?;
        }
        None => write_records(out, records, format)?,
    }
    Ok(())
}

/// Budget exit only when no trial produced a verdict.
fn budget_exit(records: &[TrialRecord]) -> u8 {
    if !records.is_empty() && records.iter().all(|r| r.status == Status::BudgetExceeded) {
        eprintln!("every trial exhausted the solver budget");
        EXIT_BUDGET
    } else {
        0
    }
}

fn print_curve(out: &mut impl Write, result: &SweepResult) -> Result<()> {
    writeln!(
        out,
        "p,trials,excluded,stable,probability,wilson_lo,wilson_hi,y_positive"
    )?;
    for pt in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_real(pt.p),
            pt.trials,
            pt.excluded,
            pt.stable,
            fmt_real(pt.probability),
            fmt_real(pt.wilson_lo),
            fmt_real(pt.wilson_hi),
            pt.y_positive.map(fmt_real).unwrap_or_default()
        )?;
    }
    Ok(())
}

fn log_line(out: &mut impl Write, name: &str, v: LogValue) -> io::Result<()> {
    writeln!(
        out,
        "{name} {} ln {}",
        fmt_real(v.value()),
        fmt_real(v.ln())
    )
}

fn calc_moments(out: &mut impl Write, n: u32, r: u32, p: f64, indices: &[u64]) -> Result<()> {
    let rep = moment_report(n, r, p, indices)?;
    log_line(out, "e_y", rep.e_y)?;
    log_line(out, "y2_approx", rep.y2_approx)?;
    for i in indices {
        match rep.xi_bounds.get(i) {
            Some(v) => log_line(out, &format!("xi_upper[{i}]"), *v)?,
            None => writeln!(out, "xi_upper[{i}] undefined (needs 1 <= i < M)")?,
        }
        if let Some(v) = rep.case1_bounds.get(i) {
            log_line(out, &format!("xi_from_y[{i}]"), *v)?;
        }
    }
    Ok(())
}

fn count_y_summary(out: &mut impl Write, args: &CountYArgs) -> Result<()> {
    // validates the grid, trial count and stability regime
    let cfg = ExperimentConfig::new(args.n, args.r, vec![args.p], args.trials, args.seed);
    let spec = cfg.validate()?;
    let backend = BackendRegistry::default().get(&args.backend)?;
    let colex = std::sync::Arc::new(ekr_core::kneser::Colex::new(args.n, args.r)?);
    let mut counts = Vec::with_capacity(args.trials as usize);
    for t in 0..args.trials {
        let sample = sample_with_colex(
            &spec,
            colex.clone(),
            args.p,
            trial_seed(args.seed, t),
            backend.as_ref(),
            DEFAULT_MATERIALIZE_CAP,
        )?;
        counts.push(count_y(&sample)? as f64);
    }
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    let var = if k > 1.0 {
        counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let se = (var / k).sqrt();
    let expected = expected_y(args.n, args.r, args.p)?.value();
    writeln!(out, "trials {}", args.trials)?;
    writeln!(out, "mean {}\nse {}", fmt_real(mean), fmt_real(se))?;
    writeln!(out, "expected {}", fmt_real(expected))?;
    let z = if se > 0.0 {
        (mean - expected) / se
    } else {
        0.0
    };
    writeln!(out, "z {}", fmt_real(z))?;
    Ok(())
}
