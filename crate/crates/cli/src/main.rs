//! `ocp`: tabulate rate functions, evaluate exact `β = 2` formulas, sample
//! the plasma and run the verification pipelines, writing CSV (and
//! optionally SVG) files.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ocp_core::edge_ldp::{psi_left, psi_right};
use ocp_core::exact_beta2::{edge_cdf_log, edge_pdf_log, exact_moment, exact_variance, mgf_log};
use ocp_core::harness::{
    cumulant_check, gumbel_check, gumbel_exact_distance, left_tail_table, mgf_table, right_tail_table,
    subleading_table, transition_scan, LdpTable,
};
use ocp_core::radial_moments::{
    energy_excess, entropy_excess, transition_order, typical_value, EquilibriumMeasure, TransitionOrder,
};
use ocp_core::sampler::{sample_kostlan, sample_mcmc, McmcParams, SampleBatch, StatExponent};
use ocp_core::stats::{batch_means_std_error, mean, variance};
use ocp_core::OcpError;
use rayon::prelude::*;

use config::{ConfigFile, GridSpec, SizeList, DEFAULT_SEED};
use output::{emit, Cell, DataTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation: exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The computation or the output failed: exit code 1.
    #[error("{0}")]
    Run(String),
}

impl From<OcpError> for CliError {
    fn from(e: OcpError) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "ocp", version, about = "Large deviations of radial observables of the 2D one-component plasma")]
struct Cli {
    /// Worker threads (also OCP_THREADS); never changes numeric output.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// File of key=value lines supplying defaults for the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate analytic rate functions.
    #[command(subcommand)]
    Rate(RateCmd),
    /// Equilibrium measure of the tilted potential.
    Eq(EqArgs),
    /// Exact finite-N formulas at beta = 2.
    #[command(subcommand)]
    Exact(ExactCmd),
    /// Draw samples of a radial statistic.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Compare finite-N data with the asymptotic predictions.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Data behind the four figures (1, 2, 3 or 4).
    Fig(FigArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a polyline chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Subcommand, Debug)]
enum RateCmd {
    /// Rate function of the maximum modulus: columns x,psi.
    Edge {
        #[arg(long, value_enum)]
        side: Side,
        /// min:max:steps (steps intervals, both ends included).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        output: Output,
    },
    /// Excess energy, entropy and typical value: columns s,energy,entropy,typical_value.
    Moment {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct EqArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Radii sampled across the support.
    #[arg(long)]
    points: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum ExactCmd {
    /// Log-CDF of the maximum modulus: columns x,log_cdf.
    EdgeCdf(ExactEdgeArgs),
    /// Log-density of the maximum modulus: columns x,log_pdf.
    EdgePdf(ExactEdgeArgs),
    /// Log moment generating function: columns s,log_mgf,relative_error.
    Mgf {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        output: Output,
    },
    /// Exact mean and variance of the radial moment: columns n,p,mean,variance.
    Moment {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct ExactEdgeArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum SampleCmd {
    /// Exact beta = 2 sampler: columns draw,value.
    Kostlan {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        count: Option<usize>,
        /// Statistic exponent; `inf` for the maximum modulus.
        #[arg(long)]
        p: Option<StatExponent>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Metropolis sampler at any beta: columns chain,draw,value.
    Mcmc {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Total sweeps per chain, burn-in included.
        #[arg(long)]
        sweeps: Option<u64>,
        #[arg(long)]
        burnin: Option<u64>,
        #[arg(long)]
        thinning: Option<u64>,
        #[arg(long)]
        p: Option<StatExponent>,
        #[arg(long)]
        seed: Option<u64>,
        /// Initial proposal width.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        chains: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Hard-wall tail against the three-term expansion.
    LeftTail(TailArgs),
    /// Split-off tail against its rate function.
    RightTail(TailArgs),
    /// Extracted 1/N coefficient of the log-MGF against S_p/4.
    Mgf {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Comma-separated sizes, at least three.
        #[arg(long)]
        n: Option<SizeList>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        output: Output,
    },
    /// Cumulants from derivatives of the excess energy against the closed forms.
    Cumulants {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        /// Highest order, at most 3; defaults to the highest order below any transition.
        #[arg(long)]
        max_order: Option<u32>,
        #[command(flatten)]
        output: Output,
    },
    /// Standardized maxima against the Gumbel law.
    Gumbel {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also report the distance of the exact finite-n law.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Scan derivatives of the excess energy for jumps at s = 0.
    Transition {
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct TailArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct FigArgs {
    /// Figure number.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
    which: u8,
    /// Directory receiving the CSV files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write an SVG next to each CSV.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `ocp --help` for usage");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    let env_threads = match std::env::var("OCP_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| CliError::Usage(format!("OCP_THREADS must be a count, got '{v}'")))?),
        Err(_) => None,
    };
    let threads: usize = cfg.pick(cli.threads.or(env_threads), "threads", Some(0))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Run(format!("cannot start thread pool: {e}")))?;
    match cli.command {
        Command::Rate(cmd) => rate(cmd, &cfg),
        Command::Eq(args) => eq(args, &cfg),
        Command::Exact(cmd) => exact(cmd, &cfg),
        Command::Sample(cmd) => sample(cmd, &cfg),
        Command::Verify(cmd) => verify(cmd, &cfg),
        Command::Fig(args) => fig(args, &cfg),
    }
}

fn write(table: &DataTable, output: &Output, title: &str) -> Result<(), CliError> {
    emit(table, output.out.as_deref(), output.svg.as_deref(), title)
}

fn grid(cfg: &ConfigFile, flag: Option<GridSpec>, default: Option<&str>) -> Result<Vec<f64>, CliError> {
    let default = default.map(|d| d.parse::<GridSpec>().expect("built-in grid"));
    let spec: GridSpec = match flag {
        Some(g) => g,
        None => match cfg.raw("grid") {
            Some(raw) => raw.parse().map_err(CliError::Usage)?,
            None => default.ok_or_else(|| CliError::Usage("missing required setting --grid".into()))?,
        },
    };
    Ok(spec.points())
}

fn tabulate<F>(xs: &[f64], columns: &[&str], f: F) -> Result<DataTable, CliError>
where
    F: Fn(f64) -> Result<Vec<f64>, OcpError> + Sync + Send,
{
    let rows: Vec<Vec<f64>> = xs.par_iter().map(|&x| f(x)).collect::<Result<_, _>>()?;
    let mut t = DataTable::new(columns);
    for (x, r) in xs.iter().zip(rows) {
        let mut row = vec![*x];
        row.extend(r);
        t.push_reals(&row);
    }
    Ok(t)
}

fn rate(cmd: RateCmd, cfg: &ConfigFile) -> Result<(), CliError> {
    match cmd {
        RateCmd::Edge { side, grid: g, output } => {
            let (default, f): (&str, fn(f64) -> ocp_core::Result<f64>) = match side {
                Side::Left => ("0.1:0.99:89", psi_left),
                Side::Right => ("1:3:100", psi_right),
            };
            let xs = grid(cfg, g, Some(default))?;
            let t = tabulate(&xs, &["x", "psi"], |x| Ok(vec![f(x)?]))?;
            write(&t, &output, "rate function of the maximum modulus")
        }
        RateCmd::Moment { p, grid: g, output } => {
            let p: f64 = cfg.pick(p, "p", None)?;
            let xs = grid(cfg, g, None)?;
            let t = tabulate(&xs, &["s", "energy", "entropy", "typical_value"], |s| {
                Ok(vec![energy_excess(p, s)?, entropy_excess(p, s)?, typical_value(p, s)?])
            })?;
            write(&t, &output, &format!("excess energy and entropy, p = {p}"))
        }
    }
}

fn eq(args: EqArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let p: f64 = cfg.pick(args.p, "p", None)?;
    let s: f64 = cfg.pick(args.s, "s", None)?;
    let points: usize = cfg.pick(args.points, "points", Some(200))?;
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let m = EquilibriumMeasure::new(p, s)?;
    eprintln!(
        "support [{}, {}] ({}), typical value {}",
        m.inner_radius,
        m.outer_radius,
        if m.is_annulus() { "annulus" } else { "disk" },
        typical_value(p, s)?
    );
    let mut t = DataTable::new(&["r", "density"]);
    for i in 0..points {
        let r = m.inner_radius + (m.outer_radius - m.inner_radius) * i as f64 / (points - 1) as f64;
        t.push_reals(&[r, m.density(r)]);
    }
    write(&t, &args.output, &format!("equilibrium density, p = {p}, s = {s}"))
}

fn exact(cmd: ExactCmd, cfg: &ConfigFile) -> Result<(), CliError> {
    match cmd {
        ExactCmd::EdgeCdf(a) => {
            let n: u64 = cfg.pick(a.n, "n", None)?;
            let xs = grid(cfg, a.grid, None)?;
            let t = tabulate(&xs, &["x", "log_cdf"], |x| Ok(vec![edge_cdf_log(n, x)?]))?;
            write(&t, &a.output, &format!("log CDF of the maximum modulus, n = {n}"))
        }
        ExactCmd::EdgePdf(a) => {
            let n: u64 = cfg.pick(a.n, "n", None)?;
            let xs = grid(cfg, a.grid, None)?;
            let t = tabulate(&xs, &["x", "log_pdf"], |x| Ok(vec![edge_pdf_log(n, x)?]))?;
            write(&t, &a.output, &format!("log density of the maximum modulus, n = {n}"))
        }
        ExactCmd::Mgf { n, p, grid: g, output } => {
            let n: u64 = cfg.pick(n, "n", None)?;
            let p: f64 = cfg.pick(p, "p", None)?;
            let xs = grid(cfg, g, None)?;
            let t = tabulate(&xs, &["s", "log_mgf", "relative_error"], |s| {
                let r = mgf_log(n, p, s)?;
                Ok(vec![r.log_value, r.estimated_relative_error])
            })?;
            write(&t, &output, &format!("log MGF, n = {n}, p = {p}"))
        }
        ExactCmd::Moment { n, p, output } => {
            let n: u64 = cfg.pick(n, "n", None)?;
            let p: f64 = cfg.pick(p, "p", None)?;
            let mut t = DataTable::new(&["n", "p", "mean", "variance"]);
            t.push(vec![Cell::Int(n as i64), Cell::Real(p), Cell::Real(exact_moment(n, p)?), Cell::Real(exact_variance(n, p)?)]);
            write(&t, &output, "exact moments")
        }
    }
}

fn batch_table(batch: &SampleBatch) -> DataTable {
    let per_chain = if batch.chains > 0 { batch.values.len() / batch.chains as usize } else { batch.values.len() };
    let mut t = DataTable::new(&["chain", "draw", "value"]);
    for (i, &v) in batch.values.iter().enumerate() {
        t.push(vec![Cell::Int((i / per_chain) as i64), Cell::Int((i % per_chain) as i64), Cell::Real(v)]);
    }
    t
}

fn summarize(batch: &SampleBatch) {
    let v = &batch.values;
    let se = if batch.chains > 0 { batch_means_std_error(v, 50.min(v.len())) } else { (variance(v) / v.len() as f64).sqrt() };
    eprintln!(
        "{} draws of Delta^({}) from {} (n = {}, beta = {}, seed = {}): mean {} +- {}, variance {}",
        v.len(),
        batch.p,
        batch.sampler,
        batch.n,
        batch.beta,
        batch.seed,
        mean(v),
        se,
        if v.len() > 1 { variance(v) } else { 0.0 }
    );
    if !batch.acceptance.is_empty() {
        eprintln!("acceptance per chain {:?}, step sizes {:?}", batch.acceptance, batch.step_sizes);
    }
}

fn sample(cmd: SampleCmd, cfg: &ConfigFile) -> Result<(), CliError> {
    match cmd {
        SampleCmd::Kostlan { n, count, p, seed, output } => {
            let batch = sample_kostlan(
                cfg.pick(n, "n", None)?,
                cfg.pick(count, "count", Some(10_000))?,
                cfg.pick(p, "p", None)?,
                cfg.pick(seed, "seed", Some(DEFAULT_SEED))?,
            )?;
            summarize(&batch);
            let mut t = batch_table(&batch);
            t.columns.remove(0);
            for row in &mut t.rows {
                row.remove(0);
            }
            write(&t, &output, "Kostlan draws")
        }
        SampleCmd::Mcmc { n, beta, sweeps, burnin, thinning, p, seed, step, chains, output } => {
            let sweeps: u64 = cfg.pick(sweeps, "sweeps", None)?;
            let params = McmcParams {
                n: cfg.pick(n, "n", None)?,
                beta: cfg.pick(beta, "beta", None)?,
                sweeps,
                burn_in: cfg.pick(burnin, "burnin", Some(sweeps / 10))?,
                thinning: cfg.pick(thinning, "thinning", Some(1))?,
                p: cfg.pick(p, "p", None)?,
                seed: cfg.pick(seed, "seed", Some(DEFAULT_SEED))?,
                initial_step: cfg.pick(step, "step", Some(0.1))?,
                chains: cfg.pick(chains, "chains", Some(1))?,
            };
            let batch = sample_mcmc(&params)?;
            summarize(&batch);
            write(&batch_table(&batch), &output, "Metropolis draws")
        }
    }
}

fn ldp_report(table: &LdpTable, label: &str) {
    let worst = table.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    eprintln!("{label}: {} rows, max |residual| {worst:.3e}", table.rows.len());
}

fn verify(cmd: VerifyCmd, cfg: &ConfigFile) -> Result<(), CliError> {
    match cmd {
        VerifyCmd::LeftTail(a) => {
            let n = cfg.pick(a.n, "n", Some(250))?;
            let t = left_tail_table(n, &grid(cfg, a.grid, Some("0.3:0.9:6"))?)?;
            ldp_report(&t, "left tail");
            write(&(&t).into(), &a.output, &format!("hard-wall tail, n = {n}"))
        }
        VerifyCmd::RightTail(a) => {
            let n = cfg.pick(a.n, "n", Some(250))?;
            let t = right_tail_table(n, &grid(cfg, a.grid, Some("1.2:2:8"))?)?;
            ldp_report(&t, "right tail");
            write(&(&t).into(), &a.output, &format!("split-off tail, n = {n}"))
        }
        VerifyCmd::Mgf { p, beta, n, grid: g, output } => {
            let p: f64 = cfg.pick(p, "p", None)?;
            let beta: f64 = cfg.pick(beta, "beta", Some(2.0))?;
            if beta != 2.0 {
                return Err(OcpError::Domain(format!("the exact MGF exists only at beta = 2, got {beta}")).into());
            }
            let sizes: SizeList = cfg.pick(n, "n", Some(SizeList(vec![25, 50, 100])))?;
            let t = subleading_table(p, &grid(cfg, g, None)?, &sizes.0)?;
            ldp_report(&t, "extracted 1/N coefficient vs S_p/4");
            let mut dt: DataTable = (&t).into();
            dt.columns[1] = "extracted".into();
            dt.columns[2] = "quarter_entropy".into();
            write(&dt, &output, &format!("1/N coefficient of the log-MGF, p = {p}"))
        }
        VerifyCmd::Cumulants { p, beta, n, max_order, output } => {
            let p: f64 = cfg.pick(p, "p", None)?;
            let default_order = match transition_order(p)? {
                TransitionOrder::Order(l) => (l - 1).min(3),
                TransitionOrder::Analytic { .. } => 3,
            };
            let r = cumulant_check(
                p,
                cfg.pick(beta, "beta", Some(2.0))?,
                cfg.pick(n, "n", Some(10))?,
                cfg.pick(max_order, "max-order", Some(default_order))?,
            )?;
            let mut t = DataTable::new(&["order", "derivative", "numeric", "formula", "relative_error"]);
            for row in &r.rows {
                eprintln!("order {}: numeric {:e}, formula {:e}, relative error {:.2e}", row.order, row.numeric, row.formula, row.rel_error);
                t.push(vec![
                    Cell::Int(row.order as i64),
                    Cell::Real(row.derivative),
                    Cell::Real(row.numeric),
                    Cell::Real(row.formula),
                    Cell::Real(row.rel_error),
                ]);
            }
            write(&t, &output, &format!("leading cumulants, p = {p}"))
        }
        VerifyCmd::Gumbel { n, draws, seed, exact, output } => {
            let r = gumbel_check(
                cfg.pick(n, "n", Some(2000))?,
                cfg.pick(draws, "draws", Some(10_000))?,
                cfg.pick(seed, "seed", Some(DEFAULT_SEED))?,
            )?;
            let exact_distance = if exact { gumbel_exact_distance(r.n)? } else { f64::NAN };
            eprintln!(
                "n = {}: sup-distance {:.4}{}{}",
                r.n,
                r.sup_distance,
                if exact { format!(", exact-law distance {exact_distance:.4}") } else { String::new() },
                if r.low_n { " (low n: convergence is logarithmic)" } else { "" }
            );
            let mut t = DataTable::new(&["n", "draws", "gamma_n", "a_n", "b_n", "sup_distance", "exact_distance", "low_n"]);
            t.push(vec![
                Cell::Int(r.n as i64),
                Cell::Int(r.draws as i64),
                Cell::Real(r.constants.gamma_n),
                Cell::Real(r.constants.a_n),
                Cell::Real(r.constants.b_n),
                Cell::Real(r.sup_distance),
                Cell::Real(exact_distance),
                Cell::Int(r.low_n as i64),
            ]);
            write(&t, &output, "Gumbel check")
        }
        VerifyCmd::Transition { p, output } => {
            let p: f64 = cfg.pick(p, "p", None)?;
            let r = transition_scan(p)?;
            eprintln!(
                "p = {p}: expected {}, detected {}",
                r.expected,
                r.detected.map_or("none".to_string(), |o| o.to_string())
            );
            let mut t = DataTable::new(&["order", "step", "jump", "roundoff_bound", "exponent", "continuous"]);
            for o in &r.orders {
                for i in 0..o.steps.len() {
                    t.push(vec![
                        Cell::Int(o.order as i64),
                        Cell::Real(o.steps[i]),
                        Cell::Real(o.jumps[i]),
                        Cell::Real(o.roundoff[i]),
                        Cell::Real(o.exponent),
                        Cell::Int(o.continuous as i64),
                    ]);
                }
            }
            write(&t, &output, &format!("derivative jumps at s = 0, p = {p}"))
        }
    }
}

/// Sizes used by the figure recipes.
const FIG_EDGE_N: u64 = 250;
const FIG_MOMENT_N: u64 = 50;

fn fig(args: FigArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let dir: PathBuf = cfg.pick(args.out_dir, "out-dir", Some(PathBuf::from(".")))?;
    let save = |name: &str, t: &DataTable, title: &str| -> Result<(), CliError> {
        let csv = dir.join(format!("{name}.csv"));
        let svg = args.svg.then(|| dir.join(format!("{name}.svg")));
        emit(t, Some(&csv), svg.as_deref(), title)?;
        eprintln!("wrote {}", csv.display());
        Ok(())
    };
    match args.which {
        1 => {
            let left = left_tail_table(FIG_EDGE_N, &GridSpec { min: 0.05, max: 0.99, steps: 94 }.points())?;
            let mut t = DataTable::new(&["x", "psi_left", "finite_n", "three_term"]);
            for (r, psi) in left.rows.iter().zip(left.column("psi_left").unwrap_or_default()) {
                t.push_reals(&[r.abscissa, psi, r.finite_n_value, r.prediction]);
            }
            save("fig1_left", &t, "left tail, n = 250")?;
            let right = right_tail_table(FIG_EDGE_N, &GridSpec { min: 1.01, max: 2.5, steps: 149 }.points())?;
            let mut t = DataTable::new(&["x", "psi_right", "finite_n"]);
            for r in &right.rows {
                t.push_reals(&[r.abscissa, r.prediction, r.finite_n_value]);
            }
            save("fig1_right", &t, "right tail, n = 250")
        }
        2 => {
            let left = left_tail_table(FIG_EDGE_N, &GridSpec { min: 0.05, max: 0.99, steps: 94 }.points())?;
            let mut t = DataTable::new(&["x", "scaled_gap", "f1_plus_f2_over_log_n"]);
            let gap = left.column("scaled_gap").unwrap_or_default();
            let pred = left.column("scaled_prediction").unwrap_or_default();
            for (i, r) in left.rows.iter().enumerate() {
                t.push_reals(&[r.abscissa, gap[i], pred[i]]);
            }
            save("fig2", &t, "rescaled hard-wall correction, n = 250")
        }
        3 | 4 => {
            let (p, name, spec) = if args.which == 3 {
                (1.0, "fig3", GridSpec { min: -2.0, max: 4.0, steps: 60 })
            } else {
                (2.0, "fig4", GridSpec { min: -0.4, max: 4.0, steps: 44 })
            };
            let table = mgf_table(FIG_MOMENT_N, p, &spec.points())?;
            let nf = FIG_MOMENT_N as f64;
            let mut left = DataTable::new(&["s", "energy", "finite_n"]);
            let mut right = DataTable::new(&["s", "entropy", "finite_n"]);
            for r in &table.rows {
                left.push_reals(&[r.abscissa, r.prediction, r.finite_n_value]);
                // 1/N term at β = 2 is S_p/(4N)
                right.push_reals(&[r.abscissa, entropy_excess(p, r.abscissa)?, 4.0 * nf * r.residual]);
            }
            save(&format!("{name}_left"), &left, &format!("excess energy, p = {p}, n = 50"))?;
            save(&format!("{name}_right"), &right, &format!("excess entropy, p = {p}, n = 50"))
        }
        _ => unreachable!("clap restricts the figure number"),
    }
}
