use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use pspchain::sampler::Schedule;
use pspchain::verify::{missing_checks, run_suite, SuiteConfig, REQUIRED_CHECKS};
use pspchain::{
    brute_force_partition, closed_form_partition, estimate_psp_distribution, psp_distribution,
    psp_moments, recursive_partition, variance_envelope, BoundaryCondition, Cell, CouplingFamily,
    Error, PartitionPair, Table, Volume, DEFAULT_CAP,
};

/// Exact variance must stay below this multiple of the large-β envelope.
const ENVELOPE_SLACK: f64 = 1.1;
const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(
    name = "pspchain",
    version,
    about = "Phase separation point statistics for inhomogeneous spin chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition functions by closed form, recursion and enumeration.
    Partition {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Fail (exit 1) if the methods disagree by more than 1e-10 in log.
        #[arg(long)]
        check: bool,
    },
    /// Exact PSP distribution by enumeration.
    PspDist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: usize,
    },
    /// Exact PSP variance against its bounds over a grid.
    VarianceSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Heat-bath estimate of the PSP distribution.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200_000)]
        sweeps: u64,
        /// Defaults to 10(2n+1).
        #[arg(long)]
        burn_in: Option<u64>,
        /// Defaults to 2n+1.
        #[arg(long)]
        thin: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the invariant suite on small volumes.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Largest half-width checked.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// const:<I>, abs, sullivan25 or table:<path>[;sym8]
    #[arg(long, default_value = "sullivan25")]
    family: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Largest half-width enumerated exhaustively (env PSPCHAIN_CAP).
    #[arg(long)]
    cap: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct Grid {
    #[arg(
        long,
        conflicts_with = "beta_grid",
        required_unless_present = "beta_grid"
    )]
    beta: Option<f64>,
    /// start:stop:count, geometric.
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long, conflicts_with = "n_grid", required_unless_present = "n_grid")]
    n: Option<usize>,
    /// start:stop, inclusive.
    #[arg(long)]
    n_grid: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// How a run ended, mapped to the process exit status.
enum Failure {
    /// Bad flags or inputs (exit 2).
    Usage(String),
    /// A requested check did not hold (exit 1).
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let body = text.split("Usage:").next().unwrap_or_default();
            let body = one_line(body.trim().trim_start_matches("error:"));
            eprintln!("error: {body}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {}", one_line(&msg));
            ExitCode::from(1)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Partition {
            common,
            grid,
            check,
        } => {
            let ctx = Context::new(&common)?;
            let points = grid.points()?;
            ctx.install_threads()?;
            let blocks: Vec<Outcome<(Table, f64)>> = points
                .par_iter()
                .map(|&(n, beta)| partition_rows(&ctx, n, beta))
                .collect();
            let mut table = partition_header();
            let mut worst: f64 = 0.0;
            for b in blocks {
                let (rows, gap) = b?;
                worst = worst.max(gap);
                table.extend(rows);
            }
            ctx.emit(&table)?;
            if check && !(worst <= ORACLE_TOLERANCE) {
                return Err(Failure::Check(format!(
                    "methods disagree by {worst:.3e} in log (tolerance {ORACLE_TOLERANCE:e})"
                )));
            }
            Ok(())
        }
        Command::PspDist { common, beta, n } => {
            let ctx = Context::new(&common)?;
            check_beta(beta)?;
            ctx.install_threads()?;
            let dist = psp_distribution(&ctx.family, beta, ctx.volume(n)?)?;
            let table = dist.table();
            match ctx.format {
                Format::Csv => ctx.emit(&select(&table, &["twice_theta", "theta", "probability"])),
                Format::Json => ctx.emit(&table),
            }
        }
        Command::VarianceSweep { common, grid } => {
            let ctx = Context::new(&common)?;
            let points = grid.points()?;
            ctx.install_threads()?;
            let rows: Vec<Outcome<Vec<Cell>>> = points
                .par_iter()
                .map(|&(n, beta)| variance_row(&ctx, n, beta))
                .collect();
            let mut table = Table::new([
                "n",
                "beta",
                "variance",
                "lower_bound",
                "envelope_upper",
                "envelope_upper_exact_series",
                "in_envelope",
                "asymptotic_regime",
            ]);
            for r in rows {
                table.push(r?);
            }
            ctx.emit(&table)
        }
        Command::Sample {
            common,
            beta,
            n,
            sweeps,
            burn_in,
            thin,
            seed,
        } => {
            let ctx = Context::new(&common)?;
            if !(beta.is_finite() && beta >= 0.0) {
                return Err(Failure::Usage(format!(
                    "--beta must be finite and non-negative, got {beta}"
                )));
            }
            let defaults = Schedule::for_half_width(n, sweeps);
            let schedule = Schedule {
                sweeps,
                burn_in: burn_in.unwrap_or(defaults.burn_in),
                thin: thin.unwrap_or(defaults.thin),
            };
            let report = estimate_psp_distribution(&ctx.family, beta, n, schedule, seed)?;
            ctx.emit(&report.table())
        }
        Command::Verify { common, n } => {
            let ctx = Context::new(&common)?;
            ctx.volume(n)?;
            ctx.install_threads()?;
            let cfg = SuiteConfig {
                max_n: n,
                ..SuiteConfig::default()
            };
            let outcomes = run_suite(&ctx.family, cfg);
            let mut report = String::new();
            let width = REQUIRED_CHECKS.iter().map(|s| s.len()).max().unwrap_or(0);
            for o in &outcomes {
                let verdict = if o.passed { "PASS" } else { "FAIL" };
                report += &format!("{:width$}  {verdict}  {}\n", o.id, o.detail);
            }
            let missing = missing_checks(&outcomes);
            report += &format!(
                "coverage: {}/{} required checks ran",
                REQUIRED_CHECKS.len() - missing.len(),
                REQUIRED_CHECKS.len()
            );
            if missing.is_empty() {
                report += "\n";
            } else {
                report += &format!("; missing {}\n", missing.join(", "));
            }
            print!("{report}");
            if let Some(path) = &ctx.out {
                let mut t = Table::new(["check", "passed", "detail"]);
                for o in &outcomes {
                    t.push(vec![
                        Cell::Text(o.id.into()),
                        Cell::Bool(o.passed),
                        Cell::Text(o.detail.clone()),
                    ]);
                }
                write_out(Some(path), &ctx.render(&t))?;
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 || !missing.is_empty() {
                return Err(Failure::Check(format!(
                    "{failed} of {} checks failed",
                    outcomes.len()
                )));
            }
            Ok(())
        }
    }
}

struct Context {
    family: CouplingFamily,
    format: Format,
    out: Option<PathBuf>,
    cap: usize,
    threads: Option<usize>,
}

impl Context {
    fn new(common: &Common) -> Outcome<Self> {
        let family: CouplingFamily = common.family.parse()?;
        let cap = match (common.cap, std::env::var("PSPCHAIN_CAP")) {
            (Some(c), _) => c,
            (None, Ok(v)) => v.trim().parse().map_err(|_| {
                Failure::Usage(format!(
                    "PSPCHAIN_CAP must be a non-negative integer, got {v:?}"
                ))
            })?,
            (None, Err(_)) => DEFAULT_CAP,
        };
        Volume::with_cap(0, cap)?;
        if common.threads == Some(0) {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        Ok(Self {
            family,
            format: common.format,
            out: common.out.clone(),
            cap,
            threads: common.threads,
        })
    }

    fn volume(&self, n: usize) -> Outcome<Volume> {
        let v = Volume::with_cap(n, self.cap)?;
        v.check_enumerable()?;
        Ok(v)
    }

    fn install_threads(&self) -> Outcome<()> {
        if let Some(t) = self.threads {
            // only the first call in a process can size the global pool
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global();
        }
        Ok(())
    }

    fn render(&self, table: &Table) -> String {
        match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        }
    }

    fn emit(&self, table: &Table) -> Outcome<()> {
        write_out(self.out.as_ref(), &self.render(table))
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write output: {e}"))),
    }
}

fn select(table: &Table, keep: &[&str]) -> Table {
    let idx: Vec<usize> = keep
        .iter()
        .map(|k| {
            table
                .columns()
                .iter()
                .position(|c| c == k)
                .expect("known column")
        })
        .collect();
    let mut out = Table::new(keep.iter().copied());
    for row in table.rows() {
        out.push(idx.iter().map(|&i| row[i].clone()).collect());
    }
    out
}

fn check_beta(beta: f64) -> Outcome<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--beta must be positive and finite, got {beta}"
        )))
    }
}

impl Grid {
    /// `(n, β)` pairs, n-major, in the order given.
    fn points(&self) -> Outcome<Vec<(usize, f64)>> {
        let betas = match (&self.beta, &self.beta_grid) {
            (Some(b), _) => vec![*b],
            (None, Some(g)) => parse_beta_grid(g)?,
            (None, None) => unreachable!("clap requires one of them"),
        };
        for &b in &betas {
            check_beta(b)?;
        }
        let ns = match (&self.n, &self.n_grid) {
            (Some(n), _) => vec![*n],
            (None, Some(g)) => parse_n_grid(g)?,
            (None, None) => unreachable!("clap requires one of them"),
        };
        Ok(ns
            .iter()
            .flat_map(|&n| betas.iter().map(move |&b| (n, b)))
            .collect())
    }
}

fn parse_n_grid(spec: &str) -> Outcome<Vec<usize>> {
    let bad = || {
        Failure::Usage(format!(
            "--n-grid expects start:stop with start <= stop, got {spec:?}"
        ))
    };
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn parse_beta_grid(spec: &str) -> Outcome<Vec<f64>> {
    let bad = || {
        Failure::Usage(format!(
            "--beta-grid expects start:stop:count with 0 < start, 0 < stop, count >= 1, got {spec:?}"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = a.trim().parse().map_err(|_| bad())?;
    let stop: f64 = b.trim().parse().map_err(|_| bad())?;
    let count: usize = c.trim().parse().map_err(|_| bad())?;
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) || count == 0 {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let ratio = (stop / start).ln();
    let last = count - 1;
    Ok((0..count)
        .map(|k| match k {
            0 => start,
            k if k == last => stop,
            k => start * (ratio * k as f64 / last as f64).exp(),
        })
        .collect())
}

fn partition_header() -> Table {
    Table::new([
        "n",
        "beta",
        "method",
        "log_Zplus",
        "log_Zpm",
        "Zplus",
        "Zpm",
        "ratio",
        "rel_disagreement",
    ])
}

/// One row per available method; the gap is the largest log difference between them.
fn partition_rows(ctx: &Context, n: usize, beta: f64) -> Outcome<(Table, f64)> {
    let f = &ctx.family;
    let mut methods: Vec<(&str, PartitionPair)> = Vec::new();
    let mut first_error = None;
    match closed_form_partition(f, beta, n) {
        Ok(p) => methods.push(("closed", p)),
        Err(e @ Error::SymmetryViolated { .. }) => first_error = Some(e),
        Err(e) => return Err(e.into()),
    }
    match recursive_partition(f, beta, n) {
        Ok(seq) => methods.push(("recursive", seq[n])),
        Err(e @ Error::SymmetryViolated { .. }) => first_error = first_error.or(Some(e)),
        Err(e) => return Err(e.into()),
    }
    let volume = Volume::with_cap(n, ctx.cap)?;
    if volume.check_enumerable().is_ok() {
        let plus = brute_force_partition(f, beta, volume, BoundaryCondition::PLUS)?;
        let mixed = brute_force_partition(f, beta, volume, BoundaryCondition::PM)?;
        methods.push(("brute", PartitionPair { plus, mixed }));
    }
    if methods.is_empty() {
        return Err(first_error
            .map(Failure::from)
            .unwrap_or_else(|| Failure::Usage(format!("no method can evaluate n = {n}"))));
    }
    let mut gap: f64 = 0.0;
    for (i, (_, a)) in methods.iter().enumerate() {
        for (_, b) in &methods[i + 1..] {
            gap = gap.max(a.log_distance(b));
        }
    }
    let mut table = partition_header();
    for (name, p) in &methods {
        table.push(vec![
            Cell::Int(n as i64),
            Cell::Real(beta),
            Cell::Text((*name).into()),
            Cell::Real(p.plus.ln()),
            Cell::Real(p.mixed.ln()),
            Cell::Real(p.plus.value()),
            Cell::Real(p.mixed.value()),
            Cell::Real(p.plus.log_ratio(p.mixed).exp()),
            Cell::Real(gap),
        ]);
    }
    Ok((table, gap))
}

fn variance_row(ctx: &Context, n: usize, beta: f64) -> Outcome<Vec<Cell>> {
    let dist = psp_distribution(&ctx.family, beta, ctx.volume(n)?)?;
    let var = psp_moments(&dist).variance;
    let env = variance_envelope(beta)?;
    let inside = var >= env.lower - 1e-12 && var <= ENVELOPE_SLACK * env.upper;
    Ok(vec![
        Cell::Int(n as i64),
        Cell::Real(beta),
        Cell::Real(var),
        Cell::Real(env.lower),
        Cell::Real(env.upper),
        Cell::Real(env.upper_exact_series),
        Cell::Bool(inside),
        Cell::Bool(env.asymptotic_regime),
    ])
}
