//! `permlab`: permutation algebra, densities at a scale, permuton sampling,
//! multi-scale constructions and convergence tables.
//!
//! Permutation and JSON arguments are given inline, or as `@path` to read a file.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 construction
//! larger than the length cap (report written, permutation not).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use permlab::construct::{AssemblyReport, ConstructionDescriptor};
use permlab::harness::{run_converge, ExperimentConfig};
use permlab::{count, estimate, Error, Permutation, Permuton, ScalingFunction, SeedStream};

#[derive(Parser, Debug)]
#[command(
    name = "permlab",
    version,
    about = "Permutation patterns at every scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Root seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Confidence level of reported half-widths.
    #[arg(long, global = true)]
    confidence: Option<f64>,
    /// Scaling function, e.g. `n`, `n^1/2`, `0.5*n^2/3*log^-1`.
    #[arg(long, global = true)]
    scale: Option<ScalingFunction>,
    /// Largest permutation a construction may materialize.
    #[arg(long, global = true)]
    length_cap: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Permutation algebra.
    Ops {
        #[command(subcommand)]
        op: Op,
    },
    /// Occurrences of PATTERN in HOST of width at most the scale (default `n`).
    Count { pattern: String, host: String },
    /// Density of PATTERN in HOST at the scale, as JSON.
    Density {
        host: String,
        pattern: String,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
    },
    /// A random permutation drawn from a permuton descriptor.
    SamplePermuton {
        descriptor: String,
        #[arg(long)]
        length: usize,
    },
    /// Builds a construction from a descriptor; writes the permutation to
    /// `--out` and the report to `<out>.report.json`.
    Construct { descriptor: String },
    /// Runs a convergence experiment and writes CSV.
    Converge {
        config: String,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum Op {
    Inverse {
        perm: String,
    },
    /// Direct sum of all arguments, left to right.
    Dsum {
        #[arg(required = true, num_args = 2..)]
        perms: Vec<String>,
    },
    /// `⊕^c` of a permutation.
    Power {
        perm: String,
        copies: usize,
    },
    /// Iterated substitution `a[b][c]…`.
    Subst {
        #[arg(required = true, num_args = 2..)]
        perms: Vec<String>,
    },
    /// Box product of two permutations.
    #[command(name = "box")]
    BoxProduct {
        left: String,
        right: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Mc,
}

enum Failure {
    Lib(Error),
    CapExceeded(u128, u64),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(Error::Json(e))
    }
}

type Outcome = Result<(), Failure>;

fn read_arg(arg: &str) -> Result<String, Error> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path)?),
        None => Ok(arg.to_string()),
    }
}

fn perm_arg(arg: &str) -> Result<Permutation, Error> {
    read_arg(arg)?.parse()
}

fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut w = io::stdout().lock();
            w.write_all(text.as_bytes())?;
            w.flush()
        }
    }
}

fn emit_perm(out: Option<&Path>, p: &Permutation) -> io::Result<()> {
    let write = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "{p}")?;
        w.flush()
    };
    match out {
        Some(path) => write(&mut BufWriter::new(fs::File::create(path)?)),
        None => write(&mut BufWriter::new(io::stdout().lock())),
    }
}

fn json_line(value: serde_json::Value) -> Result<String, serde_json::Error> {
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn scale_width(cli: &Cli, n: usize) -> Result<f64, Error> {
    match &cli.scale {
        None => Ok(n as f64),
        Some(s) => s.evaluate(n as f64),
    }
}

fn ops(cli: &Cli, op: &Op) -> Outcome {
    let result = match op {
        Op::Inverse { perm } => perm_arg(perm)?.inverse(),
        Op::Dsum { perms } => fold(perms, |a, b| Ok(a.direct_sum(b)))?,
        Op::Power { perm, copies } => perm_arg(perm)?.direct_sum_power(*copies)?,
        Op::Subst { perms } => fold(perms, |a, b| Ok(a.substitute(b)))?,
        Op::BoxProduct { left, right } => perm_arg(left)?.box_product(&perm_arg(right)?),
    };
    Ok(emit_perm(cli.out.as_deref(), &result)?)
}

fn fold<F>(args: &[String], step: F) -> Result<Permutation, Error>
where
    F: Fn(&Permutation, &Permutation) -> Result<Permutation, Error>,
{
    let mut acc = perm_arg(&args[0])?;
    for a in &args[1..] {
        acc = step(&acc, &perm_arg(a)?)?;
    }
    Ok(acc)
}

fn count_cmd(cli: &Cli, pattern: &str, host: &str) -> Outcome {
    let (pattern, host) = (perm_arg(pattern)?, perm_arg(host)?);
    let f = scale_width(cli, host.len())?;
    let hits = count::count_occurrences_width(&pattern, &host, f)?;
    Ok(emit(cli.out.as_deref(), &format!("{hits}\n"))?)
}

fn density_cmd(cli: &Cli, host: &str, pattern: &str, mode: Mode) -> Outcome {
    let (host, pattern) = (perm_arg(host)?, perm_arg(pattern)?);
    let f = scale_width(cli, host.len())?;
    let est = match mode {
        Mode::Exact => count::density_at_scale(&pattern, &host, f)?,
        Mode::Mc => estimate::estimate_density_at_scale(
            &pattern,
            &host,
            f,
            cli.samples.unwrap_or(100_000),
            cli.confidence.unwrap_or(0.99),
            SeedStream::new(cli.seed.unwrap_or(0)).tagged("density"),
        )?,
    };
    Ok(emit(
        cli.out.as_deref(),
        &json_line(serde_json::to_value(est)?)?,
    )?)
}

fn sample_cmd(cli: &Cli, descriptor: &str, length: usize) -> Outcome {
    let permuton: Permuton = serde_json::from_str(&read_arg(descriptor)?)?;
    let mut rng = SeedStream::new(cli.seed.unwrap_or(0))
        .tagged("sample-permuton")
        .rng();
    let p = permuton.sample_permutation(length, &mut rng)?;
    Ok(emit_perm(cli.out.as_deref(), &p)?)
}

fn report_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".report.json");
    PathBuf::from(name)
}

fn write_report(out: Option<&Path>, report: &AssemblyReport) -> Outcome {
    let text = json_line(serde_json::to_value(report)?)?;
    match out {
        Some(path) => fs::write(report_path(path), text)?,
        None => emit(None, &text)?,
    }
    Ok(())
}

fn construct_cmd(cli: &Cli, descriptor: &str) -> Outcome {
    let mut desc: ConstructionDescriptor = serde_json::from_str(&read_arg(descriptor)?)?;
    if let Some(cap) = cli.length_cap {
        desc.set_length_cap(cap);
    }
    let plan = desc.plan()?;
    let out = cli.out.as_deref();
    if plan.exceeds_cap() {
        write_report(out, &plan)?;
        return Err(Failure::CapExceeded(plan.total_length, plan.length_cap));
    }
    let (perm, report) = desc.build()?;
    if let Some(path) = out {
        emit_perm(Some(path), &perm)?;
    }
    write_report(out, &report)
}

fn converge_cmd(cli: &Cli, config: &str, workers: Option<usize>) -> Outcome {
    let mut cfg: ExperimentConfig = serde_json::from_str(&read_arg(config)?)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = cli.samples {
        cfg.samples = samples;
    }
    if let Some(c) = cli.confidence {
        cfg.confidence = c;
    }
    if let Some(cap) = cli.length_cap {
        cfg.length_cap = cap;
    }
    if let Some(scale) = cli.scale {
        cfg.scales = vec![scale];
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    let table = run_converge(&cfg)?;
    Ok(emit(cli.out.as_deref(), &table.to_csv_string()?)?)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Ops { op } => ops(cli, op),
        Command::Count { pattern, host } => count_cmd(cli, pattern, host),
        Command::Density {
            host,
            pattern,
            mode,
        } => density_cmd(cli, host, pattern, *mode),
        Command::SamplePermuton { descriptor, length } => sample_cmd(cli, descriptor, *length),
        Command::Construct { descriptor } => construct_cmd(cli, descriptor),
        Command::Converge { config, workers } => converge_cmd(cli, config, *workers),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::CapExceeded(required, cap)) => {
            eprintln!(
                "permlab: construction needs length {required}, above the cap {cap}; report only"
            );
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("permlab: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
