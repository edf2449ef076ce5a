//! Command-line front end: closed-form moments for one parameter point or a
//! matrix file, CSV sweeps over the lag-one correlation, the interior-maximum
//! search, and Monte Carlo verification.
//!
//! Exit codes: 0 success, 2 usage errors, 3 domain errors, 4 I/O failures,
//! 5 verification failure (some |z| > 3). All reals are printed with 17
//! significant digits so they round-trip to the exact binary doubles.

use clap::{Parser, Subcommand, ValueEnum};
use gaussmax::ar1::{maximize, moments_ar1, sweep, Target};
use gaussmax::corrmat::{ar1_matrix, Ar1Parameter, CorrelationMatrix};
use gaussmax::moments::{second_moment_max, variance_max, Method, MomentResult};
use gaussmax::oracle::sample_max_moments;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(
    name = "gaussmax",
    version,
    about = "Moments of the maximum of correlated Gaussian variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean (ell <= 5), second moment (ell <= 6), and variance of the maximum
    Moments {
        /// Segment length, 2..=6
        #[arg(long, value_parser = parse_ell)]
        ell: usize,
        /// Lag-one correlation of the AR(1) family, |rho| < 1
        #[arg(long, value_parser = parse_rho, allow_negative_numbers = true)]
        rho: Option<f64>,
        /// Correlation matrix file: dimension line, then rows ('#' comments)
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Write a CSV of moments over an ascending rho grid
    Sweep {
        #[arg(long, value_parser = parse_ell)]
        ell: usize,
        #[arg(long, value_parser = parse_rho, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, value_parser = parse_rho, allow_negative_numbers = true)]
        max: f64,
        #[arg(long)]
        step: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Locate the interior maximum of a moment over rho
    Maximize {
        #[arg(long, value_parser = parse_ell)]
        ell: usize,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Compare closed forms against Monte Carlo; exit 5 when any |z| > 3
    Verify {
        #[arg(long, value_parser = parse_ell)]
        ell: usize,
        #[arg(long, value_parser = parse_rho, allow_negative_numbers = true)]
        rho: f64,
        /// Sample count, at least 10000
        #[arg(long, value_parser = parse_samples)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Mean,
    Second,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Mean => Target::Mean,
            TargetArg::Second => Target::SecondMoment,
        }
    }
}

fn parse_ell(s: &str) -> Result<usize, String> {
    let ell: usize = s.parse().map_err(|_| format!("invalid ell {s:?}"))?;
    if (2..=6).contains(&ell) {
        Ok(ell)
    } else {
        Err(format!("ell must be in 2..=6, got {ell}"))
    }
}

fn parse_rho(s: &str) -> Result<f64, String> {
    let rho: f64 = s.parse().map_err(|_| format!("invalid rho {s:?}"))?;
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(rho)
    } else {
        Err(format!("rho must satisfy |rho| < 1, got {rho}"))
    }
}

fn parse_samples(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("invalid sample count {s:?}"))?;
    if n >= 10_000 {
        Ok(n)
    } else {
        Err(format!("samples must be at least 10000, got {n}"))
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<gaussmax::Error> for Failure {
    fn from(e: gaussmax::Error) -> Self {
        Failure::new(EXIT_DOMAIN, e.to_string())
    }
}

/// 17 significant digits: lossless round-trip of binary doubles.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn g17_opt(x: Option<f64>) -> String {
    x.map(g17).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gaussmax: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Moments {
            ell,
            rho,
            matrix,
            format,
        } => cmd_moments(ell, rho, matrix.as_deref(), format),
        Command::Sweep {
            ell,
            min,
            max,
            step,
            out,
        } => cmd_sweep(ell, min, max, step, &out),
        Command::Maximize {
            ell,
            target,
            format,
        } => cmd_maximize(ell, target.into(), format),
        Command::Verify {
            ell,
            rho,
            samples,
            seed,
        } => cmd_verify(ell, rho, samples, seed),
    }
}

fn moments_of_matrix(m: &CorrelationMatrix) -> gaussmax::Result<MomentResult> {
    if m.dim() <= 5 {
        variance_max(m)
    } else {
        Ok(MomentResult {
            ell: m.dim(),
            mean: None,
            second_moment: second_moment_max(m)?,
            variance: None,
            method: Method::GeneralAfonja,
        })
    }
}

fn cmd_moments(
    ell: usize,
    rho: Option<f64>,
    matrix: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let result = match (rho, matrix) {
        (Some(rho), None) => moments_ar1(rho, ell)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            let m = CorrelationMatrix::parse_text(&text)?;
            if m.dim() != ell {
                return Err(Failure::new(
                    EXIT_DOMAIN,
                    format!("matrix dimension {} does not match --ell {ell}", m.dim()),
                ));
            }
            moments_of_matrix(&m)?
        }
        _ => {
            return Err(Failure::new(
                EXIT_USAGE,
                "exactly one of --rho and --matrix is required",
            ))
        }
    };
    print!("{}", render_moments(&result, format));
    Ok(())
}

fn render_moments(m: &MomentResult, format: Format) -> String {
    match format {
        Format::Csv => format!(
            "ell,mean,second_moment,variance\n{},{},{},{}\n",
            m.ell,
            g17_opt(m.mean),
            g17(m.second_moment),
            g17_opt(m.variance),
        ),
        Format::Json => {
            let mut s = String::from("{");
            let _ = write!(s, "\"ell\":{}", m.ell);
            if let Some(mean) = m.mean {
                let _ = write!(s, ",\"mean\":{}", g17(mean));
            }
            let _ = write!(s, ",\"second_moment\":{}", g17(m.second_moment));
            if let Some(variance) = m.variance {
                let _ = write!(s, ",\"variance\":{}", g17(variance));
            }
            s.push_str("}\n");
            s
        }
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation rejects a NaN step
fn cmd_sweep(ell: usize, min: f64, max: f64, step: f64, out: &Path) -> Result<(), Failure> {
    if !(min < max) || !(step > 0.0) {
        return Err(Failure::new(
            EXIT_USAGE,
            "require --min < --max and --step > 0",
        ));
    }
    let rows = sweep(ell, min, max, step)?;
    let file = std::fs::File::create(out)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", out.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let io_fail = |e: std::io::Error| Failure::new(EXIT_IO, format!("{}: {e}", out.display()));
    writeln!(w, "rho,ell,mean,second_moment,variance").map_err(io_fail)?;
    for row in &rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            g17(row.rho),
            row.ell,
            g17_opt(row.mean),
            g17(row.second_moment),
            g17_opt(row.variance),
        )
        .map_err(io_fail)?;
    }
    w.flush().map_err(io_fail)?;
    Ok(())
}

fn cmd_maximize(ell: usize, target: Target, format: Format) -> Result<(), Failure> {
    let res = maximize(ell, target)?;
    match format {
        Format::Csv => {
            println!("ell,target,rho_star,value,evaluations");
            println!(
                "{},{},{},{},{}",
                res.ell,
                res.target.as_str(),
                g17(res.rho_star),
                g17(res.value),
                res.evaluations
            );
        }
        Format::Json => {
            println!(
                "{{\"ell\":{},\"target\":\"{}\",\"rho_star\":{},\"value\":{},\"evaluations\":{}}}",
                res.ell,
                res.target.as_str(),
                g17(res.rho_star),
                g17(res.value),
                res.evaluations
            );
        }
    }
    Ok(())
}

fn cmd_verify(ell: usize, rho: f64, samples: usize, seed: u64) -> Result<(), Failure> {
    let analytic = moments_ar1(rho, ell)?;
    let matrix = ar1_matrix(Ar1Parameter::new(rho)?, ell)?;
    let est = sample_max_moments(&matrix, samples, seed)?;

    let mut rows: Vec<(&str, f64, f64, f64)> = Vec::new();
    if let Some(mean) = analytic.mean {
        rows.push(("mean", mean, est.mean, est.se_mean));
    }
    rows.push((
        "second_moment",
        analytic.second_moment,
        est.second_moment,
        est.se_second,
    ));
    if let Some(variance) = analytic.variance {
        rows.push(("variance", variance, est.variance, est.se_variance));
    }

    println!("stat,analytic,monte_carlo,se,z");
    let mut worst = 0.0_f64;
    for (stat, a, mc, se) in rows {
        let z = (mc - a) / se;
        worst = worst.max(z.abs());
        println!("{stat},{},{},{},{}", g17(a), g17(mc), g17(se), g17(z));
    }
    if worst > 3.0 {
        return Err(Failure::new(
            EXIT_VERIFY,
            format!("verification failed: max |z| = {worst:.2} > 3"),
        ));
    }
    Ok(())
}
