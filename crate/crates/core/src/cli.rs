//! Command-line interface.
//!
//! Exit codes: 0 on success (or a valid matrix), 2 when the analysis is
//! negative (invalid matrix, flagged oracle disagreement), 1 on usage, parse
//! or parameter errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{classify, NptFlags};
use crate::cm::{validate_cm, CorrelationMatrix};
use crate::edge::is_edge_cm;
use crate::error::Error;
use crate::examples::{
    example1_cm, example2_cm, open_grid, randomized_mixture_cm, scan_example1, scan_example2,
    scan_to_csv, Example1Params, Example2Params, MixtureSpec,
};
use crate::io::{cm_to_json, parse_cm_json, parse_matrix_json, to_json_string};
use crate::linalg::{RMat, ToleranceConfig};
use crate::oracle::{agreement_report, random_ppt_instances};
use crate::sepcrit::{product_decomposition, FailureReason, ProductDecomposition};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "trimode",
    version,
    about = "Entanglement classification of three-mode Gaussian states"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Relative tolerance of positivity tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_psd: f64,
    /// Relative cutoff for pseudo-inverses and rank decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rank: f64,
    /// Kernel threshold for edge detection.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_edge: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output format; scans default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Grid resolution of the oracle.
    #[arg(long, global = true, default_value_t = 400)]
    pub resolution: usize,
    /// Random trials of the oracle's direct search.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: usize,
}

impl CliConfig {
    pub fn tolerances(&self) -> Result<ToleranceConfig, Error> {
        ToleranceConfig::new(self.tol_psd, self.tol_rank, self.tol_edge)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check physical validity of a correlation matrix file.
    Validate { input: PathBuf },
    /// Entanglement class (1-5) with witness or failure reason.
    Classify { input: PathBuf },
    /// Edge-matrix report.
    Edge { input: PathBuf },
    /// Emit a member of one of the example families.
    Example {
        #[command(subcommand)]
        family: ExampleFamily,
        /// Write to this file instead of standard output.
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
    /// Classify an example family over a parameter grid.
    Scan {
        #[command(subcommand)]
        family: ScanFamily,
    },
    /// Monte Carlo check of the random-displacement mixing recipe.
    Mixture(MixtureArgs),
    /// Compare the separability decision with two brute-force searches.
    Oracle(OracleArgs),
}

#[derive(Debug, Subcommand)]
pub enum ExampleFamily {
    Ex1 {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        a1: f64,
        #[arg(long)]
        a2: f64,
    },
    Ex2 {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScanFamily {
    Ex1 {
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        c: f64,
        /// Grid as `start:step:stop` or a comma list; default 20 points over (0, 2].
        #[arg(long)]
        a1: Option<String>,
        #[arg(long)]
        a2: Option<String>,
    },
    Ex2 {
        #[arg(long, default_value_t = 1.2)]
        a: f64,
        /// Grid as `start:step:stop` or a comma list.
        #[arg(long, default_value = "0:0.01:0.5")]
        alpha: String,
    },
}

#[derive(Debug, Args)]
pub struct MixtureArgs {
    /// Base correlation matrix; vacuum of `--modes` modes if omitted.
    #[arg(long)]
    pub gamma0: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub modes: usize,
    /// JSON file with the added covariance, either a bare array of rows or
    /// the correlation-matrix schema.
    #[arg(long, conflicts_with = "p_identity")]
    pub p: Option<PathBuf>,
    /// Use `P = s𝟙`.
    #[arg(long)]
    pub p_identity: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Number of random PPT instances to generate.
    #[arg(long, default_value_t = 50)]
    pub random: usize,
    /// Additional correlation matrix files.
    pub inputs: Vec<PathBuf>,
}

struct Outcome {
    stdout: String,
    code: i32,
}

fn ok(stdout: String) -> Result<Outcome, Failure> {
    Ok(Outcome {
        stdout,
        code: EXIT_OK,
    })
}

/// Failure with the exit code it maps to.
struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    fn negative(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_NEGATIVE,
        }
    }
}

/// Library errors on analysis of a parsed matrix are negative verdicts
/// (invalid or non-PPT input); everything else is a usage error.
fn analysis_error(e: Error) -> Failure {
    match e {
        Error::PreconditionViolation(_) => Failure::negative(e.to_string()),
        _ => Failure::usage(e.to_string()),
    }
}

fn read_cm(path: &Path, tol: &ToleranceConfig) -> Result<CorrelationMatrix, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_cm_json(&text, tol.psd).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_square_matrix(path: &Path) -> Result<RMat, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(rows) = serde_json::from_str::<Vec<Vec<f64>>>(&text) {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Failure::usage("matrix must be square and non-empty"));
        }
        return Ok(RMat::from_fn(n, n, |i, j| rows[i][j]));
    }
    parse_matrix_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// `start:step:stop` (inclusive, rounded to the nearest step count) or `v1,v2,…`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (parse(start)?, parse(step)?, parse(stop)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(format!("bad range {spec:?}"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            // strip accumulated binary noise such as 0.31999999999999995
            Ok((0..=n)
                .map(|k| ((start + step * k as f64) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => spec.split(',').map(parse).collect(),
        _ => Err(format!("bad grid {spec:?}; use start:step:stop or a comma list")),
    }
}

#[derive(Serialize)]
struct Witness {
    point: [f64; 2],
    gamma_a: [[f64; 2]; 2],
}

#[derive(Serialize)]
struct ClassifyOutput {
    class: u8,
    npt: NptFlags,
    min_eigs: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<ProductDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure_reason: Option<FailureReason>,
}

#[derive(Serialize)]
struct MixtureOutput {
    deviation: f64,
    n_samples: usize,
    seed: u64,
    empirical: Vec<Vec<f64>>,
}

fn rows(m: &RMat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = &cli.config;
    let tol = cfg.tolerances().map_err(|e| Failure::usage(e.to_string()))?;
    match &cli.command {
        Command::Validate { input } => {
            let cm = read_cm(input, &tol)?;
            let report = validate_cm(&cm, &tol).map_err(analysis_error)?;
            Ok(Outcome {
                stdout: to_json_string(&report),
                code: if report.valid { EXIT_OK } else { EXIT_NEGATIVE },
            })
        }
        Command::Classify { input } => {
            let cm = read_cm(input, &tol)?;
            let c = classify(&cm, &tol).map_err(analysis_error)?;
            let decision = c.sep_decision.as_ref();
            let witness = decision.and_then(|d| {
                Some(Witness {
                    point: d.witness_point?,
                    gamma_a: d.witness_gamma_a?,
                })
            });
            let decomposition = match decision {
                Some(d) if d.separable => {
                    Some(product_decomposition(&cm, d, &tol).map_err(analysis_error)?)
                }
                _ => None,
            };
            ok(to_json_string(&ClassifyOutput {
                class: c.class_label,
                npt: c.npt_flags,
                min_eigs: c.min_eigs,
                witness,
                decomposition,
                failure_reason: decision.and_then(|d| d.failure_reason),
            }))
        }
        Command::Edge { input } => {
            let cm = read_cm(input, &tol)?;
            ok(to_json_string(&is_edge_cm(&cm, &tol).map_err(analysis_error)?))
        }
        Command::Example { family, output } => {
            let cm = match *family {
                ExampleFamily::Ex1 { c, a1, a2 } => example1_cm(&Example1Params { c, a1, a2 }),
                ExampleFamily::Ex2 { a, alpha } => example2_cm(&Example2Params { a, alpha }),
            }
            .map_err(|e| Failure::usage(e.to_string()))?;
            let json = cm_to_json(&cm);
            match output {
                Some(path) => {
                    fs::write(path, json + "\n")
                        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
                    ok(String::new())
                }
                None => ok(json),
            }
        }
        Command::Scan { family } => {
            let rows = match family {
                ScanFamily::Ex1 { c, a1, a2 } => {
                    let grid = |s: &Option<String>| match s {
                        Some(s) => parse_grid(s).map_err(Failure::usage),
                        None => Ok(open_grid(2.0, 20)),
                    };
                    scan_example1(*c, &grid(a1)?, &grid(a2)?, &tol)
                }
                ScanFamily::Ex2 { a, alpha } => {
                    scan_example2(*a, &parse_grid(alpha).map_err(Failure::usage)?, &tol)
                }
            }
            .map_err(|e| Failure::usage(e.to_string()))?;
            match cfg.format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => ok(scan_to_csv(&rows)),
                OutputFormat::Json => ok(to_json_string(&rows)),
            }
        }
        Command::Mixture(args) => {
            let gamma0 = match &args.gamma0 {
                Some(path) => read_cm(path, &tol)?,
                None if args.modes > 0 => CorrelationMatrix::identity(args.modes),
                None => return Err(Failure::usage("modes must be positive")),
            };
            let dim = gamma0.matrix().nrows();
            let p = match (&args.p, args.p_identity) {
                (Some(path), _) => read_square_matrix(path)?,
                (None, Some(s)) => RMat::identity(dim, dim) * s,
                (None, None) => return Err(Failure::usage("one of --p or --p-identity is required")),
            };
            let spec = MixtureSpec {
                gamma0,
                p,
                n_samples: args.samples,
                seed: cfg.seed,
            };
            let r = randomized_mixture_cm(&spec).map_err(|e| Failure::usage(e.to_string()))?;
            ok(to_json_string(&MixtureOutput {
                deviation: r.deviation,
                n_samples: args.samples,
                seed: cfg.seed,
                empirical: rows(&r.empirical),
            }))
        }
        Command::Oracle(args) => {
            let mut instances =
                random_ppt_instances(args.random, cfg.seed).map_err(|e| Failure::usage(e.to_string()))?;
            for path in &args.inputs {
                instances.push(read_cm(path, &tol)?);
            }
            let report = agreement_report(&instances, cfg.resolution, cfg.trials, cfg.seed, &tol)
                .map_err(analysis_error)?;
            let stdout = match cfg.format.unwrap_or(OutputFormat::Json) {
                OutputFormat::Json => to_json_string(&report),
                OutputFormat::Csv => report.to_csv(),
            };
            Ok(Outcome {
                stdout,
                code: if report.flagged == 0 { EXIT_OK } else { EXIT_NEGATIVE },
            })
        }
    }
}

/// Parses `args`, runs the command, writes to the given streams and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if !outcome.stdout.is_empty() {
                let text = outcome.stdout;
                let _ = out.write_all(text.as_bytes());
                if !text.ends_with('\n') {
                    let _ = out.write_all(b"\n");
                }
            }
            outcome.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
