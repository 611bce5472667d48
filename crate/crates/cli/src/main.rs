mod error;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use checkmat::embedding::{
    alphabet_mean, embed_block, reconstruct_background, reconstruct_payload, separate, EmbedSpec,
};
use checkmat::factorization::{
    analytic_factor_checkered, analytic_factor_ones, analytic_factor_zero_one, svd_jacobi,
    DEFAULT_MAX_SWEEPS, DEFAULT_SVD_TOL,
};
use checkmat::fastops::{bench, bench_csv, bench_text};
use checkmat::patterns::gen_checkered;
use checkmat::rank::{default_tolerance, linear_grid, rank_gauss, sweep_alpha, sweep_csv};
use checkmat::{Alphabet, AlphabetKind, Matrix, Phase};

use crate::error::{exit, CliError};
use crate::render::{data_range, Format, RenderSpec};

const TOL_ENV: &str = "CHECKMAT_TOL";

#[derive(Parser)]
#[command(name = "checkmat", version, about = "Checkered-pattern matrices: rank, SVD, embedding, structured products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a checkered pattern.
    Gen {
        rows: usize,
        cols: usize,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical rank of a CSV matrix by Gaussian elimination.
    Rank {
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the echelon form as CSV.
        #[arg(long)]
        echelon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic vs numerical rank of (1 - alpha) B + alpha C over a list of alphas.
    SweepAlpha {
        rows: usize,
        cols: usize,
        /// Comma-separated alpha values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "grid")]
        alphas: Vec<f64>,
        /// Evenly spaced grid as LO,HI,COUNT.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form rank-one factors of a checkered or all-ones pattern.
    Factor {
        rows: usize,
        cols: usize,
        #[arg(long, value_enum, default_value = "plus-minus")]
        pattern: FactorPattern,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jacobi SVD of a CSV matrix.
    Svd {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SVD_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a uniform block into a checkered pattern.
    Embed {
        rows: usize,
        cols: usize,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        /// Block size as PxQ.
        #[arg(long, default_value = "2x2")]
        block: String,
        /// `center` or ROW,COL.
        #[arg(long, default_value = "center")]
        at: String,
        /// Defaults to the alphabet mean.
        #[arg(long, allow_hyphen_values = true)]
        fill: Option<f64>,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the embed spec JSON.
        #[arg(long)]
        spec_out: Option<PathBuf>,
    },
    /// Separate an embedded matrix into background and payload.
    Retrieve {
        input: PathBuf,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one PGM per SVD component (plus background and payload) here.
        #[arg(long)]
        components_dir: Option<PathBuf>,
    },
    /// Structured vs dense matvec: flop counts and timings.
    Bench {
        /// Comma-separated sizes, each MxN.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a CSV matrix as PGM or ASCII.
    Render {
        input: PathBuf,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct AlphabetArgs {
    #[arg(long, value_enum, default_value = "plus-minus")]
    alphabet: AlphabetArg,
    #[arg(long, value_enum, default_value = "high-first")]
    phase: PhaseArg,
}

impl AlphabetArgs {
    fn get(&self) -> Alphabet {
        let kind = match self.alphabet {
            AlphabetArg::ZeroOne => AlphabetKind::ZeroOne,
            AlphabetArg::PlusMinus => AlphabetKind::PlusMinus,
        };
        let phase = match self.phase {
            PhaseArg::HighFirst => Phase::HighFirst,
            PhaseArg::LowFirst => Phase::LowFirst,
        };
        Alphabet::new(kind, phase)
    }
}

#[derive(Args, Clone)]
struct RenderArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    gray_low: u8,
    #[arg(long, default_value_t = 255)]
    gray_high: u8,
    /// Value range LO,HI mapped onto the gray levels; defaults to the data range.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
}

impl RenderArgs {
    fn spec(&self, default_range: (f64, f64)) -> Result<RenderSpec, CliError> {
        let range = match &self.range {
            Some(s) => {
                let v = parse_floats(s, "--range")?;
                if v.len() != 2 {
                    return Err(CliError::Usage(format!("--range expects LO,HI, got '{s}'")));
                }
                (v[0], v[1])
            }
            None => default_range,
        };
        RenderSpec::new(self.format, self.gray_low, self.gray_high, range)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphabetArg {
    ZeroOne,
    PlusMinus,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    HighFirst,
    LowFirst,
}

#[derive(Clone, Copy, ValueEnum)]
enum FactorPattern {
    PlusMinus,
    ZeroOne,
    Ones,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            let code = if err.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("checkmat: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen {
            rows,
            cols,
            alphabet,
            render,
            out,
        } => {
            let alphabet = alphabet.get();
            let m = gen_checkered(rows, cols, alphabet)?;
            let spec = render.spec((alphabet.low_symbol(), alphabet.high_symbol()))?;
            emit(out.as_deref(), &spec.render(&m))
        }
        Command::Rank {
            input,
            tol,
            echelon,
            out,
        } => {
            let m = read_matrix(&input)?;
            let tol = match tol.or(env_tolerance()?) {
                Some(t) => t,
                None => default_tolerance(&m),
            };
            let report = rank_gauss(&m, tol)?;
            if let Some(path) = echelon {
                write_file(&path, &report.echelon_csv())?;
            }
            emit(out.as_deref(), &(report.to_json() + "\n"))
        }
        Command::SweepAlpha {
            rows,
            cols,
            alphas,
            grid,
            tol,
            out,
        } => {
            let alphas = match grid {
                Some(g) => {
                    let v = parse_floats(&g, "--grid")?;
                    if v.len() != 3 || v[2] < 0.0 || v[2].fract() != 0.0 {
                        return Err(CliError::Usage(format!("--grid expects LO,HI,COUNT, got '{g}'")));
                    }
                    linear_grid(v[0], v[1], v[2] as usize)
                }
                None => alphas,
            };
            let tol = match tol.or(env_tolerance()?) {
                Some(t) => t,
                None => 1e-10 * rows.max(cols) as f64 * alphas.iter().fold(1.0_f64, |a, x| a.max((2.0 * x - 1.0).abs())),
            };
            let table = sweep_alpha(&alphas, rows, cols, tol)?;
            emit(out.as_deref(), &sweep_csv(&table))
        }
        Command::Factor {
            rows,
            cols,
            pattern,
            out,
        } => {
            let factors = match pattern {
                FactorPattern::PlusMinus => vec![analytic_factor_checkered(rows, cols)?],
                FactorPattern::Ones => vec![analytic_factor_ones(rows, cols)?],
                FactorPattern::ZeroOne => {
                    let (a, b) = analytic_factor_zero_one(rows, cols)?;
                    vec![a, b]
                }
            };
            let doc = serde_json::json!({ "rows": rows, "cols": cols, "factors": factors });
            emit(out.as_deref(), &(to_pretty(&doc) + "\n"))
        }
        Command::Svd {
            input,
            tol,
            max_sweeps,
            out,
        } => {
            let m = read_matrix(&input)?;
            let svd = svd_jacobi(&m, tol, max_sweeps)?;
            emit(out.as_deref(), &(svd.to_json() + "\n"))
        }
        Command::Embed {
            rows,
            cols,
            alphabet,
            block,
            at,
            fill,
            render,
            out,
            spec_out,
        } => {
            let alphabet = alphabet.get();
            let (p, q) = parse_size(&block)?;
            let mut spec = EmbedSpec::centered(rows, cols, alphabet, p, q);
            if at != "center" {
                let v = parse_usizes(&at, "--at")?;
                if v.len() != 2 {
                    return Err(CliError::Usage(format!("--at expects 'center' or ROW,COL, got '{at}'")));
                }
                spec.block_top_left = (v[0], v[1]);
            }
            spec.fill_value = fill.unwrap_or(alphabet_mean(alphabet));
            let m = embed_block(&spec)?;
            if let Some(path) = spec_out {
                write_file(&path, &(spec.to_json() + "\n"))?;
            }
            let rspec = render.spec(data_range(&m))?;
            emit(out.as_deref(), &rspec.render(&m))
        }
        Command::Retrieve {
            input,
            alphabet,
            out,
            components_dir,
        } => {
            let m = read_matrix(&input)?;
            let report = separate(&m, alphabet.get())?;
            if let Some(dir) = components_dir {
                fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
                let pgm = |mat: &Matrix| -> Result<String, CliError> {
                    Ok(RenderSpec::new(Format::Pgm, 0, 255, data_range(mat))?.pgm(mat))
                };
                write_file(&dir.join("input.pgm"), &pgm(&m)?)?;
                for (k, c) in report.svd_components.iter().enumerate() {
                    write_file(&dir.join(format!("component_{}.pgm", k + 1)), &pgm(&c.factor.realize())?)?;
                }
                write_file(&dir.join("background.pgm"), &pgm(&reconstruct_background(&report))?)?;
                write_file(&dir.join("payload.pgm"), &pgm(&reconstruct_payload(&report))?)?;
            }
            emit(out.as_deref(), &(report.to_json() + "\n"))
        }
        Command::Bench {
            sizes,
            rank,
            trials,
            format,
            out,
        } => {
            let sizes = sizes
                .iter()
                .filter(|s| !s.is_empty())
                .map(|s| parse_size(s))
                .collect::<Result<Vec<_>, _>>()?;
            let table = bench(&sizes, rank, trials)?;
            let text = match format {
                TableFormat::Csv => bench_csv(&table),
                TableFormat::Text => bench_text(&table),
            };
            emit(out.as_deref(), &text)
        }
        Command::Render { input, render, out } => {
            let m = read_matrix(&input)?;
            let spec = render.spec(data_range(&m))?;
            emit(out.as_deref(), &spec.render(&m))
        }
    }
}

fn env_tolerance() -> Result<Option<f64>, CliError> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{TOL_ENV}='{s}' is not a number"))),
        Err(_) => Ok(None),
    }
}

fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Matrix::from_csv(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn parse_floats(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{flag}: '{t}' is not a number")))
        })
        .collect()
}

fn parse_usizes(s: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{flag}: '{t}' is not a non-negative integer")))
        })
        .collect()
}

fn parse_size(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("expected a size like 30x30, got '{s}'"));
    let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}
