//! Command-line front end: reorder, augment, solve, check, probe.

use cimmino::driver::{Pipeline, SolveMode, SolveOptions};
use cimmino::error::Error;
use cimmino::graph::{build_bipartite, cuthill_mckee, derive_permutations, reorder_augmented_full};
use cimmino::market::{
    read_matrix_market, read_vector_market, write_matrix_market, write_vector_market,
};
use cimmino::report::{
    augment_report_json, check_report_json, probe_report_json, reorder_report_json,
    solve_report_json,
};
use cimmino::verify::{conjecture_probe, run_all_suites};
use cimmino::{augment, solver};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cimmino",
    about = "Augmented block Cimmino solver for sparse systems and least squares",
    version
)]
struct Cli {
    /// Worker threads; the ABCD_THREADS environment variable overrides this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Consistent,
    #[value(name = "least-squares")]
    LeastSquares,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> SolveMode {
        match m {
            ModeArg::Consistent => SolveMode::Consistent,
            ModeArg::LeastSquares => SolveMode::LeastSquares,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the Cuthill-McKee reordering and report permutations and blocks.
    Reorder {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "consistent")]
        mode: ModeArg,
        /// Report path (stdout when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build the orthogonal augmentation and emit it in Matrix Market form.
    Augment {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "consistent")]
        mode: ModeArg,
        /// Where to write the augmented matrix.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve A x = b (consistent) or min ||A x - b|| (least-squares).
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, value_enum, default_value = "consistent")]
        mode: ModeArg,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the solution vector in Matrix Market array form.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Relative residual threshold for the consistency warning.
        #[arg(long, default_value_t = solver::DEFAULT_CONSISTENCY_TOL)]
        tol: f64,
        /// Treat consistency warnings as failures (exit 1).
        #[arg(long)]
        strict: bool,
        /// Include wall-clock phase timings in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Run the randomized verification suites.
    Check {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Densify an augmented system and report its rank structure.
    Probe {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "consistent")]
        mode: ModeArg,
        /// Largest dimension accepted for densification.
        #[arg(long, default_value_t = 2000)]
        cap: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_)
        | Error::Parse { .. }
        | Error::Unsupported(_)
        | Error::DimensionMismatch(_)
        | Error::IndexOutOfBounds { .. } => 2,
        _ => 1,
    }
}

fn emit(report: String, path: &Option<PathBuf>) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, report + "\n").map_err(Error::Io),
        None => {
            println!("{report}");
            Ok(())
        }
    }
}

fn configure_threads(flag: Option<usize>) {
    let threads = std::env::var("ABCD_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(flag);
    if let Some(t) = threads.filter(|&t| t > 0) {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    configure_threads(cli.threads);
    match cli.command {
        Command::Reorder {
            matrix,
            mode,
            report,
        } => {
            let a = read_matrix_market(&matrix)?;
            let json = match mode {
                ModeArg::Consistent => {
                    let levels = cuthill_mckee(&build_bipartite(&a))?;
                    let (rp, cp, blocks) = derive_permutations(&levels, a.nrows(), a.ncols())?;
                    blocks.verify_structure(&a.permute(&rp, &cp)?)?;
                    reorder_report_json(
                        "consistent",
                        a.nrows(),
                        a.ncols(),
                        &levels,
                        &rp,
                        &cp,
                        &blocks,
                    )
                }
                ModeArg::LeastSquares => {
                    let h = cimmino::graph::build_augmented_adjacency(&a);
                    let (perm, _ahat, blocks, levels) = reorder_augmented_full(&h)?;
                    reorder_report_json(
                        "least-squares",
                        a.nrows(),
                        a.ncols(),
                        &levels,
                        &perm,
                        &perm,
                        &blocks,
                    )
                }
            };
            emit(json, &report)?;
            Ok(0)
        }
        Command::Augment {
            matrix,
            mode,
            out,
            report,
        } => {
            let a = read_matrix_market(&matrix)?;
            let aug = match mode {
                ModeArg::Consistent => {
                    let levels = cuthill_mckee(&build_bipartite(&a))?;
                    let (rp, cp, blocks) = derive_permutations(&levels, a.nrows(), a.ncols())?;
                    let ar = a.permute(&rp, &cp)?;
                    blocks.verify_structure(&ar)?;
                    augment::augment_consistent(&ar, &blocks)?
                }
                ModeArg::LeastSquares => {
                    let h = cimmino::graph::build_augmented_adjacency(&a);
                    let (_, ahat, blocks, _) = reorder_augmented_full(&h)?;
                    let grouped = augment::group_tridiagonal_blocks(&ahat, &blocks)?;
                    augment::augment_tridiagonal(&ahat, &grouped)?
                }
            };
            let err = augment::orthogonality_error(&aug);
            if let Some(out) = out {
                write_matrix_market(&out, &aug.abar)?;
            }
            emit(augment_report_json(&aug, err), &report)?;
            Ok(0)
        }
        Command::Solve {
            matrix,
            rhs,
            mode,
            report,
            solution,
            tol,
            strict,
            timings,
        } => {
            let a = read_matrix_market(&matrix)?;
            let b = read_vector_market(&rhs)?;
            let pipeline = Pipeline::build(&a, mode.into())?;
            let opts = SolveOptions {
                consistency_tol: tol,
            };
            let solved = pipeline.solve(&b, &opts)?;
            for w in &solved.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(solution) = solution {
                write_vector_market(&solution, &solved.x)?;
            }
            emit(solve_report_json(&solved, timings), &report)?;
            Ok(if strict && !solved.warnings.is_empty() {
                1
            } else {
                0
            })
        }
        Command::Check { seed, report } => {
            let suites = run_all_suites(seed)?;
            let mut failed = false;
            for suite in &suites {
                let verdict = if suite.passed() { "PASS" } else { "FAIL" };
                eprintln!(
                    "suite {}: {} cases, {} failures [{verdict}]",
                    suite.name, suite.cases, suite.failures
                );
                for obs in &suite.observations {
                    eprintln!("  note: {obs}");
                }
                failed |= !suite.passed();
            }
            emit(check_report_json(&suites), &report)?;
            Ok(if failed { 1 } else { 0 })
        }
        Command::Probe {
            matrix,
            mode,
            cap,
            report,
        } => {
            let a = read_matrix_market(&matrix)?;
            let pipeline = Pipeline::build(&a, mode.into())?;
            let probe = conjecture_probe(&pipeline.aug, cap)?;
            for obs in &probe.observations {
                eprintln!("note: {obs}");
            }
            emit(probe_report_json(&probe), &report)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
