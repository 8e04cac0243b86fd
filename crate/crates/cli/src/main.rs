//! `sai-forge`: benchmark CLI for sparse approximate inverse
//! preconditioning. `run` sweeps a parameter grid and prints a report
//! table; `pattern` dumps the sparsity pattern of one preconditioner for
//! external plotting.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use sai_core::harness::{
    build_with_threads, emit_report, pattern_dump, run_experiment, ExperimentSpec, ReportFormat,
};
use sai_core::rsai::{Algorithm, SaiConfig};
use sai_core::sparse::{ensure_nonzero_diagonal, load_matrix_market};

#[derive(Parser)]
#[command(name = "sai-forge", version, about = "Sparse approximate inverse preconditioner bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep: build preconditioners and solve with BiCGStab
    Run(RunArgs),
    /// Build one preconditioner and write its pattern (Matrix Market, pattern)
    Pattern(PatternArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Matrix Market file; repeatable
    #[arg(long = "matrix", required = true)]
    matrix: Vec<PathBuf>,

    /// Algorithm(s): rsai, spai (comma separated)
    #[arg(long = "alg", value_delimiter = ',', default_value = "rsai", value_parser = Algorithm::from_str)]
    alg: Vec<Algorithm>,

    /// Residual tolerance(s) epsilon (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    eps: Vec<f64>,

    /// Dominant indices per loop (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "3")]
    c: Vec<usize>,

    /// Loop cap(s); defaults to 10 for rsai and the fill-capped value for spai
    #[arg(long, value_delimiter = ',')]
    lmax: Vec<usize>,

    /// Most profitable indices per loop for spai (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "3")]
    la: Vec<usize>,

    /// Adaptive dropping of small entries: on | off
    #[arg(long, default_value = "on", value_parser = parse_on_off, action = clap::ArgAction::Set)]
    drop: bool,

    /// Fill ratio bound used to derive the spai loop cap
    #[arg(long, default_value_t = 10.0)]
    cap_ratio: f64,

    /// Solver relative tolerance
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,

    /// Solver iteration cap
    #[arg(long, default_value_t = 1000)]
    maxit: usize,

    /// Worker threads for the column builds (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Seed for synthetic inputs
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Output format: table | csv | json
    #[arg(long, default_value = "table", value_parser = ReportFormat::from_str)]
    format: ReportFormat,
}

#[derive(Args)]
struct PatternArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Destination for the coordinate pattern file
    #[arg(long)]
    out: PathBuf,
}

fn parse_on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected 'on' or 'off', got '{other}'")),
    }
}

fn to_spec(common: &CommonArgs, format: ReportFormat) -> ExperimentSpec {
    ExperimentSpec {
        matrices: common.matrix.clone(),
        algorithms: common.alg.clone(),
        eps: common.eps.clone(),
        dominant: common.c.clone(),
        max_loops: common.lmax.clone(),
        profitable: common.la.clone(),
        dropping: common.drop,
        spai_nnz_cap_ratio: common.cap_ratio,
        rtol: common.rtol,
        max_iters: common.maxit,
        threads: common.threads,
        seed: common.seed,
        format,
    }
}

fn cmd_run(args: &RunArgs) -> sai_core::Result<()> {
    let spec = to_spec(&args.common, args.format);
    let reports = run_experiment(&spec)?;
    print!("{}", emit_report(&reports, spec.format));
    Ok(())
}

fn cmd_pattern(args: &PatternArgs) -> sai_core::Result<()> {
    let common = &args.common;
    let a = load_matrix_market(&common.matrix[0])?;
    let (_, a) = ensure_nonzero_diagonal(&a)?;
    let algorithm = common.alg[0];
    let mut cfg = SaiConfig {
        epsilon: common.eps[0],
        dominant_per_loop: common.c[0],
        max_loops: common.lmax.first().copied().unwrap_or(10),
        dropping: common.drop,
        profitable_per_loop: common.la[0],
        spai_nnz_cap_ratio: common.cap_ratio,
    };
    if algorithm == Algorithm::Spai && common.lmax.is_empty() {
        cfg.max_loops = cfg.spai_loop_cap(&a);
    }
    let prec = build_with_threads(&a, &cfg, algorithm, common.threads)?;
    pattern_dump(&prec.matrix, &args.out)?;
    eprintln!(
        "wrote {} ({} entries, spar {:.2}, n_c {})",
        args.out.display(),
        prec.matrix.nnz(),
        prec.matrix.nnz() as f64 / a.nnz() as f64,
        prec.n_unconverged
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Pattern(args) => cmd_pattern(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
