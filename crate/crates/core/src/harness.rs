//! Experiment harness: loads matrices, preprocesses, builds
//! preconditioners, runs the solver and emits report tables.

use std::fmt::Write as FmtWrite;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{bicgstab, SolveStatus};
use crate::rsai::{build_preconditioner, Algorithm, SaiConfig};
use crate::sparse::{ensure_nonzero_diagonal, load_matrix_market, SparseMatrix};

/// Rendered iteration count: a number, or the failure markers used in the
/// report tables (`†` iteration cap, `‡` stagnation, `bd` breakdown).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "count", rename_all = "snake_case")]
pub enum IterationCell {
    Count(u64),
    NotConverged,
    Stagnated,
    Breakdown,
}

impl std::fmt::Display for IterationCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IterationCell::Count(n) => write!(f, "{n}"),
            IterationCell::NotConverged => write!(f, "†"),
            IterationCell::Stagnated => write!(f, "‡"),
            IterationCell::Breakdown => write!(f, "bd"),
        }
    }
}

/// One row of an experiment sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub matrix: String,
    pub algorithm: Algorithm,
    pub config: SaiConfig,
    /// `nnz(M)/nnz(A)`.
    pub spar: f64,
    /// Preconditioner construction wall time, seconds.
    pub ptime: f64,
    /// Columns that missed the accuracy target.
    pub n_unconverged: usize,
    pub iterations: IterationCell,
    /// Solve wall time, seconds.
    pub stime: f64,
    pub final_relative_residual: f64,
    /// Set when the row failed before producing results.
    pub error: Option<String>,
}

impl RunReport {
    fn failed(matrix: String, algorithm: Algorithm, config: SaiConfig, msg: String) -> Self {
        Self {
            matrix,
            algorithm,
            config,
            spar: 0.0,
            ptime: 0.0,
            n_unconverged: 0,
            iterations: IterationCell::Count(0),
            stime: 0.0,
            final_relative_residual: f64::NAN,
            error: Some(msg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

/// A sweep: the cartesian grid of matrices, algorithms and parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub matrices: Vec<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub eps: Vec<f64>,
    /// Dominant indices per loop (the `--c` axis).
    pub dominant: Vec<usize>,
    /// Loop caps; empty uses 10 for rsai and the fill-capped value for spai.
    pub max_loops: Vec<usize>,
    /// Profitable indices per loop for spai (the `--la` axis).
    pub profitable: Vec<usize>,
    pub dropping: bool,
    pub spai_nnz_cap_ratio: f64,
    pub rtol: f64,
    pub max_iters: usize,
    /// Worker threads for the column builds; 0 picks the rayon default.
    pub threads: usize,
    /// Seed for synthetically generated inputs in tests.
    pub seed: u64,
    pub format: ReportFormat,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            matrices: Vec::new(),
            algorithms: vec![Algorithm::Rsai],
            eps: vec![0.3],
            dominant: vec![3],
            max_loops: Vec::new(),
            profitable: vec![3],
            dropping: true,
            spai_nnz_cap_ratio: 10.0,
            rtol: 1e-8,
            max_iters: 1000,
            threads: 0,
            seed: 0,
            format: ReportFormat::Table,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.matrices.is_empty() {
            return Err(Error::InvalidParameter("no matrices given".into()));
        }
        if self.algorithms.is_empty() || self.eps.is_empty() || self.dominant.is_empty()
            || self.profitable.is_empty()
        {
            return Err(Error::InvalidParameter("parameter grid is empty".into()));
        }
        if self.rtol.is_nan() || self.rtol <= 0.0 {
            return Err(Error::InvalidParameter("rtol must be > 0".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        for point in self.grid_points(1) {
            point.validate()?;
        }
        Ok(())
    }

    /// All SaiConfig points of the grid, with `lmax_default` filling an
    /// empty loop-cap axis.
    fn grid_points(&self, lmax_default: usize) -> Vec<SaiConfig> {
        let lmax_axis: Vec<usize> = if self.max_loops.is_empty() {
            vec![lmax_default]
        } else {
            self.max_loops.clone()
        };
        let mut points = Vec::new();
        for &epsilon in &self.eps {
            for &c in &self.dominant {
                for &lmax in &lmax_axis {
                    for &la in &self.profitable {
                        points.push(SaiConfig {
                            epsilon,
                            dominant_per_loop: c,
                            max_loops: lmax,
                            dropping: self.dropping,
                            profitable_per_loop: la,
                            spai_nnz_cap_ratio: self.spai_nnz_cap_ratio,
                        });
                    }
                }
            }
        }
        points
    }
}

fn matrix_label(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Loads, permutes, builds and solves every grid point. Per-row failures
/// are recorded in the report; only an invalid spec is an error.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunReport>> {
    spec.validate()?;
    let pool = thread_pool(spec.threads)?;
    pool.install(|| run_sweep(spec))
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// [`build_preconditioner`] on a dedicated pool of `threads` workers
/// (0 = all cores).
pub fn build_with_threads(
    a: &SparseMatrix,
    cfg: &SaiConfig,
    algorithm: Algorithm,
    threads: usize,
) -> Result<crate::rsai::Preconditioner> {
    let pool = thread_pool(threads)?;
    pool.install(|| build_preconditioner(a, cfg, algorithm))
}

fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    for path in &spec.matrices {
        let label = matrix_label(path);
        let prepared = load_matrix_market(path).and_then(|a| {
            let (_, pa) = ensure_nonzero_diagonal(&a)?;
            Ok(pa)
        });
        let a = match prepared {
            Ok(a) => a,
            Err(e) => {
                // one failed row per would-be grid point keeps row counts stable
                for &algorithm in &spec.algorithms {
                    for cfg in spec.grid_points(1) {
                        reports.push(RunReport::failed(
                            label.clone(),
                            algorithm,
                            cfg,
                            e.to_string(),
                        ));
                    }
                }
                continue;
            }
        };
        for &algorithm in &spec.algorithms {
            let lmax_default = match algorithm {
                Algorithm::Rsai => 10,
                Algorithm::Spai => SaiConfig {
                    profitable_per_loop: spec.profitable[0],
                    spai_nnz_cap_ratio: spec.spai_nnz_cap_ratio,
                    ..SaiConfig::default()
                }
                .spai_loop_cap(&a),
            };
            for cfg in spec.grid_points(lmax_default) {
                reports.push(run_point(&label, &a, algorithm, cfg, spec));
            }
        }
    }
    Ok(reports)
}

/// One grid point: build the preconditioner, synthesize `b` from the
/// all-ones solution, and solve.
fn run_point(
    label: &str,
    a: &SparseMatrix,
    algorithm: Algorithm,
    cfg: SaiConfig,
    spec: &ExperimentSpec,
) -> RunReport {
    let build_start = Instant::now();
    let prec = match build_preconditioner(a, &cfg, algorithm) {
        Ok(p) => p,
        Err(e) => return RunReport::failed(label.to_string(), algorithm, cfg, e.to_string()),
    };
    let ptime = build_start.elapsed().as_secs_f64();

    let ones = vec![1.0; a.n_cols()];
    let b = match a.matvec(&ones) {
        Ok(b) => b,
        Err(e) => return RunReport::failed(label.to_string(), algorithm, cfg, e.to_string()),
    };
    let solve_start = Instant::now();
    let outcome = match bicgstab(a, Some(&prec.matrix), &b, spec.rtol, spec.max_iters) {
        Ok(o) => o,
        Err(e) => return RunReport::failed(label.to_string(), algorithm, cfg, e.to_string()),
    };
    let stime = solve_start.elapsed().as_secs_f64();

    let iterations = match outcome.status {
        SolveStatus::Converged => IterationCell::Count(outcome.iterations.ceil() as u64),
        SolveStatus::MaxIters => IterationCell::NotConverged,
        SolveStatus::Stagnated => IterationCell::Stagnated,
        SolveStatus::Breakdown => IterationCell::Breakdown,
    };
    RunReport {
        matrix: label.to_string(),
        algorithm,
        config: cfg,
        spar: prec.matrix.nnz() as f64 / a.nnz() as f64,
        ptime,
        n_unconverged: prec.n_unconverged,
        iterations,
        stime,
        final_relative_residual: outcome.final_relative_residual,
        error: None,
    }
}

/// Renders the sweep in the requested format. Column order is fixed:
/// matrix, algorithm, spar, ptime, n_c, iter, stime, then the residual,
/// the parameter echo, and any row error.
pub fn emit_report(reports: &[RunReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => emit_table(reports),
        ReportFormat::Csv => emit_csv(reports),
        ReportFormat::Json => {
            serde_json::to_string_pretty(reports).expect("reports serialize cleanly")
        }
    }
}

const HEADER: [&str; 14] = [
    "matrix", "algorithm", "spar", "ptime", "n_c", "iter", "stime", "relres", "eps", "c", "lmax",
    "la", "drop", "error",
];

fn report_cells(r: &RunReport) -> [String; 14] {
    if r.error.is_some() {
        return [
            r.matrix.clone(),
            r.algorithm.to_string(),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            format!("{}", r.config.epsilon),
            r.config.dominant_per_loop.to_string(),
            r.config.max_loops.to_string(),
            r.config.profitable_per_loop.to_string(),
            if r.config.dropping { "on" } else { "off" }.into(),
            r.error.clone().unwrap_or_default(),
        ];
    }
    [
        r.matrix.clone(),
        r.algorithm.to_string(),
        format!("{:.2}", r.spar),
        format!("{:.2}", r.ptime),
        r.n_unconverged.to_string(),
        r.iterations.to_string(),
        format!("{:.2}", r.stime),
        format!("{:.2e}", r.final_relative_residual),
        format!("{}", r.config.epsilon),
        r.config.dominant_per_loop.to_string(),
        r.config.max_loops.to_string(),
        r.config.profitable_per_loop.to_string(),
        if r.config.dropping { "on" } else { "off" }.into(),
        String::new(),
    ]
}

fn emit_table(reports: &[RunReport]) -> String {
    let rows: Vec<[String; 14]> = reports.iter().map(report_cells).collect();
    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut write_row = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{:<width$}", c, width = w))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    };
    write_row(&HEADER.map(String::from));
    for row in &rows {
        write_row(row);
    }
    out
}

fn emit_csv(reports: &[RunReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", HEADER.join(","));
    for r in reports {
        let cells = report_cells(r).map(|c| {
            if c.contains(',') || c.contains('"') {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c
            }
        });
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Writes the stored positions of `M` as a Matrix Market pattern file,
/// column-major, for external plotting.
pub fn pattern_dump(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::Io { path: path.to_path_buf(), source: e };
    writeln!(w, "%%MatrixMarket matrix coordinate pattern general").map_err(io_err)?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz()).map_err(io_err)?;
    for (i, j, _) in m.iter() {
        writeln!(w, "{} {}", i + 1, j + 1).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
