//! `sts`: build sparse trees, verify their block decomposition and scan the
//! Jacobi blocks. Every command writes CSV or JSON; nothing is plotted.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use sts_core::config::parse_spec_file;
use sts_core::decomp::{plan, verify_equivalence};
use sts_core::model::{is_normal_prefix, vertex_count, TreeSpec};
use sts_core::operators::{
    jacobi_block, jacobi_level, jacobi_source, JacobiMatrix, JacobiSource, LaplacianKind,
};
use sts_core::spectral::{
    default_ladder, dimension_csv, eig_tridiag, energy_grid, local_dimension, m_function,
    m_function_adaptive, simon_stolz_csv, simon_stolz_sum, spectrum_coverage, Complex64,
};
use sts_core::Error;

/// Continued fractions and scans never go deeper than this.
const MAX_DEPTH: usize = 10_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "sts",
    version,
    about = "Spectral analysis of sparse spherically homogeneous trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the decomposition plan (n, R_n, M_n, len).
    Info(Common),
    /// Check the block decomposition and write a JSON report.
    Verify(Common),
    /// Write the spectral measure of one Jacobi block (spectrum.csv).
    Spectrum(Common),
    /// Write Simon–Stolz partial sums for one energy (ssum.csv).
    Ssum(Common),
    /// Evaluate the m-function at E + i·delta.
    Mfun(Common),
    /// Estimate local dimension proxies (dim.csv).
    Dim(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Spec file; `none` for no spec.
    #[arg(long, value_name = "PATH")]
    spec: Option<String>,
    /// Truncation depth of the tree (overrides the spec file).
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value = "adjacency", value_parser = parse_kind)]
    kind: LaplacianKind,
    /// Block level n.
    #[arg(long, default_value_t = 0)]
    level: usize,
    /// Number of rows / transfer steps / continued-fraction depth.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    emax: Option<f64>,
    /// Number of grid energies.
    #[arg(long)]
    grid: Option<usize>,
    /// Coverage radius for `spectrum`, Im z for `mfun`.
    #[arg(long)]
    delta: Option<f64>,
    /// Energy (repeatable).
    #[arg(long = "energy", allow_hyphen_values = true)]
    energies: Vec<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Use the free Jacobi matrix (a ≡ 1, b ≡ 0) instead of a spec.
    #[arg(long)]
    free: bool,
}

fn parse_kind(s: &str) -> Result<LaplacianKind, String> {
    s.parse()
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Module(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Module(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Module(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Module(e) => write!(f, "{e}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Applies `STS_THREADS` (0 or unset = rayon default) to the global pool.
pub fn configure_threads() {
    let threads = std::env::var("STS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

/// Runs one command. Exit codes: 0 success, 1 invalid input, 2 numerical
/// failure.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        dispatch(cli.command, stdout, stderr)
    }));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(failure)) => {
            let _ = writeln!(stderr, "error: {failure}");
            failure.exit_code()
        }
        Err(_) => {
            let _ = writeln!(stderr, "error: internal numerical failure");
            2
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Info(c) => info(&c, stdout, stderr),
        Command::Verify(c) => verify(&c, stdout, stderr),
        Command::Spectrum(c) => spectrum(&c, stdout, stderr),
        Command::Ssum(c) => ssum(&c, stdout),
        Command::Mfun(c) => mfun(&c, stdout),
        Command::Dim(c) => dim(&c, stdout),
    }
}

/// The spec named by `--spec` and its depth (flag wins over file).
fn load_spec(c: &Common) -> CliResult<Option<(TreeSpec, Option<usize>)>> {
    match c.spec.as_deref() {
        None | Some("none") => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {path}: {e}")))?;
            let file = parse_spec_file(&text)?;
            Ok(Some((file.spec, c.depth.or(file.depth))))
        }
    }
}

fn require_spec(c: &Common) -> CliResult<(TreeSpec, usize)> {
    if c.free {
        return Err(Failure::Usage("--free has no tree; pass --spec".into()));
    }
    let (spec, depth) =
        load_spec(c)?.ok_or_else(|| Failure::Usage("this command needs --spec".into()))?;
    let depth = depth.ok_or_else(|| Failure::Usage("no depth: pass --depth".into()))?;
    Ok((spec, depth))
}

fn warn_normality(spec: &TreeSpec, stderr: &mut dyn Write) {
    let verdict = is_normal_prefix(spec);
    if let Some(w) = verdict.witness.filter(|_| !verdict.is_normal_prefix) {
        let _ = writeln!(stderr, "warning: prefix does not look normal: {w}");
    }
}

/// Writes to `--out` via a temporary file and rename, or to stdout.
fn emit(c: &Common, body: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match &c.out {
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
        Some(path) => write_atomic(path, body),
    }
}

fn write_atomic(path: &Path, body: &str) -> CliResult<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Failure::Usage(format!("invalid output path {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    std::fs::write(&tmp, body).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

fn info(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let (spec, depth) = require_spec(c)?;
    warn_normality(&spec, stderr);
    let layout = plan(&spec, depth as u64)?;
    let mut out = String::new();
    let _ = writeln!(out, "# {spec}, depth {depth}");
    let _ = writeln!(out, "{:>4} {:>12} {:>12} {:>12}", "n", "R_n", "M_n", "len");
    for l in &layout.levels {
        let _ = writeln!(
            out,
            "{:>4} {:>12} {:>12} {:>12}",
            l.n, l.radius, l.multiplicity, l.block_length
        );
    }
    let total = layout.total_dimension()?;
    let count = vertex_count(&spec, depth as u64)?;
    let _ = writeln!(
        out,
        "total {total} = sum M_n * len; vertex_count {count}; identity {}",
        if total == count { "holds" } else { "FAILS" }
    );
    emit(c, &out, stdout)
}

fn verify(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let (spec, depth) = require_spec(c)?;
    warn_normality(&spec, stderr);
    let report = verify_equivalence(&spec, depth, c.kind)?;
    let _ = writeln!(
        stderr,
        "eig_multiset_distance {:e}, offblock {:?}",
        report.eigenvalue_multiset_distance, report.max_offblock_residual
    );
    let mut json = report.to_json();
    json.push('\n');
    emit(c, &json, stdout)
}

/// The block selected by `--free`/`--spec`, `--level`, `--n`/`--depth`.
fn finite_block(c: &Common) -> CliResult<JacobiMatrix> {
    if c.free {
        let n =
            c.n.ok_or_else(|| Failure::Usage("--free needs --n".into()))?;
        if n == 0 {
            return Err(Failure::Usage("--n must be at least 1".into()));
        }
        return Ok(JacobiMatrix::free(n));
    }
    let (spec, depth) =
        load_spec(c)?.ok_or_else(|| Failure::Usage("pass --spec or --free".into()))?;
    match (c.n, depth) {
        (Some(n), _) => Ok(jacobi_level(&spec, c.level, n, c.kind)?),
        (None, Some(d)) => Ok(jacobi_block(&spec, c.level, d, c.kind)?),
        (None, None) => Err(Failure::Usage("pass --n or --depth".into())),
    }
}

/// A coefficient source for scans: the lazy level generator unless `--depth`
/// is given on the command line (a depth in the spec file is ignored here).
fn scan_source(c: &Common) -> CliResult<Box<dyn JacobiSource>> {
    if c.free {
        let path = jacobi_source(&TreeSpec::path(), 0, LaplacianKind::Adjacency)?;
        return Ok(Box::new(path));
    }
    let (spec, _) = load_spec(c)?.ok_or_else(|| Failure::Usage("pass --spec or --free".into()))?;
    match c.depth {
        Some(d) => Ok(Box::new(jacobi_block(&spec, c.level, d, c.kind)?)),
        None => Ok(Box::new(jacobi_source(&spec, c.level, c.kind)?)),
    }
}

fn energies(c: &Common, default: (f64, f64, usize)) -> Vec<f64> {
    if !c.energies.is_empty() {
        return c.energies.clone();
    }
    let (lo, hi, points) = default;
    energy_grid(
        c.emin.unwrap_or(lo),
        c.emax.unwrap_or(hi),
        c.grid.unwrap_or(points),
    )
}

fn spectrum(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let block = finite_block(c)?;
    let measure = eig_tridiag(&block);
    if let Some(delta) = c.delta {
        let grid = energies(c, (-1.95, 1.95, 401));
        let coverage = spectrum_coverage(&block, &grid, delta)?;
        let _ = writeln!(
            stderr,
            "coverage {coverage} ({} energies, delta {delta})",
            grid.len()
        );
    }
    emit(c, &measure.to_csv(), stdout)
}

fn ssum(c: &Common, stdout: &mut dyn Write) -> CliResult<()> {
    let [energy] = c.energies[..] else {
        return Err(Failure::Usage("ssum takes exactly one --energy".into()));
    };
    let steps = c.n.ok_or_else(|| Failure::Usage("ssum needs --n".into()))?;
    if steps > MAX_DEPTH {
        return Err(Failure::Usage(format!("--n is capped at {MAX_DEPTH}")));
    }
    let source = scan_source(c)?;
    let points = simon_stolz_sum(source.as_ref(), energy, steps);
    emit(c, &simon_stolz_csv(&points), stdout)
}

fn mfun(c: &Common, stdout: &mut dyn Write) -> CliResult<()> {
    let eps = c.delta.unwrap_or(1e-3);
    let source = scan_source(c)?;
    let grid = energies(c, (-1.95, 1.95, 401));
    let rows: Vec<CliResult<String>> = grid
        .par_iter()
        .map(|&e| {
            let z = num_complex_z(e, eps);
            let (m, depth) = match c.n {
                Some(d) => (m_function(source.as_ref(), z, d)?, d),
                None => {
                    let r = m_function_adaptive(source.as_ref(), z, 64, 1e-3, MAX_DEPTH)?;
                    (r.value, r.depth)
                }
            };
            Ok(format!("{e},{eps},{},{},{depth}\n", m.re, m.im))
        })
        .collect();
    let mut out = String::from("E,eps,re_m,im_m,depth\n");
    for row in rows {
        out.push_str(&row?);
    }
    emit(c, &out, stdout)
}

fn num_complex_z(e: f64, eps: f64) -> Complex64 {
    Complex64::new(e, eps)
}

fn dim(c: &Common, stdout: &mut dyn Write) -> CliResult<()> {
    let source = scan_source(c)?;
    let ladder = default_ladder();
    let start = c.n.unwrap_or(64);
    let grid = energies(c, (-1.95, 1.95, 401));
    let estimates: Vec<_> = grid
        .par_iter()
        .map(|&e| local_dimension(source.as_ref(), e, &ladder, start))
        .collect::<Result<_, _>>()?;
    emit(c, &dimension_csv(&estimates), stdout)
}
