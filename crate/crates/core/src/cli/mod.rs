//! Command-line surface (`compile`, `verify`, `bench`, `gen`), plus the text
//! formats, configuration and reports it is built from.
//!
//! Exit codes: 0 success, 1 bad input or configuration, 2 internal invariant
//! violation, 3 compiled circuit not equivalent to its source.

mod config;
mod report;
mod text;

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{load_config, load_raw, ConfigError, PlacementStrategy, RawConfig, Settings};
pub use report::{
    bench_circuits, relative_improvement, rows_from_csv, rows_to_csv, rows_to_json, run_bench,
    run_pipeline, BenchSpec, PipelineError, PipelineResult, ReportRow, Suite,
};
pub use text::{emit_physical, format_instruction, read_physical, TextError};

use crate::decomposer::PhysicalCircuit;
use crate::frontend::{emit_qasm, gen_bv, gen_dj, gen_random, parse_qasm, DjOracle, LogicalCircuit, Pattern};
use crate::parallelizer::Mode;
use crate::simulator::{check_equivalence, EquivalenceOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_NOT_EQUIVALENT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dqcc", version, about = "Distributed CNOT circuit compiler")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a circuit and print its report row.
    Compile(CompileArgs),
    /// Compile a circuit and check it against the source by simulation.
    Verify(VerifyArgs),
    /// Compile a benchmark suite under several modes.
    Bench(BenchArgs),
    /// Write a generated circuit as OpenQASM.
    Gen(GenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Bv,
    Dj,
    Random,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// OpenQASM 2.0 input file.
    #[arg(conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub gen: Option<GenKind>,
    /// Data qubits for bv/dj, total qubits for random.
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Hidden string for bv; defaults to all ones.
    #[arg(long)]
    pub secret: Option<String>,
    /// `const0`, `const1` or a balanced mask for dj; defaults to an all-ones mask.
    #[arg(long)]
    pub oracle: Option<String>,
    #[arg(long, default_value = "uniform")]
    pub pattern: Pattern,
    /// Gate count for random circuits.
    #[arg(long, default_value_t = 50)]
    pub gates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long = "cost-model")]
    pub cost_model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Physical circuit output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Random input states on top of the basis states.
    #[arg(long, default_value_t = 20)]
    pub random_states: usize,
    /// Remove the k-th conditioned instruction before checking.
    #[arg(long, hide = true)]
    pub drop_correction: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Inclusive range `a..b` or a single count.
    #[arg(long, default_value = "4..12", value_parser = parse_range)]
    pub qubits: RangeInclusive<usize>,
    /// Number of random circuits.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long = "max-gates", default_value_t = 200)]
    pub max_gates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Modes to run; all three when omitted.
    #[arg(long)]
    pub mode: Vec<Mode>,
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long = "cost-model")]
    pub cost_model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad number `{x}`"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty range `{s}`"));
            }
            Ok(a..=b)
        }
        None => {
            let n = num(s)?;
            Ok(n..=n)
        }
    }
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: msg.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Self {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::input(e)
    }
}

/// Resolve the logical circuit named by the source flags.
pub fn load_source(src: &SourceArgs) -> Result<LogicalCircuit, Failure> {
    if let Some(path) = &src.input {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        let mut c = parse_qasm(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        if let Some(stem) = path.file_stem() {
            c.name = stem.to_string_lossy().into_owned();
        }
        return Ok(c);
    }
    let kind = src
        .gen
        .ok_or_else(|| Failure::input("give an input file or --gen"))?;
    let n = src
        .qubits
        .ok_or_else(|| Failure::input("--gen needs --qubits"))?;
    let c = match kind {
        GenKind::Bv => gen_bv(n, src.secret.as_deref().unwrap_or(&"1".repeat(n))),
        GenKind::Dj => {
            let oracle = match src.oracle.as_deref() {
                Some("const0") => DjOracle::Constant0,
                Some("const1") => DjOracle::Constant1,
                Some(mask) => DjOracle::Balanced(mask.to_string()),
                None => DjOracle::Balanced("1".repeat(n)),
            };
            gen_dj(n, &oracle)
        }
        GenKind::Random => gen_random(n, src.gates, src.seed, src.pattern),
    };
    c.map_err(Failure::input)
}

fn load_settings(topology: Option<&Path>, cost: Option<&Path>, mode: Option<Mode>) -> Result<Settings, Failure> {
    let mut raw = RawConfig::default();
    for p in [topology, cost].into_iter().flatten() {
        raw = raw.overlay(load_raw(p)?);
    }
    if mode.is_some() {
        raw.mode = mode;
    }
    Ok(raw.resolve()?)
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write output: {e}"))),
    }
}

fn format_rows(rows: &[ReportRow], format: Format) -> String {
    match format {
        Format::Json => rows_to_json(rows),
        Format::Csv => rows_to_csv(rows),
    }
}

/// Copy of `circuit` without its `k`-th conditioned instruction.
pub fn drop_conditioned(circuit: &PhysicalCircuit, k: usize) -> Option<PhysicalCircuit> {
    let idx = circuit
        .instructions
        .iter()
        .enumerate()
        .filter(|(_, i)| i.condition.is_some())
        .nth(k)?
        .0;
    let mut out = circuit.clone();
    out.instructions.remove(idx);
    Some(out)
}

fn cmd_compile(a: &CompileArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let circuit = load_source(&a.source)?;
    let settings = load_settings(a.config.topology.as_deref(), a.config.cost_model.as_deref(), a.config.mode)?;
    let r = run_pipeline(&circuit, settings.mode, &settings, a.source.seed)?;
    if let Some(p) = &a.out {
        write_out(Some(p), &emit_physical(&r.optimized), stdout)?;
    }
    write_out(None, &format_rows(&[r.row], a.format), stdout)
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let circuit = load_source(&a.source)?;
    let settings = load_settings(a.config.topology.as_deref(), a.config.cost_model.as_deref(), a.config.mode)?;
    let r = run_pipeline(&circuit, settings.mode, &settings, a.source.seed)?;
    let physical = match a.drop_correction {
        Some(k) => drop_conditioned(&r.optimized, k)
            .ok_or_else(|| Failure::input(format!("circuit has no conditioned instruction #{k}")))?,
        None => r.optimized,
    };
    let options = EquivalenceOptions {
        random_states: a.random_states,
        seed: a.source.seed,
    };
    let report = check_equivalence(&circuit, &physical, options).map_err(|e| Failure {
        code: EXIT_INVARIANT,
        message: e.to_string(),
    })?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_out(None, &json, stdout)?;
    if report.equivalent {
        Ok(())
    } else {
        let why = report
            .failing_input
            .map(|f| f.to_string())
            .unwrap_or_default();
        Err(Failure {
            code: EXIT_NOT_EQUIVALENT,
            message: format!("not equivalent: {why}"),
        })
    }
}

fn cmd_bench(a: &BenchArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let settings = load_settings(a.topology.as_deref(), a.cost_model.as_deref(), None)?;
    let spec = BenchSpec {
        suite: a.suite,
        qubits: a.qubits.clone(),
        count: a.count,
        seed: a.seed,
        modes: if a.mode.is_empty() { Mode::ALL.to_vec() } else { a.mode.clone() },
        max_gates: a.max_gates,
    };
    let rows = run_bench(&spec, &settings)?;
    write_out(a.out.as_deref(), &format_rows(&rows, a.format), stdout)
}

fn cmd_gen(a: &GenArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let circuit = load_source(&a.source)?;
    write_out(a.out.as_deref(), &emit_qasm(&circuit), stdout)
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Compile(a) => cmd_compile(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Gen(a) => cmd_gen(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("dqcc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("4..12"), Ok(4..=12));
        assert_eq!(parse_range("4..=6"), Ok(4..=6));
        assert_eq!(parse_range("5"), Ok(5..=5));
        assert!(parse_range("6..2").is_err());
    }

    #[test]
    fn compile_bv_reports_improvement() {
        let (code, out, _) = run_args(&["compile", "--gen", "bv", "--qubits", "8", "--secret", "11111111", "--mode", "conservative"]);
        assert_eq!(code, 0);
        let rows: Vec<ReportRow> = serde_json::from_str(&out).unwrap();
        assert!(rows[0].depth_opt < rows[0].depth_naive);
    }

    #[test]
    fn malformed_qasm_exits_one_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.qasm");
        std::fs::write(&p, "OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1];\n").unwrap();
        let (code, _, err) = run_args(&["compile", p.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_subcommand_is_input_error() {
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
    }
}
