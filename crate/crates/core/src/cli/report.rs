//! End-to-end pipeline runs and the benchmark report rows they produce.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, Settings};
use crate::decomposer::{compile, CompileError, PhysicalCircuit};
use crate::frontend::{gen_bv, gen_dj, gen_random, DjOracle, GenError, LogicalCircuit, Pattern};
use crate::ir::{weighted_depth_placed, BucketedCircuit, DepthError, Violation};
use crate::parallelizer::{naive_plan, optimize, Mode, OptimizeError};
use crate::scheduler::{bucketize, ScheduleError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid logical circuit: {0:?}")]
    InvalidCircuit(Vec<Violation>),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Depth(#[from] DepthError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl PipelineError {
    /// Process exit code: 1 for bad input, 2 for internal invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::InvalidCircuit(_) | PipelineError::Config(_) | PipelineError::Generator(_) => 1,
            _ => 2,
        }
    }
}

/// One (circuit, mode) line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub qubits: usize,
    pub cnot_count: usize,
    pub depth_naive: usize,
    pub depth_opt: usize,
    pub weighted_naive: u64,
    pub weighted_opt: u64,
    pub relative_improvement: f64,
    pub seed: u64,
    pub mode: Mode,
}

pub fn relative_improvement(naive: usize, opt: usize) -> f64 {
    if naive == 0 {
        0.0
    } else {
        (naive as f64 - opt as f64) / naive as f64
    }
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub naive_plan: BucketedCircuit,
    pub plan: BucketedCircuit,
    pub naive: PhysicalCircuit,
    pub optimized: PhysicalCircuit,
    /// Conservative mode kept the naive plan because the optimized one was deeper.
    pub fell_back: bool,
    pub row: ReportRow,
}

/// Bucketize, optimize in `mode`, compile, and compare against the naive
/// compile of the same circuit.
pub fn run_pipeline(
    circuit: &LogicalCircuit,
    mode: Mode,
    settings: &Settings,
    seed: u64,
) -> Result<PipelineResult, PipelineError> {
    circuit.validate().map_err(PipelineError::InvalidCircuit)?;
    let hw = settings.hardware(circuit.qubit_count)?;
    let cost = &settings.cost;
    let bucketed = bucketize(circuit);
    let naive_plan = naive_plan(&bucketed)?;
    let naive = compile(&naive_plan, &hw, Mode::Naive, cost)?;
    let opt = optimize(&bucketed, mode, cost, &hw)?;
    let optimized = compile(&opt.plan, &hw, mode, cost)?;

    let depth_naive = naive.depth();
    let depth_opt = optimized.depth();
    if mode == Mode::Conservative && depth_opt > depth_naive {
        return Err(PipelineError::Invariant(format!(
            "conservative depth {depth_opt} exceeds naive depth {depth_naive}"
        )));
    }
    let row = ReportRow {
        name: circuit.name.clone(),
        qubits: circuit.qubit_count,
        cnot_count: circuit.cnot_count(),
        depth_naive,
        depth_opt,
        weighted_naive: weighted_depth_placed(&naive_plan, cost, Some(&hw.placement))?,
        weighted_opt: weighted_depth_placed(&opt.plan, cost, Some(&hw.placement))?,
        relative_improvement: relative_improvement(depth_naive, depth_opt),
        seed,
        mode,
    };
    Ok(PipelineResult {
        naive_plan,
        plan: opt.plan,
        naive,
        optimized,
        fell_back: opt.fell_back,
        row,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Bv,
    Dj,
    Random,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchSpec {
    pub suite: Suite,
    pub qubits: RangeInclusive<usize>,
    pub count: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub max_gates: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            qubits: 4..=12,
            count: 100,
            seed: 0,
            modes: Mode::ALL.to_vec(),
            max_gates: 200,
        }
    }
}

/// Circuits of a suite with the seed each was generated from, in report order.
pub fn bench_circuits(spec: &BenchSpec) -> Result<Vec<(LogicalCircuit, u64)>, GenError> {
    let mut out = Vec::new();
    let structured = |n: usize| "1".repeat(n);
    if matches!(spec.suite, Suite::Bv | Suite::All) {
        for n in spec.qubits.clone().filter(|n| *n >= 1) {
            out.push((gen_bv(n, &structured(n))?, spec.seed));
        }
    }
    if matches!(spec.suite, Suite::Dj | Suite::All) {
        for n in spec.qubits.clone().filter(|n| *n >= 1) {
            out.push((gen_dj(n, &DjOracle::Balanced(structured(n)))?, spec.seed));
        }
    }
    if matches!(spec.suite, Suite::Random | Suite::All) {
        let lo = (*spec.qubits.start()).max(2);
        let hi = (*spec.qubits.end()).max(lo);
        for i in 0..spec.count {
            let seed = spec.seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(lo..=hi);
            let gates = rng.random_range(1..=spec.max_gates.max(1));
            let pattern = Pattern::ALL[i % Pattern::ALL.len()];
            out.push((gen_random(n, gates, seed, pattern)?, seed));
        }
    }
    Ok(out)
}

/// Every circuit of the suite under every requested mode. Rows keep suite
/// order regardless of how the parallel runs finish.
pub fn run_bench(spec: &BenchSpec, settings: &Settings) -> Result<Vec<ReportRow>, PipelineError> {
    let circuits = bench_circuits(spec)?;
    let rows: Vec<Vec<ReportRow>> = circuits
        .par_iter()
        .map(|(c, seed)| {
            spec.modes
                .iter()
                .map(|m| run_pipeline(c, *m, settings, *seed).map(|r| r.row))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn rows_to_json(rows: &[ReportRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
