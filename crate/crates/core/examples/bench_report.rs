//! A small benchmark sweep rendered as CSV.

use dqc_compiler::cli::{rows_to_csv, run_bench, BenchSpec, Settings, Suite};
use dqc_compiler::parallelizer::Mode;

fn main() {
    let spec = BenchSpec {
        suite: Suite::All,
        qubits: 4..=8,
        count: 6,
        seed: 3,
        modes: vec![Mode::Naive, Mode::Conservative, Mode::Relaxed],
        max_gates: 60,
    };
    let rows = run_bench(&spec, &Settings::default()).unwrap();
    print!("{}", rows_to_csv(&rows));
}
