//! How the two optimizing modes treat a fan-out interrupted by a gate that
//! commutes with the shared control.

use dqc_compiler::cli::{run_pipeline, Settings};
use dqc_compiler::frontend::parse_qasm;
use dqc_compiler::parallelizer::Mode;

const SOURCE: &str = "OPENQASM 2.0;
qreg q[5];
cx q[0],q[1];
rz(0.3) q[0];
cx q[0],q[2];
t q[0];
cx q[0],q[3];
cx q[0],q[4];
";

fn main() {
    let circuit = parse_qasm(SOURCE).unwrap();
    for mode in Mode::ALL {
        let r = run_pipeline(&circuit, mode, &Settings::default(), 0).unwrap();
        let blocks: Vec<String> = r
            .optimized
            .blocks
            .iter()
            .map(|b| format!("{:?}x{}", b.kind, b.gates))
            .collect();
        println!(
            "{:<12} depth {:>3} (naive {:>3})  eprs {:>2}  {}",
            mode.name(),
            r.row.depth_opt,
            r.row.depth_naive,
            r.optimized.epr_count(),
            blocks.join(" ")
        );
    }
}
