//! ASAP bucketization followed by the forward and backward sweeps.

use dqc_compiler::frontend::parse_qasm;
use dqc_compiler::ir::BucketedCircuit;
use dqc_compiler::parallelizer::{backward_sweep, forward_sweep, Mode};
use dqc_compiler::scheduler::bucketize;

const SOURCE: &str = "OPENQASM 2.0;
qreg q[4];
cx q[0],q[1];
h q[2];
cx q[2],q[3];
cx q[0],q[2];
cx q[0],q[3];
";

fn show(label: &str, b: &BucketedCircuit) {
    println!("{label}: {} buckets", b.bucket_count());
    for i in 0..b.bucket_count() {
        let line: Vec<String> = b
            .bucket_instrs(i)
            .map(|g| format!("{}{:?}", g.kind.mnemonic(), g.operands))
            .collect();
        println!("  [{i}] {}", line.join("  "));
    }
}

fn main() {
    let circuit = parse_qasm(SOURCE).unwrap();
    let bucketed = bucketize(&circuit);
    show("asap", &bucketed);
    let forward = forward_sweep(&bucketed, Mode::Relaxed).unwrap();
    show("forward", &forward);
    let backward = backward_sweep(&forward, Mode::Relaxed).unwrap();
    show("backward", &backward);
    for g in backward.groups().filter(|g| g.len() >= 2) {
        println!("group {:?} of {}", g.kind, g.len());
    }
}
