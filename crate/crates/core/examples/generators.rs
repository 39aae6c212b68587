//! Benchmark circuit generators and their CNOT structure.

use dqc_compiler::frontend::{gen_bv, gen_dj, gen_random, DjOracle, Pattern};

fn main() {
    let bv = gen_bv(6, "101101").unwrap();
    let dj = gen_dj(5, &DjOracle::Balanced("11011".into())).unwrap();
    let constant = gen_dj(5, &DjOracle::Constant1).unwrap();
    for c in [&bv, &dj, &constant] {
        println!("{:<16} qubits={:<2} cnots={}", c.name, c.qubit_count, c.cnot_count());
    }
    for pattern in Pattern::ALL {
        let c = gen_random(6, 40, 7, pattern).unwrap();
        println!("{:<28} qubits={:<2} cnots={}", c.name, c.qubit_count, c.cnot_count());
    }
}
