//! Parse an OpenQASM 2.0 program, print its IR, and emit it back.

use dqc_compiler::frontend::{emit_qasm, parse_qasm};

const SOURCE: &str = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
cx q[0],q[2];
rz(pi/4) q[2];
barrier q;
measure q -> c;
"#;

fn main() {
    let circuit = parse_qasm(SOURCE).expect("valid program");
    println!("{} qubits, {} CNOTs", circuit.qubit_count, circuit.cnot_count());
    for (i, instr) in circuit.instructions.iter().enumerate() {
        println!("{i:>3}  {:<8} {:?}", instr.kind.mnemonic(), instr.operands);
    }
    print!("\n{}", emit_qasm(&circuit));

    match parse_qasm("OPENQASM 2.0;\nqreg q[2];\nccx q[0],q[1],q[2];\n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("\nrejected: {e}"),
    }
}
