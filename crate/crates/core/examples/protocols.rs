//! Physical expansions of the distributed CNOT protocols.

use dqc_compiler::cli::format_instruction;
use dqc_compiler::decomposer::{
    build_ghz, decompose_naive_cnot, decompose_shared_control, decompose_shared_target, BitAllocator,
    PhysInstr,
};
use dqc_compiler::ir::{depth_layers, QubitRef};

fn show(title: &str, instrs: &[PhysInstr]) {
    let epr = instrs.iter().filter(|i| i.kind.mnemonic() == "epr").count();
    println!("{title}: {} instructions, {epr} EPR pairs, depth {}", instrs.len(), depth_layers(instrs));
    for i in instrs {
        println!("    {}", format_instruction(i));
    }
}

fn main() {
    let m = |node| QubitRef::memory(node, 0);
    let buffer = Some(QubitRef::memory(0, 1));

    let mut bits = BitAllocator::starting_at(0);
    show("naive cnot", &decompose_naive_cnot(m(0), m(1), &mut bits).unwrap());

    let mut bits = BitAllocator::starting_at(0);
    show("ghz over 4 nodes", &build_ghz(&[0, 1, 2, 3], buffer, &mut bits).unwrap());

    let mut bits = BitAllocator::starting_at(0);
    show(
        "shared control, 3 targets",
        &decompose_shared_control(m(0), &[m(1), m(2), m(3)], buffer, &mut bits).unwrap(),
    );

    let mut bits = BitAllocator::starting_at(0);
    show(
        "shared target, 2 controls",
        &decompose_shared_target(m(0), &[m(1), m(2)], buffer, &mut bits).unwrap(),
    );
}
