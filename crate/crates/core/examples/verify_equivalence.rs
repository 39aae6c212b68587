//! Compile a circuit and check it against its source by simulation, then
//! show that dropping one feed-forward correction is caught.

use dqc_compiler::cli::{run_pipeline, Settings};
use dqc_compiler::frontend::gen_random;
use dqc_compiler::frontend::Pattern;
use dqc_compiler::parallelizer::Mode;
use dqc_compiler::simulator::{check_equivalence, EquivalenceOptions};

fn main() {
    let circuit = gen_random(4, 20, 11, Pattern::FanoutHeavy).unwrap();
    let result = run_pipeline(&circuit, Mode::Relaxed, &Settings::default(), 11).unwrap();
    let options = EquivalenceOptions::default();
    let report = check_equivalence(&circuit, &result.optimized, options).unwrap();
    println!(
        "{}: equivalent={} worst fidelity={:.15} inputs={} branches={}",
        circuit.name, report.equivalent, report.worst_fidelity, report.inputs_checked, report.branch_count
    );

    let mut broken = result.optimized.clone();
    let k = broken
        .instructions
        .iter()
        .position(|i| i.condition.is_some())
        .expect("compiled circuit has a correction");
    broken.instructions.remove(k);
    let report = check_equivalence(&circuit, &broken, options).unwrap();
    println!("without instruction {k}: equivalent={}", report.equivalent);
    if let Some(f) = report.failing_input {
        println!("  {f}");
    }
}
