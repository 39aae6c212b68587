//! Protocol expansions checked against hand-derived input/output pairs and
//! against a deferred-measurement rewrite that uses no classical control.

use dqc_compiler::cli::{run_pipeline, Settings};
use dqc_compiler::decomposer::{
    decompose_naive_cnot, decompose_naive_cz, decompose_shared_control, decompose_shared_target,
    BitAllocator, PhysInstr,
};
use dqc_compiler::frontend::gen_bv;
use dqc_compiler::ir::{GateKind, Instruction, QubitRef};
use dqc_compiler::parallelizer::Mode;
use dqc_compiler::simulator::{simulate, state_fidelity, StateVector};
use num_complex::Complex64;

const TOL: f64 = 1e-12;

fn m(node: usize) -> QubitRef {
    QubitRef::memory(node, 0)
}

fn buffer() -> Option<QubitRef> {
    Some(QubitRef::memory(0, 1))
}

/// Basis index of `bits`, where character `i` is the value of `order[i]`.
fn ket(bits: &str) -> usize {
    bits.chars().enumerate().map(|(i, b)| usize::from(b == '1') << i).sum()
}

fn basis(order: &[QubitRef], bits: &str) -> StateVector<QubitRef> {
    StateVector::basis(order.to_vec(), ket(bits))
}

/// Every branch must leave exactly `order` live, in the state `expected`.
fn assert_every_branch(prog: &[PhysInstr], input: StateVector<QubitRef>, order: &[QubitRef], expected: &[Complex64]) {
    let branches = simulate(prog, &input).unwrap();
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    assert!((total - 1.0).abs() < TOL, "probabilities sum to {total}");
    for b in &branches {
        let got = b.state.reordered(order).expect("only data qubits stay live");
        let f = state_fidelity(&got, expected).unwrap();
        assert!(f > 1.0 - TOL, "branch {:?}: fidelity {f}", b.outcomes);
    }
}

fn basis_amps(dim: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); dim];
    v[index] = Complex64::new(1.0, 0.0);
    v
}

#[test]
fn naive_cnot_flips_target_when_control_set() {
    let order = [m(0), m(1)];
    let prog = decompose_naive_cnot(m(0), m(1), &mut BitAllocator::starting_at(0)).unwrap();
    for (input, output) in [("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")] {
        assert_every_branch(&prog, basis(&order, input), &order, &basis_amps(4, ket(output)));
    }
}

#[test]
fn naive_cnot_yields_four_equal_branches() {
    let order = [m(0), m(1)];
    let prog = decompose_naive_cnot(m(0), m(1), &mut BitAllocator::starting_at(0)).unwrap();
    let branches = simulate(&prog, &basis(&order, "10")).unwrap();
    let paths: usize = branches.iter().map(|b| b.paths).sum();
    assert_eq!(paths, 4);
}

#[test]
fn naive_cz_phases_only_the_11_component() {
    let order = [m(0), m(1)];
    let prog = decompose_naive_cz(m(0), m(1), &mut BitAllocator::starting_at(0)).unwrap();
    let input = StateVector::new(order.to_vec(), vec![Complex64::new(0.5, 0.0); 4]).unwrap();
    let expected: Vec<Complex64> = [0.5, 0.5, 0.5, -0.5].iter().map(|a| Complex64::new(*a, 0.0)).collect();
    assert_every_branch(&prog, input, &order, &expected);
}

/// The naive protocol with each classically controlled correction replaced
/// by the quantum-controlled gate it stands for.
fn deferred_naive_cnot(c: QubitRef, t: QubitRef) -> Vec<PhysInstr> {
    let (ea, eb) = (QubitRef::comm(c.node), QubitRef::comm(t.node));
    vec![
        Instruction::new(GateKind::Epr, vec![ea, eb]),
        Instruction::cnot(c, ea),
        Instruction::cnot(ea, eb),
        Instruction::cnot(eb, t),
        Instruction::single(GateKind::H, eb),
        Instruction::cz(eb, c),
        Instruction::measure_z(ea, 0),
        Instruction::measure_z(eb, 1),
        Instruction::single(GateKind::Reset, ea),
        Instruction::single(GateKind::Reset, eb),
    ]
}

#[test]
fn naive_cnot_agrees_with_its_deferred_measurement_form() {
    let order = [m(0), m(1)];
    let feed_forward = decompose_naive_cnot(m(0), m(1), &mut BitAllocator::starting_at(0)).unwrap();
    let deferred = deferred_naive_cnot(m(0), m(1));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let inputs = [
        basis_amps(4, 0),
        basis_amps(4, 1),
        basis_amps(4, 2),
        basis_amps(4, 3),
        vec![Complex64::new(s, 0.0), Complex64::default(), Complex64::default(), Complex64::new(0.0, s)],
        vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5), Complex64::new(-0.5, 0.0), Complex64::new(0.5, 0.0)],
    ];
    for amps in inputs {
        let input = StateVector::new(order.to_vec(), amps).unwrap();
        let reference = simulate(&deferred, &input).unwrap();
        let expected = reference[0].state.reordered(&order).unwrap();
        for b in &reference {
            let f = state_fidelity(&b.state.reordered(&order).unwrap(), &expected).unwrap();
            assert!(f > 1.0 - TOL, "deferred form is not a product state");
        }
        assert_every_branch(&feed_forward, input, &order, &expected);
    }
}

#[test]
fn shared_control_two_targets() {
    let order = [m(0), m(1), m(2), QubitRef::memory(0, 1)];
    let prog = decompose_shared_control(m(0), &[m(1), m(2)], buffer(), &mut BitAllocator::starting_at(0)).unwrap();
    assert_every_branch(&prog, basis(&order, "1000"), &order, &basis_amps(16, ket("1110")));
    assert_every_branch(&prog, basis(&order, "0100"), &order, &basis_amps(16, ket("0100")));
}

#[test]
fn shared_control_of_plus_makes_ghz() {
    let order = [m(0), m(1), m(2), m(3), QubitRef::memory(0, 1)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = vec![Complex64::default(); 32];
    plus[ket("00000")] = Complex64::new(s, 0.0);
    plus[ket("10000")] = Complex64::new(s, 0.0);
    let mut ghz = vec![Complex64::default(); 32];
    ghz[ket("00000")] = Complex64::new(s, 0.0);
    ghz[ket("11110")] = Complex64::new(s, 0.0);
    let prog =
        decompose_shared_control(m(0), &[m(1), m(2), m(3)], buffer(), &mut BitAllocator::starting_at(0)).unwrap();
    assert_every_branch(&prog, StateVector::new(order.to_vec(), plus).unwrap(), &order, &ghz);
}

#[test]
fn shared_target_adds_control_parity() {
    // order: c1, c2, t, buffer
    let order = [m(1), m(2), m(0), QubitRef::memory(0, 1)];
    let prog = decompose_shared_target(m(0), &[m(1), m(2)], buffer(), &mut BitAllocator::starting_at(0)).unwrap();
    for (input, output) in [("1100", "1100"), ("1000", "1010"), ("0110", "0100"), ("0000", "0000")] {
        assert_every_branch(&prog, basis(&order, input), &order, &basis_amps(16, ket(output)));
    }
}

#[test]
fn bernstein_vazirani_reads_its_secret() {
    let secret = "1011";
    let circuit = gen_bv(4, secret).unwrap();
    let expect: Vec<(usize, bool)> = secret.chars().enumerate().map(|(i, b)| (i, b == '1')).collect();

    let logical = simulate(&circuit.instructions, &StateVector::vacuum()).unwrap();
    for b in &logical {
        let mut read: Vec<(usize, bool)> = b.outcomes.iter().copied().filter(|(bit, _)| *bit < 4).collect();
        read.sort();
        assert_eq!(read, expect);
    }

    for mode in Mode::ALL {
        let r = run_pipeline(&circuit, mode, &Settings::default(), 0).unwrap();
        let branches = simulate(&r.optimized.instructions, &StateVector::vacuum()).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-9, "{mode:?}: total {total}");
        for b in &branches {
            let mut read: Vec<(usize, bool)> = b.outcomes.iter().copied().filter(|(bit, _)| *bit < 4).collect();
            read.sort();
            assert_eq!(read, expect, "{mode:?}");
        }
    }
}
