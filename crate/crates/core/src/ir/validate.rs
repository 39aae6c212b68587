use std::collections::HashSet;
use std::fmt;

use super::{Bit, GateKind, Instruction, NodeTopology, QubitRef, Qubit};

/// One problem found by a validator, tagged with the instruction position.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    QubitOutOfRange { at: usize, qubit: String },
    AcausalCondition { at: usize, bit: Bit },
    Arity { at: usize, kind: GateKind, got: usize },
    RepeatedOperand { at: usize },
    MissingWrite { at: usize },
    BitOutOfRange { at: usize, bit: Bit },
    EprOperands { at: usize },
    NotLogical { at: usize, kind: GateKind },
    ConditionInLogical { at: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::QubitOutOfRange { at, qubit } => {
                write!(f, "#{at}: qubit out of range ({qubit})")
            }
            Violation::AcausalCondition { at, bit } => {
                write!(f, "#{at}: acausal condition on c{bit}")
            }
            Violation::Arity { at, kind, got } => write!(
                f,
                "#{at}: {} takes {} operands, got {got}",
                kind.mnemonic(),
                kind.arity().unwrap_or(0)
            ),
            Violation::RepeatedOperand { at } => write!(f, "#{at}: repeated operand"),
            Violation::MissingWrite { at } => write!(f, "#{at}: measurement writes no bit"),
            Violation::BitOutOfRange { at, bit } => write!(f, "#{at}: bit c{bit} out of range"),
            Violation::EprOperands { at } => write!(
                f,
                "#{at}: epr needs communication qubits on distinct nodes"
            ),
            Violation::NotLogical { at, kind } => {
                write!(f, "#{at}: {} is not a logical gate", kind.mnemonic())
            }
            Violation::ConditionInLogical { at } => {
                write!(f, "#{at}: logical circuits carry no conditions")
            }
        }
    }
}

fn check_common<Q: Qubit>(
    instrs: &[Instruction<Q>],
    bit_count: usize,
    in_range: impl Fn(&Q) -> bool,
    out: &mut Vec<Violation>,
) {
    let mut written: HashSet<Bit> = HashSet::new();
    for (at, instr) in instrs.iter().enumerate() {
        if let Some(n) = instr.kind.arity() {
            if instr.operands.len() != n {
                out.push(Violation::Arity {
                    at,
                    kind: instr.kind,
                    got: instr.operands.len(),
                });
            }
        }
        let mut seen = HashSet::new();
        if !instr.operands.iter().all(|q| seen.insert(*q)) {
            out.push(Violation::RepeatedOperand { at });
        }
        for q in &instr.operands {
            if !in_range(q) {
                out.push(Violation::QubitOutOfRange {
                    at,
                    qubit: format!("{q:?}"),
                });
            }
        }
        for &bit in instr.reads() {
            if !written.contains(&bit) {
                out.push(Violation::AcausalCondition { at, bit });
            }
        }
        if instr.kind.is_measurement() && instr.writes.is_none() {
            out.push(Violation::MissingWrite { at });
        }
        if let Some(b) = instr.writes {
            if b >= bit_count {
                out.push(Violation::BitOutOfRange { at, bit: b });
            }
            written.insert(b);
        }
    }
}

/// Check a logical circuit: gate subset, qubit bounds, arity, no conditions.
pub fn validate_logical(
    instrs: &[Instruction],
    qubit_count: usize,
    bit_count: usize,
) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_common(instrs, bit_count, |q| *q < qubit_count, &mut out);
    for (at, instr) in instrs.iter().enumerate() {
        if !instr.kind.is_logical() {
            out.push(Violation::NotLogical {
                at,
                kind: instr.kind,
            });
        }
        if instr.condition.is_some() {
            out.push(Violation::ConditionInLogical { at });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Check a physical circuit against a topology.
pub fn validate_physical(
    instrs: &[Instruction<QubitRef>],
    topology: &NodeTopology,
    bit_count: usize,
) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_common(instrs, bit_count, |q| topology.contains(*q), &mut out);
    for (at, instr) in instrs.iter().enumerate() {
        if instr.kind == GateKind::Epr {
            let ok = matches!(instr.operands.as_slice(),
                [a, b] if a.is_comm() && b.is_comm() && a.node != b.node);
            if !ok {
                out.push(Violation::EprOperands { at });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
