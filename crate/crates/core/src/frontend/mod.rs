//! Logical circuit import (OpenQASM 2.0 subset) and benchmark generators.

mod generators;
mod qasm;

use serde::{Deserialize, Serialize};

use crate::ir::{validate_logical, GateKind, Instruction, Violation};

pub use generators::{gen_bv, gen_dj, gen_random, DjOracle, GenError, Pattern};
pub use qasm::{emit_qasm, parse_qasm, QasmError};

/// A pre-decomposition circuit over logical qubit indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub name: String,
    pub qubit_count: usize,
    pub classical_bit_count: usize,
    pub instructions: Vec<Instruction>,
}

impl LogicalCircuit {
    /// Build a circuit, sizing the classical register from the highest bit written.
    pub fn new(name: impl Into<String>, qubit_count: usize, instructions: Vec<Instruction>) -> Self {
        let classical_bit_count = instructions
            .iter()
            .filter_map(|i| i.writes)
            .max()
            .map_or(0, |b| b + 1);
        Self {
            name: name.into(),
            qubit_count,
            classical_bit_count,
            instructions,
        }
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_logical(&self.instructions, self.qubit_count, self.classical_bit_count)
    }

    pub fn cnot_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_cnot()).count()
    }

    /// The unitary part: measurements and barriers removed.
    pub fn without_measurements(&self) -> Vec<Instruction> {
        self.instructions
            .iter()
            .filter(|i| !i.kind.is_measurement() && i.kind != GateKind::Barrier)
            .cloned()
            .collect()
    }
}
