//! Compiler from logical CNOT circuits to physical instruction streams for
//! multi-node processors that share entanglement over communication qubits.
//!
//! The pipeline is [`scheduler::bucketize`] → [`parallelizer::optimize`] →
//! [`decomposer::compile`], with [`simulator::check_equivalence`] as the
//! correctness oracle and [`cli`] providing text formats, configuration and
//! benchmark reports.

pub mod cli;
pub mod decomposer;
pub mod frontend;
pub mod ir;
pub mod parallelizer;
pub mod scheduler;
pub mod simulator;
