//! Physical instruction sequences for distributed two-qubit gates.
//!
//! Every protocol leaves its communication qubits and the fusion buffer in
//! `|0⟩` and touches memory qubits only through local gates and Pauli
//! corrections.

use super::CompileError;
use crate::ir::{Bit, Condition, GateKind, Instruction, QubitRef};

pub type PhysInstr = Instruction<QubitRef>;

/// Hands out fresh classical bits for protocol measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitAllocator {
    next: Bit,
}

impl BitAllocator {
    pub fn starting_at(first: Bit) -> Self {
        Self { next: first }
    }

    pub fn fresh(&mut self) -> Bit {
        let b = self.next;
        self.next += 1;
        b
    }

    /// One past the last bit handed out.
    pub fn end(&self) -> Bit {
        self.next
    }
}

fn conditioned(kind: GateKind, q: QubitRef, condition: Condition) -> PhysInstr {
    Instruction::single(kind, q).with_condition(condition)
}

fn distinct_remote(hub: QubitRef, others: &[QubitRef]) -> Result<(), CompileError> {
    for (i, q) in others.iter().enumerate() {
        if q.node == hub.node {
            return Err(CompileError::LocalGate(hub, *q));
        }
        if others[..i].iter().any(|p| p.node == q.node) {
            return Err(CompileError::NodeCollision(q.node));
        }
    }
    Ok(())
}

/// Teleportation-based CNOT between memory qubits on two nodes.
pub fn decompose_naive_cnot(
    control: QubitRef,
    target: QubitRef,
    bits: &mut BitAllocator,
) -> Result<Vec<PhysInstr>, CompileError> {
    fan_out(control, &[target], GateKind::Cnot, None, bits)
}

/// Same protocol as [`decompose_naive_cnot`] with a local CZ at the far end.
pub fn decompose_naive_cz(
    a: QubitRef,
    b: QubitRef,
    bits: &mut BitAllocator,
) -> Result<Vec<PhysInstr>, CompileError> {
    fan_out(a, &[b], GateKind::Cz, None, bits)
}

/// GHZ state over the communication qubits of `nodes` by star fusion at
/// `nodes[0]`. `buffer` must be a free memory qubit on the root; it is only
/// used for three or more nodes and ends in `|0⟩`.
pub fn build_ghz(
    nodes: &[usize],
    buffer: Option<QubitRef>,
    bits: &mut BitAllocator,
) -> Result<Vec<PhysInstr>, CompileError> {
    let k = nodes.len();
    if k < 2 {
        return Err(CompileError::TooFewNodes(k));
    }
    for (i, n) in nodes.iter().enumerate() {
        if nodes[..i].contains(n) {
            return Err(CompileError::NodeCollision(*n));
        }
    }
    let e0 = QubitRef::comm(nodes[0]);
    let epr = |n: usize| Instruction::new(GateKind::Epr, vec![e0, QubitRef::comm(n)]);
    let mut out = vec![epr(nodes[1])];
    if k == 2 {
        return Ok(out);
    }
    let buf = match buffer {
        Some(b) if b.node == nodes[0] && !b.is_comm() => b,
        _ => return Err(CompileError::NoBuffer(nodes[0])),
    };
    out.push(Instruction::new(GateKind::Swap, vec![e0, buf]));
    out.push(Instruction::single(GateKind::Reset, e0));
    for &n in &nodes[2..] {
        let m = bits.fresh();
        out.push(epr(n));
        out.push(Instruction::cnot(buf, e0));
        out.push(Instruction::measure_z(e0, m));
        out.push(conditioned(GateKind::X, QubitRef::comm(n), Condition::on(m)));
        out.push(Instruction::single(GateKind::Reset, e0));
    }
    out.push(Instruction::new(GateKind::Swap, vec![buf, e0]));
    Ok(out)
}

/// Cat-entangle `hub` into one communication qubit per remote node, apply
/// `local` (CNOT or CZ) from each communication qubit onto its partner,
/// then disentangle with a parity-conditioned Z on `hub`.
fn fan_out(
    hub: QubitRef,
    partners: &[QubitRef],
    local: GateKind,
    buffer: Option<QubitRef>,
    bits: &mut BitAllocator,
) -> Result<Vec<PhysInstr>, CompileError> {
    distinct_remote(hub, partners)?;
    let root = QubitRef::comm(hub.node);
    let mut nodes = vec![hub.node];
    nodes.extend(partners.iter().map(|p| p.node));
    let mut out = build_ghz(&nodes, buffer, bits)?;

    let m = bits.fresh();
    out.push(Instruction::cnot(hub, root));
    out.push(Instruction::measure_z(root, m));
    for p in partners {
        out.push(conditioned(GateKind::X, QubitRef::comm(p.node), Condition::on(m)));
    }
    for p in partners {
        out.push(Instruction::new(local, vec![QubitRef::comm(p.node), *p]));
    }
    let mut parity = Vec::with_capacity(partners.len());
    for p in partners {
        let mi = bits.fresh();
        parity.push(mi);
        out.push(Instruction::measure_x(QubitRef::comm(p.node), mi));
    }
    out.push(conditioned(GateKind::Z, hub, Condition::parity_of(parity)));
    out.push(Instruction::single(GateKind::Reset, root));
    for p in partners {
        out.push(Instruction::single(GateKind::Reset, QubitRef::comm(p.node)));
    }
    Ok(out)
}

/// `n ≥ 2` CNOTs from `control` onto targets on distinct remote nodes,
/// sharing one GHZ state.
pub fn decompose_shared_control(
    control: QubitRef,
    targets: &[QubitRef],
    buffer: Option<QubitRef>,
    bits: &mut BitAllocator,
) -> Result<Vec<PhysInstr>, CompileError> {
    if targets.len() < 2 {
        return Err(CompileError::TooFewNodes(targets.len() + 1));
    }
    fan_out(control, targets, GateKind::Cnot, buffer, bits)
}

/// `n ≥ 2` CNOTs from controls on distinct remote nodes onto `target`:
/// a CZ fan-in conjugated by Hadamards on the target.
pub fn decompose_shared_target(
    target: QubitRef,
    controls: &[QubitRef],
    buffer: Option<QubitRef>,
    bits: &mut BitAllocator,
) -> Result<Vec<PhysInstr>, CompileError> {
    if controls.len() < 2 {
        return Err(CompileError::TooFewNodes(controls.len() + 1));
    }
    let mut out = vec![Instruction::single(GateKind::H, target)];
    out.extend(fan_out(target, controls, GateKind::Cz, buffer, bits)?);
    out.push(Instruction::single(GateKind::H, target));
    Ok(out)
}
