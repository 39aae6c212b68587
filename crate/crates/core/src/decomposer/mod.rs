//! Expansion of an annotated bucket plan into a physical instruction stream.

mod protocols;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{
    depth_layers, validate_physical, Bit, Bucket, BucketedCircuit, CostModel, GateKind, InstrId,
    Instruction, IrError, LogicalQubit, NodeTopology, Placement, QubitRef, Violation,
};
use crate::parallelizer::{GroupKind, Hardware, MergeGroup, Mode};

pub use protocols::{
    build_ghz, decompose_naive_cnot, decompose_naive_cz, decompose_shared_control,
    decompose_shared_target, BitAllocator, PhysInstr,
};

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("placement maps {placed} qubits but the circuit uses {qubits}")]
    PlacementTooSmall { qubits: usize, placed: usize },
    #[error("{0} and {1} share a node; emit a local gate instead")]
    LocalGate(QubitRef, QubitRef),
    #[error("two partners of one group live on node {0}")]
    NodeCollision(usize),
    #[error("node {0} has no free memory slot to buffer GHZ fusion")]
    NoBuffer(usize),
    #[error("a GHZ state needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("bucket {0} violates the post-sweep invariant")]
    MalformedBucket(usize),
    #[error("emitted circuit is invalid: {0:?}")]
    Invalid(Vec<Violation>),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Local,
    NaiveCnot,
    NaiveCz,
    SharedControl,
    SharedTarget,
}

/// Contiguous run of emitted instructions implementing one logical unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub start: usize,
    pub end: usize,
    /// Logical two-qubit gates realized by the block.
    pub gates: usize,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCircuit {
    pub instructions: Vec<PhysInstr>,
    /// Bits `0..logical_bit_count` are the logical circuit's own registers.
    pub logical_bit_count: usize,
    pub classical_bit_count: usize,
    pub topology: NodeTopology,
    pub placement: Placement,
    pub blocks: Vec<Block>,
}

impl PhysicalCircuit {
    /// Structural depth of the ASAP re-bucketization.
    pub fn depth(&self) -> usize {
        depth_layers(&self.instructions)
    }

    pub fn epr_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.kind == GateKind::Epr).count()
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_physical(&self.instructions, &self.topology, self.classical_bit_count)
    }
}

/// Partition the CNOTs of bucket `index` into merge groups.
///
/// CNOTs are sorted by `(control, target)`; the largest set sharing a control
/// (preferred on ties) or a target is extracted until only singletons remain.
pub fn group_bucket(circuit: &BucketedCircuit, index: usize) -> Result<Vec<MergeGroup>, CompileError> {
    let bucket = &circuit.buckets[index];
    let mut cnots: Vec<(usize, usize, InstrId)> = Vec::new();
    let mut others: Vec<LogicalQubit> = Vec::new();
    for id in &bucket.members {
        let instr = circuit.instr(*id);
        match instr.control_target() {
            Some((c, t)) => cnots.push((c, t, *id)),
            None => others.extend(instr.operands.iter().copied()),
        }
    }
    cnots.sort();
    for (i, (c, t, _)) in cnots.iter().enumerate() {
        let clash = others.contains(c)
            || others.contains(t)
            || cnots[..i]
                .iter()
                .any(|(c2, t2, _)| c2 == t || t2 == c || (c2 == c && t2 == t));
        // two gates sharing a qubit must share it in the same role
        if clash {
            return Err(CompileError::MalformedBucket(index));
        }
    }

    let mut groups = Vec::new();
    while !cnots.is_empty() {
        let mut best: Option<(usize, GroupKind)> = None;
        for &(c, t, _) in &cnots {
            for kind in [GroupKind::SharedControl(c), GroupKind::SharedTarget(t)] {
                let size = cnots
                    .iter()
                    .filter(|(c2, t2, _)| match kind {
                        GroupKind::SharedControl(q) => *c2 == q,
                        GroupKind::SharedTarget(q) => *t2 == q,
                        GroupKind::Independent => false,
                    })
                    .count();
                let better = match best {
                    None => true,
                    Some((s, k)) => size > s || (size == s && prefer(kind, k)),
                };
                if better {
                    best = Some((size, kind));
                }
            }
        }
        let (size, kind) = best.expect("non-empty");
        if size < 2 {
            let (_, _, id) = cnots.remove(0);
            groups.push(MergeGroup {
                members: vec![id],
                kind: GroupKind::Independent,
            });
            continue;
        }
        let (taken, rest): (Vec<_>, Vec<_>) = cnots.into_iter().partition(|(c, t, _)| match kind {
            GroupKind::SharedControl(q) => *c == q,
            GroupKind::SharedTarget(q) => *t == q,
            GroupKind::Independent => false,
        });
        cnots = rest;
        groups.push(MergeGroup {
            members: taken.into_iter().map(|(_, _, id)| id).collect(),
            kind,
        });
    }
    // a shared group sharing a qubit with another group would be a mixed pattern
    for (i, g) in groups.iter().enumerate() {
        for h in &groups[..i] {
            let qs = |m: &MergeGroup| -> Vec<usize> {
                m.members
                    .iter()
                    .flat_map(|id| circuit.instr(*id).operands.clone())
                    .collect()
            };
            let hq = qs(h);
            if qs(g).iter().any(|q| hq.contains(q)) {
                return Err(CompileError::MalformedBucket(index));
            }
        }
    }
    Ok(groups)
}

/// Tie-break: shared control beats shared target, then lower hub index.
fn prefer(a: GroupKind, b: GroupKind) -> bool {
    let key = |k: GroupKind| match k {
        GroupKind::SharedControl(q) => (0, q),
        GroupKind::SharedTarget(q) => (1, q),
        GroupKind::Independent => (2, 0),
    };
    key(a) < key(b)
}

struct Emitter<'a> {
    hw: &'a Hardware,
    cost: &'a CostModel,
    out: Vec<PhysInstr>,
    blocks: Vec<Block>,
    bits: BitAllocator,
}

impl Emitter<'_> {
    fn phys(&self, q: LogicalQubit) -> QubitRef {
        self.hw.placement.get(q).expect("placement checked")
    }

    fn push_block(&mut self, kind: BlockKind, gates: usize, cost: u64, seq: Vec<PhysInstr>) {
        let start = self.out.len();
        self.out.extend(seq);
        self.blocks.push(Block {
            kind,
            start,
            end: self.out.len(),
            gates,
            cost,
        });
    }

    fn local(&mut self, kind: GateKind, operands: Vec<QubitRef>) {
        let gates = usize::from(operands.len() == 2);
        self.push_block(BlockKind::Local, gates, 1, vec![Instruction::new(kind, operands)]);
    }

    fn two_qubit(&mut self, kind: GateKind, a: LogicalQubit, b: LogicalQubit) -> Result<(), CompileError> {
        let (pa, pb) = (self.phys(a), self.phys(b));
        if pa.node == pb.node {
            self.local(kind, vec![pa, pb]);
            return Ok(());
        }
        let (seq, block) = match kind {
            GateKind::Cnot => (decompose_naive_cnot(pa, pb, &mut self.bits)?, BlockKind::NaiveCnot),
            GateKind::Cz => (decompose_naive_cz(pa, pb, &mut self.bits)?, BlockKind::NaiveCz),
            _ => unreachable!("only CNOT and CZ are two-qubit logical gates"),
        };
        self.push_block(block, 1, self.cost.naive_cnot_cost, seq);
        Ok(())
    }

    /// Emit a shared group: co-located partners locally, then one parallel
    /// block per node-disjoint round of remote partners.
    fn shared(&mut self, hub: LogicalQubit, partners: &[LogicalQubit], control_hub: bool, min: usize) -> Result<(), CompileError> {
        let ph = self.phys(hub);
        let mut remote = Vec::new();
        for &p in partners {
            let pp = self.phys(p);
            if pp.node == ph.node {
                let ops = if control_hub { vec![ph, pp] } else { vec![pp, ph] };
                self.local(GateKind::Cnot, ops);
            } else {
                remote.push(p);
            }
        }
        let buffer = self.hw.placement.free_memory_slot(ph.node, &self.hw.topology);
        while !remote.is_empty() {
            let mut round = Vec::new();
            let mut rest = Vec::new();
            for p in remote {
                let node = self.phys(p).node;
                if round.iter().any(|q: &LogicalQubit| self.phys(*q).node == node) {
                    rest.push(p);
                } else {
                    round.push(p);
                }
            }
            remote = rest;
            // fusion over three or more nodes needs the buffer
            if round.len() < min.max(2) || buffer.is_none() {
                for p in round {
                    let (c, t) = if control_hub { (hub, p) } else { (p, hub) };
                    self.two_qubit(GateKind::Cnot, c, t)?;
                }
                continue;
            }
            let phys: Vec<QubitRef> = round.iter().map(|p| self.phys(*p)).collect();
            let n = phys.len();
            let (seq, kind) = if control_hub {
                (decompose_shared_control(ph, &phys, buffer, &mut self.bits)?, BlockKind::SharedControl)
            } else {
                (decompose_shared_target(ph, &phys, buffer, &mut self.bits)?, BlockKind::SharedTarget)
            };
            self.push_block(kind, n, self.cost.parallel_cost(n), seq);
        }
        Ok(())
    }

    fn group(&mut self, circuit: &BucketedCircuit, g: &MergeGroup, min: usize) -> Result<(), CompileError> {
        let pairs: Vec<(usize, usize)> = g
            .members
            .iter()
            .map(|id| circuit.instr(*id).control_target().expect("groups hold CNOTs"))
            .collect();
        match g.kind {
            GroupKind::SharedControl(c) if pairs.len() >= 2 => {
                let targets: Vec<_> = pairs.iter().map(|p| p.1).collect();
                self.shared(c, &targets, true, min)
            }
            GroupKind::SharedTarget(t) if pairs.len() >= 2 => {
                let controls: Vec<_> = pairs.iter().map(|p| p.0).collect();
                self.shared(t, &controls, false, min)
            }
            _ => {
                for (c, t) in pairs {
                    self.two_qubit(GateKind::Cnot, c, t)?;
                }
                Ok(())
            }
        }
    }

    fn instruction(&mut self, instr: &Instruction) -> Result<(), CompileError> {
        match instr.kind {
            GateKind::Cz => self.two_qubit(GateKind::Cz, instr.operands[0], instr.operands[1]),
            GateKind::Cnot => self.two_qubit(GateKind::Cnot, instr.operands[0], instr.operands[1]),
            _ => {
                let mapped = Instruction {
                    kind: instr.kind,
                    operands: instr.operands.iter().map(|q| self.phys(*q)).collect(),
                    writes: instr.writes,
                    condition: instr.condition.clone(),
                };
                self.push_block(BlockKind::Local, 0, 1, vec![mapped]);
                Ok(())
            }
        }
    }
}

fn sort_key(circuit: &BucketedCircuit, g: &MergeGroup) -> (usize, usize) {
    g.members
        .iter()
        .filter_map(|id| circuit.instr(*id).control_target())
        .min()
        .unwrap_or((usize::MAX, usize::MAX))
}

/// Expand an annotated plan bucket by bucket. Buckets without annotations
/// are grouped with [`group_bucket`]. Shared groups smaller than the mode's
/// threshold fall back to naive CNOTs.
pub fn compile(
    plan: &BucketedCircuit,
    hardware: &Hardware,
    mode: Mode,
    cost: &CostModel,
) -> Result<PhysicalCircuit, CompileError> {
    hardware.placement.check_against(&hardware.topology)?;
    if hardware.placement.len() < plan.qubit_count {
        return Err(CompileError::PlacementTooSmall {
            qubits: plan.qubit_count,
            placed: hardware.placement.len(),
        });
    }
    let min = mode.min_parallel_group(cost);
    let mut em = Emitter {
        hw: hardware,
        cost,
        out: Vec::new(),
        blocks: Vec::new(),
        bits: BitAllocator::starting_at(plan.classical_bit_count),
    };
    for (bi, bucket) in plan.buckets.iter().enumerate() {
        let mut groups = match &bucket.groups {
            Some(g) => g.clone(),
            None => group_bucket(plan, bi)?,
        };
        // CNOTs left out of the annotation run on their own
        let covered: Vec<InstrId> = groups.iter().flat_map(|g| g.members.clone()).collect();
        for id in uncovered_cnots(plan, bucket, &covered) {
            groups.push(MergeGroup {
                members: vec![id],
                kind: GroupKind::Independent,
            });
        }
        groups.sort_by_key(|g| sort_key(plan, g));

        let mut barriers = Vec::new();
        for id in &bucket.members {
            let instr = plan.instr(*id);
            if instr.is_cnot() {
                continue;
            }
            if instr.is_barrier() {
                barriers.push(instr);
            } else {
                em.instruction(instr)?;
            }
        }
        for g in &groups {
            em.group(plan, g, min)?;
        }
        for b in barriers {
            em.instruction(b)?;
        }
    }
    let circuit = PhysicalCircuit {
        instructions: em.out,
        logical_bit_count: plan.classical_bit_count,
        classical_bit_count: em.bits.end(),
        topology: hardware.topology,
        placement: hardware.placement.clone(),
        blocks: em.blocks,
    };
    circuit.validate().map_err(CompileError::Invalid)?;
    Ok(circuit)
}

fn uncovered_cnots(plan: &BucketedCircuit, bucket: &Bucket, covered: &[InstrId]) -> Vec<InstrId> {
    bucket
        .members
        .iter()
        .copied()
        .filter(|id| plan.instr(*id).is_cnot() && !covered.contains(id))
        .collect()
}

/// Classical bits written by protocol measurements.
pub fn protocol_bits(circuit: &PhysicalCircuit) -> std::ops::Range<Bit> {
    circuit.logical_bit_count..circuit.classical_bit_count
}
