//! Circuit intermediate representation shared by every pass.
//!
//! Instructions are generic over their qubit type: logical circuits address
//! qubits by plain index, physical circuits by [`QubitRef`]. Buckets refer to
//! instructions through [`InstrId`] handles into an arena owned by the
//! [`BucketedCircuit`], so passes can reorder and regroup without copying.

pub(crate) mod depth;
mod validate;

use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallelizer::MergeGroup;

pub use depth::{depth_layers, weighted_depth, weighted_depth_placed, DepthError};
pub use validate::{validate_logical, validate_physical, Violation};

/// Index of a logical qubit.
pub type LogicalQubit = usize;

/// Index of a classical bit.
pub type Bit = usize;

/// Bound satisfied by every qubit addressing scheme.
pub trait Qubit: Copy + Eq + Hash + Ord + fmt::Debug + Send + Sync {}

impl<T: Copy + Eq + Hash + Ord + fmt::Debug + Send + Sync> Qubit for T {}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("topology needs at least one node")]
    NoNodes,
    #[error("every node needs at least one memory qubit")]
    NoMemory,
    #[error("placement maps logical qubits {0} and {1} onto the same physical qubit")]
    PlacementCollision(LogicalQubit, LogicalQubit),
    #[error("placement of logical qubit {0} is not a memory qubit")]
    PlacementNotMemory(LogicalQubit),
    #[error("placement of logical qubit {0} ({1}) lies outside the topology")]
    PlacementOutOfRange(LogicalQubit, QubitRef),
    #[error("{qubits} logical qubits do not fit on {nodes} nodes with {per_node} usable slots each")]
    CapacityExceeded {
        qubits: usize,
        nodes: usize,
        per_node: usize,
    },
    #[error("cost model field `{0}` must be positive")]
    NonPositiveCost(&'static str),
}

/// Whether a physical qubit can take part in inter-node entanglement.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Communication,
    Memory,
}

/// Address of one physical qubit: node, role and local slot.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitRef {
    pub node: usize,
    pub role: Role,
    pub index: usize,
}

impl QubitRef {
    /// The single communication qubit of `node`.
    pub const fn comm(node: usize) -> Self {
        Self {
            node,
            role: Role::Communication,
            index: 0,
        }
    }

    pub const fn memory(node: usize, index: usize) -> Self {
        Self {
            node,
            role: Role::Memory,
            index,
        }
    }

    pub fn is_comm(&self) -> bool {
        self.role == Role::Communication
    }
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Communication => write!(f, "n{}.e{}", self.node, self.index),
            Role::Memory => write!(f, "n{}.m{}", self.node, self.index),
        }
    }
}

/// Hardware model: a fully connected set of nodes, each with one
/// communication qubit and `memory_per_node` memory qubits.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTopology {
    node_count: usize,
    memory_per_node: usize,
}

impl NodeTopology {
    pub const DEFAULT_MEMORY_PER_NODE: usize = 4;

    pub fn new(node_count: usize, memory_per_node: usize) -> Result<Self, IrError> {
        if node_count == 0 {
            return Err(IrError::NoNodes);
        }
        if memory_per_node == 0 {
            return Err(IrError::NoMemory);
        }
        Ok(Self {
            node_count,
            memory_per_node,
        })
    }

    /// One node per logical qubit with the default memory size.
    pub fn for_qubits(qubits: usize) -> Self {
        Self::new(qubits.max(1), Self::DEFAULT_MEMORY_PER_NODE).expect("positive sizes")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn memory_per_node(&self) -> usize {
        self.memory_per_node
    }

    /// Only all-to-all connectivity is modelled.
    pub fn all_to_all(&self) -> bool {
        true
    }

    pub fn contains(&self, q: QubitRef) -> bool {
        q.node < self.node_count
            && match q.role {
                Role::Communication => q.index == 0,
                Role::Memory => q.index < self.memory_per_node,
            }
    }
}

/// Injective map from logical qubits onto memory qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    slots: Vec<QubitRef>,
}

impl Placement {
    pub fn new(slots: Vec<QubitRef>) -> Result<Self, IrError> {
        for (i, q) in slots.iter().enumerate() {
            if q.role != Role::Memory {
                return Err(IrError::PlacementNotMemory(i));
            }
            if let Some(j) = slots[..i].iter().position(|p| p == q) {
                return Err(IrError::PlacementCollision(j, i));
            }
        }
        Ok(Self { slots })
    }

    /// Logical qubit `i` on node `i`, memory slot 0.
    pub fn one_per_node(qubits: usize) -> Self {
        Self {
            slots: (0..qubits).map(|i| QubitRef::memory(i, 0)).collect(),
        }
    }

    /// Fill nodes in order, keeping the highest memory slot of every node
    /// free as a fusion buffer.
    pub fn packed(qubits: usize, topology: &NodeTopology) -> Result<Self, IrError> {
        let per_node = topology.memory_per_node().saturating_sub(1).max(1);
        if qubits > per_node * topology.node_count() {
            return Err(IrError::CapacityExceeded {
                qubits,
                nodes: topology.node_count(),
                per_node,
            });
        }
        Ok(Self {
            slots: (0..qubits)
                .map(|i| QubitRef::memory(i / per_node, i % per_node))
                .collect(),
        })
    }

    pub fn check_against(&self, topology: &NodeTopology) -> Result<(), IrError> {
        for (i, q) in self.slots.iter().enumerate() {
            if !topology.contains(*q) {
                return Err(IrError::PlacementOutOfRange(i, *q));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, logical: LogicalQubit) -> Option<QubitRef> {
        self.slots.get(logical).copied()
    }

    pub fn node_of(&self, logical: LogicalQubit) -> Option<usize> {
        self.get(logical).map(|q| q.node)
    }

    pub fn slots(&self) -> &[QubitRef] {
        &self.slots
    }

    pub fn holds_logical(&self, q: QubitRef) -> bool {
        self.slots.contains(&q)
    }

    /// Highest-index memory slot on `node` that holds no logical qubit.
    pub fn free_memory_slot(&self, node: usize, topology: &NodeTopology) -> Option<QubitRef> {
        (0..topology.memory_per_node())
            .rev()
            .map(|i| QubitRef::memory(node, i))
            .find(|q| !self.holds_logical(*q))
    }

    /// Whether two logical qubits live on different nodes.
    pub fn is_distributed(&self, a: LogicalQubit, b: LogicalQubit) -> bool {
        self.node_of(a) != self.node_of(b)
    }
}

/// Native operation kinds. Rotation angles are in radians.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz(f64),
    Rx(f64),
    Ry(f64),
    Cnot,
    Cz,
    Swap,
    MeasureZ,
    MeasureX,
    Reset,
    Epr,
    Barrier,
}

impl GateKind {
    /// Expected operand count, `None` for barriers (any number).
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap | GateKind::Epr => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, GateKind::MeasureZ | GateKind::MeasureX)
    }

    pub fn is_single_qubit_unitary(&self) -> bool {
        matches!(
            self,
            GateKind::H
                | GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::S
                | GateKind::Sdg
                | GateKind::T
                | GateKind::Tdg
                | GateKind::Rz(_)
                | GateKind::Rx(_)
                | GateKind::Ry(_)
        )
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            GateKind::Z
                | GateKind::S
                | GateKind::Sdg
                | GateKind::T
                | GateKind::Tdg
                | GateKind::Rz(_)
        )
    }

    /// Member of the gate set accepted in logical (pre-decomposition) circuits.
    pub fn is_logical(&self) -> bool {
        self.is_single_qubit_unitary()
            || matches!(
                self,
                GateKind::Cnot | GateKind::Cz | GateKind::MeasureZ | GateKind::Barrier
            )
    }

    /// Lower-case mnemonic used by the text formats.
    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rz(_) => "rz",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::MeasureZ => "measz",
            GateKind::MeasureX => "measx",
            GateKind::Reset => "reset",
            GateKind::Epr => "epr",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Rz(a) | GateKind::Rx(a) | GateKind::Ry(a) => Some(*a),
            _ => None,
        }
    }
}

/// Feed-forward guard: the instruction runs iff the XOR of `bits` equals `parity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub bits: Vec<Bit>,
    pub parity: bool,
}

impl Condition {
    pub fn on(bit: Bit) -> Self {
        Self {
            bits: vec![bit],
            parity: true,
        }
    }

    pub fn parity_of(bits: Vec<Bit>) -> Self {
        Self { bits, parity: true }
    }

    /// Evaluate against a lookup of measured bit values.
    pub fn holds(&self, value_of: impl Fn(Bit) -> bool) -> bool {
        self.bits.iter().fold(false, |acc, &b| acc ^ value_of(b)) == self.parity
    }
}

/// One gate, measurement, or entanglement primitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction<Q = LogicalQubit> {
    pub kind: GateKind,
    pub operands: Vec<Q>,
    pub writes: Option<Bit>,
    pub condition: Option<Condition>,
}

impl<Q: Qubit> Instruction<Q> {
    pub fn new(kind: GateKind, operands: Vec<Q>) -> Self {
        Self {
            kind,
            operands,
            writes: None,
            condition: None,
        }
    }

    pub fn single(kind: GateKind, q: Q) -> Self {
        Self::new(kind, vec![q])
    }

    pub fn cnot(control: Q, target: Q) -> Self {
        Self::new(GateKind::Cnot, vec![control, target])
    }

    pub fn cz(a: Q, b: Q) -> Self {
        Self::new(GateKind::Cz, vec![a, b])
    }

    pub fn measure_z(q: Q, bit: Bit) -> Self {
        Self {
            writes: Some(bit),
            ..Self::single(GateKind::MeasureZ, q)
        }
    }

    pub fn measure_x(q: Q, bit: Bit) -> Self {
        Self {
            writes: Some(bit),
            ..Self::single(GateKind::MeasureX, q)
        }
    }

    pub fn barrier(qubits: Vec<Q>) -> Self {
        Self::new(GateKind::Barrier, qubits)
    }

    pub fn with_condition(mut self, condition: Condition) -> Self {
        self.condition = Some(condition);
        self
    }

    /// Operand qubits of the instruction.
    pub fn qubits(&self) -> &[Q] {
        &self.operands
    }

    pub fn touches(&self, q: Q) -> bool {
        self.operands.contains(&q)
    }

    pub fn is_cnot(&self) -> bool {
        self.kind == GateKind::Cnot
    }

    pub fn is_barrier(&self) -> bool {
        self.kind == GateKind::Barrier
    }

    /// `(control, target)` for a CNOT.
    pub fn control_target(&self) -> Option<(Q, Q)> {
        match (self.kind, self.operands.as_slice()) {
            (GateKind::Cnot, [c, t]) => Some((*c, *t)),
            _ => None,
        }
    }

    /// Bits read by the condition, if any.
    pub fn reads(&self) -> &[Bit] {
        self.condition.as_ref().map_or(&[], |c| c.bits.as_slice())
    }

    /// True when the two instructions must keep their relative order.
    pub fn conflicts_with(&self, other: &Self) -> bool {
        if self.is_barrier() || other.is_barrier() {
            return true;
        }
        if self.operands.iter().any(|q| other.operands.contains(q)) {
            return true;
        }
        let writes_read = |w: &Self, r: &Self| w.writes.is_some_and(|b| r.reads().contains(&b));
        writes_read(self, other)
            || writes_read(other, self)
            || (self.writes.is_some() && self.writes == other.writes)
    }
}

/// Free-standing alias for [`Instruction::qubits`].
pub fn qubits_of<Q: Qubit>(instr: &Instruction<Q>) -> &[Q] {
    instr.qubits()
}

/// Handle to an instruction inside a [`BucketedCircuit`] arena.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstrId(pub usize);

/// A layer of jointly executable instructions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub members: Vec<InstrId>,
    /// Joint-execution annotations, present after optimization.
    pub groups: Option<Vec<MergeGroup>>,
}

impl Bucket {
    pub fn new(members: Vec<InstrId>) -> Self {
        Self {
            members,
            groups: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
}

/// Ordered buckets over an instruction arena.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketedCircuit<Q = LogicalQubit> {
    pub instructions: Vec<Instruction<Q>>,
    pub buckets: Vec<Bucket>,
    pub qubit_count: usize,
    pub classical_bit_count: usize,
}

impl<Q: Qubit> BucketedCircuit<Q> {
    pub fn instr(&self, id: InstrId) -> &Instruction<Q> {
        &self.instructions[id.0]
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Bucket contents in order.
    pub fn flatten(&self) -> Vec<InstrId> {
        self.buckets
            .iter()
            .flat_map(|b| b.members.iter().copied())
            .collect()
    }

    pub fn flatten_instructions(&self) -> Vec<Instruction<Q>> {
        self.flatten()
            .into_iter()
            .map(|id| self.instr(id).clone())
            .collect()
    }

    /// Every merge group annotated on any bucket.
    pub fn groups(&self) -> impl Iterator<Item = &MergeGroup> {
        self.buckets
            .iter()
            .flat_map(|b| b.groups.iter().flatten())
    }

    /// Members of a bucket as instruction references.
    pub fn bucket_instrs(&self, index: usize) -> impl Iterator<Item = &Instruction<Q>> {
        self.buckets[index].members.iter().map(|id| self.instr(*id))
    }
}

/// Weights used for the instruction-count view of circuit depth.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub naive_cnot_cost: u64,
    pub parallel_base_cost: u64,
    pub parallel_increment: u64,
    pub parallel_base_size: u64,
    pub min_group_size_conservative: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            naive_cnot_cost: 19,
            parallel_base_cost: 42,
            parallel_increment: 1,
            parallel_base_size: 2,
            min_group_size_conservative: 3,
        }
    }
}

impl CostModel {
    /// Every weight set to one; weighted depth then counts layers.
    pub fn unit() -> Self {
        Self {
            naive_cnot_cost: 1,
            parallel_base_cost: 1,
            parallel_increment: 1,
            parallel_base_size: 1,
            min_group_size_conservative: 1,
        }
    }

    pub fn validate(&self) -> Result<(), IrError> {
        let fields = [
            ("naive_cnot_cost", self.naive_cnot_cost),
            ("parallel_base_cost", self.parallel_base_cost),
            ("parallel_increment", self.parallel_increment),
            ("parallel_base_size", self.parallel_base_size),
            ("min_group_size_conservative", self.min_group_size_conservative),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(IrError::NonPositiveCost(name)),
            None => Ok(()),
        }
    }

    /// Cost of executing `n` distributed CNOTs as one parallel block.
    pub fn parallel_cost(&self, n: usize) -> u64 {
        let n = n as u64;
        self.parallel_base_cost + self.parallel_increment * n.saturating_sub(self.parallel_base_size)
    }

    /// Cost of executing `n` distributed CNOTs one after another.
    pub fn sequential_cost(&self, n: usize) -> u64 {
        self.naive_cnot_cost * n as u64
    }
}
