//! Structural and weighted depth metrics.

use std::collections::HashMap;

use thiserror::Error;

use super::{Bit, BucketedCircuit, CostModel, GateKind, InstrId, Instruction, Placement, Qubit};
use crate::parallelizer::GroupKind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DepthError {
    #[error("CNOT #{0} carries no naive or group annotation")]
    AnnotationMissing(usize),
}

/// Earliest-layer assignment shared by depth computation and bucketization.
///
/// Two instructions are ordered when they share a qubit, when one writes a
/// bit the other reads or writes, or when either is a barrier. Barriers take
/// the layer of the latest instruction before them and push everything after
/// them into later layers.
pub(crate) struct LayerTracker<Q> {
    qubit_ready: HashMap<Q, usize>,
    write_ready: HashMap<Bit, usize>,
    read_ready: HashMap<Bit, usize>,
    floor: usize,
    high_water: usize,
}

impl<Q: Qubit> LayerTracker<Q> {
    pub(crate) fn new() -> Self {
        Self {
            qubit_ready: HashMap::new(),
            write_ready: HashMap::new(),
            read_ready: HashMap::new(),
            floor: 0,
            high_water: 0,
        }
    }

    /// Earliest layer for an item touching `qubits`, reading `reads` and
    /// writing `writes`. Does not commit.
    pub(crate) fn earliest<'a>(
        &self,
        qubits: impl IntoIterator<Item = &'a Q>,
        reads: impl IntoIterator<Item = &'a Bit>,
        writes: impl IntoIterator<Item = &'a Bit>,
    ) -> usize
    where
        Q: 'a,
    {
        let mut level = self.floor;
        for q in qubits {
            level = level.max(self.qubit_ready.get(q).copied().unwrap_or(0));
        }
        for b in reads {
            level = level.max(self.write_ready.get(b).copied().unwrap_or(0));
        }
        for b in writes {
            level = level
                .max(self.write_ready.get(b).copied().unwrap_or(0))
                .max(self.read_ready.get(b).copied().unwrap_or(0));
        }
        level
    }

    /// Record an item occupying layers `[start, start + span)`.
    pub(crate) fn commit<'a>(
        &mut self,
        start: usize,
        span: usize,
        qubits: impl IntoIterator<Item = &'a Q>,
        reads: impl IntoIterator<Item = &'a Bit>,
        writes: impl IntoIterator<Item = &'a Bit>,
    ) where
        Q: 'a,
    {
        let end = start + span;
        for q in qubits {
            self.qubit_ready.insert(*q, end);
        }
        for b in reads {
            let e = self.read_ready.entry(*b).or_insert(0);
            *e = (*e).max(end);
        }
        for b in writes {
            self.write_ready.insert(*b, end);
        }
        self.high_water = self.high_water.max(end);
    }

    /// Place a barrier; returns the layer it is attached to.
    pub(crate) fn fence(&mut self) -> usize {
        self.floor = self.high_water;
        self.high_water.saturating_sub(1)
    }

    pub(crate) fn place(&mut self, instr: &Instruction<Q>) -> usize {
        if instr.is_barrier() {
            return self.fence();
        }
        let level = self.earliest(&instr.operands, instr.reads(), &instr.writes);
        self.commit(level, 1, &instr.operands, instr.reads(), &instr.writes);
        level
    }

    pub(crate) fn high_water(&self) -> usize {
        self.high_water
    }
}

/// Number of layers in the shortest legal layering of `instrs`.
pub fn depth_layers<Q: Qubit>(instrs: &[Instruction<Q>]) -> usize {
    if instrs.is_empty() {
        return 0;
    }
    let mut tracker = LayerTracker::new();
    for instr in instrs {
        tracker.place(instr);
    }
    tracker.high_water().max(1)
}

/// Critical-path cost of an annotated plan, treating every two-qubit gate as
/// distributed.
pub fn weighted_depth(bucketed: &BucketedCircuit, cost: &CostModel) -> Result<u64, DepthError> {
    weighted_depth_placed(bucketed, cost, None)
}

/// Critical-path cost of an annotated plan. With a placement, two-qubit gates
/// between co-located qubits cost one.
pub fn weighted_depth_placed(
    bucketed: &BucketedCircuit,
    cost: &CostModel,
    placement: Option<&Placement>,
) -> Result<u64, DepthError> {
    let distributed = |a: usize, b: usize| placement.is_none_or(|p| p.is_distributed(a, b));

    // group index per member, in annotation order
    let mut group_of: HashMap<InstrId, usize> = HashMap::new();
    let groups: Vec<_> = bucketed.groups().collect();
    for (gi, g) in groups.iter().enumerate() {
        for m in &g.members {
            group_of.insert(*m, gi);
        }
    }

    let mut finish: HashMap<usize, u64> = HashMap::new();
    let mut bit_ready: HashMap<Bit, u64> = HashMap::new();
    let mut floor = 0u64;
    let mut high = 0u64;
    let mut done_groups = vec![false; groups.len()];

    for id in bucketed.flatten() {
        let instr = bucketed.instr(id);
        if instr.is_barrier() {
            floor = high;
            continue;
        }
        let (support, weight): (Vec<usize>, u64) = match instr.kind {
            GateKind::Cnot => {
                let Some(&gi) = group_of.get(&id) else {
                    return Err(DepthError::AnnotationMissing(id.0));
                };
                if done_groups[gi] {
                    continue;
                }
                done_groups[gi] = true;
                let group = groups[gi];
                let mut support: Vec<usize> = group
                    .members
                    .iter()
                    .flat_map(|m| bucketed.instr(*m).operands.iter().copied())
                    .collect();
                support.sort_unstable();
                support.dedup();
                let weight = match group.kind {
                    GroupKind::SharedControl(_) | GroupKind::SharedTarget(_)
                        if group.members.len() >= 2 =>
                    {
                        cost.parallel_cost(group.members.len())
                    }
                    _ => group
                        .members
                        .iter()
                        .map(|m| {
                            let (c, t) = bucketed.instr(*m).control_target().expect("cnot");
                            if distributed(c, t) {
                                cost.naive_cnot_cost
                            } else {
                                1
                            }
                        })
                        .max()
                        .unwrap_or(1),
                };
                (support, weight)
            }
            GateKind::Cz | GateKind::Swap => {
                let (a, b) = (instr.operands[0], instr.operands[1]);
                let w = if distributed(a, b) {
                    cost.naive_cnot_cost
                } else {
                    1
                };
                (instr.operands.clone(), w)
            }
            _ => (instr.operands.clone(), 1),
        };
        let mut start = floor;
        for q in &support {
            start = start.max(finish.get(q).copied().unwrap_or(0));
        }
        for b in instr.reads().iter().chain(instr.writes.iter()) {
            start = start.max(bit_ready.get(b).copied().unwrap_or(0));
        }
        let end = start + weight;
        for q in support {
            finish.insert(q, end);
        }
        if let Some(b) = instr.writes {
            bit_ready.insert(b, end);
        }
        high = high.max(end);
    }
    Ok(high)
}
