//! ASAP bucketization and atomic re-bucketization of merge groups.

use std::collections::HashMap;

use thiserror::Error;

use crate::frontend::LogicalCircuit;
use crate::ir::depth::LayerTracker;
use crate::ir::{Bit, Bucket, BucketedCircuit, InstrId, Instruction, Qubit};
use crate::parallelizer::MergeGroup;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("instruction #{0} belongs to more than one merge group")]
    DoubleMembership(usize),
    #[error("instruction #{0} referenced by a group is not in the sequence")]
    UnknownMember(usize),
    #[error("instruction #{intruder} sits between members of a group and depends on them")]
    AtomicityViolation { intruder: usize },
}

/// Place each instruction of a logical circuit in the earliest bucket its
/// dependencies allow.
pub fn bucketize(circuit: &LogicalCircuit) -> BucketedCircuit {
    bucketize_instructions(
        circuit.instructions.clone(),
        circuit.qubit_count,
        circuit.classical_bit_count,
    )
}

/// Generic ASAP bucketization. Ties keep source order.
pub fn bucketize_instructions<Q: Qubit>(
    instructions: Vec<Instruction<Q>>,
    qubit_count: usize,
    classical_bit_count: usize,
) -> BucketedCircuit<Q> {
    let mut tracker = LayerTracker::new();
    let mut buckets: Vec<Bucket> = Vec::new();
    for (i, instr) in instructions.iter().enumerate() {
        let level = tracker.place(instr);
        if buckets.len() <= level {
            buckets.resize_with(level + 1, Bucket::default);
        }
        buckets[level].members.push(InstrId(i));
    }
    BucketedCircuit {
        instructions,
        buckets,
        qubit_count,
        classical_bit_count,
    }
}

/// Re-bucketize `order` (ids into `arena`), scheduling every group as one
/// atomic unit whose support is the union of its members.
pub fn rebucketize<Q: Qubit>(
    arena: &[Instruction<Q>],
    order: &[InstrId],
    groups: &[MergeGroup],
    qubit_count: usize,
    classical_bit_count: usize,
) -> Result<BucketedCircuit<Q>, ScheduleError> {
    let position: HashMap<InstrId, usize> =
        order.iter().enumerate().map(|(p, id)| (*id, p)).collect();
    let mut group_of: HashMap<InstrId, usize> = HashMap::new();
    for (gi, g) in groups.iter().enumerate() {
        for m in &g.members {
            if !position.contains_key(m) {
                return Err(ScheduleError::UnknownMember(m.0));
            }
            if group_of.insert(*m, gi).is_some() {
                return Err(ScheduleError::DoubleMembership(m.0));
            }
        }
    }
    for (gi, g) in groups.iter().enumerate() {
        let (lo, hi) = g.members.iter().fold((usize::MAX, 0), |(lo, hi), m| {
            let p = position[m];
            (lo.min(p), hi.max(p))
        });
        for id in &order[lo..=hi] {
            if group_of.get(id) == Some(&gi) {
                continue;
            }
            let intruder = &arena[id.0];
            if g.members.iter().any(|m| arena[m.0].conflicts_with(intruder)) {
                return Err(ScheduleError::AtomicityViolation { intruder: id.0 });
            }
        }
    }

    let mut tracker = LayerTracker::new();
    let mut buckets: Vec<Bucket> = Vec::new();
    let mut placed = vec![false; groups.len()];
    let put = |buckets: &mut Vec<Bucket>, level: usize, ids: &[InstrId]| {
        if buckets.len() <= level {
            buckets.resize_with(level + 1, || Bucket {
                members: Vec::new(),
                groups: Some(Vec::new()),
            });
        }
        buckets[level].members.extend_from_slice(ids);
    };
    for id in order {
        match group_of.get(id) {
            None => {
                let level = tracker.place(&arena[id.0]);
                put(&mut buckets, level, &[*id]);
            }
            Some(&gi) if !placed[gi] => {
                placed[gi] = true;
                let g = &groups[gi];
                let qubits: Vec<Q> = g
                    .members
                    .iter()
                    .flat_map(|m| arena[m.0].operands.iter().copied())
                    .collect();
                let reads: Vec<Bit> = g
                    .members
                    .iter()
                    .flat_map(|m| arena[m.0].reads().iter().copied())
                    .collect();
                let writes: Vec<Bit> = g.members.iter().filter_map(|m| arena[m.0].writes).collect();
                let level = tracker.earliest(&qubits, &reads, &writes);
                tracker.commit(level, 1, &qubits, &reads, &writes);
                put(&mut buckets, level, &g.members);
                buckets[level]
                    .groups
                    .get_or_insert_with(Vec::new)
                    .push(g.clone());
            }
            Some(_) => {}
        }
    }
    for b in &mut buckets {
        b.groups.get_or_insert_with(Vec::new);
    }
    Ok(BucketedCircuit {
        instructions: arena.to_vec(),
        buckets,
        qubit_count,
        classical_bit_count,
    })
}

/// Drop empty buckets, keeping order.
pub fn remove_empty<Q: Qubit>(bucketed: &BucketedCircuit<Q>) -> BucketedCircuit<Q> {
    BucketedCircuit {
        buckets: bucketed
            .buckets
            .iter()
            .filter(|b| !b.is_empty())
            .cloned()
            .collect(),
        ..bucketed.clone()
    }
}
