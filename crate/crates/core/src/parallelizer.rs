//! Forward/backward bucket sweeps that merge CNOT buckets into joint
//! execution groups.
//!
//! A bucket of CNOTs moves only as a whole: every CNOT in it must find a
//! destination bucket, and at least one of them must join a CNOT sharing its
//! control or target there. Single-qubit gates never move. In conservative
//! mode a move is kept only if it does not increase the re-bucketized depth,
//! small groups are demoted after the sweeps, and the compiled result falls
//! back to the naive plan if it would be deeper.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposer::{compile, CompileError};
use crate::ir::{
    depth_layers, BucketedCircuit, CostModel, GateKind, InstrId, Instruction, LogicalQubit,
    NodeTopology, Placement,
};
use crate::scheduler::{rebucketize, remove_empty, ScheduleError};

/// Structural relation shared by the members of a group.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    SharedControl(LogicalQubit),
    SharedTarget(LogicalQubit),
    Independent,
}

impl GroupKind {
    pub fn is_shared(&self) -> bool {
        !matches!(self, GroupKind::Independent)
    }
}

/// CNOTs of one bucket that are decomposed as a unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeGroup {
    pub members: Vec<InstrId>,
    pub kind: GroupKind,
}

impl MergeGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Naive,
    Conservative,
    Relaxed,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Naive, Mode::Conservative, Mode::Relaxed];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Naive => "naive",
            Mode::Conservative => "conservative",
            Mode::Relaxed => "relaxed",
        }
    }

    /// Smallest shared group worth a parallel decomposition.
    pub fn min_parallel_group(&self, cost: &CostModel) -> usize {
        match self {
            Mode::Naive => usize::MAX,
            Mode::Conservative => cost.min_group_size_conservative.max(2) as usize,
            Mode::Relaxed => 2,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Mode::Naive),
            "conservative" => Ok(Mode::Conservative),
            "relaxed" => Ok(Mode::Relaxed),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BlockReason {
    /// The bucket uses the control as a target or the target as a control.
    RoleClash,
    /// A single-qubit gate acts on an operand.
    SingleQubitGate,
    /// Both the control and the target are already shared in the bucket.
    MixedPattern,
    /// The bucket holds the same CNOT.
    Duplicate,
    /// Any other dependency: two-qubit gates, measurements, barriers.
    Dependency,
}

/// Outcome of testing a CNOT against a bucket.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Join {
    Shared(GroupKind),
    Independent,
    /// The bucket only holds gates the CNOT commutes with (relaxed mode).
    Commutes,
    Blocked(BlockReason),
}

/// Whether a single-qubit gate on the given CNOT role commutes with the CNOT.
pub fn commutes_with_cnot(kind: GateKind, on_control: bool) -> bool {
    if on_control {
        kind.is_diagonal()
    } else {
        matches!(kind, GateKind::X | GateKind::Rx(_))
    }
}

fn classify<'a>(
    gate: &Instruction,
    dest: impl IntoIterator<Item = (&'a Instruction, Option<GroupKind>)>,
    mode: Mode,
) -> Join {
    let Some((c, t)) = gate.control_target() else {
        return Join::Blocked(BlockReason::Dependency);
    };
    let mut control_partner: Option<Option<GroupKind>> = None;
    let mut target_partner: Option<Option<GroupKind>> = None;
    let mut commutes = false;
    for (x, group) in dest {
        if x.is_barrier() {
            return Join::Blocked(BlockReason::Dependency);
        }
        let on_c = x.touches(c);
        let on_t = x.touches(t);
        if !on_c && !on_t {
            continue;
        }
        if let Some((xc, xt)) = x.control_target() {
            if xc == c && xt == t {
                return Join::Blocked(BlockReason::Duplicate);
            } else if xc == c && xt != t {
                control_partner = Some(group);
            } else if xt == t && xc != c {
                target_partner = Some(group);
            } else {
                return Join::Blocked(BlockReason::RoleClash);
            }
        } else if x.kind.is_single_qubit_unitary() {
            if mode == Mode::Relaxed && commutes_with_cnot(x.kind, on_c) {
                commutes = true;
            } else {
                return Join::Blocked(BlockReason::SingleQubitGate);
            }
        } else {
            return Join::Blocked(BlockReason::Dependency);
        }
    }
    match (control_partner, target_partner) {
        (Some(_), Some(_)) => Join::Blocked(BlockReason::MixedPattern),
        _ if commutes => Join::Commutes,
        (Some(group), None) => match group {
            None | Some(GroupKind::SharedControl(_)) => Join::Shared(GroupKind::SharedControl(c)),
            Some(_) => Join::Blocked(BlockReason::MixedPattern),
        },
        (None, Some(group)) => match group {
            None | Some(GroupKind::SharedTarget(_)) => Join::Shared(GroupKind::SharedTarget(t)),
            Some(_) => Join::Blocked(BlockReason::MixedPattern),
        },
        (None, None) => Join::Independent,
    }
}

/// Test whether CNOT `gate` could execute jointly with bucket `dest` of `circuit`.
pub fn can_join(gate: &Instruction, dest: &crate::ir::Bucket, circuit: &BucketedCircuit, mode: Mode) -> Join {
    let mut kind_of: HashMap<InstrId, GroupKind> = HashMap::new();
    for g in dest.groups.iter().flatten() {
        for m in &g.members {
            kind_of.insert(*m, g.kind);
        }
    }
    classify(
        gate,
        dest.members.iter().map(|id| {
            let k = kind_of.get(id).copied().filter(GroupKind::is_shared);
            (circuit.instr(*id), k)
        }),
        mode,
    )
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Clone)]
struct SweepState<'a> {
    arena: &'a [Instruction],
    qubit_count: usize,
    bit_count: usize,
    buckets: Vec<Vec<InstrId>>,
    groups: Vec<Option<MergeGroup>>,
    group_of: HashMap<InstrId, usize>,
}

impl<'a> SweepState<'a> {
    fn new(b: &'a BucketedCircuit) -> Self {
        let mut s = Self {
            arena: &b.instructions,
            qubit_count: b.qubit_count,
            bit_count: b.classical_bit_count,
            buckets: b.buckets.iter().map(|x| x.members.clone()).collect(),
            groups: Vec::new(),
            group_of: HashMap::new(),
        };
        for g in b.groups().filter(|g| g.kind.is_shared()) {
            let gi = s.groups.len();
            for m in &g.members {
                s.group_of.insert(*m, gi);
            }
            s.groups.push(Some(g.clone()));
        }
        s
    }

    fn kind_of(&self, id: InstrId) -> Option<GroupKind> {
        self.group_of
            .get(&id)
            .and_then(|gi| self.groups[*gi].as_ref())
            .map(|g| g.kind)
    }

    fn join_at(&self, bucket: usize, gate: InstrId, mode: Mode) -> Join {
        classify(
            &self.arena[gate.0],
            self.buckets[bucket]
                .iter()
                .filter(|id| **id != gate)
                .map(|id| (&self.arena[id.0], self.kind_of(*id))),
            mode,
        )
    }

    fn destination(&self, from: usize, gate: InstrId, dir: Direction, mode: Mode) -> Option<(usize, Join)> {
        let candidates: Box<dyn Iterator<Item = usize>> = match dir {
            Direction::Forward => Box::new((0..from).rev()),
            Direction::Backward => Box::new(from + 1..self.buckets.len()),
        };
        let mut fallback = None;
        for j in candidates {
            match self.join_at(j, gate, mode) {
                Join::Shared(kind) => return Some((j, Join::Shared(kind))),
                Join::Independent => {
                    fallback.get_or_insert(j);
                }
                Join::Commutes => {}
                Join::Blocked(_) => break,
            }
        }
        fallback.map(|j| (j, Join::Independent))
    }

    fn move_gate(&mut self, gate: InstrId, from: usize, to: usize, join: Join) {
        self.buckets[from].retain(|id| *id != gate);
        self.buckets[to].push(gate);
        let Join::Shared(kind) = join else {
            return;
        };
        let (c, t) = self.arena[gate.0].control_target().expect("cnot");
        let partner = self.buckets[to]
            .iter()
            .copied()
            .find(|id| {
                *id != gate
                    && self.arena[id.0].control_target().is_some_and(|(xc, xt)| match kind {
                        GroupKind::SharedControl(_) => xc == c,
                        GroupKind::SharedTarget(_) => xt == t,
                        GroupKind::Independent => false,
                    })
            })
            .expect("shared join has a partner");
        match (self.group_of.get(&partner).copied(), self.group_of.get(&gate).copied()) {
            (Some(pg), Some(gg)) if pg != gg => {
                let absorbed = self.groups[gg].take().expect("live group");
                for m in &absorbed.members {
                    self.group_of.insert(*m, pg);
                }
                self.groups[pg]
                    .as_mut()
                    .expect("live group")
                    .members
                    .extend(absorbed.members);
            }
            (Some(_), Some(_)) => {}
            (Some(pg), None) => {
                self.group_of.insert(gate, pg);
                self.groups[pg].as_mut().expect("live group").members.push(gate);
            }
            (None, Some(gg)) => {
                self.group_of.insert(partner, gg);
                self.groups[gg].as_mut().expect("live group").members.insert(0, partner);
            }
            (None, None) => {
                let gi = self.groups.len();
                self.group_of.insert(partner, gi);
                self.group_of.insert(gate, gi);
                self.groups.push(Some(MergeGroup {
                    members: vec![partner, gate],
                    kind,
                }));
            }
        }
    }

    fn live_groups(&self) -> Vec<MergeGroup> {
        self.groups.iter().flatten().cloned().collect()
    }

    fn order(&self) -> Vec<InstrId> {
        self.buckets.iter().flatten().copied().collect()
    }

    fn depth(&self) -> Result<usize, ScheduleError> {
        let b = rebucketize(
            self.arena,
            &self.order(),
            &self.live_groups(),
            self.qubit_count,
            self.bit_count,
        )?;
        Ok(b.bucket_count())
    }

    /// Try to move every CNOT of bucket `i`; returns the updated state on success.
    fn try_move_bucket(&self, i: usize, dir: Direction, mode: Mode) -> Option<Self> {
        let bucket = &self.buckets[i];
        if dir == Direction::Backward && bucket.iter().any(|id| self.arena[id.0].is_barrier()) {
            return None;
        }
        let cnots: Vec<InstrId> = bucket
            .iter()
            .copied()
            .filter(|id| self.arena[id.0].is_cnot())
            .collect();
        if cnots.is_empty() {
            return None;
        }
        let mut next = self.clone();
        let mut any_shared = false;
        let mut group_dest: HashMap<usize, usize> = HashMap::new();
        for gate in cnots {
            let (to, join) = next.destination(i, gate, dir, mode)?;
            if let Some(&gi) = self.group_of.get(&gate) {
                let own = self.groups[gi].as_ref().map(|g| g.kind);
                if !matches!(join, Join::Shared(k) if Some(k) == own) {
                    return None;
                }
                if *group_dest.entry(gi).or_insert(to) != to {
                    return None;
                }
            }
            any_shared |= matches!(join, Join::Shared(_));
            next.move_gate(gate, i, to, join);
        }
        any_shared.then_some(next)
    }

    fn sweep(&mut self, dir: Direction, mode: Mode) -> Result<(), ScheduleError> {
        let order: Vec<usize> = match dir {
            Direction::Forward => (0..self.buckets.len()).collect(),
            Direction::Backward => (0..self.buckets.len()).rev().collect(),
        };
        for i in order {
            let Some(next) = self.try_move_bucket(i, dir, mode) else {
                continue;
            };
            if mode == Mode::Conservative && next.depth()? > self.depth()? {
                continue;
            }
            *self = next;
        }
        Ok(())
    }

    fn into_bucketed(self) -> BucketedCircuit {
        let groups = self.live_groups();
        let buckets = self
            .buckets
            .iter()
            .map(|members| crate::ir::Bucket {
                members: members.clone(),
                groups: Some(
                    groups
                        .iter()
                        .filter(|g| g.members.first().is_some_and(|m| members.contains(m)))
                        .cloned()
                        .collect(),
                ),
            })
            .collect();
        BucketedCircuit {
            instructions: self.arena.to_vec(),
            buckets,
            qubit_count: self.qubit_count,
            classical_bit_count: self.bit_count,
        }
    }
}

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

fn run_sweep(bucketed: &BucketedCircuit, dir: Direction, mode: Mode) -> Result<BucketedCircuit, ScheduleError> {
    if mode == Mode::Naive {
        return Ok(bucketed.clone());
    }
    let mut state = SweepState::new(bucketed);
    state.sweep(dir, mode)?;
    Ok(state.into_bucketed())
}

/// Scan buckets left to right, merging whole CNOT buckets into earlier ones.
/// Flatten the result for the new instruction order; its group annotations
/// are the merge groups formed so far.
pub fn forward_sweep(bucketed: &BucketedCircuit, mode: Mode) -> Result<BucketedCircuit, ScheduleError> {
    run_sweep(bucketed, Direction::Forward, mode)
}

/// Mirror of [`forward_sweep`], moving whole buckets later.
pub fn backward_sweep(bucketed: &BucketedCircuit, mode: Mode) -> Result<BucketedCircuit, ScheduleError> {
    run_sweep(bucketed, Direction::Backward, mode)
}

/// Both sweeps with CNOTs allowed to pass single-qubit gates they commute
/// with: diagonal gates on the control, `X`/`RX` on the target.
pub fn commuting_moves(bucketed: &BucketedCircuit) -> Result<BucketedCircuit, ScheduleError> {
    let forward = forward_sweep(bucketed, Mode::Relaxed)?;
    backward_sweep(&forward, Mode::Relaxed)
}

/// Annotate every CNOT without a shared group as a singleton.
pub fn annotate(bucketed: &BucketedCircuit) -> BucketedCircuit {
    let mut out = bucketed.clone();
    for bucket in &mut out.buckets {
        let mut groups: Vec<MergeGroup> = bucket
            .groups
            .take()
            .unwrap_or_default()
            .into_iter()
            .filter(|g| g.kind.is_shared() && g.len() >= 2)
            .collect();
        let grouped: Vec<InstrId> = groups.iter().flat_map(|g| g.members.clone()).collect();
        for id in &bucket.members {
            if bucketed.instr(*id).is_cnot() && !grouped.contains(id) {
                groups.push(MergeGroup {
                    members: vec![*id],
                    kind: GroupKind::Independent,
                });
            }
        }
        bucket.groups = Some(groups);
    }
    out
}

/// Hardware a plan is compiled for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hardware {
    pub topology: NodeTopology,
    pub placement: Placement,
}

impl Hardware {
    /// One node per logical qubit.
    pub fn one_per_node(qubits: usize) -> Self {
        Self {
            topology: NodeTopology::for_qubits(qubits),
            placement: Placement::one_per_node(qubits),
        }
    }
}

/// Result of [`optimize`].
#[derive(Clone, Debug, PartialEq)]
pub struct Optimized {
    /// Annotated plan: every CNOT is a singleton or a member of a shared group.
    pub plan: BucketedCircuit,
    /// Conservative mode rejected the optimized plan for being deeper.
    pub fell_back: bool,
}

impl Optimized {
    pub fn groups(&self) -> Vec<MergeGroup> {
        self.plan.groups().cloned().collect()
    }

    pub fn parallel_groups(&self) -> Vec<MergeGroup> {
        self.plan
            .groups()
            .filter(|g| g.kind.is_shared() && g.len() >= 2)
            .cloned()
            .collect()
    }
}

fn regroup(b: &BucketedCircuit, groups: &[MergeGroup]) -> Result<BucketedCircuit, ScheduleError> {
    let cleaned = remove_empty(b);
    rebucketize(
        &cleaned.instructions,
        &cleaned.flatten(),
        groups,
        cleaned.qubit_count,
        cleaned.classical_bit_count,
    )
}

/// The naive plan: ASAP buckets, every CNOT decomposed on its own.
pub fn naive_plan(bucketed: &BucketedCircuit) -> Result<BucketedCircuit, ScheduleError> {
    Ok(annotate(&regroup(bucketed, &[])?))
}

/// Full pass pipeline: forward sweep, backward sweep, empty-bucket removal
/// and re-bucketization, then mode-specific group filtering.
pub fn optimize(
    bucketed: &BucketedCircuit,
    mode: Mode,
    cost: &CostModel,
    hardware: &Hardware,
) -> Result<Optimized, OptimizeError> {
    let naive = naive_plan(bucketed)?;
    if mode == Mode::Naive {
        return Ok(Optimized {
            plan: naive,
            fell_back: false,
        });
    }
    let swept = backward_sweep(&forward_sweep(bucketed, mode)?, mode)?;
    let min = mode.min_parallel_group(cost);
    let groups: Vec<MergeGroup> = swept
        .groups()
        .filter(|g| g.kind.is_shared() && g.len() >= min)
        .cloned()
        .collect();
    let plan = annotate(&regroup(&swept, &groups)?);

    if mode == Mode::Conservative {
        let opt = compile(&plan, hardware, mode, cost)?;
        let base = compile(&naive, hardware, Mode::Naive, cost)?;
        if depth_layers(&opt.instructions) > depth_layers(&base.instructions) {
            return Ok(Optimized {
                plan: naive,
                fell_back: true,
            });
        }
    }
    Ok(Optimized {
        plan,
        fell_back: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Bucket;

    fn cx(c: usize, t: usize) -> Instruction {
        Instruction::cnot(c, t)
    }

    /// Bucketed circuit with the given explicit bucket contents.
    fn explicit(buckets: Vec<Vec<Instruction>>) -> BucketedCircuit {
        let mut instructions = Vec::new();
        let mut out = Vec::new();
        for b in buckets {
            let mut members = Vec::new();
            for i in b {
                members.push(InstrId(instructions.len()));
                instructions.push(i);
            }
            out.push(Bucket::new(members));
        }
        let qubit_count = instructions
            .iter()
            .flat_map(|i| i.operands.iter().copied())
            .max()
            .map_or(0, |q| q + 1);
        BucketedCircuit {
            instructions,
            buckets: out,
            qubit_count,
            classical_bit_count: 0,
        }
    }

    fn shapes(b: &BucketedCircuit) -> Vec<Vec<(usize, usize)>> {
        remove_empty(b)
            .buckets
            .iter()
            .map(|bk| {
                bk.members
                    .iter()
                    .filter_map(|id| b.instr(*id).control_target())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn can_join_cases() {
        let dest = explicit(vec![vec![cx(0, 1)]]);
        let bucket = &dest.buckets[0];
        assert_eq!(
            can_join(&cx(0, 2), bucket, &dest, Mode::Conservative),
            Join::Shared(GroupKind::SharedControl(0))
        );
        let dest2 = explicit(vec![vec![cx(0, 2)]]);
        assert_eq!(
            can_join(&cx(1, 0), &dest2.buckets[0], &dest2, Mode::Conservative),
            Join::Blocked(BlockReason::RoleClash)
        );
        assert_eq!(
            can_join(&cx(3, 5), bucket, &dest, Mode::Conservative),
            Join::Independent
        );
        let mixed = explicit(vec![vec![cx(0, 1), cx(2, 3)]]);
        assert_eq!(
            can_join(&cx(0, 3), &mixed.buckets[0], &mixed, Mode::Conservative),
            Join::Blocked(BlockReason::MixedPattern)
        );
    }

    #[test]
    fn shared_target_group_rejects_control_on_target() {
        let mut b = explicit(vec![vec![cx(1, 5), cx(2, 5)]]);
        b.buckets[0].groups = Some(vec![MergeGroup {
            members: vec![InstrId(0), InstrId(1)],
            kind: GroupKind::SharedTarget(5),
        }]);
        assert_eq!(
            can_join(&cx(5, 7), &b.buckets[0], &b, Mode::Conservative),
            Join::Blocked(BlockReason::RoleClash)
        );
        // joining the control of a shared-target member would mix patterns
        assert_eq!(
            can_join(&cx(1, 7), &b.buckets[0], &b, Mode::Conservative),
            Join::Blocked(BlockReason::MixedPattern)
        );
    }

    #[test]
    fn two_bucket_shared_control_merges() {
        let b = explicit(vec![vec![cx(0, 1)], vec![cx(0, 2)]]);
        let f = forward_sweep(&b, Mode::Conservative).unwrap();
        assert_eq!(shapes(&f), vec![vec![(0, 1), (0, 2)]]);
        let groups: Vec<_> = f.groups().collect();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].kind, GroupKind::SharedControl(0));
    }

    #[test]
    fn rz_on_control_blocks_conservative() {
        let b = explicit(vec![
            vec![cx(0, 1)],
            vec![Instruction::single(GateKind::Rz(0.3), 0)],
            vec![cx(0, 2)],
        ]);
        let f = forward_sweep(&b, Mode::Conservative).unwrap();
        assert_eq!(f.groups().count(), 0);
        assert_eq!(f.flatten(), b.flatten());
    }

    #[test]
    fn two_hubs_merge_in_one_bucket() {
        let b = explicit(vec![vec![cx(0, 1), cx(2, 3)], vec![cx(0, 4), cx(2, 5)]]);
        let f = forward_sweep(&b, Mode::Conservative).unwrap();
        assert_eq!(remove_empty(&f).bucket_count(), 1);
        let kinds: Vec<_> = f.groups().map(|g| g.kind).collect();
        assert_eq!(
            kinds,
            vec![GroupKind::SharedControl(0), GroupKind::SharedControl(2)]
        );
    }

    #[test]
    fn bucket_atomicity_blocks_partial_moves() {
        // (3,4) is pinned behind H(3), so (0,2) may not leave without it
        let b = explicit(vec![
            vec![cx(0, 1), Instruction::single(GateKind::H, 3)],
            vec![cx(0, 2), cx(3, 4)],
        ]);
        let f = forward_sweep(&b, Mode::Conservative).unwrap();
        assert_eq!(f.groups().count(), 0);
        // ...but the earlier bucket can move later as a whole
        let back = backward_sweep(&f, Mode::Conservative).unwrap();
        assert_eq!(shapes(&back), vec![vec![], vec![(0, 2), (3, 4), (0, 1)]]);
        let g: Vec<_> = back.groups().collect();
        assert_eq!(g[0].kind, GroupKind::SharedControl(0));
    }

    #[test]
    fn sweeps_are_fixpoints_on_merged_and_single_buckets() {
        let b = explicit(vec![vec![cx(0, 1)], vec![cx(0, 2)]]);
        let once = forward_sweep(&b, Mode::Conservative).unwrap();
        let merged = remove_empty(&once);
        let again = backward_sweep(&merged, Mode::Conservative).unwrap();
        assert_eq!(again.flatten(), merged.flatten());
        let single = explicit(vec![vec![cx(0, 1), cx(2, 3)]]);
        assert_eq!(backward_sweep(&single, Mode::Conservative).unwrap().flatten(), single.flatten());
    }

    #[test]
    fn relaxed_passes_commuting_gates() {
        let b = explicit(vec![
            vec![cx(0, 1)],
            vec![Instruction::single(GateKind::Rz(0.3), 0)],
            vec![cx(0, 2)],
        ]);
        let r = commuting_moves(&b).unwrap();
        let g: Vec<_> = r.groups().collect();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].len(), 2);
        // the rz now follows the group
        assert_eq!(r.flatten(), vec![InstrId(0), InstrId(2), InstrId(1)]);
    }

    #[test]
    fn relaxed_respects_commutation_table() {
        let x_on_target = explicit(vec![
            vec![cx(0, 1)],
            vec![Instruction::single(GateKind::X, 1)],
            vec![cx(0, 2)],
        ]);
        // X(1) sits on the first CNOT's target; the second CNOT does not touch 1
        // and passes it as an independent bucket, reaching the shared control.
        let r = commuting_moves(&x_on_target).unwrap();
        assert_eq!(r.groups().count(), 1);
        let h_between = explicit(vec![
            vec![cx(0, 1)],
            vec![Instruction::single(GateKind::H, 0)],
            vec![cx(0, 2)],
        ]);
        assert_eq!(commuting_moves(&h_between).unwrap().groups().count(), 0);
        assert!(!commutes_with_cnot(GateKind::X, true));
        assert!(commutes_with_cnot(GateKind::X, false));
        assert!(commutes_with_cnot(GateKind::T, true));
        assert!(!commutes_with_cnot(GateKind::H, true));
    }
}
