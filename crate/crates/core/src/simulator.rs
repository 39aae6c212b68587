//! Dense statevector simulation with exhaustive measurement branching, and
//! the equivalence checker built on it.
//!
//! Only live qubits are stored: a qubit joins the state as `|0⟩` on first
//! use and leaves it after `RESET`. Branches whose states agree up to global
//! phase and whose outcomes agree on every bit still to be read are merged;
//! [`Branch::paths`] counts the raw branches a merged branch stands for.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposer::PhysicalCircuit;
use crate::frontend::LogicalCircuit;
use crate::ir::{Bit, GateKind, Instruction, Qubit, QubitRef, Role};

pub const MAX_LIVE_QUBITS: usize = 16;
pub const FIDELITY_TOLERANCE: f64 = 1e-9;
pub const MAX_LOGICAL_QUBITS: usize = 10;

const PRUNE: f64 = 1e-14;
const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{0} live qubits exceed the simulator limit of {MAX_LIVE_QUBITS}")]
    TooManyQubits(usize),
    #[error("logical circuit has {0} qubits; equivalence checking supports at most {MAX_LOGICAL_QUBITS}")]
    TooManyLogicalQubits(usize),
    #[error("gate `{0}` is not supported by the simulator")]
    Unsupported(&'static str),
    #[error("state dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("EPR generation on a qubit that is not in |0⟩ (instruction #{0})")]
    DirtyEpr(usize),
    #[error("input state lists a qubit twice")]
    DuplicateQubit,
}

/// Amplitudes over an ordered list of qubits; qubit `i` is bit `i` of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<Q> {
    pub qubits: Vec<Q>,
    pub amplitudes: Vec<Complex64>,
}

impl<Q: Qubit> StateVector<Q> {
    /// `|0…0⟩` on no qubits.
    pub fn vacuum() -> Self {
        Self {
            qubits: Vec::new(),
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Computational basis state: bit `i` of `index` is the value of `qubits[i]`.
    pub fn basis(qubits: Vec<Q>, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::default(); 1 << qubits.len()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { qubits, amplitudes }
    }

    pub fn new(qubits: Vec<Q>, amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        if amplitudes.len() != 1 << qubits.len() {
            return Err(SimError::DimensionMismatch(amplitudes.len(), 1 << qubits.len()));
        }
        let unique: HashSet<_> = qubits.iter().collect();
        if unique.len() != qubits.len() {
            return Err(SimError::DuplicateQubit);
        }
        Ok(Self { qubits, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn position(&self, q: Q) -> Option<usize> {
        self.qubits.iter().position(|x| *x == q)
    }

    fn ensure(&mut self, q: Q) -> Result<usize, SimError> {
        if let Some(p) = self.position(q) {
            return Ok(p);
        }
        if self.qubits.len() >= MAX_LIVE_QUBITS {
            return Err(SimError::TooManyQubits(self.qubits.len() + 1));
        }
        self.qubits.push(q);
        self.amplitudes.resize(self.amplitudes.len() * 2, Complex64::default());
        Ok(self.qubits.len() - 1)
    }

    /// Probability that qubit at position `p` reads 1.
    fn prob_one(&self, p: usize) -> f64 {
        self.half_weight(p, true)
    }

    /// Unnormalized weight of the `value` half of qubit `p`.
    fn half_weight(&self, p: usize, value: bool) -> f64 {
        let mask = 1 << p;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & mask != 0) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Keep the `value` half of qubit `p` and renormalize.
    fn project(&mut self, p: usize, value: bool, prob: f64) {
        let mask = 1 << p;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if ((i & mask) != 0) == value {
                *a *= scale;
            } else {
                *a = Complex64::default();
            }
        }
    }

    /// Drop qubit `p`, which must be in the definite state `value`.
    fn remove(&mut self, p: usize, value: bool) {
        let mask = 1usize << p;
        let low = mask - 1;
        let half = self.amplitudes.len() / 2;
        let mut out = Vec::with_capacity(half);
        for j in 0..half {
            let i = (j & low) | ((j & !low) << 1) | if value { mask } else { 0 };
            out.push(self.amplitudes[i]);
        }
        self.amplitudes = out;
        self.qubits.remove(p);
    }

    fn apply_1q(&mut self, p: usize, m: [[Complex64; 2]; 2]) {
        let mask = 1 << p;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, c: usize, t: usize) {
        let (cm, tm) = (1 << c, 1 << t);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let m = (1 << a) | (1 << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & m == m {
                *amp = -*amp;
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (am, bm) = (1 << a, 1 << b);
        for i in 0..self.amplitudes.len() {
            if i & am != 0 && i & bm == 0 {
                self.amplitudes.swap(i, (i & !am) | bm);
            }
        }
    }

    /// Amplitudes re-indexed to the order of `order`, which must be a
    /// permutation of the live qubits.
    pub fn reordered(&self, order: &[Q]) -> Option<Vec<Complex64>> {
        if order.len() != self.qubits.len() {
            return None;
        }
        let pos: Vec<usize> = order
            .iter()
            .map(|q| self.position(*q))
            .collect::<Option<Vec<_>>>()?;
        let mut out = vec![Complex64::default(); self.amplitudes.len()];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut i = 0;
            for (k, p) in pos.iter().enumerate() {
                if j & (1 << k) != 0 {
                    i |= 1 << p;
                }
            }
            *slot = self.amplitudes[i];
        }
        Some(out)
    }
}

/// One measurement history and the state it leaves behind.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch<Q> {
    /// Outcomes in measurement order. For a merged branch, those of its
    /// first representative.
    pub outcomes: Vec<(Bit, bool)>,
    pub state: StateVector<Q>,
    pub probability: f64,
    pub paths: usize,
}

impl<Q: Qubit> Branch<Q> {
    fn bit(&self, b: Bit) -> bool {
        self.outcomes
            .iter()
            .rev()
            .find(|(x, _)| *x == b)
            .is_some_and(|(_, v)| *v)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(kind: GateKind) -> Option<[[Complex64; 2]; 2]> {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::H => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
        GateKind::X => [[o, l], [l, o]],
        GateKind::Y => [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
        GateKind::Z => [[l, o], [o, -l]],
        GateKind::S => [[l, o], [o, c(0.0, 1.0)]],
        GateKind::Sdg => [[l, o], [o, c(0.0, -1.0)]],
        GateKind::T => [[l, o], [o, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[l, o], [o, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        GateKind::Rz(t) => [
            [Complex64::from_polar(1.0, -t / 2.0), o],
            [o, Complex64::from_polar(1.0, t / 2.0)],
        ],
        GateKind::Rx(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        GateKind::Ry(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        _ => return None,
    })
}

/// For each instruction index, the bits read at or after it.
fn future_reads<Q: Qubit>(instrs: &[Instruction<Q>]) -> Vec<HashSet<Bit>> {
    let mut out = vec![HashSet::new(); instrs.len() + 1];
    for i in (0..instrs.len()).rev() {
        let mut s = out[i + 1].clone();
        s.extend(instrs[i].reads().iter().copied());
        out[i] = s;
    }
    out
}

/// Overlap `|⟨a|b⟩|²`. Inputs are expected to be normalized.
pub fn state_fidelity(a: &[Complex64], b: &[Complex64]) -> Result<f64, SimError> {
    if a.len() != b.len() {
        return Err(SimError::DimensionMismatch(a.len(), b.len()));
    }
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    Ok(inner.norm_sqr())
}

fn merge<Q: Qubit>(branches: Vec<Branch<Q>>, live_bits: &HashSet<Bit>) -> Vec<Branch<Q>> {
    let mut out: Vec<Branch<Q>> = Vec::with_capacity(branches.len());
    'next: for b in branches {
        for kept in out.iter_mut() {
            if kept.state.qubits != b.state.qubits {
                continue;
            }
            if live_bits.iter().any(|bit| kept.bit(*bit) != b.bit(*bit)) {
                continue;
            }
            let f = state_fidelity(&kept.state.amplitudes, &b.state.amplitudes).unwrap_or(0.0);
            if f >= 1.0 - MERGE_TOLERANCE {
                kept.probability += b.probability;
                kept.paths = kept.paths.saturating_add(b.paths);
                continue 'next;
            }
        }
        out.push(b);
    }
    out
}

/// Split `branch` on the value of qubit `p`; outcome 0 comes first.
fn fork<Q: Qubit>(branch: Branch<Q>, p: usize) -> Vec<(Branch<Q>, bool)> {
    // halves are weighed separately so each child is renormalized exactly
    let p0 = branch.state.half_weight(p, false);
    let p1 = branch.state.half_weight(p, true);
    let total = p0 + p1;
    let mut out = Vec::with_capacity(2);
    for (value, half) in [(false, p0), (true, p1)] {
        let pv = half / total;
        // absolute weight: products of conditionals otherwise keep rounding noise alive
        if pv <= PRUNE || branch.probability * pv <= PRUNE {
            continue;
        }
        let mut b = branch.clone();
        b.state.project(p, value, half);
        b.probability *= pv;
        out.push((b, value));
    }
    out
}

/// Run `instrs` on `input`, enumerating every measurement branch.
pub fn simulate<Q: Qubit>(instrs: &[Instruction<Q>], input: &StateVector<Q>) -> Result<Vec<Branch<Q>>, SimError> {
    if input.qubits.len() > MAX_LIVE_QUBITS {
        return Err(SimError::TooManyQubits(input.qubits.len()));
    }
    let future = future_reads(instrs);
    let mut branches = vec![Branch {
        outcomes: Vec::new(),
        state: input.clone(),
        probability: 1.0,
        paths: 1,
    }];
    for (idx, instr) in instrs.iter().enumerate() {
        let mut next = Vec::with_capacity(branches.len());
        let mut forked = false;
        for mut b in branches {
            if let Some(cond) = &instr.condition {
                if !cond.holds(|bit| b.bit(bit)) {
                    next.push(b);
                    continue;
                }
            }
            match instr.kind {
                GateKind::Barrier => next.push(b),
                GateKind::MeasureZ | GateKind::MeasureX => {
                    forked = true;
                    let p = b.state.ensure(instr.operands[0])?;
                    let is_x = instr.kind == GateKind::MeasureX;
                    let h = matrix(GateKind::H).expect("h");
                    if is_x {
                        b.state.apply_1q(p, h);
                    }
                    for (mut child, value) in fork(b, p) {
                        if is_x {
                            child.state.apply_1q(p, h);
                        }
                        if let Some(bit) = instr.writes {
                            child.outcomes.push((bit, value));
                        }
                        next.push(child);
                    }
                }
                GateKind::Reset => {
                    let q = instr.operands[0];
                    match b.state.position(q) {
                        None => next.push(b),
                        Some(p) => {
                            let mut children: Vec<Branch<Q>> = fork(b, p)
                                .into_iter()
                                .map(|(mut child, value)| {
                                    child.state.remove(p, value);
                                    child
                                })
                                .collect();
                            // removing a qubit can make sibling branches mergeable
                            forked = true;
                            // an unentangled qubit leaves identical halves: no real fork
                            if let [a, b] = children.as_slice() {
                                let f = state_fidelity(&a.state.amplitudes, &b.state.amplitudes)?;
                                if f >= 1.0 - MERGE_TOLERANCE {
                                    let half = children.pop().expect("two children");
                                    children[0].probability += half.probability;
                                }
                            }
                            next.extend(children);
                        }
                    }
                }
                GateKind::Epr => {
                    for q in &instr.operands {
                        if let Some(p) = b.state.position(*q) {
                            if b.state.prob_one(p) > PRUNE {
                                return Err(SimError::DirtyEpr(idx));
                            }
                        }
                    }
                    let a = b.state.ensure(instr.operands[0])?;
                    let t = b.state.ensure(instr.operands[1])?;
                    b.state.apply_1q(a, matrix(GateKind::H).expect("h"));
                    b.state.apply_cnot(a, t);
                    next.push(b);
                }
                kind => {
                    let pos = instr
                        .operands
                        .iter()
                        .map(|q| b.state.ensure(*q))
                        .collect::<Result<Vec<_>, _>>()?;
                    match kind {
                        GateKind::Cnot => b.state.apply_cnot(pos[0], pos[1]),
                        GateKind::Cz => b.state.apply_cz(pos[0], pos[1]),
                        GateKind::Swap => b.state.apply_swap(pos[0], pos[1]),
                        k => {
                            let m = matrix(k).ok_or(SimError::Unsupported(k.mnemonic()))?;
                            b.state.apply_1q(pos[0], m);
                        }
                    }
                    next.push(b);
                }
            }
        }
        branches = if forked { merge(next, &future[idx + 1]) } else { next };
    }
    Ok(branches)
}

/// Description of an input that failed the check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailingInput {
    pub input: String,
    pub outcomes: Vec<(Bit, bool)>,
    pub fidelity: f64,
    pub detail: String,
}

impl fmt::Display for FailingInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcomes: Vec<String> = self
            .outcomes
            .iter()
            .map(|(b, v)| format!("c{b}={}", u8::from(*v)))
            .collect();
        write!(
            f,
            "input {} branch [{}]: fidelity {:.12} ({})",
            self.input,
            outcomes.join(","),
            self.fidelity,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub worst_fidelity: f64,
    /// Largest number of raw measurement branches seen for one input.
    pub branch_count: usize,
    pub inputs_checked: usize,
    pub failing_input: Option<FailingInput>,
}

/// Inputs for [`check_equivalence`] beyond the basis states.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceOptions {
    pub random_states: usize,
    pub seed: u64,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        Self {
            random_states: 20,
            seed: 0,
        }
    }
}

/// Haar-like random state from normalized complex Gaussians.
pub fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

struct InputOutcome {
    worst: f64,
    paths: usize,
    failure: Option<FailingInput>,
}

fn check_one(
    unitary: &[Instruction],
    physical: &[Instruction<QubitRef>],
    data: &[QubitRef],
    label: String,
    amps: Vec<Complex64>,
) -> Result<InputOutcome, SimError> {
    let n = data.len();
    let logical_in = StateVector::new((0..n).collect(), amps.clone())?;
    let reference = simulate(unitary, &logical_in)?;
    let reference = reference[0]
        .state
        .reordered(&(0..n).collect::<Vec<_>>())
        .expect("logical qubits stay live");

    let branches = simulate(physical, &StateVector::new(data.to_vec(), amps)?)?;
    let mut out = InputOutcome {
        worst: 1.0,
        paths: branches.iter().fold(0usize, |n, b| n.saturating_add(b.paths)),
        failure: None,
    };
    for b in branches {
        let mut s = b.state.clone();
        let mut detail = String::from("data state differs");
        let mut clean = true;
        for q in s.qubits.clone() {
            if data.contains(&q) {
                continue;
            }
            let p = s.position(q).expect("live");
            if s.prob_one(p) > FIDELITY_TOLERANCE {
                clean = false;
                detail = format!("ancilla {} is not returned to |0⟩", qubit_label(q));
                break;
            }
            s.remove(p, false);
        }
        for q in data {
            s.ensure(*q)?;
        }

        let fidelity = if clean {
            state_fidelity(&reference, &s.reordered(data).expect("data qubits live"))?
        } else {
            0.0
        };
        if fidelity < out.worst {
            out.worst = fidelity;
            if fidelity < 1.0 - FIDELITY_TOLERANCE {
                out.failure = Some(FailingInput {
                    input: label.clone(),
                    outcomes: b.outcomes.clone(),
                    fidelity,
                    detail,
                });
            }
        }
    }
    Ok(out)
}

fn qubit_label(q: QubitRef) -> String {
    q.to_string()
}

/// Compare a compiled circuit against its logical source on every basis
/// state and `options.random_states` random states.
///
/// The reference is the logical circuit without measurements or barriers;
/// measurements of memory qubits are dropped from the physical circuit. In
/// every branch all non-data qubits must be back in `|0⟩` and the data state
/// must match the reference up to global phase.
pub fn check_equivalence(
    logical: &LogicalCircuit,
    physical: &PhysicalCircuit,
    options: EquivalenceOptions,
) -> Result<EquivalenceReport, SimError> {
    let n = logical.qubit_count;
    if n > MAX_LOGICAL_QUBITS {
        return Err(SimError::TooManyLogicalQubits(n));
    }
    let data: Vec<QubitRef> = physical.placement.slots()[..n].to_vec();
    let unitary = logical.without_measurements();
    let stripped: Vec<Instruction<QubitRef>> = physical
        .instructions
        .iter()
        .filter(|i| !(i.kind.is_measurement() && i.operands[0].role == Role::Memory))
        .cloned()
        .collect();

    let dim = 1usize << n;
    let mut inputs: Vec<(String, Vec<Complex64>)> = (0..dim)
        .map(|i| {
            let bits: String = (0..n).map(|q| if i >> q & 1 == 1 { '1' } else { '0' }).collect();
            (format!("|{bits}⟩"), StateVector::<usize>::basis((0..n).collect(), i).amplitudes)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for k in 0..options.random_states {
        inputs.push((format!("random #{k}"), random_state(dim, &mut rng)));
    }

    let results = inputs
        .into_par_iter()
        .map(|(label, amps)| check_one(&unitary, &stripped, &data, label, amps))
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = EquivalenceReport {
        equivalent: true,
        worst_fidelity: 1.0,
        branch_count: 0,
        inputs_checked: results.len(),
        failing_input: None,
    };
    for r in results {
        report.branch_count = report.branch_count.max(r.paths);
        if r.worst < report.worst_fidelity {
            report.worst_fidelity = r.worst;
        }
        if report.failing_input.is_none() {
            report.failing_input = r.failure;
        }
    }
    report.equivalent = report.worst_fidelity >= 1.0 - FIDELITY_TOLERANCE;
    Ok(report)
}
