//! Bernstein-Vazirani, Deutsch-Jozsa and seeded structured random circuits.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::LogicalCircuit;
use crate::ir::{GateKind, Instruction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least {min} qubits, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("bit string `{0}` has the wrong length or non-binary characters")]
    BadBitString(String),
    #[error("balanced oracle mask must have at least one set bit")]
    EmptyMask,
    #[error("gate count must be positive")]
    NoGates,
}

fn parse_bits(s: &str, n: usize) -> Result<Vec<bool>, GenError> {
    if s.len() != n || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(GenError::BadBitString(s.to_string()));
    }
    Ok(s.chars().map(|c| c == '1').collect())
}

/// The shared H / ancilla frame around an oracle of CNOTs into qubit `n`.
fn phase_oracle_frame(n: usize, oracle: Vec<Instruction>) -> Vec<Instruction> {
    let mut v: Vec<Instruction> = (0..n).map(|q| Instruction::single(GateKind::H, q)).collect();
    v.push(Instruction::single(GateKind::X, n));
    v.push(Instruction::single(GateKind::H, n));
    v.extend(oracle);
    v.extend((0..n).map(|q| Instruction::single(GateKind::H, q)));
    v.extend((0..n).map(|q| Instruction::measure_z(q, q)));
    v
}

/// Bernstein-Vazirani over `n` data qubits plus one ancilla. Character `i`
/// of `secret` is the hidden bit of qubit `i`.
pub fn gen_bv(n: usize, secret: &str) -> Result<LogicalCircuit, GenError> {
    if n == 0 {
        return Err(GenError::TooFewQubits { min: 1, got: 0 });
    }
    let bits = parse_bits(secret, n)?;
    let oracle = bits
        .iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| Instruction::cnot(i, n))
        .collect();
    Ok(LogicalCircuit::new(
        format!("bv_{n}_{secret}"),
        n + 1,
        phase_oracle_frame(n, oracle),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DjOracle {
    Constant0,
    Constant1,
    /// Parity of the masked input bits.
    Balanced(String),
}

/// Deutsch-Jozsa over `n` data qubits plus one ancilla.
pub fn gen_dj(n: usize, oracle: &DjOracle) -> Result<LogicalCircuit, GenError> {
    if n == 0 {
        return Err(GenError::TooFewQubits { min: 1, got: 0 });
    }
    let (tag, gates) = match oracle {
        DjOracle::Constant0 => ("const0".to_string(), Vec::new()),
        DjOracle::Constant1 => ("const1".to_string(), vec![Instruction::single(GateKind::X, n)]),
        DjOracle::Balanced(mask) => {
            let bits = parse_bits(mask, n)?;
            if !bits.iter().any(|b| *b) {
                return Err(GenError::EmptyMask);
            }
            let gates = bits
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(i, _)| Instruction::cnot(i, n))
                .collect();
            (format!("bal{mask}"), gates)
        }
    };
    Ok(LogicalCircuit::new(
        format!("dj_{n}_{tag}"),
        n + 1,
        phase_oracle_frame(n, gates),
    ))
}

/// Structure knob of the random generator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Uniform,
    FanoutHeavy,
    FaninHeavy,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Uniform, Pattern::FanoutHeavy, Pattern::FaninHeavy];

    pub fn name(&self) -> &'static str {
        match self {
            Pattern::Uniform => "uniform",
            Pattern::FanoutHeavy => "fanout_heavy",
            Pattern::FaninHeavy => "fanin_heavy",
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Pattern::Uniform),
            "fanout_heavy" | "fanout" => Ok(Pattern::FanoutHeavy),
            "fanin_heavy" | "fanin" => Ok(Pattern::FaninHeavy),
            _ => Err(format!("unknown pattern `{s}`")),
        }
    }
}

const RUN_PROBABILITY: f64 = 0.3;
const INTERRUPT_PROBABILITY: f64 = 0.2;

fn random_single(rng: &mut ChaCha8Rng) -> GateKind {
    let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    match rng.random_range(0..11) {
        0 => GateKind::H,
        1 => GateKind::X,
        2 => GateKind::Y,
        3 => GateKind::Z,
        4 => GateKind::S,
        5 => GateKind::Sdg,
        6 => GateKind::T,
        7 => GateKind::Tdg,
        8 => GateKind::Rz(angle),
        9 => GateKind::Rx(angle),
        _ => GateKind::Ry(angle),
    }
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Instruction {
    let roll: f64 = rng.random();
    if roll < 0.3 {
        let pair = sample(rng, n, 2);
        Instruction::cnot(pair.index(0), pair.index(1))
    } else if roll < 0.38 {
        let pair = sample(rng, n, 2);
        Instruction::cz(pair.index(0), pair.index(1))
    } else {
        Instruction::single(random_single(rng), rng.random_range(0..n))
    }
}

/// Gate that commutes with a CNOT when placed on the given role.
fn commuting_interrupt(rng: &mut ChaCha8Rng, on_control: bool) -> GateKind {
    let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    match (on_control, rng.random_range(0..3)) {
        (true, 0) => GateKind::Rz(angle),
        (true, 1) => GateKind::T,
        (true, _) => GateKind::S,
        (false, 0) => GateKind::X,
        (false, _) => GateKind::Rx(angle),
    }
}

/// Seeded random circuit of exactly `gate_count` unitary gates.
///
/// `FanoutHeavy` and `FaninHeavy` splice in runs of three to five CNOTs that
/// share a control (resp. target), occasionally interrupted by a gate that
/// commutes with the shared role.
pub fn gen_random(
    n: usize,
    gate_count: usize,
    seed: u64,
    pattern: Pattern,
) -> Result<LogicalCircuit, GenError> {
    if n < 2 {
        return Err(GenError::TooFewQubits { min: 2, got: n });
    }
    if gate_count == 0 {
        return Err(GenError::NoGates);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Instruction> = Vec::with_capacity(gate_count);
    while out.len() < gate_count {
        let run = pattern != Pattern::Uniform && n >= 3 && rng.random_bool(RUN_PROBABILITY);
        if !run {
            out.push(random_gate(&mut rng, n));
            continue;
        }
        let len = rng.random_range(3..=5).min(n - 1);
        let picks = sample(&mut rng, n, len + 1);
        let hub = picks.index(0);
        for k in 1..=len {
            if out.len() >= gate_count {
                break;
            }
            let spoke = picks.index(k);
            out.push(match pattern {
                Pattern::FanoutHeavy => Instruction::cnot(hub, spoke),
                _ => Instruction::cnot(spoke, hub),
            });
            if k < len && out.len() < gate_count && rng.random_bool(INTERRUPT_PROBABILITY) {
                let on_control = pattern == Pattern::FanoutHeavy;
                out.push(Instruction::single(commuting_interrupt(&mut rng, on_control), hub));
            }
        }
    }
    Ok(LogicalCircuit::new(
        format!("random_{}_{n}_{gate_count}_{seed}", pattern.name()),
        n,
        out,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bv_secret_bits_become_shared_target_cnots() {
        let c = gen_bv(3, "101").unwrap();
        let cnots: Vec<_> = c.instructions.iter().filter(|i| i.is_cnot()).cloned().collect();
        assert_eq!(cnots, vec![Instruction::cnot(0, 3), Instruction::cnot(2, 3)]);
        assert_eq!(gen_bv(2, "00").unwrap().cnot_count(), 0);
        assert!(gen_bv(3, "11").is_err());
    }

    #[test]
    fn dj_balanced_and_constant() {
        let c = gen_dj(2, &DjOracle::Balanced("11".into())).unwrap();
        let cnots: Vec<_> = c.instructions.iter().filter(|i| i.is_cnot()).cloned().collect();
        assert_eq!(cnots, vec![Instruction::cnot(0, 2), Instruction::cnot(1, 2)]);
        assert_eq!(
            gen_dj(2, &DjOracle::Balanced("00".into())),
            Err(GenError::EmptyMask)
        );
        assert_eq!(gen_dj(3, &DjOracle::Constant0).unwrap().cnot_count(), 0);
    }

    #[test]
    fn random_is_deterministic_and_exact() {
        for p in Pattern::ALL {
            let a = gen_random(6, 100, 7, p).unwrap();
            assert_eq!(a, gen_random(6, 100, 7, p).unwrap());
            assert_eq!(a.instructions.len(), 100);
            assert!(a.validate().is_ok());
        }
        assert_eq!(gen_random(4, 1, 3, Pattern::Uniform).unwrap().instructions.len(), 1);
    }
}
