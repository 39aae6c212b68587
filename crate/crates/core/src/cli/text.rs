//! Line-oriented text format for physical circuits.
//!
//! ```text
//! topology nodes=3 memory=4
//! place q0 n0.m0
//! bits 4 logical=0
//! block naive_cnot 0 9 gates=1 cost=19
//! epr n0.e0 n1.e0
//! measz n0.e0 -> c0
//! z n0.m0 ?parity(c0,c1)=1
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::decomposer::{Block, BlockKind, PhysicalCircuit};
use crate::ir::{Condition, GateKind, Instruction, NodeTopology, Placement, QubitRef, Role};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct TextError {
    pub line: usize,
    pub msg: String,
}

fn block_name(kind: BlockKind) -> &'static str {
    match kind {
        BlockKind::Local => "local",
        BlockKind::NaiveCnot => "naive_cnot",
        BlockKind::NaiveCz => "naive_cz",
        BlockKind::SharedControl => "shared_control",
        BlockKind::SharedTarget => "shared_target",
    }
}

/// Render one instruction without a trailing newline.
pub fn format_instruction(i: &Instruction<QubitRef>) -> String {
    let mut s = String::from(i.kind.mnemonic());
    if let Some(a) = i.kind.angle() {
        let _ = write!(s, "({a:?})");
    }
    for q in &i.operands {
        let _ = write!(s, " {q}");
    }
    if let Some(b) = i.writes {
        let _ = write!(s, " -> c{b}");
    }
    if let Some(c) = &i.condition {
        let bits: Vec<String> = c.bits.iter().map(|b| format!("c{b}")).collect();
        let _ = write!(s, " ?parity({})={}", bits.join(","), u8::from(c.parity));
    }
    s
}

pub fn emit_physical(circuit: &PhysicalCircuit) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "topology nodes={} memory={}",
        circuit.topology.node_count(),
        circuit.topology.memory_per_node()
    );
    for (i, q) in circuit.placement.slots().iter().enumerate() {
        let _ = writeln!(s, "place q{i} {q}");
    }
    let _ = writeln!(
        s,
        "bits {} logical={}",
        circuit.classical_bit_count, circuit.logical_bit_count
    );
    for b in &circuit.blocks {
        let _ = writeln!(
            s,
            "block {} {} {} gates={} cost={}",
            block_name(b.kind),
            b.start,
            b.end,
            b.gates,
            b.cost
        );
    }
    for i in &circuit.instructions {
        s.push_str(&format_instruction(i));
        s.push('\n');
    }
    s
}

struct Reader {
    line: usize,
}

impl Reader {
    fn err(&self, msg: impl Into<String>) -> TextError {
        TextError {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T, TextError> {
        s.parse().map_err(|_| self.err(format!("expected a number, found `{s}`")))
    }

    fn keyed<T: std::str::FromStr>(&self, s: &str, key: &str) -> Result<T, TextError> {
        let v = s
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| self.err(format!("expected `{key}=`, found `{s}`")))?;
        self.num(v)
    }

    fn bit(&self, s: &str) -> Result<usize, TextError> {
        let v = s
            .strip_prefix('c')
            .ok_or_else(|| self.err(format!("expected a bit `c<k>`, found `{s}`")))?;
        self.num(v)
    }

    fn qubit(&self, s: &str) -> Result<QubitRef, TextError> {
        let bad = || self.err(format!("expected a qubit `n<node>.<e|m><index>`, found `{s}`"));
        let rest = s.strip_prefix('n').ok_or_else(bad)?;
        let (node, local) = rest.split_once('.').ok_or_else(bad)?;
        let node = node.parse().map_err(|_| bad())?;
        let (role, idx) = match local.split_at_checked(1).ok_or_else(bad)? {
            ("e", i) => (Role::Communication, i),
            ("m", i) => (Role::Memory, i),
            _ => return Err(bad()),
        };
        Ok(QubitRef {
            node,
            role,
            index: idx.parse().map_err(|_| bad())?,
        })
    }

    fn kind(&self, word: &str) -> Result<GateKind, TextError> {
        let (name, angle) = match word.split_once('(') {
            Some((n, rest)) => {
                let a = rest
                    .strip_suffix(')')
                    .ok_or_else(|| self.err("unterminated angle"))?;
                (n, Some(self.num::<f64>(a)?))
            }
            None => (word, None),
        };
        let k = match (name, angle) {
            ("h", None) => GateKind::H,
            ("x", None) => GateKind::X,
            ("y", None) => GateKind::Y,
            ("z", None) => GateKind::Z,
            ("s", None) => GateKind::S,
            ("sdg", None) => GateKind::Sdg,
            ("t", None) => GateKind::T,
            ("tdg", None) => GateKind::Tdg,
            ("rz", Some(a)) => GateKind::Rz(a),
            ("rx", Some(a)) => GateKind::Rx(a),
            ("ry", Some(a)) => GateKind::Ry(a),
            ("cnot", None) => GateKind::Cnot,
            ("cz", None) => GateKind::Cz,
            ("swap", None) => GateKind::Swap,
            ("measz", None) => GateKind::MeasureZ,
            ("measx", None) => GateKind::MeasureX,
            ("reset", None) => GateKind::Reset,
            ("epr", None) => GateKind::Epr,
            ("barrier", None) => GateKind::Barrier,
            _ => return Err(self.err(format!("unknown instruction `{word}`"))),
        };
        Ok(k)
    }

    fn instruction(&self, line: &str) -> Result<Instruction<QubitRef>, TextError> {
        let (body, condition) = match line.split_once(" ?") {
            Some((b, c)) => (b, Some(self.condition(c)?)),
            None => (line, None),
        };
        let (body, writes) = match body.split_once(" -> ") {
            Some((b, w)) => (b, Some(self.bit(w.trim())?)),
            None => (body, None),
        };
        let mut words = body.split_whitespace();
        let kind = self.kind(words.next().ok_or_else(|| self.err("empty instruction"))?)?;
        let operands = words.map(|w| self.qubit(w)).collect::<Result<Vec<_>, _>>()?;
        Ok(Instruction {
            kind,
            operands,
            writes,
            condition,
        })
    }

    fn condition(&self, s: &str) -> Result<Condition, TextError> {
        let inner = s
            .strip_prefix("parity(")
            .ok_or_else(|| self.err("expected `?parity(...)`"))?;
        let (bits, parity) = inner
            .split_once(")=")
            .ok_or_else(|| self.err("expected `)=<0|1>`"))?;
        let bits = if bits.is_empty() {
            Vec::new()
        } else {
            bits.split(',').map(|b| self.bit(b)).collect::<Result<_, _>>()?
        };
        let parity = match parity.trim() {
            "0" => false,
            "1" => true,
            p => return Err(self.err(format!("parity must be 0 or 1, found `{p}`"))),
        };
        Ok(Condition { bits, parity })
    }

    fn block(&self, words: &[&str]) -> Result<Block, TextError> {
        let [kind, start, end, gates, cost] = words else {
            return Err(self.err("malformed block line"));
        };
        let kind = match *kind {
            "local" => BlockKind::Local,
            "naive_cnot" => BlockKind::NaiveCnot,
            "naive_cz" => BlockKind::NaiveCz,
            "shared_control" => BlockKind::SharedControl,
            "shared_target" => BlockKind::SharedTarget,
            k => return Err(self.err(format!("unknown block kind `{k}`"))),
        };
        Ok(Block {
            kind,
            start: self.num(start)?,
            end: self.num(end)?,
            gates: self.keyed(gates, "gates")?,
            cost: self.keyed(cost, "cost")?,
        })
    }
}

/// Parse the output of [`emit_physical`].
pub fn read_physical(text: &str) -> Result<PhysicalCircuit, TextError> {
    let mut r = Reader { line: 0 };
    let mut topology = None;
    let mut slots = Vec::new();
    let mut bits = None;
    let mut blocks = Vec::new();
    let mut instructions = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        r.line = n + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "topology" => {
                let [_, nodes, memory] = words.as_slice() else {
                    return Err(r.err("malformed topology line"));
                };
                let t = NodeTopology::new(r.keyed(nodes, "nodes")?, r.keyed(memory, "memory")?)
                    .map_err(|e| r.err(e.to_string()))?;
                topology = Some(t);
            }
            "place" => {
                let [_, q, p] = words.as_slice() else {
                    return Err(r.err("malformed place line"));
                };
                let idx: usize = r.num(q.strip_prefix('q').ok_or_else(|| r.err("expected `q<i>`"))?)?;
                if idx != slots.len() {
                    return Err(r.err("placements must be listed in order"));
                }
                slots.push(r.qubit(p)?);
            }
            "bits" => {
                let [_, total, logical] = words.as_slice() else {
                    return Err(r.err("malformed bits line"));
                };
                bits = Some((r.num::<usize>(total)?, r.keyed::<usize>(logical, "logical")?));
            }
            "block" => blocks.push(r.block(&words[1..])?),
            _ => instructions.push(r.instruction(line)?),
        }
    }
    r.line = 0;
    let topology = topology.ok_or_else(|| r.err("missing topology header"))?;
    let (classical_bit_count, logical_bit_count) = bits.ok_or_else(|| r.err("missing bits header"))?;
    let placement = Placement::new(slots).map_err(|e| r.err(e.to_string()))?;
    Ok(PhysicalCircuit {
        instructions,
        logical_bit_count,
        classical_bit_count,
        topology,
        placement,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_shapes() {
        let reset = Instruction::single(GateKind::Reset, QubitRef::comm(1));
        assert_eq!(format_instruction(&reset), "reset n1.e0");
        let z = Instruction::single(GateKind::Z, QubitRef::memory(0, 0))
            .with_condition(Condition::parity_of(vec![0, 1]));
        assert_eq!(format_instruction(&z), "z n0.m0 ?parity(c0,c1)=1");
        let m = Instruction::measure_z(QubitRef::comm(0), 3);
        assert_eq!(format_instruction(&m), "measz n0.e0 -> c3");
        let epr = Instruction::new(GateKind::Epr, vec![QubitRef::comm(0), QubitRef::comm(2)]);
        assert_eq!(format_instruction(&epr), "epr n0.e0 n2.e0");
    }

    #[test]
    fn reader_parses_each_line_shape() {
        let r = Reader { line: 1 };
        for line in [
            "reset n1.e0",
            "z n0.m0 ?parity(c0,c1)=1",
            "measz n0.e0 -> c3",
            "rz(-0.125) n2.m3",
            "barrier",
        ] {
            assert_eq!(format_instruction(&r.instruction(line).unwrap()), line);
        }
        assert!(r.instruction("ccx n0.m0").is_err());
        assert!(r.qubit("n0.q1").is_err());
    }

    #[test]
    fn missing_header_is_reported() {
        assert!(read_physical("h n0.m0\n").is_err());
    }
}
