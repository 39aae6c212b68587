//! OpenQASM 2.0 reader and writer for the logical gate subset.
//!
//! Supported statements: the version header, `include`, `qreg`/`creg`,
//! the gates `h x y z s sdg t tdg rz rx ry cx cz swap`, `measure` and
//! `barrier`. Registers are flattened into one index space in declaration
//! order. `swap` becomes three `cx`. Register arguments broadcast.

use std::fmt::Write as _;

use thiserror::Error;

use super::LogicalCircuit;
use crate::ir::{GateKind, Instruction};

#[derive(Debug, Error, PartialEq)]
pub enum QasmError {
    #[error("line {line}, column {col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: unsupported gate `{name}`")]
    UnsupportedGate { name: String, line: usize, col: usize },
    #[error("index {index} overflows register `{register}` of size {size} (line {line}, column {col})")]
    RegisterOverflow {
        register: String,
        index: usize,
        size: usize,
        line: usize,
        col: usize,
    },
}

impl QasmError {
    pub fn line(&self) -> usize {
        match self {
            QasmError::Syntax { line, .. }
            | QasmError::UnsupportedGate { line, .. }
            | QasmError::RegisterOverflow { line, .. } => *line,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let bump = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            bump(1, &mut i, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let value = text.parse::<f64>().map_err(|_| QasmError::Syntax {
                line: l0,
                col: c0,
                msg: format!("bad number `{text}`"),
            })?;
            out.push(Spanned {
                tok: Tok::Number(value),
                line: l0,
                col: c0,
            });
        } else if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(QasmError::Syntax {
                    line: l0,
                    col: c0,
                    msg: "unterminated string".into(),
                });
            }
            out.push(Spanned {
                tok: Tok::Str(chars[start..j].iter().collect()),
                line: l0,
                col: c0,
            });
            col += j + 1 - i;
            i = j + 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            bump(2, &mut i, &mut col);
            out.push(Spanned {
                tok: Tok::Arrow,
                line: l0,
                col: c0,
            });
        } else if "[](),;+-*/^{}".contains(c) {
            bump(1, &mut i, &mut col);
            out.push(Spanned {
                tok: Tok::Sym(c),
                line: l0,
                col: c0,
            });
        } else {
            return Err(QasmError::Syntax {
                line: l0,
                col: c0,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

/// One gate argument: a whole register or a single element.
enum Arg {
    Whole { offset: usize, size: usize },
    One(usize),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    qubits: usize,
    bits: usize,
    instrs: Vec<Instruction>,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(QasmError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Spanned { tok: Tok::Sym(s), .. }) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), QasmError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => {
                self.pos += 1;
                Ok((s, line, col))
            }
            _ => self.err("expected identifier"),
        }
    }

    fn integer(&mut self) -> Result<usize, QasmError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Number(v),
                ..
            }) if v >= 0.0 && v.fract() == 0.0 => {
                self.pos += 1;
                Ok(v as usize)
            }
            _ => self.err("expected non-negative integer"),
        }
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_sym('^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Number(v),
                ..
            }) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Spanned {
                tok: Tok::Ident(s),
                ..
            }) if s == "pi" => {
                self.pos += 1;
                Ok(std::f64::consts::PI)
            }
            Some(Spanned {
                tok: Tok::Sym('('),
                ..
            }) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            _ => self.err("expected expression"),
        }
    }

    fn arg(&mut self, quantum: bool) -> Result<Arg, QasmError> {
        let (name, line, col) = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let Some(reg) = regs.iter().find(|r| r.name == name) else {
            return Err(QasmError::Syntax {
                line,
                col,
                msg: format!("undeclared register `{name}`"),
            });
        };
        let (offset, size) = (reg.offset, reg.size);
        if self.eat_sym('[') {
            let (iline, icol) = self.here();
            let index = self.integer()?;
            self.expect_sym(']')?;
            if index >= size {
                return Err(QasmError::RegisterOverflow {
                    register: name,
                    index,
                    size,
                    line: iline,
                    col: icol,
                });
            }
            Ok(Arg::One(offset + index))
        } else {
            Ok(Arg::Whole { offset, size })
        }
    }

    fn arg_list(&mut self) -> Result<Vec<Arg>, QasmError> {
        let mut args = vec![self.arg(true)?];
        while self.eat_sym(',') {
            args.push(self.arg(true)?);
        }
        Ok(args)
    }

    /// Expand register broadcasting into per-call operand lists.
    fn broadcast(&self, args: &[Arg]) -> Result<Vec<Vec<usize>>, QasmError> {
        let mut width: Option<usize> = None;
        for a in args {
            if let Arg::Whole { size, .. } = a {
                if width.is_some_and(|w| w != *size) {
                    return self.err("register arguments differ in size");
                }
                width = Some(*size);
            }
        }
        let calls = width.unwrap_or(1);
        Ok((0..calls)
            .map(|k| {
                args.iter()
                    .map(|a| match a {
                        Arg::Whole { offset, .. } => offset + k,
                        Arg::One(q) => *q,
                    })
                    .collect()
            })
            .collect())
    }

    fn declare(&mut self, quantum: bool) -> Result<(), QasmError> {
        let (name, line, col) = self.ident()?;
        self.expect_sym('[')?;
        let size = self.integer()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        let taken = self
            .qregs
            .iter()
            .chain(self.cregs.iter())
            .any(|r| r.name == name);
        if taken {
            return Err(QasmError::Syntax {
                line,
                col,
                msg: format!("register `{name}` declared twice"),
            });
        }
        if quantum {
            self.qregs.push(Register {
                name,
                offset: self.qubits,
                size,
            });
            self.qubits += size;
        } else {
            self.cregs.push(Register {
                name,
                offset: self.bits,
                size,
            });
            self.bits += size;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let (word, line, col) = self.ident()?;
        match word.as_str() {
            "OPENQASM" => {
                match self.next() {
                    Some(Spanned {
                        tok: Tok::Number(2.0),
                        ..
                    }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.err("only OPENQASM 2.0 is supported");
                    }
                }
                self.expect_sym(';')
            }
            "include" => {
                match self.next() {
                    Some(Spanned { tok: Tok::Str(_), .. }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.err("expected include path");
                    }
                }
                self.expect_sym(';')
            }
            "qreg" => self.declare(true),
            "creg" => self.declare(false),
            "measure" => {
                let q = self.arg(true)?;
                match self.next() {
                    Some(Spanned { tok: Tok::Arrow, .. }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.err("expected `->`");
                    }
                }
                let c = self.arg(false)?;
                self.expect_sym(';')?;
                match (q, c) {
                    (Arg::One(q), Arg::One(c)) => self.instrs.push(Instruction::measure_z(q, c)),
                    (Arg::Whole { offset: qo, size: qs }, Arg::Whole { offset: co, size: cs })
                        if qs == cs =>
                    {
                        for k in 0..qs {
                            self.instrs.push(Instruction::measure_z(qo + k, co + k));
                        }
                    }
                    _ => return self.err("measure operands differ in size"),
                }
                Ok(())
            }
            "barrier" => {
                let args = self.arg_list()?;
                self.expect_sym(';')?;
                let mut qs: Vec<usize> = Vec::new();
                for a in args {
                    match a {
                        Arg::One(q) => qs.push(q),
                        Arg::Whole { offset, size } => qs.extend(offset..offset + size),
                    }
                }
                qs.dedup();
                self.instrs.push(Instruction::barrier(qs));
                Ok(())
            }
            name => {
                let arity_and_kind = |params: &[f64]| -> Option<(usize, Vec<GateKind>)> {
                    let one = |k| Some((1, vec![k]));
                    match (name, params) {
                        ("h", []) => one(GateKind::H),
                        ("x", []) => one(GateKind::X),
                        ("y", []) => one(GateKind::Y),
                        ("z", []) => one(GateKind::Z),
                        ("s", []) => one(GateKind::S),
                        ("sdg", []) => one(GateKind::Sdg),
                        ("t", []) => one(GateKind::T),
                        ("tdg", []) => one(GateKind::Tdg),
                        ("rz", [a]) => one(GateKind::Rz(*a)),
                        ("rx", [a]) => one(GateKind::Rx(*a)),
                        ("ry", [a]) => one(GateKind::Ry(*a)),
                        ("cx" | "CX", []) => Some((2, vec![GateKind::Cnot])),
                        ("cz", []) => Some((2, vec![GateKind::Cz])),
                        ("swap", []) => Some((2, vec![GateKind::Swap])),
                        _ => None,
                    }
                };
                let known = matches!(
                    name,
                    "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" | "rz" | "rx" | "ry" | "cx"
                        | "CX" | "cz" | "swap"
                );
                if !known {
                    return Err(QasmError::UnsupportedGate {
                        name: name.to_string(),
                        line,
                        col,
                    });
                }
                let mut params = Vec::new();
                if self.eat_sym('(') && !self.eat_sym(')') {
                    params.push(self.expr()?);
                    while self.eat_sym(',') {
                        params.push(self.expr()?);
                    }
                    self.expect_sym(')')?;
                }
                let Some((arity, kinds)) = arity_and_kind(&params) else {
                    return Err(QasmError::Syntax {
                        line,
                        col,
                        msg: format!("wrong parameter count for `{name}`"),
                    });
                };
                let args = self.arg_list()?;
                self.expect_sym(';')?;
                if args.len() != arity {
                    return Err(QasmError::Syntax {
                        line,
                        col,
                        msg: format!("`{name}` takes {arity} qubit arguments"),
                    });
                }
                for ops in self.broadcast(&args)? {
                    if ops.len() == 2 && ops[0] == ops[1] {
                        return Err(QasmError::Syntax {
                            line,
                            col,
                            msg: "repeated qubit argument".into(),
                        });
                    }
                    match kinds[0] {
                        GateKind::Swap => {
                            let (a, b) = (ops[0], ops[1]);
                            self.instrs.push(Instruction::cnot(a, b));
                            self.instrs.push(Instruction::cnot(b, a));
                            self.instrs.push(Instruction::cnot(a, b));
                        }
                        k => self.instrs.push(Instruction::new(k, ops)),
                    }
                }
                Ok(())
            }
        }
    }
}

/// Parse OpenQASM 2.0 text into a logical circuit.
pub fn parse_qasm(text: &str) -> Result<LogicalCircuit, QasmError> {
    let toks = tokenize(text)?;
    let eof = toks.last().map_or((1, 1), |t| (t.line, t.col + 1));
    let mut p = Parser {
        toks,
        pos: 0,
        qregs: Vec::new(),
        cregs: Vec::new(),
        qubits: 0,
        bits: 0,
        instrs: Vec::new(),
        eof,
    };
    while p.peek().is_some() {
        p.statement()?;
    }
    Ok(LogicalCircuit {
        name: "qasm".into(),
        qubit_count: p.qubits,
        classical_bit_count: p.bits,
        instructions: p.instrs,
    })
}

/// Render a logical circuit as OpenQASM 2.0 over registers `q` and `c`.
pub fn emit_qasm(circuit: &LogicalCircuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", circuit.qubit_count);
    if circuit.classical_bit_count > 0 {
        let _ = writeln!(s, "creg c[{}];", circuit.classical_bit_count);
    }
    let regs = |ops: &[usize]| {
        ops.iter()
            .map(|q| format!("q[{q}]"))
            .collect::<Vec<_>>()
            .join(",")
    };
    for instr in &circuit.instructions {
        match instr.kind {
            GateKind::MeasureZ => {
                let _ = writeln!(
                    s,
                    "measure q[{}] -> c[{}];",
                    instr.operands[0],
                    instr.writes.unwrap_or(0)
                );
            }
            GateKind::Barrier if instr.operands.is_empty() => {
                let _ = writeln!(s, "barrier q;");
            }
            GateKind::Cnot => {
                let _ = writeln!(s, "cx {};", regs(&instr.operands));
            }
            k => {
                let name = k.mnemonic();
                match k.angle() {
                    Some(a) => {
                        let _ = writeln!(s, "{name}({a}) {};", regs(&instr.operands));
                    }
                    None => {
                        let _ = writeln!(s, "{name} {};", regs(&instr.operands));
                    }
                }
            }
        }
    }
    s
}
