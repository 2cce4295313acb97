//! OpenQASM 2.0 ingestion for a practical subset of `qelib1.inc`, and
//! lowering to the U3 + CNOT basis.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::Gate;

/// 1-based position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("unsupported statement `{0}`")]
    UnsupportedStatement(String),
    #[error("register `{0}` is already defined")]
    RegisterRedefinition(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("index {index} out of range for register `{register}` of size {size}")]
    IndexOutOfRange { register: String, index: usize, size: usize },
    #[error("gate `{gate}` expects {expected} {what}, got {got}")]
    Arity { gate: String, what: &'static str, expected: usize, got: usize },
    #[error("qubit {0} is used after being measured")]
    MidCircuitMeasure(usize),
    #[error("gate arguments must be distinct")]
    RepeatedArgument,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Gate(Gate),
    Measure { qubit: usize, clbit: usize },
    Barrier(Vec<usize>),
}

/// Monolithic circuit over one flat qubit register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub n_qubits: usize,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n_qubits: usize) -> Self {
        Circuit { name: name.into(), n_qubits, ops: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.ops.push(Op::Gate(g));
        self
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Gate::Cnot { control, target })
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate(g) => Some(g),
            _ => None,
        })
    }

    /// True when every gate is U3 or CNOT.
    pub fn is_basis(&self) -> bool {
        self.gates().all(|g| matches!(g, Gate::U3 { .. } | Gate::Cnot { .. }))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Int(usize),
    Str(String),
    Sym(char),
    Arrow,
    Eq2,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Real(x) => write!(f, "`{x}`"),
            Tok::Int(x) => write!(f, "`{x}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eq2 => f.write_str("`==`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn syntax(msg: impl Into<String>, span: SourceSpan) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax(msg.into()), span }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let span = SourceSpan { line, column: col };
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            let mut n = 0;
            while i + n < chars.len() && chars[i + n] != '\n' {
                n += 1;
            }
            advance(n, &mut i);
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            let mut n = 2;
            while i + n + 1 < chars.len() && !(chars[i + n] == '*' && chars[i + n + 1] == '/') {
                n += 1;
            }
            if i + n + 1 >= chars.len() {
                return Err(syntax("unterminated block comment", span));
            }
            advance(n + 2, &mut i);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut n = 0;
            while i + n < chars.len() && (chars[i + n].is_ascii_alphanumeric() || chars[i + n] == '_') {
                n += 1;
            }
            out.push((Tok::Ident(chars[i..i + n].iter().collect()), span));
            advance(n, &mut i);
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut n = 0;
            let mut real = false;
            while i + n < chars.len() {
                let d = chars[i + n];
                if d.is_ascii_digit() {
                    n += 1;
                } else if d == '.' && !real {
                    real = true;
                    n += 1;
                } else if (d == 'e' || d == 'E')
                    && chars.get(i + n + 1).is_some_and(|x| x.is_ascii_digit() || *x == '-' || *x == '+')
                {
                    real = true;
                    n += 2;
                } else {
                    break;
                }
            }
            let text: String = chars[i..i + n].iter().collect();
            let tok = if real {
                Tok::Real(text.parse().map_err(|_| syntax(format!("bad number `{text}`"), span))?)
            } else {
                Tok::Int(text.parse().map_err(|_| syntax(format!("bad integer `{text}`"), span))?)
            };
            out.push((tok, span));
            advance(n, &mut i);
        } else if c == '"' {
            let mut n = 1;
            while i + n < chars.len() && chars[i + n] != '"' && chars[i + n] != '\n' {
                n += 1;
            }
            if chars.get(i + n) != Some(&'"') {
                return Err(syntax("unterminated string", span));
            }
            out.push((Tok::Str(chars[i + 1..i + n].iter().collect()), span));
            advance(n + 1, &mut i);
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, span));
            advance(2, &mut i);
        } else if c == '=' && chars.get(i + 1) == Some(&'=') {
            out.push((Tok::Eq2, span));
            advance(2, &mut i);
        } else if "[](){};,+-*/^".contains(c) {
            out.push((Tok::Sym(c), span));
            advance(1, &mut i);
        } else {
            return Err(syntax(format!("unexpected character `{c}`"), span));
        }
    }
    out.push((Tok::Eof, SourceSpan { line, column: col }));
    Ok(out)
}

/// A gate argument: whole register or a single element.
enum Arg {
    Reg(String, SourceSpan),
    Elem(String, usize, SourceSpan),
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    qregs: Vec<(String, usize, usize)>,
    cregs: HashMap<String, usize>,
    measured: Vec<bool>,
    ops: Vec<Op>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.next() {
            (Tok::Sym(s), _) if s == c => Ok(()),
            (t, span) => Err(syntax(format!("expected `{c}`, found {t}"), span)),
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.next() {
            (Tok::Ident(s), span) => Ok((s, span)),
            (t, span) => Err(syntax(format!("expected identifier, found {t}"), span)),
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        match self.next() {
            (Tok::Int(v), _) => Ok(v),
            (t, span) => Err(syntax(format!("expected integer, found {t}"), span)),
        }
    }

    fn is_defined(&self, name: &str) -> bool {
        self.cregs.contains_key(name) || self.qregs.iter().any(|(n, _, _)| n == name)
    }

    fn program(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            match self.next() {
                (Tok::Real(v), span) if v != 2.0 => {
                    return Err(syntax(format!("only OPENQASM 2.0 is supported, found {v}"), span))
                }
                (Tok::Real(_), _) | (Tok::Int(2), _) => {}
                (t, span) => return Err(syntax(format!("expected version, found {t}"), span)),
            }
            self.expect_sym(';')?;
        }
        while *self.peek() != Tok::Eof {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (word, span) = self.ident()?;
        match word.as_str() {
            "include" => {
                match self.next() {
                    (Tok::Str(_), _) => {}
                    (t, span) => return Err(syntax(format!("expected file name, found {t}"), span)),
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                let (name, nspan) = self.ident()?;
                self.expect_sym('[')?;
                let size = self.int()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                if self.is_defined(&name) {
                    return Err(ParseError { kind: ParseErrorKind::RegisterRedefinition(name), span: nspan });
                }
                if word == "qreg" {
                    let offset = self.measured.len();
                    self.qregs.push((name, offset, size));
                    self.measured.extend(std::iter::repeat_n(false, size));
                } else {
                    self.cregs.insert(name, size);
                }
                Ok(())
            }
            "barrier" => {
                let args = self.arg_list()?;
                self.expect_sym(';')?;
                let mut qubits = Vec::new();
                for a in &args {
                    qubits.extend(self.resolve(a)?);
                }
                self.ops.push(Op::Barrier(qubits));
                Ok(())
            }
            "measure" => {
                let q = self.arg()?;
                match self.next() {
                    (Tok::Arrow, _) => {}
                    (t, span) => return Err(syntax(format!("expected `->`, found {t}"), span)),
                }
                let (cname, cspan) = self.ident()?;
                let csize = *self
                    .cregs
                    .get(&cname)
                    .ok_or(ParseError { kind: ParseErrorKind::UnknownRegister(cname.clone()), span: cspan })?;
                let cidx = if *self.peek() == Tok::Sym('[') {
                    self.next();
                    let i = self.int()?;
                    self.expect_sym(']')?;
                    if i >= csize {
                        return Err(ParseError {
                            kind: ParseErrorKind::IndexOutOfRange { register: cname, index: i, size: csize },
                            span: cspan,
                        });
                    }
                    Some(i)
                } else {
                    None
                };
                self.expect_sym(';')?;
                let qubits = self.resolve(&q)?;
                for (k, qubit) in qubits.into_iter().enumerate() {
                    self.measured[qubit] = true;
                    self.ops.push(Op::Measure { qubit, clbit: cidx.unwrap_or(k) });
                }
                Ok(())
            }
            "if" | "gate" | "opaque" | "reset" => {
                Err(ParseError { kind: ParseErrorKind::UnsupportedStatement(word), span })
            }
            _ => self.gate_call(word, span),
        }
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        let (name, span) = self.ident()?;
        if *self.peek() == Tok::Sym('[') {
            self.next();
            let i = self.int()?;
            self.expect_sym(']')?;
            Ok(Arg::Elem(name, i, span))
        } else {
            Ok(Arg::Reg(name, span))
        }
    }

    fn arg_list(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = vec![self.arg()?];
        while *self.peek() == Tok::Sym(',') {
            self.next();
            args.push(self.arg()?);
        }
        Ok(args)
    }

    fn qreg(&self, name: &str, span: SourceSpan) -> Result<(usize, usize), ParseError> {
        self.qregs
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|&(_, off, size)| (off, size))
            .ok_or(ParseError { kind: ParseErrorKind::UnknownRegister(name.to_string()), span })
    }

    fn resolve(&self, a: &Arg) -> Result<Vec<usize>, ParseError> {
        match a {
            Arg::Reg(name, span) => {
                let (off, size) = self.qreg(name, *span)?;
                Ok((off..off + size).collect())
            }
            Arg::Elem(name, i, span) => {
                let (off, size) = self.qreg(name, *span)?;
                if *i >= size {
                    return Err(ParseError {
                        kind: ParseErrorKind::IndexOutOfRange { register: name.clone(), index: *i, size },
                        span: *span,
                    });
                }
                Ok(vec![off + i])
            }
        }
    }

    fn gate_call(&mut self, name: String, span: SourceSpan) -> Result<(), ParseError> {
        let (n_params, n_args) = match gate_signature(&name) {
            Some(sig) => sig,
            None => return Err(ParseError { kind: ParseErrorKind::UnsupportedGate(name), span }),
        };
        let mut params = Vec::new();
        if *self.peek() == Tok::Sym('(') {
            self.next();
            if *self.peek() != Tok::Sym(')') {
                params.push(self.expr()?);
                while *self.peek() == Tok::Sym(',') {
                    self.next();
                    params.push(self.expr()?);
                }
            }
            self.expect_sym(')')?;
        }
        if params.len() != n_params {
            return Err(ParseError {
                kind: ParseErrorKind::Arity { gate: name, what: "parameters", expected: n_params, got: params.len() },
                span,
            });
        }
        let args = self.arg_list()?;
        self.expect_sym(';')?;
        if args.len() != n_args {
            return Err(ParseError {
                kind: ParseErrorKind::Arity { gate: name, what: "qubit arguments", expected: n_args, got: args.len() },
                span,
            });
        }
        let resolved: Vec<Vec<usize>> = args.iter().map(|a| self.resolve(a)).collect::<Result<_, _>>()?;
        // Register arguments broadcast; all registers must agree in size.
        let width = resolved.iter().map(Vec::len).filter(|&l| l > 1).max().unwrap_or(1);
        if resolved.iter().any(|r| r.len() != 1 && r.len() != width) {
            return Err(syntax("register arguments have mismatched sizes", span));
        }
        for k in 0..width {
            let qs: Vec<usize> = resolved.iter().map(|r| if r.len() == 1 { r[0] } else { r[k] }).collect();
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(ParseError { kind: ParseErrorKind::RepeatedArgument, span });
            }
            if let Some(&q) = qs.iter().find(|&&q| self.measured[q]) {
                return Err(ParseError { kind: ParseErrorKind::MidCircuitMeasure(q), span });
            }
            self.ops.push(Op::Gate(build_gate(&name, &params, &qs)));
        }
        Ok(())
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.next();
                    v += self.term()?;
                }
                Tok::Sym('-') => {
                    self.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.next();
                    v *= self.unary()?;
                }
                Tok::Sym('/') => {
                    let span = self.span();
                    self.next();
                    let d = self.unary()?;
                    if d == 0.0 {
                        return Err(syntax("division by zero", span));
                    }
                    v /= d;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.next();
                Ok(-self.unary()?)
            }
            Tok::Sym('+') => {
                self.next();
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, ParseError> {
        match self.next() {
            (Tok::Real(v), _) => Ok(v),
            (Tok::Int(v), _) => Ok(v as f64),
            (Tok::Ident(s), _) if s == "pi" => Ok(PI),
            (Tok::Sym('('), _) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            (t, span) => Err(syntax(format!("expected a number or `pi`, found {t}"), span)),
        }
    }
}

/// (parameter count, qubit count) for the supported gate names.
fn gate_signature(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" | "id" => (0, 1),
        "rx" | "ry" | "rz" | "p" | "u1" => (1, 1),
        "u2" => (2, 1),
        "u3" | "u" | "U" => (3, 1),
        "cx" | "CX" | "cz" | "swap" => (0, 2),
        "cp" | "cu1" => (1, 2),
        _ => return None,
    })
}

fn build_gate(name: &str, p: &[f64], q: &[usize]) -> Gate {
    match name {
        "x" => Gate::X(q[0]),
        "y" => Gate::Y(q[0]),
        "z" => Gate::Z(q[0]),
        "h" => Gate::H(q[0]),
        "s" => Gate::S(q[0]),
        "sdg" => Gate::Sdg(q[0]),
        "t" => Gate::T(q[0]),
        "tdg" => Gate::Tdg(q[0]),
        "id" => Gate::U3 { theta: 0.0, phi: 0.0, lambda: 0.0, q: q[0] },
        "rx" => Gate::Rx(p[0], q[0]),
        "ry" => Gate::Ry(p[0], q[0]),
        "rz" => Gate::Rz(p[0], q[0]),
        "p" | "u1" => Gate::Phase(p[0], q[0]),
        "u2" => Gate::U3 { theta: PI / 2.0, phi: p[0], lambda: p[1], q: q[0] },
        "u3" | "u" | "U" => Gate::U3 { theta: p[0], phi: p[1], lambda: p[2], q: q[0] },
        "cx" | "CX" => Gate::Cnot { control: q[0], target: q[1] },
        "cz" => Gate::Cz(q[0], q[1]),
        "swap" => Gate::Swap(q[0], q[1]),
        "cp" | "cu1" => Gate::CPhase(p[0], q[0], q[1]),
        _ => unreachable!("checked by gate_signature"),
    }
}

/// Parse OpenQASM 2.0 text into a flat circuit. Multiple `qreg`s are
/// concatenated in declaration order.
pub fn parse_qasm(text: &str) -> Result<Circuit, ParseError> {
    parse_qasm_named(text, "circuit")
}

pub fn parse_qasm_named(text: &str, name: &str) -> Result<Circuit, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        qregs: Vec::new(),
        cregs: HashMap::new(),
        measured: Vec::new(),
        ops: Vec::new(),
    };
    p.program()?;
    Ok(Circuit { name: name.to_string(), n_qubits: p.measured.len(), ops: p.ops })
}

fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Gate {
    Gate::U3 { theta, phi, lambda, q }
}

/// Unitary-equivalent (up to global phase) sequence of U3 and CNOT gates.
pub fn lower_gate(g: &Gate) -> Vec<Gate> {
    use Gate::*;
    match *g {
        U3 { .. } | Cnot { .. } => vec![*g],
        H(q) => vec![u3(PI / 2.0, 0.0, PI, q)],
        X(q) => vec![u3(PI, 0.0, PI, q)],
        Y(q) => vec![u3(PI, PI / 2.0, PI / 2.0, q)],
        Z(q) => vec![u3(0.0, 0.0, PI, q)],
        S(q) => vec![u3(0.0, 0.0, PI / 2.0, q)],
        Sdg(q) => vec![u3(0.0, 0.0, -PI / 2.0, q)],
        T(q) => vec![u3(0.0, 0.0, PI / 4.0, q)],
        Tdg(q) => vec![u3(0.0, 0.0, -PI / 4.0, q)],
        Rx(t, q) => vec![u3(t, -PI / 2.0, PI / 2.0, q)],
        Ry(t, q) => vec![u3(t, 0.0, 0.0, q)],
        Rz(t, q) | Phase(t, q) => vec![u3(0.0, 0.0, t, q)],
        Cz(a, b) => {
            let mut v = lower_gate(&H(b));
            v.push(Cnot { control: a, target: b });
            v.extend(lower_gate(&H(b)));
            v
        }
        CPhase(t, a, b) => vec![
            u3(0.0, 0.0, t / 2.0, a),
            Cnot { control: a, target: b },
            u3(0.0, 0.0, -t / 2.0, b),
            Cnot { control: a, target: b },
            u3(0.0, 0.0, t / 2.0, b),
        ],
        Swap(a, b) => {
            vec![Cnot { control: a, target: b }, Cnot { control: b, target: a }, Cnot { control: a, target: b }]
        }
    }
}

pub fn lower_to_basis(c: &Circuit) -> Circuit {
    let mut ops = Vec::with_capacity(c.ops.len());
    for op in &c.ops {
        match op {
            Op::Gate(g) => ops.extend(lower_gate(g).into_iter().map(Op::Gate)),
            other => ops.push(other.clone()),
        }
    }
    Circuit { name: c.name.clone(), n_qubits: c.n_qubits, ops }
}
