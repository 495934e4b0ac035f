//! OpenQASM 3 text for lowered circuits.

use std::fmt::Write;

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

const HEADER: &str = "OPENQASM 3;";
const INCLUDE: &str = "include \"stdgates.inc\";";

/// Emits one statement per gate. Angles use the shortest representation
/// that parses back to the same `f64`, so a round trip is exact.
pub fn export_qasm(c: &Circuit) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "{INCLUDE}").unwrap();
    writeln!(out, "qubit[{}] q;", c.num_qubits()).unwrap();
    for g in c.gates() {
        let t = g.target;
        match g.kind {
            GateKind::H => writeln!(out, "h q[{t}];"),
            GateKind::X => writeln!(out, "x q[{t}];"),
            GateKind::Phase(a) => writeln!(out, "p({a:?}) q[{t}];"),
            GateKind::RZ(a) => writeln!(out, "rz({a:?}) q[{t}];"),
            GateKind::MCRZ(_) => return Err(Error::UndecomposedGate),
            GateKind::RX(a) => writeln!(out, "rx({a:?}) q[{t}];"),
            GateKind::CNOT => writeln!(out, "cx q[{}], q[{t}];", g.controls[0]),
        }
        .unwrap();
    }
    Ok(out)
}

/// Parses the subset of OpenQASM 3 that [`export_qasm`] writes.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut num_qubits = None;
    let mut gates = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Qasm {
            line: line_no,
            message,
        };
        let line = raw.split("//").next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(format!("expected `{HEADER}`, found `{line}`")));
            }
            seen_header = true;
            continue;
        }
        if line == INCLUDE {
            continue;
        }
        let stmt = line
            .strip_suffix(';')
            .ok_or_else(|| err("missing `;`".into()))?
            .trim();
        if let Some(rest) = stmt.strip_prefix("qubit[") {
            if num_qubits.is_some() {
                return Err(err("register declared twice".into()));
            }
            let (count, name) = rest
                .split_once(']')
                .ok_or_else(|| err("malformed qubit declaration".into()))?;
            if name.trim() != "q" {
                return Err(err(format!("unsupported register name `{}`", name.trim())));
            }
            num_qubits = Some(
                count
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| err(format!("bad qubit count: {e}")))?,
            );
            continue;
        }
        let nq = num_qubits.ok_or_else(|| err("gate before qubit declaration".into()))?;
        let (head, args) = match stmt.find(')') {
            Some(close) => (&stmt[..=close], stmt[close + 1..].trim()),
            None => stmt
                .split_once(char::is_whitespace)
                .map(|(h, a)| (h, a.trim()))
                .ok_or_else(|| err(format!("cannot parse `{stmt}`")))?,
        };
        let (name, angle) = match head.split_once('(') {
            Some((n, a)) => {
                let a = a
                    .strip_suffix(')')
                    .ok_or_else(|| err("unclosed angle".into()))?
                    .trim();
                let v: f64 = a.parse().map_err(|_| err(format!("bad angle `{a}`")))?;
                (n, Some(v))
            }
            None => (head, None),
        };
        let qubits = args
            .split(',')
            .map(|s| {
                s.trim()
                    .strip_prefix("q[")
                    .and_then(|s| s.strip_suffix(']'))
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("bad operand `{}`", s.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let need_angle = |kind: fn(f64) -> GateKind| {
            angle
                .map(kind)
                .ok_or_else(|| err(format!("`{name}` needs an angle")))
        };
        let (kind, arity) = match name {
            "h" => (GateKind::H, 1),
            "x" => (GateKind::X, 1),
            "p" => (need_angle(GateKind::Phase)?, 1),
            "rz" => (need_angle(GateKind::RZ)?, 1),
            "rx" => (need_angle(GateKind::RX)?, 1),
            "cx" => (GateKind::CNOT, 2),
            other => return Err(err(format!("unsupported gate `{other}`"))),
        };
        if angle.is_some() && kind.angle().is_none() {
            return Err(err(format!("`{name}` takes no angle")));
        }
        if qubits.len() != arity {
            return Err(err(format!("`{name}` takes {arity} operands")));
        }
        let gate = Gate {
            kind,
            target: *qubits.last().unwrap(),
            controls: qubits[..arity - 1].to_vec(),
        };
        // validate indices against the register right away for a line number
        Circuit::from_gates(nq, vec![gate.clone()]).map_err(|e| err(e.to_string()))?;
        gates.push(gate);
    }
    let nq = num_qubits.ok_or_else(|| Error::Qasm {
        line: text.lines().count(),
        message: "no qubit declaration".into(),
    })?;
    Circuit::from_gates(nq, gates)
}
