//! Gate-level circuits. Qubit indices are 0-based and little-endian: index
//! `k` is bit `k` of the basis-state index.

mod builders;
mod decompose;
mod qasm;
pub mod terms;

pub use builders::*;
pub use decompose::{count_cnots, decompose_mcrz, CountMode};
pub use qasm::{export_qasm, parse_qasm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    /// `diag(1, e^{iλ})`
    Phase(f64),
    /// `exp(−iθZ/2)`
    RZ(f64),
    /// `exp(−iθX/2)`
    RX(f64),
    CNOT,
    /// `exp(−iθZ/2)` on the target when every control is 1.
    MCRZ(f64),
}

impl GateKind {
    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Phase(a) | GateKind::RZ(a) | GateKind::RX(a) | GateKind::MCRZ(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::Phase(a) => GateKind::Phase(-a),
            GateKind::RZ(a) => GateKind::RZ(-a),
            GateKind::RX(a) => GateKind::RX(-a),
            GateKind::MCRZ(a) => GateKind::MCRZ(-a),
            k => k,
        };
        Gate {
            kind,
            target: self.target,
            controls: self.controls.clone(),
        }
    }

    fn check(&self, num_qubits: usize) -> Result<()> {
        let arity_ok = match self.kind {
            GateKind::CNOT => self.controls.len() == 1,
            GateKind::MCRZ(_) => true,
            _ => self.controls.is_empty(),
        };
        if !arity_ok {
            return Err(Error::InvalidArgument(format!(
                "{:?} with {} controls",
                self.kind,
                self.controls.len()
            )));
        }
        if self.target >= num_qubits || self.controls.iter().any(|&c| c >= num_qubits) {
            return Err(Error::InvalidArgument(format!(
                "gate {:?} on target {} / controls {:?} exceeds {} qubits",
                self.kind, self.target, self.controls, num_qubits
            )));
        }
        let mut seen = self.controls.clone();
        seen.push(self.target);
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "gate {:?} repeats a qubit: target {}, controls {:?}",
                self.kind, self.target, self.controls
            )));
        }
        if let Some(a) = self.kind.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite angle in {:?}",
                    self.kind
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    /// Builds a circuit from a gate list, checking every gate.
    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.check(num_qubits)?;
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate. Panics on an invalid gate, since builders construct
    /// gates from indices they already checked.
    pub fn push(&mut self, gate: Gate) -> &mut Self {
        if let Err(e) = gate.check(self.num_qubits) {
            panic!("{e}");
        }
        self.gates.push(gate);
        self
    }

    fn single(&mut self, kind: GateKind, q: usize) -> &mut Self {
        self.push(Gate {
            kind,
            target: q,
            controls: Vec::new(),
        })
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.single(GateKind::H, q)
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.single(GateKind::X, q)
    }

    pub fn p(&mut self, q: usize, lambda: f64) -> &mut Self {
        self.single(GateKind::Phase(lambda), q)
    }

    pub fn rz(&mut self, q: usize, theta: f64) -> &mut Self {
        self.single(GateKind::RZ(theta), q)
    }

    pub fn rx(&mut self, q: usize, theta: f64) -> &mut Self {
        self.single(GateKind::RX(theta), q)
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Gate {
            kind: GateKind::CNOT,
            target,
            controls: vec![control],
        })
    }

    pub fn mcrz(&mut self, controls: &[usize], target: usize, theta: f64) -> &mut Self {
        self.push(Gate {
            kind: GateKind::MCRZ(theta),
            target,
            controls: controls.to_vec(),
        })
    }

    /// Appends `other` so that it runs after `self`.
    pub fn append(&mut self, other: &Circuit) -> &mut Self {
        assert_eq!(
            self.num_qubits, other.num_qubits,
            "cannot append circuits over different registers"
        );
        self.gates.extend(other.gates.iter().cloned());
        self
    }

    pub fn then(mut self, other: &Circuit) -> Circuit {
        self.append(other);
        self
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// The same gates on a wider register, with qubit `k` moved to `k + offset`.
    pub fn embed(&self, num_qubits: usize, offset: usize) -> Circuit {
        assert!(
            offset + self.num_qubits <= num_qubits,
            "embedding does not fit"
        );
        Circuit {
            num_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| Gate {
                    kind: g.kind,
                    target: g.target + offset,
                    controls: g.controls.iter().map(|c| c + offset).collect(),
                })
                .collect(),
        }
    }

    /// `self` repeated `k` times.
    pub fn repeat(&self, k: usize) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for _ in 0..k {
            out.append(self);
        }
        out
    }

    pub fn has_mcrz(&self) -> bool {
        self.gates
            .iter()
            .any(|g| matches!(g.kind, GateKind::MCRZ(_)))
    }

    /// Replaces every multi-controlled rotation with CNOTs and RZ gates.
    pub fn lower(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for g in &self.gates {
            match g.kind {
                GateKind::MCRZ(theta) => {
                    decompose::lower_mcrz_into(&mut out, &g.controls, g.target, theta)
                }
                _ => {
                    out.gates.push(g.clone());
                }
            }
        }
        out
    }

    /// Gate tally by name.
    pub fn gate_counts(&self) -> std::collections::BTreeMap<&'static str, usize> {
        let mut m = std::collections::BTreeMap::new();
        for g in &self.gates {
            let name = match g.kind {
                GateKind::H => "h",
                GateKind::X => "x",
                GateKind::Phase(_) => "p",
                GateKind::RZ(_) => "rz",
                GateKind::RX(_) => "rx",
                GateKind::CNOT => "cx",
                GateKind::MCRZ(_) => "mcrz",
            };
            *m.entry(name).or_insert(0) += 1;
        }
        m
    }
}
