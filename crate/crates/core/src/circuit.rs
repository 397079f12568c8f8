//! Gates, circuits and Pauli-Z observables.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest system the dense simulator accepts.
pub const MAX_QUBITS: usize = 8;

/// A gate from the small set the Trotter circuits need.
///
/// The entangler is a controlled-X; any gate in the CZ equivalence class
/// gives the same two-qubit counts and the same folding behaviour. Rotation
/// angles follow the `exp(-i * angle * P / 2)` convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    RotX { qubit: usize, angle: f64 },
    RotZ { qubit: usize, angle: f64 },
    Hadamard { qubit: usize },
    Entangler { control: usize, target: usize },
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Entangler { .. })
    }

    /// Qubits the gate acts on, in a fixed small buffer.
    pub fn support(&self) -> Vec<usize> {
        match *self {
            Gate::RotX { qubit, .. } | Gate::RotZ { qubit, .. } | Gate::Hadamard { qubit } => {
                vec![qubit]
            }
            Gate::Entangler { control, target } => vec![control, target],
        }
    }

    /// Inverse gate. Rotations negate their angle; the entangler and
    /// Hadamard are self-adjoint.
    pub fn adjoint(&self) -> Gate {
        match *self {
            Gate::RotX { qubit, angle } => Gate::RotX { qubit, angle: -angle },
            Gate::RotZ { qubit, angle } => Gate::RotZ { qubit, angle: -angle },
            g @ (Gate::Hadamard { .. } | Gate::Entangler { .. }) => g,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            Gate::RotX { qubit, .. } | Gate::RotZ { qubit, .. } | Gate::Hadamard { qubit } => {
                if qubit >= n_qubits {
                    return Err(Error::invalid(format!(
                        "gate targets qubit {qubit} but the circuit has {n_qubits} qubits"
                    )));
                }
            }
            Gate::Entangler { control, target } => {
                if control >= n_qubits || target >= n_qubits {
                    return Err(Error::invalid(format!(
                        "entangler ({control},{target}) outside {n_qubits}-qubit register"
                    )));
                }
                if control == target {
                    return Err(Error::invalid("entangler targets must be distinct"));
                }
            }
        }
        Ok(())
    }
}

/// An ordered gate list over at most [`MAX_QUBITS`] qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    label: String,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>, label: impl Into<String>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "circuit qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, gates, label: label.into() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Same register, new gate list (used by folding).
    pub(crate) fn with_gates(&self, gates: Vec<Gate>, label: String) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates, label }
    }
}

/// Builds the Trotterised transverse-field Ising chain circuit family.
///
/// Each Trotter step is one layer of single-qubit X rotations by
/// `field_angle` followed by nearest-neighbour ZZ interactions by
/// `coupling_angle`, each ZZ realised as two entanglers sandwiching a Z
/// rotation. Total two-qubit count is `2 * (n_qubits - 1) * trotter_steps`.
pub fn build_qtc(
    n_qubits: usize,
    trotter_steps: usize,
    coupling_angle: f64,
    field_angle: f64,
) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::invalid(format!(
            "transverse-field Ising chain needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if trotter_steps == 0 {
        return Err(Error::invalid("trotter_steps must be at least 1"));
    }
    let mut gates = Vec::with_capacity(trotter_steps * (n_qubits + 3 * (n_qubits - 1)));
    for _ in 0..trotter_steps {
        for q in 0..n_qubits {
            gates.push(Gate::RotX { qubit: q, angle: field_angle });
        }
        for i in 0..n_qubits - 1 {
            gates.push(Gate::Entangler { control: i, target: i + 1 });
            gates.push(Gate::RotZ { qubit: i + 1, angle: coupling_angle });
            gates.push(Gate::Entangler { control: i, target: i + 1 });
        }
    }
    Circuit::new(n_qubits, gates, format!("qtc-{n_qubits}q-tc{trotter_steps}"))
}

/// A weighted sum of Pauli-Z strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    terms: Vec<ZTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTerm {
    /// Qubits carrying a Z factor; sorted, no duplicates.
    pub support: Vec<usize>,
    pub weight: f64,
}

impl Observable {
    pub fn new(terms: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("observable needs at least one term"));
        }
        let mut out = Vec::with_capacity(terms.len());
        for (mut support, weight) in terms {
            support.sort_unstable();
            support.dedup();
            if !weight.is_finite() {
                return Err(Error::invalid("observable weights must be finite"));
            }
            out.push(ZTerm { support, weight });
        }
        Ok(Self { terms: out })
    }

    /// `<Z_q>`, the default measured quantity.
    pub fn single_z(qubit: usize) -> Observable {
        Observable { terms: vec![ZTerm { support: vec![qubit], weight: 1.0 }] }
    }

    pub fn terms(&self) -> &[ZTerm] {
        &self.terms
    }

    /// Sum of absolute weights; bounds the ideal expectation.
    pub fn weight_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.abs()).sum()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.terms.iter().flat_map(|t| t.support.iter().copied()).max()
    }
}
