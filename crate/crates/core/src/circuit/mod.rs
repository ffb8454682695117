//! Gate-level circuits plus statevector and density-matrix simulation.

mod kernels;
mod sampling;
mod sim;
mod state;
mod transpile;

pub use sampling::{estimate_expectation_sampled, group_qubit_wise, sample_counts, Histogram};
pub use sim::{run_density, run_statevector, run_statevector_from, DENSITY_LIMIT};
pub(crate) use sim::run_statevector_replacing;
pub use state::{DensityMatrix, QuantumState, StateVector, STATEVECTOR_LIMIT};
pub(crate) use state::chunked_sum;
pub use transpile::{count_gates, transpile_native, GateCounts};

pub(crate) use kernels::{apply_gate_sv, apply_gates_sv, gate_matrix_1q, gate_matrix_2q, superop_matrix};

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// A rotation angle: either a literal or `scale * theta[index]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Param { index: usize, scale: f64 },
}

impl Angle {
    pub fn param(index: usize) -> Angle {
        Angle::Param { index, scale: 1.0 }
    }

    pub fn resolve(&self, bindings: &[f64]) -> Option<f64> {
        match *self {
            Angle::Fixed(v) => Some(v),
            Angle::Param { index, scale } => bindings.get(index).map(|t| scale * t),
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        match *self {
            Angle::Fixed(_) => None,
            Angle::Param { index, .. } => Some(index),
        }
    }

    /// Adds a literal offset, collapsing to a literal when bound values are given.
    pub(crate) fn shifted(&self, bindings: &[f64], delta: f64) -> Angle {
        Angle::Fixed(self.resolve(bindings).unwrap_or(0.0) + delta)
    }

    fn negated(&self) -> Angle {
        match *self {
            Angle::Fixed(v) => Angle::Fixed(-v),
            Angle::Param { index, scale } => Angle::Param {
                index,
                scale: -scale,
            },
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::Fixed(v)
    }
}

/// Tally key for a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    U1,
    U2,
    U3,
    RX,
    RY,
    RZ,
    X,
    H,
    CNOT,
    SWAP,
    PauliEvolution,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::U1 => "U1",
            GateKind::U2 => "U2",
            GateKind::U3 => "U3",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::CNOT => "CNOT",
            GateKind::SWAP => "SWAP",
            GateKind::PauliEvolution => "PauliEvolution",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Unitaries follow the usual `U3(theta, phi, lambda)` convention with
/// `U1(l) = U3(0, 0, l)` and `U2(p, l) = U3(pi/2, p, l)`.
/// `PauliEvolution(P, t)` is `exp(-i t/2 P)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    U1 { qubit: usize, lambda: Angle },
    U2 { qubit: usize, phi: Angle, lambda: Angle },
    U3 { qubit: usize, theta: Angle, phi: Angle, lambda: Angle },
    RX { qubit: usize, theta: Angle },
    RY { qubit: usize, theta: Angle },
    RZ { qubit: usize, theta: Angle },
    X { qubit: usize },
    H { qubit: usize },
    CNOT { control: usize, target: usize },
    SWAP { a: usize, b: usize },
    PauliEvolution { string: PauliString, angle: Angle },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::U1 { .. } => GateKind::U1,
            Gate::U2 { .. } => GateKind::U2,
            Gate::U3 { .. } => GateKind::U3,
            Gate::RX { .. } => GateKind::RX,
            Gate::RY { .. } => GateKind::RY,
            Gate::RZ { .. } => GateKind::RZ,
            Gate::X { .. } => GateKind::X,
            Gate::H { .. } => GateKind::H,
            Gate::CNOT { .. } => GateKind::CNOT,
            Gate::SWAP { .. } => GateKind::SWAP,
            Gate::PauliEvolution { .. } => GateKind::PauliEvolution,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::U1 { qubit, .. }
            | Gate::U2 { qubit, .. }
            | Gate::U3 { qubit, .. }
            | Gate::RX { qubit, .. }
            | Gate::RY { qubit, .. }
            | Gate::RZ { qubit, .. }
            | Gate::X { qubit }
            | Gate::H { qubit } => vec![*qubit],
            Gate::CNOT { control, target } => vec![*control, *target],
            Gate::SWAP { a, b } => vec![*a, *b],
            Gate::PauliEvolution { string, .. } => string.qubits().collect(),
        }
    }

    pub fn angles(&self) -> Vec<Angle> {
        match self {
            Gate::U1 { lambda, .. } => vec![*lambda],
            Gate::U2 { phi, lambda, .. } => vec![*phi, *lambda],
            Gate::U3 {
                theta, phi, lambda, ..
            } => vec![*theta, *phi, *lambda],
            Gate::RX { theta, .. } | Gate::RY { theta, .. } | Gate::RZ { theta, .. } => {
                vec![*theta]
            }
            Gate::PauliEvolution { angle, .. } => vec![*angle],
            _ => Vec::new(),
        }
    }

    /// The single rotation angle carrying a symbolic parameter, if any.
    pub(crate) fn rotation_angle_mut(&mut self) -> Option<&mut Angle> {
        match self {
            Gate::U1 { lambda, .. } => Some(lambda),
            Gate::RX { theta, .. } | Gate::RY { theta, .. } | Gate::RZ { theta, .. } => {
                Some(theta)
            }
            Gate::PauliEvolution { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// Relabels every operand through `map`.
    pub fn remap(&self, map: &[usize]) -> Gate {
        let m = |q: usize| map[q];
        match self {
            Gate::U1 { qubit, lambda } => Gate::U1 { qubit: m(*qubit), lambda: *lambda },
            Gate::U2 { qubit, phi, lambda } => Gate::U2 {
                qubit: m(*qubit),
                phi: *phi,
                lambda: *lambda,
            },
            Gate::U3 {
                qubit,
                theta,
                phi,
                lambda,
            } => Gate::U3 {
                qubit: m(*qubit),
                theta: *theta,
                phi: *phi,
                lambda: *lambda,
            },
            Gate::RX { qubit, theta } => Gate::RX { qubit: m(*qubit), theta: *theta },
            Gate::RY { qubit, theta } => Gate::RY { qubit: m(*qubit), theta: *theta },
            Gate::RZ { qubit, theta } => Gate::RZ { qubit: m(*qubit), theta: *theta },
            Gate::X { qubit } => Gate::X { qubit: m(*qubit) },
            Gate::H { qubit } => Gate::H { qubit: m(*qubit) },
            Gate::CNOT { control, target } => Gate::CNOT {
                control: m(*control),
                target: m(*target),
            },
            Gate::SWAP { a, b } => Gate::SWAP { a: m(*a), b: m(*b) },
            Gate::PauliEvolution { string, angle } => Gate::PauliEvolution {
                string: string.relabel(map).expect("map covers operands"),
                angle: *angle,
            },
        }
    }

    /// Inverse gate (exact, not up to phase).
    pub fn inverse(&self) -> Gate {
        match self {
            Gate::U1 { qubit, lambda } => Gate::U1 {
                qubit: *qubit,
                lambda: lambda.negated(),
            },
            Gate::U2 { qubit, phi, lambda } => Gate::U3 {
                qubit: *qubit,
                theta: Angle::Fixed(-PI / 2.0),
                phi: lambda.negated(),
                lambda: phi.negated(),
            },
            Gate::U3 {
                qubit,
                theta,
                phi,
                lambda,
            } => Gate::U3 {
                qubit: *qubit,
                theta: theta.negated(),
                phi: lambda.negated(),
                lambda: phi.negated(),
            },
            Gate::RX { qubit, theta } => Gate::RX { qubit: *qubit, theta: theta.negated() },
            Gate::RY { qubit, theta } => Gate::RY { qubit: *qubit, theta: theta.negated() },
            Gate::RZ { qubit, theta } => Gate::RZ { qubit: *qubit, theta: theta.negated() },
            Gate::PauliEvolution { string, angle } => Gate::PauliEvolution {
                string: string.clone(),
                angle: angle.negated(),
            },
            g => g.clone(),
        }
    }

    fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            Error::check_index(q, n_qubits)?;
            if qs[..i].contains(&q) {
                return Err(Error::DimensionMismatch(format!(
                    "{} has repeated operand {q}",
                    self.kind()
                )));
            }
        }
        for a in self.angles() {
            if let Some(idx) = a.param_index() {
                Error::check_index(idx, n_params)?;
            }
        }
        Ok(())
    }
}

/// An ordered gate program on `n_qubits` with named parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    parameters: Vec<String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            parameters: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn num_parameters(&self) -> usize {
        self.parameters.len()
    }

    pub fn add_parameter(&mut self, name: impl Into<String>) -> usize {
        self.parameters.push(name.into());
        self.parameters.len() - 1
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits, self.parameters.len())?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    /// Same gates on a wider register.
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit> {
        if n_qubits < self.n_qubits {
            return Err(Error::WidthMismatch {
                expected: self.n_qubits,
                found: n_qubits,
            });
        }
        let mut c = self.clone();
        c.n_qubits = n_qubits;
        Ok(c)
    }

    /// Copy with a new gate list, keeping width and parameter table.
    pub(crate) fn with_gates(&self, gates: Vec<Gate>) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates,
            parameters: self.parameters.clone(),
        }
    }

    pub(crate) fn with_width_and_gates(&self, n_qubits: usize, gates: Vec<Gate>) -> Circuit {
        Circuit {
            n_qubits,
            gates,
            parameters: self.parameters.clone(),
        }
    }

    pub(crate) fn check_bindings(&self, bindings: &[f64]) -> Result<()> {
        if bindings.len() < self.parameters.len() {
            return Err(Error::UnboundParameter(
                self.parameters[bindings.len()].clone(),
            ));
        }
        Ok(())
    }

    /// Sequence of `(gate index, multiplier)` for every occurrence of parameter `p`.
    pub fn parameter_occurrences(&self, p: usize) -> Vec<(usize, f64)> {
        self.gates
            .iter()
            .enumerate()
            .flat_map(|(i, g)| {
                g.angles().into_iter().filter_map(move |a| match a {
                    Angle::Param { index, scale } if index == p => Some((i, scale)),
                    _ => None,
                })
            })
            .collect()
    }
}
