use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use super::{Circuit, Gate, GateKind};
use crate::pauli::Axis;

pub type GateCounts = BTreeMap<GateKind, usize>;

fn u2(qubit: usize, phi: f64, lambda: f64) -> Gate {
    Gate::U2 {
        qubit,
        phi: phi.into(),
        lambda: lambda.into(),
    }
}

fn lower(gate: &Gate, out: &mut Vec<Gate>) {
    match gate {
        Gate::U1 { .. } | Gate::U2 { .. } | Gate::U3 { .. } | Gate::CNOT { .. } => {
            out.push(gate.clone())
        }
        Gate::RZ { qubit, theta } => out.push(Gate::U1 {
            qubit: *qubit,
            lambda: *theta,
        }),
        Gate::RY { qubit, theta } => out.push(Gate::U3 {
            qubit: *qubit,
            theta: *theta,
            phi: 0.0.into(),
            lambda: 0.0.into(),
        }),
        Gate::RX { qubit, theta } => out.push(Gate::U3 {
            qubit: *qubit,
            theta: *theta,
            phi: (-FRAC_PI_2).into(),
            lambda: FRAC_PI_2.into(),
        }),
        Gate::X { qubit } => out.push(Gate::U3 {
            qubit: *qubit,
            theta: PI.into(),
            phi: 0.0.into(),
            lambda: PI.into(),
        }),
        Gate::H { qubit } => out.push(u2(*qubit, 0.0, PI)),
        Gate::SWAP { a, b } => {
            out.push(Gate::CNOT { control: *a, target: *b });
            out.push(Gate::CNOT { control: *b, target: *a });
            out.push(Gate::CNOT { control: *a, target: *b });
        }
        Gate::PauliEvolution { string, angle } => {
            let support: Vec<(usize, Axis)> = string.iter().collect();
            let Some(&(last, _)) = support.last() else {
                // exp(-i t/2 I) is a global phase
                return;
            };
            for &(q, a) in &support {
                match a {
                    Axis::X => out.push(u2(q, 0.0, PI)),
                    // RX(pi/2) maps Y to Z
                    Axis::Y => out.push(u2(q, -FRAC_PI_2, FRAC_PI_2)),
                    Axis::Z => {}
                }
            }
            for w in support.windows(2) {
                out.push(Gate::CNOT {
                    control: w[0].0,
                    target: w[1].0,
                });
            }
            out.push(Gate::U1 {
                qubit: last,
                lambda: *angle,
            });
            for w in support.windows(2).rev() {
                out.push(Gate::CNOT {
                    control: w[0].0,
                    target: w[1].0,
                });
            }
            for &(q, a) in &support {
                match a {
                    Axis::X => out.push(u2(q, 0.0, PI)),
                    Axis::Y => out.push(u2(q, FRAC_PI_2, -FRAC_PI_2)),
                    Axis::Z => {}
                }
            }
        }
    }
}

/// Lowers every gate to {U1, U2, U3, CNOT}; equal to the input up to a
/// global phase.
pub fn transpile_native(circuit: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(circuit.len() * 4);
    for g in circuit.gates() {
        lower(g, &mut gates);
    }
    circuit.with_gates(gates)
}

/// Gate tally by kind after lowering to the native set.
pub fn count_gates(circuit: &Circuit) -> GateCounts {
    let mut counts = GateCounts::new();
    for g in transpile_native(circuit).gates() {
        *counts.entry(g.kind()).or_default() += 1;
    }
    counts
}
