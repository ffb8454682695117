use num_complex::Complex64 as C;

use super::kernels::{apply_pauli_rotation_dm, apply_superop, Superop};
use super::{apply_gates_sv, gate_matrix_1q, gate_matrix_2q, transpile_native};
use super::{Circuit, DensityMatrix, Gate, StateVector};
use crate::error::{Error, Result};
use crate::noise::{LocalChannel, NoiseModel};

/// Widest register the density-matrix backend accepts.
pub const DENSITY_LIMIT: usize = 10;

/// Applies the circuit to `|0...0>`.
pub fn run_statevector(circuit: &Circuit, bindings: &[f64]) -> Result<StateVector> {
    let psi = StateVector::zero(circuit.n_qubits())?;
    run_statevector_from(circuit, bindings, psi)
}

/// Applies the circuit to a given initial state.
pub fn run_statevector_from(
    circuit: &Circuit,
    bindings: &[f64],
    mut psi: StateVector,
) -> Result<StateVector> {
    use crate::circuit::QuantumState;
    if psi.num_qubits() != circuit.n_qubits() {
        return Err(Error::WidthMismatch {
            expected: circuit.n_qubits(),
            found: psi.num_qubits(),
        });
    }
    circuit.check_bindings(bindings)?;
    apply_gates_sv(psi.amplitudes_mut(), circuit.gates(), bindings)?;
    Ok(psi)
}

/// Runs the circuit on `|0...0>` with gate `index` replaced by `gate`.
pub(crate) fn run_statevector_replacing(
    circuit: &Circuit,
    bindings: &[f64],
    index: usize,
    gate: &Gate,
) -> Result<StateVector> {
    circuit.check_bindings(bindings)?;
    let mut psi = StateVector::zero(circuit.n_qubits())?;
    let (before, after) = circuit.gates().split_at(index);
    let v = psi.amplitudes_mut();
    apply_gates_sv(v, before, bindings)?;
    apply_gates_sv(v, std::slice::from_ref(gate), bindings)?;
    apply_gates_sv(v, &after[1..], bindings)?;
    Ok(psi)
}

/// Re-expresses a channel on `chan` qubits as Kraus operators on the gate's
/// local basis over `gate_qubits` (identity on the remaining operands).
fn lift(ch: &LocalChannel, gate_qubits: &[usize]) -> Vec<Vec<C>> {
    let k = gate_qubits.len();
    let d = 1usize << k;
    let cd = ch.channel.dim();
    // position of each channel qubit within the gate operands
    let slots: Vec<usize> = ch
        .qubits
        .iter()
        .map(|q| gate_qubits.iter().position(|g| g == q).expect("subset"))
        .collect();
    let slot_mask: usize = slots.iter().map(|s| 1usize << s).sum();
    let local = |l: usize| -> usize {
        slots
            .iter()
            .enumerate()
            .filter(|(_, &s)| l >> s & 1 == 1)
            .map(|(b, _)| 1usize << b)
            .sum()
    };
    ch.channel
        .operators()
        .iter()
        .map(|op| {
            let mut m = vec![C::new(0.0, 0.0); d * d];
            for r in 0..d {
                for c in 0..d {
                    if r & !slot_mask == c & !slot_mask {
                        m[r * d + c] = op[local(r) * cd + local(c)];
                    }
                }
            }
            m
        })
        .collect()
}

fn apply_channel(rho: &mut DensityMatrix, ch: &LocalChannel) {
    let dim = rho.dim();
    let s = Superop::from_kraus(ch.channel.dim(), ch.channel.operators());
    apply_superop(rho.data_mut(), dim, &ch.qubits, &s);
}

fn gate_superop(g: &Gate, bindings: &[f64]) -> Result<Option<Superop>> {
    if let Some(m) = gate_matrix_1q(g, bindings)? {
        return Ok(Some(Superop::from_unitary(2, &m)));
    }
    Ok(gate_matrix_2q(g).map(|m| Superop::from_unitary(4, &m)))
}

/// Evolves `|0...0><0...0|` through the circuit. With a noise model the
/// circuit is first lowered to the native gate set so that gate durations
/// are well defined, and each gate is followed by the model's channels.
pub fn run_density(
    circuit: &Circuit,
    bindings: &[f64],
    noise: Option<&NoiseModel>,
) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    if n > DENSITY_LIMIT {
        return Err(Error::TooWide {
            width: n,
            limit: DENSITY_LIMIT,
        });
    }
    circuit.check_bindings(bindings)?;
    let noise = noise.filter(|m| !m.is_noiseless());
    let lowered;
    let circuit = if noise.is_some() {
        lowered = transpile_native(circuit);
        &lowered
    } else {
        circuit
    };
    let mut rho = DensityMatrix::zero(n)?;
    let dim = rho.dim();
    for g in circuit.gates() {
        let qubits = g.qubits();
        let channels = match noise {
            Some(m) => m.channels_after(g)?,
            None => Vec::new(),
        };
        match gate_superop(g, bindings)? {
            Some(mut s) => {
                let mut rest = Vec::new();
                for ch in channels {
                    if ch.qubits.iter().all(|q| qubits.contains(q)) {
                        let ops = lift(&ch, &qubits);
                        s = s.then(&Superop::from_kraus(s.d, &ops));
                    } else {
                        rest.push(ch);
                    }
                }
                apply_superop(rho.data_mut(), dim, &qubits, &s);
                for ch in &rest {
                    apply_channel(&mut rho, ch);
                }
            }
            None => {
                let Gate::PauliEvolution { string, angle } = g else {
                    unreachable!("every non-evolution gate has a matrix")
                };
                let theta = angle
                    .resolve(bindings)
                    .ok_or_else(|| Error::UnboundParameter(format!("{angle:?}")))?;
                apply_pauli_rotation_dm(rho.data_mut(), dim, &string.masks(), theta);
                for ch in &channels {
                    apply_channel(&mut rho, ch);
                }
            }
        }
    }
    if let Some(m) = noise {
        for ch in m.measurement_channels(n)? {
            apply_channel(&mut rho, &ch);
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, QuantumState};
    use crate::noise::{build_noise_model, QubitTimes};
    use crate::pauli::PauliString;

    #[test]
    fn empty_circuit_is_all_zeros() {
        let psi = run_statevector(&Circuit::new(2), &[]).unwrap();
        assert_eq!(psi.amplitudes()[0], C::new(1.0, 0.0));
    }

    #[test]
    fn x_then_cnot_sets_both() {
        let mut c = Circuit::new(2);
        c.push(Gate::X { qubit: 0 }).unwrap();
        c.push(Gate::CNOT { control: 0, target: 1 }).unwrap();
        let psi = run_statevector(&c, &[]).unwrap();
        assert!((psi.amplitudes()[3] - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unbound_parameter() {
        let mut c = Circuit::new(1);
        let p = c.add_parameter("t");
        c.push(Gate::RY { qubit: 0, theta: Angle::param(p) }).unwrap();
        assert!(matches!(run_statevector(&c, &[]), Err(Error::UnboundParameter(_))));
    }

    #[test]
    fn invalid_operands_rejected() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::CNOT { control: 1, target: 1 }).is_err());
        assert!(c.push(Gate::H { qubit: 2 }).is_err());
        assert!(c.push(Gate::RZ { qubit: 0, theta: Angle::param(0) }).is_err());
    }

    #[test]
    fn density_matches_statevector_without_noise() {
        let mut c = Circuit::new(3);
        c.push(Gate::H { qubit: 0 }).unwrap();
        c.push(Gate::CNOT { control: 0, target: 2 }).unwrap();
        c.push(Gate::RY { qubit: 1, theta: 0.4.into() }).unwrap();
        c.push(Gate::PauliEvolution {
            string: PauliString::from_label("X0 Y1 Z2").unwrap(),
            angle: 0.9.into(),
        })
        .unwrap();
        c.push(Gate::SWAP { a: 1, b: 2 }).unwrap();
        let psi = run_statevector(&c, &[]).unwrap();
        let rho = run_density(&c, &[], None).unwrap();
        let pure = psi.to_density().unwrap();
        for (a, b) in rho.data().iter().zip(pure.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hadamard_then_thermal_relaxation() {
        let times = vec![QubitTimes { t1: 50.0, t2: 70.0 }];
        let model = build_noise_model(times, [0], 1.0)
            .unwrap()
            .with_durations(crate::noise::Durations {
                u2: 100.0,
                ..Default::default()
            });
        let mut c = Circuit::new(1);
        c.push(Gate::H { qubit: 0 }).unwrap();
        let rho = run_density(&c, &[], Some(&model)).unwrap();
        let expected = 0.5 * (-100.0f64 / 1000.0 / 70.0).exp();
        assert!((rho.get(0, 1).norm() - expected).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_depolarizing_mixes_target() {
        let model = NoiseModel::depolarizing([0], 1.0, 1.0).unwrap();
        let mut c = Circuit::new(2);
        c.push(Gate::X { qubit: 0 }).unwrap();
        let rho = run_density(&c, &[], Some(&model)).unwrap();
        let r0 = rho.reduced(&[0]).unwrap();
        assert!((r0.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((r0.get(1, 1).re - 0.5).abs() < 1e-12);
        let r1 = rho.reduced(&[1]).unwrap();
        assert!((r1.get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_depolarizing_on_cnot() {
        let model = NoiseModel::depolarizing([0, 1], 0.0, 1.0).unwrap();
        let mut c = Circuit::new(2);
        c.push(Gate::CNOT { control: 1, target: 0 }).unwrap();
        let rho = run_density(&c, &[], Some(&model)).unwrap();
        for i in 0..4 {
            assert!((rho.get(i, i).re - 0.25).abs() < 1e-12);
        }
        let z = PauliString::from_label("Z0 Z1").unwrap().masks();
        assert!(rho.pauli_expectation(&z).norm() < 1e-12);
    }
}
