use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{apply_gate_sv, run_statevector, Circuit, Gate, QuantumState, StateVector};
use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString, QubitOperator};

/// Outcome counts keyed by bitstring, qubit `n-1` leftmost.
pub type Histogram = BTreeMap<String, u64>;

fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn draw_indices(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(probs.iter().map(|p| p.max(0.0)))
        .map_err(|e| Error::DimensionMismatch(format!("cannot sample state: {e}")))?;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(rng)] += 1;
    }
    Ok(counts)
}

/// Computational-basis samples; the same seed always gives the same histogram.
pub fn sample_counts<S: QuantumState + ?Sized>(state: &S, shots: u64, seed: u64) -> Result<Histogram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = draw_indices(&state.probabilities(), shots, &mut rng)?;
    let n = state.num_qubits();
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (bitstring(i, n), c))
        .collect())
}

/// First-fit grouping of the non-identity terms into qubit-wise commuting
/// sets. Returns term indices per group and the merged measurement basis.
pub fn group_qubit_wise(op: &QubitOperator) -> Vec<(Vec<usize>, PauliString)> {
    let mut groups: Vec<(Vec<usize>, PauliString)> = Vec::new();
    for (i, (_, s)) in op.terms().iter().enumerate() {
        if s.is_identity() {
            continue;
        }
        match groups.iter_mut().find(|(_, basis)| basis.qubit_wise_commutes(s)) {
            Some((members, basis)) => {
                members.push(i);
                let merged = basis.iter().chain(s.iter()).collect::<BTreeMap<_, _>>();
                *basis = PauliString::from_factors(merged).expect("distinct qubits");
            }
            None => groups.push((vec![i], s.clone())),
        }
    }
    groups
}

fn rotate_to_z(psi: &mut StateVector, basis: &PauliString) {
    for (q, a) in basis.iter() {
        let gates: &[Gate] = match a {
            Axis::Z => &[],
            Axis::X => &[Gate::H { qubit: q }],
            Axis::Y => &[
                Gate::U1 {
                    qubit: q,
                    lambda: super::Angle::Fixed(-FRAC_PI_2),
                },
                Gate::H { qubit: q },
            ],
        };
        for g in gates {
            apply_gate_sv(psi.amplitudes_mut(), g, &[]).expect("literal angles");
        }
    }
}

/// Shot-based estimate of `<op>`: identity terms are added exactly, the rest
/// are measured group by group in a rotated basis with the shot budget split
/// evenly (remainder to the first groups).
pub fn estimate_expectation_sampled(
    op: &QubitOperator,
    circuit: &Circuit,
    bindings: &[f64],
    shots: u64,
    seed: u64,
) -> Result<f64> {
    let width = op.num_qubits();
    if circuit.n_qubits() < width {
        return Err(Error::WidthMismatch {
            expected: width,
            found: circuit.n_qubits(),
        });
    }
    let psi = run_statevector(circuit, bindings)?;
    let mut total: f64 = op
        .terms()
        .iter()
        .filter(|(_, s)| s.is_identity())
        .map(|(c, _)| c.re)
        .sum();
    let groups = group_qubit_wise(op);
    if groups.is_empty() {
        return Ok(total);
    }
    let per = shots / groups.len() as u64;
    let extra = shots % groups.len() as u64;
    for (g, (members, basis)) in groups.iter().enumerate() {
        let n_shots = (per + u64::from((g as u64) < extra)).max(1);
        let mut rotated = psi.clone();
        rotate_to_z(&mut rotated, basis);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(g as u64);
        let counts = draw_indices(&rotated.probabilities(), n_shots, &mut rng)?;
        for &t in members {
            let (c, s) = &op.terms()[t];
            let mask: usize = s.qubits().map(|q| 1usize << q).sum();
            let signed: i64 = counts
                .iter()
                .enumerate()
                .filter(|&(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let parity = (i & mask).count_ones() % 2;
                    if parity == 0 {
                        k as i64
                    } else {
                        -(k as i64)
                    }
                })
                .sum();
            total += c.re * signed as f64 / n_shots as f64;
        }
    }
    Ok(total)
}
