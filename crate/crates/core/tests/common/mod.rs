//! Independent checks shared by the property suites and the acceptance run.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aimvqe::ansatz::{build_ansatz, AnsatzFamily, AnsatzSpec};
use aimvqe::circuit::{run_statevector, run_statevector_from, Angle, Circuit, Gate, StateVector};
use aimvqe::fermion::{build_aim_hamiltonian, AimParameters, SpinOrbitalIndexing};
use aimvqe::noise::{depolarizing_channel, thermal_relaxation_channel, Durations, NoiseModel};
use aimvqe::pauli::{parse_operator, PauliString, QubitOperator};
use aimvqe::topology::{route_circuit, CouplingMap, Placement};

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

pub fn load(name: &str) -> QubitOperator {
    parse_operator(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

/// Annihilator on `n` modes built directly on occupation bitstrings, with the
/// sign counting occupied modes below `j`.
pub fn fermion_annihilator(j: usize, n: usize) -> DMatrix<C> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        if b >> j & 1 == 1 {
            let sign = if (b & ((1 << j) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(b ^ (1 << j), b)] = C::new(sign, 0.0);
        }
    }
    m
}

/// Random real AIM parameters on `n_impurity + n_bath` sites.
pub fn random_aim(n_impurity: usize, n_bath: usize, rng: &mut impl Rng) -> AimParameters {
    let mut p = AimParameters::zeros(n_impurity, n_bath);
    for m in 0..n_bath {
        for k in m..n_bath {
            let e = rng.random_range(-1.0..1.0);
            p.eps_n[(m, k)] = e;
            p.eps_n[(k, m)] = e;
            if k != m {
                let a = rng.random_range(-1.0..1.0);
                p.eps_a[(m, k)] = a;
                p.eps_a[(k, m)] = -a;
            }
        }
        for i in 0..n_impurity {
            p.v[(m, i)] = rng.random_range(-1.0..1.0);
        }
    }
    p.mu = rng.random_range(-1.0..1.0);
    p.u = rng.random_range(0.0..1.0);
    p
}

/// Largest entry of `JW(H) - H_fock` with the Fock-space Hamiltonian
/// assembled from [`fermion_annihilator`] matrices.
pub fn jw_bruteforce_error(p: &AimParameters) -> f64 {
    let idx = SpinOrbitalIndexing::new(p.n_sites());
    let n = idx.n_qubits();
    let jw = build_aim_hamiltonian(p, &idx).unwrap().to_matrix(n).unwrap();
    let a: Vec<DMatrix<C>> = (0..n).map(|j| fermion_annihilator(j, n)).collect();
    let ad: Vec<DMatrix<C>> = a.iter().map(|m| m.adjoint()).collect();
    let dim = 1 << n;
    let mut h = DMatrix::<C>::zeros(dim, dim);
    let q = |site: usize, spin: usize| 2 * site + spin;
    let r = |x: f64| C::new(x, 0.0);
    for s in 0..2 {
        for m in 0..p.n_bath {
            for k in 0..p.n_bath {
                let (bm, bk) = (p.n_impurity + m, p.n_impurity + k);
                h += &ad[q(bm, s)] * &a[q(bk, s)] * r(p.eps_n[(m, k)]);
                let pair = &ad[q(bm, s)] * &ad[q(bk, 1 - s)];
                h += (&pair + pair.adjoint()) * r(p.eps_a[(m, k)]);
            }
            for i in 0..p.n_impurity {
                let hop = &ad[q(p.n_impurity + m, s)] * &a[q(i, s)];
                h += (&hop + hop.adjoint()) * r(p.v[(m, i)]);
            }
        }
        for i in 0..p.n_impurity {
            h += &ad[q(i, s)] * &a[q(i, s)] * r(p.mu);
        }
    }
    for i in 0..p.n_impurity {
        h += &ad[q(i, 0)] * &a[q(i, 0)] * &ad[q(i, 1)] * &a[q(i, 1)] * r(p.u);
    }
    (jw - h).camax()
}

/// Largest completeness defect over the channels a thermal-plus-depolarizing
/// model attaches to one- and two-qubit gates.
pub fn kraus_completeness_error(t1: f64, t2: f64, duration: f64, p: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut check = |e: f64| worst = worst.max(e);
    let th = thermal_relaxation_channel(t1, t2, duration).unwrap();
    check(th.completeness_error());
    let d1 = depolarizing_channel(p, 1).unwrap();
    let d2 = depolarizing_channel(p, 2).unwrap();
    check(d1.completeness_error());
    check(d2.completeness_error());
    check(th.then(&d1).unwrap().completeness_error());
    let times = aimvqe::noise::sample_qubit_times(2, 1, t1, 0.0, t2, 0.0).unwrap();
    let model = aimvqe::noise::build_noise_model(times, [0, 1], 1.0)
        .unwrap()
        .with_durations(Durations::default())
        .with_depolarizing(p, p)
        .unwrap();
    for g in [
        Gate::U3 {
            qubit: 0,
            theta: Angle::Fixed(0.1),
            phi: Angle::Fixed(0.2),
            lambda: Angle::Fixed(0.3),
        },
        Gate::CNOT { control: 0, target: 1 },
    ] {
        for ch in model.channels_after(&g).unwrap() {
            check(ch.channel.completeness_error());
        }
    }
    worst
}

fn circuit_unitary(c: &Circuit) -> DMatrix<C> {
    let n = c.n_qubits();
    let dim = 1 << n;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let psi = run_statevector_from(c, &[], StateVector::basis(n, col).unwrap()).unwrap();
        for (row, a) in psi.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    u
}

/// `|| U_circuit(exp(-i t/2 P)) - expm(-i t/2 P) ||_max`.
pub fn pauli_evolution_error(p: &PauliString, n: usize, t: f64) -> f64 {
    let mut c = Circuit::new(n);
    c.push(Gate::PauliEvolution {
        string: p.clone(),
        angle: Angle::Fixed(t),
    })
    .unwrap();
    let pm = QubitOperator::term(C::new(1.0, 0.0), p.clone()).to_matrix(n).unwrap();
    let expm = (pm * C::new(0.0, -t / 2.0)).exp();
    (circuit_unitary(&c) - expm).camax()
}

/// Fidelity between the routed circuit's output and the logical output placed
/// on the final layout, ancillas in `|0>`.
pub fn routing_fidelity(c: &Circuit, params: &[f64], map: &CouplingMap, mapping: Vec<usize>) -> f64 {
    let placement = Placement::new("p", mapping, map.n_physical()).unwrap();
    let (routed, layout) = route_circuit(c, map, &placement).unwrap();
    let logical = run_statevector(c, params).unwrap();
    let physical = run_statevector(&routed, params).unwrap();
    let mut expected = vec![C::new(0.0, 0.0); 1 << map.n_physical()];
    for (b, a) in logical.amplitudes().iter().enumerate() {
        let idx: usize = layout
            .iter()
            .enumerate()
            .filter(|(l, _)| b >> l & 1 == 1)
            .map(|(_, &ph)| 1 << ph)
            .sum();
        expected[idx] = *a;
    }
    physical
        .fidelity(&StateVector::from_amplitudes(expected).unwrap())
        .unwrap()
}

pub fn random_params(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

pub fn six_qubit_ansatz(family: AnsatzFamily) -> Circuit {
    build_ansatz(&AnsatzSpec {
        family,
        n_qubits: 6,
        reps: 2,
        reference: vec![0, 1, 2, 3],
    })
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Thermal model on qubits `0..n` with the default gate durations.
pub fn thermal_model(n: usize, seed: u64) -> NoiseModel {
    let times = aimvqe::noise::sample_qubit_times(n, seed, 50.0, 10.0, 70.0, 10.0).unwrap();
    aimvqe::noise::build_noise_model(times, 0..n, 1.0)
        .unwrap()
        .with_durations(Durations::default())
}
