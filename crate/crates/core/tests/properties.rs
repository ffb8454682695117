mod common;

use proptest::prelude::*;

use aimvqe::ansatz::AnsatzFamily;
use aimvqe::pauli::{Axis, PauliString};
use aimvqe::spectral::exact_ground_state;
use aimvqe::topology::CouplingMap;
use aimvqe::vqe::{evaluate_energy, Backend, OptimizerConfig, VqeRun};

use common::*;

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(|axes| {
        PauliString::from_factors(axes.iter().enumerate().filter_map(|(q, &a)| {
            let axis = match a {
                1 => Axis::X,
                2 => Axis::Y,
                3 => Axis::Z,
                _ => return None,
            };
            Some((q, axis))
        }))
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jordan_wigner_matches_fock_space(n_imp in 1usize..=2, n_bath in 0usize..=1, seed in any::<u64>()) {
        let p = random_aim(n_imp, n_bath, &mut rng(seed));
        prop_assert!(jw_bruteforce_error(&p) <= 1e-10);
    }

    #[test]
    fn kraus_channels_complete(t1 in 1.0f64..200.0, ratio in 0.05f64..2.0, duration in 0.0f64..2000.0, p in 0.0f64..=1.0) {
        prop_assert!(kraus_completeness_error(t1, ratio * t1, duration, p) <= 1e-12);
    }

    #[test]
    fn pauli_evolution_is_matrix_exponential(s in pauli_string(3), t in -10.0f64..10.0) {
        prop_assert!(pauli_evolution_error(&s, 3, t) <= 1e-12);
    }

    #[test]
    fn routing_preserves_the_state(perm in Just((0..7).collect::<Vec<usize>>()).prop_shuffle(), seed in any::<u64>()) {
        let c = six_qubit_ansatz(AnsatzFamily::GeneralizedUCCS);
        let params = random_params(c.num_parameters(), &mut rng(seed));
        let f = routing_fidelity(&c, &params, &CouplingMap::heavy_hex_7(), perm[..6].to_vec());
        prop_assert!(f >= 1.0 - 1e-10, "fidelity {}", f);
    }

    #[test]
    fn relabelling_keeps_the_spectrum(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let h = load("hamiltonian_6q.txt");
        let e0 = exact_ground_state(&h).unwrap().energy;
        let e1 = exact_ground_state(&h.relabel(&perm).unwrap()).unwrap().energy;
        prop_assert!((e0 - e1).abs() <= 1e-10);
    }
}

#[test]
fn variational_bound_on_random_parameters() {
    let h = load("hamiltonian_6q.txt");
    let e0 = exact_ground_state(&h).unwrap().energy;
    let mut r = rng(11);
    for family in [AnsatzFamily::GeneralizedUCCSD, AnsatzFamily::EfficientSU2] {
        let c = six_qubit_ansatz(family);
        let run = VqeRun::new(h.clone(), c.clone(), Backend::Exact, OptimizerConfig::gradient_descent(1), 0);
        for _ in 0..100 {
            let e = evaluate_energy(&run, &random_params(c.num_parameters(), &mut r)).unwrap();
            assert!(e >= e0 - 1e-10, "{family:?}: {e} below {e0}");
        }
    }
}
