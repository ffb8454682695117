//! The variational loop: energy evaluation on the three backends, gradients,
//! optimizers and the per-iteration trace.

mod optimize;

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::AnsatzSpec;
use crate::circuit::{
    estimate_expectation_sampled, run_density, run_statevector, run_statevector_replacing, Circuit,
    QuantumState,
};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::{CompiledTerm, QubitOperator};

pub use optimize::run_vqe_with;

/// Relative energy change below which a deterministic run counts as converged.
pub const CONVERGENCE_RTOL: f64 = 1e-8;
/// Window, in iterations, over which [`CONVERGENCE_RTOL`] is checked.
pub const CONVERGENCE_WINDOW: usize = 10;
const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    Exact,
    Sampled { shots: u64, seed: u64 },
    Density { noise: Option<NoiseModel> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Spsa {
        a: f64,
        c: f64,
        alpha: f64,
        gamma: f64,
        stability: f64,
        max_iterations: usize,
        seed: u64,
    },
    NelderMead {
        initial_scale: f64,
        x_tol: f64,
        f_tol: f64,
        max_iterations: usize,
    },
    ParameterShiftGd {
        learning_rate: f64,
        max_iterations: usize,
        gradient_tol: f64,
    },
}

impl OptimizerConfig {
    pub fn spsa(max_iterations: usize, seed: u64) -> Self {
        OptimizerConfig::Spsa {
            a: 0.2,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            stability: 0.1 * max_iterations as f64,
            max_iterations,
            seed,
        }
    }

    pub fn nelder_mead(max_iterations: usize) -> Self {
        OptimizerConfig::NelderMead {
            initial_scale: 0.1,
            x_tol: 1e-8,
            f_tol: 1e-10,
            max_iterations,
        }
    }

    pub fn gradient_descent(max_iterations: usize) -> Self {
        OptimizerConfig::ParameterShiftGd {
            learning_rate: 1.0,
            max_iterations,
            gradient_tol: 1e-6,
        }
    }

    pub fn max_iterations(&self) -> usize {
        match *self {
            OptimizerConfig::Spsa { max_iterations, .. }
            | OptimizerConfig::NelderMead { max_iterations, .. }
            | OptimizerConfig::ParameterShiftGd { max_iterations, .. } => max_iterations,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, OptimizerConfig::Spsa { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let positive: Vec<(&str, f64)> = match *self {
            OptimizerConfig::Spsa {
                a, c, alpha, gamma, ..
            } => vec![("a", a), ("c", c), ("alpha", alpha), ("gamma", gamma)],
            OptimizerConfig::NelderMead {
                initial_scale,
                x_tol,
                f_tol,
                ..
            } => vec![
                ("initial_scale", initial_scale),
                ("x_tol", x_tol),
                ("f_tol", f_tol),
            ],
            OptimizerConfig::ParameterShiftGd {
                learning_rate,
                gradient_tol,
                ..
            } => vec![("learning_rate", learning_rate), ("gradient_tol", gradient_tol)],
        };
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::config(
                    format!("optimizer.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if let OptimizerConfig::Spsa { stability, .. } = *self {
            if !(stability >= 0.0) {
                return Err(Error::config("optimizer.stability", "must be non-negative"));
            }
        }
        if self.max_iterations() == 0 {
            return Err(Error::config("optimizer.max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VqeRun {
    /// Must act on the circuit's qubits (relabel it after routing).
    pub hamiltonian: QubitOperator,
    pub ansatz: Option<AnsatzSpec>,
    pub circuit: Circuit,
    pub backend: Backend,
    pub optimizer: OptimizerConfig,
    pub initial: Vec<f64>,
    pub seed: u64,
}

impl VqeRun {
    /// Zero initial parameters, i.e. the reference state for UCC circuits.
    pub fn new(
        hamiltonian: QubitOperator,
        circuit: Circuit,
        backend: Backend,
        optimizer: OptimizerConfig,
        seed: u64,
    ) -> Self {
        Self {
            initial: vec![0.0; circuit.num_parameters()],
            hamiltonian,
            ansatz: None,
            circuit,
            backend,
            optimizer,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial.len() != self.circuit.num_parameters() {
            return Err(Error::DimensionMismatch(format!(
                "{} initial parameters for a circuit with {}",
                self.initial.len(),
                self.circuit.num_parameters()
            )));
        }
        if self.hamiltonian.num_qubits() > self.circuit.n_qubits() {
            return Err(Error::WidthMismatch {
                expected: self.hamiltonian.num_qubits(),
                found: self.circuit.n_qubits(),
            });
        }
        self.optimizer.validate()
    }
}

/// Maps an angle onto `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta - 2.0 * PI * ((theta - PI) / (2.0 * PI)).ceil();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Short hex digest identifying a parameter vector bit-for-bit.
pub fn params_hash(params: &[f64]) -> String {
    let mut h = Sha256::new();
    for p in params {
        h.update(p.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Energy evaluator with the Hamiltonian compiled once.
pub(crate) struct Objective<'a> {
    run: &'a VqeRun,
    terms: Vec<CompiledTerm>,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(run: &'a VqeRun) -> Self {
        Self {
            terms: run.hamiltonian.compile(),
            run,
        }
    }

    fn energy_of<S: QuantumState>(&self, state: &S) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * state.pauli_expectation(&t.masks)).re)
            .sum()
    }

    fn evaluate_circuit(&self, circuit: &Circuit, params: &[f64], sample_seed: u64) -> Result<f64> {
        let params: Vec<f64> = params.iter().map(|&t| wrap_angle(t)).collect();
        match &self.run.backend {
            Backend::Exact => Ok(self.energy_of(&run_statevector(circuit, &params)?)),
            Backend::Sampled { shots, .. } => estimate_expectation_sampled(
                &self.run.hamiltonian,
                circuit,
                &params,
                *shots,
                sample_seed,
            ),
            Backend::Density { noise } => {
                Ok(self.energy_of(&run_density(circuit, &params, noise.as_ref())?))
            }
        }
    }

    /// Energy with the `k`-th derived sampling seed.
    pub(crate) fn evaluate(&self, params: &[f64], k: u64) -> Result<f64> {
        self.evaluate_circuit(&self.run.circuit, params, self.sample_seed(k))
    }

    fn sample_seed(&self, k: u64) -> u64 {
        match self.run.backend {
            Backend::Sampled { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.run.seed);
                rng.set_stream(k);
                rng.next_u64()
            }
            _ => 0,
        }
    }

    /// Parameter-shift gradient; evaluations are independent and run in
    /// parallel, then summed in gate order.
    pub(crate) fn shift_gradient(&self, params: &[f64]) -> Result<(Vec<f64>, usize)> {
        if self.run.backend != Backend::Exact {
            return Err(Error::UnsupportedAnsatz(
                "parameter-shift gradients need the exact backend".into(),
            ));
        }
        let circuit = &self.run.circuit;
        let wrapped: Vec<f64> = params.iter().map(|&t| wrap_angle(t)).collect();
        let mut jobs = Vec::new();
        for p in 0..params.len() {
            for (g, scale) in circuit.parameter_occurrences(p) {
                let mut probe = circuit.gates()[g].clone();
                if probe.rotation_angle_mut().is_none() {
                    return Err(Error::UnsupportedAnsatz(format!(
                        "parameter {p} drives a {} gate, which has no shift rule",
                        probe.kind()
                    )));
                }
                jobs.push((p, g, scale));
            }
        }
        let terms: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(_, g, scale)| {
                let mut e = [0.0; 2];
                for (slot, delta) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
                    let mut probe = circuit.gates()[g].clone();
                    let angle = probe.rotation_angle_mut().expect("checked above");
                    *angle = angle.shifted(&wrapped, delta);
                    let psi = run_statevector_replacing(circuit, &wrapped, g, &probe)?;
                    e[slot] = self.energy_of(&psi);
                }
                Ok(scale * (e[0] - e[1]) / 2.0)
            })
            .collect();
        let mut grad = vec![0.0; params.len()];
        for (&(p, _, _), t) in jobs.iter().zip(terms) {
            grad[p] += t?;
        }
        Ok((grad, 2 * jobs.len()))
    }

    /// Central differences with step `h`, one derived seed per probe.
    pub(crate) fn finite_difference_gradient(
        &self,
        params: &[f64],
        h: f64,
        first_eval: u64,
    ) -> Result<(Vec<f64>, usize)> {
        let grad = (0..params.len())
            .into_par_iter()
            .map(|i| {
                let mut x = params.to_vec();
                x[i] = params[i] + h;
                let up = self.evaluate(&x, first_eval + 2 * i as u64)?;
                x[i] = params[i] - h;
                let down = self.evaluate(&x, first_eval + 2 * i as u64 + 1)?;
                Ok((up - down) / (2.0 * h))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((grad, 2 * params.len()))
    }
}

/// Energy at `params` (wrapped onto `(-pi, pi]`) on the run's backend. The
/// sampled backend uses its own seed directly.
pub fn evaluate_energy(run: &VqeRun, params: &[f64]) -> Result<f64> {
    run.circuit.check_bindings(params)?;
    let obj = Objective::new(run);
    match run.backend {
        Backend::Sampled { shots, seed } => estimate_expectation_sampled(
            &run.hamiltonian,
            &run.circuit,
            &params.iter().map(|&t| wrap_angle(t)).collect::<Vec<_>>(),
            shots,
            seed,
        ),
        _ => obj.evaluate(params, 0),
    }
}

/// Exact-backend gradient by the two-point shift rule, summed over every
/// gate the parameter drives. Other backends get
/// [`Error::UnsupportedAnsatz`]; use [`finite_difference_gradient`] there.
pub fn parameter_shift_gradient(run: &VqeRun, params: &[f64]) -> Result<Vec<f64>> {
    run.circuit.check_bindings(params)?;
    Ok(Objective::new(run).shift_gradient(params)?.0)
}

/// Central finite differences with step `1e-5`.
pub fn finite_difference_gradient(run: &VqeRun, params: &[f64]) -> Result<Vec<f64>> {
    run.circuit.check_bindings(params)?;
    Ok(Objective::new(run)
        .finite_difference_gradient(params, FD_STEP, 0)?
        .0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub params_hash: String,
    /// Cumulative energy evaluations.
    pub evaluations: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EnergyStalled,
    GradientTolerance,
    SimplexTolerance,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub final_energy: f64,
    pub final_params: Vec<f64>,
    pub converged: bool,
    pub reason: StopReason,
}

impl ConvergenceTrace {
    /// Lowest energy seen up to each iteration.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.records
            .iter()
            .scan(f64::INFINITY, |best, r| {
                *best = best.min(r.energy);
                Some(*best)
            })
            .collect()
    }

    pub fn evaluations(&self) -> usize {
        self.records.last().map_or(0, |r| r.evaluations)
    }
}

/// Runs the optimizer to convergence or its iteration budget.
pub fn run_vqe(run: &VqeRun) -> Result<ConvergenceTrace> {
    run_vqe_with(run, |_| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz, AnsatzFamily};
    use crate::circuit::{Angle, Gate};
    use crate::pauli::PauliString;
    use num_complex::Complex64 as C;

    fn op(terms: &[(f64, &str)]) -> QubitOperator {
        QubitOperator::from_terms(
            terms
                .iter()
                .map(|(c, l)| (C::new(*c, 0.0), PauliString::from_label(l).unwrap()))
                .collect(),
        )
    }

    fn toy_run(backend: Backend) -> VqeRun {
        let h = op(&[(0.5, "Z0"), (-0.3, "Z1"), (0.2, "X0 X1"), (0.2, "Y0 Y1"), (-0.1, "Z0 Z1")]);
        let spec = AnsatzSpec {
            family: AnsatzFamily::GeneralizedUCCSD,
            n_qubits: 2,
            reps: 0,
            reference: vec![0],
        };
        let c = build_ansatz(&spec).unwrap();
        VqeRun::new(h, c, backend, OptimizerConfig::gradient_descent(200), 7)
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn identity_energy() {
        let mut run = toy_run(Backend::Exact);
        run.hamiltonian = QubitOperator::identity(-0.42);
        assert!((evaluate_energy(&run, &[0.3]).unwrap() + 0.42).abs() < 1e-14);
        let t = run_vqe(&run).unwrap();
        assert!(t.converged);
        assert_eq!(t.records.last().unwrap().iteration, 0);
        assert!((t.final_energy + 0.42).abs() < 1e-14);
    }

    #[test]
    fn shift_matches_finite_differences() {
        let run = toy_run(Backend::Exact);
        for x in [-1.1, 0.2, 2.5] {
            let g = parameter_shift_gradient(&run, &[x]).unwrap();
            let f = finite_difference_gradient(&run, &[x]).unwrap();
            assert!((g[0] - f[0]).abs() < 1e-5, "{g:?} {f:?}");
        }
    }

    #[test]
    fn shift_rule_on_hardware_rotations() {
        let mut c = Circuit::new(2);
        c.add_parameter("a");
        c.add_parameter("b");
        c.push(Gate::RY { qubit: 0, theta: Angle::param(0) }).unwrap();
        c.push(Gate::CNOT { control: 0, target: 1 }).unwrap();
        c.push(Gate::RX { qubit: 1, theta: Angle::Param { index: 1, scale: -0.5 } }).unwrap();
        c.push(Gate::RZ { qubit: 0, theta: Angle::param(1) }).unwrap();
        c.push(Gate::RY { qubit: 0, theta: Angle::param(1) }).unwrap();
        let h = op(&[(1.0, "X0 Z1"), (0.4, "Y1"), (-0.6, "Z0")]);
        let run = VqeRun::new(h, c, Backend::Exact, OptimizerConfig::gradient_descent(1), 0);
        let x = [0.7, -1.3];
        let g = parameter_shift_gradient(&run, &x).unwrap();
        let f = finite_difference_gradient(&run, &x).unwrap();
        for i in 0..2 {
            assert!((g[i] - f[i]).abs() < 1e-6, "{g:?} {f:?}");
        }
    }

    #[test]
    fn shift_needs_exact_backend() {
        let run = toy_run(Backend::Density { noise: None });
        assert!(matches!(
            parameter_shift_gradient(&run, &[0.0]),
            Err(Error::UnsupportedAnsatz(_))
        ));
    }

    #[test]
    fn zero_hamiltonian_gradient() {
        let mut run = toy_run(Backend::Exact);
        run.hamiltonian = QubitOperator::zero();
        assert_eq!(parameter_shift_gradient(&run, &[0.9]).unwrap(), vec![0.0]);
    }

    #[test]
    fn toy_optimizers_reach_ground_state() {
        let exact = crate::spectral::exact_ground_state(&toy_run(Backend::Exact).hamiltonian)
            .unwrap()
            .energy;
        // the single-excitation landscape has curvature ~3.6, so a unit step diverges
        for opt in [
            OptimizerConfig::ParameterShiftGd {
                learning_rate: 0.25,
                max_iterations: 300,
                gradient_tol: 1e-6,
            },
            OptimizerConfig::nelder_mead(300),
        ] {
            let mut run = toy_run(Backend::Exact);
            run.optimizer = opt.clone();
            let t = run_vqe(&run).unwrap();
            assert!(t.final_energy - exact < 1e-6, "{opt:?}: {} vs {exact}", t.final_energy);
            assert!(t.final_energy >= exact - 1e-10);
        }
        let mut run = toy_run(Backend::Exact);
        run.optimizer = OptimizerConfig::spsa(400, 3);
        let t = run_vqe(&run).unwrap();
        assert_eq!(t.records.len(), 400);
        assert!(t.final_energy - exact < 1e-3);
    }

    #[test]
    fn traces_are_reproducible() {
        for backend in [
            Backend::Exact,
            Backend::Sampled { shots: 500, seed: 11 },
        ] {
            let mut run = toy_run(backend);
            run.optimizer = OptimizerConfig::spsa(30, 5);
            let a = run_vqe(&run).unwrap();
            let b = run_vqe(&run).unwrap();
            let strip = |t: &ConvergenceTrace| {
                t.records
                    .iter()
                    .map(|r| (r.iteration, r.energy.to_bits(), r.params_hash.clone(), r.evaluations))
                    .collect::<Vec<_>>()
            };
            assert_eq!(strip(&a), strip(&b));
        }
    }

    #[test]
    fn rejects_bad_runs() {
        let mut run = toy_run(Backend::Exact);
        run.initial = vec![0.0, 1.0];
        assert!(matches!(run_vqe(&run), Err(Error::DimensionMismatch(_))));
        let mut run = toy_run(Backend::Exact);
        run.optimizer = OptimizerConfig::ParameterShiftGd {
            learning_rate: 0.0,
            max_iterations: 5,
            gradient_tol: 1e-6,
        };
        assert!(matches!(run_vqe(&run), Err(Error::Config { .. })));
    }
}
