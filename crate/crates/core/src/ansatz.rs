//! Excitation pools, unitary coupled-cluster circuits and the layered
//! hardware-efficient ansatz.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};
use crate::fermion::{jw_annihilation, jw_creation, SpinOrbitalIndexing};
use crate::pauli::{Axis, PauliString, QubitOperator};

const GENERATOR_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Excitation {
    /// `a+_q a_p`, `p < q`
    Single { p: usize, q: usize },
    /// `a+_r a+_s a_q a_p`, `p < q`, `r < s`, `(p, q) < (r, s)`, disjoint pairs
    Double { p: usize, q: usize, r: usize, s: usize },
}

impl Excitation {
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Excitation::Single { p, q } => vec![p, q],
            Excitation::Double { p, q, r, s } => vec![p, q, r, s],
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Excitation::Single { p, q } => format!("s({p},{q})"),
            Excitation::Double { p, q, r, s } => format!("d({p},{q},{r},{s})"),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        for i in self.indices() {
            Error::check_index(i, n)?;
        }
        let ok = match *self {
            Excitation::Single { p, q } => p < q,
            Excitation::Double { p, q, r, s } => {
                p < q && r < s && (p, q) < (r, s) && ![r, s].contains(&p) && ![r, s].contains(&q)
            }
        };
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "excitation {} violates index ordering",
                self.label()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnsatzFamily {
    #[serde(rename = "generalized_uccs")]
    GeneralizedUCCS,
    #[serde(rename = "generalized_uccsd")]
    GeneralizedUCCSD,
    #[serde(rename = "spin_conserved_uccsd")]
    SpinConservedUCCSD,
    #[serde(rename = "efficient_su2")]
    EfficientSU2,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 4] = [
        AnsatzFamily::GeneralizedUCCS,
        AnsatzFamily::GeneralizedUCCSD,
        AnsatzFamily::SpinConservedUCCSD,
        AnsatzFamily::EfficientSU2,
    ];

    /// Config and CSV spelling.
    pub fn name(self) -> &'static str {
        match self {
            AnsatzFamily::GeneralizedUCCS => "generalized_uccs",
            AnsatzFamily::GeneralizedUCCSD => "generalized_uccsd",
            AnsatzFamily::SpinConservedUCCSD => "spin_conserved_uccsd",
            AnsatzFamily::EfficientSU2 => "efficient_su2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn is_ucc(self) -> bool {
        !matches!(self, AnsatzFamily::EfficientSU2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub n_qubits: usize,
    /// Entangling repetitions, EfficientSU2 only.
    pub reps: usize,
    /// Qubits set to one in the reference determinant.
    pub reference: Vec<usize>,
}

fn index_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).collect()
}

/// Singles then doubles, each in lexicographic order.
pub fn build_pool(spec: &AnsatzSpec) -> Result<Vec<Excitation>> {
    let n = spec.n_qubits;
    let spin = |q: usize| q % 2;
    let (singles_only, conserve) = match spec.family {
        AnsatzFamily::GeneralizedUCCS => (true, false),
        AnsatzFamily::GeneralizedUCCSD => (false, false),
        AnsatzFamily::SpinConservedUCCSD => {
            if n % 2 != 0 {
                return Err(Error::OddWidth(n));
            }
            (false, true)
        }
        AnsatzFamily::EfficientSU2 => {
            return Err(Error::UnsupportedAnsatz(
                "EfficientSU2 has no excitation pool".into(),
            ))
        }
    };
    let pairs = index_pairs(n);
    let mut pool: Vec<Excitation> = pairs
        .iter()
        .filter(|&&(p, q)| !conserve || spin(p) == spin(q))
        .map(|&(p, q)| Excitation::Single { p, q })
        .collect();
    if !singles_only {
        for (i, &(p, q)) in pairs.iter().enumerate() {
            for &(r, s) in &pairs[i + 1..] {
                if [r, s].contains(&p) || [r, s].contains(&q) {
                    continue;
                }
                if conserve && spin(p) + spin(q) != spin(r) + spin(s) {
                    continue;
                }
                pool.push(Excitation::Double { p, q, r, s });
            }
        }
    }
    Ok(pool)
}

/// JW image of `T - T^dagger`; every coefficient is purely imaginary.
pub fn excitation_to_generator(e: &Excitation, n: usize) -> Result<QubitOperator> {
    e.validate(n)?;
    let t = match *e {
        Excitation::Single { p, q } => jw_creation(q, n)?.product(&jw_annihilation(p, n)?),
        Excitation::Double { p, q, r, s } => jw_creation(r, n)?
            .product(&jw_creation(s, n)?)
            .product(&jw_annihilation(q, n)?)
            .product(&jw_annihilation(p, n)?),
    };
    let g = (&t - &t.adjoint()).simplify(GENERATOR_TOL);
    Ok(QubitOperator::from_terms(
        g.terms()
            .iter()
            .map(|(c, s)| (C::new(0.0, c.im), s.clone()))
            .collect(),
    )
    .with_declared_qubits(n))
}

/// `X` gates on the reference, then one product of Pauli evolutions per
/// excitation in pool order, all terms of an excitation sharing its parameter.
pub fn synthesize_ucc_circuit(pool: &[Excitation], n: usize, reference: &[usize]) -> Result<Circuit> {
    if pool.is_empty() {
        return Err(Error::UnsupportedAnsatz("empty excitation pool".into()));
    }
    let mut c = Circuit::new(n);
    for &q in reference {
        c.push(Gate::X { qubit: q })?;
    }
    for e in pool {
        let g = excitation_to_generator(e, n)?;
        let index = c.add_parameter(e.label());
        // exp(theta * i c P) = exp(-i (-2 c theta)/2 P)
        for (coef, string) in g.terms() {
            c.push(Gate::PauliEvolution {
                string: string.clone(),
                angle: Angle::Param {
                    index,
                    scale: -2.0 * coef.im,
                },
            })?;
        }
    }
    Ok(c)
}

/// `reps + 1` layers of RY then RZ on every qubit, with a CNOT chain
/// `(0,1), (1,2), ...` between consecutive layers.
pub fn efficient_su2_circuit(n: usize, reps: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for layer in 0..=reps {
        if layer > 0 {
            for q in 0..n.saturating_sub(1) {
                c.push(Gate::CNOT {
                    control: q,
                    target: q + 1,
                })?;
            }
        }
        for q in 0..n {
            let p = c.add_parameter(format!("ry[{layer}][{q}]"));
            c.push(Gate::RY {
                qubit: q,
                theta: Angle::param(p),
            })?;
        }
        for q in 0..n {
            let p = c.add_parameter(format!("rz[{layer}][{q}]"));
            c.push(Gate::RZ {
                qubit: q,
                theta: Angle::param(p),
            })?;
        }
    }
    Ok(c)
}

/// Circuit for a spec; UCC families start from the reference determinant.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    for &q in &spec.reference {
        Error::check_index(q, spec.n_qubits)?;
    }
    match spec.family {
        AnsatzFamily::EfficientSU2 => {
            let mut c = Circuit::new(spec.n_qubits);
            for &q in &spec.reference {
                c.push(Gate::X { qubit: q })?;
            }
            let body = efficient_su2_circuit(spec.n_qubits, spec.reps)?;
            for name in body.parameters() {
                c.add_parameter(name.clone());
            }
            c.extend(body.gates().iter().cloned())?;
            Ok(c)
        }
        _ => synthesize_ucc_circuit(&build_pool(spec)?, spec.n_qubits, &spec.reference),
    }
}

/// Onsite energy per spin orbital read off a qubit Hamiltonian: a number
/// term `e n_q` contributes `-e/2` to the `Z_q` coefficient.
pub fn onsite_energies(h: &QubitOperator, n: usize) -> Vec<f64> {
    (0..n)
        .map(|q| -2.0 * h.coefficient(&PauliString::single(q, Axis::Z)).re)
        .collect()
}

/// The `n_electrons` spin orbitals of lowest onsite energy (ties by index);
/// without energies the lowest indices are filled.
pub fn hartree_fock_reference(
    n: usize,
    n_electrons: usize,
    indexing: &SpinOrbitalIndexing,
    onsite: Option<&[f64]>,
) -> Result<Vec<usize>> {
    if n_electrons > n {
        return Err(Error::ElectronCountOutOfRange {
            n_electrons,
            n_qubits: n,
        });
    }
    if indexing.n_qubits() != n {
        return Err(Error::WidthMismatch {
            expected: indexing.n_qubits(),
            found: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(e) = onsite {
        if e.len() != n {
            return Err(Error::WidthMismatch {
                expected: n,
                found: e.len(),
            });
        }
        order.sort_by(|&a, &b| e[a].total_cmp(&e[b]).then(a.cmp(&b)));
    }
    let mut occ: Vec<usize> = order.into_iter().take(n_electrons).collect();
    occ.sort_unstable();
    Ok(occ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{run_statevector, QuantumState, StateVector};

    fn spec(family: AnsatzFamily, n: usize) -> AnsatzSpec {
        AnsatzSpec {
            family,
            n_qubits: n,
            reps: 0,
            reference: vec![],
        }
    }

    #[test]
    fn pool_sizes() {
        let s = build_pool(&spec(AnsatzFamily::GeneralizedUCCS, 6)).unwrap();
        assert_eq!(s.len(), 15);
        let sd = build_pool(&spec(AnsatzFamily::GeneralizedUCCSD, 6)).unwrap();
        assert_eq!(sd.len(), 60);
        let sc = build_pool(&spec(AnsatzFamily::SpinConservedUCCSD, 6)).unwrap();
        let singles = sc.iter().filter(|e| matches!(e, Excitation::Single { .. })).count();
        assert_eq!(singles, 6);
        let two = build_pool(&spec(AnsatzFamily::GeneralizedUCCSD, 2)).unwrap();
        assert_eq!(two, vec![Excitation::Single { p: 0, q: 1 }]);
        assert!(matches!(
            build_pool(&spec(AnsatzFamily::SpinConservedUCCSD, 5)),
            Err(Error::OddWidth(5))
        ));
    }

    #[test]
    fn single_generator_terms() {
        let g = excitation_to_generator(&Excitation::Single { p: 0, q: 1 }, 2).unwrap();
        assert_eq!(g.len(), 2);
        for (c, _) in g.terms() {
            assert_eq!(c.re, 0.0);
            assert!((c.im.abs() - 0.5).abs() < 1e-15);
        }
        assert!(excitation_to_generator(&Excitation::Single { p: 0, q: 2 }, 2).is_err());
        assert!(excitation_to_generator(&Excitation::Single { p: 1, q: 0 }, 2).is_err());
    }

    #[test]
    fn su2_parameter_count_and_identity() {
        let c = efficient_su2_circuit(6, 3).unwrap();
        assert_eq!(c.num_parameters(), 48);
        let c0 = efficient_su2_circuit(4, 0).unwrap();
        assert!(c0.gates().iter().all(|g| g.qubits().len() == 1));
        let psi = run_statevector(&c, &[0.0; 48]).unwrap();
        assert!((psi.amplitudes()[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_parameters_give_reference() {
        let s = AnsatzSpec {
            reference: vec![0, 1, 2, 3],
            ..spec(AnsatzFamily::GeneralizedUCCSD, 6)
        };
        let c = build_ansatz(&s).unwrap();
        let psi = run_statevector(&c, &vec![0.0; c.num_parameters()]).unwrap();
        let reference = StateVector::occupied(6, &[0, 1, 2, 3]).unwrap();
        assert!((psi.fidelity(&reference).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(psi.num_qubits(), 6);
    }

    #[test]
    fn hartree_fock_filling() {
        let idx = SpinOrbitalIndexing::new(3);
        assert!(hartree_fock_reference(6, 0, &idx, None).unwrap().is_empty());
        assert_eq!(hartree_fock_reference(6, 6, &idx, None).unwrap(), (0..6).collect::<Vec<_>>());
        let e = [0.3, 0.3, -0.1, -0.1, 0.0, 0.2];
        assert_eq!(hartree_fock_reference(6, 3, &idx, Some(&e)).unwrap(), vec![2, 3, 4]);
        assert!(matches!(
            hartree_fock_reference(6, 7, &idx, None),
            Err(Error::ElectronCountOutOfRange { .. })
        ));
    }
}
