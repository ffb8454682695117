//! Jordan-Wigner mapping of the Anderson impurity model and spin observables.
//!
//! Spin orbitals are laid out site-major with spin up first:
//! `qubit = 2 * site + spin` (up = 0, down = 1). Impurity sites take the
//! lowest site indices, the bath follows.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString, QubitOperator};

/// Hartree to electronvolt.
pub const HARTREE_EV: f64 = 27.2114;

const SIMPLIFY_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

pub const SPINS: [Spin; 2] = [Spin::Up, Spin::Down];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinOrbitalIndexing {
    pub n_sites: usize,
}

impl SpinOrbitalIndexing {
    pub fn new(n_sites: usize) -> Self {
        Self { n_sites }
    }

    /// Indexing covering `n_qubits` spin orbitals.
    pub fn for_qubits(n_qubits: usize) -> Result<Self> {
        if n_qubits % 2 != 0 {
            return Err(Error::OddWidth(n_qubits));
        }
        Ok(Self::new(n_qubits / 2))
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_sites
    }

    pub fn qubit(&self, site: usize, spin: Spin) -> Result<usize> {
        Error::check_index(site, self.n_sites)?;
        Ok(2 * site + spin.offset())
    }

    pub fn site_of(&self, qubit: usize) -> usize {
        qubit / 2
    }

    pub fn spin_of(&self, qubit: usize) -> Spin {
        if qubit % 2 == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// `a_j = Z_0 ... Z_{j-1} (X_j + i Y_j) / 2`
pub fn jw_annihilation(j: usize, n: usize) -> Result<QubitOperator> {
    Error::check_index(j, n)?;
    let chain = |a: Axis| {
        PauliString::from_factors((0..j).map(|q| (q, Axis::Z)).chain([(j, a)]))
            .expect("distinct qubits")
    };
    Ok(QubitOperator::from_terms(vec![
        (C::new(0.5, 0.0), chain(Axis::X)),
        (C::new(0.0, 0.5), chain(Axis::Y)),
    ])
    .with_declared_qubits(n))
}

pub fn jw_creation(j: usize, n: usize) -> Result<QubitOperator> {
    Ok(jw_annihilation(j, n)?.adjoint())
}

/// `n_j = (I - Z_j) / 2`
pub fn number_operator(j: usize, n: usize) -> Result<QubitOperator> {
    Error::check_index(j, n)?;
    Ok(QubitOperator::from_terms(vec![
        (C::new(0.5, 0.0), PauliString::identity()),
        (C::new(-0.5, 0.0), PauliString::single(j, Axis::Z)),
    ])
    .with_declared_qubits(n))
}

/// Total particle number on `n` spin orbitals.
pub fn total_number_operator(n: usize) -> QubitOperator {
    let mut terms = vec![(C::new(0.5 * n as f64, 0.0), PauliString::identity())];
    terms.extend((0..n).map(|q| (C::new(-0.5, 0.0), PauliString::single(q, Axis::Z))));
    QubitOperator::from_terms(terms).with_declared_qubits(n)
}

/// Real-valued, spin-independent AIM parameters in Hartree.
#[derive(Clone, Debug, PartialEq)]
pub struct AimParameters {
    pub n_impurity: usize,
    pub n_bath: usize,
    /// Bath particle-hole hopping, `n_bath x n_bath`, symmetric.
    pub eps_n: DMatrix<f64>,
    /// Bath pairing amplitudes, `n_bath x n_bath`, antisymmetric.
    pub eps_a: DMatrix<f64>,
    /// Hybridization, `n_bath x n_impurity`.
    pub v: DMatrix<f64>,
    pub mu: f64,
    pub u: f64,
    /// Carried for provenance; no term of the model uses it.
    pub j_hund: f64,
}

impl AimParameters {
    pub fn zeros(n_impurity: usize, n_bath: usize) -> Self {
        Self {
            n_impurity,
            n_bath,
            eps_n: DMatrix::zeros(n_bath, n_bath),
            eps_a: DMatrix::zeros(n_bath, n_bath),
            v: DMatrix::zeros(n_bath, n_impurity),
            mu: 0.0,
            u: 0.0,
            j_hund: 0.0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_impurity + self.n_bath
    }

    fn validate(&self) -> Result<()> {
        let nb = self.n_bath;
        let shape = |name: &str, m: &DMatrix<f64>, r: usize, c: usize| -> Result<()> {
            if m.shape() != (r, c) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {:?}, expected ({r}, {c})",
                    m.shape()
                )));
            }
            Ok(())
        };
        shape("eps_n", &self.eps_n, nb, nb)?;
        shape("eps_a", &self.eps_a, nb, nb)?;
        shape("v", &self.v, nb, self.n_impurity)?;
        if (&self.eps_n - self.eps_n.transpose()).amax() > 1e-12 {
            return Err(Error::DimensionMismatch("eps_n is not symmetric".into()));
        }
        if (&self.eps_a + self.eps_a.transpose()).amax() > 1e-12 {
            return Err(Error::DimensionMismatch("eps_a is not antisymmetric".into()));
        }
        Ok(())
    }
}

/// `sum_i c_i a_i` product of ladder operators, leftmost applied last.
fn ladder_product(ops: &[QubitOperator]) -> QubitOperator {
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = acc.product(op);
    }
    acc
}

/// Drops the imaginary residue left by ladder-operator algebra on a
/// Hermitian operator.
fn hermitian_part(op: &QubitOperator, n: usize) -> QubitOperator {
    QubitOperator::from_terms(
        op.terms()
            .iter()
            .map(|(c, s)| (C::new(c.re, 0.0), s.clone()))
            .collect(),
    )
    .simplify(SIMPLIFY_TOL)
    .with_declared_qubits(n)
}

/// Qubit Hamiltonian
/// `sum eps_n a+a + sum eps_a (a+_s a+_-s + h.c.) + sum V (a+ c + h.c.)
///  + mu sum n_imp + U sum n_up n_down`.
pub fn build_aim_hamiltonian(p: &AimParameters, idx: &SpinOrbitalIndexing) -> Result<QubitOperator> {
    p.validate()?;
    if idx.n_sites != p.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "indexing has {} sites, parameters describe {}",
            idx.n_sites,
            p.n_sites()
        )));
    }
    let n = idx.n_qubits();
    let bath = |m: usize, s: Spin| idx.qubit(p.n_impurity + m, s);
    let imp = |i: usize, s: Spin| idx.qubit(i, s);
    let cr = |q: usize| jw_creation(q, n);
    let an = |q: usize| jw_annihilation(q, n);
    let mut h = QubitOperator::zero();
    let mut add = |term: QubitOperator, w: f64| {
        if w != 0.0 {
            h = &h + &term.scale(C::new(w, 0.0));
        }
    };
    for s in SPINS {
        for m in 0..p.n_bath {
            for k in 0..p.n_bath {
                let e = p.eps_n[(m, k)];
                if e != 0.0 {
                    add(ladder_product(&[cr(bath(m, s)?)?, an(bath(k, s)?)?]), e);
                }
                let a = p.eps_a[(m, k)];
                if a != 0.0 {
                    let pair = ladder_product(&[cr(bath(m, s)?)?, cr(bath(k, s.flipped())?)?]);
                    add(&pair + &pair.adjoint(), a);
                }
            }
            for i in 0..p.n_impurity {
                let v = p.v[(m, i)];
                if v != 0.0 {
                    let hop = ladder_product(&[cr(bath(m, s)?)?, an(imp(i, s)?)?]);
                    add(&hop + &hop.adjoint(), v);
                }
            }
        }
        for i in 0..p.n_impurity {
            add(number_operator(imp(i, s)?, n)?, p.mu);
        }
    }
    for i in 0..p.n_impurity {
        let nn = number_operator(imp(i, Spin::Up)?, n)?.product(&number_operator(imp(i, Spin::Down)?, n)?);
        add(nn, p.u);
    }
    Ok(hermitian_part(&h, n))
}

/// `(I - Z_a - Z_b + Z_a Z_b) / 4`, the JW image of `n_a n_b`.
fn pair_density(a: usize, b: usize) -> QubitOperator {
    let z = |q| PauliString::single(q, Axis::Z);
    QubitOperator::from_terms(vec![
        (C::new(0.25, 0.0), PauliString::identity()),
        (C::new(-0.25, 0.0), z(a)),
        (C::new(-0.25, 0.0), z(b)),
        (
            C::new(0.25, 0.0),
            PauliString::from_factors([(a, Axis::Z), (b, Axis::Z)]).expect("distinct"),
        ),
    ])
}

/// Adds `delta_u * n_a n_b` for every listed qubit pair.
pub fn shift_onsite_u(h: &QubitOperator, pairs: &[(usize, usize)], delta_u: f64) -> Result<QubitOperator> {
    let width = h.declared_qubits().unwrap_or(0).max(h.num_qubits());
    let mut seen = Vec::new();
    for &(a, b) in pairs {
        Error::check_index(a, width)?;
        Error::check_index(b, width)?;
        if a == b || seen.contains(&a) || seen.contains(&b) {
            return Err(Error::DimensionMismatch(format!(
                "qubit pair ({a}, {b}) overlaps another pair"
            )));
        }
        seen.extend([a, b]);
    }
    if delta_u == 0.0 {
        return Ok(h.clone());
    }
    let mut out = h.clone();
    for &(a, b) in pairs {
        out = &out + &pair_density(a, b).scale(C::new(delta_u, 0.0));
    }
    let mut out = out.simplify(0.0);
    if let Some(d) = h.declared_qubits() {
        out = out.with_declared_qubits(d);
    }
    Ok(out)
}

/// `S_z = (n_up - n_down)/2 = (Z_down - Z_up)/4` on one site.
pub fn spin_z_operator(site: usize, idx: &SpinOrbitalIndexing) -> Result<QubitOperator> {
    let up = idx.qubit(site, Spin::Up)?;
    let down = idx.qubit(site, Spin::Down)?;
    Ok(QubitOperator::from_terms(vec![
        (C::new(-0.25, 0.0), PauliString::single(up, Axis::Z)),
        (C::new(0.25, 0.0), PauliString::single(down, Axis::Z)),
    ])
    .with_declared_qubits(idx.n_qubits()))
}

/// `S_z[i] S_z[j]` for distinct sites.
pub fn szsz_operator(i: usize, j: usize, idx: &SpinOrbitalIndexing) -> Result<QubitOperator> {
    if i == j {
        return Err(Error::SameSite);
    }
    let a = spin_z_operator(i, idx)?;
    let b = spin_z_operator(j, idx)?;
    Ok(a.product(&b).simplify(SIMPLIFY_TOL).with_declared_qubits(idx.n_qubits()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::StateVector;
    use crate::pauli::expectation_real;

    fn mat(op: &QubitOperator, n: usize) -> DMatrix<C> {
        op.to_matrix(n).unwrap()
    }

    /// Annihilator on `n` modes acting directly on occupation bitstrings:
    /// `a_j |...1_j...> = (-1)^(occupied modes below j) |...0_j...>`.
    fn fock_annihilator(j: usize, n: usize) -> DMatrix<C> {
        let dim = 1 << n;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            if col >> j & 1 == 1 {
                let below = (col & ((1 << j) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                m[(col ^ (1 << j), col)] = C::new(sign, 0.0);
            }
        }
        m
    }

    #[test]
    fn annihilation_examples() {
        let a0 = jw_annihilation(0, 1).unwrap();
        assert_eq!(a0.terms()[0], (C::new(0.5, 0.0), PauliString::from_label("X0").unwrap()));
        assert_eq!(a0.terms()[1], (C::new(0.0, 0.5), PauliString::from_label("Y0").unwrap()));
        let a2 = jw_annihilation(2, 3).unwrap();
        assert_eq!(a2.terms()[0].1, PauliString::from_label("Z0 Z1 X2").unwrap());
        assert_eq!(a2.terms()[1].1, PauliString::from_label("Z0 Z1 Y2").unwrap());
        assert!(matches!(jw_annihilation(3, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn jw_matches_fock_space_operators() {
        for j in 0..3 {
            let d = mat(&jw_annihilation(j, 3).unwrap(), 3) - fock_annihilator(j, 3);
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_anticommutation() {
        let n = 3;
        let a: Vec<_> = (0..n).map(|j| mat(&jw_annihilation(j, n).unwrap(), n)).collect();
        let id = DMatrix::<C>::identity(8, 8);
        for j in 0..n {
            let ad = a[j].adjoint();
            assert!((&a[j] * &ad + &ad * &a[j] - &id).norm() < 1e-12);
            for k in 0..n {
                if j != k {
                    assert!((&a[j] * &a[k] + &a[k] * &a[j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_parameters_give_empty_operator() {
        let h = build_aim_hamiltonian(&AimParameters::zeros(2, 1), &SpinOrbitalIndexing::new(3)).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn onsite_u_maps_to_zz() {
        let mut p = AimParameters::zeros(1, 0);
        p.u = 0.29340;
        let h = build_aim_hamiltonian(&p, &SpinOrbitalIndexing::new(1)).unwrap();
        let zz = h.coefficient(&PauliString::from_label("Z0 Z1").unwrap());
        assert!((zz.re - 0.073350).abs() < 1e-12);
    }

    #[test]
    fn hopping_has_xzx_form() {
        let mut p = AimParameters::zeros(1, 1);
        p.v[(0, 0)] = 0.2;
        let h = build_aim_hamiltonian(&p, &SpinOrbitalIndexing::new(2)).unwrap();
        // impurity up = qubit 0, bath up = qubit 2
        let xzx = h.coefficient(&PauliString::from_label("X0 Z1 X2").unwrap());
        let yzy = h.coefficient(&PauliString::from_label("Y0 Z1 Y2").unwrap());
        assert!((xzx.re - 0.1).abs() < 1e-14 && (yzy.re - 0.1).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let mut p = AimParameters::zeros(1, 2);
        p.v = DMatrix::zeros(1, 1);
        assert!(build_aim_hamiltonian(&p, &SpinOrbitalIndexing::new(3)).is_err());
        let p = AimParameters::zeros(1, 1);
        assert!(build_aim_hamiltonian(&p, &SpinOrbitalIndexing::new(3)).is_err());
    }

    #[test]
    fn shift_u_adds_to_zz() {
        let h = QubitOperator::from_terms(vec![(
            C::new(0.07335, 0.0),
            PauliString::from_label("Z0 Z1").unwrap(),
        )])
        .with_declared_qubits(6);
        let s = shift_onsite_u(&h, &[(0, 1), (2, 3)], 0.04).unwrap();
        let zz = s.coefficient(&PauliString::from_label("Z0 Z1").unwrap()).re;
        assert!((zz - 0.08335).abs() < 1e-15);
        assert_eq!(shift_onsite_u(&h, &[(0, 1)], 0.0).unwrap(), h);
        assert!(shift_onsite_u(&h, &[(0, 1), (1, 2)], 0.1).is_err());
        assert!(shift_onsite_u(&h, &[(0, 9)], 0.1).is_err());
    }

    #[test]
    fn spin_observables() {
        let idx = SpinOrbitalIndexing::new(3);
        let sz0 = spin_z_operator(0, &idx).unwrap();
        assert_eq!(sz0.coefficient(&PauliString::from_label("Z1").unwrap()).re, 0.25);
        assert_eq!(sz0.coefficient(&PauliString::from_label("Z0").unwrap()).re, -0.25);
        let up = StateVector::occupied(6, &[0]).unwrap();
        assert_eq!(expectation_real(&sz0, &up).unwrap(), 0.5);
        let vac = StateVector::zero(6).unwrap();
        assert_eq!(expectation_real(&sz0, &vac).unwrap(), 0.0);

        let zz = szsz_operator(0, 1, &idx).unwrap();
        assert_eq!(zz.len(), 4);
        assert!(zz.terms().iter().all(|(c, _)| c.re.abs() == 1.0 / 16.0));
        let aligned = StateVector::occupied(6, &[0, 2]).unwrap();
        let anti = StateVector::occupied(6, &[0, 3]).unwrap();
        assert_eq!(expectation_real(&zz, &aligned).unwrap(), 0.25);
        assert_eq!(expectation_real(&zz, &anti).unwrap(), -0.25);
        assert_eq!(expectation_real(&zz, &vac).unwrap(), 0.0);
        assert!(matches!(szsz_operator(1, 1, &idx), Err(Error::SameSite)));
    }
}
