use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::string::{PauliMasks, PauliString};
use crate::error::{Error, Result};

/// Largest register realised as a dense matrix.
pub const DENSE_LIMIT: usize = 12;

/// Default magnitude below which `simplify` drops a term.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Tolerance on imaginary coefficient parts for an operator to count as a
/// Hamiltonian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// States at or above this dimension are reduced in fixed-size parallel
/// chunks; the chunk partition does not depend on the thread count.
pub(crate) const PAR_THRESHOLD: usize = 1 << 12;
pub(crate) const PAR_CHUNK: usize = 1 << 10;

/// Weighted sum of Pauli strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QubitOperator {
    terms: Vec<(Complex64, PauliString)>,
    declared_qubits: Option<usize>,
}

/// A term pre-lowered to masks for the simulation kernels.
#[derive(Clone, Copy, Debug)]
pub struct CompiledTerm {
    pub coeff: Complex64,
    pub masks: PauliMasks,
}

impl QubitOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: f64) -> Self {
        Self::from_terms(vec![(Complex64::new(coeff, 0.0), PauliString::identity())])
    }

    /// Keeps the terms as given, duplicates included; call [`simplify`] to merge.
    ///
    /// [`simplify`]: QubitOperator::simplify
    pub fn from_terms(terms: Vec<(Complex64, PauliString)>) -> Self {
        Self {
            terms,
            declared_qubits: None,
        }
    }

    pub fn term(coeff: Complex64, string: PauliString) -> Self {
        Self::from_terms(vec![(coeff, string)])
    }

    pub fn with_declared_qubits(mut self, n: usize) -> Self {
        self.declared_qubits = Some(n);
        self
    }

    pub fn declared_qubits(&self) -> Option<usize> {
        self.declared_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `1 + max index`, or the declared width if larger.
    pub fn num_qubits(&self) -> usize {
        let used = self.terms.iter().map(|(_, s)| s.width()).max().unwrap_or(0);
        used.max(self.declared_qubits.unwrap_or(0))
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, s)| s == string)
            .map(|(c, _)| *c)
            .sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.im.abs()).fold(0.0, f64::max)
    }

    /// Real-coefficient check that flags an operator as a Hamiltonian.
    pub fn is_hamiltonian(&self) -> bool {
        self.max_imag() <= HERMITIAN_TOL
    }

    pub fn is_normalized(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.terms.iter().all(|(_, s)| seen.insert(s))
    }

    /// Merges duplicate strings (first-appearance order) and drops terms with
    /// `|c| < tol`.
    pub fn simplify(&self, tol: f64) -> QubitOperator {
        let mut index: HashMap<&PauliString, usize> = HashMap::new();
        let mut merged: Vec<(Complex64, PauliString)> = Vec::new();
        for (c, s) in &self.terms {
            match index.get(s) {
                Some(&i) => merged[i].0 += c,
                None => {
                    index.insert(s, merged.len());
                    merged.push((*c, s.clone()));
                }
            }
        }
        merged.retain(|(c, _)| c.norm() >= tol);
        QubitOperator {
            terms: merged,
            declared_qubits: self.declared_qubits,
        }
    }

    pub fn scale(&self, factor: Complex64) -> QubitOperator {
        QubitOperator {
            terms: self.terms.iter().map(|(c, s)| (c * factor, s.clone())).collect(),
            declared_qubits: self.declared_qubits,
        }
    }

    pub fn adjoint(&self) -> QubitOperator {
        QubitOperator {
            terms: self.terms.iter().map(|(c, s)| (c.conj(), s.clone())).collect(),
            declared_qubits: self.declared_qubits,
        }
    }

    /// Operator product, simplified with `tol = 0`.
    pub fn product(&self, rhs: &QubitOperator) -> QubitOperator {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ca, sa) in &self.terms {
            for (cb, sb) in &rhs.terms {
                let (phase, s) = sa.multiply(sb);
                out.push((ca * cb * phase.to_complex(), s));
            }
        }
        QubitOperator {
            terms: out,
            declared_qubits: max_declared(self.declared_qubits, rhs.declared_qubits),
        }
        .simplify(0.0)
    }

    /// Moves qubit `q` to `map[q]`.
    pub fn relabel(&self, map: &[usize]) -> Result<QubitOperator> {
        let terms = self
            .terms
            .iter()
            .map(|(c, s)| Ok((*c, s.relabel(map)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(QubitOperator {
            terms,
            declared_qubits: None,
        })
    }

    pub fn compile(&self) -> Vec<CompiledTerm> {
        self.terms
            .iter()
            .map(|(c, s)| CompiledTerm {
                coeff: *c,
                masks: s.masks(),
            })
            .collect()
    }

    /// Dense matrix in the basis where qubit 0 is the least-significant bit.
    pub fn to_matrix(&self, n_qubits: usize) -> Result<DMatrix<Complex64>> {
        if n_qubits > DENSE_LIMIT {
            return Err(Error::TooWide {
                width: n_qubits,
                limit: DENSE_LIMIT,
            });
        }
        let width = self.num_qubits();
        if n_qubits < width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: n_qubits,
            });
        }
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in self.compile() {
            for j in 0..dim {
                m[(j ^ t.masks.flip(), j)] += t.coeff * t.masks.phase(j);
            }
        }
        Ok(m)
    }

    /// `out = H v` without materialising `H`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let compiled = self.compile();
        apply_compiled(&compiled, v, out);
    }
}

pub(crate) fn apply_compiled(terms: &[CompiledTerm], v: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(v.len(), out.len());
    let kernel = |offset: usize, chunk: &mut [Complex64]| {
        for (k, o) in chunk.iter_mut().enumerate() {
            let i = offset + k;
            let mut acc = Complex64::new(0.0, 0.0);
            for t in terms {
                let j = i ^ t.masks.flip();
                acc += t.coeff * t.masks.phase(j) * v[j];
            }
            *o = acc;
        }
    };
    if out.len() >= PAR_THRESHOLD {
        out.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| kernel(c * PAR_CHUNK, chunk));
    } else {
        kernel(0, out);
    }
}

fn max_declared(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Add for &QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: &QubitOperator) -> QubitOperator {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        QubitOperator {
            terms,
            declared_qubits: max_declared(self.declared_qubits, rhs.declared_qubits),
        }
        .simplify(0.0)
    }
}

impl Add for QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: QubitOperator) -> QubitOperator {
        &self + &rhs
    }
}

impl Sub for &QubitOperator {
    type Output = QubitOperator;
    fn sub(self, rhs: &QubitOperator) -> QubitOperator {
        self + &(-rhs)
    }
}

impl Neg for &QubitOperator {
    type Output = QubitOperator;
    fn neg(self) -> QubitOperator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: &QubitOperator) -> QubitOperator {
        self.product(rhs)
    }
}

impl Mul<f64> for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: f64) -> QubitOperator {
        self.scale(Complex64::new(rhs, 0.0))
    }
}
