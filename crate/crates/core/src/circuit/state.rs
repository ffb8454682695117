use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{PauliMasks, PAR_CHUNK, PAR_THRESHOLD};

/// Widest register a statevector may hold.
pub const STATEVECTOR_LIMIT: usize = 30;

/// Anything a Pauli expectation can be read from.
pub trait QuantumState {
    fn num_qubits(&self) -> usize;
    /// `<P>` for the string with the given masks.
    fn pauli_expectation(&self, masks: &PauliMasks) -> C;
    /// Computational-basis outcome probabilities.
    fn probabilities(&self) -> Vec<f64>;
}

/// Sums `f(i)` over `0..len` with a fixed chunk partition, so the result is
/// the same whether or not the chunks run in parallel.
pub(crate) fn chunked_sum<F>(len: usize, f: F) -> C
where
    F: Fn(usize) -> C + Sync,
{
    let chunk_sum = |start: usize| -> C {
        let end = (start + PAR_CHUNK).min(len);
        (start..end).map(&f).sum()
    };
    let starts: Vec<usize> = (0..len).step_by(PAR_CHUNK).collect();
    let partials: Vec<C> = if len >= PAR_THRESHOLD {
        starts.par_iter().map(|&s| chunk_sum(s)).collect()
    } else {
        starts.iter().map(|&s| chunk_sum(s)).collect()
    };
    partials.into_iter().sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > STATEVECTOR_LIMIT {
            return Err(Error::TooWide {
                width: n_qubits,
                limit: STATEVECTOR_LIMIT,
            });
        }
        let dim = 1usize << n_qubits;
        Error::check_index(index, dim)?;
        let mut amps = vec![C::new(0.0, 0.0); dim];
        amps[index] = C::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Basis state with the given qubits set to one.
    pub fn occupied(n_qubits: usize, occupied: &[usize]) -> Result<Self> {
        let mut index = 0usize;
        for &q in occupied {
            Error::check_index(q, n_qubits)?;
            index |= 1 << q;
        }
        Self::basis(n_qubits, index)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1
    /// within 1e-10.
    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let s = Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::DimensionMismatch(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        chunked_sum(self.amps.len(), |i| C::new(self.amps[i].norm_sqr(), 0.0))
            .re
            .sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::WidthMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(chunked_sum(self.amps.len(), |i| {
            self.amps[i].conj() * other.amps[i]
        }))
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_statevector(self)
    }
}

impl QuantumState for StateVector {
    fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    fn pauli_expectation(&self, m: &PauliMasks) -> C {
        let x = m.flip();
        let v = &self.amps;
        // <v|P|v> = sum_i conj(v[i]) ph(i^x) v[i^x]
        chunked_sum(v.len(), |i| {
            let k = i ^ x;
            v[i].conj() * m.phase(k) * v[k]
        })
    }

    fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Row-major `2^n x 2^n` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C>,
}

impl DensityMatrix {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::from_statevector(&StateVector::zero(n_qubits)?)
    }

    pub fn from_statevector(psi: &StateVector) -> Result<Self> {
        let n = psi.num_qubits();
        if n > super::DENSITY_LIMIT {
            return Err(Error::TooWide {
                width: n,
                limit: super::DENSITY_LIMIT,
            });
        }
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = vec![C::new(0.0, 0.0); dim * dim];
        for (r, row) in data.chunks_mut(dim).enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = a[r] * a[c].conj();
            }
        }
        Ok(Self { n_qubits: n, data })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let mut rho = Self::zero(n_qubits)?;
        let dim = rho.dim();
        rho.data.iter_mut().for_each(|x| *x = C::new(0.0, 0.0));
        for i in 0..dim {
            rho.data[i * dim + i] = C::new(1.0 / dim as f64, 0.0);
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C {
        self.data[row * self.dim() + col]
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C] {
        &mut self.data
    }

    pub fn trace(&self) -> C {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `<psi|rho|psi>`
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> Result<f64> {
        if psi.num_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch {
                expected: self.n_qubits,
                found: psi.num_qubits(),
            });
        }
        let a = psi.amplitudes();
        let dim = self.dim();
        let mut total = C::new(0.0, 0.0);
        for r in 0..dim {
            let row = &self.data[r * dim..(r + 1) * dim];
            let s: C = row.iter().zip(a).map(|(x, y)| x * y).sum();
            total += a[r].conj() * s;
        }
        Ok(total.re)
    }

    /// Partial trace keeping the listed qubits, in the listed order (first
    /// listed qubit becomes bit 0).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        for &q in keep {
            Error::check_index(q, self.n_qubits)?;
        }
        let k = keep.len();
        let kd = 1usize << k;
        let dim = self.dim();
        let keep_mask: usize = keep.iter().map(|q| 1usize << q).sum();
        let spread = |l: usize| -> usize {
            keep.iter()
                .enumerate()
                .filter(|(b, _)| l >> b & 1 == 1)
                .map(|(_, q)| 1usize << q)
                .sum()
        };
        let mut data = vec![C::new(0.0, 0.0); kd * kd];
        for env in (0..dim).filter(|e| e & keep_mask == 0) {
            for a in 0..kd {
                for b in 0..kd {
                    data[a * kd + b] += self.get(env | spread(a), env | spread(b));
                }
            }
        }
        Ok(DensityMatrix { n_qubits: k, data })
    }
}

impl QuantumState for DensityMatrix {
    fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    fn pauli_expectation(&self, m: &PauliMasks) -> C {
        let x = m.flip();
        let dim = self.dim();
        // Tr(P rho) = sum_j ph(j) rho[j][j^x]
        chunked_sum(dim, |j| m.phase(j) * self.data[j * dim + (j ^ x)])
    }

    fn probabilities(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re.max(0.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    #[test]
    fn density_pauli_expectation_matches_pure() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_amplitudes(vec![
            C::new(h, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, h),
        ])
        .unwrap();
        let rho = psi.to_density().unwrap();
        for label in ["X0 X1", "Y0 X1", "Z0 Z1", "Z1", "X0 Y1"] {
            let m = PauliString::from_label(label).unwrap().masks();
            let a = psi.pauli_expectation(&m);
            let b = rho.pauli_expectation(&m);
            assert!((a - b).norm() < 1e-14, "{label}: {a} vs {b}");
        }
    }

    #[test]
    fn reduced_state_of_bell_pair_is_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_amplitudes(vec![
            C::new(h, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(h, 0.0),
        ])
        .unwrap();
        let r = psi.to_density().unwrap().reduced(&[1]).unwrap();
        assert!((r.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!(r.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        assert!(StateVector::from_amplitudes(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).is_err());
        assert!(StateVector::from_amplitudes(vec![C::new(1.0, 0.0); 3]).is_err());
    }
}
