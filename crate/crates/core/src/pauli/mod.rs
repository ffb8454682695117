//! Pauli strings, weighted Pauli sums and the listing text format.
//!
//! Basis convention used everywhere in the crate: qubit 0 is the
//! least-significant bit of a computational-basis index, so `|q1 q0> = |01>`
//! is index 1.

mod operator;
mod string;
mod text;

pub use operator::{CompiledTerm, QubitOperator, DEFAULT_TOL, DENSE_LIMIT, HERMITIAN_TOL};
pub(crate) use operator::{apply_compiled, PAR_CHUNK, PAR_THRESHOLD};
pub use string::{Axis, PauliMasks, PauliString, Phase};
pub use text::{parse_operator, serialize_operator};

use num_complex::Complex64;

use crate::circuit::QuantumState;
use crate::error::{Error, Result};

/// Qubit-wise product of two strings.
pub fn multiply_strings(a: &PauliString, b: &PauliString) -> (Phase, PauliString) {
    a.multiply(b)
}

/// Sum of `w_a <P_a>`, evaluated term by term without building a matrix.
/// Terms are reduced in operator order so the result is bitwise stable.
pub fn expectation<S: QuantumState + ?Sized>(op: &QubitOperator, state: &S) -> Result<Complex64> {
    let width = op.num_qubits();
    if state.num_qubits() < width {
        return Err(Error::WidthMismatch {
            expected: width,
            found: state.num_qubits(),
        });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for t in op.compile() {
        total += t.coeff * state.pauli_expectation(&t.masks);
    }
    Ok(total)
}

/// Real part of [`expectation`], for Hamiltonian-flagged operators.
pub fn expectation_real<S: QuantumState + ?Sized>(op: &QubitOperator, state: &S) -> Result<f64> {
    Ok(expectation(op, state)?.re)
}
