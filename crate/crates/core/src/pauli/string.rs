use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-identity single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// One of the four unit phases produced by Pauli multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_quarter_turns(k: u32) -> Phase {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn quarter_turns(self) -> u32 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_quarter_turns(self.quarter_turns() + rhs.quarter_turns())
    }
}

/// Single-qubit product table: returns (phase, product) for `a * b`, with
/// `None` standing for the identity.
fn multiply_axes(a: Axis, b: Axis) -> (Phase, Option<Axis>) {
    use Axis::*;
    match (a, b) {
        (X, X) | (Y, Y) | (Z, Z) => (Phase::One, None),
        (X, Y) => (Phase::I, Some(Z)),
        (Y, X) => (Phase::MinusI, Some(Z)),
        (Y, Z) => (Phase::I, Some(X)),
        (Z, Y) => (Phase::MinusI, Some(X)),
        (Z, X) => (Phase::I, Some(Y)),
        (X, Z) => (Phase::MinusI, Some(Y)),
    }
}

/// Bit-mask form of a Pauli string, used by every simulation kernel.
///
/// Acting on a computational basis state `|j>` (qubit 0 = least-significant
/// bit) the string produces `i^n_y * (-1)^popcount(j & z) |j ^ x>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub x: u64,
    pub z: u64,
    pub n_y: u32,
}

impl PauliMasks {
    /// Phase picked up by `|j>`.
    #[inline]
    pub fn phase(&self, j: usize) -> Complex64 {
        let sign_flips = (j as u64 & self.z).count_ones();
        let turns = (self.n_y + 2 * sign_flips) % 4;
        match turns {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    #[inline]
    pub fn flip(&self) -> usize {
        self.x as usize
    }
}

/// Tensor product of X/Y/Z factors on distinct qubits; identity is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    factors: BTreeMap<usize, Axis>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, axis: Axis) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(qubit, axis);
        Self { factors }
    }

    /// Builds a string from `(qubit, axis)` pairs; repeated qubits are rejected.
    pub fn from_factors<I>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Axis)>,
    {
        let mut map = BTreeMap::new();
        for (q, a) in factors {
            if map.insert(q, a).is_some() {
                return Err(Error::Syntax {
                    line: 0,
                    column: 0,
                    message: format!("duplicate qubit index {q}"),
                });
            }
        }
        Ok(Self { factors: map })
    }

    /// Parses the bracket-free form used in tests and configs, e.g. `"X0 Z1"`.
    pub fn from_label(label: &str) -> Result<Self> {
        let mut out = Vec::new();
        for tok in label.split_whitespace() {
            let mut chars = tok.chars();
            let axis = chars
                .next()
                .and_then(Axis::from_letter)
                .ok_or_else(|| Error::Syntax {
                    line: 1,
                    column: 1,
                    message: format!("bad factor `{tok}`"),
                })?;
            let q: usize = chars.as_str().parse().map_err(|_| Error::Syntax {
                line: 1,
                column: 1,
                message: format!("bad qubit index in `{tok}`"),
            })?;
            out.push((q, axis));
        }
        Self::from_factors(out)
    }

    pub fn get(&self, qubit: usize) -> Option<Axis> {
        self.factors.get(&qubit).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.factors.iter().map(|(&q, &a)| (q, a))
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    /// Minimum register width holding this string.
    pub fn width(&self) -> usize {
        self.max_qubit().map_or(0, |q| q + 1)
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks { x: 0, z: 0, n_y: 0 };
        for (&q, &a) in &self.factors {
            debug_assert!(q < 64);
            let bit = 1u64 << q;
            match a {
                Axis::X => m.x |= bit,
                Axis::Z => m.z |= bit,
                Axis::Y => {
                    m.x |= bit;
                    m.z |= bit;
                    m.n_y += 1;
                }
            }
        }
        m
    }

    /// Qubit-wise product `self * other`.
    pub fn multiply(&self, other: &PauliString) -> (Phase, PauliString) {
        let mut phase = Phase::One;
        let mut factors = self.factors.clone();
        for (&q, &b) in &other.factors {
            match factors.get(&q).copied() {
                None => {
                    factors.insert(q, b);
                }
                Some(a) => {
                    let (p, prod) = multiply_axes(a, b);
                    phase = phase * p;
                    match prod {
                        Some(c) => {
                            factors.insert(q, c);
                        }
                        None => {
                            factors.remove(&q);
                        }
                    }
                }
            }
        }
        (phase, PauliString { factors })
    }

    /// True when the two strings agree on every shared qubit.
    pub fn qubit_wise_commutes(&self, other: &PauliString) -> bool {
        self.factors
            .iter()
            .all(|(q, a)| other.factors.get(q).is_none_or(|b| a == b))
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let anti = self
            .factors
            .iter()
            .filter(|(q, a)| other.factors.get(q).is_some_and(|b| b != *a))
            .count();
        anti % 2 == 0
    }

    /// Applies a qubit relabeling `q -> map[q]`.
    pub fn relabel(&self, map: &[usize]) -> Result<PauliString> {
        let mut out = BTreeMap::new();
        for (&q, &a) in &self.factors {
            let target = *map.get(q).ok_or(Error::IndexOutOfRange {
                index: q,
                bound: map.len(),
            })?;
            out.insert(target, a);
        }
        Ok(PauliString { factors: out })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, a) in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", a.letter(), q)?;
            first = false;
        }
        Ok(())
    }
}
