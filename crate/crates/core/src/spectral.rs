//! Exact ground states (dense and Lanczos), spin correlations, deviation
//! metrics and power-law fits.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{chunked_sum, QuantumState, StateVector};
use crate::error::{Error, Result};
use crate::fermion::{szsz_operator, total_number_operator, SpinOrbitalIndexing};
use crate::pauli::{apply_compiled, expectation, CompiledTerm, QubitOperator, HERMITIAN_TOL};

/// Widths up to this use dense diagonalization.
pub const DENSE_CROSSOVER: usize = 10;
/// Widest Hamiltonian the oracle accepts.
pub const ORACLE_LIMIT: usize = 16;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const DEGENERACY_TOL: f64 = 1e-10;
const LANCZOS_SEED: u64 = 0x1a2c_05ee_d000_0001;
const KRYLOV_DIM: usize = 100;
const MAX_RESTARTS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: StateVector,
    /// `E1 - E0`; `None` for a one-dimensional space.
    pub gap: Option<f64>,
    pub degenerate: bool,
    /// Particle number when the ground state has a definite one.
    pub n_electrons: Option<usize>,
    pub residual: f64,
    pub solver: Solver,
}

fn oracle_width(h: &QubitOperator) -> Result<usize> {
    if h.max_imag() > HERMITIAN_TOL {
        return Err(Error::NotHermitian(h.max_imag()));
    }
    let n = h.num_qubits().max(h.declared_qubits().unwrap_or(0));
    if n > ORACLE_LIMIT {
        return Err(Error::TooWide {
            width: n,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(n)
}

/// Ground state by dense diagonalization up to [`DENSE_CROSSOVER`] qubits,
/// restarted Lanczos above.
pub fn exact_ground_state(h: &QubitOperator) -> Result<GroundStateResult> {
    let n = oracle_width(h)?;
    if n <= DENSE_CROSSOVER {
        ground_state_with(h, Solver::Dense)
    } else {
        ground_state_with(h, Solver::Lanczos)
    }
}

/// Lowest state with exactly `n_electrons` set qubits: the ground state of
/// `H + lambda (N - n)^2` with `lambda` above the spectral width of `H`.
pub fn sector_ground_state(h: &QubitOperator, n_electrons: usize) -> Result<GroundStateResult> {
    let n = oracle_width(h)?;
    if n_electrons > n {
        return Err(Error::ElectronCountOutOfRange {
            n_electrons,
            n_qubits: n,
        });
    }
    let lambda = 2.0 * h.terms().iter().map(|(c, _)| c.norm()).sum::<f64>() + 1.0;
    let shifted = &total_number_operator(n) - &QubitOperator::identity(n_electrons as f64);
    let penalty = shifted.product(&shifted).scale(C::new(lambda, 0.0));
    let mut g = exact_ground_state(&(h + &penalty).simplify(0.0).with_declared_qubits(n))?;
    g.energy = expectation(h, &g.state)?.re;
    Ok(g)
}

pub fn ground_state_with(h: &QubitOperator, solver: Solver) -> Result<GroundStateResult> {
    let n = oracle_width(h)?;
    let terms = h.compile();
    let (energy, amps, e1) = match solver {
        Solver::Dense => dense(h, n)?,
        Solver::Lanczos => {
            let dim = 1usize << n;
            let (e0, x0) = lanczos(&terms, dim, &[])?;
            let e1 = if dim > 1 {
                Some(lanczos(&terms, dim, std::slice::from_ref(&x0))?.0)
            } else {
                None
            };
            (e0, x0, e1)
        }
    };
    let amps = fix_phase(amps);
    let residual = residual_norm(&terms, &amps, energy);
    let state = StateVector::from_amplitudes(amps)?;
    let gap = e1.map(|e| (e - energy).max(0.0));
    Ok(GroundStateResult {
        energy,
        n_electrons: particle_sector(&state),
        state,
        gap,
        degenerate: gap.is_some_and(|g| g <= DEGENERACY_TOL),
        residual,
        solver,
    })
}

fn dense(h: &QubitOperator, n: usize) -> Result<(f64, Vec<C>, Option<f64>)> {
    let m: DMatrix<C> = h.to_matrix(n)?;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let i0 = order[0];
    let amps: Vec<C> = eig.eigenvectors.column(i0).iter().copied().collect();
    let e1 = order.get(1).map(|&i| eig.eigenvalues[i]);
    Ok((eig.eigenvalues[i0], amps, e1))
}

/// Rotates the global phase so the largest amplitude is real and positive.
fn fix_phase(mut v: Vec<C>) -> Vec<C> {
    let mut best = 0;
    for (i, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let norm = chunked_sum(v.len(), |i| C::new(v[i].norm_sqr(), 0.0)).re.sqrt();
    let ph = v[best].conj() / v[best].norm() / norm;
    v.iter_mut().for_each(|a| *a *= ph);
    v
}

fn dot(a: &[C], b: &[C]) -> C {
    chunked_sum(a.len(), |i| a[i].conj() * b[i])
}

fn axpy(y: &mut [C], alpha: C, x: &[C]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn normalize(v: &mut [C]) -> f64 {
    let n = dot(v, v).re.sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

fn residual_norm(terms: &[CompiledTerm], x: &[C], e: f64) -> f64 {
    let mut hx = vec![C::new(0.0, 0.0); x.len()];
    apply_compiled(terms, x, &mut hx);
    axpy(&mut hx, C::new(-e, 0.0), x);
    dot(&hx, &hx).re.sqrt()
}

fn orthogonalize(w: &mut [C], basis: &[Vec<C>]) {
    // two passes keep the Krylov basis orthonormal to machine precision
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(w, -c, v);
        }
    }
}

/// Lowest eigenpair in the complement of `deflate`, restarting from the
/// current Ritz vector until the residual drops below [`RESIDUAL_TOL`].
fn lanczos(terms: &[CompiledTerm], dim: usize, deflate: &[Vec<C>]) -> Result<(f64, Vec<C>)> {
    // a fresh stream per deflation level: reusing the first start vector would
    // leave no overlap with the rest of a degenerate eigenspace
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    rng.set_stream(deflate.len() as u64);
    let mut x: Vec<C> = (0..dim)
        .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    orthogonalize(&mut x, deflate);
    normalize(&mut x);
    let m_max = KRYLOV_DIM.min(dim - deflate.len());
    let mut last_residual = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<C>> = vec![x.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![C::new(0.0, 0.0); dim];
        loop {
            let k = basis.len() - 1;
            w.iter_mut().for_each(|a| *a = C::new(0.0, 0.0));
            apply_compiled(terms, &basis[k], &mut w);
            alpha.push(dot(&basis[k], &w).re);
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let b = normalize(&mut w);
            if basis.len() >= m_max || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let y = eig.eigenvectors.column(imin);
        let mut ritz = vec![C::new(0.0, 0.0); dim];
        for (j, v) in basis.iter().enumerate() {
            axpy(&mut ritz, C::new(y[j], 0.0), v);
        }
        orthogonalize(&mut ritz, deflate);
        normalize(&mut ritz);
        let mut hx = vec![C::new(0.0, 0.0); dim];
        apply_compiled(terms, &ritz, &mut hx);
        let e = dot(&ritz, &hx).re;
        last_residual = residual_norm(terms, &ritz, e);
        x = ritz;
        if last_residual <= RESIDUAL_TOL {
            return Ok((e, x));
        }
    }
    Err(Error::NoConvergence {
        residual: last_residual,
    })
}

/// Particle number if the state lies in one sector (within 1e-6).
pub fn particle_sector<S: QuantumState + ?Sized>(state: &S) -> Option<usize> {
    let probs = state.probabilities();
    let mean: f64 = probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * i.count_ones() as f64)
        .sum();
    let var: f64 = probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * (i.count_ones() as f64 - mean).powi(2))
        .sum();
    (var < 1e-6).then(|| mean.round() as usize)
}

/// `<S_z[i] S_z[j]>`.
pub fn measure_correlation<S: QuantumState + ?Sized>(
    state: &S,
    i: usize,
    j: usize,
    indexing: &SpinOrbitalIndexing,
) -> Result<f64> {
    let op = szsz_operator(i, j, indexing)?;
    let v = expectation(&op, state)?;
    if v.im.abs() > 1e-10 {
        return Err(Error::NotHermitian(v.im.abs()));
    }
    Ok(v.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    for &(x, y) in points {
        for v in [x, y] {
            if !(v > 0.0) {
                return Err(Error::NonPositiveValue(v));
            }
        }
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        points: points.len(),
    })
}

/// `(|noisy - reference|, 100 |noisy - reference| / |reference|)`
pub fn deviation_metrics(noisy: f64, reference: f64) -> Result<(f64, f64)> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    let abs = (noisy - reference).abs();
    Ok((abs, 100.0 * abs / reference.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{parse_operator, PauliString};

    fn op(terms: &[(f64, &str)]) -> QubitOperator {
        QubitOperator::from_terms(
            terms
                .iter()
                .map(|(c, l)| (C::new(*c, 0.0), PauliString::from_label(l).unwrap()))
                .collect(),
        )
    }

    #[test]
    fn single_z() {
        let g = exact_ground_state(&op(&[(1.0, "Z0")])).unwrap();
        assert_eq!(g.energy, -1.0);
        assert!((g.state.amplitudes()[1] - C::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(g.n_electrons, Some(1));
    }

    #[test]
    fn zz_is_degenerate() {
        let g = exact_ground_state(&op(&[(1.0, "Z0 Z1")])).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-14);
        assert!(g.degenerate);
        assert!(g.gap.unwrap() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = op(&[
            (0.3, "Z0 Z1"),
            (-0.2, "X1 X2"),
            (0.15, "Y2 Y3"),
            (0.4, "Z3"),
            (-0.1, "X0 Z1 X2"),
            (0.25, "Z0 Z4"),
            (0.05, "X4"),
        ]);
        let d = ground_state_with(&h, Solver::Dense).unwrap();
        let l = ground_state_with(&h, Solver::Lanczos).unwrap();
        assert!((d.energy - l.energy).abs() < 1e-10);
        // four-fold degenerate ground level
        assert!(d.degenerate && l.degenerate);
        assert!((d.gap.unwrap() - l.gap.unwrap()).abs() < 1e-8);
        let h2 = &h + &op(&[(0.07, "Z1"), (-0.03, "Z2"), (0.11, "X3")]);
        let d = ground_state_with(&h2, Solver::Dense).unwrap();
        let l = ground_state_with(&h2, Solver::Lanczos).unwrap();
        assert!((d.energy - l.energy).abs() < 1e-10);
        assert!((d.gap.unwrap() - l.gap.unwrap()).abs() < 1e-8);
        assert!(l.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = parse_operator("(0+1j) [Z0]").unwrap();
        assert!(matches!(exact_ground_state(&h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sector_restriction() {
        // -(Z0 + Z1 + Z2) prefers the empty register
        let h = op(&[(-1.0, "Z0"), (-1.0, "Z1"), (-1.0, "Z2")]);
        assert_eq!(exact_ground_state(&h).unwrap().n_electrons, Some(0));
        let g = sector_ground_state(&h, 1).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert_eq!(g.n_electrons, Some(1));
        assert!(g.degenerate);
        assert!(sector_ground_state(&h, 4).is_err());
    }

    #[test]
    fn slope_fits() {
        let pts: Vec<_> = (1..=5).map(|k| (k as f64, 3.0 * (k as f64).powi(2))).collect();
        assert!((fit_loglog_slope(&pts).unwrap().slope - 2.0).abs() < 1e-9);
        let flat: Vec<_> = (1..=4).map(|k| (k as f64, 7.0)).collect();
        assert!(fit_loglog_slope(&flat).unwrap().slope.abs() < 1e-12);
        assert!(matches!(fit_loglog_slope(&pts[..1]), Err(Error::InsufficientData(_))));
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0)]),
            Err(Error::NonPositiveValue(_))
        ));
    }

    #[test]
    fn deviations() {
        let (a, p) = deviation_metrics(-0.95, -1.0).unwrap();
        assert!((a - 0.05).abs() < 1e-15 && (p - 5.0).abs() < 1e-12);
        assert_eq!(deviation_metrics(2.0, 2.0).unwrap(), (0.0, 0.0));
        assert!(matches!(deviation_metrics(1.0, 0.0), Err(Error::ZeroReference)));
    }
}
