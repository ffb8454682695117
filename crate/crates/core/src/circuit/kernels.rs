//! In-place gate kernels. Matrices are row-major; two-qubit local indices are
//! `bit(first operand) + 2 * bit(second operand)`.

use num_complex::Complex64 as C;

use super::{Angle, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliMasks;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

fn bind(a: &Angle, bindings: &[f64]) -> Result<f64> {
    a.resolve(bindings)
        .ok_or_else(|| Error::UnboundParameter(format!("theta[{}]", a.param_index().unwrap_or(0))))
}

pub(crate) fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> [C; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        C::new(c, 0.0),
        -C::from_polar(s, lambda),
        C::from_polar(s, phi),
        C::from_polar(c, phi + lambda),
    ]
}

/// 2x2 unitary of a one-qubit gate, `None` for multi-qubit kinds.
pub(crate) fn gate_matrix_1q(gate: &Gate, bindings: &[f64]) -> Result<Option<[C; 4]>> {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
    let m = match gate {
        Gate::U1 { lambda, .. } => [ONE, ZERO, ZERO, C::from_polar(1.0, bind(lambda, bindings)?)],
        Gate::U2 { phi, lambda, .. } => {
            u3_matrix(FRAC_PI_2, bind(phi, bindings)?, bind(lambda, bindings)?)
        }
        Gate::U3 {
            theta, phi, lambda, ..
        } => u3_matrix(
            bind(theta, bindings)?,
            bind(phi, bindings)?,
            bind(lambda, bindings)?,
        ),
        Gate::RX { theta, .. } => {
            let (s, c) = (bind(theta, bindings)? / 2.0).sin_cos();
            [C::new(c, 0.0), C::new(0.0, -s), C::new(0.0, -s), C::new(c, 0.0)]
        }
        Gate::RY { theta, .. } => {
            let (s, c) = (bind(theta, bindings)? / 2.0).sin_cos();
            [C::new(c, 0.0), C::new(-s, 0.0), C::new(s, 0.0), C::new(c, 0.0)]
        }
        Gate::RZ { theta, .. } => {
            let t = bind(theta, bindings)?;
            [C::from_polar(1.0, -t / 2.0), ZERO, ZERO, C::from_polar(1.0, t / 2.0)]
        }
        Gate::X { .. } => [ZERO, ONE, ONE, ZERO],
        Gate::H { .. } => {
            let h = C::new(FRAC_1_SQRT_2, 0.0);
            [h, h, h, -h]
        }
        _ => return Ok(None),
    };
    Ok(Some(m))
}

/// 4x4 unitary of CNOT/SWAP in the local basis of their operand order.
pub(crate) fn gate_matrix_2q(gate: &Gate) -> Option<[C; 16]> {
    let perm: [usize; 4] = match gate {
        // control is local bit 0: |c=1,t=0> (1) <-> |c=1,t=1> (3)
        Gate::CNOT { .. } => [0, 3, 2, 1],
        Gate::SWAP { .. } => [0, 2, 1, 3],
        _ => return None,
    };
    let mut m = [ZERO; 16];
    for (col, &row) in perm.iter().enumerate() {
        m[row * 4 + col] = ONE;
    }
    Some(m)
}

/// `v <- M v` on qubit `q`, where each logical amplitude is a contiguous
/// block of `block` scalars (1 for statevectors, the row length when acting
/// on the row index of a density matrix).
pub(crate) fn apply_1q(v: &mut [C], block: usize, q: usize, m: &[C; 4]) {
    let stride = (1usize << q) * block;
    for chunk in v.chunks_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a, *b);
            *a = m[0] * x0 + m[1] * x1;
            *b = m[2] * x0 + m[3] * x1;
        }
    }
}

/// Swaps blocks `i` and `j` for every basis index where `pred` selects `i`.
fn permute_pairs(v: &mut [C], block: usize, n_states: usize, pair: impl Fn(usize) -> Option<usize>) {
    for i in 0..n_states {
        if let Some(j) = pair(i) {
            debug_assert!(j > i);
            let (lo, hi) = v.split_at_mut(j * block);
            lo[i * block..(i + 1) * block].swap_with_slice(&mut hi[..block]);
        }
    }
}

pub(crate) fn apply_cnot(v: &mut [C], block: usize, control: usize, target: usize) {
    let n_states = v.len() / block;
    let (cm, tm) = (1usize << control, 1usize << target);
    permute_pairs(v, block, n_states, |i| {
        (i & cm != 0 && i & tm == 0).then_some(i | tm)
    });
}

pub(crate) fn apply_swap(v: &mut [C], block: usize, a: usize, b: usize) {
    let n_states = v.len() / block;
    let (am, bm) = (1usize << a.min(b), 1usize << a.max(b));
    permute_pairs(v, block, n_states, |i| {
        (i & am != 0 && i & bm == 0).then_some((i & !am) | bm)
    });
}

/// `v <- alpha v + beta P v`; with `conj` the string's phases are conjugated,
/// i.e. `P` is replaced by its complex conjugate.
pub(crate) fn pauli_combo(v: &mut [C], block: usize, m: &PauliMasks, alpha: C, beta: C, conj: bool) {
    let n_states = v.len() / block;
    let ph = |j: usize| {
        let p = m.phase(j);
        if conj {
            p.conj()
        } else {
            p
        }
    };
    let x = m.flip();
    if x == 0 {
        for (i, chunk) in v.chunks_mut(block).enumerate() {
            let f = alpha + beta * ph(i);
            chunk.iter_mut().for_each(|a| *a *= f);
        }
        return;
    }
    let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
    for i in 0..n_states {
        if i & top != 0 {
            continue;
        }
        let k = i ^ x;
        let (pi, pk) = (ph(i), ph(k));
        let (lo, hi) = v.split_at_mut(k * block);
        let bi = &mut lo[i * block..(i + 1) * block];
        let bk = &mut hi[..block];
        for (a, b) in bi.iter_mut().zip(bk.iter_mut()) {
            let (vi, vk) = (*a, *b);
            // (P v)[i] = ph(k) v[k], (P v)[k] = ph(i) v[i]
            *a = alpha * vi + beta * pk * vk;
            *b = alpha * vk + beta * pi * vi;
        }
    }
}

/// `exp(-i theta/2 P)` on a statevector.
pub(crate) fn apply_pauli_rotation_sv(v: &mut [C], masks: &PauliMasks, theta: f64) {
    const LOW: usize = 64;
    let (s, c) = (theta / 2.0).sin_cos();
    // P|j> = i^n_y (-1)^{|j & z|} |j ^ x>; fold -i s i^n_y into one constant
    let w = C::new(0.0, -s) * C::i().powu(masks.n_y % 4);
    let z = masks.z as usize;
    let sign = |j: usize| 1.0 - 2.0 * f64::from((j & z).count_ones() & 1);
    // the parity splits over low and high index bits, so the low half is tabulated
    let wlow: [C; LOW] = std::array::from_fn(|t| w * sign(t));
    let x = masks.flip();
    if x == 0 {
        for (blk, chunk) in v.chunks_mut(LOW).enumerate() {
            let hs = sign(blk * LOW);
            for (a, wt) in chunk.iter_mut().zip(&wlow) {
                *a *= C::new(c, 0.0) + wt * hs;
            }
        }
        return;
    }
    let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
    let low = x ^ top;
    let cross = sign(x);
    let run = top.min(LOW);
    for (block, chunk) in v.chunks_exact_mut(2 * top).enumerate() {
        let base = block * 2 * top;
        let (lo, hi) = chunk.split_at_mut(top);
        for (sub, part) in lo.chunks_exact_mut(run).enumerate() {
            let start = sub * run;
            let j0 = base + start;
            let hs = sign(j0 & !(LOW - 1));
            let offset = j0 & (LOW - 1);
            for (t, a) in part.iter_mut().enumerate() {
                let b = &mut hi[(start + t) ^ low];
                let wi = wlow[offset + t] * hs;
                let (vi, vk) = (*a, *b);
                *a = vi * c + wi * cross * vk;
                *b = vk * c + wi * vi;
            }
        }
    }
}

/// Whether `b` can share a pass with `a`: same flipped qubits and the same
/// Z factors outside them, so both act on identical amplitude pairs.
pub(crate) fn fusable(a: &PauliMasks, b: &PauliMasks) -> bool {
    a.x != 0 && a.x == b.x && a.z & !a.x == b.z & !b.x
}

/// Applies `exp(-i t/2 P)` for each `(P, t)` in order, in one sweep. All
/// strings must be [`fusable`] with the first.
pub(crate) fn apply_pauli_rotations_fused_sv(v: &mut [C], rots: &[(PauliMasks, f64)]) {
    let Some((first, _)) = rots.first() else {
        return;
    };
    debug_assert!(rots.iter().all(|(m, _)| fusable(first, m)));
    let x = first.flip();
    let zc = (first.z as usize) & !x;
    let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
    let low = x ^ top;
    let free = (v.len() - 1) & !x;
    let mut p = 0usize;
    loop {
        // 2x2 block on (f|p, f|p^x) for even and odd parity of f & zc
        let block = |odd: bool| {
            let mut m = [ONE, ZERO, ZERO, ONE];
            for (masks, theta) in rots {
                let (s, c) = (theta / 2.0).sin_cos();
                let sigma = if odd { -1.0 } else { 1.0 };
                let w = C::new(0.0, -s) * sigma;
                let (pi, pk) = (masks.phase(p), masks.phase(p ^ x));
                let g = [C::new(c, 0.0), w * pk, w * pi, C::new(c, 0.0)];
                m = [
                    g[0] * m[0] + g[1] * m[2],
                    g[0] * m[1] + g[1] * m[3],
                    g[2] * m[0] + g[3] * m[2],
                    g[2] * m[1] + g[3] * m[3],
                ];
            }
            m
        };
        let (even, odd) = (block(false), block(true));
        let mut f = 0usize;
        loop {
            let i = f | p;
            let k = i ^ x;
            let m = if (f & zc).count_ones() & 1 == 1 { &odd } else { &even };
            let (vi, vk) = (v[i], v[k]);
            v[i] = m[0] * vi + m[1] * vk;
            v[k] = m[2] * vi + m[3] * vk;
            if f == free {
                break;
            }
            f = ((f | x) + 1) & free;
        }
        if p == low {
            break;
        }
        p = ((p | !low) + 1) & low;
    }
}

pub(crate) fn apply_gate_sv(v: &mut [C], gate: &Gate, bindings: &[f64]) -> Result<()> {
    match gate {
        Gate::CNOT { control, target } => apply_cnot(v, 1, *control, *target),
        Gate::SWAP { a, b } => apply_swap(v, 1, *a, *b),
        Gate::PauliEvolution { string, angle } => {
            apply_pauli_rotation_sv(v, &string.masks(), bind(angle, bindings)?)
        }
        g => {
            let m = gate_matrix_1q(g, bindings)?.expect("one-qubit gate");
            apply_1q(v, 1, g.qubits()[0], &m);
        }
    }
    Ok(())
}

/// Runs `gates` on a statevector, fusing consecutive rotations that share
/// amplitude pairs into a single sweep.
pub(crate) fn apply_gates_sv(v: &mut [C], gates: &[Gate], bindings: &[f64]) -> Result<()> {
    let mut run: Vec<(PauliMasks, f64)> = Vec::new();
    for gate in gates {
        if let Gate::PauliEvolution { string, angle } = gate {
            let masks = string.masks();
            if run.first().is_some_and(|(m, _)| !fusable(m, &masks)) {
                flush_rotations(v, &mut run);
            }
            run.push((masks, bind(angle, bindings)?));
            continue;
        }
        flush_rotations(v, &mut run);
        apply_gate_sv(v, gate, bindings)?;
    }
    flush_rotations(v, &mut run);
    Ok(())
}

fn flush_rotations(v: &mut [C], run: &mut Vec<(PauliMasks, f64)>) {
    match run.as_slice() {
        [] => {}
        [(m, t)] => apply_pauli_rotation_sv(v, m, *t),
        rots => apply_pauli_rotations_fused_sv(v, rots),
    }
    run.clear();
}

/// Liouville form of a channel on `k` qubits (`d = 2^k`):
/// `S[(a,b),(c,e)] = sum_K K[a,c] conj(K[b,e])`, indices row-major `a*d + b`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Superop {
    pub d: usize,
    pub m: Vec<C>,
}

impl Superop {
    pub fn from_kraus(d: usize, ops: &[Vec<C>]) -> Superop {
        let dd = d * d;
        let mut m = vec![ZERO; dd * dd];
        for k in ops {
            for a in 0..d {
                for b in 0..d {
                    let row = (a * d + b) * dd;
                    for c in 0..d {
                        let kac = k[a * d + c];
                        if kac == ZERO {
                            continue;
                        }
                        for e in 0..d {
                            m[row + c * d + e] += kac * k[b * d + e].conj();
                        }
                    }
                }
            }
        }
        Superop { d, m }
    }

    pub fn from_unitary(d: usize, u: &[C]) -> Superop {
        Superop::from_kraus(d, &[u.to_vec()])
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Superop) -> Superop {
        assert_eq!(self.d, after.d);
        let n = self.d * self.d;
        let mut m = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = after.m[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m[i * n + j] += a * self.m[k * n + j];
                }
            }
        }
        Superop { d: self.d, m }
    }
}

pub(crate) fn superop_matrix(d: usize, ops: &[Vec<C>]) -> Vec<C> {
    Superop::from_kraus(d, ops).m
}

/// Applies a superoperator on `qubits` (1 or 2, in local-bit order) to a
/// row-major density matrix of dimension `dim`.
pub(crate) fn apply_superop(rho: &mut [C], dim: usize, qubits: &[usize], s: &Superop) {
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << q).collect();
    let full: usize = masks.iter().sum();
    let d = s.d;
    let offsets: Vec<usize> = (0..d)
        .map(|l| {
            masks
                .iter()
                .enumerate()
                .filter(|(bit, _)| l >> bit & 1 == 1)
                .map(|(_, m)| m)
                .sum()
        })
        .collect();
    let n = d * d;
    let mut e = vec![ZERO; n];
    let mut out = vec![ZERO; n];
    for r0 in (0..dim).filter(|r| r & full == 0) {
        for c0 in (0..dim).filter(|c| c & full == 0) {
            for a in 0..d {
                for b in 0..d {
                    e[a * d + b] = rho[(r0 | offsets[a]) * dim + (c0 | offsets[b])];
                }
            }
            for (i, o) in out.iter_mut().enumerate() {
                let row = &s.m[i * n..(i + 1) * n];
                *o = row.iter().zip(&e).map(|(x, y)| x * y).sum();
            }
            for a in 0..d {
                for b in 0..d {
                    rho[(r0 | offsets[a]) * dim + (c0 | offsets[b])] = out[a * d + b];
                }
            }
        }
    }
}

/// `rho <- U rho U^dagger` with `U = exp(-i theta/2 P)`.
pub(crate) fn apply_pauli_rotation_dm(rho: &mut [C], dim: usize, masks: &PauliMasks, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    pauli_combo(rho, dim, masks, C::new(c, 0.0), C::new(0.0, -s), false);
    // right multiplication by U^dagger acts on each row with conj(U)
    for row in rho.chunks_mut(dim) {
        pauli_combo(row, 1, masks, C::new(c, 0.0), C::new(0.0, s), true);
    }
}
