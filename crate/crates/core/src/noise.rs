//! Kraus channels, synthetic T1/T2 calibration and gate-attached noise models.

use std::collections::BTreeSet;

use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

pub const COMPLETENESS_TOL: f64 = 1e-12;

const ZERO: C = C::new(0.0, 0.0);

/// A CPTP map given by Kraus operators of equal dimension (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<Vec<C>>,
}

impl KrausChannel {
    pub fn new(dim: usize, ops: Vec<Vec<C>>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidChannel(format!("dimension {dim} is not a power of two")));
        }
        if ops.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        if let Some(bad) = ops.iter().find(|k| k.len() != dim * dim) {
            return Err(Error::InvalidChannel(format!(
                "operator has {} entries, expected {}",
                bad.len(),
                dim * dim
            )));
        }
        let ch = Self { dim, ops };
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "sum of K^dagger K deviates from identity by {err:e}"
            )));
        }
        Ok(ch)
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            dim,
            ops: vec![identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn operators(&self) -> &[Vec<C>] {
        &self.ops
    }

    /// Largest entry of `sum K^dagger K - I`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut s = ZERO;
                for k in &self.ops {
                    for r in 0..d {
                        s += k[r * d + i].conj() * k[r * d + j];
                    }
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// Channel `self` followed by `after`.
    pub fn then(&self, after: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != after.dim {
            return Err(Error::InvalidChannel("dimension mismatch in composition".into()));
        }
        let d = self.dim;
        let mut ops = Vec::new();
        for b in &after.ops {
            for a in &self.ops {
                let m = matmul(d, b, a);
                if m.iter().any(|x| x.norm() > 0.0) {
                    ops.push(m);
                }
            }
        }
        Ok(Self { dim: d, ops })
    }

    /// Applies the channel to a `dim x dim` matrix.
    pub fn apply_matrix(&self, rho: &[C]) -> Vec<C> {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for k in &self.ops {
            let kr = matmul(d, k, rho);
            for i in 0..d {
                for j in 0..d {
                    let mut s = ZERO;
                    for l in 0..d {
                        s += kr[i * d + l] * k[j * d + l].conj();
                    }
                    out[i * d + j] += s;
                }
            }
        }
        out
    }

    /// Liouville matrix, row-major over `(a*d + b, c*d + e)`.
    pub fn superoperator(&self) -> Vec<C> {
        crate::circuit::superop_matrix(self.dim, &self.ops)
    }
}

fn identity(d: usize) -> Vec<C> {
    let mut m = vec![ZERO; d * d];
    for i in 0..d {
        m[i * d + i] = C::new(1.0, 0.0);
    }
    m
}

fn matmul(d: usize, a: &[C], b: &[C]) -> Vec<C> {
    let mut m = vec![ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if x == ZERO {
                continue;
            }
            for j in 0..d {
                m[i * d + j] += x * b[k * d + j];
            }
        }
    }
    m
}

fn kron(a: &[C], da: usize, b: &[C], db: usize) -> Vec<C> {
    // (A ⊗ B) with B on the low bit
    let d = da * db;
    let mut m = vec![ZERO; d * d];
    for ia in 0..da {
        for ja in 0..da {
            for ib in 0..db {
                for jb in 0..db {
                    m[(ia * db + ib) * d + ja * db + jb] = a[ia * da + ja] * b[ib * db + jb];
                }
            }
        }
    }
    m
}

fn pauli_matrices() -> [Vec<C>; 4] {
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    [
        vec![o, ZERO, ZERO, o],
        vec![ZERO, o, o, ZERO],
        vec![ZERO, -i, i, ZERO],
        vec![o, ZERO, ZERO, -o],
    ]
}

/// Amplitude damping towards |0> followed by pure dephasing, such that
/// populations relax as `1 - e^(-d/T1)` and coherences as `e^(-d/T2)`.
/// `t1`, `t2` in microseconds, `duration_ns` in nanoseconds.
pub fn thermal_relaxation_channel(t1: f64, t2: f64, duration_ns: f64) -> Result<KrausChannel> {
    if !(t1 > 0.0) {
        return Err(Error::NonPositiveValue(t1));
    }
    if !(t2 > 0.0) || t2 > 2.0 * t1 {
        return Err(Error::InvalidT2 { t1, t2 });
    }
    if !(duration_ns >= 0.0) {
        return Err(Error::NonPositiveValue(duration_ns));
    }
    let d = duration_ns / 1000.0;
    let gamma = 1.0 - (-d / t1).exp();
    let rate_phi = (1.0 / t2 - 0.5 / t1).max(0.0);
    let f = (-d * rate_phi).exp();
    let r = |x: f64| C::new(x, 0.0);
    let damping = KrausChannel {
        dim: 2,
        ops: vec![
            vec![r(1.0), ZERO, ZERO, r((1.0 - gamma).sqrt())],
            vec![ZERO, r(gamma.sqrt()), ZERO, ZERO],
        ],
    };
    let a = ((1.0 + f) / 2.0).sqrt();
    let b = ((1.0 - f) / 2.0).sqrt();
    let dephasing = KrausChannel {
        dim: 2,
        ops: vec![
            vec![r(a), ZERO, ZERO, r(a)],
            vec![r(b), ZERO, ZERO, r(-b)],
        ],
    };
    let ch = damping.then(&dephasing)?;
    KrausChannel::new(2, ch.ops)
}

/// `rho -> (1-p) rho + p I/2^n` for `n` in {1, 2}.
pub fn depolarizing_channel(p: f64, n_qubits: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let paulis = pauli_matrices();
    let strings: Vec<Vec<C>> = match n_qubits {
        1 => paulis.to_vec(),
        2 => {
            let mut v = Vec::with_capacity(16);
            for hi in &paulis {
                for lo in &paulis {
                    v.push(kron(hi, 2, lo, 2));
                }
            }
            v
        }
        _ => {
            return Err(Error::InvalidChannel(format!(
                "depolarizing channel on {n_qubits} qubits is not supported"
            )))
        }
    };
    let count = strings.len() as f64;
    let w_id = (1.0 - p * (count - 1.0) / count).sqrt();
    let w = (p / count).sqrt();
    let ops = strings
        .into_iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let s = if i == 0 { w_id } else { w };
            (s > 0.0).then(|| m.into_iter().map(|x| x * s).collect())
        })
        .collect();
    KrausChannel::new(1 << n_qubits, ops)
}

/// Per-qubit `(t1, t2)` in microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitTimes {
    pub t1: f64,
    pub t2: f64,
}

/// Normal draws per qubit (t1 then t2), non-positive draws redrawn, then
/// `t2 = min(t2, 2 t1)`.
pub fn sample_qubit_times(
    n_qubits: usize,
    seed: u64,
    mean_t1: f64,
    sd_t1: f64,
    mean_t2: f64,
    sd_t2: f64,
) -> Result<Vec<QubitTimes>> {
    for v in [mean_t1, mean_t2] {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue(v));
        }
    }
    let d1 = Normal::new(mean_t1, sd_t1).map_err(|e| Error::config("noise.sd_t1", e.to_string()))?;
    let d2 = Normal::new(mean_t2, sd_t2).map_err(|e| Error::config("noise.sd_t2", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |d: &Normal<f64>| loop {
        let x = d.sample(&mut rng);
        if x > 0.0 {
            break x;
        }
    };
    Ok((0..n_qubits)
        .map(|_| {
            let t1 = draw(&d1);
            let t2 = draw(&d2).min(2.0 * t1);
            QubitTimes { t1, t2 }
        })
        .collect())
}

/// Gate durations in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Durations {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub cnot: f64,
    pub measure: f64,
    pub reset: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Self {
            u1: 0.0,
            u2: 50.0,
            u3: 100.0,
            cnot: 300.0,
            measure: 1000.0,
            reset: 1000.0,
        }
    }
}

impl Durations {
    /// Duration of a gate kind; non-native kinds use their native equivalent.
    pub fn of(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::U1 | GateKind::RZ => self.u1,
            GateKind::U2 | GateKind::H => self.u2,
            GateKind::U3 | GateKind::RX | GateKind::RY | GateKind::X => self.u3,
            GateKind::CNOT => self.cnot,
            GateKind::SWAP => 3.0 * self.cnot,
            GateKind::PauliEvolution => 0.0,
        }
    }
}

/// A channel bound to specific qubits (local bit order = list order).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalChannel {
    pub qubits: Vec<usize>,
    pub channel: KrausChannel,
}

/// Gate-attached noise: thermal relaxation from per-qubit times and gate
/// durations, optional depolarizing per gate arity, both restricted to the
/// target qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    times: Vec<QubitTimes>,
    durations: Durations,
    targets: BTreeSet<usize>,
    scale: f64,
    thermal: bool,
    depolarizing_1q: f64,
    depolarizing_2q: f64,
    measure: bool,
}

impl NoiseModel {
    /// Model with no channels at all.
    pub fn noiseless() -> Self {
        Self {
            times: Vec::new(),
            durations: Durations::default(),
            targets: BTreeSet::new(),
            scale: 0.0,
            thermal: false,
            depolarizing_1q: 0.0,
            depolarizing_2q: 0.0,
            measure: false,
        }
    }

    /// Uniform depolarizing noise on the targets, `p` for one- and two-qubit gates.
    pub fn depolarizing(targets: impl IntoIterator<Item = usize>, p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange(p));
            }
        }
        Ok(Self {
            targets: targets.into_iter().collect(),
            depolarizing_1q: p1,
            depolarizing_2q: p2,
            ..Self::noiseless()
        })
    }

    pub fn with_durations(mut self, durations: Durations) -> Self {
        self.durations = durations;
        self
    }

    /// Also relax target qubits for one measurement duration at the end of
    /// the circuit.
    pub fn with_measurement(mut self, enabled: bool) -> Self {
        self.measure = enabled;
        self
    }

    pub fn with_depolarizing(mut self, p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange(p));
            }
        }
        self.depolarizing_1q = p1;
        self.depolarizing_2q = p2;
        Ok(self)
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn times(&self) -> &[QubitTimes] {
        &self.times
    }

    pub fn durations(&self) -> &Durations {
        &self.durations
    }

    fn thermal_on(&self, q: usize, duration_ns: f64) -> Result<Option<LocalChannel>> {
        if !self.thermal || !self.targets.contains(&q) {
            return Ok(None);
        }
        let d = self.scale * duration_ns;
        if d == 0.0 {
            return Ok(None);
        }
        let t = self.times.get(q).ok_or(Error::IndexOutOfRange {
            index: q,
            bound: self.times.len(),
        })?;
        Ok(Some(LocalChannel {
            qubits: vec![q],
            channel: thermal_relaxation_channel(t.t1, t.t2, d)?,
        }))
    }

    /// Channels to apply right after `gate`, in application order.
    pub fn channels_after(&self, gate: &Gate) -> Result<Vec<LocalChannel>> {
        let qubits = gate.qubits();
        let mut out = Vec::new();
        let duration = self.durations.of(gate.kind());
        for &q in &qubits {
            if let Some(ch) = self.thermal_on(q, duration)? {
                out.push(ch);
            }
        }
        let targeted: Vec<usize> = qubits
            .iter()
            .copied()
            .filter(|q| self.targets.contains(q))
            .collect();
        if qubits.len() == 2 && targeted.len() == 2 && self.depolarizing_2q > 0.0 {
            out.push(LocalChannel {
                qubits,
                channel: depolarizing_channel(self.depolarizing_2q, 2)?,
            });
        } else {
            let p = if qubits.len() == 1 {
                self.depolarizing_1q
            } else {
                self.depolarizing_2q
            };
            if p > 0.0 {
                for q in targeted {
                    out.push(LocalChannel {
                        qubits: vec![q],
                        channel: depolarizing_channel(p, 1)?,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Relaxation over one measurement window on every targeted qubit.
    pub fn measurement_channels(&self, n_qubits: usize) -> Result<Vec<LocalChannel>> {
        if !self.measure {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for q in 0..n_qubits {
            if let Some(ch) = self.thermal_on(q, self.durations.measure)? {
                out.push(ch);
            }
        }
        Ok(out)
    }

    pub fn is_noiseless(&self) -> bool {
        let thermal = self.thermal && self.scale > 0.0;
        let depol = self.depolarizing_1q > 0.0 || self.depolarizing_2q > 0.0;
        self.targets.is_empty() || !(thermal || depol)
    }
}

/// Thermal noise from per-qubit times with default durations scaled by `scale`,
/// attached to gates touching `targets`.
pub fn build_noise_model(
    times: Vec<QubitTimes>,
    targets: impl IntoIterator<Item = usize>,
    scale: f64,
) -> Result<NoiseModel> {
    if !(scale >= 0.0) {
        return Err(Error::NonPositiveValue(scale));
    }
    for t in &times {
        if !(t.t1 > 0.0) {
            return Err(Error::NonPositiveValue(t.t1));
        }
        if !(t.t2 > 0.0) || t.t2 > 2.0 * t.t1 {
            return Err(Error::InvalidT2 { t1: t.t1, t2: t.t2 });
        }
    }
    let targets: BTreeSet<usize> = targets.into_iter().collect();
    if let Some(&q) = targets.iter().find(|&&q| q >= times.len()) {
        return Err(Error::IndexOutOfRange {
            index: q,
            bound: times.len(),
        });
    }
    Ok(NoiseModel {
        times,
        targets,
        scale,
        thermal: true,
        ..NoiseModel::noiseless()
    })
}
