//! Three-site Cu-O-Cu cluster: superexchange coupling and its sensitivity to
//! noisy charge-transfer and hopping parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParameters {
    /// Charge-transfer energy.
    pub delta: f64,
    pub t_pd: f64,
    pub u_d: f64,
    pub u_p: f64,
}

impl ClusterParameters {
    /// Hemocyanin values in Hartree.
    pub fn hemocyanin() -> Self {
        Self {
            delta: 0.2104,
            t_pd: 0.0578,
            u_d: 0.2934,
            u_p: 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        let denominators = [self.delta, self.u_d, self.delta + self.u_p / 2.0];
        if denominators.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::SingularParameters(format!(
                "need delta > 0, u_d > 0, delta + u_p/2 > 0 (delta={}, u_d={}, u_p={})",
                self.delta, self.u_d, self.u_p
            )));
        }
        Ok(())
    }
}

/// `e_bath - (e_imp1 + e_imp2) / 2`
pub fn derive_delta(e_bath: f64, e_imp1: f64, e_imp2: f64) -> f64 {
    e_bath - (e_imp1 + e_imp2) / 2.0
}

/// `J = 4 t^4 / delta^2 * (1/U_d + 1/(delta + U_p/2))`
pub fn exchange_coupling(p: &ClusterParameters) -> Result<f64> {
    p.check()?;
    let t4 = p.t_pd.powi(4);
    Ok(4.0 * t4 / (p.delta * p.delta) * (1.0 / p.u_d + 1.0 / (p.delta + p.u_p / 2.0)))
}

/// First-order response to `t_pd -> t_pd + d`: `(t+d)^4 ~ t^4 + 4 t^3 d`.
pub fn noisy_j_tpd_first_order(p: &ClusterParameters, d: f64) -> Result<f64> {
    p.check()?;
    let t = p.t_pd;
    let t4 = t.powi(4) + 4.0 * t.powi(3) * d;
    Ok(4.0 * t4 / (p.delta * p.delta) * (1.0 / p.u_d + 1.0 / (p.delta + p.u_p / 2.0)))
}

/// First-order response to `delta -> delta + d` (bath Coulomb term dropped):
/// `J ~ 4 t^4/delta^2 (1 - 2d/delta)(1/U_d + 1/delta - d/delta^2)`.
pub fn noisy_j_delta_first_order(p: &ClusterParameters, d: f64) -> Result<f64> {
    p.check()?;
    let dl = p.delta;
    let t4 = p.t_pd.powi(4);
    Ok(4.0 * t4 / (dl * dl) * (1.0 - 2.0 * d / dl) * (1.0 / p.u_d + 1.0 / dl - d / (dl * dl)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSource {
    Delta,
    TPd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisySample {
    pub perturbation: f64,
    pub source: NoiseSource,
    /// `None` when the perturbed parameters are unphysical.
    pub j_exact: Option<f64>,
    pub j_first_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub baseline: f64,
    pub mean: f64,
    pub std: f64,
    pub mean_first_order: f64,
    pub excluded: usize,
    pub samples: Vec<NoisySample>,
}

/// Draws `d ~ amplitude * N(0, 1)` per sample from its own stream
/// `(seed, index)`, recomputing J exactly and to first order.
pub fn monte_carlo_j(
    p: &ClusterParameters,
    amplitude: f64,
    source: NoiseSource,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if n_samples == 0 {
        return Err(Error::InsufficientData("n_samples must be at least 1".into()));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::NonPositiveValue(amplitude));
    }
    let baseline = exchange_coupling(p)?;
    let samples: Vec<NoisySample> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let z: f64 = StandardNormal.sample(&mut rng);
            let d = amplitude * z;
            let (exact, first) = match source {
                NoiseSource::Delta => (
                    exchange_coupling(&ClusterParameters {
                        delta: p.delta + d,
                        ..*p
                    }),
                    noisy_j_delta_first_order(p, d),
                ),
                NoiseSource::TPd => (
                    exchange_coupling(&ClusterParameters {
                        t_pd: p.t_pd + d,
                        ..*p
                    }),
                    noisy_j_tpd_first_order(p, d),
                ),
            };
            NoisySample {
                perturbation: d,
                source,
                j_exact: exact.ok(),
                j_first_order: first.ok(),
            }
        })
        .collect();
    let valid: Vec<&NoisySample> = samples.iter().filter(|s| s.j_exact.is_some()).collect();
    let excluded = samples.len() - valid.len();
    if valid.is_empty() {
        return Err(Error::SingularParameters("every sample was unphysical".into()));
    }
    let n = valid.len() as f64;
    let mean = valid.iter().map(|s| s.j_exact.unwrap()).sum::<f64>() / n;
    let var = if valid.len() > 1 {
        valid
            .iter()
            .map(|s| (s.j_exact.unwrap() - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let mean_first_order = valid.iter().filter_map(|s| s.j_first_order).sum::<f64>() / n;
    Ok(MonteCarloSummary {
        baseline,
        mean,
        std: var.sqrt(),
        mean_first_order,
        excluded,
        samples,
    })
}
