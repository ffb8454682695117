use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    params_hash, Backend, ConvergenceTrace, Objective, OptimizerConfig, StopReason, TraceRecord,
    VqeRun, CONVERGENCE_RTOL, CONVERGENCE_WINDOW, FD_STEP,
};
use crate::error::Result;

// shot noise swamps a 1e-5 difference quotient
const SAMPLED_FD_STEP: f64 = 0.1;

struct Tracer<F> {
    start: Instant,
    records: Vec<TraceRecord>,
    evaluations: usize,
    best: Option<(f64, Vec<f64>)>,
    observer: F,
}

impl<F: FnMut(&TraceRecord) -> Result<()>> Tracer<F> {
    fn record(&mut self, energy: f64, params: &[f64], evaluations: usize) -> Result<()> {
        self.evaluations += evaluations;
        let r = TraceRecord {
            iteration: self.records.len(),
            energy,
            params_hash: params_hash(params),
            evaluations: self.evaluations,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        };
        (self.observer)(&r)?;
        self.records.push(r);
        if self.best.as_ref().is_none_or(|(e, _)| energy < *e) {
            self.best = Some((energy, params.to_vec()));
        }
        Ok(())
    }

    fn stalled(&self) -> bool {
        let n = self.records.len();
        if n <= CONVERGENCE_WINDOW {
            return false;
        }
        let now = self.records[n - 1].energy;
        let then = self.records[n - 1 - CONVERGENCE_WINDOW].energy;
        (now - then).abs() <= CONVERGENCE_RTOL * now.abs()
    }

    fn finish_best(self, converged: bool, reason: StopReason) -> ConvergenceTrace {
        let (final_energy, final_params) = self.best.expect("at least one record");
        ConvergenceTrace {
            records: self.records,
            final_energy,
            final_params,
            converged,
            reason,
        }
    }
}

/// Like [`super::run_vqe`], handing each trace record to `observer` as soon
/// as it is produced.
pub fn run_vqe_with<F>(run: &VqeRun, observer: F) -> Result<ConvergenceTrace>
where
    F: FnMut(&TraceRecord) -> Result<()>,
{
    run.validate()?;
    let obj = Objective::new(run);
    let tracer = Tracer {
        start: Instant::now(),
        records: Vec::new(),
        evaluations: 0,
        best: None,
        observer,
    };
    match run.optimizer {
        OptimizerConfig::ParameterShiftGd {
            learning_rate,
            max_iterations,
            gradient_tol,
        } => gradient_descent(run, &obj, tracer, learning_rate, max_iterations, gradient_tol),
        OptimizerConfig::NelderMead {
            initial_scale,
            x_tol,
            f_tol,
            max_iterations,
        } => nelder_mead(run, &obj, tracer, initial_scale, x_tol, f_tol, max_iterations),
        OptimizerConfig::Spsa {
            a,
            c,
            alpha,
            gamma,
            stability,
            max_iterations,
            seed,
        } => {
            let schedule = SpsaSchedule {
                a,
                c,
                alpha,
                gamma,
                stability,
            };
            spsa(run, &obj, tracer, schedule, max_iterations, seed)
        }
    }
}

fn gradient_descent<F: FnMut(&TraceRecord) -> Result<()>>(
    run: &VqeRun,
    obj: &Objective,
    mut tracer: Tracer<F>,
    lr: f64,
    max_iterations: usize,
    gradient_tol: f64,
) -> Result<ConvergenceTrace> {
    let mut x = run.initial.clone();
    let mut k = 0u64;
    for _ in 0..max_iterations {
        let e = obj.evaluate(&x, k)?;
        k += 1;
        let (g, used) = match run.backend {
            Backend::Exact => obj.shift_gradient(&x)?,
            Backend::Sampled { .. } => obj.finite_difference_gradient(&x, SAMPLED_FD_STEP, k)?,
            Backend::Density { .. } => obj.finite_difference_gradient(&x, FD_STEP, k)?,
        };
        k += used as u64;
        tracer.record(e, &x, 1 + used)?;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= gradient_tol {
            return Ok(tracer.finish_best(true, StopReason::GradientTolerance));
        }
        if tracer.stalled() {
            return Ok(tracer.finish_best(true, StopReason::EnergyStalled));
        }
        x.iter_mut().zip(&g).for_each(|(x, g)| *x -= lr * g);
    }
    Ok(tracer.finish_best(false, StopReason::MaxIterations))
}

fn nelder_mead<F: FnMut(&TraceRecord) -> Result<()>>(
    run: &VqeRun,
    obj: &Objective,
    mut tracer: Tracer<F>,
    scale: f64,
    x_tol: f64,
    f_tol: f64,
    max_iterations: usize,
) -> Result<ConvergenceTrace> {
    let n = run.initial.len();
    let mut k = 0u64;
    let mut eval = |x: &[f64]| -> Result<f64> {
        k += 1;
        obj.evaluate(x, k - 1)
    };
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((eval(&run.initial)?, run.initial.clone()));
    for i in 0..n {
        let mut v = run.initial.clone();
        v[i] += scale;
        simplex.push((eval(&v)?, v));
    }
    let mut pending = n + 1;
    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        tracer.record(simplex[0].0, &simplex[0].1, pending)?;
        pending = 0;
        let f_spread = simplex[n].0 - simplex[0].0;
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(_, v)| v.iter().zip(&simplex[0].1).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= f_tol || x_spread <= x_tol {
            return Ok(tracer.finish_best(true, StopReason::SimplexTolerance));
        }
        if tracer.stalled() {
            return Ok(tracer.finish_best(true, StopReason::EnergyStalled));
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(_, v)| v[j]).sum::<f64>() / n as f64)
            .collect();
        let towards = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].1)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = towards(1.0);
        let fr = eval(&xr)?;
        pending += 1;
        if fr < simplex[0].0 {
            let xe = towards(2.0);
            let fe = eval(&xe)?;
            pending += 1;
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let xc = if fr < simplex[n].0 { towards(0.5) } else { towards(-0.5) };
            let fc = eval(&xc)?;
            pending += 1;
            if fc < fr.min(simplex[n].0) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = vertex
                        .1
                        .iter()
                        .zip(&best)
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    *vertex = (eval(&v)?, v);
                    pending += 1;
                }
            }
        }
    }
    Ok(tracer.finish_best(false, StopReason::MaxIterations))
}

struct SpsaSchedule {
    a: f64,
    c: f64,
    alpha: f64,
    gamma: f64,
    stability: f64,
}

fn spsa<F: FnMut(&TraceRecord) -> Result<()>>(
    run: &VqeRun,
    obj: &Objective,
    mut tracer: Tracer<F>,
    s: SpsaSchedule,
    max_iterations: usize,
    seed: u64,
) -> Result<ConvergenceTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = run.initial.clone();
    for it in 0..max_iterations {
        let k = (it + 1) as f64;
        let ak = s.a / (k + s.stability).powf(s.alpha);
        let ck = s.c / k.powf(s.gamma);
        let delta: Vec<f64> = (0..x.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let probe = |sign: f64| -> Vec<f64> {
            x.iter().zip(&delta).map(|(x, d)| x + sign * ck * d).collect()
        };
        let (xp, xm) = (probe(1.0), probe(-1.0));
        let (ep, em) = rayon::join(
            || obj.evaluate(&xp, 2 * it as u64),
            || obj.evaluate(&xm, 2 * it as u64 + 1),
        );
        let (ep, em) = (ep?, em?);
        tracer.record((ep + em) / 2.0, &x, 2)?;
        let scale = (ep - em) / (2.0 * ck);
        x.iter_mut()
            .zip(&delta)
            .for_each(|(x, d)| *x -= ak * scale * d);
    }
    let final_energy = obj.evaluate(&x, 2 * max_iterations as u64)?;
    Ok(ConvergenceTrace {
        records: tracer.records,
        final_energy,
        final_params: x,
        converged: false,
        reason: StopReason::MaxIterations,
    })
}
