//! Minimization of smooth functionals over unit vectors (pure states).
//!
//! Two independent engines:
//! - a multistart projected gradient descent on the unit sphere with Armijo
//!   backtracking (the workhorse), and
//! - a derivative-free shrinking-neighborhood grid search (slow, simple,
//!   shares no code path with the gradient engine) used to cross-check small
//!   problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{C64, CVector};
use crate::rng;

/// A real objective on the complex unit sphere, with Wirtinger gradient
/// `d f / d psi*` (the real gradient is twice this in realified coordinates).
/// Implementations may assume `psi` is unit.
pub trait SphereObjective {
    fn dim(&self) -> usize;
    fn value(&self, psi: &CVector) -> f64;
    fn gradient(&self, psi: &CVector) -> CVector;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub init_step: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iters: 10_000,
            grad_tol: 1e-10,
            backtrack: 0.5,
            armijo: 1e-4,
            init_step: 1.0,
            seed: 0,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceRow {
    pub start: usize,
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct MultistartOutcome {
    pub best_value: f64,
    pub best_state: CVector,
    pub best_start: usize,
    pub converged_starts: usize,
    pub iterations_total: usize,
    pub trace: Vec<TraceRow>,
}

/// Removes the normalization and global-phase components of a gradient.
fn tangent(psi: &CVector, g: &CVector) -> CVector {
    g - psi * psi.dotc(g)
}

fn renormalized(v: &CVector) -> CVector {
    v / C64::new(v.norm(), 0.0)
}

/// Projected gradient descent from one start. Returns the final point,
/// value, iterations used and whether the gradient criterion was met.
fn descend(
    obj: &dyn SphereObjective,
    start: &CVector,
    cfg: &OptimizerConfig,
    start_index: usize,
    trace: &mut Vec<TraceRow>,
) -> (CVector, f64, usize, bool) {
    let mut psi = renormalized(start);
    let mut value = obj.value(&psi);
    let mut step = cfg.init_step;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let g = tangent(&psi, &obj.gradient(&psi));
        let gnorm2 = g.norm_squared();
        if cfg.record_trace {
            trace.push(TraceRow {
                start: start_index,
                iteration: iter,
                objective: value,
            });
        }
        if gnorm2.sqrt() <= cfg.grad_tol {
            converged = true;
            break;
        }
        // Armijo backtracking along the projected steepest descent ray;
        // the real directional derivative is -2 |g|^2.
        let mut t = step;
        let mut accepted = false;
        while t > 1e-18 {
            let candidate = renormalized(&(&psi - &(&g * C64::new(t, 0.0))));
            let new_value = obj.value(&candidate);
            if new_value <= value - 2.0 * cfg.armijo * t * gnorm2 {
                psi = candidate;
                value = new_value;
                step = (t * 2.0).min(cfg.init_step);
                accepted = true;
                break;
            }
            t *= cfg.backtrack;
        }
        if !accepted {
            // no descent at machine-scale steps: treat as converged
            converged = true;
            break;
        }
    }
    (psi, value, iterations, converged)
}

/// Multistart minimization; the winner is picked by `(value, start index)`
/// so the outcome is deterministic for a fixed seed.
///
/// `extra_starts` are tried first (deterministic seeds such as basis
/// vectors), then `cfg.starts` seeded random unit vectors.
pub fn minimize_on_sphere(
    obj: &dyn SphereObjective,
    cfg: &OptimizerConfig,
    extra_starts: &[CVector],
) -> Result<MultistartOutcome> {
    let n = obj.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("objective over a zero-dimensional space".into()));
    }
    let mut rng = rng::seeded(cfg.seed);
    let mut starts: Vec<CVector> = extra_starts.iter().map(renormalized).collect();
    for _ in 0..cfg.starts {
        starts.push(rng::unit_vector(&mut rng, n));
    }
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no starting points".into()));
    }

    let mut trace = Vec::new();
    let mut best: Option<(f64, usize, CVector)> = None;
    let mut converged_starts = 0;
    let mut iterations_total = 0;
    for (idx, start) in starts.iter().enumerate() {
        let (psi, value, iters, converged) = descend(obj, start, cfg, idx, &mut trace);
        iterations_total += iters;
        if converged {
            converged_starts += 1;
        }
        let better = match &best {
            None => true,
            Some((bv, bi, _)) => value < *bv || (value == *bv && idx < *bi),
        };
        if better {
            best = Some((value, idx, psi));
        }
    }
    let (best_value, best_start, best_state) = best.expect("at least one start ran");
    Ok(MultistartOutcome {
        best_value,
        best_state,
        best_start,
        converged_starts,
        iterations_total,
        trace,
    })
}

/// Derivative-free global search: a seeded uniform sweep keeps several
/// well-separated incumbents, each polished by shrinking Gaussian
/// refinement; the best survivor wins. Independent of the gradient engine;
/// used as an oracle on low-dimensional problems.
pub fn grid_refine_infimum(
    obj: &dyn SphereObjective,
    samples_per_level: usize,
    levels: usize,
    seed: u64,
) -> (f64, CVector) {
    let n = obj.dim();
    let mut rng = rng::seeded(seed);

    // coarse sweep: basis vectors plus uniform random directions
    let mut sweep: Vec<(f64, CVector)> = Vec::new();
    for k in 0..n {
        let mut e = CVector::zeros(n);
        e[k] = C64::new(1.0, 0.0);
        sweep.push((obj.value(&e), e));
    }
    for _ in 0..samples_per_level {
        let psi = rng::unit_vector(&mut rng, n);
        sweep.push((obj.value(&psi), psi));
    }
    sweep.sort_by(|a, b| a.0.total_cmp(&b.0));

    // keep a handful of incumbents that are far apart modulo global phase,
    // so distinct basins each get refined
    let mut incumbents: Vec<(f64, CVector)> = Vec::new();
    for (value, psi) in sweep {
        let fresh = incumbents.iter().all(|(_, kept)| {
            let overlap = kept.dotc(&psi).norm();
            (2.0 - 2.0 * overlap).max(0.0).sqrt() > 0.3
        });
        if fresh {
            incumbents.push((value, psi));
        }
        if incumbents.len() >= 6 {
            break;
        }
    }

    let mut best_value = f64::INFINITY;
    let mut best_psi = CVector::zeros(n);
    for (mut value, mut psi) in incumbents {
        let mut sigma = 0.5;
        for _ in 0..levels {
            for _ in 0..samples_per_level {
                let noise = CVector::from_fn(n, |_, _| rng::complex_normal(&mut rng));
                let cand = renormalized(&(&psi + &(noise * C64::new(sigma, 0.0))));
                let v = obj.value(&cand);
                if v < value {
                    value = v;
                    psi = cand;
                }
            }
            sigma *= 0.35;
        }
        if value < best_value {
            best_value = value;
            best_psi = psi;
        }
    }
    (best_value, best_psi)
}

/// Central finite-difference gradient check in realified coordinates;
/// returns the worst absolute component error. Test helper for objective
/// implementations.
pub fn gradient_check(obj: &dyn SphereObjective, psi: &CVector, h: f64) -> f64 {
    let n = obj.dim();
    let g = obj.gradient(psi);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for part in 0..2 {
            let mut plus = psi.clone();
            let mut minus = psi.clone();
            let delta = if part == 0 {
                C64::new(h, 0.0)
            } else {
                C64::new(0.0, h)
            };
            plus[k] += delta;
            minus[k] -= delta;
            let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
            // real gradient component = 2 Re(g_k) or 2 Im(g_k)
            let analytic = if part == 0 { 2.0 * g[k].re } else { 2.0 * g[k].im };
            worst = worst.max((fd - analytic).abs());
        }
    }
    worst
}
