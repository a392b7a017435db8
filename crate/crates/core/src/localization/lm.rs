//! Damped least-squares iteration.
//!
//! Classic Levenberg-Marquardt with Marquardt scaling: each iteration solves
//! `(JᵀJ + λ diag(JᵀJ)) δ = -Jᵀr` and accepts the step only when the cost
//! decreases, shrinking λ on acceptance and growing it on rejection. Scaling
//! by the JᵀJ diagonal keeps the damping meaningful even though position
//! (meters) and angle (radians) columns live on very different scales.

use crate::error::Result;
use crate::field_model::MagnetSpec;
use crate::measurement::ReadingSet;
use crate::scalar::Real;
use crate::sensor_array::SensorArray;

use super::config::SolverConfig;
use super::objective::{residuals, residuals_and_jacobian};
use super::params::PoseParams;
use crate::field_model::MagnetPose;

const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e15;

/// Which convergence test ended the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// Gradient infinity-norm fell below the tolerance.
    Gradient,
    /// Step length became negligible.
    Step,
    /// Relative cost decrease became negligible (or the cost hit zero).
    Cost,
    /// Iteration budget exhausted without convergence.
    MaxIterations,
}

/// Solver output: estimated pose plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T> {
    pub pose: MagnetPose<T>,
    /// Final objective value, tesla².
    pub final_cost: T,
    /// Candidate steps attempted (accepted or rejected).
    pub iterations: usize,
    pub converged: bool,
    pub termination_reason: TerminationReason,
    /// Root-mean-square residual over all 3N components, tesla.
    pub residual_rms: T,
    /// Cost after each accepted step, starting with the initial cost.
    pub cost_trace: Vec<T>,
}

fn sum_squares<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

fn gradient<T: Real>(jac: &[[T; 5]], res: &[T]) -> [T; 5] {
    let mut g = [T::zero(); 5];
    for (row, &r) in jac.iter().zip(res) {
        for (slot, &j) in g.iter_mut().zip(row) {
            *slot += j * r;
        }
    }
    g
}

fn normal_matrix<T: Real>(jac: &[[T; 5]]) -> [[T; 5]; 5] {
    let mut m = [[T::zero(); 5]; 5];
    for row in jac {
        for (i, &ri) in row.iter().enumerate() {
            for (slot, &rj) in m[i][..=i].iter_mut().zip(row) {
                *slot += ri * rj;
            }
        }
    }
    for i in 0..5 {
        for j in (i + 1)..5 {
            m[i][j] = m[j][i];
        }
    }
    m
}

fn inf_norm<T: Real>(v: &[T; 5]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

fn norm<T: Real>(v: &[T; 5]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Solve `(JᵀJ + λ diag) δ = -g` by Cholesky; `None` when the damped matrix
/// is not positive definite.
fn solve_damped<T: Real>(jtj: &[[T; 5]; 5], g: &[T; 5], lambda: T) -> Option<[T; 5]> {
    let mut a = *jtj;
    for i in 0..5 {
        let d = jtj[i][i];
        let scale = if d.is_finite() && d > T::zero() {
            d
        } else {
            T::one()
        };
        a[i][i] += lambda * scale;
    }

    // Cholesky decomposition of the 5x5 damped normal matrix.
    let mut l = [[T::zero(); 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }

    // Forward substitution: L y = -g.
    let mut y = [T::zero(); 5];
    for i in 0..5 {
        let mut s = -g[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    // Back substitution: Lᵀ δ = y.
    let mut delta = [T::zero(); 5];
    for i in (0..5).rev() {
        let mut s = y[i];
        for k in (i + 1)..5 {
            s -= l[k][i] * delta[k];
        }
        delta[i] = s / l[i][i];
    }
    if delta.iter().all(|d| d.is_finite()) {
        Some(delta)
    } else {
        None
    }
}

/// Run damped least squares from one starting point.
///
/// A linear-solve failure or a step into the field singularity is treated as
/// a rejected step (λ grows); hitting the iteration budget yields a
/// non-converged report rather than an error.
pub fn lm_solve<T: Real>(
    init: PoseParams<T>,
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
    config: &SolverConfig<T>,
) -> Result<EstimateReport<T>> {
    config.validate()?;
    let mut params = if init.needs_reanchor() {
        init.reanchored()
    } else {
        init
    };
    let (mut res, mut jac) = residuals_and_jacobian(&params, readings, array, spec)?;
    let mut cost = sum_squares(&res);
    let mut trace = vec![cost];
    let mut lambda = config.initial_damping;
    let lambda_min = T::lit(LAMBDA_MIN);
    let lambda_max = T::lit(LAMBDA_MAX);

    let mut converged = false;
    let mut reason = TerminationReason::MaxIterations;
    let mut iterations = 0;
    let mut g = gradient(&jac, &res);
    let mut jtj = normal_matrix(&jac);

    for iter in 1..=config.max_iterations {
        iterations = iter;
        if inf_norm(&g) < config.gradient_tol {
            converged = true;
            reason = TerminationReason::Gradient;
            iterations = iter - 1;
            break;
        }

        let Some(delta) = solve_damped(&jtj, &g, lambda) else {
            lambda = (lambda * config.damping_up).min(lambda_max);
            continue;
        };
        let small_step = norm(&delta) <= config.step_tol * (T::one() + params.param_norm());
        let candidate = params.apply_step(&delta);
        if !candidate.is_finite() {
            lambda = (lambda * config.damping_up).min(lambda_max);
            continue;
        }
        let new_cost = match residuals(&candidate, readings, array, spec) {
            Ok(r) => sum_squares(&r),
            // Stepped into the singularity guard; treat as a rejected step.
            Err(_) => T::infinity(),
        };

        if new_cost < cost {
            let rel_drop = (cost - new_cost) / cost;
            params = candidate;
            if params.needs_reanchor() {
                params = params.reanchored();
            }
            let (new_res, new_jac) = residuals_and_jacobian(&params, readings, array, spec)?;
            res = new_res;
            jac = new_jac;
            cost = new_cost;
            trace.push(cost);
            g = gradient(&jac, &res);
            jtj = normal_matrix(&jac);
            lambda = (lambda * config.damping_down).max(lambda_min);
            if cost == T::zero() {
                converged = true;
                reason = TerminationReason::Cost;
                break;
            }
            if small_step {
                converged = true;
                reason = TerminationReason::Step;
                break;
            }
            if rel_drop <= config.cost_tol {
                converged = true;
                reason = TerminationReason::Cost;
                break;
            }
        } else {
            if small_step {
                // The damped step is already negligible; further growth of
                // lambda can only shrink it.
                converged = true;
                reason = TerminationReason::Step;
                break;
            }
            lambda = (lambda * config.damping_up).min(lambda_max);
        }
    }

    let residual_count = T::from_usize(res.len().max(1)).unwrap();
    Ok(EstimateReport {
        pose: params.to_pose(),
        final_cost: cost,
        iterations,
        converged,
        termination_reason: reason,
        residual_rms: (cost / residual_count).sqrt(),
        cost_trace: trace,
    })
}
