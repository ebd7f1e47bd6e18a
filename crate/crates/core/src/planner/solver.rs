//! Augmented-Lagrangian solver with a BFGS inner loop on finite-difference
//! gradients.
//!
//! Constraints are handled in their smooth squared form
//! `(‖v‖² − r²) / (2r)`, which agrees with `‖v‖ − r` to first order at the
//! boundary. Residuals reported to callers are always the metric form.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{flatten_controls, unflatten_controls, ConstraintValues, PlanProblem};
use crate::error::{Error, Result};
use crate::linalg::ControlVec;
use crate::trajectory::NominalTrajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Constraint residual (meters) accepted as feasible.
    pub feasibility_tol: f64,
    /// Inner-loop stopping threshold on the Euclidean gradient norm.
    pub gradient_tol: f64,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
    /// Central-difference step is `fd_step · (1 + |u_i|)`.
    pub fd_step: f64,
    /// Cap on the Euclidean length of a trial step, in decision units.
    pub max_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_outer: 30,
            max_inner: 400,
            feasibility_tol: 1e-4,
            gradient_tol: 1e-6,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            max_penalty: 1e8,
            fd_step: 1e-6,
            max_step: 0.5,
        }
    }
}

/// Why the last inner minimization stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerStatus {
    GradientTolerance,
    /// No step along the search direction decreased the merit function;
    /// stationary to finite-difference precision.
    LineSearchStalled,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub controls: Vec<ControlVec>,
    pub trajectory: NominalTrajectory,
    pub objective_value: f64,
    /// `max(0, ‖x_K − x_g‖ − r_g)`.
    pub terminal_residual: f64,
    /// `max(0, max_t ‖u_t‖ − r_u)`.
    pub control_residual: f64,
    /// Inner iterations summed over all outer iterations.
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub inner_status: InnerStatus,
    /// The returned objective used the Gramian sentinel.
    pub degenerate: bool,
}

impl PlanResult {
    pub fn residual(&self) -> f64 {
        self.terminal_residual.max(self.control_residual)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.residual() <= tol
    }
}

struct Candidate {
    x: Vec<f64>,
    objective: f64,
    residual: f64,
    degenerate: bool,
}

struct Solver<'a> {
    problem: &'a PlanProblem,
    opts: SolverOptions,
    n_u: usize,
}

impl Solver<'_> {
    fn controls(&self, x: &[f64]) -> Vec<ControlVec> {
        unflatten_controls(x, self.n_u)
    }

    /// Smooth constraint values: terminal first, then one per step.
    fn smooth_constraints(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s = &self.problem.scenario;
        let controls = self.controls(x);
        let traj = self.problem.rollout(&controls).ok()?;
        let d = traj.terminal() - &s.goal;
        let mut c = Vec::with_capacity(controls.len() + 1);
        c.push((d.dot(&d) - s.r_g * s.r_g) / (2.0 * s.r_g));
        c.extend(controls.iter().map(|u| (u.dot(u) - s.r_u * s.r_u) / (2.0 * s.r_u)));
        Some(c)
    }

    fn merit(&self, x: &[f64], lambda: &[f64], rho: f64) -> f64 {
        let Ok(eval) = self.problem.evaluate(&self.controls(x)) else {
            return f64::INFINITY;
        };
        let Some(c) = self.smooth_constraints(x) else {
            return f64::INFINITY;
        };
        let penalty: f64 = c
            .iter()
            .zip(lambda)
            .map(|(ci, li)| {
                let shifted = (li + rho * ci).max(0.0);
                (shifted * shifted - li * li) / (2.0 * rho)
            })
            .sum();
        let value = eval.value + penalty;
        if value.is_finite() {
            value
        } else {
            f64::INFINITY
        }
    }

    fn gradient(&self, x: &[f64], lambda: &[f64], rho: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = self.opts.fd_step * (1.0 + x[i].abs());
                probe[i] = x[i] + h;
                let fp = self.merit(&probe, lambda, rho);
                probe[i] = x[i] - h;
                let fm = self.merit(&probe, lambda, rho);
                probe[i] = x[i];
                let g = (fp - fm) / (2.0 * h);
                if g.is_finite() {
                    g
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// BFGS on the merit function from `x`.
    fn minimize(&self, mut x: Vec<f64>, lambda: &[f64], rho: f64) -> (Vec<f64>, usize, InnerStatus, f64) {
        let n = x.len();
        let mut f = self.merit(&x, lambda, rho);
        let mut g = self.gradient(&x, lambda, rho);
        let mut hinv = identity(n);
        let mut fresh = true;
        let mut status = InnerStatus::IterationLimit;
        let mut iterations = 0;
        while iterations < self.opts.max_inner {
            let gnorm = norm(&g);
            if gnorm <= self.opts.gradient_tol {
                status = InnerStatus::GradientTolerance;
                break;
            }
            iterations += 1;
            let mut dir = mat_vec(&hinv, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
            let mut slope = dot(&g, &dir);
            if slope.is_nan() || slope >= 0.0 {
                hinv = identity(n);
                fresh = true;
                dir = g.iter().map(|v| -v).collect();
                slope = -gnorm * gnorm;
            }
            let dnorm = norm(&dir);
            if dnorm > self.opts.max_step {
                let s = self.opts.max_step / dnorm;
                dir.iter_mut().for_each(|d| *d *= s);
                slope *= s;
            }
            let Some((x_new, f_new)) = self.line_search(&x, f, &dir, slope, lambda, rho) else {
                if fresh {
                    status = InnerStatus::LineSearchStalled;
                    break;
                }
                hinv = identity(n);
                fresh = true;
                continue;
            };
            let g_new = self.gradient(&x_new, lambda, rho);
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
                if fresh {
                    let scale = sy / dot(&y, &y);
                    hinv = identity(n);
                    hinv.iter_mut().for_each(|v| *v *= scale);
                }
                bfgs_update(&mut hinv, &s, &y, sy);
                fresh = false;
            }
            x = x_new;
            f = f_new;
            g = g_new;
        }
        let gnorm = norm(&g);
        if status == InnerStatus::IterationLimit && gnorm <= self.opts.gradient_tol {
            status = InnerStatus::GradientTolerance;
        }
        (x, iterations, status, gnorm)
    }

    /// Armijo backtracking.
    fn line_search(
        &self,
        x: &[f64],
        f: f64,
        dir: &[f64],
        slope: f64,
        lambda: &[f64],
        rho: f64,
    ) -> Option<(Vec<f64>, f64)> {
        let mut alpha = 1.0;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
            let ft = self.merit(&trial, lambda, rho);
            if ft <= f + 1e-4 * alpha * slope && ft < f {
                return Some((trial, ft));
            }
            alpha *= 0.5;
        }
        None
    }

    fn candidate(&self, x: &[f64]) -> Option<Candidate> {
        let controls = self.controls(x);
        let eval = self.problem.evaluate(&controls).ok()?;
        let cons = self.problem.evaluate_constraints(&controls).ok()?;
        eval.value.is_finite().then(|| Candidate {
            x: x.to_vec(),
            objective: eval.value,
            residual: cons.residual(),
            degenerate: eval.degenerate,
        })
    }

    /// Feasible beats infeasible; among feasible the lower objective wins;
    /// among infeasible the lower residual. Ties keep the incumbent.
    fn better(&self, challenger: &Candidate, incumbent: &Candidate) -> bool {
        let tol = self.opts.feasibility_tol;
        match (challenger.residual <= tol, incumbent.residual <= tol) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => challenger.objective < incumbent.objective,
            (false, false) => challenger.residual < incumbent.residual,
        }
    }
}

/// Minimizes the problem objective subject to the goal-ball and control
/// norm constraints, starting from `init`.
///
/// Returns the best feasible iterate seen (the start included), or the
/// least infeasible one when none is feasible; `converged` is false in the
/// latter case.
pub fn solve(problem: &PlanProblem, init: &[ControlVec], opts: &SolverOptions) -> Result<PlanResult> {
    problem.scenario.validate()?;
    if init.len() != problem.horizon() {
        return Err(Error::dim("solve init controls", problem.horizon(), init.len()));
    }
    let solver = Solver {
        problem,
        opts: *opts,
        n_u: problem.control_dim(),
    };
    let mut x = flatten_controls(init);
    let mut best = solver.candidate(&x);
    let mut lambda = vec![0.0; problem.horizon() + 1];
    let mut rho = opts.initial_penalty;
    let mut previous_residual = best.as_ref().map_or(f64::INFINITY, |c| c.residual);
    let mut iterations = 0;
    let mut outer_iterations = 0;
    let mut converged = false;
    let mut status = InnerStatus::IterationLimit;

    for _ in 0..opts.max_outer {
        outer_iterations += 1;
        let (x_new, inner_iters, inner_status, _gnorm) = solver.minimize(x, &lambda, rho);
        x = x_new;
        iterations += inner_iters;
        status = inner_status;
        let Some(current) = solver.candidate(&x) else {
            break;
        };
        let residual = current.residual;
        let replace = match &best {
            Some(b) => solver.better(&current, b),
            None => true,
        };
        if replace {
            best = Some(current);
        }
        if residual <= opts.feasibility_tol && status != InnerStatus::IterationLimit {
            converged = true;
            break;
        }
        if let Some(c) = solver.smooth_constraints(&x) {
            for (li, ci) in lambda.iter_mut().zip(&c) {
                *li = (*li + rho * ci).max(0.0);
            }
        }
        if residual > 0.25 * previous_residual {
            rho = (rho * opts.penalty_growth).min(opts.max_penalty);
        }
        previous_residual = residual;
    }

    let best = best.ok_or_else(|| Error::InvalidArgument("no finite objective value reachable from init".into()))?;
    let controls = solver.controls(&best.x);
    let trajectory = problem.rollout(&controls)?;
    let cons: ConstraintValues = problem.evaluate_constraints(&controls)?;
    let feasible = cons.residual() <= opts.feasibility_tol;
    Ok(PlanResult {
        objective_value: best.objective,
        terminal_residual: cons.terminal_residual(),
        control_residual: cons.control_residual(),
        controls,
        trajectory,
        iterations,
        outer_iterations,
        converged: converged && feasible,
        inner_status: status,
        degenerate: best.degenerate,
    })
}

/// Runs [`solve`] from `init` and from `restarts` perturbed copies of it.
///
/// Each perturbation adds to every control an independent draw uniform on
/// the disc of radius `0.1 · r_u`, from a ChaCha8 stream seeded with `seed`.
/// The best result under the feasibility-first ordering is returned; ties
/// go to the earliest run.
pub fn solve_with_restarts(
    problem: &PlanProblem,
    init: &[ControlVec],
    opts: &SolverOptions,
    restarts: usize,
    seed: u64,
) -> Result<PlanResult> {
    let mut best = solve(problem, init, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 0.1 * problem.scenario.r_u;
    for _ in 0..restarts {
        let perturbed: Vec<ControlVec> = init
            .iter()
            .map(|u| {
                let angle = rng.gen::<f64>() * core::f64::consts::TAU;
                let r = radius * libm::sqrt(rng.gen::<f64>());
                let mut p = u.clone();
                p[0] += r * libm::cos(angle);
                if p.len() > 1 {
                    p[1] += r * libm::sin(angle);
                }
                p
            })
            .collect();
        let result = solve(problem, &perturbed, opts)?;
        let tol = opts.feasibility_tol;
        let wins = match (result.is_feasible(tol), best.is_feasible(tol)) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => result.objective_value < best.objective_value,
            (false, false) => result.residual() < best.residual(),
        };
        if wins {
            best = result;
        }
    }
    Ok(best)
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// Inverse-Hessian BFGS update
/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -r * (s[i] * hy[j] + hy[i] * s[j]) + (r * r * yhy + r) * s[i] * s[j];
        }
    }
}
