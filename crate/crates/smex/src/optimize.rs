//! Minimization of the regularized trace-mismatch functional.
//!
//! The cost is a strictly convex quadratic, so two independent minimizers are
//! provided: a limited-memory quasi-Newton method (the default) and a
//! conjugate-gradient iteration on the exact quadratic driven by Hessian
//! products. Both use the factorized control metric K as preconditioner /
//! initial inverse-Hessian, which clusters the spectrum at 2 lambda plus a
//! low-rank trace part and keeps iteration counts near the number of
//! interface unknowns instead of the control dimension.

use crate::linalg::{axpy, dot, norm};
use crate::transmission::{Control, DiscreteOperators, StatePair, TransmissionError};
use std::collections::VecDeque;
use std::fmt;

#[derive(Debug)]
pub enum OptimizeError {
    NonpositiveLambda { lambda: f64 },
    NonpositiveMeshsize { h: f64 },
    OutOfRange { what: &'static str, value: f64 },
    Transmission(TransmissionError),
}

impl fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizeError::NonpositiveLambda { lambda } => write!(
                f,
                "regularization parameter must be positive, got {lambda}; the unregularized discrete problem may be ill-posed"
            ),
            OptimizeError::NonpositiveMeshsize { h } => {
                write!(f, "meshsize must be positive, got {h}")
            }
            OptimizeError::OutOfRange { what, value } => write!(f, "{what} = {value} out of range"),
            OptimizeError::Transmission(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for OptimizeError {}

impl From<TransmissionError> for OptimizeError {
    fn from(e: TransmissionError) -> Self {
        OptimizeError::Transmission(e)
    }
}

/// Mesh-dependent regularization schedule lambda_h = C h^q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub c: f64,
    pub q: f64,
}

impl Schedule {
    pub fn new(c: f64, q: f64) -> Result<Schedule, OptimizeError> {
        if !(c > 0.0) {
            return Err(OptimizeError::OutOfRange {
                what: "schedule constant C",
                value: c,
            });
        }
        if !(q > 0.0) {
            return Err(OptimizeError::OutOfRange {
                what: "schedule exponent q",
                value: q,
            });
        }
        Ok(Schedule { c, q })
    }

    /// True when the exponent lies outside the declared admissible interval
    /// (0, q_max); a warning condition, not an error.
    pub fn outside_admissible(&self, q_max: f64) -> bool {
        self.q >= q_max
    }
}

pub fn lambda_of(schedule: Schedule, h: f64) -> Result<f64, OptimizeError> {
    if !(h > 0.0) {
        return Err(OptimizeError::NonpositiveMeshsize { h });
    }
    Ok(schedule.c * h.powf(schedule.q))
}

/// Admissible exponent interval (0, 2 p' + sigma) for a convergent schedule,
/// given the approximation order p' in (0, k] and the duality-lift exponent
/// sigma in (0, 1].
pub fn recommended_q(p_prime: f64, sigma: f64) -> Result<(f64, f64), OptimizeError> {
    if !(p_prime > 0.0 && p_prime <= 1.0) {
        return Err(OptimizeError::OutOfRange {
            what: "p_prime",
            value: p_prime,
        });
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(OptimizeError::OutOfRange {
            what: "sigma",
            value: sigma,
        });
    }
    Ok((0.0, 2.0 * p_prime + sigma))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Lbfgs,
    Cg,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerOptions {
    pub method: Method,
    /// Gradient tolerance, relative to the initial gradient norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease constant of the backtracking line search.
    pub sufficient_decrease: f64,
    /// Step-halving factor of the backtracking line search.
    pub backtrack_factor: f64,
    /// Maximum number of step trials per line search.
    pub max_line_search: usize,
    /// History depth of the quasi-Newton method.
    pub memory: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            method: Method::Lbfgs,
            tolerance: 1e-8,
            max_iterations: 200,
            sufficient_decrease: 1e-4,
            backtrack_factor: 0.5,
            max_line_search: 40,
            memory: 10,
        }
    }
}

impl OptimizerOptions {
    /// The reference configuration of the original experiments (a BFGS run
    /// with eps = 1e-6, nbiter = 10, nbiterline = 1), kept as a citable
    /// preset for comparison runs; the defaults above are this crate's own.
    pub fn paper_freefem() -> Self {
        OptimizerOptions {
            method: Method::Lbfgs,
            tolerance: 1e-6,
            max_iterations: 10,
            max_line_search: 1,
            ..OptimizerOptions::default()
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    MaxIterations,
    LineSearchFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::ToleranceMet => write!(f, "tolerance met"),
            Termination::MaxIterations => write!(f, "max iterations"),
            Termination::LineSearchFailure => write!(f, "line-search failure"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub misfit: f64,
    pub regularizer: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct IterationHistory {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl IterationHistory {
    pub fn iterations(&self) -> usize {
        self.records.last().map(|r| r.iteration).unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,cost,misfit,reg,gradnorm,step\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.iteration, r.cost, r.misfit, r.regularizer, r.gradient_norm, r.step
            ));
        }
        out
    }
}

pub struct MinimizeResult {
    pub control: Control,
    pub state: StatePair,
    pub history: IterationHistory,
}

/// Minimizes the regularized cost over the control space, starting from
/// `w0`. Cost is non-increasing along accepted iterates; the returned state
/// is the state at the returned control.
pub fn minimize(
    ops: &DiscreteOperators,
    lambda: f64,
    w0: Control,
    opts: &OptimizerOptions,
) -> Result<MinimizeResult, OptimizeError> {
    if !(lambda > 0.0) {
        return Err(OptimizeError::NonpositiveLambda { lambda });
    }
    match opts.method {
        Method::Lbfgs => minimize_lbfgs(ops, lambda, w0, opts),
        Method::Cg => minimize_cg(ops, lambda, w0, opts),
    }
}

struct Evaluation {
    state: StatePair,
    cost: f64,
    misfit: f64,
}

/// One stored quasi-Newton update: (s, y, K^-1 y, s.y), oldest first in the
/// history deque.
type CurvaturePair = (Vec<f64>, Vec<f64>, Vec<f64>, f64);

fn evaluate(
    ops: &DiscreteOperators,
    w: &Control,
    lambda: f64,
) -> Result<Evaluation, OptimizeError> {
    let state = ops.solve_state(w)?;
    let misfit = ops.misfit(&state);
    let cost = misfit + lambda * ops.control_norm(w).powi(2);
    Ok(Evaluation {
        state,
        cost,
        misfit,
    })
}

fn minimize_lbfgs(
    ops: &DiscreteOperators,
    lambda: f64,
    w0: Control,
    opts: &OptimizerOptions,
) -> Result<MinimizeResult, OptimizeError> {
    let mut w = w0;
    let mut eval = evaluate(ops, &w, lambda)?;
    let mut grad = {
        let adjoint = ops.solve_adjoint(&eval.state)?;
        ops.gradient(&w, &adjoint, lambda)
    };
    let g0_norm = norm(&grad);
    let mut records = vec![IterationRecord {
        iteration: 0,
        cost: eval.cost,
        misfit: eval.misfit,
        regularizer: eval.cost - eval.misfit,
        gradient_norm: g0_norm,
        step: 0.0,
    }];

    let mut pairs: VecDeque<CurvaturePair> = VecDeque::with_capacity(opts.memory);
    let mut termination = Termination::MaxIterations;

    if g0_norm == 0.0 {
        termination = Termination::ToleranceMet;
    } else {
        for iteration in 1..=opts.max_iterations {
            // two-loop recursion with H0 = gamma K^-1
            let mut q = grad.clone();
            let mut alphas = Vec::with_capacity(pairs.len());
            for (s, y, _, rho_inv) in pairs.iter().rev() {
                let alpha = dot(s, &q) / rho_inv;
                axpy(-alpha, y, &mut q);
                alphas.push(alpha);
            }
            let mut r = ops.metric_solve(&q);
            if let Some((s, y, kinv_y, _)) = pairs.back() {
                let gamma = dot(s, y) / dot(y, kinv_y).max(f64::MIN_POSITIVE);
                for v in r.iter_mut() {
                    *v *= gamma;
                }
            }
            for ((s, y, _, rho_inv), alpha) in pairs.iter().zip(alphas.iter().rev()) {
                let beta = dot(y, &r) / rho_inv;
                axpy(alpha - beta, s, &mut r);
            }
            let mut direction: Vec<f64> = r.iter().map(|v| -v).collect();
            let mut slope = dot(&grad, &direction);
            if slope >= 0.0 {
                // curvature information went stale; restart from the
                // preconditioned steepest descent direction
                pairs.clear();
                direction = ops.metric_solve(&grad).iter().map(|v| -v).collect();
                slope = dot(&grad, &direction);
            }

            // backtracking line search with sufficient decrease
            let mut step = 1.0;
            let mut accepted = None;
            for trial in 0..opts.max_line_search.max(1) {
                let w_trial = Control(
                    w.0.iter()
                        .zip(&direction)
                        .map(|(wi, di)| wi + step * di)
                        .collect(),
                );
                let eval_trial = evaluate(ops, &w_trial, lambda)?;
                if eval_trial.cost <= eval.cost + opts.sufficient_decrease * step * slope
                    || (trial + 1 == opts.max_line_search && eval_trial.cost < eval.cost)
                {
                    accepted = Some((w_trial, eval_trial));
                    break;
                }
                step *= opts.backtrack_factor;
            }
            let Some((w_new, eval_new)) = accepted else {
                termination = Termination::LineSearchFailure;
                break;
            };

            let adjoint = ops.solve_adjoint(&eval_new.state)?;
            let grad_new = ops.gradient(&w_new, &adjoint, lambda);

            let s: Vec<f64> = w_new.0.iter().zip(&w.0).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 0.0 {
                // the cost is strictly convex, so sy > 0 except at roundoff
                let kinv_y = ops.metric_solve(&y);
                if pairs.len() == opts.memory {
                    pairs.pop_front();
                }
                pairs.push_back((s, y, kinv_y, sy));
            }

            w = w_new;
            eval = eval_new;
            grad = grad_new;
            let gnorm = norm(&grad);
            records.push(IterationRecord {
                iteration,
                cost: eval.cost,
                misfit: eval.misfit,
                regularizer: eval.cost - eval.misfit,
                gradient_norm: gnorm,
                step,
            });
            if gnorm <= opts.tolerance * g0_norm {
                termination = Termination::ToleranceMet;
                break;
            }
        }
    }

    Ok(MinimizeResult {
        state: eval.state,
        control: w,
        history: IterationHistory {
            records,
            termination,
        },
    })
}

/// Preconditioned conjugate gradients on the exact quadratic: the gradient
/// is affine in w, so the residual of H w = -grad(0-shifted) is exactly the
/// negative gradient and the cost along iterates follows the standard CG
/// recurrence.
fn minimize_cg(
    ops: &DiscreteOperators,
    lambda: f64,
    w0: Control,
    opts: &OptimizerOptions,
) -> Result<MinimizeResult, OptimizeError> {
    let mut w = w0;
    let eval0 = evaluate(ops, &w, lambda)?;
    let mut cost = eval0.cost;
    let mut residual: Vec<f64> = {
        let adjoint = ops.solve_adjoint(&eval0.state)?;
        ops.gradient(&w, &adjoint, lambda)
            .iter()
            .map(|g| -g)
            .collect()
    };
    let g0_norm = norm(&residual);
    let reg_of = |w: &Control| lambda * ops.control_norm(w).powi(2);
    let mut records = vec![IterationRecord {
        iteration: 0,
        cost,
        misfit: eval0.misfit,
        regularizer: reg_of(&w),
        gradient_norm: g0_norm,
        step: 0.0,
    }];

    let mut termination = Termination::MaxIterations;
    if g0_norm == 0.0 {
        termination = Termination::ToleranceMet;
    } else {
        let mut z = ops.metric_solve(&residual);
        let mut p = z.clone();
        let mut rz = dot(&residual, &z);
        for iteration in 1..=opts.max_iterations {
            let hp = ops.hessvec(&p, lambda)?;
            let php = dot(&p, &hp);
            if php <= 0.0 {
                termination = Termination::LineSearchFailure;
                break;
            }
            let alpha = rz / php;
            axpy(alpha, &p, &mut w.0);
            axpy(-alpha, &hp, &mut residual);
            // quadratic model decrease, exact for the quadratic cost
            cost -= 0.5 * alpha * rz;

            let gnorm = norm(&residual);
            let reg = reg_of(&w);
            records.push(IterationRecord {
                iteration,
                cost,
                misfit: cost - reg,
                regularizer: reg,
                gradient_norm: gnorm,
                step: alpha,
            });
            if gnorm <= opts.tolerance * g0_norm {
                termination = Termination::ToleranceMet;
                break;
            }
            z = ops.metric_solve(&residual);
            let rz_new = dot(&residual, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
    }

    // recompute the exact state and cost at the final control
    let eval = evaluate(ops, &w, lambda)?;
    if let Some(last) = records.last_mut() {
        last.cost = eval.cost;
        last.misfit = eval.misfit;
        last.regularizer = eval.cost - eval.misfit;
    }
    Ok(MinimizeResult {
        state: eval.state,
        control: w,
        history: IterationHistory {
            records,
            termination,
        },
    })
}
