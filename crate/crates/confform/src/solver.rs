//! Newton solves of the discrete prescribed-curvature problem.
//!
//! For a target pair `(k, c)` the unknown is the per-vertex log conformal
//! factor `u`. The residual is the weak form of
//! `-lap u = k e^{2u} - K` in the surface, `du/dn = c e^{u} - kappa` on the
//! boundary, tested against nodal basis functions. Summing the residual over
//! all vertices collapses the stiffness contribution and yields
//! `2 pi chi - k A(u) - c L(u)`, so converged solves satisfy the
//! Gauss-Bonnet constraint by construction.

use crate::error::{Error, Result};
use crate::operators::{ConformalState, DiscreteOperators};
use crate::scalar::{kahan_sum, real, Real};
use crate::sparse::{LdltSolver, SymmetricCsr};

/// Target curvature pair `(k, c)` in the admissible domain:
/// `k < 0` with `c < sqrt(-k)`, or `k = 0` with `c < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTarget<T> {
    k: T,
    c: T,
}

impl<T: Real> CurvatureTarget<T> {
    /// Validating constructor; rejects pairs outside the admissible domain.
    pub fn new(k: T, c: T) -> Result<Self> {
        let target = CurvatureTarget { k, c };
        if !target.is_admissible() {
            return Err(Error::InadmissibleTarget {
                k: k.to_f64().unwrap_or(f64::NAN),
                c: c.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(target)
    }

    /// Unvalidated pair, for residual/energy diagnostics at arbitrary (k, c).
    /// Solves re-check admissibility and reject inadmissible pairs.
    pub fn raw(k: T, c: T) -> Self {
        CurvatureTarget { k, c }
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn is_admissible(&self) -> bool {
        if !self.k.is_finite() || !self.c.is_finite() {
            return false;
        }
        if self.k < T::zero() {
            self.c < (-self.k).sqrt()
        } else if self.k == T::zero() {
            self.c < T::zero()
        } else {
            false
        }
    }
}

/// Globalization strategy for the Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearch {
    /// Armijo backtracking on `0.5 * |F|^2`. Robust whenever the Jacobian is
    /// positive definite, which holds for k <= 0, c <= 0.
    ResidualBacktracking,
    /// Armijo backtracking on the variational energy, used on the
    /// continuation path into c > 0. Falls back to the residual rule when
    /// the Newton direction is not an energy descent direction.
    EnergyDescent,
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    /// Residual infinity-norm tolerance. `None` resolves to
    /// `1e-10 * (1 + max |integrated_gauss|)`.
    pub tol_residual: Option<T>,
    pub max_newton_iters: usize,
    pub line_search: LineSearch,
    /// Continuation step in c, as a fraction of sqrt(-k). Must lie in (0, 0.5].
    pub continuation_step_c: T,
    /// Abort when the conformal boundary length exceeds this multiple of the
    /// base boundary length (the blow-up guard near c = sqrt(-k)).
    pub length_blowup_factor: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tol_residual: None,
            max_newton_iters: 100,
            line_search: LineSearch::ResidualBacktracking,
            continuation_step_c: real(0.05),
            length_blowup_factor: real(1e6),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if let Some(tol) = self.tol_residual {
            if !(tol > T::zero()) {
                return Err(Error::Precondition("tol_residual must be positive".into()));
            }
        }
        if self.max_newton_iters < 1 {
            return Err(Error::Precondition(
                "max_newton_iters must be at least 1".into(),
            ));
        }
        if !(self.continuation_step_c > T::zero() && self.continuation_step_c <= real(0.5)) {
            return Err(Error::Precondition(
                "continuation_step_c must lie in (0, 0.5]".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_tolerance(&self, ops: &DiscreteOperators<T>) -> T {
        self.tol_residual
            .unwrap_or_else(|| real::<T>(1e-10) * (T::one() + ops.max_integrated_gauss()))
    }
}

/// Outcome of a converged solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub state: ConformalState<T>,
    pub iterations: usize,
    pub residual_inf_norm: T,
    pub area: T,
    pub boundary_length: T,
    pub converged: bool,
    pub continuation_steps: usize,
    /// Energy at each accepted iterate of the final energy-descent stage;
    /// empty under residual backtracking.
    pub energy_trace: Vec<T>,
}

/// Weak-form residual `F(u)` per vertex.
pub fn residual<T: Real>(
    ops: &DiscreteOperators<T>,
    state: &ConformalState<T>,
    target: &CurvatureTarget<T>,
) -> Vec<T> {
    let n = ops.vertex_count();
    assert_eq!(state.len(), n, "state dimension mismatch");
    let u = state.values();
    let mut f = vec![T::zero(); n];
    ops.stiffness().mul_vec(u, &mut f);
    let k = target.k;
    let c = target.c;
    for v in 0..n {
        f[v] += ops.integrated_gauss()[v] - k * ops.interior_mass()[v] * (u[v] + u[v]).exp();
        if ops.is_boundary(v) {
            f[v] += ops.integrated_geodesic()[v] - c * ops.boundary_mass()[v] * u[v].exp();
        }
    }
    f
}

/// Frechet derivative of the residual: stiffness plus diagonal terms.
/// Positive definite for k < 0, c <= 0.
pub fn jacobian<T: Real>(
    ops: &DiscreteOperators<T>,
    state: &ConformalState<T>,
    target: &CurvatureTarget<T>,
) -> SymmetricCsr<T> {
    let n = ops.vertex_count();
    let u = state.values();
    let two = real::<T>(2.0);
    let mut diag = vec![T::zero(); n];
    for v in 0..n {
        diag[v] = -two * target.k * ops.interior_mass()[v] * (u[v] + u[v]).exp();
        if ops.is_boundary(v) {
            diag[v] -= target.c * ops.boundary_mass()[v] * u[v].exp();
        }
    }
    ops.stiffness().with_diagonal_added(&diag)
}

/// Variational energy whose gradient is the residual.
pub fn discrete_energy<T: Real>(
    ops: &DiscreteOperators<T>,
    state: &ConformalState<T>,
    target: &CurvatureTarget<T>,
) -> T {
    let n = ops.vertex_count();
    let u = state.values();
    let mut su = vec![T::zero(); n];
    ops.stiffness().mul_vec(u, &mut su);
    let half = real::<T>(0.5);
    let quad = half * kahan_sum(u.iter().zip(&su).map(|(&ui, &si)| ui * si));
    let k_half = half * target.k;
    let bulk = kahan_sum((0..n).map(|v| {
        ops.integrated_gauss()[v] * u[v] - k_half * ops.interior_mass()[v] * (u[v] + u[v]).exp()
    }));
    let boundary = kahan_sum((0..n).filter(|&v| ops.is_boundary(v)).map(|v| {
        ops.integrated_geodesic()[v] * u[v] - target.c * ops.boundary_mass()[v] * u[v].exp()
    }));
    quad + bulk + boundary
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

struct NewtonOutcome<T> {
    state: ConformalState<T>,
    iterations: usize,
    residual_inf_norm: T,
    energy_trace: Vec<T>,
}

fn newton_loop<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
    init: ConformalState<T>,
    opts: &SolverOptions<T>,
    line_search: LineSearch,
) -> Result<NewtonOutcome<T>> {
    let tol = opts.resolved_tolerance(ops);
    let cap = opts.length_blowup_factor * ops.base_boundary_length();
    let armijo = real::<T>(1e-4);
    let mut u = init;
    let mut f = residual(ops, &u, target);
    let mut rnorm = inf_norm(&f);
    let mut solver = LdltSolver::new(ops.stiffness());
    let track_energy = line_search == LineSearch::EnergyDescent;
    let mut trace = Vec::new();
    if track_energy {
        trace.push(discrete_energy(ops, &u, target));
    }

    for iter in 0..=opts.max_newton_iters {
        let (_, length) = ops.conformal_measures(&u);
        if !(length <= cap) {
            return Err(Error::NearBlowup {
                c: target.c.to_f64().unwrap_or(f64::NAN),
                boundary_length: length.to_f64().unwrap_or(f64::INFINITY),
            });
        }
        if rnorm <= tol {
            return Ok(NewtonOutcome {
                state: u,
                iterations: iter,
                residual_inf_norm: rnorm,
                energy_trace: trace,
            });
        }
        if iter == opts.max_newton_iters {
            break;
        }

        let jac = jacobian(ops, &u, target);
        solver.factor(&jac)?;
        let neg_f: Vec<T> = f.iter().map(|&x| -x).collect();
        let delta = solver.solve(&neg_f);

        let slope = kahan_sum(f.iter().zip(&delta).map(|(&fi, &di)| fi * di));
        let use_energy = track_energy && slope < T::zero();

        let phi0 = half_norm_sq(&f);
        let e0 = if use_energy {
            discrete_energy(ops, &u, target)
        } else {
            T::zero()
        };
        let mut t = T::one();
        let mut accepted = None;
        let mut best: Option<(T, ConformalState<T>, Vec<T>, T)> = None;
        for _ in 0..40 {
            let mut trial = u.clone();
            for (ui, &di) in trial.values_mut().iter_mut().zip(&delta) {
                *ui += t * di;
            }
            let f_t = residual(ops, &trial, target);
            let phi_t = half_norm_sq(&f_t);
            // Sufficient decrease of 0.5 |F|^2; near the solution this
            // accepts the full Newton step where the energy comparison is
            // below rounding noise.
            let residual_ok =
                phi_t.is_finite() && phi_t <= (T::one() - (armijo + armijo) * t) * phi0;
            let ok = if use_energy {
                let e_t = discrete_energy(ops, &trial, target);
                (e_t.is_finite() && e_t <= e0 + armijo * t * slope) || residual_ok
            } else {
                residual_ok
            };
            if phi_t.is_finite() {
                match &best {
                    Some((phi_b, ..)) if *phi_b <= phi_t => {}
                    _ => best = Some((phi_t, trial.clone(), f_t.clone(), t)),
                }
            }
            if ok {
                accepted = Some((trial, f_t));
                break;
            }
            t = t * real::<T>(0.5);
        }
        let (u_next, f_next) = match accepted {
            Some(pair) => pair,
            None => match best {
                Some((phi_b, trial, f_t, _)) if phi_b < phi0 => (trial, f_t),
                _ => break,
            },
        };
        u = u_next;
        f = f_next;
        rnorm = inf_norm(&f);
        if track_energy {
            trace.push(discrete_energy(ops, &u, target));
        }
    }

    Err(Error::NonConvergence {
        iterations: opts.max_newton_iters,
        residual: rnorm.to_f64().unwrap_or(f64::NAN),
    })
}

fn half_norm_sq<T: Real>(v: &[T]) -> T {
    let half = real::<T>(0.5);
    half * kahan_sum(v.iter().map(|&x| x * x))
}

fn report_from<T: Real>(
    ops: &DiscreteOperators<T>,
    outcome: NewtonOutcome<T>,
    continuation_steps: usize,
) -> SolveReport<T> {
    let (area, boundary_length) = ops.conformal_measures(&outcome.state);
    SolveReport {
        state: outcome.state,
        iterations: outcome.iterations,
        residual_inf_norm: outcome.residual_inf_norm,
        area,
        boundary_length,
        converged: true,
        continuation_steps,
        energy_trace: outcome.energy_trace,
    }
}

fn check_solvable<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
) -> Result<()> {
    if !target.is_admissible() {
        return Err(Error::InadmissibleTarget {
            k: target.k.to_f64().unwrap_or(f64::NAN),
            c: target.c.to_f64().unwrap_or(f64::NAN),
        });
    }
    // With A, L > 0 the Gauss-Bonnet constraint k A + c L = 2 pi chi forces
    // chi < 0 everywhere on the admissible domain.
    if ops.euler_characteristic() >= 0 {
        return Err(Error::InfeasibleTopology {
            chi: ops.euler_characteristic(),
        });
    }
    Ok(())
}

/// Solves the prescribed-curvature problem at an admissible target.
///
/// For `c <= 0` this is damped Newton from `init` (the solution is unique,
/// so the result is init-independent to solver tolerance). For `c > 0` the
/// solve continues from `c = 0` regardless of `init`.
pub fn solve<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
    init: ConformalState<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    check_solvable(ops, target)?;
    if target.c > T::zero() {
        continuation_with_init(ops, target, init, opts)
    } else {
        let outcome = newton_loop(ops, target, init, opts, opts.line_search)?;
        Ok(report_from(ops, outcome, 0))
    }
}

/// Cold-start solve with default options.
pub fn solve_default<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
) -> Result<SolveReport<T>> {
    solve(
        ops,
        target,
        ConformalState::zeros(ops.vertex_count()),
        &SolverOptions::default(),
    )
}

/// Direct Newton from `init` without the continuation dispatch. This is the
/// warm-start entry point used by sweeps and inversion loops; the caller is
/// responsible for `init` being close enough when c > 0.
pub fn solve_from<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
    init: ConformalState<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    check_solvable(ops, target)?;
    let ls = if target.c > T::zero() {
        LineSearch::EnergyDescent
    } else {
        opts.line_search
    };
    let outcome = newton_loop(ops, target, init, opts, ls)?;
    Ok(report_from(ops, outcome, 0))
}

fn continuation_with_init<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
    init: ConformalState<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    let k = target.k;
    let c = target.c;
    if !(k < T::zero()) || !(c > T::zero()) {
        return Err(Error::Precondition(
            "continuation requires k < 0 and c > 0".into(),
        ));
    }
    let step = opts.continuation_step_c * (-k).sqrt();
    let nsteps = (c / step)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);

    let base = CurvatureTarget::raw(k, T::zero());
    let outcome = newton_loop(ops, &base, init, opts, LineSearch::ResidualBacktracking)?;
    let mut total_iters = outcome.iterations;
    let mut state = outcome.state;
    let mut last_c = T::zero();
    let mut last_outcome = None;
    for s in 1..=nsteps {
        let cs = c * real::<T>(s as f64) / real::<T>(nsteps as f64);
        let stage = CurvatureTarget::raw(k, cs);
        match newton_loop(ops, &stage, state.clone(), opts, LineSearch::EnergyDescent) {
            Ok(out) => {
                total_iters += out.iterations;
                state = out.state.clone();
                last_c = cs;
                last_outcome = Some(out);
            }
            Err(e) => {
                return Err(Error::ContinuationFailed {
                    last_c: last_c.to_f64().unwrap_or(f64::NAN),
                    source: Box::new(e),
                });
            }
        }
    }
    let out = last_outcome.expect("at least one continuation step");
    let mut report = report_from(ops, out, nsteps);
    report.iterations = total_iters;
    Ok(report)
}

/// Continuation solve for `0 < c < sqrt(-k)`: solves at c = 0 and advances
/// c in steps of at most `continuation_step_c * sqrt(-k)`, warm-starting
/// each stage with energy-descent line search.
pub fn continuation_solve<T: Real>(
    ops: &DiscreteOperators<T>,
    target: &CurvatureTarget<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    check_solvable(ops, target)?;
    if !(target.c > T::zero()) {
        return Err(Error::Precondition(
            "continuation_solve requires c > 0".into(),
        ));
    }
    continuation_with_init(
        ops,
        target,
        ConformalState::zeros(ops.vertex_count()),
        opts,
    )
}

/// Solves the linearized problem at a converged base solve: `J(u) w = b`
/// with `b = boundary_mass * e^u` on the boundary and zero inside. `w` is
/// the derivative of the solution with respect to c.
pub fn solve_linearized<T: Real>(
    ops: &DiscreteOperators<T>,
    base: &SolveReport<T>,
    target: &CurvatureTarget<T>,
) -> Result<Vec<T>> {
    let n = ops.vertex_count();
    let jac = jacobian(ops, &base.state, target);
    let mut solver = LdltSolver::new(ops.stiffness());
    solver.factor(&jac)?;
    let u = base.state.values();
    let mut b = vec![T::zero(); n];
    for v in 0..n {
        if ops.is_boundary(v) {
            b[v] = ops.boundary_mass()[v] * u[v].exp();
        }
    }
    Ok(solver.solve(&b))
}

/// `dL/dc` at the base solve: the boundary integral of `w` in the conformal
/// metric, `sum_b boundary_mass * e^u * w`.
pub fn boundary_length_derivative<T: Real>(
    ops: &DiscreteOperators<T>,
    base: &SolveReport<T>,
    w: &[T],
) -> T {
    let u = base.state.values();
    kahan_sum((0..ops.vertex_count()).filter(|&v| ops.is_boundary(v)).map(|v| {
        ops.boundary_mass()[v] * u[v].exp() * w[v]
    }))
}
