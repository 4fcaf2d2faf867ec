//! Independent checks of the closed-form solutions.
//!
//! Two kinds of evidence: pointwise PDE residuals of the analytic jets on a
//! grid (these should sit at rounding level), and a plain leapfrog
//! finite-difference solver for `v_tt = f(y) v_yy` that knows nothing about
//! the transformation machinery and is compared against the closed forms at
//! second order.

use crate::domain::{DomainError, Interval};
use crate::expr::{Expr1D, ExprError};
use crate::families::{AcousticsEquation, AcousticsSolution, FamilyError};
use crate::profile::ProfileFunction;
use crate::template::{Jet2, JetEvaluator, SolutionTemplate};
use crate::transform::EquationSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] ExprError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("grid x-range [{lo}, {hi}] leaves the equation domain [{dom_lo}, {dom_hi}]")]
    GridOutsideDomain {
        lo: f64,
        hi: f64,
        dom_lo: f64,
        dom_hi: f64,
    },
    #[error("need at least {need} grid points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("speed profile must be positive, got f = {value:.6e} at y = {y}")]
    BadSpeed { y: f64, value: f64 },
    #[error("finite-difference run became unstable at t = {t} (|v| = {value:.3e})")]
    Instability { t: f64, value: f64 },
    #[error("time step collapsed (dt = {dt:.3e}); check cfl and t_final")]
    BadTimeStep { dt: f64 },
}

/// Uniform rectangular evaluation grid in `(t, x)` (or `(t, y)` for the
/// acoustic form).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid2D {
    pub t: Interval,
    pub x: Interval,
    pub nt: usize,
    pub nx: usize,
}

impl Grid2D {
    pub fn new(t: Interval, x: Interval, nt: usize, nx: usize) -> Result<Self, VerifyError> {
        if nt < 2 || nx < 2 {
            return Err(VerifyError::TooFewPoints {
                need: 2,
                got: nt.min(nx),
            });
        }
        Ok(Grid2D { t, x, nt, nx })
    }

    pub fn t_points(&self) -> Vec<f64> {
        self.t.uniform_samples(self.nt)
    }

    pub fn x_points(&self) -> Vec<f64> {
        self.x.uniform_samples(self.nx)
    }
}

/// Pointwise PDE residual statistics over a grid.
///
/// `max_rel` normalizes each residual by the largest term entering the
/// equation at that point (plus a tiny floor), so it reads as "digits of
/// cancellation": exact solutions land near 1e-15, wrong ones near 1.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResidualReport {
    pub grid: Grid2D,
    pub max_abs: f64,
    pub max_rel: f64,
    pub l2: f64,
    /// Location `(t, x)` of the worst relative residual.
    pub at: (f64, f64),
}

const REL_FLOOR: f64 = 1e-30;

fn accumulate(
    points: impl Iterator<Item = (f64, f64)>,
    mut eval: impl FnMut(f64, f64) -> Result<(f64, f64), VerifyError>,
    grid: Grid2D,
) -> Result<ResidualReport, VerifyError> {
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut count = 0usize;
    let mut at = (grid.t.lo, grid.x.lo);
    for (t, x) in points {
        let (resid, scale) = eval(t, x)?;
        let abs = resid.abs();
        let rel = abs / (scale + REL_FLOOR);
        max_abs = max_abs.max(abs);
        if rel > max_rel {
            max_rel = rel;
            at = (t, x);
        }
        sum_sq += resid * resid;
        count += 1;
    }
    Ok(ResidualReport {
        grid,
        max_abs,
        max_rel,
        l2: (sum_sq / count as f64).sqrt(),
        at,
    })
}

/// Residual of `u_tt − u_xx − G(x) u_x` for a solution template of the wave
/// equation with coefficient `G`.
pub fn residual_general(
    eq: &EquationSpec,
    template: &SolutionTemplate,
    t_profile: &ProfileFunction,
    x_profile: &ProfileFunction,
    grid: &Grid2D,
) -> Result<ResidualReport, VerifyError> {
    let slack = 1e-12 * (1.0 + eq.domain.hi.abs());
    if grid.x.lo < eq.domain.lo - slack || grid.x.hi > eq.domain.hi + slack {
        return Err(VerifyError::GridOutsideDomain {
            lo: grid.x.lo,
            hi: grid.x.hi,
            dom_lo: eq.domain.lo,
            dom_hi: eq.domain.hi,
        });
    }
    let evaluator = JetEvaluator::new(template);
    let ts = grid.t_points();
    let xs = grid.x_points();
    let points = ts
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
        .collect::<Vec<_>>();
    accumulate(
        points.into_iter(),
        |t, x| {
            let jet = evaluator.jet(t, x, t_profile, x_profile)?;
            let g = eq.coeff.eval(x)?;
            let resid = jet.u_tt - jet.u_xx - g * jet.u_x;
            let scale = jet.u_tt.abs().max(jet.u_xx.abs()).max((g * jet.u_x).abs());
            Ok((resid, scale))
        },
        *grid,
    )
}

/// Residual of `v_tt − f(y) v_yy` for an acoustic solution obtained by the
/// change of variables. The grid's x-axis is read as `y`.
pub fn residual_acoustics(
    equation: &AcousticsEquation,
    template: &SolutionTemplate,
    t_profile: &ProfileFunction,
    x_profile: &ProfileFunction,
    grid: &Grid2D,
) -> Result<ResidualReport, VerifyError> {
    let sol = AcousticsSolution::new(equation.clone(), template);
    let ts = grid.t_points();
    let ys = grid.x_points();
    let points = ts
        .iter()
        .flat_map(|&t| ys.iter().map(move |&y| (t, y)))
        .collect::<Vec<_>>();
    accumulate(
        points.into_iter(),
        |t, y| {
            let jet = sol.jet(t, y, t_profile, x_profile)?;
            let f = equation.f.eval(y)?;
            let resid = jet.u_tt - f * jet.u_xx;
            let scale = jet.u_tt.abs().max((f * jet.u_xx).abs());
            Ok((resid, scale))
        },
        *grid,
    )
}

/// Returns a copy of the template with its highest-order coefficient scaled
/// by the x-dependent factor `1 + rel·x`. Residual checks must notice: a
/// relative perturbation of this size produces a relative residual of
/// comparable size, orders of magnitude above rounding. (A constant rescale
/// would not do: the equation is linear, so scaling a whole side — which for
/// low-order templates can be a single term — leaves an exact solution.)
pub fn corrupt_template(template: &SolutionTemplate, rel: f64) -> SolutionTemplate {
    let bump = Expr1D::one() + Expr1D::constant(rel) * Expr1D::var();
    let target = template
        .plus_terms()
        .map(|(k, _)| k)
        .max()
        .map(|k| (true, k))
        .or_else(|| template.minus_terms().map(|(k, _)| k).max().map(|k| (false, k)));
    let Some((on_plus, order)) = target else {
        return template.clone();
    };
    let plus = template.plus_terms().map(|(k, c)| {
        if on_plus && k == order {
            (k, c.clone() * bump.clone())
        } else {
            (k, c.clone())
        }
    });
    let minus = template.minus_terms().map(|(k, c)| {
        if !on_plus && k == order {
            (k, c.clone() * bump.clone())
        } else {
            (k, c.clone())
        }
    });
    SolutionTemplate::from_terms(plus.collect::<Vec<_>>(), minus.collect::<Vec<_>>())
}

/// Configuration of the leapfrog reference solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FdSolverConfig {
    /// Spatial interval (the acoustic `y`-range).
    pub interval: Interval,
    /// Number of spatial nodes including both boundaries.
    pub n_points: usize,
    /// Courant number; the scheme is stable for values below 1.
    pub cfl: f64,
    pub t_final: f64,
}

impl FdSolverConfig {
    pub fn new(interval: Interval, n_points: usize, t_final: f64) -> Self {
        FdSolverConfig {
            interval,
            n_points,
            cfl: 0.9,
            t_final,
        }
    }
}

/// Outcome of one finite-difference run, with errors measured against the
/// exact field at the final time.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FdRun {
    pub n_points: usize,
    pub n_steps: usize,
    pub dy: f64,
    pub dt: f64,
    pub t_final: f64,
    pub max_err: f64,
    pub l2_err: f64,
}

/// Integrates `v_tt = f(y) v_yy` by leapfrog with exact Dirichlet boundary
/// values and exact initial data supplied by `exact(t, y)`; the first step is
/// seeded by the second-order Taylor expansion using the exact `v_t` and
/// `v_yy` at `t = 0`.
///
/// The run is deterministic: identical inputs produce bit-identical results.
pub fn fd_solve<F>(
    f: &Expr1D,
    exact: F,
    config: &FdSolverConfig,
) -> Result<FdRun, VerifyError>
where
    F: Fn(f64, f64) -> Result<Jet2, VerifyError>,
{
    if config.n_points < 3 {
        return Err(VerifyError::TooFewPoints {
            need: 3,
            got: config.n_points,
        });
    }
    let ys = config.interval.uniform_samples(config.n_points);
    let n = ys.len();
    let dy = config.interval.length() / (n - 1) as f64;

    let mut speed = Vec::with_capacity(n);
    let mut f_max = 0.0f64;
    for &y in &ys {
        let v = f.eval(y)?;
        if v <= 0.0 {
            return Err(VerifyError::BadSpeed { y, value: v });
        }
        speed.push(v);
        f_max = f_max.max(v);
    }

    let dt_raw = config.cfl * dy / f_max.sqrt();
    if !dt_raw.is_finite() || dt_raw <= 0.0 || config.t_final <= 0.0 {
        return Err(VerifyError::BadTimeStep { dt: dt_raw });
    }
    let n_steps = (config.t_final / dt_raw).ceil().max(1.0) as usize;
    let dt = config.t_final / n_steps as f64;
    let lambda: Vec<f64> = speed.iter().map(|&fi| fi * (dt / dy) * (dt / dy)).collect();

    let mut prev = Vec::with_capacity(n);
    let mut curr = Vec::with_capacity(n);
    let mut amp0 = 0.0f64;
    for &y in &ys {
        let jet = exact(0.0, y)?;
        prev.push(jet.u);
        curr.push(jet.u + dt * jet.u_t + 0.5 * dt * dt * f.eval(y)? * jet.u_xx);
        amp0 = amp0.max(jet.u.abs());
    }
    curr[0] = exact(dt, ys[0])?.u;
    curr[n - 1] = exact(dt, ys[n - 1])?.u;
    let blow_up = 1e12 * (1.0 + amp0);

    let mut next = vec![0.0f64; n];
    for step in 2..=n_steps {
        let t = step as f64 * dt;
        next[0] = exact(t, ys[0])?.u;
        next[n - 1] = exact(t, ys[n - 1])?.u;
        for i in 1..n - 1 {
            next[i] = 2.0 * curr[i] - prev[i]
                + lambda[i] * (curr[i + 1] - 2.0 * curr[i] + curr[i - 1]);
        }
        for &v in &next {
            if !v.is_finite() || v.abs() > blow_up {
                return Err(VerifyError::Instability { t, value: v.abs() });
            }
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }

    let t_end = config.t_final;
    let mut max_err = 0.0f64;
    let mut sum_sq = 0.0f64;
    for (&y, &v) in ys.iter().zip(curr.iter()) {
        let err = (v - exact(t_end, y)?.u).abs();
        max_err = max_err.max(err);
        sum_sq += err * err;
    }
    Ok(FdRun {
        n_points: n,
        n_steps,
        dy,
        dt,
        t_final: t_end,
        max_err,
        l2_err: (sum_sq / n as f64).sqrt(),
    })
}

/// Runs the solver at each resolution in `levels` (same physics, finer
/// grids) and returns the runs in order.
pub fn fd_convergence<F>(
    f: &Expr1D,
    exact: F,
    base: &FdSolverConfig,
    levels: &[usize],
) -> Result<Vec<FdRun>, VerifyError>
where
    F: Fn(f64, f64) -> Result<Jet2, VerifyError>,
{
    let mut runs = Vec::with_capacity(levels.len());
    for &n_points in levels {
        let config = FdSolverConfig {
            n_points,
            ..*base
        };
        runs.push(fd_solve(f, &exact, &config)?);
    }
    Ok(runs)
}

/// Observed convergence order from errors on grids refined by factors of 2:
/// the average of `log2(e_k / e_{k+1})`. Returns `None` when fewer than two
/// errors are given or the sequence is not strictly decreasing through
/// positive values (no order is observable then).
pub fn convergence_order(errors: &[f64]) -> Option<f64> {
    if errors.len() < 2 {
        return None;
    }
    let mut sum = 0.0f64;
    for pair in errors.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !(a > 0.0 && b > 0.0 && b < a) {
            return None;
        }
        sum += (a / b).log2();
    }
    Some(sum / (errors.len() - 1) as f64)
}

/// Adapts an acoustic closed-form solution to the `exact(t, y)` interface of
/// [`fd_solve`].
pub fn acoustic_exact<'a>(
    solution: &'a AcousticsSolution,
    t_profile: &'a ProfileFunction,
    x_profile: &'a ProfileFunction,
) -> impl Fn(f64, f64) -> Result<Jet2, VerifyError> + 'a {
    move |t, y| Ok(solution.jet(t, y, t_profile, x_profile)?)
}
