//! One-dimensional isentropic gas dynamics for the pressure laws attached to
//! the wave-equation families.
//!
//! With `σ = (ρ − a)^{1/(n+1)}` the Riemann invariants are `r = u + σ`,
//! `s = u − σ`, and in hodograph variables the potential `w(r, s)` satisfies
//! an equation whose coefficient `(2K′ − 1)/(4K)` collapses to `−n/(2δ)`
//! (`δ = r − s`, `K` the sound speed in invariants) — the same structure the
//! transformation machinery solves. For `n = 2` the general solution is
//! carried in closed form by two arbitrary profiles `T(r)`, `X(s)`:
//!
//! ```text
//! w = (T(r) + X(s)) / δ,
//! x − (r+s)t/2 − Kt = w_r,
//! x − (r+s)t/2 + Kt = w_s,
//! ```
//!
//! an implicit description of the flow. This module provides the pressure
//! law, the closed form and its derivatives, the forward map
//! `(r, s) → (x, t)`, Newton inversion `(x, t) → (r, s)` with detection of
//! characteristic crossing, field sweeps over space-time windows, and an
//! independent Lax–Friedrichs reference solver for the conservation form.

use crate::domain::Interval;
use crate::profile::ProfileFunction;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GasError {
    #[error("mode order n must be a positive even integer, got {n}")]
    BadOrder { n: u32 },
    #[error("the implicit closed form is available for n = 2 only, got {n}")]
    ClosedFormUnavailable { n: u32 },
    #[error("density {rho} is at or below the branch point a = {a}")]
    DensityBelowBranch { rho: f64, a: f64 },
    #[error("sound speed is not positive at δ = {delta} (K = {k:.6e})")]
    SoundSpeedCollapse { delta: f64, k: f64 },
    #[error("invariants must satisfy r > s, got r = {r}, s = {s}")]
    InvalidInvariants { r: f64, s: f64 },
    #[error("characteristics cross near (x, t) = ({x}, {t}): |det J| = {det:.3e}")]
    CharacteristicsCross { x: f64, t: f64, det: f64 },
    #[error("Newton iteration stalled at (x, t) = ({x}, {t}), residual {resid:.3e}")]
    NewtonStalled { x: f64, t: f64, resid: f64 },
    #[error("reference solver reached vacuum/branch density {rho} at x = {x}, t = {t}")]
    VacuumReached { x: f64, t: f64, rho: f64 },
    #[error("reference solver exceeded {max_steps} steps before t = {t_final}")]
    StepBudgetExceeded { max_steps: usize, t_final: f64 },
    #[error("need at least {need} grid points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("reference solver became non-finite at t = {t}")]
    ReferenceUnstable { t: f64 },
}

/// Isentropic pressure law `p(ρ)` of mode order `n` (even) with branch
/// parameter `a`:
///
/// ```text
/// p = (ρ−a)^{(n+3)/(n+1)}/((n+1)(n+3)) + a(ρ−a)^{2/(n+1)}/(n+1)
///     − a²(ρ−a)^{(1−n)/(n+1)}/(n²−1).
/// ```
///
/// Its derivative is the perfect square `p′ = [(σ + aσ^{−n})/(n+1)]²` with
/// `σ = (ρ−a)^{1/(n+1)}`, so the sound speed is `Z = (σ + aσ^{−n})/(n+1)` —
/// which is also `K(δ)` evaluated at `δ = 2σ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PressureLaw {
    n: u32,
    a: f64,
}

impl PressureLaw {
    pub fn new(n: u32, a: f64) -> Result<Self, GasError> {
        if n == 0 || n % 2 != 0 {
            return Err(GasError::BadOrder { n });
        }
        Ok(PressureLaw { n, a })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    fn checked_base(&self, rho: f64) -> Result<f64, GasError> {
        let base = rho - self.a;
        if !(base > 0.0) {
            return Err(GasError::DensityBelowBranch { rho, a: self.a });
        }
        Ok(base)
    }

    pub fn pressure(&self, rho: f64) -> Result<f64, GasError> {
        let nf = self.n as f64;
        let a = self.a;
        let base = self.checked_base(rho)?;
        Ok(base.powf((nf + 3.0) / (nf + 1.0)) / ((nf + 1.0) * (nf + 3.0))
            + a * base.powf(2.0 / (nf + 1.0)) / (nf + 1.0)
            - a * a * base.powf((1.0 - nf) / (nf + 1.0)) / (nf * nf - 1.0))
    }

    /// `σ(ρ) = (ρ − a)^{1/(n+1)}`.
    pub fn sigma(&self, rho: f64) -> Result<f64, GasError> {
        Ok(self.checked_base(rho)?.powf(1.0 / (self.n as f64 + 1.0)))
    }

    /// `dσ/dρ = σ / ((n+1)(ρ − a))`.
    pub fn sigma_prime(&self, rho: f64) -> Result<f64, GasError> {
        let base = self.checked_base(rho)?;
        Ok(self.sigma(rho)? / ((self.n as f64 + 1.0) * base))
    }

    pub fn rho_of_sigma(&self, sigma: f64) -> f64 {
        sigma.powi(self.n as i32 + 1) + self.a
    }

    fn speed_of_sigma(&self, sigma: f64) -> f64 {
        let nf = self.n as f64;
        (sigma + self.a * sigma.powf(-nf)) / (nf + 1.0)
    }

    /// `dp/dρ` via the exact square identity.
    pub fn dp_drho(&self, rho: f64) -> Result<f64, GasError> {
        let z = self.speed_of_sigma(self.sigma(rho)?);
        Ok(z * z)
    }

    /// Sound speed `Z = √(dp/dρ)`; positive only for `ρ > max(a, 0)`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64, GasError> {
        let sigma = self.sigma(rho)?;
        let z = self.speed_of_sigma(sigma);
        if !(z > 0.0) {
            return Err(GasError::SoundSpeedCollapse {
                delta: 2.0 * sigma,
                k: z,
            });
        }
        Ok(z)
    }
}

/// A validated pair of Riemann invariants with `r > s`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InvariantState {
    r: f64,
    s: f64,
}

impl InvariantState {
    pub fn new(r: f64, s: f64) -> Result<Self, GasError> {
        if !(r > s) || !r.is_finite() || !s.is_finite() {
            return Err(GasError::InvalidInvariants { r, s });
        }
        Ok(InvariantState { r, s })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.r - self.s
    }

    pub fn velocity(&self) -> f64 {
        0.5 * (self.r + self.s)
    }

    pub fn sigma(&self) -> f64 {
        0.5 * (self.r - self.s)
    }
}

/// Density carried by an invariant state under this law.
pub fn rho_of_state(law: &PressureLaw, state: &InvariantState) -> f64 {
    law.rho_of_sigma(state.sigma())
}

/// Invariants `r = u + σ(ρ)`, `s = u − σ(ρ)` of a physical state.
pub fn invariants_from_state(
    law: &PressureLaw,
    u: f64,
    rho: f64,
) -> Result<InvariantState, GasError> {
    let sigma = law.sigma(rho)?;
    InvariantState::new(u + sigma, u - sigma)
}

/// Sound speed in invariant variables:
/// `K(δ) = (a(δ/2)^{−n} + δ/2)/(n+1)`.
pub fn k_func(law: &PressureLaw, delta: f64) -> Result<f64, GasError> {
    if !(delta > 0.0) {
        return Err(GasError::InvalidInvariants {
            r: delta,
            s: 0.0,
        });
    }
    Ok(law.speed_of_sigma(0.5 * delta))
}

/// `dK/dδ = (−(n a/2)(δ/2)^{−n−1} + 1/2)/(n+1)`.
pub fn k_prime(law: &PressureLaw, delta: f64) -> Result<f64, GasError> {
    if !(delta > 0.0) {
        return Err(GasError::InvalidInvariants {
            r: delta,
            s: 0.0,
        });
    }
    let nf = law.n as f64;
    let half = 0.5 * delta;
    Ok((-0.5 * nf * law.a * half.powf(-nf - 1.0) + 0.5) / (nf + 1.0))
}

/// The coefficient identity that reduces the hodograph equation to the
/// ladder-solvable form: `(2K′ − 1)/(4K)` against `−n/(2δ)`. Returns both
/// sides; they agree to rounding for every admissible `δ`.
pub fn reduction_check(law: &PressureLaw, delta: f64) -> Result<(f64, f64), GasError> {
    let k = k_func(law, delta)?;
    if !(k > 0.0) {
        return Err(GasError::SoundSpeedCollapse { delta, k });
    }
    let kp = k_prime(law, delta)?;
    let lhs = (2.0 * kp - 1.0) / (4.0 * k);
    let rhs = -(law.n as f64) / (2.0 * delta);
    Ok((lhs, rhs))
}

/// Value and partials of the `n = 2` hodograph potential
/// `w = (T(r) + X(s))/δ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WDerivs {
    pub w: f64,
    pub w_r: f64,
    pub w_s: f64,
    pub w_rr: f64,
    pub w_rs: f64,
    pub w_ss: f64,
}

/// Closed-form derivatives of `w = (T(r) + X(s))/(r − s)`.
pub fn w_n2(
    t_profile: &ProfileFunction,
    x_profile: &ProfileFunction,
    state: &InvariantState,
) -> WDerivs {
    let (r, s) = (state.r(), state.s());
    let d = state.delta();
    let tv = t_profile.eval(r);
    let tp = t_profile.deriv(1, r);
    let tpp = t_profile.deriv(2, r);
    let xv = x_profile.eval(s);
    let xp = x_profile.deriv(1, s);
    let xpp = x_profile.deriv(2, s);
    let sum = tv + xv;
    let (d2, d3) = (d * d, d * d * d);
    WDerivs {
        w: sum / d,
        w_r: tp / d - sum / d2,
        w_s: xp / d + sum / d2,
        w_rr: tpp / d - 2.0 * tp / d2 + 2.0 * sum / d3,
        w_rs: (tp - xp) / d2 - 2.0 * sum / d3,
        w_ss: xpp / d + 2.0 * xp / d2 + 2.0 * sum / d3,
    }
}

/// Implicit two-profile solution of the `n = 2` gas flow.
#[derive(Debug, Clone)]
pub struct ImplicitSolution {
    law: PressureLaw,
    t_profile: ProfileFunction,
    x_profile: ProfileFunction,
}

/// Scale below which the sound speed counts as collapsed.
fn k_floor(delta: f64) -> f64 {
    1e-12 * (1.0 + delta.abs())
}

impl ImplicitSolution {
    pub fn new(
        law: PressureLaw,
        t_profile: ProfileFunction,
        x_profile: ProfileFunction,
    ) -> Result<Self, GasError> {
        if law.n() != 2 {
            return Err(GasError::ClosedFormUnavailable { n: law.n() });
        }
        Ok(ImplicitSolution {
            law,
            t_profile,
            x_profile,
        })
    }

    pub fn law(&self) -> &PressureLaw {
        &self.law
    }

    pub fn w_derivs(&self, state: &InvariantState) -> WDerivs {
        w_n2(&self.t_profile, &self.x_profile, state)
    }

    /// Space-time point carried by an invariant state:
    /// `t = (w_s − w_r)/(2K)`, `x = (r+s)t/2 + Kt + w_r`.
    pub fn forward_map(&self, state: &InvariantState) -> Result<(f64, f64), GasError> {
        let delta = state.delta();
        let k = k_func(&self.law, delta)?;
        if !(k > k_floor(delta)) {
            return Err(GasError::SoundSpeedCollapse { delta, k });
        }
        let w = self.w_derivs(state);
        let t = (w.w_s - w.w_r) / (2.0 * k);
        let x = state.velocity() * t + k * t + w.w_r;
        Ok((x, t))
    }

    /// Residuals of the two implicit relations at a trial state.
    fn residual(&self, x: f64, t: f64, state: &InvariantState) -> Result<(f64, f64), GasError> {
        let delta = state.delta();
        let k = k_func(&self.law, delta)?;
        if !(k > k_floor(delta)) {
            return Err(GasError::SoundSpeedCollapse { delta, k });
        }
        let w = self.w_derivs(state);
        let common = x - state.velocity() * t;
        Ok((common - k * t - w.w_r, common + k * t - w.w_s))
    }

    /// Determinant of the Newton Jacobian at a trial state: zero exactly on
    /// the fold of the hodograph map, where characteristics cross. A sign
    /// change of this quantity along a curve of states brackets the
    /// gradient catastrophe.
    pub fn jacobian_det(&self, state: &InvariantState, t: f64) -> Result<f64, GasError> {
        let k_p = k_prime(&self.law, state.delta())?;
        let w = self.w_derivs(state);
        let j11 = -0.5 * t - k_p * t - w.w_rr;
        let j12 = -0.5 * t + k_p * t - w.w_rs;
        let j22 = -0.5 * t - k_p * t - w.w_ss;
        Ok(j11 * j22 - j12 * j12)
    }

    /// Solves the implicit relations for `(r, s)` at a space-time point by a
    /// damped Newton iteration from `guess`. A nearly singular Jacobian is
    /// reported as [`GasError::CharacteristicsCross`] — the gradient
    /// catastrophe where the hodograph description folds.
    pub fn invert_newton(
        &self,
        x: f64,
        t: f64,
        guess: &InvariantState,
    ) -> Result<InvariantState, GasError> {
        const MAX_ITERS: usize = 50;
        const MAX_HALVINGS: usize = 30;
        let tol = 1e-12 * (1.0 + x.abs() + t.abs());

        let mut state = *guess;
        let (mut f1, mut f2) = self.residual(x, t, &state)?;
        for _ in 0..MAX_ITERS {
            let resid = f1.abs().max(f2.abs());
            if resid <= tol {
                return Ok(state);
            }

            let delta = state.delta();
            let k_p = k_prime(&self.law, delta)?;
            let w = self.w_derivs(&state);
            let j11 = -0.5 * t - k_p * t - w.w_rr;
            let j12 = -0.5 * t + k_p * t - w.w_rs;
            let j21 = -0.5 * t + k_p * t - w.w_rs;
            let j22 = -0.5 * t - k_p * t - w.w_ss;
            let det = j11 * j22 - j12 * j21;
            let norm = j11.abs().max(j12.abs()).max(j21.abs()).max(j22.abs());
            if det.abs() < 1e-12 * (1.0 + norm * norm) {
                return Err(GasError::CharacteristicsCross { x, t, det });
            }
            let dr = (f1 * j22 - f2 * j12) / det;
            let ds = (j11 * f2 - j21 * f1) / det;

            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let cand_r = state.r() - lambda * dr;
                let cand_s = state.s() - lambda * ds;
                if let Ok(cand) = InvariantState::new(cand_r, cand_s) {
                    if let Ok((g1, g2)) = self.residual(x, t, &cand) {
                        if g1.abs().max(g2.abs()) < resid {
                            state = cand;
                            f1 = g1;
                            f2 = g2;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(GasError::NewtonStalled { x, t, resid });
            }
        }
        let resid = f1.abs().max(f2.abs());
        if resid <= tol {
            Ok(state)
        } else {
            Err(GasError::NewtonStalled { x, t, resid })
        }
    }
}

/// One recovered space-time sample of the flow.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GasPoint {
    pub x: f64,
    pub t: f64,
    pub r: f64,
    pub s: f64,
    pub u: f64,
    pub rho: f64,
    pub p: f64,
}

/// Field values on a space-time window; `None` marks points where the
/// inversion failed (typically past characteristic crossing).
#[derive(Debug, Clone, serde::Serialize)]
pub struct FieldSweep {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// Row-major: `points[ti][xi]`.
    pub points: Vec<Vec<Option<GasPoint>>>,
    pub failures: usize,
}

/// Inverts the implicit solution over a space-time window. Rows march in
/// time; within a row the previous point (or the point below) seeds the next
/// Newton run, so only the very first inversion relies on `guess`.
pub fn field_sweep(
    solution: &ImplicitSolution,
    xs: &[f64],
    ts: &[f64],
    guess: &InvariantState,
) -> FieldSweep {
    let mut points: Vec<Vec<Option<GasPoint>>> = Vec::with_capacity(ts.len());
    let mut failures = 0usize;
    for (ti, &t) in ts.iter().enumerate() {
        let mut row: Vec<Option<GasPoint>> = Vec::with_capacity(xs.len());
        for (xi, &x) in xs.iter().enumerate() {
            let seed = row
                .get(xi.wrapping_sub(1))
                .copied()
                .flatten()
                .or_else(|| {
                    ti.checked_sub(1)
                        .and_then(|prev| points[prev][xi])
                })
                .and_then(|p| InvariantState::new(p.r, p.s).ok())
                .unwrap_or(*guess);
            match solution.invert_newton(x, t, &seed) {
                Ok(state) => {
                    let rho = rho_of_state(solution.law(), &state);
                    let p = solution.law().pressure(rho).unwrap_or(f64::NAN);
                    row.push(Some(GasPoint {
                        x,
                        t,
                        r: state.r(),
                        s: state.s(),
                        u: state.velocity(),
                        rho,
                        p,
                    }));
                }
                Err(_) => {
                    failures += 1;
                    row.push(None);
                }
            }
        }
        points.push(row);
    }
    FieldSweep {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        points,
        failures,
    }
}

/// Configuration of the conservation-form reference solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EulerConfig {
    pub x: Interval,
    pub n_points: usize,
    /// Courant number; 0.45 is the shipped default.
    pub cfl: f64,
    pub t_final: f64,
}

impl EulerConfig {
    pub fn new(x: Interval, n_points: usize, t_final: f64) -> Self {
        EulerConfig {
            x,
            n_points,
            cfl: 0.45,
            t_final,
        }
    }
}

/// Final state of a reference run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EulerRun {
    pub xs: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub n_steps: usize,
    pub t_final: f64,
}

/// Integrates `ρ_t + (ρu)_x = 0`, `(ρu)_t + (ρu² + p)_x = 0` by the
/// Lax–Friedrichs scheme with outflow (copy) boundaries. Initial data comes
/// from `init(x) = (ρ, u)`. Constant data is preserved exactly; fields are
/// trustworthy only inside the domain of determinacy of the interior.
pub fn euler_reference_solve<F>(
    law: &PressureLaw,
    init: F,
    config: &EulerConfig,
) -> Result<EulerRun, GasError>
where
    F: Fn(f64) -> (f64, f64),
{
    const MAX_STEPS: usize = 1_000_000;
    if config.n_points < 3 {
        return Err(GasError::TooFewPoints {
            need: 3,
            got: config.n_points,
        });
    }
    let xs = config.x.uniform_samples(config.n_points);
    let n = xs.len();
    let dx = config.x.length() / (n - 1) as f64;

    let mut rho = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for &x in &xs {
        let (r0, u0) = init(x);
        law.sound_speed(r0)
            .map_err(|_| GasError::VacuumReached { x, t: 0.0, rho: r0 })?;
        rho.push(r0);
        m.push(r0 * u0);
    }

    let mut t = 0.0f64;
    let mut steps = 0usize;
    let mut rho_new = vec![0.0f64; n];
    let mut m_new = vec![0.0f64; n];
    while t < config.t_final {
        let mut speed = 0.0f64;
        for i in 0..n {
            let z = law
                .sound_speed(rho[i])
                .map_err(|_| GasError::VacuumReached { x: xs[i], t, rho: rho[i] })?;
            speed = speed.max((m[i] / rho[i]).abs() + z);
        }
        let mut dt = config.cfl * dx / speed;
        if t + dt >= config.t_final {
            dt = config.t_final - t;
        }
        let lam = 0.5 * dt / dx;

        let flux = |i: usize| -> Result<(f64, f64), GasError> {
            let p = law.pressure(rho[i])?;
            Ok((m[i], m[i] * m[i] / rho[i] + p))
        };
        for i in 1..n - 1 {
            let (fl_r, fl_m) = flux(i - 1)?;
            let (fr_r, fr_m) = flux(i + 1)?;
            rho_new[i] = 0.5 * (rho[i - 1] + rho[i + 1]) - lam * (fr_r - fl_r);
            m_new[i] = 0.5 * (m[i - 1] + m[i + 1]) - lam * (fr_m - fl_m);
        }
        rho_new[0] = rho_new[1];
        m_new[0] = m_new[1];
        rho_new[n - 1] = rho_new[n - 2];
        m_new[n - 1] = m_new[n - 2];

        for i in 0..n {
            if !rho_new[i].is_finite() || !m_new[i].is_finite() {
                return Err(GasError::ReferenceUnstable { t });
            }
            if rho_new[i] <= law.a().max(0.0) {
                return Err(GasError::VacuumReached {
                    x: xs[i],
                    t,
                    rho: rho_new[i],
                });
            }
        }
        std::mem::swap(&mut rho, &mut rho_new);
        std::mem::swap(&mut m, &mut m_new);
        t += dt;
        steps += 1;
        if steps > MAX_STEPS {
            return Err(GasError::StepBudgetExceeded {
                max_steps: MAX_STEPS,
                t_final: config.t_final,
            });
        }
    }

    let u = rho.iter().zip(m.iter()).map(|(&r, &mm)| mm / r).collect();
    Ok(EulerRun {
        xs,
        rho,
        u,
        n_steps: steps,
        t_final: config.t_final,
    })
}
