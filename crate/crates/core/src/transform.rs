//! Darboux-type transformations between equations `u_tt = u_xx + G(x) u_x`.
//!
//! One step is built from a pair of auxiliary functions `(h, r)` on the
//! source equation's domain:
//!
//! ```text
//! h″ + G h′ + A h = 0                      (eigenfunction equation)
//! r″ + G r′ + (G′ + 2(ln h)″) r = 0        (transformation equation)
//! ```
//!
//! The map `v = (u_x − (ln h)′ u)/r` then carries solutions of the source
//! equation to solutions of the target equation with coefficient
//! `G₁ = G + 2 r′/r`. Every constructed step is validated numerically: both
//! ODE residuals are checked on a Chebyshev sample of the domain before the
//! step can be applied, so a bad `(h, r)` pair is rejected at construction
//! time rather than silently producing a non-solution.

use crate::domain::{DomainError, Interval};
use crate::expr::{Expr1D, ExprError};
use crate::template::SolutionTemplate;

/// Relative tolerance for the ODE residuals a step must satisfy.
pub const ODE_RESIDUAL_RTOL: f64 = 1e-8;
/// Pointwise tolerance for coefficient agreement between chained steps.
pub const COEFF_MATCH_TOL: f64 = 1e-10;
/// Sample count for all sampled validation checks.
pub const VALIDATION_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("coefficient not evaluable on the working domain: {0}")]
    BadCoefficient(ExprError),
    #[error("{which} fails its ODE: max relative residual {max_rel:.3e} at x = {at} (tolerance {tol:.0e})")]
    OdeResidual {
        which: &'static str,
        max_rel: f64,
        at: f64,
        tol: f64,
    },
    #[error("{which} vanishes near x = {x} (|value| = {value:.3e})")]
    NearZero {
        which: &'static str,
        x: f64,
        value: f64,
    },
    #[error("coefficient mismatch at x = {x}: {got} vs expected {want} (tolerance {tol:.0e})")]
    CoefficientMismatch {
        x: f64,
        got: f64,
        want: f64,
        tol: f64,
    },
    #[error("Wronskian seeds {i} and {j} share the eigenvalue {value}; eigenvalues must be pairwise distinct")]
    EigenvaluesNotDistinct { i: usize, j: usize, value: f64 },
    #[error("Wronskian transform supports 1 to 3 seed functions, got {n}")]
    SeedCountUnsupported { n: usize },
    #[error("point x = {x} is outside the solution's domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("evaluation failed: {0}")]
    Eval(#[from] ExprError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A wave equation `u_tt = u_xx + G(x) u_x` together with its working
/// domain and the chain of transformation steps that produced it.
#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub coeff: Expr1D,
    pub domain: Interval,
    pub provenance: Vec<String>,
}

impl EquationSpec {
    /// Validates that the coefficient is evaluable across the domain.
    pub fn new(coeff: Expr1D, domain: Interval) -> Result<Self, TransformError> {
        for x in domain.chebyshev_samples(VALIDATION_SAMPLES) {
            coeff.eval(x).map_err(TransformError::BadCoefficient)?;
        }
        Ok(EquationSpec {
            coeff,
            domain,
            provenance: Vec::new(),
        })
    }

    /// The constant-coefficient wave equation, `G = 0`.
    pub fn wave(domain: Interval) -> Self {
        EquationSpec {
            coeff: Expr1D::zero(),
            domain,
            provenance: Vec::new(),
        }
    }

    fn samples(&self) -> Vec<f64> {
        self.domain.chebyshev_samples(VALIDATION_SAMPLES)
    }
}

/// Max relative residual of `f″ + G f′ + q f` over `samples`, with its
/// location. Normalized per point by the largest term magnitude, so the
/// check is scale-free.
fn ode2_residual(
    g: &Expr1D,
    q: &Expr1D,
    f: &Expr1D,
    samples: &[f64],
) -> Result<(f64, f64), ExprError> {
    let f1 = f.diff();
    let f2 = f1.diff();
    let mut worst = (0.0, samples[0]);
    for &x in samples {
        let t1 = f2.eval(x)?;
        let t2 = g.eval(x)? * f1.eval(x)?;
        let t3 = q.eval(x)? * f.eval(x)?;
        let rel = (t1 + t2 + t3).abs() / (t1.abs().max(t2.abs()).max(t3.abs()) + 1e-30);
        if rel > worst.0 {
            worst = (rel, x);
        }
    }
    Ok(worst)
}

fn check_ode(
    which: &'static str,
    g: &Expr1D,
    q: &Expr1D,
    f: &Expr1D,
    samples: &[f64],
) -> Result<(), TransformError> {
    let (max_rel, at) = ode2_residual(g, q, f, samples)?;
    if max_rel > ODE_RESIDUAL_RTOL {
        return Err(TransformError::OdeResidual {
            which,
            max_rel,
            at,
            tol: ODE_RESIDUAL_RTOL,
        });
    }
    Ok(())
}

/// Sampled nonvanishing check: rejects a sign change between neighbouring
/// samples (a zero crossing) and values negligible against the sampled
/// maximum. A tangential zero squeezed between sample points can still
/// slip through; working domains are chosen to keep zeros well away.
fn check_nonvanishing(
    which: &'static str,
    e: &Expr1D,
    samples: &[f64],
) -> Result<(), TransformError> {
    let mut max_abs = 0.0f64;
    let mut min_abs = f64::INFINITY;
    let mut min_at = samples[0];
    let mut prev: Option<(f64, f64)> = None;
    for &x in samples {
        let v = e.eval(x)?;
        let mag = v.abs();
        max_abs = max_abs.max(mag);
        if mag < min_abs {
            min_abs = mag;
            min_at = x;
        }
        if let Some((px, pv)) = prev {
            if pv * v < 0.0 {
                return Err(TransformError::NearZero {
                    which,
                    x: 0.5 * (px + x),
                    value: min_abs,
                });
            }
        }
        prev = Some((x, v));
    }
    if min_abs <= 1e-9 * (max_abs + 1e-300) {
        return Err(TransformError::NearZero {
            which,
            x: min_at,
            value: min_abs,
        });
    }
    Ok(())
}

/// Pointwise agreement of two expressions on a domain, tolerance relative
/// to `1 + max(|a|,|b|)` per point.
pub fn exprs_match(
    a: &Expr1D,
    b: &Expr1D,
    domain: &Interval,
    tol: f64,
) -> Result<(), TransformError> {
    for x in domain.chebyshev_samples(VALIDATION_SAMPLES) {
        let va = a.eval(x)?;
        let vb = b.eval(x)?;
        if (va - vb).abs() > tol * (1.0 + va.abs().max(vb.abs())) {
            return Err(TransformError::CoefficientMismatch {
                x,
                got: va,
                want: vb,
                tol,
            });
        }
    }
    Ok(())
}

/// `G₁ = G + 2 r′/r`, after checking `r` does not vanish on the domain.
pub fn g1_from_r(g: &Expr1D, r: &Expr1D, domain: &Interval) -> Result<Expr1D, TransformError> {
    check_nonvanishing("r", r, &domain.chebyshev_samples(VALIDATION_SAMPLES))?;
    Ok(g.clone() + Expr1D::constant(2.0) * r.diff() / r.clone())
}

/// Logarithmic derivative `r = h′/h`. If `h` solves the eigenfunction
/// equation, this `r` solves the transformation equation.
pub fn r_from_h(h: &Expr1D) -> Expr1D {
    h.diff() / h.clone()
}

/// Structural power-law recognizer for coefficients of the form `n/x`
/// (the zero coefficient counts as `n = 0`).
fn power_law_exponent(g: &Expr1D) -> Option<f64> {
    if g.is_zero() {
        return Some(0.0);
    }
    g.as_const_over_var()
}

/// The `A = 0` eigenfunction `h = c₁ + c₂ ∫ exp(−∫G)`.
///
/// For `G = n/x` (n ≠ 1) the quadratures collapse to
/// `h = c₁ + c₂ x^{1−n}/(1−n)`; otherwise the antiderivatives are kept as
/// quadrature nodes anchored at `base`. Shifting `base` only reparametrizes
/// `(c₁, c₂)`, so any anchor inside the working domain yields the same
/// two-parameter family.
pub fn h_quadrature(g: &Expr1D, c1: f64, c2: f64, base: f64) -> Expr1D {
    if let Some(n) = power_law_exponent(g) {
        if n != 1.0 {
            return Expr1D::constant(c1)
                + Expr1D::constant(c2 / (1.0 - n)) * Expr1D::pow(Expr1D::var(), 1.0 - n);
        }
    }
    let inner = Expr1D::antideriv(g.clone(), base);
    Expr1D::constant(c1) + Expr1D::constant(c2) * Expr1D::antideriv(Expr1D::exp(-inner), base)
}

/// Solution of the first-order reduction `r′ + G r = c₁`:
/// `r = e^{−∫G}(c₂ + c₁∫e^{∫G})`.
///
/// For `G = n/x` (n ≠ −1) this is normalized to the closed form
/// `r = c₁ x^{−n} + c₂ x`; for generic `G` the quadratures are kept as
/// nodes anchored at `base`.
pub fn r_reduction(g: &Expr1D, c1: f64, c2: f64, base: f64) -> Expr1D {
    if let Some(n) = power_law_exponent(g) {
        if n != -1.0 {
            return Expr1D::constant(c1) * Expr1D::pow(Expr1D::var(), -n)
                + Expr1D::constant(c2) * Expr1D::var();
        }
    }
    let inner = Expr1D::antideriv(g.clone(), base);
    Expr1D::exp(-inner.clone())
        * (Expr1D::constant(c2)
            + Expr1D::constant(c1) * Expr1D::antideriv(Expr1D::exp(inner), base))
}

/// One validated transformation step.
#[derive(Debug, Clone)]
pub struct TransformStep {
    source: EquationSpec,
    h: Expr1D,
    r: Expr1D,
    a: f64,
    g1: Expr1D,
}

impl TransformStep {
    /// Builds a step after verifying both defining ODEs on the domain.
    pub fn new(
        source: &EquationSpec,
        h: Expr1D,
        r: Expr1D,
        a: f64,
    ) -> Result<Self, TransformError> {
        let samples = source.samples();
        let g = &source.coeff;

        check_ode("h (eigenfunction)", g, &Expr1D::constant(a), &h, &samples)?;
        check_nonvanishing("h", &h, &samples)?;
        check_nonvanishing("r", &r, &samples)?;

        // (ln h)″ without a logarithm node, valid for h of either sign.
        let h1 = h.diff();
        let lnh_pp = (h1.diff() * h.clone() - h1.clone() * h1.clone())
            / Expr1D::pow(h.clone(), 2.0);
        let q = g.diff() + Expr1D::constant(2.0) * lnh_pp;
        check_ode("r (transformation)", g, &q, &r, &samples)?;

        let g1 = g.clone() + Expr1D::constant(2.0) * r.diff() / r.clone();
        // The target coefficient must itself be evaluable everywhere.
        for &x in &samples {
            g1.eval(x).map_err(TransformError::BadCoefficient)?;
        }

        Ok(TransformStep {
            source: source.clone(),
            h,
            r,
            a,
            g1,
        })
    }

    pub fn source(&self) -> &EquationSpec {
        &self.source
    }

    pub fn h(&self) -> &Expr1D {
        &self.h
    }

    pub fn r(&self) -> &Expr1D {
        &self.r
    }

    pub fn eigenvalue(&self) -> f64 {
        self.a
    }

    pub fn g1(&self) -> &Expr1D {
        &self.g1
    }

    /// The target equation, with this step appended to the provenance.
    pub fn target_equation(&self) -> EquationSpec {
        let mut provenance = self.source.provenance.clone();
        provenance.push(format!("transform step (A = {})", self.a));
        EquationSpec {
            coeff: self.g1.clone(),
            domain: self.source.domain,
            provenance,
        }
    }

    /// `v = (u_x − (ln h)′ u)/r` as template algebra.
    pub fn apply(&self, u: &SolutionTemplate) -> SolutionTemplate {
        let lhp = self.h.diff() / self.h.clone();
        let inv_r = Expr1D::one() / self.r.clone();
        u.diff_x().sub(&u.scale(&lhp)).scale(&inv_r)
    }
}

/// Applies one step: returns the target equation and the transformed template.
pub fn step_apply(
    step: &TransformStep,
    u: &SolutionTemplate,
) -> (EquationSpec, SolutionTemplate) {
    (step.target_equation(), step.apply(u))
}

/// Declarative recipe for one chain step.
#[derive(Debug, Clone)]
pub enum StepRecipe {
    /// `h = 1`, `r` from the first-order reduction of the current coefficient.
    Reduction { c1: f64, c2: f64 },
    /// `h` from the A = 0 quadrature of the current coefficient, `r = h′/h`.
    Quadrature { c1: f64, c2: f64 },
    /// Explicit eigenfunction for a declared source coefficient; the declared
    /// coefficient must match the chain's current coefficient pointwise.
    WithH { source: Expr1D, h: Expr1D, a: f64 },
}

/// Composes a sequence of validated steps, threading the template through.
/// An empty recipe list is the identity.
pub fn chain_build(
    start: &EquationSpec,
    template: &SolutionTemplate,
    recipes: &[StepRecipe],
) -> Result<(EquationSpec, SolutionTemplate), TransformError> {
    let mut eq = start.clone();
    let mut u = template.clone();
    for recipe in recipes {
        let base = eq.domain.lo;
        let (step, label) = match recipe {
            StepRecipe::Reduction { c1, c2 } => {
                let r = r_reduction(&eq.coeff, *c1, *c2, base);
                (
                    TransformStep::new(&eq, Expr1D::one(), r, 0.0)?,
                    format!("reduction(c1 = {c1}, c2 = {c2})"),
                )
            }
            StepRecipe::Quadrature { c1, c2 } => {
                let h = h_quadrature(&eq.coeff, *c1, *c2, base);
                let r = r_from_h(&h);
                (
                    TransformStep::new(&eq, h, r, 0.0)?,
                    format!("quadrature(c1 = {c1}, c2 = {c2})"),
                )
            }
            StepRecipe::WithH { source, h, a } => {
                exprs_match(source, &eq.coeff, &eq.domain, COEFF_MATCH_TOL)?;
                let r = r_from_h(h);
                (
                    TransformStep::new(&eq, h.clone(), r, *a)?,
                    format!("explicit eigenfunction h (A = {a})"),
                )
            }
        };
        u = step.apply(&u);
        eq = step.target_equation();
        *eq.provenance.last_mut().expect("step just pushed") = label;
    }
    Ok((eq, u))
}

/// Rescales a template so its highest-order coefficient equals 1 at `x_ref`.
/// Transforms are defined up to constant multiples; comparisons need a
/// canonical scale.
pub fn normalize_leading(
    t: &SolutionTemplate,
    x_ref: f64,
) -> Result<SolutionTemplate, TransformError> {
    let order = t.max_order();
    let lead = t
        .plus_terms()
        .chain(t.minus_terms())
        .find(|&(k, _)| k == order)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Expr1D::zero);
    let v = lead.eval(x_ref)?;
    if v.abs() < 1e-300 {
        return Err(TransformError::NearZero {
            which: "leading coefficient",
            x: x_ref,
            value: v.abs(),
        });
    }
    Ok(t.scale(&Expr1D::constant(1.0 / v)))
}

/// Symbolic determinant of a small matrix of expressions (size ≤ 3).
fn det(m: &[Vec<Expr1D>]) -> Expr1D {
    match m.len() {
        1 => m[0][0].clone(),
        2 => m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone(),
        3 => {
            let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
                m[r0][c0].clone() * m[r1][c1].clone() - m[r0][c1].clone() * m[r1][c0].clone()
            };
            m[0][0].clone() * minor(1, 2, 1, 2) - m[0][1].clone() * minor(1, 2, 0, 2)
                + m[0][2].clone() * minor(1, 2, 0, 1)
        }
        n => unreachable!("determinant size {n} is outside the supported cap"),
    }
}

/// Wronskian-quotient transform from `n` eigenfunction seeds
/// `(h_i, A_i)` with pairwise distinct eigenvalues:
///
/// ```text
/// z = W(h₁, …, h_n, u) / W(h₁′, …, h_n′)
/// ```
///
/// Laplace expansion along the `u` column turns the numerator into template
/// algebra: `z = Σ_k (−1)^{k+n} (M_k / M₀) ∂ₓᵏ u`, with `M_k` the minor
/// omitting derivative row `k`. The target coefficient is
/// `G + 2 d/dx ln(W(h′)/W(h))`, computed through logarithmic derivatives so
/// sign changes of the Wronskians are harmless. For a single seed this
/// reduces exactly to the `(h, r = h′/h)` step.
pub fn wronskian_transform(
    eq: &EquationSpec,
    seeds: &[(Expr1D, f64)],
    template: &SolutionTemplate,
) -> Result<(EquationSpec, SolutionTemplate), TransformError> {
    let n = seeds.len();
    if n == 0 || n > 3 {
        return Err(TransformError::SeedCountUnsupported { n });
    }
    let max_a = seeds.iter().map(|(_, a)| a.abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in (i + 1)..n {
            if (seeds[i].1 - seeds[j].1).abs() <= 1e-9 * (1.0 + max_a) {
                return Err(TransformError::EigenvaluesNotDistinct {
                    i,
                    j,
                    value: seeds[i].1,
                });
            }
        }
    }
    let samples = eq.samples();
    for (h, a) in seeds {
        check_ode(
            "Wronskian seed",
            &eq.coeff,
            &Expr1D::constant(*a),
            h,
            &samples,
        )?;
    }

    // derivs[i][j] = h_i^{(j)}, j = 0..=n
    let derivs: Vec<Vec<Expr1D>> = seeds
        .iter()
        .map(|(h, _)| (0..=n).map(|j| h.diff_n(j)).collect())
        .collect();
    // Minor omitting derivative order k: rows are the remaining orders,
    // columns the seed functions.
    let minor = |k: usize| -> Expr1D {
        let rows: Vec<Vec<Expr1D>> = (0..=n)
            .filter(|&j| j != k)
            .map(|j| (0..n).map(|i| derivs[i][j].clone()).collect())
            .collect();
        det(&rows)
    };

    let m0 = minor(0); // = W(h₁′, …, h_n′)
    let w_plain = {
        let rows: Vec<Vec<Expr1D>> = (0..n)
            .map(|j| (0..n).map(|i| derivs[i][j].clone()).collect())
            .collect();
        det(&rows)
    };
    check_nonvanishing("W(h′)", &m0, &samples)?;
    check_nonvanishing("W(h)", &w_plain, &samples)?;

    let g_new = eq.coeff.clone()
        + Expr1D::constant(2.0)
            * (m0.diff() / m0.clone() - w_plain.diff() / w_plain.clone());

    let sign = |k: usize| if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
    // k = 0 term: M₀/M₀ ≡ 1 on the (checked) nonvanishing domain.
    let mut z = template.scale(&Expr1D::constant(sign(0)));
    let mut dku = template.clone();
    for k in 1..=n {
        dku = dku.diff_x();
        let coeff = Expr1D::constant(sign(k)) * minor(k) / m0.clone();
        z = z.add(&dku.scale(&coeff));
    }

    let mut provenance = eq.provenance.clone();
    provenance.push(format!("wronskian transform ({n} seeds)"));
    let target = EquationSpec {
        coeff: g_new,
        domain: eq.domain,
        provenance,
    };
    for x in &samples {
        target
            .coeff
            .eval(*x)
            .map_err(TransformError::BadCoefficient)?;
    }
    Ok((target, z))
}

/// Dense-output numerical solution of `h″ + G h′ + A h = 0`, used as an
/// independent cross-check of closed-form eigenfunctions.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    domain: Interval,
    dx: f64,
    h: Vec<f64>,
    hp: Vec<f64>,
    g: Expr1D,
    a: f64,
}

/// Integrates the eigenfunction equation with a classical fixed-step RK4
/// from `domain.lo`, with Hermite dense output.
pub fn h_ode_solve(
    g: &Expr1D,
    a: f64,
    init: (f64, f64),
    domain: Interval,
    n_steps: usize,
) -> Result<OdeSolution, TransformError> {
    assert!(n_steps >= 2);
    let dx = domain.length() / n_steps as f64;
    let mut h = Vec::with_capacity(n_steps + 1);
    let mut hp = Vec::with_capacity(n_steps + 1);
    let (mut y, mut yp) = init;
    h.push(y);
    hp.push(yp);
    let rhs = |x: f64, y: f64, yp: f64| -> Result<(f64, f64), ExprError> {
        Ok((yp, -g.eval(x)? * yp - a * y))
    };
    for i in 0..n_steps {
        let x = domain.lo + i as f64 * dx;
        let (k1, l1) = rhs(x, y, yp)?;
        let (k2, l2) = rhs(x + 0.5 * dx, y + 0.5 * dx * k1, yp + 0.5 * dx * l1)?;
        let (k3, l3) = rhs(x + 0.5 * dx, y + 0.5 * dx * k2, yp + 0.5 * dx * l2)?;
        let (k4, l4) = rhs(x + dx, y + dx * k3, yp + dx * l3)?;
        y += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        yp += dx / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        if !(y.is_finite() && yp.is_finite()) {
            return Err(TransformError::Eval(ExprError::NonFinite { x: x + dx }));
        }
        h.push(y);
        hp.push(yp);
    }
    Ok(OdeSolution {
        domain,
        dx,
        h,
        hp,
        g: g.clone(),
        a,
    })
}

impl OdeSolution {
    fn segment(&self, x: f64) -> Result<(usize, f64), TransformError> {
        if !self.domain.contains(x) {
            return Err(TransformError::OutsideDomain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        let i = (((x - self.domain.lo) / self.dx) as usize).min(self.h.len() - 2);
        let t = (x - (self.domain.lo + i as f64 * self.dx)) / self.dx;
        Ok((i, t))
    }

    fn hermite(t: f64, dx: f64, p0: f64, m0: f64, p1: f64, m1: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * dx * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * dx * m1
    }

    pub fn eval(&self, x: f64) -> Result<f64, TransformError> {
        let (i, t) = self.segment(x)?;
        Ok(Self::hermite(
            t,
            self.dx,
            self.h[i],
            self.hp[i],
            self.h[i + 1],
            self.hp[i + 1],
        ))
    }

    pub fn eval_deriv(&self, x: f64) -> Result<f64, TransformError> {
        let (i, t) = self.segment(x)?;
        // Second derivatives at the nodes come from the ODE itself.
        let hpp = |j: usize| -> Result<f64, ExprError> {
            let xj = self.domain.lo + j as f64 * self.dx;
            Ok(-self.g.eval(xj)? * self.hp[j] - self.a * self.h[j])
        };
        Ok(Self::hermite(
            t,
            self.dx,
            self.hp[i],
            hpp(i)?,
            self.hp[i + 1],
            hpp(i + 1)?,
        ))
    }

    /// `h″` recovered from the ODE at interpolated `(h, h′)`.
    pub fn eval_deriv2(&self, x: f64) -> Result<f64, TransformError> {
        Ok(-self.g.eval(x)? * self.eval_deriv(x)? - self.a * self.eval(x)?)
    }
}
