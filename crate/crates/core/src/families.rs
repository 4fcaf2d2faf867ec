//! Named equation/solution families and the change of variables to
//! inhomogeneous acoustics.
//!
//! Two wave-equation families ship with closed-form general solutions:
//!
//! * **EPD family** `u_tt = u_xx + (n/x) u_x`, even `n`: solutions are built
//!   by applying the ladder operator `(1/x)·d/dx` to the d'Alembert solution
//!   `n/2` times.
//! * **Family a** `u_tt = u_xx + ((n+2)x^{n+1} − a n)/(x^{n+2} + a x) · u_x`:
//!   one more transformation step `u → u_x / (a x^{−n} + x)` applied to the
//!   EPD solution. For `n ∈ {2, 4, 6}` the resulting templates are also
//!   hardcoded from the hand-expanded closed forms, which gives an
//!   independent transcription to test the machine-composed chain against.
//!
//! The substitution `y(x)` with `y″ + G y′ = 0` carries either family to an
//! acoustic equation `v_tt = f(y) v_yy` with an explicit sound-speed profile,
//! and the associated pressure laws connect the same family to isentropic gas
//! dynamics (see the gas-dynamics module).

use crate::domain::Interval;
use crate::expr::{Expr1D, ExprError};
use crate::profile::ProfileFunction;
use crate::template::{Jet2, JetEvaluator, SolutionTemplate};
use crate::transform::{
    exprs_match, EquationSpec, StepRecipe, TransformError, COEFF_MATCH_TOL,
};

const VALIDATION_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FamilyError {
    #[error("n must be a positive even integer, got {n}")]
    BadOrder { n: u32 },
    #[error("hardcoded templates exist for n in {{2, 4, 6}} only, got {n}")]
    UnsupportedOrder { n: u32 },
    #[error("the scale parameter c must be positive, got {c}")]
    BadScale { c: f64 },
    #[error("derivative orders above 2 are not provided, requested {order}")]
    OrderTooHigh { order: usize },
    #[error("y(x) is not strictly monotone on the domain (y' = {slope:.3e} at x = {x})")]
    NonMonotone { x: f64, slope: f64 },
    #[error("round trip x(y(x)) failed at x = {x}: got {got}")]
    RoundTrip { x: f64, got: f64 },
    #[error("speed consistency f(y(x)) = y'(x)^2 failed at x = {x}: {got} vs {want}")]
    SpeedMismatch { x: f64, got: f64, want: f64 },
    #[error("point y = {y} lies outside the acoustic domain [{lo}, {hi}]")]
    OutsideDomain { y: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] ExprError),
}

fn require_even(n: u32) -> Result<(), FamilyError> {
    if n == 0 || n % 2 != 0 {
        return Err(FamilyError::BadOrder { n });
    }
    Ok(())
}

/// The coefficient `n/x`.
pub fn coeff_n_over_x(n: u32) -> Expr1D {
    Expr1D::constant(n as f64) / Expr1D::var()
}

/// `u_tt = u_xx + (n/x) u_x` on the given domain.
pub fn epd_equation(n: u32, domain: Interval) -> Result<EquationSpec, TransformError> {
    EquationSpec::new(coeff_n_over_x(n), domain)
}

/// General solution of the EPD equation for even `n`: the ladder operator
/// `(1/x)·d/dx` applied `n/2` times to `u = T(t+x) + X(t−x)`.
pub fn epd_even_solution(n: u32) -> Result<SolutionTemplate, FamilyError> {
    require_even(n)?;
    let inv_x = Expr1D::one() / Expr1D::var();
    let mut t = SolutionTemplate::d_alembert();
    for _ in 0..n / 2 {
        t = t.diff_x().scale(&inv_x);
    }
    Ok(t)
}

/// The family-a coefficient `((n+2)x^{n+1} − a n) / (x^{n+2} + a x)`.
pub fn family_a_coefficient(n: u32, a: f64) -> Expr1D {
    let nf = n as f64;
    let x = Expr1D::var();
    (Expr1D::constant(nf + 2.0) * Expr1D::pow(x.clone(), nf + 1.0) - Expr1D::constant(nf * a))
        / (Expr1D::pow(x.clone(), nf + 2.0) + Expr1D::constant(a) * x)
}

/// `u_tt = u_xx + family_a_coefficient·u_x` on the given domain.
pub fn family_a_equation(n: u32, a: f64, domain: Interval) -> Result<EquationSpec, TransformError> {
    EquationSpec::new(family_a_coefficient(n, a), domain)
}

/// Hand-expanded solution templates of the family-a equation, `n ∈ {2,4,6}`.
///
/// With `d = x^{n+1} + a` the fields read (T-side, then X-side):
///
/// ```text
/// n=2:  (−T′ + x T″)/d                  (X′ + x X″)/d
/// n=4:  (3T′ − 3x T″ + x² T‴)/d         (−3X′ − 3x X″ − x² X‴)/d
/// n=6:  (−15T′ + 15x T″ − 6x² T‴ + x³ T⁗)/d
///                                       (15X′ + 15x X″ + 6x² X‴ + x³ X⁗)/d
/// ```
///
/// with arguments `t+x` for `T` and `t−x` for `X`. These transcriptions are
/// independent of the transformation code; agreement with the machine-built
/// chain is part of the test suite.
pub fn family_a_solution(n: u32, a: f64) -> Result<SolutionTemplate, FamilyError> {
    let d = Expr1D::pow(Expr1D::var(), (n + 1) as f64) + Expr1D::constant(a);
    let over = |num: Expr1D| num / d.clone();
    let x = Expr1D::var;
    let xp = |k: f64| Expr1D::pow(Expr1D::var(), k);
    let c = Expr1D::constant;
    let t = match n {
        2 => SolutionTemplate::from_terms(
            [(1, over(c(-1.0))), (2, over(x()))],
            [(1, over(c(1.0))), (2, over(x()))],
        ),
        4 => SolutionTemplate::from_terms(
            [
                (1, over(c(3.0))),
                (2, over(c(-3.0) * x())),
                (3, over(xp(2.0))),
            ],
            [
                (1, over(c(-3.0))),
                (2, over(c(-3.0) * x())),
                (3, over(c(-1.0) * xp(2.0))),
            ],
        ),
        6 => SolutionTemplate::from_terms(
            [
                (1, over(c(-15.0))),
                (2, over(c(15.0) * x())),
                (3, over(c(-6.0) * xp(2.0))),
                (4, over(xp(3.0))),
            ],
            [
                (1, over(c(15.0))),
                (2, over(c(15.0) * x())),
                (3, over(c(6.0) * xp(2.0))),
                (4, over(xp(3.0))),
            ],
        ),
        _ => return Err(FamilyError::UnsupportedOrder { n }),
    };
    Ok(t)
}

/// Builds the family-a solution by composing transformation steps:
/// the EPD ladder followed by `u → u_x / (a x^{−n} + x)`. The resulting
/// coefficient is verified pointwise against [`family_a_coefficient`].
pub fn family_a_from_chain(
    n: u32,
    a: f64,
    domain: Interval,
) -> Result<(EquationSpec, SolutionTemplate), FamilyError> {
    require_even(n)?;
    let eq = epd_equation(n, domain)?;
    let u = epd_even_solution(n)?;
    let (target, v) = crate::transform::chain_build(
        &eq,
        &u,
        &[StepRecipe::Reduction { c1: a, c2: 1.0 }],
    )?;
    exprs_match(
        &target.coeff,
        &family_a_coefficient(n, a),
        &domain,
        COEFF_MATCH_TOL,
    )?;
    Ok((target, v))
}

/// Which shipped family an equation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    EpdEven,
    FamilyA,
}

/// Parameters naming one concrete equation from the shipped families.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub n: u32,
    pub a: f64,
    /// Scale constant of the acoustic substitution for family a; fixed to 1
    /// everywhere else.
    pub c: f64,
}

impl FamilyDescriptor {
    pub fn epd(n: u32) -> Self {
        FamilyDescriptor {
            kind: FamilyKind::EpdEven,
            n,
            a: 0.0,
            c: 1.0,
        }
    }

    pub fn family_a(n: u32, a: f64) -> Self {
        FamilyDescriptor {
            kind: FamilyKind::FamilyA,
            n,
            a,
            c: 1.0,
        }
    }

    pub fn coefficient(&self) -> Expr1D {
        match self.kind {
            FamilyKind::EpdEven => coeff_n_over_x(self.n),
            FamilyKind::FamilyA => family_a_coefficient(self.n, self.a),
        }
    }

    pub fn equation(&self, domain: Interval) -> Result<EquationSpec, TransformError> {
        EquationSpec::new(self.coefficient(), domain)
    }

    pub fn solution(&self) -> Result<SolutionTemplate, FamilyError> {
        match self.kind {
            FamilyKind::EpdEven => epd_even_solution(self.n),
            FamilyKind::FamilyA => family_a_solution(self.n, self.a),
        }
    }

    /// A working x-interval clear of the family's singular loci
    /// (`x = 0`; for family a also the root of `x^{n+1} + a`) by a margin
    /// of at least 0.1.
    pub fn default_domain(&self) -> Interval {
        let lo = match self.kind {
            FamilyKind::EpdEven => 1.0,
            FamilyKind::FamilyA => {
                if self.a >= 0.0 {
                    1.0
                } else {
                    let root = (-self.a).powf(1.0 / (self.n as f64 + 1.0));
                    (root + 0.1).max(1.0)
                }
            }
        };
        Interval::new(lo, lo + 1.0).expect("lo + 1 > lo")
    }
}

/// An acoustic equation `v_tt = f(y) v_yy` obtained from a wave-equation
/// family by the substitution `y(x)` with `y″ + G y′ = 0`.
#[derive(Debug, Clone)]
pub struct AcousticsEquation {
    /// Sound-speed-squared profile, a closed form in `y`.
    pub f: Expr1D,
    pub y_domain: Interval,
    /// Inverse substitution `x(y)`.
    pub x_of_y: Expr1D,
    /// Forward substitution `y(x)`.
    pub y_of_x: Expr1D,
}

/// Builds the acoustic form of a family equation and validates the three
/// defining identities on the domain: `y` strictly monotone, `x(y(x)) = x`
/// to 1e-12, and `f(y(x)) = y′(x)²` to 1e-10 relative.
pub fn to_acoustics(
    eq: &EquationSpec,
    family: &FamilyDescriptor,
) -> Result<AcousticsEquation, FamilyError> {
    require_even(family.n)?;
    if family.c <= 0.0 {
        return Err(FamilyError::BadScale { c: family.c });
    }
    exprs_match(&eq.coeff, &family.coefficient(), &eq.domain, COEFF_MATCH_TOL)?;

    let nf = family.n as f64;
    let y = Expr1D::var;
    let x = Expr1D::var;
    let (y_of_x, x_of_y, f) = match family.kind {
        FamilyKind::EpdEven => {
            // y = x^{1−n}/(1−n) is negative and increasing for even n; the
            // coefficient is written with the positive base (1−n)·y so that
            // the fractional powers stay real.
            let y_of_x = Expr1D::constant(1.0 / (1.0 - nf)) * Expr1D::pow(x(), 1.0 - nf);
            let pos = Expr1D::constant(1.0 - nf) * y();
            let x_of_y = Expr1D::pow(pos.clone(), 1.0 / (1.0 - nf));
            let f = Expr1D::pow(pos, 2.0 * nf / (nf - 1.0));
            (y_of_x, x_of_y, f)
        }
        FamilyKind::FamilyA => {
            let (a, c) = (family.a, family.c);
            let y_of_x = Expr1D::constant(c)
                / (Expr1D::pow(x(), nf + 1.0) + Expr1D::constant(a));
            let c_minus_ay = Expr1D::constant(c) - Expr1D::constant(a) * y();
            let x_of_y = Expr1D::pow(c_minus_ay.clone() / y(), 1.0 / (nf + 1.0));
            let f = Expr1D::constant(((nf + 1.0) / c).powi(2))
                * Expr1D::pow(y(), (2.0 * nf + 4.0) / (nf + 1.0))
                * Expr1D::pow(c_minus_ay, 2.0 * nf / (nf + 1.0));
            (y_of_x, x_of_y, f)
        }
    };

    let y_lo = y_of_x.eval(eq.domain.lo)?;
    let y_hi = y_of_x.eval(eq.domain.hi)?;
    let y_domain = Interval::new(y_lo.min(y_hi), y_lo.max(y_hi))
        .map_err(TransformError::Domain)?;

    let yp = y_of_x.diff();
    let samples = eq.domain.chebyshev_samples(VALIDATION_SAMPLES);
    let mut slope_sign = 0.0f64;
    for &xs in &samples {
        let slope = yp.eval(xs)?;
        if slope == 0.0 || (slope_sign != 0.0 && slope.signum() != slope_sign) {
            return Err(FamilyError::NonMonotone { x: xs, slope });
        }
        slope_sign = slope.signum();

        let back = x_of_y.eval(y_of_x.eval(xs)?)?;
        if (back - xs).abs() > 1e-12 * (1.0 + xs.abs()) {
            return Err(FamilyError::RoundTrip { x: xs, got: back });
        }

        let want = slope * slope;
        let got = f.eval(y_of_x.eval(xs)?)?;
        if (got - want).abs() > 1e-10 * (1.0 + want.abs()) {
            return Err(FamilyError::SpeedMismatch { x: xs, got, want });
        }
    }

    Ok(AcousticsEquation {
        f,
        y_domain,
        x_of_y,
        y_of_x,
    })
}

/// A wave-equation solution template carried into acoustic variables,
/// with the derivative machinery cached for repeated jet evaluation.
pub struct AcousticsSolution {
    equation: AcousticsEquation,
    evaluator: JetEvaluator,
    y_prime: Expr1D,
    y_second: Expr1D,
}

impl AcousticsSolution {
    pub fn new(equation: AcousticsEquation, template: &SolutionTemplate) -> Self {
        let y_prime = equation.y_of_x.diff();
        let y_second = y_prime.diff();
        AcousticsSolution {
            evaluator: JetEvaluator::new(template),
            y_prime,
            y_second,
            equation,
        }
    }

    pub fn equation(&self) -> &AcousticsEquation {
        &self.equation
    }

    /// Second-order jet of `v(t, y) = u(t, x(y))` by the chain rule:
    /// `v_y = u_x/y′`, `v_yy = (u_xx − v_y·y″)/(y′)²`, evaluated at `x(y)`.
    pub fn jet(
        &self,
        t: f64,
        y: f64,
        t_profile: &ProfileFunction,
        x_profile: &ProfileFunction,
    ) -> Result<Jet2, FamilyError> {
        let dom = self.equation.y_domain;
        if !dom.contains(y) {
            return Err(FamilyError::OutsideDomain {
                y,
                lo: dom.lo,
                hi: dom.hi,
            });
        }
        let x = self.equation.x_of_y.eval(y)?;
        let u = self.evaluator.jet(t, x, t_profile, x_profile)?;
        let yp = self.y_prime.eval(x)?;
        let ypp = self.y_second.eval(x)?;
        let v_y = u.u_x / yp;
        let v_yy = (u.u_xx - v_y * ypp) / (yp * yp);
        Ok(Jet2 {
            u: u.u,
            u_t: u.u_t,
            u_x: v_y,
            u_tt: u.u_tt,
            u_tx: u.u_tx / yp,
            u_xx: v_yy,
        })
    }
}

/// One-off jet of the acoustic field at `(t, y)`. `order` is the highest
/// derivative order required; everything through order 2 is returned.
pub fn acoustics_eval(
    equation: &AcousticsEquation,
    template: &SolutionTemplate,
    t_profile: &ProfileFunction,
    x_profile: &ProfileFunction,
    t: f64,
    y: f64,
    order: usize,
) -> Result<Jet2, FamilyError> {
    if order > 2 {
        return Err(FamilyError::OrderTooHigh { order });
    }
    AcousticsSolution::new(equation.clone(), template).jet(t, y, t_profile, x_profile)
}

/// Pressure as the single-product closed form with scale constant `c`:
/// `[c²(n−1)ρ² + c a(n²−1)ρ − a²(n+1)²]·(cρ−a)^{(1−n)/(n+1)} / [c(n+3)(n²−1)]`.
pub fn pressure_product_form(n: u32, a: f64, c: f64) -> Expr1D {
    let nf = n as f64;
    let rho = Expr1D::var;
    let num = Expr1D::constant(c * c * (nf - 1.0)) * Expr1D::pow(rho(), 2.0)
        + Expr1D::constant(c * a * (nf * nf - 1.0)) * rho()
        - Expr1D::constant(a * a * (nf + 1.0) * (nf + 1.0));
    let tail = Expr1D::pow(
        Expr1D::constant(c) * rho() - Expr1D::constant(a),
        (1.0 - nf) / (nf + 1.0),
    );
    num * tail / Expr1D::constant(c * (nf + 3.0) * (nf * nf - 1.0))
}

/// Pressure as the three-term sum form (scale constant already set to 1):
/// `(ρ−a)^{(n+3)/(n+1)}/((n+1)(n+3)) + a(ρ−a)^{2/(n+1)}/(n+1) − a²(ρ−a)^{(1−n)/(n+1)}/(n²−1)`.
pub fn pressure_sum_form(n: u32, a: f64) -> Expr1D {
    let nf = n as f64;
    let base = Expr1D::var() - Expr1D::constant(a);
    Expr1D::pow(base.clone(), (nf + 3.0) / (nf + 1.0))
        / Expr1D::constant((nf + 1.0) * (nf + 3.0))
        + Expr1D::constant(a / (nf + 1.0)) * Expr1D::pow(base.clone(), 2.0 / (nf + 1.0))
        - Expr1D::constant(a * a / (nf * nf - 1.0))
            * Expr1D::pow(base, (1.0 - nf) / (nf + 1.0))
}

/// Agreement report between the two pressure forms at `c = 1`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PressureConsistency {
    pub n: u32,
    pub a: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub samples: usize,
    /// Constant offset (sum form minus product form) at the reference
    /// density; pressures matter only through their gradient.
    pub offset: f64,
    /// Max |p difference| after removing the offset.
    pub max_p_diff: f64,
    /// Max |dp/dρ difference|.
    pub max_dpdrho_diff: f64,
}

/// Default density window for a pressure law: clear of the `ρ = a` branch
/// point (and of `ρ = 0`) by a fixed margin.
pub fn default_rho_domain(a: f64) -> Interval {
    let lo = a.max(0.0) + 0.3;
    Interval::new(lo, lo + 2.0).expect("nonempty by construction")
}

/// Evaluates both pressure closed forms on the density window and reports
/// their disagreement (offset-corrected for `p`, raw for `dp/dρ`).
pub fn pressure_consistency_check(
    n: u32,
    a: f64,
    rho_domain: Interval,
) -> Result<PressureConsistency, FamilyError> {
    require_even(n)?;
    let sum = pressure_sum_form(n, a);
    let product = pressure_product_form(n, a, 1.0);
    let dsum = sum.diff();
    let dproduct = product.diff();

    let offset = sum.eval(rho_domain.mid())? - product.eval(rho_domain.mid())?;
    let mut max_p_diff = 0.0f64;
    let mut max_dp_diff = 0.0f64;
    for rho in rho_domain.chebyshev_samples(VALIDATION_SAMPLES) {
        let dp = (sum.eval(rho)? - product.eval(rho)? - offset).abs();
        let dd = (dsum.eval(rho)? - dproduct.eval(rho)?).abs();
        max_p_diff = max_p_diff.max(dp);
        max_dp_diff = max_dp_diff.max(dd);
    }
    Ok(PressureConsistency {
        n,
        a,
        rho_lo: rho_domain.lo,
        rho_hi: rho_domain.hi,
        samples: VALIDATION_SAMPLES,
        offset,
        max_p_diff,
        max_dpdrho_diff: max_dp_diff,
    })
}

/// Closed-form eigenfunctions of `h″ + (n/x)h′ − h = 0` for `n ∈ {2,4,6}`.
pub fn epd_eigen_h_neg1(n: u32, c1: f64, c2: f64) -> Result<Expr1D, FamilyError> {
    let x = Expr1D::var;
    let c = Expr1D::constant;
    let h = match n {
        2 => (c(c1) * Expr1D::sinh(x()) + c(c2) * Expr1D::cosh(x())) / x(),
        4 => {
            (c(c1) * (x() - c(1.0)) * Expr1D::exp(x())
                + c(c2) * (x() + c(1.0)) * Expr1D::exp(-x()))
                / Expr1D::pow(x(), 3.0)
        }
        6 => {
            let q_minus = Expr1D::pow(x(), 2.0) - c(3.0) * x() + c(3.0);
            let q_plus = Expr1D::pow(x(), 2.0) + c(3.0) * x() + c(3.0);
            (c(c1) * q_minus * Expr1D::exp(x()) + c(c2) * q_plus * Expr1D::exp(-x()))
                / Expr1D::pow(x(), 5.0)
        }
        _ => return Err(FamilyError::UnsupportedOrder { n }),
    };
    Ok(h)
}
