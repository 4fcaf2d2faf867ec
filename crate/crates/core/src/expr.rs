//! Symbolic expressions in a single variable.
//!
//! Coefficient functions produced by the Darboux-type transformations are
//! built from a small closed vocabulary: rational operations, real powers,
//! `exp`/`ln`, hyperbolics, and an antiderivative node for coefficients that
//! only exist in quadrature form. Expressions are immutable trees behind
//! `Arc`, so cloning is cheap and differentiation can share subtrees.
//!
//! Simplification is deliberately minimal: constant folding plus the zero/one
//! identities. That is enough to keep iterated transformations from blowing
//! up, without risking rewrites that change the error behaviour (e.g. hiding
//! a pole by cancelling symbolically).

use std::fmt;
use std::sync::Arc;

use crate::quad;

/// Errors surfaced while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("fractional power of non-positive base {base} at x = {x}")]
    FractionalPower { base: f64, x: f64 },
    #[error("logarithm of non-positive argument {arg} at x = {x}")]
    LogNonPositive { arg: f64, x: f64 },
    #[error("expression is non-finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    QuadratureFailed { lo: f64, hi: f64 },
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var,
    Add(Expr1D, Expr1D),
    Sub(Expr1D, Expr1D),
    Mul(Expr1D, Expr1D),
    Div(Expr1D, Expr1D),
    /// Real power of a subexpression. Integer exponents admit negative bases.
    Pow(Expr1D, f64),
    Exp(Expr1D),
    Ln(Expr1D),
    Sinh(Expr1D),
    Cosh(Expr1D),
    /// `∫_base^x f(s) ds`, evaluated by adaptive quadrature on demand.
    Antideriv { integrand: Expr1D, base: f64 },
}

/// An immutable symbolic expression in one variable.
#[derive(Debug, Clone)]
pub struct Expr1D(Arc<Node>);

impl PartialEq for Expr1D {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Expr1D {
    pub fn constant(c: f64) -> Self {
        Expr1D(Arc::new(Node::Const(c)))
    }

    /// The independent variable.
    pub fn var() -> Self {
        Expr1D(Arc::new(Node::Var))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// The literal constant value, if this is a constant node.
    pub fn as_constant(&self) -> Option<f64> {
        self.as_const()
    }

    /// Structural matcher for the shape `c / x` with a literal constant `c`,
    /// folding sums, differences, and constant multiples of such terms —
    /// chained transforms build coefficients like `2/x + 2/x` node by node.
    /// Used to recognize power-law coefficients that admit closed-form
    /// quadratures; anything else falls back to antiderivative nodes.
    pub fn as_const_over_var(&self) -> Option<f64> {
        match &*self.0 {
            Node::Div(a, b) => match (a.as_const(), &*b.0) {
                (Some(c), Node::Var) => Some(c),
                _ => None,
            },
            Node::Add(u, v) => Some(u.as_const_over_var()? + v.as_const_over_var()?),
            Node::Sub(u, v) => Some(u.as_const_over_var()? - v.as_const_over_var()?),
            Node::Mul(u, v) => match (u.as_const(), v.as_const()) {
                (Some(c), None) => Some(c * v.as_const_over_var()?),
                (None, Some(c)) => Some(u.as_const_over_var()? * c),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(lhs: Self, rhs: Self) -> Self {
        if lhs.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return lhs;
        }
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            return Self::constant(a + b);
        }
        Expr1D(Arc::new(Node::Add(lhs, rhs)))
    }

    pub fn sub(lhs: Self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return lhs;
        }
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            return Self::constant(a - b);
        }
        if lhs.is_zero() {
            return Self::mul(Self::constant(-1.0), rhs);
        }
        Expr1D(Arc::new(Node::Sub(lhs, rhs)))
    }

    pub fn mul(lhs: Self, rhs: Self) -> Self {
        if lhs.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        if lhs.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return lhs;
        }
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            return Self::constant(a * b);
        }
        Expr1D(Arc::new(Node::Mul(lhs, rhs)))
    }

    pub fn div(lhs: Self, rhs: Self) -> Self {
        if lhs.is_zero() && !rhs.is_zero() {
            return Self::zero();
        }
        if rhs.is_one() {
            return lhs;
        }
        if let (Some(a), Some(b)) = (lhs.as_const(), rhs.as_const()) {
            if b != 0.0 {
                return Self::constant(a / b);
            }
        }
        Expr1D(Arc::new(Node::Div(lhs, rhs)))
    }

    pub fn pow(base: Self, exponent: f64) -> Self {
        if exponent == 0.0 {
            return Self::one();
        }
        if exponent == 1.0 {
            return base;
        }
        if let Some(b) = base.as_const() {
            if let Ok(v) = pow_checked(b, exponent, f64::NAN) {
                return Self::constant(v);
            }
        }
        Expr1D(Arc::new(Node::Pow(base, exponent)))
    }

    pub fn exp(arg: Self) -> Self {
        if let Some(a) = arg.as_const() {
            return Self::constant(a.exp());
        }
        Expr1D(Arc::new(Node::Exp(arg)))
    }

    pub fn ln(arg: Self) -> Self {
        if let Some(a) = arg.as_const() {
            if a > 0.0 {
                return Self::constant(a.ln());
            }
        }
        Expr1D(Arc::new(Node::Ln(arg)))
    }

    pub fn sinh(arg: Self) -> Self {
        if let Some(a) = arg.as_const() {
            return Self::constant(a.sinh());
        }
        Expr1D(Arc::new(Node::Sinh(arg)))
    }

    pub fn cosh(arg: Self) -> Self {
        if let Some(a) = arg.as_const() {
            return Self::constant(a.cosh());
        }
        Expr1D(Arc::new(Node::Cosh(arg)))
    }

    /// `∫_base^x integrand(s) ds`. No folding: keeps the quadrature explicit.
    pub fn antideriv(integrand: Self, base: f64) -> Self {
        Expr1D(Arc::new(Node::Antideriv { integrand, base }))
    }

    /// Evaluates at `x`, reporting domain violations instead of producing
    /// NaN/∞ silently.
    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        let v = match &*self.0 {
            Node::Const(c) => *c,
            Node::Var => x,
            Node::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Node::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Node::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Node::Div(a, b) => {
                let den = b.eval(x)?;
                if den.abs() < 1e-300 {
                    return Err(ExprError::DivisionByZero { x });
                }
                a.eval(x)? / den
            }
            Node::Pow(base, e) => pow_checked(base.eval(x)?, *e, x)?,
            Node::Exp(a) => a.eval(x)?.exp(),
            Node::Ln(a) => {
                let arg = a.eval(x)?;
                if arg <= 0.0 {
                    return Err(ExprError::LogNonPositive { arg, x });
                }
                arg.ln()
            }
            Node::Sinh(a) => a.eval(x)?.sinh(),
            Node::Cosh(a) => a.eval(x)?.cosh(),
            Node::Antideriv { integrand, base } => {
                let f = |s: f64| integrand.eval(s);
                quad::integrate(&f, *base, x, 1e-12)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite { x })
        }
    }

    /// Symbolic derivative.
    pub fn diff(&self) -> Self {
        match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Var => Self::one(),
            Node::Add(a, b) => Self::add(a.diff(), b.diff()),
            Node::Sub(a, b) => Self::sub(a.diff(), b.diff()),
            Node::Mul(a, b) => Self::add(
                Self::mul(a.diff(), b.clone()),
                Self::mul(a.clone(), b.diff()),
            ),
            Node::Div(a, b) => {
                let num = Self::sub(
                    Self::mul(a.diff(), b.clone()),
                    Self::mul(a.clone(), b.diff()),
                );
                Self::div(num, Self::pow(b.clone(), 2.0))
            }
            Node::Pow(base, e) => Self::mul(
                Self::mul(Self::constant(*e), Self::pow(base.clone(), e - 1.0)),
                base.diff(),
            ),
            Node::Exp(a) => Self::mul(Self::exp(a.clone()), a.diff()),
            Node::Ln(a) => Self::div(a.diff(), a.clone()),
            Node::Sinh(a) => Self::mul(Self::cosh(a.clone()), a.diff()),
            Node::Cosh(a) => Self::mul(Self::sinh(a.clone()), a.diff()),
            // Fundamental theorem of calculus, structurally exact.
            Node::Antideriv { integrand, .. } => integrand.clone(),
        }
    }

    pub fn diff_n(&self, n: usize) -> Self {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff();
        }
        e
    }

    /// Evaluates on a slice of points.
    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>, ExprError> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

fn pow_checked(base: f64, e: f64, x: f64) -> Result<f64, ExprError> {
    let is_int = e.fract() == 0.0 && e.abs() <= i32::MAX as f64;
    if is_int {
        if base == 0.0 && e < 0.0 {
            return Err(ExprError::DivisionByZero { x });
        }
        Ok(base.powi(e as i32))
    } else {
        if base < 0.0 {
            return Err(ExprError::FractionalPower { base, x });
        }
        if base == 0.0 && e < 0.0 {
            return Err(ExprError::DivisionByZero { x });
        }
        Ok(base.powf(e))
    }
}

impl fmt::Display for Expr1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var => write!(f, "x"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(base, e) => write!(f, "({base})^{e}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
            Node::Sinh(a) => write!(f, "sinh({a})"),
            Node::Cosh(a) => write!(f, "cosh({a})"),
            Node::Antideriv { integrand, base } => write!(f, "int[{base}..x]({integrand})"),
        }
    }
}

impl std::ops::Add for Expr1D {
    type Output = Expr1D;
    fn add(self, rhs: Expr1D) -> Expr1D {
        Expr1D::add(self, rhs)
    }
}

impl std::ops::Sub for Expr1D {
    type Output = Expr1D;
    fn sub(self, rhs: Expr1D) -> Expr1D {
        Expr1D::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr1D {
    type Output = Expr1D;
    fn mul(self, rhs: Expr1D) -> Expr1D {
        Expr1D::mul(self, rhs)
    }
}

impl std::ops::Div for Expr1D {
    type Output = Expr1D;
    fn div(self, rhs: Expr1D) -> Expr1D {
        Expr1D::div(self, rhs)
    }
}

impl std::ops::Neg for Expr1D {
    type Output = Expr1D;
    fn neg(self) -> Expr1D {
        Expr1D::mul(Expr1D::constant(-1.0), self)
    }
}

impl From<f64> for Expr1D {
    fn from(c: f64) -> Self {
        Expr1D::constant(c)
    }
}
