//! Solution templates: finite sums of travelling-wave terms.
//!
//! Every exact solution produced here has the form
//!
//! ```text
//! u(t, x) = Σ_i A_i(x) · T⁽ⁱ⁾(t + x)  +  Σ_j B_j(x) · X⁽ʲ⁾(t - x)
//! ```
//!
//! with symbolic coefficients `A_i`, `B_j` and two arbitrary profiles `T`,
//! `X`. The rank of the solution is the pair of highest derivative orders
//! appearing on each side. Differentiation in `t` and `x` acts on the
//! template itself, so a full second-order jet of the solution is exact —
//! the profiles are only ever evaluated, never numerically differentiated.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::expr::{Expr1D, ExprError};
use crate::profile::ProfileFunction;

/// A rank-(k, m) solution ansatz with symbolic coefficient functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTemplate {
    /// `A_i(x)` multiplying `T⁽ⁱ⁾(t + x)`, keyed by derivative order `i`.
    plus: BTreeMap<usize, Expr1D>,
    /// `B_j(x)` multiplying `X⁽ʲ⁾(t - x)`, keyed by derivative order `j`.
    minus: BTreeMap<usize, Expr1D>,
}

/// Value and all partial derivatives of a solution through second order.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Jet2 {
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_tt: f64,
    pub u_tx: f64,
    pub u_xx: f64,
}

fn insert_term(map: &mut BTreeMap<usize, Expr1D>, order: usize, coeff: Expr1D) {
    if coeff.is_zero() {
        return;
    }
    match map.entry(order) {
        Entry::Vacant(v) => {
            v.insert(coeff);
        }
        Entry::Occupied(mut o) => {
            let combined = Expr1D::add(o.get().clone(), coeff);
            if combined.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = combined;
            }
        }
    }
}

impl SolutionTemplate {
    /// `u = T(t+x) + X(t-x)`, the seed every transformation chain starts from.
    pub fn d_alembert() -> Self {
        let mut plus = BTreeMap::new();
        let mut minus = BTreeMap::new();
        plus.insert(0, Expr1D::one());
        minus.insert(0, Expr1D::one());
        SolutionTemplate { plus, minus }
    }

    pub fn from_terms(
        plus: impl IntoIterator<Item = (usize, Expr1D)>,
        minus: impl IntoIterator<Item = (usize, Expr1D)>,
    ) -> Self {
        let mut t = SolutionTemplate {
            plus: BTreeMap::new(),
            minus: BTreeMap::new(),
        };
        for (i, c) in plus {
            insert_term(&mut t.plus, i, c);
        }
        for (j, c) in minus {
            insert_term(&mut t.minus, j, c);
        }
        t
    }

    pub fn plus_terms(&self) -> impl Iterator<Item = (usize, &Expr1D)> {
        self.plus.iter().map(|(&k, v)| (k, v))
    }

    pub fn minus_terms(&self) -> impl Iterator<Item = (usize, &Expr1D)> {
        self.minus.iter().map(|(&k, v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    /// Highest profile-derivative order on either side.
    pub fn max_order(&self) -> usize {
        let p = self.plus.keys().next_back().copied().unwrap_or(0);
        let m = self.minus.keys().next_back().copied().unwrap_or(0);
        p.max(m)
    }

    /// ∂/∂t: every term's profile derivative order rises by one.
    pub fn diff_t(&self) -> Self {
        let plus = self.plus.iter().map(|(&i, c)| (i + 1, c.clone())).collect();
        let minus = self
            .minus
            .iter()
            .map(|(&j, c)| (j + 1, c.clone()))
            .collect();
        SolutionTemplate { plus, minus }
    }

    /// ∂/∂x: product rule on the coefficients, chain rule on the arguments
    /// (`∂x(t+x) = 1`, `∂x(t-x) = -1`).
    pub fn diff_x(&self) -> Self {
        let mut out = SolutionTemplate {
            plus: BTreeMap::new(),
            minus: BTreeMap::new(),
        };
        for (&i, c) in &self.plus {
            insert_term(&mut out.plus, i, c.diff());
            insert_term(&mut out.plus, i + 1, c.clone());
        }
        for (&j, c) in &self.minus {
            insert_term(&mut out.minus, j, c.diff());
            insert_term(&mut out.minus, j + 1, -c.clone());
        }
        out
    }

    /// Multiplies every coefficient by `factor(x)`.
    pub fn scale(&self, factor: &Expr1D) -> Self {
        let map = |m: &BTreeMap<usize, Expr1D>| {
            let mut out = BTreeMap::new();
            for (&k, c) in m {
                insert_term(&mut out, k, Expr1D::mul(factor.clone(), c.clone()));
            }
            out
        };
        SolutionTemplate {
            plus: map(&self.plus),
            minus: map(&self.minus),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&i, c) in &other.plus {
            insert_term(&mut out.plus, i, c.clone());
        }
        for (&j, c) in &other.minus {
            insert_term(&mut out.minus, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Expr1D::constant(-1.0)))
    }

    /// Evaluates the solution at `(t, x)` for concrete profiles.
    pub fn eval(
        &self,
        t: f64,
        x: f64,
        t_profile: &ProfileFunction,
        x_profile: &ProfileFunction,
    ) -> Result<f64, ExprError> {
        let mut acc = 0.0;
        for (&i, c) in &self.plus {
            acc += c.eval(x)? * t_profile.deriv(i, t + x);
        }
        for (&j, c) in &self.minus {
            acc += c.eval(x)? * x_profile.deriv(j, t - x);
        }
        Ok(acc)
    }
}

/// Caches the six differentiated templates needed for a second-order jet.
///
/// Differentiating a template symbolically is cheap but not free; residual
/// sweeps evaluate jets at thousands of grid points, so the derivative
/// templates are built once up front.
pub struct JetEvaluator {
    u: SolutionTemplate,
    u_t: SolutionTemplate,
    u_x: SolutionTemplate,
    u_tt: SolutionTemplate,
    u_tx: SolutionTemplate,
    u_xx: SolutionTemplate,
}

impl JetEvaluator {
    pub fn new(template: &SolutionTemplate) -> Self {
        let u = template.clone();
        let u_t = u.diff_t();
        let u_x = u.diff_x();
        let u_tt = u_t.diff_t();
        let u_tx = u_x.diff_t();
        let u_xx = u_x.diff_x();
        JetEvaluator {
            u,
            u_t,
            u_x,
            u_tt,
            u_tx,
            u_xx,
        }
    }

    pub fn jet(
        &self,
        t: f64,
        x: f64,
        t_profile: &ProfileFunction,
        x_profile: &ProfileFunction,
    ) -> Result<Jet2, ExprError> {
        Ok(Jet2 {
            u: self.u.eval(t, x, t_profile, x_profile)?,
            u_t: self.u_t.eval(t, x, t_profile, x_profile)?,
            u_x: self.u_x.eval(t, x, t_profile, x_profile)?,
            u_tt: self.u_tt.eval(t, x, t_profile, x_profile)?,
            u_tx: self.u_tx.eval(t, x, t_profile, x_profile)?,
            u_xx: self.u_xx.eval(t, x, t_profile, x_profile)?,
        })
    }

    pub fn template(&self) -> &SolutionTemplate {
        &self.u
    }
}
