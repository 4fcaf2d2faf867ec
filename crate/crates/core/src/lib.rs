//! Exact general solutions of variable-coefficient wave equations,
//! with independent numerical verification.
//!
//! The library constructs closed-form solutions of
//!
//! ```text
//! u_tt = u_xx + G(x) u_x
//! ```
//!
//! that depend on two arbitrary profile functions, by iterating Darboux-type
//! transformations starting from the d'Alembert solution. A change of
//! variables carries the same solutions to acoustic equations
//! `v_tt = f(y) v_yy`, and a hodograph step extends them to one-dimensional
//! isentropic gas flows with power-law-like pressure. Everything produced
//! symbolically is checked numerically: exact-jet residuals, independent
//! finite-difference reference solvers, and Newton inversion of the implicit
//! gas-dynamic solutions.
//!
//! Module map:
//! - [`expr`] — symbolic coefficient expressions in one variable
//! - [`profile`] — the arbitrary travelling-wave profiles and their derivatives
//! - [`template`] — solution ansätze `Σ Aᵢ(x) T⁽ⁱ⁾(t+x) + Σ Bⱼ(x) X⁽ʲ⁾(t-x)`
//! - [`transform`] — the Darboux-type ladder between coefficient functions
//! - [`families`] — ready-made equation/solution families and acoustic forms
//! - [`verify`] — residual sweeps and a leapfrog reference solver
//! - [`gasdyn`] — isentropic gas dynamics: implicit solutions, Newton
//!   inversion, and a Lax–Friedrichs reference solver

pub mod domain;
pub mod expr;
pub mod families;
pub mod gasdyn;
pub mod profile;
pub mod quad;
pub mod template;
pub mod transform;
pub mod verify;

pub use domain::Interval;
pub use expr::{Expr1D, ExprError};
pub use profile::ProfileFunction;
pub use template::{Jet2, JetEvaluator, SolutionTemplate};
