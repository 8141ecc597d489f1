//! Linear ordinary differential equations with fuzzy boundary values.
//!
//! The solution of `x⁽ⁿ⁾ + Σ aᵢ(t)x⁽ⁿ⁻ⁱ⁾ = f(t)` with fuzzy value conditions
//! `x(tⱼ) = Ũⱼ` is the fuzzy set of crisp solutions whose boundary values lie
//! in the `Ũⱼ`, each weighted by the least membership of its boundary values.
//! Because the boundary-to-solution map is linear, the value at every `t` is
//! the fuzzy number `x_cr(t) + Σ wⱼ(t)·(Ũⱼ − uⱼ)`, where `x_cr` solves the
//! crisp problem at the vertices `uⱼ` and `w(t) = s(t)·M⁻¹`.
//!
//! * [`fuzzy`]: triangular and parametric fuzzy numbers, α-cuts.
//! * [`expr`]: expressions in `t` for coefficients and forcing.
//! * [`ode`]: RK4, fundamental basis, weight functions, crisp BVPs.
//! * [`fbvp`]: decomposition, assembly, bands, memberships.
//! * [`oracle`]: finite-difference envelope used to cross-check bands.
//! * [`cli`]: problem files and the `fuzzy-bvp` commands.

pub mod cli;
pub mod equation;
pub mod expr;
pub mod fbvp;
pub mod fuzzy;
pub mod grid;
pub mod linalg;
pub mod ode;
pub mod oracle;

pub use equation::LinearOde;
pub use expr::Expr;
pub use fbvp::{Condition, FuzzyBvp, FuzzySolution, SolutionBand};
pub use fuzzy::{FuzzyNumber, Interval, ParametricFuzzyNumber, TriangularFuzzyNumber};
pub use grid::TimeGrid;
