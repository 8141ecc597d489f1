//! Crisp side of the solver: fixed-step RK4 on the companion system, the
//! fundamental basis `s(t)`, the boundary matrix `M`, the weight functions
//! `w(t) = s(t)·M⁻¹` and the non-homogeneous crisp boundary value problem.

use thiserror::Error;

use crate::equation::LinearOde;
use crate::expr::EvalError;
use crate::grid::TimeGrid;
use crate::linalg::Matrix;

/// Default number of RK4 steps over the solution interval.
pub const DEFAULT_STEPS: usize = 1000;

/// `M` is treated as singular when `|det M| < SINGULAR_RTOL · ‖M‖∞ⁿ`.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("integration blew up at node {node} (t = {t})")]
    BlowUp { node: usize, t: f64 },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {point} lies outside [{t0}, {t_end}]")]
    PointOutOfRange { point: f64, t0: f64, t_end: f64 },
    #[error("boundary point {0} appears more than once")]
    DuplicatePoint(f64),
    #[error(
        "boundary matrix is singular (|det M| = {determinant:e} < {threshold:e}); \
         the crisp problem has no unique solution"
    )]
    NonUniqueCrispSolution { determinant: f64, threshold: f64 },
    #[error("trajectories are sampled on different grids")]
    GridMismatch,
}

/// Cubic Hermite interpolant at local coordinate `s` of a grid segment.
pub(crate) fn hermite(grid: &TimeGrid, s: f64, y: [f64; 2], m: [f64; 2]) -> f64 {
    if s == 0.0 {
        return y[0];
    }
    if s == 1.0 {
        return y[1];
    }
    let h = grid.step();
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y[0]
        + (s3 - 2.0 * s2 + s) * h * m[0]
        + (-2.0 * s3 + 3.0 * s2) * y[1]
        + (s3 - s2) * h * m[1]
}

/// Sampled solution: the state `(x, x′, …, x⁽ⁿ⁻¹⁾)` at every grid node plus
/// `x′` (needed for interpolation when `n = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<Vec<f64>>,
    slopes: Vec<f64>,
}

impl Trajectory {
    pub fn from_samples(
        grid: TimeGrid,
        states: Vec<Vec<f64>>,
        slopes: Vec<f64>,
    ) -> Result<Self, OdeError> {
        let n = grid.num_points();
        for len in [states.len(), slopes.len()] {
            if len != n {
                return Err(OdeError::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if let Some(node) = states
            .iter()
            .zip(&slopes)
            .position(|(s, d)| !d.is_finite() || s.iter().any(|v| !v.is_finite()))
        {
            return Err(OdeError::BlowUp {
                node,
                t: grid.node(node),
            });
        }
        Ok(Self {
            grid,
            states,
            slopes,
        })
    }

    /// Samples a closed-form `t ↦ (state, x′(t))`.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> (Vec<f64>, f64)) -> Result<Self, OdeError> {
        let (states, slopes) = grid.nodes().map(f).unzip();
        Self::from_samples(grid, states, slopes)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn state(&self, node: usize) -> &[f64] {
        &self.states[node]
    }

    pub fn value(&self, node: usize) -> f64 {
        self.states[node][0]
    }

    pub fn slope(&self, node: usize) -> f64 {
        self.slopes[node]
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s[0])
    }

    /// `x(t)` anywhere in the grid span via cubic Hermite interpolation.
    pub fn value_at(&self, t: f64) -> Result<f64, OdeError> {
        if !self.grid.contains(t) {
            return Err(OdeError::PointOutOfRange {
                point: t,
                t0: self.grid.t0(),
                t_end: self.grid.t_end(),
            });
        }
        let (k, s) = self.grid.locate(t);
        Ok(hermite(
            &self.grid,
            s,
            [self.value(k), self.value(k + 1)],
            [self.slope(k), self.slope(k + 1)],
        ))
    }
}

/// Companion-system right-hand side.
fn companion(
    ode: &LinearOde,
    t: f64,
    y: &[f64],
    forced: bool,
    dy: &mut [f64],
) -> Result<(), EvalError> {
    let n = y.len();
    dy[..n - 1].copy_from_slice(&y[1..]);
    dy[n - 1] = ode.highest_derivative(t, y, forced)?;
    Ok(())
}

fn integrate(
    ode: &LinearOde,
    initial: &[f64],
    grid: &TimeGrid,
    forced: bool,
) -> Result<Trajectory, OdeError> {
    let n = ode.order();
    if initial.len() != n {
        return Err(OdeError::DimensionMismatch {
            expected: n,
            got: initial.len(),
        });
    }
    let h = grid.step();
    let mut states = Vec::with_capacity(grid.num_points());
    let mut slopes = Vec::with_capacity(grid.num_points());
    let mut y = initial.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];

    for node in 0..grid.num_points() {
        let t = grid.node(node);
        companion(ode, t, &y, forced, &mut k1)?;
        states.push(y.clone());
        slopes.push(if n >= 2 { y[1] } else { k1[0] });
        if node == grid.steps() {
            break;
        }
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        companion(ode, t + 0.5 * h, &tmp, forced, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        companion(ode, t + 0.5 * h, &tmp, forced, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        companion(ode, t + h, &tmp, forced, &mut k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::BlowUp {
                node: node + 1,
                t: grid.node(node + 1),
            });
        }
    }
    Trajectory::from_samples(*grid, states, slopes)
}

/// Classical RK4 for `ode` from `initial = (x, x′, …)` at `grid.t0()`.
pub fn integrate_ivp(
    ode: &LinearOde,
    initial: &[f64],
    grid: &TimeGrid,
) -> Result<Trajectory, OdeError> {
    integrate(ode, initial, grid, true)
}

/// Solutions of the homogeneous equation with initial states `e₁ … eₙ`.
pub fn homogeneous_basis(ode: &LinearOde, grid: &TimeGrid) -> Result<Vec<Trajectory>, OdeError> {
    let n = ode.order();
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            integrate(ode, &e, grid, false)
        })
        .collect()
}

fn check_points(grid: &TimeGrid, points: &[f64]) -> Result<(), OdeError> {
    for (j, &p) in points.iter().enumerate() {
        if !grid.contains(p) {
            return Err(OdeError::PointOutOfRange {
                point: p,
                t0: grid.t0(),
                t_end: grid.t_end(),
            });
        }
        if points[..j].contains(&p) {
            return Err(OdeError::DuplicatePoint(p));
        }
    }
    Ok(())
}

/// `M[j][i] = xᵢ(points[j])`.
pub fn boundary_matrix(basis: &[Trajectory], points: &[f64]) -> Result<Matrix, OdeError> {
    let n = basis.len();
    if points.len() != n {
        return Err(OdeError::DimensionMismatch {
            expected: n,
            got: points.len(),
        });
    }
    let Some(first) = basis.first() else {
        return Err(OdeError::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    };
    if basis.iter().any(|b| b.grid() != first.grid()) {
        return Err(OdeError::GridMismatch);
    }
    for &p in points {
        if !first.grid().contains(p) {
            return Err(OdeError::PointOutOfRange {
                point: p,
                t0: first.grid().t0(),
                t_end: first.grid().t_end(),
            });
        }
    }
    let mut m = Matrix::zeros(n);
    for (j, &p) in points.iter().enumerate() {
        for (i, b) in basis.iter().enumerate() {
            m[(j, i)] = b.value_at(p)?;
        }
    }
    Ok(m)
}

/// Fails with [`OdeError::NonUniqueCrispSolution`] when `M` is numerically singular.
pub fn check_invertible(m: &Matrix) -> Result<(), OdeError> {
    check_invertible_within(m, 0.0)
}

/// Like [`check_invertible`], but also treats `M` as singular when its
/// determinant lies within reach of an entry-wise error of `entry_error`,
/// i.e. `|det M| ≤ n·‖M‖∞ⁿ⁻¹·entry_error` on top of the relative threshold.
pub fn check_invertible_within(m: &Matrix, entry_error: f64) -> Result<(), OdeError> {
    let n = m.dim() as i32;
    let norm = m.norm_inf();
    let det = m.determinant();
    let threshold = SINGULAR_RTOL * norm.powi(n) + n as f64 * norm.powi(n - 1) * entry_error;
    if det.is_nan() || det.abs() < threshold || det == 0.0 {
        return Err(OdeError::NonUniqueCrispSolution {
            determinant: det,
            threshold,
        });
    }
    Ok(())
}

/// Fundamental basis together with `M`, `M⁻¹` and the sampled weights
/// `w(t) = s(t)·M⁻¹`. `wᵢ(t)` is the solution of the homogeneous problem
/// whose boundary values are `δᵢⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBasis {
    basis: Vec<Trajectory>,
    points: Vec<f64>,
    matrix: Matrix,
    inverse: Matrix,
    weights: Vec<Vec<f64>>,
    weight_slopes: Vec<Vec<f64>>,
}

impl WeightBasis {
    pub fn grid(&self) -> &TimeGrid {
        self.basis[0].grid()
    }

    pub fn order(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Trajectory] {
        &self.basis
    }

    pub fn boundary_points(&self) -> &[f64] {
        &self.points
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    /// `w(τ_node)`.
    pub fn weights_at_node(&self, node: usize) -> &[f64] {
        &self.weights[node]
    }

    pub fn weights_at(&self, t: f64) -> Result<Vec<f64>, OdeError> {
        let grid = self.grid();
        if !grid.contains(t) {
            return Err(OdeError::PointOutOfRange {
                point: t,
                t0: grid.t0(),
                t_end: grid.t_end(),
            });
        }
        let (k, s) = grid.locate(t);
        Ok((0..self.order())
            .map(|i| {
                hermite(
                    grid,
                    s,
                    [self.weights[k][i], self.weights[k + 1][i]],
                    [self.weight_slopes[k][i], self.weight_slopes[k + 1][i]],
                )
            })
            .collect())
    }

    /// `max |wᵢ(t_j) − δᵢⱼ|` over the boundary points.
    pub fn kronecker_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &p) in self.points.iter().enumerate() {
            let w = self.weights_at(p).expect("boundary points lie on the grid");
            for (i, wi) in w.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((wi - delta).abs());
            }
        }
        worst
    }
}

/// `w(t) = s(t)·M⁻¹` on every node of the basis grid.
pub fn weight_functions(
    basis: Vec<Trajectory>,
    points: &[f64],
    matrix: Matrix,
) -> Result<WeightBasis, OdeError> {
    let n = basis.len();
    if matrix.dim() != n || points.len() != n {
        return Err(OdeError::DimensionMismatch {
            expected: n,
            got: points.len().min(matrix.dim()),
        });
    }
    check_points(basis[0].grid(), points)?;
    check_invertible(&matrix)?;
    let inverse = matrix.inverse().ok_or(OdeError::NonUniqueCrispSolution {
        determinant: 0.0,
        threshold: 0.0,
    })?;
    let nodes = basis[0].grid().num_points();
    let combine = |sample: &dyn Fn(&Trajectory) -> f64| -> Vec<f64> {
        (0..n)
            .map(|j| (0..n).map(|i| sample(&basis[i]) * inverse[(i, j)]).sum())
            .collect()
    };
    let weights = (0..nodes).map(|k| combine(&|b| b.value(k))).collect();
    let weight_slopes = (0..nodes).map(|k| combine(&|b| b.slope(k))).collect();
    Ok(WeightBasis {
        basis,
        points: points.to_vec(),
        matrix,
        inverse,
        weights,
        weight_slopes,
    })
}

/// Integrates the basis for `ode` on `grid` and builds the weights for
/// conditions at `points`.
pub fn weight_basis(ode: &LinearOde, points: &[f64], grid: &TimeGrid) -> Result<WeightBasis, OdeError> {
    if points.len() != ode.order() {
        return Err(OdeError::DimensionMismatch {
            expected: ode.order(),
            got: points.len(),
        });
    }
    check_points(grid, points)?;
    let basis = homogeneous_basis(ode, grid)?;
    let m = boundary_matrix(&basis, points)?;
    check_invertible_within(&m, matrix_error_bound(ode, points, grid, &m)?)?;
    weight_functions(basis, points, m)
}

/// Entry-wise change of `M` when the basis is rebuilt with half the steps.
/// RK4 error drops 16× per halving, so this overestimates the error of `M`
/// itself by about that factor.
fn matrix_error_bound(
    ode: &LinearOde,
    points: &[f64],
    grid: &TimeGrid,
    fine: &Matrix,
) -> Result<f64, OdeError> {
    let coarse_steps = (grid.steps() / 2).max(1);
    let coarse_grid = TimeGrid::with_steps(grid.t0(), grid.t_end(), coarse_steps)
        .expect("same interval as a valid grid");
    let coarse = boundary_matrix(&homogeneous_basis(ode, &coarse_grid)?, points)?;
    let n = fine.dim();
    Ok((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (fine[(i, j)] - coarse[(i, j)]).abs())
        .fold(0.0, f64::max))
}

/// Crisp solution `x_cr = x_p + Σ cᵢxᵢ` with `c = M⁻¹(u − x_p(t_j))`, where
/// `x_p` is the forced solution from a zero initial state.
pub fn solve_crisp_with_basis(
    ode: &LinearOde,
    weights: &WeightBasis,
    values: &[f64],
) -> Result<Trajectory, OdeError> {
    let n = ode.order();
    if values.len() != n || weights.order() != n {
        return Err(OdeError::DimensionMismatch {
            expected: n,
            got: values.len(),
        });
    }
    let grid = weights.grid();
    let particular = integrate(ode, &vec![0.0; n], grid, true)?;
    let mut rhs = Vec::with_capacity(n);
    for (&p, &u) in weights.boundary_points().iter().zip(values) {
        rhs.push(u - particular.value_at(p)?);
    }
    let inv = weights.inverse();
    let c: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)] * rhs[j]).sum())
        .collect();

    let basis = weights.basis();
    let mut states = particular.states;
    let mut slopes = particular.slopes;
    for (k, (state, slope)) in states.iter_mut().zip(slopes.iter_mut()).enumerate() {
        for (ci, b) in c.iter().zip(basis) {
            for (s, v) in state.iter_mut().zip(b.state(k)) {
                *s += ci * v;
            }
            *slope += ci * b.slope(k);
        }
    }
    Trajectory::from_samples(*grid, states, slopes)
}

/// Solves `ode` with value conditions `x(pointⱼ) = valueⱼ`.
pub fn solve_crisp_bvp(
    ode: &LinearOde,
    boundary: &[(f64, f64)],
    grid: &TimeGrid,
) -> Result<Trajectory, OdeError> {
    let points: Vec<f64> = boundary.iter().map(|b| b.0).collect();
    let values: Vec<f64> = boundary.iter().map(|b| b.1).collect();
    let weights = weight_basis(ode, &points, grid)?;
    solve_crisp_with_basis(ode, &weights, &values)
}

/// Sup-norm of `x⁽ⁿ⁾ + Σ aᵢx⁽ⁿ⁻ⁱ⁾ − f` over interior nodes, with `x⁽ⁿ⁾`
/// taken from a fourth-order central difference of the stored `x⁽ⁿ⁻¹⁾`.
pub fn residual_sup_norm(ode: &LinearOde, trajectory: &Trajectory) -> Result<f64, OdeError> {
    let n = ode.order();
    let grid = trajectory.grid();
    let h = grid.step();
    let top = |k: usize| trajectory.state(k)[n - 1];
    let mut coeffs = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for k in 2..grid.num_points().saturating_sub(2) {
        let t = grid.node(k);
        let deriv = (-top(k + 2) + 8.0 * top(k + 1) - 8.0 * top(k - 1) + top(k - 2)) / (12.0 * h);
        ode.coefficients_at(t, &mut coeffs)?;
        let state = trajectory.state(k);
        let lhs = deriv
            + coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a * state[n - 1 - i])
                .sum::<f64>();
        worst = worst.max((lhs - ode.forcing_at(t)?).abs());
    }
    Ok(worst)
}
