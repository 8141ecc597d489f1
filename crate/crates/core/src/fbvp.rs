//! Linear ODEs with fuzzy boundary values.
//!
//! A problem `x⁽ⁿ⁾ + Σ aᵢ(t)x⁽ⁿ⁻ⁱ⁾ = f(t)`, `x(tⱼ) = Ũⱼ` is split into
//!
//! * the crisp problem with the vertices `uⱼ` of the boundary values, solved
//!   once for `x_cr(t)`;
//! * the homogeneous problem with the zero-vertex parts `ũⱼ = Ũⱼ − uⱼ`, whose
//!   fuzzy solution is `Σ wⱼ(t)·ũⱼ` with `w(t) = s(t)·M⁻¹`.
//!
//! The value of the solution at `t` is then the fuzzy number
//! `x_cr(t) + Σ wⱼ(t)·ũⱼ`. Its α-cut is obtained per weight by picking the
//! endpoint of `ũⱼ`'s α-cut that minimises (maximises) `wⱼ(t)·u`, which is
//! where the image of the boundary box under the linear map attains its
//! extremes.

use thiserror::Error;

use crate::equation::LinearOde;
use crate::fuzzy::{FuzzyError, FuzzyNumber, Interval};
use crate::grid::TimeGrid;
use crate::ode::{self, OdeError, Trajectory, WeightBasis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FbvpError {
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("order-{order} equation needs {order} boundary conditions, got {got}")]
    ConditionCount { order: usize, got: usize },
    #[error("condition point {point} lies outside [{t0}, {t_end}]")]
    PointOutOfRange { point: f64, t0: f64, t_end: f64 },
    #[error("two conditions share the point {0}")]
    DuplicatePoint(f64),
    #[error("time {0} is outside the solution interval")]
    TimeOutOfRange(f64),
    #[error("crisp trajectory and weights are sampled on different grids")]
    GridMismatch,
}

/// Value condition `x(point) = value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub point: f64,
    pub value: FuzzyNumber,
}

impl Condition {
    pub fn new(point: f64, value: impl Into<FuzzyNumber>) -> Self {
        Self {
            point,
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyBvp {
    ode: LinearOde,
    conditions: Vec<Condition>,
    grid: TimeGrid,
}

impl FuzzyBvp {
    pub fn new(ode: LinearOde, conditions: Vec<Condition>, grid: TimeGrid) -> Result<Self, FbvpError> {
        if conditions.len() != ode.order() {
            return Err(FbvpError::ConditionCount {
                order: ode.order(),
                got: conditions.len(),
            });
        }
        for (j, c) in conditions.iter().enumerate() {
            if !grid.contains(c.point) {
                return Err(FbvpError::PointOutOfRange {
                    point: c.point,
                    t0: grid.t0(),
                    t_end: grid.t_end(),
                });
            }
            if conditions[..j].iter().any(|o| o.point == c.point) {
                return Err(FbvpError::DuplicatePoint(c.point));
            }
        }
        Ok(Self {
            ode,
            conditions,
            grid,
        })
    }

    pub fn ode(&self) -> &LinearOde {
        &self.ode
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn points(&self) -> Vec<f64> {
        self.conditions.iter().map(|c| c.point).collect()
    }

    /// Same problem integrated on a different grid over the same interval.
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self, FbvpError> {
        Self::new(self.ode.clone(), self.conditions.clone(), grid)
    }
}

/// Splits every condition into its vertex and its zero-vertex uncertain part.
pub fn decompose(problem: &FuzzyBvp) -> (Vec<f64>, Vec<FuzzyNumber>) {
    problem
        .conditions
        .iter()
        .map(|c| c.value.split_crisp())
        .unzip()
}

/// Lazily evaluated fuzzy solution `x_cr(t) + Σ wⱼ(t)·ũⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzySolution {
    crisp: Trajectory,
    weights: WeightBasis,
    crisp_values: Vec<f64>,
    uncertain: Vec<FuzzyNumber>,
}

/// Combines the crisp solution, the weights and the uncertain parts.
/// `crisp_values` are the vertices the crisp solution was computed for.
pub fn assemble(
    crisp: Trajectory,
    weights: WeightBasis,
    crisp_values: Vec<f64>,
    uncertain: Vec<FuzzyNumber>,
) -> Result<FuzzySolution, FbvpError> {
    if crisp.grid() != weights.grid() {
        return Err(FbvpError::GridMismatch);
    }
    let n = weights.order();
    for got in [crisp_values.len(), uncertain.len()] {
        if got != n {
            return Err(FbvpError::ConditionCount { order: n, got });
        }
    }
    Ok(FuzzySolution {
        crisp,
        weights,
        crisp_values,
        uncertain,
    })
}

/// Runs the whole method: split, basis and weights, crisp solve, assembly.
pub fn solve(problem: &FuzzyBvp) -> Result<FuzzySolution, FbvpError> {
    let (crisp_values, uncertain) = decompose(problem);
    let weights = ode::weight_basis(&problem.ode, &problem.points(), &problem.grid)?;
    let crisp = ode::solve_crisp_with_basis(&problem.ode, &weights, &crisp_values)?;
    assemble(crisp, weights, crisp_values, uncertain)
}

fn check_alpha(alpha: f64) -> Result<(), FbvpError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(FuzzyError::AlphaOutOfRange(alpha).into())
    }
}

impl FuzzySolution {
    pub fn grid(&self) -> &TimeGrid {
        self.crisp.grid()
    }

    pub fn crisp(&self) -> &Trajectory {
        &self.crisp
    }

    pub fn weights(&self) -> &WeightBasis {
        &self.weights
    }

    pub fn crisp_values(&self) -> &[f64] {
        &self.crisp_values
    }

    pub fn uncertain_parts(&self) -> &[FuzzyNumber] {
        &self.uncertain
    }

    /// The original fuzzy boundary value `j`.
    pub fn condition(&self, j: usize) -> FuzzyNumber {
        self.uncertain[j].shift(self.crisp_values[j])
    }

    fn check_time(&self, t: f64) -> Result<(), FbvpError> {
        if self.grid().contains(t) {
            Ok(())
        } else {
            Err(FbvpError::TimeOutOfRange(t))
        }
    }

    /// `Σ [min, max]{wⱼ·u̲ⱼ, wⱼ·u̅ⱼ}` over the α-cuts of the uncertain parts.
    fn spread(&self, w: &[f64], alpha: f64) -> Result<Interval, FbvpError> {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (wj, u) in w.iter().zip(&self.uncertain) {
            let cut = u.alpha_cut(alpha)?;
            let (a, b) = (wj * cut.lo, wj * cut.hi);
            lo += a.min(b);
            hi += a.max(b);
        }
        Ok(Interval { lo, hi })
    }

    /// α-cut of the homogeneous (uncertain) part at `t`.
    pub fn uncertain_at(&self, t: f64, alpha: f64) -> Result<Interval, FbvpError> {
        self.check_time(t)?;
        check_alpha(alpha)?;
        self.spread(&self.weights.weights_at(t)?, alpha)
    }

    /// α-cut `[x̲_α(t), x̅_α(t)]` of the solution at `t`.
    pub fn value_at(&self, t: f64, alpha: f64) -> Result<Interval, FbvpError> {
        self.check_time(t)?;
        check_alpha(alpha)?;
        let w = self.weights.weights_at(t)?;
        Ok(self.spread(&w, alpha)?.shift(self.crisp.value_at(t)?))
    }

    /// [`value_at`](Self::value_at) at grid node `k`, without interpolation.
    pub fn value_at_node(&self, k: usize, alpha: f64) -> Result<Interval, FbvpError> {
        check_alpha(alpha)?;
        let w = self.weights.weights_at_node(k);
        Ok(self.spread(w, alpha)?.shift(self.crisp.value(k)))
    }

    /// The fuzzy number `x_cr(t) + Σ wⱼ(t)·ũⱼ` built with fuzzy scaling and
    /// addition.
    pub fn fuzzy_value_at(&self, t: f64) -> Result<FuzzyNumber, FbvpError> {
        self.check_time(t)?;
        let w = self.weights.weights_at(t)?;
        Ok(self.fuzzy_combination(&w, self.crisp.value_at(t)?))
    }

    pub fn fuzzy_value_at_node(&self, k: usize) -> FuzzyNumber {
        self.fuzzy_combination(self.weights.weights_at_node(k), self.crisp.value(k))
    }

    fn fuzzy_combination(&self, w: &[f64], crisp: f64) -> FuzzyNumber {
        let mut acc = FuzzyNumber::crisp(0.0).expect("zero is a valid number");
        for (wj, u) in w.iter().zip(&self.uncertain) {
            acc = acc.add(&u.scale(*wj));
        }
        acc.shift(crisp)
    }

    /// Band on the solution's own grid.
    pub fn band(&self, alphas: &[f64]) -> Result<SolutionBand, FbvpError> {
        let alphas = normalize_alphas(alphas)?;
        let intervals = (0..self.grid().num_points())
            .map(|k| {
                alphas
                    .iter()
                    .map(|&a| self.value_at_node(k, a))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SolutionBand {
            grid: *self.grid(),
            alphas,
            intervals,
        })
    }

    /// Band sampled on `grid`, which must lie inside the solution interval.
    pub fn band_on(&self, grid: &TimeGrid, alphas: &[f64]) -> Result<SolutionBand, FbvpError> {
        if grid == self.grid() {
            return self.band(alphas);
        }
        let alphas = normalize_alphas(alphas)?;
        let intervals = grid
            .nodes()
            .map(|t| {
                alphas
                    .iter()
                    .map(|&a| self.value_at(t, a))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SolutionBand {
            grid: *grid,
            alphas,
            intervals,
        })
    }

    /// Possibility of the crisp trajectory with boundary values `values`:
    /// the least membership of `valuesⱼ` in condition `j`.
    pub fn membership_of(&self, values: &[f64]) -> Result<f64, FbvpError> {
        if values.len() != self.uncertain.len() {
            return Err(FbvpError::ConditionCount {
                order: self.uncertain.len(),
                got: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(self.uncertain.iter().zip(&self.crisp_values))
            .map(|(v, (u, c))| u.membership(v - c))
            .fold(1.0, f64::min))
    }
}

/// Sorted, deduplicated levels, all in `[0, 1]`.
pub fn normalize_alphas(alphas: &[f64]) -> Result<Vec<f64>, FbvpError> {
    for &a in alphas {
        check_alpha(a)?;
    }
    let mut out = alphas.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// α-cut intervals of the solution at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBand {
    grid: TimeGrid,
    alphas: Vec<f64>,
    intervals: Vec<Vec<Interval>>,
}

impl SolutionBand {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Interval at grid node `node` and level index `level`.
    pub fn interval(&self, node: usize, level: usize) -> Interval {
        self.intervals[node][level]
    }

    pub fn row(&self, node: usize) -> &[Interval] {
        &self.intervals[node]
    }

    pub fn level_index(&self, alpha: f64) -> Option<usize> {
        self.alphas.iter().position(|&a| a == alpha)
    }

    /// All intervals at level index `level`, node by node.
    pub fn level(&self, level: usize) -> Vec<Interval> {
        self.intervals.iter().map(|r| r[level]).collect()
    }

    /// True when every row is nested across increasing α, with slack `tol`.
    pub fn is_nested(&self, tol: f64) -> bool {
        self.intervals
            .iter()
            .all(|row| row.windows(2).all(|w| w[1].within(&w[0], tol)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::ParametricFuzzyNumber;

    fn tri(l: f64, m: f64, r: f64) -> FuzzyNumber {
        FuzzyNumber::triangular(l, m, r).unwrap()
    }

    fn example1(steps: usize) -> FuzzyBvp {
        FuzzyBvp::new(
            LinearOde::parse(&["-3", "2"], "4*t - 6").unwrap(),
            vec![
                Condition::new(0.0, tri(1.5, 2.0, 3.0)),
                Condition::new(1.0, tri(2.0, 3.0, 4.0)),
            ],
            TimeGrid::with_steps(0.0, 1.0, steps).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn decomposition_of_example_conditions() {
        let (crisp, unc) = decompose(&example1(10));
        assert_eq!(crisp, vec![2.0, 3.0]);
        assert_eq!(unc, vec![tri(-0.5, 0.0, 1.0), tri(-1.0, 0.0, 1.0)]);

        let p = FuzzyBvp::new(
            LinearOde::parse(&["0", "16"], "47 - 8*t^2").unwrap(),
            vec![
                Condition::new(0.0, tri(2.0, 3.0, 3.5)),
                Condition::new(2.0, tri(0.5, 1.0, 1.5)),
            ],
            TimeGrid::with_steps(0.0, 2.0, 10).unwrap(),
        )
        .unwrap();
        let (crisp, unc) = decompose(&p);
        assert_eq!(crisp, vec![3.0, 1.0]);
        assert_eq!(unc, vec![tri(-1.0, 0.0, 0.5), tri(-0.5, 0.0, 0.5)]);
    }

    #[test]
    fn crisp_conditions_give_degenerate_band() {
        let p = FuzzyBvp::new(
            LinearOde::parse(&["0", "0"], "0").unwrap(),
            vec![
                Condition::new(0.0, tri(5.0, 5.0, 5.0)),
                Condition::new(1.0, tri(7.0, 7.0, 7.0)),
            ],
            TimeGrid::with_steps(0.0, 1.0, 100).unwrap(),
        )
        .unwrap();
        let (crisp, unc) = decompose(&p);
        assert_eq!(crisp, vec![5.0, 7.0]);
        assert!(unc.iter().all(|u| u.support() == Interval::point(0.0)));
        let sol = solve(&p).unwrap();
        let band = sol.band(&[0.0, 0.5, 1.0]).unwrap();
        for k in 0..101 {
            let x = 5.0 + 2.0 * p.grid().node(k);
            for lvl in 0..3 {
                let iv = band.interval(k, lvl);
                assert!((iv.lo - x).abs() < 1e-12 && (iv.hi - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn problem_validation() {
        let ode = LinearOde::parse(&["0", "0"], "0").unwrap();
        let g = TimeGrid::with_steps(0.0, 1.0, 10).unwrap();
        let c = |p| Condition::new(p, tri(0.0, 1.0, 2.0));
        assert!(matches!(
            FuzzyBvp::new(ode.clone(), vec![c(0.0)], g),
            Err(FbvpError::ConditionCount { order: 2, got: 1 })
        ));
        assert!(matches!(
            FuzzyBvp::new(ode.clone(), vec![c(0.0), c(0.0)], g),
            Err(FbvpError::DuplicatePoint(_))
        ));
        assert!(matches!(
            FuzzyBvp::new(ode, vec![c(0.0), c(1.2)], g),
            Err(FbvpError::PointOutOfRange { .. })
        ));
    }

    #[test]
    fn value_at_domain_errors() {
        let sol = solve(&example1(100)).unwrap();
        assert!(matches!(sol.value_at(1.5, 0.0), Err(FbvpError::TimeOutOfRange(_))));
        assert!(matches!(
            sol.value_at(0.5, 1.5),
            Err(FbvpError::Fuzzy(FuzzyError::AlphaOutOfRange(_)))
        ));
        assert!(sol.band(&[-0.1]).is_err());
    }

    #[test]
    fn membership_queries() {
        let sol = solve(&example1(100)).unwrap();
        assert_eq!(sol.membership_of(&[2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(sol.membership_of(&[2.5, 3.5]).unwrap(), 0.5);
        assert_eq!(sol.membership_of(&[1.0, 3.0]).unwrap(), 0.0);
        assert!(sol.membership_of(&[2.0]).is_err());
    }

    #[test]
    fn assemble_rejects_grid_mismatch() {
        let a = solve(&example1(100)).unwrap();
        let b = solve(&example1(50)).unwrap();
        let err = assemble(
            a.crisp().clone(),
            b.weights().clone(),
            vec![2.0, 3.0],
            a.uncertain_parts().to_vec(),
        );
        assert_eq!(err.unwrap_err(), FbvpError::GridMismatch);
    }

    #[test]
    fn parametric_conditions_use_level_cuts() {
        // Quadratic branches on 101 levels at x(0); triangular at x(1).
        let a = ParametricFuzzyNumber::from_branches(|r| 1.0 + r * r, |r| 3.0 - r * r, 101).unwrap();
        let p = FuzzyBvp::new(
            LinearOde::parse(&["0", "0"], "0").unwrap(),
            vec![Condition::new(0.0, a), Condition::new(1.0, tri(1.0, 2.0, 4.0))],
            TimeGrid::with_steps(0.0, 1.0, 100).unwrap(),
        )
        .unwrap();
        let sol = solve(&p).unwrap();
        // x = (1 - t)·a + t·b, weights are non-negative.
        let t = 0.25;
        let alpha = 0.5;
        let iv = sol.value_at(t, alpha).unwrap();
        let lo = 0.75 * (1.0 + 0.25) + 0.25 * 1.5;
        let hi = 0.75 * (3.0 - 0.25) + 0.25 * 3.0;
        assert!((iv.lo - lo).abs() < 1e-12, "{iv:?}");
        assert!((iv.hi - hi).abs() < 1e-12, "{iv:?}");
        let ext = sol.fuzzy_value_at(t).unwrap().alpha_cut(alpha).unwrap();
        assert!((ext.lo - iv.lo).abs() < 1e-12 && (ext.hi - iv.hi).abs() < 1e-12);
    }
}
