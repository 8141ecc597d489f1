//! Brute-force check of the fuzzy band.
//!
//! Crisp second-order problems are solved with central finite differences
//! and the Thomas algorithm. Sampling boundary pairs from the α-cut
//! rectangle and taking per-node min/max gives an envelope that the band
//! from [`crate::fbvp`] must reproduce. Nothing here touches the RK4/basis
//! path in [`crate::ode`].

use serde::Serialize;
use thiserror::Error;

use crate::equation::LinearOde;
use crate::expr::EvalError;
use crate::fbvp::{FuzzyBvp, SolutionBand};
use crate::fuzzy::{FuzzyError, Interval};
use crate::grid::TimeGrid;

/// Default interior node count.
pub const DEFAULT_INTERIOR: usize = 1999;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("finite-difference oracle handles second-order equations only, got order {0}")]
    UnsupportedOrder(usize),
    #[error("oracle needs value conditions at both ends of [{t0}, {t_end}]")]
    NotTwoPoint { t0: f64, t_end: f64 },
    #[error("mesh needs t0 < T and at least 3 interior nodes")]
    BadMesh,
    #[error("zero pivot at row {0}; the discretised problem is singular")]
    SingularDiscretization(usize),
    #[error("at least 2 samples per axis are required, got {0}")]
    TooFewSamples(usize),
    #[error("bands are sampled on different grids")]
    GridMismatch,
    #[error("formula band has no level alpha = {0}")]
    MissingLevel(f64),
}

/// Uniform mesh with `interior` unknowns between the fixed end values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdMesh {
    t0: f64,
    t_end: f64,
    interior: usize,
}

impl FdMesh {
    pub fn new(t0: f64, t_end: f64, interior: usize) -> Result<Self, OracleError> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) || interior < 3 {
            return Err(OracleError::BadMesh);
        }
        Ok(Self {
            t0,
            t_end,
            interior,
        })
    }

    pub fn interior(&self) -> usize {
        self.interior
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t0) / (self.interior + 1) as f64
    }

    /// Node `i` for `i = 0 ..= interior + 1`.
    pub fn node(&self, i: usize) -> f64 {
        let last = self.interior + 1;
        if i == last {
            self.t_end
        } else {
            self.t0 + (self.t_end - self.t0) * (i as f64 / last as f64)
        }
    }
}

/// Mesh values including both end points.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    mesh: FdMesh,
    values: Vec<f64>,
}

impl FdSolution {
    pub fn mesh(&self) -> &FdMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear interpolation; exact at mesh nodes.
    pub fn value_at(&self, t: f64) -> f64 {
        let pos = ((t - self.mesh.t0) / self.mesh.step()).clamp(0.0, (self.mesh.interior + 1) as f64);
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            return self.values[nearest as usize];
        }
        let k = (pos.floor() as usize).min(self.mesh.interior);
        let s = pos - k as f64;
        self.values[k] + s * (self.values[k + 1] - self.values[k])
    }
}

/// Tridiagonal system for one equation on one mesh; reusable across
/// boundary values.
struct FdSystem {
    mesh: FdMesh,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

impl FdSystem {
    fn new(ode: &LinearOde, mesh: FdMesh) -> Result<Self, OracleError> {
        if ode.order() != 2 {
            return Err(OracleError::UnsupportedOrder(ode.order()));
        }
        let m = mesh.interior;
        let h = mesh.step();
        let (h2, h_twice) = (h * h, 2.0 * h);
        let mut sys = Self {
            mesh,
            lower: Vec::with_capacity(m),
            diag: Vec::with_capacity(m),
            upper: Vec::with_capacity(m),
            rhs: Vec::with_capacity(m),
        };
        let mut a = [0.0; 2];
        for i in 1..=m {
            let t = mesh.node(i);
            ode.coefficients_at(t, &mut a)?;
            sys.lower.push(1.0 / h2 - a[0] / h_twice);
            sys.diag.push(-2.0 / h2 + a[1]);
            sys.upper.push(1.0 / h2 + a[0] / h_twice);
            sys.rhs.push(ode.forcing_at(t)?);
        }
        Ok(sys)
    }

    fn solve(&self, left: f64, right: f64) -> Result<FdSolution, OracleError> {
        let m = self.mesh.interior;
        let mut d = self.rhs.clone();
        d[0] -= self.lower[0] * left;
        d[m - 1] -= self.upper[m - 1] * right;
        let x = thomas(&self.lower, &self.diag, &self.upper, &d)?;
        let mut values = Vec::with_capacity(m + 2);
        values.push(left);
        values.extend(x);
        values.push(right);
        Ok(FdSolution {
            mesh: self.mesh,
            values,
        })
    }
}

/// Thomas algorithm for `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = d[i]`;
/// `lower[0]` and `upper[n−1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], d: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(OracleError::SingularDiscretization(0));
    }
    c[0] = upper[0] / denom;
    x[0] = d[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 {
            return Err(OracleError::SingularDiscretization(i));
        }
        c[i] = upper[i] / denom;
        x[i] = (d[i] - lower[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Second-order two-point problem `x(t0) = left`, `x(T) = right` by central
/// differences.
pub fn fd_solve(ode: &LinearOde, left: f64, right: f64, mesh: &FdMesh) -> Result<FdSolution, OracleError> {
    FdSystem::new(ode, *mesh)?.solve(left, right)
}

/// Per-node min/max over sampled crisp solutions, on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEnvelope {
    pub grid: TimeGrid,
    pub alpha: f64,
    pub intervals: Vec<Interval>,
}

fn linspace(iv: Interval, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| {
            if i == 0 {
                iv.lo
            } else if i == k - 1 {
                iv.hi
            } else {
                iv.lo + iv.width() * (i as f64 / (k - 1) as f64)
            }
        })
        .collect()
}

/// α-cut rectangles of the left and right conditions, in that order.
fn end_cuts(problem: &FuzzyBvp, alpha: f64) -> Result<(Interval, Interval), OracleError> {
    let grid = problem.grid();
    let (t0, t_end) = (grid.t0(), grid.t_end());
    let find = |p: f64| problem.conditions().iter().find(|c| c.point == p);
    match (find(t0), find(t_end)) {
        (Some(a), Some(b)) if problem.conditions().len() == 2 => {
            Ok((a.value.alpha_cut(alpha)?, b.value.alpha_cut(alpha)?))
        }
        _ => Err(OracleError::NotTwoPoint { t0, t_end }),
    }
}

/// Envelope on `grid` from a `samples × samples` lattice over the α-cut
/// rectangle of the two end conditions.
pub fn envelope_on(
    problem: &FuzzyBvp,
    grid: &TimeGrid,
    alpha: f64,
    samples: usize,
    mesh: &FdMesh,
) -> Result<OracleEnvelope, OracleError> {
    if problem.ode().order() != 2 {
        return Err(OracleError::UnsupportedOrder(problem.ode().order()));
    }
    if samples < 2 {
        return Err(OracleError::TooFewSamples(samples));
    }
    let (cut_a, cut_b) = end_cuts(problem, alpha)?;
    let span = problem.grid();
    if mesh.t0 != span.t0() || mesh.t_end != span.t_end() {
        return Err(OracleError::BadMesh);
    }
    let system = FdSystem::new(problem.ode(), *mesh)?;
    let times: Vec<f64> = grid.nodes().collect();
    let mut hull: Option<Vec<Interval>> = None;
    for &a in &linspace(cut_a, samples) {
        for &b in &linspace(cut_b, samples) {
            let sol = system.solve(a, b)?;
            let values = times.iter().map(|&t| sol.value_at(t));
            hull = Some(match hull {
                None => values.map(Interval::point).collect(),
                Some(acc) => acc
                    .into_iter()
                    .zip(values)
                    .map(|(iv, v)| iv.hull(&Interval::point(v)))
                    .collect(),
            });
        }
    }
    Ok(OracleEnvelope {
        grid: *grid,
        alpha,
        intervals: hull.expect("at least one sample"),
    })
}

/// [`envelope_on`] over the problem's own grid.
pub fn envelope(
    problem: &FuzzyBvp,
    alpha: f64,
    samples: usize,
    mesh: &FdMesh,
) -> Result<OracleEnvelope, OracleError> {
    envelope_on(problem, problem.grid(), alpha, samples, mesh)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDeviation {
    pub t: f64,
    pub formula: Interval,
    pub oracle: Interval,
    pub lower_deviation: f64,
    pub upper_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub alpha: f64,
    pub max_deviation: f64,
    pub nodes: Vec<NodeDeviation>,
}

/// Endpoint deviations between the formula band at the envelope's level and
/// the oracle envelope.
pub fn compare(formula: &SolutionBand, oracle: &OracleEnvelope) -> Result<EnvelopeReport, OracleError> {
    if formula.grid() != &oracle.grid {
        return Err(OracleError::GridMismatch);
    }
    let level = formula
        .level_index(oracle.alpha)
        .ok_or(OracleError::MissingLevel(oracle.alpha))?;
    let nodes: Vec<NodeDeviation> = oracle
        .grid
        .nodes()
        .zip(&oracle.intervals)
        .enumerate()
        .map(|(k, (t, o))| {
            let f = formula.interval(k, level);
            NodeDeviation {
                t,
                formula: f,
                oracle: *o,
                lower_deviation: (f.lo - o.lo).abs(),
                upper_deviation: (f.hi - o.hi).abs(),
            }
        })
        .collect();
    let max_deviation = nodes
        .iter()
        .map(|n| n.lower_deviation.max(n.upper_deviation))
        .fold(0.0, f64::max);
    Ok(EnvelopeReport {
        alpha: oracle.alpha,
        max_deviation,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode(coeffs: &[&str], f: &str) -> LinearOde {
        LinearOde::parse(coeffs, f).unwrap()
    }

    #[test]
    fn linear_functions_are_exact() {
        let mesh = FdMesh::new(0.0, 1.0, 9).unwrap();
        let sol = fd_solve(&ode(&["0", "0"], "0"), 0.0, 1.0, &mesh).unwrap();
        for (i, v) in sol.values().iter().enumerate() {
            assert!((v - mesh.node(i)).abs() < 1e-14);
        }
        assert!((sol.value_at(0.55) - 0.55).abs() < 1e-14);
    }

    #[test]
    fn example_two_crisp() {
        let mesh = FdMesh::new(0.0, 2.0, 1999).unwrap();
        let sol = fd_solve(&ode(&["0", "16"], "47 - 8*t^2"), 3.0, 1.0, &mesh).unwrap();
        assert!((sol.value_at(1.0) - 2.5).abs() < 5e-6);
    }

    #[test]
    fn example_one_crisp() {
        let mesh = FdMesh::new(0.0, 1.0, 1999).unwrap();
        let sol = fd_solve(&ode(&["-3", "2"], "4*t - 6"), 2.0, 3.0, &mesh).unwrap();
        // Closed form evaluated in high precision: 3.281513869911035.
        assert!((sol.value_at(0.5) - 3.281513869911035).abs() < 5e-6);
    }

    #[test]
    fn rejects_wrong_order_and_bad_mesh() {
        let mesh = FdMesh::new(0.0, 1.0, 9).unwrap();
        assert_eq!(
            fd_solve(&ode(&["0", "0", "0"], "0"), 0.0, 1.0, &mesh).unwrap_err(),
            OracleError::UnsupportedOrder(3)
        );
        assert!(FdMesh::new(0.0, 1.0, 2).is_err());
        assert!(FdMesh::new(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn zero_pivot_is_reported() {
        // diag = -2/h² + a2 vanishes when a2 = 2/h²; h = 0.25 gives a2 = 32,
        // with zero first-derivative coefficient the first pivot is zero.
        let mesh = FdMesh::new(0.0, 1.0, 3).unwrap();
        let err = fd_solve(&ode(&["0", "32"], "0"), 0.0, 1.0, &mesh).unwrap_err();
        assert_eq!(err, OracleError::SingularDiscretization(0));
    }

    #[test]
    fn thomas_matches_dense_solution() {
        let lower = [0.0, 1.0, 2.0, 1.0];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [1.0, 1.0, 0.5, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let d: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = diag[i] * x_true[i];
                if i > 0 {
                    v += lower[i] * x_true[i - 1];
                }
                if i < 3 {
                    v += upper[i] * x_true[i + 1];
                }
                v
            })
            .collect();
        let x = thomas(&lower, &diag, &upper, &d).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
