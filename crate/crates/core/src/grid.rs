//! Uniform time grids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs t0 < T, got [{t0}, {t_end}]")]
    EmptyInterval { t0: f64, t_end: f64 },
    #[error("grid needs at least 2 points, got {0}")]
    TooFewPoints(usize),
}

/// `num_points` equally spaced nodes from `t0` to `t_end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    num_points: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, num_points: usize) -> Result<Self, GridError> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(GridError::EmptyInterval { t0, t_end });
        }
        if num_points < 2 {
            return Err(GridError::TooFewPoints(num_points));
        }
        Ok(Self {
            t0,
            t_end,
            num_points,
        })
    }

    /// Grid with `steps` intervals.
    pub fn with_steps(t0: f64, t_end: f64, steps: usize) -> Result<Self, GridError> {
        Self::new(t0, t_end, steps + 1)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn steps(&self) -> usize {
        self.num_points - 1
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t0) / self.steps() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.steps() {
            self.t_end
        } else {
            self.t0 + (self.t_end - self.t0) * (i as f64 / self.steps() as f64)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_points).map(|i| self.node(i))
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t0 <= t && t <= self.t_end
    }

    /// Segment `k` and local coordinate `s ∈ [0, 1]` with `t = τ_k + s·h`.
    /// Returns `s = 0` exactly when `t` is within 1e-9 steps of a node.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let pos = (t - self.t0) / self.step();
        let nearest = pos.round();
        let last = self.steps();
        if (pos - nearest).abs() < 1e-9 {
            let k = (nearest.max(0.0) as usize).min(last);
            return if k == last { (last - 1, 1.0) } else { (k, 0.0) };
        }
        let k = (pos.floor().max(0.0) as usize).min(last - 1);
        let s = (pos - k as f64).clamp(0.0, 1.0);
        (k, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_hit_endpoints() {
        let g = TimeGrid::new(0.0, 2.0, 201).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(200), 2.0);
        assert!((g.node(100) - 1.0).abs() < 1e-15);
        assert_eq!(g.nodes().count(), 201);
        assert!((g.step() - 0.01).abs() < 1e-16);
    }

    #[test]
    fn locate_snaps_to_nodes() {
        let g = TimeGrid::with_steps(0.0, 1.0, 1000).unwrap();
        assert_eq!(g.locate(0.3), (300, 0.0));
        assert_eq!(g.locate(1.0), (999, 1.0));
        assert_eq!(g.locate(0.0), (0, 0.0));
        let (k, s) = g.locate(0.0305);
        assert_eq!(k, 30);
        assert!((s - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 3).is_err());
    }
}
