//! Fuzzy numbers with a unique vertex, their α-cuts and the linear
//! operations needed to push boundary uncertainty through a linear map.
//!
//! Two representations are supported:
//!
//! * [`TriangularFuzzyNumber`] `(l, m, r)`, kept in its exact three-field form
//!   under scaling and addition;
//! * [`ParametricFuzzyNumber`], the left/right branches `u_L(α)`, `u_R(α)`
//!   sampled on an ordered grid of α levels and interpolated piecewise-linearly.
//!
//! [`FuzzyNumber`] wraps both and promotes a triangular operand to the
//! parametric form when the two are mixed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack used for branch monotonicity and the unique-vertex check.
pub const BRANCH_TOLERANCE: f64 = 1e-12;

/// Default number of α levels for sampled parametric numbers.
pub const DEFAULT_LEVELS: usize = 101;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("alpha level {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("triangular number requires l <= m <= r, got ({l}, {m}, {r})")]
    Unordered { l: f64, m: f64, r: f64 },
    #[error("non-finite value in fuzzy number")]
    NonFinite,
    #[error("invalid alpha grid: {0}")]
    AlphaGrid(String),
    #[error("branch length mismatch: {alphas} levels, {lower} lower, {upper} upper")]
    LengthMismatch {
        alphas: usize,
        lower: usize,
        upper: usize,
    },
    #[error("lower branch decreases between alpha {from} and {to}")]
    LowerNotMonotone { from: f64, to: f64 },
    #[error("upper branch increases between alpha {from} and {to}")]
    UpperNotMonotone { from: f64, to: f64 },
    #[error("lower branch exceeds upper branch at alpha {0}")]
    BranchesCross(f64),
    #[error("no unique vertex: u_L(1) = {lower}, u_R(1) = {upper}")]
    NoUniqueVertex { lower: f64, upper: f64 },
}

fn check_alpha(alpha: f64) -> Result<(), FuzzyError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(FuzzyError::AlphaOutOfRange(alpha))
    }
}

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, FuzzyError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(FuzzyError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other`, with absolute slack `tol` on both ends.
    pub fn within(&self, other: &Interval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }

    pub fn scale(&self, c: f64) -> Self {
        let (a, b) = (c * self.lo, c * self.hi);
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn shift(&self, c: f64) -> Self {
        Self {
            lo: self.lo + c,
            hi: self.hi + c,
        }
    }

    pub fn hull(&self, other: &Interval) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

/// Triangular fuzzy number `(l, m, r)` with possibility 1 at `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularFuzzyNumber {
    left: f64,
    peak: f64,
    right: f64,
}

impl TriangularFuzzyNumber {
    pub fn new(left: f64, peak: f64, right: f64) -> Result<Self, FuzzyError> {
        if !(left.is_finite() && peak.is_finite() && right.is_finite()) {
            return Err(FuzzyError::NonFinite);
        }
        if !(left <= peak && peak <= right) {
            return Err(FuzzyError::Unordered {
                l: left,
                m: peak,
                r: right,
            });
        }
        Ok(Self { left, peak, right })
    }

    pub fn crisp(x: f64) -> Result<Self, FuzzyError> {
        Self::new(x, x, x)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval, FuzzyError> {
        check_alpha(alpha)?;
        if alpha == 1.0 {
            return Ok(Interval::point(self.peak));
        }
        Ok(Interval {
            lo: self.left + alpha * (self.peak - self.left),
            hi: self.right - alpha * (self.right - self.peak),
        })
    }

    pub fn membership(&self, x: f64) -> f64 {
        if x < self.left || x > self.right || x.is_nan() {
            0.0
        } else if x == self.peak {
            1.0
        } else if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        if c >= 0.0 {
            Self {
                left: c * self.left,
                peak: c * self.peak,
                right: c * self.right,
            }
        } else {
            Self {
                left: c * self.right,
                peak: c * self.peak,
                right: c * self.left,
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            left: self.left + other.left,
            peak: self.peak + other.peak,
            right: self.right + other.right,
        }
    }

    pub fn shift(&self, c: f64) -> Self {
        Self {
            left: self.left + c,
            peak: self.peak + c,
            right: self.right + c,
        }
    }

    /// Same number written on the two levels `{0, 1}`.
    pub fn to_parametric(&self) -> ParametricFuzzyNumber {
        ParametricFuzzyNumber {
            alphas: vec![0.0, 1.0],
            lower: vec![self.left, self.peak],
            upper: vec![self.right, self.peak],
        }
    }
}

/// Fuzzy number given by sampled branches `u_L(α)` and `u_R(α)`.
///
/// Levels are strictly increasing from 0 to 1. Between stored levels both
/// branches are linear. The lower branch must be non-decreasing, the upper
/// non-increasing, and they must meet at α = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricFuzzyNumber {
    alphas: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParametricFuzzyNumber {
    pub fn new(alphas: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, FuzzyError> {
        let k = alphas.len();
        if lower.len() != k || upper.len() != k {
            return Err(FuzzyError::LengthMismatch {
                alphas: k,
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if k < 2 {
            return Err(FuzzyError::AlphaGrid("at least two levels required".into()));
        }
        if alphas
            .iter()
            .chain(&lower)
            .chain(&upper)
            .any(|v| !v.is_finite())
        {
            return Err(FuzzyError::NonFinite);
        }
        if alphas[0] != 0.0 || alphas[k - 1] != 1.0 {
            return Err(FuzzyError::AlphaGrid(
                "levels must start at 0 and end at 1".into(),
            ));
        }
        if alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FuzzyError::AlphaGrid(
                "levels must be strictly increasing".into(),
            ));
        }
        for i in 0..k - 1 {
            if lower[i + 1] < lower[i] - BRANCH_TOLERANCE {
                return Err(FuzzyError::LowerNotMonotone {
                    from: alphas[i],
                    to: alphas[i + 1],
                });
            }
            if upper[i + 1] > upper[i] + BRANCH_TOLERANCE {
                return Err(FuzzyError::UpperNotMonotone {
                    from: alphas[i],
                    to: alphas[i + 1],
                });
            }
        }
        let (l1, u1) = (lower[k - 1], upper[k - 1]);
        if (l1 - u1).abs() > BRANCH_TOLERANCE {
            return Err(FuzzyError::NoUniqueVertex {
                lower: l1,
                upper: u1,
            });
        }
        for i in 0..k {
            if lower[i] > upper[i] + BRANCH_TOLERANCE {
                return Err(FuzzyError::BranchesCross(alphas[i]));
            }
        }
        let mut lower = lower;
        let mut upper = upper;
        let vertex = 0.5 * (l1 + u1);
        lower[k - 1] = vertex;
        upper[k - 1] = vertex;
        Ok(Self {
            alphas,
            lower,
            upper,
        })
    }

    /// Samples `lower(α)` and `upper(α)` on `levels` uniformly spaced α values.
    pub fn from_branches<L, U>(lower: L, upper: U, levels: usize) -> Result<Self, FuzzyError>
    where
        L: Fn(f64) -> f64,
        U: Fn(f64) -> f64,
    {
        if levels < 2 {
            return Err(FuzzyError::AlphaGrid("at least two levels required".into()));
        }
        let step = (levels - 1) as f64;
        let alphas: Vec<f64> = (0..levels)
            .map(|i| if i == levels - 1 { 1.0 } else { i as f64 / step })
            .collect();
        let lo = alphas.iter().map(|&a| lower(a)).collect();
        let hi = alphas.iter().map(|&a| upper(a)).collect();
        Self::new(alphas, lo, hi)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn vertex(&self) -> f64 {
        self.lower[self.lower.len() - 1]
    }

    fn segment(&self, alpha: f64) -> (usize, f64) {
        // Largest i with alphas[i] <= alpha, capped so i + 1 is valid.
        let k = self.alphas.len();
        let i = self
            .alphas
            .partition_point(|&a| a <= alpha)
            .saturating_sub(1)
            .min(k - 2);
        let s = (alpha - self.alphas[i]) / (self.alphas[i + 1] - self.alphas[i]);
        (i, s)
    }

    fn lower_at(&self, alpha: f64) -> f64 {
        let (i, s) = self.segment(alpha);
        lerp(self.lower[i], self.lower[i + 1], s)
    }

    fn upper_at(&self, alpha: f64) -> f64 {
        let (i, s) = self.segment(alpha);
        lerp(self.upper[i], self.upper[i + 1], s)
    }

    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval, FuzzyError> {
        check_alpha(alpha)?;
        if let Ok(i) = self
            .alphas
            .binary_search_by(|a| a.partial_cmp(&alpha).expect("finite levels"))
        {
            return Ok(Interval {
                lo: self.lower[i],
                hi: self.upper[i].max(self.lower[i]),
            });
        }
        let lo = self.lower_at(alpha);
        let hi = self.upper_at(alpha);
        Ok(Interval { lo, hi: hi.max(lo) })
    }

    pub fn membership(&self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.0;
        }
        // Each branch gives the supremum of levels still admitting x; the
        // membership is the smaller of the two.
        let from_lower = branch_sup(&self.alphas, &self.lower, x, |v| v <= x);
        let from_upper = branch_sup(&self.alphas, &self.upper, x, |v| v >= x);
        match (from_lower, from_upper) {
            (Some(a), Some(b)) => a.min(b),
            _ => 0.0,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let (lower, upper) = if c >= 0.0 {
            (
                self.lower.iter().map(|v| c * v).collect(),
                self.upper.iter().map(|v| c * v).collect(),
            )
        } else {
            (
                self.upper.iter().map(|v| c * v).collect(),
                self.lower.iter().map(|v| c * v).collect(),
            )
        };
        Self {
            alphas: self.alphas.clone(),
            lower,
            upper,
        }
    }

    pub fn shift(&self, c: f64) -> Self {
        Self {
            alphas: self.alphas.clone(),
            lower: self.lower.iter().map(|v| v + c).collect(),
            upper: self.upper.iter().map(|v| v + c).collect(),
        }
    }

    /// Level-wise sum on the union of both α grids.
    pub fn add(&self, other: &Self) -> Self {
        if self.alphas == other.alphas {
            return Self {
                alphas: self.alphas.clone(),
                lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a + b).collect(),
                upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
            };
        }
        let alphas = union_grid(&self.alphas, &other.alphas);
        let lower = alphas
            .iter()
            .map(|&a| self.lower_at(a) + other.lower_at(a))
            .collect();
        let upper = alphas
            .iter()
            .map(|&a| self.upper_at(a) + other.upper_at(a))
            .collect();
        Self {
            alphas,
            lower,
            upper,
        }
    }
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    if s == 0.0 {
        a
    } else if s == 1.0 {
        b
    } else {
        a + s * (b - a)
    }
}

/// Sup of α for which `admits(branch(α))` holds, where the admitted set is
/// `[0, α*]` and `x` is the threshold the predicate compares against.
/// `None` when even α = 0 is not admitted.
fn branch_sup(alphas: &[f64], branch: &[f64], x: f64, admits: impl Fn(f64) -> bool) -> Option<f64> {
    if !admits(branch[0]) {
        return None;
    }
    // First level that is no longer admitted.
    let Some(j) = (1..alphas.len()).find(|&j| !admits(branch[j])) else {
        return Some(1.0);
    };
    let (a0, a1) = (alphas[j - 1], alphas[j]);
    let (v0, v1) = (branch[j - 1], branch[j]);
    // v0 is admitted and v1 is not, so the segment is non-flat.
    let s = (x - v0) / (v1 - v0);
    Some(a0 + (a1 - a0) * s.clamp(0.0, 1.0))
}

fn union_grid(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().chain(b).copied().collect();
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite levels"));
    out.dedup();
    out
}

/// A fuzzy number in either supported representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FuzzyNumberRepr", into = "FuzzyNumberRepr")]
pub enum FuzzyNumber {
    Triangular(TriangularFuzzyNumber),
    Parametric(ParametricFuzzyNumber),
}

impl FuzzyNumber {
    pub fn triangular(l: f64, m: f64, r: f64) -> Result<Self, FuzzyError> {
        TriangularFuzzyNumber::new(l, m, r).map(Self::Triangular)
    }

    pub fn crisp(x: f64) -> Result<Self, FuzzyError> {
        Self::triangular(x, x, x)
    }

    pub fn vertex(&self) -> f64 {
        match self {
            Self::Triangular(u) => u.peak(),
            Self::Parametric(u) => u.vertex(),
        }
    }

    /// α = 0 cut.
    pub fn support(&self) -> Interval {
        self.alpha_cut(0.0).expect("0 is a valid level")
    }

    pub fn alpha_cut(&self, alpha: f64) -> Result<Interval, FuzzyError> {
        match self {
            Self::Triangular(u) => u.alpha_cut(alpha),
            Self::Parametric(u) => u.alpha_cut(alpha),
        }
    }

    pub fn membership(&self, x: f64) -> f64 {
        match self {
            Self::Triangular(u) => u.membership(x),
            Self::Parametric(u) => u.membership(x),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        match self {
            Self::Triangular(u) => Self::Triangular(u.scale(c)),
            Self::Parametric(u) => Self::Parametric(u.scale(c)),
        }
    }

    pub fn shift(&self, c: f64) -> Self {
        match self {
            Self::Triangular(u) => Self::Triangular(u.shift(c)),
            Self::Parametric(u) => Self::Parametric(u.shift(c)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Self::Triangular(a), Self::Triangular(b)) => Self::Triangular(a.add(b)),
            (Self::Parametric(a), Self::Parametric(b)) => Self::Parametric(a.add(b)),
            (Self::Triangular(a), Self::Parametric(b)) => Self::Parametric(a.to_parametric().add(b)),
            (Self::Parametric(a), Self::Triangular(b)) => Self::Parametric(a.add(&b.to_parametric())),
        }
    }

    /// Splits `u` into its vertex and the part of `u` centred on zero, so that
    /// `u = vertex + uncertain`.
    pub fn split_crisp(&self) -> (f64, FuzzyNumber) {
        let v = self.vertex();
        let uncertain = match self.shift(-v) {
            Self::Parametric(mut p) => {
                let k = p.alphas.len();
                p.lower[k - 1] = 0.0;
                p.upper[k - 1] = 0.0;
                Self::Parametric(p)
            }
            Self::Triangular(t) => Self::Triangular(TriangularFuzzyNumber { peak: 0.0, ..t }),
        };
        (v, uncertain)
    }

    /// Stored α levels: `{0, 1}` for triangular numbers.
    pub fn levels(&self) -> Vec<f64> {
        match self {
            Self::Triangular(_) => vec![0.0, 1.0],
            Self::Parametric(u) => u.alphas.clone(),
        }
    }
}

impl From<TriangularFuzzyNumber> for FuzzyNumber {
    fn from(u: TriangularFuzzyNumber) -> Self {
        Self::Triangular(u)
    }
}

impl From<ParametricFuzzyNumber> for FuzzyNumber {
    fn from(u: ParametricFuzzyNumber) -> Self {
        Self::Parametric(u)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum FuzzyNumberRepr {
    Triangular {
        l: f64,
        m: f64,
        r: f64,
    },
    Parametric {
        alphas: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl TryFrom<FuzzyNumberRepr> for FuzzyNumber {
    type Error = FuzzyError;

    fn try_from(repr: FuzzyNumberRepr) -> Result<Self, FuzzyError> {
        match repr {
            FuzzyNumberRepr::Triangular { l, m, r } => FuzzyNumber::triangular(l, m, r),
            FuzzyNumberRepr::Parametric {
                alphas,
                lower,
                upper,
            } => ParametricFuzzyNumber::new(alphas, lower, upper).map(FuzzyNumber::Parametric),
        }
    }
}

impl From<FuzzyNumber> for FuzzyNumberRepr {
    fn from(u: FuzzyNumber) -> Self {
        match u {
            FuzzyNumber::Triangular(t) => FuzzyNumberRepr::Triangular {
                l: t.left,
                m: t.peak,
                r: t.right,
            },
            FuzzyNumber::Parametric(p) => FuzzyNumberRepr::Parametric {
                alphas: p.alphas,
                lower: p.lower,
                upper: p.upper,
            },
        }
    }
}
