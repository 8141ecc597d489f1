//! The linear differential operator
//! `x⁽ⁿ⁾ + a₁(t)x⁽ⁿ⁻¹⁾ + … + aₙ(t)x = f(t)`.

use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquationError {
    #[error("equation order must be at least 1")]
    ZeroOrder,
    #[error("coefficient a{index}: {source}")]
    Coefficient { index: usize, source: ParseError },
    #[error("forcing term: {0}")]
    Forcing(ParseError),
}

/// Linear ODE of order `n = coeffs.len()` with leading coefficient 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOde {
    coeffs: Vec<Expr>,
    forcing: Expr,
}

impl LinearOde {
    pub fn new(coeffs: Vec<Expr>, forcing: Expr) -> Result<Self, EquationError> {
        if coeffs.is_empty() {
            return Err(EquationError::ZeroOrder);
        }
        Ok(Self { coeffs, forcing })
    }

    /// Parses `a₁ … aₙ` and `f` from strings.
    pub fn parse(coeffs: &[&str], forcing: &str) -> Result<Self, EquationError> {
        let coeffs = coeffs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Expr::parse(s).map_err(|source| EquationError::Coefficient {
                    index: i + 1,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let forcing = Expr::parse(forcing).map_err(EquationError::Forcing)?;
        Self::new(coeffs, forcing)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn forcing(&self) -> &Expr {
        &self.forcing
    }

    /// Same operator with `f ≡ 0`.
    pub fn homogeneous(&self) -> Self {
        Self {
            coeffs: self.coeffs.clone(),
            forcing: Expr::constant(0.0),
        }
    }

    /// Writes `a₁(t) … aₙ(t)` into `out`.
    pub fn coefficients_at(&self, t: f64, out: &mut [f64]) -> Result<(), EvalError> {
        for (slot, a) in out.iter_mut().zip(&self.coeffs) {
            *slot = a.eval(t)?;
        }
        Ok(())
    }

    pub fn forcing_at(&self, t: f64) -> Result<f64, EvalError> {
        self.forcing.eval(t)
    }

    /// `f(t) − Σ aᵢ(t)·x⁽ⁿ⁻ⁱ⁾` for a state `(x, x′, …, x⁽ⁿ⁻¹⁾)`, i.e. the
    /// highest derivative implied by the equation.
    pub fn highest_derivative(&self, t: f64, state: &[f64], forced: bool) -> Result<f64, EvalError> {
        let n = self.order();
        let mut acc = if forced { self.forcing.eval(t)? } else { 0.0 };
        for (i, a) in self.coeffs.iter().enumerate() {
            acc -= a.eval(t)? * state[n - 1 - i];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_operators() {
        let ode = LinearOde::parse(&["-3", "2"], "4*t - 6").unwrap();
        assert_eq!(ode.order(), 2);
        // x = 2t is a particular solution: x'' = 0, so x'' = f - a1 x' - a2 x = 0.
        let t = 0.7;
        let x2 = ode.highest_derivative(t, &[2.0 * t, 2.0], true).unwrap();
        assert!(x2.abs() < 1e-14);
        assert_eq!(ode.highest_derivative(t, &[0.0, 0.0], false).unwrap(), 0.0);

        let mut a = [0.0; 2];
        ode.coefficients_at(1.0, &mut a).unwrap();
        assert_eq!(a, [-3.0, 2.0]);
    }

    #[test]
    fn rejects_empty_and_bad_expressions() {
        assert_eq!(
            LinearOde::parse(&[], "0"),
            Err(EquationError::ZeroOrder)
        );
        assert!(matches!(
            LinearOde::parse(&["1", "q"], "0"),
            Err(EquationError::Coefficient { index: 2, .. })
        ));
        assert!(matches!(
            LinearOde::parse(&["1"], "t +"),
            Err(EquationError::Forcing(_))
        ));
    }
}
