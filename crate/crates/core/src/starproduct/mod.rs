//! The Moyal star product and bracket, the classical-limit fit, the quantum
//! symplectic membership test and the flat Moyal measure.

mod fit;
mod grid;
mod product;
mod symplectic;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{parse_rational, rational_from_f64};
use crate::geometry::{liouville_measure, MeasureDescriptor, PhaseSpace};

pub use fit::classical_limit_fit;
pub use grid::grid_moyal_product;
pub use product::{
    moyal_bracket, moyal_bracket_symbolic, moyal_product, moyal_product_symbolic, trace_residual,
    twisted_bracket, twisted_product,
};
pub use symplectic::{compose_affine_fourier, quantum_symplectic_check};

/// The deformation parameter; kept exactly so symbolic results stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Hbar {
    exact: BigRational,
    value: f64,
}

impl Hbar {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Config(format!("hbar must be a finite nonnegative number, got {value}")));
        }
        Ok(Self { exact: rational_from_f64(value)?, value })
    }

    pub fn zero() -> Self {
        Self { exact: BigRational::zero(), value: 0.0 }
    }

    /// Parses decimal or fractional text exactly, so `0.2` means 1/5.
    pub fn parse(text: &str) -> Result<Self> {
        let exact = parse_rational(text)?;
        if exact < BigRational::zero() {
            return Err(Error::Config(format!("hbar must be nonnegative, got {text}")));
        }
        let value = exact.to_f64().unwrap_or(f64::NAN);
        Ok(Self { exact, value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }
}

/// Settings for the grid product path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StarConfig {
    /// Highest order kept in the bidifferential series on grids.
    pub truncation_order: u32,
    /// Route grid inputs through the exact twisted Fourier product.
    pub fourier_exact: bool,
}

impl Default for StarConfig {
    fn default() -> Self {
        Self { truncation_order: 8, fourier_exact: true }
    }
}

/// The Moyal measure of a flat phase space.
///
/// On flat spaces this is the Liouville measure itself; what makes it the
/// right invariant state is the trace property `∫ f⋆g = ∫ f·g`, which
/// [`trace_residual`] measures.
pub fn moyal_measure(space: &PhaseSpace, _hbar: &Hbar) -> MeasureDescriptor {
    liouville_measure(space)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_validation() {
        assert!(Hbar::new(-0.1).is_err());
        assert!(Hbar::new(f64::NAN).is_err());
        assert!(Hbar::parse("-1/2").is_err());
        let h = Hbar::parse("0.2").unwrap();
        assert_eq!(h.exact(), &crate::exact::rat(1, 5));
        assert_eq!(h.value(), 0.2);
    }

    #[test]
    fn moyal_measure_is_liouville() {
        let t = PhaseSpace::standard_torus(16).unwrap();
        assert_eq!(moyal_measure(&t, &Hbar::zero()), liouville_measure(&t));
        let m = moyal_measure(&t, &Hbar::new(0.3).unwrap());
        assert_eq!(m.density, 1.0);
        assert!((m.total_mass - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
