//! Alikhanov (L2-1σ) convolution weights on nonuniform meshes.
//!
//! The discrete Caputo derivative at the star point `t_n^*` is
//! `sum_{j=1}^{n} g_{n-1,j-1} (U^j - U^{j-1})`. The weights come from
//! quadratic interpolation on every history interval and linear
//! interpolation on the current one.

mod audit;
mod coeffs;
mod recurrence;
mod weights;

pub use audit::{audit_properties, PropertyCheck, PropertyReport, PI_A};
pub use coeffs::{a_coeff, b_coeff, odd_moment, Method};
pub use recurrence::{
    is_admissible, solve_scalar_recurrence, RecurrenceResult, RecurrenceSpec,
};
pub use weights::{
    apply_discrete_derivative, assemble_weights, write_weights_csv, AlikhanovWeights, WeightTable,
};

use crate::error::{invalid, Result};

/// Fractional order and the star-point offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    alpha: f64,
    sigma: f64,
    gamma_1ma: f64,
    gamma_2ma: f64,
}

impl SchemeParams {
    /// `sigma = 1 - alpha/2`, the second-order choice.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_sigma(alpha, 1.0 - alpha / 2.0)
    }

    pub fn with_sigma(alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        if !(0.5..=1.0).contains(&sigma) {
            return Err(invalid("sigma", format!("must lie in [1/2, 1], got {sigma}")));
        }
        Ok(Self {
            alpha,
            sigma,
            gamma_1ma: libm::tgamma(1.0 - alpha),
            gamma_2ma: libm::tgamma(2.0 - alpha),
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `Γ(1 - alpha)`.
    #[inline]
    pub fn gamma_1ma(&self) -> f64 {
        self.gamma_1ma
    }

    /// `Γ(2 - alpha)`.
    #[inline]
    pub fn gamma_2ma(&self) -> f64 {
        self.gamma_2ma
    }

    /// Whether sigma is exactly the second-order value `1 - alpha/2`.
    pub fn is_second_order(&self) -> bool {
        self.sigma == 1.0 - self.alpha / 2.0
    }
}
