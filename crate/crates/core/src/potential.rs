//! Gaussian barrier and its splitting symbol.
//!
//! The barrier height is 1 in dimensionless units (energies are measured in
//! units of the barrier height); only the width `a` varies.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    a: f64,
}

impl Barrier {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(Self { a })
        } else {
            Err(CoreError::NonPositive { name: "barrier_width", value: a })
        }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.a
    }

    /// V(x) = exp(-x^2 / a^2).
    #[inline]
    pub fn eval_potential(&self, x: f64) -> f64 {
        (-(x * x) / (self.a * self.a)).exp()
    }

    /// delta_v(x, eta) = V(x + eta/2) - V(x - eta/2); odd in eta, and odd in
    /// x for this even barrier. Oddness in eta is what keeps the kick real.
    #[inline]
    pub fn delta_v(&self, x: f64, eta: f64) -> f64 {
        self.eval_potential(x + 0.5 * eta) - self.eval_potential(x - 0.5 * eta)
    }
}
