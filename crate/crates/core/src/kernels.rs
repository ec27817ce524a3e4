//! Correlation-damping kernel family Delta_lambda(eta).
//!
//! Every shipped variant is real, even and equals 1 at eta = 0, so the
//! collision factor preserves density and the kick step stays real. The
//! quadratic variant keeps a first-order coefficient so that the general
//! moment-shift formulas can be exercised, but shipped configurations force
//! it to zero: an odd real term in the symbol breaks the conjugate symmetry
//! that the inverse transform requires.

use crate::error::{CoreError, Result};
use crate::grid::{RowTransform, WignerField};
use crate::quad::for_each_chunk_mut;

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKernel {
    /// Infinite correlation length: Delta == 1, collisions are a no-op.
    Coherent,
    /// Delta(eta) = 1 / cosh(eta / lambda).
    Sech { lambda: f64 },
    /// Delta(eta) = exp(-|eta| / lambda); no curvature at zero.
    Exponential { lambda: f64 },
    /// Delta(eta) = max(0, 1 + lambda1*eta - lambda2*eta^2), clamped to 0
    /// beyond `cutoff`.
    Quadratic { lambda1: f64, lambda2: f64, cutoff: f64 },
}

impl CorrelationKernel {
    pub fn coherent() -> Self {
        Self::Coherent
    }

    pub fn sech(lambda: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        Ok(Self::Sech { lambda })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        Ok(Self::Exponential { lambda })
    }

    /// Quadratic kernel with lambda1 = 0 and the cutoff at its positive root,
    /// which keeps |Delta| <= 1 and the collision factor a contraction.
    pub fn quadratic(lambda2: f64) -> Result<Self> {
        check_positive("lambda2", lambda2)?;
        Ok(Self::Quadratic { lambda1: 0.0, lambda2, cutoff: (1.0 / lambda2).sqrt() })
    }

    /// Quadratic kernel with explicit coefficients (test use; lambda1 != 0
    /// makes the damped field complex).
    pub fn quadratic_with(lambda1: f64, lambda2: f64, cutoff: f64) -> Result<Self> {
        check_positive("lambda2", lambda2)?;
        check_positive("cutoff", cutoff)?;
        Ok(Self::Quadratic { lambda1, lambda2, cutoff })
    }

    /// Evaluate Delta_lambda at eta.
    pub fn eval_delta(&self, eta: f64) -> f64 {
        match *self {
            Self::Coherent => 1.0,
            Self::Sech { lambda } => 1.0 / (eta / lambda).cosh(),
            Self::Exponential { lambda } => (-eta.abs() / lambda).exp(),
            Self::Quadratic { lambda1, lambda2, cutoff } => {
                if eta.abs() > cutoff {
                    0.0
                } else {
                    (1.0 + lambda1 * eta - lambda2 * eta * eta).max(0.0)
                }
            }
        }
    }

    /// Expansion coefficients (Lambda_1, Lambda_2) of
    /// Delta(eta) ~ 1 + i*Lambda_1*eta - Lambda_2*eta^2 near zero.
    pub fn lambda_coeffs(&self) -> Result<(f64, f64)> {
        match *self {
            Self::Coherent => Ok((0.0, 0.0)),
            Self::Sech { lambda } => Ok((0.0, 1.0 / (2.0 * lambda * lambda))),
            Self::Exponential { .. } => Err(CoreError::NonDifferentiableKernel),
            Self::Quadratic { lambda1, lambda2, .. } => Ok((lambda1, lambda2)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Coherent => "coherent",
            Self::Sech { .. } => "sech",
            Self::Exponential { .. } => "exponential",
            Self::Quadratic { .. } => "quadratic",
        }
    }

    /// Correlation length, if the variant carries one.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Self::Coherent => None,
            Self::Sech { lambda } | Self::Exponential { lambda } => Some(lambda),
            Self::Quadratic { .. } => None,
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CoreError::NonPositive { name, value })
    }
}

/// Momentum convolution f -> f_lambda, computed row by row as
/// `eta_to_p(Delta(eta) * p_to_eta(row))`. The time stamp is unchanged.
pub fn convolve_with_kernel(
    field: &WignerField,
    kernel: &CorrelationKernel,
) -> Result<WignerField> {
    let grid = &field.grid;
    let transform = RowTransform::new(grid);
    let delta: Vec<f64> = (0..grid.n_p).map(|m| kernel.eval_delta(grid.eta(m))).collect();

    let n_x = grid.n_x;
    let n_p = grid.n_p;
    let mut out = field.values.as_slice().expect("row-major field").to_vec();
    let first_err: std::sync::Mutex<Option<CoreError>> = std::sync::Mutex::new(None);

    for_each_chunk_mut(&mut out, 64 * n_p, |_, chunk| {
        for row in chunk.chunks_mut(n_p) {
            let damped = transform.p_to_eta(row).and_then(|mut g| {
                for (gm, d) in g.iter_mut().zip(&delta) {
                    *gm *= *d;
                }
                transform.eta_to_p(&g)
            });
            match damped {
                Ok(r) => row.copy_from_slice(&r),
                Err(e) => {
                    let mut slot = first_err.lock().unwrap();
                    if slot.is_none() {
                        *slot = Some(e);
                    }
                }
            }
        }
    });

    if let Some(e) = first_err.into_inner().unwrap() {
        return Err(e);
    }
    let values = ndarray::Array2::from_shape_vec((n_x, n_p), out).expect("shape");
    Ok(WignerField { grid: grid.clone(), values, time: field.time })
}
