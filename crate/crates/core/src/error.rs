use thiserror::Error;

/// Errors raised by grid construction, transforms, the stepper and the oracles.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("odd {axis} count: {n} (lattice counts must be even)")]
    OddCount { axis: &'static str, n: usize },

    #[error("{axis} count {n} too small, need at least 8")]
    CountTooSmall { axis: &'static str, n: usize },

    #[error("degenerate {axis} bounds [{lo}, {hi}]")]
    BadBounds { axis: &'static str, lo: f64, hi: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("non-real field: imaginary residue {residue:.3e} exceeds {tolerance:.3e}")]
    NonRealField { residue: f64, tolerance: f64 },

    #[error("non-differentiable kernel: the exponential damping has no second derivative at zero")]
    NonDifferentiableKernel,

    #[error("grid clips initial packet: analytic mass {mass:.3e} outside the domain")]
    GridClipsPacket { mass: f64 },

    #[error("non-real transform: imaginary residue {residue:.3e} exceeds {tolerance:.3e}")]
    NonRealTransform { residue: f64, tolerance: f64 },

    #[error("flat-potential closed forms called with a barrier present")]
    NonFlatPotential,

    #[error("the wavefunction oracle only covers the coherent kernel")]
    NonCoherentKernel,

    #[error("non-finite field values after step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("t_final {t_final} is not an integer multiple of dt {dt}")]
    BadSchedule { t_final: f64, dt: f64 },

    #[error("snapshot time {t} outside [0, {t_final}]")]
    SnapshotOutOfRange { t: f64, t_final: f64 },

    #[error("reference momentum must be positive, got {p0}")]
    BadReferenceMomentum { p0: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
