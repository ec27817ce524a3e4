//! Phase-space discretization and the momentum <-> correlation-variable
//! transform pair.
//!
//! The lattice is uniform in both directions: `x_i = x_min + i*dx`,
//! `p_j = p_min + j*dp`, with `dx = (x_max - x_min)/n_x` and
//! `dp = (p_max - p_min)/n_p` (right endpoints excluded, periodic
//! convention). The correlation variable conjugate to `p` lives on
//! `eta_k = k*d_eta` for `k in -n_p/2 .. n_p/2 - 1`, with
//! `d_eta = 2*pi*hbar / (n_p*dp)` so that `d_eta*dp*n_p = 2*pi*hbar`
//! holds exactly.
//!
//! Transform convention: `g(eta) = dp * sum_j f(p_j) exp(i*eta*p_j/hbar)`,
//! which makes `g(x, 0)` the momentum-integrated density contribution at
//! that `x` and the inverse an exact discrete inversion.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::quad::pairwise_sum_by;

/// Uniform (x, p) lattice plus the conjugate correlation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
    pub hbar: f64,
    pub dx: f64,
    pub dp: f64,
    pub d_eta: f64,
}

/// `build_grid`: validates bounds and counts, derives spacings.
pub fn build_grid(
    x_min: f64,
    x_max: f64,
    n_x: usize,
    p_min: f64,
    p_max: f64,
    n_p: usize,
    hbar: f64,
) -> Result<PhaseSpaceGrid> {
    PhaseSpaceGrid::new(x_min, x_max, n_x, p_min, p_max, n_p, hbar)
}

impl PhaseSpaceGrid {
    pub fn new(
        x_min: f64,
        x_max: f64,
        n_x: usize,
        p_min: f64,
        p_max: f64,
        n_p: usize,
        hbar: f64,
    ) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(CoreError::BadBounds { axis: "position", lo: x_min, hi: x_max });
        }
        if !(p_min < p_max) {
            return Err(CoreError::BadBounds { axis: "momentum", lo: p_min, hi: p_max });
        }
        if n_x % 2 != 0 {
            return Err(CoreError::OddCount { axis: "position", n: n_x });
        }
        if n_p % 2 != 0 {
            return Err(CoreError::OddCount { axis: "momentum", n: n_p });
        }
        if n_x < 8 {
            return Err(CoreError::CountTooSmall { axis: "position", n: n_x });
        }
        if n_p < 8 {
            return Err(CoreError::CountTooSmall { axis: "momentum", n: n_p });
        }
        if !(hbar > 0.0) {
            return Err(CoreError::NonPositive { name: "hbar", value: hbar });
        }
        let dx = (x_max - x_min) / n_x as f64;
        let dp = (p_max - p_min) / n_p as f64;
        let d_eta = 2.0 * PI * hbar / (n_p as f64 * dp);
        Ok(Self { x_min, x_max, n_x, p_min, p_max, n_p, hbar, dx, dp, d_eta })
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    #[inline]
    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp
    }

    /// eta at slot `m` of the ascending lattice, `m in 0..n_p`;
    /// `eta = (m - n_p/2) * d_eta`.
    #[inline]
    pub fn eta(&self, m: usize) -> f64 {
        (m as f64 - (self.n_p / 2) as f64) * self.d_eta
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn etas(&self) -> Vec<f64> {
        (0..self.n_p).map(|m| self.eta(m)).collect()
    }

    /// Phase-space cell area `dx*dp` of the rectangle rule.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.dx * self.dp
    }

    /// Domain length in x (the period of the spectral shift).
    #[inline]
    pub fn len_x(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Real-valued distribution f(x, p) on a grid. Row `i` is fixed `x_i`,
/// column `j` is fixed `p_j`. Entries may be negative.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Array2<f64>,
    pub time: f64,
}

impl WignerField {
    pub fn zeros(grid: PhaseSpaceGrid) -> Self {
        let values = Array2::zeros((grid.n_x, grid.n_p));
        Self { grid, values, time: 0.0 }
    }

    /// Discrete phase-space integral (rectangle rule).
    pub fn norm(&self) -> f64 {
        let v = self.values.as_slice().expect("row-major field");
        pairwise_sum_by(v.len(), |i| v[i]) * self.grid.cell()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Planned transform between a momentum row and the correlation variable.
///
/// Rows are independent; one `RowTransform` may be shared across threads.
pub struct RowTransform {
    n_p: usize,
    dp: f64,
    /// phase(m) = exp(i * eta_m * p_min / hbar) on the ascending eta lattice
    phase: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl RowTransform {
    pub fn new(grid: &PhaseSpaceGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n_p);
        let inv = planner.plan_fft_inverse(grid.n_p);
        let phase = (0..grid.n_p)
            .map(|m| Complex64::from_polar(1.0, grid.eta(m) * grid.p_min / grid.hbar))
            .collect();
        Self { n_p: grid.n_p, dp: grid.dp, phase, fwd, inv }
    }

    /// g(eta_m) = dp * sum_j f(p_j) exp(i eta_m p_j / hbar), ascending eta.
    pub fn p_to_eta(&self, row: &[f64]) -> Result<Vec<Complex64>> {
        if row.len() != self.n_p {
            return Err(CoreError::ShapeMismatch { expected: self.n_p, got: row.len() });
        }
        let n = self.n_p;
        let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        // Unnormalized inverse DFT gives S_k = sum_j f_j e^{+2pi i jk/n}.
        self.inv.process(&mut buf);
        let mut out = vec![Complex64::default(); n];
        for (m, o) in out.iter_mut().enumerate() {
            let k = (m + n / 2) % n; // signed frequency m - n/2, wrapped
            *o = self.dp * self.phase[m] * buf[k];
        }
        Ok(out)
    }

    /// Exact discrete inverse of [`Self::p_to_eta`]. The imaginary residue of
    /// the reconstruction must stay below `1e-8 * max |f|`; a larger residue
    /// means the multiplier applied in eta space broke conjugate symmetry.
    pub fn eta_to_p(&self, g: &[Complex64]) -> Result<Vec<f64>> {
        if g.len() != self.n_p {
            return Err(CoreError::ShapeMismatch { expected: self.n_p, got: g.len() });
        }
        let n = self.n_p;
        let mut buf = vec![Complex64::default(); n];
        for (m, &gm) in g.iter().enumerate() {
            let k = (m + n / 2) % n;
            buf[k] = gm * self.phase[m].conj() / self.dp;
        }
        self.fwd.process(&mut buf);
        let scale = 1.0 / n as f64;
        let mut max_im = 0.0f64;
        let mut max_mod = 0.0f64;
        for v in &buf {
            max_im = max_im.max(v.im.abs());
            max_mod = max_mod.max(v.norm_sqr());
        }
        let max_mod = max_mod.sqrt();
        let tolerance = 1e-8 * max_mod;
        if max_im > tolerance {
            return Err(CoreError::NonRealField {
                residue: max_im * scale,
                tolerance: tolerance * scale,
            });
        }
        Ok(buf.iter().map(|v| v.re * scale).collect())
    }
}

/// Convenience wrappers planning a transform per call; prefer sharing a
/// [`RowTransform`] in loops.
pub fn p_to_eta(grid: &PhaseSpaceGrid, row: &[f64]) -> Result<Vec<Complex64>> {
    RowTransform::new(grid).p_to_eta(row)
}

pub fn eta_to_p(grid: &PhaseSpaceGrid, g: &[Complex64]) -> Result<Vec<f64>> {
    RowTransform::new(grid).eta_to_p(g)
}
