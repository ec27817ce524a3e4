//! Independent references for validation.
//!
//! * A split-operator wavefunction propagator on the solver's x-grid for the
//!   coherent case (no dynamics shared with the phase-space stepper beyond
//!   the lattice and the time step, so discrepancies isolate formulation
//!   errors rather than resolution mismatches).
//! * The discrete Wigner-Weyl transform mapping a wavefunction onto the
//!   shared (x, p) lattice, with the relative coordinate evaluated by index
//!   arithmetic (eta = even multiples of dx), avoiding interpolation.
//! * Closed-form moment trajectories for flat-potential runs.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::grid::{PhaseSpaceGrid, WignerField};
use crate::kernels::CorrelationKernel;
use crate::observables::MomentRecord;
use crate::quad::{for_each_chunk_mut, pairwise_sum_by};
use crate::solver::SimulationConfig;

pub struct WavefunctionRun {
    pub series: Vec<MomentRecord>,
    /// Requested wavefunction snapshots, as (time, psi).
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
    pub final_psi: Vec<Complex64>,
}

/// Normalized minimum-uncertainty packet matching the solver's initial datum:
/// |psi|^2 has position variance (hbar/(2 sigma0))^2 and the momentum
/// distribution has standard deviation sigma0 around p0.
pub fn initial_wavefunction(config: &SimulationConfig) -> Vec<Complex64> {
    let g = &config.grid;
    let sp = config.sigma0;
    let p0 = config.p0();
    let amp = (2.0 * sp * sp / (PI * g.hbar * g.hbar)).powf(0.25);
    let mut psi: Vec<Complex64> = (0..g.n_x)
        .map(|i| {
            let d = g.x(i) - config.x0;
            let envelope = amp * (-(sp * sp) * d * d / (g.hbar * g.hbar)).exp();
            envelope * Complex64::from_polar(1.0, p0 * d / g.hbar)
        })
        .collect();
    let norm = (g.dx * pairwise_sum_by(g.n_x, |i| psi[i].norm_sqr())).sqrt();
    for v in &mut psi {
        *v /= norm;
    }
    psi
}

/// Propagates the wavefunction under -(hbar^2/2) d2/dx2 + V with Strang
/// kinetic/potential splitting on the shared x-grid and time step.
/// Records moments on the configured stride; only the coherent kernel is
/// accepted.
pub fn schrodinger_run(
    config: &SimulationConfig,
    psi_times: &[f64],
) -> Result<WavefunctionRun> {
    if config.kernel != CorrelationKernel::Coherent {
        return Err(CoreError::NonCoherentKernel);
    }
    config.validate()?;
    let g = &config.grid;
    let n = g.n_x;
    let n_steps = config.n_steps()?;
    let dt = config.dt;

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // Signed wavenumbers of the x lattice; momentum = hbar * k.
    let k: Vec<f64> = (0..n)
        .map(|m| {
            let signed = if m <= n / 2 { m as isize } else { m as isize - n as isize };
            2.0 * PI * signed as f64 / g.len_x()
        })
        .collect();
    let kinetic_half: Vec<Complex64> = k
        .iter()
        .map(|&km| Complex64::from_polar(1.0, -0.25 * g.hbar * km * km * dt) / n as f64)
        .collect();
    let potential_phase: Vec<Complex64> = (0..n)
        .map(|i| {
            let v = config.barrier.as_ref().map_or(0.0, |b| b.eval_potential(g.x(i)));
            Complex64::from_polar(1.0, -v * dt / g.hbar)
        })
        .collect();

    let mut psi = initial_wavefunction(config);
    let mut spec = vec![Complex64::default(); n];

    let snap_steps: Vec<usize> = psi_times
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(n_steps))
        .collect();

    let stride = config.moment_stride.max(1);
    let mut series = Vec::new();
    let mut snapshots = Vec::new();

    let mut record = |step: usize, psi: &[Complex64], snapshots: &mut Vec<(f64, Vec<Complex64>)>| {
        let t = step as f64 * dt;
        if step % stride == 0 || step == n_steps {
            series.push(wavefunction_moments(g, psi, t, &fwd, &inv, &k));
        }
        for &s in &snap_steps {
            if s == step && !snapshots.iter().any(|(tt, _)| *tt == t) {
                snapshots.push((t, psi.to_vec()));
            }
        }
    };
    record(0, &psi, &mut snapshots);

    for step in 1..=n_steps {
        // half kinetic
        spec.copy_from_slice(&psi);
        fwd.process(&mut spec);
        for (s, kh) in spec.iter_mut().zip(&kinetic_half) {
            *s *= kh;
        }
        inv.process(&mut spec);
        // potential
        for (s, vp) in spec.iter_mut().zip(&potential_phase) {
            *s *= vp;
        }
        // half kinetic
        fwd.process(&mut spec);
        for (s, kh) in spec.iter_mut().zip(&kinetic_half) {
            *s *= kh;
        }
        inv.process(&mut spec);
        psi.copy_from_slice(&spec);
        record(step, &psi, &mut snapshots);
    }

    Ok(WavefunctionRun { series, snapshots, final_psi: psi })
}

/// Position/momentum averages and spreads of a wavefunction, via the density
/// |psi|^2 and the momentum spectrum; the covariance uses the symmetrized
/// product Re <x p>.
fn wavefunction_moments(
    g: &PhaseSpaceGrid,
    psi: &[Complex64],
    t: f64,
    fwd: &Arc<dyn Fft<f64>>,
    inv: &Arc<dyn Fft<f64>>,
    k: &[f64],
) -> MomentRecord {
    let n = g.n_x;
    let norm = g.dx * pairwise_sum_by(n, |i| psi[i].norm_sqr());
    let x_avg = g.dx * pairwise_sum_by(n, |i| g.x(i) * psi[i].norm_sqr()) / norm;
    let sigma20 = g.dx
        * pairwise_sum_by(n, |i| {
            let d = g.x(i) - x_avg;
            d * d * psi[i].norm_sqr()
        })
        / norm;

    let mut spec = psi.to_vec();
    fwd.process(&mut spec);
    let spec_weight = pairwise_sum_by(n, |m| spec[m].norm_sqr());
    let p_avg = pairwise_sum_by(n, |m| g.hbar * k[m] * spec[m].norm_sqr()) / spec_weight;
    let sigma02 = pairwise_sum_by(n, |m| {
        let d = g.hbar * k[m] - p_avg;
        d * d * spec[m].norm_sqr()
    }) / spec_weight;

    // p-hat psi in position space, for the covariance.
    let mut ppsi = spec;
    for (v, &km) in ppsi.iter_mut().zip(k) {
        *v *= g.hbar * km / n as f64;
    }
    inv.process(&mut ppsi);
    let xp = g.dx
        * pairwise_sum_by(n, |i| (g.x(i) * psi[i].conj() * ppsi[i]).re)
        / norm;
    let sigma11 = xp - x_avg * p_avg;

    MomentRecord {
        t,
        x_avg,
        p_avg,
        sigma20,
        sigma02,
        sigma11,
        norm,
        energy: 0.5 * (sigma02 + p_avg * p_avg) * norm,
    }
}

/// Moments of a wavefunction run, exposed for cross-checks.
pub fn psi_moments(g: &PhaseSpaceGrid, psi: &[Complex64], t: f64) -> MomentRecord {
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(g.n_x);
    let inv = planner.plan_fft_inverse(g.n_x);
    let k: Vec<f64> = (0..g.n_x)
        .map(|m| {
            let signed = if m <= g.n_x / 2 { m as isize } else { m as isize - g.n_x as isize };
            2.0 * PI * signed as f64 / g.len_x()
        })
        .collect();
    wavefunction_moments(g, psi, t, &fwd, &inv, &k)
}

/// Discrete Wigner-Weyl transform of a wavefunction onto the shared grid:
///
/// f(x_i, p_j) = (dx / (pi hbar)) * sum_k psi(x_{i+k}) conj(psi(x_{i-k}))
///               exp(-i 2k dx p_j / hbar)
///
/// The correlation index never wraps: k runs to the nearer domain edge,
/// which is the transform of the zero-padded wavefunction. Wrapping would
/// alias a spurious packet image at the antipodal position (the correlation
/// lattice of a periodic state is finer than the p lattice in use). Each
/// +k/-k pair of correlations is conjugate, so the sum is real term by
/// term; non-finite input would silently break that pairing and is
/// rejected.
pub fn wigner_transform(psi: &[Complex64], grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let n = grid.n_x;
    if psi.len() != n {
        return Err(CoreError::ShapeMismatch { expected: n, got: psi.len() });
    }
    if let Some(bad) = psi.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(CoreError::NonRealTransform {
            residue: bad.norm_sqr(),
            tolerance: 0.0,
        });
    }
    let half = n / 2;
    let scale = grid.dx / (PI * grid.hbar);

    // Phasors exp(-i 2k dx p_j / hbar) for k = 0..half, per momentum row.
    let n_p = grid.n_p;
    let mut phasor = vec![Complex64::default(); n_p * half];
    for j in 0..n_p {
        let theta = 2.0 * grid.dx * grid.p(j) / grid.hbar;
        for k in 0..half {
            phasor[j * half + k] = Complex64::from_polar(1.0, -theta * k as f64);
        }
    }

    let mut values = vec![0.0f64; n * n_p];
    const ROWS: usize = 16;
    for_each_chunk_mut(&mut values, ROWS * n_p, |chunk_idx, chunk| {
        let mut corr = vec![Complex64::default(); half];
        for (r, row) in chunk.chunks_mut(n_p).enumerate() {
            let i = chunk_idx * ROWS + r;
            let k_lim = i.min(n - 1 - i).min(half - 1);
            for (k, c) in corr.iter_mut().enumerate().take(k_lim + 1) {
                *c = psi[i + k] * psi[i - k].conj();
            }
            for (j, slot) in row.iter_mut().enumerate() {
                let ph = &phasor[j * half..(j + 1) * half];
                let mut re2 = 0.0;
                for k in 1..=k_lim {
                    re2 += corr[k].re * ph[k].re - corr[k].im * ph[k].im;
                }
                *slot = scale * (corr[0].re + 2.0 * re2);
            }
        }
    });

    let values = Array2::from_shape_vec((n, n_p), values).expect("shape");
    Ok(WignerField { grid: grid.clone(), values, time: 0.0 })
}

/// Closed-form moment trajectory for a flat potential: the mean follows free
/// motion, the momentum variance grows linearly at rate 2 hbar^2 Lambda2/tau
/// and the position moments integrate it.
pub fn flat_potential_moments(config: &SimulationConfig, t: f64) -> Result<MomentRecord> {
    if config.barrier.is_some() {
        return Err(CoreError::NonFlatPotential);
    }
    let (l1, l2) = config.kernel.lambda_coeffs()?;
    let hbar = config.grid.hbar;
    let p0 = config.p0();
    let tau = config.tau;

    let rate = 2.0 * hbar * hbar * l2 / tau;
    let s02_0 = config.sigma0 * config.sigma0;
    let s20_0 = hbar * hbar / (4.0 * s02_0);

    let p_avg = p0 + hbar * l1 * t / tau;
    let x_avg = config.x0 + p0 * t + 0.5 * hbar * l1 * t * t / tau;
    let sigma02 = s02_0 + rate * t;
    let sigma11 = s02_0 * t + 0.5 * rate * t * t;
    let sigma20 = s20_0 + s02_0 * t * t + rate * t * t * t / 3.0;

    Ok(MomentRecord {
        t,
        x_avg,
        p_avg,
        sigma20,
        sigma02,
        sigma11,
        norm: 1.0,
        energy: 0.5 * (sigma02 + p_avg * p_avg),
    })
}
