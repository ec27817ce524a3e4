//! Splitting-scheme integrator for the dimensionless decoherent Wigner
//! equation: exact free-streaming half-steps in x composed with an exact
//! Fourier-space step that applies the potential symbol and the collision
//! damping together.
//!
//! Both sub-flows are diagonal in the right representation, so each step is
//! a pointwise multiply between transforms:
//!
//! * drift: per p-column, multiply the x-spectrum by `exp(-i k p dt)`;
//! * kick: per x-row, multiply the correlation-variable transform by
//!   `exp(-dt * (i dV(x,eta)/hbar + (1 - Delta(eta))/tau))`.
//!
//! Because `dV(x, 0) = 0` and `Delta(0) = 1`, the zero mode of every row is
//! untouched: the kick preserves the density pointwise in x, and the drift
//! preserves column sums, which together make norm conservation structural.
//!
//! Rows and columns are independent, so the inner loops are data-parallel
//! with no cross-lane reductions; results do not depend on scheduling.

use std::collections::BTreeSet;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{CoreError, Result};
use crate::grid::{PhaseSpaceGrid, WignerField};
use crate::kernels::CorrelationKernel;
use crate::observables::{moments_pmajor, MomentRecord};
use crate::potential::Barrier;
use crate::quad::for_each_chunk_mut;

/// Dimensionless physical and numerical parameters of one run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub grid: PhaseSpaceGrid,
    /// Kinetic energy in units of the barrier height; p0 = sqrt(2 E_K).
    pub e_k: f64,
    /// Momentum standard deviation of the initial packet.
    pub sigma0: f64,
    /// Collision time of the decoherence term.
    pub tau: f64,
    pub kernel: CorrelationKernel,
    /// `None` means a flat potential (V = 0).
    pub barrier: Option<Barrier>,
    /// Initial packet center, far left of the barrier.
    pub x0: f64,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    /// Edge-mass level above which a boundary event is recorded.
    pub boundary_threshold: f64,
    /// Record moments every this many steps (>= 1).
    pub moment_stride: usize,
}

impl SimulationConfig {
    /// Initial mean momentum, always derived from the energy.
    #[inline]
    pub fn p0(&self) -> f64 {
        (2.0 * self.e_k).sqrt()
    }

    /// Position standard deviation of the minimum-uncertainty packet.
    #[inline]
    pub fn sigma_x(&self) -> f64 {
        self.grid.hbar / (2.0 * self.sigma0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("E_K", self.e_k),
            ("sigma0", self.sigma0),
            ("tau", self.tau),
            ("dt", self.dt),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CoreError::NonPositive { name, value });
            }
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(CoreError::NonPositive { name: "t_final", value: self.t_final });
        }
        if self.moment_stride == 0 {
            return Err(CoreError::NonPositive { name: "moment_stride", value: 0.0 });
        }
        self.n_steps()?;
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_final + 0.5 * self.dt).contains(&t) {
                return Err(CoreError::SnapshotOutOfRange { t, t_final: self.t_final });
            }
        }
        Ok(())
    }

    /// Number of whole steps; `t_final` must sit on the step lattice.
    pub fn n_steps(&self) -> Result<usize> {
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(CoreError::BadSchedule { t_final: self.t_final, dt: self.dt });
        }
        Ok(steps as usize)
    }
}

/// Minimum-uncertainty Gaussian packet with momentum variance sigma0^2 and
/// position variance (hbar / (2 sigma0))^2, centered at (x0, p0), then
/// renormalized so the discrete integral is exactly 1.
pub fn initial_wigner(config: &SimulationConfig) -> Result<WignerField> {
    config.validate()?;
    let g = &config.grid;
    let p0 = config.p0();
    let sx = config.sigma_x();
    let sp = config.sigma0;

    // Analytic mass outside the domain (Gaussian tails; union bound).
    let tail = |z: f64| 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
    let mass_out = tail((g.x_max - config.x0) / sx)
        + tail((config.x0 - g.x_min) / sx)
        + tail((g.p_max - p0) / sp)
        + tail((p0 - g.p_min) / sp);
    if mass_out > 1e-10 {
        return Err(CoreError::GridClipsPacket { mass: mass_out });
    }

    let peak = 1.0 / (std::f64::consts::PI * g.hbar);
    let fx: Vec<f64> = (0..g.n_x)
        .map(|i| {
            let d = g.x(i) - config.x0;
            (-2.0 * sp * sp * d * d / (g.hbar * g.hbar)).exp()
        })
        .collect();
    let fp: Vec<f64> = (0..g.n_p)
        .map(|j| {
            let d = g.p(j) - p0;
            (-d * d / (2.0 * sp * sp)).exp()
        })
        .collect();
    let mut values = Array2::zeros((g.n_x, g.n_p));
    for i in 0..g.n_x {
        for j in 0..g.n_p {
            values[[i, j]] = peak * fx[i] * fp[j];
        }
    }
    let mut field = WignerField { grid: g.clone(), values, time: 0.0 };
    let norm = field.norm();
    field.values.mapv_inplace(|v| v / norm);
    Ok(field)
}

/// Precomputed splitting-scheme stepper for one configuration.
///
/// The kick multiplier and both drift multipliers (half and whole step) are
/// time-independent, so each sub-step is a batch of length-n real FFTs and a
/// pointwise multiply. Multiplier tables fold in the 1/n round-trip gain.
pub struct Stepper {
    grid: PhaseSpaceGrid,
    dt: f64,
    r2c_p: Arc<dyn RealToComplex<f64>>,
    c2r_p: Arc<dyn ComplexToReal<f64>>,
    r2c_x: Arc<dyn RealToComplex<f64>>,
    c2r_x: Arc<dyn ComplexToReal<f64>>,
    /// n_x rows of n_p/2+1 bins (positive-eta half; conjugation covers -eta).
    kick: Vec<Complex64>,
    /// n_p rows of n_x/2+1 bins each.
    drift_half: Vec<Complex64>,
    drift_full: Vec<Complex64>,
    warnings: Vec<String>,
}

const KICK_CHUNK_ROWS: usize = 128;
const DRIFT_CHUNK_ROWS: usize = 32;

impl Stepper {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let g = config.grid.clone();
        let dt = config.dt;
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c_p = planner.plan_fft_forward(g.n_p);
        let c2r_p = planner.plan_fft_inverse(g.n_p);
        let r2c_x = planner.plan_fft_forward(g.n_x);
        let c2r_x = planner.plan_fft_inverse(g.n_x);

        let mut warnings = Vec::new();
        if config.kernel.eval_delta(g.d_eta) < 1e-3 {
            warnings.push(format!(
                "correlation kernel decays below 1e-3 within one d_eta step \
                 (d_eta = {:.4}); the damping curvature is unresolved",
                g.d_eta
            ));
        }

        // Kick table. The r2c bin k holds the forward-FFT coefficient, which
        // is the conjugate of the +eta transform component, so the bin gets
        // the conjugate symbol: exp(+i dt dV(x, eta_k)/hbar) * damping.
        let half_p = g.n_p / 2 + 1;
        let scale_p = 1.0 / g.n_p as f64;
        let mut kick = vec![Complex64::default(); g.n_x * half_p];
        for i in 0..g.n_x {
            let x = g.x(i);
            for k in 0..half_p {
                let eta = k as f64 * g.d_eta;
                let damp = (-dt * (1.0 - config.kernel.eval_delta(eta)) / config.tau).exp();
                let phase = match &config.barrier {
                    Some(b) => dt * b.delta_v(x, eta) / g.hbar,
                    None => 0.0,
                };
                let m = if k == g.n_p / 2 {
                    // Nyquist bin has no mirror partner: keep it real so the
                    // map stays exactly real-to-real (|cos| <= 1 keeps the
                    // contraction).
                    Complex64::new(damp * phase.cos(), 0.0)
                } else {
                    damp * Complex64::from_polar(1.0, phase)
                };
                kick[i * half_p + k] = m * scale_p;
            }
        }

        // Drift tables: shift column p by p*dt/2 (or p*dt when steps fuse).
        let build_drift = |shift_dt: f64| -> Vec<Complex64> {
            let half_x = g.n_x / 2 + 1;
            let scale_x = 1.0 / g.n_x as f64;
            let mut table = vec![Complex64::default(); g.n_p * half_x];
            for j in 0..g.n_p {
                let s = g.p(j) * shift_dt;
                for m in 0..half_x {
                    let k = 2.0 * std::f64::consts::PI * m as f64 / g.len_x();
                    let v = if m == g.n_x / 2 {
                        Complex64::new((k * s).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, -k * s)
                    };
                    table[j * half_x + m] = v * scale_x;
                }
            }
            table
        };
        let drift_half = build_drift(0.5 * dt);
        let drift_full = build_drift(dt);

        Ok(Self {
            grid: g,
            dt,
            r2c_p,
            c2r_p,
            r2c_x,
            c2r_x,
            kick,
            drift_half,
            drift_full,
            warnings,
        })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Setup diagnostics (kernel resolution and similar), empty when clean.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Applies the fused potential + collision factor in the correlation
    /// variable; exact for that sub-flow. Density is preserved pointwise.
    pub fn kick_step(&self, field: &mut WignerField) {
        let vals = field.values.as_slice_mut().expect("row-major field");
        self.kick_rows(vals);
    }

    /// Exact free streaming f(x, p) <- f(x - p dt/2, p) as a spectral shift
    /// per p-column; periodic in x. Advances the time stamp by dt/2.
    pub fn drift_half_step(&self, field: &mut WignerField) {
        let n_x = self.grid.n_x;
        let n_p = self.grid.n_p;
        let vals = field.values.as_slice_mut().expect("row-major field");
        let mut pmajor = vec![0.0f64; n_x * n_p];
        transpose::transpose(vals, &mut pmajor, n_p, n_x);
        self.drift_rows(&mut pmajor, false);
        transpose::transpose(&pmajor, vals, n_x, n_p);
        field.time += 0.5 * self.dt;
    }

    /// One Strang step: drift half, kick, drift half.
    pub fn strang_step(&self, field: &mut WignerField) {
        self.drift_half_step(field);
        self.kick_step(field);
        self.drift_half_step(field);
    }

    fn kick_rows(&self, xmajor: &mut [f64]) {
        let n_p = self.grid.n_p;
        let half = n_p / 2 + 1;
        let table = &self.kick;
        let r2c = &self.r2c_p;
        let c2r = &self.c2r_p;
        for_each_chunk_mut(xmajor, KICK_CHUNK_ROWS * n_p, |chunk_idx, chunk| {
            let mut spec = r2c.make_output_vec();
            let mut scratch_f = r2c.make_scratch_vec();
            let mut scratch_i = c2r.make_scratch_vec();
            let row0 = chunk_idx * KICK_CHUNK_ROWS;
            for (r, row) in chunk.chunks_mut(n_p).enumerate() {
                let i = row0 + r;
                r2c.process_with_scratch(row, &mut spec, &mut scratch_f)
                    .expect("forward fft");
                for (s, m) in spec.iter_mut().zip(&table[i * half..(i + 1) * half]) {
                    *s *= m;
                }
                c2r.process_with_scratch(&mut spec, row, &mut scratch_i)
                    .expect("inverse fft");
            }
        });
    }

    fn drift_rows(&self, pmajor: &mut [f64], full: bool) {
        let n_x = self.grid.n_x;
        let half = n_x / 2 + 1;
        let table = if full { &self.drift_full } else { &self.drift_half };
        let r2c = &self.r2c_x;
        let c2r = &self.c2r_x;
        for_each_chunk_mut(pmajor, DRIFT_CHUNK_ROWS * n_x, |chunk_idx, chunk| {
            let mut spec = r2c.make_output_vec();
            let mut scratch_f = r2c.make_scratch_vec();
            let mut scratch_i = c2r.make_scratch_vec();
            let row0 = chunk_idx * DRIFT_CHUNK_ROWS;
            for (r, row) in chunk.chunks_mut(n_x).enumerate() {
                let j = row0 + r;
                r2c.process_with_scratch(row, &mut spec, &mut scratch_f)
                    .expect("forward fft");
                for (s, m) in spec.iter_mut().zip(&table[j * half..(j + 1) * half]) {
                    *s *= m;
                }
                c2r.process_with_scratch(&mut spec, row, &mut scratch_i)
                    .expect("inverse fft");
            }
        });
    }
}

/// A boundary-escape observation: edge mass above the configured threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEvent {
    pub step: usize,
    pub time: f64,
    pub left_mass: f64,
    pub right_mass: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub series: Vec<MomentRecord>,
    pub snapshots: Vec<WignerField>,
    pub boundary_events: Vec<BoundaryEvent>,
    pub warnings: Vec<String>,
    pub final_field: WignerField,
}

impl RunOutput {
    /// Time of the first boundary event, if any fired.
    pub fn first_boundary_time(&self) -> Option<f64> {
        self.boundary_events.first().map(|e| e.time)
    }
}

/// Integrates from t = 0 to t_final with fixed dt.
///
/// Moments are recorded at t = 0, every `moment_stride`-th step and the final
/// step; full fields are captured at `snapshot_times` (snapped to the step
/// lattice). Between observation points, adjacent drift half-steps fuse into
/// whole-step shifts, which is algebraically identical to the unfused
/// composition. Aborts when the field stops being finite.
pub fn run(config: &SimulationConfig) -> Result<RunOutput> {
    let stepper = Stepper::new(config)?;
    let g = &stepper.grid;
    let n_steps = config.n_steps()?;

    let field0 = initial_wigner(config)?;

    let mut snap_steps: BTreeSet<usize> = BTreeSet::new();
    for &t in &config.snapshot_times {
        snap_steps.insert(((t / config.dt).round() as usize).min(n_steps));
    }

    // Steps at which the true (unstaggered) state must exist.
    let mut observe: BTreeSet<usize> = BTreeSet::new();
    observe.insert(0);
    observe.insert(n_steps);
    let stride = config.moment_stride.max(1);
    for s in (0..=n_steps).step_by(stride) {
        observe.insert(s);
    }
    observe.extend(snap_steps.iter().copied());

    let n_x = g.n_x;
    let n_p = g.n_p;
    let mut pmajor = vec![0.0f64; n_x * n_p];
    transpose::transpose(
        field0.values.as_slice().expect("row-major"),
        &mut pmajor,
        n_p,
        n_x,
    );
    let mut xmajor = vec![0.0f64; n_x * n_p];

    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let mut boundary_events = Vec::new();
    let mut above = false;

    let cell = g.cell();
    let edge = 5.min(n_x);
    let observe_state = |step: usize,
                             pm: &[f64],
                             series: &mut Vec<MomentRecord>,
                             snapshots: &mut Vec<WignerField>,
                             boundary_events: &mut Vec<BoundaryEvent>,
                             above: &mut bool|
     -> Result<()> {
        let t = step as f64 * config.dt;
        let record = moments_pmajor(pm, g, t);
        if !record.norm.is_finite() || !record.energy.is_finite() {
            return Err(CoreError::NonFinite { step, time: t });
        }
        if step % stride == 0 || step == n_steps {
            series.push(record);
        }
        let mut left = 0.0;
        let mut right = 0.0;
        for j in 0..n_p {
            let row = &pm[j * n_x..(j + 1) * n_x];
            for i in 0..edge {
                left += row[i];
                right += row[n_x - 1 - i];
            }
        }
        let (left, right) = (left * cell, right * cell);
        let hot = left > config.boundary_threshold || right > config.boundary_threshold;
        if hot && !*above {
            boundary_events.push(BoundaryEvent { step, time: t, left_mass: left, right_mass: right });
        }
        *above = hot;
        if snap_steps.contains(&step) {
            snapshots.push(materialize(g, pm, t));
        }
        Ok(())
    };

    observe_state(0, &pmajor, &mut series, &mut snapshots, &mut boundary_events, &mut above)?;

    let obs: Vec<usize> = observe.into_iter().collect();
    for w in obs.windows(2) {
        let (from, to) = (w[0], w[1]);
        let block = to - from;
        // D_half (K D_full)^{block-1} K D_half over the whole block.
        stepper.drift_rows(&mut pmajor, false);
        for b in 0..block {
            transpose::transpose(&pmajor, &mut xmajor, n_x, n_p);
            stepper.kick_rows(&mut xmajor);
            transpose::transpose(&xmajor, &mut pmajor, n_p, n_x);
            if b + 1 < block {
                stepper.drift_rows(&mut pmajor, true);
            }
        }
        stepper.drift_rows(&mut pmajor, false);
        observe_state(to, &pmajor, &mut series, &mut snapshots, &mut boundary_events, &mut above)?;
    }

    let final_field = materialize(g, &pmajor, n_steps as f64 * config.dt);
    Ok(RunOutput {
        series,
        snapshots,
        boundary_events,
        warnings: stepper.warnings.clone(),
        final_field,
    })
}

fn materialize(grid: &PhaseSpaceGrid, pmajor: &[f64], time: f64) -> WignerField {
    let mut xmajor = vec![0.0f64; pmajor.len()];
    transpose::transpose(pmajor, &mut xmajor, grid.n_x, grid.n_p);
    let values = Array2::from_shape_vec((grid.n_x, grid.n_p), xmajor).expect("shape");
    WignerField { grid: grid.clone(), values, time }
}
