//! Moments, marginal densities and the transmission coefficient.
//!
//! All reductions use the rectangle rule with the deterministic pairwise
//! accumulation from [`crate::quad`], so repeated runs of the same
//! configuration produce identical bytes. Central moments are computed in
//! two passes (means first); the small-correlation-length regime produces
//! extremely flat fields where the one-pass formula cancels catastrophically.

use crate::error::{CoreError, Result};
use crate::grid::{PhaseSpaceGrid, WignerField};
use crate::quad::{pairwise_sum, pairwise_sum_by};

/// One time sample of the averaged quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord {
    pub t: f64,
    pub x_avg: f64,
    pub p_avg: f64,
    pub sigma20: f64,
    pub sigma02: f64,
    pub sigma11: f64,
    pub norm: f64,
    pub energy: f64,
}

/// n(x_i) = dp * sum_j f_ij.
pub fn density(field: &WignerField) -> Vec<f64> {
    let g = &field.grid;
    let v = field.values.as_slice().expect("row-major field");
    (0..g.n_x)
        .map(|i| pairwise_sum(&v[i * g.n_p..(i + 1) * g.n_p]) * g.dp)
        .collect()
}

/// j(x_i) = dp * sum_j p_j f_ij (dimensionless, m = 1).
pub fn current(field: &WignerField) -> Vec<f64> {
    let g = &field.grid;
    let v = field.values.as_slice().expect("row-major field");
    (0..g.n_x)
        .map(|i| {
            let row = &v[i * g.n_p..(i + 1) * g.n_p];
            pairwise_sum_by(g.n_p, |j| g.p(j) * row[j]) * g.dp
        })
        .collect()
}

/// e(x_i) = dp * sum_j (p_j^2 / 2) f_ij.
pub fn energy_density(field: &WignerField) -> Vec<f64> {
    let g = &field.grid;
    let v = field.values.as_slice().expect("row-major field");
    (0..g.n_x)
        .map(|i| {
            let row = &v[i * g.n_p..(i + 1) * g.n_p];
            pairwise_sum_by(g.n_p, |j| 0.5 * g.p(j) * g.p(j) * row[j]) * g.dp
        })
        .collect()
}

/// Averages, central second moments, norm and kinetic energy of a field.
pub fn moments(field: &WignerField) -> MomentRecord {
    let g = &field.grid;
    let v = field.values.as_slice().expect("row-major field");
    moments_from_layout(
        v,
        g.n_x,
        g.n_p,
        &|i| g.x(i),
        &|j| g.p(j),
        true,
        g.cell(),
        field.time,
    )
}

/// Same computation for a transposed (p-major) buffer; used by the stepper so
/// that per-step records do not require a transpose.
pub(crate) fn moments_pmajor(vals: &[f64], grid: &PhaseSpaceGrid, time: f64) -> MomentRecord {
    moments_from_layout(
        vals,
        grid.n_p,
        grid.n_x,
        &|j| grid.p(j),
        &|i| grid.x(i),
        false,
        grid.cell(),
        time,
    )
}

/// Two-pass moment computation over a row-major buffer whose rows carry the
/// coordinate `row_coord` and columns `col_coord`. `rows_are_x` fixes which
/// coordinate is position.
#[allow(clippy::too_many_arguments)]
fn moments_from_layout(
    vals: &[f64],
    n_rows: usize,
    n_cols: usize,
    row_coord: &(dyn Fn(usize) -> f64 + Sync),
    col_coord: &(dyn Fn(usize) -> f64 + Sync),
    rows_are_x: bool,
    cell: f64,
    time: f64,
) -> MomentRecord {
    // Pass 1: per-row mass and first moment in the column coordinate.
    let mut mass = vec![0.0f64; n_rows];
    let mut first_col = vec![0.0f64; n_rows];
    per_row(vals, n_cols, &mut [&mut mass, &mut first_col], |row, out| {
        out[0] = pairwise_sum(row);
        out[1] = pairwise_sum_by(n_cols, |c| col_coord(c) * row[c]);
    });
    let total = pairwise_sum(&mass);
    let row_mean = pairwise_sum_by(n_rows, |r| row_coord(r) * mass[r]) / total;
    let col_mean = pairwise_sum(&first_col) / total;

    // Pass 2: central moments about the means.
    let mut c1 = vec![0.0f64; n_rows];
    let mut c2 = vec![0.0f64; n_rows];
    per_row(vals, n_cols, &mut [&mut c1, &mut c2], |row, out| {
        out[0] = pairwise_sum_by(n_cols, |c| (col_coord(c) - col_mean) * row[c]);
        out[1] = pairwise_sum_by(n_cols, |c| {
            let d = col_coord(c) - col_mean;
            d * d * row[c]
        });
    });
    let var_row = pairwise_sum_by(n_rows, |r| {
        let d = row_coord(r) - row_mean;
        d * d * mass[r]
    }) / total;
    let var_col = pairwise_sum(&c2) / total;
    let cov = pairwise_sum_by(n_rows, |r| (row_coord(r) - row_mean) * c1[r]) / total;

    let (x_avg, p_avg, sigma20, sigma02) = if rows_are_x {
        (row_mean, col_mean, var_row, var_col)
    } else {
        (col_mean, row_mean, var_col, var_row)
    };
    // Kinetic energy from raw second moment in p (no cancellation here:
    // sigma02 and p_avg^2 both add).
    let energy = 0.5 * (sigma02 + p_avg * p_avg) * total * cell;

    MomentRecord {
        t: time,
        x_avg,
        p_avg,
        sigma20,
        sigma02,
        sigma11: cov,
        norm: total * cell,
        energy,
    }
}

/// Fills one output slot per row for each of the supplied buffers.
fn per_row<F>(vals: &[f64], n_cols: usize, outs: &mut [&mut [f64]], f: F)
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let n_rows = vals.len() / n_cols;
    // Compute into a row-indexed scratch, then scatter: keeps the parallel
    // path free of aliasing while preserving order.
    let results: Vec<[f64; 2]> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n_rows)
                .into_par_iter()
                .map(|r| {
                    let mut slot = [0.0f64; 2];
                    f(&vals[r * n_cols..(r + 1) * n_cols], &mut slot[..outs.len()]);
                    slot
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n_rows)
                .map(|r| {
                    let mut slot = [0.0f64; 2];
                    f(&vals[r * n_cols..(r + 1) * n_cols], &mut slot[..outs.len()]);
                    slot
                })
                .collect()
        }
    };
    for (r, slot) in results.iter().enumerate() {
        for (k, out) in outs.iter_mut().enumerate() {
            out[r] = slot[k];
        }
    }
}

/// Transmission estimate from the final average momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    /// Clamped to [0, 1].
    pub value: f64,
    /// Unclamped (1 + p_avg / p0) / 2.
    pub raw: f64,
    pub clamped: bool,
}

pub fn transmission(p_avg_final: f64, p0: f64) -> Result<Transmission> {
    if !(p0 > 0.0) {
        return Err(CoreError::BadReferenceMomentum { p0 });
    }
    let raw = 0.5 * (1.0 + p_avg_final / p0);
    let value = raw.clamp(0.0, 1.0);
    Ok(Transmission { value, raw, clamped: value != raw })
}

/// Sharpness of the density profile near the barrier: the largest
/// neighbouring-point slope |n_{i+1} - n_i| / dx over |x| <= window,
/// normalized by the global density maximum.
pub fn jump_metric(grid: &PhaseSpaceGrid, n: &[f64], window: f64) -> f64 {
    assert_eq!(n.len(), grid.n_x, "density length must match the grid");
    let n_max = n.iter().fold(0.0f64, |m, &v| m.max(v));
    if n_max <= 0.0 {
        return 0.0;
    }
    let mut steepest = 0.0f64;
    for i in 0..grid.n_x - 1 {
        if grid.x(i).abs() <= window && grid.x(i + 1).abs() <= window {
            steepest = steepest.max((n[i + 1] - n[i]).abs() / grid.dx);
        }
    }
    steepest / n_max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseSpaceGrid;
    use ndarray::Array2;

    fn gaussian_field(
        grid: &PhaseSpaceGrid,
        x0: f64,
        p0: f64,
        sx: f64,
        sp: f64,
    ) -> WignerField {
        let mut values = Array2::zeros((grid.n_x, grid.n_p));
        for i in 0..grid.n_x {
            for j in 0..grid.n_p {
                let zx = (grid.x(i) - x0) / sx;
                let zp = (grid.p(j) - p0) / sp;
                values[[i, j]] = (-0.5 * (zx * zx + zp * zp)).exp();
            }
        }
        let mut f = WignerField { grid: grid.clone(), values, time: 0.0 };
        let norm = f.norm();
        f.values.mapv_inplace(|v| v / norm);
        f
    }

    fn demo_grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(-20.0, 20.0, 128, -4.0, 4.0, 128, 1.0).unwrap()
    }

    #[test]
    fn density_integrates_to_norm() {
        let g = demo_grid();
        let f = gaussian_field(&g, -2.5, 0.5, 2.0, 0.4);
        let n = density(&f);
        let total: f64 = n.iter().sum::<f64>() * g.dx;
        assert!((total - f.norm()).abs() < 1e-12);
    }

    #[test]
    fn current_vanishes_for_even_field() {
        let g = demo_grid();
        let f = gaussian_field(&g, 0.0, 0.0, 2.0, 0.4);
        for (i, j) in current(&f).iter().enumerate() {
            assert!(j.abs() < 1e-14, "row {i}: {j}");
        }
    }

    #[test]
    fn total_current_is_mean_momentum() {
        let g = demo_grid();
        let f = gaussian_field(&g, -2.5, 0.75, 2.0, 0.3);
        let total: f64 = current(&f).iter().sum::<f64>() * g.dx;
        assert!((total - 0.75).abs() < 1e-10);
    }

    #[test]
    fn moments_of_gaussian() {
        let g = demo_grid();
        let f = gaussian_field(&g, -2.5, 0.5, 2.0, 0.4);
        let m = moments(&f);
        assert!((m.x_avg + 2.5).abs() < 1e-10);
        assert!((m.p_avg - 0.5).abs() < 1e-10);
        assert!((m.sigma20 - 4.0).abs() < 1e-8);
        assert!((m.sigma02 - 0.16).abs() < 1e-10);
        assert!(m.sigma11.abs() < 1e-12);
        assert!((m.norm - 1.0).abs() < 1e-14);
        assert!((m.energy - 0.5 * (0.16 + 0.25)).abs() < 1e-10);
    }

    #[test]
    fn moments_match_brute_force() {
        let g = PhaseSpaceGrid::new(-5.0, 5.0, 32, -2.0, 2.0, 16, 1.0).unwrap();
        let mut values = Array2::zeros((g.n_x, g.n_p));
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                values[[i, j]] = (((i * 31 + j * 17) % 13) as f64 / 13.0) - 0.3;
            }
        }
        let f = WignerField { grid: g.clone(), values, time: 1.5 };
        let m = moments(&f);

        // Independent double-loop re-summation.
        let mut s = 0.0;
        let mut sx = 0.0;
        let mut sp = 0.0;
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                let v = f.values[[i, j]];
                s += v;
                sx += g.x(i) * v;
                sp += g.p(j) * v;
            }
        }
        let (xm, pm) = (sx / s, sp / s);
        let (mut v20, mut v02, mut v11, mut e) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                let v = f.values[[i, j]];
                v20 += (g.x(i) - xm).powi(2) * v;
                v02 += (g.p(j) - pm).powi(2) * v;
                v11 += (g.x(i) - xm) * (g.p(j) - pm) * v;
                e += 0.5 * g.p(j).powi(2) * v;
            }
        }
        assert!((m.x_avg - xm).abs() < 1e-12);
        assert!((m.p_avg - pm).abs() < 1e-12);
        assert!((m.sigma20 - v20 / s).abs() < 1e-12 * v20.abs().max(1.0));
        assert!((m.sigma02 - v02 / s).abs() < 1e-12);
        assert!((m.sigma11 - v11 / s).abs() < 1e-12 * v11.abs().max(1.0));
        assert!((m.norm - s * g.cell()).abs() < 1e-12);
        assert!((m.energy - e * g.cell()).abs() < 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn translation_covariance() {
        let g = demo_grid();
        let f = gaussian_field(&g, -2.5, 0.5, 2.0, 0.4);
        let m = moments(&f);
        // Shift the field by an integer number of lattice cells.
        let shift = 16usize;
        let mut shifted = f.clone();
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                shifted.values[[(i + shift) % g.n_x, j]] = f.values[[i, j]];
            }
        }
        let ms = moments(&shifted);
        assert!((ms.x_avg - (m.x_avg + shift as f64 * g.dx)).abs() < 1e-9);
        assert!((ms.sigma20 - m.sigma20).abs() < 1e-9);
        assert!((ms.sigma02 - m.sigma02).abs() < 1e-12);
        assert!((ms.sigma11 - m.sigma11).abs() < 1e-10);
    }

    #[test]
    fn pmajor_layout_agrees() {
        let g = demo_grid();
        let f = gaussian_field(&g, -2.5, 0.5, 2.0, 0.4);
        let mut pmajor = vec![0.0; g.n_x * g.n_p];
        for i in 0..g.n_x {
            for j in 0..g.n_p {
                pmajor[j * g.n_x + i] = f.values[[i, j]];
            }
        }
        let a = moments(&f);
        let b = moments_pmajor(&pmajor, &g, 0.0);
        assert!((a.x_avg - b.x_avg).abs() < 1e-12);
        assert!((a.sigma20 - b.sigma20).abs() < 1e-10);
        assert!((a.sigma11 - b.sigma11).abs() < 1e-12);
        assert!((a.energy - b.energy).abs() < 1e-12);
    }

    #[test]
    fn transmission_endpoints() {
        let p0 = 1.3;
        assert_eq!(transmission(p0, p0).unwrap().value, 1.0);
        assert_eq!(transmission(-p0, p0).unwrap().value, 0.0);
        assert_eq!(transmission(0.0, p0).unwrap().value, 0.5);
        let t = transmission(1.5 * p0, p0).unwrap();
        assert!(t.clamped && t.value == 1.0 && t.raw > 1.0);
        assert!(transmission(0.5, 0.0).is_err());
        assert!(transmission(0.5, -1.0).is_err());
    }

    #[test]
    fn jump_metric_cases() {
        let g = PhaseSpaceGrid::new(-10.0, 10.0, 200, -1.0, 1.0, 8, 1.0).unwrap();
        // Constant density: no variation.
        let flat = vec![0.4; g.n_x];
        assert_eq!(jump_metric(&g, &flat, 5.0), 0.0);

        // Step profile at x = 0: resolution-limited maximum 1/dx.
        let step: Vec<f64> = (0..g.n_x).map(|i| if g.x(i) < 0.0 { 1.0 } else { 0.0 }).collect();
        assert!((jump_metric(&g, &step, 5.0) - 1.0 / g.dx).abs() < 1e-12);

        // Smooth Gaussian: bounded by its analytic maximum slope.
        let s = 1.5;
        let smooth: Vec<f64> = (0..g.n_x).map(|i| (-0.5 * (g.x(i) / s).powi(2)).exp()).collect();
        let bound = (1.0 / s) * (-0.5f64).exp() * 1.001;
        assert!(jump_metric(&g, &smooth, 8.0) <= bound);
    }
}
