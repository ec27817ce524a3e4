//! Property tests for the transform pair, the kernel family and the
//! observables.

use proptest::prelude::*;

use wigner_core::{
    transmission, Barrier, CorrelationKernel, PhaseSpaceGrid, RowTransform,
};

fn small_grid(hbar: f64, n_p: usize) -> PhaseSpaceGrid {
    PhaseSpaceGrid::new(-1.0, 1.0, 8, -4.0, 4.0, n_p, hbar).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip_is_identity(
        seed in any::<u64>(),
        hbar in 0.1f64..3.0,
    ) {
        let grid = small_grid(hbar, 64);
        let t = RowTransform::new(&grid);
        let mut state = seed | 1;
        let row: Vec<f64> = (0..grid.n_p)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        let back = t.eta_to_p(&t.p_to_eta(&row).unwrap()).unwrap();
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
        for (a, b) in row.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn transform_preserves_l2(
        seed in any::<u64>(),
        hbar in 0.1f64..3.0,
    ) {
        let grid = small_grid(hbar, 128);
        let t = RowTransform::new(&grid);
        let mut state = seed | 1;
        let row: Vec<f64> = (0..grid.n_p)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        let g = t.p_to_eta(&row).unwrap();
        let lhs: f64 = row.iter().map(|v| v * v).sum::<f64>() * grid.dp;
        let rhs: f64 = g.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.d_eta
            / (2.0 * std::f64::consts::PI * hbar);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-30));
    }

    #[test]
    fn kernels_are_even_normalized_contractions(
        lambda in 0.05f64..50.0,
        eta in -200.0f64..200.0,
    ) {
        let kernels = [
            CorrelationKernel::coherent(),
            CorrelationKernel::sech(lambda).unwrap(),
            CorrelationKernel::exponential(lambda).unwrap(),
            CorrelationKernel::quadratic(1.0 / (2.0 * lambda * lambda)).unwrap(),
        ];
        for k in &kernels {
            prop_assert_eq!(k.eval_delta(0.0), 1.0);
            let v = k.eval_delta(eta);
            prop_assert!(v.abs() <= 1.0 + 1e-15);
            prop_assert!((v - k.eval_delta(-eta)).abs() <= 1e-15);
        }
    }

    #[test]
    fn potential_symbol_is_odd_and_vanishes_at_zero(
        a in 0.05f64..20.0,
        x in -50.0f64..50.0,
        eta in -100.0f64..100.0,
    ) {
        let b = Barrier::new(a).unwrap();
        prop_assert_eq!(b.delta_v(x, 0.0), 0.0);
        prop_assert!((b.delta_v(x, -eta) + b.delta_v(x, eta)).abs() <= 1e-15);
    }

    #[test]
    fn transmission_stays_in_range(
        p_avg in -100.0f64..100.0,
        p0 in 1e-6f64..50.0,
    ) {
        let t = transmission(p_avg, p0).unwrap();
        prop_assert!((0.0..=1.0).contains(&t.value));
        prop_assert_eq!(t.clamped, t.raw != t.value);
        if !t.clamped {
            prop_assert!((t.raw - 0.5 * (1.0 + p_avg / p0)).abs() <= 1e-15);
        }
    }
}
