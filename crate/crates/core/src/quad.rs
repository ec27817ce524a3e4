//! Reductions and quadrature weights.
//!
//! All phase-space integrals use the equal-weight rectangle rule on the
//! uniform cell-centered lattice. Sums are accumulated with a fixed pairwise
//! tree so that results are reproducible bit-for-bit, with or without the
//! `parallel` feature: the split points depend only on the slice length,
//! never on the scheduler.

/// Below this length a straight serial loop is used.
const SEQ_CHUNK: usize = 128;
/// Above this length the two halves may run on different threads.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 1 << 15;

/// Deterministic pairwise sum.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= SEQ_CHUNK {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    #[cfg(feature = "parallel")]
    if v.len() >= PAR_THRESHOLD {
        let (sa, sb) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
        return sa + sb;
    }
    pairwise_sum(a) + pairwise_sum(b)
}

/// Pairwise sum of `f(i)` over `0..n` without materializing the terms.
/// Uses the same split tree as [`pairwise_sum`] on an equivalent slice.
pub fn pairwise_sum_by<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    fn go<F: Fn(usize) -> f64 + Sync>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= SEQ_CHUNK {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + (hi - lo) / 2;
        #[cfg(feature = "parallel")]
        if hi - lo >= PAR_THRESHOLD {
            let (a, b) = rayon::join(|| go(lo, mid, f), || go(mid, hi, f));
            return a + b;
        }
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, &f)
}

/// Per-point weights of a composite open Newton-Cotes rule on a uniform
/// cell-centered lattice of `n` points with spacing `h` (opt-in alternative
/// to the rectangle rule; `order = 1` reproduces it exactly).
///
/// Supported panel sizes are 1, 3 and 5 points; `n` must be a multiple of
/// the panel size.
pub fn open_newton_cotes_weights(n: usize, h: f64, order: usize) -> Option<Vec<f64>> {
    // Symmetric weights making a k-point cell-centered panel of span k*h
    // exact for polynomials of degree < k.
    let coeffs: &[f64] = match order {
        1 => &[1.0],
        3 => &[9.0 / 8.0, 3.0 / 4.0, 9.0 / 8.0],
        5 => &[
            1375.0 / 1152.0,
            125.0 / 288.0,
            335.0 / 192.0,
            125.0 / 288.0,
            1375.0 / 1152.0,
        ],
        _ => return None,
    };
    if n == 0 || n % order != 0 {
        return None;
    }
    let mut w = Vec::with_capacity(n);
    for _ in 0..n / order {
        w.extend(coeffs.iter().map(|&c| c * h));
    }
    Some(w)
}

/// Runs `f` on each index chunk `[start, end)` of `0..n`, in parallel when
/// the feature is enabled. Chunk boundaries are fixed, so per-chunk state the
/// closure derives from indices is scheduler-independent.
pub fn for_each_chunk<F: Fn(usize, usize) + Sync>(n: usize, chunk: usize, f: F) {
    let step = chunk.max(1);
    let starts: Vec<usize> = (0..n).step_by(step).collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts.par_iter().for_each(|&s| f(s, (s + step).min(n)));
    }
    #[cfg(not(feature = "parallel"))]
    for &s in &starts {
        f(s, (s + step).min(n));
    }
}

/// Mutates `data` in fixed-size chunks; `f` receives the chunk index and the
/// chunk slice. Parallel when the feature is enabled.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    let step = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(step).enumerate().for_each(|(c, s)| f(c, s));
    }
    #[cfg(not(feature = "parallel"))]
    for (c, s) in data.chunks_mut(step).enumerate() {
        f(c, s);
    }
}
