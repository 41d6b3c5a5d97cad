//! Deterministic batched accumulation of sample losses and gradients.
//!
//! Samples are processed in fixed-size chunks; each chunk owns its own
//! workspace and gradient buffer, and the chunk partials are reduced in
//! chunk order afterwards. The floating-point result is therefore identical
//! whatever the thread count, which keeps seeded runs reproducible across
//! machines.

use rayon::prelude::*;

pub const CHUNK: usize = 512;

/// Sum `eval` over `0..n` samples, accumulating gradients of length
/// `n_grad`. `make_ws` builds one scratch workspace per chunk.
pub fn chunked_loss_and_grad<W, M, F>(n: usize, n_grad: usize, make_ws: M, eval: F) -> (f64, Vec<f64>)
where
    W: Send,
    M: Fn() -> W + Sync,
    F: Fn(&mut W, usize, &mut [f64]) -> f64 + Sync,
{
    if n == 0 {
        return (0.0, vec![0.0; n_grad]);
    }
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<(f64, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut ws = make_ws();
            let mut g = vec![0.0; n_grad];
            let mut sum = 0.0;
            for i in c * CHUNK..(c * CHUNK + CHUNK).min(n) {
                sum += eval(&mut ws, i, &mut g);
            }
            (sum, g)
        })
        .collect();
    let mut total = 0.0;
    let mut grad = vec![0.0; n_grad];
    for (s, g) in parts {
        total += s;
        for (acc, p) in grad.iter_mut().zip(&g) {
            *acc += *p;
        }
    }
    (total, grad)
}

/// Value-only variant for validation passes.
pub fn chunked_loss<W, M, F>(n: usize, make_ws: M, eval: F) -> f64
where
    W: Send,
    M: Fn() -> W + Sync,
    F: Fn(&mut W, usize) -> f64 + Sync,
{
    if n == 0 {
        return 0.0;
    }
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut ws = make_ws();
            (c * CHUNK..(c * CHUNK + CHUNK).min(n)).map(|i| eval(&mut ws, i)).sum()
        })
        .collect();
    parts.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_and_gradients_cover_every_sample() {
        // eval(i) = i with gradient e_{i mod 3}; easy closed forms.
        let n = 2 * CHUNK + 37;
        let (loss, grad) = chunked_loss_and_grad(
            n,
            3,
            || (),
            |_, i, g| {
                g[i % 3] += 1.0;
                i as f64
            },
        );
        assert_eq!(loss, (n * (n - 1) / 2) as f64);
        assert_eq!(grad.iter().sum::<f64>(), n as f64);
        let value_only = chunked_loss(n, || (), |_, i| i as f64);
        assert_eq!(value_only, loss);
    }

    #[test]
    fn reduction_order_is_fixed() {
        // Ill-conditioned summands: any reordering across chunk boundaries
        // would change the rounded result, so two runs agreeing bitwise is
        // evidence the reduction order is pinned.
        let vals: Vec<f64> = (0..4 * CHUNK)
            .map(|i| if i % 2 == 0 { 1e16 } else { -1e16 + (i as f64) })
            .collect();
        let run = || chunked_loss(vals.len(), || (), |_, i| vals[i]);
        let a = run();
        let b = run();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn empty_batch_is_zero() {
        let (loss, grad) = chunked_loss_and_grad(0, 2, || (), |_: &mut (), _, _| 1.0);
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.0; 2]);
        assert_eq!(chunked_loss(0, || (), |_: &mut (), _| 1.0), 0.0);
    }
}
