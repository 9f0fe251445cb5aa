//! Small numeric helpers shared across modules.

/// Floor that forgives floating-point dust just below an integer.
///
/// Products like `500.0 * 0.95` evaluate to `474.99999999999997`; a naive
/// floor would drop a whole tail observation. The guard is relative, so
/// genuinely fractional values (`1.98`) are unaffected.
pub(crate) fn guarded_floor(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    (x * (1.0 + 4.0 * f64::EPSILON) + 1e-12).floor()
}

/// `floor(n * q)` as an index count, with the floating-point guard.
pub(crate) fn guarded_count(n: usize, q: f64) -> usize {
    guarded_floor(n as f64 * q) as usize
}

/// Mean and root-mean-square error of `values` against `target`.
///
/// Plain sequential summation: results must not depend on thread count.
pub(crate) fn bias_rmse(values: &[f64], target: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for &v in values {
        let d = v - target;
        sum += d;
        sq += d * d;
    }
    (sum / n, (sq / n).sqrt())
}
