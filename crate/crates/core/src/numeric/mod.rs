//! Numerical building blocks: normal-distribution kernels, quadrature,
//! bracketed solvers, and a low-discrepancy sequence.

pub mod halton;
pub mod normal;
pub mod quad;
pub mod root;

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}
