//! Gauss-Legendre quadrature and the Debye-type integral behind Frank's tau.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let z1 = z;
            z -= p0 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(64))
}

/// 64-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (nodes, weights) = gl64();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// `(1/x) * Integral_0^x (t/(e^t - 1) - 1) dt` for `x > 0`.
///
/// This is the first Debye function shifted by one; the shift removes the
/// catastrophic cancellation in `1 - 4/x + 4 D1(x)/x` near zero, so Frank's
/// Kendall tau can be written as `1 + 4 g(x)/x` with `g` from here.
pub fn debye1_minus_one(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    // integrand -> 0 at t = 0 (limit of t/(e^t-1) - 1 is 0), smooth beyond
    let f = |t: f64| {
        if t < 1e-8 {
            -t / 2.0 + t * t / 12.0
        } else {
            t / (t.exp_m1()) - 1.0
        }
    };
    if x <= 60.0 {
        integrate(0.0, x, f) / x
    } else {
        // the integrand is -1 + O(t e^-t) past 60
        (integrate(0.0, 60.0, f) - (x - 60.0)) / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // n-point rule integrates degree 2n-1 exactly
        let (x, w) = gauss_legendre(8);
        let int_x4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((int_x4 - 2.0 / 5.0).abs() < 1e-14);
        let int_x15: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!(int_x15.abs() < 1e-14);
    }

    #[test]
    fn integrate_smooth_function() {
        let v = integrate(0.0, 1.0, |t| t.exp());
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn debye_shift_small_argument_series() {
        // g(x) = -x/4 + x^2/36 + O(x^4)
        for &x in &[1e-6, 1e-4, 1e-2] {
            let g = debye1_minus_one(x);
            let series = -x / 4.0 + x * x / 36.0;
            assert!((g - series).abs() < 1e-12 + 1e-8 * x.powi(3), "x={x}");
        }
    }
}
