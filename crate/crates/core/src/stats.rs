//! Rank statistics: Kendall's tau-b in O(n log n), midranks, and a
//! one-sample Kolmogorov-Smirnov statistic.

use crate::scalar::Real;

/// Kendall's tau-b by Knight's merge-sort algorithm.
///
/// `tau_b = (nc - nd) / sqrt((n0 - n1)(n0 - n2))` where `n1`/`n2` count
/// pairs tied in the first/second coordinate. Continuous data makes ties
/// measure-zero, but file round-trips can create them, hence tau-b.
/// Inputs must be NaN-free.
pub fn kendall_tau_b<R: Real>(x: &[R], y: &[R]) -> R {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 2, "kendall tau needs at least two observations");

    let mut pairs: Vec<(R, R)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("NaN in tau input")
            .then(a.1.partial_cmp(&b.1).expect("NaN in tau input"))
    });

    let n0 = n * (n - 1) / 2;
    let mut n1 = 0usize; // pairs tied in x
    let mut n3 = 0usize; // pairs tied in both
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && pairs[j].0 == pairs[i].0 {
                j += 1;
            }
            let t = j - i;
            n1 += t * (t - 1) / 2;
            // double ties within the x-tie group
            let mut k = i;
            while k < j {
                let mut l = k + 1;
                while l < j && pairs[l].1 == pairs[k].1 {
                    l += 1;
                }
                let s = l - k;
                n3 += s * (s - 1) / 2;
                k = l;
            }
            i = j;
        }
    }

    let mut ys: Vec<R> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut ys);

    // ys is now sorted; count pairs tied in y
    let mut n2 = 0usize;
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && ys[j] == ys[i] {
                j += 1;
            }
            let t = j - i;
            n2 += t * (t - 1) / 2;
            i = j;
        }
    }

    let comparable = n0 - n1 - n2 + n3;
    let s = comparable as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return R::zero();
    }
    R::of(s / denom)
}

// Bottom-up merge sort counting strict inversions.
fn merge_count<R: Real>(v: &mut [R]) -> u64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            if mid < hi {
                swaps += merge(&v[lo..mid], &v[mid..hi], &mut buf[lo..hi]);
                v[lo..hi].copy_from_slice(&buf[lo..hi]);
            }
            lo += 2 * width;
        }
        width *= 2;
    }
    swaps
}

fn merge<R: Real>(a: &[R], b: &[R], out: &mut [R]) -> u64 {
    let mut swaps = 0u64;
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        if b[j] < a[i] {
            out[k] = b[j];
            j += 1;
            swaps += (a.len() - i) as u64;
        } else {
            out[k] = a[i];
            i += 1;
        }
        k += 1;
    }
    while i < a.len() {
        out[k] = a[i];
        i += 1;
        k += 1;
    }
    while j < b.len() {
        out[k] = b[j];
        j += 1;
        k += 1;
    }
    swaps
}

/// Midranks (1-based, ties averaged).
pub fn midranks<R: Real>(xs: &[R]) -> Vec<R> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("NaN in rank input"));
    let mut ranks = vec![R::zero(); n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        let avg = R::of((i + j + 1) as f64 / 2.0);
        for &k in &idx[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Rank pseudo-observations `rank / (n + 1)`, mapping any column into (0,1).
pub fn rank_pseudo_obs<R: Real>(xs: &[R]) -> Vec<R> {
    let n1 = R::of_usize(xs.len() + 1);
    midranks(xs).into_iter().map(|r| r / n1).collect()
}

/// One-sample Kolmogorov-Smirnov statistic against U(0,1).
pub fn ks_statistic_uniform<R: Real>(xs: &[R]) -> R {
    let n = xs.len();
    assert!(n > 0);
    let mut s: Vec<R> = xs.to_vec();
    s.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in KS input"));
    let nf = R::of_usize(n);
    let mut d = R::zero();
    for (i, &x) in s.iter().enumerate() {
        let hi = R::of_usize(i + 1) / nf - x;
        let lo = x - R::of_usize(i) / nf;
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic one-sample KS critical value `K_alpha / sqrt(n)`.
/// Supported levels: 0.01 and 0.05.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let k = if (alpha - 0.01).abs() < 1e-12 {
        1.62762
    } else if (alpha - 0.05).abs() < 1e-12 {
        1.35810
    } else {
        panic!("unsupported KS level {alpha}");
    };
    k / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // O(n^2) reference used to validate the merge-sort implementation.
    fn tau_b_brute(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut s, mut tx, mut ty) = (0.0, 0usize, 0usize);
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = x[i] - x[j];
                let dy = y[i] - y[j];
                if dx == 0.0 && dy == 0.0 {
                    continue;
                }
                if dx == 0.0 {
                    tx += 1;
                } else if dy == 0.0 {
                    ty += 1;
                } else {
                    s += (dx * dy).signum();
                }
            }
        }
        let n0 = (n * (n - 1) / 2) as f64;
        // brute counts exclude double ties from tx/ty, mirroring tau-b
        let mut n1 = 0.0;
        let mut n2 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                if x[i] == x[j] {
                    n1 += 1.0;
                }
                if y[i] == y[j] {
                    n2 += 1.0;
                }
            }
        }
        let _ = (tx, ty);
        s / ((n0 - n1) * (n0 - n2)).sqrt()
    }

    #[test]
    fn concordant_and_discordant_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(kendall_tau_b(&x, &y), 1.0);
        let yr = [0.4, 0.3, 0.2, 0.1];
        assert_eq!(kendall_tau_b(&x, &yr), -1.0);
    }

    #[test]
    fn matches_brute_force_with_ties() {
        // deterministic pseudo-random data with injected ties
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..200 {
            x.push((next() * 20.0).round() / 20.0);
            y.push((next() * 20.0).round() / 20.0);
        }
        let fast = kendall_tau_b(&x, &y);
        let brute = tau_b_brute(&x, &y);
        assert!((fast - brute).abs() < 1e-12, "fast={fast} brute={brute}");
    }

    #[test]
    fn midranks_average_ties() {
        let r = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn ks_statistic_of_perfect_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        assert!(ks_statistic_uniform(&xs) < 1.0 / n as f64);
    }
}
