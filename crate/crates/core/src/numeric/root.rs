//! Bracketed scalar solvers: bisection for monotone root finding and
//! golden-section search for unimodal maximization.

use crate::scalar::Real;

/// Root of a monotone function on `[lo, hi]` by bisection.
///
/// Stops when the bracket width drops below `xtol` or the midpoint can no
/// longer be distinguished from the endpoints. The function need not be
/// increasing; the bracket is oriented from the sign of `f(lo)`.
pub fn bisect<R: Real>(mut f: impl FnMut(R) -> R, lo: R, hi: R, xtol: R, max_iter: usize) -> R {
    let mut lo = lo;
    let mut hi = hi;
    let two = R::of(2.0);
    let increasing = f(lo) <= R::zero();
    for _ in 0..max_iter {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi || hi - lo < xtol {
            return mid;
        }
        let fm = f(mid);
        let go_right = if increasing {
            fm < R::zero()
        } else {
            fm > R::zero()
        };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

/// Argmax of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_max<R: Real>(
    mut f: impl FnMut(R) -> R,
    lo: R,
    hi: R,
    xtol: R,
    max_iter: usize,
) -> (R, R) {
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if b - a < xtol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
