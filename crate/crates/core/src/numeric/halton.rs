//! Halton low-discrepancy sequence, used for deterministic normalization
//! checks of densities on the unit hypercube.

const BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// The `index`-th element (1-based) of the van der Corput sequence in `base`.
pub fn van_der_corput(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Fill `point` with the `index`-th Halton point in `point.len()` dimensions.
pub fn halton_point(index: u64, point: &mut [f64]) {
    assert!(point.len() <= BASES.len());
    for (j, p) in point.iter_mut().enumerate() {
        *p = van_der_corput(index, BASES[j]);
    }
}
