//! Standard normal distribution kernels.
//!
//! The univariate pieces follow the classic double-precision rational
//! approximations: Cody's SPECFUN `ERF`/`ERFC` and Wichura's AS 241
//! (`PPND16`) quantile. The bivariate CDF is a port of Genz' `BVND`
//! (tvpack), based on Drezner & Wesolowsky. All kernels run in `f64` and
//! are lifted to the generic scalar at the call sites; the `f32`
//! instantiation simply rounds the `f64` result.

use crate::scalar::Real;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn norm_pdf<R: Real>(x: R) -> R {
    R::of(norm_pdf_f64(x.as_f64()))
}

/// Standard normal CDF.
pub fn norm_cdf<R: Real>(x: R) -> R {
    R::of(norm_cdf_f64(x.as_f64()))
}

/// Standard normal quantile.
pub fn norm_quantile<R: Real>(p: R) -> R {
    R::of(norm_quantile_f64(p.as_f64()))
}

/// Bivariate standard normal CDF `P(X <= x, Y <= y)` with correlation `rho`.
pub fn bvn_cdf<R: Real>(x: R, y: R, rho: R) -> R {
    R::of(bvn_cdf_f64(x.as_f64(), y.as_f64(), rho.as_f64()))
}

pub fn norm_pdf_f64(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn norm_cdf_f64(x: f64) -> f64 {
    0.5 * erfc_f64(-x / std::f64::consts::SQRT_2)
}

// Cody's rational Chebyshev coefficients for erf on |x| <= 0.46875.
const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
// erfc on 0.46875 < x <= 4.
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
// erfc asymptotic region x > 4.
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];
const SQRPI: f64 = 5.6418958354775628695e-1; // 1/sqrt(pi)

pub fn erf_f64(x: f64) -> f64 {
    if x.abs() <= 0.46875 {
        let y = x * x;
        let mut xnum = ERF_A[4] * y;
        let mut xden = y;
        for i in 0..3 {
            xnum = (xnum + ERF_A[i]) * y;
            xden = (xden + ERF_B[i]) * y;
        }
        x * (xnum + ERF_A[3]) / (xden + ERF_B[3])
    } else {
        1.0 - erfc_f64(x)
    }
}

pub fn erfc_f64(x: f64) -> f64 {
    let ax = x.abs();
    let result = if ax <= 0.46875 {
        return 1.0 - erf_f64(x);
    } else if ax <= 4.0 {
        let mut xnum = ERF_C[8] * ax;
        let mut xden = ax;
        for i in 0..7 {
            xnum = (xnum + ERF_C[i]) * ax;
            xden = (xden + ERF_D[i]) * ax;
        }
        scale_erfc(ax, (xnum + ERF_C[7]) / (xden + ERF_D[7]))
    } else if ax < 26.5 {
        let y = 1.0 / (ax * ax);
        let mut xnum = ERF_P[5] * y;
        let mut xden = y;
        for i in 0..4 {
            xnum = (xnum + ERF_P[i]) * y;
            xden = (xden + ERF_Q[i]) * y;
        }
        let r = y * (xnum + ERF_P[4]) / (xden + ERF_Q[4]);
        scale_erfc(ax, (SQRPI - r) / ax)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

// exp(-x^2) split to avoid losing digits in the argument, per SPECFUN.
fn scale_erfc(x: f64, r: f64) -> f64 {
    let ysq = (x * 16.0).trunc() / 16.0;
    let del = (x - ysq) * (x + ysq);
    (-ysq * ysq).exp() * (-del).exp() * r
}

// Wichura AS 241, PPND16.
const PN_A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const PN_B: [f64; 8] = [
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const PN_C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const PN_D: [f64; 8] = [
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const PN_E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const PN_F: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

fn poly7(c: &[f64; 8], r: f64) -> f64 {
    let mut s = c[7];
    for i in (0..7).rev() {
        s = s * r + c[i];
    }
    s
}

pub fn norm_quantile_f64(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly7(&PN_A, r) / poly7(&PN_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly7(&PN_C, r) / poly7(&PN_D, r)
    } else {
        let r = r - 5.0;
        poly7(&PN_E, r) / poly7(&PN_F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

// Gauss-Legendre rules used by BVND, from tvpack.
const BVN_W6: [f64; 3] = [0.1713244923791705, 0.3607615730481384, 0.4679139345726904];
const BVN_X6: [f64; 3] = [-0.9324695142031522, -0.6612093864662647, -0.2386191860831970];
const BVN_W12: [f64; 6] = [
    0.04717533638651177,
    0.1069393259953183,
    0.1600783285433464,
    0.2031674267230659,
    0.2334925365383547,
    0.2491470458134029,
];
const BVN_X12: [f64; 6] = [
    -0.9815606342467191,
    -0.9041172563704750,
    -0.7699026741943050,
    -0.5873179542866171,
    -0.3678314989981802,
    -0.1252334085114692,
];
const BVN_W20: [f64; 10] = [
    0.01761400713915212,
    0.04060142980038694,
    0.06267204833410906,
    0.08327674157670475,
    0.1019301198172404,
    0.1181945319615184,
    0.1316886384491766,
    0.1420961093183821,
    0.1491729864726037,
    0.1527533871307259,
];
const BVN_X20: [f64; 10] = [
    -0.9931285991850949,
    -0.9639719272779138,
    -0.9122344282513259,
    -0.8391169718222188,
    -0.7463319064601508,
    -0.6360536807265150,
    -0.5108670019508271,
    -0.3737060887154196,
    -0.2277858511416451,
    -0.07652652113349733,
];

fn bvn_quadrature(rho_abs: f64) -> (&'static [f64], &'static [f64]) {
    if rho_abs < 0.3 {
        (&BVN_W6, &BVN_X6)
    } else if rho_abs < 0.75 {
        (&BVN_W12, &BVN_X12)
    } else {
        (&BVN_W20, &BVN_X20)
    }
}

/// Genz' BVND: `P(X > dh, Y > dk)` for standard bivariate normal with
/// correlation `r`.
fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let (w, x) = bvn_quadrature(r.abs());
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = 0.5 * r.asin();
            for i in 0..w.len() {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x[i] + 1.0)).sin();
                    bvn += w[i] * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / two_pi;
        }
        bvn + norm_cdf_f64(-h) * norm_cdf_f64(-k)
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let mut a = a_s.sqrt();
            let b_s = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -0.5 * (b_s / a_s + hk);
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0
                        + c * d * a_s * a_s / 5.0);
            }
            if -hk < 100.0 {
                let b = b_s.sqrt();
                bvn -= (-0.5 * hk).exp()
                    * two_pi.sqrt()
                    * norm_cdf_f64(-b / a)
                    * b
                    * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
            }
            a /= 2.0;
            for i in 0..w.len() {
                for is in [-1.0, 1.0] {
                    let xi = a * (is * x[i] + 1.0);
                    let x_s = xi * xi;
                    let r_s = (1.0 - x_s).sqrt();
                    let asr = -0.5 * (b_s / x_s + hk);
                    if asr > -100.0 {
                        bvn += a
                            * w[i]
                            * asr.exp()
                            * ((-hk * (1.0 - r_s) / (2.0 * (1.0 + r_s))).exp() / r_s
                                - (1.0 + c * x_s * (1.0 + d * x_s)));
                    }
                }
            }
            bvn *= -1.0 / two_pi;
        }
        if r > 0.0 {
            bvn + norm_cdf_f64(-h.max(k))
        } else {
            let mut out = -bvn;
            if k > h {
                out += norm_cdf_f64(k) - norm_cdf_f64(h);
            }
            out
        }
    }
}

pub fn bvn_cdf_f64(x: f64, y: f64, rho: f64) -> f64 {
    if rho >= 1.0 {
        return norm_cdf_f64(x.min(y));
    }
    if rho <= -1.0 {
        return (norm_cdf_f64(x) + norm_cdf_f64(y) - 1.0).max(0.0);
    }
    bvnd(-x, -y, rho).clamp(0.0, 1.0)
}
