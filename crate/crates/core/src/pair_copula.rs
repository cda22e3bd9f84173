//! Bivariate copula families.
//!
//! Each family provides the CDF, density, conditional distributions
//! (h-functions, the partial derivatives of the CDF), their inverses,
//! conditional-inversion sampling, the Kendall tau map in both directions,
//! and tail dependence coefficients. Negative dependence for the asymmetric
//! families (Clayton, Gumbel) is expressed through rotations.
//!
//! Rotation convention (density transform):
//! 90 degrees maps `c(u,v)` to `c(1-u, v)`, 180 to `c(1-u, 1-v)`,
//! 270 to `c(u, 1-v)`. CDF and h-functions transform accordingly.
//!
//! All copula-scale inputs are clamped to `[1e-10, 1 - 1e-10]` before
//! evaluation so log-densities and h-inverses stay finite at the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VineError};
use crate::numeric::log_sum_exp;
use crate::numeric::normal::{norm_cdf, norm_quantile};
use crate::numeric::quad::debye1_minus_one;
use crate::numeric::root::bisect;
use crate::rng::{unit, RandomStream};
use crate::sample::SampleMatrix;
use crate::scalar::{clamp_unit, Real};

/// Parametric family of a bivariate copula.
///
/// Parameter domains: Gaussian `rho in (-1,1)`; Clayton `theta in (0,inf)`;
/// Gumbel `theta in [1,inf)`; Frank `eta in R \ {0}` (|eta| <= 350 to keep
/// `exp` in range); AMH `eta in (-1,1) \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Independence,
    Gaussian,
    Clayton,
    Gumbel,
    Frank,
    Amh,
}

impl FamilyId {
    pub const ALL: [FamilyId; 6] = [
        FamilyId::Independence,
        FamilyId::Gaussian,
        FamilyId::Clayton,
        FamilyId::Gumbel,
        FamilyId::Frank,
        FamilyId::Amh,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Independence => "independence",
            FamilyId::Gaussian => "gaussian",
            FamilyId::Clayton => "clayton",
            FamilyId::Gumbel => "gumbel",
            FamilyId::Frank => "frank",
            FamilyId::Amh => "amh",
        }
    }

    pub fn from_name(s: &str) -> Option<FamilyId> {
        match s {
            "independence" => Some(FamilyId::Independence),
            "gaussian" => Some(FamilyId::Gaussian),
            "clayton" => Some(FamilyId::Clayton),
            "gumbel" => Some(FamilyId::Gumbel),
            "frank" => Some(FamilyId::Frank),
            "amh" => Some(FamilyId::Amh),
            _ => None,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            FamilyId::Independence => 0,
            _ => 1,
        }
    }
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Counterclockwise rotation of the copula density in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(&self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(d: u16) -> Option<Rotation> {
        match d {
            0 => Some(Rotation::R0),
            90 => Some(Rotation::R90),
            180 => Some(Rotation::R180),
            270 => Some(Rotation::R270),
            _ => None,
        }
    }

    /// Composition of two rotations (degrees add mod 360).
    pub fn compose(self, other: Rotation) -> Rotation {
        Rotation::from_degrees((self.degrees() + other.degrees()) % 360).unwrap()
    }

    /// True when the rotation flips the sign of Kendall's tau.
    pub fn flips_tau(&self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

// Bounds used by the tau inversion. The caps keep extreme parameters out of
// the overflow region while covering everything the experiments need.
const TAU_ZERO: f64 = 1e-12;
const GAUSS_RHO_MAX: f64 = 1.0 - 1e-7;
const CLAYTON_GUMBEL_TAU_MAX: f64 = 0.99;
const FRANK_ETA_MAX: f64 = 50.0;
const AMH_ETA_BOUND: f64 = 1.0 - 1e-9;

/// A parametric bivariate copula with rotation: the atom of the vine density.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCopula<R: Real> {
    family: FamilyId,
    rotation: Rotation,
    params: Vec<R>,
}

impl<R: Real> PairCopula<R> {
    pub fn new(family: FamilyId, rotation: Rotation, params: Vec<R>) -> Result<Self> {
        if params.len() != family.param_count() {
            return Err(VineError::ParamDomain {
                family: family.name(),
                detail: format!(
                    "expected {} parameter(s), got {}",
                    family.param_count(),
                    params.len()
                ),
            });
        }
        let pc = Self {
            family,
            rotation,
            params,
        };
        pc.check_domain()?;
        Ok(pc)
    }

    pub fn independence() -> Self {
        Self {
            family: FamilyId::Independence,
            rotation: Rotation::R0,
            params: Vec::new(),
        }
    }

    pub fn gaussian(rho: R) -> Result<Self> {
        Self::new(FamilyId::Gaussian, Rotation::R0, vec![rho])
    }

    pub fn clayton(theta: R, rotation: Rotation) -> Result<Self> {
        Self::new(FamilyId::Clayton, rotation, vec![theta])
    }

    pub fn gumbel(theta: R, rotation: Rotation) -> Result<Self> {
        Self::new(FamilyId::Gumbel, rotation, vec![theta])
    }

    pub fn frank(eta: R) -> Result<Self> {
        Self::new(FamilyId::Frank, Rotation::R0, vec![eta])
    }

    pub fn amh(eta: R, rotation: Rotation) -> Result<Self> {
        Self::new(FamilyId::Amh, rotation, vec![eta])
    }

    fn check_domain(&self) -> Result<()> {
        let bad = |detail: String| -> Result<()> {
            Err(VineError::ParamDomain {
                family: self.family.name(),
                detail,
            })
        };
        match self.family {
            FamilyId::Independence => Ok(()),
            FamilyId::Gaussian => {
                let r = self.th().as_f64();
                if !r.is_finite() || r.abs() >= 1.0 {
                    return bad(format!("rho={r} not in (-1, 1)"));
                }
                Ok(())
            }
            FamilyId::Clayton => {
                let t = self.th().as_f64();
                if !t.is_finite() || t <= 0.0 {
                    return bad(format!("theta={t} not in (0, inf)"));
                }
                Ok(())
            }
            FamilyId::Gumbel => {
                let t = self.th().as_f64();
                if !t.is_finite() || t < 1.0 {
                    return bad(format!("theta={t} not in [1, inf)"));
                }
                Ok(())
            }
            FamilyId::Frank => {
                let e = self.th().as_f64();
                if !e.is_finite() || e == 0.0 || e.abs() > 350.0 {
                    return bad(format!("eta={e} not in R \\ {{0}} (|eta| <= 350)"));
                }
                Ok(())
            }
            FamilyId::Amh => {
                let e = self.th().as_f64();
                if !e.is_finite() || e == 0.0 || e.abs() >= 1.0 {
                    return bad(format!("eta={e} not in (-1, 1) \\ {{0}}"));
                }
                Ok(())
            }
        }
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn params(&self) -> &[R] {
        &self.params
    }

    /// The copula rotated further by `by` degrees.
    pub fn rotated(&self, by: Rotation) -> Self {
        Self {
            family: self.family,
            rotation: self.rotation.compose(by),
            params: self.params.clone(),
        }
    }

    #[inline]
    fn th(&self) -> R {
        self.params[0]
    }

    /// `C(u, v)`, respecting the Frechet bounds and uniform margins.
    pub fn cdf(&self, u: R, v: R) -> R {
        let u = clamp_unit(u);
        let v = clamp_unit(v);
        let one = R::one();
        let c = match self.rotation {
            Rotation::R0 => self.base_cdf(u, v),
            Rotation::R90 => v - self.base_cdf(one - u, v),
            Rotation::R180 => u + v - one + self.base_cdf(one - u, one - v),
            Rotation::R270 => u - self.base_cdf(u, one - v),
        };
        c.max(R::zero()).min(u.min(v))
    }

    /// Copula density `c(u, v)`.
    pub fn pdf(&self, u: R, v: R) -> R {
        self.log_pdf(u, v).exp()
    }

    /// Log copula density, finite on the clamped unit square.
    pub fn log_pdf(&self, u: R, v: R) -> R {
        let u = clamp_unit(u);
        let v = clamp_unit(v);
        let one = R::one();
        match self.rotation {
            Rotation::R0 => self.base_log_pdf(u, v),
            Rotation::R90 => self.base_log_pdf(one - u, v),
            Rotation::R180 => self.base_log_pdf(one - u, one - v),
            Rotation::R270 => self.base_log_pdf(u, one - v),
        }
    }

    /// First h-function `h1(v | u) = dC/du`: the conditional CDF of `V`
    /// given `U = u`.
    pub fn hfunc1(&self, u: R, v: R) -> R {
        let u = clamp_unit(u);
        let v = clamp_unit(v);
        let one = R::one();
        let h = match self.rotation {
            Rotation::R0 => self.base_h1(u, v),
            Rotation::R90 => self.base_h1(one - u, v),
            Rotation::R180 => one - self.base_h1(one - u, one - v),
            Rotation::R270 => one - self.base_h1(u, one - v),
        };
        h.max(R::zero()).min(one)
    }

    /// Second h-function `h2(u | v) = dC/dv`.
    pub fn hfunc2(&self, u: R, v: R) -> R {
        let u = clamp_unit(u);
        let v = clamp_unit(v);
        let one = R::one();
        // all base families are exchangeable, so h2(u,v) = h1(v,u)
        let h = match self.rotation {
            Rotation::R0 => self.base_h1(v, u),
            Rotation::R90 => one - self.base_h1(v, one - u),
            Rotation::R180 => one - self.base_h1(one - v, one - u),
            Rotation::R270 => self.base_h1(one - v, u),
        };
        h.max(R::zero()).min(one)
    }

    /// Inverse of [`Self::hfunc1`] in `v`: returns `v` with `h1(v|u) = p`.
    pub fn hinv1(&self, u: R, p: R) -> R {
        let u = clamp_unit(u);
        let p = clamp_unit(p);
        let one = R::one();
        let v = match self.rotation {
            Rotation::R0 => self.base_hinv1(u, p),
            Rotation::R90 => self.base_hinv1(one - u, p),
            Rotation::R180 => one - self.base_hinv1(one - u, one - p),
            Rotation::R270 => one - self.base_hinv1(u, one - p),
        };
        clamp_unit(v)
    }

    /// Inverse of [`Self::hfunc2`] in `u`: returns `u` with `h2(u|v) = p`.
    pub fn hinv2(&self, v: R, p: R) -> R {
        let v = clamp_unit(v);
        let p = clamp_unit(p);
        let one = R::one();
        let u = match self.rotation {
            Rotation::R0 => self.base_hinv1(v, p),
            Rotation::R90 => one - self.base_hinv1(v, one - p),
            Rotation::R180 => one - self.base_hinv1(one - v, one - p),
            Rotation::R270 => self.base_hinv1(one - v, p),
        };
        clamp_unit(u)
    }

    /// Conditional-inversion sampler: n i.i.d. pairs with this copula.
    pub fn sample(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        let mut m = SampleMatrix::with_dim(2);
        for i in 0..n {
            let mut rng = stream.substream(i as u64);
            let u: R = unit(&mut rng);
            let p: R = unit(&mut rng);
            let v = self.hinv1(u, p);
            m.push_row(&[u, v]).expect("fixed row width");
        }
        m
    }

    /// Kendall's tau implied by the parameter; 90/270 rotations flip the sign.
    pub fn tau(&self) -> R {
        let base = match self.family {
            FamilyId::Independence => 0.0,
            FamilyId::Gaussian => {
                2.0 * self.th().as_f64().asin() / std::f64::consts::PI
            }
            FamilyId::Clayton => {
                let t = self.th().as_f64();
                t / (t + 2.0)
            }
            FamilyId::Gumbel => 1.0 - 1.0 / self.th().as_f64(),
            FamilyId::Frank => frank_tau(self.th().as_f64()),
            FamilyId::Amh => amh_tau(self.th().as_f64()),
        };
        let signed = if self.rotation.flips_tau() { -base } else { base };
        R::of(signed)
    }

    /// Copula with the given family whose Kendall's tau equals `tau`.
    ///
    /// `|tau| < 1e-12` collapses to the Independence family. Negative tau is
    /// expressed through a 90-degree rotation for Clayton and Gumbel; the
    /// other families cover it with their parameter sign. Unattainable tau
    /// values report the family's range.
    pub fn from_tau(family: FamilyId, tau: R) -> Result<Self> {
        let t = tau.as_f64();
        if !t.is_finite() || t.abs() >= 1.0 {
            return Err(VineError::TauRange {
                family: family.name(),
                tau: t,
                lo: -1.0,
                hi: 1.0,
            });
        }
        if t.abs() < TAU_ZERO {
            return Ok(Self::independence());
        }
        let range_err = |lo: f64, hi: f64| VineError::TauRange {
            family: family.name(),
            tau: t,
            lo,
            hi,
        };
        match family {
            FamilyId::Independence => Err(range_err(0.0, 0.0)),
            FamilyId::Gaussian => {
                let rho = (std::f64::consts::PI * t / 2.0).sin();
                if rho.abs() > GAUSS_RHO_MAX {
                    let hi = 2.0 * GAUSS_RHO_MAX.asin() / std::f64::consts::PI;
                    return Err(range_err(-hi, hi));
                }
                Self::gaussian(R::of(rho))
            }
            FamilyId::Clayton => {
                if t.abs() > CLAYTON_GUMBEL_TAU_MAX {
                    return Err(range_err(-CLAYTON_GUMBEL_TAU_MAX, CLAYTON_GUMBEL_TAU_MAX));
                }
                let theta = 2.0 * t.abs() / (1.0 - t.abs());
                let rot = if t < 0.0 { Rotation::R90 } else { Rotation::R0 };
                Self::clayton(R::of(theta), rot)
            }
            FamilyId::Gumbel => {
                if t.abs() > CLAYTON_GUMBEL_TAU_MAX {
                    return Err(range_err(-CLAYTON_GUMBEL_TAU_MAX, CLAYTON_GUMBEL_TAU_MAX));
                }
                let theta = 1.0 / (1.0 - t.abs());
                let rot = if t < 0.0 { Rotation::R90 } else { Rotation::R0 };
                Self::gumbel(R::of(theta), rot)
            }
            FamilyId::Frank => {
                let hi = frank_tau(FRANK_ETA_MAX);
                if t.abs() > hi {
                    return Err(range_err(-hi, hi));
                }
                let eta = bisect(
                    |e: f64| frank_tau(e) - t.abs(),
                    1e-10,
                    FRANK_ETA_MAX,
                    1e-12,
                    200,
                );
                Self::frank(R::of(if t < 0.0 { -eta } else { eta }))
            }
            FamilyId::Amh => {
                let lo = amh_tau(-AMH_ETA_BOUND);
                let hi = amh_tau(AMH_ETA_BOUND);
                if t < lo || t > hi {
                    return Err(range_err(lo, hi));
                }
                let eta = bisect(
                    |e: f64| amh_tau(e) - t,
                    -AMH_ETA_BOUND,
                    AMH_ETA_BOUND,
                    1e-14,
                    200,
                );
                let eta = if eta == 0.0 { t.signum() * 1e-12 } else { eta };
                Self::amh(R::of(eta), Rotation::R0)
            }
        }
    }

    /// Lower tail dependence coefficient `lim C(t,t)/t`.
    pub fn tail_lambda_lower(&self) -> R {
        let (lo, up) = self.base_tail_lambdas();
        R::of(match self.rotation {
            Rotation::R0 => lo,
            Rotation::R180 => up,
            // 90/270 move the corner mass off the diagonal
            Rotation::R90 | Rotation::R270 => 0.0,
        })
    }

    /// Upper tail dependence coefficient.
    pub fn tail_lambda_upper(&self) -> R {
        let (lo, up) = self.base_tail_lambdas();
        R::of(match self.rotation {
            Rotation::R0 => up,
            Rotation::R180 => lo,
            Rotation::R90 | Rotation::R270 => 0.0,
        })
    }

    fn base_tail_lambdas(&self) -> (f64, f64) {
        match self.family {
            FamilyId::Independence | FamilyId::Gaussian | FamilyId::Frank | FamilyId::Amh => {
                (0.0, 0.0)
            }
            FamilyId::Clayton => ((-std::f64::consts::LN_2 / self.th().as_f64()).exp(), 0.0),
            FamilyId::Gumbel => (0.0, 2.0 - 2f64.powf(1.0 / self.th().as_f64())),
        }
    }

    // ----- base (unrotated) family evaluations; u, v already clamped -----

    fn base_cdf(&self, u: R, v: R) -> R {
        match self.family {
            FamilyId::Independence => u * v,
            FamilyId::Gaussian => {
                let x = norm_quantile(u);
                let y = norm_quantile(v);
                crate::numeric::normal::bvn_cdf(x, y, self.th())
            }
            FamilyId::Clayton => {
                let ln_t = self.clayton_ln_t(u, v);
                (-ln_t / self.th()).exp()
            }
            FamilyId::Gumbel => {
                let ln_s = self.gumbel_ln_s(u, v);
                (-(ln_s / self.th()).exp()).exp()
            }
            FamilyId::Frank => {
                let eta = self.th();
                let r = (u * (-eta)).exp_m1() * (v * (-eta)).exp_m1() / (-eta).exp_m1();
                -r.ln_1p() / eta
            }
            FamilyId::Amh => {
                let eta = self.th();
                let one = R::one();
                u * v / (one - eta * (one - u) * (one - v))
            }
        }
    }

    fn base_log_pdf(&self, u: R, v: R) -> R {
        match self.family {
            FamilyId::Independence => R::zero(),
            FamilyId::Gaussian => {
                let rho = self.th();
                let one = R::one();
                let x = norm_quantile(u);
                let y = norm_quantile(v);
                let omr2 = (one - rho) * (one + rho);
                let half = R::of(0.5);
                -half * omr2.ln()
                    - (rho * rho * (x * x + y * y) - R::of(2.0) * rho * x * y)
                        / (R::of(2.0) * omr2)
            }
            FamilyId::Clayton => {
                let th = self.th();
                let one = R::one();
                let ln_t = self.clayton_ln_t(u, v);
                (one + th).ln() - (th + one) * (u.ln() + v.ln()) - (R::of(2.0) + one / th) * ln_t
            }
            FamilyId::Gumbel => {
                let th = self.th();
                let one = R::one();
                let lx = (-u.ln()).ln();
                let ly = (-v.ln()).ln();
                let ln_s = self.gumbel_ln_s(u, v);
                let t = (ln_s / th).exp(); // S^(1/theta)
                -t + (th - one) * (lx + ly) - u.ln() - v.ln()
                    + (R::of(2.0) / th - R::of(2.0)) * ln_s
                    + ((th - one) / t).ln_1p()
            }
            FamilyId::Frank => {
                let eta = self.th();
                let a = (-eta * u).exp();
                let b = (-eta * v).exp();
                let big_e = (-eta).exp();
                let d = a + b - a * b - big_e;
                let one = R::one();
                (eta.abs().ln() + (one - big_e).abs().ln()) - eta * (u + v)
                    - R::of(2.0) * d.abs().ln()
            }
            FamilyId::Amh => {
                let eta = self.th();
                let one = R::one();
                let d = one - eta * (one - u) * (one - v);
                let np = one - eta + R::of(2.0) * eta * v;
                let n = v * (one - eta + eta * v);
                let num = np * d - R::of(2.0) * eta * (one - u) * n;
                num.ln() - R::of(3.0) * d.ln()
            }
        }
    }

    fn base_h1(&self, u: R, v: R) -> R {
        match self.family {
            FamilyId::Independence => v,
            FamilyId::Gaussian => {
                let rho = self.th();
                let one = R::one();
                let x = norm_quantile(u);
                let y = norm_quantile(v);
                norm_cdf((y - rho * x) / ((one - rho) * (one + rho)).sqrt())
            }
            FamilyId::Clayton => {
                let th = self.th();
                let one = R::one();
                let ln_t = self.clayton_ln_t(u, v);
                ((-(th + one)) * u.ln() - (one + one / th) * ln_t).exp()
            }
            FamilyId::Gumbel => {
                let th = self.th();
                let one = R::one();
                let lx = (-u.ln()).ln();
                let ln_s = self.gumbel_ln_s(u, v);
                let t = (ln_s / th).exp();
                (-t + (one / th - one) * ln_s + (th - one) * lx - u.ln()).exp()
            }
            FamilyId::Frank => {
                let eta = self.th();
                let a = (-eta * u).exp();
                let b = (-eta * v).exp();
                let big_e = (-eta).exp();
                let d = a + b - a * b - big_e;
                a * (R::one() - b) / d
            }
            FamilyId::Amh => {
                let eta = self.th();
                let one = R::one();
                let d = one - eta * (one - u) * (one - v);
                v * (one - eta * (one - v)) / (d * d)
            }
        }
    }

    fn base_hinv1(&self, u: R, p: R) -> R {
        match self.family {
            FamilyId::Independence => p,
            FamilyId::Gaussian => {
                let rho = self.th();
                let one = R::one();
                let x = norm_quantile(u);
                let z = norm_quantile(p);
                norm_cdf(z * ((one - rho) * (one + rho)).sqrt() + rho * x)
            }
            FamilyId::Clayton => {
                let th = self.th();
                let one = R::one();
                // v^-theta = 1 + u^-theta (p^(-theta/(theta+1)) - 1)
                let q = ((-th / (th + one)) * p.ln()).exp_m1();
                if q <= R::zero() {
                    return p; // p at the clamp boundary; degenerate
                }
                let z = (-th) * u.ln() + q.ln();
                // softplus(z) = ln(1 + e^z)
                let sp = z.max(R::zero()) + (-z.abs()).exp().ln_1p();
                (-sp / th).exp()
            }
            FamilyId::Gumbel => {
                let lo = R::of(crate::scalar::UNIT_EPS);
                let hi = R::one() - lo;
                let f = |v: R| self.base_h1(u, v) - p;
                bisect(f, lo, hi, R::of(1e-13), 200)
            }
            FamilyId::Frank => {
                let eta = self.th();
                let one = R::one();
                let a = (-eta * u).exp();
                let big_e = (-eta).exp();
                let b = (a * (one - p) + p * big_e) / (a * (one - p) + p);
                -b.ln() / eta
            }
            FamilyId::Amh => {
                let eta = self.th();
                let one = R::one();
                let alpha = one - eta * (one - u);
                let beta = eta * (one - u);
                let qa = p * beta * beta - eta;
                let qb = R::of(2.0) * p * alpha * beta - (one - eta);
                let qc = p * alpha * alpha;
                solve_quadratic_in_unit(qa, qb, qc).unwrap_or(p)
            }
        }
    }

    /// `ln(u^-theta + v^-theta - 1)` without overflow.
    fn clayton_ln_t(&self, u: R, v: R) -> R {
        let th = self.th().as_f64();
        let a = -th * u.as_f64().ln();
        let b = -th * v.as_f64().ln();
        let m = a.max(b);
        R::of(m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln())
    }

    /// `ln((-ln u)^theta + (-ln v)^theta)` without overflow.
    fn gumbel_ln_s(&self, u: R, v: R) -> R {
        let th = self.th().as_f64();
        let lx = (-u.as_f64().ln()).ln();
        let ly = (-v.as_f64().ln()).ln();
        R::of(log_sum_exp(th * lx, th * ly))
    }
}

/// Root of `a x^2 + b x + c = 0` inside `(0, 1)`, solved in the numerically
/// stable split form; falls back to the linear root when `a` vanishes.
fn solve_quadratic_in_unit<R: Real>(a: R, b: R, c: R) -> Option<R> {
    let zero = R::zero();
    let one = R::one();
    if a.abs() < R::of(1e-300) {
        let x = -c / b;
        return (x > zero && x < one).then_some(x);
    }
    let disc = b * b - R::of(4.0) * a * c;
    if disc < zero {
        return None;
    }
    let sq = disc.sqrt();
    let q = if b >= zero {
        -(b + sq) / R::of(2.0)
    } else {
        -(b - sq) / R::of(2.0)
    };
    let r1 = q / a;
    let r2 = c / q;
    for r in [r1, r2] {
        if r > zero && r < one {
            return Some(r);
        }
    }
    None
}

/// Kendall's tau of the Frank copula via the Debye-type integral.
pub(crate) fn frank_tau(eta: f64) -> f64 {
    debug_assert!(eta != 0.0);
    let a = eta.abs();
    let tau = 1.0 + 4.0 * debye1_minus_one(a) / a;
    if eta < 0.0 {
        -tau
    } else {
        tau
    }
}

/// Kendall's tau of the AMH copula: closed form with a series fallback
/// near zero where the closed form cancels catastrophically.
pub(crate) fn amh_tau(eta: f64) -> f64 {
    debug_assert!(eta.abs() < 1.0);
    if eta == 0.0 {
        return 0.0;
    }
    if eta.abs() < 1e-4 {
        return 2.0 * eta / 9.0 + eta * eta / 18.0 + eta * eta * eta / 45.0;
    }
    1.0 - 2.0 * (eta + (1.0 - eta) * (1.0 - eta) * (-eta).ln_1p()) / (3.0 * eta * eta)
}

// serialization: {"family": "gumbel", "rotation": 90, "params": [5.0]}
#[derive(Serialize, Deserialize)]
struct PairCopulaRepr {
    family: String,
    rotation: u16,
    params: Vec<f64>,
}

impl<R: Real> Serialize for PairCopula<R> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairCopulaRepr {
            family: self.family.name().to_string(),
            rotation: self.rotation.degrees(),
            params: self.params.iter().map(|p| p.as_f64()).collect(),
        }
        .serialize(s)
    }
}

impl<'de, R: Real> Deserialize<'de> for PairCopula<R> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PairCopulaRepr::deserialize(d)?;
        let family = FamilyId::from_name(&repr.family)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown family '{}'", repr.family)))?;
        let rotation = Rotation::from_degrees(repr.rotation).ok_or_else(|| {
            serde::de::Error::custom(format!("invalid rotation {} degrees", repr.rotation))
        })?;
        PairCopula::new(family, rotation, repr.params.into_iter().map(R::of).collect())
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families_at_moderate_params() -> Vec<PairCopula<f64>> {
        vec![
            PairCopula::independence(),
            PairCopula::gaussian(0.5).unwrap(),
            PairCopula::clayton(2.0, Rotation::R0).unwrap(),
            PairCopula::gumbel(1.8, Rotation::R0).unwrap(),
            PairCopula::frank(5.0).unwrap(),
            PairCopula::amh(0.7, Rotation::R0).unwrap(),
        ]
    }

    #[test]
    fn independence_cdf_is_the_product() {
        let pc: PairCopula<f64> = PairCopula::independence();
        assert!((pc.cdf(0.3, 0.7) - 0.21).abs() < 1e-15);
        assert_eq!(pc.pdf(0.42, 0.9), 1.0);
        assert_eq!(pc.hfunc1(0.3, 0.6), 0.6);
        assert_eq!(pc.hinv1(0.3, 0.25), 0.25);
    }

    #[test]
    fn uniform_margins_for_every_family() {
        for pc in families_at_moderate_params() {
            for &u in &[0.1, 0.5, 0.9] {
                assert!(
                    (pc.cdf(u, 1.0) - u).abs() < 1e-8,
                    "{:?} cdf(u,1) != u",
                    pc.family()
                );
                assert!(
                    (pc.cdf(1.0, u) - u).abs() < 1e-8,
                    "{:?} cdf(1,v) != v",
                    pc.family()
                );
            }
        }
    }

    #[test]
    fn frechet_bounds_hold_on_a_grid() {
        let mut all = families_at_moderate_params();
        all.push(PairCopula::gaussian(-0.8).unwrap());
        all.push(PairCopula::frank(-4.0).unwrap());
        all.push(PairCopula::clayton(3.0, Rotation::R90).unwrap());
        all.push(PairCopula::gumbel(4.0, Rotation::R270).unwrap());
        for pc in all {
            for i in 1..10 {
                for j in 1..10 {
                    let u = i as f64 / 10.0;
                    let v = j as f64 / 10.0;
                    let c = pc.cdf(u, v);
                    assert!(c >= (u + v - 1.0).max(0.0) - 1e-12);
                    assert!(c <= u.min(v) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn gaussian_zero_rho_is_independence() {
        let pc: PairCopula<f64> = PairCopula::gaussian(0.0).unwrap();
        for &(u, v) in &[(0.2, 0.8), (0.5, 0.5), (0.9, 0.1)] {
            assert!((pc.pdf(u, v) - 1.0).abs() < 1e-12);
            assert!((pc.cdf(u, v) - u * v).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_median_h_is_half() {
        let pc: PairCopula<f64> = PairCopula::gaussian(0.5).unwrap();
        assert!((pc.hfunc1(0.5, 0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn h_boundary_values() {
        for pc in families_at_moderate_params() {
            let h0 = pc.hfunc1(0.4, 0.0);
            let h1 = pc.hfunc1(0.4, 1.0);
            assert!(h0 < 1e-6, "{:?} h(0|u) = {h0}", pc.family());
            assert!(h1 > 1.0 - 1e-6, "{:?} h(1|u) = {h1}", pc.family());
        }
    }

    #[test]
    fn h_is_nondecreasing_in_v() {
        for pc in families_at_moderate_params() {
            for &u in &[0.2, 0.5, 0.8] {
                let mut last = -1.0f64;
                for j in 1..40 {
                    let v = j as f64 / 40.0;
                    let h = pc.hfunc1(u, v);
                    assert!(h >= last - 1e-12, "{:?}", pc.family());
                    last = h;
                }
            }
        }
    }

    #[test]
    fn hinv_roundtrips() {
        let mut all = families_at_moderate_params();
        all.push(PairCopula::clayton(2.0, Rotation::R90).unwrap());
        all.push(PairCopula::gumbel(3.0, Rotation::R180).unwrap());
        all.push(PairCopula::amh(-0.6, Rotation::R270).unwrap());
        all.push(PairCopula::frank(-7.0).unwrap());
        for pc in all {
            for i in 1..=9 {
                for j in 1..=9 {
                    let u = i as f64 / 10.0;
                    let v = j as f64 / 10.0;
                    let p = pc.hfunc1(u, v);
                    let back = pc.hinv1(u, p);
                    assert!(
                        (back - v).abs() < 1e-8,
                        "{:?} rot {:?}: hinv1(h1) {} != {}",
                        pc.family(),
                        pc.rotation(),
                        back,
                        v
                    );
                    let q = pc.hfunc2(u, v);
                    let back2 = pc.hinv2(v, q);
                    assert!(
                        (back2 - u).abs() < 1e-8,
                        "{:?} rot {:?}: hinv2(h2) {} != {}",
                        pc.family(),
                        pc.rotation(),
                        back2,
                        u
                    );
                }
            }
        }
    }

    #[test]
    fn clayton_hinv_matches_bisection_oracle() {
        let pc: PairCopula<f64> = PairCopula::clayton(2.0, Rotation::R0).unwrap();
        let (u, p) = (0.5, 0.25);
        let v = pc.hinv1(u, p);
        let oracle = bisect(|x: f64| pc.hfunc1(u, x) - p, 1e-10, 1.0 - 1e-10, 1e-12, 300);
        assert!((v - oracle).abs() < 1e-9);
    }

    #[test]
    fn tau_closed_forms() {
        let gumbel: PairCopula<f64> = PairCopula::gumbel(5.0, Rotation::R0).unwrap();
        assert!((gumbel.tau() - 0.8).abs() < 1e-15);
        let clayton: PairCopula<f64> = PairCopula::clayton(2.0, Rotation::R0).unwrap();
        assert!((clayton.tau() - 0.5).abs() < 1e-15);
        let indep: PairCopula<f64> = PairCopula::independence();
        assert_eq!(indep.tau(), 0.0);
        // rotation flips the sign for 90/270, keeps it for 180
        assert!((gumbel.rotated(Rotation::R90).tau() + 0.8).abs() < 1e-15);
        assert!((gumbel.rotated(Rotation::R180).tau() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn from_tau_inverts_tau() {
        for family in [
            FamilyId::Gaussian,
            FamilyId::Clayton,
            FamilyId::Gumbel,
            FamilyId::Frank,
            FamilyId::Amh,
        ] {
            for &t in &[-0.15, 0.1, 0.25, 0.32] {
                if family == FamilyId::Amh && t > 0.33 {
                    continue;
                }
                let pc = PairCopula::<f64>::from_tau(family, t).unwrap();
                assert!(
                    (pc.tau() - t).abs() < 1e-6,
                    "{family:?} tau {t}: got {}",
                    pc.tau()
                );
            }
        }
        let g = PairCopula::<f64>::from_tau(FamilyId::Gumbel, 0.5).unwrap();
        assert!((g.params()[0] - 2.0).abs() < 1e-12);
        let high = PairCopula::<f64>::from_tau(FamilyId::Gumbel, 0.8).unwrap();
        assert!((high.params()[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn from_tau_zero_is_independence() {
        for family in FamilyId::ALL {
            let pc = PairCopula::<f64>::from_tau(family, 0.0).unwrap();
            assert_eq!(pc.family(), FamilyId::Independence);
        }
    }

    #[test]
    fn amh_tau_outside_range_errors() {
        let err = PairCopula::<f64>::from_tau(FamilyId::Amh, 0.4).unwrap_err();
        match err {
            VineError::TauRange { family, hi, .. } => {
                assert_eq!(family, "amh");
                assert!(hi < 1.0 / 3.0 + 1e-9);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn amh_tau_range_endpoints() {
        // numeric evaluation at the domain endpoints
        let lo = amh_tau(-AMH_ETA_BOUND);
        let hi = amh_tau(AMH_ETA_BOUND);
        assert!(lo > -0.1817 && lo < -0.1816, "lo={lo}");
        assert!(hi < 1.0 / 3.0 && hi > 1.0 / 3.0 - 1e-6, "hi={hi}");
    }

    #[test]
    fn negative_tau_uses_rotation_for_clayton_gumbel() {
        let pc = PairCopula::<f64>::from_tau(FamilyId::Clayton, -0.4).unwrap();
        assert_eq!(pc.rotation(), Rotation::R90);
        assert!((pc.tau() + 0.4).abs() < 1e-9);
    }

    #[test]
    fn rotation_algebra() {
        let pc: PairCopula<f64> = PairCopula::gumbel(3.0, Rotation::R0).unwrap();
        // four quarter turns restore the density pointwise
        let back = pc
            .rotated(Rotation::R90)
            .rotated(Rotation::R90)
            .rotated(Rotation::R90)
            .rotated(Rotation::R90);
        for &(u, v) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.33)] {
            assert!((back.pdf(u, v) - pc.pdf(u, v)).abs() < 1e-12);
            // 180-degree convention: c_rot(u,v) = c(1-u, 1-v)
            let r180 = pc.rotated(Rotation::R180);
            assert!((r180.pdf(u, v) - pc.pdf(1.0 - u, 1.0 - v)).abs() < 1e-12);
            let r90 = pc.rotated(Rotation::R90);
            assert!((r90.pdf(u, v) - pc.pdf(1.0 - u, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_coefficients() {
        let indep: PairCopula<f64> = PairCopula::independence();
        assert_eq!(indep.tail_lambda_lower(), 0.0);
        assert_eq!(indep.tail_lambda_upper(), 0.0);
        let clayton: PairCopula<f64> = PairCopula::clayton(2.0, Rotation::R0).unwrap();
        assert!((clayton.tail_lambda_lower() - 2f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(clayton.tail_lambda_upper(), 0.0);
        // 180 rotation swaps the tails
        let survival = clayton.rotated(Rotation::R180);
        assert!((survival.tail_lambda_upper() - 2f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(survival.tail_lambda_lower(), 0.0);
        let gauss: PairCopula<f64> = PairCopula::gaussian(0.8).unwrap();
        assert_eq!(gauss.tail_lambda_lower(), 0.0);
    }

    #[test]
    fn sampling_matches_parameter_tau() {
        let pc = PairCopula::<f64>::from_tau(FamilyId::Gumbel, 0.8).unwrap();
        let mut stream = RandomStream::new(99);
        let s = pc.sample(2000, &mut stream);
        let tau = crate::stats::kendall_tau_b(&s.column(0), &s.column(1));
        assert!((tau - 0.8).abs() < 0.05, "empirical tau {tau}");
        let empty = pc.sample(0, &mut stream);
        assert_eq!(empty.n(), 0);
    }

    #[test]
    fn domain_errors() {
        assert!(PairCopula::<f64>::gaussian(1.0).is_err());
        assert!(PairCopula::<f64>::clayton(0.0, Rotation::R0).is_err());
        assert!(PairCopula::<f64>::gumbel(0.9, Rotation::R0).is_err());
        assert!(PairCopula::<f64>::frank(0.0).is_err());
        assert!(PairCopula::<f64>::amh(1.0, Rotation::R0).is_err());
        assert!(PairCopula::<f64>::new(FamilyId::Independence, Rotation::R0, vec![1.0]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let pc: PairCopula<f64> = PairCopula::gumbel(5.0, Rotation::R90).unwrap();
        let json = serde_json::to_string(&pc).unwrap();
        assert!(json.contains("\"gumbel\""));
        assert!(json.contains("\"rotation\":90"));
        let back: PairCopula<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(pc, back);
    }
}
