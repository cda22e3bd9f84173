//! Exact ground-truth generators.
//!
//! These models are deliberately *not* simplified vines: they expose exact
//! joint densities, exact samplers, and (where known in closed form) the
//! conditional copula as a function of the conditioning value. They are the
//! reference against which fitted simplified models are compared.

use crate::error::{Result, VineError};
use crate::numeric::normal::{norm_pdf_f64, norm_quantile};
use crate::numeric::root::bisect;
use crate::pair_copula::{FamilyId, PairCopula, Rotation};
use crate::rng::{unit, RandomStream};
use crate::sample::SampleMatrix;
use crate::scalar::{clamp_unit, Real};
use crate::vine_model::VineModel;
use crate::vine_structure::{Edge, RVineStructure};

/// A generator with an exact joint density and an exact sampler.
///
/// Copula-scale models live on `(0,1)^d`; the regression example is on the
/// real scale. `exact_density` panics on a dimension mismatch.
pub trait GroundTruth<R: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn label(&self) -> &str;
    fn exact_density(&self, x: &[R]) -> R;
    fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R>;
}

impl<R: Real> GroundTruth<R> for VineModel<R> {
    fn dim(&self) -> usize {
        VineModel::dim(self)
    }

    fn label(&self) -> &str {
        "vine"
    }

    fn exact_density(&self, x: &[R]) -> R {
        self.log_density(x).expect("dimension matches").exp()
    }

    fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        VineModel::simulate(self, n, stream)
    }
}

/// Archimedean family of the exchangeable trivariate generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchFamily {
    Frank,
    Amh,
}

/// Exchangeable trivariate Archimedean copula (Frank or AMH generator).
///
/// All three bivariate margins equal the same-family bivariate copula with
/// the same parameter. The conditional copula of the first two variables
/// given the third is AMH with a parameter that moves with the conditioning
/// value, so the simplifying assumption fails by construction.
#[derive(Debug, Clone)]
pub struct TrivariateArchimedean<R: Real> {
    family: ArchFamily,
    eta: R,
    margin: PairCopula<R>,
    label: String,
}

impl<R: Real> TrivariateArchimedean<R> {
    /// Frank generator; requires `eta > 0` for the trivariate construction.
    pub fn frank(eta: R) -> Result<Self> {
        let e = eta.as_f64();
        if !e.is_finite() || e <= 0.0 || e > 35.0 {
            return Err(VineError::ParamDomain {
                family: "frank3",
                detail: format!("eta={e} not in (0, 35]"),
            });
        }
        Ok(Self {
            family: ArchFamily::Frank,
            eta,
            margin: PairCopula::frank(eta)?,
            label: format!("frank3:{e}"),
        })
    }

    /// AMH generator; requires `eta in (0, 1)`.
    pub fn amh(eta: R) -> Result<Self> {
        let e = eta.as_f64();
        if !e.is_finite() || e <= 0.0 || e >= 1.0 {
            return Err(VineError::ParamDomain {
                family: "amh3",
                detail: format!("eta={e} not in (0, 1)"),
            });
        }
        Ok(Self {
            family: ArchFamily::Amh,
            eta,
            margin: PairCopula::amh(eta, Rotation::R0)?,
            label: format!("amh3:{e}"),
        })
    }

    pub fn family(&self) -> ArchFamily {
        self.family
    }

    pub fn eta(&self) -> R {
        self.eta
    }

    /// The bivariate margin shared by all three pairs.
    pub fn bivariate_margin(&self) -> &PairCopula<R> {
        &self.margin
    }

    /// The closed-form conditional copula of the remaining pair given one
    /// coordinate at `u3`.
    pub fn conditional_copula(&self, u3: R) -> PairCopula<R> {
        match self.family {
            ArchFamily::Frank => conditional_copula_frank(self.eta, u3),
            ArchFamily::Amh => conditional_copula_amh(self.eta, u3),
        }
    }

    /// Conditional CDF `F(u3 | u1, u2)` from the nested generator; the
    /// sampler inverts this numerically.
    fn third_conditional(&self, u1: f64, u2: f64, u3: f64) -> f64 {
        let eta = self.eta.as_f64();
        match self.family {
            ArchFamily::Frank => {
                let k = (-eta).exp_m1();
                let w1 = (-eta * u1).exp_m1();
                let w2 = (-eta * u2).exp_m1();
                let w3 = (-eta * u3).exp_m1();
                let w12 = w1 * w2 / k;
                let w123 = w12 * w3 / k;
                (w3 / k) * ((1.0 + w12) / (1.0 + w123)).powi(2)
            }
            ArchFamily::Amh => {
                let q = |t: f64| (1.0 - eta * (1.0 - t)) / t;
                let e12 = q(u1) * q(u2);
                let e123 = e12 * q(u3);
                (e123 * (e123 + eta) * (e12 - eta).powi(3))
                    / (e12 * (e12 + eta) * (e123 - eta).powi(3))
            }
        }
    }

    fn density_f64(&self, u1: f64, u2: f64, u3: f64) -> f64 {
        let eta = self.eta.as_f64();
        match self.family {
            ArchFamily::Frank => {
                // inverse-generator derivatives in terms of w = K e^{-s}
                let k = (-eta).exp_m1();
                let w1 = (-eta * u1).exp_m1();
                let w2 = (-eta * u2).exp_m1();
                let w3 = (-eta * u3).exp_m1();
                let w = w1 * w2 * w3 / (k * k);
                let g3 = w * (1.0 - w) / (eta * (1.0 + w).powi(3));
                let phi_d = |t: f64, wt: f64| eta * (-eta * t).exp() / wt;
                g3 * phi_d(u1, w1) * phi_d(u2, w2) * phi_d(u3, w3)
            }
            ArchFamily::Amh => {
                let q = |t: f64| (1.0 - eta * (1.0 - t)) / t;
                let e = q(u1) * q(u2) * q(u3);
                let g3 = -(1.0 - eta) * e * (e * e + 4.0 * eta * e + eta * eta)
                    / (e - eta).powi(4);
                let phi_d = |t: f64| (eta - 1.0) / (t * (1.0 - eta + eta * t));
                g3 * phi_d(u1) * phi_d(u2) * phi_d(u3)
            }
        }
    }
}

impl<R: Real> GroundTruth<R> for TrivariateArchimedean<R> {
    fn dim(&self) -> usize {
        3
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn exact_density(&self, x: &[R]) -> R {
        assert_eq!(x.len(), 3);
        let u1 = clamp_unit(x[0]).as_f64();
        let u2 = clamp_unit(x[1]).as_f64();
        let u3 = clamp_unit(x[2]).as_f64();
        R::of(self.density_f64(u1, u2, u3))
    }

    fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        let mut out = SampleMatrix::with_dim(3);
        for i in 0..n {
            let mut rng = stream.substream(i as u64);
            let w1: f64 = unit(&mut rng);
            let w2: f64 = unit(&mut rng);
            let w3: f64 = unit(&mut rng);
            let u1 = w1;
            let u2 = self.margin.hinv1(R::of(u1), R::of(w2)).as_f64();
            let eps = crate::scalar::UNIT_EPS;
            let u3 = bisect(
                |t: f64| self.third_conditional(u1, u2, t) - w3,
                eps,
                1.0 - eps,
                1e-12,
                200,
            );
            out.push_row(&[R::of(u1), R::of(u2), R::of(u3)])
                .expect("fixed row width");
        }
        out
    }
}

/// Conditional copula of a trivariate Frank copula given its third
/// coordinate: AMH with parameter `1 - exp(-eta * u3)`.
pub fn conditional_copula_frank<R: Real>(eta: R, u3: R) -> PairCopula<R> {
    let u3 = clamp_unit(u3);
    let param = -(-eta * u3).exp_m1(); // 1 - exp(-eta u3)
    PairCopula::amh(param, Rotation::R0).expect("conditional parameter lies in (0,1)")
}

/// Conditional copula of a trivariate AMH copula given its third
/// coordinate: AMH with parameter `u3 eta / (1 - eta + u3 eta)`.
pub fn conditional_copula_amh<R: Real>(eta: R, u3: R) -> PairCopula<R> {
    let u3 = clamp_unit(u3);
    let param = u3 * eta / (R::one() - eta + u3 * eta);
    PairCopula::amh(param, Rotation::R0).expect("conditional parameter lies in (0,1)")
}

/// A conditional copula as a function of the conditioning value.
pub struct ConditionalCopulaCurve<R: Real> {
    f: Box<dyn Fn(R) -> PairCopula<R> + Send + Sync>,
    label: String,
}

impl<R: Real> ConditionalCopulaCurve<R> {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(R) -> PairCopula<R> + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Box::new(f),
            label: label.into(),
        }
    }

    pub fn frank(eta: R) -> Self {
        Self::new(format!("frank3:{}", eta.as_f64()), move |u3| {
            conditional_copula_frank(eta, u3)
        })
    }

    pub fn amh(eta: R) -> Self {
        Self::new(format!("amh3:{}", eta.as_f64()), move |u3| {
            conditional_copula_amh(eta, u3)
        })
    }

    pub fn independence() -> Self {
        Self::new("independence", |_| PairCopula::independence())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, u: R) -> PairCopula<R> {
        (self.f)(u)
    }
}

/// Kendall's tau of the conditional copula along a grid of conditioning
/// values.
pub fn conditional_tau_curve<R: Real>(
    curve: &ConditionalCopulaCurve<R>,
    grid: &[R],
) -> Vec<(R, R)> {
    grid.iter().map(|&u| (u, curve.at(u).tau())).collect()
}

/// Violation strength of the four-variable generator: the slope of the
/// conditional tau in the second tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationStrength {
    Strong,
    Moderate,
}

impl ViolationStrength {
    pub fn slope(&self) -> f64 {
        match self {
            ViolationStrength::Strong => 0.9,
            ViolationStrength::Moderate => 0.4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ViolationStrength::Strong => "strong",
            ViolationStrength::Moderate => "moderate",
        }
    }
}

/// Four-variable non-simplified generator on the C-vine rooted at 1.
///
/// First tree: `c12 = c13 = c14` Gumbel with tau 0.5. Second tree:
/// `c24|1 = c34|1` Gumbel with tau `slope * (2 u1 - 1)`, rotated 90 degrees
/// when the tau is negative (Independence at exactly zero). Third tree:
/// independence. Sampling is sequential conditional inversion through the
/// u1-dependent copulas, so both the density and the sampler are exact.
#[derive(Debug, Clone)]
pub struct SpuriousDependenceModel<R: Real> {
    slope: R,
    first_tree: PairCopula<R>,
    structure: RVineStructure,
    label: String,
}

impl<R: Real> SpuriousDependenceModel<R> {
    pub fn new(strength: ViolationStrength) -> Self {
        Self::with_slope(R::of(strength.slope()), format!("fig4-{}", strength.name()))
    }

    pub fn with_slope(slope: R, label: String) -> Self {
        let first_tree =
            PairCopula::from_tau(FamilyId::Gumbel, R::of(0.5)).expect("tau 0.5 attainable");
        let structure =
            RVineStructure::cvine_ordered(&[1, 4, 2, 3]).expect("generator structure is regular");
        Self {
            slope,
            first_tree,
            structure,
            label,
        }
    }

    pub fn slope(&self) -> R {
        self.slope
    }

    /// The generator's own vine structure (tree 1 rooted at variable 1,
    /// tree 2 at the (1,4) edge, third tree `2,3|1,4`).
    pub fn structure(&self) -> &RVineStructure {
        &self.structure
    }

    pub fn first_tree_copula(&self) -> &PairCopula<R> {
        &self.first_tree
    }

    /// Second-tree conditional copula at conditioning value `u1`.
    pub fn conditional_pair(&self, u1: R) -> PairCopula<R> {
        let tau = self.slope * (R::of(2.0) * clamp_unit(u1) - R::one());
        PairCopula::from_tau(FamilyId::Gumbel, tau).expect("|tau| <= slope < 0.99")
    }
}

impl<R: Real> GroundTruth<R> for SpuriousDependenceModel<R> {
    fn dim(&self) -> usize {
        4
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn exact_density(&self, x: &[R]) -> R {
        assert_eq!(x.len(), 4);
        let u1 = clamp_unit(x[0]);
        let u2 = clamp_unit(x[1]);
        let u3 = clamp_unit(x[2]);
        let u4 = clamp_unit(x[3]);
        let pc1 = &self.first_tree;
        let y2 = pc1.hfunc1(u1, u2);
        let y3 = pc1.hfunc1(u1, u3);
        let y4 = pc1.hfunc1(u1, u4);
        let c2 = self.conditional_pair(u1);
        let ll = pc1.log_pdf(u1, u2)
            + pc1.log_pdf(u1, u3)
            + pc1.log_pdf(u1, u4)
            + c2.log_pdf(y2, y4)
            + c2.log_pdf(y3, y4);
        ll.exp()
    }

    fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        let pc1 = &self.first_tree;
        let mut out = SampleMatrix::with_dim(4);
        for i in 0..n {
            let mut rng = stream.substream(i as u64);
            let w1: R = unit(&mut rng);
            let w2: R = unit(&mut rng);
            let w3: R = unit(&mut rng);
            let w4: R = unit(&mut rng);
            let u1 = w1;
            let u4 = pc1.hinv1(u1, w4);
            let y4 = pc1.hfunc1(u1, u4);
            let c2 = self.conditional_pair(u1);
            let x2 = c2.hinv2(y4, w2);
            let u2 = pc1.hinv1(u1, x2);
            let x3 = c2.hinv2(y4, w3);
            let u3 = pc1.hinv1(u1, x3);
            out.push_row(&[u1, u2, u3, u4]).expect("fixed row width");
        }
        out
    }
}

/// The edge carrying the spurious dependence in the fitted vine: `2,3|1,4`.
pub fn spurious_edge() -> Edge {
    Edge::new(2, 3, vec![1, 4])
}

/// Simplified D-vine `1-2-3` with all pair-copulas Gumbel at tau 0.8: the
/// structure under which the simplifying assumption holds exactly.
pub fn structure_demo_true_model<R: Real>() -> VineModel<R> {
    let s = RVineStructure::dvine(3).expect("dvine(3) is valid");
    let pc = PairCopula::from_tau(FamilyId::Gumbel, R::of(0.8)).expect("tau 0.8 attainable");
    VineModel::new(
        s,
        vec![
            (Edge::new(1, 2, vec![]), pc.clone()),
            (Edge::new(2, 3, vec![]), pc.clone()),
            (Edge::new(1, 3, vec![2]), pc),
        ],
    )
    .expect("all edges assigned")
}

/// The alternative D-vine `1-3-2` (explicit pair `1,2|3`) under which the
/// same distribution violates the simplifying assumption.
pub fn structure_demo_mismatched_decomposition() -> RVineStructure {
    RVineStructure::new(
        3,
        vec![
            vec![Edge::new(1, 3, vec![]), Edge::new(2, 3, vec![])],
            vec![Edge::new(1, 2, vec![3])],
        ],
    )
    .expect("d-vine 1-3-2 is regular")
}

/// Regression example: `Y = X1 + X2 * eps` with independent standard normal
/// `(X1, X2, eps)`.
///
/// The conditional law of `(Y, X1)` given `X2 = x2` is bivariate Gaussian
/// with correlation `1 / sqrt(1 + x2^2)`, so the simplifying assumption is
/// violated, yet the regression function `E[Y | x1, x2] = x1` matches the
/// simplified Gaussian model with covariance `[[2,1,0],[1,1,0],[0,0,1]]`.
/// Columns are `(y, x1, x2)` on the real scale.
#[derive(Debug, Clone, Default)]
pub struct GaussianRegressionExample;

impl GaussianRegressionExample {
    pub fn new() -> Self {
        Self
    }

    /// Correlation of `(Y, X1)` given `X2 = x2`.
    pub fn conditional_correlation<R: Real>(&self, x2: R) -> R {
        R::one() / (R::one() + x2 * x2).sqrt()
    }

    /// `E[Y | X1 = x1, X2 = x2]`.
    pub fn regression_fn<R: Real>(&self, x1: R, _x2: R) -> R {
        x1
    }

    /// Covariance of the simplified Gaussian counterpart.
    pub fn simplified_covariance(&self) -> [[f64; 3]; 3] {
        [[2.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }

    /// The simplified Gaussian counterpart as a ground-truth model.
    pub fn simplified(&self) -> TrivariateGaussian {
        TrivariateGaussian::new(self.simplified_covariance(), "gauss-regression-simplified")
            .expect("covariance is positive definite")
    }
}

impl<R: Real> GroundTruth<R> for GaussianRegressionExample {
    fn dim(&self) -> usize {
        3
    }

    fn label(&self) -> &str {
        "gauss-regression"
    }

    fn exact_density(&self, x: &[R]) -> R {
        assert_eq!(x.len(), 3);
        let (y, x1, x2) = (x[0].as_f64(), x[1].as_f64(), x[2].as_f64());
        let s = x2.abs().max(1e-300);
        R::of(norm_pdf_f64(x1) * norm_pdf_f64(x2) * norm_pdf_f64((y - x1) / s) / s)
    }

    fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        let labels = vec!["y".to_string(), "x1".to_string(), "x2".to_string()];
        let mut out = SampleMatrix::with_labels(labels);
        for i in 0..n {
            let mut rng = stream.substream(i as u64);
            let x1: R = norm_quantile(unit::<R>(&mut rng));
            let x2: R = norm_quantile(unit::<R>(&mut rng));
            let eps: R = norm_quantile(unit::<R>(&mut rng));
            let y = x1 + x2 * eps;
            out.push_row(&[y, x1, x2]).expect("fixed row width");
        }
        out
    }
}

/// Centered trivariate Gaussian with a fixed covariance matrix.
#[derive(Debug, Clone)]
pub struct TrivariateGaussian {
    sigma: [[f64; 3]; 3],
    chol: [[f64; 3]; 3],
    log_norm: f64,
    label: String,
}

impl TrivariateGaussian {
    pub fn new(sigma: [[f64; 3]; 3], label: &str) -> Result<Self> {
        let chol = cholesky3(&sigma).ok_or_else(|| {
            VineError::Numerical("covariance matrix is not positive definite".into())
        })?;
        let log_det = 2.0 * (chol[0][0].ln() + chol[1][1].ln() + chol[2][2].ln());
        let log_norm = -0.5 * (3.0 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(Self {
            sigma,
            chol,
            log_norm,
            label: label.to_string(),
        })
    }

    pub fn covariance(&self) -> &[[f64; 3]; 3] {
        &self.sigma
    }
}

impl<R: Real> GroundTruth<R> for TrivariateGaussian {
    fn dim(&self) -> usize {
        3
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn exact_density(&self, x: &[R]) -> R {
        assert_eq!(x.len(), 3);
        let v = [x[0].as_f64(), x[1].as_f64(), x[2].as_f64()];
        // solve L z = v, quadratic form is |z|^2
        let mut z = [0.0; 3];
        for i in 0..3 {
            let mut s = v[i];
            for j in 0..i {
                s -= self.chol[i][j] * z[j];
            }
            z[i] = s / self.chol[i][i];
        }
        let q: f64 = z.iter().map(|t| t * t).sum();
        R::of((self.log_norm - 0.5 * q).exp())
    }

    fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        let labels = vec!["y".to_string(), "x1".to_string(), "x2".to_string()];
        let mut out = SampleMatrix::with_labels(labels);
        for i in 0..n {
            let mut rng = stream.substream(i as u64);
            let z = [
                norm_quantile(unit::<f64>(&mut rng)),
                norm_quantile(unit::<f64>(&mut rng)),
                norm_quantile(unit::<f64>(&mut rng)),
            ];
            let mut x = [0.0; 3];
            for r in 0..3 {
                for c in 0..=r {
                    x[r] += self.chol[r][c] * z[c];
                }
            }
            out.push_row(&[R::of(x[0]), R::of(x[1]), R::of(x[2])])
                .expect("fixed row width");
        }
        out
    }
}

fn cholesky3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::kendall_tau_b;

    #[test]
    fn trivariate_frank_margin_recovers_pair_tau() {
        let model = TrivariateArchimedean::<f64>::frank(5.0).unwrap();
        let mut stream = RandomStream::new(17);
        let s = model.simulate(3000, &mut stream);
        let expect = model.bivariate_margin().tau();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let tau = kendall_tau_b(&s.column(i), &s.column(j));
            assert!(
                (tau - expect).abs() < 0.05,
                "pair ({i},{j}): tau {tau} vs {expect}"
            );
        }
    }

    #[test]
    fn trivariate_densities_are_exchangeable() {
        for model in [
            TrivariateArchimedean::<f64>::frank(4.0).unwrap(),
            TrivariateArchimedean::<f64>::amh(0.7).unwrap(),
        ] {
            let pts = [[0.2, 0.5, 0.8], [0.31, 0.64, 0.12], [0.9, 0.9, 0.1]];
            for p in pts {
                let base = model.exact_density(&p);
                for perm in [[p[1], p[0], p[2]], [p[2], p[1], p[0]], [p[0], p[2], p[1]]] {
                    assert!((model.exact_density(&perm) - base).abs() < 1e-12 * base.abs());
                }
            }
        }
    }

    #[test]
    fn trivariate_frank_small_eta_approaches_independence() {
        let model = TrivariateArchimedean::<f64>::frank(1e-6).unwrap();
        for p in [[0.2, 0.5, 0.8], [0.4, 0.4, 0.4]] {
            assert!((model.exact_density(&p) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn conditional_parameters_follow_the_closed_forms() {
        // Frank: parameter 1 - exp(-eta u3)
        let pc = conditional_copula_frank(5.0f64, 0.5);
        assert_eq!(pc.family(), FamilyId::Amh);
        assert!((pc.params()[0] - (1.0 - (-2.5f64).exp())).abs() < 1e-15);
        // limit u3 -> 0: parameter -> 0
        let small = conditional_copula_frank(5.0f64, 1e-9);
        assert!(small.params()[0] < 1e-8);
        // AMH: u3 eta / (1 - eta + u3 eta); at u3 = 1 the parameter is eta
        let pc = conditional_copula_amh(0.7f64, 1.0);
        assert!((pc.params()[0] - 0.7).abs() < 1e-9);
        let small = conditional_copula_amh(0.7f64, 1e-9);
        assert!(small.params()[0] < 1e-8);
    }

    #[test]
    fn conditional_tau_curves_respect_the_archimedean_bound() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        for curve in [
            ConditionalCopulaCurve::frank(3.0),
            ConditionalCopulaCurve::frank(12.0),
            ConditionalCopulaCurve::amh(0.5),
            ConditionalCopulaCurve::amh(0.95),
        ] {
            let taus = conditional_tau_curve(&curve, &grid);
            for (u, tau) in taus {
                assert!(
                    tau >= 0.0 && tau <= 1.0 / 3.0 + 1e-9,
                    "{} at {u}: tau {tau}",
                    curve.label()
                );
            }
        }
        let zeros = conditional_tau_curve(&ConditionalCopulaCurve::<f64>::independence(), &grid);
        assert!(zeros.iter().all(|(_, t)| *t == 0.0));
    }

    #[test]
    fn frank_conditional_tau_is_monotone_for_positive_eta() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let taus = conditional_tau_curve(&ConditionalCopulaCurve::frank(6.0), &grid);
        for w in taus.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn spurious_model_second_tree_vanishes_at_half() {
        let m = SpuriousDependenceModel::<f64>::new(ViolationStrength::Strong);
        let pc = m.conditional_pair(0.5);
        assert_eq!(pc.family(), FamilyId::Independence);
        // negative side rotates
        let neg = m.conditional_pair(0.2);
        assert_eq!(neg.rotation(), Rotation::R90);
        assert!(neg.tau() < 0.0);
        let pos = m.conditional_pair(0.9);
        assert_eq!(pos.rotation(), Rotation::R0);
        assert!((pos.tau() - 0.9 * 0.8).abs() < 1e-9);
    }

    #[test]
    fn spurious_model_first_tree_tau() {
        let m = SpuriousDependenceModel::<f64>::new(ViolationStrength::Moderate);
        let mut stream = RandomStream::new(5);
        let s = m.simulate(3000, &mut stream);
        let tau = kendall_tau_b(&s.column(0), &s.column(1));
        assert!((tau - 0.5).abs() < 0.05, "tau(U1,U2) = {tau}");
        assert_eq!(m.structure().dim(), 4);
        assert!(m.structure().validate().is_ok());
        assert!(m.structure().edge_index(&spurious_edge()).is_some());
    }

    #[test]
    fn structure_demo_models() {
        let truth = structure_demo_true_model::<f64>();
        assert_eq!(truth.dim(), 3);
        let mis = structure_demo_mismatched_decomposition();
        assert!(mis.validate().is_ok());
        assert!(mis.edge_index(&Edge::new(1, 2, vec![3])).is_some());
    }

    #[test]
    fn regression_example_formulas() {
        let ex = GaussianRegressionExample::new();
        assert_eq!(ex.conditional_correlation(0.0f64), 1.0);
        assert!(
            (ex.conditional_correlation(1.0f64) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15
        );
        assert_eq!(ex.regression_fn(0.7f64, -2.0), 0.7);
        let sigma = ex.simplified_covariance();
        assert_eq!(sigma[0][0], 2.0);
        assert_eq!(sigma[0][1], 1.0);
        assert_eq!(sigma[2][2], 1.0);
    }

    #[test]
    fn regression_example_marginal_moments() {
        let ex = GaussianRegressionExample::new();
        let mut stream = RandomStream::new(8);
        let s = <GaussianRegressionExample as GroundTruth<f64>>::simulate(&ex, 20_000, &mut stream);
        let n = s.n() as f64;
        let mean_y: f64 = s.column(0).iter().sum::<f64>() / n;
        let var_y: f64 = s.column(0).iter().map(|y| y * y).sum::<f64>() / n - mean_y * mean_y;
        assert!(mean_y.abs() < 0.05);
        assert!((var_y - 2.0).abs() < 0.1, "Var(Y) = {var_y}");
        let var_x1: f64 = s.column(1).iter().map(|x| x * x).sum::<f64>() / n;
        assert!((var_x1 - 1.0).abs() < 0.05);
    }

    #[test]
    fn simplified_gaussian_matches_its_covariance() {
        let ex = GaussianRegressionExample::new();
        let g = ex.simplified();
        let mut stream = RandomStream::new(9);
        let s = <TrivariateGaussian as GroundTruth<f64>>::simulate(&g, 20_000, &mut stream);
        let n = s.n() as f64;
        let cov_yx1: f64 = (0..s.n()).map(|i| s.get(i, 0) * s.get(i, 1)).sum::<f64>() / n;
        assert!((cov_yx1 - 1.0).abs() < 0.06, "cov = {cov_yx1}");
        let cov_yx2: f64 = (0..s.n()).map(|i| s.get(i, 0) * s.get(i, 2)).sum::<f64>() / n;
        assert!(cov_yx2.abs() < 0.06);
        // density normalizes like a Gaussian: check one point against the
        // independence product at the origin adjusted by the determinant
        let at_origin = <TrivariateGaussian as GroundTruth<f64>>::exact_density(&g, &[0.0; 3]);
        let det: f64 = 1.0; // det([[2,1,0],[1,1,0],[0,0,1]]) = 1
        let expect = (2.0 * std::f64::consts::PI).powf(-1.5) / det.sqrt();
        assert!((at_origin - expect).abs() < 1e-12);
    }
}
