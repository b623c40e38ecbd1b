//! Wishart sampling with real degrees of freedom (Bartlett construction)
//! and the half-scale Wishart log-density.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gamma::{ln_mv_gamma, ShapeParam};
use crate::linalg::CovMatrix;
use crate::rng::RngSeed;

/// Degrees of freedom and scale for a Wishart draw.
#[derive(Debug, Clone)]
pub struct WishartSpec {
    nu: f64,
    scale: CovMatrix<f64>,
}

impl WishartSpec {
    pub fn new(nu: f64, scale: CovMatrix<f64>) -> Result<Self> {
        let p = scale.dim();
        if !(nu > p as f64 - 1.0) {
            return Err(Error::ParameterOutOfRange {
                requirement: format!("nu > p - 1 = {}", p as f64 - 1.0),
                got: format!("nu = {nu}"),
            });
        }
        Ok(Self { nu, scale })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn scale(&self) -> &CovMatrix<f64> {
        &self.scale
    }
}

/// A draw Y with 2Y Wishart-distributed, so diag(Y) carries the
/// multivariate gamma convention.
#[derive(Debug, Clone)]
pub struct HalfWishartSample {
    y: DMatrix<f64>,
}

impl HalfWishartSample {
    pub fn new(y: DMatrix<f64>) -> Result<Self> {
        if y.nrows() != y.ncols() {
            return Err(Error::ShapeMismatch("Y must be square".into()));
        }
        if nalgebra::Cholesky::new(y.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { y })
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// The diagonal, distributed as the multivariate gamma vector.
    pub fn diag_x(&self) -> DVector<f64> {
        self.y.diagonal()
    }
}

/// Reusable Bartlett sampler: caches the Cholesky factor of the scale.
pub struct WishartSampler {
    spec: WishartSpec,
    chol_l: DMatrix<f64>,
    chi_df: Vec<ChiSquared<f64>>,
}

impl WishartSampler {
    pub fn new(spec: WishartSpec) -> Result<Self> {
        let chol_l = spec.scale.cholesky()?.l();
        let p = spec.scale.dim();
        let chi_df = (0..p)
            .map(|i| {
                ChiSquared::new(spec.nu - i as f64).map_err(|_| Error::ParameterOutOfRange {
                    requirement: "nu > p - 1".into(),
                    got: format!("nu = {}", spec.nu),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            spec,
            chol_l,
            chi_df,
        })
    }

    pub fn spec(&self) -> &WishartSpec {
        &self.spec
    }

    /// One M ~ W(nu, Sigma): M = L V V^T L^T with V_ii^2 chi-square(nu-i)
    /// and standard normal subdiagonals.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        let p = self.spec.scale.dim();
        let mut v = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            v[(i, i)] = self.chi_df[i].sample(rng).sqrt();
            for j in 0..i {
                v[(i, j)] = StandardNormal.sample(rng);
            }
        }
        let lv = &self.chol_l * v;
        &lv * lv.transpose()
    }

    /// One half-scale draw Y = M/2.
    pub fn sample_half<R: Rng>(&self, rng: &mut R) -> HalfWishartSample {
        HalfWishartSample {
            y: self.sample(rng) * 0.5,
        }
    }
}

/// Convenience one-shot sampler.
pub fn sample_wishart(spec: &WishartSpec, seed: RngSeed) -> Result<DMatrix<f64>> {
    let sampler = WishartSampler::new(spec.clone())?;
    Ok(sampler.sample(&mut seed.rng()))
}

/// Log-density of Y where 2Y ~ W(2 alpha, Sigma_22):
/// log [ Gamma_p(alpha)^-1 |Sigma|^-alpha |Y|^(alpha-(p+1)/2) etr(-Sigma^-1 Y) ].
pub fn half_wishart_log_pdf(
    y: &HalfWishartSample,
    alpha: &ShapeParam<f64>,
    scale: &CovMatrix<f64>,
) -> Result<f64> {
    let p = scale.dim();
    if y.y().nrows() != p {
        return Err(Error::ShapeMismatch(format!(
            "Y is {}x{}, scale is {}x{}",
            y.y().nrows(),
            y.y().ncols(),
            p,
            p
        )));
    }
    let a = alpha.alpha();
    let ln_norm = ln_mv_gamma(p, alpha)?;
    let chol_y =
        nalgebra::Cholesky::new(y.y().clone()).ok_or(Error::NotPositiveDefinite)?;
    let log_det_y: f64 = chol_y.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    let scale_chol = scale.cholesky()?;
    let log_det_scale = scale.log_det()?;
    let trace = scale_chol.solve(y.y()).trace();
    Ok(-ln_norm - a * log_det_scale + (a - (p as f64 + 1.0) / 2.0) * log_det_y - trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use nalgebra::dmatrix;
    use rand::SeedableRng;

    fn cov(m: DMatrix<f64>) -> CovMatrix<f64> {
        CovMatrix::new(m).unwrap()
    }

    #[test]
    fn rejects_low_dof() {
        let s = cov(dmatrix![1.0, 0.2; 0.2, 1.0]);
        assert!(WishartSpec::new(0.9, s).is_err());
    }

    #[test]
    fn scalar_chi_square_mean() {
        let spec = WishartSpec::new(3.7, cov(dmatrix![1.0])).unwrap();
        let sampler = WishartSampler::new(spec).unwrap();
        let mut rng = RngSeed::new(5).rng();
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let v = sampler.sample(&mut rng)[(0, 0)];
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let se = (((sumsq - sum * sum / n as f64) / (n as f64 - 1.0)) / n as f64).sqrt();
        assert!((mean - 3.7).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn mean_matrix_matches_nu_sigma() {
        let s = cov(dmatrix![2.0, 0.6; 0.6, 1.0]);
        let spec = WishartSpec::new(4.3, s.clone()).unwrap();
        let sampler = WishartSampler::new(spec).unwrap();
        let mut rng = RngSeed::new(11).rng();
        let n = 100_000usize;
        let mut acc = DMatrix::<f64>::zeros(2, 2);
        let mut acc_sq = DMatrix::<f64>::zeros(2, 2);
        for _ in 0..n {
            let m = sampler.sample(&mut rng);
            acc_sq += m.map(|v| v * v);
            acc += m;
        }
        let mean = &acc / n as f64;
        let expected = s.entries() * 4.3;
        for i in 0..2 {
            for j in 0..2 {
                let var =
                    (acc_sq[(i, j)] - acc[(i, j)] * acc[(i, j)] / n as f64) / (n as f64 - 1.0);
                let se = (var / n as f64).sqrt();
                assert!(
                    (mean[(i, j)] - expected[(i, j)]).abs() < 3.0 * se,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn integer_dof_matches_gaussian_sum() {
        // Two-sample mean comparison on the (0,0) entry, nu = 3.
        let s = cov(dmatrix![1.0, 0.4; 0.4, 1.5]);
        let spec = WishartSpec::new(3.0, s.clone()).unwrap();
        let sampler = WishartSampler::new(spec).unwrap();
        let mut rng = RngSeed::new(17).rng();
        let n = 10_000usize;
        let bartlett: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)[(0, 0)]).collect();
        let l = s.cholesky().unwrap().l();
        let mut rng2 = RngSeed::new(18).rng();
        let gaussian: Vec<f64> = (0..n)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let z = DVector::from_fn(2, |_, _| {
                            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng2)
                        });
                        let x = &l * z;
                        x[0] * x[0]
                    })
                    .sum::<f64>()
            })
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64], m: f64| {
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
        };
        let (m1, m2) = (mean(&bartlett), mean(&gaussian));
        let se = (var(&bartlett, m1) / n as f64 + var(&gaussian, m2) / n as f64).sqrt();
        assert!((m1 - m2).abs() < 4.0 * se, "m1 {m1}, m2 {m2}, se {se}");
    }

    #[test]
    fn scalar_half_wishart_is_scaled_gamma() {
        // p = 1: Y = x, scale sigma -> log of sigma^-a x^(a-1) e^(-x/sigma)/Gamma(a).
        let alpha = ShapeParam::new(2.0).unwrap();
        let sigma = 1.7;
        let scale = cov(dmatrix![sigma]);
        let x = 0.9;
        let y = HalfWishartSample::new(dmatrix![x]).unwrap();
        let lp = half_wishart_log_pdf(&y, &alpha, &scale).unwrap();
        let oracle = -2.0 * sigma.ln() + (2.0 - 1.0) * x.ln() - x / sigma
            - crate::gamma::ln_gamma(2.0f64);
        assert!((lp - oracle).abs() < 1e-12);
    }

    #[test]
    fn scalar_half_wishart_normalizes() {
        let alpha = ShapeParam::new(2.0).unwrap();
        let scale = cov(dmatrix![1.7]);
        let total = quad::integrate_semi_infinite(
            |x| {
                let y = HalfWishartSample { y: dmatrix![x] };
                half_wishart_log_pdf(&y, &alpha, &scale).unwrap().exp()
            },
            0.0,
            1e-9,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-7, "total {total}");
    }

    #[test]
    fn p2_density_self_normalizes_by_importance_sampling() {
        // E_proposal[ exp(target_log_pdf - proposal_log_pdf) ] = 1 when both
        // normalizers are right and the sampler matches its density. The
        // proposal uses a larger shape so the ratio has finite variance.
        let s = cov(dmatrix![1.0, 0.3; 0.3, 0.8]);
        let target = ShapeParam::new(1.75).unwrap(); // 2a = 3.5
        let proposal = ShapeParam::new(2.2).unwrap();
        let spec = WishartSpec::new(2.0 * proposal.alpha(), s.clone()).unwrap();
        let sampler = WishartSampler::new(spec).unwrap();
        let mut rng = RngSeed::new(23).rng();
        let n = 100_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let y = sampler.sample_half(&mut rng);
            let lt = half_wishart_log_pdf(&y, &target, &s).unwrap();
            let lq = half_wishart_log_pdf(&y, &proposal, &s).unwrap();
            let v = (lt - lq).exp();
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((((sumsq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0)) / n as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se + 1e-12);
    }

    #[test]
    fn reproducible_sequences() {
        let s = cov(dmatrix![1.0, 0.2; 0.2, 1.0]);
        let spec = WishartSpec::new(2.5, s).unwrap();
        let a = sample_wishart(&spec, RngSeed::new(99).with_stream(4)).unwrap();
        let b = sample_wishart(&spec, RngSeed::new(99).with_stream(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scale_equivariance_in_mean() {
        // D Sigma D sampling agrees with conjugated sampling in expectation.
        let s = cov(dmatrix![1.0, 0.5; 0.5, 2.0]);
        let d = dmatrix![2.0, 0.0; 0.0, 0.5];
        let conj = cov(&d * s.entries() * &d);
        let n = 40_000usize;
        let mut rng = RngSeed::new(31).rng();
        let s1 = WishartSampler::new(WishartSpec::new(3.2, s).unwrap()).unwrap();
        let s2 = WishartSampler::new(WishartSpec::new(3.2, conj).unwrap()).unwrap();
        let mut diff = [0.0f64; 2];
        let mut var_acc = [0.0f64; 2];
        let mut draws: Vec<[f64; 2]> = Vec::with_capacity(n);
        for _ in 0..n {
            let m1 = s1.sample(&mut rng);
            let c1 = &d * m1 * &d;
            let m2 = s2.sample(&mut rng);
            let v = [c1[(0, 0)] - m2[(0, 0)], c1[(1, 1)] - m2[(1, 1)]];
            diff[0] += v[0];
            diff[1] += v[1];
            draws.push(v);
        }
        for k in 0..2 {
            let m = diff[k] / n as f64;
            for v in &draws {
                var_acc[k] += (v[k] - m) * (v[k] - m);
            }
            let se = (var_acc[k] / (n as f64 - 1.0) / n as f64).sqrt();
            assert!(m.abs() < 4.0 * se, "diagonal {k}: mean diff {m}, se {se}");
        }
    }
}
