//! Numerical verification: the closed and stochastic Laplace-transform
//! identities behind the block-partition density formula, admissibility
//! thresholds, the block CDF inequality, and the positivity probe.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::density::{
    factorial_pdf_mc, sample_mvgamma, EvalPoint, SamplerPath,
};
use crate::error::{Error, Result};
use crate::gamma::{self, ShapeParam};
use crate::linalg::{CovMatrix, DiagScale, FactorialForm, Partition};
use crate::quad;
use crate::rng::{parallel_mc_mean, MCEstimate, RngSeed};
use crate::wishart::{WishartSampler, WishartSpec};

/// Closed form of the partitioned Laplace transform:
/// |I_1 + Sigma_0 T_1|^-a |Sigma_21 T_1 (I_1+Sigma_0 T_1)^-1 Sigma_12 Sigma_22^-1 + I_2 + Sigma_22 T_2|^-a.
pub fn rhs_lt_closed(t: &DiagScale<f64>, alpha: &ShapeParam<f64>, part: &Partition<f64>) -> Result<f64> {
    let (t1, t2) = t.split(part.p1);
    let t1m = t1.as_matrix();
    let t2m = t2.as_matrix();
    let i1 = DMatrix::<f64>::identity(part.p1, part.p1);
    let i2 = DMatrix::<f64>::identity(part.p2, part.p2);
    let d0 = &i1 + part.schur.entries() * &t1m;
    let d0_inv = d0.clone().lu().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let s22_inv = part.s22_inverse();
    let inner = &part.s21 * &t1m * &d0_inv * &part.s12 * &s22_inv + &i2 + &part.s22 * &t2m;
    let a = alpha.alpha();
    let ld0: f64 = d0.determinant().ln();
    let ld1: f64 = inner.determinant().ln();
    Ok((-a * (ld0 + ld1)).exp())
}

/// Monte Carlo version over Y = M/2, M ~ W_{p2}(2 alpha, Sigma_22):
/// average of |I_1+Sigma_0 T_1|^-a etr(-K Y) etr(-T_2 Y) with
/// K = Sigma_22^-1 Sigma_21 T_1 (I_1+Sigma_0 T_1)^-1 Sigma_12 Sigma_22^-1.
pub fn rhs_lt_mc(
    t: &DiagScale<f64>,
    alpha: &ShapeParam<f64>,
    part: &Partition<f64>,
    n: u64,
    seed: RngSeed,
) -> Result<MCEstimate> {
    let two_alpha = 2.0 * alpha.alpha();
    let bound = (part.p1 as f64 - 1.0).max(part.p2 as f64 - 1.0);
    if !(two_alpha > bound) {
        return Err(Error::ParameterOutOfRange {
            requirement: format!("2*alpha > max(p1-1, p2-1) = {bound}"),
            got: format!("2*alpha = {two_alpha}"),
        });
    }
    let (t1, t2) = t.split(part.p1);
    let t1m = t1.as_matrix();
    let t2m = t2.as_matrix();
    let i1 = DMatrix::<f64>::identity(part.p1, part.p1);
    let d0 = &i1 + part.schur.entries() * &t1m;
    let d0_inv = d0.clone().lu().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let s22_inv = part.s22_inverse();
    let k = &s22_inv * &part.s21 * &t1m * &d0_inv * &part.s12 * &s22_inv;
    let weight = k + t2m;
    let prefactor = (-alpha.alpha() * d0.determinant().ln()).exp();
    let scale = CovMatrix::new(part.s22.clone())?;
    let sampler = WishartSampler::new(WishartSpec::new(two_alpha, scale)?)?;
    parallel_mc_mean(n, seed, move |rng| {
        let y = sampler.sample_half(rng);
        prefactor * (-(&weight * y.y()).trace()).exp()
    })
}

/// Right-hand side of the partition density identity, computable in closed
/// scalar/quadrature form for p1 = 1 and p2 in {1, 2}.
pub fn theorem1_rhs_pdf(
    x: &EvalPoint,
    alpha: &ShapeParam<f64>,
    part: &Partition<f64>,
    quad_tol: f64,
) -> Result<f64> {
    if part.p1 != 1 || (part.p2 != 1 && part.p2 != 2) {
        return Err(Error::ParameterOutOfRange {
            requirement: "p1 = 1 and p2 in {1, 2}".into(),
            got: format!("p1 = {}, p2 = {}", part.p1, part.p2),
        });
    }
    let two_alpha = 2.0 * alpha.alpha();
    let bound = (part.p2 as f64 - 1.0).max(0.0);
    if !(two_alpha > bound) {
        return Err(Error::ParameterOutOfRange {
            requirement: format!("2*alpha > p2 - 1 = {bound}"),
            got: format!("2*alpha = {two_alpha}"),
        });
    }
    if x.dim() != 1 + part.p2 {
        return Err(Error::ShapeMismatch(format!(
            "x has dimension {}, partition implies {}",
            x.dim(),
            1 + part.p2
        )));
    }
    let a = alpha.alpha();
    let x1 = x.coords()[0];
    let sigma0 = part.schur.entries()[(0, 0)];
    let s22_inv = part.s22_inverse();
    // v = Sigma_22^-1 Sigma_21, a p2-vector for p1 = 1.
    let v: DVector<f64> = &s22_inv * DVector::from_column_slice(part.s21.column(0).as_slice());
    let ln_prefactor =
        -gamma::ln_mv_gamma(part.p2, alpha)? - a * CovMatrix::new(part.s22.clone())?.log_det()?;

    match part.p2 {
        1 => {
            let x2 = x.coords()[1];
            let delta = v[0] * v[0] * x2;
            let g1 = gamma::scaled_noncentral_gamma_pdf(x1, sigma0, delta, alpha)?;
            let integrand = g1 * x2.powf(a - 1.0) * (-s22_inv[(0, 0)] * x2).exp();
            Ok(ln_prefactor.exp() * integrand)
        }
        2 => {
            let (x2, x3) = (x.coords()[1], x.coords()[2]);
            let sqrt_cross = (x2 * x3).sqrt();
            let det_x_pow = (x2 * x3).powf(a - 1.0);
            // M(c) = X^1/2 C X^1/2; both the trace and the quadratic form
            // v' M(c) v are affine in c.
            let trace_const = s22_inv[(0, 0)] * x2 + s22_inv[(1, 1)] * x3;
            let trace_lin = 2.0 * s22_inv[(0, 1)] * sqrt_cross;
            let quad_const = v[0] * v[0] * x2 + v[1] * v[1] * x3;
            let quad_lin = 2.0 * v[0] * v[1] * sqrt_cross;
            let body = |c: f64, det_c_factor: f64| -> f64 {
                let delta = (quad_const + quad_lin * c).max(0.0);
                let g1 = gamma::scaled_noncentral_gamma_pdf(x1, sigma0, delta, alpha)
                    .unwrap_or(0.0);
                g1 * det_x_pow * det_c_factor * (-(trace_const + trace_lin * c)).exp()
            };
            let integral = if a < 1.5 {
                // c = sin(theta) removes the (1-c^2)^(a-3/2) endpoint
                // singularity: the combined factor becomes cos^(2a-2)(theta).
                quad::integrate(
                    |theta| {
                        let c = theta.sin();
                        body(c, theta.cos().powf(2.0 * a - 2.0))
                    },
                    -std::f64::consts::FRAC_PI_2,
                    std::f64::consts::FRAC_PI_2,
                    quad_tol,
                )?
            } else {
                quad::integrate(|c| body(c, (1.0 - c * c).powf(a - 1.5)), -1.0, 1.0, quad_tol)?
            };
            Ok(ln_prefactor.exp() * integral)
        }
        _ => unreachable!(),
    }
}

/// How much structure of Sigma is known when quoting an admissibility bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AdmissibilityStructure {
    General,
    MFactorial { m: usize },
    MMatrixSignature,
    RemarkPartition { m0: usize, m12: usize, p2: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityInfo {
    pub p: usize,
    pub structure: AdmissibilityStructure,
}

/// Threshold b such that all 2 alpha > b are known admissible (integer
/// 2 alpha is always admissible besides). 0 means all alpha > 0.
pub fn admissibility_bound(info: &AdmissibilityInfo) -> Result<f64> {
    if info.p == 0 {
        return Err(Error::ParameterOutOfRange {
            requirement: "p >= 1".into(),
            got: "0".into(),
        });
    }
    match info.structure {
        AdmissibilityStructure::General => Ok(((info.p - 1) / 2) as f64),
        AdmissibilityStructure::MFactorial { m } => {
            if m > info.p.saturating_sub(1) {
                return Err(Error::ParameterOutOfRange {
                    requirement: format!("m <= p - 1 = {}", info.p - 1),
                    got: format!("m = {m}"),
                });
            }
            Ok((m.saturating_sub(1)) as f64)
        }
        AdmissibilityStructure::MMatrixSignature => Ok(0.0),
        AdmissibilityStructure::RemarkPartition { m0, m12, p2 } => {
            if p2 >= info.p || m12 > p2 {
                return Err(Error::ParameterOutOfRange {
                    requirement: "p2 < p and m12 <= p2".into(),
                    got: format!("p = {}, p2 = {p2}, m12 = {m12}", info.p),
                });
            }
            let bound = ((m0 + m12).saturating_sub(1)).max(p2.saturating_sub(1));
            Ok(bound as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

/// Outcome of the block CDF inequality check
/// G_p(x) > G_{p1}(x_1..x_{p1}) G_{p2}(x_{p1+1}..x_p).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub point: Vec<f64>,
    pub lhs: MCEstimate,
    pub rhs: MCEstimate,
    pub difference: MCEstimate,
    pub verdict: Verdict,
}

/// Estimates both sides of the inequality by indicator-mean Monte Carlo.
/// The joint CDF uses one sample batch; the two block CDFs use independent
/// batches drawn with their own block covariances.
pub fn inequality_check(
    x: &EvalPoint,
    alpha: &ShapeParam<f64>,
    sigma: &CovMatrix<f64>,
    p1: usize,
    n: u64,
    seed: RngSeed,
) -> Result<InequalityReport> {
    let p = sigma.dim();
    if x.dim() != p {
        return Err(Error::ShapeMismatch(format!(
            "x has dimension {}, Sigma has dimension {p}",
            x.dim()
        )));
    }
    let part = crate::linalg::partition_blocks(sigma, p1)?;
    let joint = cdf_estimate(x.coords(), alpha, sigma, n, seed.with_stream(1))?;
    let block1 = CovMatrix::new(part.s11.clone())?;
    let block2 = CovMatrix::new(part.s22.clone())?;
    let g1 = cdf_estimate(&x.coords()[..p1], alpha, &block1, n, seed.with_stream(2))?;
    let g2 = cdf_estimate(&x.coords()[p1..], alpha, &block2, n, seed.with_stream(3))?;
    let rhs_value = g1.value * g2.value;
    let rhs_se = ((g1.value * g2.std_error).powi(2) + (g2.value * g1.std_error).powi(2)).sqrt();
    let rhs = MCEstimate {
        value: rhs_value,
        std_error: rhs_se,
        n,
        seed,
    };
    let diff = MCEstimate {
        value: joint.value - rhs_value,
        std_error: joint.std_error.hypot(rhs_se),
        n,
        seed,
    };
    let verdict = if diff.value - 3.0 * diff.std_error > 0.0 {
        Verdict::Consistent
    } else if diff.value + 3.0 * diff.std_error < 0.0 {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(InequalityReport {
        point: x.coords().to_vec(),
        lhs: joint,
        rhs,
        difference: diff,
        verdict,
    })
}

/// Indicator-mean estimate of G_p(x) = P(X_1 <= x_1, ..., X_p <= x_p).
pub fn cdf_estimate(
    x: &[f64],
    alpha: &ShapeParam<f64>,
    sigma: &CovMatrix<f64>,
    n: u64,
    seed: RngSeed,
) -> Result<MCEstimate> {
    let table = sample_mvgamma(alpha, sigma, n, seed, SamplerPath::Auto)?;
    let mut hits = 0u64;
    for row in table.rows() {
        if row.iter().zip(x.iter()).all(|(v, b)| v <= b) {
            hits += 1;
        }
    }
    let nf = n as f64;
    let phat = hits as f64 / nf;
    Ok(MCEstimate {
        value: phat,
        std_error: (phat * (1.0 - phat) / nf).sqrt(),
        n,
        seed,
    })
}

/// Positivity scan of the factorial density over a grid of points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityReport {
    pub grid: Vec<Vec<f64>>,
    pub estimates: Vec<MCEstimate>,
    pub min_estimate: MCEstimate,
    /// Indices of points whose upper 3-sigma bound is negative.
    pub flagged: Vec<usize>,
}

pub fn positivity_probe(
    alpha: &ShapeParam<f64>,
    form: &FactorialForm<f64>,
    grid: &[EvalPoint],
    n: u64,
    seed: RngSeed,
) -> Result<PositivityReport> {
    if grid.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut estimates = Vec::with_capacity(grid.len());
    let mut flagged = Vec::new();
    let mut min_idx = 0usize;
    for (i, pt) in grid.iter().enumerate() {
        let est = factorial_pdf_mc(pt, alpha, form, n, seed.with_stream(i as u64))?;
        if est.value + 3.0 * est.std_error < 0.0 {
            flagged.push(i);
        }
        if est.value < estimates.get(min_idx).map_or(f64::INFINITY, |e: &MCEstimate| e.value) {
            min_idx = i;
        }
        estimates.push(est);
    }
    Ok(PositivityReport {
        grid: grid.iter().map(|g| g.coords().to_vec()).collect(),
        min_estimate: estimates[min_idx],
        estimates,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::mvgamma_lt;
    use crate::linalg::partition_blocks;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};

    fn cov(m: DMatrix<f64>) -> CovMatrix<f64> {
        CovMatrix::new(m).unwrap()
    }

    fn shape(a: f64) -> ShapeParam<f64> {
        ShapeParam::new(a).unwrap()
    }

    fn random_spd(p: usize, rng: &mut impl Rng) -> CovMatrix<f64> {
        let g = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        cov(&g * g.transpose() + DMatrix::identity(p, p) * (0.3 + rng.random_range(0.0..0.5)))
    }

    #[test]
    fn rhs_lt_closed_t_zero() {
        let sigma = cov(dmatrix![1.0, 0.4; 0.4, 1.2]);
        let part = partition_blocks(&sigma, 1).unwrap();
        let v = rhs_lt_closed(&DiagScale::zeros(2), &shape(0.9), &part).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rhs_lt_closed_block_diagonal() {
        let sigma = cov(dmatrix![1.3, 0.0, 0.0;
                                 0.0, 0.8, 0.2;
                                 0.0, 0.2, 1.1]);
        let part = partition_blocks(&sigma, 1).unwrap();
        let t = DiagScale::new(dvector![0.5, 0.7, 0.2]).unwrap();
        let a = shape(1.1);
        let v = rhs_lt_closed(&t, &a, &part).unwrap();
        let f1 = (1.0 + 1.3 * 0.5f64).powf(-1.1);
        let i2 = DMatrix::<f64>::identity(2, 2);
        let t2 = DMatrix::from_diagonal(&dvector![0.7, 0.2]);
        let f2 = (i2 + part.s22.clone() * t2).determinant().powf(-1.1);
        assert!(((v - f1 * f2) / v).abs() < 1e-12);
    }

    #[test]
    fn rhs_lt_closed_equals_direct_lt() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for _ in 0..50 {
            let p = rng.random_range(2..=6);
            let sigma = random_spd(p, &mut rng);
            let t = DiagScale::new(DVector::from_fn(p, |_, _| rng.random_range(0.0..2.0)))
                .unwrap();
            let a = shape(rng.random_range(0.3..3.0));
            let p1 = rng.random_range(1..p);
            let part = partition_blocks(&sigma, p1).unwrap();
            let closed = rhs_lt_closed(&t, &a, &part).unwrap();
            let direct = mvgamma_lt(&t, &a, &sigma).unwrap();
            assert!(
                ((closed - direct) / direct).abs() <= 1e-9,
                "p {p}, p1 {p1}: closed {closed}, direct {direct}"
            );
        }
    }

    #[test]
    fn rhs_lt_mc_t_zero_exact() {
        let sigma = cov(dmatrix![1.0, 0.3, 0.1;
                                 0.3, 1.1, 0.2;
                                 0.1, 0.2, 0.9]);
        let part = partition_blocks(&sigma, 1).unwrap();
        let est = rhs_lt_mc(&DiagScale::zeros(3), &shape(1.2), &part, 1000, RngSeed::new(1))
            .unwrap();
        assert!((est.value - 1.0).abs() < 1e-14);
        assert!(est.std_error < 1e-14);
    }

    #[test]
    fn rhs_lt_mc_matches_closed_form() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let sigma = random_spd(4, &mut rng);
        let part = partition_blocks(&sigma, 2).unwrap();
        let t = DiagScale::new(dvector![0.4, 0.1, 0.6, 0.3]).unwrap();
        let a = shape(1.4); // 2a = 2.8 > max(1, 1)
        let est = rhs_lt_mc(&t, &a, &part, 200_000, RngSeed::new(2)).unwrap();
        let oracle = mvgamma_lt(&t, &a, &sigma).unwrap();
        assert!(
            (est.value - oracle).abs() <= 3.5 * est.std_error,
            "est {} +- {}, oracle {oracle}",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn theorem1_pdf_p2_block_diagonal_factorizes() {
        let sigma = cov(dmatrix![1.3, 0.0; 0.0, 0.9]);
        let part = partition_blocks(&sigma, 1).unwrap();
        let a = shape(1.0);
        let x = EvalPoint::new(vec![0.7, 1.1]).unwrap();
        let v = theorem1_rhs_pdf(&x, &a, &part, 1e-10).unwrap();
        let m1 = gamma::scaled_noncentral_gamma_pdf(0.7, 1.3, 0.0, &a).unwrap();
        let m2 = gamma::scaled_noncentral_gamma_pdf(1.1, 0.9, 0.0, &a).unwrap();
        assert!(((v - m1 * m2) / v).abs() < 1e-12, "v {v}, product {}", m1 * m2);
    }

    #[test]
    fn theorem1_pdf_rejects_unsupported_partition() {
        let sigma = cov(DMatrix::identity(4, 4));
        let part = partition_blocks(&sigma, 1).unwrap(); // p2 = 3
        let a = shape(2.0);
        let x = EvalPoint::new(vec![1.0; 4]).unwrap();
        assert!(theorem1_rhs_pdf(&x, &a, &part, 1e-8).is_err());
        let part = partition_blocks(&sigma, 2).unwrap(); // p1 = 2
        let x = EvalPoint::new(vec![1.0; 4]).unwrap();
        assert!(theorem1_rhs_pdf(&x, &a, &part, 1e-8).is_err());
    }

    #[test]
    fn admissibility_thresholds() {
        for (p, expect) in [(1, 0.0), (2, 0.0), (3, 1.0), (4, 1.0), (5, 2.0), (6, 2.0)] {
            let b = admissibility_bound(&AdmissibilityInfo {
                p,
                structure: AdmissibilityStructure::General,
            })
            .unwrap();
            assert_eq!(b, expect, "p = {p}");
        }
        let b = admissibility_bound(&AdmissibilityInfo {
            p: 4,
            structure: AdmissibilityStructure::MFactorial { m: 1 },
        })
        .unwrap();
        assert_eq!(b, 0.0);
        let b = admissibility_bound(&AdmissibilityInfo {
            p: 6,
            structure: AdmissibilityStructure::MMatrixSignature,
        })
        .unwrap();
        assert_eq!(b, 0.0);
        let b = admissibility_bound(&AdmissibilityInfo {
            p: 7,
            structure: AdmissibilityStructure::RemarkPartition { m0: 1, m12: 1, p2: 2 },
        })
        .unwrap();
        assert_eq!(b, 1.0);
    }

    #[test]
    fn admissibility_rejects_inconsistent() {
        assert!(admissibility_bound(&AdmissibilityInfo {
            p: 3,
            structure: AdmissibilityStructure::MFactorial { m: 3 },
        })
        .is_err());
        assert!(admissibility_bound(&AdmissibilityInfo {
            p: 3,
            structure: AdmissibilityStructure::RemarkPartition { m0: 1, m12: 3, p2: 2 },
        })
        .is_err());
    }

    #[test]
    fn inequality_block_diagonal_near_zero() {
        let sigma = cov(dmatrix![1.0, 0.0; 0.0, 1.0]);
        let x = EvalPoint::new(vec![1.0, 1.0]).unwrap();
        let rep = inequality_check(&x, &shape(0.5), &sigma, 1, 200_000, RngSeed::new(3))
            .unwrap();
        assert!(
            rep.difference.value.abs() <= 3.0 * rep.difference.std_error,
            "difference {} +- {}",
            rep.difference.value,
            rep.difference.std_error
        );
        assert_ne!(rep.verdict, Verdict::Violated);
    }

    #[test]
    fn positivity_probe_identity_sigma() {
        let sigma = cov(DMatrix::identity(3, 3));
        let form = crate::linalg::lambda_factorial_decomposition(&sigma).unwrap();
        let grid: Vec<EvalPoint> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&v| EvalPoint::new(vec![v; 3]).unwrap())
            .collect();
        let rep = positivity_probe(&shape(0.8), &form, &grid, 100, RngSeed::new(4)).unwrap();
        assert!(rep.flagged.is_empty());
        assert!(rep.min_estimate.value > 0.0);
    }

    #[test]
    fn positivity_probe_one_factorial() {
        let sigma = cov(dmatrix![1.0, 0.5, 0.5;
                                 0.5, 1.0, 0.5;
                                 0.5, 0.5, 1.0]);
        let form = crate::linalg::lambda_factorial_decomposition(&sigma).unwrap();
        assert_eq!(form.factor_count(), 1);
        let grid: Vec<EvalPoint> = [0.4, 1.3]
            .iter()
            .map(|&v| EvalPoint::new(vec![v; 3]).unwrap())
            .collect();
        let rep = positivity_probe(&shape(0.6), &form, &grid, 5000, RngSeed::new(5)).unwrap();
        assert!(rep.flagged.is_empty());
    }
}
