//! Multivariate gamma Laplace transforms, the factorial density
//! representation, and sampling of the Gamma_p(alpha, Sigma) vector.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gamma::{self, NoncentralScalarParams, ShapeParam};
use crate::linalg::{CovMatrix, DiagScale, FactorialForm};
use crate::rng::{parallel_mc_mean, MCEstimate, RngSeed};
use crate::scalar::Scalar;
use crate::wishart::{WishartSampler, WishartSpec};

/// Evaluation point with strictly positive coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    x: Vec<f64>,
}

impl EvalPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::NonPositiveArgument(
                x.iter().copied().find(|v| !(*v > 0.0)).unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { x })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Symmetric positive semi-definite non-centrality matrix.
#[derive(Debug, Clone)]
pub struct NoncentralityMatrix<S: Scalar> {
    delta: DMatrix<S>,
    rank: usize,
}

impl<S: Scalar> NoncentralityMatrix<S> {
    pub fn new(delta: DMatrix<S>) -> Result<Self> {
        if delta.nrows() != delta.ncols() {
            return Err(Error::ShapeMismatch("Delta must be square".into()));
        }
        let sym = (&delta + delta.transpose()) * S::from_f64_lossy(0.5);
        let asym = (&delta - &sym).norm().to_f64_lossy();
        if asym > 1e-8 * (sym.norm().to_f64_lossy() + 1e-300) {
            return Err(Error::NotSymmetric(asym));
        }
        let eig = sym.clone().symmetric_eigen();
        let max_ev = eig
            .eigenvalues
            .iter()
            .fold(S::zero(), |a, v| if *v > a { *v } else { a });
        let floor = -S::from_f64_lossy(1e-10) * max_ev;
        if eig.eigenvalues.iter().any(|v| *v < floor) {
            return Err(Error::NotPositiveDefinite);
        }
        let thresh = S::from_f64_lossy(1e-10) * max_ev;
        let rank = eig.eigenvalues.iter().filter(|v| **v > thresh).count();
        Ok(Self { delta: sym, rank })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            delta: DMatrix::zeros(p, p),
            rank: 0,
        }
    }

    pub fn entries(&self) -> &DMatrix<S> {
        &self.delta
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

fn log_det_lu<S: Scalar>(m: DMatrix<S>) -> S {
    let lu = m.lu();
    let mut acc = S::zero();
    for v in lu.u().diagonal().iter() {
        acc += num_traits::Float::ln(num_traits::Float::abs(*v));
    }
    acc
}

/// Laplace transform |I_p + Sigma T|^-alpha of the Gamma_p(alpha, Sigma)
/// distribution, evaluated through the log-determinant.
pub fn mvgamma_lt<S: Scalar>(
    t: &DiagScale<S>,
    alpha: &ShapeParam<S>,
    sigma: &CovMatrix<S>,
) -> Result<S> {
    let p = sigma.dim();
    if t.dim() != p {
        return Err(Error::ShapeMismatch(format!(
            "T has dimension {}, Sigma has dimension {p}",
            t.dim()
        )));
    }
    let m = DMatrix::<S>::identity(p, p) + sigma.entries() * t.as_matrix();
    Ok(num_traits::Float::exp(-alpha.alpha() * log_det_lu(m)))
}

/// Laplace transform |I_p + 2 Sigma T|^-(nu/2) of the chi-square vector.
pub fn chi2_lt<S: Scalar>(t: &DiagScale<S>, nu: S, sigma: &CovMatrix<S>) -> Result<S> {
    if !(nu > S::zero()) {
        return Err(Error::ParameterOutOfRange {
            requirement: "nu > 0".into(),
            got: format!("{}", nu.to_f64_lossy()),
        });
    }
    let doubled = CovMatrix::new(sigma.entries() * S::from_f64_lossy(2.0))?;
    let half = S::from_f64_lossy(0.5);
    mvgamma_lt(t, &ShapeParam::new(nu * half)?, &doubled)
}

/// Non-central Laplace transform
/// |I_1 + Sigma_0 T_1|^-alpha etr(-T_1 (I_1 + Sigma_0 T_1)^-1 Delta).
pub fn noncentral_mvgamma_lt<S: Scalar>(
    t1: &DiagScale<S>,
    alpha: &ShapeParam<S>,
    sigma0: &CovMatrix<S>,
    delta: &NoncentralityMatrix<S>,
) -> Result<S> {
    let p1 = sigma0.dim();
    if t1.dim() != p1 || delta.entries().nrows() != p1 {
        return Err(Error::ShapeMismatch(format!(
            "T1 is {}, Sigma0 is {p1}, Delta is {}",
            t1.dim(),
            delta.entries().nrows()
        )));
    }
    let t1m = t1.as_matrix();
    let d = DMatrix::<S>::identity(p1, p1) + sigma0.entries() * &t1m;
    let log_det = log_det_lu(d.clone());
    let lu = d.lu();
    let inner = lu
        .solve(delta.entries())
        .ok_or(Error::NotPositiveDefinite)?;
    let trace = (&t1m * inner).trace();
    Ok(num_traits::Float::exp(
        -alpha.alpha() * log_det - trace,
    ))
}

/// Monte Carlo evaluation of the m-factorial density representation:
/// E over S ~ W_m(2 alpha, I_m) of prod_j w_j^2 g_alpha(w_j^2 x_j, b^j S b^jT / 2).
pub fn factorial_pdf_mc(
    x: &EvalPoint,
    alpha: &ShapeParam<f64>,
    form: &FactorialForm<f64>,
    n: u64,
    seed: RngSeed,
) -> Result<MCEstimate> {
    let p = form.dim();
    if x.dim() != p {
        return Err(Error::ShapeMismatch(format!(
            "x has dimension {}, form has dimension {p}",
            x.dim()
        )));
    }
    let m = form.factor_count();
    if m == 0 {
        // Diagonal Sigma = W^-2: exact product of scaled central densities.
        let mut log_acc = 0.0;
        for j in 0..p {
            let w2 = form.w()[j] * form.w()[j];
            log_acc += w2.ln() + gamma::central_gamma_log_pdf(w2 * x.coords()[j], alpha)?;
        }
        return Ok(MCEstimate::exact(log_acc.exp(), seed));
    }
    if !(2.0 * alpha.alpha() > m as f64 - 1.0) {
        return Err(Error::ParameterOutOfRange {
            requirement: format!("2*alpha > m - 1 = {}", m - 1),
            got: format!("2*alpha = {}", 2.0 * alpha.alpha()),
        });
    }
    let spec = WishartSpec::new(2.0 * alpha.alpha(), CovMatrix::new(DMatrix::identity(m, m))?)?;
    let sampler = WishartSampler::new(spec)?;
    let b = form.b().clone();
    let w = form.w().clone();
    let xs: Vec<f64> = x.coords().to_vec();
    let alpha = *alpha;
    parallel_mc_mean(n, seed, move |rng| {
        let s = sampler.sample(rng);
        let mut log_acc = 0.0f64;
        for j in 0..p {
            let bj = b.row(j);
            let y = 0.5 * (&bj * &s * bj.transpose())[(0, 0)];
            let w2 = w[j] * w[j];
            let params = NoncentralScalarParams::new(y.max(0.0), alpha)
                .expect("quadratic form nonnegative");
            let g = gamma::noncentral_gamma_pdf(w2 * xs[j], &params, 1e-12)
                .expect("positive coordinate");
            if g == 0.0 {
                return 0.0;
            }
            log_acc += w2.ln() + g.ln();
        }
        log_acc.exp()
    })
}

/// Which construction backs `sample_mvgamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerPath {
    /// Pick Wishart when available, otherwise Gaussian sum.
    Auto,
    /// Diagonal of a W_p(2 alpha, Sigma)/2 draw; needs 2 alpha > p - 1.
    WishartDiag,
    /// Sum of 2 alpha Gaussian squares over 2; needs integer 2 alpha.
    GaussianSum,
}

/// Sample table: n rows of p positive coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    data: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn new(data: Vec<Vec<f64>>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        let p = data[0].len();
        if data.iter().any(|r| r.len() != p) {
            return Err(Error::ShapeMismatch("ragged sample table".into()));
        }
        Ok(Self { data })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn dim(&self) -> usize {
        self.data[0].len()
    }
}

fn is_integer(v: f64) -> bool {
    (v - v.round()).abs() < 1e-9 && v.round() >= 1.0
}

/// Draws n vectors from Gamma_p(alpha, Sigma).
pub fn sample_mvgamma(
    alpha: &ShapeParam<f64>,
    sigma: &CovMatrix<f64>,
    n: u64,
    seed: RngSeed,
    path: SamplerPath,
) -> Result<SampleTable> {
    let p = sigma.dim();
    let two_alpha = 2.0 * alpha.alpha();
    let wishart_ok = two_alpha > p as f64 - 1.0;
    let gaussian_ok = is_integer(two_alpha);
    let path = match path {
        SamplerPath::Auto => {
            if wishart_ok {
                SamplerPath::WishartDiag
            } else if gaussian_ok {
                SamplerPath::GaussianSum
            } else {
                return Err(Error::NoSamplerPath { two_alpha, p });
            }
        }
        SamplerPath::WishartDiag => {
            if !wishart_ok {
                return Err(Error::ParameterOutOfRange {
                    requirement: format!("2*alpha > p - 1 = {}", p as f64 - 1.0),
                    got: format!("2*alpha = {two_alpha}"),
                });
            }
            SamplerPath::WishartDiag
        }
        SamplerPath::GaussianSum => {
            if !gaussian_ok {
                return Err(Error::ParameterOutOfRange {
                    requirement: "integer 2*alpha".into(),
                    got: format!("2*alpha = {two_alpha}"),
                });
            }
            SamplerPath::GaussianSum
        }
    };
    let mut rng = seed.rng();
    let mut data = Vec::with_capacity(n as usize);
    match path {
        SamplerPath::WishartDiag => {
            let sampler = WishartSampler::new(WishartSpec::new(two_alpha, sigma.clone())?)?;
            for _ in 0..n {
                let y = sampler.sample_half(&mut rng);
                data.push(y.diag_x().iter().copied().collect());
            }
        }
        SamplerPath::GaussianSum => {
            let l = sigma.cholesky()?.l();
            let nu = two_alpha.round() as usize;
            for _ in 0..n {
                let mut acc = vec![0.0f64; p];
                for _ in 0..nu {
                    let z = DVector::from_fn(p, |_, _| {
                        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                    });
                    let x = &l * z;
                    for (a, v) in acc.iter_mut().zip(x.iter()) {
                        *a += 0.5 * v * v;
                    }
                }
                data.push(acc);
            }
        }
        SamplerPath::Auto => unreachable!(),
    }
    SampleTable::new(data)
}

/// Monte Carlo estimate of E[exp(-sum t_j x_j)] over the sample rows.
pub fn empirical_lt(samples: &SampleTable, t: &DiagScale<f64>, seed: RngSeed) -> Result<MCEstimate> {
    if samples.n() < 2 {
        return Err(Error::EmptySample);
    }
    if t.dim() != samples.dim() {
        return Err(Error::ShapeMismatch(format!(
            "T has dimension {}, samples have dimension {}",
            t.dim(),
            samples.dim()
        )));
    }
    let tv = t.values();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for row in samples.rows() {
        let e: f64 = row.iter().zip(tv.iter()).map(|(x, t)| t * x).sum();
        let v = (-e).exp();
        sum += v;
        sumsq += v * v;
    }
    let nf = samples.n() as f64;
    let mean = sum / nf;
    let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    Ok(MCEstimate {
        value: mean,
        std_error: (var / nf).sqrt(),
        n: samples.n() as u64,
        seed,
    })
}
