//! Covariance-matrix structure: partitions, Schur complements, determinant
//! identities, signature/M-matrix search and factorial decompositions.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Symmetric positive-definite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix<S: Scalar> {
    entries: DMatrix<S>,
}

impl<S: Scalar> CovMatrix<S> {
    /// Builds a covariance matrix from raw entries.
    ///
    /// The input is symmetrized by averaging with its transpose; relative
    /// asymmetry beyond 1e-8 is rejected. Positive definiteness is checked
    /// by attempting a Cholesky factorization.
    pub fn new(entries: DMatrix<S>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "covariance matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let sym = (&entries + entries.transpose()) * S::from_f64_lossy(0.5);
        let asym = (&entries - &sym).norm().to_f64_lossy();
        let scale = sym.norm().to_f64_lossy();
        if asym > 1e-8 * scale {
            return Err(Error::NotSymmetric(asym / scale));
        }
        let m = Self { entries: sym };
        m.cholesky()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<S> {
        &self.entries
    }

    /// The diagonal sigma_jj values.
    pub fn diag(&self) -> DVector<S> {
        self.entries.diagonal()
    }

    pub fn cholesky(&self) -> Result<Cholesky<S, Dyn>> {
        Cholesky::new(self.entries.clone()).ok_or(Error::NotPositiveDefinite)
    }

    pub fn inverse(&self) -> Result<DMatrix<S>> {
        Ok(self.cholesky()?.inverse())
    }

    pub fn log_det(&self) -> Result<S> {
        let chol = self.cholesky()?;
        let mut acc = S::zero();
        for v in chol.l_dirty().diagonal().iter() {
            acc += Float::ln(*v);
        }
        Ok(acc + acc)
    }
}

/// Diagonal scale matrix T = diag(t_1,...,t_p) with t_j >= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagScale<S: Scalar> {
    t: DVector<S>,
}

impl<S: Scalar> DiagScale<S> {
    pub fn new(t: DVector<S>) -> Result<Self> {
        if t.iter().any(|v| *v < S::zero()) {
            return Err(Error::ParameterOutOfRange {
                requirement: "t_j >= 0".into(),
                got: "a negative diagonal entry".into(),
            });
        }
        Ok(Self { t })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            t: DVector::zeros(p),
        }
    }

    pub fn values(&self) -> &DVector<S> {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn as_matrix(&self) -> DMatrix<S> {
        DMatrix::from_diagonal(&self.t)
    }

    /// Splits into (T_1, T_2) for a partition at p1.
    pub fn split(&self, p1: usize) -> (DiagScale<S>, DiagScale<S>) {
        let t1 = DVector::from_iterator(p1, self.t.iter().take(p1).copied());
        let t2 = DVector::from_iterator(self.t.len() - p1, self.t.iter().skip(p1).copied());
        (DiagScale { t: t1 }, DiagScale { t: t2 })
    }
}

/// Diagonal signature matrix with +-1 entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureMatrix {
    signs: Vec<i8>,
}

impl SignatureMatrix {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::ParameterOutOfRange {
                requirement: "every signature entry +1 or -1".into(),
                got: "other value".into(),
            });
        }
        Ok(Self { signs })
    }

    pub fn identity(p: usize) -> Self {
        Self { signs: vec![1; p] }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Conjugation S M S.
    pub fn conjugate<S: Scalar>(&self, m: &DMatrix<S>) -> DMatrix<S> {
        let mut out = m.clone();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if self.signs[i] * self.signs[j] < 0 {
                    out[(i, j)] = -out[(i, j)];
                }
            }
        }
        out
    }
}

/// Block partition of a covariance matrix with its Schur complement.
#[derive(Debug, Clone)]
pub struct Partition<S: Scalar> {
    pub p1: usize,
    pub p2: usize,
    pub s11: DMatrix<S>,
    pub s12: DMatrix<S>,
    pub s21: DMatrix<S>,
    pub s22: DMatrix<S>,
    /// Schur complement Sigma_0 = Sigma_11 - Sigma_12 Sigma_22^-1 Sigma_21.
    pub schur: CovMatrix<S>,
}

/// Partitions sigma at p1 and forms the Schur complement.
pub fn partition_blocks<S: Scalar>(sigma: &CovMatrix<S>, p1: usize) -> Result<Partition<S>> {
    let p = sigma.dim();
    if p1 == 0 || p1 >= p {
        return Err(Error::InvalidPartition { p1, p });
    }
    let p2 = p - p1;
    let m = sigma.entries();
    let s11 = m.view((0, 0), (p1, p1)).into_owned();
    let s12 = m.view((0, p1), (p1, p2)).into_owned();
    let s21 = s12.transpose();
    let s22 = m.view((p1, p1), (p2, p2)).into_owned();
    let s22_chol = Cholesky::new(s22.clone()).ok_or(Error::NotPositiveDefinite)?;
    let schur_raw = &s11 - &s12 * s22_chol.solve(&s21);
    let schur = CovMatrix::new(schur_raw)?;
    Ok(Partition {
        p1,
        p2,
        s11,
        s12,
        s21,
        s22,
        schur,
    })
}

/// Every expression of the block-determinant chain for |I_p + Sigma T|,
/// with the maximum relative discrepancy against the direct determinant.
#[derive(Debug, Clone)]
pub struct FactorizationReport<S: Scalar> {
    pub direct: S,
    pub chain: Vec<S>,
    pub max_rel_err: f64,
}

/// Evaluates |I_p + Sigma T| directly and through each factored form of the
/// Schur-complement chain.
pub fn det_block_factorization<S: Scalar>(
    sigma: &CovMatrix<S>,
    t: &DiagScale<S>,
    p1: usize,
) -> Result<FactorizationReport<S>> {
    let p = sigma.dim();
    if t.dim() != p {
        return Err(Error::ShapeMismatch(format!(
            "T has dimension {}, Sigma has dimension {}",
            t.dim(),
            p
        )));
    }
    let part = partition_blocks(sigma, p1)?;
    let (t1, t2) = t.split(p1);
    let t1m = t1.as_matrix();
    let t2m = t2.as_matrix();

    let i1 = DMatrix::<S>::identity(p1, p1);
    let i2 = DMatrix::<S>::identity(part.p2, part.p2);
    let s0 = part.schur.entries();
    let s22_inv = part
        .schur_inverse_factor()
        .expect("s22 factorized during partition");

    let direct = (DMatrix::<S>::identity(p, p) + sigma.entries() * t.as_matrix()).determinant();

    // Block 2x2 determinant with the top-left block written via Sigma_0.
    let top_left = &i1 + s0 * &t1m + &part.s12 * s22_inv.solve(&part.s21) * &t1m;
    let mut block = DMatrix::<S>::zeros(p, p);
    block.view_mut((0, 0), (p1, p1)).copy_from(&top_left);
    block
        .view_mut((0, p1), (p1, part.p2))
        .copy_from(&(&part.s12 * &t2m));
    block
        .view_mut((p1, 0), (part.p2, p1))
        .copy_from(&(&part.s21 * &t1m));
    block
        .view_mut((p1, p1), (part.p2, part.p2))
        .copy_from(&(&i2 + &part.s22 * &t2m));
    let e_block = block.determinant();

    let d22 = &i2 + &part.s22 * &t2m;
    let d22_det = d22.determinant();
    let d22_lu = d22.clone().lu();

    // |I2+S22T2| * |I1 + S0T1 + S12 S22^-1 S21 T1 - S12 T2 (I2+S22T2)^-1 S21 T1|
    let inner1 = &top_left
        - &part.s12
            * &t2m
            * d22_lu
                .solve(&(&part.s21 * &t1m))
                .ok_or(Error::NotPositiveDefinite)?;
    let e1 = d22_det * inner1.determinant();

    // |I2+S22T2| * |I1 + S0T1 + S12 S22^-1 (I2+S22T2)^-1 S21 T1|
    let inner2 = &i1
        + s0 * &t1m
        + &part.s12
            * s22_inv.solve(
                &d22_lu
                    .solve(&(&part.s21 * &t1m))
                    .ok_or(Error::NotPositiveDefinite)?,
            );
    let e2 = d22_det * inner2.determinant();

    // |I1+S0T1| * |I2+S22T2| * |I1 + S12 S22^-1 (I2+S22T2)^-1 S21 T1 (I1+S0T1)^-1|
    let d0 = &i1 + s0 * &t1m;
    let d0_det = d0.determinant();
    let d0_lu = d0.clone().lu();
    let core = &part.s12
        * s22_inv.solve(
            &d22_lu
                .solve(&part.s21)
                .ok_or(Error::NotPositiveDefinite)?,
        );
    let rhs_t1 = &t1m
        * d0_lu
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite)?;
    let e3 = d0_det * d22_det * (&i1 + &core * rhs_t1).determinant();

    let chain = vec![e_block, e1, e2, e3];
    let dd = direct.to_f64_lossy();
    let max_rel_err = chain
        .iter()
        .map(|e| ((e.to_f64_lossy() - dd) / dd).abs())
        .fold(0.0, f64::max);

    Ok(FactorizationReport {
        direct,
        chain,
        max_rel_err,
    })
}

impl<S: Scalar> Partition<S> {
    fn schur_inverse_factor(&self) -> Option<Cholesky<S, Dyn>> {
        Cholesky::new(self.s22.clone())
    }

    /// Sigma_22^-1.
    pub fn s22_inverse(&self) -> DMatrix<S> {
        self.schur_inverse_factor()
            .expect("s22 positive definite by construction")
            .inverse()
    }
}

/// Both sides of the Sylvester determinant identity
/// |I_2 + B21 A12| = |I_1 + A12 B21|.
pub fn sylvester_identity<S: Scalar>(a12: &DMatrix<S>, b21: &DMatrix<S>) -> Result<(S, S)> {
    if a12.nrows() != b21.ncols() || a12.ncols() != b21.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "A12 is {}x{}, B21 is {}x{}",
            a12.nrows(),
            a12.ncols(),
            b21.nrows(),
            b21.ncols()
        )));
    }
    let p1 = a12.nrows();
    let p2 = a12.ncols();
    let d1 = (DMatrix::<S>::identity(p2, p2) + b21 * a12).determinant();
    let d2 = (DMatrix::<S>::identity(p1, p1) + a12 * b21).determinant();
    Ok((d1, d2))
}

const MAX_SIGNATURE_DIM: usize = 20;
const M_MATRIX_TOL: f64 = 1e-12;

/// Searches exhaustively for a signature matrix S with S Sigma^-1 S an
/// M-matrix. Since Sigma^-1 is symmetric positive definite, the off-diagonal
/// sign condition (Z-matrix) suffices.
///
/// S and -S are equivalent, so the first sign is fixed to +1.
pub fn find_signature_m_matrix<S: Scalar>(sigma: &CovMatrix<S>) -> Result<Option<SignatureMatrix>> {
    let p = sigma.dim();
    if p > MAX_SIGNATURE_DIM {
        return Err(Error::SignatureSearchTooLarge(p));
    }
    let inv = sigma.inverse()?;
    let tol = S::from_f64_lossy(M_MATRIX_TOL);
    for mask in 0u32..(1u32 << (p - 1)) {
        let signs: Vec<i8> = std::iter::once(1i8)
            .chain((0..p - 1).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }))
            .collect();
        let mut ok = true;
        'outer: for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let mut v = inv[(i, j)];
                if signs[i] * signs[j] < 0 {
                    v = -v;
                }
                if v > tol {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Ok(Some(SignatureMatrix { signs }));
        }
    }
    Ok(None)
}

/// m-factorial decomposition Sigma = W^-2 + A A^T with diagonal W > 0.
#[derive(Debug, Clone)]
pub struct FactorialForm<S: Scalar> {
    w: DVector<S>,
    a: DMatrix<S>,
    b: DMatrix<S>,
    lambda: Option<S>,
}

const RECONSTRUCTION_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

impl<S: Scalar> FactorialForm<S> {
    /// Validates a user-supplied decomposition against its source matrix:
    /// W^-2 + A A^T must match sigma within relative tolerance 1e-9.
    pub fn new(w: DVector<S>, a: DMatrix<S>, sigma: &CovMatrix<S>) -> Result<Self> {
        let p = sigma.dim();
        if w.len() != p || a.nrows() != p {
            return Err(Error::ShapeMismatch(format!(
                "W has {} entries, A has {} rows, Sigma has dimension {}",
                w.len(),
                a.nrows(),
                p
            )));
        }
        if w.iter().any(|v| *v <= S::zero()) {
            return Err(Error::ParameterOutOfRange {
                requirement: "w_j > 0".into(),
                got: "a nonpositive diagonal entry".into(),
            });
        }
        let recon = DMatrix::from_diagonal(&w.map(|v| S::one() / (v * v))) + &a * a.transpose();
        let err = (&recon - sigma.entries()).norm().to_f64_lossy();
        let scale = sigma.entries().norm().to_f64_lossy();
        if err > RECONSTRUCTION_TOL * scale {
            return Err(Error::ParameterOutOfRange {
                requirement: "reconstruction W^-2 + AA^T = Sigma within 1e-9".into(),
                got: format!("relative error {:.3e}", err / scale),
            });
        }
        let b = DMatrix::from_diagonal(&w) * &a;
        Ok(Self {
            w,
            a,
            b,
            lambda: None,
        })
    }

    pub fn w(&self) -> &DVector<S> {
        &self.w
    }

    pub fn a(&self) -> &DMatrix<S> {
        &self.a
    }

    /// B = W A, whose rows b^j drive the non-centrality quadratic forms.
    pub fn b(&self) -> &DMatrix<S> {
        &self.b
    }

    pub fn factor_count(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn lambda(&self) -> Option<S> {
        self.lambda
    }

    /// Permutes coordinates, for equivariance checks.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let p = self.dim();
        assert_eq!(perm.len(), p);
        let w = DVector::from_fn(p, |i, _| self.w[perm[i]]);
        let a = DMatrix::from_fn(p, self.factor_count(), |i, j| self.a[(perm[i], j)]);
        let b = DMatrix::from_diagonal(&w) * &a;
        Self {
            w,
            a,
            b,
            lambda: self.lambda,
        }
    }
}

/// Factorial decomposition with W^-2 = lambda I, lambda the smallest
/// eigenvalue of Sigma, and A from the spectral factorization of
/// Sigma - lambda I. Produces m = rank(Sigma - lambda I) <= p - 1 factors.
pub fn lambda_factorial_decomposition<S: Scalar>(sigma: &CovMatrix<S>) -> Result<FactorialForm<S>> {
    let p = sigma.dim();
    let eig = sigma.entries().clone().symmetric_eigen();
    let lambda = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(None, |acc: Option<S>, v| {
            Some(acc.map_or(v, |a| if v < a { v } else { a }))
        })
        .ok_or(Error::EigenFailure)?;
    if lambda <= S::zero() {
        return Err(Error::NotPositiveDefinite);
    }
    let max_ev = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(S::zero(), |a, v| if v > a { v } else { a });
    let thresh = S::from_f64_lossy(RANK_TOL) * max_ev;
    let kept: Vec<usize> = (0..p)
        .filter(|&i| eig.eigenvalues[i] - lambda > thresh)
        .collect();
    let m = kept.len();
    let mut a = DMatrix::<S>::zeros(p, m);
    for (col, &i) in kept.iter().enumerate() {
        let s = Float::sqrt(eig.eigenvalues[i] - lambda);
        a.column_mut(col)
            .copy_from(&(eig.eigenvectors.column(i) * s));
    }
    let w = DVector::from_element(p, S::one() / Float::sqrt(lambda));
    let mut form = FactorialForm::new(w, a, sigma)?;
    form.lambda = Some(lambda);
    debug_assert!(form.factor_count() <= p - 1 || p == 1);
    Ok(form)
}
