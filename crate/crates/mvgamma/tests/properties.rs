//! Property tests for the linear-algebra identities and the scalar
//! density layer.

use mvgamma::density::{factorial_pdf_mc, EvalPoint};
use mvgamma::gamma::{scaled_noncentral_gamma_pdf, ShapeParam};
use mvgamma::linalg::{
    det_block_factorization, find_signature_m_matrix, lambda_factorial_decomposition,
    partition_blocks, sylvester_identity, CovMatrix, DiagScale, SignatureMatrix,
};
use mvgamma::{quad, RngSeed};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn spd_from_entries(p: usize, entries: &[f64], ridge: f64) -> CovMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |i, j| entries[i * p + j]);
    CovMatrix::new(&g * g.transpose() + DMatrix::identity(p, p) * ridge).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_chain_agrees_with_direct(
        p in 2usize..=8,
        entries in prop::collection::vec(-1.0f64..1.0, 64),
        t_raw in prop::collection::vec(0.0f64..2.5, 8),
    ) {
        let sigma = spd_from_entries(p, &entries[..p * p], 0.4);
        let t = DiagScale::new(DVector::from_iterator(p, t_raw[..p].iter().copied())).unwrap();
        for p1 in 1..p {
            let rep = det_block_factorization(&sigma, &t, p1).unwrap();
            prop_assert!(rep.max_rel_err <= 1e-9, "p1 {}: {}", p1, rep.max_rel_err);
        }
    }

    #[test]
    fn sylvester_holds(
        p1 in 1usize..=4,
        p2 in 1usize..=4,
        a_raw in prop::collection::vec(-2.0f64..2.0, 16),
        b_raw in prop::collection::vec(-2.0f64..2.0, 16),
    ) {
        let a12 = DMatrix::from_fn(p1, p2, |i, j| a_raw[i * p2 + j]);
        let b21 = DMatrix::from_fn(p2, p1, |i, j| b_raw[i * p1 + j]);
        let (d1, d2) = sylvester_identity(&a12, &b21).unwrap();
        let scale = d1.abs().max(1.0);
        prop_assert!((d1 - d2).abs() / scale <= 1e-10, "d1 {d1}, d2 {d2}");
    }

    #[test]
    fn schur_inverse_is_inverse_leading_block(
        (p, p1) in (2usize..=6).prop_flat_map(|p| (Just(p), 1usize..p)),
        entries in prop::collection::vec(-1.0f64..1.0, 36),
    ) {
        let sigma = spd_from_entries(p, &entries[..p * p], 0.4);
        let part = partition_blocks(&sigma, p1).unwrap();
        let schur_inv = part.schur.inverse().unwrap();
        let lead = sigma.inverse().unwrap().view((0, 0), (p1, p1)).into_owned();
        let err = (&schur_inv - &lead).norm() / lead.norm();
        prop_assert!(err <= 1e-9, "relative error {err}");
    }

    #[test]
    fn lambda_decomposition_invariants(
        p in 2usize..=6,
        entries in prop::collection::vec(-1.0f64..1.0, 36),
    ) {
        let sigma = spd_from_entries(p, &entries[..p * p], 0.4);
        let form = lambda_factorial_decomposition(&sigma).unwrap();
        prop_assert!(form.factor_count() <= p - 1);
        prop_assert!(form.lambda().unwrap() > 0.0);
        let w = form.w();
        let recon = DMatrix::from_diagonal(&w.map(|v| 1.0 / (v * v)))
            + form.a() * form.a().transpose();
        let err = (&recon - sigma.entries()).norm() / sigma.entries().norm();
        prop_assert!(err <= 1e-9, "reconstruction error {err}");
    }

    #[test]
    fn signature_search_is_sign_flip_invariant(
        entries in prop::collection::vec(-1.0f64..1.0, 9),
        flips in prop::collection::vec(prop::bool::ANY, 3),
    ) {
        let sigma = spd_from_entries(3, &entries, 0.4);
        let found = find_signature_m_matrix(&sigma).unwrap();
        let signs: Vec<i8> = flips.iter().map(|f| if *f { -1 } else { 1 }).collect();
        let d = SignatureMatrix::new(signs).unwrap();
        let conj = CovMatrix::new(d.conjugate(sigma.entries())).unwrap();
        let found_conj = find_signature_m_matrix(&conj).unwrap();
        prop_assert_eq!(found.is_some(), found_conj.is_some());
    }
}

#[test]
fn scaled_density_mean_is_scale_alpha_plus_delta() {
    // Mean of the scaled non-central gamma is scale*alpha + delta.
    for (scale, delta, alpha) in [(1.0, 0.0, 0.7), (2.0, 3.0, 1.5), (0.5, 1.0, 4.0)] {
        let a = ShapeParam::new(alpha).unwrap();
        let mean = quad::integrate_semi_infinite(
            |x| x * scaled_noncentral_gamma_pdf(x, scale, delta, &a).unwrap(),
            0.0,
            1e-8,
        )
        .unwrap();
        let expected = scale * alpha + delta;
        assert!(
            (mean - expected).abs() < 1e-6,
            "scale {scale}, delta {delta}, alpha {alpha}: mean {mean}"
        );
    }
}

#[test]
fn factorial_density_m0_normalizes() {
    // Diagonal Sigma = W^-2 has the exact product density; its integral over
    // the positive orthant is 1 (p = 2, product quadrature).
    let sigma = CovMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![0.7, 1.8])))
        .unwrap();
    let w = DVector::from_vec(vec![(1.0f64 / 0.7).sqrt(), (1.0f64 / 1.8).sqrt()]);
    let form =
        mvgamma::linalg::FactorialForm::new(w, DMatrix::zeros(2, 0), &sigma).unwrap();
    let alpha = ShapeParam::new(1.3).unwrap();
    let total = quad::integrate_semi_infinite(
        |x1| {
            quad::integrate_semi_infinite(
                |x2| {
                    factorial_pdf_mc(
                        &EvalPoint::new(vec![x1, x2]).unwrap(),
                        &alpha,
                        &form,
                        2,
                        RngSeed::new(0),
                    )
                    .unwrap()
                    .value
                },
                0.0,
                1e-8,
            )
            .unwrap()
        },
        0.0,
        1e-7,
    )
    .unwrap();
    assert!((total - 1.0).abs() < 1e-6, "total {total}");
}

#[test]
fn factorial_density_terms_nonnegative() {
    // Every Monte Carlo term in the factorial representation is a product of
    // nonnegative densities, so estimates stay nonnegative.
    let m = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.3 });
    let sigma = CovMatrix::new(m).unwrap();
    let form = lambda_factorial_decomposition(&sigma).unwrap();
    let alpha = ShapeParam::new(1.0).unwrap();
    for (i, x) in [0.2, 0.9, 2.7].iter().enumerate() {
        let est = factorial_pdf_mc(
            &EvalPoint::new(vec![*x; 4]).unwrap(),
            &alpha,
            &form,
            2000,
            RngSeed::new(i as u64),
        )
        .unwrap();
        assert!(est.value >= 0.0);
    }
}
