use proptest::prelude::*;
use qms_core::linalg::{fractional_power, hermitian_eig, moore_penrose, operator_norm, svd, HermitianMatrix};
use qms_core::{random, ComplexMatrix, Tolerances, C64};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Gauss–Jordan with partial pivoting; independent of the SVD route.
fn gauss_jordan_inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm())).unwrap();
        for k in 0..n {
            let (x, y) = (m[(col, k)], inv[(col, k)]);
            m[(col, k)] = m[(piv, k)];
            inv[(col, k)] = inv[(piv, k)];
            m[(piv, k)] = x;
            inv[(piv, k)] = y;
        }
        let p = m[(col, col)];
        for k in 0..n {
            m[(col, k)] /= p;
            inv[(col, k)] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[(r, col)];
                for k in 0..n {
                    let (mc, ic) = (m[(col, k)], inv[(col, k)]);
                    m[(r, k)] -= f * mc;
                    inv[(r, k)] -= f * ic;
                }
            }
        }
    }
    inv
}

/// The four Penrose identities, worst residual relative to max(1, ‖A‖).
fn penrose_residual(a: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
    let ap = a * p;
    let pa = p * a;
    let scale = a.max_abs().max(1.0) * p.max_abs().max(1.0);
    [
        (&ap * a).max_abs_diff(a) / a.max_abs().max(1.0),
        (&pa * p).max_abs_diff(p) / scale,
        ap.max_abs_diff(&ap.adjoint()),
        pa.max_abs_diff(&pa.adjoint()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[test]
fn penrose_identities_on_a_hundred_matrices() {
    let mut rng = random::rng(2024);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let (m, n) = (1 + k % 5, 1 + (k / 5) % 5);
        let a = if k % 2 == 0 {
            random::ginibre(&mut rng, m, n)
        } else {
            // force a zero singular value through a thin factorization
            let r = m.min(n).saturating_sub(1);
            &random::ginibre(&mut rng, m, r) * &random::ginibre(&mut rng, r, n)
        };
        let p = moore_penrose(&a, tol().pinv_cutoff).unwrap();
        assert_eq!((p.rows(), p.cols()), (n, m));
        worst = worst.max(penrose_residual(&a, &p));
    }
    assert!(worst <= 1e-9, "worst Penrose residual {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_residuals(seed in any::<u64>(), n in 2usize..=6) {
        let a = random::hermitian(&mut random::rng(seed), n);
        let es = hermitian_eig(&HermitianMatrix::from_hermitian_part(&a), &tol()).unwrap();
        let v = &es.vectors;
        let av = &a * v;
        let vl = v * &ComplexMatrix::real_diag(&es.eigenvalues);
        let bound = 1e-10 * operator_norm(&a).unwrap().max(1.0);
        prop_assert!(av.max_abs_diff(&vl) <= bound);
        prop_assert!((&v.adjoint() * v).max_abs_diff(&ComplexMatrix::identity(n)) <= bound);
        prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn quarter_power_squared_is_half_power(seed in any::<u64>(), n in 1usize..=5, rank in 1usize..=5) {
        let a = random::psd(&mut random::rng(seed), n, rank.min(n));
        let h = HermitianMatrix::from_hermitian_part(&a);
        let q = fractional_power(&h, 0.25, &tol()).unwrap().into_matrix();
        let half = fractional_power(&h, 0.5, &tol()).unwrap().into_matrix();
        prop_assert!((&q * &q).max_abs_diff(&half) <= 1e-9);
    }

    #[test]
    fn pinv_of_invertible_is_inverse(seed in any::<u64>(), n in 1usize..=5) {
        let a = random::ginibre(&mut random::rng(seed), n, n);
        let s = svd(&a).unwrap().sigma;
        let cond = s[0] / s[n - 1];
        prop_assume!(cond < 1e8);
        let p = moore_penrose(&a, tol().pinv_cutoff).unwrap();
        let inv = gauss_jordan_inverse(&a);
        prop_assert!(p.max_abs_diff(&inv) <= 1e-9 * cond.max(1.0) * inv.max_abs().max(1.0));
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=6) {
        let a = random::ginibre(&mut random::rng(seed), m, n);
        let d = svd(&a).unwrap();
        let k = d.sigma.len();
        let sig = ComplexMatrix::from_fn(k, k, |i, j| if i == j { C64::new(d.sigma[i], 0.0) } else { C64::new(0.0, 0.0) });
        let rec = &(&d.u * &sig) * &d.v.adjoint();
        prop_assert!(rec.max_abs_diff(&a) <= 1e-12 * a.max_abs().max(1.0));
        prop_assert!(d.sigma.windows(2).all(|w| w[0] >= w[1]));
    }
}
