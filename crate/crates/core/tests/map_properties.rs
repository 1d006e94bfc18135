use proptest::prelude::*;
use qms_core::induced::{gns_induce, i_rho_superop, induce};
use qms_core::linalg::{moore_penrose, singular_values};
use qms_core::semigroup::exponentiate;
use qms_core::state::is_subinvariant;
use qms_core::superop::{cp_block_sum, is_cp, is_schwarz, random_block_tuple, schwarz_sampled, vectorize};
use qms_core::{instances, random, ComplexMatrix, DensityMatrix, Superoperator, Tolerances, Verdict};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// x ↦ Σ K_j† x K_j for `k` Ginibre Kraus operators.
fn random_cp(seed: u64, n: usize, k: usize) -> Superoperator {
    let mut rng = random::rng(seed);
    let mut t = Superoperator::zero(n);
    for _ in 0..k {
        let kr = random::ginibre(&mut rng, n, n);
        t = t.add(&Superoperator::sandwich(&kr.adjoint(), &kr).unwrap()).unwrap();
    }
    t
}

/// Random CP unital map: Kraus operators K_j S^{-1/2} with S = Σ K_j† K_j.
fn random_cp_unital(seed: u64, n: usize, k: usize) -> Superoperator {
    let mut rng = random::rng(seed);
    let ks: Vec<ComplexMatrix> = (0..k).map(|_| random::ginibre(&mut rng, n, n)).collect();
    let mut s = ComplexMatrix::zeros(n, n);
    for kr in &ks {
        s = &s + &(&kr.adjoint() * kr);
    }
    let h = qms_core::HermitianMatrix::from_hermitian_part(&s);
    let w = qms_core::linalg::fractional_power(&h, -0.5, &tol()).unwrap().into_matrix();
    let mut t = Superoperator::zero(n);
    for kr in &ks {
        let a = kr * &w;
        t = t.add(&Superoperator::sandwich(&a.adjoint(), &a).unwrap()).unwrap();
    }
    t
}

fn random_superop(seed: u64, n: usize) -> Superoperator {
    Superoperator::from_matrix(random::ginibre(&mut random::rng(seed), n * n, n * n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn choi_psd_implies_block_sums_nonnegative(seed in any::<u64>(), n in 1usize..=4, k in 1usize..=3) {
        let t = random_cp(seed, n, k);
        prop_assert_eq!(is_cp(&t, &tol()).unwrap().verdict, Verdict::Pass);
        let mut rng = random::rng(seed ^ 0x5eed);
        for _ in 0..100 {
            let (xs, hs) = random_block_tuple(&mut rng, n, 3);
            let s = cp_block_sum(&t, &xs, &hs).unwrap();
            let scale = xs.iter().map(|x| x.frobenius_norm().powi(2)).sum::<f64>() * t.matrix().max_abs().max(1.0);
            prop_assert!(s.re >= -1e-10 * scale && s.im.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn hs_adjoint_involution_and_order_reversal(seed in any::<u64>(), n in 1usize..=4) {
        let (s, t) = (random_superop(seed, n), random_superop(seed.wrapping_add(1), n));
        prop_assert_eq!(s.hs_adjoint().hs_adjoint(), s.clone());
        let lhs = s.compose(&t).unwrap().hs_adjoint();
        let rhs = t.hs_adjoint().compose(&s.hs_adjoint()).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-12 * lhs.matrix().max_abs().max(1.0));
    }

    #[test]
    fn predual_matches_hs_adjoint_on_hermitian_inputs(seed in any::<u64>(), n in 1usize..=4) {
        // T(x) = A x A† + B x B† − C x C† is Hermiticity-preserving but not CP.
        let mut rng = random::rng(seed);
        let mut t = Superoperator::zero(n);
        for sign in [1.0, 1.0, -1.0] {
            let a = random::ginibre(&mut rng, n, n);
            t = t.add(&Superoperator::sandwich(&a, &a.adjoint()).unwrap().scale(sign)).unwrap();
        }
        let p = t.predual(&tol());
        prop_assert!(p.hermiticity_preserving);
        let x = random::hermitian(&mut rng, n);
        let lhs = p.map.apply(&x).unwrap();
        let rhs = t.hs_adjoint().apply(&x).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn faithfulness_iff_pinv_inverts(seed in any::<u64>(), n in 1usize..=4, rank in 1usize..=4) {
        let rank = rank.min(n);
        let mut m = random::psd(&mut random::rng(seed), n, rank);
        m = m.scale_real(1.0 / m.trace().re);
        let rho = DensityMatrix::new(m, &tol()).unwrap();
        let p = moore_penrose(rho.matrix(), tol().pinv_cutoff).unwrap();
        let injective = (&p * rho.matrix()).max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-8;
        prop_assert_eq!(rho.is_faithful(), injective);
        prop_assert_eq!(rho.is_faithful(), rank == n);
    }

    #[test]
    fn unital_predual_preserves_trace(seed in any::<u64>(), n in 1usize..=4) {
        let t = random_cp_unital(seed, n, 2);
        let rho = DensityMatrix::new(random::density(&mut random::rng(seed ^ 7), n), &tol()).unwrap();
        let out = t.predual(&tol()).map.apply(rho.matrix()).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn subinvariance_survives_convex_mixing(seed in any::<u64>(), n in 2usize..=4) {
        // Unitary conjugation commuting with both states, scaled by 0.9: every
        // commuting state is then subinvariant.
        let mut rng = random::rng(seed);
        let u = random::unitary(&mut rng, n);
        let mk = |p: Vec<f64>| {
            let s: f64 = p.iter().sum();
            let d = ComplexMatrix::real_diag(&p.iter().map(|x| x / s).collect::<Vec<_>>());
            DensityMatrix::new(&(&u * &d) * &u.adjoint(), &tol()).unwrap()
        };
        let r1 = mk((0..n).map(|i| 1.0 + i as f64).collect());
        let r2 = mk((0..n).map(|i| (n - i) as f64).collect());
        let phases = ComplexMatrix::diag(&(0..n).map(|k| qms_core::C64::from_polar(1.0, k as f64)).collect::<Vec<_>>());
        let v = &(&u * &phases) * &u.adjoint();
        let t = Superoperator::sandwich(&v.adjoint(), &v).unwrap().scale(0.9);
        prop_assert!(is_subinvariant(&t, &r1, &tol()).unwrap().verdict.holds());
        prop_assert!(is_subinvariant(&t, &r2, &tol()).unwrap().verdict.holds());
        for k in 1..10 {
            let w = k as f64 / 10.0;
            let mix = &r1.matrix().scale_real(w) + &r2.matrix().scale_real(1.0 - w);
            let r = DensityMatrix::new(mix, &tol()).unwrap();
            prop_assert!(is_subinvariant(&t, &r, &tol()).unwrap().verdict.holds());
        }
    }

    #[test]
    fn i_rho_is_injective_and_onto(seed in any::<u64>(), n in 1usize..=4) {
        let rho = DensityMatrix::new(random::density(&mut random::rng(seed), n), &tol()).unwrap();
        let s = singular_values(i_rho_superop(&rho).matrix()).unwrap();
        prop_assert_eq!(s.len(), n * n);
        prop_assert!(*s.last().unwrap() > 0.0);
        prop_assert!(s.iter().filter(|&&x| x > 1e-12 * s[0]).count() == n * n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn schwarz_fast_path_agrees_with_sampling(seed in any::<u64>(), n in 1usize..=3) {
        let t = random_cp_unital(seed, n, 2);
        let fast = is_schwarz(&t, seed, &tol()).unwrap();
        let sampled = schwarz_sampled(&t, seed, &tol()).unwrap();
        prop_assert_eq!(fast.verdict, Verdict::Pass);
        prop_assert_ne!(sampled.verdict, Verdict::Fail);
    }

    #[test]
    fn cp_transfers_both_ways(seed in any::<u64>(), n in 2usize..=3) {
        let rho = DensityMatrix::new(random::density(&mut random::rng(seed), n), &tol()).unwrap();
        for t in [random_cp(seed, n, 2), Superoperator::transpose_map(n), random_superop(seed, n)] {
            let tt = induce(&t, &rho).unwrap().t_tilde;
            let (a, b) = (is_cp(&t, &tol()).unwrap(), is_cp(&tt, &tol()).unwrap());
            prop_assert_eq!(a.verdict, b.verdict, "choi minima {} vs {}", a.value, b.value);
        }
    }
}

#[test]
fn fifty_cp_unital_maps_never_split_schwarz_verdicts() {
    for seed in 0..50u64 {
        let n = 1 + (seed as usize % 3);
        let t = random_cp_unital(seed, n, 1 + (seed as usize % 3));
        assert_eq!(is_schwarz(&t, seed, &tol()).unwrap().verdict, Verdict::Pass);
        assert_ne!(schwarz_sampled(&t, seed, &tol()).unwrap().verdict, Verdict::Fail, "seed {seed}");
    }
}

#[test]
fn contraction_transfer_on_accepted_instances() {
    let (insts, _) = instances::accepted_instances(3, &instances::GkslParams::default(), 6, 77, 50, &tol()).unwrap();
    for inst in &insts {
        for t in [0.1, 1.0, 10.0] {
            let tt = exponentiate(&inst.generator, t).unwrap();
            let induced = induce(&tt, &inst.rho).unwrap();
            assert!(induced.residual <= 1e-9);
            assert!(qms_core::linalg::operator_norm(induced.t_tilde.matrix()).unwrap() <= 1.0 + 1e-9);
            assert!(gns_induce(&tt, &inst.rho, &tol()).unwrap() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn vectorization_is_column_stacking() {
    let x = ComplexMatrix::from_real(2, &[1.0, 2.0, 3.0, 4.0]);
    let v: Vec<f64> = vectorize(&x).iter().map(|z| z.re).collect();
    assert_eq!(v, [1.0, 3.0, 2.0, 4.0]);
    assert_eq!(qms_core::VECTORIZATION, "column-stacking");
}
