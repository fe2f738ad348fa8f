use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use phasecat::cat::{cat_wigner, interference_matrices, normal_form, reduced_im_g, PureCat};
use phasecat::kerr::{
    kerr_cat, kerr_coefficients, kerr_cross_terms, strictly_smaller, term_envelope_covariance,
    GaussianMixed, ThermalState,
};
use phasecat::lindblad::{
    channel_matrices, evolve_covariance, evolve_term, propagator, term_covariance, LindbladChannel,
};
use phasecat::oracle::{
    auto_truncate, fock_gaussian, fock_wigner, split_operator_kho, GridWavefunction,
};
use phasecat::semiclassical::{
    decompose_squeezed, reconstruction_residual, thawed_step, Branch, KHOParams, NodeSpec,
};
use phasecat::states::{apply_metaplectic, chi_pure, eval_state, wigner_pure, GaussianPure};
use phasecat::symplectic::{
    cayley, euler_decompose, is_symplectic, signature, symplectic_deviation, PhaseVector,
    SymplecticMatrix,
};
use phasecat::verify::{random_cat, random_gaussian};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type RMat = DMatrix<f64>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn max_abs_c(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

fn random_point(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> PhaseVector {
    PhaseVector::new((0..2 * n).map(|_| rng.gen_range(-radius..radius)).collect()).unwrap()
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn symplectic_matrices_have_unit_determinant(seed in any::<u64>(), n in 1usize..=3) {
        let s = SymplecticMatrix::random(n, 1.5, &mut rng(seed));
        prop_assert!(is_symplectic(s.matrix(), 1e-10).unwrap());
        prop_assert!((s.determinant() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn euler_decomposition_reconstructs(seed in any::<u64>(), n in 1usize..=3) {
        let s = SymplecticMatrix::random(n, 1.0, &mut rng(seed));
        let e = euler_decompose(&s).unwrap();
        prop_assert!(max_abs(&(e.reconstruct() - s.matrix())) <= 1e-10);
        prop_assert!(is_symplectic(e.outer.matrix(), 1e-10).unwrap());
        prop_assert!(is_symplectic(e.inner.matrix(), 1e-10).unwrap());
    }

    #[test]
    fn cayley_is_symmetric_and_inverts_by_congruence(seed in any::<u64>(), n in 1usize..=3) {
        let s = SymplecticMatrix::random(n, 1.0, &mut rng(seed));
        let c = cayley(&s);
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        prop_assert!(max_abs(&(&c - c.transpose())) <= 1e-10 * max_abs(&c).max(1.0));
        // S⁻¹ = J⁻¹ Sᵀ J turns the Cayley form into −Sᵀ C S
        let ci = cayley(&s.inverse()).unwrap();
        let expected = -(s.matrix().transpose() * &c * s.matrix());
        prop_assert!(max_abs(&(ci - &expected)) <= 1e-8 * max_abs(&expected).max(1.0));
    }

    #[test]
    fn signature_survives_congruence(seed in any::<u64>(), dim in 1usize..=6) {
        let mut r = rng(seed);
        let q = random_matrix(dim, dim, &mut r).qr().q();
        let d = RMat::from_diagonal(&DVector::from_fn(dim, |_, _| match r.gen_range(0..3) {
            0 => -r.gen_range(0.5..2.0),
            1 => 0.0,
            _ => r.gen_range(0.5..2.0),
        }));
        let m = q.transpose() * d * &q;
        let p = RMat::identity(dim, dim) + random_matrix(dim, dim, &mut r) * 0.3;
        prop_assume!(p.determinant().abs() > 0.1);
        let congruent = p.transpose() * &m * &p;
        prop_assert_eq!(signature(&m, None).unwrap(), signature(&congruent, None).unwrap());
    }

    #[test]
    fn pure_wigner_peak_and_integral(seed in any::<u64>(), n in 1usize..=3, hbar in 0.05f64..2.0) {
        let g = random_gaussian(n, 1.0, 2.0, hbar, &mut rng(seed)).unwrap();
        let w = wigner_pure(&g);
        let peak = w.eval(g.zeta().as_slice()).re;
        let want = (PI * hbar).powi(-(n as i32));
        prop_assert!((peak - want).abs() <= 1e-12 * want);
        prop_assert!((w.integral() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn characteristic_function_at_origin(seed in any::<u64>(), n in 1usize..=3, hbar in 0.05f64..2.0) {
        let g = random_gaussian(n, 1.0, 2.0, hbar, &mut rng(seed)).unwrap();
        let chi = chi_pure(&g, &PhaseVector::zeros(n)).unwrap();
        let want = (2.0 * PI * hbar).powi(-(n as i32));
        // the normalization is analytic; only the determinant of `S Sᵀ` rounds
        prop_assert!((chi - want).norm() <= 1e-12 * want, "{} vs {}", chi, want);
    }

    #[test]
    fn centered_wigner_is_rescaled_characteristic(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let s = SymplecticMatrix::random(n, 0.7, &mut r);
        let g = GaussianPure::new(s, PhaseVector::zeros(n), 1.0).unwrap();
        let w = wigner_pure(&g);
        let ratio = |x: &PhaseVector| {
            let twice = x.scale(2.0);
            w.eval(x.as_slice()) / chi_pure(&g, &twice).unwrap()
        };
        let r0 = ratio(&PhaseVector::zeros(n));
        for _ in 0..8 {
            let x = random_point(n, 1.0, &mut r);
            prop_assert!((ratio(&x) - r0).norm() <= 1e-10 * r0.norm());
        }
    }

    #[test]
    fn metaplectic_covariance(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let cat = random_cat(n, 1.0, &mut r).unwrap();
        let st = cat_wigner(&cat).unwrap();
        let s = SymplecticMatrix::random(n, 0.7, &mut r);
        let moved = apply_metaplectic(&st, &s).unwrap();
        let inv = s.inverse();
        for _ in 0..8 {
            let x = random_point(n, 3.0, &mut r);
            let lhs = eval_state(&moved, &x).unwrap();
            let rhs = eval_state(&st, &inv.apply(&x).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn interference_matrix_is_symmetric_symplectic(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let u = SymplecticMatrix::random(n, 1.0, &mut r);
        let v = SymplecticMatrix::random(n, 1.0, &mut r);
        let (_, g) = interference_matrices(&u, &v).unwrap();
        prop_assert!(max_abs_c(&(&g - g.transpose())) <= 1e-10);
        let j = phasecat::linalg::symplectic_form(n).map(|v| C64::new(v, 0.0));
        prop_assert!(max_abs_c(&(&g * &j * g.transpose() - &j)) <= 1e-10);
        prop_assert!((g.determinant() - 1.0).norm() <= 1e-10);
        let reg = g.map(|z| z.re);
        prop_assert!(reg.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn reduced_imaginary_part_pairs_thetas(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let u = SymplecticMatrix::random(n, 1.0, &mut r);
        let v = SymplecticMatrix::random(n, 1.0, &mut r);
        let img = reduced_im_g(&u, &v).unwrap();
        prop_assert!(img.trace().abs() <= 1e-10);
        let nf = normal_form(&u, &v).unwrap();
        prop_assert!(nf.residual <= 1e-10);
        prop_assert!(nf.thetas.iter().all(|t| (0.0..1.0).contains(t)));
        let mut spectrum: Vec<f64> = img.symmetric_eigenvalues().iter().copied().collect();
        spectrum.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = nf.thetas.iter().flat_map(|t| [*t, -*t]).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in spectrum.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-10, "{:?} vs {:?}", spectrum, want);
        }
    }

    #[test]
    fn normal_form_thetas_are_congruence_invariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let u = SymplecticMatrix::random(n, 1.0, &mut r);
        let v = SymplecticMatrix::random(n, 1.0, &mut r);
        let a = normal_form(&u, &v).unwrap();
        let b = normal_form(&v.inverse().compose(&u).unwrap(), &SymplecticMatrix::identity(n)).unwrap();
        for (x, y) in a.thetas.iter().zip(&b.thetas) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn cat_wigner_is_real_and_normalized(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let cat = random_cat(n, 1.0, &mut r).unwrap();
        let st = cat_wigner(&cat).unwrap();
        prop_assert!((st.integral() - 1.0).norm() <= 1e-10);
        for _ in 0..16 {
            let x = random_point(n, 4.0, &mut r);
            let (v, scale) = st.eval_with_scale(x.as_slice());
            prop_assert!(v.im.abs() <= 1e-10 * scale.max(1e-300));
        }
    }
}

fn random_channel(n: usize, rng: &mut ChaCha8Rng) -> LindbladChannel {
    let b = random_matrix(2 * n, 2 * n, rng);
    let b = (&b + b.transpose()) * 0.5;
    let lambdas = (0..2)
        .map(|_| {
            DVector::from_fn(2 * n, |_, _| {
                C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
            })
        })
        .collect();
    LindbladChannel::new(b, lambdas, 1.0).unwrap()
}

fn cross_term_of(cat: &PureCat) -> phasecat::states::ComplexGaussianTerm {
    cat_wigner(cat).unwrap().terms()[3].clone()
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn imaginary_covariance_is_transported(seed in any::<u64>(), n in 1usize..=2, t in 0.0f64..2.0) {
        let mut r = rng(seed);
        let ch = random_channel(n, &mut r);
        let cm = channel_matrices(&ch).unwrap();
        let c0 = term_covariance(&cross_term_of(&random_cat(n, 1.0, &mut r).unwrap())).unwrap();
        let c = evolve_covariance(&c0, &cm, t).unwrap();
        let (e, _) = propagator(&cm, t).unwrap();
        let want = &e * c0.map(|z| z.im) * e.transpose();
        prop_assert!(max_abs(&(c.map(|z| z.im) - &want)) <= 1e-10 * max_abs(&want).max(1.0));
    }

    #[test]
    fn covariance_evolution_is_a_semigroup(seed in any::<u64>(), n in 1usize..=2, t1 in 0.0f64..1.5, t2 in 0.0f64..1.5) {
        let mut r = rng(seed);
        let ch = random_channel(n, &mut r);
        let cm = channel_matrices(&ch).unwrap();
        let c0 = term_covariance(&cross_term_of(&random_cat(n, 1.0, &mut r).unwrap())).unwrap();
        let once = evolve_covariance(&c0, &cm, t1 + t2).unwrap();
        let twice = evolve_covariance(&evolve_covariance(&c0, &cm, t1).unwrap(), &cm, t2).unwrap();
        prop_assert!(max_abs_c(&(&once - &twice)) <= 1e-10 * max_abs_c(&once).max(1.0));
    }

    #[test]
    fn evolution_conserves_term_integrals(seed in any::<u64>(), n in 1usize..=2, t in 0.0f64..3.0) {
        let mut r = rng(seed);
        let ch = random_channel(n, &mut r);
        let cm = channel_matrices(&ch).unwrap();
        for term in cat_wigner(&random_cat(n, 1.0, &mut r).unwrap()).unwrap().terms() {
            let before = term.integral();
            let after = evolve_term(term, &cm, t).unwrap().integral();
            prop_assert!((after - before).norm() <= 1e-10 * before.norm());
        }
    }

    #[test]
    fn kerr_coefficient_moduli_agree(nu in 1u32..=12, mu in 1u32..=24) {
        prop_assume!(gcd(mu, nu) == 1);
        let kc = kerr_coefficients(mu, nu).unwrap();
        let support = kc.support();
        prop_assert!(!support.is_empty());
        let m0 = kc.coeffs[support[0]].norm();
        for &k in &support {
            prop_assert!((kc.coeffs[k].norm() - m0).abs() <= 1e-12);
        }
        for n in 0..kc.period as u64 {
            prop_assert!((kc.reconstruct(n) - kc.phase(n)).norm() <= 1e-12);
        }
    }

    #[test]
    fn kerr_cats_are_hermitian_normalized_and_subpure(
        seed in any::<u64>(),
        nu in 2u32..=6,
        nbar in 0.0f64..1.5,
    ) {
        let mut r = rng(seed);
        let s = SymplecticMatrix::random(1, 0.5, &mut r);
        let center = random_point(1, 3.0, &mut r);
        let rho = GaussianMixed::new(s, center, nbar, 1.0).unwrap();
        let st = kerr_cat(&rho, 1, nu).unwrap();
        prop_assert!((st.integral() - 1.0).norm() <= 1e-10);
        let purity = st.purity().unwrap();
        prop_assert!(purity <= 1.0 + 1e-8);
        if nbar == 0.0 {
            prop_assert!((purity - 1.0).abs() <= 1e-8);
        }
        for _ in 0..16 {
            let x = random_point(1, 5.0, &mut r);
            let (v, scale) = st.eval_with_scale(x.as_slice());
            prop_assert!(v.im.abs() <= 1e-10 * scale.max(1e-300));
        }
    }

    #[test]
    fn pure_kerr_cats_have_unit_purity(seed in any::<u64>(), nu in 2u32..=6) {
        let g = random_gaussian(1, 0.5, 3.0, 1.0, &mut rng(seed)).unwrap();
        let st = kerr_cat(&GaussianMixed::pure(&g), 1, nu).unwrap();
        prop_assert!((st.purity().unwrap() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn thermal_cross_terms_are_narrower_than_hills(
        nu in 2u32..=6,
        nbar in 0.05f64..2.0,
        q in 1.0f64..3.0,
        p in -1.0f64..1.0,
    ) {
        let ts = ThermalState::new(nbar, PhaseVector::new(vec![q, p]).unwrap(), 1.0).unwrap();
        let rho: GaussianMixed = (&ts).into();
        let hill = term_envelope_covariance(&rho.wigner().unwrap()).unwrap();
        for c in kerr_cross_terms(&rho, 1, nu, 1e-9).unwrap() {
            prop_assert!(strictly_smaller(&term_envelope_covariance(&c.term).unwrap(), &hill));
        }
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn fock_oracle_matches_closed_form(seed in any::<u64>(), hbar in 0.5f64..2.0) {
        let mut r = rng(seed);
        let g = random_gaussian(1, 0.5, 2.0 * hbar.sqrt(), hbar, &mut r).unwrap();
        let (ket, _) = auto_truncate(32, |d| fock_gaussian(&g, d)).unwrap();
        let rho = ket.density();
        let w = wigner_pure(&g);
        let peak = 1.0 / (PI * hbar);
        for _ in 0..6 {
            let x = random_point(1, 3.0 * hbar.sqrt(), &mut r);
            let a = fock_wigner(&rho, [x.as_slice()[0], x.as_slice()[1]]).unwrap();
            let b = w.eval(x.as_slice()).re;
            prop_assert!((a - b).abs() <= 1e-6 * peak, "{} vs {}", a, b);
        }
    }

    #[test]
    fn kicked_jacobians_stay_symplectic(
        q0 in -3.0f64..3.0,
        k in 0.0f64..2.5,
        tau in 0.1f64..3.0,
        kicks in 1usize..=8,
    ) {
        let params = KHOParams::new(k, tau, 0.1, 1).unwrap();
        let mut b = Branch::coherent(q0, 0.1).unwrap();
        for _ in 0..kicks {
            b = thawed_step(&b, &params, false).unwrap();
            let m = b.jacobian.matrix();
            prop_assert!(symplectic_deviation(m).unwrap() <= 1e-10 * max_abs(m).powi(2).max(1.0));
        }
    }

    #[test]
    fn unkicked_branches_are_exact(q0 in -3.0f64..3.0, tau in 0.1f64..3.0, kicks in 1usize..=5) {
        let hbar = 1.0;
        let params = KHOParams::new(0.0, tau, hbar, 1).unwrap();
        let start = Branch::coherent(q0, hbar).unwrap();
        let psi0 = GridWavefunction::centered(512, 40.0, hbar, |q| start.eval(q, hbar)).unwrap();
        let exact = split_operator_kho(&psi0, 0.0, tau, kicks).unwrap();
        let mut b = start;
        for _ in 0..kicks {
            b = thawed_step(&b, &params, false).unwrap();
        }
        let branch = GridWavefunction::centered(512, 40.0, hbar, |q| b.eval(q, hbar)).unwrap();
        let overlap = exact.inner(&branch).unwrap().norm_sqr() / (exact.norm_sqr() * branch.norm_sqr());
        prop_assert!((overlap - 1.0).abs() <= 1e-10, "overlap {}", overlap);
        prop_assert!((branch.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn node_refinement_converges(squeeze in 1.5f64..4.0, q0 in -1.0f64..1.0) {
        let hbar = 0.05;
        let g = GaussianPure::new(
            SymplecticMatrix::squeeze(&[squeeze]).unwrap(),
            PhaseVector::new(vec![q0, 0.0]).unwrap(),
            hbar,
        )
        .unwrap();
        let template = GridWavefunction::centered(2048, 12.0, hbar, |_| C64::new(0.0, 0.0)).unwrap();
        let residual = |spacing: f64| {
            let swarm = decompose_squeezed(&g, &NodeSpec { span_sigmas: 8.0, spacing }).unwrap();
            reconstruction_residual(&swarm, &g, &template).unwrap()
        };
        let floor = 4.0 * residual(0.05);
        let mut prev = residual(3.2);
        for spacing in [1.6, 0.8, 0.4, 0.2] {
            let next = residual(spacing);
            prop_assert!(next <= (prev / 4.0).max(floor), "spacing {}: {} after {}", spacing, next, prev);
            prev = next;
        }
    }
}

#[test]
fn cayley_of_identity_vanishes() {
    for n in 1..=3 {
        let c = cayley(&SymplecticMatrix::identity(n)).unwrap();
        assert_eq!(max_abs(&c), 0.0);
    }
}

#[test]
fn thermal_state_reduces_to_vacuum() {
    let center = PhaseVector::new(vec![0.7, -0.2]).unwrap();
    let ts = ThermalState::new(0.0, center.clone(), 1.0).unwrap();
    let rho: GaussianMixed = (&ts).into();
    let vac = GaussianPure::coherent(center, 1.0).unwrap();
    let a = rho.wigner().unwrap();
    let b = wigner_pure(&vac);
    for x in [[0.0, 0.0], [1.0, -0.5], [0.7, -0.2]] {
        assert!((a.eval(&x) - b.eval(&x)).norm() <= 1e-14);
    }
}
