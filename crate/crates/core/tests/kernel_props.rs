use ncrkhs::linalg::{identity, rel_diff, spectral_norm};
use ncrkhs::nckernel::{cp_certificate, kolmogorov_at_sample, CertConfig, KernelRep, KolmogorovForm, MomentForm};
use ncrkhs::rkhs::random_model;
use ncrkhs::sampler::{gaussian_matrix, nilpotent_tuple, random_series, rng_from_seed, Rng64};
use ncrkhs::{AlgebraSpec, CMatrix, Kernel, NcKernel, PointSampler, Series, Tol, Tuple};
use proptest::prelude::*;

/// One kernel of each stored form, all with `d = 2`, `y = 2`.
fn kernels(rng: &mut Rng64, k: usize) -> Vec<Kernel> {
    let tol = Tol::default();
    let h: Series = random_series(rng, 2, 2, 3, 2, 0.8);
    let moment: Kernel = MomentForm::from_factor(&h, 2).into();
    let alg = AlgebraSpec::full_matrix(k, 2).unwrap();
    let kol: Kernel = KolmogorovForm::new(alg, random_series(rng, 2, 2, 2 * k, 2, 0.8)).unwrap().into();
    let gram: Kernel = random_model::<f64>(rng, AlgebraSpec::full_matrix(k, 1).unwrap(), 2, 2, 2, 2, &tol).unwrap().kernel().clone().into();
    vec![moment, kol, gram]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factor_moments_agree_with_kolmogorov(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let h: Series = random_series(&mut rng, 2, 2, 3, 3, 0.7);
        let moment = MomentForm::from_factor(&h, 3);
        let kol = KolmogorovForm::new(AlgebraSpec::full_matrix(1, 3).unwrap(), h).unwrap();
        let z: Tuple = nilpotent_tuple(&mut rng, 2, n);
        let w: Tuple = nilpotent_tuple(&mut rng, 2, m);
        let p: CMatrix = gaussian_matrix(&mut rng, n, m);
        prop_assert!(rel_diff(&moment.eval(&z, &w, &p).unwrap(), &kol.eval(&z, &w, &p).unwrap()) <= 1e-10);
    }

    #[test]
    fn hermitian_symmetry_in_every_form(seed in any::<u64>(), k in 1usize..3, n in 1usize..4, m in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        for kern in kernels(&mut rng, k) {
            let a = kern.algebra_k();
            let z: Tuple = nilpotent_tuple(&mut rng, 2, n);
            let w: Tuple = nilpotent_tuple(&mut rng, 2, m);
            let p: CMatrix = gaussian_matrix(&mut rng, n * a, m * a);
            let lhs = kern.eval(&z, &w, &p).unwrap().adjoint();
            let rhs = kern.eval(&w, &z, &p.adjoint()).unwrap();
            prop_assert!(rel_diff(&lhs, &rhs) <= 1e-10);
        }
    }

    #[test]
    fn kolmogorov_kernels_always_certify(seed in any::<u64>(), k in 1usize..3, gaussian in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let kol: Kernel = KolmogorovForm::new(AlgebraSpec::full_matrix(k, 2).unwrap(), random_series(&mut rng, 2, 2, 2 * k, 2, 0.8)).unwrap().into();
        let sampler = if gaussian { PointSampler::Gaussian } else { PointSampler::Nilpotent };
        let cert = cp_certificate(&kol, &CertConfig::new(sampler, 3, vec![1, 2, 3], 2, seed), &Tol::default()).unwrap();
        prop_assert!(cert.passed, "min_eig {}", cert.min_eig);
    }

    #[test]
    fn sample_factorization_round_trip(seed in any::<u64>(), k in 1usize..3) {
        let tol = Tol::default();
        let mut rng = rng_from_seed(seed);
        for kern in kernels(&mut rng, k) {
            let points: Vec<Tuple> = (0..3).map(|i| nilpotent_tuple(&mut rng, 2, 1 + i)).collect();
            let fac = kolmogorov_at_sample(&kern, &points, &tol).unwrap();
            let a = kern.algebra_k();
            for (i, zi) in points.iter().enumerate() {
                for (j, zj) in points.iter().enumerate() {
                    let p: CMatrix = gaussian_matrix(&mut rng, zi.n() * a, zj.n() * a);
                    let exact = kern.eval(zi, zj, &p).unwrap();
                    prop_assert!(rel_diff(&fac.reconstruct(i, j, &p), &exact) <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn unit_bounds_psd_arguments(seed in any::<u64>(), k in 1usize..3, n in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        for kern in kernels(&mut rng, k) {
            let a = kern.algebra_k();
            let z: Tuple = nilpotent_tuple(&mut rng, 2, n);
            let g: CMatrix = gaussian_matrix(&mut rng, n * a, n * a);
            let p = &g * g.adjoint();
            let at_one = spectral_norm(&kern.eval(&z, &z, &identity(n * a)).unwrap());
            let at_p = spectral_norm(&kern.eval(&z, &z, &p).unwrap());
            prop_assert!(at_p <= at_one * spectral_norm(&p) * (1.0 + 1e-10) + 1e-12);
        }
    }
}

#[test]
fn moment_kernels_are_not_cp_by_default() {
    let neg: KernelRep<f64> = MomentForm::new(1, 1, 0, vec![((ncrkhs::Word::empty(), ncrkhs::Word::empty()), -identity::<f64>(1))]).unwrap().into();
    let cert = cp_certificate(&neg, &CertConfig::new(PointSampler::Nilpotent, 1, vec![1], 1, 0), &Tol::default()).unwrap();
    assert!(!cert.passed);
    assert!(cert.min_eig <= -1.0 + 1e-10);
}
