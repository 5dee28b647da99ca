use super::*;
use crate::linalg::{cmat_real, matrix_unit};
use crate::sampler::{gaussian_matrix, random_series, rng_from_seed, PointSampler};

type T = MatrixTuple<f64>;
type M = CMat<f64>;

fn jordan2() -> T {
    T::new(vec![cmat_real(2, 2, &[0., 1., 0., 0.])]).unwrap()
}

#[test]
fn szego_pinned() {
    let k = MomentForm::<f64>::szego(1, 1, 3);
    let z = jordan2();
    let v = k.eval(&z, &z, &identity(2)).unwrap();
    assert!((v - cmat_real::<f64>(2, 2, &[2., 0., 0., 1.])).norm() < 1e-12);
}

#[test]
fn moment_refuses_long_points() {
    let k = MomentForm::<f64>::szego(1, 1, 1);
    let z = T::new(vec![cmat_real(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.])]).unwrap();
    assert!(matches!(k.eval(&z, &z, &identity(3)), Err(Error::TruncationRefused { max_len: 1, order: 3 })));
    let dense = T::new(vec![cmat_real(1, 1, &[0.3])]).unwrap();
    assert!(k.eval(&dense, &dense, &identity(1)).is_err());
    let k = k.with_truncation(true);
    assert!(k.eval(&dense, &dense, &identity(1)).is_ok());
}

#[test]
fn kolmogorov_identity_factor() {
    let k = KolmogorovForm::new(AlgebraSpec::SCALAR, NcSeries::constant(2, identity::<f64>(1))).unwrap();
    let mut rng = rng_from_seed(1);
    let z: T = PointSampler::Gaussian.sample(&mut rng, 2, 3);
    let w: T = PointSampler::Gaussian.sample(&mut rng, 2, 2);
    let p: M = gaussian_matrix(&mut rng, 3, 2);
    assert!(rel_diff(&k.eval(&z, &w, &p).unwrap(), &p) < 1e-14);
}

#[test]
fn gram_single_constant() {
    let tol = Tolerances::default();
    let k = GramBasisForm::new(
        AlgebraSpec::SCALAR,
        1,
        1,
        vec![NcSeries::constant(1, identity::<f64>(1))],
        cmat_real(1, 1, &[2.]),
        &tol,
    )
    .unwrap();
    let z = jordan2();
    let p: M = cmat_real(2, 2, &[1., 2., 3., 4.]);
    assert!(rel_diff(&k.eval(&z, &z, &p).unwrap(), &(&p * creal(0.5))) < 1e-15);
    let e = KernelElement { w: T::zero(1, 1), v: identity(1), y: identity(1) };
    let v = kernel_element_eval(&k, &e, &T::zero(1, 1), &identity(1)).unwrap();
    assert!((v[(0, 0)].re - 0.5).abs() < 1e-15);
    let zero = kernel_element_eval(&k, &e, &T::zero(1, 1), &zeros(1, 1)).unwrap();
    assert_eq!(zero, zeros(1, 1));
}

#[test]
fn moment_matches_kolmogorov_on_nilpotent() {
    let mut rng = rng_from_seed(9);
    let h = random_series::<f64>(&mut rng, 2, 2, 3, 2, 0.7);
    let kk = KolmogorovForm::new(AlgebraSpec::full_matrix(1, 3).unwrap(), h.clone()).unwrap();
    let km = MomentForm::from_factor(&h, 2);
    for _ in 0..5 {
        let z: T = PointSampler::Nilpotent.sample(&mut rng, 2, 3);
        let w: T = PointSampler::Nilpotent.sample(&mut rng, 2, 2);
        let p: M = gaussian_matrix(&mut rng, 3, 2);
        let a = kk.eval(&z, &w, &p).unwrap();
        let b = km.eval(&z, &w, &p).unwrap();
        assert!(rel_diff(&a, &b) < 1e-12);
    }
}

#[test]
fn negative_moment_fails_certificate() {
    let k = MomentForm::<f64>::new(1, 1, 0, vec![((Word::empty(), Word::empty()), cmat_real(1, 1, &[-1.]))]).unwrap();
    let cfg = CertConfig::new(PointSampler::Nilpotent, 1, vec![1], 1, 0);
    let cert = cp_certificate(&k, &cfg, &Tolerances::default()).unwrap();
    assert!(!cert.passed);
    assert!(cert.min_eig <= -1.0 + 1e-12);
    assert!(cert.witness.is_some());
    let cfg = CertConfig::new(PointSampler::Gaussian, 1, vec![1], 1, 0);
    assert!(matches!(cp_certificate(&k, &cfg, &Tolerances::default()), Err(Error::SamplerUnavailable(_))));
}

#[test]
fn szego_certificates_pass() {
    let tol = Tolerances::default();
    let k = MomentForm::<f64>::szego(2, 1, 3);
    let cfg = CertConfig::new(PointSampler::Nilpotent, 4, vec![1, 2, 3, 4], 2, 7);
    assert!(cp_certificate(&k, &cfg, &tol).unwrap().passed);
    let red = cp_certificate_similarity_reduced(&k, &cfg, &tol).unwrap();
    assert!(red.passed, "{red:?}");
    let neg = k.scaled(-1.0);
    assert!(!cp_certificate_similarity_reduced(&neg, &cfg, &tol).unwrap().passed);
}

#[test]
fn corrupted_moment_table_breaks_hermitian_symmetry() {
    let tol = Tolerances::default();
    let mut moments: Vec<((Word, Word), M)> = crate::word::words_up_to(1, 2)
        .into_iter()
        .map(|w| ((w.clone(), w), identity(1)))
        .collect();
    moments.push(((Word::empty(), Word::letter(1)), cmat_real(1, 1, &[0.5])));
    let k = MomentForm::new(1, 1, 2, moments).unwrap();
    let mut rng = rng_from_seed(4);
    let pts: Vec<T> = (0..3).map(|_| PointSampler::Nilpotent.sample(&mut rng, 1, 3)).collect();
    let samples = KernelSamples::from_points(&k, &pts, 1e3, &mut rng);
    let report = check_kernel_axioms(&k, &samples, &tol).unwrap();
    assert!(!report.passed);
    assert_eq!(report.witness.unwrap().check, "hermitian");
}

#[test]
fn kolmogorov_sample_pinned() {
    let tol = Tolerances::default();
    let k = MomentForm::<f64>::szego(1, 1, 2);
    let s = kolmogorov_at_sample(&k, &[T::zero(1, 1)], &tol).unwrap();
    assert_eq!(s.rank, 1);
    assert!((s.factors[0][(0, 0)].norm() - 1.0).abs() < 1e-14);

    let zero = KolmogorovForm::new(AlgebraSpec::SCALAR, NcSeries::zero(1, 1, 1)).unwrap();
    let s = kolmogorov_at_sample(&zero, &[jordan2()], &tol).unwrap();
    assert_eq!(s.rank, 0);
    assert_eq!(s.reconstruct(0, 0, &identity(2)), zeros(2, 2));
}

#[test]
fn kolmogorov_sample_round_trip_with_algebra() {
    let tol = Tolerances::default();
    let mut rng = rng_from_seed(12);
    let alg = AlgebraSpec::full_matrix(2, 2).unwrap();
    let h = random_series::<f64>(&mut rng, 2, 2, 4, 2, 0.6);
    let k = KolmogorovForm::new(alg, h).unwrap();
    let pts: Vec<T> = (1..=3).map(|n| PointSampler::Gaussian.sample(&mut rng, 2, n)).collect();
    let s = kolmogorov_at_sample(&k, &pts, &tol).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let p: M = gaussian_matrix(&mut rng, pts[i].n() * 2, pts[j].n() * 2);
            let a = k.eval(&pts[i], &pts[j], &p).unwrap();
            assert!(rel_diff(&a, &s.reconstruct(i, j, &p)) < 1e-10);
        }
    }
}

#[test]
fn envelope_blocks() {
    let k = MomentForm::<f64>::szego(1, 1, 2);
    let z = jordan2();
    let env = EnvelopeKernel::from_kernel(&k, std::slice::from_ref(&z)).unwrap();
    let p: M = cmat_real(4, 4, &[1., 2., 0., 1., 0., 1., 1., 1., 3., 0., 1., 0., 1., 1., 1., 2.]);
    let v = env.eval(&[0, 0], &[0, 0], &p).unwrap();
    let zz = crate::tuple::direct_sum(&[z.clone(), z.clone()]).unwrap();
    assert!(rel_diff(&v, &k.eval(&zz, &zz, &p).unwrap()) < 1e-14);
    let single = env.eval(&[0], &[0], &identity(2)).unwrap();
    assert!(rel_diff(&single, &k.eval(&z, &z, &identity(2)).unwrap()) < 1e-15);
    let mut sparse = EnvelopeKernel::<f64>::new(1, 1, vec![1, 1]);
    sparse.insert_pair(0, 0, vec![identity(1)]).unwrap();
    assert!(matches!(sparse.eval(&[0, 1], &[0], &zeros(2, 1)), Err(Error::MissingPair(1, 0))));
}

#[test]
fn bbls_scalar_points() {
    // K(z_i, z_j)(a) = a / (1 − z_i conj(z_j)) on three scalar points.
    let zs = [0.1, -0.4, 0.6];
    let mut env = EnvelopeKernel::<f64>::new(1, 1, vec![1, 1, 1]);
    for i in 0..3 {
        for j in 0..3 {
            env.insert_pair(i, j, vec![cmat_real(1, 1, &[1.0 / (1.0 - zs[i] * zs[j])])]).unwrap();
        }
    }
    let ones = M::from_element(3, 3, creal(1.0));
    let m = env.eval(&[0, 1, 2], &[0, 1, 2], &ones).unwrap();
    assert!(min_eig_hermitian(&m).unwrap() > 0.0);
    let mut bad = EnvelopeKernel::<f64>::new(1, 1, vec![1, 1]);
    for i in 0..2 {
        for j in 0..2 {
            let v = if i == j { 1.0 } else { 2.0 };
            bad.insert_pair(i, j, vec![cmat_real(1, 1, &[v])]).unwrap();
        }
    }
    let ones = M::from_element(2, 2, creal(1.0));
    assert!(min_eig_hermitian(&bad.eval(&[0, 1], &[0, 1], &ones).unwrap()).unwrap() < 0.0);
}

#[test]
fn cb_norm_pinned() {
    let k = MomentForm::<f64>::szego(1, 1, 2);
    let r = cb_norm_report(&k, &jordan2(), 20, 3).unwrap();
    assert!((r.norm_at_identity - 2.0).abs() < 1e-12);
    assert!(r.max_sampled_ratio <= r.norm_at_identity + 1e-12);
    let one = KolmogorovForm::new(AlgebraSpec::SCALAR, NcSeries::constant(1, identity::<f64>(1))).unwrap();
    let r = cb_norm_report(&one, &jordan2(), 20, 3).unwrap();
    assert!((r.norm_at_identity - 1.0).abs() < 1e-12 && r.max_sampled_ratio <= 1.0 + 1e-12);
    let zero = KolmogorovForm::new(AlgebraSpec::SCALAR, NcSeries::zero(1, 1, 1)).unwrap();
    let r = cb_norm_report(&zero, &jordan2(), 5, 3).unwrap();
    assert_eq!((r.norm_at_identity, r.max_sampled_ratio), (0.0, 0.0));
}

#[test]
fn matrix_unit_arguments_span() {
    let p: M = matrix_unit(2, 2, 0, 1);
    assert_eq!(p[(0, 1)], creal(1.0));
}
