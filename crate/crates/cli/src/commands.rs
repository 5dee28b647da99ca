use std::path::Path;

use ncrkhs::cpmaps::{cb_norm_cp, choi, effros_ruan_lower_bound, is_cp, sampled_amplification, stinespring};
use ncrkhs::formal::{formal_kolmogorov_truncated, functional_from_series, moment_positivity, nilpotent_positivity_check};
use ncrkhs::json::{
    matrix_value, parse, to_value, CpMapJson, KernelJson, MatrixJson, ModelJson, SeriesJson, TupleJson,
};
use ncrkhs::linalg::{identity, rel_diff, spectral_norm};
use ncrkhs::multiplier::{brangesian_complement, contractive_containment, contractivity_certificate, Multiplier};
use ncrkhs::ncfun::{check_respects_direct_sums, check_respects_intertwinings, eval_on_nilpotent, extract_taylor_coefficients, nilpotency_order};
use ncrkhs::nckernel::{cp_certificate, kolmogorov_at_sample, CertConfig, KernelRep, KernelSamples};
use ncrkhs::rkhs::{lifted_norm, LiftedSample, RkhsModel};
use ncrkhs::sampler::{gaussian_matrix, random_similarity, rng_from_seed};
use ncrkhs::tuple::free_shift;
use ncrkhs::{CMatrix, Error, Kernel, NcKernel, PointSampler, Result, Series, Tol, Tuple};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{axiom_value, certificate_value, points_value, Outcome, Status};
use crate::{Command, Common, Sampling};

pub fn name(c: &Command) -> &'static str {
    match c {
        Command::Eval { .. } => "eval",
        Command::NilpEval { .. } => "nilp-eval",
        Command::ExtractCoeffs { .. } => "extract-coeffs",
        Command::CheckNcfun { .. } => "check-ncfun",
        Command::CheckKernel { .. } => "check-kernel",
        Command::CpCertify { .. } => "cp-certify",
        Command::Kolmogorov { .. } => "kolmogorov",
        Command::KernelFromBasis { .. } => "kernel-from-basis",
        Command::Bergman { .. } => "bergman",
        Command::LiftedNorm { .. } => "lifted-norm",
        Command::MultiplierCheck { .. } => "multiplier-check",
        Command::Brangesian { .. } => "brangesian",
        Command::Containment { .. } => "containment",
        Command::FormalFactor { .. } => "formal-factor",
        Command::FormalPositivity { .. } => "formal-positivity",
        Command::Stinespring { .. } => "stinespring",
        Command::CbNorm { .. } => "cb-norm",
        Command::EffrosRuan { .. } => "effros-ruan",
    }
}

pub fn tolerances(c: &Common) -> Result<Tol> {
    Tol::new(c.tol_eq, c.tol_psd, Tol::default().cond_max)
}

pub fn run(c: &Command, tol: &Tol) -> Outcome {
    let result = match c {
        Command::Eval { series, point } => eval(series, point),
        Command::NilpEval { series, point } => nilp_eval(series, point, tol),
        Command::ExtractCoeffs { series, max_len } => extract_coeffs(series, *max_len, tol),
        Command::CheckNcfun { series, sampling } => check_ncfun(series, sampling, tol),
        Command::CheckKernel { kernel, sampling } => check_kernel(kernel, sampling, tol),
        Command::CpCertify { kernel, sampling } => cp_certify(kernel, sampling, tol),
        Command::Kolmogorov { kernel, sampling } => kolmogorov(kernel, sampling, tol),
        Command::KernelFromBasis { model } => kernel_from_basis(model, tol),
        Command::Bergman { model } => bergman(model, tol),
        Command::LiftedNorm { kernel, samples } => lifted(kernel, samples, tol),
        Command::MultiplierCheck { source, target, s, sampling } => multiplier_check(source, target, s, sampling, tol),
        Command::Brangesian { a, gram_source, gram_target } => brangesian(a, gram_source, gram_target, tol),
        Command::Containment { kernel, kernel_prime, sampling } => containment(kernel, kernel_prime, sampling, tol),
        Command::FormalFactor { kernel, len } => formal_factor(kernel, *len, tol),
        Command::FormalPositivity { kernel, len, sampling } => formal_positivity(kernel, *len, sampling, tol),
        Command::Stinespring { map } => dilation(map, tol),
        Command::CbNorm { map, seed, samples } => cb_norm(map, *seed, *samples, tol),
        Command::EffrosRuan { map, seed, samples } => effros_ruan(map, *seed, *samples, tol),
    };
    result.unwrap_or_else(Outcome::from_error)
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Error::Parse(format!("{}: {}", path.display(), e.to_string().trim_start_matches("parse error: "))))
}

fn read_series(path: &Path) -> Result<Series> {
    read::<SeriesJson>(path)?.to_series()
}

fn read_tuple(path: &Path) -> Result<Tuple> {
    read::<TupleJson>(path)?.to_tuple()
}

fn read_kernel(path: &Path, tol: &Tol) -> Result<Kernel> {
    read::<KernelJson>(path)?.to_kernel(tol)
}

fn read_matrix(path: &Path) -> Result<CMatrix> {
    read::<MatrixJson>(path)?.to_mat()
}

fn read_map(path: &Path) -> Result<ncrkhs::Map> {
    read::<CpMapJson>(path)?.to_map()
}

fn config(s: &Sampling) -> Result<CertConfig> {
    let sampler = PointSampler::parse(&s.sampler)
        .ok_or_else(|| Error::Parse(format!("unknown sampler {:?}; use nilpotent or gaussian", s.sampler)))?;
    Ok(CertConfig::new(sampler, s.points, s.sizes.clone(), s.rows, s.seed))
}

fn sample_points(d: usize, cfg: &CertConfig, rng: &mut ncrkhs::sampler::Rng64) -> Result<Vec<Tuple>> {
    if cfg.n_points == 0 || cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::DimMismatch("sampling needs points and positive sizes".into()));
    }
    Ok((0..cfg.n_points).map(|i| cfg.sampler.sample(rng, d, cfg.sizes[i % cfg.sizes.len()])).collect())
}

fn eval(series: &Path, point: &Path) -> Result<Outcome> {
    let f = read_series(series)?;
    let z = read_tuple(point)?;
    let v = f.eval(&z)?;
    Ok(Outcome::new(Status::Ok, json!({ "value": matrix_value(&v) }), format!("{}x{} value", v.nrows(), v.ncols())))
}

fn nilp_eval(series: &Path, point: &Path, tol: &Tol) -> Result<Outcome> {
    let f = read_series(series)?;
    let z = read_tuple(point)?;
    let order = nilpotency_order(&z, tol)?;
    let v = eval_on_nilpotent(&f, &z, tol)?;
    Ok(Outcome::new(
        Status::Ok,
        json!({ "nilpotency_order": order, "value": matrix_value(&v) }),
        format!("nilpotency order {order}"),
    ))
}

fn extract_coeffs(series: &Path, max_len: usize, tol: &Tol) -> Result<Outcome> {
    let f = read_series(series)?;
    let g = functional_from_series(&f, tol);
    let back = extract_taylor_coefficients(&g, f.d(), max_len, f.out_dim(), f.in_dim(), tol)?;
    let dev = rel_diff(&back.coefficient_vector(max_len), &f.coefficient_vector(max_len));
    Ok(Outcome::new(
        Status::Ok,
        json!({ "max_len": max_len, "deviation": dev, "series": to_value(&SeriesJson::from_series(&back)) }),
        format!("{} terms, deviation {dev:.3e}", back.terms().len()),
    ))
}

fn check_ncfun(series: &Path, s: &Sampling, tol: &Tol) -> Result<Outcome> {
    let f = read_series(series)?;
    let cfg = config(s)?;
    let mut rng = rng_from_seed(cfg.seed);
    let points = sample_points(f.d(), &cfg, &mut rng)?;
    let n = points.len();
    let pairs: Vec<(Tuple, Tuple)> = (0..n).map(|i| (points[i].clone(), points[(i + 1) % n].clone())).collect();
    let triples = points
        .iter()
        .map(|z| {
            let (a, a_inv) = random_similarity::<f64>(&mut rng, z.n(), tol.cond_max);
            Ok((z.clone(), z.similarity(&a, &a_inv)?, a))
        })
        .collect::<Result<Vec<_>>>()?;
    let sums = check_respects_direct_sums(&f, &pairs, tol)?;
    let maps = check_respects_intertwinings(&f, &triples, tol)?;
    let passed = sums.passed && maps.passed;
    let worst = sums.max_violation.max(maps.max_violation);
    Ok(Outcome::new(
        Status::from_pass(passed),
        json!({
            "seed": cfg.seed,
            "sampler": cfg.sampler.name(),
            "sizes": points.iter().map(|z| z.n()).collect::<Vec<_>>(),
            "direct_sums": axiom_value(&sums),
            "intertwinings": axiom_value(&maps),
        }),
        format!("max violation {worst:.3e}"),
    ))
}

fn check_kernel(kernel: &Path, s: &Sampling, tol: &Tol) -> Result<Outcome> {
    let k = read_kernel(kernel, tol)?;
    let cfg = config(s)?;
    if k.needs_nilpotent() && cfg.sampler != PointSampler::Nilpotent {
        return Err(Error::SamplerUnavailable("moment kernels are checked on nilpotent points".into()));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let points = sample_points(k.d(), &cfg, &mut rng)?;
    let samples = KernelSamples::from_points(&k, &points, tol.cond_max, &mut rng);
    let report = ncrkhs::nckernel::check_kernel_axioms(&k, &samples, tol)?;
    Ok(Outcome::new(
        Status::from_pass(report.passed),
        json!({
            "seed": cfg.seed,
            "sampler": cfg.sampler.name(),
            "sizes": points.iter().map(|z| z.n()).collect::<Vec<_>>(),
            "axioms": axiom_value(&report),
        }),
        format!("max violation {:.3e}", report.max_violation),
    ))
}

fn cp_certify(kernel: &Path, s: &Sampling, tol: &Tol) -> Result<Outcome> {
    let k = read_kernel(kernel, tol)?;
    let cert = cp_certificate(&k, &config(s)?, tol)?;
    Ok(Outcome::new(
        Status::from_pass(cert.passed),
        json!({ "certificate": certificate_value(&cert) }),
        format!("min_eig {:.3e} against floor {:.3e}", cert.min_eig, cert.floor),
    ))
}

fn kolmogorov(kernel: &Path, s: &Sampling, tol: &Tol) -> Result<Outcome> {
    let k = read_kernel(kernel, tol)?;
    let cfg = config(s)?;
    if k.needs_nilpotent() && cfg.sampler != PointSampler::Nilpotent {
        return Err(Error::SamplerUnavailable("moment kernels are factored on nilpotent points".into()));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let points = sample_points(k.d(), &cfg, &mut rng)?;
    let fac = kolmogorov_at_sample(&k, &points, tol)?;
    let a = k.algebra_k();
    let mut worst = 0.0f64;
    for (i, zi) in points.iter().enumerate() {
        for (j, zj) in points.iter().enumerate() {
            let p: CMatrix = gaussian_matrix(&mut rng, zi.n() * a, zj.n() * a);
            worst = worst.max(rel_diff(&fac.reconstruct(i, j, &p), &k.eval(zi, zj, &p)?));
        }
    }
    let passed = worst <= 1e-8f64.max(tol.eq_rel);
    Ok(Outcome::new(
        Status::from_pass(passed),
        json!({
            "seed": cfg.seed,
            "rank": fac.rank,
            "points": points_value(&points),
            "factors": fac.factors.iter().map(matrix_value).collect::<Vec<_>>(),
            "reconstruction": worst,
        }),
        format!("rank {}, reconstruction {worst:.3e}", fac.rank),
    ))
}

fn read_model(path: &Path, tol: &Tol) -> Result<RkhsModel<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    // Model files may carry the kernel tag or omit it.
    let mut value: Value = parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if let Value::Object(m) = &mut value {
        if m.get("form").and_then(Value::as_str) == Some("gram_basis") {
            m.remove("form");
        }
    }
    let model: ModelJson = serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    model.to_model(tol)
}

fn kernel_from_basis(model: &Path, tol: &Tol) -> Result<Outcome> {
    let m = read_model(model, tol)?;
    let k: Kernel = m.kernel().clone().into();
    Ok(Outcome::new(
        Status::Ok,
        json!({ "dim": m.dim(), "kernel": to_value(&KernelJson::from_kernel(&k)) }),
        format!("{}-dimensional space", m.dim()),
    ))
}

fn bergman(model: &Path, tol: &Tol) -> Result<Outcome> {
    let m = read_model(model, tol)?;
    let b = m.bergman_kernel(tol)?;
    let z: Tuple = free_shift(m.d(), m.kernel().degree());
    let size = z.n() * m.algebra().k();
    let one = identity(size);
    let dev = rel_diff(&b.eval(&z, &z, &one)?, &m.kernel().eval(&z, &z, &one)?);
    let k: Kernel = b.into();
    Ok(Outcome::new(
        Status::Ok,
        json!({ "dim": m.dim(), "two_path_deviation": dev, "kernel": to_value(&KernelJson::from_kernel(&k)) }),
        format!("two-path deviation {dev:.3e}"),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LiftedSampleJson {
    z: TupleJson,
    u: MatrixJson,
    value: MatrixJson,
}

fn lifted(kernel: &Path, samples: &Path, tol: &Tol) -> Result<Outcome> {
    let k = match read_kernel(kernel, tol)? {
        KernelRep::Kolmogorov(h) => h,
        _ => return Err(Error::Parse("lifted-norm needs a kolmogorov kernel".into())),
    };
    let samples = read::<Vec<LiftedSampleJson>>(samples)?
        .iter()
        .map(|s| Ok(LiftedSample { z: s.z.to_tuple()?, u: s.u.to_mat()?, value: s.value.to_mat()? }))
        .collect::<Result<Vec<_>>>()?;
    let r = lifted_norm(&k, &samples, tol)?;
    Ok(Outcome::new(
        Status::Ok,
        json!({ "norm": r.norm, "residual": r.residual, "state": matrix_value(&r.state) }),
        format!("norm {:.6e}", r.norm),
    ))
}

fn multiplier_check(source: &Path, target: &Path, s: &Path, sampling: &Sampling, tol: &Tol) -> Result<Outcome> {
    let mult = Multiplier::new(read_series(s)?, read_kernel(source, tol)?, read_kernel(target, tol)?)?;
    let cert = contractivity_certificate(&mult, &config(sampling)?, tol)?;
    Ok(Outcome::new(
        Status::from_pass(cert.passed),
        json!({ "certificate": certificate_value(&cert) }),
        format!("min_eig {:.3e} against floor {:.3e}", cert.min_eig, cert.floor),
    ))
}

fn brangesian(a: &Path, gs: &Path, gt: &Path, tol: &Tol) -> Result<Outcome> {
    let d = brangesian_complement(&read_matrix(a)?, &read_matrix(gs)?, &read_matrix(gt)?, tol)?;
    let space = |p: &ncrkhs::multiplier::PullbackSpace<f64>| json!({ "dim": p.dim(), "basis": matrix_value(&p.basis), "gram": matrix_value(&p.gram) });
    Ok(Outcome::new(
        Status::Ok,
        json!({
            "sigma_sq": d.sigma_sq,
            "range": space(&d.range),
            "complement": space(&d.complement),
            "overlap": { "dim": d.overlap.ncols(), "basis": matrix_value(&d.overlap) },
        }),
        format!("range {}, complement {}, overlap {}", d.range.dim(), d.complement.dim(), d.overlap.ncols()),
    ))
}

fn containment(kernel: &Path, kernel_prime: &Path, s: &Sampling, tol: &Tol) -> Result<Outcome> {
    let (cert, _) = contractive_containment(&read_kernel(kernel_prime, tol)?, &read_kernel(kernel, tol)?, &config(s)?, tol)?;
    Ok(Outcome::new(
        Status::from_pass(cert.passed),
        json!({ "certificate": certificate_value(&cert) }),
        format!("min_eig {:.3e} against floor {:.3e}", cert.min_eig, cert.floor),
    ))
}

fn formal_factor(kernel: &Path, len: usize, tol: &Tol) -> Result<Outcome> {
    let k = read::<KernelJson>(kernel)?.to_formal(tol)?;
    let pos = moment_positivity(&k, len, tol)?;
    if !pos.passed {
        return Ok(Outcome::new(
            Status::CertificateFailed,
            json!({
                "len": len,
                "truncated": pos.truncated,
                "min_eig": pos.min_eig,
                "floor": pos.floor,
                "witness": pos.witness.as_ref().map(matrix_value),
            }),
            format!("moment matrix has eigenvalue {:.3e}", pos.min_eig),
        ));
    }
    let f = formal_kolmogorov_truncated(&k, len, tol)?;
    Ok(Outcome::new(
        Status::Ok,
        json!({
            "len": len,
            "truncated": f.truncated,
            "rank": f.rank,
            "h": to_value(&SeriesJson::from_series(&f.h)),
        }),
        format!("rank {}", f.rank),
    ))
}

fn formal_positivity(kernel: &Path, len: Option<usize>, s: &Sampling, tol: &Tol) -> Result<Outcome> {
    let k = read::<KernelJson>(kernel)?.to_formal(tol)?;
    let len = len.unwrap_or(k.max_len());
    let pos = moment_positivity(&k, len, tol)?;
    let cert = nilpotent_positivity_check(&k, &config(s)?, tol)?;
    Ok(Outcome::new(
        Status::from_pass(pos.passed && cert.passed),
        json!({
            "moment": {
                "passed": pos.passed,
                "len": len,
                "truncated": pos.truncated,
                "min_eig": pos.min_eig,
                "floor": pos.floor,
                "witness": pos.witness.as_ref().map(matrix_value),
            },
            "nilpotent": certificate_value(&cert),
            "agree": pos.passed == cert.passed,
        }),
        format!("moment {}, nilpotent {}", pos.passed, cert.passed),
    ))
}

fn cp_failure(phi: &ncrkhs::Map, tol: &Tol) -> Result<Option<Outcome>> {
    let check = is_cp(phi, tol)?;
    if check.passed {
        return Ok(None);
    }
    Ok(Some(Outcome::new(
        Status::CertificateFailed,
        json!({
            "min_eig": check.min_eig,
            "floor": check.floor,
            "hermiticity_violation": check.hermiticity_violation,
            "witness": check.witness.as_ref().map(matrix_value),
        }),
        format!("choi eigenvalue {:.3e}", check.min_eig),
    )))
}

fn dilation(map: &Path, tol: &Tol) -> Result<Outcome> {
    let phi = read_map(map)?;
    if let Some(fail) = cp_failure(&phi, tol)? {
        return Ok(fail);
    }
    let s = stinespring(&phi, tol)?;
    Ok(Outcome::new(
        Status::from_pass(s.reconstruction <= tol.eq_rel),
        json!({
            "choi": matrix_value(&choi(&phi)),
            "choi_rank": s.choi_rank,
            "algebra": to_value(&ncrkhs::json::AlgebraJson::from_spec(s.algebra)),
            "state_dim": s.h.ncols(),
            "h": matrix_value(&s.h),
            "reconstruction": s.reconstruction,
        }),
        format!("r = {}, reconstruction {:.3e}", s.algebra.r(), s.reconstruction),
    ))
}

fn cb_norm(map: &Path, seed: u64, samples: usize, tol: &Tol) -> Result<Outcome> {
    let phi = read_map(map)?;
    if let Some(fail) = cp_failure(&phi, tol)? {
        return Ok(fail);
    }
    let cb = cb_norm_cp(&phi, tol)?;
    let ratio = sampled_amplification(&phi, 4, samples, seed)?;
    let dil = stinespring(&phi, tol)?;
    let hh = spectral_norm(&(&dil.h * dil.h.adjoint()));
    let consistent = ratio <= cb * (1.0 + tol.eq_rel) + tol.eq_rel && (hh - cb).abs() <= tol.eq_rel * cb.max(1.0);
    Ok(Outcome::new(
        Status::from_pass(consistent),
        json!({ "seed": seed, "samples": samples, "cb_norm": cb, "dilation_norm": hh, "max_sampled_ratio": ratio }),
        format!("cb norm {cb:.6e}"),
    ))
}

fn effros_ruan(map: &Path, seed: u64, samples: usize, tol: &Tol) -> Result<Outcome> {
    let phi = read_map(map)?;
    if let Some(fail) = cp_failure(&phi, tol)? {
        return Ok(fail);
    }
    let cb = cb_norm_cp(&phi, tol)?;
    let bound = effros_ruan_lower_bound(&phi, samples, seed)?;
    Ok(Outcome::new(
        Status::from_pass(bound <= cb + 1e-8),
        json!({ "seed": seed, "samples": samples, "lower_bound": bound, "cb_norm": cb }),
        format!("bound {bound:.6e} against cb norm {cb:.6e}"),
    ))
}
