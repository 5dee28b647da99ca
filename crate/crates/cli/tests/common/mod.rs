#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use ncrkhs::json::{to_stable_string, CpMapJson, KernelJson, MatrixJson, ModelJson, SeriesJson, TupleJson};
use ncrkhs::nckernel::{KolmogorovForm, MomentForm};
use ncrkhs::rkhs::random_model;
use ncrkhs::sampler::{random_series, rng_from_seed};
use ncrkhs::linalg::cmat_real;
use ncrkhs::{AlgebraSpec, Kernel, Map, Series, Tol, Tuple};
use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.stdout).unwrap_or_else(|e| panic!("stdout is not json ({e}): {}", String::from_utf8_lossy(&self.stdout)))
    }
}

pub fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ncrkhs")).args(args).output().expect("binary runs");
    Run { code: out.status.code().unwrap_or(-1), stdout: out.stdout, stderr: String::from_utf8_lossy(&out.stderr).into_owned() }
}

/// Input files in a scratch directory.
pub struct Fixtures {
    pub dir: tempfile::TempDir,
}

impl Fixtures {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("temp dir");
        let f = Self { dir };
        f.write_all();
        f
    }

    pub fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }

    pub fn put(&self, name: &str, text: &str) -> String {
        let p: PathBuf = self.dir.path().join(name);
        std::fs::write(&p, text).expect("write fixture");
        p.to_string_lossy().into_owned()
    }

    fn write_all(&self) {
        let tol = Tol::default();
        let mut rng = rng_from_seed(11);
        let series: Series = random_series(&mut rng, 2, 2, 1, 3, 0.8);
        self.put("series.json", &to_stable_string(&SeriesJson::from_series(&series)));
        let jordan = Tuple::new(vec![cmat_real(2, 2, &[0.0, 1.0, 0.0, 0.0]), cmat_real(2, 2, &[0.0, 0.5, 0.0, 0.0])]).unwrap();
        self.put("point.json", &to_stable_string(&TupleJson::from_tuple(&jordan)));

        let szego: Kernel = MomentForm::szego(1, 1, 3).into();
        self.put("szego.json", &to_stable_string(&KernelJson::from_kernel(&szego)));
        self.put("szego_formal.json", &to_stable_string(&KernelJson::from_moment(&MomentForm::<f64>::szego(2, 1, 3), true)));
        let neg = MomentForm::<f64>::new(1, 1, 0, vec![((ncrkhs::Word::empty(), ncrkhs::Word::empty()), cmat_real(1, 1, &[-1.0]))]).unwrap();
        self.put("negative.json", &to_stable_string(&KernelJson::from_kernel(&neg.into())));

        let alg = AlgebraSpec::full_matrix(2, 1).unwrap();
        let kol: Kernel = KolmogorovForm::new(alg, random_series(&mut rng, 2, 2, 2, 2, 0.8)).unwrap().into();
        self.put("kolmogorov.json", &to_stable_string(&KernelJson::from_kernel(&kol)));
        let model = random_model::<f64>(&mut rng, alg, 2, 2, 2, 2, &tol).unwrap();
        self.put("model.json", &to_stable_string(&ModelJson::from_form(model.kernel())));

        let scalar_kol = KolmogorovForm::new(AlgebraSpec::SCALAR, Series::constant(1, cmat_real(1, 1, &[1.0]))).unwrap();
        self.put("constant_kol.json", &to_stable_string(&KernelJson::from_kernel(&scalar_kol.into())));
        let z = r#"{"d":1,"n":1,"coords":[{"rows":1,"cols":1,"data":[[0.3,0.0]]}]}"#;
        let one = r#"{"rows":1,"cols":1,"data":[[1.0,0.0]]}"#;
        let value = |v: f64| format!(r#"{{"rows":1,"cols":1,"data":[[{v},0.0]]}}"#);
        self.put("samples_ok.json", &format!(r#"[{{"z":{z},"u":{one},"value":{}}}]"#, value(2.0)));
        self.put(
            "samples_bad.json",
            &format!(r#"[{{"z":{z},"u":{one},"value":{}}},{{"z":{z},"u":{one},"value":{}}}]"#, value(2.0), value(3.0)),
        );

        for (name, c) in [("half.json", 0.5), ("two.json", 2.0)] {
            self.put(name, &to_stable_string(&SeriesJson::from_series(&Series::constant(1, cmat_real(1, 1, &[c])))));
        }
        let half_szego: Kernel = MomentForm::szego(1, 1, 3).scaled(0.25).into();
        self.put("szego_quarter.json", &to_stable_string(&KernelJson::from_kernel(&half_szego)));

        let (a, gs, gt) = ncrkhs::multiplier::random_contraction::<f64>(&mut rng, 4, 3, &[0.9, 0.3]).unwrap();
        for (name, m) in [("a.json", &a), ("gs.json", &gs), ("gt.json", &gt)] {
            self.put(name, &to_stable_string(&MatrixJson::from_mat(m)));
        }

        let phi: Map = ncrkhs::cpmaps::random_kraus_map(&mut rng, 2, 3, 2).unwrap();
        self.put("map.json", &to_stable_string(&CpMapJson::from_map(&phi)));
        let transpose = Map::new(2, 2, (0..4).map(|i| ncrkhs::linalg::matrix_unit(2, 2, i % 2, i / 2)).collect()).unwrap();
        self.put("transpose.json", &to_stable_string(&CpMapJson::from_map(&transpose)));
    }
}

/// `(name, args)` for every subcommand that draws random samples.
pub fn randomized_commands(f: &Fixtures) -> Vec<(&'static str, Vec<String>)> {
    let p = |n: &str| f.path(n);
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("check-ncfun", [s(&["check-ncfun", "--series"]), vec![p("series.json")], s(&["--seed", "5", "--sampler", "gaussian"])].concat()),
        ("check-kernel", [s(&["check-kernel", "--kernel"]), vec![p("kolmogorov.json")], s(&["--seed", "5", "--sampler", "gaussian"])].concat()),
        ("cp-certify", [s(&["cp-certify", "--kernel"]), vec![p("szego.json")], s(&["--seed", "5"])].concat()),
        ("kolmogorov", [s(&["kolmogorov", "--kernel"]), vec![p("kolmogorov.json")], s(&["--seed", "5"])].concat()),
        (
            "multiplier-check",
            [s(&["multiplier-check", "--source"]), vec![p("szego.json")], s(&["--target"]), vec![p("szego.json")], s(&["--s"]), vec![p("half.json")], s(&["--seed", "5"])]
                .concat(),
        ),
        (
            "containment",
            [s(&["containment", "--kernel"]), vec![p("szego.json")], s(&["--kernel-prime"]), vec![p("szego_quarter.json")], s(&["--seed", "5"])].concat(),
        ),
        ("formal-positivity", [s(&["formal-positivity", "--kernel"]), vec![p("szego_formal.json")], s(&["--L", "2", "--seed", "5"])].concat()),
        ("cb-norm", [s(&["cb-norm", "--map"]), vec![p("map.json")], s(&["--seed", "5"])].concat()),
        ("effros-ruan", [s(&["effros-ruan", "--map"]), vec![p("map.json")], s(&["--seed", "5"])].concat()),
    ]
}
