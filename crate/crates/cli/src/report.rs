use ncrkhs::json::{matrix_value, to_value, TupleJson};
use ncrkhs::ncfun::AxiomReport;
use ncrkhs::{Certificate, Error};
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    InputError,
    CertificateFailed,
    Infeasible,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::InputError => 2,
            Status::CertificateFailed => 3,
            Status::Infeasible => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::InputError => "input_error",
            Status::CertificateFailed => "certificate_failed",
            Status::Infeasible => "infeasible",
        }
    }

    pub fn from_pass(passed: bool) -> Self {
        if passed {
            Status::Ok
        } else {
            Status::CertificateFailed
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub payload: Value,
    pub summary: String,
}

impl Outcome {
    /// Prepends `"status"` to the fields of `body`.
    pub fn new(status: Status, body: Value, summary: impl Into<String>) -> Self {
        let mut map = Map::new();
        map.insert("status".into(), Value::from(status.name()));
        if let Value::Object(fields) = body {
            map.extend(fields);
        }
        Self { status, payload: Value::Object(map), summary: format!("{} ({})", status.name(), summary.into()) }
    }

    pub fn from_error(e: Error) -> Self {
        let status = match e {
            Error::Infeasible { .. } | Error::NotInTarget { .. } => Status::Infeasible,
            Error::NotCp { .. } | Error::NotPsd { .. } | Error::NotContraction { .. } => Status::CertificateFailed,
            _ => Status::InputError,
        };
        let msg = e.to_string();
        Self::new(status, json!({ "error": msg }), msg)
    }
}

pub fn points_value(points: &[ncrkhs::Tuple]) -> Value {
    Value::Array(points.iter().map(|z| to_value(&TupleJson::from_tuple(z))).collect())
}

pub fn certificate_value(c: &Certificate) -> Value {
    json!({
        "passed": c.passed,
        "min_eig": c.min_eig,
        "scale": c.scale,
        "floor": c.floor,
        "seed": c.seed,
        "sampler": c.sampler.name(),
        "sizes": c.points.iter().map(|z| z.n()).collect::<Vec<_>>(),
        "gram_dim": c.gram_dim,
        "axiom_violation": c.axiom_violation,
        "points": points_value(&c.points),
        "rows": c.rows.iter().map(matrix_value).collect::<Vec<_>>(),
        "witness": c.witness.as_ref().map(matrix_value),
    })
}

pub fn axiom_value(r: &AxiomReport<f64>) -> Value {
    json!({
        "passed": r.passed,
        "max_violation": r.max_violation,
        "threshold": r.threshold,
        "witness": r.witness.as_ref().map(|w| json!({
            "sample": w.sample,
            "check": w.check,
            "points": points_value(&w.points),
            "matrices": w.matrices.iter().map(matrix_value).collect::<Vec<_>>(),
        })),
    })
}
