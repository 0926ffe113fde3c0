//! JSON instance files and certificate serialization.

use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::classical::{validate_metric, MetricSpace};
use crate::magnitude::{Cost, CostJson};
use crate::na::{CutBound, Extension, ExtensionOptions, NormCertificate, PlanEntry};
use crate::rational::{format_rational, parse_rational};
use crate::scalar::{FieldSpec, Scalar};
use crate::ultrametric::{
    build_dendrogram, validate_ultrametric, MetricError, UltraSpace, ZERO_LABEL,
};
use crate::vector::FreeVector;

/// One problem found while reading an instance, with its JSON location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

/// Every problem found in an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceError {
    pub issues: Vec<Issue>,
}

impl InstanceError {
    fn one(location: impl Into<String>, message: impl Into<String>) -> Self {
        InstanceError {
            issues: vec![Issue {
                location: location.into(),
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", issue.location, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for InstanceError {}

#[derive(Clone, Debug)]
pub enum InstanceSpace {
    Ultra(UltraSpace),
    Metric(MetricSpace),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub field: FieldSpec,
    pub space: InstanceSpace,
    pub vector: FreeVector,
    pub options: ExtensionOptions,
}

impl Instance {
    pub fn ultra(&self) -> Option<&UltraSpace> {
        match &self.space {
            InstanceSpace::Ultra(s) => Some(s),
            InstanceSpace::Metric(_) => None,
        }
    }

    /// The space as a plain metric space (ultrametrics included).
    pub fn metric(&self) -> MetricSpace {
        match &self.space {
            InstanceSpace::Ultra(s) => MetricSpace::from(s),
            InstanceSpace::Metric(m) => m.clone(),
        }
    }

    pub fn points(&self) -> &[String] {
        match &self.space {
            InstanceSpace::Ultra(s) => s.points(),
            InstanceSpace::Metric(m) => m.points(),
        }
    }
}

struct Collector {
    issues: Vec<Issue>,
}

impl Collector {
    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            location: location.into(),
            message: message.into(),
        });
    }
}

fn rational_value(v: &Value) -> Result<BigRational, String> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(
            n.as_i64().expect("checked").into(),
        )),
        other => Err(format!("expected a rational such as \"3/2\", got {other}")),
    }
}

fn metric_issue(c: &mut Collector, e: MetricError) {
    match &e {
        MetricError::Ultrametric(v) | MetricError::Triangle(v) => {
            let kind = if matches!(e, MetricError::Ultrametric(_)) {
                "strong triangle inequality"
            } else {
                "triangle inequality"
            };
            for t in v {
                c.push(
                    "metric",
                    format!("{kind} fails for ({}, {}, {})", t.x, t.y, t.z),
                );
            }
        }
        _ => c.push("metric", e.to_string()),
    }
}

/// Reads an instance from JSON text.
pub fn parse_instance_str(text: &str) -> Result<Instance, InstanceError> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        InstanceError::one(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    parse_instance(&root)
}

pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InstanceError::one(path.display().to_string(), e.to_string()))?;
    parse_instance_str(&text)
}

/// Reads an instance from a parsed JSON document, collecting every problem.
pub fn parse_instance(root: &Value) -> Result<Instance, InstanceError> {
    let mut c = Collector { issues: Vec::new() };
    let Some(obj) = root.as_object() else {
        return Err(InstanceError::one("$", "instance must be a JSON object"));
    };
    for key in obj.keys() {
        if !["field", "points", "metric", "vector", "options"].contains(&key.as_str()) {
            c.push(key.clone(), "unknown key");
        }
    }

    let field = match obj.get("field") {
        None => {
            c.push("field", "missing");
            None
        }
        Some(v) => match serde_json::from_value::<FieldSpec>(v.clone()) {
            Ok(f) => Some(f),
            Err(e) => {
                c.push("field", e.to_string());
                None
            }
        },
    };

    let mut points: Vec<String> = Vec::new();
    match obj.get("points").and_then(Value::as_array) {
        None => c.push("points", "expected an array of labels"),
        Some(arr) => {
            for (i, p) in arr.iter().enumerate() {
                match p.as_str() {
                    Some(s) if s == ZERO_LABEL => c.push(
                        format!("points[{i}]"),
                        format!("label {ZERO_LABEL} is reserved"),
                    ),
                    Some(s) => points.push(s.to_string()),
                    None => c.push(format!("points[{i}]"), "expected a string"),
                }
            }
        }
    }

    let archimedean = field.as_ref().is_some_and(|f| !f.is_non_archimedean());
    let space = match obj.get("metric").and_then(Value::as_object) {
        None => {
            c.push("metric", "expected an object with a \"type\"");
            None
        }
        Some(m) => parse_metric(&mut c, m, &points, archimedean),
    };

    let mut options = ExtensionOptions::default();
    if let Some(o) = obj.get("options") {
        match o.as_object() {
            None => c.push("options", "expected an object"),
            Some(o) => {
                for (key, v) in o {
                    match key.as_str() {
                        "basepoint" => match v.as_str() {
                            Some(b) if points.iter().any(|p| p == b) => {
                                options.basepoint = Some(b.to_string())
                            }
                            Some(b) => c.push("options.basepoint", format!("unknown point {b}")),
                            None => c.push("options.basepoint", "expected a label"),
                        },
                        "zero_distances" => match v.as_array() {
                            Some(arr) if arr.len() == points.len() => {
                                let mut row = Vec::with_capacity(arr.len());
                                for (i, x) in arr.iter().enumerate() {
                                    match rational_value(x) {
                                        Ok(q) => row.push(q),
                                        Err(e) => c.push(format!("options.zero_distances[{i}]"), e),
                                    }
                                }
                                options.zero_distances = Some(row);
                            }
                            _ => c.push(
                                "options.zero_distances",
                                format!("expected {} distances, one per point", points.len()),
                            ),
                        },
                        _ => c.push(format!("options.{key}"), "unknown option"),
                    }
                }
            }
        }
    }

    let mut terms: Vec<(String, Scalar)> = Vec::new();
    match obj.get("vector").and_then(Value::as_array) {
        None => c.push(
            "vector",
            "expected an array of {\"point\", \"coeff\"} entries",
        ),
        Some(arr) => {
            for (i, entry) in arr.iter().enumerate() {
                let loc = format!("vector[{i}]");
                let point = entry.get("point").and_then(Value::as_str);
                let coeff = entry.get("coeff");
                match (point, coeff) {
                    (Some(p), Some(v)) => {
                        if !points.iter().any(|q| q == p) {
                            c.push(format!("{loc}.point"), format!("unknown point {p}"));
                        }
                        if let Some(f) = &field {
                            match f.parse_scalar(v) {
                                Ok(s) => terms.push((p.to_string(), s)),
                                Err(e) => c.push(format!("{loc}.coeff"), e.to_string()),
                            }
                        }
                    }
                    _ => c.push(loc, "expected {\"point\": label, \"coeff\": scalar}"),
                }
            }
        }
    }

    if !c.issues.is_empty() {
        return Err(InstanceError { issues: c.issues });
    }
    let field = field.expect("no issues");
    let space = space.expect("no issues");
    let vector = FreeVector::normalize(&field, terms)
        .map_err(|e| InstanceError::one("vector", e.to_string()))?;
    Ok(Instance {
        field,
        space,
        vector,
        options,
    })
}

fn parse_metric(
    c: &mut Collector,
    m: &Map<String, Value>,
    points: &[String],
    archimedean: bool,
) -> Option<InstanceSpace> {
    let pseudo = m
        .get("pseudometric")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    let before = c.issues.len();
    match m.get("type").and_then(Value::as_str) {
        Some("matrix") => {
            let Some(rows) = m.get("values").and_then(Value::as_array) else {
                c.push("metric.values", "expected a square array of distances");
                return None;
            };
            let mut dist = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let Some(row) = row.as_array() else {
                    c.push(format!("metric.values[{i}]"), "expected an array");
                    continue;
                };
                let mut r = Vec::with_capacity(row.len());
                for (j, x) in row.iter().enumerate() {
                    match rational_value(x) {
                        Ok(q) => r.push(q),
                        Err(e) => c.push(format!("metric.values[{i}][{j}]"), e),
                    }
                }
                dist.push(r);
            }
            if c.issues.len() > before {
                return None;
            }
            let res = if archimedean {
                validate_metric(points.to_vec(), dist, pseudo).map(InstanceSpace::Metric)
            } else {
                validate_ultrametric(points.to_vec(), dist, pseudo).map(InstanceSpace::Ultra)
            };
            res.map_err(|e| metric_issue(c, e)).ok()
        }
        Some("dendrogram") => {
            let Some(merges) = m.get("merges").and_then(Value::as_array) else {
                c.push(
                    "metric.merges",
                    "expected an array of {\"height\", \"members\"}",
                );
                return None;
            };
            let mut parsed = Vec::with_capacity(merges.len());
            for (i, mg) in merges.iter().enumerate() {
                let loc = format!("metric.merges[{i}]");
                let h = mg.get("height").map(rational_value);
                let members: Option<Vec<String>> =
                    mg.get("members").and_then(Value::as_array).map(|a| {
                        a.iter()
                            .filter_map(|v| v.as_str().map(String::from))
                            .collect()
                    });
                match (h, members) {
                    (Some(Ok(h)), Some(ms)) => parsed.push((h, ms)),
                    (Some(Err(e)), _) => c.push(format!("{loc}.height"), e),
                    _ => c.push(
                        loc,
                        "expected {\"height\": \"num/den\", \"members\": [labels]}",
                    ),
                }
            }
            if c.issues.len() > before {
                return None;
            }
            match UltraSpace::from_merges(points.to_vec(), &parsed, pseudo) {
                Ok(s) if archimedean => Some(InstanceSpace::Metric(MetricSpace::from(&s))),
                Ok(s) => Some(InstanceSpace::Ultra(s)),
                Err(e) => {
                    metric_issue(c, e);
                    None
                }
            }
        }
        _ => {
            c.push("metric.type", "expected \"matrix\" or \"dendrogram\"");
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricForm {
    Matrix,
    Dendrogram,
}

/// Writes an ultrametric instance back to JSON.
pub fn instance_to_json(
    field: &FieldSpec,
    space: &UltraSpace,
    u: &FreeVector,
    options: &ExtensionOptions,
    form: MetricForm,
) -> Value {
    let metric = match form {
        MetricForm::Matrix => json!({
            "type": "matrix",
            "values": space
                .matrix()
                .iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        MetricForm::Dendrogram => {
            let d = build_dendrogram(space);
            let merges: Vec<Value> = d
                .internal_nodes()
                .map(|k| {
                    let node = d.node(k);
                    json!({
                        "height": format_rational(&node.height),
                        "members": node.leaves.iter().map(|&i| space.points()[i].clone()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({"type": "dendrogram", "merges": merges})
        }
    };
    let mut metric = metric;
    if space.pseudometric_allowed() {
        metric["pseudometric"] = Value::Bool(true);
    }
    let mut out = json!({
        "field": serde_json::to_value(field).expect("field specs serialize"),
        "points": space.points(),
        "metric": metric,
        "vector": u
            .terms()
            .iter()
            .map(|(p, c)| json!({"point": p, "coeff": c.to_json()}))
            .collect::<Vec<_>>(),
    });
    let mut opts = Map::new();
    if let Some(b) = &options.basepoint {
        opts.insert("basepoint".into(), Value::String(b.clone()));
    }
    if let Some(z) = &options.zero_distances {
        opts.insert(
            "zero_distances".into(),
            z.iter().map(format_rational).collect::<Vec<_>>().into(),
        );
    }
    if !opts.is_empty() {
        out["options"] = Value::Object(opts);
    }
    out
}

fn cost_value(c: &Cost) -> Value {
    serde_json::to_value(c.to_json()).expect("costs serialize")
}

pub fn certificate_to_json(cert: &NormCertificate) -> Value {
    let extension = cert.extension.as_ref().map(|e| {
        json!({
            "basepoint": e.basepoint,
            "explicit": e.explicit,
            "zero_distances": e
                .zero_distances
                .iter()
                .map(|(p, d)| json!({"point": p, "distance": format_rational(d)}))
                .collect::<Vec<_>>(),
            "warning": e.warning,
        })
    });
    json!({
        "field": serde_json::to_value(&cert.field).expect("field specs serialize"),
        "value": cost_value(&cert.value),
        "witness": cert
            .witness
            .iter()
            .map(|w| json!({"from": w.from, "to": w.to, "coeff": w.coeff.to_json(), "cost": cost_value(&w.cost)}))
            .collect::<Vec<_>>(),
        "cuts": cert
            .cuts
            .iter()
            .map(|k| json!({
                "cluster": k.cluster,
                "sum": k.sum.to_json(),
                "sep": format_rational(&k.sep),
                "bound": cost_value(&k.bound),
            }))
            .collect::<Vec<_>>(),
        "argmax": cert.argmax,
        "support": cert.support,
        "extension": extension,
        "pointed": cert.pointed,
        "notes": cert.notes,
    })
}

fn field_at<'a>(v: &'a Value, key: &str, loc: &str) -> Result<&'a Value, InstanceError> {
    v.get(key)
        .ok_or_else(|| InstanceError::one(format!("{loc}.{key}"), "missing"))
}

fn cost_at(v: &Value, loc: &str) -> Result<Cost, InstanceError> {
    let j: CostJson =
        serde_json::from_value(v.clone()).map_err(|e| InstanceError::one(loc, e.to_string()))?;
    Cost::from_json(&j).map_err(|e| InstanceError::one(loc, e.to_string()))
}

fn string_at(v: &Value, loc: &str) -> Result<String, InstanceError> {
    v.as_str()
        .map(String::from)
        .ok_or_else(|| InstanceError::one(loc, "expected a string"))
}

fn strings_at(v: &Value, loc: &str) -> Result<Vec<String>, InstanceError> {
    v.as_array()
        .ok_or_else(|| InstanceError::one(loc, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| string_at(x, &format!("{loc}[{i}]")))
        .collect()
}

fn rational_at(v: &Value, loc: &str) -> Result<BigRational, InstanceError> {
    rational_value(v).map_err(|e| InstanceError::one(loc, e))
}

/// Reads a certificate written by [`certificate_to_json`].
pub fn certificate_from_json(v: &Value) -> Result<NormCertificate, InstanceError> {
    let field: FieldSpec = serde_json::from_value(field_at(v, "field", "$")?.clone())
        .map_err(|e| InstanceError::one("field", e.to_string()))?;
    let scalar = |x: &Value, loc: &str| {
        field
            .parse_scalar(x)
            .map_err(|e| InstanceError::one(loc, e.to_string()))
    };
    let value = cost_at(field_at(v, "value", "$")?, "value")?;
    let mut witness = Vec::new();
    for (i, w) in field_at(v, "witness", "$")?
        .as_array()
        .into_iter()
        .flatten()
        .enumerate()
    {
        let loc = format!("witness[{i}]");
        witness.push(PlanEntry {
            from: string_at(field_at(w, "from", &loc)?, &format!("{loc}.from"))?,
            to: string_at(field_at(w, "to", &loc)?, &format!("{loc}.to"))?,
            coeff: scalar(field_at(w, "coeff", &loc)?, &format!("{loc}.coeff"))?,
            cost: cost_at(field_at(w, "cost", &loc)?, &format!("{loc}.cost"))?,
        });
    }
    let mut cuts = Vec::new();
    for (i, k) in field_at(v, "cuts", "$")?
        .as_array()
        .into_iter()
        .flatten()
        .enumerate()
    {
        let loc = format!("cuts[{i}]");
        cuts.push(CutBound {
            cluster: strings_at(field_at(k, "cluster", &loc)?, &format!("{loc}.cluster"))?,
            sum: scalar(field_at(k, "sum", &loc)?, &format!("{loc}.sum"))?,
            sep: rational_at(field_at(k, "sep", &loc)?, &format!("{loc}.sep"))?,
            bound: cost_at(field_at(k, "bound", &loc)?, &format!("{loc}.bound"))?,
        });
    }
    let argmax = match v.get("argmax") {
        None | Some(Value::Null) => None,
        Some(x) => Some(
            x.as_u64()
                .ok_or_else(|| InstanceError::one("argmax", "expected an index"))?
                as usize,
        ),
    };
    let support = strings_at(field_at(v, "support", "$")?, "support")?;
    let extension = match v.get("extension") {
        None | Some(Value::Null) => None,
        Some(e) => {
            let mut zd = Vec::new();
            for (i, z) in field_at(e, "zero_distances", "extension")?
                .as_array()
                .into_iter()
                .flatten()
                .enumerate()
            {
                let loc = format!("extension.zero_distances[{i}]");
                zd.push((
                    string_at(field_at(z, "point", &loc)?, &loc)?,
                    rational_at(field_at(z, "distance", &loc)?, &loc)?,
                ));
            }
            Some(Extension {
                basepoint: e.get("basepoint").and_then(Value::as_str).map(String::from),
                explicit: e.get("explicit").and_then(Value::as_bool).unwrap_or(false),
                zero_distances: zd,
                warning: e.get("warning").and_then(Value::as_str).map(String::from),
            })
        }
    };
    let notes = match v.get("notes") {
        None => Vec::new(),
        Some(n) => strings_at(n, "notes")?,
    };
    Ok(NormCertificate {
        field,
        value,
        witness,
        cuts,
        argmax,
        support,
        extension,
        pointed: v.get("pointed").and_then(Value::as_bool).unwrap_or(false),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::na::{na_norm, verify_certificate};

    const EQUILATERAL: &str = r#"{
        "field": {"kind": "p-adic", "p": 2},
        "points": ["a", "b", "c"],
        "metric": {"type": "matrix", "values": [["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]]},
        "vector": [{"point": "a", "coeff": "2"}, {"point": "b", "coeff": "-1"}, {"point": "c", "coeff": "-1"}]
    }"#;

    #[test]
    fn parses_and_round_trips_certificate() {
        let inst = parse_instance_str(EQUILATERAL).unwrap();
        let space = inst.ultra().unwrap();
        let cert = na_norm(space, &inst.vector, &inst.field, &inst.options).unwrap();
        let back = certificate_from_json(&certificate_to_json(&cert)).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&back, space, &inst.vector, &inst.options).passed());
    }

    #[test]
    fn names_violating_triple() {
        let bad = EQUILATERAL.replace(
            r#"["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]"#,
            r#"["0", "1", "3"], ["1", "0", "1"], ["3", "1", "0"]"#,
        );
        let err = parse_instance_str(&bad).unwrap_err();
        assert!(err.to_string().contains("(a, b, c)"), "{err}");
    }

    #[test]
    fn real_instance_checks_plain_triangle() {
        let bad = EQUILATERAL
            .replace(r#""kind": "p-adic", "p": 2"#, r#""kind": "real""#)
            .replace(
                r#"["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]"#,
                r#"["0", "1", "3"], ["1", "0", "1"], ["3", "1", "0"]"#,
            );
        let err = parse_instance_str(&bad).unwrap_err();
        assert!(
            err.to_string().contains("triangle inequality fails"),
            "{err}"
        );
    }

    #[test]
    fn collects_several_issues() {
        let text = r#"{"field": {"kind": "p-adic", "p": 4}, "points": ["a", "0̄"], "metric": {"type": "tree"}, "vector": []}"#;
        let err = parse_instance_str(text).unwrap_err();
        assert!(err.issues.len() >= 3, "{err}");
        let err = parse_instance_str("{ nope").unwrap_err();
        assert!(err.issues[0].location.starts_with("line 1"));
    }

    #[test]
    fn dendrogram_form_round_trips() {
        let inst = parse_instance_str(EQUILATERAL).unwrap();
        let space = inst.ultra().unwrap();
        let v = instance_to_json(
            &inst.field,
            space,
            &inst.vector,
            &inst.options,
            MetricForm::Dendrogram,
        );
        let again = parse_instance(&v).unwrap();
        assert_eq!(again.ultra().unwrap().matrix(), space.matrix());
        assert_eq!(again.vector, inst.vector);
    }
}
