//! JSON files for spaces, partitions, free vectors and extension operators.
//!
//! Output is canonical: object keys sorted, no whitespace, one trailing
//! newline, and every float printed like C's `%.17g`, so loading a file and
//! saving it again reproduces the same bytes.

use std::fs;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::free_norm::FreeVector;
use crate::lip_ops::LinearExtensionOperator;
use crate::metric::{MetricSource, Point, PointedMetricSpace};
use crate::quotient::Partition;

/// `%.17g`: 17 significant digits, trailing zeros removed, exponent form
/// below `1e-4` and from `1e17` on.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Canonical compact serialization of a JSON value.
pub fn to_canonical(value: &Value) -> String {
    let mut out = String::new();
    emit(value, &mut out);
    out.push('\n');
    out
}

fn emit(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_g17(n.as_f64().expect("float")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                emit(v, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                emit(&map[k], out);
            }
            out.push('}');
        }
    }
}

fn float(x: f64) -> Value {
    Value::Number(Number::from_f64(x).expect("finite float"))
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}

fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<String, Value>>())
}

fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("line {} column {}: {e}", e.line(), e.column())))
}

fn field<'a>(v: &'a Value, key: &str, at: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Format(format!("{at}: missing field \"{key}\"")))
}

fn as_f64(v: &Value, at: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Format(format!("{at}: expected a finite number, found {v}"))),
    }
}

fn as_usize(v: &Value, at: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Format(format!("{at}: expected a non-negative integer, found {v}")))
}

fn as_str<'a>(v: &'a Value, at: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Format(format!("{at}: expected a string, found {v}")))
}

fn as_array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Format(format!("{at}: expected an array")))
}

fn float_row(v: &Value, at: &str) -> Result<Vec<f64>> {
    as_array(v, at)?.iter().enumerate().map(|(j, x)| as_f64(x, &format!("{at}[{j}]"))).collect()
}

pub fn space_to_json(space: &PointedMetricSpace) -> String {
    let points = space
        .points()
        .iter()
        .map(|p| {
            let mut fields = vec![("id", Value::String(p.id.clone()))];
            if let Some(c) = &p.coords {
                fields.push(("coords", floats(c)));
            }
            object(fields)
        })
        .collect();
    let metric = match space.source() {
        MetricSource::Matrix => {
            object(vec![("kind", "matrix".into()), ("matrix", Value::Array(space.to_rows().iter().map(|r| floats(r)).collect()))])
        }
        MetricSource::Lp { p } => {
            let p = if p.is_infinite() { Value::String("inf".into()) } else { float(*p) };
            object(vec![("kind", "lp".into()), ("p", p)])
        }
        MetricSource::Graph { edges } => {
            let edges = edges.iter().map(|&(u, v, w)| Value::Array(vec![u.into(), v.into(), float(w)])).collect();
            object(vec![("kind", "graph".into()), ("edges", Value::Array(edges))])
        }
    };
    to_canonical(&object(vec![
        ("name", Value::String(space.name().to_string())),
        ("base", space.base().into()),
        ("points", Value::Array(points)),
        ("metric", metric),
    ]))
}

pub fn space_from_json(text: &str) -> Result<PointedMetricSpace> {
    let doc = parse(text)?;
    let name = as_str(field(&doc, "name", "space")?, "name")?.to_string();
    let base = as_usize(field(&doc, "base", "space")?, "base")?;
    let mut points = Vec::new();
    for (i, p) in as_array(field(&doc, "points", "space")?, "points")?.iter().enumerate() {
        let at = format!("points[{i}]");
        let id = as_str(field(p, "id", &at)?, &format!("{at}.id"))?.to_string();
        let coords = match p.get("coords") {
            None => None,
            Some(c) => Some(float_row(c, &format!("{at}.coords"))?),
        };
        points.push(Point { id, coords });
    }
    let metric = field(&doc, "metric", "space")?;
    let kind = as_str(field(metric, "kind", "metric")?, "metric.kind")?;
    let mut space = match kind {
        "matrix" => {
            let rows = as_array(field(metric, "matrix", "metric")?, "metric.matrix")?
                .iter()
                .enumerate()
                .map(|(i, r)| float_row(r, &format!("metric.matrix[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            PointedMetricSpace::from_matrix(points, &rows, base)?
        }
        "lp" => {
            let p = match field(metric, "p", "metric")? {
                Value::String(s) if s == "inf" => f64::INFINITY,
                v => as_f64(v, "metric.p")?,
            };
            PointedMetricSpace::from_points_lp(points, p, base)?
        }
        "graph" => {
            let mut edges = Vec::new();
            for (i, e) in as_array(field(metric, "edges", "metric")?, "metric.edges")?.iter().enumerate() {
                let at = format!("metric.edges[{i}]");
                let e = as_array(e, &at)?;
                if e.len() != 3 {
                    return Err(Error::Format(format!("{at}: expected [u, v, weight]")));
                }
                edges.push((as_usize(&e[0], &at)?, as_usize(&e[1], &at)?, as_f64(&e[2], &at)?));
            }
            PointedMetricSpace::from_graph_with_points(points, &edges, base)?
        }
        other => return Err(Error::Format(format!("metric.kind: unknown kind \"{other}\""))),
    };
    space.set_name(name);
    Ok(space)
}

pub fn partition_to_json(partition: &Partition) -> String {
    let classes = partition.classes().iter().map(|c| Value::Array(c.iter().map(|&x| x.into()).collect())).collect();
    to_canonical(&object(vec![("classes", Value::Array(classes))]))
}

/// Reads a partition of `n` points.
pub fn partition_from_json(text: &str, n: usize) -> Result<Partition> {
    let doc = parse(text)?;
    let mut classes = Vec::new();
    for (i, c) in as_array(field(&doc, "classes", "partition")?, "classes")?.iter().enumerate() {
        let at = format!("classes[{i}]");
        classes.push(as_array(c, &at)?.iter().map(|x| as_usize(x, &at)).collect::<Result<Vec<_>>>()?);
    }
    Partition::from_classes(n, classes)
}

pub fn freevector_to_json(mu: &FreeVector, space: &PointedMetricSpace) -> String {
    let coeffs: Map<String, Value> = mu.iter().map(|(x, c)| (space.points()[x].id.clone(), float(c))).collect();
    to_canonical(&object(vec![("coeffs", Value::Object(coeffs))]))
}

pub fn freevector_from_json(text: &str, space: &PointedMetricSpace) -> Result<FreeVector> {
    let doc = parse(text)?;
    let coeffs = field(&doc, "coeffs", "freevector")?
        .as_object()
        .ok_or_else(|| Error::Format("coeffs: expected an object".into()))?;
    let mut mu = FreeVector::new();
    for (id, c) in coeffs {
        let x = space.index_of(id).ok_or_else(|| Error::Format(format!("coeffs.{id}: unknown point id")))?;
        mu.add_at(x, as_f64(c, &format!("coeffs.{id}"))?);
    }
    Ok(mu)
}

/// Function values keyed by point id: `{"values": {"id": v, ...}}`.
pub fn values_to_json(values: &[(usize, f64)], space: &PointedMetricSpace) -> String {
    let map: Map<String, Value> = values.iter().map(|&(x, v)| (space.points()[x].id.clone(), float(v))).collect();
    to_canonical(&object(vec![("values", Value::Object(map))]))
}

/// Reads function values; the result is sorted by point index.
pub fn values_from_json(text: &str, space: &PointedMetricSpace) -> Result<Vec<(usize, f64)>> {
    let doc = parse(text)?;
    let map = field(&doc, "values", "function")?
        .as_object()
        .ok_or_else(|| Error::Format("values: expected an object".into()))?;
    let mut out = Vec::with_capacity(map.len());
    for (id, v) in map {
        let x = space.index_of(id).ok_or_else(|| Error::Format(format!("values.{id}: unknown point id")))?;
        out.push((x, as_f64(v, &format!("values.{id}"))?));
    }
    out.sort_by_key(|p| p.0);
    Ok(out)
}

pub fn operator_to_json(e: &LinearExtensionOperator) -> String {
    let ids = e.subset().iter().map(|&x| Value::String(e.space().points()[x].id.clone())).collect();
    let weights = e.weights().iter().map(|r| floats(r)).collect();
    to_canonical(&object(vec![("F", Value::Array(ids)), ("weights", Value::Array(weights))]))
}

/// Reads an operator on `space`. The columns of `weights` follow the order of
/// `"F"`; they are reordered to the sorted subset.
pub fn operator_from_json(text: &str, space: &PointedMetricSpace) -> Result<LinearExtensionOperator> {
    let doc = parse(text)?;
    let mut subset = Vec::new();
    for (i, id) in as_array(field(&doc, "F", "operator")?, "F")?.iter().enumerate() {
        let id = as_str(id, &format!("F[{i}]"))?;
        subset.push(space.index_of(id).ok_or_else(|| Error::Format(format!("F[{i}]: unknown point id {id}")))?);
    }
    let rows = as_array(field(&doc, "weights", "operator")?, "weights")?
        .iter()
        .enumerate()
        .map(|(i, r)| float_row(r, &format!("weights[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..subset.len()).collect();
    order.sort_by_key(|&k| subset[k]);
    if order.windows(2).any(|w| subset[w[0]] == subset[w[1]]) {
        return Err(Error::Format("F: repeated point".into()));
    }
    let sorted: Vec<usize> = order.iter().map(|&k| subset[k]).collect();
    let weights = rows
        .iter()
        .map(|r| {
            if r.len() != subset.len() {
                Err(Error::DimensionMismatch { expected: subset.len(), got: r.len() })
            } else {
                Ok(order.iter().map(|&k| r[k]).collect())
            }
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    LinearExtensionOperator::new(space.clone(), &sorted, weights)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn load_space(path: &Path) -> Result<PointedMetricSpace> {
    space_from_json(&read(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn save_space(path: &Path, space: &PointedMetricSpace) -> Result<()> {
    write_file(path, &space_to_json(space))
}

pub fn load_partition(path: &Path, n: usize) -> Result<Partition> {
    partition_from_json(&read(path)?, n)
}

pub fn load_freevector(path: &Path, space: &PointedMetricSpace) -> Result<FreeVector> {
    freevector_from_json(&read(path)?, space)
}

pub fn load_values(path: &Path, space: &PointedMetricSpace) -> Result<Vec<(usize, f64)>> {
    values_from_json(&read(path)?, space)
}

pub fn load_operator(path: &Path, space: &PointedMetricSpace) -> Result<LinearExtensionOperator> {
    operator_from_json(&read(path)?, space)
}
