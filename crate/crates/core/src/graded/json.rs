//! Canonical JSON text form of series:
//! `{"n": …, "d": …, "mode": …, "terms": [[[exponents…], numerator, denominator], …]}`.

use serde_json::{json, Map, Value};

use super::matrix::MatrixSeries;
use super::multi_index::MultiIndex;
use super::scalar::{Mode, Scalar};
use super::series::GradedSeries;
use super::vector::VectorSeries;
use super::{GradedError, DEFAULT_TRUNCATION};

pub fn series_to_json<S: Scalar>(f: &GradedSeries<S>) -> Value {
    let terms: Vec<Value> = f
        .iter()
        .map(|(a, c)| {
            let (num, den) = c.encode();
            Value::Array(vec![json!(a.exps()), num, den])
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("n".into(), json!(f.nvars()));
    obj.insert("d".into(), json!(f.truncation()));
    obj.insert("mode".into(), json!(S::MODE.as_str()));
    obj.insert("terms".into(), Value::Array(terms));
    Value::Object(obj)
}

/// Parses a series; `n` and `d` may be omitted when `n_hint`/`d_hint` are supplied.
pub fn series_from_json<S: Scalar>(
    v: &Value,
    n_hint: Option<usize>,
    d_hint: Option<usize>,
) -> Result<GradedSeries<S>, GradedError> {
    let bad = |msg: String| GradedError::Parse(msg);
    let obj = v.as_object().ok_or_else(|| bad("series must be a JSON object".into()))?;
    if let Some(m) = obj.get("mode") {
        let text = m.as_str().ok_or_else(|| bad("`mode` must be a string".into()))?;
        let mode: Mode = text.parse().map_err(bad)?;
        check_mode_compatible(mode, S::MODE)?;
    }
    let terms = obj.get("terms").and_then(Value::as_array).ok_or_else(|| bad("series needs a `terms` array".into()))?;
    let mut parsed = Vec::with_capacity(terms.len());
    for (idx, t) in terms.iter().enumerate() {
        let arr = t
            .as_array()
            .filter(|a| a.len() == 3 || a.len() == 2)
            .ok_or_else(|| bad(format!("term {idx} must be [exponents, numerator, denominator]")))?;
        let exps = arr[0]
            .as_array()
            .ok_or_else(|| bad(format!("term {idx}: exponents must be an array")))?
            .iter()
            .map(|e| e.as_u64().and_then(|x| u16::try_from(x).ok()))
            .collect::<Option<Vec<u16>>>()
            .ok_or_else(|| bad(format!("term {idx}: exponents must be small nonnegative integers")))?;
        let one = json!(1);
        let den = arr.get(2).unwrap_or(&one);
        let c = S::decode(&arr[1], den).map_err(|e| bad(format!("term {idx}: {e}")))?;
        parsed.push((MultiIndex::from_slice(&exps), c));
    }
    let n = match obj.get("n") {
        Some(v) => v.as_u64().ok_or_else(|| bad("`n` must be a positive integer".into()))? as usize,
        None => n_hint
            .or_else(|| parsed.first().map(|(a, _)| a.nvars()))
            .ok_or_else(|| bad("cannot infer `n` for an empty series".into()))?,
    };
    if n == 0 {
        return Err(bad("`n` must be at least 1".into()));
    }
    let max_deg = parsed.iter().map(|(a, _)| a.degree()).max().unwrap_or(0);
    let d = match obj.get("d") {
        Some(v) => v.as_u64().ok_or_else(|| bad("`d` must be a nonnegative integer".into()))? as usize,
        None => d_hint.unwrap_or(DEFAULT_TRUNCATION).max(max_deg),
    };
    if parsed.iter().any(|(a, _)| a.nvars() != n) {
        return Err(bad(format!("exponent vectors must have length {n}")));
    }
    if max_deg > d {
        return Err(bad(format!("term of degree {max_deg} exceeds truncation {d}")));
    }
    Ok(GradedSeries::from_terms(n, d, parsed))
}

fn check_mode_compatible(source: Mode, target: Mode) -> Result<(), GradedError> {
    let ok = match target {
        Mode::Rational => source == Mode::Rational,
        Mode::Gaussian => source.is_exact(),
        Mode::Float => matches!(source, Mode::Rational | Mode::Float),
        Mode::Complex => true,
    };
    if ok {
        Ok(())
    } else {
        Err(GradedError::Parse(format!("series in mode `{source}` cannot be read as `{target}`")))
    }
}

/// A tuple as a JSON array of series objects plus its offsets.
pub fn vector_to_json<S: Scalar>(v: &VectorSeries<S>) -> Value {
    json!({
        "offsets": v.offsets(),
        "components": v.components().iter().map(series_to_json).collect::<Vec<_>>(),
    })
}

/// Accepts either a bare array of series or `{"components": [...], "offsets": [...]}`.
pub fn vector_from_json<S: Scalar>(
    v: &Value,
    n_hint: Option<usize>,
    d_hint: Option<usize>,
) -> Result<VectorSeries<S>, GradedError> {
    let (items, offsets) = match v {
        Value::Array(items) => (items.clone(), None),
        Value::Object(obj) => {
            let items = obj
                .get("components")
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| GradedError::Parse("tuple needs a `components` array".into()))?;
            let offsets = obj
                .get("offsets")
                .map(|o| {
                    o.as_array()
                        .and_then(|a| a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<Vec<_>>>())
                        .ok_or_else(|| GradedError::Parse("`offsets` must be integers".into()))
                })
                .transpose()?;
            (items, offsets)
        }
        _ => return Err(GradedError::Parse("expected an array of series".into())),
    };
    let comps = items.iter().map(|item| series_from_json::<S>(item, n_hint, d_hint)).collect::<Result<Vec<_>, _>>()?;
    let offsets = offsets.unwrap_or_else(|| vec![0; comps.len()]);
    VectorSeries::new(comps, offsets)
}

/// A square matrix as an array of rows of series objects.
pub fn matrix_to_json<S: Scalar>(m: &MatrixSeries<S>) -> Value {
    let n = m.size();
    Value::Array((0..n).map(|i| Value::Array((0..n).map(|j| series_to_json(m.get(i, j))).collect())).collect())
}

/// Accepts an array of rows or a flat row-major array of `n²` series.
pub fn matrix_from_json<S: Scalar>(
    v: &Value,
    n_hint: Option<usize>,
    d_hint: Option<usize>,
) -> Result<MatrixSeries<S>, GradedError> {
    let items = v.as_array().ok_or_else(|| GradedError::Parse("expected a matrix as an array of rows".into()))?;
    let flat: Vec<&Value> = if items.iter().all(Value::is_array) {
        items.iter().flat_map(|row| row.as_array().into_iter().flatten()).collect()
    } else {
        items.iter().collect()
    };
    let size = (flat.len() as f64).sqrt().round() as usize;
    if size * size != flat.len() || (items.iter().all(Value::is_array) && items.len() != size) {
        return Err(GradedError::Parse(format!("matrix with {} entries is not square", flat.len())));
    }
    let entries =
        flat.into_iter().map(|item| series_from_json::<S>(item, n_hint, d_hint)).collect::<Result<Vec<_>, _>>()?;
    MatrixSeries::from_entries(size, entries)
}
