//! JSON model files.
//!
//! ```json
//! {
//!   "format_version": "1.0",
//!   "observables": [{"id": "A", "outcomes": ["+1", "-1"], "values": [1, -1]}, ...],
//!   "contexts": [["A", "B"], ...],
//!   "tables": {"A,B": {"+1|+1": "1/2", "+1|-1": "0", ...}, ...}
//! }
//! ```
//!
//! Table keys are a context's members joined by `,`; entry keys are outcome
//! labels joined by `|` in member order. A model whose entries are all
//! strings (`"p/q"`, integers or plain decimals) is read exactly; any JSON
//! number entry makes the whole model float-backed.

use serde_json::{json, Map, Value};

use crate::error::FormatError;
use crate::numeric::{format_rational, parse_rational, Rational};
use crate::scenario::{Context, EmpiricalModel, MeasurementScenario, Observable, Tables, Violation};

pub const FORMAT_VERSION: &str = "1.0";

fn field(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        path: path.into(),
        message: message.into(),
    }
}

/// Checks a `format_version` string; only the major component matters.
pub fn check_version(v: &str) -> Result<(), FormatError> {
    let major = v.split('.').next().unwrap_or_default();
    if major == "1" {
        Ok(())
    } else {
        Err(FormatError::Version(v.to_string()))
    }
}

fn read_version(doc: &Map<String, Value>) -> Result<(), FormatError> {
    match doc.get("format_version") {
        None => Ok(()),
        Some(Value::String(s)) => check_version(s),
        Some(Value::Number(n)) => check_version(&n.to_string()),
        Some(_) => Err(field("format_version", "expected a string such as \"1.0\"")),
    }
}

fn read_number(v: &Value, path: &str) -> Result<Rational, FormatError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(field(path, "expected a number or a \"p/q\" string")),
    };
    // JSON numbers may use exponents, which the exact parser does not take.
    parse_rational(&text).or_else(|e| match v {
        Value::Number(n) => {
            let f = n.as_f64().ok_or_else(|| field(path, e.to_string()))?;
            Rational::from_float(f).ok_or_else(|| field(path, e.to_string()))
        }
        _ => Err(field(path, e.to_string())),
    })
}

fn read_strings(v: &Value, path: &str) -> Result<Vec<String>, FormatError> {
    let arr = v.as_array().ok_or_else(|| field(path, "expected an array of strings"))?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| field(format!("{path}[{i}]"), "expected a string"))
        })
        .collect()
}

fn read_observables(v: Option<&Value>) -> Result<Vec<Observable>, FormatError> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| field("observables", "missing or not an array"))?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, o) in arr.iter().enumerate() {
        let path = format!("observables[{i}]");
        let obj = o.as_object().ok_or_else(|| field(&path, "expected an object"))?;
        let id = obj
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| field(format!("{path}.id"), "missing or not a string"))?;
        let outcomes = read_strings(
            obj.get("outcomes").ok_or_else(|| field(format!("{path}.outcomes"), "missing"))?,
            &format!("{path}.outcomes"),
        )?;
        let values = match obj.get("values") {
            None | Some(Value::Null) => None,
            Some(Value::Array(vals)) => Some(
                vals.iter()
                    .enumerate()
                    .map(|(k, x)| read_number(x, &format!("{path}.values[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Some(_) => return Err(field(format!("{path}.values"), "expected an array")),
        };
        out.push(Observable {
            id: id.to_string(),
            outcomes,
            values,
        });
    }
    Ok(out)
}

fn read_contexts(v: Option<&Value>) -> Result<Vec<Context>, FormatError> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| field("contexts", "missing or not an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, c)| read_strings(c, &format!("contexts[{i}]")).map(|members| Context { members }))
        .collect()
}

pub fn context_key(ctx: &Context) -> String {
    ctx.members.join(",")
}

/// Parses a model document; missing entries are reported together.
pub fn parse_model(text: &str) -> Result<EmpiricalModel, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let doc = doc.as_object().ok_or_else(|| field("$", "expected a JSON object"))?;
    read_version(doc)?;
    let scenario = MeasurementScenario::new(read_observables(doc.get("observables"))?, read_contexts(doc.get("contexts"))?)?;
    let tables = doc
        .get("tables")
        .and_then(Value::as_object)
        .ok_or_else(|| field("tables", "missing or not an object"))?;

    let keys: Vec<String> = scenario.contexts().iter().map(context_key).collect();
    for k in tables.keys() {
        if !keys.contains(k) {
            return Err(field(format!("tables.{k}"), "does not name a context"));
        }
    }
    let mut exact = true;
    let mut raw: Vec<Vec<Option<&Value>>> = Vec::with_capacity(keys.len());
    let mut missing = Vec::new();
    for (ci, key) in keys.iter().enumerate() {
        let path = format!("tables.{key}");
        let table = tables
            .get(key)
            .ok_or_else(|| field(&path, "missing table for context"))?
            .as_object()
            .ok_or_else(|| field(&path, "expected an object"))?;
        let labels: Vec<String> = (0..scenario.table_len(ci))
            .map(|flat| scenario.tuple_labels(ci, flat).join("|"))
            .collect();
        for k in table.keys() {
            if !labels.contains(k) {
                return Err(field(format!("{path}.{k}"), "not an outcome tuple of this context"));
            }
        }
        let mut row = Vec::with_capacity(labels.len());
        for label in &labels {
            let entry = table.get(label);
            match entry {
                None => missing.push(Violation::MissingEntry {
                    context: scenario.context_label(ci),
                    tuple: label.clone(),
                }),
                Some(Value::Number(_)) => exact = false,
                Some(Value::String(_)) => {}
                Some(_) => return Err(field(format!("{path}.{label}"), "expected a number or a \"p/q\" string")),
            }
            row.push(entry);
        }
        raw.push(row);
    }
    if !missing.is_empty() {
        return Err(FormatError::Incomplete(missing));
    }

    let mut values: Vec<Vec<Rational>> = Vec::with_capacity(raw.len());
    let mut floats: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for (ci, row) in raw.iter().enumerate() {
        let mut vr = Vec::new();
        let mut fr = Vec::new();
        for (flat, entry) in row.iter().enumerate() {
            let v = entry.expect("missing entries handled above");
            let path = format!("tables.{}.{}", keys[ci], scenario.tuple_labels(ci, flat).join("|"));
            if exact {
                vr.push(read_number(v, &path)?);
            } else {
                fr.push(match v {
                    Value::Number(n) => n.as_f64().ok_or_else(|| field(&path, "number out of range"))?,
                    _ => crate::numeric::Scalar::to_f64(&read_number(v, &path)?),
                });
            }
        }
        values.push(vr);
        floats.push(fr);
    }
    let model = if exact {
        EmpiricalModel::new(scenario, values)?
    } else {
        EmpiricalModel::new(scenario, floats)?
    };
    Ok(model)
}

fn number_json(q: &Rational) -> Value {
    if q.is_integer() {
        if let Ok(i) = i64::try_from(q.to_integer()) {
            return json!(i);
        }
    }
    json!(format_rational(q))
}

/// The model as a JSON document in scenario order.
pub fn model_to_json(model: &EmpiricalModel) -> Value {
    let scenario = model.scenario();
    let observables: Vec<Value> = scenario
        .observables()
        .iter()
        .map(|o| {
            let mut obj = Map::new();
            obj.insert("id".into(), json!(o.id));
            obj.insert("outcomes".into(), json!(o.outcomes));
            if let Some(values) = &o.values {
                obj.insert("values".into(), Value::Array(values.iter().map(number_json).collect()));
            }
            Value::Object(obj)
        })
        .collect();
    let contexts: Vec<Value> = scenario.contexts().iter().map(|c| json!(c.members)).collect();
    let mut tables = Map::new();
    for (ci, ctx) in scenario.contexts().iter().enumerate() {
        let mut row = Map::new();
        for flat in 0..scenario.table_len(ci) {
            let key = scenario.tuple_labels(ci, flat).join("|");
            let v = match model.tables() {
                Tables::Exact(t) => json!(format_rational(&t[ci][flat])),
                Tables::Float(t) => json!(t[ci][flat]),
            };
            row.insert(key, v);
        }
        tables.insert(context_key(ctx), Value::Object(row));
    }
    json!({
        "format_version": FORMAT_VERSION,
        "observables": observables,
        "contexts": contexts,
        "tables": tables,
    })
}

pub fn write_model(model: &EmpiricalModel) -> String {
    let mut s = serde_json::to_string_pretty(&model_to_json(model)).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Scalar;

    const PR_BOX: &str = r#"{
      "format_version": "1.0",
      "observables": [
        {"id": "A", "outcomes": ["+1", "-1"], "values": [1, -1]},
        {"id": "A'", "outcomes": ["+1", "-1"], "values": [1, -1]},
        {"id": "B", "outcomes": ["+1", "-1"], "values": [1, -1]},
        {"id": "B'", "outcomes": ["+1", "-1"], "values": [1, -1]}
      ],
      "contexts": [["A", "B"], ["A", "B'"], ["A'", "B"], ["A'", "B'"]],
      "tables": {
        "A,B":   {"+1|+1": "1/2", "+1|-1": "0", "-1|+1": "0", "-1|-1": "1/2"},
        "A,B'":  {"+1|+1": "1/2", "+1|-1": "0", "-1|+1": "0", "-1|-1": "1/2"},
        "A',B":  {"+1|+1": "1/2", "+1|-1": "0", "-1|+1": "0", "-1|-1": "1/2"},
        "A',B'": {"+1|+1": "0", "+1|-1": "1/2", "-1|+1": "1/2", "-1|-1": "0"}
      }
    }"#;

    #[test]
    fn parses_exact_pr_box() {
        let m = parse_model(PR_BOX).unwrap();
        assert!(m.is_exact());
        assert_eq!(m.scenario(), &MeasurementScenario::chsh());
        let Tables::Exact(t) = m.tables() else { unreachable!() };
        assert_eq!(t[3][1], Rational::from_ratio(1, 2));
    }

    #[test]
    fn any_number_entry_makes_float_model() {
        let text = PR_BOX.replacen("\"1/2\"", "0.5", 1);
        let m = parse_model(&text).unwrap();
        assert!(!m.is_exact());
        let Tables::Float(t) = m.tables() else { unreachable!() };
        assert_eq!(t[0][0], 0.5);
        assert_eq!(t[0][3], 0.5);
    }

    #[test]
    fn round_trip_is_identity() {
        let m = parse_model(PR_BOX).unwrap();
        assert_eq!(parse_model(&write_model(&m)).unwrap(), m);
        let f = m.to_float();
        assert_eq!(parse_model(&write_model(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_unknown_major_version() {
        let text = PR_BOX.replace("\"1.0\"", "\"2.0\"");
        assert!(matches!(parse_model(&text), Err(FormatError::Version(v)) if v == "2.0"));
        assert!(parse_model(&PR_BOX.replace("\"1.0\"", "\"1.7\"")).is_ok());
    }

    #[test]
    fn missing_entries_are_listed() {
        let text = PR_BOX.replace(r#""+1|-1": "0", "-1|+1": "0", "-1|-1": "1/2"},
        "A,B'""#, r#""-1|-1": "1/2"},
        "A,B'""#);
        match parse_model(&text) {
            Err(FormatError::Incomplete(v)) => assert_eq!(v.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn field_diagnostics_name_the_path() {
        let text = PR_BOX.replace(r#""outcomes": ["+1", "-1"], "values": [1, -1]},
        {"id": "A'""#, r#""outcomes": "+1", "values": [1, -1]},
        {"id": "A'""#);
        let err = parse_model(&text).unwrap_err().to_string();
        assert!(err.contains("observables[0].outcomes"), "{err}");

        let err = parse_model(&PR_BOX.replace("\"A',B'\": {", "\"A',X\": {")).unwrap_err().to_string();
        assert!(err.contains("tables.A',X"), "{err}");

        let err = parse_model("{ not json").unwrap_err();
        assert!(matches!(err, FormatError::Json(_)));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn decimal_strings_stay_exact() {
        let text = PR_BOX.replace("\"1/2\"", "\"0.5\"");
        let m = parse_model(&text).unwrap();
        assert!(m.is_exact());
        let Tables::Exact(t) = m.tables() else { unreachable!() };
        assert_eq!(t[0][0].to_f64(), 0.5);
    }
}
