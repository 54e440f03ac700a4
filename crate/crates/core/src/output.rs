//! Self-describing output files: CSV tables with `#` provenance lines and
//! JSON documents with sorted keys.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

/// What produced an output file.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub command: String,
    /// Fully resolved configuration.
    pub config: Value,
    pub version: String,
    pub manifest_hash: String,
}

impl Provenance {
    pub fn new(command: &str, config: Value, manifest_hash: String) -> Self {
        Self { command: command.into(), config, version: crate::VERSION.into(), manifest_hash }
    }
}

/// Shortest round-trip decimal; `NaN` and `inf` spelled out.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

/// Converts a serializable value into a `Value` whose objects iterate in
/// key order.
pub fn to_sorted(value: &impl Serialize) -> Result<Value> {
    Ok(sort_keys(serde_json::to_value(value)?))
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn write_csv<W: Write>(
    out: &mut W,
    provenance: &Provenance,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut text = String::new();
    writeln!(text, "# circfactor {} {}", provenance.version, provenance.command).unwrap();
    writeln!(text, "# manifest {}", provenance.manifest_hash).unwrap();
    writeln!(text, "# config {}", serde_json::to_string(&sort_keys(provenance.config.clone()))?).unwrap();
    writeln!(text, "{}", header.join(",")).unwrap();
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_number).collect();
        writeln!(text, "{}", cells.join(",")).unwrap();
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// `{"provenance": …, "result": …}`, pretty-printed with sorted keys.
pub fn write_json<W: Write>(out: &mut W, provenance: &Provenance, result: &impl Serialize) -> Result<()> {
    let doc = sort_keys(json!({"provenance": to_sorted(provenance)?, "result": to_sorted(result)?}));
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    out.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance() -> Provenance {
        Provenance::new("test", json!({"seed": 0, "n": 3}), "abc".into())
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &provenance(), &["n", "d"], vec![vec![0.0, 0.5], vec![1.0, f64::NAN]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[..3].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[2], r#"# config {"n":3,"seed":0}"#);
        assert_eq!(&lines[3..], ["n,d", "0,0.5", "1,NaN"]);
    }

    #[test]
    fn json_is_deterministic() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_json(&mut a, &provenance(), &json!({"z": 1, "a": [1.5]})).unwrap();
        write_json(&mut b, &provenance(), &json!({"z": 1, "a": [1.5]})).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.find("\"a\"").unwrap() < text.find("\"z\"").unwrap());
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1e-300, -2.5, 12345.678] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }
}
