//! Result records and their JSON-lines / CSV serialization.
//!
//! Floating-point numbers are written with 17 significant digits
//! (`d.dddddddddddddddde±x`), which round-trips every `f64` exactly.
//! Non-finite values become `null` in JSON and `NaN`/`inf`/`-inf` in CSV.

use std::io::Write;

use serde_json::{Map, Number, Value};

pub const SCHEMA: &str = "minami-lab/result/v1";

/// CSV header; JSON-lines records use the same keys in the same order.
pub const COLUMNS: [&str; 14] = [
    "schema",
    "experiment",
    "label",
    "seed",
    "samples",
    "mean",
    "stderr",
    "bound",
    "slack",
    "z_score",
    "verdict",
    "metrics",
    "config",
    "duration_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub experiment: String,
    pub label: String,
    pub seed: u64,
    pub samples: Option<usize>,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub z_score: Option<f64>,
    /// `"PASS"` / `"FAIL"` for records that carry a contract.
    pub verdict: Option<&'static str>,
    /// Experiment-specific fields, in insertion order.
    pub metrics: Map<String, Value>,
    pub config: Value,
    pub duration_s: f64,
}

impl Record {
    pub fn new(experiment: &str, label: impl Into<String>, seed: u64, config: Value) -> Self {
        Record {
            experiment: experiment.to_string(),
            label: label.into(),
            seed,
            samples: None,
            mean: None,
            stderr: None,
            bound: None,
            slack: None,
            z_score: None,
            verdict: None,
            metrics: Map::new(),
            config,
            duration_s: 0.0,
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.metrics.insert(key.to_string(), value.into());
        self
    }

    pub fn failed(&self) -> bool {
        self.verdict == Some("FAIL")
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), SCHEMA.into());
        m.insert("experiment".into(), self.experiment.clone().into());
        m.insert("label".into(), self.label.clone().into());
        m.insert("seed".into(), self.seed.into());
        m.insert("samples".into(), self.samples.map_or(Value::Null, Value::from));
        m.insert("mean".into(), opt_num(self.mean));
        m.insert("stderr".into(), opt_num(self.stderr));
        m.insert("bound".into(), opt_num(self.bound));
        m.insert("slack".into(), opt_num(self.slack));
        m.insert("z_score".into(), opt_num(self.z_score));
        m.insert("verdict".into(), self.verdict.map_or(Value::Null, Value::from));
        m.insert("metrics".into(), normalize(Value::Object(self.metrics.clone())));
        m.insert("config".into(), normalize(self.config.clone()));
        m.insert("duration_s".into(), num(self.duration_s));
        Value::Object(m)
    }

    fn csv_row(&self) -> Vec<String> {
        let f = |x: Option<f64>| x.map_or(String::new(), csv_num);
        vec![
            SCHEMA.to_string(),
            self.experiment.clone(),
            self.label.clone(),
            self.seed.to_string(),
            self.samples.map_or(String::new(), |s| s.to_string()),
            f(self.mean),
            f(self.stderr),
            f(self.bound),
            f(self.slack),
            f(self.z_score),
            self.verdict.unwrap_or("").to_string(),
            normalize(Value::Object(self.metrics.clone())).to_string(),
            normalize(self.config.clone()).to_string(),
            csv_num(self.duration_s),
        ]
    }
}

fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format_f64(x)
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A JSON number with 17 significant digits, or `null` if not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(format_f64(x).parse::<Number>().expect("formatted float is valid JSON"))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Rewrites every non-integer number in `value` to the 17-digit form.
pub fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.as_u64().is_none() && n.as_i64().is_none() => n.as_f64().map_or(Value::Null, num),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        v => v,
    }
}

pub fn write_json_lines<W: Write>(mut out: W, records: &[Record]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &r.to_json())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_csv<W: Write>(out: W, records: &[Record]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Record {
        let mut r = Record::new("minami", "Δ=[1, 2]", 7, serde_json::json!({"z": [0.5, 0.1], "n": 3}));
        r.samples = Some(10);
        r.mean = Some(0.1);
        r.stderr = Some(f64::NAN);
        r.verdict = Some("PASS");
        r.metric("histogram", vec![1u64, 2]);
        r
    }

    #[test]
    fn json_keys_in_fixed_order_and_round_trip_digits() {
        let line = serde_json::to_string(&sample().to_json()).unwrap();
        let keys: Vec<&str> = COLUMNS.to_vec();
        let mut last = 0;
        for k in keys {
            let pos = line.find(&format!("\"{k}\"")).unwrap();
            assert!(pos >= last, "{k} out of order in {line}");
            last = pos;
        }
        assert!(line.contains("\"mean\":1.0000000000000001e-1"), "{line}");
        assert!(line.contains("\"stderr\":null"));
        assert!(line.contains("\"n\":3"));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["mean"].as_f64(), Some(0.1));
        assert_eq!(v["config"]["z"][1].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_has_header_and_one_row_per_record() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[sample(), sample()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], COLUMNS.join(","));
        assert!(lines[1].contains("NaN"));
    }
}
