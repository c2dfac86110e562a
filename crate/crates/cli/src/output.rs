use std::fmt;
use std::io::Write;

use anyhow::Result;

pub const HEADER: [&str; 5] = ["experiment", "trial", "param_json", "metric", "value"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            // 17 significant digits round-trip every f64
            Value::Float(v) => write!(f, "{v:.16e}"),
            Value::Bool(v) => write!(f, "{v}"),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// A per-trial row, or an aggregate over the whole run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trial {
    Index(usize),
    All,
}

impl fmt::Display for Trial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trial::Index(k) => write!(f, "{k}"),
            Trial::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub trial: Trial,
    pub param_json: String,
    pub metric: String,
    pub value: Value,
}

/// Collects rows for one experiment run; all rows share the experiment name.
#[derive(Debug, Default)]
pub struct Rows {
    pub params: String,
    pub rows: Vec<ResultRow>,
}

impl Rows {
    pub fn new(params: String) -> Self {
        Self { params, rows: Vec::new() }
    }

    pub fn trial(&mut self, k: usize, metric: &str, value: impl Into<Value>) {
        self.push(Trial::Index(k), self.params.clone(), metric, value.into());
    }

    pub fn all(&mut self, metric: &str, value: impl Into<Value>) {
        self.push(Trial::All, self.params.clone(), metric, value.into());
    }

    /// An aggregate row whose parameters differ from the run defaults.
    pub fn all_with(&mut self, params: String, metric: &str, value: impl Into<Value>) {
        self.push(Trial::All, params, metric, value.into());
    }

    fn push(&mut self, trial: Trial, param_json: String, metric: &str, value: Value) {
        self.rows.push(ResultRow {
            trial,
            param_json,
            metric: metric.to_owned(),
            value,
        });
    }
}

pub fn write_csv<W: Write>(experiment: &str, rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([experiment, &r.trial.to_string(), &r.param_json, &r.metric, &r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, 141.42135623730951, -2.5e-300, 6.02214076e23] {
            let s = Value::Float(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn json_params_are_quoted() {
        let mut rows = Rows::new("{\"n\":3,\"eps\":1.0}".into());
        rows.trial(0, "abs_error", 1.5);
        rows.all("count", 2usize);
        let mut buf = Vec::new();
        write_csv("demo", &rows.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "experiment,trial,param_json,metric,value");
        assert_eq!(lines[1], "demo,0,\"{\"\"n\"\":3,\"\"eps\"\":1.0}\",abs_error,1.5000000000000000e0");
        assert_eq!(lines[2], "demo,all,\"{\"\"n\"\":3,\"\"eps\"\":1.0}\",count,2");
    }
}
