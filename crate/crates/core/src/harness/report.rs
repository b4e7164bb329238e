//! Report rows, summaries and their JSON / CSV persistence.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub notes: String,
}

impl Row {
    pub fn new(trial: usize, lhs: f64, rhs: f64, notes: impl Into<String>) -> Self {
        Self {
            trial,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            notes: notes.into(),
        }
    }
}

/// `lhs / rhs` with `0/0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub max_ratio: f64,
    #[serde(rename = "empirical_C")]
    pub empirical_c: f64,
    pub characteristics: BTreeMap<String, Value>,
    /// Named pass/fail flags; the run passes when all are true.
    pub acceptance: BTreeMap<String, bool>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config_digest: String,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn characteristic(&self, key: &str) -> Option<&Value> {
        self.summary.characteristics.get(key)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `report.json` and `rows.csv` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("rows.csv"), self.to_csv()?)?;
        Ok(())
    }
}

/// Accumulates characteristics and acceptance flags for a [`Summary`].
#[derive(Debug, Default)]
pub struct SummaryBuilder {
    characteristics: BTreeMap<String, Value>,
    acceptance: BTreeMap<String, bool>,
}

impl SummaryBuilder {
    pub fn set(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.characteristics.insert(key.into(), v);
        self
    }

    pub fn flag(&mut self, key: impl Into<String>, ok: bool) -> &mut Self {
        self.acceptance.insert(key.into(), ok);
        self
    }

    pub fn finish(self, max_ratio: f64, empirical_c: f64) -> Summary {
        let passed = self.acceptance.values().all(|v| *v);
        Summary {
            max_ratio,
            empirical_c,
            characteristics: self.characteristics,
            acceptance: self.acceptance,
            passed,
        }
    }
}

/// Relative change `|b - a| / |a|` (zero when both vanish).
pub fn drift(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_header() {
        let mut b = SummaryBuilder::default();
        b.flag("x", true);
        let r = Report {
            experiment: "norm".into(),
            config_digest: "d".into(),
            rows: vec![Row::new(0, 1.0, 2.0, "J=3"), Row::new(1, 0.0, 0.0, "zero")],
            summary: b.finish(0.5, 0.5),
        };
        let csv = String::from_utf8(r.to_csv().unwrap()).unwrap();
        assert_eq!(
            csv,
            "trial,lhs,rhs,ratio,notes\n0,1.0,2.0,0.5,J=3\n1,0.0,0.0,0.0,zero\n"
        );
        let json: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["experiment", "config_digest", "rows", "summary"] {
            assert!(json.get(key).is_some());
        }
        for key in ["max_ratio", "empirical_C", "characteristics"] {
            assert!(json["summary"].get(key).is_some());
        }
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift(2.0, 2.5), 0.25);
        assert_eq!(drift(0.0, 0.0), 0.0);
    }
}
