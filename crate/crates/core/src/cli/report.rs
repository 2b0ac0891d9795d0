use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One timed repetition of a phase, for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepTiming {
    pub rep: usize,
    pub phase: String,
    pub wall_ms: f64,
}

/// Result of one command. Everything except `wall_ms`, `reps` and
/// `peak_bytes` is reproducible from the inputs and the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub inputs: Map<String, Value>,
    #[serde(flatten)]
    pub outputs: Map<String, Value>,
    /// Median wall time per phase in milliseconds.
    pub wall_ms: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reps: Vec<RepTiming>,
    /// Peak heap bytes seen by the tracking allocator, when it is installed.
    pub peak_bytes: Option<u64>,
}

const RESERVED: [&str; 7] = ["command", "version", "seed", "inputs", "wall_ms", "reps", "peak_bytes"];

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            inputs: Map::new(),
            outputs: Map::new(),
            wall_ms: BTreeMap::new(),
            reps: Vec::new(),
            peak_bytes: None,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).expect("serializable input"));
        self
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        assert!(!RESERVED.contains(&key), "`{key}` is a report field");
        self.outputs.insert(key.to_string(), serde_json::to_value(value).expect("serializable output"));
        self
    }

    /// Records every repetition and stores the median.
    pub fn timings(&mut self, phase: &str, samples: &[f64]) -> &mut Self {
        for (rep, &ms) in samples.iter().enumerate() {
            self.reps.push(RepTiming {
                rep,
                phase: phase.to_string(),
                wall_ms: ms,
            });
        }
        self.wall_ms.insert(phase.to_string(), median(samples));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// With repetitions, one `rep,phase,wall_ms` row each; otherwise one
    /// `key,value` row per output.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.reps.is_empty() {
            out.push_str("rep,phase,wall_ms\n");
            for r in &self.reps {
                out.push_str(&format!("{},{},{}\n", r.rep, r.phase, r.wall_ms));
            }
        } else {
            out.push_str("key,value\n");
            for (k, v) in &self.outputs {
                let cell = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let quoted = if cell.contains([',', '"', '\n']) {
                    format!("\"{}\"", cell.replace('"', "\"\""))
                } else {
                    cell
                };
                out.push_str(&format!("{k},{quoted}\n"));
            }
        }
        out
    }
}

pub fn median(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    }
}

/// JSON Schema for [`RunReport`], also shipped as `schema/run_report.schema.json`.
pub const RUN_REPORT_SCHEMA: &str = include_str!("../../schema/run_report.schema.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn outputs_flatten_and_round_trip() {
        let mut r = RunReport::new("expval", 7);
        r.input("engine", "dense").output("value", 0.25).timings("run", &[1.0, 3.0]);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["value"], 0.25);
        assert_eq!(v["wall_ms"]["run"], 2.0);
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_csv().starts_with("rep,phase,wall_ms\n0,run,1\n"));
    }

    #[test]
    fn csv_quotes_structured_cells() {
        let mut r = RunReport::new("grad", 0);
        r.output("grad", vec![1.0, 2.0]);
        assert_eq!(r.to_csv(), "key,value\ngrad,\"[1.0,2.0]\"\n");
    }
}
