//! Reports: one record per check, a digest of the inputs and timings.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant digits kept for floats in reports, so that reports compare
/// byte for byte across machines.
const DIGITS: usize = 10;
/// Magnitudes below this are printed as zero.
const FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub certificate: Value,
    pub tolerance: f64,
    pub deviation: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, certificate: impl Serialize, tolerance: f64, deviation: f64) -> Self {
        Check {
            name: name.into(),
            pass,
            certificate: serde_json::to_value(certificate).expect("certificates serialize"),
            tolerance,
            deviation,
        }
    }

    /// `deviation ≤ tolerance`.
    pub fn bound(name: impl Into<String>, certificate: impl Serialize, tolerance: f64, deviation: f64) -> Self {
        Self::new(name, deviation <= tolerance, certificate, tolerance, deviation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub tolerance: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub timings: Timings,
}

impl Report {
    pub fn new(command: &str, inputs: &Value, seed: u64, tolerance: f64, checks: Vec<Check>, total_ms: f64) -> Self {
        Report {
            command: command.to_string(),
            inputs_digest: digest(inputs),
            seed,
            tolerance,
            pass: checks.iter().all(|c| c.pass),
            checks,
            timings: Timings { total_ms },
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let v = canonical(serde_json::to_value(self).expect("reports serialize"));
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} {}  digest {}  seed {}  tol {}\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.command,
            &self.inputs_digest[..16],
            self.seed,
            format_float(self.tolerance)
        );
        for c in &self.checks {
            s.push_str(&format!(
                "  [{}] {:<40} deviation {:<12} tolerance {}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                format_float(c.deviation),
                format_float(c.tolerance)
            ));
        }
        s
    }
}

/// SHA-256 of the compact JSON form of the inputs, hex encoded.
pub fn digest(inputs: &Value) -> String {
    let bytes = serde_json::to_vec(&canonical(inputs.clone())).expect("values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn round(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    if x.abs() < FLOOR {
        return 0.0;
    }
    format!("{:.*e}", DIGITS - 1, x).parse().expect("round trip")
}

fn format_float(x: f64) -> String {
    format!("{:.3e}", round(x))
}

/// Rounds every float to [`DIGITS`] significant digits and flushes values
/// below [`FLOOR`] to zero. Non-finite values become strings.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map_or(Value::String(x.to_string()), Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_stable() {
        assert_eq!(round(0.1 + 0.2), 0.3);
        assert_eq!(round(-3e-17), 0.0);
        assert_eq!(round(2.0), 2.0);
        assert_eq!(round(1.23456789012345e-5), 1.234567890e-5);
    }

    #[test]
    fn digest_is_order_sensitive_and_stable() {
        let a = serde_json::json!({"x": [1, 2]});
        let b = serde_json::json!({"x": [2, 1]});
        assert_eq!(digest(&a), digest(&a.clone()));
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn exit_code_follows_checks() {
        let ok = Report::new("t", &Value::Null, 0, 1e-9, vec![Check::bound("a", (), 1e-9, 0.0)], 0.0);
        assert_eq!(ok.exit_code(), 0);
        let bad = Report::new("t", &Value::Null, 0, 1e-9, vec![Check::bound("a", (), 1e-9, 1.0)], 0.0);
        assert_eq!(bad.exit_code(), 1);
    }
}
