use std::time::Duration;

use hgsoliton::rational::{format_f64, format_rational};
use hgsoliton::Q;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn num(x: f64) -> Value {
    Value::String(format_f64(x))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

pub fn matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| nums(r)).collect())
}

pub fn rat(x: &Q) -> Value {
    Value::String(format_rational(x))
}

pub fn rats(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(rat).collect())
}

/// Hashes the command line and the contents of every file it references.
#[derive(Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn field(&mut self, name: &str, value: &str) {
        self.hasher.update((name.len() as u64).to_le_bytes());
        self.hasher.update(name.as_bytes());
        self.hasher.update((value.len() as u64).to_le_bytes());
        self.hasher.update(value.as_bytes());
    }

    pub fn finish(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub inputs_digest: String,
    pub results: Value,
    pub quadrature_error: Option<f64>,
    pub wall_time: Duration,
}

impl Report {
    /// Everything except `wall_time` is a function of the inputs and the version.
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "inputs_digest": self.inputs_digest,
            "results": self.results,
            "quadrature_error": self.quadrature_error.map_or(Value::Null, num),
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time": format!("{:.6}", self.wall_time.as_secs_f64()),
        })
    }
}
