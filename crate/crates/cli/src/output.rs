//! Ordered key/value reports, printed as `key=value` lines or one JSON object.

use serde_json::{Map, Value};

pub enum Field {
    Real(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Reals(Vec<f64>),
}

// shortest round-trip digits; exponent form away from moderate magnitudes
fn real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

impl Field {
    fn text(&self) -> String {
        match self {
            Field::Real(x) => real(*x),
            Field::Int(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
            Field::Reals(v) => v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(","),
        }
    }

    fn json(&self) -> Value {
        let real = |x: f64| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        match self {
            Field::Real(x) => real(*x),
            Field::Int(n) => Value::from(*n),
            Field::Bool(b) => Value::Bool(*b),
            Field::Text(s) => Value::String(s.clone()),
            Field::Reals(v) => Value::Array(v.iter().map(|x| real(*x)).collect()),
        }
    }
}

#[derive(Default)]
pub struct Report {
    fields: Vec<(String, Field)>,
}

impl Report {
    pub fn real(&mut self, key: &str, x: f64) -> &mut Self {
        self.fields.push((key.into(), Field::Real(x)));
        self
    }

    pub fn int(&mut self, key: &str, n: u64) -> &mut Self {
        self.fields.push((key.into(), Field::Int(n)));
        self
    }

    pub fn flag(&mut self, key: &str, b: bool) -> &mut Self {
        self.fields.push((key.into(), Field::Bool(b)));
        self
    }

    pub fn text(&mut self, key: &str, s: impl Into<String>) -> &mut Self {
        self.fields.push((key.into(), Field::Text(s.into())));
        self
    }

    pub fn reals(&mut self, key: &str, v: Vec<f64>) -> &mut Self {
        self.fields.push((key.into(), Field::Reals(v)));
        self
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let map: Map<String, Value> = self.fields.iter().map(|(k, f)| (k.clone(), f.json())).collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("plain values serialize");
            s.push('\n');
            s
        } else {
            self.fields.iter().map(|(k, f)| format!("{k}={}\n", f.text())).collect()
        }
    }
}
