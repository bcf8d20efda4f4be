//! Result documents: deterministic JSON with sorted keys and every float
//! printed with 17 significant digits, or a plain-text table.

use std::io;

use serde::Serialize;
use serde_json::{json, Map, Value};

use vbquant_core::conventions::LEDGER;
use vbquant_core::numerics::ComplexMatrix;
use vbquant_core::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes floats as `d.ddddddddddddddddde±x` and everything else compactly.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // -0.0 and 0.0 print the same
        let v = if value == 0.0 { 0.0 } else { value };
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Serializes `v` with the fixed float format. Non-finite floats cannot be
/// represented in JSON and become `null`.
pub fn to_json_string(v: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    v.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    String::from_utf8(out).expect("JSON output is UTF-8")
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex(z: Complex64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn vector(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

/// Rows of `[re, im]` pairs.
pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vector(m.row(i))).collect())
}

pub fn reals(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// One verified quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value >= bound`; used for separation witnesses.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: bound,
            pass: value >= bound,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"value": num(self.value), "tolerance": num(self.tolerance), "pass": self.pass})
    }
}

pub fn checks_json(checks: &[Check]) -> Value {
    let mut m = Map::new();
    for c in checks {
        m.insert(c.name.clone(), c.to_json());
    }
    Value::Object(m)
}

pub fn ledger_json() -> Value {
    json!({
        "symplectic_sign": num(LEDGER.symplectic_sign),
        "poisson_sign": num(LEDGER.poisson_sign),
        "dirac_sign": num(LEDGER.dirac_sign),
        "monopole_holonomy_sign": num(LEDGER.monopole_holonomy_sign),
        "orbit_axis": reals(&LEDGER.orbit_axis),
    })
}

/// Everything a command emits.
#[derive(Debug, Clone)]
pub struct ResultDocument {
    pub command: String,
    pub scenario: Value,
    pub payload: Value,
    pub checks: Vec<Check>,
}

impl ResultDocument {
    pub fn new(command: impl Into<String>, scenario: Value) -> Self {
        Self {
            command: command.into(),
            scenario,
            payload: Value::Object(Map::new()),
            checks: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: Value) {
        if let Value::Object(m) = &mut self.payload {
            m.insert(key.to_string(), v);
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "version": VERSION,
            "conventions": ledger_json(),
            "scenario": self.scenario,
            "payload": self.payload,
            "checks": checks_json(&self.checks),
            "status": if self.passed() { "pass" } else { "fail" },
        })
    }

    pub fn render_json(&self) -> String {
        let mut s = to_json_string(&self.to_json());
        s.push('\n');
        s
    }

    /// Human-readable form: payload scalars and matrices, then the check table.
    pub fn render_table(&self) -> String {
        let mut out = format!("{} (vbquant {VERSION})\n", self.command);
        if let Value::Object(m) = &self.payload {
            for (k, v) in m {
                render_value(&mut out, k, v);
            }
        }
        if !self.checks.is_empty() {
            let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
            out.push_str(&format!("\n{:<width$}  {:>24}  {:>24}  result\n", "check", "value", "tolerance"));
            for c in &self.checks {
                let tag = if c.pass { "pass" } else { "FAIL" };
                out.push_str(&format!("{:<width$}  {:>24.16e}  {:>24.16e}  {tag}\n", c.name, c.value, c.tolerance));
            }
        }
        out.push_str(&format!("status: {}\n", if self.passed() { "pass" } else { "fail" }));
        out
    }
}

fn is_pair(v: &Value) -> bool {
    matches!(v, Value::Array(a) if a.len() == 2 && a.iter().all(|x| x.is_number() || x.is_null()))
}

fn fmt_pair(v: &Value) -> String {
    let f = |x: &Value| x.as_f64().unwrap_or(f64::NAN);
    let (re, im) = (f(&v[0]), f(&v[1]));
    format!("{re:+.6e}{im:+.6e}i")
}

fn render_value(out: &mut String, key: &str, v: &Value) {
    match v {
        // matrix of pairs
        Value::Array(rows) if !rows.is_empty() && rows.iter().all(|r| matches!(r, Value::Array(c) if !c.is_empty() && c.iter().all(is_pair))) => {
            out.push_str(&format!("{key}:\n"));
            for r in rows {
                let cells: Vec<String> = r.as_array().into_iter().flatten().map(fmt_pair).collect();
                out.push_str(&format!("  {}\n", cells.join("  ")));
            }
        }
        Value::Array(xs) if !xs.is_empty() && xs.iter().all(is_pair) => {
            let cells: Vec<String> = xs.iter().map(fmt_pair).collect();
            out.push_str(&format!("{key}: {}\n", cells.join("  ")));
        }
        Value::Object(m) => {
            for (k, inner) in m {
                render_value(out, &format!("{key}.{k}"), inner);
            }
        }
        Value::Number(n) if n.is_f64() => out.push_str(&format!("{key}: {:.16e}\n", n.as_f64().unwrap_or(f64::NAN))),
        other => out.push_str(&format!("{key}: {}\n", to_json_string(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(to_json_string(&json!([0.1, -0.0, 1])), "[1.0000000000000001e-1,0.0000000000000000e0,1]");
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({"b": 1, "a": {"d": 2, "c": 3}});
        assert_eq!(to_json_string(&v), r#"{"a":{"c":3,"d":2},"b":1}"#);
    }

    #[test]
    fn floats_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.5] {
            let s = to_json_string(&num(x));
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn non_finite_is_null_and_fails() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn matrices_are_nested_pairs() {
        let m = ComplexMatrix::from_diag(&[Complex64::new(0.5, 0.0), Complex64::new(0.0, -1.0)]);
        let v = matrix(&m);
        assert_eq!(v[1][1][1].as_f64(), Some(-1.0));
        assert_eq!(v[0][1][0].as_f64(), Some(0.0));
    }

    #[test]
    fn document_status_follows_checks() {
        let mut d = ResultDocument::new("gram", Value::Null);
        d.check(Check::at_most("ok", 1e-12, 1e-10));
        assert!(d.passed());
        d.check(Check::at_most("bad", 1.0, 1e-10));
        let v = d.to_json();
        assert_eq!(v["status"], "fail");
        assert_eq!(v["checks"]["bad"]["pass"], false);
        assert!(d.render_table().contains("FAIL"));
    }
}
