//! Human-readable trace of one audit in a report.

use std::fmt::Write;

use anyhow::{bail, Result};
use serde_json::Value;

use crate::scenario::Report;

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(x, indent + 1, out);
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}{k}: {}", inline(x));
                    }
                }
            }
        }
        _ => {
            let _ = writeln!(out, "{pad}{}", inline(v));
        }
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Bool(b) => (if *b { "holds" } else { "FAILS" }).to_string(),
        _ => v.to_string(),
    }
}

/// Exact name first, then a unique substring match.
pub fn explain(report: &Report, name: &str) -> Result<String> {
    let exact: Vec<_> = report.audits.iter().filter(|a| a.name == name).collect();
    let hits = if exact.is_empty() { report.audits.iter().filter(|a| a.name.contains(name)).collect() } else { exact };
    let audit = match hits.as_slice() {
        [a] => *a,
        [] => bail!(
            "no audit named {name:?}; available: {}",
            report.audits.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join("; ")
        ),
        many => bail!(
            "{name:?} matches {} audits: {}",
            many.len(),
            many.iter().map(|a| a.name.as_str()).take(8).collect::<Vec<_>>().join("; ")
        ),
    };
    let mut out = String::new();
    let _ = writeln!(out, "audit:  {}", audit.name);
    let _ = writeln!(out, "status: {}", serde_json::to_value(audit.status)?.as_str().unwrap_or("?"));
    let _ = writeln!(out, "tag:    {}", audit.tag);
    if let Some(stage) = audit.name.strip_prefix("stage ").and_then(|s| s.split(':').next()) {
        let _ = writeln!(out, "stage:  {stage}");
    }
    if !audit.witness.is_null() {
        let _ = writeln!(out, "witness:");
        render(&audit.witness, 1, &mut out);
    }
    Ok(out)
}
