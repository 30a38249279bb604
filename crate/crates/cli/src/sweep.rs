//! Parameter grids over a scenario template.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use shiftlab::Caps;

use crate::scenario::{parse_scenario, run_scenario};

/// Grid file: dotted paths into the template, each with its list of values.
pub type Grid = BTreeMap<String, Vec<Value>>;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub key: BTreeMap<String, Value>,
    pub status: String,
    pub exit: i32,
    pub passed: usize,
    pub audits: usize,
    pub summary: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub rows: Vec<Row>,
}

/// Every combination of grid values; no combinations when the grid has no
/// keys or some key has no values.
pub fn expand(grid: &Grid) -> Vec<BTreeMap<String, Value>> {
    if grid.is_empty() {
        return Vec::new();
    }
    let mut combos = vec![BTreeMap::new()];
    for (path, values) in grid {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for c in &combos {
            for v in values {
                let mut c = c.clone();
                c.insert(path.clone(), v.clone());
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

fn set_path(doc: &mut Value, path: &str, v: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(p.to_string(), v);
                    return Ok(());
                }
                map.entry(p.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = p.parse().with_context(|| format!("grid path {path}: {p} is not an index"))?;
                let len = items.len();
                let slot = items.get_mut(idx).with_context(|| format!("grid path {path}: index {idx} ≥ {len}"))?;
                if last {
                    *slot = v;
                    return Ok(());
                }
                slot
            }
            _ => bail!("grid path {path}: {p} is not inside an object or array"),
        };
    }
    bail!("grid path is empty")
}

fn run_row(template: &Value, key: BTreeMap<String, Value>, caps: Option<Caps>) -> Row {
    let failed = |key, exit, error: String| Row {
        key,
        status: "error".into(),
        exit,
        passed: 0,
        audits: 0,
        summary: BTreeMap::new(),
        error: Some(error),
    };
    let mut doc = template.clone();
    for (path, v) in &key {
        if let Err(e) = set_path(&mut doc, path, v.clone()) {
            return failed(key, 2, e.to_string());
        }
    }
    let scenario = match parse_scenario(&doc.to_string()) {
        Ok(s) => s,
        Err(e) => return failed(key, 2, e.0),
    };
    match run_scenario(&scenario, caps) {
        Ok(r) => Row {
            status: if r.passed() { "pass".into() } else { "fail".into() },
            exit: if r.passed() { 0 } else { 1 },
            passed: r.audits.iter().filter(|a| a.passed()).count(),
            audits: r.audits.len(),
            summary: r.summary,
            error: None,
            key,
        },
        Err(e) => failed(key, 2, e.0),
    }
}

/// Numbers compare numerically, everything else by its JSON text.
fn cmp_values(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            x.as_f64().unwrap_or(f64::NAN).total_cmp(&y.as_f64().unwrap_or(f64::NAN))
        }
        (Value::String(x), Value::String(y)) => x.cmp(y),
        _ => a.to_string().cmp(&b.to_string()),
    }
}

fn cmp_keys(a: &BTreeMap<String, Value>, b: &BTreeMap<String, Value>) -> Ordering {
    a.iter()
        .zip(b)
        .map(|((ka, va), (kb, vb))| ka.cmp(kb).then_with(|| cmp_values(va, vb)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Rows run concurrently up to `jobs` and are emitted sorted by grid key.
pub fn sweep(template: &Value, grid: &Grid, jobs: usize, caps: Option<Caps>) -> Result<Table> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let combos = expand(grid);
    let mut rows: Vec<Row> = pool.install(|| combos.into_par_iter().map(|k| run_row(template, k, caps)).collect());
    rows.sort_by(|a, b| cmp_keys(&a.key, &b.key));
    Ok(Table { rows })
}
