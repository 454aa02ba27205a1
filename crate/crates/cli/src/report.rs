use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::Value as Json;
use takagi_core::numerics::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Found,
    None,
}

/// One JSON line on standard output.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, Json>,
    pub status: Status,
    pub payload: Json,
    pub elapsed_ms: u128,
}

/// Converts a serializable value to JSON with every double rendered as a
/// 17-significant-digit decimal string.
pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<Json> {
    let mut v = serde_json::to_value(value)?;
    normalize_floats(&mut v);
    Ok(v)
}

fn normalize_floats(v: &mut Json) {
    match v {
        Json::Number(n) if n.is_f64() => {
            *v = Json::String(fmt_f64(n.as_f64().expect("f64 number")));
        }
        Json::Array(items) => items.iter_mut().for_each(normalize_floats),
        Json::Object(map) => map.values_mut().for_each(normalize_floats),
        _ => {}
    }
}

/// Flag values as a sorted map; absent options are dropped.
pub fn parameters<T: Serialize>(args: &T) -> anyhow::Result<BTreeMap<String, Json>> {
    match to_json(args)? {
        Json::Object(map) => Ok(map.into_iter().filter(|(_, v)| !v.is_null()).collect()),
        Json::Null => Ok(BTreeMap::new()),
        other => Ok(BTreeMap::from([("value".to_string(), other)])),
    }
}

pub fn emit(report: &RunReport) -> anyhow::Result<()> {
    let line = serde_json::to_string(report)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}")?;
    out.flush()?;
    Ok(())
}
