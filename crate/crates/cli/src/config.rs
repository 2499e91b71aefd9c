//! Merging a JSON config file under command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

pub fn read_config(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !v.is_object() {
        return Err(Failure::Usage("config must be a JSON object".into()));
    }
    Ok(v)
}

/// Overlays the non-null fields of `flags` on `config`. Config keys that are not
/// parameters of `P` are rejected.
pub fn merge<P: Serialize + DeserializeOwned>(flags: &P, config: Option<Value>) -> Result<P, Failure> {
    let Some(mut base) = config else {
        return Ok(serde_json::from_value(to_value(flags)?).expect("flag struct round-trips"));
    };
    let Value::Object(over) = to_value(flags)? else {
        unreachable!("parameter structs serialize to objects")
    };
    let obj = base.as_object_mut().expect("checked by read_config");
    if let Some(k) = obj.keys().find(|k| !over.contains_key(*k)) {
        return Err(Failure::Usage(format!("config: unknown key '{k}'")));
    }
    for (k, v) in over {
        if !v.is_null() {
            obj.insert(k, v);
        }
    }
    serde_json::from_value(base).map_err(|e| Failure::Usage(format!("config: {e}")))
}

fn to_value<P: Serialize>(p: &P) -> Result<Value, Failure> {
    serde_json::to_value(p).map_err(|e| Failure::Usage(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use serde_json::json;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        a: Option<f64>,
        b: Option<u64>,
    }

    #[test]
    fn flags_win_over_config() {
        let flags = P { a: Some(1.0), b: None };
        let m = merge(&flags, Some(json!({"a": 5.0, "b": 7}))).unwrap();
        assert_eq!(m, P { a: Some(1.0), b: Some(7) });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(merge(&P::default(), Some(json!({"c": 1}))), Err(Failure::Usage(_))));
    }
}
