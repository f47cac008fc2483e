//! Canonical JSON encoding.
//!
//! Everything the pipeline persists or embeds in prompts is serialised the
//! same way: compact, with object keys lexically sorted at every nesting
//! level. Byte-identical inputs then produce byte-identical artefacts, which
//! is what makes reruns diffable and the repository content-stable.

use serde::Serialize;
use serde_json::Value;

/// Serialise `value` as compact JSON with sorted object keys.
///
/// Panics if `value` does not serialise; callers only pass types whose
/// `Serialize` implementations are infallible.
pub(crate) fn canonical<T: Serialize>(value: &T) -> String {
    let raw = serde_json::to_value(value).expect("value serialises to JSON");
    sort_keys(&raw).to_string()
}

/// Pretty-printed variant of [`canonical`] for files meant to be read by
/// people (reports, metadata); still key-sorted, so still reproducible.
pub(crate) fn canonical_pretty<T: Serialize>(value: &T) -> String {
    let raw = serde_json::to_value(value).expect("value serialises to JSON");
    let mut text =
        serde_json::to_string_pretty(&sort_keys(&raw)).expect("sorted value serialises");
    text.push('\n');
    text
}

fn sort_keys(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let sorted: std::collections::BTreeMap<_, _> =
                map.iter().map(|(k, v)| (k.clone(), sort_keys(v))).collect();
            serde_json::to_value(sorted).expect("sorted object serialises")
        }
        Value::Array(items) => Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_at_every_level() {
        let value = serde_json::json!({
            "zeta": {"b": 1, "a": [{"y": 2, "x": 3}]},
            "alpha": true
        });
        assert_eq!(canonical(&value), r#"{"alpha":true,"zeta":{"a":[{"x":3,"y":2}],"b":1}}"#);
    }

    #[test]
    fn pretty_form_ends_with_a_newline() {
        let text = canonical_pretty(&serde_json::json!({"k": 1}));
        assert!(text.ends_with('\n'));
        assert!(text.contains("\"k\": 1"));
    }
}
