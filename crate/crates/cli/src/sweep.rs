use helios_core::Scenario;
use serde_json::Value;

/// Short names for the common sweep targets.
const ALIASES: [(&str, &str); 6] = [
    ("opacity", "field.discs.*.opacity"),
    ("deferrable_power", "loads.*.deferrable_power"),
    ("noise_std", "sampling.noise_std"),
    ("lead_time", "control.lead_time"),
    ("spread", "control.spread"),
    ("threshold", "nowcast.threshold"),
];

pub fn resolve_alias(param: &str) -> &str {
    ALIASES.iter().find(|(a, _)| *a == param).map_or(param, |(_, p)| p)
}

/// Parses a `--values` entry: JSON if it parses, a bare string otherwise.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets every slot addressed by the dotted `path` (`*` matches all array
/// elements) and returns how many were set. Paths must name existing keys.
pub fn set_path(doc: &mut Value, path: &str, value: &Value) -> usize {
    let segments: Vec<&str> = path.split('.').collect();
    set_segments(doc, &segments, value)
}

fn set_segments(node: &mut Value, segments: &[&str], value: &Value) -> usize {
    let Some((head, rest)) = segments.split_first() else {
        *node = value.clone();
        return 1;
    };
    match node {
        Value::Array(items) if *head == "*" => items.iter_mut().map(|v| set_segments(v, rest, value)).sum(),
        Value::Array(items) => match head.parse::<usize>().ok().and_then(|i| items.get_mut(i)) {
            Some(v) => set_segments(v, rest, value),
            None => 0,
        },
        Value::Object(map) => match map.get_mut(*head) {
            Some(v) => set_segments(v, rest, value),
            None => 0,
        },
        _ => 0,
    }
}

/// The scenario as a document with every defaulted field spelled out, so
/// sweeps can address fields the file omitted.
pub fn expanded(scenario: &Scenario) -> Value {
    serde_json::to_value(scenario).expect("scenario serializes")
}
