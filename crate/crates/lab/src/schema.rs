//! The published configuration schema.

pub const SCHEMA: &str = include_str!("config.schema.json");

pub fn schema() -> serde_json::Value {
    serde_json::from_str(SCHEMA).expect("bundled schema is valid JSON")
}
