//! JSON schemas for experiment configs and run summaries.

use schemars::schema_for;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::report::ExperimentReport;

/// Schema files shipped under `schemas/`, by file name.
pub fn schemas() -> Vec<(&'static str, Value)> {
    let to_value = |s| serde_json::to_value(s).expect("schemas serialize");
    vec![
        (
            "config.schema.json",
            to_value(schema_for!(ExperimentConfig)),
        ),
        (
            "summary.schema.json",
            to_value(schema_for!(ExperimentReport)),
        ),
    ]
}
