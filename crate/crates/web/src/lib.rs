//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": "..."}` instead of throwing.

use artlab_core::algolang::{equivalent, parse_named, InputDomain, Value, DEFAULT_STEP_LIMIT};
use artlab_core::analytics::{accuracy, importance_by_kind};
use artlab_core::dataset::{rebalance_split, LabeledDataset, SplitSpec};
use artlab_core::models::{fit_forest, ForestParams};
use artlab_core::synth::{generate, KindWeights, SynthParams, SYNTH_KIND_MAP};
use serde_json::{json, Value as Json};
use wasm_bindgen::prelude::wasm_bindgen;

fn error(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

fn parse_input(text: &str) -> Result<Vec<i64>, String> {
    match text.trim().parse::<Value>() {
        Ok(Value::Array(items)) => Ok(items),
        Ok(other) => Err(format!("input must be an array, got {other}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs `source` on `input` (e.g. `[3,1,2]`) and reports the result and
/// cost counters.
#[wasm_bindgen]
pub fn run_program(source: &str, input: &str) -> String {
    let program = match parse_named("program", source) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let input = match parse_input(input) {
        Ok(v) => v,
        Err(e) => return error(e),
    };
    let run = program.execute(&input, DEFAULT_STEP_LIMIT);
    let mut out = json!({
        "steps": run.trace.statements_executed,
        "comparisons": run.trace.comparisons,
        "array_writes": run.trace.array_writes,
    });
    match run.outcome {
        Ok(v) => out["value"] = Json::String(v.to_string()),
        Err(e) => out["error"] = Json::String(e.to_string()),
    }
    out.to_string()
}

/// Compares two programs on every input of `domain`
/// (`len:LO..HI,val:LO..HI`).
#[wasm_bindgen]
pub fn check_equivalence(first: &str, second: &str, domain: &str) -> String {
    let parsed = parse_named("first", first)
        .and_then(|a| parse_named("second", second).map(|b| (a, b)));
    let (a, b) = match parsed {
        Ok(pair) => pair,
        Err(e) => return error(e),
    };
    let domain: InputDomain = match domain.parse() {
        Ok(d) => d,
        Err(e) => return error(e),
    };
    match equivalent(&a, &b, &domain, DEFAULT_STEP_LIMIT) {
        Ok(eq) => json!({
            "equivalent": eq.equivalent,
            "cases": domain.total_cases().to_string(),
            "counterexample": eq.counterexample,
        })
        .to_string(),
        Err(e) => error(e),
    }
}

/// Draws a synthetic cohort with the given kind weights, fits a forest on
/// a 75-25 split and reports held-out accuracy and importance by kind.
#[wasm_bindgen]
pub fn forest_demo(seed: u32, tracing: f64, detection: f64, comparison: f64, analysis: f64, n_trees: u32) -> String {
    let seed = u64::from(seed);
    let params = SynthParams {
        weights: KindWeights {
            tracing,
            detection,
            comparison,
            analysis,
        },
        seed,
        ..SynthParams::default()
    };
    let result = (|| -> Result<Json, String> {
        let cohort = generate(&params).map_err(|e| e.to_string())?;
        let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).map_err(|e| e.to_string())?;
        let split = rebalance_split(&d, &SplitSpec::new(0.25, seed)).map_err(|e| e.to_string())?;
        let y: Vec<f64> = split.train.labels.iter().map(|&l| l as f64).collect();
        let forest_params = ForestParams {
            n_trees: n_trees.clamp(1, 500) as usize,
            seed,
            ..ForestParams::default()
        };
        let forest = fit_forest(&split.train.features, &y, &forest_params).map_err(|e| e.to_string())?;
        let predicted: Vec<u8> = split.test.features.iter().map(|x| forest.predict_label(x)).collect();
        let acc = accuracy(&split.test.labels, &predicted).map_err(|e| e.to_string())?;
        let by_kind: Vec<Json> = importance_by_kind(&forest.importances, &d.kind_map)
            .into_iter()
            .map(|(k, v)| json!({ "kind": k.name(), "importance": v }))
            .collect();
        Ok(json!({
            "students": d.len(),
            "train_rows": split.train.len(),
            "test_rows": split.test.len(),
            "labels": d.label_histogram().to_vec(),
            "test_accuracy": acc,
            "importance": by_kind,
        }))
    })();
    match result {
        Ok(v) => v.to_string(),
        Err(e) => error(e),
    }
}
