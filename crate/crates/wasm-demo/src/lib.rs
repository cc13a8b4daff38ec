//! Browser bindings: every function takes plain values or a JSON config and
//! returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use scadec::harness::{cmd_llr_hist, run_experiment, AttackConfig};
use scadec::search::{predicted_decrypts, predicted_visits, search_space_size};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn complexity_json(n_b: usize, rounds: usize, m_r: usize, n_e: usize, n_c: usize) -> Result<String, String> {
    let m_s = search_space_size(n_b, n_e, n_c).map_err(err)?;
    let visits = predicted_visits(m_s, m_r as u64, rounds as u64).map_err(err)?;
    let decrypts = predicted_decrypts(m_r as u64, rounds as u64).map_err(err)?;
    Ok(json!({ "m_s": m_s, "visits": visits, "decrypts": decrypts }).to_string())
}

pub fn llr_histogram_json(config: &str, bins: usize, reps: usize) -> Result<String, String> {
    let config = AttackConfig::from_json(config).map_err(err)?;
    let (samples, hist) = cmd_llr_hist(&config, bins, reps).map_err(err)?;
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    Ok(json!({
        "edges": hist.edges,
        "correct": hist.correct,
        "wrong": hist.wrong,
        "mean_correct": mean(&samples.correct),
        "mean_wrong": mean(&samples.wrong),
    })
    .to_string())
}

pub fn attack_json(config: &str) -> Result<String, String> {
    let config = AttackConfig::from_json(config).map_err(err)?;
    let (_, truth) = config.simulate().map_err(err)?;
    let out = run_experiment(&config, false).map_err(err)?;
    let hex = |keys: &[scadec::RoundKey]| -> Vec<Value> { keys.iter().map(|k| json!(k.to_hex())).collect() };
    Ok(json!({
        "success": out.record.success,
        "rank_of_truth": out.record.rank_of_truth,
        "best": hex(out.result.best.rounds()),
        "truth": hex(truth.rounds()),
        "round_metrics": out.result.survivors[0].round_metrics,
        "report": out.record.report,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn complexity(n_b: usize, rounds: usize, m_r: usize, n_e: usize, n_c: usize) -> Result<String, JsError> {
    complexity_json(n_b, rounds, m_r, n_e, n_c).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn llr_histogram(config: &str, bins: usize, reps: usize) -> Result<String, JsError> {
    llr_histogram_json(config, bins, reps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn attack(config: &str) -> Result<String, JsError> {
    attack_json(config).map_err(|e| JsError::new(&e))
}
