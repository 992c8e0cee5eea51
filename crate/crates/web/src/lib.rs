//! Browser bindings: fidelity curves, a single trial, and a small sweep.
//!
//! Every export takes and returns JSON strings. The plain functions below the
//! exports are what they call and are usable natively.

use std::time::Duration;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qcn_assoc::fidelity::{e2e_fidelity, Action, Fidelity};
use qcn_assoc::harness::{aggregate, run_algorithm, run_sweep, Algorithm, ExperimentConfig, TrialOptions};
use qcn_assoc::Instance;

/// Largest R the demo runs the exact baseline at.
pub const DEMO_OPTIMAL_RCAP: usize = 10;
pub const DEMO_OPTIMAL_BUDGET: Duration = Duration::from_secs(2);
pub const DEMO_MAX_TRIALS: usize = 50;

#[wasm_bindgen(js_name = fidelityCurves)]
pub fn fidelity_curves_js(f_rx: f64, points: usize) -> Result<String, JsValue> {
    fidelity_curves(f_rx, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = runTrial)]
pub fn run_trial_js(config: &str, requests: usize, seed: &str) -> Result<String, JsValue> {
    run_trial(config, requests, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sweep)]
pub fn sweep_js(config: &str) -> Result<String, JsValue> {
    sweep(config).map_err(|e| JsValue::from_str(&e))
}

/// End-to-end fidelity of each action as the Tx link fidelity runs from
/// 0.5 to 1, with the Rx link fixed at `f_rx`.
pub fn fidelity_curves(f_rx: f64, points: usize) -> Result<String, String> {
    let f_rx = Fidelity::new(f_rx).map_err(|e| e.to_string())?;
    if points < 2 {
        return Err("need at least two points".into());
    }
    let xs: Vec<f64> = (0..points).map(|i| 0.5 + 0.5 * i as f64 / (points - 1) as f64).collect();
    let curves: Vec<Value> = Action::ALL
        .iter()
        .map(|&a| {
            let ys: Vec<f64> = xs.iter().map(|&x| e2e_fidelity(Fidelity::new(x).unwrap(), f_rx, a).value()).collect();
            json!({ "action": a.name(), "alpha_tx": a.alpha_tx(), "alpha_rx": a.alpha_rx(), "fidelity": ys })
        })
        .collect();
    Ok(json!({ "f_rx": f_rx.value(), "f_tx": xs, "curves": curves }).to_string())
}

fn parse_config(config: &str) -> Result<ExperimentConfig, String> {
    let text = if config.trim().is_empty() { "{}" } else { config };
    ExperimentConfig::from_json(text).map_err(|e| e.to_string())
}

fn demo_options(cfg: &ExperimentConfig) -> TrialOptions {
    TrialOptions {
        matching: cfg.matching,
        optimal_rcap: cfg.sweep.optimal_rcap.min(DEMO_OPTIMAL_RCAP),
        optimal_budget: Some(DEMO_OPTIMAL_BUDGET),
        objective: cfg.sweep.objective,
        timing: true,
    }
}

/// Samples one instance and runs every algorithm in the config on it.
pub fn run_trial(config: &str, requests: usize, seed: &str) -> Result<String, String> {
    let cfg = parse_config(config)?;
    let seed: u64 = seed.trim().parse().map_err(|_| format!("seed '{seed}' is not an unsigned integer"))?;
    let inst = Instance::sample(&cfg.scenario, requests, seed).map_err(|e| e.to_string())?;
    let opts = demo_options(&cfg);
    let mut algs = cfg.sweep.algorithms.clone();
    algs.sort();
    algs.dedup();
    let results: Vec<Value> = algs
        .iter()
        .map(|&alg| {
            let run = run_algorithm(alg, &inst, seed, &opts);
            let Some(sol) = run.solution else {
                return json!({ "algorithm": alg, "skipped": true });
            };
            let assignments: Vec<Value> = inst
                .requests
                .iter()
                .map(|r| {
                    let q = sol.matching.get(r.id);
                    let served = q.and_then(|q| sol.plans[q].choices.get(&r.id).copied().flatten());
                    json!({
                        "id": r.id, "tx": r.tx, "rx": r.rx, "f_min": r.f_min.value(), "switch": q,
                        "action": served.map(|s| s.action.name()),
                        "fidelity": served.map(|s| s.fidelity.value()),
                    })
                })
                .collect();
            json!({
                "algorithm": alg,
                "skipped": false,
                "served": sol.served_count,
                "total_fidelity": sol.total_utility,
                "proven": (alg == Algorithm::Optimal).then_some(sol.optimal_flag),
                "swaps": run.swap_count,
                "runtime_ms": run.runtime_ms,
                "assignments": assignments,
            })
        })
        .collect();
    Ok(json!({
        "seed": seed.to_string(),
        "fingerprint": inst.fingerprint(),
        "K": cfg.scenario.num_tx, "M": cfg.scenario.num_rx, "Q": cfg.scenario.num_qs,
        "tx_pairs": inst.slot.n_tx, "rx_pairs": inst.slot.n_rx,
        "results": results,
    })
    .to_string())
}

/// Aggregated sweep over the config's R values. Trials are capped at
/// [`DEMO_MAX_TRIALS`] and the exact baseline at [`DEMO_OPTIMAL_RCAP`].
pub fn sweep(config: &str) -> Result<String, String> {
    let mut cfg = parse_config(config)?;
    cfg.sweep.trials = cfg.sweep.trials.min(DEMO_MAX_TRIALS);
    cfg.sweep.optimal_rcap = cfg.sweep.optimal_rcap.min(DEMO_OPTIMAL_RCAP);
    cfg.sweep.optimal_budget_secs = DEMO_OPTIMAL_BUDGET.as_secs_f64();
    cfg.sweep.timing = false;
    let plan = cfg.plan();
    let rows = run_sweep(&plan, Some(1)).map_err(|e| e.to_string())?;
    let agg = aggregate(&rows);
    Ok(json!({ "trials": cfg.sweep.trials, "aggregate": agg }).to_string())
}
