use qcn_assoc::{rng, Instance, ScenarioParams};
use qcn_assoc_web::{fidelity_curves, run_trial, sweep};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn curves_have_four_actions() {
    let v = parse(&fidelity_curves(0.9, 11).unwrap());
    let xs = v["f_tx"].as_array().unwrap();
    assert_eq!(xs.len(), 11);
    assert_eq!(xs[0].as_f64(), Some(0.5));
    assert_eq!(xs[10].as_f64(), Some(1.0));
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 4);
    // At a perfect Tx link the direct swap returns the Rx fidelity.
    assert!((curves[0]["fidelity"][10].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert!(fidelity_curves(0.1, 11).is_err());
    assert!(fidelity_curves(0.9, 1).is_err());
}

#[test]
fn trial_matches_native_instance() {
    let seed = rng::trial_seed(3, 1);
    let v = parse(&run_trial(r#"{"sweep": {"algorithms": ["rqsa", "optimal"]}}"#, 8, &seed.to_string()).unwrap());
    let inst = Instance::sample(&ScenarioParams::default(), 8, seed).unwrap();
    assert_eq!(v["fingerprint"], inst.fingerprint().as_str());
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["algorithm"], "rqsa");
    assert_eq!(results[0]["assignments"].as_array().unwrap().len(), 8);
    assert_eq!(results[1]["proven"], true);
    assert!(results[1]["total_fidelity"].as_f64() >= results[0]["total_fidelity"].as_f64());
}

#[test]
fn trial_rejects_bad_input() {
    assert!(run_trial("", 3, "x").is_err());
    assert!(run_trial(r#"{"oops": 1}"#, 3, "1").is_err());
    assert!(run_trial("", 3, "1").is_ok());
}

#[test]
fn small_sweep() {
    let v = parse(
        &sweep(r#"{"sweep": {"trials": 3, "r_values": [0, 5, 20], "algorithms": ["greedy", "optimal"]}}"#).unwrap(),
    );
    assert_eq!(v["trials"], 3);
    let agg = v["aggregate"].as_array().unwrap();
    // Optimal is capped below R = 20.
    assert_eq!(agg.len(), 5);
    assert!(agg.iter().all(|a| a["n_trials"] == 3));
}
