//! Seeded Monte Carlo sweeps over scenarios, request counts and algorithms.
//!
//! Every trial is addressed by `(master seed, trial index)`. All algorithms in
//! a trial see the same sampled instance, and rows come out in
//! `(scenario, R, trial, algorithm)` order whatever the thread count, so a raw
//! table is byte-identical across runs unless wall-clock timing is switched on.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use web_time::Instant;

use crate::baselines::{solve_greedy, solve_optimal, solve_random, Objective, Solution};
use crate::matching::{rqsa, MatchConfig};
use crate::model::{Instance, ModelError, ScenarioParams};
use crate::rng::{self, Stream};
use crate::search::Limits;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("no algorithms selected")]
    NoAlgorithms,
    #[error("no scenarios selected")]
    NoScenarios,
    #[error("optimal time budget must be positive and finite, got {0}")]
    Budget(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rqsa,
    Greedy,
    Random,
    Optimal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Rqsa, Algorithm::Greedy, Algorithm::Random, Algorithm::Optimal];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rqsa => "rqsa",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| format!("unknown algorithm '{s}' (expected rqsa, greedy, random or optimal)"))
    }
}

/// Status of the exact baseline in a row. Empty for the other algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimalStatus {
    #[serde(rename = "true")]
    Proven,
    #[serde(rename = "false")]
    Unproven,
    /// Not run because R exceeds the configured cap.
    #[serde(rename = "skipped")]
    Skipped,
}

/// One algorithm on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub seed: u64,
    pub scenario: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub algorithm: Algorithm,
    /// `None` on skipped rows. 1.0 when `R = 0`.
    pub served_fraction: Option<f64>,
    pub total_fidelity: Option<f64>,
    pub swap_count: Option<usize>,
    pub runtime_ms: f64,
    pub optimal_proven: Option<OptimalStatus>,
    pub instance_fingerprint: String,
}

impl TrialMetrics {
    pub fn served_count(&self) -> Option<usize> {
        let f = self.served_fraction?;
        Some(if self.r == 0 { 0 } else { (f * self.r as f64).round() as usize })
    }

    pub fn is_skipped(&self) -> bool {
        self.optimal_proven == Some(OptimalStatus::Skipped)
    }

    /// Row-level sanity: integral served count and fidelity within
    /// `[0.5, 1] * served`.
    pub fn check(&self) -> Result<(), String> {
        let (Some(f), Some(total)) = (self.served_fraction, self.total_fidelity) else {
            return if self.is_skipped() { Ok(()) } else { Err("missing metrics on a non-skipped row".into()) };
        };
        if !(0.0..=1.0).contains(&f) {
            return Err(format!("served_fraction {f} outside [0, 1]"));
        }
        let served = self.served_count().unwrap_or(0) as f64;
        if self.r > 0 && (f * self.r as f64 - served).abs() > 1e-9 {
            return Err(format!("served_fraction {f} times R = {} is not an integer", self.r));
        }
        if total > served + 1e-9 || total < 0.5 * served - 1e-9 {
            return Err(format!("total_fidelity {total} inconsistent with {served} served"));
        }
        Ok(())
    }
}

/// Mean and standard error per `(scenario, R, algorithm)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: String,
    #[serde(rename = "R")]
    pub r: usize,
    pub algorithm: Algorithm,
    pub mean_served: f64,
    pub se_served: f64,
    pub mean_fidelity: f64,
    pub se_fidelity: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub params: ScenarioParams,
}

impl Scenario {
    /// Id of the form `K5M5Q3`.
    pub fn from_params(params: ScenarioParams) -> Self {
        let id = format!("K{}M{}Q{}", params.num_tx, params.num_rx, params.num_qs);
        Scenario { id, params }
    }
}

/// Network sizes `(K, M)` of the scalability study, all with three switches.
/// The exact sizes are an assumption.
pub const SCALABILITY_SIZES: [(usize, usize); 3] = [(3, 5), (5, 5), (5, 3)];
pub const SCALABILITY_QS: usize = 3;
pub const SCALABILITY_NOTE: &str =
    "scalability scenario sizes (K,M) in {(3,5),(5,5),(5,3)} with Q=3 are assumed, not taken from a source table";

/// The three scalability scenarios, other parameters taken from `base`.
pub fn scalability_scenarios(base: &ScenarioParams) -> Vec<Scenario> {
    SCALABILITY_SIZES
        .iter()
        .map(|&(k, m)| Scenario::from_params(base.clone().with_size(k, m, SCALABILITY_QS)))
        .collect()
}

fn default_r_values() -> Vec<usize> {
    (0..=40).step_by(5).collect()
}
fn default_trials() -> usize {
    100
}
fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}
fn default_rcap() -> usize {
    16
}
fn default_budget() -> f64 {
    60.0
}

/// What to run. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_r_values")]
    pub r_values: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Largest R at which the exact baseline runs.
    #[serde(default = "default_rcap")]
    pub optimal_rcap: usize,
    #[serde(default = "default_budget")]
    pub optimal_budget_secs: f64,
    #[serde(default)]
    pub objective: Objective,
    /// Run the three scalability scenarios instead of the base scenario.
    #[serde(default)]
    pub scalability: bool,
    /// Record wall-clock runtimes. Off by default so output is reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::NoTrials);
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::NoAlgorithms);
        }
        if !(self.optimal_budget_secs.is_finite() && self.optimal_budget_secs > 0.0) {
            return Err(HarnessError::Budget(self.optimal_budget_secs));
        }
        Ok(())
    }

    fn sorted_algorithms(&self) -> Vec<Algorithm> {
        let mut a = self.algorithms.clone();
        a.sort();
        a.dedup();
        a
    }

    fn sorted_r_values(&self) -> Vec<usize> {
        let mut r = self.r_values.clone();
        r.sort();
        r.dedup();
        r
    }
}

/// One JSON document holding scenario, matching and sweep settings. Missing
/// sections and fields take their defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioParams,
    #[serde(default)]
    pub matching: MatchConfig,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.scenario.validate()?;
        cfg.sweep.validate()?;
        Ok(cfg)
    }

    pub fn plan(&self) -> SweepPlan {
        SweepPlan::new(self.scenario.clone(), self.sweep.clone(), self.matching)
    }
}

/// Per-trial knobs shared by all algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub matching: MatchConfig,
    pub optimal_rcap: usize,
    pub optimal_budget: Option<Duration>,
    pub objective: Objective,
    pub timing: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            matching: MatchConfig::default(),
            optimal_rcap: default_rcap(),
            optimal_budget: Some(Duration::from_secs_f64(default_budget())),
            objective: Objective::default(),
            timing: false,
        }
    }
}

/// Full result of one algorithm on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    /// `None` when skipped.
    pub solution: Option<Solution>,
    pub swap_count: Option<usize>,
    pub runtime_ms: f64,
}

/// Runs one algorithm on `instance`. `seed` feeds the random baseline.
pub fn run_algorithm(algorithm: Algorithm, instance: &Instance, seed: u64, opts: &TrialOptions) -> AlgorithmRun {
    let (requests, slot) = (&instance.requests, &instance.slot);
    if algorithm == Algorithm::Optimal && requests.len() > opts.optimal_rcap {
        return AlgorithmRun { algorithm, solution: None, swap_count: None, runtime_ms: 0.0 };
    }
    let start = Instant::now();
    let (solution, swap_count) = match algorithm {
        Algorithm::Rqsa => {
            let res = rqsa(requests, slot, &opts.matching);
            let swaps = res.swaps.len();
            (res.into(), Some(swaps))
        }
        Algorithm::Greedy => (solve_greedy(requests, slot), None),
        Algorithm::Random => (solve_random(requests, slot, &mut rng::stream(seed, Stream::RandomBaseline)), None),
        Algorithm::Optimal => {
            let limits = Limits { time: opts.optimal_budget, max_nodes: None };
            (solve_optimal(requests, slot, limits, opts.objective), None)
        }
    };
    let runtime_ms = if opts.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    AlgorithmRun { algorithm, solution: Some(solution), swap_count, runtime_ms }
}

/// Samples the trial instance and runs each algorithm on it, one row each,
/// in canonical algorithm order.
pub fn run_trial(
    scenario: &Scenario,
    r: usize,
    seed: u64,
    algorithms: &[Algorithm],
    opts: &TrialOptions,
) -> Result<Vec<TrialMetrics>, HarnessError> {
    let instance = Instance::sample(&scenario.params, r, seed)?;
    let fingerprint = instance.fingerprint();
    let mut algs = algorithms.to_vec();
    algs.sort();
    algs.dedup();
    Ok(algs
        .into_iter()
        .map(|a| {
            let run = run_algorithm(a, &instance, seed, opts);
            metrics_row(scenario, seed, &run, r, &fingerprint)
        })
        .collect())
}

fn metrics_row(scenario: &Scenario, seed: u64, run: &AlgorithmRun, r: usize, fingerprint: &str) -> TrialMetrics {
    let p = &scenario.params;
    let (served_fraction, total_fidelity, optimal_proven) = match &run.solution {
        None => (None, None, Some(OptimalStatus::Skipped)),
        Some(s) => {
            let frac = if r == 0 { 1.0 } else { s.served_count as f64 / r as f64 };
            let status = (run.algorithm == Algorithm::Optimal).then_some(if s.optimal_flag {
                OptimalStatus::Proven
            } else {
                OptimalStatus::Unproven
            });
            (Some(frac), Some(s.total_utility), status)
        }
    };
    TrialMetrics {
        seed,
        scenario: scenario.id.clone(),
        k: p.num_tx,
        m: p.num_rx,
        q: p.num_qs,
        r,
        algorithm: run.algorithm,
        served_fraction,
        total_fidelity,
        swap_count: run.swap_count,
        runtime_ms: run.runtime_ms,
        optimal_proven,
        instance_fingerprint: fingerprint.to_string(),
    }
}

/// Scenarios plus sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub scenarios: Vec<Scenario>,
    pub spec: SweepSpec,
    pub matching: MatchConfig,
    pub master_seed: u64,
}

impl SweepPlan {
    /// The base scenario alone, or the scalability trio when `spec.scalability`.
    pub fn new(base: ScenarioParams, spec: SweepSpec, matching: MatchConfig) -> Self {
        let master_seed = base.seed;
        let scenarios = if spec.scalability { scalability_scenarios(&base) } else { vec![Scenario::from_params(base)] };
        SweepPlan { scenarios, spec, matching, master_seed }
    }

    pub fn trial_options(&self) -> TrialOptions {
        TrialOptions {
            matching: self.matching,
            optimal_rcap: self.spec.optimal_rcap,
            optimal_budget: Some(Duration::from_secs_f64(self.spec.optimal_budget_secs)),
            objective: self.spec.objective,
            timing: self.spec.timing,
        }
    }

    /// Total raw rows the sweep will produce.
    pub fn row_count(&self) -> usize {
        self.scenarios.len()
            * self.spec.sorted_r_values().len()
            * self.spec.trials
            * self.spec.sorted_algorithms().len()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.scenarios.is_empty() {
            return Err(HarnessError::NoScenarios);
        }
        for s in &self.scenarios {
            s.params.validate()?;
        }
        self.spec.validate()
    }
}

/// Runs every `(scenario, R, trial)` and returns raw rows in canonical order.
/// `parallelism` of `None` uses all cores; the output does not depend on it.
pub fn run_sweep(plan: &SweepPlan, parallelism: Option<usize>) -> Result<Vec<TrialMetrics>, HarnessError> {
    plan.validate()?;
    let opts = plan.trial_options();
    let algs = plan.spec.sorted_algorithms();
    let mut jobs = Vec::new();
    for scenario in &plan.scenarios {
        for r in plan.spec.sorted_r_values() {
            for i in 0..plan.spec.trials {
                jobs.push((scenario, r, rng::trial_seed(plan.master_seed, i as u64)));
            }
        }
    }
    let run = |&(scenario, r, seed): &(&Scenario, usize, u64)| run_trial(scenario, r, seed, &algs, &opts);
    let per_trial = execute(&jobs, run, parallelism)?;
    Ok(per_trial.into_iter().flatten().collect())
}

#[cfg(feature = "parallel")]
fn execute<J, T, F>(jobs: &[J], f: F, parallelism: Option<usize>) -> Result<Vec<T>, HarnessError>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T, HarnessError> + Sync,
{
    use rayon::prelude::*;
    if parallelism == Some(1) {
        return jobs.iter().map(f).collect();
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;
    pool.install(|| jobs.par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<J, T, F>(jobs: &[J], f: F, _parallelism: Option<usize>) -> Result<Vec<T>, HarnessError>
where
    F: Fn(&J) -> Result<T, HarnessError>,
{
    jobs.iter().map(f).collect()
}

/// Sweep over the scalability scenarios.
pub fn scalability_suite(
    base: &ScenarioParams,
    spec: &SweepSpec,
    matching: MatchConfig,
    parallelism: Option<usize>,
) -> Result<Vec<TrialMetrics>, HarnessError> {
    let plan = SweepPlan::new(base.clone(), SweepSpec { scalability: true, ..spec.clone() }, matching);
    run_sweep(&plan, parallelism)
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups rows by `(scenario, R, algorithm)` in order of first appearance.
/// Skipped rows are left out; a group with only skipped rows yields nothing.
pub fn aggregate(rows: &[TrialMetrics]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, usize, Algorithm)> = Vec::new();
    let mut groups: BTreeMap<(String, usize, Algorithm), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let (Some(s), Some(f)) = (row.served_fraction, row.total_fidelity) else { continue };
        let key = (row.scenario.clone(), row.r, row.algorithm);
        let g = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (Vec::new(), Vec::new())
        });
        g.0.push(s);
        g.1.push(f);
    }
    order
        .into_iter()
        .map(|key| {
            let (served, fid) = &groups[&key];
            let (mean_served, se_served) = mean_se(served);
            let (mean_fidelity, se_fidelity) = mean_se(fid);
            AggregateRow {
                scenario: key.0,
                r: key.1,
                algorithm: key.2,
                mean_served,
                se_served,
                mean_fidelity,
                se_fidelity,
                n_trials: served.len(),
            }
        })
        .collect()
}

/// Output encoding for tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

pub const RAW_HEADER: &str = "seed,scenario,K,M,Q,R,algorithm,served_fraction,total_fidelity,swap_count,runtime_ms,optimal_proven,instance_fingerprint";
pub const AGGREGATE_HEADER: &str = "scenario,R,algorithm,mean_served,se_served,mean_fidelity,se_fidelity,n_trials";

/// Writes records as CSV with a header, or as a JSON array.
pub fn write_table<T: Serialize, W: Write>(records: &[T], format: Format, mut out: W) -> Result<(), HarnessError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for rec in records {
                w.serialize(rec)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads a table written by [`write_table`].
pub fn read_table<T: for<'de> Deserialize<'de>, R: Read>(input: R, format: Format) -> Result<Vec<T>, HarnessError> {
    match format {
        Format::Csv => Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?),
        Format::Json => Ok(serde_json::from_reader(input)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan(trials: usize, r_values: Vec<usize>, algorithms: Vec<Algorithm>) -> SweepPlan {
        let spec = SweepSpec { r_values, trials, algorithms, optimal_rcap: 6, ..SweepSpec::default() };
        SweepPlan::new(ScenarioParams::default(), spec, MatchConfig::default())
    }

    #[test]
    fn defaults() {
        let s = SweepSpec::default();
        assert_eq!(s.r_values, vec![0, 5, 10, 15, 20, 25, 30, 35, 40]);
        assert_eq!(s.trials, 100);
        assert_eq!(s.algorithms.len(), 4);
        assert!(!s.timing);
        assert!(serde_json::from_str::<SweepSpec>(r#"{"trails": 3}"#).is_err());
    }

    #[test]
    fn config_document() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let cfg =
            ExperimentConfig::from_json(r#"{"scenario": {"K": 3}, "sweep": {"trials": 2, "algorithms": ["rqsa"]}}"#)
                .unwrap();
        assert_eq!(cfg.scenario.num_tx, 3);
        assert_eq!(cfg.plan().row_count(), 9 * 2);
        assert!(ExperimentConfig::from_json(r#"{"scenaro": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"matching": {"relocate": true}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"trials": 0}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"scenario": {"K": 0}}"#).is_err());
    }

    #[test]
    fn one_of_everything_is_one_row() {
        let plan = small_plan(1, vec![5], vec![Algorithm::Rqsa]);
        let rows = run_sweep(&plan, Some(1)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(plan.row_count(), 1);
        rows[0].check().unwrap();
    }

    #[test]
    fn empty_trial() {
        let scenario = Scenario::from_params(ScenarioParams::default());
        let rows = run_trial(&scenario, 0, 9, &Algorithm::ALL, &TrialOptions::default()).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert_eq!(row.total_fidelity, Some(0.0));
            assert_eq!(row.served_fraction, Some(1.0));
        }
    }

    #[test]
    fn rows_share_the_instance_and_follow_canonical_order() {
        let plan = small_plan(3, vec![6, 2], vec![Algorithm::Optimal, Algorithm::Greedy, Algorithm::Rqsa]);
        let rows = run_sweep(&plan, Some(1)).unwrap();
        assert_eq!(rows.len(), plan.row_count());
        for chunk in rows.chunks(3) {
            assert!(chunk.iter().all(|r| r.instance_fingerprint == chunk[0].instance_fingerprint));
            let algs: Vec<_> = chunk.iter().map(|r| r.algorithm).collect();
            assert_eq!(algs, vec![Algorithm::Rqsa, Algorithm::Greedy, Algorithm::Optimal]);
        }
        assert_eq!(rows[0].r, 2);
        assert_eq!(rows.last().unwrap().r, 6);
        assert!(rows
            .iter()
            .filter(|r| r.algorithm == Algorithm::Optimal)
            .all(|r| r.optimal_proven == Some(OptimalStatus::Proven)));
        assert!(rows.iter().filter(|r| r.algorithm == Algorithm::Rqsa).all(|r| r.swap_count.is_some()));
    }

    #[test]
    fn optimal_above_cap_is_marked_skipped() {
        let plan = small_plan(2, vec![10], vec![Algorithm::Optimal]);
        let rows = run_sweep(&plan, Some(1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(TrialMetrics::is_skipped));
        assert!(rows.iter().all(|r| r.check().is_ok()));
        assert!(aggregate(&rows).is_empty());
    }

    #[test]
    fn deterministic_across_parallelism() {
        let plan = small_plan(4, vec![5, 10], Algorithm::ALL.to_vec());
        let a = run_sweep(&plan, Some(1)).unwrap();
        let b = run_sweep(&plan, Some(3)).unwrap();
        let c = run_sweep(&plan, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn aggregate_mean_and_se() {
        let plan = small_plan(5, vec![10], vec![Algorithm::Greedy]);
        let rows = run_sweep(&plan, Some(1)).unwrap();
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        let a = &agg[0];
        assert_eq!(a.n_trials, 5);
        let xs: Vec<f64> = rows.iter().map(|r| r.served_fraction.unwrap()).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= a.mean_served && a.mean_served <= hi);
        assert_eq!(mean_se(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_se(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let mut plan = small_plan(2, vec![0, 4, 10], Algorithm::ALL.to_vec());
        plan.spec.optimal_rcap = 4;
        let rows = run_sweep(&plan, Some(1)).unwrap();
        for format in [Format::Csv, Format::Json] {
            let mut buf = Vec::new();
            write_table(&rows, format, &mut buf).unwrap();
            if format == Format::Csv {
                assert!(buf.starts_with(RAW_HEADER.as_bytes()));
            }
            let back: Vec<TrialMetrics> = read_table(buf.as_slice(), format).unwrap();
            assert_eq!(back, rows);

            let agg = aggregate(&rows);
            let mut a1 = Vec::new();
            write_table(&agg, format, &mut a1).unwrap();
            let mut a2 = Vec::new();
            write_table(&aggregate(&back), format, &mut a2).unwrap();
            assert_eq!(a1, a2);
            if format == Format::Csv {
                assert!(a1.starts_with(AGGREGATE_HEADER.as_bytes()));
            }
        }
    }

    #[test]
    fn scalability_scenarios_have_three_ids() {
        let s = scalability_scenarios(&ScenarioParams::default());
        let ids: Vec<&str> = s.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["K3M5Q3", "K5M5Q3", "K5M3Q3"]);
    }

    #[test]
    fn parse_names() {
        assert_eq!("optimal".parse::<Algorithm>(), Ok(Algorithm::Optimal));
        assert!("best".parse::<Algorithm>().is_err());
        assert_eq!("json".parse::<Format>(), Ok(Format::Json));
    }
}
