//! Executable property suites: fidelity identities, oracle equivalence of the
//! two exact solvers, and swap stability of the matching game.
//!
//! Each suite draws its cases from `trial_seed(master, i)` and stops at the
//! first failure, reporting the seed so the case can be replayed.

use std::fmt;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::baselines::{solve_optimal, Objective};
use crate::fidelity::{distill_fidelity, swap_fidelity, Fidelity};
use crate::matching::{is_swap_stable, rqsa, MatchConfig, StabilityScope};
use crate::model::{Instance, ScenarioParams};
use crate::oracle;
use crate::rng::{trial_seed, SimRng};
use crate::scheduler::solve_p1;
use crate::search::Limits;

pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    /// Cases run before stopping.
    pub cases: usize,
    /// First failing case, with its seed.
    pub witness: Option<String>,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({} cases)", self.name, self.cases)?;
        if let Some(w) = &self.witness {
            write!(f, ": {w}")?;
        }
        Ok(())
    }
}

fn report(name: &str, cases: usize, witness: Option<String>) -> SuiteReport {
    SuiteReport { name: name.to_string(), passed: witness.is_none(), cases, witness }
}

/// Case counts and seed for [`run_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub fidelity_cases: usize,
    pub p1_trials: usize,
    pub optimal_trials: usize,
    /// Trials per entry of `stability_r`.
    pub stability_trials: usize,
    pub stability_r: Vec<usize>,
    pub matching: MatchConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            fidelity_cases: 10_000,
            p1_trials: 1000,
            optimal_trials: 300,
            stability_trials: 100,
            stability_r: vec![10, 20, 40],
            matching: MatchConfig::default(),
        }
    }
}

impl VerifyConfig {
    /// Same count for every suite.
    pub fn with_trials(self, n: usize) -> Self {
        VerifyConfig { fidelity_cases: n, p1_trials: n, optimal_trials: n, stability_trials: n, ..self }
    }
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    vec![
        fidelity_suite(cfg.seed, cfg.fidelity_cases, &Calculus::default()),
        p1_suite(cfg.seed, cfg.p1_trials),
        optimal_suite(cfg.seed, cfg.optimal_trials),
        stability_suite(cfg.seed, cfg.stability_trials, &cfg.stability_r, &cfg.matching),
    ]
}

/// The two primitives the identities are checked against.
#[derive(Clone, Copy)]
pub struct Calculus {
    pub swap: fn(Fidelity, Fidelity) -> Fidelity,
    pub distill: fn(Fidelity) -> Fidelity,
}

impl Default for Calculus {
    fn default() -> Self {
        Calculus { swap: swap_fidelity, distill: distill_fidelity }
    }
}

/// Swap symmetry and identity, distillation fixed points and improvement,
/// and the action ordering, on `cases` random inputs.
pub fn fidelity_suite(seed: u64, cases: usize, calc: &Calculus) -> SuiteReport {
    const NAME: &str = "fidelity identities";
    let (s, d) = (calc.swap, calc.distill);
    let fid = |x: f64| Fidelity::new(x).expect("in range");
    for (x, name) in [(0.25, "0.25"), (0.5, "0.5"), (1.0, "1")] {
        let got = d(fid(x)).value();
        if (got - x).abs() > IDENTITY_TOL {
            return report(NAME, 0, Some(format!("distillation fixed point {name}: D({x}) = {got}")));
        }
    }
    let mut rng = SimRng::seed_from_u64(seed);
    for i in 0..cases {
        let a = fid(rng.random_range(0.25..=1.0));
        let b = fid(rng.random_range(0.25..=1.0));
        let witness = |what: &str| Some(format!("{what} at a={}, b={} (case {i}, seed {seed})", a.value(), b.value()));
        if (s(a, b).value() - s(b, a).value()).abs() > IDENTITY_TOL {
            return report(NAME, i + 1, witness("swap symmetry"));
        }
        if (s(a, Fidelity::PERFECT).value() - a.value()).abs() > IDENTITY_TOL {
            return report(NAME, i + 1, witness("swap identity"));
        }
        let x = a.value();
        let gain = d(a).value() - x;
        let improves = if x > 0.5 + 1e-6 && x < 1.0 - 1e-6 { gain > 0.0 } else { gain > -IDENTITY_TOL };
        if x > 0.5 && !improves {
            return report(NAME, i + 1, witness("distillation improvement"));
        }
        if x > 0.5 && b.value() > 0.5 {
            let direct = s(a, b).value();
            let tx = s(d(a), b).value();
            let rx = s(a, d(b)).value();
            let both = s(d(a), d(b)).value();
            let ordered = both + IDENTITY_TOL >= tx
                && both + IDENTITY_TOL >= rx
                && tx + IDENTITY_TOL >= direct
                && rx + IDENTITY_TOL >= direct;
            if !ordered {
                return report(NAME, i + 1, witness("action ordering"));
            }
        }
    }
    report(NAME, cases, None)
}

fn p1_params() -> ScenarioParams {
    ScenarioParams { attempts: 4, ..ScenarioParams::default() }.with_size(2, 2, 2)
}

fn optimal_params() -> ScenarioParams {
    ScenarioParams { attempts: 3, ..ScenarioParams::default() }.with_size(2, 2, 2)
}

/// Per-switch exact search against enumeration, up to four requests, link
/// budgets up to four. Exact equality.
pub fn p1_suite(seed: u64, trials: usize) -> SuiteReport {
    const NAME: &str = "P1 brute-force equivalence";
    let p = p1_params();
    for i in 0..trials {
        let ts = trial_seed(seed, i as u64);
        let r = i % 5;
        let inst = Instance::sample(&p, r, ts).expect("valid params");
        for qs in 0..p.num_qs {
            let got = solve_p1(qs, &inst.requests, &inst.slot).utility;
            let want = oracle::p1_brute_force(qs, &inst.requests, &inst.slot);
            if got != want {
                let w = format!("seed {ts} (K=2 M=2 Q=2 n=4 R={r}), switch {qs}: search {got} vs enumeration {want}");
                return report(NAME, i + 1, Some(w));
            }
        }
    }
    report(NAME, trials, None)
}

/// Joint exact search against enumeration, up to six requests, two
/// switches, link budgets up to three. Exact equality.
pub fn optimal_suite(seed: u64, trials: usize) -> SuiteReport {
    const NAME: &str = "optimal brute-force equivalence";
    let p = optimal_params();
    for i in 0..trials {
        let ts = trial_seed(seed, i as u64);
        let r = i % 7;
        let inst = Instance::sample(&p, r, ts).expect("valid params");
        let sol = solve_optimal(&inst.requests, &inst.slot, Limits::default(), Objective::Fidelity);
        let want = oracle::optimal_brute_force(&inst.requests, &inst.slot);
        if !sol.optimal_flag || sol.total_utility != want {
            let w = format!(
                "seed {ts} (K=2 M=2 Q=2 n=3 R={r}): search {} (proven {}) vs enumeration {want}",
                sol.total_utility, sol.optimal_flag
            );
            return report(NAME, i + 1, Some(w));
        }
    }
    report(NAME, trials, None)
}

/// Matching-game output is swap stable under the algorithm's own candidate
/// set, default scenario, `trials` seeds per request count.
pub fn stability_suite(seed: u64, trials: usize, r_values: &[usize], config: &MatchConfig) -> SuiteReport {
    const NAME: &str = "swap stability";
    let p = ScenarioParams::default();
    let mut cases = 0;
    for &r in r_values {
        for i in 0..trials {
            cases += 1;
            let ts = trial_seed(seed, i as u64);
            let inst = Instance::sample(&p, r, ts).expect("valid params");
            let res = rqsa(&inst.requests, &inst.slot, config);
            let rep = is_swap_stable(&res.matching, &inst.requests, &inst.slot, config, StabilityScope::Algorithm);
            if !res.converged || !rep.stable {
                let w = format!(
                    "seed {ts} (default scenario, R={r}): converged {}, witness {:?}",
                    res.converged, rep.witness
                );
                return report(NAME, cases, Some(w));
            }
        }
    }
    report(NAME, cases, None)
}
