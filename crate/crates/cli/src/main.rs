use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qcn_assoc::harness::{
    aggregate, run_algorithm, run_sweep, write_table, AggregateRow, Algorithm, ExperimentConfig, Format, Scenario,
    SweepPlan, TrialOptions, SCALABILITY_NOTE,
};
use qcn_assoc::matching::is_swap_stable;
use qcn_assoc::verify::{self, VerifyConfig};
use qcn_assoc::{rng, rqsa, Instance, Objective, StabilityScope};

#[derive(Parser)]
#[command(name = "qcn-assoc", version, about = "Request-to-switch association in quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over R values and seeds; writes raw and aggregate tables.
    Sweep(SweepArgs),
    /// One trial, every selected algorithm, with per-request detail.
    Trial(TrialArgs),
    /// Property suites: fidelity identities, oracle equivalence, swap stability.
    Verify(VerifyArgs),
    /// Runs the matching game and checks its output for swap stability.
    StabilityCheck(StabilityArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON document with optional `scenario`, `matching` and `sweep` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `default`, `scalability` or `K,M,Q`.
    #[arg(long)]
    scenario: Option<String>,
    /// Generation attempts per link per slot.
    #[arg(long)]
    attempts: Option<u32>,
    #[arg(long)]
    allow_relocation: Option<bool>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per (scenario, R).
    #[arg(long)]
    seeds: Option<usize>,
    /// Comma-separated, e.g. `0,5,10`.
    #[arg(long, value_delimiter = ',')]
    r_values: Option<Vec<usize>>,
    /// Comma-separated subset of rqsa,greedy,random,optimal.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    optimal_rcap: Option<usize>,
    #[arg(long)]
    optimal_budget_secs: Option<f64>,
    #[arg(long)]
    objective: Option<Objective>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Record wall-clock runtimes (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    common: Common,
    /// Trial seed, as printed in the `seed` column.
    #[arg(long)]
    seed: u64,
    #[arg(long, short = 'r')]
    requests: usize,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    optimal_budget_secs: Option<f64>,
    #[arg(long)]
    objective: Option<Objective>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Cases per suite; defaults to the full counts.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    allow_relocation: Option<bool>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    common: Common,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    seeds: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    r_values: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ScopeArg::Algorithm)]
    scope: ScopeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Algorithm,
    AllPairs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Trial(a) => cmd_trial(a),
        Command::Verify(a) => cmd_verify(a),
        Command::StabilityCheck(a) => cmd_stability(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = &common.scenario {
        match s.as_str() {
            "default" => {}
            "scalability" => cfg.sweep.scalability = true,
            other => {
                let dims: Vec<usize> = other
                    .split(',')
                    .map(|d| d.trim().parse())
                    .collect::<Result<_, _>>()
                    .with_context(|| format!("--scenario '{other}': expected default, scalability or K,M,Q"))?;
                let [k, m, q] = dims[..] else { bail!("--scenario '{other}': expected three sizes K,M,Q") };
                cfg.scenario = cfg.scenario.with_size(k, m, q);
            }
        }
    }
    if let Some(n) = common.attempts {
        cfg.scenario.attempts = n;
    }
    if let Some(b) = common.allow_relocation {
        cfg.matching.allow_relocation = b;
    }
    cfg.scenario.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    let mut cfg = load_config(&a.common)?;
    if let Some(s) = a.seed {
        cfg.scenario.seed = s;
    }
    if let Some(n) = a.seeds {
        cfg.sweep.trials = n;
    }
    if let Some(r) = a.r_values {
        cfg.sweep.r_values = r;
    }
    if let Some(algs) = a.algorithms {
        cfg.sweep.algorithms = algs;
    }
    if let Some(c) = a.optimal_rcap {
        cfg.sweep.optimal_rcap = c;
    }
    if let Some(b) = a.optimal_budget_secs {
        cfg.sweep.optimal_budget_secs = b;
    }
    if let Some(o) = a.objective {
        cfg.sweep.objective = o;
    }
    cfg.sweep.timing |= a.timing;
    cfg.sweep.validate()?;
    let format = Format::from(a.format);
    let plan = cfg.plan();

    fs::create_dir_all(&a.out).with_context(|| format!("creating output directory {}", a.out.display()))?;
    let mut rows = Vec::with_capacity(plan.row_count());
    for scenario in &plan.scenarios {
        eprintln!("scenario {}: {} trials x {} R values", scenario.id, plan.spec.trials, plan.spec.r_values.len());
        let single = SweepPlan { scenarios: vec![scenario.clone()], ..plan.clone() };
        rows.extend(run_sweep(&single, a.parallelism)?);
    }
    let agg = aggregate(&rows);

    let ext = format.extension();
    write_table(&rows, format, create(&a.out.join(format!("raw.{ext}")))?)?;
    write_table(&agg, format, create(&a.out.join(format!("aggregate.{ext}")))?)?;
    let mut notes = Vec::new();
    if plan.spec.scalability {
        notes.push(SCALABILITY_NOTE);
    }
    let meta = json!({
        "config": cfg,
        "scenarios": plan.scenarios.iter().map(|s| &s.id).collect::<Vec<_>>(),
        "raw_rows": rows.len(),
        "notes": notes,
    });
    let mut w = create(&a.out.join("meta.json"))?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    w.write_all(b"\n")?;
    w.flush()?;

    print_aggregate(&agg)?;
    Ok(true)
}

fn print_aggregate(agg: &[AggregateRow]) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<10} {:>4} {:<8} {:>8} {:>8} {:>9} {:>8} {:>5}",
        "scenario", "R", "alg", "served", "se", "fidelity", "se", "n"
    )?;
    for a in agg {
        writeln!(
            out,
            "{:<10} {:>4} {:<8} {:>8.4} {:>8.4} {:>9.4} {:>8.4} {:>5}",
            a.scenario, a.r, a.algorithm, a.mean_served, a.se_served, a.mean_fidelity, a.se_fidelity, a.n_trials
        )?;
    }
    Ok(())
}

fn cmd_trial(a: TrialArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let scenario = Scenario::from_params(cfg.scenario.clone());
    let mut algs = a.algorithms.unwrap_or_else(|| cfg.sweep.algorithms.clone());
    algs.sort();
    algs.dedup();
    let opts = TrialOptions {
        matching: cfg.matching,
        optimal_rcap: usize::MAX,
        optimal_budget: Some(std::time::Duration::from_secs_f64(
            a.optimal_budget_secs.unwrap_or(cfg.sweep.optimal_budget_secs),
        )),
        objective: a.objective.unwrap_or(cfg.sweep.objective),
        timing: false,
    };
    let instance = Instance::sample(&scenario.params, a.requests, a.seed)?;
    let fingerprint = instance.fingerprint();
    let runs: Vec<_> = algs.iter().map(|&alg| run_algorithm(alg, &instance, a.seed, &opts)).collect();

    match a.format {
        FormatArg::Json => {
            let doc = json!({
                "seed": a.seed,
                "scenario": scenario.id,
                "instance_fingerprint": fingerprint,
                "instance": instance,
                "results": runs.iter().map(|r| json!({
                    "algorithm": r.algorithm,
                    "swap_count": r.swap_count,
                    "solution": r.solution,
                })).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(io::stdout().lock(), &doc)?;
            println!();
        }
        FormatArg::Csv => {
            let mut out = io::stdout().lock();
            writeln!(out, "seed {} scenario {} fingerprint {}", a.seed, scenario.id, fingerprint)?;
            for run in &runs {
                let Some(sol) = &run.solution else { continue };
                let proven = if run.algorithm == Algorithm::Optimal {
                    format!(" proven {}", sol.optimal_flag)
                } else {
                    String::new()
                };
                let swaps = run.swap_count.map(|s| format!(" swaps {s}")).unwrap_or_default();
                writeln!(
                    out,
                    "\n{}: served {}/{} total fidelity {:.6}{swaps}{proven}",
                    run.algorithm, sol.served_count, a.requests, sol.total_utility
                )?;
                writeln!(
                    out,
                    "  {:>3} {:>3} {:>3} {:>6} {:>6} {:<17} {:>8}",
                    "id", "tx", "rx", "f_min", "switch", "action", "fidelity"
                )?;
                for r in &instance.requests {
                    let q = sol.matching.get(r.id);
                    let served = q.and_then(|q| sol.plans[q].choices.get(&r.id).copied().flatten());
                    let qs = q.map_or("-".to_string(), |q| q.to_string());
                    let (act, f) = served.map_or(("dropped".to_string(), "-".to_string()), |s| {
                        (s.action.to_string(), format!("{:.6}", s.fidelity.value()))
                    });
                    writeln!(
                        out,
                        "  {:>3} {:>3} {:>3} {:>6.4} {:>6} {:<17} {:>8}",
                        r.id,
                        r.tx,
                        r.rx,
                        r.f_min.value(),
                        qs,
                        act,
                        f
                    )?;
                }
            }
        }
    }
    Ok(true)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let mut cfg = VerifyConfig { seed: a.seed, ..VerifyConfig::default() };
    if let Some(n) = a.trials {
        cfg = cfg.with_trials(n);
    }
    if let Some(b) = a.allow_relocation {
        cfg.matching.allow_relocation = b;
    }
    let mut ok = true;
    for rep in verify::run_all(&cfg) {
        println!("{rep}");
        ok &= rep.passed;
    }
    Ok(ok)
}

fn cmd_stability(a: StabilityArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let master = a.seed.unwrap_or(cfg.scenario.seed);
    let scope = match a.scope {
        ScopeArg::Algorithm => StabilityScope::Algorithm,
        ScopeArg::AllPairs => StabilityScope::AllPairs,
    };
    let mut ok = true;
    for &r in &a.r_values {
        let (mut stable, mut unconverged) = (0, 0);
        let mut first: Option<String> = None;
        for i in 0..a.seeds {
            let seed = rng::trial_seed(master, i as u64);
            let inst = Instance::sample(&cfg.scenario, r, seed)?;
            let res = rqsa(&inst.requests, &inst.slot, &cfg.matching);
            let rep = is_swap_stable(&res.matching, &inst.requests, &inst.slot, &cfg.matching, scope);
            if !res.converged {
                unconverged += 1;
            }
            if rep.stable {
                stable += 1;
            } else if first.is_none() {
                first = Some(format!("seed {seed}: {:?}", rep.witness));
            }
        }
        let pass = stable == a.seeds && unconverged == 0;
        ok &= pass;
        println!(
            "{} R={r}: {stable}/{} stable, {unconverged} hit the pass cap{}",
            if pass { "PASS" } else { "FAIL" },
            a.seeds,
            first.map(|w| format!(", first unstable {w}")).unwrap_or_default()
        );
    }
    Ok(ok)
}
