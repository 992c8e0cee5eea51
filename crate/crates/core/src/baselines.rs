//! Reference association strategies: exact optimum, greedy and random.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fidelity::{canonical_sum, Action, Fidelity};
use crate::matching::{init_greedy, plans_for, rqsa, MatchConfig, Matching, RqsaResult};
use crate::model::{Request, SlotState};
use crate::scheduler::{feasible_actions, ActionPlan, Served};
use crate::search::{self, Item, Limits, Opt, Problem};

/// Outcome of any association strategy on one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub matching: Matching,
    pub plans: Vec<ActionPlan>,
    pub total_utility: f64,
    pub served_count: usize,
    /// Proven optimal. Always false for heuristics.
    pub optimal_flag: bool,
    /// Upper bound on how far `total_utility` may be from the optimum, in
    /// objective units; zero when proven optimal.
    pub bound_gap: f64,
}

impl Solution {
    pub fn new(matching: Matching, plans: Vec<ActionPlan>) -> Self {
        let total_utility = plans.iter().map(|p| p.utility).fold(0.0, |a, u| a + u);
        let served_count = plans.iter().map(ActionPlan::served_count).sum();
        Solution { matching, plans, total_utility, served_count, optimal_flag: false, bound_gap: f64::INFINITY }
    }

    /// Checks every per-switch plan against thresholds and link budgets.
    pub fn check(&self, requests: &[Request], slot: &SlotState) -> Result<(), String> {
        for (q, plan) in self.plans.iter().enumerate() {
            let members: Vec<Request> =
                requests.iter().filter(|r| self.matching.get(r.id) == Some(q)).copied().collect();
            if plan.choices.len() != members.len() || members.iter().any(|r| !plan.choices.contains_key(&r.id)) {
                return Err(format!("plan of switch {q} does not cover exactly its members"));
            }
            plan.check(q, &members, slot).map_err(|e| format!("switch {q}: {e}"))?;
        }
        Ok(())
    }
}

impl From<RqsaResult> for Solution {
    fn from(r: RqsaResult) -> Self {
        Solution::new(r.matching, r.plans)
    }
}

/// What the exact search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Summed served fidelity.
    #[default]
    Fidelity,
    /// Served count first, summed fidelity as tie-break.
    Count,
}

impl FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fidelity" => Ok(Objective::Fidelity),
            "count" => Ok(Objective::Count),
            other => Err(format!("unknown objective '{other}' (expected fidelity or count)")),
        }
    }
}

/// Exact joint association and action selection by branch-and-bound.
///
/// Returns the incumbent with `optimal_flag = false` if `limits` run out.
pub fn solve_optimal(requests: &[Request], slot: &SlotState, limits: Limits, objective: Objective) -> Solution {
    let (k, m, q) = (slot.num_tx(), slot.num_rx(), slot.num_qs());
    let tx_res = |t: usize, s: usize| t * q + s;
    let rx_res = |s: usize, r: usize| k * q + s * m + r;
    let bonus = match objective {
        Objective::Fidelity => 0.0,
        Objective::Count => requests.len() as f64 + 1.0,
    };

    // (switch, action, fidelity) per request, best first.
    let mut candidates: Vec<(&Request, Vec<(usize, Action, Fidelity)>)> = requests
        .iter()
        .map(|r| {
            let mut opts: Vec<(usize, Action, Fidelity)> =
                (0..q).flat_map(|s| feasible_actions(s, r, slot).into_iter().map(move |(a, f)| (s, a, f))).collect();
            opts.sort_by(|a, b| b.2.value().total_cmp(&a.2.value()));
            (r, opts)
        })
        .filter(|(_, o)| !o.is_empty())
        .collect();
    candidates.sort_by(|(ra, oa), (rb, ob)| {
        ob[0]
            .2
            .value()
            .total_cmp(&oa[0].2.value())
            .then(ra.tx.cmp(&rb.tx))
            .then(ra.rx.cmp(&rb.rx))
            .then(ra.f_min.value().total_cmp(&rb.f_min.value()))
            .then(ra.id.cmp(&rb.id))
    });

    let mut capacity = vec![0u32; k * q + q * m];
    for s in 0..q {
        for t in 0..k {
            capacity[tx_res(t, s)] = slot.tx_budget(t, s);
        }
        for r in 0..m {
            capacity[rx_res(s, r)] = slot.rx_budget(s, r);
        }
    }
    let items: Vec<Item> = candidates
        .iter()
        .enumerate()
        .map(|(i, (r, opts))| Item {
            tx_group: r.tx,
            rx_group: r.rx,
            options: opts
                .iter()
                .map(|&(s, a, f)| Opt {
                    tx_res: tx_res(r.tx, s),
                    rx_res: rx_res(s, r.rx),
                    a_tx: a.alpha_tx(),
                    a_rx: a.alpha_rx(),
                    score: f.value() + bonus,
                })
                .collect(),
            same_as_prev: i > 0 && candidates[i - 1].0.same_demand(r),
        })
        .collect();
    let problem = Problem {
        capacity,
        tx_groups: (0..k).map(|t| (0..q).map(|s| tx_res(t, s)).collect()).collect(),
        rx_groups: (0..m).map(|r| (0..q).map(|s| rx_res(s, r)).collect()).collect(),
        items,
    };
    let per_switch = |choice: &[Option<usize>]| -> (Vec<Vec<f64>>, usize) {
        let mut fids = vec![Vec::new(); q];
        let mut served = 0;
        for (c, (_, opts)) in choice.iter().zip(&candidates) {
            if let Some(i) = c {
                let (s, _, f) = opts[*i];
                fids[s].push(f.value());
                served += 1;
            }
        }
        (fids, served)
    };
    let eval = |choice: &[Option<usize>]| {
        let (fids, served) = per_switch(choice);
        let total: f64 = fids.into_iter().map(canonical_sum).fold(0.0, |a, u| a + u);
        total + bonus * served as f64
    };
    let warm = warm_start(requests, slot, &candidates);
    let out = search::maximize(&problem, eval, limits, Some(warm));

    let mut matching = Matching::empty(requests, q);
    let mut choices: Vec<BTreeMap<usize, Option<Served>>> = vec![BTreeMap::new(); q];
    for (c, (r, opts)) in out.choice.iter().zip(&candidates) {
        if let Some(i) = c {
            let (s, action, fidelity) = opts[*i];
            matching.set(r.id, Some(s));
            choices[s].insert(r.id, Some(Served { action, fidelity }));
        }
    }
    let plans: Vec<ActionPlan> = choices
        .into_iter()
        .map(|choices| {
            let utility = canonical_sum(choices.values().flatten().map(|s| s.fidelity.value()));
            ActionPlan { choices, utility }
        })
        .collect();
    let mut sol = Solution::new(matching, plans);
    sol.optimal_flag = out.complete;
    sol.bound_gap = if out.complete { 0.0 } else { (out.root_bound - out.value).max(0.0) };
    debug_assert_eq!(sol.check(requests, slot), Ok(()));
    sol
}

/// Option indices reproducing the matching-game solution.
fn warm_start(
    requests: &[Request],
    slot: &SlotState,
    candidates: &[(&Request, Vec<(usize, Action, Fidelity)>)],
) -> Vec<Option<usize>> {
    let res = rqsa(requests, slot, &MatchConfig::default());
    candidates
        .iter()
        .map(|(r, opts)| {
            let s = res.matching.get(r.id)?;
            let served = res.plans[s].choices.get(&r.id).copied().flatten()?;
            opts.iter().position(|&(q, a, _)| q == s && a == served.action)
        })
        .collect()
}

/// Greedy association followed by each switch's optimal action plan.
pub fn solve_greedy(requests: &[Request], slot: &SlotState) -> Solution {
    let matching = init_greedy(requests, slot);
    let plans = plans_for(&matching, requests, slot);
    Solution::new(matching, plans)
}

/// Uniformly random switch per request (id order, no capacity check), then
/// each switch serves what it can.
pub fn solve_random<R: Rng + ?Sized>(requests: &[Request], slot: &SlotState, rng: &mut R) -> Solution {
    let mut matching = Matching::empty(requests, slot.num_qs());
    let mut order: Vec<&Request> = requests.iter().collect();
    order.sort_by_key(|r| r.id);
    for r in order {
        matching.set(r.id, Some(rng.random_range(0..slot.num_qs())));
    }
    let plans = plans_for(&matching, requests, slot);
    Solution::new(matching, plans)
}
