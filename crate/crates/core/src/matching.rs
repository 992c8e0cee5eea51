//! Request-to-switch matching game and the swap-matching algorithm.
//!
//! Requests rank switches by the worst-case (direct swap) fidelity they would
//! receive there. Switches rank *sets* of requests by their optimal action
//! plan utility. Starting from a greedy capacity-aware assignment, requests
//! exchange switches pairwise (or move into a vacancy) whenever every
//! participant weakly gains and the summed switch utility strictly grows.
//! The summed utility is a potential over a finite set, so the loop ends in a
//! swap-stable matching.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fidelity::swap_fidelity;
use crate::model::{Request, SlotState};
use crate::scheduler::{solve_p1, ActionPlan};

/// A switch strictly prefers a new request set only if its utility grows by
/// more than this.
pub const STRICT_EPS: f64 = 1e-9;

/// Hard cap on swap passes, whatever the configuration asks for.
pub const MAX_PASSES_CAP: usize = 10_000;

fn default_true() -> bool {
    true
}

fn default_max_passes() -> usize {
    MAX_PASSES_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    /// Also consider moving a request into a switch without a partner.
    #[serde(default = "default_true")]
    pub allow_relocation: bool,
    /// Require every participant to strictly gain, not just one switch.
    #[serde(default)]
    pub strict_all: bool,
    #[serde(default = "default_max_passes")]
    pub max_passes: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { allow_relocation: true, strict_all: false, max_passes: MAX_PASSES_CAP }
    }
}

/// Request id to switch index; `None` means the request is not associated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    num_qs: usize,
    assignment: BTreeMap<usize, Option<usize>>,
}

impl Matching {
    /// All requests unassigned.
    pub fn empty(requests: &[Request], num_qs: usize) -> Self {
        Matching { num_qs, assignment: requests.iter().map(|r| (r.id, None)).collect() }
    }

    pub fn num_qs(&self) -> usize {
        self.num_qs
    }

    pub fn get(&self, id: usize) -> Option<usize> {
        self.assignment.get(&id).copied().flatten()
    }

    pub fn set(&mut self, id: usize, qs: Option<usize>) {
        assert!(qs.map_or(true, |q| q < self.num_qs), "switch {qs:?} out of range");
        let slot = self.assignment.get_mut(&id).unwrap_or_else(|| panic!("unknown request {id}"));
        *slot = qs;
    }

    /// Ids associated with `qs`, ascending.
    pub fn members(&self, qs: usize) -> Vec<usize> {
        self.assignment.iter().filter(|(_, q)| **q == Some(qs)).map(|(id, _)| *id).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Option<usize>)> + '_ {
        self.assignment.iter().map(|(id, q)| (*id, *q))
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.values().filter(|q| q.is_some()).count()
    }
}

/// The other side of a swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partner {
    Request(usize),
    /// An empty place at the target switch.
    Vacancy,
}

impl fmt::Display for Partner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partner::Request(id) => write!(f, "{id}"),
            Partner::Vacancy => f.write_str("VACANCY"),
        }
    }
}

/// One approved (or, from the stability check, one available) swap: `r`
/// moves from `q` to `q_prime` and `r_prime` moves the other way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapRecord {
    pub r: usize,
    pub r_prime: Partner,
    /// `None` when `r` was unassigned.
    pub q: Option<usize>,
    pub q_prime: usize,
    /// Change of the summed switch utility.
    pub delta: f64,
}

impl fmt::Display for SwapRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.q.map_or_else(|| "-".to_string(), |q| q.to_string());
        write!(f, "r={} r'={} q={} q'={} delta={:.3e}", self.r, self.r_prime, q, self.q_prime, self.delta)
    }
}

/// Worst-case fidelity a request expects at `qs`: the direct-swap fidelity.
pub fn request_utility(request: &Request, qs: usize, slot: &SlotState) -> f64 {
    swap_fidelity(slot.tx_fid(request.tx, qs), slot.rx_fid(qs, request.rx)).value()
}

/// `Greater` if `request` prefers `q` to `q_prime`. Equal utilities go to the
/// lower switch index, so this is a total order.
pub fn prefers_qs(request: &Request, q: usize, q_prime: usize, slot: &SlotState) -> Ordering {
    if q == q_prime {
        return Ordering::Equal;
    }
    request_utility(request, q, slot).total_cmp(&request_utility(request, q_prime, slot)).then(q_prime.cmp(&q))
}

/// Switches from most to least preferred by `request`.
pub fn ranked_qs(request: &Request, slot: &SlotState) -> Vec<usize> {
    let mut qs: Vec<usize> = (0..slot.num_qs()).collect();
    qs.sort_by(|&a, &b| prefers_qs(request, b, a, slot));
    qs
}

/// Does `request` prefer `to` over its current association `from`?
/// Any switch beats being unassigned.
fn request_gains(request: &Request, from: Option<usize>, to: usize, slot: &SlotState) -> bool {
    match from {
        None => true,
        Some(q) => prefers_qs(request, to, q, slot) == Ordering::Greater,
    }
}

/// Greedy start: in id order, each request takes its most preferred switch at
/// which one more direct swap still fits the running tally of both links.
pub fn init_greedy(requests: &[Request], slot: &SlotState) -> Matching {
    let mut m = Matching::empty(requests, slot.num_qs());
    let mut used_tx = vec![vec![0u32; slot.num_qs()]; slot.num_tx()];
    let mut used_rx = vec![vec![0u32; slot.num_rx()]; slot.num_qs()];
    let mut order: Vec<&Request> = requests.iter().collect();
    order.sort_by_key(|r| r.id);
    for r in order {
        let chosen = ranked_qs(r, slot)
            .into_iter()
            .find(|&q| used_tx[r.tx][q] < slot.tx_budget(r.tx, q) && used_rx[q][r.rx] < slot.rx_budget(q, r.rx));
        if let Some(q) = chosen {
            used_tx[r.tx][q] += 1;
            used_rx[q][r.rx] += 1;
            m.set(r.id, Some(q));
        }
    }
    m
}

/// Memoized switch utilities for one run, keyed by switch and member ids.
pub struct UtilityCache<'a> {
    slot: &'a SlotState,
    by_id: HashMap<usize, Request>,
    memo: HashMap<(usize, Vec<usize>), f64>,
    solves: u64,
}

impl<'a> UtilityCache<'a> {
    pub fn new(requests: &[Request], slot: &'a SlotState) -> Self {
        UtilityCache { slot, by_id: requests.iter().map(|r| (r.id, *r)).collect(), memo: HashMap::new(), solves: 0 }
    }

    /// `ids` must be sorted ascending.
    pub fn utility(&mut self, qs: usize, ids: &[usize]) -> f64 {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        if let Some(&u) = self.memo.get(&(qs, ids.to_vec())) {
            return u;
        }
        let reqs: Vec<Request> = ids.iter().map(|id| self.by_id[id]).collect();
        let u = solve_p1(qs, &reqs, self.slot).utility;
        self.solves += 1;
        self.memo.insert((qs, ids.to_vec()), u);
        u
    }

    /// Number of actual solver calls (cache misses).
    pub fn solves(&self) -> u64 {
        self.solves
    }
}

/// Summed switch utility of `matching`.
pub fn potential(matching: &Matching, requests: &[Request], slot: &SlotState) -> f64 {
    let mut cache = UtilityCache::new(requests, slot);
    (0..matching.num_qs()).map(|q| cache.utility(q, &matching.members(q))).fold(0.0, |a, u| a + u)
}

/// Switch-side utilities before and after a candidate swap. `from` is absent
/// when the moving request was unassigned.
#[derive(Debug, Clone, Copy)]
pub struct SwitchGains {
    pub from: Option<(f64, f64)>,
    pub to: (f64, f64),
}

/// Approval rule shared by the swap phase and the stability check.
/// Requests' preferences are strict total orders, so they are checked by the
/// caller; this decides the switch side.
pub fn switches_approve(g: SwitchGains, config: &MatchConfig) -> bool {
    let weak = |(old, new): (f64, f64)| new >= old;
    let strict = |(old, new): (f64, f64)| new > old + STRICT_EPS;
    if config.strict_all {
        strict(g.to) && g.from.map_or(true, strict)
    } else {
        weak(g.to) && g.from.map_or(true, weak) && (strict(g.to) || g.from.is_some_and(strict))
    }
}

fn sorted_with(mut ids: Vec<usize>, remove: Option<usize>, add: Option<usize>) -> Vec<usize> {
    if let Some(x) = remove {
        ids.retain(|&i| i != x);
    }
    if let Some(x) = add {
        let pos = ids.partition_point(|&i| i < x);
        ids.insert(pos, x);
    }
    ids
}

/// Evaluates moving `r` to `to` with `partner` moving back. Returns the swap
/// if every participant approves.
fn try_swap(
    matching: &Matching,
    by_id: &HashMap<usize, Request>,
    r: usize,
    partner: Partner,
    to: usize,
    slot: &SlotState,
    config: &MatchConfig,
    utility: &mut dyn FnMut(usize, &[usize]) -> f64,
) -> Option<SwapRecord> {
    let from = matching.get(r);
    if from == Some(to) || !request_gains(&by_id[&r], from, to, slot) {
        return None;
    }
    let partner_id = match partner {
        Partner::Request(p) => {
            // The partner must land somewhere it prefers; unassigned is never preferred.
            let q = from?;
            if matching.get(p) != Some(to) || prefers_qs(&by_id[&p], q, to, slot) != Ordering::Greater {
                return None;
            }
            Some(p)
        }
        Partner::Vacancy => None,
    };
    let to_old_ids = matching.members(to);
    let to_new_ids = sorted_with(to_old_ids.clone(), partner_id, Some(r));
    let to_pair = (utility(to, &to_old_ids), utility(to, &to_new_ids));
    let from_pair = from.map(|q| {
        let old = matching.members(q);
        let new = sorted_with(old.clone(), Some(r), partner_id);
        (utility(q, &old), utility(q, &new))
    });
    let gains = SwitchGains { from: from_pair, to: to_pair };
    if !switches_approve(gains, config) {
        return None;
    }
    let delta = (to_pair.1 - to_pair.0) + from_pair.map_or(0.0, |(o, n)| n - o);
    Some(SwapRecord { r, r_prime: partner, q: from, q_prime: to, delta })
}

fn apply(matching: &mut Matching, s: &SwapRecord) {
    matching.set(s.r, Some(s.q_prime));
    if let Partner::Request(p) = s.r_prime {
        matching.set(p, s.q);
    }
}

/// Partners `r` may exchange with at `to`: members sharing its Tx or Rx node
/// (ascending id), then the vacancy if relocation is enabled.
fn candidate_partners(
    matching: &Matching,
    by_id: &HashMap<usize, Request>,
    r: usize,
    to: usize,
    shared_node_only: bool,
    config: &MatchConfig,
) -> Vec<Partner> {
    let me = by_id[&r];
    let mut out: Vec<Partner> = matching
        .members(to)
        .into_iter()
        .filter(|p| *p != r)
        .filter(|p| !shared_node_only || by_id[p].tx == me.tx || by_id[p].rx == me.rx)
        .map(Partner::Request)
        .collect();
    if config.allow_relocation {
        out.push(Partner::Vacancy);
    }
    out
}

/// Result of the swap phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapPhase {
    pub matching: Matching,
    pub swaps: Vec<SwapRecord>,
    pub passes: usize,
    /// A full pass found nothing to swap (false only if the pass cap hit).
    pub converged: bool,
}

/// Repeats passes over all requests, applying the first approved swap found
/// for each, until a pass approves none.
pub fn find_and_apply_swaps(
    matching: Matching,
    requests: &[Request],
    slot: &SlotState,
    config: &MatchConfig,
) -> SwapPhase {
    let mut cache = UtilityCache::new(requests, slot);
    let by_id: HashMap<usize, Request> = requests.iter().map(|r| (r.id, *r)).collect();
    let mut ids: Vec<usize> = requests.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    let mut matching = matching;
    let mut swaps = Vec::new();
    let max_passes = config.max_passes.min(MAX_PASSES_CAP);
    let mut passes = 0;
    let mut converged = false;
    let mut utility = |q: usize, ids: &[usize]| cache.utility(q, ids);

    while passes < max_passes {
        passes += 1;
        let mut changed = false;
        for &r in &ids {
            let from = matching.get(r);
            let mut targets: Vec<usize> =
                (0..slot.num_qs()).filter(|&q| Some(q) != from && request_gains(&by_id[&r], from, q, slot)).collect();
            targets.sort_by(|&a, &b| prefers_qs(&by_id[&r], b, a, slot));
            'targets: for to in targets {
                for partner in candidate_partners(&matching, &by_id, r, to, true, config) {
                    if let Some(s) = try_swap(&matching, &by_id, r, partner, to, slot, config, &mut utility) {
                        apply(&mut matching, &s);
                        swaps.push(s);
                        changed = true;
                        break 'targets;
                    }
                }
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    SwapPhase { matching, swaps, passes, converged }
}

/// Per-switch optimal action plans for `matching`.
pub fn plans_for(matching: &Matching, requests: &[Request], slot: &SlotState) -> Vec<ActionPlan> {
    let by_id: HashMap<usize, Request> = requests.iter().map(|r| (r.id, *r)).collect();
    (0..matching.num_qs())
        .map(|q| {
            let reqs: Vec<Request> = matching.members(q).iter().map(|id| by_id[id]).collect();
            solve_p1(q, &reqs, slot)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RqsaResult {
    pub matching: Matching,
    pub plans: Vec<ActionPlan>,
    pub swaps: Vec<SwapRecord>,
    pub passes: usize,
    pub converged: bool,
}

impl RqsaResult {
    pub fn total_utility(&self) -> f64 {
        self.plans.iter().map(|p| p.utility).fold(0.0, |a, u| a + u)
    }
}

/// Greedy initialization, swap phase, then every switch solves its action plan.
pub fn rqsa(requests: &[Request], slot: &SlotState, config: &MatchConfig) -> RqsaResult {
    let start = init_greedy(requests, slot);
    let phase = find_and_apply_swaps(start, requests, slot, config);
    let plans = plans_for(&phase.matching, requests, slot);
    RqsaResult { matching: phase.matching, plans, swaps: phase.swaps, passes: phase.passes, converged: phase.converged }
}

/// Which partners the stability check enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityScope {
    /// Exactly the candidates the swap phase considers (shared Tx or Rx node).
    #[default]
    Algorithm,
    /// Every pair of requests at two different switches.
    AllPairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub witness: Option<SwapRecord>,
    pub checked: u64,
}

/// Exhaustive check that no approved swap exists. Switch utilities are solved
/// afresh with a memo local to this check, independent of the swap phase.
pub fn is_swap_stable(
    matching: &Matching,
    requests: &[Request],
    slot: &SlotState,
    config: &MatchConfig,
    scope: StabilityScope,
) -> StabilityReport {
    let by_id: HashMap<usize, Request> = requests.iter().map(|r| (r.id, *r)).collect();
    let mut memo: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut utility = |q: usize, ids: &[usize]| {
        let mut key = ids.to_vec();
        key.sort_unstable();
        *memo.entry((q, key)).or_insert_with_key(|(_, ids)| {
            let reqs: Vec<Request> = ids.iter().map(|id| by_id[id]).collect();
            solve_p1(q, &reqs, slot).utility
        })
    };
    let mut checked = 0;
    for r in requests {
        for to in 0..slot.num_qs() {
            if matching.get(r.id) == Some(to) {
                continue;
            }
            let shared = scope == StabilityScope::Algorithm;
            for partner in candidate_partners(matching, &by_id, r.id, to, shared, config) {
                checked += 1;
                if let Some(w) = try_swap(matching, &by_id, r.id, partner, to, slot, config, &mut utility) {
                    return StabilityReport { stable: false, witness: Some(w), checked };
                }
            }
        }
    }
    StabilityReport { stable: true, witness: None, checked }
}
