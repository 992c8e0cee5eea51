//! Exact per-switch action selection.
//!
//! Given the requests associated with one switch, choose for each request one
//! of the four actions or drop it, maximizing the summed end-to-end fidelity
//! while the pairs drawn from every Tx and Rx link stay within that link's
//! realized count. A request whose threshold cannot be met is dropped and
//! contributes zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fidelity::{canonical_sum, e2e_fidelity, Action, Fidelity};
use crate::model::{Request, SlotState};
use crate::search::{self, Item, Limits, Opt, Problem};

/// A served request's action and the fidelity it yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Served {
    pub action: Action,
    pub fidelity: Fidelity,
}

/// Actions one switch takes for its associated requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ActionPlan {
    /// Every associated request id; `None` means dropped.
    pub choices: BTreeMap<usize, Option<Served>>,
    /// Summed fidelity of served requests (see [`canonical_sum`]).
    pub utility: f64,
}

impl ActionPlan {
    pub fn served_count(&self) -> usize {
        self.choices.values().filter(|c| c.is_some()).count()
    }

    pub fn served(&self) -> impl Iterator<Item = (usize, Served)> + '_ {
        self.choices.iter().filter_map(|(id, c)| c.map(|s| (*id, s)))
    }

    /// Checks thresholds, link budgets at `qs`, and the reported utility.
    pub fn check(&self, qs: usize, requests: &[Request], slot: &SlotState) -> Result<(), String> {
        let mut used_tx = vec![0u32; slot.num_tx()];
        let mut used_rx = vec![0u32; slot.num_rx()];
        for (id, s) in self.served() {
            let r = requests.iter().find(|r| r.id == id).ok_or_else(|| format!("plan serves unknown request {id}"))?;
            let f = e2e_fidelity(slot.tx_fid(r.tx, qs), slot.rx_fid(qs, r.rx), s.action);
            if f != s.fidelity {
                return Err(format!("request {id}: recorded fidelity {} but action gives {}", s.fidelity, f));
            }
            if f < r.f_min {
                return Err(format!("request {id}: fidelity {f} below threshold {}", r.f_min));
            }
            used_tx[r.tx] += s.action.alpha_tx();
            used_rx[r.rx] += s.action.alpha_rx();
        }
        for (k, &u) in used_tx.iter().enumerate() {
            if u > slot.tx_budget(k, qs) {
                return Err(format!("Tx node {k} at switch {qs}: uses {u} of {}", slot.tx_budget(k, qs)));
            }
        }
        for (m, &u) in used_rx.iter().enumerate() {
            if u > slot.rx_budget(qs, m) {
                return Err(format!("Rx node {m} at switch {qs}: uses {u} of {}", slot.rx_budget(qs, m)));
            }
        }
        let expect = canonical_sum(self.served().map(|(_, s)| s.fidelity.value()));
        if expect != self.utility {
            return Err(format!("utility {} does not match served fidelities {}", self.utility, expect));
        }
        Ok(())
    }
}

/// Actions that meet `request.f_min` at `qs` and fit the link budgets on
/// their own, best fidelity first (ties by action index).
pub fn feasible_actions(qs: usize, request: &Request, slot: &SlotState) -> Vec<(Action, Fidelity)> {
    let (f_tx, f_rx) = (slot.tx_fid(request.tx, qs), slot.rx_fid(qs, request.rx));
    let (b_tx, b_rx) = (slot.tx_budget(request.tx, qs), slot.rx_budget(qs, request.rx));
    let mut out: Vec<(Action, Fidelity)> = Action::ALL
        .into_iter()
        .filter(|a| a.alpha_tx() <= b_tx && a.alpha_rx() <= b_rx)
        .map(|a| (a, e2e_fidelity(f_tx, f_rx, a)))
        .filter(|(_, f)| *f >= request.f_min)
        .collect();
    // Stable: equal fidelities keep action order.
    out.sort_by(|a, b| b.1.value().total_cmp(&a.1.value()));
    out
}

/// Solves the action-selection problem for `qs` exactly.
///
/// Among optimal plans, interchangeable requests (same endpoints and
/// threshold) give the better action to the lower id.
pub fn solve_p1(qs: usize, requests: &[Request], slot: &SlotState) -> ActionPlan {
    let mut candidates: Vec<(&Request, Vec<(Action, Fidelity)>)> =
        requests.iter().map(|r| (r, feasible_actions(qs, r, slot))).filter(|(_, acts)| !acts.is_empty()).collect();
    candidates.sort_by(|(ra, aa), (rb, ab)| {
        ab[0]
            .1
            .value()
            .total_cmp(&aa[0].1.value())
            .then(ra.tx.cmp(&rb.tx))
            .then(ra.rx.cmp(&rb.rx))
            .then(ra.f_min.value().total_cmp(&rb.f_min.value()))
            .then(ra.id.cmp(&rb.id))
    });

    let k = slot.num_tx();
    let m = slot.num_rx();
    let mut capacity: Vec<u32> = (0..k).map(|t| slot.tx_budget(t, qs)).collect();
    capacity.extend((0..m).map(|r| slot.rx_budget(qs, r)));
    let items: Vec<Item> = candidates
        .iter()
        .enumerate()
        .map(|(i, (r, acts))| Item {
            tx_group: r.tx,
            rx_group: r.rx,
            options: acts
                .iter()
                .map(|(a, f)| Opt {
                    tx_res: r.tx,
                    rx_res: k + r.rx,
                    a_tx: a.alpha_tx(),
                    a_rx: a.alpha_rx(),
                    score: f.value(),
                })
                .collect(),
            same_as_prev: i > 0 && candidates[i - 1].0.same_demand(r),
        })
        .collect();
    let problem = Problem {
        capacity,
        tx_groups: (0..k).map(|t| vec![t]).collect(),
        rx_groups: (0..m).map(|r| vec![k + r]).collect(),
        items,
    };
    let eval = |choice: &[Option<usize>]| {
        canonical_sum(choice.iter().zip(&candidates).filter_map(|(c, (_, acts))| c.map(|i| acts[i].1.value())))
    };
    let out = search::maximize(&problem, eval, Limits::default(), None);

    let mut choices: BTreeMap<usize, Option<Served>> = requests.iter().map(|r| (r.id, None)).collect();
    for (c, (r, acts)) in out.choice.iter().zip(&candidates) {
        if let Some(i) = c {
            let (action, fidelity) = acts[*i];
            choices.insert(r.id, Some(Served { action, fidelity }));
        }
    }
    let plan = ActionPlan { choices, utility: out.value };
    debug_assert_eq!(plan.check(qs, requests, slot), Ok(()));
    plan
}

/// Total utility of `qs` serving `requests`; zero for the empty set.
pub fn qs_utility(qs: usize, requests: &[Request], slot: &SlotState) -> f64 {
    solve_p1(qs, requests, slot).utility
}
