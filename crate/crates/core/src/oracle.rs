//! Exhaustive reference solvers for small instances.
//!
//! These enumerate every assignment and share nothing with the
//! branch-and-bound path except the fidelity formulas and the summation
//! convention. Cost is exponential; keep instances tiny.

use std::collections::HashMap;

use crate::fidelity::{canonical_sum, e2e_fidelity, Action};
use crate::model::{Request, SlotState};

/// Maximum summed fidelity at `qs` over all `5^n` action-or-drop choices.
pub fn p1_brute_force(qs: usize, requests: &[Request], slot: &SlotState) -> f64 {
    let n = requests.len();
    assert!(n <= 8, "brute force over {n} requests is too large");
    let mut best = 0.0f64;
    let mut code = vec![0usize; n];
    let total = 5usize.pow(n as u32);
    for mut x in 0..total {
        for c in code.iter_mut() {
            *c = x % 5;
            x /= 5;
        }
        if let Some(v) = evaluate(qs, requests, &code, slot) {
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Value of one assignment (`4` = drop) or `None` if it breaks a threshold or budget.
fn evaluate(qs: usize, requests: &[Request], code: &[usize], slot: &SlotState) -> Option<f64> {
    let mut used_tx = vec![0u32; slot.num_tx()];
    let mut used_rx = vec![0u32; slot.num_rx()];
    let mut fids = Vec::with_capacity(requests.len());
    for (r, &c) in requests.iter().zip(code) {
        if c == 4 {
            continue;
        }
        let a = Action::ALL[c];
        let f = e2e_fidelity(slot.tx_fid(r.tx, qs), slot.rx_fid(qs, r.rx), a);
        if f < r.f_min {
            return None;
        }
        used_tx[r.tx] += a.alpha_tx();
        used_rx[r.rx] += a.alpha_rx();
        fids.push(f.value());
    }
    let tx_ok = used_tx.iter().enumerate().all(|(k, &u)| u <= slot.tx_budget(k, qs));
    let rx_ok = used_rx.iter().enumerate().all(|(m, &u)| u <= slot.rx_budget(qs, m));
    (tx_ok && rx_ok).then(|| canonical_sum(fids))
}

/// Maximum total utility over all `(Q + 1)^R` request-to-switch assignments,
/// each switch solving its own problem by brute force. Per-switch utilities
/// are added in switch order.
pub fn optimal_brute_force(requests: &[Request], slot: &SlotState) -> f64 {
    let r = requests.len();
    assert!(r <= 8, "brute force over {r} requests is too large");
    let q = slot.num_qs();
    let mut memo: HashMap<(usize, u32), f64> = HashMap::new();
    let mut p1 = |qs: usize, mask: u32| -> f64 {
        *memo.entry((qs, mask)).or_insert_with(|| {
            let subset: Vec<Request> =
                requests.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, r)| *r).collect();
            p1_brute_force(qs, &subset, slot)
        })
    };
    let mut best = 0.0f64;
    let total = (q + 1).pow(r as u32);
    for mut x in 0..total {
        let mut masks = vec![0u32; q];
        for i in 0..r {
            let c = x % (q + 1);
            x /= q + 1;
            if c < q {
                masks[c] |= 1 << i;
            }
        }
        let mut v = 0.0;
        for (qs, &mask) in masks.iter().enumerate() {
            v += p1(qs, mask);
        }
        if v > best {
            best = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::Fidelity;

    #[test]
    fn tiny_cases() {
        let slot = SlotState::uniform(1, 1, 1, 2, Fidelity::new(0.8).unwrap());
        let r = Request::new(0, 0, 0, 0.7).unwrap();
        // Only the double distillation reaches 0.7.
        let v = p1_brute_force(0, &[r], &slot);
        assert!((v - 0.711228).abs() < 1e-6);
        assert_eq!(p1_brute_force(0, &[], &slot), 0.0);
        assert_eq!(optimal_brute_force(&[r], &slot), v);
    }
}
