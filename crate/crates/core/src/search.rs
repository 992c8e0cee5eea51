//! Depth-first branch-and-bound for capacity-constrained assignment.
//!
//! Each item either takes one of its options or is dropped. An option draws
//! `a_tx` units from one Tx-side resource and `a_rx` units from one Rx-side
//! resource. Resources are grouped by end node; every served item consumes at
//! least one unit of its node group, which gives the capacity-aware bound.

use web_time::{Duration, Instant};

/// Pruning slack. A branch survives only if it could beat the incumbent by
/// more than this.
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct Opt {
    pub tx_res: usize,
    pub rx_res: usize,
    /// Units consumed, 1 or 2.
    pub a_tx: u32,
    pub a_rx: u32,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Item {
    pub tx_group: usize,
    pub rx_group: usize,
    /// Sorted by preference; the search tries them in this order.
    pub options: Vec<Opt>,
    /// Interchangeable with the previous item: its option index may not be
    /// smaller than the one chosen there (drop counts as `options.len()`).
    pub same_as_prev: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub capacity: Vec<u32>,
    pub tx_groups: Vec<Vec<usize>>,
    pub rx_groups: Vec<Vec<usize>>,
    pub items: Vec<Item>,
}

/// Search budget. `None` everywhere means run to completion.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    pub time: Option<Duration>,
    pub max_nodes: Option<u64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    /// Option index per item, `None` for dropped.
    pub choice: Vec<Option<usize>>,
    pub value: f64,
    /// The whole tree was explored (or pruned), so `value` is optimal.
    pub complete: bool,
    #[allow(dead_code)]
    pub nodes: u64,
    /// Upper bound on any feasible value.
    pub root_bound: f64,
}

struct Search<'a, F> {
    p: &'a Problem,
    eval: F,
    remaining: Vec<u32>,
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_value: f64,
    nodes: u64,
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    aborted: bool,
    units_tx: Vec<(usize, f64)>,
    units_rx: Vec<(usize, f64)>,
    group_left: Vec<u32>,
}

/// Splits an item's value over the link units it may consume on one side:
/// the best one-unit option, then the increment of a second unit. Without a
/// one-unit option the value is spread over two units. Any feasible choice
/// scores at most the sum of the units it uses.
fn push_units(units: &mut Vec<(usize, f64)>, group: usize, one: f64, best: f64) {
    if one > 0.0 {
        units.push((group, one));
        if best > one {
            units.push((group, best - one));
        }
    } else {
        units.push((group, best / 2.0));
        units.push((group, best / 2.0));
    }
}

/// `warm` is an optional feasible starting incumbent (option index per item).
pub(crate) fn maximize<F>(p: &Problem, eval: F, limits: Limits, warm: Option<Vec<Option<usize>>>) -> Outcome
where
    F: Fn(&[Option<usize>]) -> f64,
{
    let n = p.items.len();
    debug_assert!(p
        .items
        .iter()
        .flat_map(|i| &i.options)
        .all(|o| (1..=2).contains(&o.a_tx) && (1..=2).contains(&o.a_rx)));
    let mut s = Search {
        p,
        eval,
        remaining: p.capacity.clone(),
        current: vec![None; n],
        best: vec![None; n],
        best_value: 0.0,
        nodes: 0,
        deadline: limits.time.map(|t| Instant::now() + t),
        max_nodes: limits.max_nodes,
        aborted: false,
        units_tx: Vec::with_capacity(2 * n),
        units_rx: Vec::with_capacity(2 * n),
        group_left: Vec::new(),
    };
    s.best_value = (s.eval)(&s.best);
    if let Some(w) = warm {
        debug_assert!(s.feasible(&w), "warm start violates capacity");
        let v = (s.eval)(&w);
        if v > s.best_value {
            s.best_value = v;
            s.best = w;
        }
    }
    let root_bound = s.bound(0);
    s.dfs(0, 0.0);
    Outcome { choice: s.best, value: s.best_value, complete: !s.aborted, nodes: s.nodes, root_bound }
}

impl<F> Search<'_, F>
where
    F: Fn(&[Option<usize>]) -> f64,
{
    fn fits(&self, o: &Opt) -> bool {
        o.a_tx <= self.remaining[o.tx_res] && o.a_rx <= self.remaining[o.rx_res]
    }

    fn feasible(&self, choice: &[Option<usize>]) -> bool {
        let mut left = self.p.capacity.clone();
        for (c, item) in choice.iter().zip(&self.p.items) {
            if let Some(i) = c {
                let o = &item.options[*i];
                if left[o.tx_res] < o.a_tx || left[o.rx_res] < o.a_rx {
                    return false;
                }
                left[o.tx_res] -= o.a_tx;
                left[o.rx_res] -= o.a_rx;
            }
        }
        choice.len() == self.p.items.len()
    }

    /// Upper bound on the score still collectable from items `depth..`.
    fn bound(&mut self, depth: usize) -> f64 {
        let p = self.p;
        self.units_tx.clear();
        self.units_rx.clear();
        let mut plain = 0.0;
        for item in p.items.iter().skip(depth) {
            let mut best = f64::NEG_INFINITY;
            let (mut one_tx, mut one_rx) = (0.0f64, 0.0f64);
            for o in item.options.iter().filter(|o| self.fits(o)) {
                best = best.max(o.score);
                if o.a_tx == 1 {
                    one_tx = one_tx.max(o.score);
                }
                if o.a_rx == 1 {
                    one_rx = one_rx.max(o.score);
                }
            }
            if best == f64::NEG_INFINITY {
                continue;
            }
            plain += best;
            push_units(&mut self.units_tx, item.tx_group, one_tx, best);
            push_units(&mut self.units_rx, item.rx_group, one_rx, best);
        }
        if plain == 0.0 {
            return 0.0;
        }
        let tx = self.grouped_bound(true);
        let rx = self.grouped_bound(false);
        plain.min(tx).min(rx)
    }

    /// Each node group spends its units left on the most valuable ones.
    fn grouped_bound(&mut self, tx_side: bool) -> f64 {
        let (groups, units) =
            if tx_side { (&self.p.tx_groups, &mut self.units_tx) } else { (&self.p.rx_groups, &mut self.units_rx) };
        self.group_left.clear();
        for g in groups {
            let left: u32 = g.iter().map(|&r| self.remaining[r]).sum();
            self.group_left.push(left);
        }
        units.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut total = 0.0;
        for &(g, v) in units.iter() {
            if self.group_left[g] > 0 {
                self.group_left[g] -= 1;
                total += v;
            }
        }
        total
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if let Some(max) = self.max_nodes {
            if self.nodes >= max {
                self.aborted = true;
            }
        }
        if self.nodes % 1024 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    fn dfs(&mut self, depth: usize, partial: f64) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        if depth == self.p.items.len() {
            let v = (self.eval)(&self.current);
            if v > self.best_value {
                self.best_value = v;
                self.best.clone_from(&self.current);
            }
            return;
        }
        if partial + self.bound(depth) <= self.best_value + PRUNE_EPS {
            return;
        }
        let p = self.p;
        let item = &p.items[depth];
        let min_idx = if item.same_as_prev && depth > 0 {
            self.current[depth - 1].unwrap_or(p.items[depth - 1].options.len())
        } else {
            0
        };
        for (idx, o) in item.options.iter().enumerate().skip(min_idx) {
            if !self.fits(o) {
                continue;
            }
            self.remaining[o.tx_res] -= o.a_tx;
            self.remaining[o.rx_res] -= o.a_rx;
            self.current[depth] = Some(idx);
            self.dfs(depth + 1, partial + o.score);
            self.current[depth] = None;
            self.remaining[o.tx_res] += o.a_tx;
            self.remaining[o.rx_res] += o.a_rx;
            if self.aborted {
                return;
            }
        }
        // Drop.
        self.dfs(depth + 1, partial);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(tx: usize, rx: usize, scores: &[(u32, u32, f64)]) -> Item {
        Item {
            tx_group: tx,
            rx_group: rx,
            options: scores
                .iter()
                .map(|&(a_tx, a_rx, score)| Opt { tx_res: tx, rx_res: 2 + rx, a_tx, a_rx, score })
                .collect(),
            same_as_prev: false,
        }
    }

    fn sum_eval(p: &Problem) -> impl Fn(&[Option<usize>]) -> f64 + '_ {
        move |c: &[Option<usize>]| {
            crate::fidelity::canonical_sum(c.iter().zip(&p.items).filter_map(|(c, it)| c.map(|i| it.options[i].score)))
        }
    }

    #[test]
    fn respects_shared_capacity() {
        // Two items on the same Tx resource with one unit: only one can be served.
        let p = Problem {
            capacity: vec![1, 5, 5, 5],
            tx_groups: vec![vec![0], vec![1]],
            rx_groups: vec![vec![2], vec![3]],
            items: vec![item(0, 0, &[(1, 1, 0.7)]), item(0, 1, &[(1, 1, 0.9)])],
        };
        let out = maximize(&p, sum_eval(&p), Limits::default(), None);
        assert!(out.complete);
        assert_eq!(out.choice, vec![None, Some(0)]);
        assert_eq!(out.value, 0.9);
        assert!(out.root_bound >= out.value);
    }

    #[test]
    fn node_limit_aborts() {
        let items: Vec<Item> = (0..12).map(|i| item(i % 2, i % 2, &[(1, 1, 0.6), (2, 1, 0.7)])).collect();
        let p = Problem {
            capacity: vec![6, 6, 6, 6],
            tx_groups: vec![vec![0], vec![1]],
            rx_groups: vec![vec![2], vec![3]],
            items,
        };
        let out = maximize(&p, sum_eval(&p), Limits { time: None, max_nodes: Some(5) }, None);
        assert!(!out.complete);
        let full = maximize(&p, sum_eval(&p), Limits::default(), None);
        assert!(full.complete);
        assert!(full.value >= out.value);
    }
}
