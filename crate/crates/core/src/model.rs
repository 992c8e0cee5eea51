//! Network geometry, per-slot link realization and request generation.

use std::collections::HashMap;
use std::ops::{Index, IndexMut};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fidelity::{Fidelity, FidelityError};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("{name} = {value} is out of range: {why}")]
    Invalid { name: &'static str, value: f64, why: &'static str },
    #[error("matrix {name} has shape {got:?}, expected {want:?}")]
    Shape { name: &'static str, got: (usize, usize), want: (usize, usize) },
    #[error("count {count} on {name} exceeds attempts n = {n}")]
    CountExceedsAttempts { name: &'static str, count: u32, n: u32 },
    #[error("request {id} references node outside the topology")]
    BadRequest { id: usize },
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error("invalid scenario JSON: {0}")]
    Json(String),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Grid { rows, cols, data: vec![value; rows * cols] }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Grid { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Grid { rows: n_rows, cols: n_cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of {}x{}", self.rows, self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of {}x{}", self.rows, self.cols);
        &mut self.data[r * self.cols + c]
    }
}

fn default_k() -> usize {
    5
}
fn default_m() -> usize {
    5
}
fn default_q() -> usize {
    3
}
fn default_n() -> u32 {
    10
}
fn default_l0() -> f64 {
    0.54
}
fn default_dist_min() -> f64 {
    0.1
}
fn default_dist_max() -> f64 {
    1.0
}
fn default_fmin_low() -> f64 {
    0.5
}
fn default_fmin_high() -> f64 {
    0.8
}
fn default_link_fid_low() -> f64 {
    0.83
}
fn default_link_fid_high() -> f64 {
    0.99
}
fn default_true() -> bool {
    true
}

/// Scenario parameters. Every field has a default matching the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    #[serde(rename = "K", default = "default_k")]
    pub num_tx: usize,
    #[serde(rename = "M", default = "default_m")]
    pub num_rx: usize,
    #[serde(rename = "Q", default = "default_q")]
    pub num_qs: usize,
    /// Generation attempts per link per slot.
    #[serde(rename = "n", default = "default_n")]
    pub attempts: u32,
    #[serde(rename = "L0_km", default = "default_l0")]
    pub attenuation_km: f64,
    #[serde(default = "default_dist_min")]
    pub dist_min_km: f64,
    #[serde(default = "default_dist_max")]
    pub dist_max_km: f64,
    #[serde(default = "default_fmin_low")]
    pub fmin_low: f64,
    #[serde(default = "default_fmin_high")]
    pub fmin_high: f64,
    #[serde(default = "default_link_fid_low")]
    pub link_fid_low: f64,
    #[serde(default = "default_link_fid_high")]
    pub link_fid_high: f64,
    /// Master seed.
    #[serde(default)]
    pub seed: u64,
    /// Draw `f_min` once per `(tx, rx)` pair per slot (repeated requests share
    /// it) instead of independently per request.
    #[serde(default = "default_true")]
    pub fmin_per_pair: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ScenarioParams {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let p: ScenarioParams = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn with_size(mut self, k: usize, m: usize, q: usize) -> Self {
        self.num_tx = k;
        self.num_rx = m;
        self.num_qs = q;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("K", self.num_tx), ("M", self.num_rx), ("Q", self.num_qs)] {
            if v == 0 {
                return Err(ModelError::ZeroCount(name));
            }
        }
        if self.attempts == 0 {
            return Err(ModelError::ZeroCount("n"));
        }
        if !(self.attenuation_km > 0.0) || !self.attenuation_km.is_finite() {
            return Err(ModelError::Invalid { name: "L0_km", value: self.attenuation_km, why: "must be positive" });
        }
        if !(self.dist_min_km > 0.0) {
            return Err(ModelError::Invalid { name: "dist_min_km", value: self.dist_min_km, why: "must be positive" });
        }
        if !(self.dist_max_km >= self.dist_min_km) || !self.dist_max_km.is_finite() {
            return Err(ModelError::Invalid {
                name: "dist_max_km",
                value: self.dist_max_km,
                why: "must be >= dist_min_km",
            });
        }
        check_fid_range("fmin_low", "fmin_high", self.fmin_low, self.fmin_high)?;
        check_fid_range("link_fid_low", "link_fid_high", self.link_fid_low, self.link_fid_high)?;
        Ok(())
    }
}

fn check_fid_range(lo_name: &'static str, hi_name: &'static str, lo: f64, hi: f64) -> Result<(), ModelError> {
    Fidelity::new(lo).map_err(|_| ModelError::Invalid { name: lo_name, value: lo, why: "must lie in [0.25, 1]" })?;
    Fidelity::new(hi).map_err(|_| ModelError::Invalid { name: hi_name, value: hi, why: "must lie in [0.25, 1]" })?;
    if hi < lo {
        return Err(ModelError::Invalid { name: hi_name, value: hi, why: "must be >= its lower bound" });
    }
    Ok(())
}

/// Static network geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// Tx node to switch link lengths, `K x Q`, km.
    pub d_tx: Grid<f64>,
    /// Switch to Rx node link lengths, `Q x M`, km.
    pub d_rx: Grid<f64>,
    pub attempts: u32,
    pub attenuation_km: f64,
}

impl Topology {
    pub fn new(d_tx: Grid<f64>, d_rx: Grid<f64>, attempts: u32, attenuation_km: f64) -> Result<Self, ModelError> {
        let (k, q) = d_tx.shape();
        let (q2, m) = d_rx.shape();
        if k == 0 || q == 0 || m == 0 {
            return Err(ModelError::ZeroCount("K, M and Q"));
        }
        if q2 != q {
            return Err(ModelError::Shape { name: "d_rx", got: (q2, m), want: (q, m) });
        }
        if attempts == 0 {
            return Err(ModelError::ZeroCount("n"));
        }
        if !(attenuation_km > 0.0) {
            return Err(ModelError::Invalid { name: "L0_km", value: attenuation_km, why: "must be positive" });
        }
        if let Some(&d) = d_tx.iter().chain(d_rx.iter()).find(|d| !(**d > 0.0)) {
            return Err(ModelError::Invalid { name: "distance", value: d, why: "must be positive" });
        }
        Ok(Topology { d_tx, d_rx, attempts, attenuation_km })
    }

    pub fn num_tx(&self) -> usize {
        self.d_tx.shape().0
    }

    pub fn num_qs(&self) -> usize {
        self.d_tx.shape().1
    }

    pub fn num_rx(&self) -> usize {
        self.d_rx.shape().1
    }
}

/// Heralded generation success probability `exp(-d / L0)` of one attempt.
pub fn link_success_prob(d_km: f64, l0_km: f64) -> Result<f64, ModelError> {
    if !(d_km >= 0.0) {
        return Err(ModelError::Invalid { name: "distance", value: d_km, why: "must be non-negative" });
    }
    if !(l0_km > 0.0) {
        return Err(ModelError::Invalid { name: "L0_km", value: l0_km, why: "must be positive" });
    }
    Ok((-d_km / l0_km).exp())
}

/// Draws every link length i.i.d. uniform on `[dist_min_km, dist_max_km]`.
pub fn sample_topology<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Result<Topology, ModelError> {
    params.validate()?;
    let (lo, hi) = (params.dist_min_km, params.dist_max_km);
    let d_tx = Grid::from_fn(params.num_tx, params.num_qs, |_, _| rng.random_range(lo..=hi));
    let d_rx = Grid::from_fn(params.num_qs, params.num_rx, |_, _| rng.random_range(lo..=hi));
    Topology::new(d_tx, d_rx, params.attempts, params.attenuation_km)
}

/// Link-level resources realized in one time slot.
///
/// All pairs on one link share the link's fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotState {
    /// `K x Q` pair counts between Tx nodes and switches.
    pub n_tx: Grid<u32>,
    pub f_tx: Grid<Fidelity>,
    /// `Q x M` pair counts between switches and Rx nodes.
    pub n_rx: Grid<u32>,
    pub f_rx: Grid<Fidelity>,
}

impl SlotState {
    pub fn new(
        n_tx: Grid<u32>,
        f_tx: Grid<Fidelity>,
        n_rx: Grid<u32>,
        f_rx: Grid<Fidelity>,
    ) -> Result<Self, ModelError> {
        if f_tx.shape() != n_tx.shape() {
            return Err(ModelError::Shape { name: "f_tx", got: f_tx.shape(), want: n_tx.shape() });
        }
        if f_rx.shape() != n_rx.shape() {
            return Err(ModelError::Shape { name: "f_rx", got: f_rx.shape(), want: n_rx.shape() });
        }
        let (k, q) = n_tx.shape();
        let (q2, m) = n_rx.shape();
        if k == 0 || q == 0 || m == 0 {
            return Err(ModelError::ZeroCount("K, M and Q"));
        }
        if q2 != q {
            return Err(ModelError::Shape { name: "n_rx", got: (q2, m), want: (q, m) });
        }
        Ok(SlotState { n_tx, f_tx, n_rx, f_rx })
    }

    /// Every link holds `count` pairs of fidelity `fid`.
    pub fn uniform(k: usize, m: usize, q: usize, count: u32, fid: Fidelity) -> Self {
        SlotState {
            n_tx: Grid::filled(k, q, count),
            f_tx: Grid::filled(k, q, fid),
            n_rx: Grid::filled(q, m, count),
            f_rx: Grid::filled(q, m, fid),
        }
    }

    /// Fails if any count exceeds the attempt count of `topology`.
    pub fn check_against(&self, topology: &Topology) -> Result<(), ModelError> {
        let n = topology.attempts;
        for (name, grid) in [("n_tx", &self.n_tx), ("n_rx", &self.n_rx)] {
            if let Some(&count) = grid.iter().find(|c| **c > n) {
                return Err(ModelError::CountExceedsAttempts { name, count, n });
            }
        }
        Ok(())
    }

    pub fn num_tx(&self) -> usize {
        self.n_tx.shape().0
    }

    pub fn num_qs(&self) -> usize {
        self.n_tx.shape().1
    }

    pub fn num_rx(&self) -> usize {
        self.n_rx.shape().1
    }

    #[inline]
    pub fn tx_budget(&self, k: usize, q: usize) -> u32 {
        self.n_tx[(k, q)]
    }

    #[inline]
    pub fn rx_budget(&self, q: usize, m: usize) -> u32 {
        self.n_rx[(q, m)]
    }

    #[inline]
    pub fn tx_fid(&self, k: usize, q: usize) -> Fidelity {
        self.f_tx[(k, q)]
    }

    #[inline]
    pub fn rx_fid(&self, q: usize, m: usize) -> Fidelity {
        self.f_rx[(q, m)]
    }
}

/// Count of successes in `attempts` Bernoulli trials, one uniform draw each.
fn bernoulli_count<R: Rng + ?Sized>(rng: &mut R, attempts: u32, p: f64) -> u32 {
    (0..attempts).map(|_| u32::from(rng.random::<f64>() < p)).sum()
}

/// Realizes one slot: binomial pair counts and uniform link fidelities.
///
/// Draw order is fixed: Tx counts, Tx fidelities, Rx counts, Rx fidelities,
/// each row-major.
pub fn sample_slot<R: Rng + ?Sized>(
    topology: &Topology,
    params: &ScenarioParams,
    rng: &mut R,
) -> Result<SlotState, ModelError> {
    let n = topology.attempts;
    let l0 = topology.attenuation_km;
    let (lo, hi) = (params.link_fid_low, params.link_fid_high);
    check_fid_range("link_fid_low", "link_fid_high", lo, hi)?;
    let (k, q) = topology.d_tx.shape();
    let m = topology.num_rx();

    let mut n_tx = Grid::filled(k, q, 0u32);
    for r in 0..k {
        for c in 0..q {
            n_tx[(r, c)] = bernoulli_count(rng, n, link_success_prob(topology.d_tx[(r, c)], l0)?);
        }
    }
    let f_tx = Grid::from_fn(k, q, |_, _| Fidelity::new(rng.random_range(lo..=hi)).expect("validated range"));
    let mut n_rx = Grid::filled(q, m, 0u32);
    for r in 0..q {
        for c in 0..m {
            n_rx[(r, c)] = bernoulli_count(rng, n, link_success_prob(topology.d_rx[(r, c)], l0)?);
        }
    }
    let f_rx = Grid::from_fn(q, m, |_, _| Fidelity::new(rng.random_range(lo..=hi)).expect("validated range"));
    SlotState::new(n_tx, f_tx, n_rx, f_rx)
}

/// A demand for one end-to-end pair from Tx node `tx` to Rx node `rx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: usize,
    pub tx: usize,
    pub rx: usize,
    pub f_min: Fidelity,
}

impl Request {
    pub fn new(id: usize, tx: usize, rx: usize, f_min: f64) -> Result<Self, ModelError> {
        Ok(Request { id, tx, rx, f_min: Fidelity::new(f_min)? })
    }

    /// Same endpoints and same threshold, so interchangeable in any plan.
    pub fn same_demand(&self, other: &Request) -> bool {
        self.tx == other.tx && self.rx == other.rx && self.f_min == other.f_min
    }
}

/// Draws `count` requests with uniform endpoints and ids `0..count`.
///
/// Per request the draw order is tx, rx, then `f_min` if one is needed.
pub fn sample_requests<R: Rng + ?Sized>(
    count: usize,
    params: &ScenarioParams,
    rng: &mut R,
) -> Result<Vec<Request>, ModelError> {
    params.validate()?;
    let (lo, hi) = (params.fmin_low, params.fmin_high);
    let mut shared: HashMap<(usize, usize), Fidelity> = HashMap::new();
    let mut out = Vec::with_capacity(count);
    for id in 0..count {
        let tx = rng.random_range(0..params.num_tx);
        let rx = rng.random_range(0..params.num_rx);
        let f_min = if params.fmin_per_pair {
            *shared
                .entry((tx, rx))
                .or_insert_with(|| Fidelity::new(rng.random_range(lo..=hi)).expect("validated range"))
        } else {
            Fidelity::new(rng.random_range(lo..=hi)).expect("validated range")
        };
        out.push(Request { id, tx, rx, f_min });
    }
    Ok(out)
}

/// Fails if any request points outside the slot's node sets.
pub fn check_requests(requests: &[Request], slot: &SlotState) -> Result<(), ModelError> {
    match requests.iter().find(|r| r.tx >= slot.num_tx() || r.rx >= slot.num_rx()) {
        Some(r) => Err(ModelError::BadRequest { id: r.id }),
        None => Ok(()),
    }
}

/// One fully sampled single-slot problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub topology: Topology,
    pub slot: SlotState,
    pub requests: Vec<Request>,
}

impl Instance {
    /// Samples topology, slot and `r` requests from the streams of `trial_seed`.
    /// The same seed yields the same topology and slot for every `r`, and the
    /// requests for a smaller `r` are a prefix of those for a larger one.
    pub fn sample(params: &ScenarioParams, r: usize, trial_seed: u64) -> Result<Self, ModelError> {
        let topology = sample_topology(params, &mut rng::stream(trial_seed, Stream::Topology))?;
        let slot = sample_slot(&topology, params, &mut rng::stream(trial_seed, Stream::Slot))?;
        let requests = sample_requests(r, params, &mut rng::stream(trial_seed, Stream::Requests))?;
        Ok(Instance { topology, slot, requests })
    }

    /// Short stable hash of every sampled value.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let s = &self.slot;
        for g in [&self.topology.d_tx, &self.topology.d_rx] {
            g.iter().for_each(|d| h.update(d.to_le_bytes()));
        }
        for g in [&s.n_tx, &s.n_rx] {
            g.iter().for_each(|c| h.update(c.to_le_bytes()));
        }
        for g in [&s.f_tx, &s.f_rx] {
            g.iter().for_each(|f| h.update(f.value().to_le_bytes()));
        }
        for r in &self.requests {
            h.update((r.id as u64).to_le_bytes());
            h.update((r.tx as u64).to_le_bytes());
            h.update((r.rx as u64).to_le_bytes());
            h.update(r.f_min.value().to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    #[test]
    fn success_prob_examples() {
        assert_eq!(link_success_prob(0.0, 0.54).unwrap(), 1.0);
        assert_abs_diff_eq!(link_success_prob(0.54, 0.54).unwrap(), 0.367879, epsilon = 1e-6);
        // exp(-1/0.54)
        assert_abs_diff_eq!(link_success_prob(1.0, 0.54).unwrap(), 0.156946, epsilon = 1e-6);
        assert!(link_success_prob(-0.1, 0.54).is_err());
        assert!(link_success_prob(0.1, 0.0).is_err());
    }

    #[test]
    fn defaults_match_reference_setup() {
        let p = ScenarioParams::default();
        assert_eq!((p.num_tx, p.num_rx, p.num_qs, p.attempts), (5, 5, 3, 10));
        assert_eq!(p.attenuation_km, 0.54);
        assert_eq!((p.dist_min_km, p.dist_max_km), (0.1, 1.0));
        assert_eq!((p.fmin_low, p.fmin_high), (0.5, 0.8));
        assert_eq!((p.link_fid_low, p.link_fid_high), (0.83, 0.99));
        assert!(p.fmin_per_pair);
    }

    #[test]
    fn json_config_keys() {
        let p = ScenarioParams::from_json(r#"{"K": 3, "M": 4, "Q": 2, "n": 7, "L0_km": 0.6, "seed": 11}"#).unwrap();
        assert_eq!((p.num_tx, p.num_rx, p.num_qs, p.attempts, p.seed), (3, 4, 2, 7, 11));
        assert!(ScenarioParams::from_json(r#"{"K": 3, "bogus": 1}"#).is_err());
        assert!(ScenarioParams::from_json(r#"{"Q": 0}"#).is_err());
        assert!(ScenarioParams::from_json(r#"{"fmin_low": 0.9, "fmin_high": 0.8}"#).is_err());
        assert!(ScenarioParams::from_json(r#"{"link_fid_low": 0.1}"#).is_err());
    }

    #[test]
    fn topology_is_deterministic_and_in_range() {
        let p = ScenarioParams::default();
        let a = sample_topology(&p, &mut rng(5)).unwrap();
        let b = sample_topology(&p, &mut rng(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.d_tx.iter().chain(a.d_rx.iter()).all(|d| (0.1..=1.0).contains(d)));
        assert_eq!((a.num_tx(), a.num_qs(), a.num_rx()), (5, 3, 5));
    }

    #[test]
    fn mean_distance_is_midpoint() {
        let p = ScenarioParams::default();
        let mut r = rng(1);
        let mut sum = 0.0;
        let mut cnt = 0usize;
        for _ in 0..10_000 {
            let t = sample_topology(&p, &mut r).unwrap();
            for d in t.d_tx.iter().chain(t.d_rx.iter()) {
                sum += d;
                cnt += 1;
            }
        }
        assert_abs_diff_eq!(sum / cnt as f64, 0.55, epsilon = 0.02);
    }

    #[test]
    fn zero_length_links_always_succeed() {
        let topo = Topology::new(Grid::filled(2, 2, 1e-12), Grid::filled(2, 2, 1e-12), 10, 0.54).unwrap();
        let p = ScenarioParams::default();
        let mut r = rng(3);
        for _ in 0..100 {
            let s = sample_slot(&topo, &p, &mut r).unwrap();
            assert!(s.n_tx.iter().chain(s.n_rx.iter()).all(|c| *c == 10));
        }
    }

    #[test]
    fn slot_ranges_and_mean_count() {
        let topo = Topology::new(Grid::filled(1, 1, 0.54), Grid::filled(1, 1, 0.54), 10, 0.54).unwrap();
        let p = ScenarioParams::default();
        let mut r = rng(4);
        let mut total = 0u64;
        let slots = 10_000;
        for _ in 0..slots {
            let s = sample_slot(&topo, &p, &mut r).unwrap();
            s.check_against(&topo).unwrap();
            assert!(s.f_tx.iter().chain(s.f_rx.iter()).all(|f| (0.83..=0.99).contains(&f.value())));
            total += u64::from(s.n_tx[(0, 0)]);
        }
        // n * e^-1 = 3.679
        assert_abs_diff_eq!(total as f64 / slots as f64, 3.679, epsilon = 0.1);
    }

    #[test]
    fn requests_share_fmin_per_pair() {
        let p = ScenarioParams::default().with_size(2, 2, 1);
        assert!(sample_requests(0, &p, &mut rng(0)).unwrap().is_empty());
        let reqs = sample_requests(50, &p, &mut rng(8)).unwrap();
        assert!(reqs.iter().all(|r| (0.5..=0.8).contains(&r.f_min.value())));
        assert!(reqs.iter().enumerate().all(|(i, r)| r.id == i && r.tx < 2 && r.rx < 2));
        for a in &reqs {
            for b in &reqs {
                if a.tx == b.tx && a.rx == b.rx {
                    assert_eq!(a.f_min, b.f_min);
                }
            }
        }
    }

    #[test]
    fn independent_fmin_mode() {
        let mut p = ScenarioParams::default().with_size(1, 1, 1);
        p.fmin_per_pair = false;
        let reqs = sample_requests(10, &p, &mut rng(8)).unwrap();
        assert!(reqs.windows(2).any(|w| w[0].f_min != w[1].f_min));
    }

    #[test]
    fn instance_prefix_property() {
        let p = ScenarioParams::default();
        let small = Instance::sample(&p, 5, 77).unwrap();
        let big = Instance::sample(&p, 20, 77).unwrap();
        assert_eq!(small.slot, big.slot);
        assert_eq!(small.requests[..], big.requests[..5]);
        assert_ne!(small.fingerprint(), big.fingerprint());
        assert_eq!(big.fingerprint(), Instance::sample(&p, 20, 77).unwrap().fingerprint());
        assert_eq!(big.fingerprint().len(), 16);
    }

    #[test]
    fn topology_validation() {
        assert!(Topology::new(Grid::filled(2, 2, 0.5), Grid::filled(3, 2, 0.5), 10, 0.54).is_err());
        assert!(Topology::new(Grid::filled(2, 2, 0.0), Grid::filled(2, 2, 0.5), 10, 0.54).is_err());
        assert!(Topology::new(Grid::filled(2, 2, 0.5), Grid::filled(2, 2, 0.5), 0, 0.54).is_err());
    }
}
