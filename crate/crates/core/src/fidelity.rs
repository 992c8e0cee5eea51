//! Werner-state fidelity calculus.
//!
//! Every link-level pair is a Werner state, so a single scalar fidelity
//! `F = (3W + 1) / 4` with `W` in `[0, 1]` describes it completely. Swapping
//! multiplies Werner parameters; distillation follows the Oxford protocol for
//! two identical input pairs. Only noiseless gates and measurements are modelled.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowest physical fidelity of a Werner state (`W = 0`).
pub const MIN_FIDELITY: f64 = 0.25;
/// Fidelity of a perfect Bell pair.
pub const MAX_FIDELITY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FidelityError {
    #[error("fidelity {0} outside [0.25, 1]")]
    OutOfRange(f64),
    #[error("Werner parameter {0} outside [0, 1]")]
    WernerOutOfRange(f64),
}

/// Fidelity of a Werner pair, always in `[0.25, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Fidelity(f64);

impl Fidelity {
    pub const PERFECT: Fidelity = Fidelity(MAX_FIDELITY);
    pub const MIXED: Fidelity = Fidelity(MIN_FIDELITY);

    pub fn new(value: f64) -> Result<Self, FidelityError> {
        if (MIN_FIDELITY..=MAX_FIDELITY).contains(&value) {
            Ok(Fidelity(value))
        } else {
            Err(FidelityError::OutOfRange(value))
        }
    }

    /// Wraps the result of a closed-form map that is mathematically inside
    /// `[0.25, 1]`; only last-ulp rounding is absorbed here.
    fn closed(value: f64) -> Self {
        debug_assert!(
            (MIN_FIDELITY - 1e-12..=MAX_FIDELITY + 1e-12).contains(&value),
            "closed-form fidelity {value} escaped its range"
        );
        Fidelity(value.clamp(MIN_FIDELITY, MAX_FIDELITY))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Werner parameter `W = (4F - 1) / 3`.
    #[inline]
    pub fn werner(self) -> f64 {
        (4.0 * self.0 - 1.0) / 3.0
    }
}

impl TryFrom<f64> for Fidelity {
    type Error = FidelityError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Fidelity::new(value)
    }
}

impl From<Fidelity> for f64 {
    fn from(f: Fidelity) -> f64 {
        f.0
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// How a switch turns one Tx-side and one Rx-side link into an end-to-end pair.
///
/// Distillation happens at most once per side and always before the swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    DirectSwap,
    TxDistillSwap,
    RxDistillSwap,
    BothDistillSwap,
}

impl Action {
    /// All actions in index order.
    pub const ALL: [Action; 4] =
        [Action::DirectSwap, Action::TxDistillSwap, Action::RxDistillSwap, Action::BothDistillSwap];

    /// Zero-based action index (the order of [`Action::ALL`]).
    pub fn index(self) -> usize {
        match self {
            Action::DirectSwap => 0,
            Action::TxDistillSwap => 1,
            Action::RxDistillSwap => 2,
            Action::BothDistillSwap => 3,
        }
    }

    /// Link-level pairs consumed on the Tx side.
    pub fn alpha_tx(self) -> u32 {
        match self {
            Action::DirectSwap | Action::RxDistillSwap => 1,
            Action::TxDistillSwap | Action::BothDistillSwap => 2,
        }
    }

    /// Link-level pairs consumed on the Rx side.
    pub fn alpha_rx(self) -> u32 {
        match self {
            Action::DirectSwap | Action::TxDistillSwap => 1,
            Action::RxDistillSwap | Action::BothDistillSwap => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::DirectSwap => "direct_swap",
            Action::TxDistillSwap => "tx_distill_swap",
            Action::RxDistillSwap => "rx_distill_swap",
            Action::BothDistillSwap => "both_distill_swap",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// Fidelity after swapping a Tx-side pair with an Rx-side pair.
pub fn swap_fidelity(f_tx: Fidelity, f_rx: Fidelity) -> Fidelity {
    Fidelity::closed(0.25 + 0.75 * f_tx.werner() * f_rx.werner())
}

/// Oxford-protocol output fidelity for two identical input pairs.
pub fn distill_fidelity(f: Fidelity) -> Fidelity {
    let x = f.value();
    #[cfg(not(feature = "fault-injection"))]
    let e = (1.0 - x) / 3.0;
    #[cfg(feature = "fault-injection")]
    let e = (1.0 - x) / 3.05;
    let num = x * x + e * e;
    let den = x * x + 2.0 * x * e + 5.0 * e * e;
    Fidelity::closed(num / den)
}

/// End-to-end fidelity a switch delivers when it serves a request with `action`.
pub fn e2e_fidelity(f_tx: Fidelity, f_rx: Fidelity, action: Action) -> Fidelity {
    match action {
        Action::DirectSwap => swap_fidelity(f_tx, f_rx),
        Action::TxDistillSwap => swap_fidelity(distill_fidelity(f_tx), f_rx),
        Action::RxDistillSwap => swap_fidelity(f_tx, distill_fidelity(f_rx)),
        Action::BothDistillSwap => swap_fidelity(distill_fidelity(f_tx), distill_fidelity(f_rx)),
    }
}

pub fn werner_to_fidelity(w: f64) -> Result<Fidelity, FidelityError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(FidelityError::WernerOutOfRange(w));
    }
    Ok(Fidelity::closed((3.0 * w + 1.0) / 4.0))
}

/// Sum of fidelities that depends only on the multiset of values.
///
/// Values are added in ascending order, so any two plans serving the same
/// fidelities report bit-identical utilities regardless of request order.
pub fn canonical_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().fold(0.0, |a, x| a + x)
}
