//! Two-to-one purification by joint stabilizer parity.
//!
//! Each protocol measures the parity of one stabilizer of the two-qubit graph
//! state across a kept pair (input 1) and a sacrificial pair (input 2), and
//! keeps the first pair when both copies agree.
//!
//! | stabilizer | detects        | rejected frames | accepted when                   |
//! |------------|----------------|-----------------|---------------------------------|
//! | `ZX`       | `Z` on `b`     | `ZZ`, `IZ`      | both or neither pair flips `b`  |
//! | `XZ`       | `Z` on `a`     | `ZI`, `ZZ`      | both or neither pair flips `a`  |
//! | `YY`       | odd `Z` count  | `ZI`, `IZ`      | both pairs have equal parity    |
//!
//! Conditioned on success the kept pair is left in these (unnormalised)
//! frames, in `[II, ZI, ZZ, IZ]` order:
//!
//! ```text
//! ZX: [w1w2 + x1x2,  z1z2 + y1y2,  z1y2 + y1z2,  x1w2 + w1x2]
//! XZ: [w1w2 + z1z2,  z1w2 + w1z2,  x1y2 + y1x2,  x1x2 + y1y2]
//! YY: [w1w2 + y1y2,  x1z2 + z1x2,  y1w2 + w1y2,  x1x2 + z1z2]
//! ```
//!
//! The entries of each map sum to that protocol's success probability, which
//! pins the labels: attaching the `ZX` map to `XZ` (or the reverse) gives
//! entries that sum to the wrong probability. The density-matrix circuits in
//! [`crate::oracle`] reproduce the pairing above: a bilateral-CNOT parity
//! circuit, with the kept pair returned in the `H (x) H` frame.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belldiag::ErrorVector;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stabilizer {
    ZX,
    XZ,
    YY,
}

impl Stabilizer {
    pub const ALL: [Stabilizer; 3] = [Stabilizer::ZX, Stabilizer::XZ, Stabilizer::YY];

    pub fn as_str(self) -> &'static str {
        match self {
            Stabilizer::ZX => "ZX",
            Stabilizer::XZ => "XZ",
            Stabilizer::YY => "YY",
        }
    }
}

impl fmt::Display for Stabilizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stabilizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "ZX" => Ok(Stabilizer::ZX),
            "XZ" => Ok(Stabilizer::XZ),
            "YY" => Ok(Stabilizer::YY),
            other => Err(Error::Schedule(format!("unknown stabilizer `{other}`"))),
        }
    }
}

/// Result of one purification attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurifyOutcome {
    /// Kept pair conditioned on success; `None` when success is impossible.
    pub kept: Option<ErrorVector>,
    pub p_success: f64,
}

impl PurifyOutcome {
    pub fn impossible() -> Self {
        PurifyOutcome {
            kept: None,
            p_success: 0.0,
        }
    }
}

/// Probability that the two parity outcomes agree.
pub fn success_prob(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> f64 {
    let [w1, x1, y1, z1] = e1.weights();
    let [w2, x2, y2, z2] = e2.weights();
    match stab {
        Stabilizer::ZX => (w1 + x1) * (w2 + x2) + (z1 + y1) * (z2 + y2),
        Stabilizer::XZ => (w1 + z1) * (w2 + z2) + (x1 + y1) * (x2 + y2),
        Stabilizer::YY => (w1 + y1) * (w2 + y2) + (x1 + z1) * (x2 + z2),
    }
}

/// Unnormalised kept-pair weights on the success branch.
pub fn kept_numerators(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> [f64; 4] {
    let [w1, x1, y1, z1] = e1.weights();
    let [w2, x2, y2, z2] = e2.weights();
    match stab {
        Stabilizer::ZX => [
            w1 * w2 + x1 * x2,
            z1 * z2 + y1 * y2,
            z1 * y2 + y1 * z2,
            x1 * w2 + w1 * x2,
        ],
        Stabilizer::XZ => [
            w1 * w2 + z1 * z2,
            z1 * w2 + w1 * z2,
            x1 * y2 + y1 * x2,
            x1 * x2 + y1 * y2,
        ],
        Stabilizer::YY => [
            w1 * w2 + y1 * y2,
            x1 * z2 + z1 * x2,
            y1 * w2 + w1 * y2,
            x1 * x2 + z1 * z2,
        ],
    }
}

/// Purifies `keep` against `sacrifice`. The output is normalised by the sum
/// of its own numerators, which is also the reported success probability.
pub fn purify(stab: Stabilizer, keep: &ErrorVector, sacrifice: &ErrorVector) -> PurifyOutcome {
    match ErrorVector::from_unnormalized(kept_numerators(stab, keep, sacrifice)) {
        Some((kept, p)) => PurifyOutcome {
            kept: Some(kept),
            p_success: p.min(1.0),
        },
        None => PurifyOutcome::impossible(),
    }
}
