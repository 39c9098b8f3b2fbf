//! Bell-diagonal error vectors on the two-qubit graph state.
//!
//! A noisy pair is a mixture of the graph state `CZ|++>` hit by one of the
//! four Pauli frames `II`, `ZI`, `ZZ`, `IZ`. Any single-qubit Pauli on either
//! end maps onto one of these frames (`I_a X_b = Z_a I_b`, `I_a Y_b = Z_a Z_b`),
//! so the pair is fully described by the weight vector `[w, x, y, z]` in that
//! order.
//!
//! The four frames form a Klein four-group under multiplication. Every channel
//! here is a convex combination of group translations, and entanglement
//! swapping is group convolution, so all operations commute and are
//! diagonalised by the group characters (see [`Characters`]).

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Allowed deviation of the component sum from 1.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Negative round-off at or above `-CLAMP_TOLERANCE` is clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-15;

/// Index of each Pauli frame in the weight vector.
pub const II: usize = 0;
pub const ZI: usize = 1;
pub const ZZ: usize = 2;
pub const IZ: usize = 3;

/// Group product of two frames given as indices into `[II, ZI, ZZ, IZ]`.
#[inline]
pub fn frame_product(a: usize, b: usize) -> usize {
    // (z_a, z_b) bit pairs: II=00, ZI=10, ZZ=11, IZ=01
    const BITS: [u8; 4] = [0b00, 0b10, 0b11, 0b01];
    const INDEX: [usize; 4] = [II, IZ, ZI, ZZ];
    INDEX[(BITS[a] ^ BITS[b]) as usize]
}

/// Which end of the pair a single-qubit channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    /// Frame produced by a `Z` error on this side.
    fn z_frame(self) -> usize {
        match self {
            Side::A => ZI,
            Side::B => IZ,
        }
    }
}

/// How a depolarizing parameter `p` is split over the Pauli errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepolarizingConvention {
    /// `p` is the total error probability: `X`, `Y`, `Z` each with `p/3`.
    #[default]
    ThirdPerPauli,
    /// `rho -> (1-p) rho + p I/2`: `X`, `Y`, `Z` each with `p/4`.
    QuarterPerPauli,
}

impl DepolarizingConvention {
    /// Probability of each individual non-identity Pauli.
    pub fn per_pauli(self, p: f64) -> f64 {
        match self {
            DepolarizingConvention::ThirdPerPauli => p / 3.0,
            DepolarizingConvention::QuarterPerPauli => p / 4.0,
        }
    }
}

/// Weights `[w, x, y, z]` over the frames `[II, ZI, ZZ, IZ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct ErrorVector([f64; 4]);

#[derive(Serialize, Deserialize)]
struct RawVector {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl TryFrom<RawVector> for ErrorVector {
    type Error = Error;
    fn try_from(r: RawVector) -> Result<Self> {
        ErrorVector::new(r.w, r.x, r.y, r.z)
    }
}

impl From<ErrorVector> for RawVector {
    fn from(e: ErrorVector) -> Self {
        let [w, x, y, z] = e.0;
        RawVector { w, x, y, z }
    }
}

impl ErrorVector {
    pub const PERFECT: ErrorVector = ErrorVector([1.0, 0.0, 0.0, 0.0]);
    pub const MIXED: ErrorVector = ErrorVector([0.25, 0.25, 0.25, 0.25]);

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_weights([w, x, y, z])
    }

    /// Validates a weight array: components in `[0, 1]` (tiny negatives
    /// clamped) and a sum within [`SUM_TOLERANCE`] of one.
    pub fn from_weights(mut weights: [f64; 4]) -> Result<Self> {
        for v in weights.iter_mut() {
            if !v.is_finite() {
                return Err(Error::InvalidVector(format!("non-finite component in {weights:?}")));
            }
            if *v < 0.0 {
                if *v < -CLAMP_TOLERANCE {
                    return Err(Error::InvalidVector(format!("negative component {v}")));
                }
                *v = 0.0;
            }
            if *v > 1.0 + SUM_TOLERANCE {
                return Err(Error::InvalidVector(format!("component {v} exceeds 1")));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidVector(format!("components sum to {sum}")));
        }
        Ok(ErrorVector(weights))
    }

    /// Normalises a non-negative weight array by its own sum. Returns the
    /// vector together with that sum, or `None` when the sum is zero.
    pub fn from_unnormalized(weights: [f64; 4]) -> Option<(Self, f64)> {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return None;
        }
        Some((Self::from_raw(weights.map(|v| v / sum)), sum))
    }

    /// Isotropic state with fidelity `f`: `[f, (1-f)/3, (1-f)/3, (1-f)/3]`.
    pub fn werner(f: f64) -> Result<Self> {
        check_probability("fidelity", f)?;
        let r = (1.0 - f) / 3.0;
        Ok(ErrorVector([f, r, r, r]))
    }

    /// Trusted construction from arithmetic on valid vectors. Clamps
    /// round-off negatives and renormalises the sum.
    pub(crate) fn from_raw(mut weights: [f64; 4]) -> Self {
        for v in weights.iter_mut() {
            debug_assert!(*v >= -1e-9, "weight {v} far below zero");
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        debug_assert!((sum - 1.0).abs() < 1e-9, "weights sum to {sum}");
        ErrorVector(weights.map(|v| v / sum))
    }

    pub fn weights(&self) -> [f64; 4] {
        self.0
    }

    pub fn w(&self) -> f64 {
        self.0[II]
    }
    pub fn x(&self) -> f64 {
        self.0[ZI]
    }
    pub fn y(&self) -> f64 {
        self.0[ZZ]
    }
    pub fn z(&self) -> f64 {
        self.0[IZ]
    }

    /// Overlap with the ideal graph state, i.e. the `II` weight.
    pub fn fidelity(&self) -> f64 {
        self.0[II]
    }

    /// Weights after multiplying every frame by `frame`.
    fn translated(&self, frame: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.0[frame_product(k, frame)];
        }
        out
    }

    /// `Z` flip with probability `q` on one end.
    pub fn z_channel(&self, side: Side, q: f64) -> Result<Self> {
        check_probability("q", q)?;
        let flipped = self.translated(side.z_frame());
        Ok(Self::from_raw(mix(&self.0, 1.0 - q, &[(q, flipped)])))
    }

    /// Depolarizing noise of strength `p` on one photon.
    ///
    /// Both ends produce the same three frames (`X_a ~ IZ`, `Y_a ~ ZZ`,
    /// `Z_a ~ ZI`, and mirrored on `b`), so the result does not depend on
    /// `side`; the argument is kept so call sites say which photon is hit.
    pub fn depolarize(&self, side: Side, p: f64, convention: DepolarizingConvention) -> Result<Self> {
        check_probability("p", p)?;
        let _ = side;
        let each = convention.per_pauli(p);
        let terms = [ZI, ZZ, IZ].map(|g| (each, self.translated(g)));
        Ok(Self::from_raw(mix(&self.0, 1.0 - 3.0 * each, &terms)))
    }

    pub fn characters(&self) -> Characters {
        Characters::of(self)
    }
}

fn mix(base: &[f64; 4], keep: f64, terms: &[(f64, [f64; 4])]) -> [f64; 4] {
    let mut out = base.map(|v| keep * v);
    for (weight, t) in terms {
        for k in 0..4 {
            out[k] += weight * t[k];
        }
    }
    out
}

/// Error vector of the pair left after a rotated Bell measurement on one
/// qubit of each input pair, with Pauli-frame corrections applied.
///
/// This is convolution over the frame group: the output frame is the product
/// of the input frames.
pub fn bsm_compose(e1: &ErrorVector, e2: &ErrorVector) -> ErrorVector {
    let [w1, x1, y1, z1] = e1.0;
    let [w2, x2, y2, z2] = e2.0;
    ErrorVector::from_raw([
        w1 * w2 + x1 * x2 + y1 * y2 + z1 * z2,
        w1 * x2 + x1 * w2 + z1 * y2 + y1 * z2,
        w1 * y2 + y1 * w2 + x1 * z2 + z1 * x2,
        w1 * z2 + z1 * w2 + x1 * y2 + y1 * x2,
    ])
}

/// `n`-fold self-composition via characters. `n = 0` yields the perfect pair.
pub fn compose_power(e: &ErrorVector, n: u32) -> ErrorVector {
    e.characters().powi(n).to_vector()
}

/// Character values `s = (w+x+y+z, w+x-y-z, w-x+y-z, w-x-y+z)`.
///
/// Composition multiplies characters componentwise. Applying the same
/// signed-sum matrix twice gives `4 * identity`, which is how
/// [`Characters::to_vector`] inverts it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characters(pub [f64; 4]);

impl Characters {
    pub fn of(e: &ErrorVector) -> Self {
        Characters(signed_sums(&e.0))
    }

    pub fn compose(&self, other: &Characters) -> Characters {
        Characters(std::array::from_fn(|k| self.0[k] * other.0[k]))
    }

    pub fn powi(&self, n: u32) -> Characters {
        Characters(self.0.map(|s| s.powi(n as i32)))
    }

    pub fn to_vector(&self) -> ErrorVector {
        ErrorVector::from_raw(signed_sums(&self.0).map(|v| v / 4.0))
    }
}

/// The character matrix applied to a length-4 array.
pub fn signed_sums(v: &[f64; 4]) -> [f64; 4] {
    let [a, b, c, d] = *v;
    [a + b + c + d, a + b - c - d, a - b + c - d, a - b - c + d]
}
