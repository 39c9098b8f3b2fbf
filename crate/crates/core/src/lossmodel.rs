//! Photon loss: fibre transmissivity and Monte Carlo estimates of link
//! generation success for tree-encoded half-RGS states.
//!
//! A link succeeds when at least one of the `m` outer-photon Bell measurements
//! at the ABSA succeeds and, on both half-RGSs, the inner qubit of the chosen
//! arm is measured in `X` and the other `m - 1` inner qubits in `Z`. Inner
//! qubits are tree encoded; lost photons are recovered by indirect
//! measurements through their children.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Samples per independently seeded batch.
pub const BATCH_SIZE: u64 = 1 << 14;

/// Estimates from fewer samples than this carry a warning.
pub const MIN_SAMPLES: u64 = 10_000;

/// Survival probability of a photon over `length_km` of fibre.
pub fn transmissivity(length_km: f64, db_per_km: f64) -> Result<f64> {
    if !(length_km >= 0.0) {
        return Err(Error::param("length_km", length_km, "expected a nonnegative length"));
    }
    if !(db_per_km >= 0.0) {
        return Err(Error::param("db_per_km", db_per_km, "expected a nonnegative attenuation"));
    }
    Ok(10f64.powf(-db_per_km * length_km / 10.0))
}

/// Probability that all of `hops` independent links are generated.
pub fn e2e_generation_success(per_link: f64, hops: u32) -> Result<f64> {
    check_probability("per_link", per_link)?;
    Ok(per_link.powi(hops as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossParams {
    pub eta: f64,
    pub branching: Vec<u32>,
    pub m_arms: u32,
    pub bsm_intrinsic: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams {
            eta: 10f64.powf(-0.04),
            branching: vec![16, 14, 1],
            m_arms: 18,
            bsm_intrinsic: 0.5,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

impl LossParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("eta", self.eta)?;
        check_probability("bsm_intrinsic", self.bsm_intrinsic)?;
        if self.m_arms == 0 {
            return Err(Error::param("m_arms", 0.0, "expected at least one arm"));
        }
        if self.samples == 0 {
            return Err(Error::param("samples", 0.0, "expected at least one sample"));
        }
        if let Some(b) = self.branching.iter().find(|b| **b == 0) {
            return Err(Error::param("branching", f64::from(*b), "entries must be at least 1"));
        }
        Ok(())
    }

    /// Success probability of one outer-photon Bell measurement.
    pub fn arm_success(&self) -> f64 {
        self.bsm_intrinsic * self.eta * self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_counts(successes: u64, samples: u64) -> Self {
        let n = samples as f64;
        let mean = successes as f64 / n;
        Estimate {
            mean,
            stderr: (mean * (1.0 - mean) / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEstimate {
    /// Whole link: an arm succeeds and both half-RGSs finish their
    /// logical measurements.
    pub link: Estimate,
    /// Logical measurements of a single half-RGS.
    pub half_rgs: Estimate,
    pub samples: u64,
    pub warning: Option<String>,
}

struct Sampler<'a> {
    branching: &'a [u32],
    survive: f64,
}

impl Sampler<'_> {
    fn children(&self, level: usize) -> u32 {
        self.branching.get(level).copied().unwrap_or(0)
    }

    fn arrives<R: Rng>(&self, rng: &mut R) -> bool {
        rng.random::<f64>() < self.survive
    }

    /// `Z` on a qubit at `level`: read directly, or via a child measured in
    /// `X` whose own children are all measured in `Z`.
    fn z<R: Rng>(&self, level: usize, rng: &mut R) -> bool {
        self.arrives(rng) || self.z_indirect(level, rng)
    }

    fn z_indirect<R: Rng>(&self, level: usize, rng: &mut R) -> bool {
        (0..self.children(level)).any(|_| {
            self.arrives(rng) && (0..self.children(level + 1)).all(|_| self.z(level + 2, rng))
        })
    }

    /// Logical `X` on the encoded qubit: every first-level qubit in `Z`.
    fn logical_x<R: Rng>(&self, rng: &mut R) -> bool {
        (0..self.children(0)).all(|_| self.z(1, rng))
    }

    /// Logical `Z` on the encoded qubit: some first-level qubit in `X`.
    fn logical_z<R: Rng>(&self, rng: &mut R) -> bool {
        self.z_indirect(0, rng)
    }

    fn half_rgs<R: Rng>(&self, m_arms: u32, rng: &mut R) -> bool {
        self.logical_x(rng) && (1..m_arms).all(|_| self.logical_z(rng))
    }
}

fn run_batch(params: &LossParams, batch: u64, count: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(batch);
    let sampler = Sampler {
        branching: &params.branching,
        survive: params.eta,
    };
    let arm = params.arm_success();
    let (mut links, mut halves) = (0, 0);
    for _ in 0..count {
        let first_half = sampler.half_rgs(params.m_arms, &mut rng);
        halves += u64::from(first_half);
        let arm_ok = (0..params.m_arms).any(|_| rng.random::<f64>() < arm);
        if first_half && arm_ok && sampler.half_rgs(params.m_arms, &mut rng) {
            links += 1;
        }
    }
    (links, halves)
}

/// Monte Carlo estimate of per-link and per-half-RGS success.
///
/// Samples are split into batches of [`BATCH_SIZE`]; batch `i` draws from
/// stream `i` of a ChaCha8 generator seeded with `seed`, so the result does
/// not depend on how batches are scheduled.
pub fn mc_link_success(params: &LossParams) -> Result<LinkEstimate> {
    params.validate()?;
    let batches = params.samples.div_ceil(BATCH_SIZE);
    let size = |b: u64| BATCH_SIZE.min(params.samples - b * BATCH_SIZE);

    #[cfg(feature = "parallel")]
    let counts: Vec<(u64, u64)> = (0..batches)
        .into_par_iter()
        .map(|b| run_batch(params, b, size(b)))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<(u64, u64)> = (0..batches).map(|b| run_batch(params, b, size(b))).collect();

    let (links, halves) = counts
        .iter()
        .fold((0, 0), |(l, h), (bl, bh)| (l + bl, h + bh));
    let warning = (params.samples < MIN_SAMPLES).then(|| {
        format!(
            "only {} samples; resolution is coarser than 1/{MIN_SAMPLES}",
            params.samples
        )
    });
    Ok(LinkEstimate {
        link: Estimate::from_counts(links, params.samples),
        half_rgs: Estimate::from_counts(halves, params.samples),
        samples: params.samples,
        warning,
    })
}

/// Closed-form counterpart of the sampler, for fast sweeps.
///
/// Indirect `Z` success on a qubit at level `k` obeys
/// `R_k = 1 - [1 - eta (eta + (1-eta) R_{k+2})^{b_{k+1}}]^{b_k}` with
/// `R_k = 0` past the last level.
pub fn tree_success(branching: &[u32], eta: f64) -> (f64, f64) {
    let b = |k: usize| branching.get(k).copied().unwrap_or(0) as i32;
    let depth = branching.len() + 2;
    let mut r = vec![0.0; depth + 2];
    for k in (1..depth).rev() {
        let inner = (eta + (1.0 - eta) * r[k + 2]).powi(b(k + 1));
        r[k] = 1.0 - (1.0 - eta * inner).powi(b(k));
    }
    let logical_x = (eta + (1.0 - eta) * r[1]).powi(b(0));
    let logical_z = 1.0 - (1.0 - eta * (eta + (1.0 - eta) * r[2]).powi(b(1))).powi(b(0));
    (logical_x, logical_z)
}

/// Closed-form per-half-RGS and per-link success.
pub fn analytic_link_success(params: &LossParams) -> Result<(f64, f64)> {
    params.validate()?;
    let (lx, lz) = tree_success(&params.branching, params.eta);
    let half = lx * lz.powi(params.m_arms as i32 - 1);
    let arms = 1.0 - (1.0 - params.arm_success()).powi(params.m_arms as i32);
    Ok((half, arms * half * half))
}
