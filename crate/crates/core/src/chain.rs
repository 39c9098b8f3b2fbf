//! Link error vectors from half-RGS physics, and their composition along a
//! chain.
//!
//! A link is the anchor-anchor pair between neighbouring nodes. Each side
//! starts as a perfect anchor-outer pair; the outer photon is depolarized in
//! flight and the two outers are joined by a Bell measurement at the ABSA.
//! Logical measurements on the inner qubits then leave independent `Z` flip
//! channels on each anchor: one per `Z`-measured inner qubit (`m - 1` of them)
//! and one for the `X`-measured qubit.

use serde::{Deserialize, Serialize};

use crate::belldiag::{bsm_compose, compose_power, DepolarizingConvention, ErrorVector, Side};
use crate::error::{check_probability, Error, Result};
use crate::lossmodel::{self, LossParams};

/// How the inner-qubit logical errors reach the anchors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerChannel {
    /// `m - 1` channels at `eps_logical_z` plus one at `eps_logical_x`.
    #[default]
    PerMeasurement,
    /// A single channel at `eps_logical_z` plus one at `eps_logical_x`.
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub hops: u32,
    pub hop_length_km: f64,
    pub loss_db_per_km: f64,
    pub m_arms: u32,
    pub branching: Vec<u32>,
    pub p_depol: f64,
    /// Placeholder default; sweep it rather than trusting it.
    pub eps_logical_x: f64,
    /// Placeholder default; sweep it rather than trusting it.
    pub eps_logical_z: f64,
    pub depol_convention: DepolarizingConvention,
    pub inner_channel: InnerChannel,
    pub bsm_intrinsic: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            hops: 10,
            hop_length_km: 2.0,
            loss_db_per_km: 0.2,
            m_arms: 18,
            branching: vec![16, 14, 1],
            p_depol: 0.0,
            eps_logical_x: 1e-3,
            eps_logical_z: 1e-3,
            depol_convention: DepolarizingConvention::default(),
            inner_channel: InnerChannel::default(),
            bsm_intrinsic: 0.5,
        }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.hops == 0 {
            return Err(Error::param("hops", 0.0, "expected at least one hop"));
        }
        if self.m_arms == 0 {
            return Err(Error::param("m_arms", 0.0, "expected at least one arm"));
        }
        if let Some(b) = self.branching.iter().find(|b| **b == 0) {
            return Err(Error::param("branching", f64::from(*b), "entries must be at least 1"));
        }
        check_probability("p_depol", self.p_depol)?;
        check_probability("eps_logical_x", self.eps_logical_x)?;
        check_probability("eps_logical_z", self.eps_logical_z)?;
        check_probability("bsm_intrinsic", self.bsm_intrinsic)?;
        lossmodel::transmissivity(self.hop_length_km, self.loss_db_per_km)?;
        Ok(())
    }

    /// Photon survival over one hop.
    pub fn eta(&self) -> Result<f64> {
        lossmodel::transmissivity(self.hop_length_km, self.loss_db_per_km)
    }

    pub fn loss_params(&self, samples: u64, seed: u64) -> Result<LossParams> {
        Ok(LossParams {
            eta: self.eta()?,
            branching: self.branching.clone(),
            m_arms: self.m_arms,
            bsm_intrinsic: self.bsm_intrinsic,
            samples,
            seed,
        })
    }

    /// Number of `eps_logical_z` channels on each anchor.
    fn z_channels(&self) -> u32 {
        match self.inner_channel {
            InnerChannel::PerMeasurement => self.m_arms - 1,
            InnerChannel::Aggregate => 1,
        }
    }

    /// Total `Z` flip probability on each anchor.
    pub fn anchor_flip_probability(&self) -> f64 {
        let keep = (1.0 - 2.0 * self.eps_logical_z).powi(self.z_channels() as i32) * (1.0 - 2.0 * self.eps_logical_x);
        (1.0 - keep) / 2.0
    }
}

fn apply_inner_channels(e: ErrorVector, side: Side, params: &ChainParams) -> Result<ErrorVector> {
    let mut e = e;
    for _ in 0..params.z_channels() {
        e = e.z_channel(side, params.eps_logical_z)?;
    }
    e.z_channel(side, params.eps_logical_x)
}

/// Error vector of one anchor-anchor link.
pub fn link_error_vector(params: &ChainParams) -> Result<ErrorVector> {
    params.validate()?;
    let (p, conv) = (params.p_depol, params.depol_convention);
    let left = ErrorVector::PERFECT.depolarize(Side::B, p, conv)?;
    let right = ErrorVector::PERFECT.depolarize(Side::A, p, conv)?;
    let joined = bsm_compose(&left, &right);
    let e = apply_inner_channels(joined, Side::A, params)?;
    apply_inner_channels(e, Side::B, params)
}

/// Same link with the inner channels applied to the anchor-outer pairs
/// before the outer Bell measurement.
pub fn link_error_vector_channels_first(params: &ChainParams) -> Result<ErrorVector> {
    params.validate()?;
    let (p, conv) = (params.p_depol, params.depol_convention);
    let left = apply_inner_channels(ErrorVector::PERFECT, Side::A, params)?.depolarize(Side::B, p, conv)?;
    let right = apply_inner_channels(ErrorVector::PERFECT, Side::B, params)?.depolarize(Side::A, p, conv)?;
    Ok(bsm_compose(&left, &right))
}

/// Swaps a sequence of adjacent links into one end-to-end pair.
pub fn compose_chain(links: &[ErrorVector]) -> Result<ErrorVector> {
    let (first, rest) = links
        .split_first()
        .ok_or_else(|| Error::param("links", 0.0, "expected at least one link"))?;
    Ok(rest.iter().fold(*first, |acc, e| bsm_compose(&acc, e)))
}

/// End-to-end pair from `hops` identical links.
pub fn raw_end_to_end(params: &ChainParams) -> Result<ErrorVector> {
    Ok(compose_power(&link_error_vector(params)?, params.hops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn noiseless() -> ChainParams {
        ChainParams {
            p_depol: 0.0,
            eps_logical_x: 0.0,
            eps_logical_z: 0.0,
            ..ChainParams::default()
        }
    }

    #[test]
    fn noiseless_link_is_perfect() {
        assert_eq!(link_error_vector(&noiseless()).unwrap(), ErrorVector::PERFECT);
        assert_eq!(raw_end_to_end(&noiseless()).unwrap(), ErrorVector::PERFECT);
    }

    #[test]
    fn depolarized_link() {
        for m in [1, 5, 18] {
            let params = ChainParams {
                p_depol: 0.03,
                m_arms: m,
                ..noiseless()
            };
            let e = link_error_vector(&params).unwrap();
            assert_abs_diff_eq!(e.fidelity(), (1.0 + 3.0 * 0.96f64.powi(2)) / 4.0, epsilon = 1e-15);
            assert_abs_diff_eq!(e.fidelity(), 0.9412, epsilon = 1e-12);
        }
    }

    #[test]
    fn inner_channels_only() {
        let params = ChainParams {
            eps_logical_z: 0.001,
            ..noiseless()
        };
        let q = (1.0 - (1.0 - 2.0 * 0.001f64).powi(17)) / 2.0;
        assert_abs_diff_eq!(q, 0.016726, epsilon = 1e-5);
        assert_abs_diff_eq!(params.anchor_flip_probability(), q, epsilon = 1e-15);
        let [w, x, y, z] = link_error_vector(&params).unwrap().weights();
        assert_abs_diff_eq!(w, (1.0 - q) * (1.0 - q), epsilon = 1e-14);
        assert_abs_diff_eq!(x, q * (1.0 - q), epsilon = 1e-14);
        assert_abs_diff_eq!(z, q * (1.0 - q), epsilon = 1e-14);
        assert_abs_diff_eq!(y, q * q, epsilon = 1e-14);
    }

    #[test]
    fn aggregate_uses_one_z_channel() {
        let params = ChainParams {
            inner_channel: InnerChannel::Aggregate,
            eps_logical_z: 0.01,
            eps_logical_x: 0.02,
            ..noiseless()
        };
        let q = 0.01 * 0.98 + 0.02 * 0.99;
        assert_abs_diff_eq!(params.anchor_flip_probability(), q, epsilon = 1e-15);
        assert_abs_diff_eq!(link_error_vector(&params).unwrap().fidelity(), (1.0 - q) * (1.0 - q), epsilon = 1e-14);
    }

    #[test]
    fn channel_order_does_not_matter() {
        let params = ChainParams {
            p_depol: 0.007,
            eps_logical_x: 0.002,
            eps_logical_z: 0.0015,
            ..ChainParams::default()
        };
        let a = link_error_vector(&params).unwrap().weights();
        let b = link_error_vector_channels_first(&params).unwrap().weights();
        for k in 0..4 {
            assert_abs_diff_eq!(a[k], b[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn compose_chain_examples() {
        let e = ErrorVector::new(0.97, 0.01, 0.01, 0.01).unwrap();
        assert_eq!(compose_chain(&[e]).unwrap(), e);
        let ten = compose_chain(&[e; 10]).unwrap();
        assert_abs_diff_eq!(ten.fidelity(), (1.0 + 3.0 * 0.96f64.powi(10)) / 4.0, epsilon = 1e-12);
        let absorbed = compose_chain(&[e, ErrorVector::MIXED, e]).unwrap().weights();
        for v in absorbed {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        }
        assert!(compose_chain(&[]).is_err());
    }

    #[test]
    fn rejects_invalid_params() {
        for bad in [
            ChainParams { hops: 0, ..ChainParams::default() },
            ChainParams { m_arms: 0, ..ChainParams::default() },
            ChainParams { p_depol: 1.2, ..ChainParams::default() },
            ChainParams { branching: vec![16, 0], ..ChainParams::default() },
            ChainParams { hop_length_km: -2.0, ..ChainParams::default() },
        ] {
            assert!(link_error_vector(&bad).is_err());
        }
    }

    #[test]
    fn config_keys() {
        let json = serde_json::to_value(ChainParams::default()).unwrap();
        for key in [
            "hops",
            "hop_length_km",
            "loss_db_per_km",
            "m_arms",
            "branching",
            "p_depol",
            "eps_logical_x",
            "eps_logical_z",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let parsed: ChainParams = serde_json::from_str(r#"{"p_depol": 0.004, "inner_channel": "aggregate"}"#).unwrap();
        assert_eq!(parsed.p_depol, 0.004);
        assert_eq!(parsed.hops, 10);
        assert!(serde_json::from_str::<ChainParams>(r#"{"pdepol": 0.1}"#).is_err());
    }
}
