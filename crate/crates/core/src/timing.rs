//! Generation time, memory time and delivered rate for raw swapping,
//! end-node pumping and optimistic in-generation purification.
//!
//! Raw and optimistic throughput is source limited: a new end-to-end attempt
//! starts every `tau_rgs` and classical latency only delays delivery.
//! Pumping at the end nodes is latency limited: every round waits a round
//! trip for its herald, and any failed round restarts from scratch.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    /// Seconds to emit one half-RGS.
    pub tau_half: f64,
    /// Seconds to join two half-RGSs.
    pub tau_join: f64,
    /// Seconds for one purification circuit.
    pub tau_pur_circ: f64,
    /// Pairs consumed per purification attempt.
    pub n_pur: u32,
    /// End-to-end distance in metres.
    #[serde(rename = "L_total")]
    pub l_total: f64,
    /// Signal speed in fibre, metres per second.
    pub c: f64,
    /// Drop `tau_pur_circ` from the pumping memory time.
    pub baseline_drop_pur_circ: bool,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            tau_half: 1e-6,
            tau_join: 1e-8,
            tau_pur_circ: 1e-7,
            n_pur: 5,
            l_total: 2e4,
            c: 2e8,
            baseline_drop_pur_circ: false,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        let times = [
            ("tau_half", self.tau_half),
            ("tau_join", self.tau_join),
            ("tau_pur_circ", self.tau_pur_circ),
            ("L_total", self.l_total),
        ];
        for (name, value) in times {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::param(name, value, "expected a nonnegative finite value"));
            }
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("c", self.c, "expected a positive speed"));
        }
        if self.n_pur == 0 {
            return Err(Error::param("n_pur", 0.0, "expected at least one pair"));
        }
        Ok(())
    }

    /// One-way classical latency over the whole chain.
    pub fn latency(&self) -> f64 {
        self.l_total / self.c
    }

    fn n(&self) -> f64 {
        f64::from(self.n_pur)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTimes {
    pub tau_rgs: f64,
    pub t_mem: f64,
    pub comm_rounds: u32,
}

pub fn times_raw(p: &TimingParams) -> ScenarioTimes {
    ScenarioTimes {
        tau_rgs: p.tau_half + p.tau_join,
        t_mem: p.tau_half + p.latency(),
        comm_rounds: 1,
    }
}

/// Per pumping round: two classical round trips' worth of latency.
pub fn times_baseline(p: &TimingParams) -> ScenarioTimes {
    let pur = if p.baseline_drop_pur_circ { 0.0 } else { p.tau_pur_circ };
    ScenarioTimes {
        tau_rgs: p.tau_half + p.tau_join,
        t_mem: p.n() * p.tau_half + pur + 2.0 * p.latency(),
        comm_rounds: 2,
    }
}

pub fn times_optimistic(p: &TimingParams) -> ScenarioTimes {
    ScenarioTimes {
        tau_rgs: p.n() * p.tau_half + (p.tau_pur_circ + p.tau_join).max(p.n() * p.tau_join),
        t_mem: p.n() * p.tau_half + p.tau_pur_circ + p.latency(),
        comm_rounds: 1,
    }
}

/// Wall time of each pumping round: generate the pair(s) it consumes, run
/// the circuit, and wait for the outcomes to be exchanged.
pub fn baseline_round_times(p: &TimingParams, rounds: usize) -> Vec<f64> {
    let raw = times_raw(p).tau_rgs;
    let wait = p.tau_pur_circ + 2.0 * p.latency();
    (0..rounds)
        .map(|i| if i == 0 { 2.0 * raw + wait } else { raw + wait })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Raw,
    Baseline,
    Optimistic,
}

/// Round timeline of end-node pumping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pumping {
    pub round_times: Vec<f64>,
    pub round_p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub pairs_per_second: f64,
    /// Set when the success probability is zero.
    pub zero_success: bool,
}

impl Rate {
    fn from_period(success: f64, period: f64) -> Self {
        if success <= 0.0 {
            Rate {
                pairs_per_second: 0.0,
                zero_success: true,
            }
        } else {
            Rate {
                pairs_per_second: success / period,
                zero_success: false,
            }
        }
    }
}

/// Expected time to finish every round with full restart on failure:
/// `T = sum_i t_i prod_{j<i} p_j / prod_i p_i`.
pub fn restart_time(round_times: &[f64], round_p: &[f64]) -> Result<f64> {
    if round_times.len() != round_p.len() {
        return Err(Error::Config(format!(
            "{} round times for {} round probabilities",
            round_times.len(),
            round_p.len()
        )));
    }
    let mut reach = 1.0;
    let mut spent = 0.0;
    for (t, p) in round_times.iter().zip(round_p) {
        check_probability("round_p", *p)?;
        spent += t * reach;
        reach *= p;
    }
    Ok(if reach > 0.0 { spent / reach } else { f64::INFINITY })
}

/// Delivered end-to-end pairs per second.
///
/// Raw and optimistic: `p_generation * p_schedule / tau_rgs`. Baseline:
/// `1 / T` from [`restart_time`], where each round's probability is scaled by
/// the generation probability of the pairs it consumes (two in the first
/// round) and `p_schedule` is ignored. With no pumping rounds the baseline
/// falls back to the raw expression.
pub fn delivered_rate(
    scenario: Scenario,
    times: &ScenarioTimes,
    p_generation: f64,
    p_schedule: f64,
    pump: Option<&Pumping>,
) -> Result<Rate> {
    check_probability("p_generation", p_generation)?;
    check_probability("p_schedule", p_schedule)?;
    match (scenario, pump) {
        (Scenario::Baseline, Some(pump)) if !pump.round_p.is_empty() => {
            let round_p: Vec<f64> = pump
                .round_p
                .iter()
                .enumerate()
                .map(|(i, p)| p * if i == 0 { p_generation * p_generation } else { p_generation })
                .collect();
            let total: f64 = round_p.iter().product();
            let t = restart_time(&pump.round_times, &round_p)?;
            Ok(Rate::from_period(if total > 0.0 { 1.0 } else { 0.0 }, t))
        }
        (Scenario::Baseline, None) => Err(Error::Config("baseline rate needs a pumping timeline".into())),
        _ => Ok(Rate::from_period(p_generation * p_schedule, times.tau_rgs)),
    }
}
