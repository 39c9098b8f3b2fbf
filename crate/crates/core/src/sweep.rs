//! Run configuration, scenario evaluation over a parameter grid, and the
//! CSV format consumed by the plotting scripts.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belldiag::{compose_power, ErrorVector};
use crate::chain::{link_error_vector, ChainParams};
use crate::error::{Error, Result};
use crate::lossmodel::{analytic_link_success, mc_link_success};
use crate::schedule::{self, evaluate, pump_fixed, ScheduleExpr};
use crate::timing::{
    baseline_round_times, delivered_rate, times_baseline, times_optimistic, times_raw, Pumping, Scenario,
    TimingParams,
};

/// Parameters that a sweep may vary.
pub const SWEEP_PARAMS: [&str; 12] = [
    "p_depol",
    "eps_logical",
    "eps_logical_x",
    "eps_logical_z",
    "hop_length_km",
    "loss_db_per_km",
    "bsm_intrinsic",
    "tau_half",
    "tau_join",
    "tau_pur_circ",
    "L_total",
    "c",
];

/// Column order of the CSV output.
pub const CSV_COLUMNS: [&str; 22] = [
    "sweep_param",
    "value",
    "scenario",
    "fidelity",
    "p_success",
    "rate",
    "tau_rgs",
    "t_mem",
    "half_rgs_per_hop",
    "comm_rounds",
    "w",
    "x",
    "y",
    "z",
    "p_generation",
    "n_pur",
    "tau_half",
    "tau_join",
    "tau_pur_circ",
    "L_total",
    "c",
    "zero_rate",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            param: "p_depol".into(),
            start: 0.0,
            stop: 0.01,
            points: 11,
        }
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

/// A schedule given by preset name or written out inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleRef {
    Preset(String),
    Inline(ScheduleExpr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainParams,
    pub timing: TimingParams,
    /// Any of `raw`, `baseline`, `fig5` or `custom:<path>`.
    pub scenarios: Vec<String>,
    /// Extra optimistic scenario evaluated alongside `scenarios`.
    pub schedule: Option<ScheduleRef>,
    pub sweep: SweepSpec,
    /// Pumping rounds for the `baseline` scenario.
    pub baseline_rounds: u32,
    /// Estimate link generation by Monte Carlo with this many samples
    /// instead of the closed form.
    pub generation_samples: Option<u64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chain: ChainParams::default(),
            timing: TimingParams::default(),
            scenarios: vec!["raw".into(), "baseline".into(), "fig5".into()],
            schedule: None,
            sweep: SweepSpec::default(),
            baseline_rounds: schedule::BASELINE_ROUNDS as u32,
            generation_samples: None,
            seed: 0,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.timing.validate()?;
        if self.sweep.points == 0 {
            return Err(Error::Config("sweep grid has no points".into()));
        }
        if !SWEEP_PARAMS.contains(&self.sweep.param.as_str()) {
            return Err(Error::Config(format!(
                "unknown sweep parameter `{}` (expected one of {})",
                self.sweep.param,
                SWEEP_PARAMS.join(", ")
            )));
        }
        if !(self.sweep.start.is_finite() && self.sweep.stop.is_finite()) {
            return Err(Error::Config("sweep bounds must be finite".into()));
        }
        if self.scenarios.is_empty() && self.schedule.is_none() {
            return Err(Error::Config("no scenarios selected".into()));
        }
        for value in self.sweep.values() {
            self.at(value)?;
        }
        Ok(())
    }

    /// Chain and timing parameters at one grid value.
    pub fn at(&self, value: f64) -> Result<(ChainParams, TimingParams)> {
        let mut chain = self.chain.clone();
        let mut timing = self.timing.clone();
        match self.sweep.param.as_str() {
            "p_depol" => chain.p_depol = value,
            "eps_logical" => {
                chain.eps_logical_x = value;
                chain.eps_logical_z = value;
            }
            "eps_logical_x" => chain.eps_logical_x = value,
            "eps_logical_z" => chain.eps_logical_z = value,
            "hop_length_km" => chain.hop_length_km = value,
            "loss_db_per_km" => chain.loss_db_per_km = value,
            "bsm_intrinsic" => chain.bsm_intrinsic = value,
            "tau_half" => timing.tau_half = value,
            "tau_join" => timing.tau_join = value,
            "tau_pur_circ" => timing.tau_pur_circ = value,
            "L_total" => timing.l_total = value,
            "c" => timing.c = value,
            other => return Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
        }
        chain.validate()?;
        timing.validate()?;
        Ok((chain, timing))
    }

    /// Resolves scenario names into evaluators, reading any schedule files.
    pub fn resolve_scenarios(&self) -> Result<Vec<ScenarioSpec>> {
        let hops = self.chain.hops as usize;
        let mut out = Vec::new();
        for name in &self.scenarios {
            let spec = match name.as_str() {
                "raw" => ScenarioSpec::Raw,
                "baseline" => ScenarioSpec::Baseline {
                    rounds: self.baseline_rounds,
                },
                "fig5" => ScenarioSpec::Tree {
                    label: name.clone(),
                    expr: schedule::preset_fig5(hops)?,
                },
                other => match other.strip_prefix("custom:") {
                    Some(path) => ScenarioSpec::Tree {
                        label: name.clone(),
                        expr: load_schedule(Path::new(path), hops)?,
                    },
                    None => return Err(Error::UnknownPreset(other.to_string())),
                },
            };
            out.push(spec);
        }
        match &self.schedule {
            Some(ScheduleRef::Preset(name)) => out.push(ScenarioSpec::Tree {
                label: name.clone(),
                expr: schedule::preset(name, hops)?,
            }),
            Some(ScheduleRef::Inline(expr)) => {
                expr.validate(hops)?;
                out.push(ScenarioSpec::Tree {
                    label: "custom:inline".into(),
                    expr: expr.clone(),
                })
            }
            None => {}
        }
        Ok(out)
    }
}

/// Reads and validates a JSON schedule file.
pub fn load_schedule(path: &Path, hops: usize) -> Result<ScheduleExpr> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schedule(format!("cannot read {}: {e}", path.display())))?;
    let expr: ScheduleExpr =
        serde_json::from_str(&text).map_err(|e| Error::Schedule(format!("{}: {e}", path.display())))?;
    expr.validate(hops)?;
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    Raw,
    Baseline { rounds: u32 },
    Tree { label: String, expr: ScheduleExpr },
}

impl ScenarioSpec {
    pub fn label(&self) -> &str {
        match self {
            ScenarioSpec::Raw => "raw",
            ScenarioSpec::Baseline { .. } => "baseline",
            ScenarioSpec::Tree { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_param: String,
    pub value: f64,
    pub scenario: String,
    pub fidelity: f64,
    pub p_success: f64,
    pub rate: f64,
    pub tau_rgs: f64,
    pub t_mem: f64,
    pub half_rgs_per_hop: u32,
    pub comm_rounds: u32,
    pub vector: Option<ErrorVector>,
    pub p_generation: f64,
    pub n_pur: u32,
    pub timing: TimingParams,
    pub zero_rate: bool,
}

/// Per-link generation probability.
fn link_generation(chain: &ChainParams, samples: Option<u64>, seed: u64) -> Result<f64> {
    match samples {
        Some(n) => Ok(mc_link_success(&chain.loss_params(n, seed)?)?.link.mean),
        None => Ok(analytic_link_success(&chain.loss_params(1, seed)?)?.1),
    }
}

/// Evaluates one scenario with fully specified parameters.
pub fn evaluate_scenario(
    spec: &ScenarioSpec,
    chain: &ChainParams,
    timing: &TimingParams,
    p_link: f64,
) -> Result<ScenarioOutcome> {
    let hops = chain.hops;
    let link = link_error_vector(chain)?;
    let e2e = compose_power(&link, hops);
    let p_e2e = p_link.powi(hops as i32);
    match spec {
        ScenarioSpec::Raw => {
            let times = times_raw(timing);
            let rate = delivered_rate(Scenario::Raw, &times, p_e2e, 1.0, None)?;
            Ok(ScenarioOutcome {
                vector: Some(e2e),
                p_success: 1.0,
                rate: rate.pairs_per_second,
                zero_rate: rate.zero_success,
                tau_rgs: times.tau_rgs,
                t_mem: times.t_mem,
                half_rgs_per_hop: 1,
                comm_rounds: times.comm_rounds,
                p_generation: p_e2e,
                n_pur: 1,
            })
        }
        ScenarioSpec::Baseline { rounds } => {
            let pump = pump_fixed(&e2e, *rounds);
            let times = times_baseline(timing);
            let pumping = Pumping {
                round_times: baseline_round_times(timing, pump.per_round_p.len()),
                round_p: pump.per_round_p.clone(),
            };
            let rate = if pumping.round_p.is_empty() {
                delivered_rate(Scenario::Raw, &times_raw(timing), p_e2e, 1.0, None)?
            } else {
                delivered_rate(Scenario::Baseline, &times, p_e2e, 1.0, Some(&pumping))?
            };
            Ok(ScenarioOutcome {
                vector: pump.final_vector,
                p_success: pump.p_success(),
                rate: rate.pairs_per_second,
                zero_rate: rate.zero_success,
                tau_rgs: times.tau_rgs,
                t_mem: times.t_mem,
                half_rgs_per_hop: rounds + 1,
                comm_rounds: times.comm_rounds * rounds,
                p_generation: p_e2e.powi(*rounds as i32 + 1),
                n_pur: timing.n_pur,
            })
        }
        ScenarioSpec::Tree { expr, .. } => {
            let result = evaluate(expr, &link, hops as usize)?;
            let timing = TimingParams {
                n_pur: result.max_half_rgs_per_hop.max(1),
                ..timing.clone()
            };
            let times = times_optimistic(&timing);
            let leaves: u32 = result.half_rgs_per_hop.iter().sum();
            let p_gen = p_link.powi(leaves as i32);
            let rate = delivered_rate(Scenario::Optimistic, &times, p_gen, result.p_success, None)?;
            Ok(ScenarioOutcome {
                vector: result.vector,
                p_success: result.p_success,
                rate: rate.pairs_per_second,
                zero_rate: rate.zero_success,
                tau_rgs: times.tau_rgs,
                t_mem: times.t_mem,
                half_rgs_per_hop: result.max_half_rgs_per_hop,
                comm_rounds: result.comm_rounds,
                p_generation: p_gen,
                n_pur: timing.n_pur,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub vector: Option<ErrorVector>,
    pub p_success: f64,
    pub rate: f64,
    pub zero_rate: bool,
    pub tau_rgs: f64,
    pub t_mem: f64,
    pub half_rgs_per_hop: u32,
    pub comm_rounds: u32,
    pub p_generation: f64,
    pub n_pur: u32,
}

impl ScenarioOutcome {
    pub fn fidelity(&self) -> f64 {
        self.vector.map_or(0.0, |v| v.fidelity())
    }
}

fn rows_at(config: &RunConfig, specs: &[ScenarioSpec], value: f64) -> Result<Vec<Row>> {
    let (chain, timing) = config.at(value)?;
    let p_link = link_generation(&chain, config.generation_samples, config.seed)?;
    specs
        .iter()
        .map(|spec| {
            let out = evaluate_scenario(spec, &chain, &timing, p_link)?;
            Ok(Row {
                sweep_param: config.sweep.param.clone(),
                value,
                scenario: spec.label().to_string(),
                fidelity: out.fidelity(),
                p_success: out.p_success,
                rate: out.rate,
                tau_rgs: out.tau_rgs,
                t_mem: out.t_mem,
                half_rgs_per_hop: out.half_rgs_per_hop,
                comm_rounds: out.comm_rounds,
                vector: out.vector,
                p_generation: out.p_generation,
                n_pur: out.n_pur,
                timing: timing.clone(),
                zero_rate: out.zero_rate,
            })
        })
        .collect()
}

/// All rows in grid order, scenarios in configured order within each point.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    let specs = config.resolve_scenarios()?;
    let values = config.sweep.values();

    #[cfg(feature = "parallel")]
    let chunks: Vec<Result<Vec<Row>>> = values.par_iter().map(|v| rows_at(config, &specs, *v)).collect();
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Result<Vec<Row>>> = values.iter().map(|v| rows_at(config, &specs, *v)).collect();

    let mut rows = Vec::with_capacity(values.len() * specs.len());
    for chunk in chunks {
        rows.extend(chunk?);
    }
    Ok(rows)
}

/// `numerator` rate over `denominator` rate at each grid value.
pub fn rate_ratios(rows: &[Row], numerator: &str, denominator: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.scenario == numerator)
        .filter_map(|num| {
            rows.iter()
                .find(|d| d.scenario == denominator && d.value == num.value)
                .map(|den| (num.value, num.rate / den.rate))
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

/// Writes `#`-prefixed metadata, a header row and one line per row.
pub fn write_csv<W: Write>(config: &RunConfig, rows: &[Row], mut out: W) -> std::io::Result<()> {
    let config_json = serde_json::to_string(config).expect("config serializes");
    writeln!(out, "# config: {config_json}")?;
    writeln!(
        out,
        "# rate model: raw and optimistic rate = p_generation * p_success / tau_rgs; \
         baseline rate = 1 / expected pumping time with full restart on failure"
    )?;
    writeln!(
        out,
        "# baseline round time: first round 2*tau_rgs(raw) + tau_pur_circ + 2*L_total/c, \
         later rounds tau_rgs(raw) + tau_pur_circ + 2*L_total/c"
    )?;
    writeln!(out, "# optimistic n_pur: largest half-RGS count per hop side of the schedule")?;
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for r in rows {
        let weights = r.vector.map(|v| v.weights());
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{}",
            r.sweep_param,
            r.value,
            r.scenario,
            r.fidelity,
            r.p_success,
            r.rate,
            r.tau_rgs,
            r.t_mem,
            r.half_rgs_per_hop,
            r.comm_rounds
        );
        for k in 0..4 {
            let _ = write!(line, ",{}", fmt_opt(weights.map(|w| w[k])));
        }
        let t = &r.timing;
        let _ = write!(
            line,
            ",{},{},{},{},{},{},{},{}",
            r.p_generation, r.n_pur, t.tau_half, t.tau_join, t.tau_pur_circ, t.l_total, t.c, r.zero_rate
        );
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn csv_string(config: &RunConfig, rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_csv(config, rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub tau_half: f64,
    pub baseline_rounds: u32,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Range of the `fig5`-to-`baseline` rate ratio over the configured grid
/// for each combination of `tau_half` and pumping rounds.
pub fn rate_ratio_sensitivity(config: &RunConfig, tau_halfs: &[f64], rounds: &[u32]) -> Result<Vec<SensitivityRow>> {
    let mut out = Vec::new();
    for &tau_half in tau_halfs {
        for &r in rounds {
            let cfg = RunConfig {
                timing: TimingParams {
                    tau_half,
                    ..config.timing.clone()
                },
                scenarios: vec!["baseline".into(), "fig5".into()],
                schedule: None,
                baseline_rounds: r,
                ..config.clone()
            };
            let ratios: Vec<f64> = rate_ratios(&run_sweep(&cfg)?, "fig5", "baseline")
                .into_iter()
                .map(|(_, q)| q)
                .collect();
            out.push(SensitivityRow {
                tau_half,
                baseline_rounds: r,
                min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    Ok(out)
}
