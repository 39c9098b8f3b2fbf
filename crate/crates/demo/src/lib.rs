//! Browser bindings: fidelity sweep, one purification step, loss estimate.
//! Results cross the boundary as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use halfrgs::belldiag::ErrorVector;
use halfrgs::chain::ChainParams;
use halfrgs::lossmodel::{analytic_link_success, mc_link_success, LossParams};
use halfrgs::purify::{purify, Stabilizer};
use halfrgs::sweep::{run_sweep, RunConfig, SweepSpec};

#[derive(Serialize)]
struct SweepPoint {
    p_depol: f64,
    scenario: String,
    fidelity: f64,
    rate: f64,
}

pub fn fidelity_sweep_json(p_max: f64, points: usize, eps_logical: f64, hops: u32, rounds: u32) -> Result<String, String> {
    let config = RunConfig {
        chain: ChainParams {
            hops,
            eps_logical_x: eps_logical,
            eps_logical_z: eps_logical,
            ..ChainParams::default()
        },
        scenarios: vec!["raw".into(), "baseline".into(), "fig5".into()],
        baseline_rounds: rounds,
        sweep: SweepSpec {
            param: "p_depol".into(),
            start: 0.0,
            stop: p_max,
            points,
        },
        ..RunConfig::default()
    };
    let rows = run_sweep(&config).map_err(|e| e.to_string())?;
    let points: Vec<SweepPoint> = rows
        .into_iter()
        .map(|r| SweepPoint {
            p_depol: r.value,
            scenario: r.scenario,
            fidelity: r.fidelity,
            rate: r.rate,
        })
        .collect();
    Ok(serde_json::to_string(&points).expect("serializable"))
}

pub fn purify_step_json(stab: &str, keep: &[f64], sacrifice: &[f64]) -> Result<String, String> {
    let stab: Stabilizer = stab.parse().map_err(|e: halfrgs::Error| e.to_string())?;
    let vector = |v: &[f64]| match v {
        [w, x, y, z] => ErrorVector::from_unnormalized([*w, *x, *y, *z])
            .map(|(e, _)| e)
            .ok_or_else(|| "weights must be nonnegative with a positive sum".to_string()),
        _ => Err(format!("expected 4 weights, got {}", v.len())),
    };
    let (a, b) = (vector(keep)?, vector(sacrifice)?);
    let out = purify(stab, &a, &b);
    Ok(serde_json::json!({
        "keep": a,
        "sacrifice": b,
        "kept": out.kept,
        "p_success": out.p_success,
        "fidelity_before": a.fidelity(),
        "fidelity_after": out.kept.map(|k| k.fidelity()),
    })
    .to_string())
}

pub fn loss_estimate_json(eta: f64, m_arms: u32, branching: &[u32], samples: u64, seed: u64) -> Result<String, String> {
    let params = LossParams {
        eta,
        branching: branching.to_vec(),
        m_arms,
        samples,
        seed,
        ..LossParams::default()
    };
    let est = mc_link_success(&params).map_err(|e| e.to_string())?;
    let (half, link) = analytic_link_success(&params).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "estimate": est,
        "closed_form": { "half_rgs": half, "link": link },
    })
    .to_string())
}

#[wasm_bindgen]
pub fn fidelity_sweep(p_max: f64, points: usize, eps_logical: f64, hops: u32, rounds: u32) -> Result<String, JsError> {
    fidelity_sweep_json(p_max, points, eps_logical, hops, rounds).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn purify_step(stab: &str, keep: Vec<f64>, sacrifice: Vec<f64>) -> Result<String, JsError> {
    purify_step_json(stab, &keep, &sacrifice).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn loss_estimate(eta: f64, m_arms: u32, branching: Vec<u32>, samples: u64, seed: u64) -> Result<String, JsError> {
    loss_estimate_json(eta, m_arms, &branching, samples, seed).map_err(|e| JsError::new(&e))
}
