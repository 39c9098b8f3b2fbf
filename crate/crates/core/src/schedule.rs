//! Purification schedules as expression trees, evaluated optimistically.
//!
//! Every purification in a tree runs without waiting for its herald; all
//! outcomes are compared in one final classical round, and the attempt
//! succeeds only if every purification succeeded. The success probability of
//! a tree is therefore the product of its branch probabilities.

use serde::{Deserialize, Serialize};

use crate::belldiag::{bsm_compose, ErrorVector};
use crate::error::{Error, Result};
use crate::purify::{purify, Stabilizer};

/// Stabilizer order for end-node pumping, repeated cyclically.
pub const PUMP_SEQUENCE: [Stabilizer; 4] = [Stabilizer::YY, Stabilizer::ZX, Stabilizer::YY, Stabilizer::XZ];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleExpr {
    Link {
        hop: usize,
    },
    Swap {
        parts: Vec<ScheduleExpr>,
    },
    Purify {
        stab: Stabilizer,
        keep: Box<ScheduleExpr>,
        sacrifice: Box<ScheduleExpr>,
    },
}

impl ScheduleExpr {
    pub fn link(hop: usize) -> Self {
        ScheduleExpr::Link { hop }
    }

    pub fn swap(parts: Vec<ScheduleExpr>) -> Self {
        ScheduleExpr::Swap { parts }
    }

    pub fn purify(stab: Stabilizer, keep: ScheduleExpr, sacrifice: ScheduleExpr) -> Self {
        ScheduleExpr::Purify {
            stab,
            keep: Box::new(keep),
            sacrifice: Box::new(sacrifice),
        }
    }

    /// Half-open hop range `[start, end)` spanned by this node.
    pub fn span(&self, hops: usize) -> Result<(usize, usize)> {
        match self {
            ScheduleExpr::Link { hop } => {
                if *hop < hops {
                    Ok((*hop, hop + 1))
                } else {
                    Err(Error::Schedule(format!("link hop {hop} outside 0..{hops}")))
                }
            }
            ScheduleExpr::Swap { parts } => {
                let mut spans = parts.iter().map(|p| p.span(hops));
                let (start, mut end) = spans
                    .next()
                    .ok_or_else(|| Error::Schedule("swap with no parts".into()))??;
                for span in spans {
                    let (s, e) = span?;
                    if s != end {
                        return Err(Error::Schedule(format!(
                            "swap parts not contiguous: segment ending at hop {end} followed by one starting at {s}"
                        )));
                    }
                    end = e;
                }
                Ok((start, end))
            }
            ScheduleExpr::Purify { stab, keep, sacrifice } => {
                let a = keep.span(hops)?;
                let b = sacrifice.span(hops)?;
                if a != b {
                    return Err(Error::Schedule(format!(
                        "{stab} purification of pairs spanning different ranges {a:?} and {b:?}"
                    )));
                }
                Ok(a)
            }
        }
    }

    /// Checks all structural invariants for a chain of `hops` links.
    pub fn validate(&self, hops: usize) -> Result<(usize, usize)> {
        self.span(hops)
    }

    /// Number of `Link` leaves per hop.
    pub fn leaf_counts(&self, hops: usize) -> Vec<u32> {
        let mut counts = vec![0; hops];
        self.count_leaves(&mut counts);
        counts
    }

    fn count_leaves(&self, counts: &mut [u32]) {
        match self {
            ScheduleExpr::Link { hop } => {
                if let Some(c) = counts.get_mut(*hop) {
                    *c += 1;
                }
            }
            ScheduleExpr::Swap { parts } => parts.iter().for_each(|p| p.count_leaves(counts)),
            ScheduleExpr::Purify { keep, sacrifice, .. } => {
                keep.count_leaves(counts);
                sacrifice.count_leaves(counts);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleResult {
    /// `None` when some purification can never succeed.
    pub vector: Option<ErrorVector>,
    pub p_success: f64,
    pub half_rgs_per_hop: Vec<u32>,
    pub max_half_rgs_per_hop: u32,
    pub comm_rounds: u32,
}

impl ScheduleResult {
    pub fn fidelity(&self) -> f64 {
        self.vector.map_or(0.0, |v| v.fidelity())
    }
}

/// One purification performed during evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurifyStep {
    pub stab: Stabilizer,
    pub keep: ErrorVector,
    pub sacrifice: ErrorVector,
    pub p_success: f64,
}

fn eval_node(expr: &ScheduleExpr, links: &[ErrorVector], trace: &mut Vec<PurifyStep>) -> Option<(ErrorVector, f64)> {
    match expr {
        ScheduleExpr::Link { hop } => Some((links[*hop], 1.0)),
        ScheduleExpr::Swap { parts } => {
            let mut parts = parts.iter();
            let (mut acc, mut p) = eval_node(parts.next()?, links, trace)?;
            for part in parts {
                let (e, q) = eval_node(part, links, trace)?;
                acc = bsm_compose(&acc, &e);
                p *= q;
            }
            Some((acc, p))
        }
        ScheduleExpr::Purify { stab, keep, sacrifice } => {
            let (k, pk) = eval_node(keep, links, trace)?;
            let (s, ps) = eval_node(sacrifice, links, trace)?;
            let out = purify(*stab, &k, &s);
            trace.push(PurifyStep {
                stab: *stab,
                keep: k,
                sacrifice: s,
                p_success: out.p_success,
            });
            out.kept.map(|kept| (kept, pk * ps * out.p_success))
        }
    }
}

/// Evaluates with a separate link vector per hop, also returning every
/// purification step in evaluation order.
pub fn evaluate_traced(expr: &ScheduleExpr, links: &[ErrorVector]) -> Result<(ScheduleResult, Vec<PurifyStep>)> {
    expr.validate(links.len())?;
    let mut trace = Vec::new();
    let out = eval_node(expr, links, &mut trace);
    let half_rgs_per_hop = expr.leaf_counts(links.len());
    let max_half_rgs_per_hop = half_rgs_per_hop.iter().copied().max().unwrap_or(0);
    let result = ScheduleResult {
        vector: out.map(|(v, _)| v),
        p_success: out.map_or(0.0, |(_, p)| p),
        half_rgs_per_hop,
        max_half_rgs_per_hop,
        comm_rounds: 1,
    };
    Ok((result, trace))
}

pub fn evaluate_links(expr: &ScheduleExpr, links: &[ErrorVector]) -> Result<ScheduleResult> {
    evaluate_traced(expr, links).map(|(r, _)| r)
}

/// Evaluates with the same link vector on each of `hops` hops.
pub fn evaluate(expr: &ScheduleExpr, link: &ErrorVector, hops: usize) -> Result<ScheduleResult> {
    evaluate_links(expr, &vec![*link; hops])
}

fn swap_range(range: std::ops::Range<usize>, leaf: impl Fn(usize) -> ScheduleExpr) -> ScheduleExpr {
    ScheduleExpr::swap(range.map(leaf).collect())
}

/// Plain swapping of one link per hop.
pub fn preset_raw(hops: usize) -> Result<ScheduleExpr> {
    if hops == 0 {
        return Err(Error::param("hops", 0.0, "expected at least one hop"));
    }
    Ok(swap_range(0..hops, ScheduleExpr::link))
}

/// Three end-to-end pairs purified at different stages, then combined.
///
/// * pair 1: `YY` on every link before swapping;
/// * pair 2: each half of the chain swapped, `YY` purified at the midpoint,
///   then joined;
/// * pair 3: raw swapping.
///
/// Pair 1 is pumped with pair 2 using `ZX`, and the result with pair 3 using
/// `YY`. Every hop uses five half-RGSs per side.
pub fn preset_fig5(hops: usize) -> Result<ScheduleExpr> {
    if hops < 2 || hops % 2 != 0 {
        return Err(Error::param("hops", hops as f64, "expected an even hop count of at least 2"));
    }
    let mid = hops / 2;
    let pair1 = swap_range(0..hops, |i| {
        ScheduleExpr::purify(Stabilizer::YY, ScheduleExpr::link(i), ScheduleExpr::link(i))
    });
    let half = |r: std::ops::Range<usize>| {
        ScheduleExpr::purify(
            Stabilizer::YY,
            swap_range(r.clone(), ScheduleExpr::link),
            swap_range(r, ScheduleExpr::link),
        )
    };
    let pair2 = ScheduleExpr::swap(vec![half(0..mid), half(mid..hops)]);
    let pair3 = swap_range(0..hops, ScheduleExpr::link);
    Ok(ScheduleExpr::purify(
        Stabilizer::YY,
        ScheduleExpr::purify(Stabilizer::ZX, pair1, pair2),
        pair3,
    ))
}

/// End-node pumping of a raw end-to-end pair for `rounds` rounds, as a tree.
pub fn preset_baseline_pump(hops: usize, rounds: usize) -> Result<ScheduleExpr> {
    let raw = preset_raw(hops)?;
    Ok((0..rounds).fold(raw.clone(), |held, r| {
        ScheduleExpr::purify(PUMP_SEQUENCE[r % PUMP_SEQUENCE.len()], held, raw.clone())
    }))
}

/// Default number of pumping rounds for the baseline preset.
pub const BASELINE_ROUNDS: usize = 4;

pub const PRESET_NAMES: [&str; 3] = ["fig5", "raw", "baseline_pump"];

pub fn preset(name: &str, hops: usize) -> Result<ScheduleExpr> {
    match name {
        "fig5" => preset_fig5(hops),
        "raw" => preset_raw(hops),
        "baseline_pump" => preset_baseline_pump(hops, BASELINE_ROUNDS),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpResult {
    /// `None` when a round can never succeed.
    pub final_vector: Option<ErrorVector>,
    pub rounds: u32,
    pub per_round_p: Vec<f64>,
    pub stabilizers: Vec<Stabilizer>,
    pub converged: bool,
    /// Filled in by the timing model.
    pub expected_time: Option<f64>,
}

impl PumpResult {
    pub fn fidelity(&self) -> f64 {
        self.final_vector.map_or(0.0, |v| v.fidelity())
    }

    /// Probability that every round succeeds.
    pub fn p_success(&self) -> f64 {
        self.per_round_p.iter().product()
    }
}

fn pump(e2e: &ErrorVector, rounds: u32, stop: impl Fn(&ErrorVector) -> bool) -> PumpResult {
    let mut held = *e2e;
    let mut per_round_p = Vec::new();
    let mut stabilizers = Vec::new();
    for r in 0..rounds {
        if stop(&held) {
            break;
        }
        let stab = PUMP_SEQUENCE[r as usize % PUMP_SEQUENCE.len()];
        let out = purify(stab, &held, e2e);
        per_round_p.push(out.p_success);
        stabilizers.push(stab);
        match out.kept {
            Some(k) => held = k,
            None => {
                return PumpResult {
                    final_vector: None,
                    rounds: per_round_p.len() as u32,
                    per_round_p,
                    stabilizers,
                    converged: false,
                    expected_time: None,
                }
            }
        }
    }
    PumpResult {
        final_vector: Some(held),
        rounds: per_round_p.len() as u32,
        converged: stop(&held),
        per_round_p,
        stabilizers,
        expected_time: None,
    }
}

/// Pumps a held end-to-end pair with fresh copies of `e2e` until its
/// fidelity reaches `target` or `max_rounds` have run.
pub fn pump_baseline(e2e: &ErrorVector, target_fidelity: f64, max_rounds: u32) -> Result<PumpResult> {
    if !(target_fidelity > 0.0 && target_fidelity <= 1.0) {
        return Err(Error::param("target_fidelity", target_fidelity, "expected a value in (0, 1]"));
    }
    if max_rounds == 0 {
        return Err(Error::param("max_rounds", 0.0, "expected at least one round"));
    }
    Ok(pump(e2e, max_rounds, |v| v.fidelity() >= target_fidelity))
}

/// Exactly `rounds` pumping rounds.
pub fn pump_fixed(e2e: &ErrorVector, rounds: u32) -> PumpResult {
    let mut out = pump(e2e, rounds, |_| false);
    out.converged = out.final_vector.is_some();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    /// Half-RGSs per side of each hop.
    pub per_hop: Vec<u32>,
    /// Anchor emitters needed at each of the `hops + 1` nodes.
    pub per_node_emitters: Vec<u32>,
}

pub fn resource_report(expr: &ScheduleExpr, hops: usize) -> Result<ResourceReport> {
    expr.validate(hops)?;
    let per_hop = expr.leaf_counts(hops);
    let per_node_emitters = (0..=hops)
        .map(|n| {
            let left = if n > 0 { per_hop[n - 1] } else { 0 };
            let right = per_hop.get(n).copied().unwrap_or(0);
            left.max(right)
        })
        .collect();
    Ok(ResourceReport {
        per_hop,
        per_node_emitters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(w: f64, x: f64, y: f64, z: f64) -> ErrorVector {
        ErrorVector::new(w, x, y, z).unwrap()
    }

    #[test]
    fn single_link() {
        let e = v(0.9, 0.05, 0.03, 0.02);
        let r = evaluate(&ScheduleExpr::link(0), &e, 1).unwrap();
        assert_eq!(r.vector, Some(e));
        assert_eq!(r.p_success, 1.0);
        assert_eq!(r.half_rgs_per_hop, vec![1]);
        assert_eq!(r.comm_rounds, 1);
    }

    #[test]
    fn link_level_yy() {
        let e = v(0.85, 0.05, 0.05, 0.05);
        let expr = ScheduleExpr::purify(Stabilizer::YY, ScheduleExpr::link(0), ScheduleExpr::link(0));
        let r = evaluate(&expr, &e, 3).unwrap();
        assert_abs_diff_eq!(r.p_success, 0.82, epsilon = 1e-15);
        assert_abs_diff_eq!(r.fidelity(), 0.725 / 0.82, epsilon = 1e-15);
        assert_eq!(r.half_rgs_per_hop, vec![2, 0, 0]);
    }

    #[test]
    fn fig5_structure() {
        for hops in [2, 4, 10] {
            let expr = preset_fig5(hops).unwrap();
            assert_eq!(expr.validate(hops).unwrap(), (0, hops));
            assert_eq!(expr.leaf_counts(hops), vec![5; hops]);
            let r = evaluate(&expr, &ErrorVector::PERFECT, hops).unwrap();
            assert_eq!(r.vector, Some(ErrorVector::PERFECT));
            assert_eq!(r.p_success, 1.0);
            assert_eq!(r.max_half_rgs_per_hop, 5);
        }
        assert!(preset_fig5(3).is_err());
        assert!(preset_fig5(0).is_err());
    }

    #[test]
    fn fig5_json_shape() {
        let json = serde_json::to_value(preset_fig5(2).unwrap()).unwrap();
        assert_eq!(json["type"], "purify");
        assert_eq!(json["stab"], "YY");
        assert_eq!(json["keep"]["stab"], "ZX");
        assert_eq!(json["sacrifice"]["type"], "swap");
        assert_eq!(json["sacrifice"]["parts"][0], serde_json::json!({"type": "link", "hop": 0}));
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let gap = ScheduleExpr::swap(vec![ScheduleExpr::link(0), ScheduleExpr::link(2)]);
        assert!(matches!(gap.validate(3), Err(Error::Schedule(_))));
        let mismatched = ScheduleExpr::purify(Stabilizer::ZX, ScheduleExpr::link(0), ScheduleExpr::link(1));
        assert!(mismatched.validate(2).is_err());
        assert!(ScheduleExpr::link(4).validate(4).is_err());
        assert!(ScheduleExpr::swap(vec![]).validate(1).is_err());
        assert!(evaluate(&gap, &ErrorVector::PERFECT, 3).is_err());
    }

    #[test]
    fn singleton_swap_is_identity() {
        let e = v(0.8, 0.1, 0.05, 0.05);
        let inner = ScheduleExpr::purify(Stabilizer::XZ, ScheduleExpr::link(0), ScheduleExpr::link(0));
        let a = evaluate(&inner, &e, 1).unwrap();
        let b = evaluate(&ScheduleExpr::swap(vec![inner]), &e, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn link_count_must_match_tree() {
        let expr = preset_raw(3).unwrap();
        assert!(evaluate_links(&expr, &[ErrorVector::PERFECT; 2]).is_err());
        assert!(evaluate_links(&expr, &[ErrorVector::PERFECT; 3]).is_ok());
    }

    #[test]
    fn heterogeneous_links_swap_in_order() {
        let a = v(0.9, 0.1, 0.0, 0.0);
        let b = v(0.9, 0.0, 0.0, 0.1);
        let r = evaluate_links(&preset_raw(2).unwrap(), &[a, b]).unwrap();
        assert_eq!(r.vector, Some(bsm_compose(&a, &b)));
    }

    #[test]
    fn pumping_examples() {
        let e = v(0.85, 0.05, 0.05, 0.05);
        let none = pump_baseline(&e, 0.8, 4).unwrap();
        assert_eq!(none.rounds, 0);
        assert_eq!(none.final_vector, Some(e));
        assert!(none.converged);

        let one = pump_baseline(&e, 0.88, 4).unwrap();
        assert_eq!(one.rounds, 1);
        assert_eq!(one.stabilizers, vec![Stabilizer::YY]);
        assert_eq!(one.per_round_p.len(), 1);
        assert_abs_diff_eq!(one.per_round_p[0], 0.82, epsilon = 1e-15);
        assert_abs_diff_eq!(one.fidelity(), 0.88415, epsilon = 5e-6);
        assert!(one.converged);

        let perfect = pump_baseline(&ErrorVector::PERFECT, 0.999, 4).unwrap();
        assert_eq!(perfect.rounds, 0);

        let stuck = pump_baseline(&e, 1.0, 3).unwrap();
        assert_eq!(stuck.rounds, 3);
        assert!(!stuck.converged);

        assert!(pump_baseline(&e, 1.5, 3).is_err());
        assert!(pump_baseline(&e, 0.9, 0).is_err());
    }

    #[test]
    fn pump_cycles_and_matches_tree() {
        let e = v(0.8, 0.08, 0.04, 0.08);
        let pumped = pump_fixed(&e, 6);
        assert_eq!(
            pumped.stabilizers,
            [PUMP_SEQUENCE.as_slice(), &PUMP_SEQUENCE[..2]].concat()
        );
        let tree = preset_baseline_pump(1, 6).unwrap();
        let r = evaluate(&tree, &e, 1).unwrap();
        assert_abs_diff_eq!(r.p_success, pumped.p_success(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.fidelity(), pumped.fidelity(), epsilon = 1e-15);
        assert_eq!(r.half_rgs_per_hop, vec![7]);
    }

    #[test]
    fn resources() {
        let r = resource_report(&ScheduleExpr::link(0), 1).unwrap();
        assert_eq!(r.per_hop, vec![1]);
        let expr = ScheduleExpr::purify(Stabilizer::YY, ScheduleExpr::link(0), ScheduleExpr::link(0));
        let r = resource_report(&expr, 3).unwrap();
        assert_eq!(r.per_hop, vec![2, 0, 0]);
        assert_eq!(r.per_node_emitters, vec![2, 2, 0, 0]);
        let r = resource_report(&preset_fig5(10).unwrap(), 10).unwrap();
        assert_eq!(r.per_hop, vec![5; 10]);
        assert_eq!(r.per_node_emitters, vec![5; 11]);
    }

    #[test]
    fn presets_by_name() {
        for name in PRESET_NAMES {
            assert!(preset(name, 10).unwrap().validate(10).is_ok());
        }
        assert!(matches!(preset("fig9", 10), Err(Error::UnknownPreset(_))));
    }
}
