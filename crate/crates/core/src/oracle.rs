//! Density-matrix ground truth for purification and swapping.
//!
//! Small dense simulations (at most four qubits) of the physical circuits
//! behind [`crate::purify`] and [`crate::belldiag::bsm_compose`]. These are
//! slow and exist to check the closed-form maps, not to be used in sweeps.
//!
//! Qubits are ordered `a1, b1, a2, b2`: pair 1 (kept) then pair 2
//! (sacrificial), with qubit 0 the most significant bit.
//!
//! Every purification circuit is the same bilateral-CNOT parity check for
//! `Z_a X_b`: Alice applies `CNOT(a1 -> a2)` and reads `a2` in `Z`, Bob
//! applies `CNOT(b2 -> b1)` and reads `b2` in `X`. The other two stabilizers
//! are measured by first applying a graph-state automorphism `L` to both
//! pairs, chosen so that `L S L^dag = Z_a X_b`, and undoing it on the kept
//! pair afterwards. The kept pair is returned in the `H (x) H` frame, and each
//! outcome branch gets the Pauli correction that restores the ideal graph
//! state in the noiseless case.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belldiag::{bsm_compose, ErrorVector};
use crate::purify::{kept_numerators, success_prob, PurifyOutcome, Stabilizer};

type Mat = DMatrix<Complex64>;

const TRACE_TOLERANCE: f64 = 1e-10;
const HERMITIAN_TOLERANCE: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(entries: [[Complex64; 2]; 2]) -> Mat {
    Mat::from_fn(2, 2, |r, k| entries[r][k])
}

fn identity() -> Mat {
    Mat::identity(2, 2)
}
fn pauli_x() -> Mat {
    mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
}
fn pauli_y() -> Mat {
    mat2([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])
}
fn pauli_z() -> Mat {
    mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
}
fn hadamard() -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    mat2([[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]])
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn kron_all(ops: &[Mat]) -> Mat {
    ops.iter()
        .skip(1)
        .fold(ops[0].clone(), |acc, m| acc.kronecker(m))
}

/// `op` on qubit `q` of an `n`-qubit register.
fn on_qubit(op: &Mat, q: usize, n: usize) -> Mat {
    let ops: Vec<Mat> = (0..n).map(|k| if k == q { op.clone() } else { identity() }).collect();
    kron_all(&ops)
}

fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let dim = 1 << n;
    let mut u = Mat::zeros(dim, dim);
    for i in 0..dim {
        let ctrl = (i >> (n - 1 - control)) & 1;
        let j = if ctrl == 1 { i ^ (1 << (n - 1 - target)) } else { i };
        u[(j, i)] = c(1., 0.);
    }
    u
}

fn cz(q1: usize, q2: usize, n: usize) -> Mat {
    let dim = 1 << n;
    Mat::from_fn(dim, dim, |r, k| {
        if r != k {
            c(0., 0.)
        } else if (r >> (n - 1 - q1)) & 1 == 1 && (r >> (n - 1 - q2)) & 1 == 1 {
            c(-1., 0.)
        } else {
            c(1., 0.)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    Z,
    X,
}

fn projector(basis: Basis, outcome: usize) -> Mat {
    let v = match (basis, outcome) {
        (Basis::Z, 0) => [c(1., 0.), c(0., 0.)],
        (Basis::Z, _) => [c(0., 0.), c(1., 0.)],
        (Basis::X, 0) => [c(0.5f64.sqrt(), 0.), c(0.5f64.sqrt(), 0.)],
        (Basis::X, _) => [c(0.5f64.sqrt(), 0.), c(-(0.5f64.sqrt()), 0.)],
    };
    Mat::from_fn(2, 2, |r, k| v[r] * v[k].conj())
}

/// `CZ|++>` in the computational basis.
pub fn graph_state() -> DVector<Complex64> {
    DVector::from_vec(vec![c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(-0.5, 0.)])
}

/// Frame operators in `[II, ZI, ZZ, IZ]` order.
fn frame_operators() -> [Mat; 4] {
    [
        identity().kronecker(&identity()),
        pauli_z().kronecker(&identity()),
        pauli_z().kronecker(&pauli_z()),
        identity().kronecker(&pauli_z()),
    ]
}

/// The graph state hit by each frame, i.e. the graph-state Bell basis.
fn frame_basis() -> &'static [DVector<Complex64>; 4] {
    static BASIS: OnceLock<[DVector<Complex64>; 4]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let g = graph_state();
        frame_operators().map(|p| &p * &g)
    })
}

/// A mixed state of up to four qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    rho: Mat,
}

impl DensityMatrix {
    pub fn from_matrix(rho: Mat) -> Self {
        let dim = rho.nrows();
        assert!(dim.is_power_of_two() && rho.ncols() == dim, "density matrix must be 2^n square");
        let qubits = dim.trailing_zeros() as usize;
        assert!(qubits <= 4, "oracle handles at most four qubits");
        DensityMatrix { qubits, rho }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &Mat {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.rho - self.rho.adjoint()))
    }

    pub fn is_valid(&self) -> bool {
        (self.trace() - 1.0).abs() <= TRACE_TOLERANCE && self.hermiticity_error() <= HERMITIAN_TOLERANCE
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix(self.rho.kronecker(&other.rho))
    }
}

/// Mixture of the four frame states with the given weights.
pub fn bell_diagonal_state(e: &ErrorVector) -> DensityMatrix {
    let mut rho = Mat::zeros(4, 4);
    for (psi, weight) in frame_basis().iter().zip(e.weights()) {
        rho += psi * psi.adjoint() * c(weight, 0.);
    }
    DensityMatrix::from_matrix(rho)
}

/// Diagonal of a two-qubit state in the frame basis, unnormalised.
fn frame_diagonal(rho: &Mat) -> [f64; 4] {
    let basis = frame_basis();
    std::array::from_fn(|k| (basis[k].adjoint() * rho * &basis[k])[(0, 0)].re)
}

/// Frame weights of a two-qubit state.
pub fn extract_weights(rho: &DensityMatrix) -> [f64; 4] {
    assert_eq!(rho.qubits, 2);
    frame_diagonal(&rho.rho)
}

/// Largest off-diagonal magnitude of a two-qubit state in the frame basis.
pub fn off_diagonal_weight(rho: &DensityMatrix) -> f64 {
    assert_eq!(rho.qubits, 2);
    let basis = frame_basis();
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                worst = worst.max((basis[i].adjoint() * &rho.rho * &basis[j])[(0, 0)].norm());
            }
        }
    }
    worst
}

/// Keeps qubits `a1, b1` of a four-qubit matrix.
fn trace_out_second_pair(rho: &Mat) -> Mat {
    Mat::from_fn(4, 4, |i, k| (0..4).map(|j| rho[((i << 2) | j, (k << 2) | j)]).sum())
}

/// Keeps qubits `a1, b2` (0 and 3) of a four-qubit matrix.
fn trace_out_middle(rho: &Mat) -> Mat {
    let index = |outer: usize, mid: usize| ((outer >> 1) << 3) | (mid << 1) | (outer & 1);
    Mat::from_fn(4, 4, |i, k| (0..4).map(|m| rho[(index(i, m), index(k, m))]).sum())
}

fn all_two_qubit_paulis() -> Vec<Mat> {
    let singles = [identity(), pauli_x(), pauli_y(), pauli_z()];
    let mut out = Vec::with_capacity(16);
    for a in &singles {
        for b in &singles {
            out.push(a.kronecker(b));
        }
    }
    out
}

/// Pauli that maps `ideal` (normalised) back onto the graph state.
fn restoring_pauli(ideal: &Mat) -> Mat {
    let g = graph_state();
    all_two_qubit_paulis()
        .into_iter()
        .find(|p| {
            let fixed = p * ideal * p.adjoint();
            ((g.adjoint() * fixed * &g)[(0, 0)].re - 1.0).abs() < 1e-9
        })
        .expect("noiseless branch is a Pauli image of the graph state")
}

/// Local Clifford `L` (on both qubits of a pair) with `L S L^dag ~ Z_a X_b`
/// that also fixes the graph state.
fn frame_automorphism(stab: Stabilizer) -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match stab {
        Stabilizer::ZX => identity().kronecker(&identity()),
        // Exchanges Z_a X_b and X_a Z_b, fixes Y_a Y_b.
        Stabilizer::XZ => hadamard().kronecker(&hadamard()),
        // Order-3 cycle X_a Z_b -> Y_a Y_b -> Z_a X_b -> X_a Z_b.
        Stabilizer::YY => {
            let a = mat2([[c(h, 0.), c(0., h)], [c(h, 0.), c(0., -h)]]);
            let b = mat2([[c(h, 0.), c(h, 0.)], [c(0., -h), c(0., h)]]);
            a.kronecker(&b)
        }
    }
}

struct Branch {
    projector: Mat,
    accepted: bool,
    /// Applied to the kept pair after tracing out pair 2.
    recovery: Mat,
}

struct PurificationCircuit {
    unitary: Mat,
    branches: Vec<Branch>,
}

impl PurificationCircuit {
    fn build(stab: Stabilizer) -> Self {
        let l = frame_automorphism(stab);
        let rotate = l.kronecker(&l);
        let parity = cnot(3, 1, 4) * cnot(0, 2, 4);
        let unitary = parity * rotate;
        let exit_frame = hadamard().kronecker(&hadamard()) * l.adjoint();

        let ideal_in = bell_diagonal_state(&ErrorVector::PERFECT);
        let ideal = ideal_in.tensor(&ideal_in).rho;
        let ideal = &unitary * ideal * unitary.adjoint();

        let mut branches = Vec::with_capacity(4);
        let mut accepted_parity = None;
        for (ma, mb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let projector = on_qubit(&projector(Basis::Z, ma), 2, 4) * on_qubit(&projector(Basis::X, mb), 3, 4);
            let kept = trace_out_second_pair(&(&projector * &ideal * &projector));
            let p = kept.trace().re;
            if p > 1e-12 {
                match accepted_parity {
                    None => accepted_parity = Some(ma ^ mb),
                    Some(par) => assert_eq!(par, ma ^ mb, "noiseless outcomes must have fixed parity"),
                }
            }
            branches.push((ma ^ mb, projector, kept, p));
        }
        let accepted_parity = accepted_parity.expect("some branch is possible");

        let branches = branches
            .into_iter()
            .map(|(parity, projector, kept, p)| {
                let accepted = parity == accepted_parity;
                let recovery = if accepted {
                    let framed = &exit_frame * kept * exit_frame.adjoint() / c(p, 0.);
                    restoring_pauli(&framed) * &exit_frame
                } else {
                    exit_frame.clone()
                };
                Branch {
                    projector,
                    accepted,
                    recovery,
                }
            })
            .collect();
        PurificationCircuit { unitary, branches }
    }

    fn get(stab: Stabilizer) -> &'static PurificationCircuit {
        static CIRCUITS: OnceLock<[PurificationCircuit; 3]> = OnceLock::new();
        let all = CIRCUITS.get_or_init(|| Stabilizer::ALL.map(PurificationCircuit::build));
        &all[Stabilizer::ALL.iter().position(|s| *s == stab).unwrap()]
    }

    /// Unnormalised kept-pair states on the agree and disagree branches.
    fn run(&self, e1: &ErrorVector, e2: &ErrorVector) -> (Mat, Mat) {
        let input = bell_diagonal_state(e1).tensor(&bell_diagonal_state(e2)).rho;
        let evolved = &self.unitary * input * self.unitary.adjoint();
        let mut agree = Mat::zeros(4, 4);
        let mut disagree = Mat::zeros(4, 4);
        for b in &self.branches {
            let kept = trace_out_second_pair(&(&b.projector * &evolved * &b.projector));
            let kept = &b.recovery * kept * b.recovery.adjoint();
            if b.accepted {
                agree += kept;
            } else {
                disagree += kept;
            }
        }
        (agree, disagree)
    }
}

/// Purification by direct simulation of the parity circuit.
pub fn oracle_purify(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> PurifyOutcome {
    let (agree, _) = PurificationCircuit::get(stab).run(e1, e2);
    let p = agree.trace().re;
    if p <= 0.0 {
        return PurifyOutcome::impossible();
    }
    let kept = DensityMatrix::from_matrix(agree / c(p, 0.));
    match ErrorVector::from_unnormalized(extract_weights(&kept)) {
        Some((v, _)) => PurifyOutcome {
            kept: Some(v),
            p_success: p.min(1.0),
        },
        None => PurifyOutcome::impossible(),
    }
}

/// Kept-pair state (normalised) on the agree branch, for basis checks.
pub fn oracle_purify_state(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> Option<DensityMatrix> {
    let (agree, _) = PurificationCircuit::get(stab).run(e1, e2);
    let p = agree.trace().re;
    (p > 0.0).then(|| DensityMatrix::from_matrix(agree / c(p, 0.)))
}

/// Probabilities of the agree and disagree parity branches.
pub fn parity_branch_probabilities(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> (f64, f64) {
    let (agree, disagree) = PurificationCircuit::get(stab).run(e1, e2);
    (agree.trace().re, disagree.trace().re)
}

struct BsmCircuit {
    unitary: Mat,
    branches: Vec<(Mat, Mat)>,
}

impl BsmCircuit {
    fn get() -> &'static BsmCircuit {
        static CIRCUIT: OnceLock<BsmCircuit> = OnceLock::new();
        CIRCUIT.get_or_init(|| {
            let unitary = cz(1, 2, 4);
            let ideal_in = bell_diagonal_state(&ErrorVector::PERFECT);
            let ideal = &unitary * ideal_in.tensor(&ideal_in).rho * unitary.adjoint();
            let branches = [(0, 0), (0, 1), (1, 0), (1, 1)]
                .into_iter()
                .map(|(m1, m2)| {
                    let proj = on_qubit(&projector(Basis::X, m1), 1, 4) * on_qubit(&projector(Basis::X, m2), 2, 4);
                    let kept = trace_out_middle(&(&proj * &ideal * &proj));
                    let p = kept.trace().re;
                    let correction = restoring_pauli(&(kept / c(p, 0.)));
                    (proj, correction)
                })
                .collect();
            BsmCircuit { unitary, branches }
        })
    }
}

/// Rotated Bell measurement (`CZ` then `X` readout) on `b1` and `a2`,
/// averaged over outcomes with frame corrections. Returns the `a1, b2` pair.
pub fn oracle_bsm_state(e1: &ErrorVector, e2: &ErrorVector) -> DensityMatrix {
    let circuit = BsmCircuit::get();
    let input = bell_diagonal_state(e1).tensor(&bell_diagonal_state(e2)).rho;
    let evolved = &circuit.unitary * input * circuit.unitary.adjoint();
    let mut out = Mat::zeros(4, 4);
    for (proj, corr) in &circuit.branches {
        let kept = trace_out_middle(&(proj * &evolved * proj));
        out += corr * kept * corr.adjoint();
    }
    DensityMatrix::from_matrix(out)
}

pub fn oracle_bsm(e1: &ErrorVector, e2: &ErrorVector) -> ErrorVector {
    let rho = oracle_bsm_state(e1, e2);
    ErrorVector::from_unnormalized(extract_weights(&rho))
        .expect("swap output has unit trace")
        .0
}

/// Uniformly random point on the probability simplex.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R) -> ErrorVector {
    let draws: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    ErrorVector::from_unnormalized(draws)
        .expect("exponential draws are positive")
        .0
}

/// Signature of an analytic purification map under test.
pub type PurifyFn = fn(Stabilizer, &ErrorVector, &ErrorVector) -> PurifyOutcome;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenCase {
    pub stab: Stabilizer,
    pub keep: ErrorVector,
    pub sacrifice: ErrorVector,
    pub kept: Option<ErrorVector>,
    pub p_success: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizerRow {
    pub stab: Stabilizer,
    /// Label whose analytic success probability matches the oracle.
    pub success_matches: Option<Stabilizer>,
    /// Label whose analytic output map matches the oracle.
    pub transform_matches: Option<Stabilizer>,
    pub max_p_deviation: f64,
    pub max_kept_deviation: f64,
    /// Reported success probability equals this label's closed form.
    pub self_consistent: bool,
    /// The output map of the exchanged label (`ZX` <-> `XZ`) also sums to
    /// this label's success probability.
    pub exchanged_consistent: bool,
}

/// `ZX` and `XZ` exchanged; `YY` fixed.
pub fn exchanged_label(stab: Stabilizer) -> Stabilizer {
    match stab {
        Stabilizer::ZX => Stabilizer::XZ,
        Stabilizer::XZ => Stabilizer::ZX,
        Stabilizer::YY => Stabilizer::YY,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub rows: Vec<StabilizerRow>,
    pub bsm_max_deviation: f64,
    pub passed: bool,
}

pub const VALIDATION_TOLERANCE: f64 = 1e-10;

fn max_component_gap(a: &ErrorVector, b: &ErrorVector) -> f64 {
    a.weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Compares `analytic` against the oracle on `samples` random input pairs
/// per stabilizer, and the swap map on the same number of pairs.
pub fn validate(analytic: PurifyFn, samples: usize, seed: u64) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(ErrorVector, ErrorVector)> = (0..samples)
        .map(|_| (random_vector(&mut rng), random_vector(&mut rng)))
        .collect();

    let mut rows = Vec::new();
    for stab in Stabilizer::ALL {
        let mut dev_p = 0.0f64;
        let mut dev_kept = 0.0f64;
        let mut success_gap = [0.0f64; 3];
        let mut transform_gap = [0.0f64; 3];
        let mut consistency_gap = 0.0f64;
        let mut exchanged_gap = 0.0f64;
        for (e1, e2) in &inputs {
            let truth = oracle_purify(stab, e1, e2);
            let got = analytic(stab, e1, e2);
            dev_p = dev_p.max((truth.p_success - got.p_success).abs());
            dev_kept = dev_kept.max(match (truth.kept, got.kept) {
                (Some(a), Some(b)) => max_component_gap(&a, &b),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            });
            for (k, label) in Stabilizer::ALL.iter().enumerate() {
                let candidate = analytic(*label, e1, e2);
                success_gap[k] = success_gap[k].max((success_prob(*label, e1, e2) - truth.p_success).abs());
                transform_gap[k] = transform_gap[k].max(match (truth.kept, candidate.kept) {
                    (Some(a), Some(b)) => max_component_gap(&a, &b),
                    _ => f64::INFINITY,
                });
            }
            consistency_gap = consistency_gap.max((got.p_success - success_prob(stab, e1, e2)).abs());
            let exchanged: f64 = kept_numerators(exchanged_label(stab), e1, e2).iter().sum();
            exchanged_gap = exchanged_gap.max((exchanged - success_prob(stab, e1, e2)).abs());
        }
        let pick = |gaps: [f64; 3]| {
            gaps.iter()
                .position(|g| *g <= VALIDATION_TOLERANCE)
                .map(|k| Stabilizer::ALL[k])
        };
        rows.push(StabilizerRow {
            stab,
            success_matches: pick(success_gap),
            transform_matches: pick(transform_gap),
            max_p_deviation: dev_p,
            max_kept_deviation: dev_kept,
            self_consistent: consistency_gap <= VALIDATION_TOLERANCE,
            exchanged_consistent: exchanged_gap <= VALIDATION_TOLERANCE,
        });
    }

    let bsm_max_deviation = inputs
        .iter()
        .map(|(e1, e2)| max_component_gap(&oracle_bsm(e1, e2), &bsm_compose(e1, e2)))
        .fold(0.0, f64::max);

    let passed = rows.iter().all(|r| {
        r.max_p_deviation <= VALIDATION_TOLERANCE
            && r.max_kept_deviation <= VALIDATION_TOLERANCE
            && r.transform_matches == Some(r.stab)
            && r.success_matches == Some(r.stab)
    }) && bsm_max_deviation <= VALIDATION_TOLERANCE;

    ValidationReport {
        samples,
        seed,
        tolerance: VALIDATION_TOLERANCE,
        rows,
        bsm_max_deviation,
        passed,
    }
}

impl ValidationReport {
    pub fn table(&self) -> String {
        let label = |s: Option<Stabilizer>| s.map_or("none".to_string(), |s| s.to_string());
        let mut out = format!(
            "{:<4} {:>8} {:>10} {:>12} {:>12} {:>14} {:>20}\n",
            "stab", "P-match", "map-match", "max|dP|", "max|dkept|", "P closed form", "exchanged map sums"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<4} {:>8} {:>10} {:>12.3e} {:>12.3e} {:>14} {:>20}\n",
                r.stab.as_str(),
                label(r.success_matches),
                label(r.transform_matches),
                r.max_p_deviation,
                r.max_kept_deviation,
                if r.self_consistent { "yes" } else { "NO" },
                if r.exchanged_consistent { "yes" } else { "no" },
            ));
        }
        out.push_str(&format!("swap map max deviation: {:.3e}\n", self.bsm_max_deviation));
        out
    }
}

/// Oracle outputs for the documented examples plus `random` seeded pairs
/// per stabilizer.
pub fn golden_cases(random: usize, seed: u64) -> Vec<GoldenCase> {
    let v = |w, x, y, z| ErrorVector::new(w, x, y, z).expect("literal vector");
    let mut pairs: Vec<(Stabilizer, ErrorVector, ErrorVector)> = Vec::new();
    for stab in Stabilizer::ALL {
        pairs.push((stab, ErrorVector::PERFECT, ErrorVector::PERFECT));
    }
    let sym = v(0.85, 0.05, 0.05, 0.05);
    pairs.push((Stabilizer::YY, sym, sym));
    let b_flip = v(0.9, 0.0, 0.0, 0.1);
    pairs.push((Stabilizer::ZX, b_flip, b_flip));
    pairs.push((Stabilizer::ZX, b_flip, ErrorVector::PERFECT));
    pairs.push((Stabilizer::XZ, v(0.9, 0.1, 0.0, 0.0), v(0.9, 0.1, 0.0, 0.0)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for stab in Stabilizer::ALL {
        for _ in 0..random {
            pairs.push((stab, random_vector(&mut rng), random_vector(&mut rng)));
        }
    }
    pairs
        .into_iter()
        .map(|(stab, keep, sacrifice)| {
            let out = oracle_purify(stab, &keep, &sacrifice);
            GoldenCase {
                stab,
                keep,
                sacrifice,
                kept: out.kept,
                p_success: out.p_success,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purify::purify;
    use approx::assert_abs_diff_eq;

    fn v(w: f64, x: f64, y: f64, z: f64) -> ErrorVector {
        ErrorVector::new(w, x, y, z).unwrap()
    }

    fn proportional(a: &Mat, b: &Mat) -> bool {
        let k = (b.adjoint() * a).trace() / c(a.nrows() as f64, 0.);
        (k.norm() - 1.0).abs() < 1e-9 && max_abs(&(a - b * k)) < 1e-9
    }

    #[test]
    fn automorphisms_fix_graph_state_and_map_target_to_zx() {
        let g = graph_state();
        let zx = pauli_z().kronecker(&pauli_x());
        let targets = [
            (Stabilizer::ZX, zx.clone()),
            (Stabilizer::XZ, pauli_x().kronecker(&pauli_z())),
            (Stabilizer::YY, pauli_y().kronecker(&pauli_y())),
        ];
        for (stab, s) in targets {
            let l = frame_automorphism(stab);
            assert!(max_abs(&(&l * l.adjoint() - Mat::identity(4, 4))) < 1e-12);
            let overlap = (g.adjoint() * &l * &g)[(0, 0)].norm();
            assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
            assert!(proportional(&(&l * s * l.adjoint()), &zx), "{stab}");
        }
    }

    #[test]
    fn bell_diagonal_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let e = random_vector(&mut rng);
            let rho = bell_diagonal_state(&e);
            assert!(rho.is_valid());
            let back = extract_weights(&rho);
            for k in 0..4 {
                assert_abs_diff_eq!(back[k], e.weights()[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn perfect_state_is_graph_projector() {
        let rho = bell_diagonal_state(&ErrorVector::PERFECT);
        let g = graph_state();
        assert!(max_abs(&(rho.matrix() - &g * g.adjoint())) < 1e-15);
        let mixed = bell_diagonal_state(&ErrorVector::MIXED);
        assert!(max_abs(&(mixed.matrix() - Mat::identity(4, 4) * c(0.25, 0.))) < 1e-15);
    }

    #[test]
    fn perfect_inputs_pass_with_certainty() {
        for stab in Stabilizer::ALL {
            let out = oracle_purify(stab, &ErrorVector::PERFECT, &ErrorVector::PERFECT);
            assert_abs_diff_eq!(out.p_success, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(out.kept.unwrap().fidelity(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn yy_matches_self_consistent_map() {
        let e = v(0.85, 0.05, 0.05, 0.05);
        let out = oracle_purify(Stabilizer::YY, &e, &e);
        assert_abs_diff_eq!(out.p_success, 0.82, epsilon = 1e-12);
        let kept = out.kept.unwrap().weights();
        for (got, want) in kept.iter().zip([0.725, 0.005, 0.085, 0.005]) {
            assert_abs_diff_eq!(*got, want / 0.82, epsilon = 1e-12);
        }
    }

    #[test]
    fn zx_detects_z_on_b() {
        let out = oracle_purify(Stabilizer::ZX, &v(0.9, 0.0, 0.0, 0.1), &ErrorVector::PERFECT);
        assert_abs_diff_eq!(out.p_success, 0.9, epsilon = 1e-12);
        let out = oracle_purify(Stabilizer::XZ, &v(0.9, 0.1, 0.0, 0.0), &ErrorVector::PERFECT);
        assert_abs_diff_eq!(out.p_success, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn branches_sum_to_one_and_outputs_stay_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let (e1, e2) = (random_vector(&mut rng), random_vector(&mut rng));
            for stab in Stabilizer::ALL {
                let (agree, disagree) = parity_branch_probabilities(stab, &e1, &e2);
                assert_abs_diff_eq!(agree + disagree, 1.0, epsilon = 1e-12);
                let rho = oracle_purify_state(stab, &e1, &e2).unwrap();
                assert!(rho.is_valid());
                assert!(off_diagonal_weight(&rho) < 1e-10);
            }
            let swapped = oracle_bsm_state(&e1, &e2);
            assert!(swapped.is_valid());
            assert!(off_diagonal_weight(&swapped) < 1e-10);
        }
    }

    #[test]
    fn bsm_examples() {
        let out = oracle_bsm(&ErrorVector::PERFECT, &ErrorVector::PERFECT);
        assert_abs_diff_eq!(out.fidelity(), 1.0, epsilon = 1e-12);
        let out = oracle_bsm(&v(0.9, 0.1, 0.0, 0.0), &v(0.9, 0.0, 0.0, 0.1));
        for (got, want) in out.weights().iter().zip([0.81, 0.09, 0.01, 0.09]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn validation_passes_for_analytic_maps() {
        let report = validate(purify, 50, 3);
        assert!(report.passed, "{}", report.table());
        assert!(report.rows.iter().all(|r| r.self_consistent));
        let exchanged: Vec<bool> = report.rows.iter().map(|r| r.exchanged_consistent).collect();
        assert_eq!(exchanged, [false, false, true]);
    }

    fn tampered(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> PurifyOutcome {
        let mut out = purify(exchanged_label(stab), e1, e2);
        out.p_success = success_prob(stab, e1, e2);
        out
    }

    #[test]
    fn validation_rejects_swapped_labels() {
        let report = validate(tampered, 20, 3);
        assert!(!report.passed);
        assert_eq!(report.rows[0].transform_matches, Some(Stabilizer::XZ));
        assert_eq!(report.rows[1].transform_matches, Some(Stabilizer::ZX));
        assert_eq!(report.rows[2].transform_matches, Some(Stabilizer::YY));
    }
}
