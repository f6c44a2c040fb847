//! Multistart gradient synthesis of control sequences for arbitrary 8×8
//! subspace targets, and a numerical certificate of what the machine's
//! primitive set can actually generate.
//!
//! The cost is the phase-invariant infidelity `1 − |tr(V†U(σ))| / 8` over
//! the step parameters σ. The landscape is non-convex with no per-step
//! structure to exploit, so each restart runs a quasi-Newton (L-BFGS)
//! descent from an independent uniform draw and the best restart wins.
//! Restart RNG streams are derived from `(seed, restart index)`, so the
//! parallel and sequential paths return bit-identical results.
//!
//! [`controllability_rank`] computes the real dimension of the Lie algebra
//! generated by the restricted step generators by breadth-first commutator
//! closure. For the full primitive set the measured dimension is 36 — the
//! compact symplectic algebra sp(4), not su(8): the machine's reachable
//! gate set preserves an antisymmetric pairing of the basis states, and
//! targets outside that group (the plain C-NOT among them) have a strict
//! fidelity ceiling no amount of optimization can cross.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{check_unitary, identity, max_abs, CMat, C64};
use crate::machine::{entangler_generator_block, pauli_block, Axis, SUBSPACE_DIM};
use crate::sequence::{canonical_pattern, ControlSequence, Entangler, GateTarget, Step};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("invalid optimization config: {0}")]
    InvalidConfig(String),
    #[error("target is not unitary (deviation {deviation:.3e})")]
    TargetNotUnitary { deviation: f64 },
}

/// Repeating (entangler, axis) cycle that fixes the shape of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub cycle: Vec<(Entangler, Axis)>,
}

impl Pattern {
    /// The canonical A/x, B/y, A/z cycle.
    pub fn three_axis() -> Self {
        Self { cycle: (0..3).map(canonical_pattern).collect() }
    }

    /// Two-axis variant: sequences can be built from only two of the three
    /// Pauli axes.
    pub fn two_axis() -> Self {
        Self { cycle: vec![(Entangler::A, Axis::X), (Entangler::B, Axis::Y)] }
    }

    pub fn step(&self, index: usize) -> (Entangler, Axis) {
        self.cycle[index % self.cycle.len()]
    }

    /// Materialize a σ-vector into a control sequence with this pattern.
    pub fn sequence(&self, name: impl Into<String>, sigmas: &[f64]) -> ControlSequence {
        let steps = sigmas
            .iter()
            .enumerate()
            .map(|(i, &sigma)| {
                let (entangler, axis) = self.step(i);
                Step { entangler, axis, sigma }
            })
            .collect();
        ControlSequence::new(name, steps)
    }
}

impl Default for Pattern {
    fn default() -> Self {
        Self::three_axis()
    }
}

/// Knobs of the multistart synthesis run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationConfig {
    /// Number of steps M. A generic 8×8 target needs at least N²−1 = 63
    /// parameters; the default mirrors the bundled reference solutions.
    pub step_count: usize,
    pub pattern: Pattern,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Convergence tolerance on the infidelity.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            step_count: 72,
            pattern: Pattern::three_axis(),
            restarts: 32,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        if self.step_count == 0 {
            return Err(SynthesisError::InvalidConfig("step_count must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(SynthesisError::InvalidConfig("restarts must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(SynthesisError::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(SynthesisError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.pattern.cycle.is_empty() {
            return Err(SynthesisError::InvalidConfig("pattern cycle is empty".into()));
        }
        Ok(())
    }

    /// Whether `step_count` satisfies the N²−1 bound for generic targets.
    pub fn meets_parameter_bound(&self) -> bool {
        self.step_count >= SUBSPACE_DIM * SUBSPACE_DIM - 1
    }
}

/// Outcome of a synthesis run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub sigmas: Vec<f64>,
    /// `1 − |tr(V†U(σ))| / 8` at the returned σ.
    pub infidelity: f64,
    pub converged: bool,
    /// Index (1-based count) of the winning restart.
    pub restarts_used: usize,
    /// Accepted iterations of the winning restart.
    pub iterations: usize,
    /// Max-norm of the gradient at exit.
    pub gradient_norm: f64,
    /// Infidelity after each accepted iteration of the winning restart,
    /// starting with the initial point.
    pub trace: Vec<f64>,
}

/// Threading choice for the restart loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threading {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Threading {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Threading::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        {
            Threading::Sequential
        }
    }
}

/// Precomputed step matrices for a fixed pattern and target.
struct SequenceProblem {
    target_adj: CMat,
    entanglers: Vec<CMat>,
    paulis: Vec<CMat>,
}

impl SequenceProblem {
    fn new(target: &CMat, pattern: &Pattern, step_count: usize) -> Self {
        let ent_a = crate::machine::entangler_block(crate::machine::Mode::One);
        let ent_b = crate::machine::entangler_block(crate::machine::Mode::Two);
        let pauli = [pauli_block(Axis::X), pauli_block(Axis::Y), pauli_block(Axis::Z)];
        let mut entanglers = Vec::with_capacity(step_count);
        let mut paulis = Vec::with_capacity(step_count);
        for i in 0..step_count {
            let (e, a) = pattern.step(i);
            entanglers.push(match e {
                Entangler::A => ent_a.clone(),
                Entangler::B => ent_b.clone(),
            });
            paulis.push(pauli[a as usize].clone());
        }
        Self { target_adj: target.adjoint(), entanglers, paulis }
    }

    fn step_matrix(&self, k: usize, sigma: f64) -> CMat {
        // exp(-i sigma P) E = (cos sigma - i sin sigma P) E
        let cos = C64::new(sigma.cos(), 0.0);
        let isin = C64::new(0.0, sigma.sin());
        let rot = identity(SUBSPACE_DIM).map(|z| z * cos) - self.paulis[k].map(|z| z * isin);
        rot * &self.entanglers[k]
    }

    /// Infidelity and its gradient in one pass over cached prefix and
    /// suffix products.
    fn value_and_grad(&self, sigmas: &[f64]) -> (f64, Vec<f64>) {
        let m = sigmas.len();
        let steps: Vec<CMat> = sigmas
            .iter()
            .enumerate()
            .map(|(k, &s)| self.step_matrix(k, s))
            .collect();

        // prefix[k] = S_{k-1} ... S_0, suffix[k] = S_{m-1} ... S_{k+1}
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(identity(SUBSPACE_DIM));
        for s in &steps {
            let last = prefix.last().unwrap();
            prefix.push(s * last);
        }
        let mut suffix = vec![identity(SUBSPACE_DIM); m + 1];
        for k in (0..m).rev() {
            suffix[k] = &suffix[k + 1] * &steps[k];
        }
        let u = prefix[m].clone();
        let overlap = (&self.target_adj * &u).trace();
        let norm = overlap.norm();
        let fidelity = norm / SUBSPACE_DIM as f64;
        if norm < 1e-300 {
            // exactly orthogonal: |tr| is non-smooth here, treat as flat
            return (1.0 - fidelity, vec![0.0; m]);
        }
        let phase = overlap.conj() / norm;
        let mut grad = Vec::with_capacity(m);
        for k in 0..m {
            // dU/dσ_k = suffix[k+1] (-i P_k) S_k prefix[k]
            let middle = self.paulis[k].map(|z| C64::new(0.0, -1.0) * z) * &steps[k];
            let t = (&prefix[k] * &self.target_adj * &suffix[k + 1] * middle).trace();
            let dfid = (phase * t).re / SUBSPACE_DIM as f64;
            grad.push(-dfid); // gradient of the infidelity
        }
        (1.0 - fidelity, grad)
    }
}

/// Gradient of the fidelity `F = |tr(V†U(σ))| / 8` with respect to each σ.
pub fn fidelity_gradient(sigmas: &[f64], target: &GateTarget, pattern: &Pattern) -> Vec<f64> {
    let problem = SequenceProblem::new(&target.matrix, pattern, sigmas.len());
    let (_, grad) = problem.value_and_grad(sigmas);
    grad.into_iter().map(|g| -g).collect()
}

struct RestartOutcome {
    sigmas: Vec<f64>,
    infidelity: f64,
    iterations: usize,
    gradient_norm: f64,
    trace: Vec<f64>,
}

const LBFGS_HISTORY: usize = 16;
const GRAD_STOP: f64 = 1e-12;
// keep polishing a converged point until first-order optimality is visible
const GRAD_POLISH: f64 = 1e-8;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

/// L-BFGS descent with a backtracking Armijo line search. Accepted steps
/// strictly decrease the infidelity, so the trace is monotone.
fn lbfgs(problem: &SequenceProblem, x0: Vec<f64>, max_iter: usize, tol: f64) -> RestartOutcome {
    let mut x = x0;
    let (mut f, mut g) = problem.value_and_grad(&x);
    let mut trace = vec![f];
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut iterations = 0;

    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    while iterations < max_iter
        && (f > tol || inf_norm(&g) > GRAD_POLISH)
        && inf_norm(&g) > GRAD_STOP
    {
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for i in (0..s_hist.len()).rev() {
            let alpha = rho_hist[i] * dot(&s_hist[i], &q);
            for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
                *qj -= alpha * yj;
            }
            alphas.push(alpha);
        }
        alphas.reverse();
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            for qj in q.iter_mut() {
                *qj *= gamma;
            }
        }
        for i in 0..s_hist.len() {
            let beta = rho_hist[i] * dot(&y_hist[i], &q);
            for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
                *qj += (alphas[i] - beta) * sj;
            }
        }
        let mut direction: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &direction);
        if slope >= 0.0 {
            // not a descent direction: fall back to steepest descent
            direction = g.iter().map(|v| -v).collect();
            slope = dot(&g, &direction);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> =
                x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            let (fc, gc) = problem.value_and_grad(&candidate);
            if fc <= f + ARMIJO_C1 * step * slope {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break; // line search failed: local structure exhausted
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * inf_norm(&s) * inf_norm(&y).max(1e-300) {
            if s_hist.len() == LBFGS_HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            rho_hist.push(1.0 / sy);
            s_hist.push(s);
            y_hist.push(y);
        }
        x = xn;
        f = fn_;
        g = gn;
        trace.push(f);
        iterations += 1;
    }

    RestartOutcome { sigmas: x, infidelity: f, iterations, gradient_norm: inf_norm(&g), trace }
}

fn run_restart(
    problem: &SequenceProblem,
    config: &OptimizationConfig,
    restart: usize,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64 + 1);
    let x0: Vec<f64> = (0..config.step_count)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    lbfgs(problem, x0, config.max_iterations, config.tolerance)
}

/// Pick the winner: the first converged restart in index order, otherwise
/// the lowest infidelity (ties to the lower index).
fn select_winner(outcomes: Vec<(usize, RestartOutcome)>, tol: f64) -> (usize, RestartOutcome) {
    let mut best: Option<(usize, RestartOutcome)> = None;
    for (idx, out) in outcomes {
        if out.infidelity < tol {
            return (idx, out);
        }
        match &best {
            None => best = Some((idx, out)),
            Some((_, bo)) if out.infidelity < bo.infidelity => best = Some((idx, out)),
            _ => {}
        }
    }
    best.expect("at least one restart")
}

/// Find a σ-vector realizing `target`, best of `config.restarts` seeded
/// multistarts. Exhausting the restarts without reaching the tolerance
/// returns the best attempt flagged `converged: false`.
pub fn synthesize(
    target: &GateTarget,
    config: &OptimizationConfig,
) -> Result<SynthesisResult, SynthesisError> {
    synthesize_with(target, config, Threading::default())
}

/// As [`synthesize`], with an explicit threading choice. Both choices
/// return bit-identical results.
pub fn synthesize_with(
    target: &GateTarget,
    config: &OptimizationConfig,
    threading: Threading,
) -> Result<SynthesisResult, SynthesisError> {
    config.validate()?;
    let report = check_unitary(&target.matrix, 1e-8);
    if !report.pass {
        return Err(SynthesisError::TargetNotUnitary { deviation: report.max_deviation });
    }
    let problem = SequenceProblem::new(&target.matrix, &config.pattern, config.step_count);

    let outcomes: Vec<(usize, RestartOutcome)> = match threading {
        Threading::Sequential => {
            let mut acc = Vec::with_capacity(config.restarts);
            for r in 0..config.restarts {
                let out = run_restart(&problem, config, r);
                let done = out.infidelity < config.tolerance;
                acc.push((r, out));
                if done {
                    break;
                }
            }
            acc
        }
        #[cfg(feature = "parallel")]
        Threading::Rayon => {
            use rayon::prelude::*;
            (0..config.restarts)
                .into_par_iter()
                .map(|r| (r, run_restart(&problem, config, r)))
                .collect()
        }
    };

    let (winner_idx, winner) = select_winner(outcomes, config.tolerance);
    let converged = winner.infidelity < config.tolerance;
    Ok(SynthesisResult {
        sigmas: winner.sigmas,
        infidelity: winner.infidelity,
        converged,
        restarts_used: winner_idx + 1,
        iterations: winner.iterations,
        gradient_norm: winner.gradient_norm,
        trace: winner.trace,
    })
}

// ---------------------------------------------------------------------------
// Lie-algebra rank of the machine's generator set.
// ---------------------------------------------------------------------------

fn vectorize(m: &CMat) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for z in m.iter() {
        v.push(z.re);
    }
    for z in m.iter() {
        v.push(z.im);
    }
    v
}

/// Real dimension of the Lie algebra generated by the given anti-hermitian
/// matrices, by breadth-first commutator closure with rank thresholding at
/// `1e-9` against the running orthonormal span.
pub fn lie_algebra_rank(generators: &[CMat]) -> usize {
    const RANK_TOL: f64 = 1e-9;
    let dim_cap = 2 * SUBSPACE_DIM * SUBSPACE_DIM; // embedding dimension
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut members: Vec<CMat> = Vec::new();

    let add = |m: &CMat, basis: &mut Vec<Vec<f64>>, members: &mut Vec<CMat>| -> bool {
        let norm = max_abs(m);
        if norm < 1e-300 {
            return false;
        }
        let normalized = m.map(|z| z / C64::new(norm, 0.0));
        let mut v = vectorize(&normalized);
        for b in basis.iter() {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let residual: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if residual > RANK_TOL {
            for vi in v.iter_mut() {
                *vi /= residual;
            }
            basis.push(v);
            members.push(normalized);
            true
        } else {
            false
        }
    };

    for g in generators {
        add(g, &mut basis, &mut members);
    }
    let mut frontier: Vec<CMat> = members.clone();
    while !frontier.is_empty() && basis.len() < dim_cap {
        let mut fresh = Vec::new();
        for x in &frontier {
            let snapshot = members.len();
            for k in 0..snapshot {
                let y = &members[k];
                let c = x * y - y * x;
                if add(&c, &mut basis, &mut members) {
                    fresh.push(members.last().unwrap().clone());
                }
            }
        }
        frontier = fresh;
    }
    basis.len()
}

/// Anti-hermitian restricted generators of a pattern's primitive set:
/// `−i` times each entangler exchange generator and each Pauli used.
pub fn pattern_generators(pattern: &Pattern) -> Vec<CMat> {
    let minus_i = C64::new(0.0, -1.0);
    let mut gens = Vec::new();
    let mut seen_ent = [false; 2];
    let mut seen_axis = [false; 3];
    for &(e, a) in &pattern.cycle {
        let ei = match e {
            Entangler::A => 0,
            Entangler::B => 1,
        };
        if !seen_ent[ei] {
            seen_ent[ei] = true;
            gens.push(entangler_generator_block(e.mode()).map(|z| minus_i * z));
        }
        if !seen_axis[a as usize] {
            seen_axis[a as usize] = true;
            gens.push(pauli_block(a).map(|z| minus_i * z));
        }
    }
    gens
}

/// Lie-closure rank of the generator set implied by `pattern`.
///
/// For the canonical pattern (both entanglers, all three axes) the result
/// is 36 = dim sp(4): the primitives close on the compact symplectic
/// algebra rather than su(8).
pub fn controllability_rank(pattern: &Pattern) -> usize {
    lie_algebra_rank(&pattern_generators(pattern))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Mode;
    use crate::sequence::{evaluate, gate_fidelity};
    use rand::Rng;

    fn reachable_target(seed: u64, len: usize, pattern: &Pattern) -> GateTarget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigmas: Vec<f64> =
            (0..len).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let seq = pattern.sequence("reachable", &sigmas);
        GateTarget::new("reachable", evaluate(&seq)).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pattern = Pattern::three_axis();
        for trial in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let m = 12;
            let target = reachable_target(2000 + trial, m, &pattern);
            let sigmas: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let analytic = fidelity_gradient(&sigmas, &target, &pattern);
            let problem = SequenceProblem::new(&target.matrix, &pattern, m);
            let h = 1e-6;
            for k in 0..m {
                let mut plus = sigmas.clone();
                let mut minus = sigmas.clone();
                plus[k] += h;
                minus[k] -= h;
                let f_plus = 1.0 - problem.value_and_grad(&plus).0;
                let f_minus = 1.0 - problem.value_and_grad(&minus).0;
                let fd = (f_plus - f_minus) / (2.0 * h);
                assert!(
                    (analytic[k] - fd).abs() < 1e-5,
                    "trial {trial} component {k}: analytic {} vs fd {fd}",
                    analytic[k]
                );
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_the_maximum() {
        let pattern = Pattern::three_axis();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigmas: Vec<f64> = (0..12).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let seq = pattern.sequence("self", &sigmas);
        let target = GateTarget::new("self", evaluate(&seq)).unwrap();
        let problem = SequenceProblem::new(&target.matrix, &pattern, 12);
        assert!(problem.value_and_grad(&sigmas).0 < 1e-12);
        let grad = fidelity_gradient(&sigmas, &target, &pattern);
        assert!(grad.iter().all(|g| g.abs() < 1e-10));
    }

    #[test]
    fn synthesizes_identity() {
        // all-zero σ is not a solution (the entanglers remain); the
        // optimizer has to cancel them
        let config = OptimizationConfig { restarts: 8, seed: 7, ..Default::default() };
        let result = synthesize(&GateTarget::identity(), &config).unwrap();
        assert!(result.converged);
        assert!(result.infidelity < 1e-8, "infidelity {}", result.infidelity);
        assert!(result.gradient_norm < 1e-6);
    }

    #[test]
    fn synthesizes_reachable_targets() {
        let pattern = Pattern::three_axis();
        for seed in 0..3 {
            let target = reachable_target(42 + seed, 72, &pattern);
            let config = OptimizationConfig {
                restarts: 8,
                seed,
                tolerance: 1e-9,
                ..Default::default()
            };
            let result = synthesize(&target, &config).unwrap();
            assert!(result.converged, "seed {seed}: infidelity {}", result.infidelity);
        }
    }

    #[test]
    fn synthesizes_the_reference_swap_target() {
        // the listed swap matrix is inside the machine's reachable group and
        // a fresh σ-set for it is easy to find, unlike the listed C-NOT
        let config = OptimizationConfig { restarts: 8, seed: 3, tolerance: 1e-9, ..Default::default() };
        let result = synthesize(&GateTarget::swap_printed(), &config).unwrap();
        assert!(result.converged, "infidelity {}", result.infidelity);
    }

    #[test]
    fn two_axis_pattern_synthesizes_reachable_targets() {
        let pattern = Pattern::two_axis();
        let target = reachable_target(77, 72, &pattern);
        let config = OptimizationConfig {
            pattern: Pattern::two_axis(),
            restarts: 8,
            seed: 11,
            tolerance: 1e-9,
            ..Default::default()
        };
        let result = synthesize(&target, &config).unwrap();
        assert!(result.converged, "infidelity {}", result.infidelity);
    }

    #[test]
    fn too_few_parameters_fail_even_on_reachable_targets() {
        // the reachable group has dimension 36; 30 parameters cannot cover it
        let pattern = Pattern::three_axis();
        let target = reachable_target(123, 72, &pattern);
        let config = OptimizationConfig {
            step_count: 30,
            restarts: 8,
            max_iterations: 600,
            seed: 5,
            tolerance: 1e-9,
            ..Default::default()
        };
        assert!(!config.meets_parameter_bound());
        let result = synthesize(&target, &config).unwrap();
        assert!(!result.converged);
        assert!(result.infidelity > 1e-6, "infidelity {}", result.infidelity);
    }

    #[test]
    fn converged_results_reverify_through_the_sequence_engine() {
        let config = OptimizationConfig { restarts: 8, seed: 13, ..Default::default() };
        let target = GateTarget::swap_printed();
        let result = synthesize(&target, &config).unwrap();
        assert!(result.converged);
        let seq = config.pattern.sequence("resynth", &result.sigmas);
        let fid = gate_fidelity(&evaluate(&seq), &target.matrix).unwrap();
        assert!(((1.0 - fid) - result.infidelity).abs() < 1e-10);
    }

    #[test]
    fn trace_is_monotone_and_matches_result() {
        let config = OptimizationConfig { restarts: 4, seed: 17, ..Default::default() };
        let result = synthesize(&GateTarget::cnot(), &config).unwrap();
        for pair in result.trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "trace increased: {pair:?}");
        }
        assert!((result.trace.last().unwrap() - result.infidelity).abs() < 1e-15);
    }

    #[test]
    fn identical_seeds_reproduce_bit_identical_results() {
        let config = OptimizationConfig { restarts: 4, max_iterations: 200, seed: 23, ..Default::default() };
        let target = GateTarget::cnot();
        let a = synthesize_with(&target, &config, Threading::Sequential).unwrap();
        let b = synthesize_with(&target, &config, Threading::Sequential).unwrap();
        assert_eq!(a.sigmas, b.sigmas);
        assert_eq!(a.infidelity, b.infidelity);
        #[cfg(feature = "parallel")]
        {
            let c = synthesize_with(&target, &config, Threading::Rayon).unwrap();
            assert_eq!(a.sigmas, c.sigmas);
            assert_eq!(a.infidelity, c.infidelity);
            assert_eq!(a.restarts_used, c.restarts_used);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let config = OptimizationConfig { restarts: 0, ..Default::default() };
        assert!(matches!(
            synthesize(&GateTarget::identity(), &config),
            Err(SynthesisError::InvalidConfig(_))
        ));
        let bad = GateTarget { name: "bad".into(), matrix: identity(8).scale(2.0) };
        assert!(matches!(
            synthesize(&bad, &OptimizationConfig::default()),
            Err(SynthesisError::TargetNotUnitary { .. })
        ));
    }

    #[test]
    fn qubit_rotations_alone_close_on_su2() {
        let minus_i = C64::new(0.0, -1.0);
        let gens: Vec<CMat> = [Axis::X, Axis::Y, Axis::Z]
            .iter()
            .map(|&a| pauli_block(a).map(|z| minus_i * z))
            .collect();
        assert_eq!(lie_algebra_rank(&gens), 3);
        assert_eq!(lie_algebra_rank(&gens[..1]), 1);
    }

    #[test]
    fn single_entangler_machine_closes_on_sp2() {
        let minus_i = C64::new(0.0, -1.0);
        let mut gens: Vec<CMat> = [Axis::X, Axis::Y, Axis::Z]
            .iter()
            .map(|&a| pauli_block(a).map(|z| minus_i * z))
            .collect();
        gens.push(entangler_generator_block(Mode::One).map(|z| minus_i * z));
        assert_eq!(lie_algebra_rank(&gens), 10);
    }

    #[test]
    fn full_primitive_set_closes_on_sp4_not_su8() {
        // The canonical machine generates a 36-dimensional algebra (sp(4)),
        // strictly inside su(8); see controllability_rank docs.
        assert_eq!(controllability_rank(&Pattern::three_axis()), 36);
        assert_eq!(controllability_rank(&Pattern::two_axis()), 36);
    }

    #[test]
    fn rank_computer_reaches_su8_on_generic_generators() {
        // sanity of the closure computation itself: two random traceless
        // hermitian generators generate all of su(8)
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let minus_i = C64::new(0.0, -1.0);
        let gens: Vec<CMat> = (0..2)
            .map(|_| {
                let raw = CMat::from_fn(8, 8, |_, _| {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                let mut h = (&raw + raw.adjoint()).scale(0.5);
                let tr = h.trace() / C64::new(8.0, 0.0);
                for k in 0..8 {
                    h[(k, k)] -= tr;
                }
                h.map(|z| minus_i * z)
            })
            .collect();
        assert_eq!(lie_algebra_rank(&gens), 63);
    }
}
