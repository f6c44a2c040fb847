//! The six primitive operations of the cavity machine and the 8-dimensional
//! computational subspace they preserve.
//!
//! Conventions, fixed once and used everywhere:
//!
//! - Qubit basis index 0 is the ground state `|g⟩`, index 1 the excited
//!   state `|e⟩`, with `σ⁺ = |e⟩⟨g|` and the Pauli operators defined through
//!   `σx = σ⁻ + σ⁺`, `σy = iσ⁻ − iσ⁺`, `σz = 2σ⁻σ⁺ − 1`. Note that this
//!   algebra puts `σz = +1` on `|g⟩` — the reverse of the more common sign.
//!   The sequence verifier enumerates the opposite convention as well.
//! - The joint space factors as qubit ⊗ mode 2 ⊗ mode 1, matching the state
//!   labels `|q n₂ n₁⟩`.
//! - Subspace basis order: `|111⟩, |110⟩, ..., |000⟩`, i.e. index
//!   `k = 7 − (4q + 2n₂ + n₁)`.
//!
//! The entangler pulse area is pinned by the trapping condition
//! `τ Ω √2 = 2π`: the `1 → 2` photon transition performs a full rotation, so
//! population never climbs past Fock level 2 and the `{0,1}` sector is exactly
//! preserved.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

use crate::fock::{build_mode_operators, identity, matrix_exponential, tensor_product, CMat, C64};

/// Rotation angle of the `{|e,0⟩, |g,1⟩}` doublet under one entangler pulse.
pub const ENTANGLER_ANGLE: f64 = PI * SQRT_2;

/// Dimension of the computational subspace.
pub const SUBSPACE_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("invalid machine configuration: {0}")]
    InvalidConfig(String),
    #[error("trapping level absent: entanglers need n_max >= 2, got {n_max}")]
    TrappingLevelAbsent { n_max: usize },
    #[error("dimension mismatch: operator is {got}x{got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Which of the two cavity modes an operation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    One,
    Two,
}

/// Rotation axis of a qubit manipulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Physical parameters of the machine.
///
/// `half_detuning` is half the mode splitting, `Δ = (ω₁ − ω₂)/2`; the qubit
/// is steered between the two resonances by the controlled detuning `δ(t)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    /// Vacuum Rabi frequency of mode 1, rad/s.
    pub rabi_1: f64,
    /// Vacuum Rabi frequency of mode 2, rad/s.
    pub rabi_2: f64,
    /// Half the mode splitting, rad/s.
    pub half_detuning: f64,
    /// Highest retained Fock level per mode.
    pub n_max: usize,
}

impl MachineConfig {
    pub fn new(rabi_1: f64, rabi_2: f64, half_detuning: f64, n_max: usize) -> Result<Self, MachineError> {
        let cfg = Self { rabi_1, rabi_2, half_detuning, n_max };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Equal Rabi frequencies on both modes; the common case.
    pub fn symmetric(rabi: f64, half_detuning: f64, n_max: usize) -> Result<Self, MachineError> {
        Self::new(rabi, rabi, half_detuning, n_max)
    }

    pub fn validate(&self) -> Result<(), MachineError> {
        if !(self.rabi_1 > 0.0) || !(self.rabi_2 > 0.0) {
            return Err(MachineError::InvalidConfig(format!(
                "rabi frequencies must be positive, got {} and {}",
                self.rabi_1, self.rabi_2
            )));
        }
        if !(self.half_detuning > 0.0) {
            return Err(MachineError::InvalidConfig(format!(
                "half_detuning must be positive, got {}",
                self.half_detuning
            )));
        }
        Ok(())
    }

    /// Off-resonance ratio `max(Ω₁, Ω₂) / (2Δ)`: the small parameter that
    /// controls how well the ideal subspace model holds.
    pub fn off_resonance_ratio(&self) -> f64 {
        self.rabi_1.max(self.rabi_2) / (2.0 * self.half_detuning)
    }

    /// True when the off-resonance ratio exceeds 0.1 and the ideal-model
    /// error can no longer be treated as a small correction.
    pub fn off_resonance_warning(&self) -> bool {
        self.off_resonance_ratio() > 0.1
    }

    /// Total dimension of the truncated joint space.
    pub fn full_dimension(&self) -> usize {
        2 * (self.n_max + 1) * (self.n_max + 1)
    }

    /// Entangler pulse duration for the given mode, `τ = 2π/(√2 Ω)`.
    pub fn entangler_duration(&self, mode: Mode) -> f64 {
        let rabi = match mode {
            Mode::One => self.rabi_1,
            Mode::Two => self.rabi_2,
        };
        2.0 * PI / (SQRT_2 * rabi)
    }
}

/// One basis label of the computational subspace: `(q, n₂, n₁)`.
pub type Label = (u8, u8, u8);

/// The ordered 8-state basis `|q n₂ n₁⟩` of the computational subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceBasis;

impl SubspaceBasis {
    /// Labels in subspace order: `|111⟩` first, `|000⟩` last.
    pub fn labels() -> [Label; SUBSPACE_DIM] {
        let mut out = [(0, 0, 0); SUBSPACE_DIM];
        for (k, slot) in out.iter_mut().enumerate() {
            let v = 7 - k;
            *slot = (((v >> 2) & 1) as u8, ((v >> 1) & 1) as u8, (v & 1) as u8);
        }
        out
    }

    /// Subspace index of a label, `7 − (4q + 2n₂ + n₁)`.
    pub fn index_of(label: Label) -> usize {
        let (q, n2, n1) = label;
        debug_assert!(q <= 1 && n2 <= 1 && n1 <= 1);
        7 - (4 * q as usize + 2 * n2 as usize + n1 as usize)
    }

    /// Index of a label's state in the full truncated space with factor
    /// order qubit ⊗ mode 2 ⊗ mode 1.
    pub fn full_index(label: Label, n_max: usize) -> usize {
        let d = n_max + 1;
        let (q, n2, n1) = label;
        q as usize * d * d + n2 as usize * d + n1 as usize
    }
}

/// Pauli matrices in the machine's own algebra (`σz = +1` on `|g⟩`).
pub fn sigma(axis: Axis) -> CMat {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        // sigma_minus + sigma_plus
        Axis::X => CMat::from_row_slice(2, 2, &[z, one, one, z]),
        // i sigma_minus - i sigma_plus
        Axis::Y => CMat::from_row_slice(2, 2, &[z, i, -i, z]),
        // 2 sigma_minus sigma_plus - 1
        Axis::Z => CMat::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

fn embed_qubit(op: &CMat, n_max: usize) -> CMat {
    let im = identity(n_max + 1);
    tensor_product(&[op, &im, &im]).expect("non-empty")
}

/// Hermitian generator `a†σ⁻ + aσ⁺` (or the mode-2 analogue) in the full
/// truncated space.
pub fn entangler_generator(mode: Mode, n_max: usize) -> CMat {
    let ops = build_mode_operators(n_max);
    let im = identity(n_max + 1);
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let sminus = CMat::from_row_slice(2, 2, &[z, one, z, z]);
    let splus = sminus.adjoint();
    match mode {
        Mode::One => {
            tensor_product(&[&sminus, &im, &ops.creation]).unwrap()
                + tensor_product(&[&splus, &im, &ops.annihilation]).unwrap()
        }
        Mode::Two => {
            tensor_product(&[&sminus, &ops.creation, &im]).unwrap()
                + tensor_product(&[&splus, &ops.annihilation, &im]).unwrap()
        }
    }
}

/// One entangler pulse `exp(−iπ√2 (a†σ⁻ + aσ⁺))` in the full truncated space.
///
/// Requires `n_max >= 2` so the trapping level is represented; below that the
/// pulse area argument is meaningless.
pub fn entangler(mode: Mode, config: &MachineConfig) -> Result<CMat, MachineError> {
    if config.n_max < 2 {
        return Err(MachineError::TrappingLevelAbsent { n_max: config.n_max });
    }
    let g = entangler_generator(mode, config.n_max);
    Ok(matrix_exponential(&g, ENTANGLER_ANGLE).expect("generator is hermitian"))
}

/// Qubit rotation `exp(−i σ_axis σ)`, identity on both modes.
///
/// Built from the exact 2×2 closed form `cos σ · 1 − i sin σ · σ_axis`
/// rather than a dense eigendecomposition, so spinor identities hold to
/// machine precision.
pub fn qubit_rotation(axis: Axis, sigma_angle: f64, n_max: usize) -> CMat {
    let cos = C64::new(sigma_angle.cos(), 0.0);
    let isin = C64::new(0.0, sigma_angle.sin());
    let rot2 = identity(2).map(|z| z * cos) - sigma(axis).map(|z| isin * z);
    embed_qubit(&rot2, n_max)
}

/// Free phase `exp(−i φ (n̂₁ − n̂₂))` accumulated by the detuned modes,
/// identity on the qubit.
pub fn free_phase(phase: f64, n_max: usize) -> CMat {
    let d = n_max + 1;
    let dim = 2 * d * d;
    let mut diag = Vec::with_capacity(dim);
    for q in 0..2 {
        let _ = q;
        for n2 in 0..d {
            for n1 in 0..d {
                let exponent = phase * (n1 as f64 - n2 as f64);
                diag.push(C64::from_polar(1.0, -exponent));
            }
        }
    }
    CMat::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Projector from the full truncated space onto the subspace basis order;
/// an 8 × D matrix with one unit entry per row.
pub fn projector(n_max: usize) -> CMat {
    let d = n_max + 1;
    let dim = 2 * d * d;
    let mut p = CMat::zeros(SUBSPACE_DIM, dim);
    for (k, label) in SubspaceBasis::labels().iter().enumerate() {
        p[(k, SubspaceBasis::full_index(*label, n_max))] = C64::new(1.0, 0.0);
    }
    p
}

/// An operator restricted to the computational subspace, with the leakage
/// it induces out of that subspace.
#[derive(Debug, Clone)]
pub struct Restriction {
    /// `P U P†`, 8×8.
    pub block: CMat,
    /// Largest singular value of `(1 − P†P) U P†`: the worst-case amplitude
    /// transferred from the subspace to its complement.
    pub leakage: f64,
}

/// Restrict a full-space operator to the subspace and measure its leakage.
pub fn restrict(u_full: &CMat, n_max: usize) -> Result<Restriction, MachineError> {
    let d = n_max + 1;
    let dim = 2 * d * d;
    if u_full.nrows() != dim || u_full.ncols() != dim {
        return Err(MachineError::DimensionMismatch { expected: dim, got: u_full.nrows() });
    }
    let p = projector(n_max);
    let pt = p.adjoint();
    let cols = u_full * &pt; // D x 8: images of the subspace basis states
    let block = &p * &cols;
    let outside = &cols - &pt * &block;
    let leakage = outside.svd(false, false).singular_values.max();
    Ok(Restriction { block, leakage })
}

// ---------------------------------------------------------------------------
// Direct 8x8 subspace blocks.
//
// Under the trapping pulse area the full-space primitives act block
// diagonally, and their subspace blocks have simple closed forms. These
// constructions are independent of the tensor-product + exponential route
// above; the two routes are checked against each other in the tests.
// ---------------------------------------------------------------------------

/// Restricted entangler generator: unit couplings `|e,n₂,0⟩ ↔ |g,n₂,1⟩`
/// (mode 1) or `|e,0,n₁⟩ ↔ |g,1,n₁⟩` (mode 2).
pub fn entangler_generator_block(mode: Mode) -> CMat {
    let mut g = CMat::zeros(SUBSPACE_DIM, SUBSPACE_DIM);
    let one = C64::new(1.0, 0.0);
    for other in 0..2u8 {
        let (upper, lower) = match mode {
            Mode::One => ((1, other, 0), (0, other, 1)),
            Mode::Two => ((1, 0, other), (0, 1, other)),
        };
        let i = SubspaceBasis::index_of(upper);
        let j = SubspaceBasis::index_of(lower);
        g[(i, j)] = one;
        g[(j, i)] = one;
    }
    g
}

/// Restricted entangler block: a rotation by `π√2` on each coupled doublet,
/// identity on the trapped and dark states.
pub fn entangler_block(mode: Mode) -> CMat {
    rotation_from_generator(&entangler_generator_block(mode), ENTANGLER_ANGLE)
}

/// Restricted Pauli operator `σ_axis ⊗ I₄` in subspace order.
pub fn pauli_block(axis: Axis) -> CMat {
    let mut out = CMat::zeros(SUBSPACE_DIM, SUBSPACE_DIM);
    let s = sigma(axis);
    for (k, &(q, n2, n1)) in SubspaceBasis::labels().iter().enumerate() {
        for qp in 0..2u8 {
            let kp = SubspaceBasis::index_of((qp, n2, n1));
            out[(k, kp)] = s[(q as usize, qp as usize)];
        }
    }
    out
}

/// Restricted qubit rotation `cos σ · I − i sin σ · σ_axis`.
pub fn rotation_block(axis: Axis, sigma_angle: f64) -> CMat {
    rotation_from_generator(&pauli_block(axis), sigma_angle)
}

/// Restricted free phase: diagonal `exp(−i φ (n₁ − n₂))`.
pub fn free_phase_block(phase: f64) -> CMat {
    let diag: Vec<C64> = SubspaceBasis::labels()
        .iter()
        .map(|&(_, n2, n1)| C64::from_polar(1.0, -phase * (n1 as f64 - n2 as f64)))
        .collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Full-space operator bundle for assembling segment Hamiltonians.
pub struct FullOperators {
    pub number_1: CMat,
    pub number_2: CMat,
    pub sigma_x: CMat,
    pub sigma_y: CMat,
    pub sigma_z: CMat,
    /// `a†σ⁻ + aσ⁺` with mode 1.
    pub exchange_1: CMat,
    /// `b†σ⁻ + bσ⁺` with mode 2.
    pub exchange_2: CMat,
}

/// Build the full-space operators entering the two-mode Hamiltonian.
pub fn build_full_operators(n_max: usize) -> FullOperators {
    let ops = build_mode_operators(n_max);
    let im = identity(n_max + 1);
    let i2 = identity(2);
    FullOperators {
        number_1: tensor_product(&[&i2, &im, &ops.number]).unwrap(),
        number_2: tensor_product(&[&i2, &ops.number, &im]).unwrap(),
        sigma_x: embed_qubit(&sigma(Axis::X), n_max),
        sigma_y: embed_qubit(&sigma(Axis::Y), n_max),
        sigma_z: embed_qubit(&sigma(Axis::Z), n_max),
        exchange_1: entangler_generator(Mode::One, n_max),
        exchange_2: entangler_generator(Mode::Two, n_max),
    }
}

/// `exp(−iθ G)` for an involutory generator (`G² = projector` on its
/// support): identity off the support, a plane rotation on it.
fn rotation_from_generator(g: &CMat, theta: f64) -> CMat {
    let dim = g.nrows();
    let g2 = g * g;
    let cos = C64::new(theta.cos(), 0.0);
    let isin = C64::new(0.0, theta.sin());
    // I + (cos θ − 1) G² − i sin θ G  — exact when G³ = G.
    let mut out = identity(dim);
    out += g2.map(|z| z * (cos - C64::new(1.0, 0.0)));
    out += g.map(|z| -isin * z);
    out
}
