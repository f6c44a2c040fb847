//! Ideal multimode register emulation and resource estimation.
//!
//! The register holds one qubit and `M` photonic modes, each restricted to
//! its two lowest Fock levels: `2^(M+1)` amplitudes, indexed as
//! `q·2^M + Σ_j n_j·2^j` (mode 0 is the least significant bit). Gates are
//! applied as their ideal matrices — the sequence-level construction of
//! those matrices is the business of the sequence and synthesis modules.
//!
//! Local photonic rotations use the swap-conjugation trick: move the mode
//! state onto the qubit with a genuine qubit↔mode swap, rotate the qubit,
//! swap back. The qubit always returns to its initial state.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

use crate::fock::C64;

#[derive(Debug, Error)]
pub enum ProcessorError {
    #[error("mode {mode} out of range for a {count}-mode register")]
    ModeOutOfRange { mode: usize, count: usize },
    #[error("control and target modes must differ (both {mode})")]
    EqualModes { mode: usize },
    #[error("invalid register state: {0}")]
    BadState(String),
    #[error("invalid resource parameters: {0}")]
    BadParams(String),
    #[error("circuit line {line}: {message}")]
    CircuitParse { line: usize, message: String },
}

/// Pure state of the qubit ⊗ M-mode register.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    mode_count: usize,
    amplitudes: Vec<C64>,
}

const NORM_TOL: f64 = 1e-10;

impl RegisterState {
    /// Basis state `|q; n_{M-1} ... n_0⟩` given per-mode occupations.
    pub fn basis(mode_count: usize, qubit: u8, occupations: &[u8]) -> Result<Self, ProcessorError> {
        if occupations.len() != mode_count {
            return Err(ProcessorError::BadState(format!(
                "{} occupations for {} modes",
                occupations.len(),
                mode_count
            )));
        }
        let mut index = (qubit as usize & 1) << mode_count;
        for (j, n) in occupations.iter().enumerate() {
            index |= (*n as usize & 1) << j;
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 << mode_count];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { mode_count, amplitudes })
    }

    /// Wrap raw amplitudes; must have length `2^(M+1)` and unit norm.
    pub fn from_amplitudes(mode_count: usize, amplitudes: Vec<C64>) -> Result<Self, ProcessorError> {
        if amplitudes.len() != 2 << mode_count {
            return Err(ProcessorError::BadState(format!(
                "expected {} amplitudes, got {}",
                2 << mode_count,
                amplitudes.len()
            )));
        }
        let state = Self { mode_count, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ProcessorError::BadState(format!("norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Reduced density matrix of the qubit, `ρ[a][b] = Σ_m ψ(a,m) ψ*(b,m)`.
    pub fn qubit_density(&self) -> [[C64; 2]; 2] {
        let half = 1usize << self.mode_count;
        let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
        for m in 0..half {
            let a0 = self.amplitudes[m];
            let a1 = self.amplitudes[half | m];
            rho[0][0] += a0 * a0.conj();
            rho[0][1] += a0 * a1.conj();
            rho[1][0] += a1 * a0.conj();
            rho[1][1] += a1 * a1.conj();
        }
        rho
    }

    fn check_mode(&self, mode: usize) -> Result<(), ProcessorError> {
        if mode >= self.mode_count {
            return Err(ProcessorError::ModeOutOfRange { mode, count: self.mode_count });
        }
        Ok(())
    }
}

/// Photonic C-NOT: flip the target mode's bit wherever the control mode's
/// bit is set. Identity on the qubit and all other modes.
pub fn apply_cnot(
    state: &RegisterState,
    control_mode: usize,
    target_mode: usize,
) -> Result<RegisterState, ProcessorError> {
    state.check_mode(control_mode)?;
    state.check_mode(target_mode)?;
    if control_mode == target_mode {
        return Err(ProcessorError::EqualModes { mode: control_mode });
    }
    let mut out = state.clone();
    let cbit = 1usize << control_mode;
    let tbit = 1usize << target_mode;
    for idx in 0..out.amplitudes.len() {
        if idx & cbit != 0 && idx & tbit == 0 {
            out.amplitudes.swap(idx, idx | tbit);
        }
    }
    Ok(out)
}

/// 2×2 rotation `exp(−i(ασx + βσy + γσz))` in this crate's Pauli algebra.
fn qubit_rotation_matrix(alpha: f64, beta: f64, gamma: f64) -> [[C64; 2]; 2] {
    let theta = (alpha * alpha + beta * beta + gamma * gamma).sqrt();
    if theta == 0.0 {
        return [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
    }
    let (nx, ny, nz) = (alpha / theta, beta / theta, gamma / theta);
    let cos = C64::new(theta.cos(), 0.0);
    let msin = C64::new(0.0, -theta.sin());
    // n·σ with σx = [[0,1],[1,0]], σy = [[0,i],[-i,0]], σz = diag(1,-1)
    let n_dot_sigma = [
        [C64::new(nz, 0.0), C64::new(nx, ny)],
        [C64::new(nx, -ny), C64::new(-nz, 0.0)],
    ];
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            r[a][b] = msin * n_dot_sigma[a][b];
            if a == b {
                r[a][b] += cos;
            }
        }
    }
    r
}

fn swap_qubit_mode(state: &mut RegisterState, mode: usize) {
    let qbit = 1usize << state.mode_count;
    let mbit = 1usize << mode;
    for idx in 0..state.amplitudes.len() {
        let q = idx & qbit != 0;
        let m = idx & mbit != 0;
        if q && !m {
            state.amplitudes.swap(idx, (idx ^ qbit) | mbit);
        }
    }
}

fn rotate_qubit(state: &mut RegisterState, r: &[[C64; 2]; 2]) {
    let half = 1usize << state.mode_count;
    for m in 0..half {
        let a0 = state.amplitudes[m];
        let a1 = state.amplitudes[half | m];
        state.amplitudes[m] = r[0][0] * a0 + r[0][1] * a1;
        state.amplitudes[half | m] = r[1][0] * a0 + r[1][1] * a1;
    }
}

/// Arbitrary local operation on one mode, realized as
/// swap · qubit-rotation · swap. The qubit ends where it started.
pub fn local_gate(
    state: &RegisterState,
    mode: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<RegisterState, ProcessorError> {
    state.check_mode(mode)?;
    let mut out = state.clone();
    swap_qubit_mode(&mut out, mode);
    rotate_qubit(&mut out, &qubit_rotation_matrix(alpha, beta, gamma));
    swap_qubit_mode(&mut out, mode);
    Ok(out)
}

/// Hardware parameters entering the resource estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceParams {
    /// Cavity quality factor; reported for consistency only, the budget is
    /// driven by `coherence_time` directly.
    pub quality_factor: f64,
    /// Vacuum Rabi frequency, rad/s.
    pub rabi: f64,
    /// System coherence time, seconds.
    pub coherence_time: f64,
    /// Usable mode band, Hz.
    pub band_min: f64,
    pub band_max: f64,
    /// Spacing between usable modes, Hz.
    pub mode_spacing: f64,
    /// Elementary machine operations per gate.
    pub ops_per_gate: u64,
    /// Time cost of a rotation segment relative to an entangler segment.
    pub rotation_overhead: f64,
}

impl ResourceParams {
    pub fn validate(&self) -> Result<(), ProcessorError> {
        for (name, v) in [
            ("quality_factor", self.quality_factor),
            ("rabi", self.rabi),
            ("band_min", self.band_min),
            ("band_max", self.band_max),
            ("mode_spacing", self.mode_spacing),
        ] {
            if !(v > 0.0) {
                return Err(ProcessorError::BadParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.coherence_time < 0.0 {
            return Err(ProcessorError::BadParams("coherence_time must be non-negative".into()));
        }
        if self.rotation_overhead < 0.0 {
            return Err(ProcessorError::BadParams("rotation_overhead must be non-negative".into()));
        }
        if self.band_max <= self.band_min {
            return Err(ProcessorError::BadParams(format!(
                "band_max {} must exceed band_min {}",
                self.band_max, self.band_min
            )));
        }
        if self.ops_per_gate < 63 {
            return Err(ProcessorError::BadParams(format!(
                "ops_per_gate must be at least 63 (N²−1 for the 8-state subspace), got {}",
                self.ops_per_gate
            )));
        }
        Ok(())
    }

    /// Quality factor implied by the coherence time at the band center,
    /// `Q = ω_mid · T`. A coarse consistency cross-check, nothing more.
    pub fn implied_quality_factor(&self) -> f64 {
        let f_mid = 0.5 * (self.band_min + self.band_max);
        2.0 * PI * f_mid * self.coherence_time
    }
}

impl Default for ResourceParams {
    fn default() -> Self {
        Self {
            quality_factor: 1e5,
            rabi: 1e8,
            coherence_time: 1e-4,
            band_min: 5e9,
            band_max: 15e9,
            mode_spacing: 1e9,
            ops_per_gate: 72,
            rotation_overhead: 1.0,
        }
    }
}

/// Number of usable modes: `floor(band / spacing)`.
pub fn modes_capacity(params: &ResourceParams) -> u64 {
    ((params.band_max - params.band_min) / params.mode_spacing).floor() as u64
}

/// Gate-time budget derived from the trapping pulse area.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GateBudget {
    /// One entangler pulse, `τ_E = 2π/(√2 Ω)`, seconds.
    pub entangler_duration: f64,
    /// One full gate: `ops_per_gate · τ_E · (1 + rotation_overhead)`.
    pub gate_duration: f64,
    /// Whole gates fitting in the coherence time.
    pub gates_in_coherence: u64,
}

pub fn gate_budget(params: &ResourceParams) -> GateBudget {
    let entangler_duration = 2.0 * PI / (SQRT_2 * params.rabi);
    let gate_duration =
        params.ops_per_gate as f64 * entangler_duration * (1.0 + params.rotation_overhead);
    let gates_in_coherence = (params.coherence_time / gate_duration).floor() as u64;
    GateBudget { entangler_duration, gate_duration, gates_in_coherence }
}

/// One gate of a register-level circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CircuitGate {
    Cnot { control: usize, target: usize },
    Local { mode: usize, alpha: f64, beta: f64, gamma: f64 },
}

/// Parse the line-oriented circuit format: `CNOT c t`, `LOCAL m a b g`,
/// `#` starts a comment.
pub fn parse_circuit(text: &str) -> Result<Vec<CircuitGate>, ProcessorError> {
    let mut gates = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let op = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        let parse_err = |message: String| ProcessorError::CircuitParse { line: lineno + 1, message };
        match op {
            "CNOT" => {
                if rest.len() != 2 {
                    return Err(parse_err(format!("CNOT takes 2 arguments, got {}", rest.len())));
                }
                let control = rest[0].parse().map_err(|e| parse_err(format!("bad control: {e}")))?;
                let target = rest[1].parse().map_err(|e| parse_err(format!("bad target: {e}")))?;
                gates.push(CircuitGate::Cnot { control, target });
            }
            "LOCAL" => {
                if rest.len() != 4 {
                    return Err(parse_err(format!("LOCAL takes 4 arguments, got {}", rest.len())));
                }
                let mode = rest[0].parse().map_err(|e| parse_err(format!("bad mode: {e}")))?;
                let nums: Result<Vec<f64>, _> = rest[1..].iter().map(|s| s.parse()).collect();
                let nums = nums.map_err(|e| parse_err(format!("bad angle: {e}")))?;
                gates.push(CircuitGate::Local { mode, alpha: nums[0], beta: nums[1], gamma: nums[2] });
            }
            other => return Err(parse_err(format!("unknown gate `{other}`"))),
        }
    }
    Ok(gates)
}

/// Machine-operation cost of a circuit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircuitCost {
    pub machine_ops: u64,
    pub duration: f64,
    pub feasible: bool,
}

/// Cost a circuit: a C-NOT is one σ-sequence, a local gate is two swap
/// sequences plus one qubit rotation.
pub fn compile_circuit(
    gates: &[CircuitGate],
    params: &ResourceParams,
) -> Result<CircuitCost, ProcessorError> {
    params.validate()?;
    let mode_count = modes_capacity(params) as usize;
    let check = |mode: usize| {
        if mode >= mode_count {
            Err(ProcessorError::ModeOutOfRange { mode, count: mode_count })
        } else {
            Ok(())
        }
    };
    let mut machine_ops = 0u64;
    for gate in gates {
        match gate {
            CircuitGate::Cnot { control, target } => {
                check(*control)?;
                check(*target)?;
                if control == target {
                    return Err(ProcessorError::EqualModes { mode: *control });
                }
                machine_ops += params.ops_per_gate;
            }
            CircuitGate::Local { mode, .. } => {
                check(*mode)?;
                machine_ops += 2 * params.ops_per_gate + 1;
            }
        }
    }
    let budget = gate_budget(params);
    let duration =
        machine_ops as f64 * budget.entangler_duration * (1.0 + params.rotation_overhead);
    Ok(CircuitCost { machine_ops, duration, feasible: duration <= params.coherence_time })
}
