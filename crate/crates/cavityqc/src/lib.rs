//! Model of a two-mode microwave cavity coupled to a single fully controlled
//! two-level system, together with the tooling needed to program it.
//!
//! The machine has exactly six primitive operations: a fixed resonant
//! exchange pulse with either mode (the "entanglers"), arbitrary rotations of
//! the two-level system about x, y or z, and the free phase the detuned modes
//! pick up while the qubit is being manipulated. Under the trapping pulse
//! area these primitives preserve an 8-dimensional subspace (qubit plus the
//! two lowest Fock levels of each mode); gates on that subspace are realized
//! as long alternating sequences of entanglers and qubit rotations.
//!
//! The crate provides:
//!
//! - [`fock`]: dense complex linear algebra and truncated ladder operators;
//! - [`machine`]: the six primitives in the full truncated space, the
//!   subspace basis, and restriction with a leakage metric;
//! - [`sequence`]: control sequences, the two bundled 72-parameter reference
//!   solutions, evaluation, and phase-invariant verification against named
//!   gate targets;
//! - [`synthesis`]: multistart gradient synthesis of new sequences and a
//!   numerical Lie-rank controllability check;
//! - [`dynamics`]: compilation to piecewise-constant pulse schedules and full
//!   time-domain propagation of the two-mode Hamiltonian;
//! - [`processor`]: an ideal multimode register emulator and resource
//!   estimation from hardware parameters;
//! - [`cli`]: the command-line front end.
//!
//! With the default `parallel` feature, synthesis restarts and verification
//! readings run on rayon; disabling the feature yields a fully sequential
//! build with bit-identical results.

pub mod cli;
pub mod dynamics;
pub mod fock;
pub mod machine;
pub mod processor;
pub mod sequence;
pub mod synthesis;

pub use fock::{CMat, C64};
pub use machine::{Axis, MachineConfig, Mode, SubspaceBasis};
pub use sequence::{ControlSequence, GateTarget, Step, VerificationReport};
pub use synthesis::{OptimizationConfig, SynthesisResult};
