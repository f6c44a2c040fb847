//! Command-line front end: verify bundled or user sequences, synthesize new
//! ones, validate time-domain dynamics, estimate hardware budgets, and cost
//! register-level circuits.
//!
//! Exit codes: 0 success, 1 quantitative failure (fidelity below threshold,
//! synthesis unconverged, circuit infeasible), 2 usage error. Nothing is
//! written on exit 2.

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dynamics::{self, CompilePolicy};
use crate::fock::C64;
use crate::machine::{Axis, MachineConfig};
use crate::processor::{self, ResourceParams};
use crate::sequence::{
    self, matrix_from_rows, ControlSequence, Entangler, GateTarget, Reading,
    SigmaOrder, SigmaZSign, Step,
};
use crate::synthesis::{self, OptimizationConfig, Pattern};

#[derive(Parser, Debug)]
#[command(name = "cavityqc", version, about = "Program a two-mode cavity gate machine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PatternArg {
    ThreeAxis,
    TwoAxis,
}

impl PatternArg {
    fn build(self) -> Pattern {
        match self {
            PatternArg::ThreeAxis => Pattern::three_axis(),
            PatternArg::TwoAxis => Pattern::two_axis(),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a sequence under all four σ-list readings against a target.
    Verify {
        /// Built-in sequence (`cnot72`, `swap72`) or path to a sequence JSON.
        #[arg(long)]
        sequence: String,
        /// Built-in target (`cnot`, `swap-printed`, `swap-qubit-mode1`,
        /// `identity`) or path to a target JSON.
        #[arg(long)]
        target: String,
        /// Write the verification report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = sequence::VERIFY_FIDELITY_THRESHOLD)]
        threshold: f64,
    },
    /// Search for a σ-set realizing a target unitary.
    Synthesize {
        /// Built-in target name or path to a target JSON.
        #[arg(long)]
        target: String,
        /// Number of steps M.
        #[arg(long = "M", default_value_t = 72)]
        steps: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
        /// Convergence tolerance on the infidelity.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PatternArg::ThreeAxis)]
        pattern: PatternArg,
        /// Write the resulting sequence JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the per-iteration infidelity log (one value per line).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compile a sequence to pulses and propagate the full Hamiltonian.
    Validate {
        /// Built-in sequence name or path to a sequence JSON.
        #[arg(long)]
        sequence: String,
        /// Vacuum Rabi frequency for both modes, rad/s.
        #[arg(long, default_value_t = 1e8)]
        omega: f64,
        /// Half the mode splitting, rad/s.
        #[arg(long, default_value_t = 5e9)]
        delta: f64,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        /// Use the opposite detuning-sign assignment for the two modes.
        #[arg(long)]
        swap_detuning_signs: bool,
        /// Write the validation report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also export the compiled pulse schedule as CSV.
        #[arg(long)]
        export_schedule: Option<PathBuf>,
    },
    /// Print the gate and mode budget for given hardware parameters.
    Estimate {
        /// Vacuum Rabi frequency, rad/s.
        #[arg(long, default_value_t = 1e8)]
        omega: f64,
        /// Coherence time, seconds.
        #[arg(long = "T", default_value_t = 1e-4)]
        coherence_time: f64,
        /// Usable mode band in Hz as `min:max`.
        #[arg(long, default_value = "5e9:15e9")]
        band: String,
        /// Mode spacing, Hz.
        #[arg(long, default_value_t = 1e9)]
        spacing: f64,
        /// Cavity quality factor (consistency cross-check only).
        #[arg(long, default_value_t = 1e5)]
        q: f64,
        #[arg(long, default_value_t = 72)]
        ops_per_gate: u64,
        #[arg(long, default_value_t = 1.0)]
        overhead: f64,
    },
    /// Cost a register-level circuit file in machine operations.
    Compile {
        /// Circuit file: `CNOT c t` / `LOCAL m alpha beta gamma` lines.
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = 1e8)]
        omega: f64,
        #[arg(long = "T", default_value_t = 1e-4)]
        coherence_time: f64,
        #[arg(long, default_value = "5e9:15e9")]
        band: String,
        #[arg(long, default_value_t = 1e9)]
        spacing: f64,
        #[arg(long, default_value_t = 1e5)]
        q: f64,
        #[arg(long, default_value_t = 72)]
        ops_per_gate: u64,
        #[arg(long, default_value_t = 1.0)]
        overhead: f64,
    },
}

/// On-disk sequence document. The convention block makes the reading of the
/// stored σ-list explicit, so files are self-describing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub name: String,
    pub pattern: Vec<PatternEntry>,
    pub sigmas: Vec<f64>,
    pub convention: Convention,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternEntry {
    pub entangler: Entangler,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Convention {
    pub sigma_order: SigmaOrder,
    pub sigma_z_sign: SigmaZSign,
}

impl SequenceFile {
    /// Express a sequence in execution order under the default convention.
    pub fn from_sequence(seq: &ControlSequence) -> Self {
        Self {
            name: seq.name.clone(),
            pattern: seq
                .steps
                .iter()
                .map(|s| PatternEntry { entangler: s.entangler, axis: s.axis })
                .collect(),
            sigmas: seq.sigmas(),
            convention: Convention {
                sigma_order: SigmaOrder::Forward,
                sigma_z_sign: SigmaZSign::Positive,
            },
        }
    }

    /// Materialize the stored list into an execution-order sequence by
    /// applying the declared convention.
    pub fn to_sequence(&self) -> Result<ControlSequence, String> {
        if self.pattern.len() != self.sigmas.len() {
            return Err(format!(
                "pattern has {} entries but sigmas has {}",
                self.pattern.len(),
                self.sigmas.len()
            ));
        }
        let steps = self
            .pattern
            .iter()
            .zip(&self.sigmas)
            .map(|(p, &sigma)| Step { entangler: p.entangler, axis: p.axis, sigma })
            .collect();
        let raw = ControlSequence::new(self.name.clone(), steps);
        Ok(raw.under_reading(Reading {
            sigma_order: self.convention.sigma_order,
            sigma_z_sign: self.convention.sigma_z_sign,
        }))
    }
}

/// On-disk gate target: an 8×8 complex matrix as rows of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub name: String,
    pub matrix: Vec<Vec<C64>>,
}

enum CliError {
    Usage(String),
    Quantitative,
}

type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        usage(format!(
            "{}: malformed JSON at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn load_sequence(spec: &str) -> Result<ControlSequence, CliError> {
    match spec {
        "cnot72" => Ok(sequence::canonical_cnot_sequence()),
        "swap72" => Ok(sequence::canonical_swap_sequence()),
        path => {
            let file: SequenceFile = read_json(Path::new(path))?;
            file.to_sequence().map_err(usage)
        }
    }
}

fn load_target(spec: &str) -> Result<GateTarget, CliError> {
    if let Some(t) = GateTarget::builtin(spec) {
        return Ok(t);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(usage(format!(
            "unknown target `{spec}` (built-ins: cnot, swap-printed, swap-qubit-mode1, identity)"
        )));
    }
    let file: TargetFile = read_json(path)?;
    let matrix = matrix_from_rows(&file.matrix)
        .ok_or_else(|| usage(format!("{spec}: matrix must be square and non-empty")))?;
    GateTarget::new(file.name, matrix).map_err(|e| usage(format!("{spec}: {e}")))
}

fn write_or_print(output: Option<&PathBuf>, text: &str) -> CliResult {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_band(band: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = band
        .split_once(':')
        .ok_or_else(|| usage(format!("band must be `min:max`, got `{band}`")))?;
    let lo: f64 = lo.parse().map_err(|e| usage(format!("bad band minimum: {e}")))?;
    let hi: f64 = hi.parse().map_err(|e| usage(format!("bad band maximum: {e}")))?;
    Ok((lo, hi))
}

fn resource_params(
    omega: f64,
    coherence_time: f64,
    band: &str,
    spacing: f64,
    q: f64,
    ops_per_gate: u64,
    overhead: f64,
) -> Result<ResourceParams, CliError> {
    let (band_min, band_max) = parse_band(band)?;
    let params = ResourceParams {
        quality_factor: q,
        rabi: omega,
        coherence_time,
        band_min,
        band_max,
        mode_spacing: spacing,
        ops_per_gate,
        rotation_overhead: overhead,
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    Ok(params)
}

fn cmd_verify(
    sequence: &str,
    target: &str,
    output: Option<&PathBuf>,
    threshold: f64,
) -> CliResult {
    let seq = load_sequence(sequence)?;
    let tgt = load_target(target)?;
    let report = sequence::verify_with_threshold(&seq, &tgt, threshold);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_or_print(output, &text)?;
    if report.pass {
        Ok(())
    } else {
        eprintln!(
            "verification discrepancy: best fidelity {:.6} under reading {:?} is below {}",
            report.best_fidelity, report.best_reading, threshold
        );
        Err(CliError::Quantitative)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_synthesize(
    target: &str,
    steps: usize,
    restarts: usize,
    max_iterations: usize,
    tolerance: f64,
    seed: u64,
    pattern: PatternArg,
    output: Option<&PathBuf>,
    trace: Option<&PathBuf>,
) -> CliResult {
    let tgt = load_target(target)?;
    let config = OptimizationConfig {
        step_count: steps,
        pattern: pattern.build(),
        restarts,
        max_iterations,
        tolerance,
        seed,
    };
    let result = synthesis::synthesize(&tgt, &config).map_err(|e| usage(e.to_string()))?;
    if let Some(path) = trace {
        let mut text = String::new();
        for v in &result.trace {
            text.push_str(&format!("{v:e}\n"));
        }
        fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let seq = config.pattern.sequence(format!("synthesized-{}", tgt.name), &result.sigmas);
    let doc = serde_json::json!({
        "sequence": SequenceFile::from_sequence(&seq),
        "infidelity": result.infidelity,
        "converged": result.converged,
        "restarts_used": result.restarts_used,
        "iterations": result.iterations,
        "gradient_norm": result.gradient_norm,
    });
    write_or_print(output, &serde_json::to_string_pretty(&doc).expect("serializes"))?;
    if result.converged {
        Ok(())
    } else {
        eprintln!(
            "synthesis did not reach tolerance {tolerance}: best infidelity {:.3e}",
            result.infidelity
        );
        Err(CliError::Quantitative)
    }
}

fn cmd_validate(
    sequence: &str,
    omega: f64,
    delta: f64,
    n_max: usize,
    swap_detuning_signs: bool,
    output: Option<&PathBuf>,
    export_schedule: Option<&PathBuf>,
) -> CliResult {
    let seq = load_sequence(sequence)?;
    let config =
        MachineConfig::symmetric(omega, delta, n_max).map_err(|e| usage(e.to_string()))?;
    let policy = CompilePolicy { swap_detuning_signs, ..Default::default() };
    let schedule =
        dynamics::compile_schedule(&seq, &config, &policy).map_err(|e| usage(e.to_string()))?;
    if let Some(path) = export_schedule {
        let file = fs::File::create(path)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        dynamics::schedule_to_csv(&schedule, file).map_err(|e| usage(e.to_string()))?;
    }
    let u = dynamics::propagate(&schedule, n_max);
    let ideal = dynamics::ideal_reference(&schedule, &policy);
    let report = dynamics::compare_to_ideal(&u, &ideal, n_max, &config);
    write_or_print(output, &serde_json::to_string_pretty(&report).expect("serializes"))
}

fn cmd_estimate(params: &ResourceParams) -> CliResult {
    let budget = processor::gate_budget(params);
    let modes = processor::modes_capacity(params);
    println!("entangler duration   {:.4e} s", budget.entangler_duration);
    println!("gate duration        {:.4e} s", budget.gate_duration);
    println!("gates in coherence   {}", budget.gates_in_coherence);
    println!("usable modes         {}", modes);
    println!(
        "implied Q at band center  {:.2e}  (given Q {:.2e})",
        params.implied_quality_factor(),
        params.quality_factor
    );
    Ok(())
}

fn cmd_compile(circuit: &Path, params: &ResourceParams) -> CliResult {
    let text = fs::read_to_string(circuit)
        .map_err(|e| usage(format!("cannot read {}: {e}", circuit.display())))?;
    let gates = processor::parse_circuit(&text).map_err(|e| usage(e.to_string()))?;
    let cost = processor::compile_circuit(&gates, params).map_err(|e| usage(e.to_string()))?;
    println!("gates        {}", gates.len());
    println!("machine ops  {}", cost.machine_ops);
    println!("duration     {:.4e} s", cost.duration);
    println!("feasible     {}", cost.feasible);
    if cost.feasible {
        Ok(())
    } else {
        eprintln!(
            "circuit needs {:.4e} s but the coherence time is {:.4e} s",
            cost.duration, params.coherence_time
        );
        Err(CliError::Quantitative)
    }
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Verify { sequence, target, output, threshold } => {
            cmd_verify(sequence, target, output.as_ref(), *threshold)
        }
        Command::Synthesize {
            target,
            steps,
            restarts,
            max_iterations,
            tolerance,
            seed,
            pattern,
            output,
            trace,
        } => cmd_synthesize(
            target,
            *steps,
            *restarts,
            *max_iterations,
            *tolerance,
            *seed,
            *pattern,
            output.as_ref(),
            trace.as_ref(),
        ),
        Command::Validate {
            sequence,
            omega,
            delta,
            n_max,
            swap_detuning_signs,
            output,
            export_schedule,
        } => cmd_validate(
            sequence,
            *omega,
            *delta,
            *n_max,
            *swap_detuning_signs,
            output.as_ref(),
            export_schedule.as_ref(),
        ),
        Command::Estimate { omega, coherence_time, band, spacing, q, ops_per_gate, overhead } => {
            resource_params(*omega, *coherence_time, band, *spacing, *q, *ops_per_gate, *overhead)
                .and_then(|p| cmd_estimate(&p))
        }
        Command::Compile {
            circuit,
            omega,
            coherence_time,
            band,
            spacing,
            q,
            ops_per_gate,
            overhead,
        } => {
            resource_params(*omega, *coherence_time, band, *spacing, *q, *ops_per_gate, *overhead)
                .and_then(|p| cmd_compile(circuit, &p))
        }
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Quantitative) => 1,
        Err(CliError::Usage(msg)) => {
            let mut err = std::io::stderr();
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

/// Round-trip helper used by the report tests: serialize a produced unitary
/// back into matrix form.
pub fn produced_unitary_matrix(report: &crate::sequence::VerificationReport) -> Option<crate::fock::CMat> {
    matrix_from_rows(&report.produced_unitary)
}
