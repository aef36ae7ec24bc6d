//! Randomized evolution along the eigenpath and ensemble aggregation.
//!
//! Runs are executed step-major: each schedule point is diagonalized once and
//! the resulting propagator is applied to every repetition's state. Results
//! depend only on the master seed, never on the worker count.

mod sweep;

pub use sweep::{error_vs_q_sweep, linear_fit, LinearFit, SweepResult, SweepRow, CSV_COLUMNS};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{ancilla_qubits, Embedding, EmbeddingMode, Variant};
use crate::instance::{exact_solution, QlspInstance};
use crate::linalg::{
    eigh, inner, partial_trace_leading_qubits, trace_distance, DensityMatrix, EigenSystem,
    StateVector, C64, ZERO,
};
use crate::rng::{derive_seed, stream};
use crate::schedule::{sample_times, Schedule};

pub const DEFAULT_KAPPA_CEILING: f64 = 1e4;

/// Schedule points diagonalized together before their propagators are applied.
const STEP_CHUNK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub mode: EmbeddingMode,
    /// Runs on instances with larger `κ` are refused.
    pub kappa_ceiling: f64,
    /// Keep every [`RunRecord`] in the ensemble result.
    pub keep_records: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: EmbeddingMode::General,
            kappa_ceiling: DEFAULT_KAPPA_CEILING,
            keep_records: false,
        }
    }
}

impl EngineConfig {
    pub fn with_mode(mode: EmbeddingMode) -> Self {
        EngineConfig {
            mode,
            ..Self::default()
        }
    }
}

/// One repetition. `final_state` lives on the full space, ancillas included.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub rep_index: u64,
    pub derived_seed: u64,
    pub sampled_times: Vec<f64>,
    pub final_state: StateVector,
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub n_rep: usize,
    /// Average output projector with all ancillas traced out.
    pub rho_tilde: DensityMatrix,
    /// Trace distance between `rho_tilde` and `|x⟩⟨x|`.
    pub error: f64,
    pub total_expected_time: f64,
    /// Mean fidelity of the full-space output with the path endpoint.
    pub full_space_fidelity: f64,
    /// Largest `|⟨1, b̄|ψ⟩|` over repetitions; zero for the ground-state variant.
    pub max_leakage: f64,
    pub records: Option<Vec<RunRecord>>,
}

fn check_ceiling(inst: &QlspInstance, cfg: &EngineConfig) -> Result<()> {
    if inst.kappa() > cfg.kappa_ceiling {
        return Err(Error::KappaCeiling {
            kappa: inst.kappa(),
            ceiling: cfg.kappa_ceiling,
        });
    }
    Ok(())
}

/// Starting point of the walk: `|x(0)⟩`, or `|0⟩ ⊗ |x(0)⟩` when amplified.
/// In the general embedding `|x(0)⟩ = |−, b⟩`; in the positive-definite one it is `|b⟩`.
pub fn initial_state(emb: &Embedding<'_>, variant: Variant) -> Result<StateVector> {
    emb.tracked_state(0.0, variant)
}

fn eigensystems(
    emb: &Embedding<'_>,
    sched: &Schedule,
    steps: std::ops::Range<usize>,
) -> Result<Vec<EigenSystem>> {
    sched.points[steps]
        .par_iter()
        .map(|p| eigh(&emb.slice(p.s, sched.variant)?.h))
        .collect()
}

/// Evolves every state through the whole schedule; `times[r][j]` is the
/// time of repetition `r` at step `j`.
fn evolve_all(
    emb: &Embedding<'_>,
    sched: &Schedule,
    times: &[Vec<f64>],
    states: &mut [Vec<C64>],
) -> Result<()> {
    let dim = states.first().map_or(0, Vec::len);
    let mut scratch: Vec<Vec<C64>> = vec![vec![ZERO; dim]; states.len()];
    let mut start = 0;
    while start < sched.q {
        let end = (start + STEP_CHUNK).min(sched.q);
        let systems = eigensystems(emb, sched, start..end)?;
        for (offset, es) in systems.iter().enumerate() {
            let j = start + offset;
            states
                .par_iter_mut()
                .zip(scratch.par_iter_mut())
                .zip(times.par_iter())
                .for_each(|((psi, buf), t)| es.evolve_in_place(psi, t[j], buf));
        }
        start = end;
    }
    Ok(())
}

fn check_times(sched: &Schedule, times: &[f64]) -> Result<()> {
    if times.len() != sched.q {
        return Err(Error::DimensionMismatch {
            expected: sched.q,
            got: times.len(),
        });
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::invalid(format!(
            "evolution time {t} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Replays a single repetition with explicit times.
pub fn run_single_with_times(
    inst: &QlspInstance,
    sched: &Schedule,
    mode: EmbeddingMode,
    rep_index: u64,
    derived_seed: u64,
    times: Vec<f64>,
) -> Result<RunRecord> {
    check_times(sched, &times)?;
    let emb = Embedding::new(inst, mode)?;
    let mut states = vec![initial_state(&emb, sched.variant)?.into_amplitudes()];
    let all_times = [times];
    evolve_all(&emb, sched, &all_times, &mut states)?;
    let [sampled_times] = all_times;
    Ok(RunRecord {
        rep_index,
        derived_seed,
        sampled_times,
        final_state: StateVector::from_vec_unchecked(states.pop().expect("one state")),
    })
}

/// One repetition with times drawn from `stream(derived_seed)`. Using
/// `derive_seed(master, i)` reproduces repetition `i` of [`run_ensemble`] bit for bit.
pub fn run_single(
    inst: &QlspInstance,
    sched: &Schedule,
    mode: EmbeddingMode,
    rep_index: u64,
    derived_seed: u64,
) -> Result<RunRecord> {
    let times = sample_times(sched, &mut stream(derived_seed));
    run_single_with_times(inst, sched, mode, rep_index, derived_seed, times)
}

pub fn run_ensemble(
    inst: &QlspInstance,
    sched: &Schedule,
    n_rep: usize,
    master_seed: u64,
    cfg: &EngineConfig,
) -> Result<EnsembleResult> {
    if n_rep == 0 {
        return Err(Error::invalid("n_rep must be at least 1"));
    }
    check_ceiling(inst, cfg)?;
    let emb = Embedding::new(inst, cfg.mode)?;
    let psi0 = initial_state(&emb, sched.variant)?;

    let seeds: Vec<u64> = (0..n_rep as u64)
        .map(|i| derive_seed(master_seed, i))
        .collect();
    let times: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| sample_times(sched, &mut stream(seed)))
        .collect();
    let mut states = vec![psi0.amplitudes().to_vec(); n_rep];
    evolve_all(&emb, sched, &times, &mut states)?;
    let finals: Vec<StateVector> = states
        .into_iter()
        .map(StateVector::from_vec_unchecked)
        .collect();

    let full = DensityMatrix::mixture(&finals)?;
    let rho_tilde = partial_trace_leading_qubits(&full, ancilla_qubits(cfg.mode, sched.variant))?;
    let x = exact_solution(inst)?;
    let error = trace_distance(&rho_tilde, &DensityMatrix::pure(&x))?;

    let endpoint = emb.tracked_state(1.0, sched.variant)?;
    let full_space_fidelity =
        finals.iter().map(|f| f.fidelity(&endpoint)).sum::<f64>() / n_rep as f64;
    let max_leakage = match sched.variant {
        Variant::GroundState => 0.0,
        Variant::GapAmplified => {
            let branch = StateVector::basis(2, 1).kron(emb.b_bar());
            finals
                .iter()
                .map(|f| inner(branch.amplitudes(), f.amplitudes()).norm())
                .fold(0.0, f64::max)
        }
    };

    let records = cfg.keep_records.then(|| {
        finals
            .into_iter()
            .zip(times)
            .zip(seeds)
            .enumerate()
            .map(
                |(i, ((final_state, sampled_times), derived_seed))| RunRecord {
                    rep_index: i as u64,
                    derived_seed,
                    sampled_times,
                    final_state,
                },
            )
            .collect()
    });

    Ok(EnsembleResult {
        n_rep,
        rho_tilde,
        error,
        total_expected_time: sched.expected_total_time(),
        full_space_fidelity,
        max_leakage,
        records,
    })
}

/// Outcome of replacing each random evolution by an ideal projective
/// measurement onto the path state.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealTrace {
    /// `|⟨x(s^{j−1})|x(s^j)⟩|²` for `j = 1..q`, with `s⁰ = 0`.
    pub per_step_fidelities: Vec<f64>,
    /// Product of the per-step fidelities.
    pub success_probability: f64,
}

impl IdealTrace {
    pub fn max_infidelity(&self) -> f64 {
        self.per_step_fidelities
            .iter()
            .map(|f| 1.0 - f)
            .fold(0.0, f64::max)
    }
}

pub fn ideal_measurement_trace(
    inst: &QlspInstance,
    sched: &Schedule,
    mode: EmbeddingMode,
) -> Result<IdealTrace> {
    let emb = Embedding::new(inst, mode)?;
    let s_grid: Vec<f64> = std::iter::once(0.0).chain(sched.s_values()).collect();
    let path: Vec<StateVector> = s_grid
        .par_iter()
        .map(|&s| emb.eigenpath_state(s))
        .collect::<Result<_>>()?;
    let per_step_fidelities: Vec<f64> = path.windows(2).map(|w| w[0].fidelity(&w[1])).collect();
    let success_probability = per_step_fidelities.iter().product();
    Ok(IdealTrace {
        per_step_fidelities,
        success_probability,
    })
}
