//! End-to-end pipelines: preprocessing (energy shift, timestep, time-shift
//! optimization), shot-noise trials for both measurement routes, the
//! thresholded eigensolve, optional moment-Lanczos mitigation, and every
//! closed-form cost/perturbation prediction.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chem::ElectronIntegrals;
use crate::error::{Error, Result};
use crate::finitediff::{bound_constants, fd_coefficients};
use crate::krylov::{
    assemble_kqd, assemble_msd, exact_matrices, optimal_threshold, solve_gevp, KrylovConfig,
    KrylovContext,
};
use crate::linalg::hermitian_spectral_norm;
use crate::moments::{
    lanczos_mitigate, moment_perturbation_bound, moments_from, power_matrices, Termination,
};
use crate::pauli::PauliLcu;
use crate::sampling::{kqd_shot_allocation, msd_component_allocation, MatrixTag};
use crate::spectral::{SectorSpectrum, SpectralOracle};

// ---------------------------------------------------------------------------
// Closed-form costs
// ---------------------------------------------------------------------------

/// Stationary point of f(δt) = α/(δt√M) + β‖H‖^{2J+1} δt^{2J}:
/// δt = (α / (2J β ‖H‖^{2J+1} √M))^{1/(2J+1)}.
pub fn optimal_delta_t(n: usize, degree: usize, h_norm: f64, shots: f64) -> Result<f64> {
    if !(h_norm > 0.0) || !(shots > 0.0) {
        return Err(Error::InvalidConfig(
            "time-shift optimization needs positive norm and shot count".into(),
        ));
    }
    let (alpha, beta) = bound_constants(n, degree)?;
    let exponent = 1.0 / (2.0 * degree as f64 + 1.0);
    Ok((alpha
        / (2.0 * degree as f64 * beta * h_norm.powi(2 * degree as i32 + 1) * shots.sqrt()))
    .powf(exponent))
}

/// Combined perturbation prediction at a given δt:
/// α/(δt√M) + β‖H‖^{2J+1}δt^{2J}.
pub fn msd_perturbation_bound(
    n: usize,
    degree: usize,
    h_norm: f64,
    shots: f64,
    delta_t: f64,
) -> Result<f64> {
    let (alpha, beta) = bound_constants(n, degree)?;
    Ok(alpha / (delta_t * shots.sqrt())
        + beta * h_norm.powi(2 * degree as i32 + 1) * delta_t.powi(2 * degree as i32))
}

/// Theorem-style overlap perturbation: 2n√(2 ln 2n)/√M.
pub fn overlap_perturbation_bound(n: usize, shots: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf * (2.0 * (2.0 * nf).ln()).sqrt() / shots.sqrt()
}

/// Per-term route Hamiltonian perturbation: 2nλ√(2 ln 2n)/√M.
pub fn kqd_perturbation_bound(n: usize, one_norm: f64, shots: f64) -> f64 {
    one_norm * overlap_perturbation_bound(n, shots)
}

/// Shots for the mirror route to reach a target perturbation η:
/// (2J+1)^{2+1/J} α² β^{1/J} ‖H‖^{2+1/J} / ((2J)² η^{2+1/J}).
pub fn msd_sampling_cost(n: usize, degree: usize, h_norm: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig("target accuracy must be positive".into()));
    }
    let (alpha, beta) = bound_constants(n, degree)?;
    let jf = degree as f64;
    let e = 2.0 + 1.0 / jf;
    Ok((2.0 * jf + 1.0).powf(e) * alpha * alpha * beta.powf(1.0 / jf) * h_norm.powf(e)
        / ((2.0 * jf).powi(2) * eta.powf(e)))
}

/// Shots for the per-term route: 8n² ln(2n) λ²/η². The logarithm argument
/// follows the perturbation theorem (2n).
pub fn kqd_sampling_cost(n: usize, one_norm: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig("target accuracy must be positive".into()));
    }
    let nf = n as f64;
    Ok(8.0 * nf * nf * (2.0 * nf).ln() * one_norm * one_norm / (eta * eta))
}

/// In-principle floor over all 1-norm reductions: 2n² ln(2n) ΔE²/η².
pub fn sampling_lower_bound(n: usize, spectral_range: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig("target accuracy must be positive".into()));
    }
    let nf = n as f64;
    Ok(2.0 * nf * nf * (2.0 * nf).ln() * spectral_range * spectral_range / (eta * eta))
}

/// Measurement route selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Kqd,
    Msd,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Kqd => "kqd",
            Method::Msd => "msd",
        }
    }
}

/// Evolution-time costs of the Hadamard-test schedule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolutionTimes {
    /// Longest single evolution: (n-1)τ, plus Jδt on the mirror route.
    pub t_max: f64,
    /// Exact Σ shots × |evolution time| under the integer plans.
    pub t_total: f64,
    /// Closed-form upper bound on t_total.
    pub t_total_bound: f64,
}

/// Evolution times for one Hamiltonian-matrix budget of M shots.
pub fn evolution_times(
    method: Method,
    n: usize,
    tau: f64,
    degree: usize,
    delta_t: f64,
    shots: u64,
) -> Result<EvolutionTimes> {
    let nf = n as f64;
    let row = kqd_shot_allocation(n, shots, MatrixTag::Hamiltonian)?;
    match method {
        Method::Kqd => {
            // per-term splitting preserves the row totals
            let t_total: f64 = row
                .iter()
                .enumerate()
                .map(|(k, &m)| m as f64 * k as f64 * tau)
                .sum();
            let bound = nf * (nf - 1.0) * shots as f64 * tau
                / (2.0 * (nf - 1.0) + std::f64::consts::SQRT_2);
            Ok(EvolutionTimes {
                t_max: (nf - 1.0) * tau,
                t_total,
                t_total_bound: bound,
            })
        }
        Method::Msd => {
            let scheme = fd_coefficients(degree, 1)?;
            let mut t_total = 0.0;
            for (k, &m) in row.iter().enumerate() {
                let per_node = msd_component_allocation(&scheme, m, k)?;
                for j in scheme.nodes() {
                    let idx = (degree as i64 + j) as usize;
                    t_total +=
                        per_node[idx] as f64 * (k as f64 * tau + j as f64 * delta_t).abs();
                }
            }
            let bound = nf * (nf - 1.0) * shots as f64 * tau
                / (std::f64::consts::SQRT_2 * (nf - 1.0) + 1.0)
                + 2.0 * degree as f64 * shots as f64 * delta_t / scheme.coeff_one_norm();
            Ok(EvolutionTimes {
                t_max: (nf - 1.0) * tau + degree as f64 * delta_t,
                t_total,
                t_total_bound: bound,
            })
        }
    }
}

/// Every closed-form prediction for one configured run.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub fd_degree: usize,
    pub shots: u64,
    pub eta_target: f64,
    pub one_norm: f64,
    pub spectral_range: f64,
    pub restricted_norm: f64,
    pub tau: f64,
    pub delta_t_opt: f64,
    pub delta_s_bound: f64,
    pub kqd_delta_h_bound: f64,
    pub msd_sampling_bound: f64,
    pub msd_fd_bound: f64,
    pub msd_combined_bound: f64,
    pub moment_bounds: Vec<f64>,
    pub m_kqd: f64,
    pub m_msd: f64,
    pub m_lowest: f64,
    pub ratio_m: f64,
    pub kqd_times: EvolutionTimes,
    pub msd_times: EvolutionTimes,
    pub ratio_t_max: f64,
    pub ratio_t_total: f64,
}

/// Build the report for given problem scales.
pub fn bound_report(
    n: usize,
    degree: usize,
    one_norm: f64,
    spectral_range: f64,
    shots: u64,
    eta: f64,
    delta_t: f64,
) -> Result<BoundReport> {
    let h_norm = spectral_range / 2.0;
    let tau = std::f64::consts::PI / spectral_range;
    let shots_f = (shots.max(1)) as f64;
    let (alpha, beta) = bound_constants(n, degree)?;
    let msd_sampling = alpha / (delta_t * shots_f.sqrt());
    let msd_fd = beta * h_norm.powi(2 * degree as i32 + 1) * delta_t.powi(2 * degree as i32);
    let m_kqd = kqd_sampling_cost(n, one_norm, eta)?;
    let m_msd = msd_sampling_cost(n, degree, h_norm, eta)?;
    let mut moment_bounds = Vec::with_capacity(2 * degree);
    for q in 1..=2 * degree {
        moment_bounds.push(moment_perturbation_bound(n, degree, q, delta_t, h_norm, shots_f)?);
    }
    let kqd_times = evolution_times(Method::Kqd, n, tau, degree, delta_t, shots)?;
    let msd_times = evolution_times(Method::Msd, n, tau, degree, delta_t, shots)?;
    Ok(BoundReport {
        n,
        fd_degree: degree,
        shots,
        eta_target: eta,
        one_norm,
        spectral_range,
        restricted_norm: h_norm,
        tau,
        delta_t_opt: delta_t,
        delta_s_bound: overlap_perturbation_bound(n, shots_f),
        kqd_delta_h_bound: kqd_perturbation_bound(n, one_norm, shots_f),
        msd_sampling_bound: msd_sampling,
        msd_fd_bound: msd_fd,
        msd_combined_bound: msd_sampling + msd_fd,
        moment_bounds,
        m_kqd,
        m_msd,
        m_lowest: sampling_lower_bound(n, spectral_range, eta)?,
        ratio_m: m_msd / m_kqd,
        ratio_t_max: msd_times.t_max / kqd_times.t_max,
        ratio_t_total: if kqd_times.t_total > 0.0 {
            msd_times.t_total / kqd_times.t_total
        } else {
            f64::NAN
        },
        kqd_times,
        msd_times,
    })
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// A ground-state estimation problem: qubit Hamiltonian, symmetry sector,
/// and the reference basis state.
#[derive(Debug, Clone)]
pub struct Problem {
    pub hamiltonian: PauliLcu,
    pub n_orb: usize,
    pub n_e: usize,
    pub spin: f64,
    /// Computational-basis index of the reference state (default: the
    /// mean-field determinant).
    pub phi0_index: usize,
}

impl Problem {
    pub fn from_integrals(ints: &ElectronIntegrals) -> Result<Self> {
        let hamiltonian = crate::chem::jordan_wigner(ints)?;
        Ok(Problem {
            hamiltonian,
            n_orb: ints.n_orb,
            n_e: ints.n_electrons(),
            spin: 0.5 * (ints.n_alpha as f64 - ints.n_beta as f64).abs(),
            phi0_index: ints.hartree_fock_index(),
        })
    }
}

/// Pipeline parameters.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub method: Method,
    pub order: usize,
    pub fd_degree: usize,
    /// Shots per matrix budget (the overlap and Hamiltonian budgets both
    /// get this; total spend is twice it).
    pub shots: u64,
    pub trials: usize,
    pub seed: u64,
    pub exact: bool,
    pub delta_t_override: Option<f64>,
    pub threshold_override: Option<f64>,
    pub mitigate: bool,
    /// Target perturbation for the cost report.
    pub eta_target: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            method: Method::Msd,
            order: 2,
            fd_degree: 2,
            shots: 1_000_000,
            trials: 1,
            seed: 1,
            exact: false,
            delta_t_override: None,
            threshold_override: None,
            mitigate: false,
            eta_target: 0.0016,
        }
    }
}

/// Outcome of one shot-noise trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub energy: f64,
    pub energy_error: f64,
    pub delta_h_norm: f64,
    pub delta_s_norm: f64,
    pub n_eps: usize,
    pub mitigated_energy: Option<f64>,
    pub mitigated_error: Option<f64>,
    pub lanczos_termination: Option<Termination>,
    pub lanczos_steps: Vec<crate::moments::LanczosStep>,
}

/// Ensemble statistics over trials.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub mean_abs_error: f64,
    pub std_abs_error: f64,
    pub fwhm_error: f64,
    pub mean_delta_h: f64,
    pub mean_delta_s: f64,
    pub mean_abs_mitigated_error: Option<f64>,
    pub std_abs_mitigated_error: Option<f64>,
}

/// Full pipeline output.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineResult {
    pub method: Method,
    pub exact_ground_energy: f64,
    pub sector_range: f64,
    pub shift: f64,
    pub tau: f64,
    pub delta_t: f64,
    pub threshold: f64,
    pub total_shots_spent: u64,
    pub trials: Vec<TrialResult>,
    pub bounds: BoundReport,
    pub aggregate: Aggregate,
}

/// Everything the trials share, prepared once.
pub struct PreparedProblem {
    pub oracle_shifted: SpectralOracle,
    pub lcu_shifted: PauliLcu,
    pub phi0: DVector<Complex64>,
    pub sector: SectorSpectrum,
    pub shift: f64,
    pub tau: f64,
    pub h_norm: f64,
    pub exact_ground: f64,
}

pub fn prepare(problem: &Problem) -> Result<PreparedProblem> {
    let dense = problem.hamiltonian.to_dense()?;
    let oracle = SpectralOracle::decompose_with_sectors(&dense, problem.n_orb)?;
    let sector = oracle.sector_spectrum(problem.n_e, problem.spin)?;
    let shift = sector.center();
    let (lcu_shifted, _) = crate::spectral::energy_shift(
        &problem.hamiltonian,
        sector.e_min,
        sector.e_max,
    )?;
    let oracle_shifted = oracle.shifted(shift);
    let d = 1usize << problem.hamiltonian.n_qubits();
    if problem.phi0_index >= d {
        return Err(Error::InvalidConfig(format!(
            "reference index {} outside the {d}-dimensional space",
            problem.phi0_index
        )));
    }
    let mut phi0 = DVector::<Complex64>::zeros(d);
    phi0[problem.phi0_index] = Complex64::new(1.0, 0.0);
    Ok(PreparedProblem {
        oracle_shifted,
        lcu_shifted,
        phi0,
        sector,
        shift,
        tau: std::f64::consts::PI / sector.spectral_range(),
        h_norm: sector.restricted_norm_after_shift(),
        exact_ground: sector.e_min,
    })
}

/// Run the full estimation pipeline.
pub fn run_pipeline(problem: &Problem, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if cfg.order < 2 {
        return Err(Error::InvalidConfig(
            "pipeline needs krylov order >= 2 (row allocation)".into(),
        ));
    }
    if cfg.mitigate && cfg.method != Method::Msd {
        return Err(Error::InvalidConfig(
            "moment mitigation needs the mirror route".into(),
        ));
    }
    let prep = prepare(problem)?;
    let n = cfg.order;
    let degree = cfg.fd_degree;
    let shots_f = cfg.shots.max(1) as f64;

    let delta_t = match cfg.delta_t_override {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => {
            return Err(Error::InvalidConfig(format!(
                "time shift must be positive (got {dt})"
            )))
        }
        None => {
            if cfg.exact || cfg.shots == 0 {
                1e-3 / prep.h_norm.max(1e-6)
            } else {
                optimal_delta_t(n, degree, prep.h_norm, shots_f)?
            }
        }
    };

    let bounds = bound_report(
        n,
        degree,
        prep.lcu_shifted.one_norm(),
        prep.sector.spectral_range(),
        cfg.shots,
        cfg.eta_target,
        delta_t,
    )?;

    let threshold = match cfg.threshold_override {
        Some(eps) => eps,
        None if cfg.exact || cfg.shots == 0 => 1e-12,
        None => {
            let dh = match cfg.method {
                Method::Kqd => bounds.kqd_delta_h_bound,
                Method::Msd => bounds.msd_combined_bound,
            };
            optimal_threshold(bounds.delta_s_bound, dh, prep.h_norm)?
        }
    };

    let kcfg = KrylovConfig {
        order: n,
        timestep: prep.tau,
        fd_degree: degree,
        delta_t,
    };

    // exact rows for perturbation measurement
    let ctx = KrylovContext::new(&prep.oracle_shifted, &prep.phi0)?;
    let exact = exact_matrices(&ctx, &kcfg, if cfg.mitigate { 2 * degree } else { 1 })?;
    let exact_s = exact.s_matrix();
    let exact_h_full = exact.h_matrix();
    let c0 = prep.lcu_shifted.identity_coeff();
    // the per-term route estimates the matrix of H - c₀·1
    let exact_h_kqd = &exact_h_full - &exact_s * Complex64::new(c0, 0.0);

    let floor = -prep.h_norm - bounds.msd_combined_bound.max(1e-9);

    let run_trial = |trial: usize| -> Result<TrialResult> {
        let estimate = match cfg.method {
            Method::Kqd => assemble_kqd(
                &prep.oracle_shifted,
                &prep.lcu_shifted,
                &prep.phi0,
                &kcfg,
                cfg.shots,
                cfg.seed,
                trial as u64,
                cfg.exact,
            )?,
            Method::Msd => assemble_msd(
                &prep.oracle_shifted,
                &prep.phi0,
                &kcfg,
                cfg.shots,
                cfg.seed,
                trial as u64,
                cfg.exact,
            )?,
        };
        let s_tilde = estimate.s_matrix();
        let h_tilde = estimate.h_matrix();
        let delta_s_norm = hermitian_spectral_norm(&(&s_tilde - &exact_s));
        let exact_h = match cfg.method {
            Method::Kqd => &exact_h_kqd,
            Method::Msd => &exact_h_full,
        };
        let delta_h_norm = hermitian_spectral_norm(&(&h_tilde - exact_h));

        let solution = solve_gevp(&h_tilde, &s_tilde, threshold)?;
        let shifted_energy = solution.eigenvalues[0]
            + match cfg.method {
                Method::Kqd => c0,
                Method::Msd => 0.0,
            };
        let energy = shifted_energy + prep.shift;
        let energy_error = energy - prep.exact_ground;

        let (mut mitigated_energy, mut mitigated_error, mut termination, mut steps) =
            (None, None, None, Vec::new());
        if cfg.mitigate {
            let rows = power_matrices(&estimate)?;
            let mut mset = moments_from(&rows, &estimate.s_row, &solution.eigenvectors[0])?;
            mset.scale_hint = Some(prep.h_norm.max(1e-12));
            mset.predicted_bounds = Some(bounds.moment_bounds.clone());
            let state = lanczos_mitigate(&mset, Some(floor))?;
            let e = state.mitigated_energy + prep.shift;
            mitigated_energy = Some(e);
            mitigated_error = Some(e - prep.exact_ground);
            termination = Some(state.termination);
            steps = state.steps;
        }

        Ok(TrialResult {
            trial,
            energy,
            energy_error,
            delta_h_norm,
            delta_s_norm,
            n_eps: solution.n_eps,
            mitigated_energy,
            mitigated_error,
            lanczos_termination: termination,
            lanczos_steps: steps,
        })
    };

    let trials: Vec<TrialResult> = (0..cfg.trials.max(1))
        .into_par_iter()
        .map(run_trial)
        .collect::<Result<Vec<_>>>()?;

    let aggregate = aggregate(&trials);
    Ok(PipelineResult {
        method: cfg.method,
        exact_ground_energy: prep.exact_ground,
        sector_range: prep.sector.spectral_range(),
        shift: prep.shift,
        tau: prep.tau,
        delta_t,
        threshold,
        total_shots_spent: 2 * cfg.shots,
        trials,
        bounds,
        aggregate,
    })
}

fn aggregate(trials: &[TrialResult]) -> Aggregate {
    let n = trials.len().max(1) as f64;
    let abs_errors: Vec<f64> = trials.iter().map(|t| t.energy_error.abs()).collect();
    let mean = abs_errors.iter().sum::<f64>() / n;
    let var = abs_errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    let mit: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.mitigated_error.map(f64::abs))
        .collect();
    let (mit_mean, mit_std) = if mit.is_empty() {
        (None, None)
    } else {
        let m = mit.iter().sum::<f64>() / mit.len() as f64;
        let v = mit.iter().map(|e| (e - m).powi(2)).sum::<f64>() / mit.len() as f64;
        (Some(m), Some(v.sqrt()))
    };
    Aggregate {
        mean_abs_error: mean,
        std_abs_error: var.sqrt(),
        fwhm_error: fwhm(&trials.iter().map(|t| t.energy_error).collect::<Vec<_>>()),
        mean_delta_h: trials.iter().map(|t| t.delta_h_norm).sum::<f64>() / n,
        mean_delta_s: trials.iter().map(|t| t.delta_s_norm).sum::<f64>() / n,
        mean_abs_mitigated_error: mit_mean,
        std_abs_mitigated_error: mit_std,
    }
}

/// Full width at half maximum of an empirical distribution via a fixed
/// histogram (Freedman-Diaconis bin width with a std-based fallback).
pub fn fwhm(samples: &[f64]) -> f64 {
    if samples.len() < 4 {
        return 0.0;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let q1 = sorted[n / 4];
    let q3 = sorted[3 * n / 4];
    let iqr = (q3 - q1).abs();
    let spread = sorted[n - 1] - sorted[0];
    if spread <= 0.0 {
        return 0.0;
    }
    let width = if iqr > 0.0 {
        2.0 * iqr / (n as f64).cbrt()
    } else {
        spread / 16.0
    };
    let bins = ((spread / width).ceil() as usize).clamp(4, 4096);
    let width = spread / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        let b = (((x - sorted[0]) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let peak = *counts.iter().max().unwrap();
    let half = peak as f64 / 2.0;
    let first = counts.iter().position(|&c| c as f64 >= half).unwrap();
    let last = counts.iter().rposition(|&c| c as f64 >= half).unwrap();
    (last - first + 1) as f64 * width
}
