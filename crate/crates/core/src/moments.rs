//! Hamiltonian power matrices, moments, and the moment-driven Lanczos
//! energy mitigation.
//!
//! Power matrices are classical post-processing of the propagator dataset:
//! M^{(q)}[k] = (i^q/δt^q)·Σ_j a_j^{(J;q)} u^{(j)}[k]. Moments are Rayleigh
//! quotients of the ground Ritz vector; the norm uses the projected
//! overlap (q = 0 power matrix), which reduces to v†v in an orthonormal
//! basis. The Hankel determinant ladder runs in double-double arithmetic
//! on moments pre-scaled by a spectral scale c (μ̂_q = μ_q/c^q); the
//! scaling is undone analytically on the tridiagonal entries (α → cα̂,
//! β² → c²β̂²).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finitediff::{factorial, fd_coefficients};
use crate::krylov::{fd_combine_first_row, KrylovEstimate};
use crate::linalg::{self, toeplitz_hermitian};

// ---------------------------------------------------------------------------
// double-double arithmetic (unevaluated hi + lo pairs)
// ---------------------------------------------------------------------------

/// Double-double value: hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub(crate) const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub(crate) fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let v = s - a;
        let e = (a - (s - v)) + (b - v);
        (s, e)
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        (p, e)
    }

    pub(crate) fn add(self, other: Dd) -> Dd {
        let (s, e) = Dd::two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = Dd::two_sum(s, e);
        Dd { hi, lo }
    }

    pub(crate) fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    pub(crate) fn mul(self, other: Dd) -> Dd {
        let (p, e) = Dd::two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = Dd::two_sum(p, e);
        Dd { hi, lo }
    }

    pub(crate) fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from_f64(q1)));
        let q2 = r.value() / other.hi;
        let (hi, lo) = Dd::two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub(crate) fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        } else {
            self
        }
    }
}

/// Determinant of a square matrix by partially pivoted LU, keeping the
/// accumulation in double-double.
pub(crate) fn determinant_dd(matrix: &[Vec<Dd>]) -> Dd {
    let n = matrix.len();
    let mut a: Vec<Vec<Dd>> = matrix.to_vec();
    let mut det = Dd::ONE;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs().value() > a[pivot][col].abs().value() {
                pivot = row;
            }
        }
        if a[pivot][col].value() == 0.0 {
            return Dd::ZERO;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = det.mul(Dd::from_f64(-1.0));
        }
        det = det.mul(a[col][col]);
        for row in col + 1..n {
            let factor = a[row][col].div(a[col][col]);
            for k in col..n {
                let sub = factor.mul(a[col][k]);
                a[row][k] = a[row][k].sub(sub);
            }
        }
    }
    det
}

/// Plain f64 determinant (pivoted LU), for the precision cross-check.
pub(crate) fn determinant_f64(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// power matrices and moments
// ---------------------------------------------------------------------------

/// First rows of the power estimates M̃^{(q)} for q = 1..2J from a mirror
/// estimate's propagator dataset. q = 1 is bit-identical to the estimate's
/// own Hamiltonian row (same code path, same data).
pub fn power_matrices(estimate: &KrylovEstimate) -> Result<Vec<Vec<Complex64>>> {
    let degree = estimate.fd_degree.ok_or_else(|| {
        Error::InvalidConfig("power matrices need a mirror estimate (no stencil degree)".into())
    })?;
    let delta_t = estimate
        .delta_t
        .ok_or_else(|| Error::InvalidConfig("power matrices need the time shift".into()))?;
    let u_rows = estimate
        .u_rows
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("estimate carries no propagator dataset".into()))?;
    let mut rows = Vec::with_capacity(2 * degree);
    for q in 1..=2 * degree {
        let scheme = fd_coefficients(degree, q)?;
        rows.push(fd_combine_first_row(u_rows, &scheme, delta_t, q as u32));
    }
    Ok(rows)
}

/// Two-term perturbation bound for the q-th power estimate:
/// 2n√(2·v·ln 2n)/(δt^q √M) + n Σ_j |a_j^{(J;q)} j^{s+1}|·‖H‖^{s+1}/(s+1)!·δt^{s-q+1},
/// with v = |a₀^{(J;q)}|² + 2‖a^{(J;1)}‖₁ Σ_{j≥1} |a_j^{(J;q)}|²/|a_j^{(J;1)}|.
pub fn moment_perturbation_bound(
    n: usize,
    degree: usize,
    q: usize,
    delta_t: f64,
    h_norm: f64,
    shots: f64,
) -> Result<f64> {
    if q > 2 * degree {
        return Err(Error::InvalidConfig(format!(
            "power order {q} exceeds 2J = {}",
            2 * degree
        )));
    }
    let scheme_q = fd_coefficients(degree, q)?;
    let scheme_1 = fd_coefficients(degree, 1)?;
    let mut v = scheme_q.coeff(0).powi(2);
    let mut cross = 0.0;
    for j in 1..=degree as i64 {
        cross += scheme_q.coeff(j).powi(2) / scheme_1.coeff(j).abs();
    }
    v += 2.0 * scheme_1.coeff_one_norm() * cross;
    let nf = n as f64;
    let sampling =
        2.0 * nf * (2.0 * v * (2.0 * nf).ln()).sqrt() / (delta_t.powi(q as i32) * shots.sqrt());
    let s = scheme_q.remainder_order();
    let mut tail = 0.0;
    for j in scheme_q.nodes() {
        tail += (scheme_q.coeff(j) * (j as f64).powi(s as i32 + 1)).abs();
    }
    let truncation = nf * tail * h_norm.powi(s as i32 + 1) / factorial(s + 1)
        * delta_t.powi((s + 1 - q) as i32);
    Ok(sampling + truncation)
}

/// Moments μ_0..μ_{2J} of the state encoded by a Krylov coefficient
/// vector, as Rayleigh quotients of the power matrices.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSet {
    /// moments[q] = μ_q, q = 0..2J with μ₀ = 1.
    pub moments: Vec<f64>,
    /// Per-q predicted perturbation bounds, when the sampling context is
    /// known (index q-1).
    pub predicted_bounds: Option<Vec<f64>>,
    /// Spectral scale for the determinant ladder (e.g. ‖H‖ restricted to
    /// the sector); falls back to a moment-derived scale when absent.
    pub scale_hint: Option<f64>,
}

/// Rayleigh-quotient moments: μ_q = v†M^{(q)}v / v†S v, with S the q = 0
/// member of the power family, so μ₀ = 1 identically. In an orthonormal
/// basis the denominator reduces to v†v.
pub fn moments_from(
    power_rows: &[Vec<Complex64>],
    s_row: &[Complex64],
    v0: &DVector<Complex64>,
) -> Result<MomentSet> {
    if v0.norm() < 1e-300 {
        return Err(Error::ZeroDenominator {
            context: "moment Rayleigh quotient (zero vector)",
        });
    }
    let s = toeplitz_hermitian(s_row);
    let denom = v0.dotc(&(&s * v0)).re;
    if denom.abs() < 1e-300 {
        return Err(Error::ZeroDenominator {
            context: "moment Rayleigh quotient (vanishing projected norm)",
        });
    }
    let mut moments = vec![1.0];
    for row in power_rows {
        let m = toeplitz_hermitian(row);
        moments.push(v0.dotc(&(&m * v0)).re / denom);
    }
    Ok(MomentSet {
        moments,
        predicted_bounds: None,
        scale_hint: None,
    })
}

// ---------------------------------------------------------------------------
// Lanczos ladder
// ---------------------------------------------------------------------------

/// Why the ladder stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    /// Reached j = J with all checks passing.
    MaxOrder,
    /// β_j² < 0: noise-inconsistent moments.
    BetaNegative,
    /// The lowest eigenvalue rose by more than the tolerance.
    EnergyIncrease,
    /// A Hankel determinant vanished: the moment problem has fewer
    /// support points than requested (exact case) or is noise-degenerate.
    DegenerateMoments,
    /// The lowest eigenvalue fell below the known spectral floor; Gauss
    /// nodes of a genuine moment problem lie inside the support interval,
    /// so this step is provably noise-corrupted.
    OutOfRange,
}

/// One accepted ladder step.
#[derive(Debug, Clone, Serialize)]
pub struct LanczosStep {
    pub j: usize,
    pub alpha: f64,
    /// β²_{j-1} entering this step (None for j = 1).
    pub beta_sq: Option<f64>,
    pub lowest_eigenvalue: f64,
}

/// Full record of a mitigation run.
#[derive(Debug, Clone, Serialize)]
pub struct LanczosState {
    pub steps: Vec<LanczosStep>,
    pub termination: Termination,
    /// Lowest eigenvalue of the last accepted step.
    pub mitigated_energy: f64,
}

const ENERGY_INCREASE_TOL: f64 = 1e-10;
const DEGENERATE_REL_TOL: f64 = 1e-12;

/// Run the moment-Lanczos ladder.
///
/// `floor`: optional lower edge of the admissible energy window (shifted
/// sector minimum minus a perturbation margin).
pub fn lanczos_mitigate(set: &MomentSet, floor: Option<f64>) -> Result<LanczosState> {
    let mu = &set.moments;
    if mu.len() < 3 || mu.len() % 2 == 0 {
        return Err(Error::InvalidConfig(format!(
            "need moments 0..2J with J >= 1 (got {} values)",
            mu.len()
        )));
    }
    let cap = (mu.len() - 1) / 2;
    if (mu[0] - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("μ₀ must be 1 (got {})", mu[0])));
    }

    // pre-scale μ̂_q = μ_q / c^q to tame the Hankel dynamic range
    let scale = set
        .scale_hint
        .filter(|s| *s > 0.0)
        .unwrap_or_else(|| moment_scale(mu));
    let scaled: Vec<Dd> = mu
        .iter()
        .enumerate()
        .map(|(q, m)| Dd::from_f64(m / scale.powi(q as i32)))
        .collect();

    // Hankel determinants L_j (entries μ̂_{r+c}) and M_j (last column
    // advanced by one), j up to cap; M_j only needs μ̂ up to 2j+1
    let mut l_det = vec![Dd::ONE; cap + 1];
    let mut m_det = vec![Dd::ZERO; cap + 1];
    m_det[0] = scaled[1];
    for j in 1..=cap {
        let l_mat: Vec<Vec<Dd>> = (0..=j)
            .map(|r| (0..=j).map(|c| scaled[r + c]).collect())
            .collect();
        l_det[j] = determinant_dd(&l_mat);
        if 2 * j + 1 < scaled.len() {
            let m_mat: Vec<Vec<Dd>> = (0..=j)
                .map(|r| {
                    (0..=j)
                        .map(|c| if c < j { scaled[r + c] } else { scaled[r + j + 1] })
                        .collect()
                })
                .collect();
            m_det[j] = determinant_dd(&m_mat);
        }
    }

    let ratio = |num: Dd, den: Dd| num.div(den).value();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut steps: Vec<LanczosStep> = Vec::new();
    let mut termination = Termination::MaxOrder;

    for j in 1..=cap {
        // α_j = M_{j-1}/L_{j-1} − M_{j-2}/L_{j-2} (second term zero at j = 1)
        let l_prev = l_det[j - 1];
        if l_prev.abs().value() <= DEGENERATE_REL_TOL * hankel_scale(&scaled, j - 1) {
            termination = Termination::DegenerateMoments;
            break;
        }
        let mut alpha_hat = ratio(m_det[j - 1], l_prev);
        if j >= 2 {
            alpha_hat -= ratio(m_det[j - 2], l_det[j - 2]);
        }
        let mut beta_sq: Option<f64> = None;
        if j >= 2 {
            // β_{j-1}² = L_{j-1} L_{j-3} / L_{j-2}²  (L_{-1} := 1)
            let l_m3 = if j >= 3 { l_det[j - 3] } else { Dd::ONE };
            let b_hat = ratio(l_det[j - 1].mul(l_m3), l_det[j - 2].mul(l_det[j - 2]));
            let b = b_hat * scale * scale;
            if b < 0.0 {
                termination = Termination::BetaNegative;
                break;
            }
            beta_sq = Some(b);
            betas.push(b.sqrt());
        }
        alphas.push(alpha_hat * scale);

        let lowest = tridiagonal_lowest(&alphas, &betas)?;
        if let Some(prev) = steps.last() {
            if lowest > prev.lowest_eigenvalue + ENERGY_INCREASE_TOL {
                termination = Termination::EnergyIncrease;
                break;
            }
        }
        if let Some(floor) = floor {
            if lowest < floor {
                termination = Termination::OutOfRange;
                break;
            }
        }
        steps.push(LanczosStep {
            j,
            alpha: alphas[alphas.len() - 1],
            beta_sq,
            lowest_eigenvalue: lowest,
        });
    }

    if steps.is_empty() {
        // j = 1 could not be accepted; fall back to the raw first moment
        return Ok(LanczosState {
            steps: vec![LanczosStep {
                j: 1,
                alpha: mu[1],
                beta_sq: None,
                lowest_eigenvalue: mu[1],
            }],
            termination,
            mitigated_energy: mu[1],
        });
    }
    let mitigated_energy = steps.last().unwrap().lowest_eigenvalue;
    Ok(LanczosState {
        steps,
        termination,
        mitigated_energy,
    })
}

fn moment_scale(mu: &[f64]) -> f64 {
    let mut scale = 1.0f64;
    for (q, m) in mu.iter().enumerate().skip(1) {
        scale = scale.max(m.abs().powf(1.0 / q as f64));
    }
    scale
}

fn hankel_scale(scaled: &[Dd], j: usize) -> f64 {
    // magnitude reference for the (j+1)×(j+1) Hankel determinant
    let mut m: f64 = 0.0;
    for r in 0..=j {
        for c in 0..=j {
            m = m.max(scaled[r + c].value().abs());
        }
    }
    m.powi(j as i32 + 1).max(1e-300)
}

fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> Result<f64> {
    let j = alphas.len();
    let mut t = DMatrix::<Complex64>::zeros(j, j);
    for (i, &a) in alphas.iter().enumerate() {
        t[(i, i)] = Complex64::new(a, 0.0);
    }
    for (i, &b) in betas.iter().enumerate() {
        t[(i, i + 1)] = Complex64::new(b, 0.0);
        t[(i + 1, i)] = Complex64::new(b, 0.0);
    }
    Ok(linalg::eigh(&t)?.eigenvalues[0])
}

/// f64-path determinant ladder for the precision cross-check.
pub fn hankel_ladder_f64(mu: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
    let cap = (mu.len() - 1) / 2;
    let scaled: Vec<f64> = mu
        .iter()
        .enumerate()
        .map(|(q, m)| m / scale.powi(q as i32))
        .collect();
    let mut l = vec![1.0; cap + 1];
    let mut m_ = vec![0.0; cap + 1];
    m_[0] = scaled[1];
    for j in 1..=cap {
        let lm: Vec<Vec<f64>> = (0..=j)
            .map(|r| (0..=j).map(|c| scaled[r + c]).collect())
            .collect();
        l[j] = determinant_f64(&lm);
        if 2 * j + 1 < scaled.len() {
            let mm: Vec<Vec<f64>> = (0..=j)
                .map(|r| {
                    (0..=j)
                        .map(|c| if c < j { scaled[r + c] } else { scaled[r + j + 1] })
                        .collect()
                })
                .collect();
            m_[j] = determinant_f64(&mm);
        }
    }
    (l, m_)
}

/// Double-double path of the same ladder (values collapsed to f64).
pub fn hankel_ladder_dd(mu: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
    let cap = (mu.len() - 1) / 2;
    let scaled: Vec<Dd> = mu
        .iter()
        .enumerate()
        .map(|(q, m)| Dd::from_f64(m / scale.powi(q as i32)))
        .collect();
    let mut l = vec![1.0; cap + 1];
    let mut m_ = vec![0.0; cap + 1];
    m_[0] = scaled[1].value();
    for j in 1..=cap {
        let lm: Vec<Vec<Dd>> = (0..=j)
            .map(|r| (0..=j).map(|c| scaled[r + c]).collect())
            .collect();
        l[j] = determinant_dd(&lm).value();
        if 2 * j + 1 < scaled.len() {
            let mm: Vec<Vec<Dd>> = (0..=j)
                .map(|r| {
                    (0..=j)
                        .map(|c| if c < j { scaled[r + c] } else { scaled[r + j + 1] })
                        .collect()
                })
                .collect();
            m_[j] = determinant_dd(&mm).value();
        }
    }
    (l, m_)
}
