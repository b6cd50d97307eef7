//! Hadamard-test shot-noise emulation and variance-optimal shot plans.
//!
//! A single Hadamard-test estimator of an expectation x in [-1, 1] is
//! 2·Bin(m, (1+x)/2)/m − 1. Per-element random streams are derived from
//! (global seed, trial, element key) so trials parallelize with results
//! independent of scheduling order.

use num_complex::Complex64;
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finitediff::FdScheme;

const INPUT_SLACK: f64 = 1e-9;

/// Which matrix an element belongs to, for stream derivation and audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatrixTag {
    Overlap,
    Hamiltonian,
}

/// Stable identifier of one measured matrix element or component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ElementKey {
    pub matrix: MatrixTag,
    /// Toeplitz column index k of the first-row element.
    pub k: usize,
    /// Component index: LCU term index, or J + j for a time-shift node.
    pub component: usize,
}

impl ElementKey {
    fn mix(&self) -> u64 {
        let tag = match self.matrix {
            MatrixTag::Overlap => 0u64,
            MatrixTag::Hamiltonian => 1u64,
        };
        splitmix(tag ^ (self.k as u64).rotate_left(17) ^ (self.component as u64).rotate_left(40))
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic per-element stream for (seed, trial, key).
pub fn element_rng(seed: u64, trial: u64, key: ElementKey) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&splitmix(seed).to_le_bytes());
    bytes[8..16].copy_from_slice(&splitmix(trial ^ 0x5bd1e995).to_le_bytes());
    bytes[16..24].copy_from_slice(&key.mix().to_le_bytes());
    bytes[24..32].copy_from_slice(&splitmix(seed ^ trial ^ key.mix()).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// One Hadamard-test estimate of a real expectation with m shots.
///
/// m = 0 returns 0.0; callers route known-exact elements around the
/// sampler and flag the remaining zero-shot cases as unsampled.
pub fn hadamard_sample<R: Rng>(x: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if x.abs() > 1.0 + INPUT_SLACK {
        return Err(Error::Numerical(format!(
            "expectation {x} outside [-1, 1]: upstream propagator bug"
        )));
    }
    if shots == 0 {
        return Ok(0.0);
    }
    let p = ((1.0 + x) / 2.0).clamp(0.0, 1.0);
    let hits = Binomial::new(shots, p)
        .map_err(|e| Error::Numerical(format!("binomial setup: {e}")))?
        .sample(rng);
    Ok(2.0 * hits as f64 / shots as f64 - 1.0)
}

/// Estimate of a complex expectation: real and imaginary parts sampled
/// independently with their own shot counts.
pub fn sample_complex<R: Rng>(
    value: Complex64,
    shots_re: u64,
    shots_im: u64,
    rng: &mut R,
) -> Result<Complex64> {
    let re = hadamard_sample(value.re, shots_re, rng)?;
    let im = hadamard_sample(value.im, shots_im, rng)?;
    Ok(Complex64::new(re, im))
}

/// Which allocation rule produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlanKind {
    KqdOverlap,
    KqdLcu,
    MsdFd,
}

/// Shots for one measured element, split into real/imaginary parts.
#[derive(Debug, Clone, Serialize)]
pub struct PlanEntry {
    pub key: ElementKey,
    pub shots_re: u64,
    pub shots_im: u64,
    /// Entries known without sampling (e.g. the k = 0 overlap) carry zero shots.
    pub known_exact: bool,
}

/// Integer shot counts per measured element; totals are exact after rounding.
#[derive(Debug, Clone, Serialize)]
pub struct ShotPlan {
    pub total: u64,
    pub provenance: PlanKind,
    pub entries: Vec<PlanEntry>,
}

impl ShotPlan {
    pub fn spent(&self) -> u64 {
        self.entries.iter().map(|e| e.shots_re + e.shots_im).sum()
    }

    pub fn entry(&self, key: ElementKey) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Largest-remainder rounding of nonnegative weights to integers summing
/// to `total`. Ties break by index for determinism; exactly-zero weights
/// never receive shots.
pub fn largest_remainder(weights: &[f64], total: u64) -> Vec<u64> {
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 || total == 0 {
        return vec![0; weights.len()];
    }
    let shares: Vec<f64> = weights
        .iter()
        .map(|w| w.max(0.0) / wsum * total as f64)
        .collect();
    let mut out: Vec<u64> = shares.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut leftover = (total - assigned) as usize;
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter() {
        if leftover == 0 {
            break;
        }
        if weights[i] > 0.0 {
            out[i] += 1;
            leftover -= 1;
        }
    }
    if leftover > 0 {
        let imax = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        out[imax] += leftover as u64;
    }
    out
}

/// Row-level shot allocation over the Toeplitz index k = 0..n-1:
/// overlap rows get m_k = M/(n-1) with m_0 = 0 (k = 0 is known exactly);
/// Hamiltonian rows get m_0 = M/(√2(n-1)+1) and m_{k>0} = √2 m_0.
pub fn kqd_shot_allocation(n: usize, total: u64, target: MatrixTag) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "row allocation needs n >= 2 (got {n})"
        )));
    }
    let weights: Vec<f64> = match target {
        MatrixTag::Overlap => (0..n).map(|k| if k == 0 { 0.0 } else { 1.0 }).collect(),
        MatrixTag::Hamiltonian => (0..n)
            .map(|k| if k == 0 { 1.0 } else { std::f64::consts::SQRT_2 })
            .collect(),
    };
    Ok(largest_remainder(&weights, total))
}

/// Split one row budget across LCU components: m_kl = |c_l|/λ · m_k.
pub fn lcu_component_allocation(coeffs: &[f64], row_shots: u64) -> Result<Vec<u64>> {
    let lambda: f64 = coeffs.iter().map(|c| c.abs()).sum();
    if lambda <= 0.0 {
        return Err(Error::InvalidConfig("all LCU coefficients are zero".into()));
    }
    let weights: Vec<f64> = coeffs.iter().map(|c| c.abs()).collect();
    Ok(largest_remainder(&weights, row_shots))
}

/// Split one row budget across time-shift nodes:
/// m_kj = (1+δ_{0k}) |a_j|/‖a‖₁ · m_k over the measured node set, which is
/// j = 1..J for the diagonal row (negative shifts follow from the Hermitian
/// reflection) and j = -J..J minus 0 otherwise. The j = 0 node is the
/// overlap element and is budgeted by the overlap plan, not here.
pub fn msd_component_allocation(scheme: &FdScheme, row_shots: u64, k: usize) -> Result<Vec<u64>> {
    if scheme.deriv_order != 1 {
        return Err(Error::InvalidConfig(
            "node allocation is defined for the first-derivative scheme".into(),
        ));
    }
    let weights: Vec<f64> = scheme
        .nodes()
        .map(|j| {
            if j == 0 || (k == 0 && j < 0) {
                0.0
            } else {
                scheme.coeff(j).abs()
            }
        })
        .collect();
    Ok(largest_remainder(&weights, row_shots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finitediff::fd_coefficients;

    fn rng() -> ChaCha8Rng {
        element_rng(
            42,
            0,
            ElementKey {
                matrix: MatrixTag::Overlap,
                k: 1,
                component: 0,
            },
        )
    }

    #[test]
    fn degenerate_endpoints() {
        let mut r = rng();
        for _ in 0..20 {
            assert_eq!(hadamard_sample(1.0, 50, &mut r).unwrap(), 1.0);
            assert_eq!(hadamard_sample(-1.0, 50, &mut r).unwrap(), -1.0);
        }
        assert_eq!(hadamard_sample(0.3, 0, &mut r).unwrap(), 0.0);
        assert!(hadamard_sample(1.2, 10, &mut r).is_err());
    }

    #[test]
    fn estimator_unbiased_and_variance_matches() {
        // mean within 5σ/√reps of x, sample variance within 10% of (1-x²)/m
        let m = 10_000u64;
        let reps = 10_000;
        for (ki, x) in [-0.9, 0.0, 0.6].iter().enumerate() {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for t in 0..reps {
                let mut r = element_rng(
                    7,
                    t,
                    ElementKey {
                        matrix: MatrixTag::Hamiltonian,
                        k: ki,
                        component: 0,
                    },
                );
                let est = hadamard_sample(*x, m, &mut r).unwrap();
                sum += est;
                sumsq += est * est;
            }
            let mean = sum / reps as f64;
            let var = sumsq / reps as f64 - mean * mean;
            let want_var = (1.0 - x * x) / m as f64;
            let sigma = want_var.sqrt();
            assert!(
                (mean - x).abs() < 5.0 * sigma / (reps as f64).sqrt(),
                "x={x}: mean {mean}"
            );
            assert!(
                (var - want_var).abs() < 0.10 * want_var.max(1e-12),
                "x={x}: var {var} want {want_var}"
            );
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let key = ElementKey {
            matrix: MatrixTag::Hamiltonian,
            k: 3,
            component: 5,
        };
        let a: Vec<u64> = element_rng(1, 2, key)
            .sample_iter(rand::distributions::Standard)
            .take(4)
            .collect();
        let b: Vec<u64> = element_rng(1, 2, key)
            .sample_iter(rand::distributions::Standard)
            .take(4)
            .collect();
        assert_eq!(a, b);
        let c: Vec<u64> = element_rng(1, 3, key)
            .sample_iter(rand::distributions::Standard)
            .take(4)
            .collect();
        assert_ne!(a, c);
    }

    #[test]
    fn overlap_allocation() {
        let m = kqd_shot_allocation(3, 1000, MatrixTag::Overlap).unwrap();
        assert_eq!(m, vec![0, 500, 500]);
        let zero = kqd_shot_allocation(3, 0, MatrixTag::Overlap).unwrap();
        assert_eq!(zero, vec![0, 0, 0]);
        assert!(kqd_shot_allocation(1, 10, MatrixTag::Overlap).is_err());
    }

    #[test]
    fn hamiltonian_allocation() {
        let m = kqd_shot_allocation(2, 1000, MatrixTag::Hamiltonian).unwrap();
        assert_eq!(m.iter().sum::<u64>(), 1000);
        // m0 = 1000/(√2+1) ≈ 414.2
        assert_eq!(m[0], 414);
        assert_eq!(m[1], 586);
    }

    #[test]
    fn lcu_allocation() {
        assert_eq!(
            lcu_component_allocation(&[1.0, 1.0], 10).unwrap(),
            vec![5, 5]
        );
        assert_eq!(
            lcu_component_allocation(&[3.0, -1.0], 4).unwrap(),
            vec![3, 1]
        );
        assert_eq!(
            lcu_component_allocation(&[2.0, 0.0], 7).unwrap(),
            vec![7, 0]
        );
        assert!(lcu_component_allocation(&[0.0, 0.0], 5).is_err());
    }

    #[test]
    fn msd_allocation() {
        let scheme = fd_coefficients(1, 1).unwrap();
        // k>0: 50/50 across j = ±1
        assert_eq!(
            msd_component_allocation(&scheme, 100, 1).unwrap(),
            vec![50, 0, 50]
        );
        // k=0: everything on j = +1
        assert_eq!(
            msd_component_allocation(&scheme, 100, 0).unwrap(),
            vec![0, 0, 100]
        );
        // normalization for arbitrary J
        let s3 = fd_coefficients(3, 1).unwrap();
        for k in [0usize, 2] {
            let alloc = msd_component_allocation(&s3, 12345, k).unwrap();
            assert_eq!(alloc.iter().sum::<u64>(), 12345);
            assert_eq!(alloc[3], 0); // j = 0 never sampled here
        }
        let s2q2 = fd_coefficients(2, 2).unwrap();
        assert!(msd_component_allocation(&s2q2, 10, 1).is_err());
    }

    #[test]
    fn largest_remainder_totals() {
        let mut r = rng();
        for _ in 0..50 {
            let n = r.gen_range(1..8);
            let weights: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..3.0_f64)).collect();
            let total = r.gen_range(0..10_000u64);
            let alloc = largest_remainder(&weights, total);
            if weights.iter().sum::<f64>() > 0.0 {
                assert_eq!(alloc.iter().sum::<u64>(), total);
            }
        }
    }
}
