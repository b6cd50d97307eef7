//! Integral-level 1-norm reduction: orbital rotations, number-sector
//! shifts (fixed-particle-number symmetry shift), and the Hartree-Fock
//! level estimate of the sector spectral range.
//!
//! The 1-norm cost carries absolute values, so its gradient is a
//! subgradient with kinks; the optimizer runs a multi-restart adaptive
//! subgradient descent followed by a pattern-search polish, which is what
//! actually pays off near the kinks. A smoothing option |x| → √(x²+ε²) is
//! available for stubborn cases.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

use crate::chem::{integral_one_norm, ElectronIntegrals};
use crate::error::{Error, Result};
use crate::linalg;

// ---------------------------------------------------------------------------
// Orbital rotations
// ---------------------------------------------------------------------------

/// Antisymmetric generator K packed as the strict upper triangle, row-major:
/// K[i][j] = params[idx], K[j][i] = -params[idx] for i < j; U = exp(-K).
#[derive(Debug, Clone)]
pub struct OrbitalRotation {
    pub n_orb: usize,
    pub params: Vec<f64>,
}

impl OrbitalRotation {
    pub fn identity(n_orb: usize) -> Self {
        OrbitalRotation {
            n_orb,
            params: vec![0.0; n_orb * (n_orb - 1) / 2],
        }
    }

    pub fn from_params(n_orb: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != n_orb * (n_orb - 1) / 2 {
            return Err(Error::InvalidConfig(format!(
                "rotation needs {} parameters, got {}",
                n_orb * (n_orb - 1) / 2,
                params.len()
            )));
        }
        Ok(OrbitalRotation { n_orb, params })
    }

    pub fn k_matrix(&self) -> DMatrix<f64> {
        let n = self.n_orb;
        let mut k = DMatrix::<f64>::zeros(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                k[(i, j)] = self.params[idx];
                k[(j, i)] = -self.params[idx];
                idx += 1;
            }
        }
        k
    }

    /// U = exp(-K) through the eigendecomposition of the Hermitian iK, so
    /// the result is orthogonal to machine precision.
    pub fn u_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n_orb;
        let k = self.k_matrix();
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = Complex64::new(0.0, k[(i, j)]); // iK, Hermitian
            }
        }
        let eig = linalg::eigh(&a)?;
        // exp(-K) = exp(i·(iK)) = V e^{iΛ} V†
        let mut u = DMatrix::<Complex64>::zeros(n, n);
        for (col, &lam) in eig.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, lam);
            let v = eig.eigenvectors.column(col);
            for i in 0..n {
                for j in 0..n {
                    u[(i, j)] += phase * v[i] * v[j].conj();
                }
            }
        }
        let mut out = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if u[(i, j)].im.abs() > 1e-9 {
                    return Err(Error::Numerical(
                        "orbital rotation came out non-real".into(),
                    ));
                }
                out[(i, j)] = u[(i, j)].re;
            }
        }
        Ok(out)
    }
}

/// Congruence-transform the integrals by U = exp(-K):
/// h̃_pq = Σ_ij U_ip h_ij U_jq, g̃_pqrs = Σ U_ip U_jq (ij|kl) U_kr U_ls.
pub fn rotate_integrals(ints: &ElectronIntegrals, rot: &OrbitalRotation) -> Result<ElectronIntegrals> {
    if rot.n_orb != ints.n_orb {
        return Err(Error::DimensionMismatch {
            expected: ints.n_orb,
            got: rot.n_orb,
        });
    }
    let n = ints.n_orb;
    let u = rot.u_matrix()?;
    let mut out = ElectronIntegrals::zeros(n, ints.n_alpha, ints.n_beta);
    out.core_energy = ints.core_energy;

    for p in 0..n {
        for q in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += u[(i, p)] * ints.h(i, j) * u[(j, q)];
                }
            }
            out.set_h_raw(p, q, acc);
        }
    }

    // four quarter-transforms, one index at a time
    let mut t = vec![0.0; n * n * n * n];
    let at = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    for p in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += u[(i, p)] * ints.g(i, j, k, l);
                    }
                    t[at(p, j, k, l)] = acc;
                }
            }
        }
    }
    let mut t2 = vec![0.0; n * n * n * n];
    for p in 0..n {
        for q in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += u[(j, q)] * t[at(p, j, k, l)];
                    }
                    t2[at(p, q, k, l)] = acc;
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += u[(k, r)] * t2[at(p, q, k, l)];
                    }
                    t[at(p, q, r, l)] = acc;
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += u[(l, s)] * t[at(p, q, r, l)];
                    }
                    out.set_g_raw(p, q, r, s, acc);
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Generic optimizer
// ---------------------------------------------------------------------------

/// Multi-restart subgradient descent plus pattern-search polish.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub init_step: f64,
    pub min_step: f64,
    pub restart_spread: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 8,
            max_iters: 400,
            init_step: 0.3,
            min_step: 1e-8,
            restart_spread: 0.6,
            seed: 2024,
        }
    }
}

/// Minimize a possibly kinked cost; returns (argmin, min). The descent uses
/// the supplied gradient when given, finite differences otherwise, and a
/// compass polish with shrinking steps either way.
pub fn minimize(
    cost: &dyn Fn(&[f64]) -> f64,
    gradient: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
    n_params: usize,
    cfg: &OptimizerConfig,
) -> (Vec<f64>, f64) {
    if n_params == 0 {
        return (Vec::new(), cost(&[]));
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut best_x = vec![0.0; n_params];
    let mut best_f = cost(&best_x);

    for restart in 0..cfg.restarts.max(1) {
        let mut x: Vec<f64> = if restart == 0 {
            vec![0.0; n_params]
        } else {
            (0..n_params)
                .map(|_| rng.gen_range(-cfg.restart_spread..cfg.restart_spread))
                .collect()
        };
        let mut fx = cost(&x);

        // descent phase
        let mut step = cfg.init_step;
        for _ in 0..cfg.max_iters {
            if step < cfg.min_step {
                break;
            }
            let g = match gradient {
                Some(g) => g(&x),
                None => fd_gradient(cost, &x, 1e-6),
            };
            let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-14 {
                break;
            }
            let trial: Vec<f64> = x
                .iter()
                .zip(g.iter())
                .map(|(xi, gi)| xi - step * gi / norm)
                .collect();
            let ft = cost(&trial);
            if ft < fx {
                x = trial;
                fx = ft;
                step *= 1.3;
            } else {
                step *= 0.5;
            }
        }

        // compass polish (handles the kinks the descent stalls on)
        let mut step = (cfg.init_step * 0.1).max(cfg.min_step * 10.0);
        while step >= cfg.min_step {
            let mut improved = false;
            for i in 0..n_params {
                for sign in [1.0, -1.0] {
                    let mut trial = x.clone();
                    trial[i] += sign * step;
                    let ft = cost(&trial);
                    if ft < fx - 1e-15 {
                        x = trial;
                        fx = ft;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }

        if fx < best_f {
            best_f = fx;
            best_x = x;
        }
    }
    (best_x, best_f)
}

fn fd_gradient(cost: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = cost(&xp);
        xp[i] = x[i] - h;
        let fm = cost(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

fn smooth_abs(x: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        x.abs()
    } else {
        (x * x + eps * eps).sqrt()
    }
}

/// 1-norm with optional smoothing of the absolute values.
pub fn one_norm_smoothed(ints: &ElectronIntegrals, eps: f64) -> f64 {
    if eps <= 0.0 {
        return integral_one_norm(ints);
    }
    let n = ints.n_orb;
    let mut t1 = 0.0;
    for p in 0..n {
        for q in 0..n {
            let mut v = ints.h(p, q);
            for r in 0..n {
                v += ints.g(p, q, r, r) - 0.5 * ints.g(p, r, r, q);
            }
            t1 += smooth_abs(v, eps);
        }
    }
    let mut t2 = 0.0;
    for p in 0..n {
        for r in 0..p {
            for s in 0..n {
                for q in 0..s {
                    t2 += smooth_abs(ints.g(p, q, r, s) - ints.g(p, s, r, q), eps);
                }
            }
        }
    }
    t2 *= 0.5;
    let mut t3 = 0.0;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    t3 += smooth_abs(ints.g(p, q, r, s), eps);
                }
            }
        }
    }
    t1 + t2 + 0.25 * t3
}

/// Minimize the 1-norm over orbital rotations. Returns the rotation and
/// the reduced value; never worse than the identity.
pub fn minimize_one_norm_orbital(
    ints: &ElectronIntegrals,
    cfg: &OptimizerConfig,
    smoothing: f64,
) -> Result<(OrbitalRotation, f64)> {
    let n = ints.n_orb;
    let n_params = n * (n - 1) / 2;
    let baseline = integral_one_norm(ints);
    let cost = |params: &[f64]| -> f64 {
        let rot = OrbitalRotation {
            n_orb: n,
            params: params.to_vec(),
        };
        match rotate_integrals(ints, &rot) {
            Ok(r) => one_norm_smoothed(&r, smoothing),
            Err(_) => f64::INFINITY,
        }
    };
    let (params, _) = minimize(&cost, None, n_params, cfg);
    let rot = OrbitalRotation { n_orb: n, params };
    let exact = integral_one_norm(&rotate_integrals(ints, &rot)?);
    if exact <= baseline {
        Ok((rot, exact))
    } else {
        Ok((OrbitalRotation::identity(n), baseline))
    }
}

// ---------------------------------------------------------------------------
// Number-sector shift
// ---------------------------------------------------------------------------

/// Parameters of the fixed-particle-number shift operator
/// T(μ, ξ) = μ₁(N̂-N_e) + μ₂(N̂²-N_e²) + Σ_pq ξ_pq F̂_pq (N̂-N_e).
#[derive(Debug, Clone, PartialEq)]
pub struct BlissParams {
    pub mu1: f64,
    pub mu2: f64,
    /// Symmetric ξ packed as the upper triangle including the diagonal,
    /// row-major: (0,0), (0,1), ..., (0,n-1), (1,1), ...
    pub xi: Vec<f64>,
    pub n_electrons: usize,
}

impl BlissParams {
    pub fn zeros(n_orb: usize, n_electrons: usize) -> Self {
        BlissParams {
            mu1: 0.0,
            mu2: 0.0,
            xi: vec![0.0; n_orb * (n_orb + 1) / 2],
            n_electrons,
        }
    }

    pub fn n_params(n_orb: usize) -> usize {
        2 + n_orb * (n_orb + 1) / 2
    }

    pub fn from_flat(n_orb: usize, n_electrons: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != Self::n_params(n_orb) {
            return Err(Error::InvalidConfig(format!(
                "shift needs {} parameters, got {}",
                Self::n_params(n_orb),
                flat.len()
            )));
        }
        Ok(BlissParams {
            mu1: flat[0],
            mu2: flat[1],
            xi: flat[2..].to_vec(),
            n_electrons,
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![self.mu1, self.mu2];
        out.extend_from_slice(&self.xi);
        out
    }

    pub fn xi_at(&self, n_orb: usize, p: usize, q: usize) -> f64 {
        let (a, b) = if p <= q { (p, q) } else { (q, p) };
        self.xi[a * n_orb - a * (a + 1) / 2 + b]
    }
}

/// Apply the shifted-integral formulas; the constant μ₁N_e + μ₂N_e² is
/// returned so sector energies can be reconstructed.
pub fn bliss_shift(
    ints: &ElectronIntegrals,
    params: &BlissParams,
) -> Result<(ElectronIntegrals, f64)> {
    let n = ints.n_orb;
    let ne = params.n_electrons as f64;
    let mut out = ElectronIntegrals::zeros(n, ints.n_alpha, ints.n_beta);
    let constant = params.mu1 * ne + params.mu2 * ne * ne;
    out.core_energy = ints.core_energy + constant;
    for p in 0..n {
        for q in 0..n {
            let delta = if p == q { 1.0 } else { 0.0 };
            out.set_h_raw(
                p,
                q,
                ints.h(p, q) - (params.mu1 + params.mu2) * delta
                    + (ne - 1.0) * params.xi_at(n, p, q),
            );
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let dpq = if p == q { 1.0 } else { 0.0 };
                    let drs = if r == s { 1.0 } else { 0.0 };
                    out.set_g_raw(
                        p,
                        q,
                        r,
                        s,
                        ints.g(p, q, r, s) - 2.0 * params.mu2 * dpq * drs
                            - (params.xi_at(n, p, q) * drs + dpq * params.xi_at(n, r, s)),
                    );
                }
            }
        }
    }
    out.check_symmetries()?;
    Ok((out, constant))
}

/// Cost λ(μ, ξ) on the shifted integrals plus its exact subgradient, one
/// entry per flat parameter (μ₁, μ₂, ξ upper triangle). At kinks the sign
/// convention sgn(0) = 0 applies.
pub fn bliss_cost_and_gradient(
    ints: &ElectronIntegrals,
    params: &BlissParams,
) -> Result<(f64, Vec<f64>)> {
    let n = ints.n_orb;
    let (shifted, _) = bliss_shift(ints, params)?;
    let cost = integral_one_norm(&shifted);
    let ne = params.n_electrons as f64;

    // sign tensors of the three cost pieces
    let mut sgn_a = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            let mut v = shifted.h(p, q);
            for r in 0..n {
                v += shifted.g(p, q, r, r) - 0.5 * shifted.g(p, r, r, q);
            }
            sgn_a[p * n + q] = sgn(v);
        }
    }

    let mut grad = vec![0.0; BlissParams::n_params(n)];

    // dA_pq/dμ₁ = -δ_pq ; dA_pq/dμ₂ = -2n δ_pq
    for p in 0..n {
        grad[0] -= sgn_a[p * n + p];
        grad[1] -= 2.0 * n as f64 * sgn_a[p * n + p];
    }
    // pair-difference piece, μ₂: only (q=r, s=p) survives inside the domain
    for p in 0..n {
        for r in 0..p {
            grad[1] += sgn(shifted.g(p, r, r, p) - shifted.g(p, p, r, r));
        }
    }
    // plain |g| piece, μ₂
    for p in 0..n {
        for r in 0..n {
            grad[1] -= 0.5 * sgn(shifted.g(p, p, r, r));
        }
    }

    // ξ_ab entries
    let mut flat_idx = 2;
    for a in 0..n {
        for b in a..n {
            let s_ab = |p: usize, q: usize| -> f64 {
                if a == b {
                    if p == a && q == a {
                        1.0
                    } else {
                        0.0
                    }
                } else if (p == a && q == b) || (p == b && q == a) {
                    1.0
                } else {
                    0.0
                }
            };
            let trace_s = if a == b { 1.0 } else { 0.0 };
            let mut g_val = 0.0;
            // Σ_pq sgnA_pq dA_pq, with dA_pq = (N_e - n)S_pq - δ_pq tr S
            for p in 0..n {
                for q in 0..n {
                    let da = (ne - n as f64) * s_ab(p, q)
                        - if p == q { trace_s } else { 0.0 };
                    if da != 0.0 {
                        g_val += sgn_a[p * n + q] * da;
                    }
                }
            }
            // ½ Σ_{p>r, s>q} sgn(D_pqrs)·dD, dg̃_pqrs = -(S_pq δ_rs + δ_pq S_rs)
            let dg = |p: usize, q: usize, r: usize, s: usize| -> f64 {
                let drs = if r == s { 1.0 } else { 0.0 };
                let dpq = if p == q { 1.0 } else { 0.0 };
                -(s_ab(p, q) * drs + dpq * s_ab(r, s))
            };
            for p in 0..n {
                for r in 0..p {
                    for s in 0..n {
                        for q in 0..s {
                            let d = shifted.g(p, q, r, s) - shifted.g(p, s, r, q);
                            let dd = dg(p, q, r, s) - dg(p, s, r, q);
                            if dd != 0.0 {
                                g_val += 0.5 * sgn(d) * dd;
                            }
                        }
                    }
                }
            }
            // ¼ Σ sgn(g̃)·dg̃
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for s in 0..n {
                            let dd = dg(p, q, r, s);
                            if dd != 0.0 {
                                g_val += 0.25 * sgn(shifted.g(p, q, r, s)) * dd;
                            }
                        }
                    }
                }
            }
            grad[flat_idx] = g_val;
            flat_idx += 1;
        }
    }
    Ok((cost, grad))
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Minimize λ over shift parameters with the analytic subgradient.
pub fn minimize_bliss(
    ints: &ElectronIntegrals,
    n_electrons: usize,
    cfg: &OptimizerConfig,
) -> Result<(BlissParams, f64)> {
    let n = ints.n_orb;
    let baseline = integral_one_norm(ints);
    let cost = |flat: &[f64]| -> f64 {
        let params = BlissParams::from_flat(n, n_electrons, flat).expect("sized");
        match bliss_shift(ints, &params) {
            Ok((shifted, _)) => integral_one_norm(&shifted),
            Err(_) => f64::INFINITY,
        }
    };
    let grad = |flat: &[f64]| -> Vec<f64> {
        let params = BlissParams::from_flat(n, n_electrons, flat).expect("sized");
        bliss_cost_and_gradient(ints, &params)
            .map(|(_, g)| g)
            .unwrap_or_else(|_| vec![0.0; flat.len()])
    };
    let (flat, value) = minimize(&cost, Some(&grad), BlissParams::n_params(n), cfg);
    if value <= baseline {
        Ok((BlissParams::from_flat(n, n_electrons, &flat)?, value))
    } else {
        Ok((BlissParams::zeros(n, n_electrons), baseline))
    }
}

// ---------------------------------------------------------------------------
// Hartree-Fock level spectral range
// ---------------------------------------------------------------------------

/// Mean-field energy of the determinant occupying the first n_alpha /
/// n_beta rotated orbitals (core energy included).
pub fn hf_energy(ints: &ElectronIntegrals, n_alpha: usize, n_beta: usize) -> f64 {
    let mut e = ints.core_energy;
    for p in 0..n_alpha {
        e += ints.h(p, p);
    }
    for p in 0..n_beta {
        e += ints.h(p, p);
    }
    for p in 0..n_alpha {
        for q in 0..n_alpha {
            e += 0.5 * (ints.g(p, p, q, q) - ints.g(p, q, q, p));
        }
    }
    for p in 0..n_beta {
        for q in 0..n_beta {
            e += 0.5 * (ints.g(p, p, q, q) - ints.g(p, q, q, p));
        }
    }
    for p in 0..n_alpha {
        for q in 0..n_beta {
            e += ints.g(p, p, q, q);
        }
    }
    e
}

/// Result of the mean-field spectral-range estimate.
#[derive(Debug, Clone, Copy)]
pub struct HfSpectralRange {
    pub e_min: f64,
    pub e_max: f64,
}

impl HfSpectralRange {
    pub fn range(&self) -> f64 {
        self.e_max - self.e_min
    }
}

/// Estimate the sector extremes by optimizing the mean-field energy over
/// orbital rotations; the maximum comes from negating the integrals. The
/// results sit inside the exact sector interval (variational from both
/// ends).
pub fn hf_spectral_range(
    ints: &ElectronIntegrals,
    n_alpha: usize,
    n_beta: usize,
    cfg: &OptimizerConfig,
) -> Result<HfSpectralRange> {
    if n_alpha > ints.n_orb || n_beta > ints.n_orb {
        return Err(Error::InvalidConfig(
            "electron counts exceed the orbital count".into(),
        ));
    }
    let n = ints.n_orb;
    let n_params = n * (n - 1) / 2;

    let make_cost = |negate: bool| {
        let ints = ints.clone();
        move |params: &[f64]| -> f64 {
            let rot = OrbitalRotation {
                n_orb: n,
                params: params.to_vec(),
            };
            match rotate_integrals(&ints, &rot) {
                Ok(mut r) => {
                    if negate {
                        negate_integrals(&mut r);
                    }
                    hf_energy(&r, n_alpha, n_beta)
                }
                Err(_) => f64::INFINITY,
            }
        }
    };

    let min_cost = make_cost(false);
    let (_, e_min) = minimize(&|p: &[f64]| min_cost(p), None, n_params, cfg);
    let max_cost = make_cost(true);
    let (_, neg_max) = minimize(&|p: &[f64]| max_cost(p), None, n_params, cfg);
    // Ē was built from negated electronic integrals with the core untouched:
    // Ē = -E_elec + core, so E_max = -Ē + 2·core
    let e_max = -neg_max + 2.0 * ints.core_energy;
    Ok(HfSpectralRange { e_min, e_max })
}

fn negate_integrals(ints: &mut ElectronIntegrals) {
    let n = ints.n_orb;
    for p in 0..n {
        for q in 0..n {
            let v = ints.h(p, q);
            ints.set_h_raw(p, q, -v);
            for r in 0..n {
                for s in 0..n {
                    let w = ints.g(p, q, r, s);
                    ints.set_g_raw(p, q, r, s, -w);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{jordan_wigner, testutil::random_integrals};
    use crate::spectral::SpectralOracle;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn identity_rotation_is_identity() {
        let mut rng = StdRng::seed_from_u64(2);
        let ints = random_integrals(3, &mut rng);
        let rot = OrbitalRotation::identity(3);
        let out = rotate_integrals(&ints, &rot).unwrap();
        assert_eq!(out, ints);
    }

    #[test]
    fn rotation_is_orthogonal_and_matches_basis_change_oracle() {
        let mut rng = StdRng::seed_from_u64(4);
        let ints = random_integrals(2, &mut rng);
        let rot = OrbitalRotation::from_params(2, vec![0.37]).unwrap();
        let u = rot.u_matrix().unwrap();
        let gram = &u * u.transpose();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - want).abs() < 1e-12);
            }
        }
        // explicit 2x2 rotation oracle: U = [[c, s], [-s, c]] for K = [[0, k], [-k, 0]]
        let (c, s) = (0.37f64.cos(), 0.37f64.sin());
        let u_oracle = DMatrix::<f64>::from_row_slice(2, 2, &[c, -s, s, c]);
        // exp(-K) with K upper = +k gives cos/sin pattern; compare |entries|
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (u[(i, j)].abs() - u_oracle[(i, j)].abs()).abs() < 1e-12,
                    "u = {u}"
                );
            }
        }
        let rotated = rotate_integrals(&ints, &rot).unwrap();
        // oracle: transform h by explicit matrix congruence
        let mut h = DMatrix::<f64>::zeros(2, 2);
        for p in 0..2 {
            for q in 0..2 {
                h[(p, q)] = ints.h(p, q);
            }
        }
        let want = u.transpose() * h * &u;
        for p in 0..2 {
            for q in 0..2 {
                assert!((rotated.h(p, q) - want[(p, q)]).abs() < 1e-12);
            }
        }
        rotated.check_symmetries().unwrap();
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let mut rng = StdRng::seed_from_u64(6);
        let ints = random_integrals(2, &mut rng);
        let rot = OrbitalRotation::from_params(2, vec![-0.8]).unwrap();
        let rotated = rotate_integrals(&ints, &rot).unwrap();
        let e1 = SpectralOracle::decompose(&jordan_wigner(&ints).unwrap().to_dense().unwrap())
            .unwrap()
            .eigenvalues;
        let e2 = SpectralOracle::decompose(&jordan_wigner(&rotated).unwrap().to_dense().unwrap())
            .unwrap()
            .eigenvalues;
        for (a, b) in e1.iter().zip(e2.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn orbital_descent_never_increases() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..3 {
            let ints = random_integrals(2, &mut rng);
            let baseline = integral_one_norm(&ints);
            let cfg = OptimizerConfig {
                restarts: 3,
                max_iters: 120,
                ..Default::default()
            };
            let (_, reduced) = minimize_one_norm_orbital(&ints, &cfg, 0.0).unwrap();
            assert!(reduced <= baseline + 1e-12);
        }
    }

    #[test]
    fn bliss_zero_params_is_identity() {
        let mut rng = StdRng::seed_from_u64(10);
        let ints = random_integrals(3, &mut rng);
        let params = BlissParams::zeros(3, 2);
        let (shifted, constant) = bliss_shift(&ints, &params).unwrap();
        assert_eq!(constant, 0.0);
        assert_eq!(shifted, ints);
        let (cost, _) = bliss_cost_and_gradient(&ints, &params).unwrap();
        assert!((cost - integral_one_norm(&ints)).abs() < 1e-14);
    }

    #[test]
    fn bliss_mu2_only_formula() {
        let mut rng = StdRng::seed_from_u64(12);
        let ints = random_integrals(2, &mut rng);
        let mut params = BlissParams::zeros(2, 2);
        params.mu2 = 0.3;
        let (shifted, constant) = bliss_shift(&ints, &params).unwrap();
        assert!((constant - 0.3 * 4.0).abs() < 1e-14);
        for p in 0..2 {
            for q in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        let dpq = if p == q { 1.0 } else { 0.0 };
                        let drs = if r == s { 1.0 } else { 0.0 };
                        let want = ints.g(p, q, r, s) - 2.0 * 0.3 * dpq * drs;
                        assert!((shifted.g(p, q, r, s) - want).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn bliss_preserves_target_sector() {
        let mut rng = StdRng::seed_from_u64(14);
        let ints = random_integrals(2, &mut rng);
        let mut params = BlissParams::zeros(2, 2);
        params.mu1 = 0.4;
        params.mu2 = -0.2;
        params.xi = vec![0.15, -0.3, 0.05];
        let (shifted, _) = bliss_shift(&ints, &params).unwrap();
        let h0 = jordan_wigner(&ints).unwrap().to_dense().unwrap();
        let h1 = jordan_wigner(&shifted).unwrap().to_dense().unwrap();
        let o0 = SpectralOracle::decompose_with_sectors(&h0, 2).unwrap();
        let o1 = SpectralOracle::decompose_with_sectors(&h1, 2).unwrap();
        let sector = |o: &SpectralOracle| -> Vec<f64> {
            o.labels
                .as_ref()
                .unwrap()
                .iter()
                .enumerate()
                .filter(|(_, l)| l.n_e == 2)
                .map(|(i, _)| o.eigenvalues[i])
                .collect()
        };
        let s0 = sector(&o0);
        let s1 = sector(&o1);
        assert_eq!(s0.len(), s1.len());
        for (a, b) in s0.iter().zip(s1.iter()) {
            assert!((a - b).abs() < 1e-8, "sector moved: {a} vs {b}");
        }
    }

    #[test]
    fn bliss_gradient_matches_finite_difference() {
        let mut rng = StdRng::seed_from_u64(16);
        let ints = random_integrals(2, &mut rng);
        // evaluate away from params = 0 to dodge the |0| kinks
        let flat0 = vec![0.11, -0.07, 0.05, 0.21, -0.13];
        let params = BlissParams::from_flat(2, 2, &flat0).unwrap();
        let (_, grad) = bliss_cost_and_gradient(&ints, &params).unwrap();
        let cost = |flat: &[f64]| {
            let p = BlissParams::from_flat(2, 2, flat).unwrap();
            integral_one_norm(&bliss_shift(&ints, &p).unwrap().0)
        };
        let h = 1e-6;
        for i in 0..flat0.len() {
            let mut xp = flat0.clone();
            xp[i] += h;
            let fp = cost(&xp);
            xp[i] = flat0[i] - h;
            let fm = cost(&xp);
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() < 1e-4,
                "param {i}: analytic {} vs fd {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn bliss_mu1_gradient_all_positive_diagonal() {
        // positive diagonal h and zero g: dλ/dμ₁ = -n_orb at zero params
        let mut ints = ElectronIntegrals::zeros(3, 1, 1);
        for p in 0..3 {
            ints.set_h(p, p, 1.0 + p as f64);
        }
        let params = BlissParams::zeros(3, 2);
        let (_, grad) = bliss_cost_and_gradient(&ints, &params).unwrap();
        assert!((grad[0] + 3.0).abs() < 1e-14);
    }

    #[test]
    fn bliss_descent_never_increases_and_keeps_sector() {
        let mut rng = StdRng::seed_from_u64(18);
        let ints = random_integrals(2, &mut rng);
        let baseline = integral_one_norm(&ints);
        let cfg = OptimizerConfig {
            restarts: 3,
            max_iters: 150,
            ..Default::default()
        };
        let (params, reduced) = minimize_bliss(&ints, 2, &cfg).unwrap();
        assert!(reduced <= baseline + 1e-12);
        let (shifted, _) = bliss_shift(&ints, &params).unwrap();
        let h0 = jordan_wigner(&ints).unwrap().to_dense().unwrap();
        let h1 = jordan_wigner(&shifted).unwrap().to_dense().unwrap();
        let o0 = SpectralOracle::decompose_with_sectors(&h0, 2).unwrap();
        let o1 = SpectralOracle::decompose_with_sectors(&h1, 2).unwrap();
        let s0 = o0.sector_spectrum(2, 0.0).unwrap();
        let s1 = o1.sector_spectrum(2, 0.0).unwrap();
        assert!((s0.e_min - s1.e_min).abs() < 1e-8);
        assert!((s0.e_max - s1.e_max).abs() < 1e-8);
    }

    #[test]
    fn hf_energy_at_identity_is_standard_expression() {
        let mut rng = StdRng::seed_from_u64(20);
        let ints = random_integrals(2, &mut rng);
        // closed shell, one doubly occupied orbital: E = core + 2h00 + (00|00)
        let want = ints.core_energy + 2.0 * ints.h(0, 0) + ints.g(0, 0, 0, 0);
        assert!((hf_energy(&ints, 1, 1) - want).abs() < 1e-14);
    }

    #[test]
    fn hf_range_sits_inside_exact_sector() {
        let mut rng = StdRng::seed_from_u64(22);
        let ints = random_integrals(2, &mut rng);
        let cfg = OptimizerConfig {
            restarts: 4,
            max_iters: 150,
            ..Default::default()
        };
        let hf = hf_spectral_range(&ints, 1, 1, &cfg).unwrap();
        let h = jordan_wigner(&ints).unwrap().to_dense().unwrap();
        let o = SpectralOracle::decompose_with_sectors(&h, 2).unwrap();
        let exact = o.sector_spectrum(2, 0.0).unwrap();
        assert!(hf.e_min >= exact.e_min - 1e-8, "{} < {}", hf.e_min, exact.e_min);
        assert!(hf.e_max <= exact.e_max + 1e-8, "{} > {}", hf.e_max, exact.e_max);
        assert!(hf.range() <= exact.spectral_range() + 1e-8);
    }
}
