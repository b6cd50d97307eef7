//! Central finite-difference schemes of arbitrary derivative order.
//!
//! Coefficients are the q-th derivatives at z = 0 of the Lagrange basis
//! polynomials on the integer nodes -J..J, computed in exact rational
//! arithmetic and converted to f64 afterwards. Float Vandermonde solves
//! lose the moment-condition cancellations beyond J ≈ 8.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Hard cap on the stencil degree.
pub const MAX_DEGREE: usize = 16;

/// Degree-J central scheme for the q-th derivative on nodes -J..J.
#[derive(Debug, Clone)]
pub struct FdScheme {
    pub degree: usize,
    pub deriv_order: usize,
    /// coeffs[J + j] is the weight of the node j, for j = -J..J.
    pub coeffs: Vec<f64>,
    rational: Vec<BigRational>,
}

impl FdScheme {
    pub fn coeff(&self, j: i64) -> f64 {
        self.coeffs[(self.degree as i64 + j) as usize]
    }

    pub fn coeff_rational(&self, j: i64) -> &BigRational {
        &self.rational[(self.degree as i64 + j) as usize]
    }

    pub fn nodes(&self) -> impl Iterator<Item = i64> {
        let j = self.degree as i64;
        -j..=j
    }

    /// Σ_j |a_j|.
    pub fn coeff_one_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Taylor remainder exponent s = q - 1 + 2(J + 1 - floor((q+1)/2)).
    pub fn remainder_order(&self) -> usize {
        let (j, q) = (self.degree, self.deriv_order);
        q - 1 + 2 * (j + 1 - (q + 1) / 2)
    }

    /// Exact moment sum Σ_j a_j j^p / p! (equals δ_{pq} for p ≤ s).
    pub fn moment_rational(&self, p: usize) -> BigRational {
        let mut acc = BigRational::zero();
        for j in self.nodes() {
            let jp = BigRational::from_integer(BigInt::from(j)).pow(p as i32);
            acc += self.coeff_rational(j) * jp;
        }
        acc / BigRational::from_integer(factorial_big(p))
    }

    /// Float-space moment sum Σ_j a_j j^p / p!.
    pub fn moment(&self, p: usize) -> f64 {
        let mut acc = 0.0;
        for j in self.nodes() {
            acc += self.coeff(j) * (j as f64).powi(p as i32);
        }
        acc / factorial(p)
    }

    /// Apply the scheme to scalar samples f(j·step): estimates f^{(q)}(0).
    pub fn differentiate<F: Fn(f64) -> f64>(&self, f: F, step: f64) -> f64 {
        let mut acc = 0.0;
        for j in self.nodes() {
            acc += self.coeff(j) * f(j as f64 * step);
        }
        acc / step.powi(self.deriv_order as i32)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

fn factorial_big(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Central finite-difference coefficients for the q-th derivative.
pub fn fd_coefficients(degree: usize, deriv_order: usize) -> Result<FdScheme> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::InvalidConfig(format!(
            "stencil degree {degree} outside 1..={MAX_DEGREE}"
        )));
    }
    if deriv_order == 0 || deriv_order > 2 * degree {
        return Err(Error::InvalidConfig(format!(
            "derivative order {deriv_order} outside 1..={}",
            2 * degree
        )));
    }

    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), FdScheme>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(degree, deriv_order)) {
        return Ok(hit.clone());
    }

    let j_max = degree as i64;
    let q = deriv_order;
    let mut rational = Vec::with_capacity(2 * degree + 1);
    for j in -j_max..=j_max {
        // numerator polynomial Π_{r≠j} (z - r), poly[k] = coefficient of z^k
        let mut poly: Vec<BigInt> = vec![BigInt::one()];
        let mut denom = BigInt::one();
        for r in -j_max..=j_max {
            if r == j {
                continue;
            }
            denom *= BigInt::from(j - r);
            let mut next = vec![BigInt::zero(); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * BigInt::from(r);
            }
            poly = next;
        }
        // q-th derivative at 0 = q! · poly[q]
        let value = if q < poly.len() {
            BigRational::new(factorial_big(q) * &poly[q], denom)
        } else {
            BigRational::zero()
        };
        rational.push(value);
    }
    let coeffs = rational
        .iter()
        .map(|r| r.to_f64().expect("fd coefficient fits f64"))
        .collect();
    let scheme = FdScheme {
        degree,
        deriv_order,
        coeffs,
        rational,
    };
    cache
        .lock()
        .unwrap()
        .insert((degree, deriv_order), scheme.clone());
    Ok(scheme)
}

/// Closed-form first-derivative coefficients
/// (1-δ_{j0}) (-1)^{j-1}/j · (J!)²/((J-|j|)!(J+|j|)!).
pub fn first_derivative_closed_form(degree: usize, j: i64) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let jf = degree as f64;
    let sign = if (j - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut ratio = 1.0; // (J!)²/((J-|j|)!(J+|j|)!) = Π_{k=1..|j|} (J-k+1)/(J+k)
    for k in 1..=j.unsigned_abs() {
        ratio *= (jf - k as f64 + 1.0) / (jf + k as f64);
    }
    sign / j as f64 * ratio
}

/// The pair (α_{n,J}, β_{n,J}) controlling the sampling and truncation
/// sides of the matrix-perturbation bound:
/// α = 2n√(2 ln 2n)·‖a‖₁,  β = n/(2J+1)! · Σ_j |a_j j^{2J+1}|.
pub fn bound_constants(n: usize, degree: usize) -> Result<(f64, f64)> {
    let scheme = fd_coefficients(degree, 1)?;
    let nf = n as f64;
    let alpha = 2.0 * nf * (2.0 * (2.0 * nf).ln()).sqrt() * scheme.coeff_one_norm();
    let mut sum = 0.0;
    for j in scheme.nodes() {
        sum += (scheme.coeff(j) * (j as f64).powi(2 * degree as i32 + 1)).abs();
    }
    let beta = nf * sum / factorial(2 * degree + 1);
    Ok((alpha, beta))
}

/// Scalar per-element truncation bound from the Lagrange remainder:
/// Σ_j |a_j j^{s+1}| · h_norm^{s+1}/(s+1)! · δt^{s-q+1}.
pub fn fd_error_bound(degree: usize, deriv_order: usize, delta_t: f64, h_norm: f64) -> Result<f64> {
    let scheme = fd_coefficients(degree, deriv_order)?;
    let s = scheme.remainder_order();
    let mut sum = 0.0;
    for j in scheme.nodes() {
        sum += (scheme.coeff(j) * (j as f64).powi(s as i32 + 1)).abs();
    }
    Ok(sum * h_norm.powi(s as i32 + 1) / factorial(s + 1)
        * delta_t.powi((s + 1 - deriv_order) as i32))
}
