//! Dense complex-Hermitian linear algebra helpers.
//!
//! The eigensolver maps a Hermitian matrix H = A + iB onto the real
//! symmetric block matrix [[A, -B], [B, A]], whose spectrum is that of H
//! with every eigenvalue doubled. Complex eigenvectors are recovered from
//! the doubled eigenspaces by Gram-Schmidt pair elimination: the two real
//! partners of one complex vector differ only by a global phase, so within
//! an eigenvalue group every second candidate projects to (numerically)
//! zero against the already accepted ones.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Result of a Hermitian eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Column i is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DMatrix<Complex64>,
}

pub fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..=i {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a complex Hermitian matrix.
pub fn eigh(m: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    let scale = m.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
    let dev = hermiticity_deviation(m);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }

    // Real symmetric embedding [[A, -B], [B, A]].
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            big[(i, j)] = c.re;
            big[(i + n, j + n)] = c.re;
            big[(i, j + n)] = -c.im;
            big[(i + n, j)] = c.im;
        }
    }
    let se = nalgebra::SymmetricEigen::new(big);

    // Sort ascending.
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

    let group_tol = 1e-7 * scale.max(1.0);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut group: Vec<usize> = Vec::new();
    let mut group_val = f64::NAN;

    let flush = |group: &mut Vec<usize>,
                     eigenvalues: &mut Vec<f64>,
                     vectors: &mut Vec<DVector<Complex64>>|
     -> Result<()> {
        if group.is_empty() {
            return Ok(());
        }
        let want = group.len() / 2;
        let start = vectors.len();
        for &col in group.iter() {
            if vectors.len() - start == want {
                break;
            }
            let mut v = DVector::<Complex64>::zeros(n);
            for i in 0..n {
                v[i] = Complex64::new(se.eigenvectors[(i, col)], se.eigenvectors[(i + n, col)]);
            }
            // project out accepted vectors of this group (twice, for stability)
            for _ in 0..2 {
                for u in vectors[start..].iter() {
                    let overlap: Complex64 = u.dotc(&v);
                    v.axpy(-overlap, u, Complex64::new(1.0, 0.0));
                }
            }
            let nrm = v.norm();
            if nrm > 0.3 {
                v /= Complex64::new(nrm, 0.0);
                vectors.push(v);
                eigenvalues.push(se.eigenvalues[col]);
            }
        }
        if vectors.len() - start != want {
            return Err(Error::Numerical(format!(
                "eigenvector pair extraction failed: got {} of {} in a degenerate group",
                vectors.len() - start,
                want
            )));
        }
        group.clear();
        Ok(())
    };

    for &col in &order {
        let val = se.eigenvalues[col];
        if !group.is_empty() && (val - group_val).abs() > group_tol {
            flush(&mut group, &mut eigenvalues, &mut vectors)?;
        }
        group.push(col);
        group_val = val;
    }
    flush(&mut group, &mut eigenvalues, &mut vectors)?;

    // assemble; eigenvalues recomputed as Rayleigh quotients for accuracy
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for (j, v) in vectors.iter().enumerate() {
        let hv = m * v;
        eigenvalues[j] = v.dotc(&hv).re;
        mat.set_column(j, v);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut sorted_mat = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_mat.set_column(dst, &mat.column(src));
    }

    let out = HermitianEigen {
        eigenvalues: sorted_vals,
        eigenvectors: sorted_mat,
    };
    verify_reconstruction(m, &out, scale)?;
    Ok(out)
}

fn verify_reconstruction(m: &DMatrix<Complex64>, e: &HermitianEigen, scale: f64) -> Result<()> {
    // ||V Λ V† − H||_F / ||H||_F ≤ 1e−10 and V unitary
    let n = m.nrows();
    let v = &e.eigenvectors;
    let lam = DMatrix::<Complex64>::from_diagonal(&DVector::from_iterator(
        n,
        e.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let rec = v * lam * v.adjoint();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in 0..n {
            num += (rec[(i, j)] - m[(i, j)]).norm_sqr();
            den += m[(i, j)].norm_sqr();
        }
    }
    let rel = (num / den.max(1e-300)).sqrt();
    if rel > 1e-10 && num.sqrt() > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "eigendecomposition reconstruction error {rel:.3e}"
        )));
    }
    Ok(())
}

/// Spectral norm (largest singular value) of a Hermitian matrix.
pub fn hermitian_spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    match eigh(m) {
        Ok(e) => e
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs())),
        // perturbed inputs can be slightly non-Hermitian; symmetrize
        Err(_) => {
            let sym = (m + m.adjoint()).scale(0.5);
            eigh(&sym)
                .map(|e| e.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
                .unwrap_or(f64::NAN)
        }
    }
}

/// Fill an n×n Toeplitz-Hermitian matrix from its first row.
///
/// Entry (k', k) equals `row[k-k']` for k ≥ k' and conj(row[k'-k]) below
/// the diagonal. `row[0]` must be (numerically) real for the result to be
/// Hermitian; the imaginary part of the diagonal is dropped.
pub fn toeplitz_hermitian(row: &[Complex64]) -> DMatrix<Complex64> {
    let n = row.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let diag = Complex64::new(row[0].re, 0.0);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = if i == j {
                diag
            } else if j > i {
                row[j - i]
            } else {
                row[i - j].conj()
            };
        }
    }
    m
}
