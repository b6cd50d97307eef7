//! Exact spectral machinery: eigendecomposition-backed propagation,
//! symmetry-sector spectra, and the energy level shift.
//!
//! One decomposition amortizes over every time-evolution expectation the
//! samplers need. Degenerate eigenspaces are rotated to simultaneously
//! diagonalize the number and total-spin operators so every eigenvector
//! carries clean (N_e, S) labels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::pauli::PauliLcu;

/// Default cap on the dense dimension (2^12).
pub const DIMENSION_CAP: usize = 1 << 12;

const LABEL_INT_TOL: f64 = 1e-6;

/// Per-eigenvector symmetry labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorLabel {
    pub n_e: usize,
    /// ⟨S²⟩ (not S itself).
    pub s2: f64,
}

/// Eigendecomposition of a dense Hermitian Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralOracle {
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
    pub labels: Option<Vec<SectorLabel>>,
}

/// Extreme eigenvalues of one (N_e, S) symmetry sector.
#[derive(Debug, Clone, Copy)]
pub struct SectorSpectrum {
    pub n_e: usize,
    pub s: f64,
    pub e_min: f64,
    pub e_max: f64,
}

impl SectorSpectrum {
    pub fn spectral_range(&self) -> f64 {
        self.e_max - self.e_min
    }

    /// Shift that centers the sector spectrum at zero.
    pub fn center(&self) -> f64 {
        0.5 * (self.e_min + self.e_max)
    }

    /// Restricted spectral norm after applying the centering shift: ΔE/2.
    pub fn restricted_norm_after_shift(&self) -> f64 {
        0.5 * self.spectral_range()
    }
}

impl SpectralOracle {
    /// Plain eigendecomposition; no symmetry labels.
    pub fn decompose(h: &DMatrix<Complex64>) -> Result<Self> {
        Self::decompose_capped(h, DIMENSION_CAP)
    }

    pub fn decompose_capped(h: &DMatrix<Complex64>, cap: usize) -> Result<Self> {
        if h.nrows() > cap {
            return Err(Error::DimensionCap {
                qubits: h.nrows().trailing_zeros() as usize,
                cap: cap.trailing_zeros() as usize,
            });
        }
        let eig = linalg::eigh(h)?;
        Ok(SpectralOracle {
            dimension: h.nrows(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            labels: None,
        })
    }

    /// Eigendecomposition with (N_e, S²) labels for a 2·n_orb-qubit
    /// Hamiltonian that commutes with both symmetry operators.
    pub fn decompose_with_sectors(h: &DMatrix<Complex64>, n_orb: usize) -> Result<Self> {
        let mut oracle = Self::decompose(h)?;
        let n_op = crate::chem::number_operator(n_orb).to_dense()?;
        let s2_op = crate::chem::total_spin_operator(n_orb).to_dense()?;
        oracle.attach_labels(&n_op, &s2_op)?;
        Ok(oracle)
    }

    /// Rotate degenerate eigenspaces to diagonalize `n_op`, then `s2_op`,
    /// and store per-vector labels.
    pub fn attach_labels(
        &mut self,
        n_op: &DMatrix<Complex64>,
        s2_op: &DMatrix<Complex64>,
    ) -> Result<()> {
        let scale = self
            .eigenvalues
            .iter()
            .fold(1.0f64, |a, &x| a.max(x.abs()));
        self.refine_within_clusters(n_op, |vals, _| vals.to_vec(), 1e-7 * scale)?;
        // cluster key now includes the N label; refine with S² inside (E, N) blocks
        let n_labels = self.expectations(n_op);
        self.refine_within_clusters_keyed(s2_op, &n_labels, 1e-7 * scale)?;
        let n_vals = self.expectations(n_op);
        let s2_vals = self.expectations(s2_op);
        let mut labels = Vec::with_capacity(self.dimension);
        for (nv, s2v) in n_vals.iter().zip(s2_vals.iter()) {
            let rounded = nv.round();
            if (nv - rounded).abs() > LABEL_INT_TOL || rounded < 0.0 {
                return Err(Error::Numerical(format!(
                    "electron-number label {nv} not integral"
                )));
            }
            labels.push(SectorLabel {
                n_e: rounded as usize,
                s2: *s2v,
            });
        }
        self.labels = Some(labels);
        Ok(())
    }

    fn expectations(&self, op: &DMatrix<Complex64>) -> Vec<f64> {
        (0..self.dimension)
            .map(|j| {
                let v = self.eigenvectors.column(j);
                let ov = op * v;
                v.dotc(&ov).re
            })
            .collect()
    }

    fn refine_within_clusters<F>(
        &mut self,
        op: &DMatrix<Complex64>,
        _key: F,
        tol: f64,
    ) -> Result<()>
    where
        F: Fn(&[f64], usize) -> Vec<f64>,
    {
        let keys: Vec<f64> = vec![0.0; self.dimension];
        self.refine_impl(op, &keys, tol)
    }

    fn refine_within_clusters_keyed(
        &mut self,
        op: &DMatrix<Complex64>,
        extra_key: &[f64],
        tol: f64,
    ) -> Result<()> {
        self.refine_impl(op, extra_key, tol)
    }

    fn refine_impl(&mut self, op: &DMatrix<Complex64>, extra_key: &[f64], tol: f64) -> Result<()> {
        let n = self.dimension;
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n
                && (self.eigenvalues[end] - self.eigenvalues[end - 1]).abs() <= tol
                && (extra_key[end] - extra_key[start]).abs() <= 0.5
            {
                end += 1;
            }
            let m = end - start;
            if m > 1 {
                // diagonalize op restricted to the cluster
                let block = self.eigenvectors.columns(start, m);
                let sub = block.adjoint() * op * block;
                let sub_eig: HermitianEigen = linalg::eigh(&sub)?;
                let rotated = block * &sub_eig.eigenvectors;
                for (offset, col) in (start..end).enumerate() {
                    self.eigenvectors.set_column(col, &rotated.column(offset));
                }
            }
            start = end;
        }
        Ok(())
    }

    /// Expansion weights |⟨v_i|state⟩|² of a normalized state.
    pub fn weights(&self, state: &DVector<Complex64>) -> Result<Vec<f64>> {
        if state.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: state.len(),
            });
        }
        Ok((0..self.dimension)
            .map(|j| self.eigenvectors.column(j).dotc(state).norm_sqr())
            .collect())
    }

    /// Apply e^{-iHt}: V e^{-iΛt} V† state.
    pub fn propagate(&self, t: f64, state: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if state.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: state.len(),
            });
        }
        let mut coeffs = self.eigenvectors.adjoint() * state;
        for (c, &e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        Ok(&self.eigenvectors * coeffs)
    }

    /// Shift every eigenvalue by `-shift` (the operator H - shift·1).
    pub fn shifted(&self, shift: f64) -> SpectralOracle {
        let mut out = self.clone();
        for e in out.eigenvalues.iter_mut() {
            *e -= shift;
        }
        out
    }

    /// Extreme eigenvalues among vectors labeled (n_e, S), ties inclusive.
    pub fn sector_spectrum(&self, n_e: usize, s: f64) -> Result<SectorSpectrum> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("oracle carries no sector labels".into()))?;
        let s2_target = s * (s + 1.0);
        let mut e_min = f64::INFINITY;
        let mut e_max = f64::NEG_INFINITY;
        for (j, lbl) in labels.iter().enumerate() {
            if lbl.n_e == n_e && (lbl.s2 - s2_target).abs() <= 100.0 * LABEL_INT_TOL {
                e_min = e_min.min(self.eigenvalues[j]);
                e_max = e_max.max(self.eigenvalues[j]);
            }
        }
        if !e_min.is_finite() {
            return Err(Error::EmptySector { n_e, s });
        }
        Ok(SectorSpectrum {
            n_e,
            s,
            e_min,
            e_max,
        })
    }
}

/// Record of an applied energy shift so final estimates can be unshifted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyShift {
    pub shift: f64,
}

impl EnergyShift {
    pub fn unshift(&self, shifted_energy: f64) -> f64 {
        shifted_energy + self.shift
    }
}

/// Center a Hamiltonian's sector spectrum at zero: subtracts
/// (e_min + e_max)/2 from the identity coefficient.
pub fn energy_shift(h: &PauliLcu, e_min: f64, e_max: f64) -> Result<(PauliLcu, EnergyShift)> {
    if e_min > e_max {
        return Err(Error::InvalidConfig(format!(
            "e_min {e_min} exceeds e_max {e_max}"
        )));
    }
    let shift = 0.5 * (e_min + e_max);
    Ok((h.shifted_identity(-shift), EnergyShift { shift }))
}

/// Relative error of a shift computed from approximate sector extremes:
/// |(min' + max') − (min + max)| / |min' + max'|.
pub fn shift_error(
    approx_min: f64,
    approx_max: f64,
    exact_min: f64,
    exact_max: f64,
) -> Result<f64> {
    let denom = approx_min + approx_max;
    if denom.abs() < 1e-300 {
        return Err(Error::ZeroDenominator {
            context: "shift error (approximate extremes sum to zero)",
        });
    }
    Ok(((approx_min + approx_max) - (exact_min + exact_max)).abs() / denom.abs())
}
