//! Pauli strings and real-weighted Pauli sums (LCU form).
//!
//! A string is stored as a pair of bitsets (x_mask, z_mask) plus a phase in
//! {1, i, -1, -i}: the operator is phase · X^x · Z^z with qubit 0 the least
//! significant bit of the statevector index. Y on qubit k corresponds to
//! x_k = z_k = 1 with one factor of i, so a Hermitian word carries the
//! canonical phase i^{#Y}.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum qubit count for dense realization.
pub const DENSE_QUBIT_CAP: usize = 14;

/// Coefficients smaller than this are dropped at construction.
pub const COEFF_CUTOFF: f64 = 1e-12;

/// Element of the phase group {+1, +i, -1, -i}, encoded as the exponent of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn times(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn powi(n: u32) -> Phase {
        Phase((n % 4) as u8)
    }
}

/// Tensor product of single-qubit Paulis over at most 64 qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub x_mask: u64,
    pub z_mask: u64,
    pub phase: Phase,
}

impl PauliString {
    pub fn identity() -> Self {
        PauliString {
            x_mask: 0,
            z_mask: 0,
            phase: Phase::ONE,
        }
    }

    /// Hermitian word from letter masks: phase fixed to i^{#Y}.
    pub fn hermitian(x_mask: u64, z_mask: u64) -> Self {
        PauliString {
            x_mask,
            z_mask,
            phase: Phase::powi((x_mask & z_mask).count_ones()),
        }
    }

    /// Parse a letter string like "IXYZ", leftmost character = qubit 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        if s.len() > 64 {
            return Err(Error::InvalidConfig(format!(
                "pauli string too long ({} qubits)",
                s.len()
            )));
        }
        for (k, ch) in s.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => x |= 1 << k,
                'Y' => {
                    x |= 1 << k;
                    z |= 1 << k;
                }
                'Z' => z |= 1 << k,
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("invalid pauli letter '{other}'"),
                    })
                }
            }
        }
        Ok(PauliString::hermitian(x, z))
    }

    /// Letter representation over `n_qubits` qubits.
    pub fn letters(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|k| {
                let bit = 1u64 << k;
                match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                }
            })
            .collect()
    }

    pub fn is_identity_word(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Group product; the phase stays in {±1, ±i}.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let sign = (self.z_mask & other.x_mask).count_ones() % 2;
        PauliString {
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase: self
                .phase
                .times(other.phase)
                .times(Phase::powi(2 * sign)),
        }
    }

    /// Apply to a statevector without forming a matrix: O(2^{N_q}).
    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let d = v.len();
        if !d.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: d.next_power_of_two(),
                got: d,
            });
        }
        let n_qubits = d.trailing_zeros() as usize;
        let top = (self.x_mask | self.z_mask) as u128;
        if top >> n_qubits != 0 {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits.max(1),
                got: d,
            });
        }
        let ph = self.phase.value();
        let mut out = DVector::<Complex64>::zeros(d);
        for b in 0..d as u64 {
            let sign = if (self.z_mask & b).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out[(b ^ self.x_mask) as usize] = ph * sign * v[b as usize];
        }
        Ok(out)
    }

    /// ⟨u|P|v⟩ without forming P.
    pub fn matrix_element(&self, u: &DVector<Complex64>, v: &DVector<Complex64>) -> Result<Complex64> {
        let pv = self.apply(v)?;
        Ok(u.dotc(&pv))
    }
}

/// Real linear combination of Pauli words plus an identity offset (Hartree).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliLcu {
    n_qubits: usize,
    identity: f64,
    terms: Vec<(f64, PauliString)>,
}

impl PauliLcu {
    /// Build from (coefficient, word) pairs. Identity words fold into the
    /// offset, duplicates merge, canonical phases are enforced, and
    /// coefficients below [`COEFF_CUTOFF`] are dropped.
    pub fn new(
        n_qubits: usize,
        identity: f64,
        terms: impl IntoIterator<Item = (f64, PauliString)>,
    ) -> Result<Self> {
        let mut map: HashMap<(u64, u64), f64> = HashMap::new();
        let mut ident = identity;
        let mask_ok = |m: u64| n_qubits >= 64 || m >> n_qubits == 0;
        for (c, p) in terms {
            if !mask_ok(p.x_mask) || !mask_ok(p.z_mask) {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    got: 64 - p.x_mask.leading_zeros().min(p.z_mask.leading_zeros()) as usize,
                });
            }
            // fold phase relative to the canonical Hermitian word
            let canon = PauliString::hermitian(p.x_mask, p.z_mask);
            let rel = p.phase.value() / canon.phase.value();
            if rel.im.abs() > 1e-12 {
                return Err(Error::Numerical(
                    "non-Hermitian pauli term (residual imaginary phase)".into(),
                ));
            }
            let coeff = c * rel.re;
            if p.is_identity_word() {
                ident += coeff;
            } else {
                *map.entry((p.x_mask, p.z_mask)).or_insert(0.0) += coeff;
            }
        }
        let mut terms: Vec<(f64, PauliString)> = map
            .into_iter()
            .filter(|(_, c)| c.abs() >= COEFF_CUTOFF)
            .map(|((x, z), c)| (c, PauliString::hermitian(x, z)))
            .collect();
        terms.sort_by_key(|(_, p)| (p.z_mask, p.x_mask));
        Ok(PauliLcu {
            n_qubits,
            identity: ident,
            terms,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_coeff(&self) -> f64 {
        self.identity
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Σ_l |c_l|, identity excluded.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Shift the identity offset by `delta`.
    pub fn shifted_identity(&self, delta: f64) -> PauliLcu {
        PauliLcu {
            n_qubits: self.n_qubits,
            identity: self.identity + delta,
            terms: self.terms.clone(),
        }
    }

    /// Dense 2^{N_q} × 2^{N_q} Hermitian realization.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_capped(DENSE_QUBIT_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::DimensionCap {
                qubits: self.n_qubits,
                cap,
            });
        }
        let d = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for b in 0..d {
            m[(b, b)] += Complex64::new(self.identity, 0.0);
        }
        for (c, p) in &self.terms {
            let ph = p.phase.value() * *c;
            for b in 0..d as u64 {
                let sign = if (p.z_mask & b).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[((b ^ p.x_mask) as usize, b as usize)] += ph * sign;
            }
        }
        Ok(m)
    }

    /// Apply the full sum to a statevector: O(L · 2^{N_q}).
    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let d = v.len();
        if d != 1usize << self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                got: d,
            });
        }
        let mut out = v * Complex64::new(self.identity, 0.0);
        for (c, p) in &self.terms {
            let ph = p.phase.value() * *c;
            for b in 0..d as u64 {
                let sign = if (p.z_mask & b).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out[(b ^ p.x_mask) as usize] += ph * sign * v[b as usize];
            }
        }
        Ok(out)
    }

    /// Expectation ⟨v|H|v⟩ (real by Hermiticity).
    pub fn expectation(&self, v: &DVector<Complex64>) -> Result<f64> {
        Ok(v.dotc(&self.apply(v)?).re)
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LcuJsonTerm {
    coeff: f64,
    pauli: String,
}

#[derive(Serialize, Deserialize)]
struct LcuJson {
    n_qubits: usize,
    identity: f64,
    terms: Vec<LcuJsonTerm>,
}

impl PauliLcu {
    pub fn to_json(&self) -> String {
        let doc = LcuJson {
            n_qubits: self.n_qubits,
            identity: self.identity,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| LcuJsonTerm {
                    coeff: *c,
                    pauli: p.letters(self.n_qubits),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LcuJson = serde_json::from_str(text)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in &doc.terms {
            if t.pauli.len() != doc.n_qubits {
                return Err(Error::Parse {
                    line: 0,
                    message: format!(
                        "pauli '{}' has length {}, expected {}",
                        t.pauli,
                        t.pauli.len(),
                        doc.n_qubits
                    ),
                });
            }
            terms.push((t.coeff, PauliString::parse(&t.pauli)?));
        }
        PauliLcu::new(doc.n_qubits, doc.identity, terms)
    }
}
