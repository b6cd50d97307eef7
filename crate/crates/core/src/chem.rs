//! Electron-integral ingestion and the fermion-to-qubit map.
//!
//! FCIDUMP files carry the one- and two-electron integrals in chemists'
//! ordering (pq|rs) with 1-based indices and 8-fold index symmetry. The
//! qubit Hamiltonian uses spin-blocked ordering: qubits 0..n_orb-1 hold
//! the spin-up orbitals and n_orb..2n_orb-1 the spin-down ones, with the
//! occupation of spin-orbital k on qubit k (a|0⟩ = 0, a†|0⟩ = |1⟩).

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliLcu, PauliString, Phase};

pub const H_SYMMETRY_TOL: f64 = 1e-10;

/// One- and two-electron integrals of a molecular Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectronIntegrals {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Scalar offset (nuclear repulsion + frozen core), Hartree.
    pub core_energy: f64,
    h1: Vec<f64>,
    g2: Vec<f64>,
}

impl ElectronIntegrals {
    pub fn zeros(n_orb: usize, n_alpha: usize, n_beta: usize) -> Self {
        ElectronIntegrals {
            n_orb,
            n_alpha,
            n_beta,
            core_energy: 0.0,
            h1: vec![0.0; n_orb * n_orb],
            g2: vec![0.0; n_orb.pow(4)],
        }
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_orb + q]
    }

    /// Chemists' two-electron integral (pq|rs).
    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.g2[((p * n + q) * n + r) * n + s]
    }

    /// Set h_pq and its transpose image.
    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orb;
        self.h1[p * n + q] = value;
        self.h1[q * n + p] = value;
    }

    /// Set (pq|rs) and all 8 symmetry images.
    pub fn set_g(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let n = self.n_orb;
        let mut put = |a: usize, b: usize, c: usize, d: usize| {
            self.g2[((a * n + b) * n + c) * n + d] = value;
        };
        put(p, q, r, s);
        put(q, p, r, s);
        put(p, q, s, r);
        put(q, p, s, r);
        put(r, s, p, q);
        put(s, r, p, q);
        put(r, s, q, p);
        put(s, r, q, p);
    }

    /// Raw setters for transformed tensors that are already symmetric.
    pub(crate) fn set_h_raw(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orb;
        self.h1[p * n + q] = value;
    }

    pub(crate) fn set_g_raw(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let n = self.n_orb;
        self.g2[((p * n + q) * n + r) * n + s] = value;
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_orb
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    /// Verify h symmetry and the core 8-fold g symmetry within tolerance.
    pub fn check_symmetries(&self) -> Result<()> {
        let n = self.n_orb;
        for p in 0..n {
            for q in 0..p {
                if (self.h(p, q) - self.h(q, p)).abs() > H_SYMMETRY_TOL {
                    return Err(Error::Numerical(format!("h[{p},{q}] breaks index symmetry")));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g(p, q, r, s);
                        for w in [self.g(q, p, r, s), self.g(p, q, s, r), self.g(r, s, p, q)] {
                            if (v - w).abs() > H_SYMMETRY_TOL {
                                return Err(Error::Numerical(format!(
                                    "g[{p},{q},{r},{s}] breaks 8-fold symmetry"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Computational-basis index of the Hartree-Fock determinant: the first
    /// n_alpha spin-up and n_beta spin-down orbitals occupied.
    pub fn hartree_fock_index(&self) -> usize {
        let up = (1usize << self.n_alpha) - 1;
        let down = ((1usize << self.n_beta) - 1) << self.n_orb;
        up | down
    }
}

// ---------------------------------------------------------------------------
// FCIDUMP
// ---------------------------------------------------------------------------

/// Parse an FCIDUMP byte stream.
///
/// Records are `value i j k l` with 1-based indices: (i j|k l) two-electron
/// integrals, `value i j 0 0` one-electron, `value 0 0 0 0` the scalar core
/// term. Symmetry images are filled in on every assignment.
pub fn parse_fcidump(text: &str) -> Result<ElectronIntegrals> {
    let mut in_header = true;
    let mut header_buf = String::new();
    let mut ints: Option<ElectronIntegrals> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if in_header {
            header_buf.push(' ');
            header_buf.push_str(line);
            let upper = line.to_ascii_uppercase();
            if upper.contains("&END") || upper.contains('/') {
                let all = header_buf.to_ascii_uppercase();
                let n = read_namelist_uint(&all, "NORB").ok_or(Error::Parse {
                    line: lineno,
                    message: "missing NORB in namelist header".into(),
                })?;
                let ne = read_namelist_uint(&all, "NELEC").ok_or(Error::Parse {
                    line: lineno,
                    message: "missing NELEC in namelist header".into(),
                })?;
                let ms2 = read_namelist_int(&all, "MS2").unwrap_or(0);
                let na = (ne as i64 + ms2) / 2;
                let nb = ne as i64 - na;
                if na < 0 || nb < 0 || na as usize > n || nb as usize > n {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("inconsistent NELEC={ne}, MS2={ms2}"),
                    });
                }
                ints = Some(ElectronIntegrals::zeros(n, na as usize, nb as usize));
                in_header = false;
            }
            continue;
        }

        let mut fields = line.split_whitespace();
        let value: f64 = fields
            .next()
            .unwrap()
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::Parse {
                line: lineno,
                message: format!("non-numeric integral value in '{line}'"),
            })?;
        let mut idx = [0i64; 4];
        for slot in idx.iter_mut() {
            *slot = match fields.next() {
                Some(tok) => tok.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("non-integer orbital index in '{line}'"),
                })?,
                None => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "record needs four orbital indices".into(),
                    })
                }
            };
        }
        let ints = ints.as_mut().unwrap();
        let n = ints.n_orb as i64;
        for &i in idx.iter() {
            if i < 0 || i > n {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("orbital index {i} out of range 0..={n}"),
                });
            }
        }
        let [i, j, k, l] = idx;
        if i == 0 && j == 0 && k == 0 && l == 0 {
            ints.core_energy = value;
        } else if i > 0 && j > 0 && k == 0 && l == 0 {
            ints.set_h(i as usize - 1, j as usize - 1, value);
        } else if i > 0 && j > 0 && k > 0 && l > 0 {
            ints.set_g(
                i as usize - 1,
                j as usize - 1,
                k as usize - 1,
                l as usize - 1,
                value,
            );
        } else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("malformed index pattern ({i} {j} {k} {l})"),
            });
        }
    }

    let ints = ints.ok_or(Error::Parse {
        line: 0,
        message: "no namelist header found".into(),
    })?;
    ints.check_symmetries()?;
    Ok(ints)
}

fn read_namelist_uint(header: &str, key: &str) -> Option<usize> {
    read_namelist_int(header, key).and_then(|v| usize::try_from(v).ok())
}

fn read_namelist_int(header: &str, key: &str) -> Option<i64> {
    let pos = header.find(key)?;
    let rest = header[pos + key.len()..].trim_start().strip_prefix('=')?;
    let rest = rest.trim_start();
    let end = rest
        .find(|c: char| !(c.is_ascii_digit() || c == '-' || c == '+'))
        .unwrap_or(rest.len());
    rest[..end].parse().ok()
}

/// Emit FCIDUMP text (unique symmetry representatives only).
pub fn emit_fcidump(ints: &ElectronIntegrals) -> String {
    let n = ints.n_orb;
    let mut out = String::new();
    let ms2 = ints.n_alpha as i64 - ints.n_beta as i64;
    writeln!(out, "&FCI NORB={n},NELEC={},MS2={ms2},", ints.n_electrons()).unwrap();
    write!(out, "  ORBSYM=").unwrap();
    for _ in 0..n {
        write!(out, "1,").unwrap();
    }
    writeln!(out, "\n  ISYM=1,\n&END").unwrap();
    let mut seen = std::collections::HashSet::new();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let key = canon8(p, q, r, s);
                    if !seen.insert(key) {
                        continue;
                    }
                    let v = ints.g(p, q, r, s);
                    if v.abs() > 1e-14 {
                        writeln!(
                            out,
                            " {:23.16E} {:4} {:4} {:4} {:4}",
                            v,
                            p + 1,
                            q + 1,
                            r + 1,
                            s + 1
                        )
                        .unwrap();
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h(p, q);
            if v.abs() > 1e-14 {
                writeln!(out, " {:23.16E} {:4} {:4}    0    0", v, p + 1, q + 1).unwrap();
            }
        }
    }
    writeln!(out, " {:23.16E}    0    0    0    0", ints.core_energy).unwrap();
    out
}

fn canon8(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let a = if p >= q { (p, q) } else { (q, p) };
    let b = if r >= s { (r, s) } else { (s, r) };
    if a >= b {
        (a.0, a.1, b.0, b.1)
    } else {
        (b.0, b.1, a.0, a.1)
    }
}

// ---------------------------------------------------------------------------
// Jordan-Wigner
// ---------------------------------------------------------------------------

/// Accumulator for products of ladder operators expanded into Pauli words
/// with complex scratch coefficients.
pub(crate) struct PauliAccumulator {
    n_qubits: usize,
    map: HashMap<(u64, u64), Complex64>,
}

impl PauliAccumulator {
    pub(crate) fn new(n_qubits: usize) -> Self {
        PauliAccumulator {
            n_qubits,
            map: HashMap::new(),
        }
    }

    /// Add coeff · op₁·op₂·…, operators composing right-to-left; each op is
    /// (spin-orbital index, is_creation).
    pub(crate) fn add_ladder_product(&mut self, coeff: f64, ops: &[(usize, bool)]) {
        // a = Z_{<k}·(X + iY)/2 expands to ½·Z-string·X − ½·Z-string·XZ
        // (the XZ word absorbs Y's internal i); creation flips the XZ sign.
        let mut terms: Vec<(Complex64, PauliString)> =
            vec![(Complex64::new(coeff, 0.0), PauliString::identity())];
        for &(idx, dagger) in ops {
            let zstr = (1u64 << idx) - 1;
            let xbit = 1u64 << idx;
            let comp = [
                (
                    Complex64::new(0.5, 0.0),
                    PauliString {
                        x_mask: xbit,
                        z_mask: zstr,
                        phase: Phase::ONE,
                    },
                ),
                (
                    Complex64::new(if dagger { 0.5 } else { -0.5 }, 0.0),
                    PauliString {
                        x_mask: xbit,
                        z_mask: zstr | xbit,
                        phase: Phase::ONE,
                    },
                ),
            ];
            let mut next = Vec::with_capacity(terms.len() * 2);
            for (c, p) in &terms {
                for (cc, pp) in &comp {
                    next.push((c * cc, p.mul(pp)));
                }
            }
            terms = next;
        }
        for (c, p) in terms {
            *self
                .map
                .entry((p.x_mask, p.z_mask))
                .or_insert(Complex64::new(0.0, 0.0)) += c * p.phase.value();
        }
    }

    pub(crate) fn finalize(self, core: f64) -> Result<PauliLcu> {
        let mut identity = core;
        let mut terms = Vec::new();
        for ((x, z), c) in self.map {
            let canon = PauliString::hermitian(x, z);
            let folded = c / canon.phase.value();
            if folded.im.abs() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "non-Hermitian qubit term (imag {:.3e})",
                    folded.im
                )));
            }
            if x == 0 && z == 0 {
                identity += folded.re;
            } else {
                terms.push((folded.re, canon));
            }
        }
        PauliLcu::new(self.n_qubits, identity, terms)
    }
}

/// Map the electronic Hamiltonian to a spin-blocked qubit operator:
/// H = Σ_pqσ h_pq a†_pσ a_qσ + ½ Σ_pqrs Σ_στ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ + core.
pub fn jordan_wigner(ints: &ElectronIntegrals) -> Result<PauliLcu> {
    let n = ints.n_orb;
    let mut acc = PauliAccumulator::new(2 * n);
    for p in 0..n {
        for q in 0..n {
            let hpq = ints.h(p, q);
            if hpq == 0.0 {
                continue;
            }
            for spin in [0, n] {
                acc.add_ladder_product(hpq, &[(p + spin, true), (q + spin, false)]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = 0.5 * ints.g(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sp in [0, n] {
                        for tp in [0, n] {
                            acc.add_ladder_product(
                                v,
                                &[
                                    (p + sp, true),
                                    (r + tp, true),
                                    (s + tp, false),
                                    (q + sp, false),
                                ],
                            );
                        }
                    }
                }
            }
        }
    }
    acc.finalize(ints.core_energy)
}

/// Pauli 1-norm evaluated directly from the integrals:
/// Σ_pq |h_pq + Σ_r (pq|rr) − ½ Σ_r (pr|rq)|
/// + ½ Σ_{p>r, s>q} |(pq|rs) − (ps|rq)| + ¼ Σ_pqrs |(pq|rs)|.
pub fn integral_one_norm(ints: &ElectronIntegrals) -> f64 {
    let n = ints.n_orb;
    let mut t1 = 0.0;
    for p in 0..n {
        for q in 0..n {
            let mut v = ints.h(p, q);
            for r in 0..n {
                v += ints.g(p, q, r, r) - 0.5 * ints.g(p, r, r, q);
            }
            t1 += v.abs();
        }
    }
    let mut t2 = 0.0;
    for p in 0..n {
        for r in 0..p {
            for s in 0..n {
                for q in 0..s {
                    t2 += (ints.g(p, q, r, s) - ints.g(p, s, r, q)).abs();
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
                    t3 += ints.g(p, q, r, s).abs();
                }
            }
        }
    }
    t3 *= 0.25;
    t1 + t2 + t3
}

// ---------------------------------------------------------------------------
// Symmetry operators
// ---------------------------------------------------------------------------

/// Total electron number N̂ = Σ_pσ n̂_pσ as a qubit operator.
pub fn number_operator(n_orb: usize) -> PauliLcu {
    let nq = 2 * n_orb;
    let mut terms = Vec::with_capacity(nq);
    for k in 0..nq {
        terms.push((-0.5, PauliString::hermitian(0, 1u64 << k)));
    }
    PauliLcu::new(nq, n_orb as f64, terms).expect("number operator")
}

/// Total spin squared Ŝ² = Ŝ₋Ŝ₊ + Ŝ_z(Ŝ_z + 1) as a qubit operator.
pub fn total_spin_operator(n_orb: usize) -> PauliLcu {
    let mut acc = PauliAccumulator::new(2 * n_orb);
    // S₋S₊ = Σ_pq a†_{qβ} a_{qα} a†_{pα} a_{pβ}
    for p in 0..n_orb {
        for q in 0..n_orb {
            acc.add_ladder_product(
                1.0,
                &[(q + n_orb, true), (q, false), (p, true), (p + n_orb, false)],
            );
        }
    }
    // Sz² with Sz = ½ Σ_p (n_pα − n_pβ)
    for p in 0..n_orb {
        for q in 0..n_orb {
            for (i, si) in [(p, 0.25), (p + n_orb, -0.25)] {
                for (j, sj) in [(q, 1.0), (q + n_orb, -1.0)] {
                    acc.add_ladder_product(si * sj, &[(i, true), (i, false), (j, true), (j, false)]);
                }
            }
        }
    }
    // + Sz
    for p in 0..n_orb {
        acc.add_ladder_product(0.5, &[(p, true), (p, false)]);
        acc.add_ladder_product(-0.5, &[(p + n_orb, true), (p + n_orb, false)]);
    }
    acc.finalize(0.0).expect("spin operator")
}


#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::rngs::StdRng;
    use rand::Rng;

    pub(crate) fn random_integrals(n_orb: usize, rng: &mut StdRng) -> ElectronIntegrals {
        let mut ints = ElectronIntegrals::zeros(n_orb, 1, 1);
        ints.core_energy = rng.gen_range(-1.0..1.0);
        for p in 0..n_orb {
            for q in 0..=p {
                ints.set_h(p, q, rng.gen_range(-1.0..1.0));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for p in 0..n_orb {
            for q in 0..n_orb {
                for r in 0..n_orb {
                    for s in 0..n_orb {
                        if seen.insert(super::canon8(p, q, r, s)) {
                            ints.set_g(p, q, r, s, rng.gen_range(-0.5..0.5));
                        }
                    }
                }
            }
        }
        ints
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use nalgebra::DVector;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    use super::testutil::random_integrals;

    #[test]
    fn parse_minimal_core_only() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 0.5 0 0 0 0\n";
        let ints = parse_fcidump(text).unwrap();
        assert_eq!(ints.n_orb, 2);
        assert_eq!(ints.core_energy, 0.5);
        assert!(ints.h(0, 0) == 0.0 && ints.g(1, 1, 1, 1) == 0.0);
    }

    #[test]
    fn parse_single_h_record_fills_symmetry() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 0.5 1 1 0 0\n 0.25 2 1 0 0\n";
        let ints = parse_fcidump(text).unwrap();
        assert_eq!(ints.h(0, 0), 0.5);
        assert_eq!(ints.h(1, 0), 0.25);
        assert_eq!(ints.h(0, 1), 0.25);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n abc 1 1 0 0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 1.0 5 1 0 0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse_fcidump("no header at all\n").is_err());
    }

    #[test]
    fn fcidump_round_trip() {
        let mut rng = StdRng::seed_from_u64(23);
        let ints = random_integrals(3, &mut rng);
        let back = parse_fcidump(&emit_fcidump(&ints)).unwrap();
        assert_eq!(back.n_orb, 3);
        for p in 0..3 {
            for q in 0..3 {
                assert!((back.h(p, q) - ints.h(p, q)).abs() < 1e-13);
                for r in 0..3 {
                    for s in 0..3 {
                        assert!((back.g(p, q, r, s) - ints.g(p, q, r, s)).abs() < 1e-13);
                    }
                }
            }
        }
        assert!((back.core_energy - ints.core_energy).abs() < 1e-13);
    }

    #[test]
    fn jw_zero_integrals_is_identity() {
        let mut ints = ElectronIntegrals::zeros(2, 1, 1);
        ints.core_energy = -1.25;
        let h = jordan_wigner(&ints).unwrap();
        assert_eq!(h.n_terms(), 0);
        assert_eq!(h.identity_coeff(), -1.25);
    }

    #[test]
    fn jw_single_orbital_number_operator() {
        // h00 = ε maps to ε(1 − Z_k)/2 per spin on two qubits
        let eps = 0.7;
        let mut ints = ElectronIntegrals::zeros(1, 1, 0);
        ints.set_h(0, 0, eps);
        let h = jordan_wigner(&ints).unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert!((h.identity_coeff() - eps).abs() < 1e-12);
        assert_eq!(h.n_terms(), 2);
        for (c, p) in h.terms() {
            assert!(p.x_mask == 0 && (p.z_mask == 1 || p.z_mask == 2));
            assert!((c + eps / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integral_one_norm_matches_jw() {
        let mut rng = StdRng::seed_from_u64(71);
        for trial in 0..50u64 {
            let n_orb = 1 + (trial as usize % 3);
            let ints = random_integrals(n_orb, &mut rng);
            let direct = integral_one_norm(&ints);
            let via_jw = jordan_wigner(&ints).unwrap().one_norm();
            assert!(
                (direct - via_jw).abs() < 1e-8 * direct.max(1.0),
                "n_orb={n_orb}: {direct} vs {via_jw}"
            );
        }
    }

    #[test]
    fn number_operator_eigenvalues() {
        let nop = number_operator(2);
        let d = 1usize << 4;
        let dense = nop.to_dense().unwrap();
        for b in 0..d {
            let expect = (b as u64).count_ones() as f64;
            assert!((dense[(b, b)].re - expect).abs() < 1e-12);
        }
        assert!((dense[(0, 0)].re - 0.0).abs() < 1e-12);
        assert!((dense[(d - 1, d - 1)].re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn spin_operator_on_singlet_and_triplet() {
        // two spatial orbitals, singlet (a†_{0α}a†_{1β} − a†_{0β}a†_{1α})|vac⟩/√2.
        // Writing the determinants as qubit basis states picks up one JW
        // ordering phase, so in amplitudes the singlet is the + combination.
        let s2 = total_spin_operator(2).to_dense().unwrap();
        let d = 16;
        let up0_down1 = (1usize << 0) | (1usize << 3);
        let down0_up1 = (1usize << 2) | (1usize << 1);
        let mut singlet = DVector::<Complex64>::zeros(d);
        singlet[up0_down1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        singlet[down0_up1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let exp = singlet.dotc(&(&s2 * &singlet)).re;
        assert!(exp.abs() < 1e-10, "singlet S² = {exp}");

        let mut triplet = DVector::<Complex64>::zeros(d);
        triplet[up0_down1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        triplet[down0_up1] = Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let exp = triplet.dotc(&(&s2 * &triplet)).re;
        assert!((exp - 2.0).abs() < 1e-10, "triplet S² = {exp}");
    }

    #[test]
    fn hamiltonian_commutes_with_symmetries() {
        let mut rng = StdRng::seed_from_u64(5);
        let ints = random_integrals(2, &mut rng);
        let h = jordan_wigner(&ints).unwrap().to_dense().unwrap();
        let nop = number_operator(2).to_dense().unwrap();
        let s2 = total_spin_operator(2).to_dense().unwrap();
        let comm_n = (&h * &nop - &nop * &h).norm();
        let comm_s = (&h * &s2 - &s2 * &h).norm();
        assert!(comm_n < 1e-8, "[H, N] = {comm_n}");
        assert!(comm_s < 1e-8, "[H, S²] = {comm_s}");
        assert!(linalg::hermiticity_deviation(&h) < 1e-12);
    }
}
