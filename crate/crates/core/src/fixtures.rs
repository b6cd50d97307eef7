//! Checked-in molecular fixtures (FCIDUMP + sidecar metadata).
//!
//! The fixture directory is resolved from `MIRROR_KRYLOV_FIXTURES` if set,
//! otherwise by walking up from the current directory (and from the crate
//! manifest during development) looking for `fixtures/`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chem::{parse_fcidump, ElectronIntegrals};
use crate::error::{Error, Result};

pub const ENV_FIXTURE_DIR: &str = "MIRROR_KRYLOV_FIXTURES";

/// Sidecar provenance metadata for a fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureMeta {
    pub name: String,
    pub basis: String,
    pub geometry: String,
    pub units: String,
    pub n_orbitals: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub generator: String,
    pub reference: FixtureReference,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureReference {
    pub hf_energy: f64,
    pub fci_singlet_ground: f64,
    pub fci_singlet_max: f64,
    pub singlet_spectral_range: f64,
    pub pauli_one_norm: f64,
    #[serde(default)]
    pub hf_level_min: Option<f64>,
    #[serde(default)]
    pub hf_level_max: Option<f64>,
    #[serde(default)]
    pub hf_level_range: Option<f64>,
    #[serde(default)]
    pub shift_error: Option<f64>,
}

/// Normalize user spellings like "h2-sto3g" to the file stem "h2_sto3g".
pub fn canonical_name(name: &str) -> String {
    name.to_ascii_lowercase().replace('-', "_")
}

pub fn fixture_dir() -> Result<PathBuf> {
    if let Ok(dir) = std::env::var(ENV_FIXTURE_DIR) {
        let p = PathBuf::from(dir);
        if p.is_dir() {
            return Ok(p);
        }
        return Err(Error::InvalidConfig(format!(
            "{ENV_FIXTURE_DIR} points to missing directory {}",
            p.display()
        )));
    }
    let mut candidates: Vec<PathBuf> = Vec::new();
    if let Ok(cwd) = std::env::current_dir() {
        let mut dir = cwd.as_path();
        loop {
            candidates.push(dir.join("fixtures"));
            match dir.parent() {
                Some(parent) => dir = parent,
                None => break,
            }
        }
    }
    candidates.push(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../..")
            .join("fixtures"),
    );
    for c in candidates {
        if c.join("h2_sto3g.fcidump").is_file() {
            return Ok(c);
        }
    }
    Err(Error::InvalidConfig(
        "fixture directory not found; set MIRROR_KRYLOV_FIXTURES".into(),
    ))
}

pub fn available() -> Result<Vec<String>> {
    let dir = fixture_dir()?;
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().map(|e| e == "fcidump").unwrap_or(false) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

/// Load a fixture by name, e.g. "h2_sto3g" or "h2-sto3g".
pub fn load(name: &str) -> Result<(ElectronIntegrals, FixtureMeta)> {
    let stem = canonical_name(name);
    let dir = fixture_dir()?;
    let dump_path = dir.join(format!("{stem}.fcidump"));
    let meta_path = dir.join(format!("{stem}.json"));
    if !dump_path.is_file() {
        return Err(Error::InvalidConfig(format!(
            "unknown fixture '{name}' (no {})",
            dump_path.display()
        )));
    }
    let text = std::fs::read_to_string(&dump_path)?;
    let ints = parse_fcidump(&text)?;
    let meta: FixtureMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
    Ok((ints, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_all_fixtures() {
        for name in ["h2_sto3g", "h2-631g", "lih_sto3g"] {
            let (ints, meta) = load(name).unwrap();
            assert_eq!(ints.n_orb, meta.n_orbitals);
            assert_eq!(ints.n_alpha, meta.n_alpha);
            assert!(ints.core_energy > 0.0); // nuclear repulsion
        }
    }
}
