//! Atomic CSV/JSON emission with a versioned schema header.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub const SCHEMA_HEADER: &str = concat!(
    "# mirror-krylov v",
    env!("CARGO_PKG_VERSION"),
    " schema=1"
);

/// Write bytes to `path` atomically (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        ))
        .to_path_buf(),
    };
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Build a CSV document: schema header comment, column row, data rows.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(SCHEMA_HEADER);
        buf.push('\n');
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Shortest-round-trip float formatting (deterministic across runs).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
