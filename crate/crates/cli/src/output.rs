//! Report files: rendered fully in memory, then written atomically.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// One output file, relative to the output directory.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: serde::Serialize>(name: &str, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self { name: name.into(), bytes })
    }

    pub fn csv(name: &str, table: Csv) -> Self {
        Self {
            name: name.into(),
            bytes: table.0.into_bytes(),
        }
    }
}

/// CSV text with fixed float formatting (17 significant digits).
pub struct Csv(String);

pub enum Cell {
    F(f64),
    I(u64),
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::F(x) => format!("{x:.16e}"),
                Cell::I(n) => n.to_string(),
            })
            .collect();
        self.0.push_str(&parts.join(","));
        self.0.push('\n');
    }
}

/// Writes every artifact through a temporary file in the target directory
/// and renames it into place, so readers never see a partial file.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    for a in artifacts {
        let path = dir.join(&a.name);
        let parent = path.parent().unwrap_or(dir);
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent)
            .with_context(|| format!("temporary file in {}", parent.display()))?;
        tmp.write_all(&a.bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path)
            .with_context(|| format!("moving report into {}", path.display()))?;
    }
    Ok(())
}
