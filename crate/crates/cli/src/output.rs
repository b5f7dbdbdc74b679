use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use nonlocal_core::io::Table;

/// Collects output files and writes each one atomically.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &target).with_context(|| format!("renaming into {}", target.display()))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> anyhow::Result<()> {
        self.write_bytes(name, table.to_csv_string().as_bytes())
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }
}

/// `key = value` lines in insertion order.
#[derive(Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write_bytes("a.csv", b"x\n1\n").unwrap();
        out.write_bytes("a.csv", b"x\n2\n").unwrap();
        assert_eq!(out.files(), ["a.csv"]);
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
        assert_eq!(fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n2\n");
    }

    #[test]
    fn manifest_lines() {
        let mut m = Manifest::default();
        m.set("command", "solve");
        m.set("seed", 7);
        assert_eq!(m.render(), "command = solve\nseed = 7\n");
    }
}
