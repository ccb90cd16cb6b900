use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// CSV text with a header row, `\n` line endings and shortest round-trip
/// float formatting.
pub fn csv<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [f64; N]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json serializes");
    s.push('\n');
    s
}

/// Two-column `abscissa,value` trace file.
pub fn read_trace_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read reference {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("abscissa,value") {
        return Err(CliError::Config(format!(
            "{}: expected header `abscissa,value`",
            path.display()
        )));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = || CliError::Config(format!("{}: malformed row {}", path.display(), i + 2));
            let mut cols = line.split(',');
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(bad());
            };
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok((a, b))
        })
        .collect()
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        write_atomic(&path, contents.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats() {
        let v = [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -1e-300, 2.0];
        let text = csv(["a", "b", "c", "d", "e"], [v]);
        let row: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(row, v);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(text.starts_with("a,b,c,d,e\n"));
    }

    #[test]
    fn atomic_write_and_reread() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(&dir.path().join("nested")).unwrap();
        let path = out
            .write(
                "t.csv",
                &csv(["abscissa", "value"], [[1.0, 0.5], [2.0, 0.25]]),
            )
            .unwrap();
        assert_eq!(
            read_trace_csv(&path).unwrap(),
            vec![(1.0, 0.5), (2.0, 0.25)]
        );
        out.write("t.csv", "abscissa,value\n3.0,1.0\n").unwrap();
        assert_eq!(read_trace_csv(&path).unwrap(), vec![(3.0, 1.0)]);
        let names: Vec<_> = std::fs::read_dir(dir.path().join("nested"))
            .unwrap()
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn bad_reference_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "x,y\n1,2\n").unwrap();
        assert_eq!(read_trace_csv(&p).unwrap_err().exit_code(), 2);
        std::fs::write(&p, "abscissa,value\n1,2,3\n").unwrap();
        assert_eq!(read_trace_csv(&p).unwrap_err().exit_code(), 2);
        assert_eq!(
            read_trace_csv(&dir.path().join("missing.csv"))
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn checksum_known_value() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
