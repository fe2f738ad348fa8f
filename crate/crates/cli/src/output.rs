//! CSV grids, CSV tables and JSON reports, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use phasecat::states::{Axis, WignerGrid};
use serde::Serialize;

/// Embedded in every artifact; bump on any format change.
pub const SCHEMA_VERSION: &str = "phasecat/1";

/// `printf("%.12e")` formatting: two-digit signed exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", e.abs())
}

fn axis_spec(name: &str, a: &Axis) -> String {
    format!("{name}={},{},{}", sci(a.min), sci(a.max), a.count)
}

/// Writes `bytes` to a sibling temporary file, syncs it, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Two header lines, then one row per `p` index with one column per `q` index.
pub fn grid_csv(grid: &WignerGrid, state: &str) -> String {
    let (qa, pa) = (&grid.axes[0], &grid.axes[1]);
    let mut out = String::with_capacity(grid.values.len() * 20 + 256);
    out.push_str(&format!(
        "# schema={SCHEMA_VERSION} kind=wigner_grid library={} hbar={} state={state}\n",
        phasecat::VERSION,
        sci(grid.hbar)
    ));
    out.push_str(&format!(
        "# {} {} rows=p columns=q\n",
        axis_spec("q", qa),
        axis_spec("p", pa)
    ));
    for j in 0..pa.count {
        let row: Vec<String> = (0..qa.count)
            .map(|i| sci(grid.values[i + qa.count * j]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// A numeric table: metadata line, column-name line, then `%.12e` rows.
pub fn table_csv(kind: &str, meta: &str, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!(
        "# schema={SCHEMA_VERSION} kind={kind} library={} {meta}\n{}\n",
        phasecat::VERSION,
        columns.join(",")
    );
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| sci(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, T: Serialize> {
    schema: &'a str,
    library_version: &'a str,
    command: &'a str,
    seed: u64,
    config: &'a C,
    result: &'a T,
}

pub fn report_json<C: Serialize, T: Serialize>(
    command: &str,
    seed: u64,
    config: &C,
    result: &T,
) -> Result<String> {
    let env = Envelope {
        schema: SCHEMA_VERSION,
        library_version: phasecat::VERSION,
        command,
        seed,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// Collects written paths under one output directory.
pub struct Sink {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(1234.5), "1.234500000000e+03");
        assert_eq!(sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(sci(1e-300), "1.000000000000e-300");
    }

    #[test]
    fn grid_layout() {
        let grid = WignerGrid {
            axes: vec![
                Axis::new(0.0, 1.0, 3).unwrap(),
                Axis::new(-1.0, 1.0, 2).unwrap(),
            ],
            values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            hbar: 1.0,
            description: String::new(),
        };
        let text = grid_csv(&grid, "test");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("# schema=phasecat/1"));
        assert!(lines[1].contains("q=0.000000000000e+00,1.000000000000e+00,3"));
        assert_eq!(lines[2].split(',').count(), 3);
        assert!(lines[3].starts_with("4.000000000000e+00"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
