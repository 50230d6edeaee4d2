//! Result tables, CSV bodies and JSON sidecars.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Ten significant digits, shortest form, locale-free.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let r: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    if r.abs() < 1e-6 || r.abs() >= 1e15 {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Experiment-specific metadata, e.g. solved parameter values.
    pub notes: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            notes: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => sig10(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Hex SHA-256 of the resolved configuration in canonical `key=value` form.
pub fn config_hash<'a>(entries: impl Iterator<Item = (&'a str, &'a str)>) -> String {
    let mut h = Sha256::new();
    for (k, v) in entries {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Metadata<'a> {
    pub experiment: &'a str,
    pub scale: &'a str,
    pub config: Vec<(&'a str, &'a str)>,
    pub runtime_secs: f64,
    pub seed: u64,
}

pub fn sidecar(meta: &Metadata<'_>, table: &Table) -> Value {
    let config: Map<String, Value> = meta
        .config
        .iter()
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "experiment": meta.experiment,
        "scale": meta.scale,
        "tool": "selprior",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "config_hash": config_hash(meta.config.iter().copied()),
        "seed": meta.seed,
        "runtime_secs": meta.runtime_secs,
        "created_unix": created,
        "columns": table.columns,
        "rows": table.rows.len(),
        "notes": table.notes,
    })
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`.
pub fn write_outputs(dir: &Path, stem: &str, table: &Table, meta: &Metadata<'_>) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let js = dir.join(format!("{stem}.json"));
    let body = serde_json::to_string_pretty(&sidecar(meta, table)).expect("metadata serialises");
    write_atomic(&csv, table.to_csv().as_bytes())?;
    write_atomic(&js, (body + "\n").as_bytes())?;
    Ok((csv, js))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig10(0.1100000000049), "0.11");
        assert_eq!(sig10(1.0 / 3.0), "0.3333333333");
        assert_eq!(sig10(-2.5e-12), "-2.5e-12");
        assert_eq!(sig10(1.0 / 3.0 * 1e-9), "3.333333333e-10");
        assert_eq!(sig10(123456789012.0), "123456789000");
        assert_eq!(sig10(0.0), "0");
    }

    #[test]
    fn csv_body() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![1.5.into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1.5,\"x,y\"\n");
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash([("k", "1"), ("m", "2")].into_iter());
        assert_eq!(a, config_hash([("k", "1"), ("m", "2")].into_iter()));
        assert_ne!(a, config_hash([("k", "1"), ("m", "3")].into_iter()));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn atomic_write_replaces() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("f.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 1);
    }
}
