//! CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use pii_order_core::CoupledPathSet;
use serde::Serialize;

/// `#` comment lines placed before the CSV header.
#[derive(Debug, Clone, Default)]
pub struct Header {
    pub lines: Vec<(String, String)>,
    pub timestamp: bool,
}

impl Header {
    pub fn for_paths(paths: &CoupledPathSet, timestamp: bool) -> Self {
        let mut lines = vec![
            ("method".to_string(), paths.method.clone()),
            ("seed".to_string(), paths.seed.to_string()),
            ("n_paths".to_string(), paths.n_paths.to_string()),
        ];
        match paths.truncation {
            Some(t) => {
                let eps = t.epsilon.map_or("none".to_string(), |e| e.to_string());
                lines.push(("epsilon".into(), eps));
                lines.push(("delta_pos".into(), t.delta_pos.to_string()));
                lines.push(("delta_neg".into(), t.delta_neg.to_string()));
            }
            None => lines.push(("epsilon".into(), "none".into())),
        }
        lines.push(("bias_bound".into(), paths.bias_bound.to_string()));
        Header { lines, timestamp }
    }

    fn write<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# pii-order {}", env!("CARGO_PKG_VERSION"))?;
        if self.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            writeln!(w, "# generated_unix: {secs}")?;
        }
        for (k, v) in &self.lines {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `path,t,X,Y`, one row per path and grid time.
pub fn write_paths<W: Write>(w: &mut W, paths: &CoupledPathSet, header: &Header) -> io::Result<()> {
    header.write(w)?;
    writeln!(w, "path,t,X,Y")?;
    for i in 0..paths.n_paths {
        for ((t, x), y) in paths.time_grid.iter().zip(paths.x_path(i)).zip(paths.y_path(i)) {
            writeln!(w, "{i},{t},{x},{y}")?;
        }
    }
    Ok(())
}

/// `path,tau,mark,rhoX,rhoY`; `mark` is empty for jumps without a reference mark.
pub fn write_jumps<W: Write>(w: &mut W, paths: &CoupledPathSet, header: &Header) -> io::Result<()> {
    header.write(w)?;
    writeln!(w, "path,tau,mark,rhoX,rhoY")?;
    for j in &paths.jumps {
        let mark = j.mark.map_or(String::new(), |m| m.to_string());
        writeln!(w, "{},{},{},{},{}", j.path, j.tau, mark, j.dx, j.dy)?;
    }
    Ok(())
}

/// `path,tau,y,x,u,accepted`.
pub fn write_paired<W: Write>(w: &mut W, paths: &CoupledPathSet, header: &Header) -> io::Result<()> {
    header.write(w)?;
    writeln!(w, "path,tau,y,x,u,accepted")?;
    for e in &paths.paired {
        writeln!(w, "{},{},{},{},{},{}", e.path, e.tau, e.y, e.x, e.u, u8::from(e.accepted))?;
    }
    Ok(())
}

pub fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> io::Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pii_order_core::paths::{JumpRecord, JumpSource, PathPair, SamplerInfo};

    fn set() -> CoupledPathSet {
        let info = SamplerInfo {
            method: "ito".into(),
            seed: 7,
            truncation: None,
            bias_bound: 0.0,
        };
        let p = PathPair {
            x: vec![0.0, 1.0],
            y: vec![0.0, 1.5],
            jumps: vec![JumpRecord {
                path: 0,
                tau: 0.25,
                mark: Some(0.5),
                dx: 1.0,
                dy: 1.5,
                source: JumpSource::Reference,
            }],
            paired: Vec::new(),
        };
        CoupledPathSet::assemble(info, vec![0.0, 1.0], vec![p])
    }

    #[test]
    fn paths_csv_layout() {
        let mut out = Vec::new();
        write_paths(&mut out, &set(), &Header::for_paths(&set(), false)).unwrap();
        let s = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows, ["path,t,X,Y", "0,0,0,0", "0,1,1,1.5"]);
        assert!(s.contains("# seed: 7"));
        assert!(!s.contains("generated_unix"));
    }

    #[test]
    fn jumps_csv_layout() {
        let mut out = Vec::new();
        write_jumps(&mut out, &set(), &Header::default()).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.ends_with("path,tau,mark,rhoX,rhoY\n0,0.25,0.5,1,1.5\n"));
    }
}
