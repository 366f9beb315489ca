//! Artifact writers. Every JSON report carries run-dependent values (wall
//! time, version) only under `metadata`, so two runs with the same config
//! produce identical files apart from that object.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use parsearch::{PolicyField, ScalarField};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const FIELD_CSV: &str = "field.csv";
pub const POLICY_CSV: &str = "policy.csv";
pub const BOUNDARY_CSV: &str = "boundary.csv";
pub const BOUNDARY_JSON: &str = "boundary.json";
pub const DIAGNOSTICS_JSON: &str = "diagnostics.json";
pub const VERIFY_JSON: &str = "verify.json";
pub const SIMULATE_JSON: &str = "simulate.json";
pub const HIGHDIM_JSON: &str = "highdim.json";

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub wall_time_s: f64,
    pub version: &'static str,
}

impl Metadata {
    pub fn since(start: std::time::Instant) -> Self {
        Self {
            wall_time_s: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(CliError::io("create output directory", root))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> CliResult<PathBuf> {
        let path = self.path(name);
        let file = File::create(&path).map_err(CliError::io("create", &path))?;
        let mut out = BufWriter::new(file);
        f(&mut out)
            .and_then(|_| out.flush())
            .map_err(CliError::io("write", &path))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
        self.write_with(name, |out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            writeln!(out)
        })
    }
}

/// One row per node: coordinates, then the action label.
pub fn write_policy_csv<W: Write>(mut out: W, policy: &PolicyField) -> std::io::Result<()> {
    let grid = policy.grid();
    let mut header: Vec<String> = (1..=grid.dim()).map(|k| format!("x{k}")).collect();
    header.push("action".into());
    writeln!(out, "{}", header.join(","))?;
    let mut x = vec![0.0; grid.dim()];
    for (n, action) in policy.actions().iter().enumerate() {
        grid.coords_into(n, &mut x);
        for v in &x {
            write!(out, "{v:.16e},")?;
        }
        writeln!(out, "{action}")?;
    }
    Ok(())
}

pub fn read_policy_csv(path: &Path, grid: &parsearch::GridSpec) -> CliResult<PolicyField> {
    let text = std::fs::read_to_string(path).map_err(CliError::io("read", path))?;
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut actions = Vec::with_capacity(grid.len());
    for (k, line) in text.lines().enumerate().skip(1) {
        let label = line
            .rsplit(',')
            .next()
            .ok_or_else(|| bad(format!("line {}: empty", k + 1)))?;
        actions.push(label.trim().parse().map_err(|e| bad(format!("line {}: {e}", k + 1)))?);
    }
    Ok(PolicyField::new(grid.clone(), actions)?)
}

/// Field value at each probe, failing on probes outside the grid.
pub fn probe_values(u: &ScalarField, probes: &[Vec<f64>]) -> CliResult<Vec<ProbeValue>> {
    probes
        .iter()
        .map(|x| {
            let value = u.interpolate(x).ok_or_else(|| {
                CliError::Config(format!("probe {x:?} lies outside the grid"))
            })?;
            Ok(ProbeValue { x: x.clone(), u: value })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeValue {
    pub x: Vec<f64>,
    pub u: f64,
}
