//! `simulate`: Monte Carlo estimates of the stopping rule from a solve.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use parsearch::grid::read_field_csv;
use parsearch::montecarlo::{simulate_stopping, SimEstimate};
use parsearch::{GridSpec, SearchMode, StoppingRule};
use serde::{Deserialize, Serialize};

use crate::commands::solve;
use crate::config::{ModeKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{
    read_policy_csv, Metadata, OutDir, DIAGNOSTICS_JSON, FIELD_CSV, POLICY_CSV, SIMULATE_JSON,
};

#[derive(Debug, Deserialize)]
struct SolveHeader {
    command: String,
    grid: GridSpec,
}

#[derive(Debug, Serialize)]
struct ProbeEstimate {
    #[serde(flatten)]
    estimate: SimEstimate,
    solver_u: f64,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    command: &'static str,
    #[serde(flatten)]
    mode: SearchMode,
    dt: f64,
    paths: usize,
    seed: u64,
    t_cap: Option<f64>,
    estimates: Vec<ProbeEstimate>,
    metadata: Metadata,
}

fn missing(path: &std::path::Path) -> CliError {
    CliError::Config(format!(
        "{} not found; run `parsearch solve` with the same --out first or pass --solve-first",
        path.display()
    ))
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    if cfg.kind == ModeKind::Highdim {
        return Err(CliError::Config("simulate needs a parallel, sequential or hybrid solve".into()));
    }
    if cfg.solve_first {
        solve::run(cfg)?;
    }
    let start = Instant::now();
    let out = OutDir::create(&cfg.out)?;

    let diag_path = out.path(DIAGNOSTICS_JSON);
    if !diag_path.exists() {
        return Err(missing(&diag_path));
    }
    let text = std::fs::read_to_string(&diag_path).map_err(CliError::io("read", &diag_path))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", diag_path.display())))?;
    let bad = |e: serde_json::Error| CliError::Config(format!("{}: {e}", diag_path.display()));
    let header = SolveHeader::deserialize(&value).map_err(bad)?;
    if header.command != "solve" {
        return Err(CliError::Config(format!(
            "{} was written by `{}`, not `solve`",
            diag_path.display(),
            header.command
        )));
    }
    let mode = SearchMode::deserialize(&value).map_err(bad)?;
    let grid = header.grid;
    if cfg.probes.iter().any(|p| p.len() != grid.dim()) {
        return Err(CliError::Config(format!("probes must have {} coordinates", grid.dim())));
    }

    let field_path = out.path(FIELD_CSV);
    let file = File::open(&field_path).map_err(|_| missing(&field_path))?;
    let (u, mask) = read_field_csv(BufReader::new(file), &grid)?;
    let policy = match mode {
        SearchMode::Parallel { .. } => None,
        _ => {
            let path = out.path(POLICY_CSV);
            if !path.exists() {
                return Err(missing(&path));
            }
            Some(read_policy_csv(&path, &grid)?)
        }
    };
    let rule = match &policy {
        Some(p) => StoppingRule::Policy(p),
        None => StoppingRule::Mask(&mask),
    };

    let probes = if cfg.probes.is_empty() {
        vec![vec![0.0; grid.dim()]]
    } else {
        cfg.probes.clone()
    };
    let mut estimates = Vec::with_capacity(probes.len());
    for x in &probes {
        let solver_u = u
            .interpolate(x)
            .ok_or_else(|| CliError::Config(format!("probe {x:?} lies outside the grid")))?;
        let estimate = simulate_stopping(x, rule, &mode, &cfg.sim)?;
        if let Some(w) = &estimate.warning {
            log::warn!("{x:?}: {w}");
        }
        println!(
            "x = {x:?}: mean {:.6} ± {:.6}, solver {solver_u:.6}, E[tau] {:.4}",
            estimate.mean, estimate.stderr, estimate.mean_tau
        );
        estimates.push(ProbeEstimate { estimate, solver_u });
    }

    out.write_json(
        SIMULATE_JSON,
        &SimulateReport {
            command: "simulate",
            mode,
            dt: cfg.sim.dt,
            paths: cfg.sim.paths,
            seed: cfg.sim.seed,
            t_cap: cfg.sim.t_cap,
            estimates,
            metadata: Metadata::since(start),
        },
    )?;
    Ok(())
}
