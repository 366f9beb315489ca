//! `solve`: one field plus its boundary, policy and diagnostics artifacts.

use std::time::Instant;

use parsearch::boundary::{
    axis_distance, contact_set, diagonal_profile, star_interpolation_allowance, star_shaped_check,
    write_boundary_csv, BoundaryProfile, StarShapedSummary,
};
use parsearch::grid::{truncation_boundary_values, write_field_csv};
use parsearch::highdim::{
    default_chart_grid, estimate_rd, full_boundary_values, monotonicity_allowance, rd_inequality_check, solve_wd,
    wd_monotonicity_check, MonotonicityReport, RdEstimate, RdPairCheck,
};
use parsearch::{solver, ContactMask, Cost, GridSpec, SearchMode, Solution};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ModeKind, RunConfig};
use crate::error::CliResult;
use crate::output::{
    probe_values, write_policy_csv, Metadata, OutDir, ProbeValue, BOUNDARY_CSV, BOUNDARY_JSON, DIAGNOSTICS_JSON,
    FIELD_CSV, HIGHDIM_JSON, POLICY_CSV,
};

const STAR_SAMPLES: usize = 10_000;

#[derive(Debug, Serialize)]
pub struct DiagnosticsReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub mode: SearchMode,
    pub d: usize,
    pub grid: GridSpec,
    /// Solver diagnostics without the wall time, which lives in `metadata`.
    pub diagnostics: Value,
    pub probes: Vec<ProbeValue>,
    pub metadata: Metadata,
}

pub fn diagnostics_value(sol: &Solution) -> (Value, f64) {
    let mut v = serde_json::to_value(&sol.diagnostics).expect("diagnostics serialize");
    let wall = v
        .as_object_mut()
        .and_then(|m| m.remove("wall_time_s"))
        .and_then(|w| w.as_f64())
        .unwrap_or(0.0);
    (v, wall)
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    if cfg.kind == ModeKind::Highdim {
        return run_highdim(cfg);
    }
    let start = Instant::now();
    let mode = cfg.search_mode()?;
    let grid = cfg.grid()?;
    let bc = match mode {
        SearchMode::Parallel { c } if grid.dim() >= 3 => full_boundary_values(&grid, c, &cfg.solver)?,
        _ => truncation_boundary_values(&grid, &mode)?,
    };
    log::info!("solving {mode} on {} nodes", grid.len());
    let sol = solver::solve(&mode, &grid, &bc, &cfg.solver)?;
    let probes = probe_values(&sol.u, &cfg.probes_or_origin())?;
    let eps = sol.diagnostics.contact_tol;
    let mask = contact_set(&sol.u, &sol.obstacle, eps)?;

    let out = OutDir::create(&cfg.out)?;
    out.write_with(FIELD_CSV, |w| write_field_csv(w, &sol.u, &sol.obstacle, &mask))?;
    out.write_with(BOUNDARY_CSV, |w| write_boundary_csv(w, &mask))?;
    if let Some(policy) = &sol.policy {
        out.write_with(POLICY_CSV, |w| write_policy_csv(w, policy))?;
    }
    out.write_json(BOUNDARY_JSON, &boundary_profile(&sol, &mask, &mode)?)?;
    let (diagnostics, _) = diagnostics_value(&sol);
    out.write_json(
        DIAGNOSTICS_JSON,
        &DiagnosticsReport {
            command: "solve",
            mode,
            d: grid.dim(),
            grid,
            diagnostics,
            probes,
            metadata: Metadata::since(start),
        },
    )?;
    Ok(())
}

/// Boundary summary. The diagonal scan and axis bands need `d = 2`; other
/// dimensions report the star-shapedness check only.
fn boundary_profile(sol: &Solution, mask: &ContactMask, mode: &SearchMode) -> CliResult<BoundaryProfile> {
    let grid = sol.grid();
    let theta = mode.pair_theta();
    let eps = sol.diagnostics.contact_tol;
    let mut profile = if grid.dim() == 2 {
        let mut p = diagonal_profile(mask, Cost::new(theta)?, eps)?;
        let probes: Vec<f64> = [-1.0 / theta, -3.0 / theta]
            .into_iter()
            .filter(|&x2| x2 > grid.lower()[1] && x2 < grid.upper()[1])
            .collect();
        match axis_distance(mask, &probes) {
            Ok(bands) => p.axis_distance = bands,
            Err(e) => log::warn!("axis bands not measured: {e}"),
        }
        p
    } else {
        BoundaryProfile {
            c: theta,
            h: grid.h(),
            eps_contact: eps,
            axis_distance: Vec::new(),
            s_star: Vec::new(),
            d_fb: Vec::new(),
            star_shaped: None,
            excluded_slices: 0,
            boundary_nodes: Vec::new(),
        }
    };
    let allowance = star_interpolation_allowance(grid, Cost::new(mode.min_cost())?);
    let star = star_shaped_check(mask, &sol.u, &sol.obstacle, STAR_SAMPLES, eps, allowance)?;
    profile.star_shaped = Some(StarShapedSummary {
        checked: star.checked,
        violations: star.violations.len(),
    });
    Ok(profile)
}

#[derive(Debug, Serialize)]
struct HighDimOutput {
    d: usize,
    c: f64,
    r_d: f64,
    bracket: [f64; 2],
    estimates: Vec<RdEstimate>,
    inequality_checks: Vec<RdPairCheck>,
    rd_checks_passed: bool,
    monotonicity: bool,
    monotonicity_detail: Option<MonotonicityReport>,
    metadata: Metadata,
}

/// Chart spacing for `w_k` given the base spacing `h`: the 1-D charts are
/// cheap enough to refine five times, the 3-D chart is coarsened four times.
pub fn chart_h(k: usize, h: f64) -> f64 {
    match k {
        1 | 2 => h / 5.0,
        3 => h,
        _ => 4.0 * h,
    }
}

fn run_highdim(cfg: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    let c = cfg.cost()?;
    let base = cfg.h.unwrap_or(1.0 / (80.0 * c.value()));
    let mut estimates = Vec::new();
    let mut solutions = Vec::new();
    for k in 1..=cfg.d {
        let grid = default_chart_grid(k, c, chart_h(k, base))?;
        log::info!("chart solve d = {k} on {} nodes", grid.len());
        let w = solve_wd(k, c, &grid, &cfg.solver)?;
        estimates.push(estimate_rd(&w, w.solution.diagnostics.contact_tol)?);
        solutions.push(w);
    }
    let report = rd_inequality_check(&estimates)?;
    let top = solutions.last().expect("d >= 1");
    let monotonicity_detail = match solutions.len() {
        n if n >= 2 => {
            let lower = &solutions[n - 2];
            Some(wd_monotonicity_check(top, lower, 2_000, monotonicity_allowance(top, lower))?)
        }
        _ => None,
    };
    let est = *estimates.last().expect("d >= 1");

    let out = OutDir::create(&cfg.out)?;
    let mask = contact_set(top.omega(), &top.solution.obstacle, top.solution.diagnostics.contact_tol)?;
    out.write_with(FIELD_CSV, |w| write_field_csv(w, top.omega(), &top.solution.obstacle, &mask))?;
    let (diagnostics, _) = diagnostics_value(&top.solution);
    out.write_json(
        DIAGNOSTICS_JSON,
        &DiagnosticsReport {
            command: "highdim",
            mode: SearchMode::Parallel { c },
            d: cfg.d,
            grid: top.grid().clone(),
            diagnostics,
            probes: Vec::new(),
            metadata: Metadata::since(start),
        },
    )?;
    out.write_json(
        HIGHDIM_JSON,
        &HighDimOutput {
            d: cfg.d,
            c: c.value(),
            r_d: est.r_d,
            bracket: est.bracket,
            estimates,
            inequality_checks: report.inequality_checks,
            rd_checks_passed: report.passed,
            monotonicity: monotonicity_detail.as_ref().is_none_or(|m| m.holds),
            monotonicity_detail,
            metadata: Metadata::since(start),
        },
    )?;
    Ok(())
}
