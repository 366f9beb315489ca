//! `verify`: the two-alternative invariant suite against fresh solves.

use std::cell::OnceCell;
use std::time::Instant;

use parsearch::analytic::{dfb_upper_bound, eta_value, phi_upper};
use parsearch::boundary::{
    axis_distance, contact_set, diagonal_profile, free_boundary_nodes, region_inclusion,
    star_interpolation_allowance, star_shaped_check,
};
use parsearch::grid::truncation_boundary_values;
use parsearch::highdim::{default_chart_grid, estimate_rd, rd_inequality_check, solve_wd, upper_region_check};
use parsearch::{solver, ContactMask, Cost, GridSpec, RotatedPoint, SearchMode, Solution};
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::solve::chart_h;
use crate::config::{ModeKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Metadata, OutDir, VERIFY_JSON};

pub const CHECKS: &[&str] = &[
    "smooth_pasting",
    "axis_distance",
    "diagonal_lower_bound",
    "d_fb_bound",
    "sandwich",
    "star_shaped",
    "inclusion",
    "rd_values",
    "upper_region",
];

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub measured: Value,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    passed: bool,
    c: f64,
    h: f64,
    allowance_scale: f64,
    checks: Vec<CheckResult>,
    metadata: Metadata,
}

/// Lazily solved fields shared between checks.
struct Fields<'a> {
    cfg: &'a RunConfig,
    c: Cost,
    grid: GridSpec,
    parallel: OnceCell<(Solution, ContactMask)>,
    sequential: OnceCell<(Solution, ContactMask)>,
}

fn solve_with_mask(mode: &SearchMode, grid: &GridSpec, cfg: &RunConfig) -> CliResult<(Solution, ContactMask)> {
    let bc = truncation_boundary_values(grid, mode)?;
    let sol = solver::solve(mode, grid, &bc, &cfg.solver)?;
    let mask = contact_set(&sol.u, &sol.obstacle, sol.diagnostics.contact_tol)?;
    Ok((sol, mask))
}

impl Fields<'_> {
    fn parallel(&self) -> CliResult<&(Solution, ContactMask)> {
        if self.parallel.get().is_none() {
            let v = solve_with_mask(&SearchMode::Parallel { c: self.c }, &self.grid, self.cfg)?;
            let _ = self.parallel.set(v);
        }
        Ok(self.parallel.get().expect("set above"))
    }

    fn sequential(&self) -> CliResult<&(Solution, ContactMask)> {
        if self.sequential.get().is_none() {
            let mode = SearchMode::sequential(0.5 * self.c.value())?;
            let v = solve_with_mask(&mode, &self.grid, self.cfg)?;
            let _ = self.sequential.set(v);
        }
        Ok(self.sequential.get().expect("set above"))
    }
}

fn result(name: &'static str, passed: bool, detail: String, measured: Value) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
        measured,
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    if cfg.kind != ModeKind::Parallel || cfg.d != 2 {
        return Err(CliError::Config(
            "verify runs the two-alternative parallel suite; use --mode parallel --d 2".into(),
        ));
    }
    for name in &cfg.only {
        if !CHECKS.contains(&name.as_str()) {
            return Err(CliError::Config(format!(
                "unknown check `{name}`; available: {}",
                CHECKS.join(", ")
            )));
        }
    }
    let selected: Vec<&'static str> = CHECKS
        .iter()
        .copied()
        .filter(|n| cfg.only.is_empty() || cfg.only.iter().any(|o| o == n))
        .collect();

    let c = cfg.cost()?;
    let fields = Fields {
        cfg,
        c,
        grid: cfg.grid()?,
        parallel: OnceCell::new(),
        sequential: OnceCell::new(),
    };
    let s = cfg.allowance_scale;
    let mut checks = Vec::new();
    for name in selected {
        log::info!("check {name}");
        let r = match name {
            "smooth_pasting" => smooth_pasting(&fields, s)?,
            "axis_distance" => axis_band(&fields, s)?,
            "diagonal_lower_bound" => diagonal_lower_bound(&fields, s)?,
            "d_fb_bound" => dfb_bound(&fields, s)?,
            "sandwich" => sandwich(&fields, s)?,
            "star_shaped" => star_shaped(&fields, s)?,
            "inclusion" => inclusion(&fields)?,
            "rd_values" => rd_values(&fields, s)?,
            "upper_region" => upper_region(&fields)?,
            _ => unreachable!("validated above"),
        };
        checks.push(r);
    }

    let failed: Vec<String> = checks.iter().filter(|r| !r.passed).map(|r| r.name.to_string()).collect();
    let report = VerifyReport {
        passed: failed.is_empty(),
        c: c.value(),
        h: fields.grid.h(),
        allowance_scale: s,
        checks,
        metadata: Metadata::since(start),
    };
    let out = OutDir::create(&cfg.out)?;
    out.write_json(VERIFY_JSON, &report)?;
    for r in &report.checks {
        println!("{:<22} {}  {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed { failed })
    }
}

fn smooth_pasting(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let c = f.c.value();
    let h = f.grid.h() / 5.0;
    let grid = GridSpec::cube(1, -2.0 / c, 2.0 / c, h)?;
    let (sol, mask) = solve_with_mask(&SearchMode::Parallel { c: f.c }, &grid, f.cfg)?;
    let edges: Vec<f64> = (1..grid.len())
        .filter(|&n| mask.is_contact(n) != mask.is_contact(n - 1))
        .map(|n| 0.5 * (grid.coord(n, 0) + grid.coord(n - 1, 0)))
        .collect();
    let target = 0.25 / c;
    let u0 = sol.u.interpolate(&[0.0]).unwrap_or(f64::NAN);
    let want_u0 = 1.0 / (16.0 * c);
    let passed = edges.len() == 2
        && (edges[0] + target).abs() <= 2.0 * h * s
        && (edges[1] - target).abs() <= 2.0 * h * s
        && (u0 - want_u0).abs() <= 1e-3 * s;
    Ok(result(
        "smooth_pasting",
        passed,
        format!("edges {edges:?} vs ±{target}; u(0) = {u0:.6} vs {want_u0:.6}"),
        json!({"edges": edges, "u0": u0, "h": h}),
    ))
}

fn axis_band(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let (sol, mask) = f.parallel()?;
    let c = f.c.value();
    let h = sol.grid().h();
    let band = axis_distance(mask, &[-3.0 / c])?.remove(0);
    let target = 0.25 / c;
    Ok(result(
        "axis_distance",
        (band.half_width - target).abs() <= 2.0 * h * s,
        format!("half-width {:.5} at x2 = {} vs {target:.5}", band.half_width, band.row),
        serde_json::to_value(band).expect("serialize"),
    ))
}

fn diagonal_lower_bound(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let (sol, mask) = f.parallel()?;
    let grid = sol.grid();
    let need = 0.5 / f.c.value() - 2.0 * grid.h() * s;
    let closest = free_boundary_nodes(mask)
        .into_iter()
        .map(|n| grid.coords(n))
        .filter(|x| x[0] + x[1] >= 0.0)
        .map(|x| (x[0] - x[1]).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(result(
        "diagonal_lower_bound",
        closest >= need,
        format!("min |x1 - x2| on the boundary with t >= 0: {closest:.5} (need >= {need:.5})"),
        json!({"min_gap": closest, "required": need}),
    ))
}

fn dfb_bound(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let (sol, mask) = f.parallel()?;
    let c = f.c.value();
    let h = sol.grid().h();
    let profile = diagonal_profile(mask, f.c, sol.diagnostics.contact_tol)?;
    let mut passed = true;
    let mut rows = Vec::new();
    for k in [1.0, 2.0] {
        let t = k / c;
        let bound = dfb_upper_bound(t, f.c)? + s * (2.0 * h + 1.0 / (c.powi(5) * t.powi(4)));
        let value = profile.d_fb(t);
        passed &= value.is_some_and(|v| v <= bound);
        rows.push(json!({"T": t, "value": value, "bound": bound}));
    }
    Ok(result(
        "d_fb_bound",
        passed,
        format!("{} slices measured", profile.s_star.len()),
        Value::Array(rows),
    ))
}

fn sandwich(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let (sol, _) = f.parallel()?;
    let grid = sol.grid();
    let c = f.c.value();
    let tau = 5.0 * grid.h() * s;
    let (mut lower, mut upper, mut samples) = (f64::INFINITY, f64::INFINITY, 0usize);
    for n in 0..grid.len() {
        let x = grid.coords(n);
        let p = RotatedPoint::from_cartesian(x[0], x[1]);
        if p.t < 1.0 / c {
            continue;
        }
        samples += 1;
        let u = sol.u.get(n);
        lower = lower.min(u - eta_value(p, c)?);
        upper = upper.min(phi_upper(p, f.c, 1.0 / (4.0 * c * p.t * p.t))? - u);
    }
    Ok(result(
        "sandwich",
        samples > 0 && lower >= -tau && upper >= -tau,
        format!("{samples} samples; min(u - η) = {lower:.3e}, min(φ - u) = {upper:.3e}, allowance {tau:.3e}"),
        json!({"samples": samples, "lower_margin": lower, "upper_margin": upper, "allowance": tau}),
    ))
}

fn star_shaped(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let (sol, mask) = f.parallel()?;
    let report = star_shaped_check(
        mask,
        &sol.u,
        &sol.obstacle,
        10_000,
        sol.diagnostics.contact_tol * s,
        star_interpolation_allowance(sol.grid(), f.c) * s,
    )?;
    Ok(result(
        "star_shaped",
        report.passed() && report.checked > 0,
        format!("{} violations over {} contact nodes", report.violations.len(), report.checked),
        json!({"checked": report.checked, "tested": report.tested, "violations": report.violations.len()}),
    ))
}

fn inclusion(f: &Fields) -> CliResult<CheckResult> {
    let (_, par) = f.parallel()?;
    let (_, seq) = f.sequential()?;
    let report = region_inclusion(par, seq)?;
    Ok(result(
        "inclusion",
        report.holds && report.strict_extra > 0,
        format!(
            "{} parallel-only continuation nodes, {} sequential-only",
            report.violations.len(),
            report.strict_extra
        ),
        json!({"violations": report.violations.len(), "strict_extra": report.strict_extra}),
    ))
}

fn rd_values(f: &Fields, s: f64) -> CliResult<CheckResult> {
    let c = f.c;
    let mut estimates = Vec::new();
    for k in 1..=3 {
        let grid = default_chart_grid(k, c, chart_h(k, f.grid.h()))?;
        let w = solve_wd(k, c, &grid, &f.cfg.solver)?;
        estimates.push(estimate_rd(&w, w.solution.diagnostics.contact_tol)?);
    }
    let exact = [0.25 / c.value(), 0.5 / (std::f64::consts::SQRT_2 * c.value())];
    let close = (0..2).all(|k| (estimates[k].r_d - exact[k]).abs() <= 2.0 * estimates[k].h * s);
    let report = rd_inequality_check(&estimates)?;
    Ok(result(
        "rd_values",
        close && report.passed,
        format!(
            "r1 = {:.5}, r2 = {:.5}, r3 in [{:.4}, {:.4}]",
            estimates[0].r_d, estimates[1].r_d, estimates[2].bracket[0], estimates[2].bracket[1]
        ),
        serde_json::to_value(report).expect("serialize"),
    ))
}

fn upper_region(f: &Fields) -> CliResult<CheckResult> {
    let (sol, _) = f.parallel()?;
    let report = upper_region_check(&sol.u, &sol.obstacle, f.c, 2.0, sol.diagnostics.contact_tol)?;
    Ok(result(
        "upper_region",
        report.fraction == 1.0,
        format!("{}/{} nodes in N({}) are stopped", report.contact, report.samples, report.gamma),
        serde_json::to_value(report).expect("serialize"),
    ))
}
