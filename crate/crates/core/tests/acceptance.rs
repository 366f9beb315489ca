//! Acceptance suite: twelve criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! Criteria run concurrently and share solved fields; the process exits
//! non-zero if any criterion fails.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use parsearch::analytic::{dfb_upper_bound, eta_value, phi_upper, psi_value};
use parsearch::boundary::{
    axis_distance, contact_set, diagonal_profile, free_boundary_nodes, region_inclusion,
    star_interpolation_allowance, star_shaped_check,
};
use parsearch::grid::truncation_boundary_values;
use parsearch::highdim::{default_chart_grid, estimate_rd, rd_inequality_check, solve_wd};
use parsearch::montecarlo::{finite_horizon_oracle, simulate_stopping, OracleConfig, SimConfig};
use parsearch::solver::{self, Action};
use parsearch::{ContactMask, Cost, GridSpec, RotatedPoint, SearchMode, Solution, SolverConfig, StoppingRule};

type Outcome = Result<String, String>;

fn cost(c: f64) -> Cost {
    Cost::new(c).unwrap()
}

fn solve_on(mode: &SearchMode, grid: &GridSpec) -> Solution {
    let bc = truncation_boundary_values(grid, mode).unwrap();
    solver::solve(mode, grid, &bc, &SolverConfig::for_mode(mode)).unwrap()
}

fn mask_of(sol: &Solution) -> ContactMask {
    contact_set(&sol.u, &sol.obstacle, sol.diagnostics.contact_tol).unwrap()
}

const COSTS: [f64; 3] = [0.5, 1.0, 2.0];

/// Parallel solves on the default box `[-4/c, 8/c]²`, `h = 1/(80c)`.
fn parallel_default(c: f64) -> &'static Solution {
    static CELLS: [OnceLock<Solution>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let k = COSTS.iter().position(|&v| v == c).expect("cost in COSTS");
    CELLS[k].get_or_init(|| {
        let grid = GridSpec::default_for(2, cost(c)).unwrap();
        solve_on(&SearchMode::parallel(c).unwrap(), &grid)
    })
}

/// `[-4, 8]²` at `h = 1/80`, shared by the sequential and hybrid criteria.
fn common_grid() -> GridSpec {
    GridSpec::cube(2, -4.0, 8.0, 1.0 / 80.0).unwrap()
}

fn sequential_half() -> &'static Solution {
    static CELL: OnceLock<Solution> = OnceLock::new();
    CELL.get_or_init(|| solve_on(&SearchMode::sequential(0.5).unwrap(), &common_grid()))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Midpoints between neighbouring stopped and continuing nodes of a 1-D mask.
fn interfaces(mask: &ContactMask) -> Vec<f64> {
    let grid = mask.grid();
    (1..grid.len())
        .filter(|&n| mask.is_contact(n) != mask.is_contact(n - 1))
        .map(|n| 0.5 * (grid.coord(n, 0) + grid.coord(n - 1, 0)))
        .collect()
}

fn c1_smooth_pasting() -> Outcome {
    let h = 1.0 / 400.0;
    let grid = GridSpec::cube(1, -2.0, 2.0, h).unwrap();
    let sol = solve_on(&SearchMode::parallel(1.0).unwrap(), &grid);
    let edges = interfaces(&mask_of(&sol));
    let u0 = sol.u.at(&[0.0]).unwrap();
    let edges_ok = edges.len() == 2 && (edges[0] + 0.25).abs() <= 2.0 * h && (edges[1] - 0.25).abs() <= 2.0 * h;
    check(
        edges_ok && (u0 - 0.0625).abs() <= 1e-3,
        format!("edges {edges:?} (want ±0.25 ± {}), u(0) = {u0:.6} (want 0.0625 ± 1e-3)", 2.0 * h),
    )
}

fn c2_axis_asymptote() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in COSTS {
        let sol = parallel_default(c);
        let h = sol.grid().h();
        let band = &axis_distance(&mask_of(sol), &[-3.0 / c]).map_err(|e| e.to_string())?[0];
        let pass = (band.half_width - 0.25 / c).abs() <= 2.0 * h;
        ok &= pass;
        parts.push(format!("c={c}: {:.5} vs {:.5}", band.half_width, 0.25 / c));
    }
    check(ok, parts.join("; "))
}

fn c3_diagonal_lower_bound() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in COSTS {
        let sol = parallel_default(c);
        let grid = sol.grid();
        let need = 0.5 / c - 2.0 * grid.h();
        let closest = free_boundary_nodes(&mask_of(sol))
            .into_iter()
            .map(|n| grid.coords(n))
            .filter(|x| x[0] + x[1] >= 0.0)
            .map(|x| (x[0] - x[1]).abs())
            .fold(f64::INFINITY, f64::min);
        ok &= closest >= need;
        parts.push(format!("c={c}: min |x1-x2| {closest:.5} >= {need:.5}"));
    }
    check(ok, parts.join("; "))
}

fn c4_asymptotic_rate() -> Outcome {
    let sol = parallel_default(1.0);
    let h = sol.grid().h();
    let profile = diagonal_profile(&mask_of(sol), cost(1.0), sol.diagnostics.contact_tol).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [1.0, 2.0] {
        let bound = dfb_upper_bound(t, cost(1.0)).unwrap() + 2.0 * h + 1.0 / t.powi(4);
        let Some(v) = profile.d_fb(t) else {
            return Err(format!("no slices with t >= {t}"));
        };
        ok &= v <= bound;
        parts.push(format!("d_FB({t}) = {v:.5} <= {bound:.5}"));
    }
    check(ok, parts.join("; "))
}

fn c5_sandwich() -> Outcome {
    let sol = parallel_default(1.0);
    let grid = sol.grid();
    let tau = 5.0 * grid.h();
    let (mut lower, mut upper, mut samples) = (f64::INFINITY, f64::INFINITY, 0usize);
    for n in 0..grid.len() {
        let x = grid.coords(n);
        let p = RotatedPoint::from_cartesian(x[0], x[1]);
        if p.t < 1.0 {
            continue;
        }
        samples += 1;
        let u = sol.u.get(n);
        lower = lower.min(u - eta_value(p, 1.0).unwrap());
        upper = upper.min(phi_upper(p, cost(1.0), 1.0 / (4.0 * p.t * p.t)).unwrap() - u);
    }
    check(
        samples > 0 && lower >= -tau && upper >= -tau,
        format!("{samples} samples; margins u-η {lower:.2e}, φ-u {upper:.2e} (>= -{tau})"),
    )
}

fn c6_star_shaped() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in COSTS {
        let sol = parallel_default(c);
        let eps = sol.diagnostics.contact_tol;
        let report = star_shaped_check(
            &mask_of(sol),
            &sol.u,
            &sol.obstacle,
            10_000,
            eps,
            star_interpolation_allowance(sol.grid(), cost(c)),
        )
        .map_err(|e| e.to_string())?;
        ok &= report.passed() && report.checked > 0;
        parts.push(format!("c={c}: {} violations / {} checked", report.violations.len(), report.checked));
    }
    check(ok, parts.join("; "))
}

fn c7_sequential_inclusion() -> Outcome {
    let par = parallel_default(1.0);
    let seq = sequential_half();
    if par.grid() != seq.grid() {
        return Err("parallel and sequential grids differ".into());
    }
    let forward = region_inclusion(&mask_of(par), &mask_of(seq)).map_err(|e| e.to_string())?;
    check(
        forward.holds && forward.strict_extra > 0,
        format!(
            "{} violations, {} nodes continue only under sequential search",
            forward.violations.len(),
            forward.strict_extra
        ),
    )
}

fn c8_sequential_policy() -> Outcome {
    let seq = sequential_half();
    let grid = seq.grid();
    let policy = seq.policy.as_ref().ok_or("sequential solve returned no policy")?;
    let (mut total, mut leader) = (0usize, 0usize);
    for n in 0..grid.len() {
        let x = grid.coords(n);
        if x[0] == x[1] || policy.get(n) == Action::Stop {
            continue;
        }
        total += 1;
        if let Action::Search(i) = policy.get(n) {
            if x[i] >= x[1 - i] {
                leader += 1;
            }
        }
    }
    let fraction = leader as f64 / total.max(1) as f64;
    let profile = diagonal_profile(&mask_of(seq), cost(1.0), seq.diagnostics.contact_tol).map_err(|e| e.to_string())?;
    let slice = profile.slice_near(6.0).ok_or("no diagonal slice near t = 6")?;
    let target = 1.0 / (4.0 * 2f64.sqrt() * 0.5);
    let h = grid.h();
    let width_ok = (slice.s - target).abs() <= 3.0 * h && slice.s_neg.is_none_or(|s| (s - target).abs() <= 3.0 * h);
    check(
        total > 0 && fraction >= 0.99 && width_ok,
        format!(
            "leader searched at {leader}/{total} ({:.4}); half-width at t={:.3}: {:.5}/{:?} vs {target:.5} ± {:.4}",
            fraction,
            slice.t,
            slice.s,
            slice.s_neg,
            3.0 * h
        ),
    )
}

fn c9_hybrid() -> Outcome {
    let grid = common_grid();
    let par = parallel_default(1.0);
    let seq = solve_on(&SearchMode::sequential(2.0 / 3.0).unwrap(), &grid);
    let hyb = solve_on(&SearchMode::hybrid(1.0, 2.0 / 3.0).unwrap(), &grid);
    let policy = hyb.policy.as_ref().ok_or("hybrid solve returned no policy")?;
    let (mut region, mut parallel) = (0usize, 0usize);
    let mut dominance = f64::INFINITY;
    for n in 0..grid.len() {
        let x = grid.coords(n);
        dominance = dominance.min(hyb.u.get(n) - par.u.get(n).max(seq.u.get(n)));
        if x[0] >= 4.0 && x[1] >= 4.0 && (x[0] - x[1]).abs() <= 0.3 && policy.get(n) != Action::Stop {
            region += 1;
            parallel += usize::from(policy.get(n) == Action::Parallel);
        }
    }
    check(
        region > 0 && parallel == region && dominance >= -1e-8,
        format!("PARALLEL at {parallel}/{region} nodes; min u_hyb - max(u_par, u_seq) = {dominance:.2e}"),
    )
}

fn c10_contact_radii() -> Outcome {
    let c = cost(1.0);
    let mut estimates = Vec::new();
    for (d, h) in [(1, 1.0 / 400.0), (2, 1.0 / 400.0), (3, 1.0 / 80.0)] {
        let grid = default_chart_grid(d, c, h).map_err(|e| e.to_string())?;
        let sol = solve_wd(d, c, &grid, &SolverConfig::default()).map_err(|e| e.to_string())?;
        estimates.push(estimate_rd(&sol, sol.solution.diagnostics.contact_tol).map_err(|e| e.to_string())?);
    }
    let r2_exact = 1.0 / (2.0 * 2f64.sqrt());
    let r1_ok = (estimates[0].r_d - 0.25).abs() <= 2.0 * estimates[0].h;
    let r2_ok = (estimates[1].r_d - r2_exact).abs() <= 2.0 * estimates[1].h;
    let report = rd_inequality_check(&estimates).map_err(|e| e.to_string())?;
    let r3_pair = &report.inequality_checks[1];
    check(
        r1_ok && r2_ok && report.passed,
        format!(
            "r1 = {:.5}, r2 = {:.5}, r3 in [{:.4}, {:.4}]; (2/3)r3_lo² = {:.4} >= r2_hi² = {:.4}; increasing: {}",
            estimates[0].r_d,
            estimates[1].r_d,
            estimates[2].bracket[0],
            estimates[2].bracket[1],
            r3_pair.lhs.unwrap_or(f64::NAN),
            r3_pair.rhs.unwrap_or(f64::NAN),
            report.inequality_checks.iter().all(|p| p.increasing)
        ),
    )
}

fn c11_monte_carlo() -> Outcome {
    let sol = parallel_default(1.0);
    let mask = mask_of(sol);
    let mode = SearchMode::parallel(1.0).unwrap();
    let cfg = SimConfig {
        dt: 1e-4,
        paths: 200_000,
        ..SimConfig::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [[0.0, 0.0], [0.5, 0.0], [1.0, 1.0]] {
        let est = simulate_stopping(&p, StoppingRule::Mask(&mask), &mode, &cfg).map_err(|e| e.to_string())?;
        let u = sol.u.interpolate(&p).unwrap();
        let allowed = 3.0 * est.stderr + 0.02;
        ok &= (est.mean - u).abs() <= allowed;
        parts.push(format!("{p:?}: MC {:.5} vs u {u:.5} (±{allowed:.4})", est.mean));
    }
    for x in [-0.1, 0.0, 0.1] {
        let o = finite_horizon_oracle(&[x], cost(1.0), 0.01, 10_000, &OracleConfig::default()).map_err(|e| e.to_string())?;
        let want = psi_value(x, cost(1.0));
        ok &= (o.value - want).abs() <= 1e-2;
        parts.push(format!("oracle({x}) {:.5} vs ψ {want:.5}", o.value));
    }
    check(ok, parts.join("; "))
}

fn c12_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    // Obstacle dominance on every solved field.
    let mut fields: Vec<&Solution> = COSTS.iter().map(|&c| parallel_default(c)).collect();
    fields.push(sequential_half());
    let below = fields
        .iter()
        .flat_map(|s| s.u.values().iter().zip(s.obstacle.values()))
        .filter(|(u, g)| u < g)
        .count();
    notes.push(format!("u < g at {below} nodes"));
    if below > 0 {
        failures.push("obstacle dominance");
    }

    // Cost monotonicity on a shared grid.
    let grid = GridSpec::cube(2, -4.0, 8.0, 1.0 / 40.0).unwrap();
    let solved: Vec<Solution> = COSTS
        .iter()
        .map(|&c| solve_on(&SearchMode::parallel(c).unwrap(), &grid))
        .collect();
    let mut worst = f64::INFINITY;
    for w in solved.windows(2) {
        for (a, b) in w[0].u.values().iter().zip(w[1].u.values()) {
            worst = worst.min(a - b);
        }
    }
    notes.push(format!("min u_c - u_2c = {worst:.2e}"));
    if worst < 0.0 {
        failures.push("cost monotonicity");
    }

    // Exchange symmetry on the default square box.
    let sol = parallel_default(1.0);
    let g = sol.grid();
    let m = g.counts()[0];
    let mut asym = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            asym = asym.max((sol.u.get(g.index(&[i, j])) - sol.u.get(g.index(&[j, i]))).abs());
        }
    }
    let sym_tol = 1e-8;
    notes.push(format!("max |u(x1,x2) - u(x2,x1)| = {asym:.2e}"));
    if asym > sym_tol {
        failures.push("exchange symmetry");
    }

    // Refinement: each halving of h moves the probe values by at most half
    // the previous increment.
    let probes = [[0.0, 0.0], [0.5, 0.0], [1.0, 1.0]];
    let values: Vec<Vec<f64>> = [10.0, 20.0, 40.0]
        .iter()
        .map(|k| {
            let grid = GridSpec::cube(2, -4.0, 8.0, 1.0 / k).unwrap();
            let s = solve_on(&SearchMode::parallel(1.0).unwrap(), &grid);
            probes.iter().map(|p| s.u.at(p).unwrap()).collect()
        })
        .collect();
    let mut refine_ok = true;
    for k in 0..probes.len() {
        let first = (values[1][k] - values[0][k]).abs();
        let second = (values[2][k] - values[1][k]).abs();
        refine_ok &= second <= 0.5 * first;
    }
    notes.push(format!("refinement increments shrink: {refine_ok}"));
    if !refine_ok {
        failures.push("refinement consistency");
    }

    // Bitwise reproducibility of a solve and of a simulation.
    let grid = GridSpec::cube(2, -4.0, 8.0, 1.0 / 20.0).unwrap();
    let mode = SearchMode::parallel(1.0).unwrap();
    let a = solve_on(&mode, &grid);
    let b = solve_on(&mode, &grid);
    let same_field = a.u.values().iter().zip(b.u.values()).all(|(x, y)| x.to_bits() == y.to_bits());
    let mask = mask_of(&a);
    let cfg = SimConfig {
        paths: 4_000,
        ..SimConfig::default()
    };
    let run = || simulate_stopping(&[0.0, 0.0], StoppingRule::Mask(&mask), &mode, &cfg).unwrap();
    let (m1, m2) = (run(), run());
    let same_sim = m1.mean.to_bits() == m2.mean.to_bits() && m1.stderr.to_bits() == m2.stderr.to_bits();
    notes.push(format!("reproducible: field {same_field}, simulation {same_sim}"));
    if !(same_field && same_sim) {
        failures.push("reproducibility");
    }

    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("failed: {}; {}", failures.join(", "), notes.join("; ")))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1-D smooth pasting", c1_smooth_pasting),
        ("axis asymptote", c2_axis_asymptote),
        ("diagonal lower bound", c3_diagonal_lower_bound),
        ("asymptotic rate", c4_asymptotic_rate),
        ("sandwich", c5_sandwich),
        ("star-shapedness", c6_star_shaped),
        ("sequential inclusion", c7_sequential_inclusion),
        ("sequential policy structure", c8_sequential_policy),
        ("hybrid regime", c9_hybrid),
        ("contact radii r_d", c10_contact_radii),
        ("Monte Carlo and oracle", c11_monte_carlo),
        ("property suite", c12_properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let start = Instant::now();
    let results: Vec<Option<(Outcome, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .map(|(k, (name, f))| {
                let wanted = filter.is_empty() || filter.iter().any(|p| name.contains(p.as_str()) || *p == (k + 1).to_string());
                wanted.then(|| {
                    scope.spawn(move || {
                        let t = Instant::now();
                        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                            let msg = p
                                .downcast_ref::<String>()
                                .cloned()
                                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                                .unwrap_or_else(|| "panic".into());
                            Err(format!("panicked: {msg}"))
                        });
                        (outcome, t.elapsed().as_secs_f64())
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.map(|h| h.join().unwrap())).collect()
    });

    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    let mut ran = 0;
    for (k, ((name, _), result)) in criteria.iter().zip(&results).enumerate() {
        let Some((outcome, secs)) = result else { continue };
        ran += 1;
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        writeln!(out, "criterion {:>2} {tag} {name} [{secs:.1}s]: {detail}", k + 1).unwrap();
    }
    writeln!(
        out,
        "acceptance: {}/{ran} passed in {:.1}s",
        ran - failed,
        start.elapsed().as_secs_f64()
    )
    .unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
