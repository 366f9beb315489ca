//! Reduction of the problem without outside option, `w_d` with obstacle
//! `ρ(x) = max_i x_i`, to the hyperplane orthogonal to the diagonal.
//!
//! `w_d` grows like `t/√d` along `τ_d = Σe_i/√d` and is otherwise constant
//! in that direction, so `ω = w_d - (Σx_i)/d` restricted to
//! `H = {Σx_i = 0}` solves a `(d-1)`-dimensional obstacle problem in
//! orthonormal chart coordinates. The contact radius `r_d` of `ω` is the
//! smallest distance from the origin at which stopping is optimal.
//!
//! For `d = 1` the hyperplane is a point; `r_1` is read off the
//! one-alternative problem with outside option instead (contact for
//! `|x| >= 1/(4c)`).

use serde::{Deserialize, Serialize};

use crate::analytic::{eta_pair, Cost};
use crate::error::{Error, Result};
use crate::grid::{
    build_obstacle, interpolate_values, truncation_boundary_values, BoundaryData, GridSpec, ScalarField,
};
use crate::mode::SearchMode;
use crate::solver::{solve_with_obstacle, Solution, SolverConfig};

/// Orthonormal coordinates on `{x ∈ ℝ^d : Σx_i = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneChart {
    d: usize,
    basis: Vec<Vec<f64>>,
}

/// Gram–Schmidt on `e_1 - e_2, e_2 - e_3, …`.
pub fn build_chart(d: usize) -> Result<HyperplaneChart> {
    if d < 2 {
        return Err(Error::Dimension {
            d,
            reason: "the hyperplane chart needs at least two alternatives".into(),
        });
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        v[k + 1] = -1.0;
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    Ok(HyperplaneChart { d, basis })
}

impl HyperplaneChart {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Point of `H` with chart coordinates `y`.
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        self.embed_into(y, &mut x);
        x
    }

    pub fn embed_into(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (yk, b) in y.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += yk * bi;
            }
        }
    }

    /// Chart coordinates of the orthogonal projection of `x` onto `H`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| b.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `ρ̃(y)`: the largest coordinate of the embedded point.
    pub fn rho(&self, y: &[f64]) -> f64 {
        let x = self.embed(y);
        x.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lower far-field data for `ω`: the best two-alternative profile
    /// `η_c(x_i, x_j)` over all pairs at the embedded point.
    pub fn pair_profile(&self, y: &[f64], c: Cost) -> f64 {
        let x = self.embed(y);
        let mut v = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                v = v.max(eta_pair(x[i], x[j], c.value()));
            }
        }
        v
    }
}

/// Solved `w_d` on its chart.
#[derive(Debug, Clone)]
pub struct ChartSolution {
    pub d: usize,
    pub c: Cost,
    /// `None` for `d = 1`, where the field lives on the real line.
    pub chart: Option<HyperplaneChart>,
    pub solution: Solution,
}

impl ChartSolution {
    pub fn omega(&self) -> &ScalarField {
        &self.solution.u
    }

    pub fn grid(&self) -> &GridSpec {
        self.solution.u.grid()
    }

    /// `w_d(x)` for `x ∈ ℝ^d`, interpolated; `None` when the projection
    /// leaves the chart grid. For `d = 1` this is the one-alternative value
    /// with outside option.
    pub fn value_at(&self, x: &[f64]) -> Option<f64> {
        if x.len() != self.d {
            return None;
        }
        match &self.chart {
            None => self.omega().interpolate(x),
            Some(chart) => {
                // ω is symmetric under coordinate permutations; evaluating at
                // the sorted point keeps interpolated values symmetric too.
                let mut sorted = x.to_vec();
                sorted.sort_by(|a, b| b.total_cmp(a));
                let y = chart.project(&sorted);
                let mean = x.iter().sum::<f64>() / self.d as f64;
                self.omega().interpolate(&y).map(|w| w + mean)
            }
        }
    }
}

/// Chart grid `[-L, L]^{max(d-1, 1)}` with `L = max(2, d)/c`.
///
/// The contact radius sits well inside `L`; along the ridges where two
/// coordinates tie for the maximum the pair profile supplies accurate
/// Dirichlet data, so a larger box buys nothing.
pub fn default_chart_grid(d: usize, c: Cost, h: f64) -> Result<GridSpec> {
    let half = (d.max(2) as f64) / c.value();
    let cells = (half / h).round().max(2.0);
    GridSpec::cube((d.max(2) - 1).max(1), -cells * h, cells * h, h)
}

/// Solves for `ω` on `grid`, whose dimension must be `d - 1` (or 1 for
/// `d = 1`).
pub fn solve_wd(d: usize, c: Cost, grid: &GridSpec, cfg: &SolverConfig) -> Result<ChartSolution> {
    let expected = if d == 1 { 1 } else { d - 1 };
    if d == 0 || grid.dim() != expected {
        return Err(Error::Dimension {
            d,
            reason: format!("needs a {expected}-dimensional chart grid, got {}", grid.dim()),
        });
    }
    let mode = SearchMode::Parallel { c };
    if d == 1 {
        let bc = truncation_boundary_values(grid, &mode)?;
        let solution = solve_with_obstacle(&mode, &build_obstacle(grid), &bc, cfg)?;
        return Ok(ChartSolution {
            d,
            c,
            chart: None,
            solution,
        });
    }
    let chart = build_chart(d)?;
    let obstacle = ScalarField::from_fn(grid, |y| chart.rho(y));
    let bc = BoundaryData::from_fn(grid, |y| chart.pair_profile(y, c));
    let solution = solve_with_obstacle(&mode, &obstacle, &bc, cfg)?;
    Ok(ChartSolution {
        d,
        c,
        chart: Some(chart),
        solution,
    })
}

/// Truncation data for a full `d`-dimensional parallel solve, raised to
/// `w_d` wherever the chart covers the projection of a boundary node.
///
/// The pairwise profiles alone undershoot near the positive diagonal, where
/// all `d` alternatives tie and `w_d` is the exact far field.
pub fn boundary_values_with_chart(grid: &GridSpec, w: &ChartSolution) -> Result<BoundaryData> {
    if grid.dim() != w.d {
        return Err(Error::Dimension {
            d: grid.dim(),
            reason: format!("chart solution is for d = {}", w.d),
        });
    }
    let mode = SearchMode::Parallel { c: w.c };
    let mut bc = truncation_boundary_values(grid, &mode)?;
    let mut x = vec![0.0; grid.dim()];
    for (&n, v) in bc.nodes.iter().zip(bc.values.iter_mut()) {
        grid.coords_into(n, &mut x);
        if let Some(wd) = w.value_at(&x) {
            *v = v.max(wd);
        }
    }
    Ok(bc)
}

/// [`boundary_values_with_chart`] with a chart solve at the grid's spacing;
/// plain truncation data for `d <= 2`, where the pair profile is exact.
pub fn full_boundary_values(grid: &GridSpec, c: Cost, cfg: &SolverConfig) -> Result<BoundaryData> {
    let mode = SearchMode::Parallel { c };
    if grid.dim() <= 2 {
        return truncation_boundary_values(grid, &mode);
    }
    let chart_grid = default_chart_grid(grid.dim(), c, grid.h())?;
    let w = solve_wd(grid.dim(), c, &chart_grid, cfg)?;
    boundary_values_with_chart(grid, &w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdEstimate {
    pub d: usize,
    pub c: f64,
    pub r_d: f64,
    pub bracket: [f64; 2],
    pub h: f64,
}

/// Smallest chart norm of a contact node, bracketed by half a cell diagonal.
/// Only nodes within half the box half-width count, away from the Dirichlet
/// faces.
pub fn estimate_rd(sol: &ChartSolution, eps_contact: f64) -> Result<RdEstimate> {
    let grid = sol.grid();
    let u = sol.omega().values();
    let g = sol.solution.obstacle.values();
    let trusted = 0.5
        * grid
            .lower()
            .iter()
            .zip(grid.upper())
            .map(|(lo, hi)| (-lo).min(*hi))
            .fold(f64::INFINITY, f64::min);
    let mut best = f64::INFINITY;
    let mut y = vec![0.0; grid.dim()];
    for n in 0..grid.len() {
        if u[n] - g[n] > eps_contact {
            continue;
        }
        grid.coords_into(n, &mut y);
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= trusted && r < best {
            best = r;
        }
    }
    if !best.is_finite() {
        return Err(Error::DomainTooSmall(format!(
            "no contact node within radius {trusted} of the origin; enlarge the chart box"
        )));
    }
    let half_cell = 0.5 * grid.h() * (grid.dim() as f64).sqrt();
    Ok(RdEstimate {
        d: sol.d,
        c: sol.c.value(),
        r_d: best,
        bracket: [(best - half_cell).max(0.0), best + half_cell],
        h: grid.h(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdPairCheck {
    pub d: usize,
    /// `(d-2-1/d)·r_lo(d)²`; `None` for `d = 2`, where the relation is void.
    pub lhs: Option<f64>,
    /// `(d-2)·r_hi(d-1)²`.
    pub rhs: Option<f64>,
    pub inequality_holds: Option<bool>,
    /// `r_lo(d) > r_hi(d-1)`.
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdReport {
    pub estimates: Vec<RdEstimate>,
    pub inequality_checks: Vec<RdPairCheck>,
    pub note: Option<String>,
    pub passed: bool,
}

/// Checks `(d-2-1/d) r_d² >= (d-2) r_{d-1}²` and `r_d > r_{d-1}` for each
/// consecutive pair, one-sided through the mesh brackets.
pub fn rd_inequality_check(estimates: &[RdEstimate]) -> Result<RdReport> {
    for w in estimates.windows(2) {
        if w[1].d != w[0].d + 1 {
            return Err(Error::Dimension {
                d: w[1].d,
                reason: format!("estimates must have consecutive d, got {} then {}", w[0].d, w[1].d),
            });
        }
        if (w[1].c - w[0].c).abs() > 1e-12 * w[0].c {
            return Err(Error::InvalidParameter {
                name: "c",
                value: w[1].c,
                reason: format!("estimates mix costs {} and {}", w[0].c, w[1].c),
            });
        }
    }
    let checks: Vec<RdPairCheck> = estimates
        .windows(2)
        .map(|w| {
            let (lo, hi) = (&w[0], &w[1]);
            let d = hi.d as f64;
            let increasing = hi.bracket[0] > lo.bracket[1];
            if hi.d < 3 {
                return RdPairCheck {
                    d: hi.d,
                    lhs: None,
                    rhs: None,
                    inequality_holds: None,
                    increasing,
                };
            }
            let lhs = (d - 2.0 - 1.0 / d) * hi.bracket[0].powi(2);
            let rhs = (d - 2.0) * lo.bracket[1].powi(2);
            RdPairCheck {
                d: hi.d,
                lhs: Some(lhs),
                rhs: Some(rhs),
                inequality_holds: Some(lhs >= rhs),
                increasing,
            }
        })
        .collect();
    let note = (estimates.len() < 2).then(|| "fewer than two estimates: nothing to compare".to_string());
    let passed = checks
        .iter()
        .all(|c| c.increasing && c.inequality_holds.unwrap_or(true));
    Ok(RdReport {
        estimates: estimates.to_vec(),
        inequality_checks: checks,
        note,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperRegionReport {
    pub k: f64,
    pub gamma: f64,
    pub samples: usize,
    pub contact: usize,
    pub fraction: f64,
}

/// Fraction of interior nodes of a full solve lying in
/// `N(Kd/c) = {x_i >= 0, |x_i - x_j| >= Kd/c for i ≠ j}` that are in
/// contact.
pub fn upper_region_check(
    u: &ScalarField,
    g: &ScalarField,
    c: Cost,
    k: f64,
    eps_contact: f64,
) -> Result<UpperRegionReport> {
    let grid = u.grid();
    if grid != g.grid() {
        return Err(Error::GridMismatch);
    }
    let d = grid.dim();
    let gamma = k * d as f64 / c.value();
    let mut x = vec![0.0; d];
    let (mut samples, mut contact) = (0usize, 0usize);
    for n in 0..grid.len() {
        if grid.is_boundary(n) {
            continue;
        }
        grid.coords_into(n, &mut x);
        let inside = x.iter().all(|&v| v >= 0.0)
            && (0..d).all(|i| (i + 1..d).all(|j| (x[i] - x[j]).abs() >= gamma - 1e-9 * grid.h()));
        if inside {
            samples += 1;
            if u.get(n) - g.get(n) <= eps_contact {
                contact += 1;
            }
        }
    }
    if samples == 0 {
        return Err(Error::EmptySample(format!(
            "no interior node lies in N({gamma}); enlarge the domain or lower K"
        )));
    }
    Ok(UpperRegionReport {
        k,
        gamma,
        samples,
        contact,
        fraction: contact as f64 / samples as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub d_upper: usize,
    pub d_lower: usize,
    pub checked: usize,
    pub violations: usize,
    /// Largest `w_lower - w_upper` seen.
    pub max_deficit: f64,
    pub allowance: f64,
    pub holds: bool,
}

/// Compares `w_d` with the extension of `w_{d-1}` that ignores the extra
/// coordinate, at lower-chart nodes embedded into `ℝ^d` with the extra
/// coordinate at 0 and far below.
///
/// For `d - 1 = 1` the lower problem is taken without outside option, where
/// `w_1(x) = x`: the one-alternative value with outside option is not
/// dominated (at `x = (0, -10)`, `w_2 = 0` while `ψ(0) = 1/(16c)`).
pub fn wd_monotonicity_check(
    upper: &ChartSolution,
    lower: &ChartSolution,
    max_samples: usize,
    allowance: f64,
) -> Result<MonotonicityReport> {
    if (upper.c.value() - lower.c.value()).abs() > 1e-12 * upper.c.value() {
        return Err(Error::InvalidParameter {
            name: "c",
            value: lower.c.value(),
            reason: format!("costs differ: {} vs {}", upper.c.value(), lower.c.value()),
        });
    }
    if upper.d != lower.d && upper.d != lower.d + 1 {
        return Err(Error::Dimension {
            d: upper.d,
            reason: format!("compare d with d or d-1, got {}", lower.d),
        });
    }
    let grid = lower.grid();
    let trusted = 0.5 * grid.upper().iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&n| {
            let y = grid.coords(n);
            y.iter().map(|v| v * v).sum::<f64>().sqrt() <= trusted
        })
        .collect();
    let stride = nodes.len().div_ceil(max_samples.max(1)).max(1);
    let extras: &[f64] = if upper.d == lower.d { &[] } else { &[0.0, -1e3] };
    let mut report = MonotonicityReport {
        d_upper: upper.d,
        d_lower: lower.d,
        checked: 0,
        violations: 0,
        max_deficit: f64::NEG_INFINITY,
        allowance,
        holds: true,
    };
    let mut compare = |x: &[f64], w_lower: f64| {
        let Some(w_upper) = upper.value_at(x) else {
            return;
        };
        report.checked += 1;
        let deficit = w_lower - w_upper;
        report.max_deficit = report.max_deficit.max(deficit);
        if deficit > allowance {
            report.violations += 1;
        }
    };
    for &n in nodes.iter().step_by(stride) {
        let y = grid.coords(n);
        let x_lower = match &lower.chart {
            None => y.clone(),
            Some(chart) => chart.embed(&y),
        };
        let Some(w) = lower.value_at(&x_lower) else {
            continue;
        };
        if extras.is_empty() {
            compare(&x_lower, w);
            continue;
        }
        // One alternative without outside option is worth exactly `x_1`.
        let w_lower = if lower.chart.is_none() { x_lower[0] } else { w };
        for &z in extras {
            let mut x = x_lower.clone();
            x.push(z);
            compare(&x, w_lower);
        }
    }
    report.holds = report.violations == 0 && report.checked > 0;
    Ok(report)
}

/// Interpolation slack for comparing two chart solutions: piecewise
/// multilinear interpolation of a field with second derivatives bounded by
/// `2c` errs by at most `c·dim·h²/4`, and each discrete field sits within
/// `c h²` of the other's scheme.
pub fn monotonicity_allowance(upper: &ChartSolution, lower: &ChartSolution) -> f64 {
    let c = upper.c.value();
    let hu = upper.grid().h();
    let hl = lower.grid().h();
    c * (upper.grid().dim() as f64 * hu * hu + hl * hl) + c * hu.max(hl).powi(2)
}

/// Largest difference of `ω` between chart points related by a coordinate
/// permutation of the embedded point, over `max_samples` strided nodes.
pub fn permutation_asymmetry(sol: &ChartSolution, max_samples: usize) -> f64 {
    let Some(chart) = &sol.chart else {
        return 0.0;
    };
    let grid = sol.grid();
    let d = chart.dim();
    let stride = grid.len().div_ceil(max_samples.max(1)).max(1);
    let perms = permutations(d);
    let mut worst = 0.0f64;
    for n in (0..grid.len()).step_by(stride) {
        let y = grid.coords(n);
        let x = chart.embed(&y);
        let w0 = sol.omega().get(n);
        for p in &perms {
            let xp: Vec<f64> = p.iter().map(|&i| x[i]).collect();
            let yp = chart.project(&xp);
            if let Some(w) = interpolate_values(grid, sol.omega().values(), &yp) {
                worst = worst.max((w - w0).abs());
            }
        }
    }
    worst
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDimReport {
    pub d: usize,
    pub c: f64,
    pub r_d: f64,
    pub bracket: [f64; 2],
    pub inequality_checks: Vec<RdPairCheck>,
    pub monotonicity: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{eta_value, psi_value, RotatedPoint};
    use approx::assert_abs_diff_eq;

    fn cost(c: f64) -> Cost {
        Cost::new(c).unwrap()
    }

    #[test]
    fn charts_are_orthonormal_and_tangent() {
        for d in 2..=6 {
            let chart = build_chart(d).unwrap();
            assert_eq!(chart.basis().len(), d - 1);
            for (i, a) in chart.basis().iter().enumerate() {
                let along: f64 = a.iter().sum::<f64>() / (d as f64).sqrt();
                assert!(along.abs() < 1e-12);
                for (j, b) in chart.basis().iter().enumerate() {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
            let y: Vec<f64> = (0..d - 1).map(|k| 0.3 * k as f64 - 0.7).collect();
            let x = chart.embed(&y);
            assert!(x.iter().sum::<f64>().abs() < 1e-12);
            let back = chart.project(&x);
            for (a, b) in y.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(build_chart(1).is_err());
    }

    #[test]
    fn chart_examples() {
        let c2 = build_chart(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(c2.basis()[0][0], r, epsilon = 1e-15);
        assert_abs_diff_eq!(c2.basis()[0][1], -r, epsilon = 1e-15);
        for s in [-1.3, 0.0, 0.4] {
            assert_abs_diff_eq!(c2.rho(&[s]), s.abs() * r, epsilon = 1e-15);
        }
        let c3 = build_chart(3).unwrap();
        assert_eq!(c3.rho(&[0.0, 0.0]), 0.0);
        let a = 0.8;
        let y = c3.project(&[a, -a / 2.0, -a / 2.0]);
        assert_abs_diff_eq!(c3.rho(&y), a, epsilon = 1e-12);
    }

    #[test]
    fn two_alternative_chart_reproduces_eta() {
        let c = cost(1.0);
        let h = 1.0 / 200.0;
        let grid = default_chart_grid(2, c, h).unwrap();
        let sol = solve_wd(2, c, &grid, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.omega().at(&[0.0]).unwrap(), 0.125, epsilon = 1e-3);
        for n in 0..grid.len() {
            let s = grid.coord(n, 0);
            let exact = eta_value(RotatedPoint::new(0.0, s), 1.0).unwrap();
            assert_abs_diff_eq!(sol.omega().get(n), exact, epsilon = 1e-3);
        }
        let est = estimate_rd(&sol, sol.solution.diagnostics.contact_tol).unwrap();
        assert!((est.r_d - 0.5 / 2f64.sqrt()).abs() <= 2.0 * h, "{est:?}");
        assert!(est.bracket[0] <= est.r_d && est.r_d <= est.bracket[1]);
        assert!(est.bracket[1] - est.bracket[0] <= 2.0 * h);
    }

    #[test]
    fn one_alternative_is_psi() {
        let c = cost(1.0);
        let h = 1.0 / 200.0;
        let grid = default_chart_grid(1, c, h).unwrap();
        let sol = solve_wd(1, c, &grid, &SolverConfig::default()).unwrap();
        for x in [-0.3, 0.0, 0.1, 0.5] {
            assert_abs_diff_eq!(sol.value_at(&[x]).unwrap(), psi_value(x, c), epsilon = 1e-3);
        }
        let est = estimate_rd(&sol, sol.solution.diagnostics.contact_tol).unwrap();
        assert!((est.r_d - 0.25).abs() <= 2.0 * h);
    }

    #[test]
    fn wrong_grid_dimension_is_rejected() {
        let grid = GridSpec::cube(1, -3.0, 3.0, 0.1).unwrap();
        assert!(solve_wd(3, cost(1.0), &grid, &SolverConfig::default()).is_err());
    }

    #[test]
    fn rd_checks() {
        let est = |d, r: f64| RdEstimate {
            d,
            c: 1.0,
            r_d: r,
            bracket: [r - 0.001, r + 0.001],
            h: 0.002,
        };
        let report = rd_inequality_check(&[est(1, 0.25), est(2, 0.3536)]).unwrap();
        assert!(report.passed);
        assert_eq!(report.inequality_checks[0].inequality_holds, None);
        let report = rd_inequality_check(&[est(2, 0.3536), est(3, 0.45)]).unwrap();
        assert!(report.passed);
        let report = rd_inequality_check(&[est(2, 0.3536), est(3, 0.40)]).unwrap();
        assert!(!report.passed);
        assert_eq!(report.inequality_checks[0].inequality_holds, Some(false));
        let single = rd_inequality_check(&[est(2, 0.3536)]).unwrap();
        assert!(single.passed && single.note.is_some());
        assert!(rd_inequality_check(&[est(1, 0.25), est(3, 0.45)]).is_err());
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let mut sorted = p.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 6);
    }
}
