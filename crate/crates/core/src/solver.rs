//! Discrete obstacle problems on a grid.
//!
//! Parallel search is the linear complementarity problem
//! `min(-½Δ_h u + c, u - g) = 0`, solved by projected SOR. Sequential and
//! hybrid search replace the single operator by a minimum over actions
//!
//! ```text
//! min( u - g,  -½Δ_h u + c,  min_i(-½∂²_ii,h u + c') ) = 0
//! ```
//!
//! (parallel term only in hybrid mode). Every mode is solved by the same
//! projected nonlinear SOR: at each node take the best one-step continuation
//! value over the available actions, move towards it and project onto the
//! obstacle. The policy is read off the converged field. Over-relaxation is
//! applied only where parallel search wins: mixing single-axis stencils makes
//! the iteration matrix non-symmetric, and SOR then diverges on fine grids,
//! so those nodes take plain Gauss-Seidel steps.
//!
//! Sweeps start from `u = g` and run lexicographically, forward then
//! backward. Only nodes off the obstacle and their stencil neighbours can
//! move; the sweeps visit that active set and grow it as the continuation
//! region grows, which is exact and keeps deep contact regions out of the
//! inner loop.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{build_obstacle, BoundaryData, GridSpec, ScalarField};
use crate::mode::SearchMode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop threshold on the sup-norm change between sweeps, relative to the
    /// field scale `max(1, max |boundary data|)`.
    pub tol: f64,
    /// Stop threshold on [`lcp_residual`].
    pub residual_tol: f64,
    /// Relaxation factor in `[1, 2)`.
    pub omega: f64,
    /// Sweep budget per attempt.
    pub max_iters: usize,
    /// Nodes with `u - g` at or below this value are reported as stopped.
    /// `None` selects `max(1e-8, c_min h²)`.
    pub contact_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            residual_tol: 1e-8,
            omega: 1.7,
            max_iters: 200_000,
            contact_tol: None,
        }
    }
}

impl SolverConfig {
    /// Defaults with the residual threshold scaled by the smallest cost.
    pub fn for_mode(mode: &SearchMode) -> Self {
        Self {
            residual_tol: 1e-8 * mode.min_cost(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason: reason.into(),
            })
        };
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", self.tol, "must be positive");
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return bad("residual_tol", self.residual_tol, "must be positive");
        }
        if !(1.0..2.0).contains(&self.omega) {
            return bad("omega", self.omega, "must lie in [1, 2)");
        }
        if self.max_iters == 0 {
            return bad("max_iters", 0.0, "must be at least 1");
        }
        if let Some(t) = self.contact_tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad("contact_tol", t, "must be positive");
            }
        }
        Ok(())
    }

    pub fn contact_tol_for(&self, grid: &GridSpec, c_min: f64) -> f64 {
        self.contact_tol
            .unwrap_or_else(|| default_contact_tol(grid.h(), c_min))
    }
}

/// `max(1e-8, c h²)`: the discrete solution meets the obstacle only to within
/// the accuracy of the stencil.
pub fn default_contact_tol(h: f64, c: f64) -> f64 {
    (c * h * h).max(1e-8)
}

/// Control applied at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Stop,
    Parallel,
    /// Search only alternative `i` (zero-based axis).
    Search(usize),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Stop => f.write_str("STOP"),
            Action::Parallel => f.write_str("PARALLEL"),
            Action::Search(i) => write!(f, "SEARCH_{}", i + 1),
        }
    }
}

impl std::str::FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "STOP" => Ok(Action::Stop),
            "PARALLEL" => Ok(Action::Parallel),
            _ => s
                .strip_prefix("SEARCH_")
                .and_then(|i| i.parse::<usize>().ok())
                .filter(|&i| i >= 1)
                .map(|i| Action::Search(i - 1))
                .ok_or_else(|| Error::InvalidGrid(format!("unknown action `{s}`"))),
        }
    }
}

/// Per-node action chosen by a sequential or hybrid solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyField {
    grid: GridSpec,
    actions: Vec<Action>,
}

impl PolicyField {
    pub fn new(grid: GridSpec, actions: Vec<Action>) -> Result<Self> {
        if actions.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} actions for {} nodes",
                actions.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, actions })
    }

    /// Policy of a parallel solve: `Parallel` off the contact set.
    pub fn from_contact(mask: &crate::grid::ContactMask) -> Self {
        let actions = mask
            .flags()
            .iter()
            .map(|&c| if c { Action::Stop } else { Action::Parallel })
            .collect();
        Self {
            grid: mask.grid().clone(),
            actions,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn get(&self, node: usize) -> Action {
        self.actions[node]
    }

    pub fn count(&self, action: Action) -> usize {
        self.actions.iter().filter(|&&a| a == action).count()
    }
}

/// Iteration record of one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub mode: SearchMode,
    pub sweeps: usize,
    pub final_change: f64,
    pub final_residual: f64,
    pub omega: f64,
    pub fell_back_to_gauss_seidel: bool,
    pub active_nodes: usize,
    pub contact_tol: f64,
    pub wall_time_s: f64,
    /// Sup-norm change of every sweep, in order.
    #[serde(skip)]
    pub change_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ScalarField,
    pub obstacle: ScalarField,
    /// Present for sequential and hybrid solves.
    pub policy: Option<PolicyField>,
    pub diagnostics: SolveDiagnostics,
}

impl Solution {
    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }
}

pub fn solve_parallel(
    grid: &GridSpec,
    c: crate::analytic::Cost,
    bc: &BoundaryData,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let obstacle = build_obstacle(grid);
    solve_with_obstacle(&SearchMode::Parallel { c }, &obstacle, bc, cfg)
}

pub fn solve_sequential(
    grid: &GridSpec,
    cprime: crate::analytic::Cost,
    bc: &BoundaryData,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let obstacle = build_obstacle(grid);
    solve_with_obstacle(&SearchMode::Sequential { cprime }, &obstacle, bc, cfg)
}

pub fn solve_hybrid(
    grid: &GridSpec,
    c: crate::analytic::Cost,
    cprime: crate::analytic::Cost,
    bc: &BoundaryData,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let mode = SearchMode::hybrid(c.value(), cprime.value())?;
    let obstacle = build_obstacle(grid);
    solve_with_obstacle(&mode, &obstacle, bc, cfg)
}

/// Solves with the payoff `g` for any mode.
pub fn solve(mode: &SearchMode, grid: &GridSpec, bc: &BoundaryData, cfg: &SolverConfig) -> Result<Solution> {
    solve_with_obstacle(mode, &build_obstacle(grid), bc, cfg)
}

/// Solves against an arbitrary obstacle field (the payoff need not be `g`).
pub fn solve_with_obstacle(
    mode: &SearchMode,
    obstacle: &ScalarField,
    bc: &BoundaryData,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    if let SearchMode::Hybrid { c, cprime } = *mode {
        SearchMode::hybrid(c.value(), cprime.value())?;
    }
    let grid = obstacle.grid();
    if grid.dim() > 4 {
        return Err(Error::Dimension {
            d: grid.dim(),
            reason: "grid solvers support at most 4 axes".into(),
        });
    }
    let g = obstacle.values();
    let mut u = g.to_vec();
    apply_boundary(grid, g, bc, &mut u)?;

    let scale = bc
        .values
        .iter()
        .chain(g.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let started = Instant::now();
    let problem = Problem {
        grid,
        g,
        mode: *mode,
        change_tol: cfg.tol * scale,
        residual_tol: cfg.residual_tol,
        max_iters: cfg.max_iters,
    };

    let first = problem.run(u.clone(), cfg.omega);
    let (outcome, fell_back) = match first {
        Ok(o) => (o, false),
        Err(e) if cfg.omega != 1.0 => {
            log::warn!("{mode}: omega = {} failed ({e}); retrying with Gauss-Seidel", cfg.omega);
            (problem.run(u.clone(), 1.0)?, true)
        }
        Err(e) => return Err(e),
    };
    u = outcome.u;

    let c_min = mode.min_cost();
    let contact_tol = cfg.contact_tol_for(grid, c_min);
    let policy = match mode {
        SearchMode::Parallel { .. } => None,
        _ => Some(PolicyField {
            grid: grid.clone(),
            actions: extract_policy(grid, &u, g, mode, contact_tol, cfg.residual_tol),
        }),
    };

    let diagnostics = SolveDiagnostics {
        mode: *mode,
        sweeps: outcome.sweeps,
        final_change: outcome.final_change,
        final_residual: outcome.final_residual,
        omega: if fell_back { 1.0 } else { cfg.omega },
        fell_back_to_gauss_seidel: fell_back,
        active_nodes: outcome.active_nodes,
        contact_tol,
        wall_time_s: started.elapsed().as_secs_f64(),
        change_history: outcome.history,
    };
    log::info!(
        "{mode}: {} sweeps, residual {:.2e}, {:.2}s",
        diagnostics.sweeps,
        diagnostics.final_residual,
        diagnostics.wall_time_s
    );
    Ok(Solution {
        u: ScalarField::from_parts_unchecked(grid.clone(), u),
        obstacle: obstacle.clone(),
        policy,
        diagnostics,
    })
}

fn apply_boundary(grid: &GridSpec, g: &[f64], bc: &BoundaryData, u: &mut [f64]) -> Result<()> {
    let expected = grid.boundary_nodes();
    if bc.nodes.len() != bc.values.len() || bc.nodes.len() != expected.len() {
        return Err(Error::IncompleteBoundary {
            given: bc.nodes.len().min(bc.values.len()),
            expected: expected.len(),
        });
    }
    let mut seen = vec![false; grid.len()];
    for (&n, &v) in bc.nodes.iter().zip(&bc.values) {
        if n >= grid.len() || !grid.is_boundary(n) || seen[n] {
            return Err(Error::IncompleteBoundary {
                given: bc.nodes.len(),
                expected: expected.len(),
            });
        }
        seen[n] = true;
        if !v.is_finite() || v < g[n] {
            return Err(Error::BoundaryBelowObstacle {
                node: n,
                value: v,
                obstacle: g[n],
            });
        }
        u[n] = v;
    }
    Ok(())
}

/// Max over interior nodes of `|min(L_a u for available a, u - g)|`, with
/// `L_par = -½Δ_h + c` and `L_i = -½∂²_ii,h + c'`.
pub fn lcp_residual(field: &ScalarField, obstacle: &ScalarField, mode: &SearchMode) -> Result<f64> {
    if field.grid() != obstacle.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = field.grid();
    let interior = grid.interior_nodes();
    Ok(residual_over(grid, field.values(), obstacle.values(), mode, interior.iter().copied()))
}

fn residual_over(
    grid: &GridSpec,
    u: &[f64],
    g: &[f64],
    mode: &SearchMode,
    nodes: impl Iterator<Item = u32>,
) -> f64 {
    let ops = Operators::new(grid, mode);
    let mut worst = 0.0f64;
    for n in nodes {
        let n = n as usize;
        let r = ops.min_operator(u, n).min(u[n] - g[n]);
        worst = worst.max(r.abs());
    }
    worst
}

/// Pointwise operator evaluations shared by the residual and policy code.
struct Operators<'a> {
    strides: &'a [usize],
    inv_h2: f64,
    par_cost: Option<f64>,
    single_cost: Option<f64>,
}

impl<'a> Operators<'a> {
    fn new(grid: &'a GridSpec, mode: &SearchMode) -> Self {
        Self {
            strides: grid.strides(),
            inv_h2: 1.0 / (grid.h() * grid.h()),
            par_cost: mode.parallel_cost(),
            single_cost: mode.single_cost(),
        }
    }

    #[inline]
    fn axis_second(&self, u: &[f64], n: usize, k: usize) -> f64 {
        let s = self.strides[k];
        (u[n + s] - 2.0 * u[n] + u[n - s]) * self.inv_h2
    }

    /// `(min_a L_a u, argmin)` with ties going to `Parallel`, then the lowest axis.
    #[inline]
    fn best(&self, u: &[f64], n: usize) -> (f64, Action) {
        let mut best = (f64::INFINITY, Action::Stop);
        if let Some(c) = self.par_cost {
            let lap: f64 = (0..self.strides.len()).map(|k| self.axis_second(u, n, k)).sum();
            best = (c - 0.5 * lap, Action::Parallel);
        }
        if let Some(cp) = self.single_cost {
            for k in 0..self.strides.len() {
                let v = cp - 0.5 * self.axis_second(u, n, k);
                if v < best.0 {
                    best = (v, Action::Search(k));
                }
            }
        }
        best
    }

    #[inline]
    fn min_operator(&self, u: &[f64], n: usize) -> f64 {
        self.best(u, n).0
    }
}

/// Operators within `tie_tol` of the minimum count as tied. Among tied
/// actions `Parallel` wins; among tied searches the alternative with the
/// largest coordinate wins, then the lowest axis. Where the value is locally
/// `(x_1+x_2)/2 + c'(x_1-x_2)^2` both single-axis operators vanish exactly.
fn extract_policy(
    grid: &GridSpec,
    u: &[f64],
    g: &[f64],
    mode: &SearchMode,
    contact_tol: f64,
    tie_tol: f64,
) -> Vec<Action> {
    let ops = Operators::new(grid, mode);
    let d = grid.dim();
    let mut x = vec![0.0; d];
    (0..grid.len())
        .map(|n| {
            if u[n] - g[n] <= contact_tol {
                return Action::Stop;
            }
            grid.coords_into(n, &mut x);
            if grid.is_boundary(n) {
                // Dirichlet nodes carry no equation; report the far-field choice.
                return match mode {
                    SearchMode::Sequential { .. } => Action::Search(argmax(&x, 0..d)),
                    _ => Action::Parallel,
                };
            }
            let (min, _) = ops.best(u, n);
            if let Some(c) = ops.par_cost {
                let lap: f64 = (0..d).map(|k| ops.axis_second(u, n, k)).sum();
                if c - 0.5 * lap <= min + tie_tol {
                    return Action::Parallel;
                }
            }
            let cp = ops.single_cost.expect("non-parallel modes have a search cost");
            let tied = (0..d).filter(|&k| cp - 0.5 * ops.axis_second(u, n, k) <= min + tie_tol);
            Action::Search(argmax(&x, tied))
        })
        .collect()
}

fn argmax(x: &[f64], candidates: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for k in candidates {
        if best.is_none_or(|b| x[k] > x[b]) {
            best = Some(k);
        }
    }
    best.unwrap_or(0)
}

struct Problem<'a> {
    grid: &'a GridSpec,
    g: &'a [f64],
    mode: SearchMode,
    change_tol: f64,
    residual_tol: f64,
    max_iters: usize,
}

struct Outcome {
    u: Vec<f64>,
    sweeps: usize,
    final_change: f64,
    final_residual: f64,
    active_nodes: usize,
    history: Vec<f64>,
}

/// Sorted set of interior nodes the sweeps visit.
struct ActiveSet {
    list: Vec<u32>,
    member: Vec<bool>,
    pending: Vec<u32>,
}

impl ActiveSet {
    fn all(grid: &GridSpec) -> Self {
        let list = grid.interior_nodes();
        let mut member = vec![false; grid.len()];
        for &n in &list {
            member[n as usize] = true;
        }
        Self {
            list,
            member,
            pending: Vec::new(),
        }
    }

    fn from_nodes(grid: &GridSpec, seeds: impl Iterator<Item = usize>) -> Self {
        let mut set = Self {
            list: Vec::new(),
            member: vec![false; grid.len()],
            pending: Vec::new(),
        };
        for n in seeds {
            set.add_with_neighbours(grid, n);
        }
        set.merge();
        set
    }

    #[inline]
    fn add_with_neighbours(&mut self, grid: &GridSpec, n: usize) {
        self.push(grid, n);
        for &s in grid.strides() {
            if n >= s {
                self.push(grid, n - s);
            }
            if n + s < grid.len() {
                self.push(grid, n + s);
            }
        }
    }

    #[inline]
    fn push(&mut self, grid: &GridSpec, n: usize) {
        if !self.member[n] && !grid.is_boundary(n) {
            self.member[n] = true;
            self.pending.push(n as u32);
        }
    }

    /// Folds pending nodes into the sorted list; returns how many were added.
    fn merge(&mut self) -> usize {
        let added = self.pending.len();
        if added > 0 {
            self.list.append(&mut self.pending);
            self.list.sort_unstable();
        }
        added
    }
}

impl Problem<'_> {
    fn run(&self, u: Vec<f64>, omega: f64) -> Result<Outcome> {
        match self.grid.dim() {
            1 => self.run_psor::<1>(u, omega),
            2 => self.run_psor::<2>(u, omega),
            3 => self.run_psor::<3>(u, omega),
            _ => self.run_psor::<4>(u, omega),
        }
    }

    fn strides<const D: usize>(&self) -> [usize; D] {
        let mut s = [0; D];
        s.copy_from_slice(self.grid.strides());
        s
    }

    fn diverged(&self, change: f64) -> bool {
        !change.is_finite() || change > 1e8 * self.change_tol.max(1.0)
    }

    /// Projected SOR on `u = max(g, max_a F_a(u))`, where `F_a` is the value
    /// of continuing one step with action `a`. With parallel search alone this
    /// is the classical projected SOR for the complementarity problem.
    fn run_psor<const D: usize>(&self, mut u: Vec<f64>, omega: f64) -> Result<Outcome> {
        let strides = self.strides::<D>();
        let g = self.g;
        let h2 = self.grid.h() * self.grid.h();
        let par_shift = self.mode.parallel_cost().map(|c| c * h2 / D as f64);
        let single_shift = self.mode.single_cost().map(|c| c * h2);
        let inv = 1.0 / (2 * D) as f64;
        let mut active = ActiveSet::all(self.grid);
        let mut history = Vec::new();
        let mut raised: Vec<u32> = Vec::new();
        let mut residual = f64::INFINITY;
        let mut next_residual_check = 0usize;

        for sweep in 0..self.max_iters {
            let forward = sweep % 2 == 0;
            raised.clear();
            let mut change = 0.0f64;
            let mut relax = |n: u32| {
                let i = n as usize;
                let mut target = f64::NEG_INFINITY;
                let mut step = omega;
                if let Some(shift) = par_shift {
                    let mut sum = 0.0;
                    for &s in &strides {
                        sum += u[i - s] + u[i + s];
                    }
                    target = sum * inv - shift;
                }
                if let Some(shift) = single_shift {
                    for &s in &strides {
                        let v = 0.5 * (u[i - s] + u[i + s]) - shift;
                        if v > target {
                            target = v;
                            step = 1.0;
                        }
                    }
                }
                let old = u[i];
                let mut new = old + step * (target - old);
                if new < g[i] {
                    new = g[i];
                }
                let delta = (new - old).abs();
                if delta > change {
                    change = delta;
                }
                if old == g[i] && new > g[i] {
                    raised.push(n);
                }
                u[i] = new;
            };
            if forward {
                active.list.iter().copied().for_each(&mut relax);
            } else {
                active.list.iter().rev().copied().for_each(&mut relax);
            }
            history.push(change);
            if self.diverged(change) {
                return Err(Error::NotConverged {
                    iterations: sweep + 1,
                    change,
                    residual,
                });
            }

            if sweep == 0 {
                let grid = self.grid;
                active = ActiveSet::from_nodes(
                    grid,
                    grid.interior_nodes()
                        .into_iter()
                        .map(|n| n as usize)
                        .filter(|&n| u[n] > g[n]),
                );
                continue;
            }
            for &n in &raised {
                active.add_with_neighbours(self.grid, n as usize);
            }
            let grew = active.merge() > 0;

            if change <= self.change_tol && !grew && sweep >= next_residual_check {
                residual = residual_over(
                    self.grid,
                    &u,
                    g,
                    &self.mode,
                    active.list.iter().copied(),
                );
                if residual <= self.residual_tol {
                    return Ok(Outcome {
                        u,
                        sweeps: sweep + 1,
                        final_change: change,
                        final_residual: residual,
                        active_nodes: active.list.len(),
                        history,
                    });
                }
                next_residual_check = sweep + 16;
            }
        }
        Err(Error::NotConverged {
            iterations: self.max_iters,
            change: history.last().copied().unwrap_or(f64::NAN),
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{psi_value, Cost};
    use crate::grid::{truncation_boundary_values, GridSpec};
    use approx::assert_abs_diff_eq;

    fn cost(c: f64) -> Cost {
        Cost::new(c).unwrap()
    }

    /// Midpoints between neighbouring stopped and continuing nodes of a 1-D grid.
    fn interface_points(grid: &GridSpec, stopped: impl Fn(usize) -> bool) -> Vec<f64> {
        (1..grid.len())
            .filter(|&n| stopped(n) != stopped(n - 1))
            .map(|n| 0.5 * (grid.coord(n - 1, 0) + grid.coord(n, 0)))
            .collect()
    }

    fn solve_1d(c: f64, lo: f64, hi: f64, h: f64, cfg: &SolverConfig) -> Solution {
        let grid = GridSpec::cube(1, lo, hi, h).unwrap();
        let mode = SearchMode::parallel(c).unwrap();
        let bc = truncation_boundary_values(&grid, &mode).unwrap();
        solve_parallel(&grid, cost(c), &bc, cfg).unwrap()
    }

    #[test]
    fn one_dimensional_smooth_pasting() {
        let h = 1.0 / 200.0;
        let sol = solve_1d(1.0, -2.0, 2.0, h, &SolverConfig::default());
        let u = &sol.u;
        assert_abs_diff_eq!(u.at(&[0.0]).unwrap(), 0.0625, epsilon = 5e-4);
        let tol = sol.diagnostics.contact_tol;
        let g = &sol.obstacle;
        let grid = u.grid();
        let edges = interface_points(grid, |n| u.get(n) - g.get(n) <= tol);
        assert_eq!(edges.len(), 2, "{edges:?}");
        assert!((edges[0] + 0.25).abs() <= 2.0 * h, "left edge {}", edges[0]);
        assert!((edges[1] - 0.25).abs() <= 2.0 * h, "right edge {}", edges[1]);
        assert!(sol.diagnostics.final_residual <= 1e-8);
    }

    #[test]
    fn matches_psi_everywhere_in_1d() {
        let sol = solve_1d(2.0, -1.0, 1.0, 1.0 / 400.0, &SolverConfig::default());
        let grid = sol.grid().clone();
        for n in 0..grid.len() {
            let x = grid.coord(n, 0);
            assert_abs_diff_eq!(sol.u.get(n), psi_value(x, cost(2.0)), epsilon = 2e-4);
        }
    }

    #[test]
    fn sequential_equals_parallel_in_one_dimension() {
        let h = 1.0 / 100.0;
        let grid = GridSpec::cube(1, -1.5, 1.5, h).unwrap();
        let par = SearchMode::parallel(1.0).unwrap();
        let seq = SearchMode::sequential(1.0).unwrap();
        let cfg = SolverConfig::default();
        let a = solve(&par, &grid, &truncation_boundary_values(&grid, &par).unwrap(), &cfg).unwrap();
        let b = solve(&seq, &grid, &truncation_boundary_values(&grid, &seq).unwrap(), &cfg).unwrap();
        for n in 0..grid.len() {
            assert_abs_diff_eq!(a.u.get(n), b.u.get(n), epsilon = 1e-9);
        }
        let policy = b.policy.unwrap();
        let edges = interface_points(&grid, |n| policy.get(n) == Action::Stop);
        assert_eq!(edges.len(), 2, "{edges:?}");
        assert!((edges[0] + 0.25).abs() <= 2.0 * h);
        assert!((edges[1] - 0.25).abs() <= 2.0 * h);
        assert_eq!(policy.count(Action::Search(0)), grid.len() - policy.count(Action::Stop));
        assert_eq!(policy.count(Action::Parallel), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = GridSpec::cube(1, -2.0, 2.0, 0.1).unwrap();
        let mode = SearchMode::parallel(1.0).unwrap();
        let mut bc = truncation_boundary_values(&grid, &mode).unwrap();
        let cfg = SolverConfig::default();

        let bad = SolverConfig { omega: 2.0, ..cfg };
        assert!(solve_parallel(&grid, cost(1.0), &bc, &bad).is_err());

        bc.values[0] = -5.0;
        assert!(matches!(
            solve_parallel(&grid, cost(1.0), &bc, &cfg),
            Err(Error::BoundaryBelowObstacle { .. })
        ));
        bc.values.pop();
        bc.nodes.pop();
        assert!(matches!(
            solve_parallel(&grid, cost(1.0), &bc, &cfg),
            Err(Error::IncompleteBoundary { .. })
        ));
        assert!(SearchMode::hybrid(1.0, 0.4).is_err());
    }

    #[test]
    fn non_convergence_reports_residual() {
        let grid = GridSpec::cube(1, -2.0, 2.0, 0.01).unwrap();
        let mode = SearchMode::parallel(1.0).unwrap();
        let bc = truncation_boundary_values(&grid, &mode).unwrap();
        let cfg = SolverConfig {
            max_iters: 5,
            ..SolverConfig::default()
        };
        match solve_parallel(&grid, cost(1.0), &bc, &cfg) {
            Err(Error::NotConverged { iterations, .. }) => assert_eq!(iterations, 5),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn residual_of_obstacle_is_large_near_kinks() {
        // u = g is not a solution: across the kink of max{x1,x2} the discrete
        // Laplacian grows like 1/h.
        let h = 0.05;
        let grid = GridSpec::cube(2, -1.0, 2.0, h).unwrap();
        let g = build_obstacle(&grid);
        let mode = SearchMode::parallel(1.0).unwrap();
        let r = lcp_residual(&g, &g, &mode).unwrap();
        // Oracle: at a diagonal node (x, x), x > 0, the stencil sees
        // u(x±h, x) and u(x, x±h): Δ_h g = (h + h)/h² = 2/h, so
        // min(-½Δ_h g + c, 0) = c - 1/h.
        let node = grid.node_at(&[1.0, 1.0]).unwrap();
        let lap = crate::grid::discrete_laplacian(&g, node).unwrap();
        assert_abs_diff_eq!(lap, 2.0 / h, epsilon = 1e-9);
        assert_abs_diff_eq!(r, 1.0 / h - 1.0, epsilon = 1e-9);
    }

    #[test]
    fn residual_of_psi_samples() {
        let h = 1.0 / 100.0;
        let grid = GridSpec::cube(1, -1.0, 1.0, h).unwrap();
        let c = cost(1.0);
        let f = ScalarField::from_fn(&grid, |x| psi_value(x[0], c));
        let g = build_obstacle(&grid);
        let mode = SearchMode::parallel(1.0).unwrap();
        // Away from the junctions ±1/4 (on grid nodes here) the residual
        // vanishes up to rounding; at the junction nodes the one-sided
        // curvature jump gives |min(c - ½·c, 0)| = 0 since u = g there.
        let r = lcp_residual(&f, &g, &mode).unwrap();
        assert!(r <= 1e-9, "{r}");
        // Shift the junction off the grid: the kink at x=0 contributes c·h
        // order error at the nodes adjacent to ±1/(4c).
        let c2 = cost(1.1);
        let f2 = ScalarField::from_fn(&grid, |x| psi_value(x[0], c2));
        let r2 = lcp_residual(&f2, &g, &SearchMode::parallel(1.1).unwrap()).unwrap();
        assert!(r2 <= 1.1 + 1e-9, "{r2}");
    }

    #[test]
    fn gauss_seidel_changes_are_non_increasing() {
        let grid = GridSpec::cube(2, -1.0, 2.0, 1.0 / 20.0).unwrap();
        let mode = SearchMode::parallel(1.0).unwrap();
        let bc = truncation_boundary_values(&grid, &mode).unwrap();
        let cfg = SolverConfig {
            omega: 1.0,
            ..SolverConfig::default()
        };
        let sol = solve_parallel(&grid, cost(1.0), &bc, &cfg).unwrap();
        let h = &sol.diagnostics.change_history;
        for w in h[10..].windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn action_round_trips_through_text() {
        for a in [Action::Stop, Action::Parallel, Action::Search(0), Action::Search(2)] {
            assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
        }
        assert_eq!(Action::Search(0).to_string(), "SEARCH_1");
        assert!("SEARCH_0".parse::<Action>().is_err());
    }
}
