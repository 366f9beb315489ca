//! Path simulation of solved stopping rules and a finite-horizon lattice
//! dynamic program used as an independent value oracle.
//!
//! Each path draws from its own ChaCha8 stream selected by the path index,
//! so estimates do not depend on thread scheduling and adding paths leaves
//! existing ones untouched. Stopping is checked once per step by nearest-node
//! lookup; there is no bridge correction, so first entry is detected late by
//! `O(√dt)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::grid::{obstacle_value, ContactMask, GridSpec};
use crate::mode::SearchMode;
use crate::solver::{Action, PolicyField};

/// Default simulation horizon multiple: paths still running at `50/c` are
/// stopped and paid `g`.
pub const T_CAP_FACTOR: f64 = 50.0;

/// Forced-stop fraction above which an estimate carries a warning.
pub const FORCED_STOP_WARNING: f64 = 0.01;

/// What a simulated searcher does at each grid node.
#[derive(Debug, Clone, Copy)]
pub enum StoppingRule<'a> {
    /// Parallel search everywhere outside the contact set.
    Mask(&'a ContactMask),
    /// Per-node action from a sequential or hybrid solve.
    Policy(&'a PolicyField),
}

impl StoppingRule<'_> {
    fn grid(&self) -> &GridSpec {
        match self {
            StoppingRule::Mask(m) => m.grid(),
            StoppingRule::Policy(p) => p.grid(),
        }
    }

    #[inline]
    fn action(&self, node: usize) -> Action {
        match self {
            StoppingRule::Mask(m) => {
                if m.is_contact(node) {
                    Action::Stop
                } else {
                    Action::Parallel
                }
            }
            StoppingRule::Policy(p) => p.get(node),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    /// `None` selects `50 / c_min`.
    pub t_cap: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            paths: 200_000,
            seed: 42,
            t_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub x0: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `√paths`.
    pub stderr: f64,
    pub mean_tau: f64,
    pub paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub t_cap: f64,
    pub forced_stop_fraction: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct PathResult {
    payoff: f64,
    tau: f64,
    forced: bool,
}

/// Simulates the controlled payoff process from `x0` until the rule says
/// stop, paying `g` at the stopping state minus the accrued search cost.
///
/// Parallel search moves every coordinate by `√dt·N(0,1)` at cost `c·dt`;
/// searching alternative `i` moves only coordinate `i` at cost `c'·dt`.
/// Positions outside the grid use the rule at the nearest face node.
pub fn simulate_stopping(
    x0: &[f64],
    rule: StoppingRule<'_>,
    mode: &SearchMode,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    let grid = rule.grid();
    let dt = positive("dt", cfg.dt)?;
    if cfg.paths == 0 {
        return Err(Error::InvalidParameter {
            name: "paths",
            value: 0.0,
            reason: "must be at least 1".into(),
        });
    }
    if x0.len() != grid.dim() || !grid.contains(x0) {
        return Err(Error::OutsideGrid);
    }
    let t_cap = match cfg.t_cap {
        Some(t) => positive("t_cap", t)?,
        None => T_CAP_FACTOR / mode.min_cost(),
    };
    let par_cost = mode.parallel_cost();
    let single_cost = mode.single_cost();
    if let StoppingRule::Policy(p) = rule {
        let needs_par = p.actions().contains(&Action::Parallel);
        let needs_single = p.actions().iter().any(|a| matches!(a, Action::Search(_)));
        if (needs_par && par_cost.is_none()) || (needs_single && single_cost.is_none()) {
            return Err(Error::InvalidParameter {
                name: "mode",
                value: f64::NAN,
                reason: format!("policy uses actions that {mode} does not price"),
            });
        }
    }
    let max_steps = (t_cap / dt).ceil() as u64;
    let sqrt_dt = dt.sqrt();

    let run = |path: usize| -> PathResult {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(path as u64);
        let mut x = x0.to_vec();
        let mut cost = 0.0;
        for step in 0..max_steps {
            let node = clamped_node(grid, &x);
            match rule.action(node) {
                Action::Stop => {
                    return PathResult {
                        payoff: obstacle_value(&x) - cost,
                        tau: step as f64 * dt,
                        forced: false,
                    }
                }
                Action::Parallel => {
                    for xi in x.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *xi += sqrt_dt * z;
                    }
                    cost += par_cost.unwrap_or(0.0) * dt;
                }
                Action::Search(i) => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x[i] += sqrt_dt * z;
                    cost += single_cost.unwrap_or(0.0) * dt;
                }
            }
        }
        PathResult {
            payoff: obstacle_value(&x) - cost,
            tau: max_steps as f64 * dt,
            forced: true,
        }
    };

    let results: Vec<PathResult> = (0..cfg.paths).into_par_iter().map(run).collect();
    let n = results.len() as f64;
    let payoffs: Vec<f64> = results.iter().map(|r| r.payoff).collect();
    let taus: Vec<f64> = results.iter().map(|r| r.tau).collect();
    let mean = pairwise_sum(&payoffs) / n;
    let sq: Vec<f64> = payoffs.iter().map(|p| (p - mean) * (p - mean)).collect();
    let var = if results.len() > 1 {
        pairwise_sum(&sq) / (n - 1.0)
    } else {
        0.0
    };
    let forced = results.iter().filter(|r| r.forced).count() as f64 / n;
    let warning = (forced > FORCED_STOP_WARNING).then(|| {
        format!(
            "{:.2}% of paths reached t_cap = {t_cap} and were stopped early; the estimate is biased low",
            100.0 * forced
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(SimEstimate {
        x0: x0.to_vec(),
        mean,
        stderr: (var / n).sqrt(),
        mean_tau: pairwise_sum(&taus) / n,
        paths: cfg.paths,
        seed: cfg.seed,
        dt,
        t_cap,
        forced_stop_fraction: forced,
        warning,
    })
}

#[inline]
fn clamped_node(grid: &GridSpec, x: &[f64]) -> usize {
    let mut node = 0;
    for (k, &v) in x.iter().enumerate() {
        let f = ((v - grid.lower()[k]) / grid.h()).round();
        let i = f.clamp(0.0, (grid.counts()[k] - 1) as f64) as usize;
        node += i * grid.strides()[k];
    }
    node
}

/// Summation tree over halves; the result depends only on the order of
/// `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Largest lattice, in cells, the dynamic program may allocate.
    pub max_cells: usize,
    /// Truncate the lattice to `|x_i - x0_i| <= half_width`; walks reaching
    /// the edge are stopped there, which makes the result a lower bound.
    pub half_width: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_cells: 1 << 25,
            half_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// Start point moved onto the lattice `hℤ^d`.
    pub snapped: Vec<f64>,
    pub snap_distance: f64,
    pub steps: usize,
    pub h: f64,
    pub truncated: bool,
}

/// Backward induction for the lattice walk: each period every coordinate
/// moves `±h` independently with probability ½, the period costs `c·h²`, and
/// `V_k = max(g, E[V_{k+1}] - c·h²)` with `V_steps = g`. Returns `V_0` at
/// the lattice point nearest `x0`.
pub fn finite_horizon_oracle(
    x0: &[f64],
    c: crate::analytic::Cost,
    h: f64,
    steps: usize,
    cfg: &OracleConfig,
) -> Result<OracleValue> {
    let h = positive("h", h)?;
    let d = x0.len();
    if d == 0 || d > 4 {
        return Err(Error::Dimension {
            d,
            reason: "the lattice oracle handles 1 to 4 alternatives".into(),
        });
    }
    let snapped: Vec<f64> = x0.iter().map(|&v| (v / h).round() * h).collect();
    let snap_distance = x0
        .iter()
        .zip(&snapped)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let mut out = OracleValue {
        value: obstacle_value(&snapped),
        snapped: snapped.clone(),
        snap_distance,
        steps,
        h,
        truncated: false,
    };
    if steps == 0 {
        return Ok(out);
    }

    let cone = steps;
    let radius = match cfg.half_width {
        Some(w) => {
            let w = positive("half_width", w)?;
            ((w / h).floor() as usize).clamp(1, cone)
        }
        None => cone,
    };
    let truncated = radius < cone;
    let side = 2 * radius + 1;
    let cells = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(side));
    match cells {
        Some(n) if n <= cfg.max_cells => {}
        _ => {
            let fit = ((cfg.max_cells as f64).powf(1.0 / d as f64) as usize).saturating_sub(1) / 2;
            return Err(Error::LatticeTooLarge {
                cells: cells.unwrap_or(usize::MAX),
                budget: cfg.max_cells,
                suggestion: format!(
                    "use at most {fit} steps, a coarser h, or truncate the lattice to a half-width of at most {:.4}",
                    fit as f64 * h
                ),
            });
        }
    }
    let cells = cells.unwrap_or(0);
    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * side;
    }
    let offsets: Vec<isize> = (0..(1usize << d))
        .map(|m| {
            (0..d)
                .map(|k| {
                    let s = strides[k] as isize;
                    if m >> k & 1 == 1 {
                        s
                    } else {
                        -s
                    }
                })
                .sum()
        })
        .collect();
    let weight = 1.0 / offsets.len() as f64;
    let step_cost = c.value() * h * h;

    let mut payoff = vec![0.0; cells];
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    for (n, p) in payoff.iter_mut().enumerate() {
        decompose(n, &strides, side, &mut idx);
        for k in 0..d {
            x[k] = snapped[k] + (idx[k] as f64 - radius as f64) * h;
        }
        *p = obstacle_value(&x);
    }
    let mut next = payoff.clone();
    let mut current = payoff.clone();

    for k in (0..steps).rev() {
        // V_k is needed only where the walk can be after k periods.
        let reach = k.min(radius);
        let lo = radius - reach;
        let hi = radius + reach;
        // Edge cells are only visited once the walk can reach the truncation.
        for_each_in_box(d, lo, hi, side - 1, &strides, |n, on_edge| {
            current[n] = if on_edge {
                payoff[n]
            } else {
                let mut e = 0.0;
                for &o in &offsets {
                    e += next[(n as isize + o) as usize];
                }
                payoff[n].max(e * weight - step_cost)
            };
        });
        std::mem::swap(&mut current, &mut next);
    }
    let centre: usize = strides.iter().map(|s| s * radius).sum();
    out.value = next[centre];
    out.truncated = truncated;
    Ok(out)
}

fn decompose(mut n: usize, strides: &[usize], side: usize, idx: &mut [usize]) {
    for (k, &s) in strides.iter().enumerate() {
        idx[k] = n / s;
        n %= s;
        debug_assert!(idx[k] < side);
    }
}

/// Visits every lattice cell with all indices in `[lo, hi]`, flagging cells
/// on the faces of the full lattice `[0, last]^d`.
fn for_each_in_box(d: usize, lo: usize, hi: usize, last: usize, strides: &[usize], mut f: impl FnMut(usize, bool)) {
    let mut idx = vec![lo; d];
    loop {
        let n: usize = idx.iter().zip(strides).map(|(i, s)| i * s).sum();
        let on_edge = idx.iter().any(|&i| i == 0 || i == last);
        f(n, on_edge);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if idx[k] < hi {
                idx[k] += 1;
                break;
            }
            idx[k] = lo;
        }
    }
}
