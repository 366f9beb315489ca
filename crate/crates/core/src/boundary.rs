//! Contact sets, the free boundary between stopping and continuation, and
//! geometric diagnostics of solved fields: axis band widths, the diagonal
//! channel profile `s*(t)`, its distance `d_FB(T)` to the asymptote, star
//! shape of the contact set and inclusion between continuation regions.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::io::Write;

use crate::analytic::{dfb_upper_bound, Cost};
use crate::error::{Error, Result};
use crate::grid::{interpolate_values, ContactMask, GridSpec, ScalarField};

/// Dilations tested by [`star_shaped_check`].
pub const STAR_FACTORS: [f64; 3] = [1.1, 1.5, 2.0];

/// Default cap on the number of contact nodes sampled for star shape.
pub const STAR_SAMPLE_CAP: usize = 10_000;

/// Marks nodes with `u - g <= eps_contact`.
pub fn contact_set(u: &ScalarField, g: &ScalarField, eps_contact: f64) -> Result<ContactMask> {
    if u.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    if !(eps_contact > 0.0 && eps_contact.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eps_contact",
            value: eps_contact,
            reason: "must be positive".into(),
        });
    }
    let flags = u
        .values()
        .iter()
        .zip(g.values())
        .map(|(&a, &b)| a - b <= eps_contact)
        .collect();
    ContactMask::new(u.grid().clone(), flags)
}

fn for_each_neighbour(grid: &GridSpec, node: usize, mut f: impl FnMut(usize)) {
    for k in 0..grid.dim() {
        let i = grid.axis_index(node, k);
        let s = grid.strides()[k];
        if i > 0 {
            f(node - s);
        }
        if i + 1 < grid.counts()[k] {
            f(node + s);
        }
    }
}

/// Free boundary nodes: contact nodes with at least one contact and at least
/// one non-contact axis neighbour.
pub fn free_boundary_nodes(mask: &ContactMask) -> Vec<usize> {
    let grid = mask.grid();
    (0..grid.len())
        .filter(|&n| mask.is_contact(n))
        .filter(|&n| {
            let (mut open, mut closed) = (false, false);
            for_each_neighbour(grid, n, |m| {
                if mask.is_contact(m) {
                    closed = true;
                } else {
                    open = true;
                }
            });
            open && closed
        })
        .collect()
}

/// Writes the coordinates of the free boundary nodes, one per row.
pub fn write_boundary_csv<W: Write>(mut out: W, mask: &ContactMask) -> std::io::Result<()> {
    let grid = mask.grid();
    let header: Vec<String> = (1..=grid.dim()).map(|k| format!("x{k}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut x = vec![0.0; grid.dim()];
    for n in free_boundary_nodes(mask) {
        grid.coords_into(n, &mut x);
        let row: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarViolation {
    pub point: Vec<f64>,
    pub factor: f64,
    /// Interpolated `u - g` at the dilated point.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarShapedReport {
    /// Contact nodes sampled.
    pub checked: usize,
    /// Dilated points that fell inside the box and were tested.
    pub tested: usize,
    pub allowance: f64,
    pub violations: Vec<StarViolation>,
}

impl StarShapedReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Interpolation slack for star-shape tests: a point one cell diagonal away
/// from the contact set sits at most about `c (h√d)²` above the obstacle.
pub fn star_interpolation_allowance(grid: &GridSpec, c: Cost) -> f64 {
    c.value() * grid.dim() as f64 * grid.h() * grid.h()
}

/// Checks that dilating contact nodes away from the origin stays in contact.
///
/// Samples contact nodes in the middle 60% of the box on every axis (the
/// outer shell feels the truncation data), thinned by a fixed stride to at
/// most `max_samples`. Each sample `x` is tested at `τx` for `τ` in
/// [`STAR_FACTORS`] whenever `τx` lies in the box: the interpolated
/// `u - g` there must not exceed `eps_contact + allowance`.
pub fn star_shaped_check(
    mask: &ContactMask,
    u: &ScalarField,
    g: &ScalarField,
    max_samples: usize,
    eps_contact: f64,
    allowance: f64,
) -> Result<StarShapedReport> {
    let grid = mask.grid();
    if u.grid() != grid || g.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let gap: Vec<f64> = u.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
    let inner = |x: &[f64]| {
        x.iter().enumerate().all(|(k, &v)| {
            let (lo, hi) = (grid.lower()[k], grid.upper()[k]);
            let margin = 0.2 * (hi - lo);
            v >= lo + margin && v <= hi - margin
        })
    };
    let candidates: Vec<usize> = (0..grid.len())
        .filter(|&n| mask.is_contact(n) && inner(&grid.coords(n)))
        .collect();
    if candidates.is_empty() {
        log::warn!("star-shape check: no contact nodes in the sampled region");
    }
    let stride = candidates.len().div_ceil(max_samples.max(1)).max(1);
    let limit = eps_contact + allowance;
    let mut report = StarShapedReport {
        checked: 0,
        tested: 0,
        allowance,
        violations: Vec::new(),
    };
    let mut y = vec![0.0; grid.dim()];
    for &n in candidates.iter().step_by(stride) {
        report.checked += 1;
        let x = grid.coords(n);
        for tau in STAR_FACTORS {
            for (yk, xk) in y.iter_mut().zip(&x) {
                *yk = tau * xk;
            }
            let Some(excess) = interpolate_values(grid, &gap, &y) else {
                continue;
            };
            report.tested += 1;
            if excess > limit {
                report.violations.push(StarViolation {
                    point: x.clone(),
                    factor: tau,
                    excess,
                });
            }
        }
    }
    Ok(report)
}

/// Continuation band across the `x_1` axis on one grid row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBand {
    /// Requested probe.
    pub x2: f64,
    /// Row actually scanned (nearest grid line).
    pub row: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
}

/// Width of the continuation band around `x_1 = 0` on the rows nearest the
/// probes (d = 2). Band edges sit halfway between the outermost continuation
/// node and the first contact node.
pub fn axis_distance(mask: &ContactMask, probe_x2: &[f64]) -> Result<Vec<AxisBand>> {
    let grid = mask.grid();
    if grid.dim() != 2 {
        return Err(Error::Dimension {
            d: grid.dim(),
            reason: "axis bands are measured on two-dimensional masks".into(),
        });
    }
    let h = grid.h();
    probe_x2
        .iter()
        .map(|&x2| {
            let start = grid.nearest_node(&[0.0, x2]).ok_or(Error::OutsideGrid)?;
            let row = grid.coord(start, 1);
            if mask.is_contact(start) {
                return Err(Error::DomainTooSmall(format!(
                    "no continuation around x1 = 0 on row x2 = {row}"
                )));
            }
            let s = grid.strides()[0];
            let i0 = grid.axis_index(start, 0);
            let at = |i: usize| start - i0 * s + i * s;
            let mut left = i0;
            while left > 0 && !mask.is_contact(at(left)) {
                left -= 1;
            }
            let mut right = i0;
            while right + 1 < grid.counts()[0] && !mask.is_contact(at(right)) {
                right += 1;
            }
            if !mask.is_contact(at(left)) || !mask.is_contact(at(right)) {
                return Err(Error::DomainTooSmall(format!(
                    "continuation band on row x2 = {row} reaches the edge of the box"
                )));
            }
            let x_of = |i: usize| grid.lower()[0] + i as f64 * h;
            let lower = x_of(left) + 0.5 * h;
            let upper = x_of(right) - 0.5 * h;
            Ok(AxisBand {
                x2,
                row,
                lower,
                upper,
                half_width: 0.5 * (upper - lower),
            })
        })
        .collect()
}

/// Diagonal channel half-widths on one anti-diagonal slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceWidth {
    pub t: f64,
    /// Smallest `s > 0` in contact.
    pub s: f64,
    /// Smallest `|s|` with `s < 0` in contact, if any.
    pub s_neg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfbSample {
    #[serde(rename = "T")]
    pub t: f64,
    pub value: f64,
    /// Analytic bound, defined for `T >= 1/(2c)`.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarShapedSummary {
    pub checked: usize,
    pub violations: usize,
}

/// Boundary report of a two-dimensional solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub c: f64,
    pub h: f64,
    pub eps_contact: f64,
    pub axis_distance: Vec<AxisBand>,
    pub s_star: Vec<SliceWidth>,
    pub d_fb: Vec<DfbSample>,
    pub star_shaped: Option<StarShapedSummary>,
    /// Slices with no contact node on the positive side.
    pub excluded_slices: usize,
    #[serde(skip)]
    pub boundary_nodes: Vec<usize>,
}

impl BoundaryProfile {
    /// Asymptotic channel half-width `1/(2√2 c)` in the rotated `s`.
    pub fn asymptote(&self) -> f64 {
        0.5 / (SQRT_2 * self.c)
    }

    /// `sup_{t >= T} |s*(t) - 1/(2√2 c)|`, over both sides of the diagonal.
    /// `None` when no slice with `t >= T` was measured.
    pub fn d_fb(&self, t_min: f64) -> Option<f64> {
        let a = self.asymptote();
        let tol = 1e-9 * self.h;
        self.s_star
            .iter()
            .filter(|w| w.t >= t_min - tol)
            .flat_map(|w| std::iter::once(w.s).chain(w.s_neg))
            .map(|s| (s - a).abs())
            .reduce(f64::max)
    }

    /// Slice closest to `t`.
    pub fn slice_near(&self, t: f64) -> Option<&SliceWidth> {
        self.s_star
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// Scans the anti-diagonals of a 2-D mask (constant `x_1 + x_2`, so constant
/// `t`) for the innermost contact node on each side of the diagonal, for all
/// slices with `t >= 0`. `d_FB` is tabulated at `T = k/c`, `k = 1..=4`, when
/// slices exist there.
pub fn diagonal_profile(mask: &ContactMask, c: Cost, eps_contact: f64) -> Result<BoundaryProfile> {
    let grid = mask.grid();
    if grid.dim() != 2 {
        return Err(Error::Dimension {
            d: grid.dim(),
            reason: "the diagonal profile is defined for two alternatives".into(),
        });
    }
    let h = grid.h();
    let (n1, n2) = (grid.counts()[0], grid.counts()[1]);
    let (lo1, lo2) = (grid.lower()[0], grid.lower()[1]);
    let mut slices = Vec::new();
    let mut excluded = 0usize;
    for k in 0..(n1 + n2 - 1) {
        let t = (lo1 + lo2 + k as f64 * h) / SQRT_2;
        if t < -1e-9 * h {
            continue;
        }
        let i_min = k.saturating_sub(n2 - 1);
        let i_max = k.min(n1 - 1);
        let mut pos: Option<f64> = None;
        let mut neg: Option<f64> = None;
        for i in i_min..=i_max {
            let j = k - i;
            let node = grid.index(&[i, j]);
            if !mask.is_contact(node) {
                continue;
            }
            let s = (lo1 - lo2 + (i as f64 - j as f64) * h) / SQRT_2;
            if s > 0.0 {
                pos = Some(pos.map_or(s, |p: f64| p.min(s)));
            } else if s < 0.0 {
                neg = Some(neg.map_or(-s, |p: f64| p.min(-s)));
            }
        }
        match pos {
            Some(s) => slices.push(SliceWidth { t, s, s_neg: neg }),
            None => excluded += 1,
        }
    }
    if excluded > 0 {
        log::warn!("diagonal profile: {excluded} slices without contact on the s > 0 side were skipped");
    }
    let mut profile = BoundaryProfile {
        c: c.value(),
        h,
        eps_contact,
        axis_distance: Vec::new(),
        s_star: slices,
        d_fb: Vec::new(),
        star_shaped: None,
        excluded_slices: excluded,
        boundary_nodes: free_boundary_nodes(mask),
    };
    for k in 1..=4 {
        let t = k as f64 / c.value();
        if let Some(value) = profile.d_fb(t) {
            profile.d_fb.push(DfbSample {
                t,
                value,
                bound: dfb_upper_bound(t, c).ok(),
            });
        }
    }
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    /// Continuation of `inner` lies inside continuation of `outer`.
    pub holds: bool,
    /// Nodes continuing under `inner` but stopped under `outer`.
    pub violations: Vec<usize>,
    /// Nodes continuing under `outer` but stopped under `inner`.
    pub strict_extra: usize,
}

/// Compares continuation regions `{not contact}` of two masks on one grid.
pub fn region_inclusion(inner: &ContactMask, outer: &ContactMask) -> Result<InclusionReport> {
    if inner.grid() != outer.grid() {
        return Err(Error::GridMismatch);
    }
    let mut violations = Vec::new();
    let mut strict_extra = 0;
    for (n, (&a, &b)) in inner.flags().iter().zip(outer.flags()).enumerate() {
        match (a, b) {
            (false, true) => violations.push(n),
            (true, false) => strict_extra += 1,
            _ => {}
        }
    }
    Ok(InclusionReport {
        holds: violations.is_empty(),
        violations,
        strict_extra,
    })
}
