//! Uniform rectangular grids over a truncated box, node-indexed fields, the
//! stopping payoff `g(x) = max{x_1, …, x_d, 0}`, the 2d+1 point Laplacian,
//! and Dirichlet data for the truncation faces.
//!
//! Nodes are stored row-major: the last axis varies fastest. Callers should
//! go through [`GridSpec::index`] and [`GridSpec::coords`] rather than
//! computing offsets themselves.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::analytic::{eta_pair, psi_value, Cost};
use crate::error::{positive, Error, Result};
use crate::mode::SearchMode;

/// Upper limit on the number of nodes in one grid (2 GiB of f64 values).
pub const MAX_NODES: usize = 1 << 28;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridDescriptor {
    lower: Vec<f64>,
    upper: Vec<f64>,
    h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDescriptor", into = "GridDescriptor")]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    h: f64,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

impl TryFrom<GridDescriptor> for GridSpec {
    type Error = Error;

    fn try_from(d: GridDescriptor) -> Result<Self> {
        GridSpec::new(d.lower, d.upper, d.h)
    }
}

impl From<GridSpec> for GridDescriptor {
    fn from(g: GridSpec) -> Self {
        GridDescriptor {
            lower: g.lower,
            upper: g.upper,
            h: g.h,
        }
    }
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, h: f64) -> Result<Self> {
        let h = positive("h", h)?;
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidGrid(format!(
                "need one lower and one upper extent per axis, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        let mut counts = Vec::with_capacity(lower.len());
        for (axis, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: extent [{lo}, {hi}] is empty or not finite"
                )));
            }
            let cells = ((hi - lo) / h).round();
            let slack = 1e-9 * (hi - lo).max(h);
            if ((hi - lo) - cells * h).abs() > slack {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: span {} is not a multiple of h = {h}",
                    hi - lo
                )));
            }
            if cells < 2.0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: needs at least 3 nodes, got {}",
                    cells as usize + 1
                )));
            }
            if cells >= MAX_NODES as f64 {
                return Err(Error::InvalidGrid(format!("axis {axis}: too many nodes")));
            }
            counts.push(cells as usize + 1);
        }
        let total = counts
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&n| n <= MAX_NODES)
            .ok_or_else(|| {
                Error::InvalidGrid(format!(
                    "{:?} nodes per axis exceed the limit of {MAX_NODES} nodes",
                    counts
                ))
            })?;
        debug_assert!(total > 0);
        let mut strides = vec![1usize; counts.len()];
        for k in (0..counts.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * counts[k + 1];
        }
        Ok(Self {
            lower,
            upper,
            h,
            counts,
            strides,
        })
    }

    /// The box `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64, h: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d], h)
    }

    /// Default experiment domain `[-4/c, 8/c]^d` with `h = 1/(80c)`.
    pub fn default_for(d: usize, c: Cost) -> Result<Self> {
        let c = c.value();
        Self::cube(d, -4.0 / c, 8.0 / c, 1.0 / (80.0 * c))
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.strides[0] * self.counts[0]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, node: usize, out: &mut [usize]) {
        let mut rest = node;
        for (k, o) in out.iter_mut().enumerate() {
            *o = rest / self.strides[k];
            rest %= self.strides[k];
        }
    }

    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.counts[axis]
    }

    pub fn coord(&self, node: usize, axis: usize) -> f64 {
        self.lower[axis] + self.axis_index(node, axis) as f64 * self.h
    }

    pub fn coords_into(&self, node: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.coord(node, k);
        }
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.coords_into(node, &mut x);
        x
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        (0..self.dim()).any(|k| {
            let i = self.axis_index(node, k);
            i == 0 || i + 1 == self.counts[k]
        })
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.is_boundary(n)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<u32> {
        (0..self.len())
            .filter(|&n| !self.is_boundary(n))
            .map(|n| n as u32)
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-9 * self.h;
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
    }

    /// Node nearest to `x`, if `x` lies inside the box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut node = 0;
        for k in 0..self.dim() {
            let i = ((x[k] - self.lower[k]) / self.h).round().max(0.0) as usize;
            node += i.min(self.counts[k] - 1) * self.strides[k];
        }
        Some(node)
    }

    /// Index of the node lying exactly (to within `h/1000`) at `x`.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let node = self.nearest_node(x)?;
        let exact = (0..self.dim()).all(|k| (self.coord(node, k) - x[k]).abs() <= 1e-3 * self.h);
        exact.then_some(node)
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Real values attached to every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|n| {
                grid.coords_into(n, &mut x);
                f(&x)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// Value at the node located exactly at `x`.
    pub fn at(&self, x: &[f64]) -> Option<f64> {
        self.grid.node_at(x).map(|n| self.values[n])
    }

    /// Multilinear interpolation; `None` outside the box.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        interpolate_values(&self.grid, &self.values, x)
    }
}

pub(crate) fn interpolate_values(grid: &GridSpec, values: &[f64], x: &[f64]) -> Option<f64> {
    if !grid.contains(x) {
        return None;
    }
    let d = grid.dim();
    let mut base = 0usize;
    let mut weights = [0.0f64; 8];
    assert!(d <= 8, "interpolation supports up to 8 axes");
    for k in 0..d {
        let f = ((x[k] - grid.lower()[k]) / grid.h()).max(0.0);
        let i = (f.floor() as usize).min(grid.counts()[k] - 2);
        weights[k] = (f - i as f64).clamp(0.0, 1.0);
        base += i * grid.strides()[k];
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut node = base;
        for k in 0..d {
            if corner >> k & 1 == 1 {
                w *= weights[k];
                node += grid.strides()[k];
            } else {
                w *= 1.0 - weights[k];
            }
        }
        if w != 0.0 {
            acc += w * values[node];
        }
    }
    Some(acc)
}

/// Per-node contact flag: `true` where stopping is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMask {
    grid: GridSpec,
    contact: Vec<bool>,
}

impl ContactMask {
    pub fn new(grid: GridSpec, contact: Vec<bool>) -> Result<Self> {
        if contact.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} flags for {} nodes",
                contact.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, contact })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn flags(&self) -> &[bool] {
        &self.contact
    }

    pub fn is_contact(&self, node: usize) -> bool {
        self.contact[node]
    }

    pub fn contact_count(&self) -> usize {
        self.contact.iter().filter(|&&b| b).count()
    }
}

/// Stopping payoff `max{x_1, …, x_d, 0}`.
#[inline]
pub fn obstacle_value(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, &v| m.max(v))
}

pub fn build_obstacle(grid: &GridSpec) -> ScalarField {
    ScalarField::from_fn(grid, obstacle_value)
}

/// `Σ_i (u(n+e_i h) - 2u(n) + u(n-e_i h))/h²` at an interior node.
pub fn discrete_laplacian(field: &ScalarField, node: usize) -> Result<f64> {
    let grid = field.grid();
    if node >= grid.len() || grid.is_boundary(node) {
        return Err(Error::BoundaryNode(node));
    }
    Ok(laplacian_at(grid, field.values(), node))
}

#[inline]
pub(crate) fn laplacian_at(grid: &GridSpec, u: &[f64], node: usize) -> f64 {
    let h2 = grid.h() * grid.h();
    let centre = u[node];
    grid.strides()
        .iter()
        .map(|&s| u[node + s] - 2.0 * centre + u[node - s])
        .sum::<f64>()
        / h2
}

/// Dirichlet values on every truncation-boundary node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundaryData {
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let nodes = grid.boundary_nodes();
        let mut x = vec![0.0; grid.dim()];
        let values = nodes
            .iter()
            .map(|&n| {
                grid.coords_into(n, &mut x);
                f(&x)
            })
            .collect();
        Self { nodes, values }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Far-field value used on truncation faces: the largest of `g`, the
/// one-alternative profiles `psi(x_i)` and the two-alternative profiles
/// `eta(x_i, x_j)` for the technology in use.
///
/// Each term is the exact value of a sub-problem whose payoff never exceeds
/// `g`, so the combination is a lower bound for the value everywhere. It is
/// exact in the deep stopping region, along each axis channel (the other
/// alternatives far below), and asymptotically along each pairwise diagonal
/// channel.
pub fn far_field_value(x: &[f64], mode: &SearchMode) -> f64 {
    let single = Cost::new(mode.one_alternative_cost()).expect("validated cost");
    let theta = mode.pair_theta();
    let mut v = obstacle_value(x);
    for (i, &a) in x.iter().enumerate() {
        v = v.max(psi_value(a, single));
        for &b in &x[i + 1..] {
            v = v.max(eta_pair(a, b, theta));
        }
    }
    v
}

/// Dirichlet data for the truncation boundary of `grid` under `mode`.
///
/// The box must contain `[-m, m]^d` with `m = 1/(2 c_min) + 10h`, so that the
/// region around the origin where all alternatives compete stays clear of
/// the faces.
pub fn truncation_boundary_values(grid: &GridSpec, mode: &SearchMode) -> Result<BoundaryData> {
    let c_min = mode.one_alternative_cost().min(mode.pair_theta());
    let margin = 0.5 / c_min + 10.0 * grid.h();
    for k in 0..grid.dim() {
        if grid.lower()[k] > -margin || grid.upper()[k] < margin {
            return Err(Error::DomainTooSmall(format!(
                "axis {k} spans [{}, {}] but the continuation region reaches ±{:.4}; \
                 enlarge the domain to cover at least [-{margin:.4}, {margin:.4}]",
                grid.lower()[k],
                grid.upper()[k],
                0.5 / c_min
            )));
        }
    }
    Ok(BoundaryData::from_fn(grid, |x| far_field_value(x, mode)))
}

/// Writes one CSV row per node: coordinates, `u`, `g`, contact flag.
/// Floats carry 17 significant digits.
pub fn write_field_csv<W: Write>(
    mut out: W,
    u: &ScalarField,
    g: &ScalarField,
    mask: &ContactMask,
) -> std::io::Result<()> {
    let grid = u.grid();
    let d = grid.dim();
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    header.extend(["u", "g", "contact"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    let mut x = vec![0.0; d];
    for n in 0..grid.len() {
        grid.coords_into(n, &mut x);
        for v in &x {
            write!(out, "{v:.16e},")?;
        }
        writeln!(
            out,
            "{:.16e},{:.16e},{}",
            u.get(n),
            g.get(n),
            u8::from(mask.is_contact(n))
        )?;
    }
    Ok(())
}

/// Reads back the `u` column and contact flags written by [`write_field_csv`]
/// for a known grid.
pub fn read_field_csv<R: BufRead>(input: R, grid: &GridSpec) -> Result<(ScalarField, ContactMask)> {
    let d = grid.dim();
    let bad = |msg: String| Error::InvalidGrid(format!("field csv: {msg}"));
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .map_err(|e| bad(e.to_string()))?;
    if header.split(',').count() != d + 3 {
        return Err(bad(format!("header `{header}` does not match a {d}-d grid")));
    }
    let mut u = Vec::with_capacity(grid.len());
    let mut contact = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != d + 3 {
            return Err(bad(format!("row {row} has {} columns", cols.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("row {row}: {e}")));
        u.push(parse(cols[d])?);
        contact.push(cols[d + 2] == "1");
    }
    Ok((
        ScalarField::new(grid.clone(), u)?,
        ContactMask::new(grid.clone(), contact)?,
    ))
}
