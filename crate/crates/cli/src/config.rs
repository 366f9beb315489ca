//! Flags, the optional `key = value` config file, and their resolution into
//! a validated [`RunConfig`]. Flags override the file; `PARSEARCH_OUT`
//! overrides the file's output directory but not `--out`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use parsearch::montecarlo::SimConfig;
use parsearch::{Cost, GridSpec, SearchMode, SolverConfig};

use crate::error::{CliError, CliResult};

pub const OUT_ENV: &str = "PARSEARCH_OUT";
pub const DEFAULT_OUT: &str = "parsearch-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    Parallel,
    Sequential,
    Hybrid,
    Highdim,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `key = value` file using the long flag names as keys.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeKind>,
    /// Number of alternatives.
    #[arg(long)]
    pub d: Option<usize>,
    /// Parallel search cost per unit time.
    #[arg(long)]
    pub c: Option<f64>,
    /// Single-alternative search cost (sequential and hybrid modes).
    #[arg(long)]
    pub cprime: Option<f64>,
    /// Lower domain extent; give once for all axes or once per axis.
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Vec<f64>,
    /// Upper domain extent; give once for all axes or once per axis.
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Vec<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Sweep-change tolerance relative to the field scale.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Contact tolerance; defaults to max(1e-8, c h²).
    #[arg(long)]
    pub eps_contact: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_cap: Option<f64>,
    /// Evaluation point "x1,x2,..."; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub probe: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags specific to `verify`.
#[derive(Debug, Clone, Default, Args)]
pub struct VerifyFlags {
    /// Run only the named check; repeatable.
    #[arg(long)]
    pub only: Vec<String>,
    /// Multiplies every numerical allowance; 0 turns them off.
    #[arg(long)]
    pub allowance_scale: Option<f64>,
}

/// Flags specific to `simulate`.
#[derive(Debug, Clone, Default, Args)]
pub struct SimulateFlags {
    /// Solve first instead of reading artifacts from the output directory.
    #[arg(long)]
    pub solve_first: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kind: ModeKind,
    pub d: usize,
    pub c: f64,
    pub cprime: Option<f64>,
    pub extents: Option<(Vec<f64>, Vec<f64>)>,
    pub h: Option<f64>,
    pub solver: SolverConfig,
    pub sim: SimConfig,
    pub probes: Vec<Vec<f64>>,
    pub out: PathBuf,
    pub only: Vec<String>,
    pub allowance_scale: f64,
    pub solve_first: bool,
}

const KEYS: &[&str] = &[
    "mode",
    "d",
    "c",
    "cprime",
    "xmin",
    "xmax",
    "h",
    "tol",
    "residual-tol",
    "omega",
    "max-iters",
    "eps-contact",
    "dt",
    "paths",
    "seed",
    "t-cap",
    "probe",
    "out",
    "only",
    "allowance-scale",
];

/// Parsed config file; repeatable keys keep every value in order.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io("read config file", path))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`, got `{raw}`", k + 1))?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}` (known: {})", k + 1, KEYS.join(", ")));
            }
            entries.entry(key).or_default().push(value.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn last(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    fn all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.last(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Config(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn list_f64(&self, key: &str) -> CliResult<Vec<f64>> {
        self.all(key)
            .iter()
            .flat_map(|v| v.split(','))
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .collect()
    }
}

fn parse_point(s: &str, d: usize) -> CliResult<Vec<f64>> {
    let x: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("probe `{s}`: expected comma-separated numbers")))?;
    if x.len() != d {
        return Err(CliError::Config(format!(
            "probe `{s}` has {} coordinates but d = {d}",
            x.len()
        )));
    }
    Ok(x)
}

fn expand(v: Vec<f64>, d: usize, name: &str) -> CliResult<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; d]),
        n if n == d => Ok(v),
        n => Err(CliError::Config(format!(
            "--{name} given {n} times; give it once for all axes or {d} times"
        ))),
    }
}

impl RunConfig {
    pub fn resolve(flags: &Flags, verify: &VerifyFlags, simulate: &SimulateFlags) -> CliResult<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let kind = match flags.mode {
            Some(m) => m,
            None => match file.last("mode") {
                Some(s) => ModeKind::from_str(s, true).map_err(|_| {
                    CliError::Config(format!("mode `{s}`: expected parallel, sequential, hybrid or highdim"))
                })?,
                None => ModeKind::Parallel,
            },
        };
        let d = flags.d.or(file.get("d")?).unwrap_or(2);
        let c = flags.c.or(file.get("c")?).unwrap_or(1.0);
        let cprime = flags.cprime.or(file.get("cprime")?);

        if d == 0 || d > 4 {
            return Err(CliError::Config(format!("d = {d}: supported range is 1 to 4")));
        }

        let xmin = if flags.xmin.is_empty() { file.list_f64("xmin")? } else { flags.xmin.clone() };
        let xmax = if flags.xmax.is_empty() { file.list_f64("xmax")? } else { flags.xmax.clone() };
        let extents = match (xmin.is_empty(), xmax.is_empty()) {
            (true, true) => None,
            (false, false) => {
                if kind == ModeKind::Highdim {
                    return Err(CliError::Config(
                        "--xmin/--xmax do not apply to highdim; the chart box is sized from d and c".into(),
                    ));
                }
                Some((expand(xmin, d, "xmin")?, expand(xmax, d, "xmax")?))
            }
            _ => return Err(CliError::Config("give both --xmin and --xmax, or neither".into())),
        };

        let mut solver = SolverConfig::default();
        if let Some(v) = flags.tol.or(file.get("tol")?) {
            solver.tol = v;
        }
        let residual_tol = flags.residual_tol.or(file.get("residual-tol")?);
        if let Some(v) = flags.omega.or(file.get("omega")?) {
            solver.omega = v;
        }
        if let Some(v) = flags.max_iters.or(file.get("max-iters")?) {
            solver.max_iters = v;
        }
        solver.contact_tol = flags.eps_contact.or(file.get("eps-contact")?);

        let defaults = SimConfig::default();
        let sim = SimConfig {
            dt: flags.dt.or(file.get("dt")?).unwrap_or(defaults.dt),
            paths: flags.paths.or(file.get("paths")?).unwrap_or(defaults.paths),
            seed: flags.seed.or(file.get("seed")?).unwrap_or(defaults.seed),
            t_cap: flags.t_cap.or(file.get("t-cap")?),
        };
        if !(sim.dt > 0.0) || sim.paths == 0 || sim.t_cap.is_some_and(|t| !(t > 0.0)) {
            return Err(CliError::Config("need dt > 0, paths >= 1 and t-cap > 0".into()));
        }

        let probe_text: Vec<String> = if flags.probe.is_empty() {
            file.all("probe").to_vec()
        } else {
            flags.probe.clone()
        };
        let probes = probe_text.iter().map(|s| parse_point(s, d)).collect::<CliResult<_>>()?;

        let out = match &flags.out {
            Some(p) => p.clone(),
            None => std::env::var_os(OUT_ENV)
                .map(PathBuf::from)
                .or_else(|| file.last("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        };

        let only = if verify.only.is_empty() {
            file.all("only").to_vec()
        } else {
            verify.only.clone()
        };
        let allowance_scale = verify
            .allowance_scale
            .or(file.get("allowance-scale")?)
            .unwrap_or(1.0);
        if !(allowance_scale >= 0.0) {
            return Err(CliError::Config("allowance-scale must be non-negative".into()));
        }

        let h = flags.h.or(file.get("h")?);
        if h.is_some_and(|h| !(h > 0.0)) {
            return Err(CliError::Config("h must be positive".into()));
        }

        let mut cfg = RunConfig {
            kind,
            d,
            c,
            cprime,
            extents,
            h,
            solver,
            sim,
            probes,
            out,
            only,
            allowance_scale,
            solve_first: simulate.solve_first,
        };
        let mode = cfg.search_mode()?;
        cfg.solver.residual_tol = residual_tol.unwrap_or(1e-8 * mode.min_cost());
        cfg.solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn cost(&self) -> CliResult<Cost> {
        Ok(Cost::new(self.c)?)
    }

    /// The search technology; highdim solves are parallel.
    pub fn search_mode(&self) -> CliResult<SearchMode> {
        let need_cprime = || {
            self.cprime.ok_or_else(|| {
                CliError::Config(format!("--cprime is required for {:?} mode", self.kind).to_lowercase())
            })
        };
        let mode = match self.kind {
            ModeKind::Parallel | ModeKind::Highdim => SearchMode::parallel(self.c)?,
            ModeKind::Sequential => SearchMode::sequential(need_cprime()?)?,
            ModeKind::Hybrid => SearchMode::hybrid(self.c, need_cprime()?)?,
        };
        Ok(mode)
    }

    /// Default spacing `1/(k θ)` with `k` shrinking with `d` to keep grids
    /// near a few million nodes, and box `[-4/θ, 8/θ]^d`.
    pub fn grid(&self) -> CliResult<GridSpec> {
        let theta = self.search_mode()?.pair_theta();
        let per_unit = match self.d {
            1 | 2 => 80.0,
            3 => 10.0,
            _ => 4.0,
        };
        let h = self.h.unwrap_or(1.0 / (per_unit * theta));
        let (lower, upper) = match &self.extents {
            Some((lo, hi)) => (lo.clone(), hi.clone()),
            None => (vec![-4.0 / theta; self.d], vec![8.0 / theta; self.d]),
        };
        let grid = GridSpec::new(lower, upper, h)?;
        if grid.len() > 50_000_000 {
            return Err(CliError::Config(format!(
                "grid has {} nodes; raise --h or shrink the domain",
                grid.len()
            )));
        }
        Ok(grid)
    }

    /// Probe points, defaulting to the origin.
    pub fn probes_or_origin(&self) -> Vec<Vec<f64>> {
        if self.probes.is_empty() {
            vec![vec![0.0; self.d]]
        } else {
            self.probes.clone()
        }
    }
}
