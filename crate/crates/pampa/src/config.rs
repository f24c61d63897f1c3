//! Run configuration: flat `key = value` files, overridable from the command line.
//!
//! Recognised keys:
//!
//! | key | value |
//! |---|---|
//! | `case` | `zalesak`, `zalesak-classic`, `kt`, `smooth`, `smooth-euler`, `riemann`, `constant` |
//! | `mesh` | path of a mesh file (overrides `grid`) |
//! | `grid` | `NX NY` |
//! | `cells` | `quad` or `tri` |
//! | `jitter` | interior vertex perturbation in cell widths (default 0) |
//! | `seed` | jitter seed |
//! | `tfinal` | final time |
//! | `cfl` | CFL number in (0, 1] |
//! | `bp` | `on` or `off` |
//! | `order` | `low`, `high` or `blended` |
//! | `out` | output directory |
//! | `format` | `vtk` or `csv` |
//! | `output_every` | write fields every N steps (0: final state only) |
//! | `gamma` | ratio of specific heats |
//! | `velocity` | `AX AY` for the smooth scalar case |
//! | `riemann_left`, `riemann_right` | `RHO VX VY P` |
//! | `riemann_split` | x position of the initial discontinuity |
//! | `stabilization`, `entropy_fix` | scheme parameters |
//! | `max_steps` | abort after this many steps |
//! | `bc_default`, `bc_<tag>` | `transmissive` or `dirichlet V1 ... VM` |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pampa_core::mesh::CellKind;
use pampa_core::Order;

use crate::cases::{CaseId, RiemannData};
use crate::error::{io_err, Error, Result};
use crate::output::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Grid { nx: usize, ny: usize, cells: CellKind, jitter: f64, seed: u64 },
}

/// Boundary condition as written in a configuration; values are conserved variables.
#[derive(Debug, Clone, PartialEq)]
pub enum BcSpec {
    Transmissive,
    Dirichlet(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub case: CaseId,
    pub mesh: MeshSource,
    pub t_final: f64,
    pub cfl: f64,
    /// Effective update after reconciling `bp` and `order`.
    pub order: Order,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub output_every: usize,
    pub gamma: f64,
    pub velocity: (f64, f64),
    pub riemann: RiemannData,
    pub stabilization: f64,
    pub entropy_fix: f64,
    pub max_steps: Option<usize>,
    pub bc_default: Option<BcSpec>,
    pub bc: BTreeMap<u32, BcSpec>,
}

impl CaseConfig {
    pub fn for_case(case: CaseId) -> Self {
        let (nx, ny) = case.default_grid();
        Self {
            case,
            mesh: MeshSource::Grid { nx, ny, cells: case.default_cells(), jitter: 0.0, seed: 0 },
            t_final: case.default_final_time(),
            cfl: 0.4,
            order: Order::Blended,
            out: None,
            format: Format::Vtk,
            output_every: 0,
            gamma: 1.4,
            velocity: crate::cases::SMOOTH_VELOCITY,
            riemann: RiemannData::default(),
            stabilization: 1.0,
            entropy_fix: 0.1,
            max_steps: None,
            bc_default: None,
            bc: BTreeMap::new(),
        }
    }

    /// Builds a configuration from `key = value` pairs, applied in order.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let case = pairs
            .iter()
            .rev()
            .find(|(k, _)| *k == "case")
            .map(|(_, v)| v.parse::<CaseId>())
            .transpose()?
            .ok_or_else(|| Error::Config("missing `case`".into()))?;
        let mut cfg = Self::for_case(case);
        let mut bp = true;
        let mut order = Order::Blended;
        let mut mesh_file = None;
        for (key, value) in pairs {
            let bad = |what: &str| Error::Config(format!("`{key}`: expected {what}, got `{value}`"));
            let float = || value.parse::<f64>().map_err(|_| bad("a number"));
            let floats = |n: Option<usize>| -> Result<Vec<f64>> {
                let v = value.split_whitespace().map(|s| s.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
                match v {
                    Ok(v) if n.is_none_or(|n| v.len() == n) => Ok(v),
                    _ => Err(bad(&match n {
                        Some(n) => format!("{n} numbers"),
                        None => "numbers".into(),
                    })),
                }
            };
            match key {
                "case" => {}
                "mesh" => mesh_file = Some(PathBuf::from(value)),
                "grid" => {
                    let v: Vec<usize> = value.split_whitespace().filter_map(|s| s.parse().ok()).collect();
                    if v.len() != 2 || v.contains(&0) {
                        return Err(bad("`NX NY`"));
                    }
                    if let MeshSource::Grid { nx, ny, .. } = &mut cfg.mesh {
                        (*nx, *ny) = (v[0], v[1]);
                    }
                }
                "cells" => {
                    let kind = match value {
                        "quad" => CellKind::Quad,
                        "tri" => CellKind::Tri,
                        _ => return Err(bad("`quad` or `tri`")),
                    };
                    if let MeshSource::Grid { cells, .. } = &mut cfg.mesh {
                        *cells = kind;
                    }
                }
                "jitter" => {
                    let j = float()?;
                    if !(0.0..0.5).contains(&j) {
                        return Err(bad("a value in [0, 0.5)"));
                    }
                    if let MeshSource::Grid { jitter, .. } = &mut cfg.mesh {
                        *jitter = j;
                    }
                }
                "seed" => {
                    let s = value.parse().map_err(|_| bad("an integer"))?;
                    if let MeshSource::Grid { seed, .. } = &mut cfg.mesh {
                        *seed = s;
                    }
                }
                "tfinal" => cfg.t_final = float()?,
                "cfl" => cfg.cfl = float()?,
                "bp" => {
                    bp = match value {
                        "on" => true,
                        "off" => false,
                        _ => return Err(bad("`on` or `off`")),
                    }
                }
                "order" => {
                    order = match value {
                        "low" => Order::Low,
                        "high" => Order::High,
                        "blended" => Order::Blended,
                        _ => return Err(bad("`low`, `high` or `blended`")),
                    }
                }
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = value.parse()?,
                "output_every" => cfg.output_every = value.parse().map_err(|_| bad("an integer"))?,
                "gamma" => cfg.gamma = float()?,
                "velocity" => {
                    let v = floats(Some(2))?;
                    cfg.velocity = (v[0], v[1]);
                }
                "riemann_left" => cfg.riemann.left = floats(Some(4))?.try_into().unwrap(),
                "riemann_right" => cfg.riemann.right = floats(Some(4))?.try_into().unwrap(),
                "riemann_split" => cfg.riemann.split = float()?,
                "stabilization" => cfg.stabilization = float()?,
                "entropy_fix" => cfg.entropy_fix = float()?,
                "max_steps" => cfg.max_steps = Some(value.parse().map_err(|_| bad("an integer"))?),
                "bc_default" => cfg.bc_default = Some(parse_bc(value).ok_or_else(|| bad("a boundary condition"))?),
                _ => match key.strip_prefix("bc_").and_then(|t| t.parse::<u32>().ok()) {
                    Some(tag) => {
                        cfg.bc.insert(tag, parse_bc(value).ok_or_else(|| bad("a boundary condition"))?);
                    }
                    None => return Err(Error::Config(format!("unknown key `{key}`"))),
                },
            }
        }
        if let Some(path) = mesh_file {
            cfg.mesh = MeshSource::File(path);
        }
        cfg.order = match (order, bp) {
            (Order::Low, _) => Order::Low,
            (Order::Blended, true) => Order::Blended,
            (Order::Blended | Order::High, false) => Order::High,
            (Order::High, true) => {
                return Err(Error::Config("`order = high` is unlimited; it needs `bp = off`".into()));
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        Self::from_pairs(parse_pairs(text, path)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!("tfinal must be positive, got {}", self.t_final)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must be in (0, 1], got {}", self.cfl)));
        }
        if !(self.gamma > 1.0 && self.gamma <= 5.0 / 3.0) {
            return Err(Error::Config(format!("gamma must be in (1, 5/3], got {}", self.gamma)));
        }
        if self.case.periodic() {
            if let MeshSource::Grid { nx, ny, .. } = self.mesh {
                if nx < 3 || ny < 3 {
                    return Err(Error::Config("periodic grids need at least 3 cells per direction".into()));
                }
            }
        }
        Ok(())
    }
}

/// The `key = value` pairs of a configuration file, in order. `#` starts a comment.
pub fn parse_pairs<'a>(text: &'a str, path: &Path) -> Result<Vec<(&'a str, &'a str)>> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message: "expected `key = value`".into(),
        })?;
        pairs.push((k.trim(), v.trim()));
    }
    Ok(pairs)
}

fn parse_bc(value: &str) -> Option<BcSpec> {
    let mut it = value.split_whitespace();
    match it.next()? {
        "transmissive" => it.next().is_none().then_some(BcSpec::Transmissive),
        "dirichlet" => {
            let v: Vec<f64> = it.map(|s| s.parse().ok()).collect::<Option<_>>()?;
            (!v.is_empty()).then_some(BcSpec::Dirichlet(v))
        }
        _ => None,
    }
}
