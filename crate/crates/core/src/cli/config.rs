//! Run configuration: a flat `key = value` file with `[sections]`, overridden
//! by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::uniform_edges;
use crate::model::ModelParams;
use crate::montecarlo::{SimConfig, DEFAULT_MAX_REJECTION_ITERS};
use crate::verify::GridSpec;
use crate::{Error, Result};

pub const DEFAULT_X: f64 = 0.776;
pub const DEFAULT_EVENTS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_OUT: &str = "lhv-out";
/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "LHV_THREADS";

/// Parsed config file, keyed `section.key`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            entries.insert(key, v.trim().trim_matches('"').to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::param(key_name(key), v, "could not parse config value")),
        }
    }
}

fn key_name(key: &'static str) -> &'static str {
    key.rsplit('.').next().unwrap_or(key)
}

/// Output document variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    /// Aligned human-readable text.
    Table,
    /// Nested key/value document (TOML).
    Tree,
    /// Delimited columns.
    Csv,
}

pub fn parse_formats(s: &str) -> Result<Vec<Format>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f = match part {
            "table" | "table-text" | "text" => Format::Table,
            "tree" | "machine-tree" | "toml" => Format::Tree,
            "csv" | "delimited-columns" | "delimited" => Format::Csv,
            _ => return Err(Error::param("format", part, "expected table, tree or csv")),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::param("format", s, "no output format selected"));
    }
    out.sort();
    Ok(out)
}

pub fn parse_list(s: &str, name: &'static str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::param(name, p, "not a number")))
        .collect()
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub delta_m: Option<f64>,
    pub x: Option<f64>,
    pub events: Option<u64>,
    pub seed: Option<u64>,
    pub symmetrized: bool,
    pub bins: Option<usize>,
    pub dt_max: Option<f64>,
    pub edges: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub threads: Option<usize>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub x_values: Option<String>,
}

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub sim: SimConfig,
    pub edges: Vec<f64>,
    /// `false` when `edges` span the default `[0, 5 tau]`.
    pub edges_explicit: bool,
    pub grid: GridSpec,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub threads: Option<usize>,
    pub x_values: Option<Vec<f64>>,
}

fn resolve_params(tau: Option<f64>, delta_m: Option<f64>, x: Option<f64>) -> Result<ModelParams> {
    match (tau, delta_m, x) {
        (None, None, None) => ModelParams::from_mixing(DEFAULT_X),
        (None, None, Some(x)) => ModelParams::from_mixing(x),
        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => Err(Error::param(
            "x",
            x.unwrap_or_default(),
            "give either --x or --tau with --delta-m, not both",
        )),
        (Some(tau), Some(dm), None) => ModelParams::new(tau, dm),
        (None, Some(dm), None) => ModelParams::new(1.0, dm),
        (Some(_), None, None) => Err(Error::param("delta_m", "missing", "--tau requires --delta-m")),
    }
}

impl RunConfig {
    pub fn resolve(file: &ConfigFile, o: &Overrides) -> Result<Self> {
        let cli_model = o.tau.is_some() || o.delta_m.is_some() || o.x.is_some();
        let params = if cli_model {
            resolve_params(o.tau, o.delta_m, o.x)?
        } else {
            resolve_params(file.parsed("model.tau")?, file.parsed("model.delta_m")?, file.parsed("model.x")?)?
        };

        let n_events = o.events.or(file.parsed("sim.events")?).unwrap_or(DEFAULT_EVENTS);
        let seed = o.seed.or(file.parsed("sim.seed")?).unwrap_or(DEFAULT_SEED);
        let symmetrized = o.symmetrized || file.parsed("sim.symmetrized")?.unwrap_or(false);
        let mut sim = SimConfig::new(params, n_events, seed).symmetrized(symmetrized);
        sim.max_rejection_iters = file
            .parsed("sim.max_rejection_iters")?
            .unwrap_or(DEFAULT_MAX_REJECTION_ITERS);

        let edges_explicit = o.edges.is_some()
            || o.dt_max.is_some()
            || file.get("binning.edges").is_some()
            || file.get("binning.dt_max").is_some();
        let explicit_edges = o.edges.clone().or_else(|| file.get("binning.edges").map(str::to_string));
        let edges = match explicit_edges {
            Some(list) if o.bins.is_none() && o.dt_max.is_none() => parse_list(&list, "edges")?,
            _ => {
                let bins = o.bins.or(file.parsed("binning.bins")?).unwrap_or(DEFAULT_BINS);
                let dt_max = o.dt_max.or(file.parsed("binning.dt_max")?).unwrap_or(5.0 * params.tau());
                uniform_edges(bins, dt_max)?
            }
        };
        crate::analysis::validate_edges(&edges)?;

        let mut grid = GridSpec::default_for(&params);
        if let Some(t) = o.t_max.or(file.parsed("verify.t_max")?) {
            grid.t_max = t;
        }
        if let Some(n) = o.points.or(file.parsed("verify.points")?) {
            grid.points_per_axis = n;
        }

        let output_dir = o
            .out
            .clone()
            .or_else(|| file.get("output.out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let formats = parse_formats(
            o.format
                .as_deref()
                .or(file.get("output.format"))
                .unwrap_or("table,tree,csv"),
        )?;

        let threads = match o.threads.or(file.parsed("run.threads")?) {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| Error::param("threads", v, "LHV_THREADS is not a count"))?),
                Err(_) => None,
            },
        };
        if threads == Some(0) {
            return Err(Error::param("threads", 0, "need at least one worker"));
        }

        let x_values = match o.x_values.as_deref().or(file.get("scan.x_values")) {
            Some(s) => Some(parse_list(s, "x_values")?),
            None => None,
        };

        Ok(Self {
            params,
            sim,
            edges,
            edges_explicit,
            grid,
            output_dir,
            formats,
            threads,
            x_values,
        })
    }
}
