//! Run configuration and the on-disk artifact formats.
//!
//! Numeric tables are CSV with a header row, LF line endings and every value
//! written in the shortest form that parses back to the same f64, so equal
//! runs produce byte-identical files. Configurations, metadata and reports
//! are pretty-printed JSON.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::domain::{AngularGrid, CurveSample, FlowParams};
use crate::error::{Error, Result};
use crate::estimates::{CheckRegistry, CheckRequest};
use crate::flow::{InitialDataRecipe, SchemeRegistry, Trace, TraceSample};
use crate::geometry::GraphFunction;
use crate::soliton::SolitonData;

pub const CONFIG_FILE: &str = "config.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const CURVE_FILE: &str = "curve.csv";
pub const GRAPH_FILE: &str = "graph.csv";
pub const ENTROPY_FILE: &str = "entropy.csv";
pub const REPORT_FILE: &str = "report.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const SOLITON_FILE: &str = "soliton.csv";

fn default_output_dir() -> PathBuf {
    PathBuf::from("run")
}

fn default_scheme() -> String {
    "u-form".to_string()
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: FlowParams,
    pub recipe: InitialDataRecipe,
    #[serde(default)]
    pub checks: Vec<CheckRequest>,
    /// Empty means 101 uniform samples over [0, t_end].
    #[serde(default)]
    pub sample_times: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
}

impl RunConfig {
    pub fn new(params: FlowParams, recipe: InitialDataRecipe) -> Self {
        Self {
            params,
            recipe,
            checks: Vec::new(),
            sample_times: Vec::new(),
            output_dir: default_output_dir(),
            seed: 0,
            scheme: default_scheme(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Sample times actually used.
    pub fn resolved_samples(&self) -> Vec<f64> {
        if self.sample_times.is_empty() {
            crate::flow::uniform_samples(0.0, self.params.t_end, 101)
        } else {
            self.sample_times.clone()
        }
    }

    pub fn validate(&self, schemes: &SchemeRegistry, checks: &CheckRegistry) -> Result<()> {
        self.params.validate_slab()?;
        let t_end = self.params.t_end;
        if let Some(t) = self.sample_times.iter().find(|t| !(0.0..=t_end).contains(*t)) {
            return Err(Error::Config(format!("sample time {t} outside [0, {t_end}]")));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sample_times must be strictly increasing".into()));
        }
        for c in &self.checks {
            if !checks.contains(&c.name) {
                return Err(Error::Config(format!("unknown check `{}`", c.name)));
            }
        }
        schemes
            .get(&self.scheme)
            .map_err(|_| Error::Config(format!("unknown scheme `{}`", self.scheme)))?;
        Ok(())
    }
}

/// Run summary written next to the trace; also what `check` needs to
/// re-read a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub alpha: f64,
    pub grid_size: usize,
    pub scheme: String,
    pub t_end: f64,
    pub seed: u64,
    pub translator_speed: f64,
    pub steps: u64,
    pub halvings: u64,
    pub min_dt: f64,
    pub max_dt: f64,
    pub final_translator_error: f64,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Long format: one row per (t, θ) with header `t,theta,u,S`.
pub fn write_trace_csv<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    writeln!(out, "t,theta,u,S")?;
    let nodes = trace.grid.nodes();
    for s in &trace.samples {
        for (i, th) in nodes.iter().enumerate() {
            writeln!(out, "{},{},{},{}", s.t, th, s.u[i], s.s[i])?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Trace(e.to_string())
}

/// Parses a trace written by [`write_trace_csv`]. Rows are grouped by
/// consecutive equal times; every group must carry the nodes of the same
/// cell-centered grid.
pub fn read_trace_csv<R: Read>(input: R, alpha: f64, scheme: &str) -> Result<Trace> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "theta", "u", "S"] {
        return Err(Error::Trace(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut groups: Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new();
    for (line, record) in reader.deserialize::<(f64, f64, f64, f64)>().enumerate() {
        let (t, theta, u, s) = record.map_err(|e| Error::Trace(format!("row {}: {e}", line + 2)))?;
        match groups.last_mut() {
            Some(g) if g.0 == t => {
                g.1.push(theta);
                g.2.push(u);
                g.3.push(s);
            }
            _ => groups.push((t, vec![theta], vec![u], vec![s])),
        }
    }
    let n = groups.first().map(|g| g.1.len()).ok_or_else(|| Error::Trace("no rows".into()))?;
    let grid = AngularGrid::cell_centered(n);
    let nodes = grid.nodes();
    let mut trace = Trace::new(alpha, grid, scheme);
    for (t, theta, u, s) in groups {
        if theta.len() != n {
            return Err(Error::Trace(format!("sample t = {t} has {} rows, expected {n}", theta.len())));
        }
        if theta.iter().zip(&nodes).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::Trace(format!("sample t = {t} is not on the {n}-node grid")));
        }
        if let Some(prev) = trace.samples.last() {
            if t <= prev.t {
                return Err(Error::Trace(format!("sample times not increasing at t = {t}")));
            }
        }
        trace.samples.push(TraceSample { t, u, s });
    }
    Ok(trace)
}

/// Header `theta,x1,x2`.
pub fn write_curve_csv<W: Write>(curve: &CurveSample, mut out: W) -> Result<()> {
    writeln!(out, "theta,x1,x2")?;
    for i in 0..curve.len() {
        writeln!(out, "{},{},{}", curve.theta[i], curve.x1[i], curve.x2[i])?;
    }
    Ok(())
}

/// Header `x,f,fx`.
pub fn write_graph_csv<W: Write>(graph: &GraphFunction, mut out: W) -> Result<()> {
    writeln!(out, "x,f,fx")?;
    for k in 0..graph.abscissae.len() {
        writeln!(out, "{},{},{}", graph.abscissae[k], graph.ordinates[k], graph.slopes[k])?;
    }
    Ok(())
}

/// Header `theta,x1,x2,u_star`.
pub fn write_soliton_csv<W: Write>(data: &SolitonData, mut out: W) -> Result<()> {
    writeln!(out, "theta,x1,x2,u_star")?;
    let c = &data.profile;
    for i in 0..c.len() {
        writeln!(out, "{},{},{},{}", c.theta[i], c.x1[i], c.x2[i], data.u_star[i])?;
    }
    Ok(())
}

/// Creates `path` (and parents) and writes `f`'s output to it.
pub fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}
