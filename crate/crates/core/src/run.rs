//! One configured run end to end: build the initial state, evolve, run the
//! requested checks and write the artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{entropy_trace, translator_distance, CheckInput, CheckRegistry, CheckRequest, EstimateReport};
use crate::flow::{build_initial_seeded, evolve, DtStats, FlowState, SchemeRegistry, Trace};
use crate::geometry::{reconstruct, tip_from_support, to_graph};
use crate::io::{self, RunConfig, RunMetadata};
use crate::soliton::translator_speed;

/// Collar used for the entropy table written with every run.
const ENTROPY_EPSILON: f64 = 0.2;
/// Abscissae in the graph table.
const GRAPH_SAMPLES: usize = 201;
/// The sup-error against the translator is measured away from the ends.
pub const ERROR_RANGE: (f64, f64) = (std::f64::consts::FRAC_PI_6, 5.0 * std::f64::consts::FRAC_PI_6);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub all_passed: bool,
    pub reports: Vec<EstimateReport>,
}

impl CheckSummary {
    pub fn new(reports: Vec<EstimateReport>) -> Self {
        Self {
            all_passed: reports.iter().all(EstimateReport::passed),
            reports,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub trace: Trace,
    pub state: FlowState,
    pub stats: DtStats,
    pub summary: CheckSummary,
    pub metadata: RunMetadata,
}

/// Validates `config`, integrates and runs its checks.
pub fn execute(config: &RunConfig, schemes: &SchemeRegistry, checks: &CheckRegistry) -> Result<RunOutcome> {
    config.validate(schemes, checks)?;
    let params = &config.params;
    let scheme = schemes.get(&config.scheme)?;
    let state = build_initial_seeded(&config.recipe, params.grid()?, params.alpha, config.seed)?;
    let evolution = evolve(state, params, scheme.as_ref(), &config.resolved_samples(), &mut [])?;
    let summary = run_checks(&evolution.trace, &config.checks, checks)?;
    let metadata = RunMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        alpha: params.alpha,
        grid_size: params.grid_size,
        scheme: config.scheme.clone(),
        t_end: params.t_end,
        seed: config.seed,
        translator_speed: translator_speed(params.alpha)?,
        steps: evolution.stats.steps,
        halvings: evolution.stats.halvings,
        min_dt: evolution.stats.min_dt,
        max_dt: evolution.stats.max_dt,
        final_translator_error: translator_distance(&evolution.state.u, params.alpha, ERROR_RANGE)?,
    };
    Ok(RunOutcome {
        config: config.clone(),
        trace: evolution.trace,
        state: evolution.state,
        stats: evolution.stats,
        summary,
        metadata,
    })
}

pub fn run_checks(trace: &Trace, requests: &[CheckRequest], checks: &CheckRegistry) -> Result<CheckSummary> {
    let input = CheckInput { trace };
    let reports = requests
        .iter()
        .map(|r| checks.run(r, &input))
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        log::info!("{}: {:?}", r.name, r.verdict);
    }
    Ok(CheckSummary::new(reports))
}

impl RunOutcome {
    /// Writes config, metadata, report, trace, final curve and graph, and
    /// the entropy table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        io::write_json(&self.config, &dir.join(io::CONFIG_FILE))?;
        io::write_json(&self.metadata, &dir.join(io::METADATA_FILE))?;
        io::write_json(&self.summary, &dir.join(io::REPORT_FILE))?;
        io::write_file(&dir.join(io::TRACE_FILE), |w| io::write_trace_csv(&self.trace, w))?;

        let alpha = self.config.params.alpha;
        let curve = reconstruct(&self.state.u, alpha, tip_from_support(&self.state.s))?;
        io::write_file(&dir.join(io::CURVE_FILE), |w| io::write_curve_csv(&curve, w))?;
        let graph = to_graph(&curve, GRAPH_SAMPLES)?;
        io::write_file(&dir.join(io::GRAPH_FILE), |w| io::write_graph_csv(&graph, w))?;
        match entropy_trace(&self.trace, ENTROPY_EPSILON) {
            Ok(e) => io::write_file(&dir.join(io::ENTROPY_FILE), |w| e.write_csv(w))?,
            Err(e) => log::warn!("entropy table skipped: {e}"),
        }
        Ok(())
    }
}

/// Reads the trace of a run directory written by [`RunOutcome::write`].
pub fn load_trace(dir: &Path) -> Result<(RunMetadata, Trace)> {
    let meta_path = dir.join(io::METADATA_FILE);
    let metadata: RunMetadata = io::read_json(&meta_path)
        .map_err(|e| Error::Trace(format!("cannot read {}: {e}", meta_path.display())))?;
    let trace_path = dir.join(io::TRACE_FILE);
    let file = std::fs::File::open(&trace_path)
        .map_err(|e| Error::Trace(format!("cannot open {}: {e}", trace_path.display())))?;
    let trace = io::read_trace_csv(std::io::BufReader::new(file), metadata.alpha, &metadata.scheme)?;
    if trace.grid.len() != metadata.grid_size {
        return Err(Error::Trace(format!(
            "trace has {} nodes but metadata says {}",
            trace.grid.len(),
            metadata.grid_size
        )));
    }
    Ok((metadata, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FlowParams;
    use crate::flow::InitialDataRecipe;

    fn config() -> RunConfig {
        let mut cfg = RunConfig::new(FlowParams::new(1.0, 32, 0.5), InitialDataRecipe::sin3_perturbation());
        cfg.checks = vec![CheckRequest::named("harnack"), CheckRequest::named("width")];
        cfg.sample_times = vec![0.0, 0.25, 0.5];
        cfg
    }

    #[test]
    fn execute_write_and_reload() {
        let (schemes, checks) = (SchemeRegistry::default(), CheckRegistry::default());
        let out = execute(&config(), &schemes, &checks).unwrap();
        assert_eq!(out.trace.len(), 3);
        assert_eq!(out.summary.reports.len(), 2);
        assert!(out.summary.all_passed, "{:?}", out.summary);
        let dir = tempfile::tempdir().unwrap();
        out.write(dir.path()).unwrap();
        for f in [
            io::CONFIG_FILE,
            io::METADATA_FILE,
            io::REPORT_FILE,
            io::TRACE_FILE,
            io::CURVE_FILE,
            io::GRAPH_FILE,
            io::ENTROPY_FILE,
        ] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        let (meta, trace) = load_trace(dir.path()).unwrap();
        assert_eq!(meta, out.metadata);
        assert_eq!(trace, out.trace);
        let again = run_checks(&trace, &out.config.checks, &checks).unwrap();
        assert_eq!(again, out.summary);
    }

    #[test]
    fn invalid_configs_fail_before_integrating() {
        let (schemes, checks) = (SchemeRegistry::default(), CheckRegistry::default());
        let mut cfg = config();
        cfg.checks.push(CheckRequest::named("nope"));
        assert!(matches!(execute(&cfg, &schemes, &checks), Err(Error::Config(_))));
    }
}
