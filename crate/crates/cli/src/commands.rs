//! Subcommand implementations and the mapping from library errors to exit
//! codes: 1 check failure, 2 usage or configuration error, 3 integration
//! failure.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use csflab_core::domain::make_grid;
use csflab_core::estimates::{CheckRegistry, Verdict};
use csflab_core::flow::SchemeRegistry;
use csflab_core::io::{self, RunConfig};
use csflab_core::run::{self, CheckSummary, RunOutcome};
use csflab_core::soliton::{translator_height_limit, translator_profile, translator_speed, HeightLimit, SolitonRegime};
use csflab_core::Error;

use crate::Overrides;

pub const CHECK_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const INTEGRATION: u8 = 3;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_FILE: &str = "sweep.json";

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_)
            | Error::EntireGraphRegime { .. }
            | Error::InvalidRecipe(_)
            | Error::Unknown { .. }
            | Error::Trace(_)
            | Error::Json(_) => USAGE,
            Error::Divergence { .. }
            | Error::QuadratureStalled { .. }
            | Error::PositivityLoss { .. }
            | Error::Precondition(_)
            | Error::Reconstruction(_)
            | Error::Io(_) => INTEGRATION,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Debug, Serialize)]
struct SolitonMetadata {
    alpha: f64,
    grid_size: usize,
    regime: SolitonRegime,
    speed: Option<f64>,
    height_limit: Option<HeightLimit>,
    profile: Option<String>,
}

pub fn soliton(alpha: f64, n: usize, out: &Path) -> CmdResult {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Failure::new(USAGE, format!("alpha must be > 0, got {alpha}")));
    }
    let grid = make_grid(n)?;
    let regime = SolitonRegime::classify(alpha);
    let mut meta = SolitonMetadata {
        alpha,
        grid_size: n,
        regime,
        speed: None,
        height_limit: None,
        profile: None,
    };
    fs::create_dir_all(out).map_err(Error::from)?;
    if regime == SolitonRegime::EntireGraph {
        log::warn!("alpha = {alpha} <= 1/2: the translators are entire graphs, no profile written");
    } else {
        let data = translator_profile(alpha, grid)?;
        io::write_file(&out.join(io::SOLITON_FILE), |w| io::write_soliton_csv(&data, w))?;
        meta.speed = Some(translator_speed(alpha)?);
        meta.height_limit = Some(translator_height_limit(alpha)?);
        meta.profile = Some(io::SOLITON_FILE.to_string());
    }
    io::write_json(&meta, &out.join(io::METADATA_FILE))?;
    Ok(())
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(a) = overrides.alpha {
        cfg.params.alpha = a;
    }
    if let Some(n) = overrides.n {
        cfg.params.grid_size = n;
    }
    if let Some(t) = overrides.t_end {
        cfg.params.t_end = t;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn verdict_code(summary: &CheckSummary) -> CmdResult {
    if summary.all_passed {
        Ok(())
    } else {
        let failed: Vec<&str> = summary
            .reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.name.as_str())
            .collect();
        Err(Failure::new(CHECK_FAILED, format!("checks failed: {}", failed.join(", "))))
    }
}

pub fn evolve(config: &Path, overrides: &Overrides) -> CmdResult {
    let cfg = load_config(config, overrides)?;
    let (schemes, checks) = (SchemeRegistry::default(), CheckRegistry::default());
    let outcome = run::execute(&cfg, &schemes, &checks)?;
    outcome.write(&cfg.output_dir)?;
    log::info!("wrote {}", cfg.output_dir.display());
    verdict_code(&outcome.summary)
}

pub fn check(run_dir: &Path, config: Option<&Path>) -> CmdResult {
    let (_, trace) = run::load_trace(run_dir)?;
    let source = config.map_or_else(|| run_dir.join(io::CONFIG_FILE), Path::to_path_buf);
    let cfg = RunConfig::load(&source)?;
    let checks = CheckRegistry::default();
    if let Some(c) = cfg.checks.iter().find(|c| !checks.contains(&c.name)) {
        return Err(Failure::new(USAGE, format!("unknown check `{}`", c.name)));
    }
    let summary = run::run_checks(&trace, &cfg.checks, &checks)?;
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
    println!("{text}");
    verdict_code(&summary)
}

#[derive(Debug, Serialize)]
struct SweepEcho<'a> {
    alphas: &'a [f64],
    base: &'a RunConfig,
}

fn dedup(alphas: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(alphas.len());
    for &a in alphas {
        if out.contains(&a) {
            log::warn!("duplicate alpha {a} ignored");
        } else {
            out.push(a);
        }
    }
    out
}

pub fn run_dir_name(alpha: f64) -> String {
    format!("alpha_{alpha}")
}

pub fn sweep(alphas: &[f64], config: &Path, jobs: Option<usize>, overrides: &Overrides) -> CmdResult {
    let alphas = dedup(alphas);
    if alphas.is_empty() {
        return Err(Failure::new(USAGE, "sweep needs at least one alpha"));
    }
    let base = load_config(config, overrides)?;
    let (schemes, checks) = (SchemeRegistry::default(), CheckRegistry::default());
    let configs: Vec<RunConfig> = alphas
        .iter()
        .map(|&a| {
            let mut cfg = base.clone();
            cfg.params.alpha = a;
            cfg.output_dir = base.output_dir.join(run_dir_name(a));
            cfg.validate(&schemes, &checks).map(|()| cfg)
        })
        .collect::<Result<_, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::new(USAGE, format!("cannot start {jobs:?} workers: {e}")))?;
    let results: Vec<Result<RunOutcome, Error>> = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let outcome = run::execute(cfg, &schemes, &checks)?;
                outcome.write(&cfg.output_dir)?;
                Ok(outcome)
            })
            .collect()
    });

    fs::create_dir_all(&base.output_dir).map_err(Error::from)?;
    io::write_json(
        &SweepEcho {
            alphas: &alphas,
            base: &base,
        },
        &base.output_dir.join(SWEEP_FILE),
    )?;
    let table = summary_table(&base, &configs, &results);
    fs::write(base.output_dir.join(SUMMARY_FILE), table).map_err(Error::from)?;

    let failed: Vec<String> = configs
        .iter()
        .zip(&results)
        .filter(|(_, r)| !matches!(r, Ok(o) if o.summary.all_passed))
        .map(|(c, _)| c.params.alpha.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(CHECK_FAILED, format!("runs failed for alpha = {}", failed.join(", "))))
    }
}

/// Columns `alpha,m,final_sup_error,status` and one verdict column per
/// configured check; failed runs leave the numeric cells empty.
fn summary_table(base: &RunConfig, configs: &[RunConfig], results: &[Result<RunOutcome, Error>]) -> String {
    let mut s = String::from("alpha,m,final_sup_error,status");
    for c in &base.checks {
        s.push(',');
        s.push_str(&c.name);
    }
    s.push('\n');
    for (cfg, result) in configs.iter().zip(results) {
        let alpha = cfg.params.alpha;
        match result {
            Ok(o) => {
                let status = if o.summary.all_passed { "ok" } else { "check_failed" };
                let _ = write!(s, "{alpha},{},{},{status}", o.metadata.translator_speed, o.metadata.final_translator_error);
                for r in &o.summary.reports {
                    let v = match r.verdict {
                        Verdict::Pass => "pass",
                        Verdict::Fail => "fail",
                        Verdict::Trend => "trend",
                    };
                    let _ = write!(s, ",{v}");
                }
            }
            Err(e) => {
                log::error!("alpha = {alpha}: {e}");
                let _ = write!(s, "{alpha},,,integration_failed");
                s.push_str(&",".repeat(base.checks.len()));
            }
        }
        s.push('\n');
    }
    s
}
