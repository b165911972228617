use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{Format, RunConfig};
use super::{Failure, EXIT_FAILURE, EXIT_OK};
use crate::analysis::{self, BinnedRates, FitResult};
use crate::exec::Execution;
use crate::io::{self, Manifest, ScanRow};
use crate::model::ModelParams;
use crate::montecarlo::{self, digest, params_fingerprint, SimConfig};
use crate::verify::{self, GridSpec, QuadratureReport};

type CmdResult = Result<i32, Failure>;
type ReportWriter = fn(&mut BufWriter<File>, &QuadratureReport, &str) -> crate::Result<()>;

const EXEC: Execution = Execution::Parallel;

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    Ok((path, BufWriter::new(f)))
}

fn finish(path: PathBuf, mut w: BufWriter<File>) -> Result<PathBuf, Failure> {
    w.flush()?;
    Ok(path)
}

fn list(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn verify_fingerprint(params: &ModelParams, grid: &GridSpec) -> String {
    digest(&format!(
        "lhv-verify;{};t_max={:?};points={}",
        params_fingerprint(params),
        grid.t_max,
        grid.points_per_axis
    ))
}

fn write_verify(cfg: &RunConfig, report: &QuadratureReport, fp: &str) -> Result<Vec<PathBuf>, Failure> {
    let mut written = Vec::new();
    for f in &cfg.formats {
        let (name, writer): (&str, ReportWriter) = match f {
            Format::Table => ("verify_report.txt", io::write_report_table),
            Format::Tree => ("verify_report.toml", io::write_report_tree),
            Format::Csv => ("verify_report.csv", io::write_report_csv),
        };
        let (path, mut w) = create(&cfg.output_dir, name)?;
        writer(&mut w, report, fp)?;
        written.push(finish(path, w)?);
    }
    Ok(written)
}

pub(super) fn verify(cfg: &RunConfig) -> CmdResult {
    let report = verify::full_verification(&cfg.params, cfg.grid, EXEC)?;
    let fp = verify_fingerprint(&cfg.params, &cfg.grid);
    let written = write_verify(cfg, &report, &fp)?;
    let failed = report.failures().count();
    println!(
        "verify: {} checks, {} failed, max residual {:.3e} (joint {:.3e}, norm {:.3e}, ikl {:.3e}, conditional {:.3e})",
        report.checks.len(),
        failed,
        report.max_residual(),
        report.max_residual_of("joint."),
        report.max_residual_of("norm."),
        report.max_residual_of("ikl."),
        report.max_residual_of("conditional."),
    );
    list(&written);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

pub(super) fn simulate(cfg: &RunConfig) -> CmdResult {
    cfg.sim.validate()?;
    let batch = montecarlo::generate(cfg.sim, EXEC)?;
    let stats = batch.rng_stats();

    let (events_path, mut w) = create(&cfg.output_dir, "events.csv")?;
    io::write_events(&mut w, &batch, &cfg.sim)?;
    let events_path = finish(events_path, w)?;

    let manifest = Manifest {
        fingerprint: batch.config_fingerprint.clone(),
        params_fingerprint: params_fingerprint(&cfg.params),
        tau: cfg.params.tau(),
        delta_m: cfg.params.delta_m(),
        n_events: cfg.sim.n_events,
        seed: cfg.sim.seed,
        symmetrized: cfg.sim.symmetrized,
        max_rejection_iters: cfg.sim.max_rejection_iters,
        lambda_acceptance: stats.lambda_acceptance_rate,
        lambda_acceptance_expected: 2.0 / std::f64::consts::PI,
        t2_acceptance: stats.t2_acceptance_rate,
        event_file: "events.csv".into(),
    };
    let (manifest_path, mut w) = create(&cfg.output_dir, "manifest.toml")?;
    io::write_manifest(&mut w, &manifest)?;
    let manifest_path = finish(manifest_path, w)?;

    println!(
        "simulate: {} events, fingerprint {}, lambda acceptance {:.4} (expected {:.4}), t2 acceptance {:.4}",
        batch.events.len(),
        batch.config_fingerprint,
        stats.lambda_acceptance_rate,
        manifest.lambda_acceptance_expected,
        stats.t2_acceptance_rate
    );
    list(&[events_path, manifest_path]);
    Ok(EXIT_OK)
}

fn default_span(cfg: &RunConfig, params: &ModelParams) -> crate::Result<Vec<f64>> {
    if cfg.edges_explicit {
        Ok(cfg.edges.clone())
    } else {
        analysis::uniform_edges(cfg.edges.len() - 1, 5.0 * params.tau())
    }
}

fn header_f64(file: &io::EventFile, key: &str) -> Result<f64, Failure> {
    file.get(key)
        .ok_or_else(|| Failure::Usage(format!("event file header lacks `{key}`")))?
        .parse()
        .map_err(|_| Failure::Usage(format!("event file header has a bad `{key}`")))
}

fn write_fit(cfg: &RunConfig, fit: &FitResult, true_dm: f64, fp: &str) -> Result<Vec<PathBuf>, Failure> {
    let mut written = Vec::new();
    if cfg.formats.contains(&Format::Table) {
        let (p, mut w) = create(&cfg.output_dir, "fit.txt")?;
        io::write_fit_table(&mut w, fit, true_dm, fp)?;
        written.push(finish(p, w)?);
    }
    if cfg.formats.contains(&Format::Tree) {
        let (p, mut w) = create(&cfg.output_dir, "fit.toml")?;
        io::write_fit_tree(&mut w, fit, true_dm, fp)?;
        written.push(finish(p, w)?);
    }
    Ok(written)
}

pub(super) fn analyze(cfg: &RunConfig, event_file: &Path, model_given: bool) -> CmdResult {
    let f = File::open(event_file).map_err(|e| Failure::Runtime(format!("{}: {e}", event_file.display())))?;
    let file = io::read_events(BufReader::new(f))?;
    let recorded = file
        .get("params_fingerprint")
        .ok_or_else(|| Failure::Usage("event file header lacks `params_fingerprint`".into()))?
        .to_string();
    let file_params = ModelParams::new(header_f64(&file, "tau")?, header_f64(&file, "delta_m")?)?;
    if params_fingerprint(&file_params) != recorded {
        return Err(Failure::Usage("event file header parameters do not match its params_fingerprint".into()));
    }
    let params = if model_given {
        if params_fingerprint(&cfg.params) != recorded {
            return Err(Failure::Usage(format!(
                "model parameters (tau={}, delta_m={}) differ from the event file's (tau={}, delta_m={})",
                cfg.params.tau(),
                cfg.params.delta_m(),
                file_params.tau(),
                file_params.delta_m()
            )));
        }
        cfg.params
    } else {
        file_params
    };
    if file.events.is_empty() {
        return Err(Failure::Runtime("event file contains no events".into()));
    }

    let edges = default_span(cfg, &params)?;
    let binned: BinnedRates = analysis::bin_events(&file.events, &edges, EXEC)?;
    let fp = digest(&format!(
        "lhv-analyze;{};events={};edges={:?}",
        file.get("fingerprint").unwrap_or(""),
        file.events.len(),
        edges
    ));

    let (p, mut w) = create(&cfg.output_dir, "analysis_bins.csv")?;
    io::write_bins_csv(&mut w, &analysis::bin_table(&binned, &params)?, &fp)?;
    let mut written = vec![finish(p, w)?];
    let (p, mut w) = create(&cfg.output_dir, "rate_curves.csv")?;
    io::write_curves_csv(&mut w, &analysis::rate_curves(&binned, &params), &fp)?;
    written.push(finish(p, w)?);

    let fit = analysis::goodness_of_fit(&binned, &params).map_err(|e| Failure::Runtime(e.to_string()))?;
    written.extend(write_fit(cfg, &fit, params.delta_m(), &fp)?);
    println!(
        "analyze: {} events, chi2/dof same {:.3} ({} dof), opposite {:.3} ({} dof), delta_m fit {:.6} +- {:.6} (true {})",
        binned.n_total,
        fit.chi2_per_dof_same(),
        fit.dof_same,
        fit.chi2_per_dof_opposite(),
        fit.dof_opposite,
        fit.fitted_delta_m,
        fit.fitted_delta_m_err,
        params.delta_m()
    );
    list(&written);
    Ok(EXIT_OK)
}

fn scan_point(cfg: &RunConfig, x: f64) -> crate::Result<ScanRow> {
    let params = ModelParams::from_mixing(x)?;
    let grid = GridSpec {
        t_max: cfg.grid.t_max / cfg.params.tau(),
        ..cfg.grid
    };
    let report = verify::full_verification(&params, grid, EXEC)?;
    let mut sim = SimConfig::new(params, cfg.sim.n_events, cfg.sim.seed).symmetrized(cfg.sim.symmetrized);
    sim.max_rejection_iters = cfg.sim.max_rejection_iters;
    sim.validate()?;
    let batch = montecarlo::generate(sim, EXEC)?;
    let edges = default_span(cfg, &params)?;
    let binned = analysis::bin_batch(&batch, &edges, EXEC)?;
    let fit = analysis::goodness_of_fit(&binned, &params)?;
    Ok(ScanRow {
        x,
        max_verify_residual: report.max_residual(),
        verify_passed: report.all_passed(),
        fitted_delta_m: fit.fitted_delta_m,
        fit_err: fit.fitted_delta_m_err,
        chi2_per_dof_same: fit.chi2_per_dof_same(),
        chi2_per_dof_opposite: fit.chi2_per_dof_opposite(),
        error: String::new(),
    })
}

pub(super) fn scan(cfg: &RunConfig) -> CmdResult {
    let xs = cfg
        .x_values
        .clone()
        .ok_or_else(|| Failure::Usage("scan needs --x-values (or [scan] x_values)".into()))?;
    if xs.is_empty() {
        return Err(Failure::Usage("scan needs at least one x value".into()));
    }
    if let Some(bad) = xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Failure::Usage(format!("invalid x value {bad}: must be finite and > 0")));
    }
    let rows: Vec<ScanRow> = xs
        .iter()
        .map(|&x| {
            scan_point(cfg, x).unwrap_or_else(|e| ScanRow {
                x,
                max_verify_residual: f64::NAN,
                verify_passed: false,
                fitted_delta_m: f64::NAN,
                fit_err: f64::NAN,
                chi2_per_dof_same: f64::NAN,
                chi2_per_dof_opposite: f64::NAN,
                error: e.to_string(),
            })
        })
        .collect();
    let fp = digest(&format!(
        "lhv-scan;x={xs:?};events={};seed={};symmetrized={};bins={};points={}",
        cfg.sim.n_events,
        cfg.sim.seed,
        cfg.sim.symmetrized,
        cfg.edges.len() - 1,
        cfg.grid.points_per_axis
    ));
    let (p, mut w) = create(&cfg.output_dir, "scan.csv")?;
    io::write_scan_csv(&mut w, &rows, &fp)?;
    let p = finish(p, w)?;
    for r in &rows {
        println!(
            "x={}: verify {} (max residual {:.2e}), delta_m fit {:.5} +- {:.5}{}",
            r.x,
            if r.verify_passed { "ok" } else { "FAILED" },
            r.max_verify_residual,
            r.fitted_delta_m,
            r.fit_err,
            if r.error.is_empty() { String::new() } else { format!(" error: {}", r.error) }
        );
    }
    list(&[p]);
    let ok = rows.iter().all(|r| r.error.is_empty() && r.verify_passed);
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}
