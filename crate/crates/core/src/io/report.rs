use std::io::Write;

use serde::Serialize;

use super::write_header;
use crate::analysis::{BinRow, CurvePoint, FitResult};
use crate::verify::{Check, QuadratureReport};
use crate::Result;

fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| crate::Error::Io(std::io::Error::other(e)))
}

/// Aligned, human-readable verification report.
pub fn write_report_table<W: Write>(w: &mut W, report: &QuadratureReport, fingerprint: &str) -> Result<()> {
    write_header(w, "verify report", fingerprint)?;
    writeln!(w, "# tau={} delta_m={}", report.tau, report.delta_m)?;
    writeln!(w, "# time_cutoff={} tail_bound={:e}", report.time_cutoff, report.tail_bound)?;
    let failed = report.failures().count();
    writeln!(
        w,
        "# checks={} failed={} max_residual={:.3e}",
        report.checks.len(),
        failed,
        report.max_residual()
    )?;
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
    writeln!(
        w,
        "{:<width$}  {:>24}  {:>24}  {:>10}  {:>9}  passed",
        "name", "target", "computed", "residual", "tolerance"
    )?;
    for c in &report.checks {
        writeln!(
            w,
            "{:<width$}  {:>24.16e}  {:>24.16e}  {:>10.3e}  {:>9.1e}  {}",
            c.name, c.target, c.computed, c.residual, c.tolerance, c.passed
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportSummary {
    all_passed: bool,
    checks: usize,
    failed: usize,
    max_residual: f64,
}

#[derive(Serialize)]
struct ReportTree<'a> {
    fingerprint: &'a str,
    tau: f64,
    delta_m: f64,
    time_cutoff: f64,
    tail_bound: f64,
    summary: ReportSummary,
    checks: &'a [Check],
}

/// Nested key/value (TOML) form of the verification report.
pub fn write_report_tree<W: Write>(w: &mut W, report: &QuadratureReport, fingerprint: &str) -> Result<()> {
    write_header(w, "verify report", fingerprint)?;
    let doc = ReportTree {
        fingerprint,
        tau: report.tau,
        delta_m: report.delta_m,
        time_cutoff: report.time_cutoff,
        tail_bound: report.tail_bound,
        summary: ReportSummary {
            all_passed: report.all_passed(),
            checks: report.checks.len(),
            failed: report.failures().count(),
            max_residual: report.max_residual(),
        },
        checks: &report.checks,
    };
    w.write_all(to_toml(&doc)?.as_bytes())?;
    Ok(())
}

pub fn write_report_csv<W: Write>(w: &mut W, report: &QuadratureReport, fingerprint: &str) -> Result<()> {
    write_header(w, "verify report", fingerprint)?;
    writeln!(w, "name,target,computed,residual,tolerance,passed")?;
    for c in &report.checks {
        writeln!(w, "{},{:e},{:e},{:e},{:e},{}", c.name, c.target, c.computed, c.residual, c.tolerance, c.passed)?;
    }
    Ok(())
}

pub fn write_fit_table<W: Write>(w: &mut W, fit: &FitResult, true_delta_m: f64, fingerprint: &str) -> Result<()> {
    write_header(w, "fit summary", fingerprint)?;
    let rows: [(&str, String); 12] = [
        ("chi2_same", format!("{:.4}", fit.chi2_same)),
        ("dof_same", fit.dof_same.to_string()),
        ("chi2_per_dof_same", format!("{:.4}", fit.chi2_per_dof_same())),
        ("p_value_same", format!("{:.4}", fit.p_value_same)),
        ("chi2_opposite", format!("{:.4}", fit.chi2_opposite)),
        ("dof_opposite", fit.dof_opposite.to_string()),
        ("chi2_per_dof_opposite", format!("{:.4}", fit.chi2_per_dof_opposite())),
        ("p_value_opposite", format!("{:.4}", fit.p_value_opposite)),
        ("delta_m_true", format!("{true_delta_m}")),
        ("delta_m_fit", format!("{:.6} +- {:.6}", fit.fitted_delta_m, fit.fitted_delta_m_err)),
        ("delta_m_rel_dev", format!("{:.3e}", (fit.fitted_delta_m - true_delta_m) / true_delta_m)),
        ("asym_chi2_per_dof", format!("{:.4} ({} dof, p = {:.4})", fit.asym_chi2 / fit.asym_dof as f64, fit.asym_dof, fit.asym_p_value)),
    ];
    for (k, v) in rows {
        writeln!(w, "{k:<22} {v}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FitTree<'a> {
    fingerprint: &'a str,
    delta_m_true: f64,
    fit: &'a FitResult,
}

pub fn write_fit_tree<W: Write>(w: &mut W, fit: &FitResult, true_delta_m: f64, fingerprint: &str) -> Result<()> {
    write_header(w, "fit summary", fingerprint)?;
    let doc = FitTree {
        fingerprint,
        delta_m_true: true_delta_m,
        fit,
    };
    w.write_all(to_toml(&doc)?.as_bytes())?;
    Ok(())
}

/// Per-bin table: `dt_lo,dt_hi,n_same,n_opp,exp_same,exp_opp,asym,asym_err`.
pub fn write_bins_csv<W: Write>(w: &mut W, rows: &[BinRow], fingerprint: &str) -> Result<()> {
    write_header(w, "binned rates", fingerprint)?;
    writeln!(w, "dt_lo,dt_hi,n_same,n_opp,exp_same,exp_opp,asym,asym_err")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            r.dt_lo, r.dt_hi, r.n_same, r.n_opp, r.exp_same, r.exp_opp, r.asym, r.asym_err
        )?;
    }
    Ok(())
}

/// Empirical conditional rates with errors next to the model curves.
pub fn write_curves_csv<W: Write>(w: &mut W, points: &[CurvePoint], fingerprint: &str) -> Result<()> {
    write_header(w, "rate curves", fingerprint)?;
    writeln!(w, "# empirical counts scaled by 1/(2 n_total width) to estimate R_same, R_opp")?;
    writeln!(w, "dt_center,rate_same,rate_same_err,rate_opp,rate_opp_err,model_same,model_opp")?;
    for p in points {
        writeln!(
            w,
            "{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            p.dt_center, p.rate_same, p.rate_same_err, p.rate_opp, p.rate_opp_err, p.model_same, p.model_opp
        )?;
    }
    Ok(())
}

/// Run manifest written next to an event file.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub fingerprint: String,
    pub params_fingerprint: String,
    pub tau: f64,
    pub delta_m: f64,
    pub n_events: u64,
    pub seed: u64,
    pub symmetrized: bool,
    pub max_rejection_iters: u64,
    pub lambda_acceptance: f64,
    pub lambda_acceptance_expected: f64,
    pub t2_acceptance: f64,
    pub event_file: String,
}

pub fn write_manifest<W: Write>(w: &mut W, m: &Manifest) -> Result<()> {
    write_header(w, "run manifest", &m.fingerprint)?;
    w.write_all(to_toml(m)?.as_bytes())?;
    Ok(())
}

/// One mixing-parameter point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub x: f64,
    pub max_verify_residual: f64,
    pub verify_passed: bool,
    pub fitted_delta_m: f64,
    pub fit_err: f64,
    pub chi2_per_dof_same: f64,
    pub chi2_per_dof_opposite: f64,
    /// Empty when the point completed.
    pub error: String,
}

pub fn write_scan_csv<W: Write>(w: &mut W, rows: &[ScanRow], fingerprint: &str) -> Result<()> {
    write_header(w, "scan", fingerprint)?;
    writeln!(w, "x,max_verify_residual,verify_passed,fitted_delta_m,fit_err,chi2_per_dof_same,chi2_per_dof_opposite,error")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.3e},{},{:.6},{:.6},{:.4},{:.4},{}",
            r.x,
            r.max_verify_residual,
            r.verify_passed,
            r.fitted_delta_m,
            r.fit_err,
            r.chi2_per_dof_same,
            r.chi2_per_dof_opposite,
            r.error.replace(',', ";")
        )?;
    }
    Ok(())
}
