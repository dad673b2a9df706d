//! Rendering of estimation, bandwidth and simulation reports as aligned
//! tables, CSV and JSON.

use std::fmt::Write as _;

use lpdens::{BandwidthResult, InferenceTable};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::simulate::SimReport;

const FIT_RULE: usize = 75;
const BW_RULE: usize = 32;
const SIM_RULE: usize = 78;

/// Settings echoed in report headers and JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub p: usize,
    pub v: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<usize>,
    pub kernel: String,
    pub bwselect: String,
    pub regularize: bool,
    pub masspoints: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ciuniform: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cisimul: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

/// One grid point of `fit` output. Numeric fields are null where the fit
/// failed; `error` then carries the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub index: usize,
    pub grid: f64,
    pub bw: f64,
    pub eff_n: usize,
    pub regularized: bool,
    pub fallback: bool,
    pub est_p: Option<f64>,
    pub se_p: Option<f64>,
    pub est_q: Option<f64>,
    pub se_q: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub command: String,
    pub config: ConfigEcho,
    pub band_crit: Option<f64>,
    pub points: Vec<FitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BwRecord {
    pub index: usize,
    pub grid: f64,
    pub bw: f64,
    pub eff_n: usize,
    pub regularized: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BwReport {
    pub command: String,
    pub config: ConfigEcho,
    pub points: Vec<BwRecord>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl FitReport {
    pub fn new(config: ConfigEcho, bw: &BandwidthResult, table: &InferenceTable) -> Self {
        let points = table
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| FitRecord {
                index: i + 1,
                grid: r.x,
                bw: r.h,
                eff_n: r.eff_n,
                regularized: bw.regularized[i],
                fallback: bw.fallback[i],
                est_p: finite(r.est_p),
                se_p: finite(r.se_p),
                est_q: finite(r.est_q),
                se_q: finite(r.se_q),
                ci_lo: finite(r.ci_lo),
                ci_hi: finite(r.ci_hi),
                error: r.error.clone(),
            })
            .collect();
        FitReport {
            command: "fit".into(),
            config,
            band_crit: table.band_crit,
            points,
        }
    }
}

impl BwReport {
    pub fn new(config: ConfigEcho, bw: &BandwidthResult) -> Self {
        let points = (0..bw.h.len())
            .map(|i| BwRecord {
                index: i + 1,
                grid: bw.grid.points()[i],
                bw: bw.h[i],
                eff_n: bw.eff_n[i],
                regularized: bw.regularized[i],
                fallback: bw.fallback[i],
            })
            .collect();
        BwReport {
            command: "bw".into(),
            config,
            points,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn header_line(out: &mut String, width: usize, label: &str, tag: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{:<width$}{:<8}{}", label, tag, value);
}

fn rule(out: &mut String, c: char, n: usize) {
    out.extend(std::iter::repeat_n(c, n));
    out.push('\n');
}

fn num(v: Option<f64>, width: usize) -> String {
    match v {
        Some(x) => format!("{x:>width$.4}"),
        None => format!("{:>width$}", "NA"),
    }
}

fn separated(out: &mut String, rows: &[String], sep: usize, width: usize) {
    for (i, row) in rows.iter().enumerate() {
        if sep > 0 && i > 0 && i % sep == 0 {
            rule(out, '-', width);
        }
        out.push_str(row.trim_end());
        out.push('\n');
    }
}

fn percent(alpha: f64) -> String {
    let level = 100.0 * (1.0 - alpha);
    if (level - level.round()).abs() < 1e-9 {
        format!("{}", level.round())
    } else {
        format!("{level:.1}")
    }
}

pub fn fit_table(report: &FitReport, sep: usize) -> String {
    let c = &report.config;
    let q = c.q.unwrap_or(c.p + 1);
    let mut out = String::from("Call: lpdens fit\n\n");
    header_line(&mut out, 41, "Sample size", "(n=)", c.n);
    header_line(&mut out, 41, "Polynomial order for point estimation", "(p=)", c.p);
    header_line(&mut out, 41, "Order of derivative estimated", "(v=)", c.v);
    header_line(&mut out, 41, "Polynomial order for confidence interval", "(q=)", q);
    header_line(&mut out, 41, "Kernel function", "", &c.kernel);
    header_line(&mut out, 41, "Bandwidth selection method", "", &c.bwselect);
    out.push('\n');

    let title = if q == c.p { "Conventional" } else { "Robust B.C." };
    let level = percent(c.alpha.unwrap_or(0.05));
    let ci_head = if c.ciuniform == Some(true) {
        format!("   [ Unif. {level}% C.I. ]")
    } else {
        format!("      [ {level}% C.I. ]")
    };
    rule(&mut out, '=', FIT_RULE);
    let _ = writeln!(out, "{:>42}{:>10}       {}", "Point", "Std.", title);
    let _ = writeln!(
        out,
        "{:<5}{:>9}{:>10}{:>8}{:>10}{:>10}{}",
        "Index", "Grid", "B.W.", "Eff.n", "Est.", "Error", ci_head
    );
    rule(&mut out, '=', FIT_RULE);
    let rows: Vec<String> = report
        .points
        .iter()
        .map(|r| {
            format!(
                "{:<4}{:>10.4}{:>10.4}{:>8}{}{}{} ,{}",
                r.index,
                r.grid,
                r.bw,
                r.eff_n,
                num(r.est_p, 10),
                num(r.se_p, 10),
                num(r.ci_lo, 11),
                num(r.ci_hi, 8)
            )
        })
        .collect();
    separated(&mut out, &rows, sep, FIT_RULE);
    rule(&mut out, '=', FIT_RULE);

    if let Some(crit) = report.band_crit {
        let _ = writeln!(out, "Uniform critical value: {crit:.4}");
    }
    for r in &report.points {
        if let Some(e) = &r.error {
            let _ = writeln!(out, "Point {} (grid {:.4}) failed: {e}", r.index, r.grid);
        }
    }
    notes(&mut out, report.points.iter().map(|r| (r.index, r.fallback)));
    out
}

fn notes(out: &mut String, fallback: impl Iterator<Item = (usize, bool)>) {
    let idx: Vec<String> = fallback.filter(|(_, f)| *f).map(|(i, _)| i.to_string()).collect();
    if !idx.is_empty() {
        let _ = writeln!(out, "Rule-of-thumb fallback at points: {}", idx.join(", "));
    }
}

pub fn bw_table(report: &BwReport, sep: usize) -> String {
    let c = &report.config;
    let mut out = String::from("Call: lpdens bw\n\n");
    header_line(&mut out, 38, "Sample size", "(n=)", c.n);
    header_line(&mut out, 38, "Polynomial order for point estimation", "(p=)", c.p);
    header_line(&mut out, 38, "Order of derivative estimated", "(v=)", c.v);
    header_line(&mut out, 38, "Kernel function", "", &c.kernel);
    header_line(&mut out, 38, "Bandwidth selection method", "", &c.bwselect);
    out.push('\n');
    rule(&mut out, '=', BW_RULE);
    let _ = writeln!(out, "{:<5}{:>9}{:>10}{:>8}", "Index", "Grid", "B.W.", "Eff.n");
    rule(&mut out, '=', BW_RULE);
    let rows: Vec<String> = report
        .points
        .iter()
        .map(|r| format!("{:<4}{:>10.4}{:>10.4}{:>8}", r.index, r.grid, r.bw, r.eff_n))
        .collect();
    separated(&mut out, &rows, sep, BW_RULE);
    rule(&mut out, '=', BW_RULE);
    notes(&mut out, report.points.iter().map(|r| (r.index, r.fallback)));
    out
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns `grid,bw,eff_n,est_p,se_p,est_q,se_q,ci_lo,ci_hi`, plus
/// `band_crit` for uniform bands. Failed points leave estimates empty.
pub fn fit_csv(report: &FitReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    let mut head = vec![
        "grid", "bw", "eff_n", "est_p", "se_p", "est_q", "se_q", "ci_lo", "ci_hi",
    ];
    if report.band_crit.is_some() {
        head.push("band_crit");
    }
    w.write_record(&head).map_err(csv_err)?;
    for r in &report.points {
        let mut rec = vec![
            r.grid.to_string(),
            r.bw.to_string(),
            r.eff_n.to_string(),
            cell(r.est_p),
            cell(r.se_p),
            cell(r.est_q),
            cell(r.se_q),
            cell(r.ci_lo),
            cell(r.ci_hi),
        ];
        if let Some(c) = report.band_crit {
            rec.push(c.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    csv_finish(w)
}

pub fn bw_csv(report: &BwReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    w.write_record(["grid", "bw", "eff_n"]).map_err(csv_err)?;
    for r in &report.points {
        w.write_record([r.grid.to_string(), r.bw.to_string(), r.eff_n.to_string()])
            .map_err(csv_err)?;
    }
    csv_finish(w)
}

pub fn sim_table(report: &SimReport) -> String {
    let mut out = String::from("Call: lpdens simulate\n\n");
    header_line(&mut out, 30, "Data generating process", "", report.dgp);
    header_line(&mut out, 30, "Sample size", "(n=)", report.n);
    header_line(&mut out, 30, "Replications", "", report.reps);
    header_line(&mut out, 30, "Bandwidth selection method", "", &report.method);
    header_line(&mut out, 30, "Seed", "", report.seed);
    out.push('\n');
    sim_block(
        &mut out,
        "Local polynomial, robust bias-corrected intervals",
        &report.points,
    );
    if let Some(base) = &report.baseline {
        out.push('\n');
        sim_block(&mut out, "Fixed-kernel estimator, conventional intervals", base);
    }
    out
}

fn sim_block(out: &mut String, name: &str, points: &[crate::simulate::PointSummary]) {
    let _ = writeln!(out, "{name}");
    rule(out, '=', SIM_RULE);
    let _ = writeln!(
        out,
        "{:>8}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "Point", "Truth", "Bias", "SD", "RMSE", "EC", "IL", "Mean h"
    );
    rule(out, '=', SIM_RULE);
    for p in points {
        let _ = writeln!(
            out,
            "{:>8.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.3}{:>10.4}{:>10.4}",
            p.x, p.truth, p.bias, p.sd, p.rmse, p.ec, p.il, p.mean_h
        );
    }
    rule(out, '=', SIM_RULE);
}

pub fn sim_csv(report: &SimReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    w.write_record([
        "estimator",
        "point",
        "truth",
        "bias",
        "sd",
        "rmse",
        "ec",
        "il",
        "mean_h",
        "used",
    ])
    .map_err(csv_err)?;
    let groups = std::iter::once(("lpdens", &report.points)).chain(report.baseline.as_ref().map(|b| ("kde", b)));
    for (name, points) in groups {
        for p in points {
            w.write_record([
                name.to_string(),
                p.x.to_string(),
                p.truth.to_string(),
                p.bias.to_string(),
                p.sd.to_string(),
                p.rmse.to_string(),
                p.ec.to_string(),
                p.il.to_string(),
                p.mean_h.to_string(),
                p.used.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    csv_finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo() -> ConfigEcho {
        ConfigEcho {
            n: 10,
            p: 2,
            v: 1,
            q: Some(3),
            kernel: "triangular".into(),
            bwselect: "user provided".into(),
            regularize: true,
            masspoints: true,
            alpha: Some(0.05),
            ciuniform: Some(false),
            cisimul: None,
            scale: Some(1.0),
            seed: None,
        }
    }

    fn record(i: usize) -> FitRecord {
        FitRecord {
            index: i,
            grid: i as f64 * 0.5,
            bw: 0.5,
            eff_n: 100 + i,
            regularized: false,
            fallback: false,
            est_p: Some(0.25),
            se_p: Some(0.01),
            est_q: Some(0.26),
            se_q: Some(0.02),
            ci_lo: Some(0.22),
            ci_hi: Some(0.3),
            error: None,
        }
    }

    #[test]
    fn dashed_rule_every_sep_rows() {
        let report = FitReport {
            command: "fit".into(),
            config: echo(),
            band_crit: None,
            points: (1..=9).map(record).collect(),
        };
        let t = fit_table(&report, 5);
        let dashes = "-".repeat(75);
        let lines: Vec<&str> = t.lines().collect();
        let pos: Vec<usize> = lines
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == dashes)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(pos.len(), 1);
        assert!(lines[pos[0] - 1].starts_with("5 "));
        assert!(lines[pos[0] + 1].starts_with("6 "));
        assert_eq!(fit_table(&report, 0).lines().filter(|l| *l == dashes).count(), 0);
        assert_eq!(fit_table(&report, 3).lines().filter(|l| *l == dashes).count(), 2);
    }

    #[test]
    fn row_layout() {
        let report = FitReport {
            command: "fit".into(),
            config: echo(),
            band_crit: None,
            points: vec![record(1)],
        };
        let t = fit_table(&report, 5);
        assert!(t.contains("1       0.5000    0.5000     101    0.2500    0.0100     0.2200 ,  0.3000\n"));
        assert!(t.contains("Index     Grid      B.W.   Eff.n      Est.     Error      [ 95% C.I. ]\n"));
        assert!(t.contains("Robust B.C."));
    }

    #[test]
    fn failed_points_print_na() {
        let mut r = record(1);
        r.est_p = None;
        r.error = Some("singular".into());
        let report = FitReport {
            command: "fit".into(),
            config: echo(),
            band_crit: None,
            points: vec![r],
        };
        let t = fit_table(&report, 5);
        assert!(t.contains("NA"));
        assert!(t.contains("failed: singular"));
        let csv = fit_csv(&report).unwrap();
        assert!(csv.lines().nth(1).unwrap().starts_with("0.5,0.5,101,,"));
    }

    #[test]
    fn percent_labels() {
        assert_eq!(percent(0.05), "95");
        assert_eq!(percent(0.01), "99");
        assert_eq!(percent(0.025), "97.5");
    }
}
