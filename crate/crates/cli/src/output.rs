//! Curve serialization (CSV and JSON) and the high-SNR slope summary.

use serde::Serialize;
use std::fmt::Write as _;

use relay_outage::{diversity_order, OutageCurve, SelectionScheme};

use crate::spec::Experiment;

/// One grid point as written to disk. Field order is the column order.
#[derive(Debug, Serialize)]
pub struct Row {
    pub snr_db: f64,
    pub analytic: f64,
    pub asymptotic: Option<f64>,
    pub mc_p_hat: f64,
    pub mc_ci_low: f64,
    pub mc_ci_high: f64,
    pub clamped_flag: bool,
}

pub fn rows(curve: &OutageCurve) -> Vec<Row> {
    curve
        .points
        .iter()
        .map(|p| Row {
            snr_db: p.snr_db,
            analytic: p.analytic,
            asymptotic: p.asymptotic,
            mc_p_hat: p.mc.p_hat,
            mc_ci_low: p.mc.ci_low,
            mc_ci_high: p.mc.ci_high,
            clamped_flag: p.clamped,
        })
        .collect()
}

pub fn to_csv(curve: &OutageCurve) -> String {
    let mut out = String::new();
    out.push_str("snr_db,analytic,asymptotic,mc_p_hat,mc_ci_low,mc_ci_high,clamped_flag\n");
    for row in rows(curve) {
        let asymptotic = row
            .asymptotic
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.snr_db,
            row.analytic,
            asymptotic,
            row.mc_p_hat,
            row.mc_ci_low,
            row.mc_ci_high,
            row.clamped_flag
        );
    }
    out
}

pub fn to_json(curve: &OutageCurve) -> String {
    let mut text = serde_json::to_string_pretty(&rows(curve)).expect("rows serialize");
    text.push('\n');
    text
}

/// Least-squares slope of log10(analytic) per dB over the top 10 dB of the
/// grid; `None` when fewer than two usable points exist (clamped or
/// non-positive analytic values are excluded).
pub fn fitted_slope_per_db(curve: &OutageCurve) -> Option<f64> {
    let top = curve
        .points
        .iter()
        .map(|p| p.snr_db)
        .fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.snr_db >= top - 10.0 && !p.clamped && p.analytic > 0.0)
        .map(|p| (p.snr_db, p.analytic.log10()))
        .collect();
    least_squares_slope(&pts)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub struct SummaryLine {
    pub name: String,
    pub protocol: String,
    pub scheme: SelectionScheme,
    pub m: u32,
    pub k: u32,
    pub diversity: u32,
    pub expected_slope_per_db: f64,
    pub fitted_slope_per_db: Option<f64>,
}

pub fn summary_line(exp: &Experiment, curve: &OutageCurve) -> SummaryLine {
    let diversity = diversity_order(exp.scheme, exp.m, exp.k, 0);
    SummaryLine {
        name: exp.name.clone(),
        protocol: exp.protocol.to_string(),
        scheme: exp.scheme,
        m: exp.m,
        k: exp.k,
        diversity,
        expected_slope_per_db: -(diversity as f64) / 10.0,
        fitted_slope_per_db: fitted_slope_per_db(curve),
    }
}

pub fn summary_csv(lines: &[SummaryLine]) -> String {
    let mut out = String::new();
    out.push_str(
        "experiment,protocol,scheme,m,k,diversity_order,expected_slope_per_db,fitted_slope_per_db\n",
    );
    for l in lines {
        let fitted = l
            .fitted_slope_per_db
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            l.name, l.protocol, l.scheme, l.m, l.k, l.diversity, l.expected_slope_per_db, fitted
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use relay_outage::{CurvePoint, OutageEstimate};

    fn curve() -> OutageCurve {
        let points = (0..5)
            .map(|i| {
                let db = 40.0 + 2.5 * i as f64;
                CurvePoint {
                    snr_db: db,
                    // exact slope -0.2 per dB
                    analytic: 10f64.powf(-0.2 * db),
                    asymptotic: None,
                    clamped: false,
                    mc: OutageEstimate::from_counts(10, 1000),
                }
            })
            .collect();
        OutageCurve { points }
    }

    #[test]
    fn slope_recovers_exact_decay() {
        let s = fitted_slope_per_db(&curve()).unwrap();
        assert!((s + 0.2).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_empty_asymptotic() {
        let text = to_csv(&curve());
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "snr_db,analytic,asymptotic,mc_p_hat,mc_ci_low,mc_ci_high,clamped_flag"
        );
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[2], "");
        assert_eq!(fields[6], "false");
    }

    #[test]
    fn json_is_array_of_objects() {
        let text = to_json(&curve());
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let arr = parsed.as_array().unwrap();
        assert_eq!(arr.len(), 5);
        assert!(arr[0].get("snr_db").is_some());
        assert!(arr[0].get("clamped_flag").is_some());
        assert!(arr[0]["asymptotic"].is_null());
    }

    #[test]
    fn slope_needs_two_points() {
        assert!(least_squares_slope(&[(1.0, 2.0)]).is_none());
        assert!(least_squares_slope(&[]).is_none());
    }
}
