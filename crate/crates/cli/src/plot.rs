//! Plot-data extraction: plain CSV views of a report for external plotting
//! tools. Operates on report JSON so it works on files from any run.

use serde_json::Value;
use thiserror::Error;

use crate::report::SpaceReport;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PlotError {
    #[error("report is missing the section needed for {kind}: {detail}")]
    MissingSection { kind: &'static str, detail: String },
    #[error(
        "unknown plot kind '{0}' (expected rho-histogram, rho-vs-rhobar or delta-quadruple-topk)"
    )]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    RhoHistogram,
    RhoVsRhoBar,
    DeltaQuadrupleTopk,
}

impl PlotKind {
    fn name(self) -> &'static str {
        match self {
            PlotKind::RhoHistogram => "rho-histogram",
            PlotKind::RhoVsRhoBar => "rho-vs-rhobar",
            PlotKind::DeltaQuadrupleTopk => "delta-quadruple-topk",
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = PlotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rho-histogram" => Ok(PlotKind::RhoHistogram),
            "rho-vs-rhobar" => Ok(PlotKind::RhoVsRhoBar),
            "delta-quadruple-topk" => Ok(PlotKind::DeltaQuadrupleTopk),
            other => Err(PlotError::UnknownKind(other.to_string())),
        }
    }
}

/// Number of equal-width bins for the rho histogram.
const HISTOGRAM_BINS: usize = 64;

fn triple_detail(report: &Value, kind: &'static str) -> Result<Vec<(f64, f64)>, PlotError> {
    let detail = report
        .pointer("/triples/detail")
        .and_then(Value::as_array)
        .ok_or(PlotError::MissingSection {
            kind,
            detail: "per-triple records absent; rerun with keep_triples".into(),
        })?;
    // Degenerate triples have null rho and are skipped.
    Ok(detail
        .iter()
        .filter_map(|t| {
            let rho = t.get("rho")?.as_f64()?;
            let rho_bar = t.get("rho_bar")?.as_f64()?;
            Some((rho, rho_bar))
        })
        .collect())
}

/// Emits the requested CSV (header line included) from a report value.
pub fn emit_plot_data_value(report: &Value, which: PlotKind) -> Result<String, PlotError> {
    match which {
        PlotKind::RhoHistogram => {
            let rhos: Vec<f64> = triple_detail(report, which.name())?
                .iter()
                .map(|&(rho, _)| rho)
                .collect();
            if rhos.is_empty() {
                return Err(PlotError::MissingSection {
                    kind: which.name(),
                    detail: "no nondegenerate triples in the report".into(),
                });
            }
            let lo = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = rhos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut out = String::from("bin_lo,bin_hi,count\n");
            if lo == hi {
                out.push_str(&format!("{lo},{hi},{}\n", rhos.len()));
                return Ok(out);
            }
            let width = (hi - lo) / HISTOGRAM_BINS as f64;
            let mut counts = [0u64; HISTOGRAM_BINS];
            for &r in &rhos {
                let bin = (((r - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
                counts[bin] += 1;
            }
            for (b, &count) in counts.iter().enumerate() {
                let bin_lo = lo + b as f64 * width;
                let bin_hi = lo + (b + 1) as f64 * width;
                out.push_str(&format!("{bin_lo},{bin_hi},{count}\n"));
            }
            Ok(out)
        }
        PlotKind::RhoVsRhoBar => {
            let pairs = triple_detail(report, which.name())?;
            let mut out = String::from("rho,rho_bar\n");
            for (rho, rho_bar) in pairs {
                out.push_str(&format!("{rho},{rho_bar}\n"));
            }
            Ok(out)
        }
        PlotKind::DeltaQuadrupleTopk => {
            let top = report
                .pointer("/delta/top")
                .and_then(Value::as_array)
                .filter(|t| !t.is_empty())
                .ok_or(PlotError::MissingSection {
                    kind: which.name(),
                    detail: "delta top-k list absent; rerun with delta_top_k > 0".into(),
                })?;
            let mut out = String::from("defect,x1,x2,x3,x4\n");
            for item in top {
                let defect = item.get("defect").and_then(Value::as_f64).ok_or(
                    PlotError::MissingSection {
                        kind: which.name(),
                        detail: "malformed top-k entry".into(),
                    },
                )?;
                let idx = item
                    .get("indices")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 4)
                    .ok_or(PlotError::MissingSection {
                        kind: which.name(),
                        detail: "malformed top-k entry".into(),
                    })?;
                let ids: Vec<String> = idx.iter().map(|v| v.to_string()).collect();
                out.push_str(&format!("{defect},{}\n", ids.join(",")));
            }
            Ok(out)
        }
    }
}

/// Convenience entry point for in-process reports.
pub fn emit_plot_data(report: &SpaceReport, which: PlotKind) -> Result<String, PlotError> {
    let value = serde_json::to_value(report).expect("report serialization cannot fail");
    emit_plot_data_value(&value, which)
}
