//! Run configuration: the single serializable object a report run is
//! reproducible from.

use std::path::PathBuf;

use ballcurv::generators::GeneratorSpec;
use ballcurv::metric::MetricExponent;
use serde::{Deserialize, Serialize};

/// Where the space comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InputSource {
    /// Square distance-matrix CSV with an optional label header.
    MatrixCsv { path: PathBuf },
    /// Coordinate rows; the metric exponent comes with the config.
    CloudCsv { path: PathBuf, p: MetricExponent },
    /// A generator spec evaluated in-process.
    Generator { spec: GeneratorSpec },
}

fn d_tau_rel() -> f64 {
    1e-9
}
fn d_tau_cmp() -> f64 {
    1e-9
}
fn d_tau_deg() -> f64 {
    1e-12
}
fn d_triple_threshold() -> usize {
    60
}
fn d_quad_threshold() -> usize {
    80
}
fn d_sample() -> usize {
    2000
}
fn d_expansion_trials() -> usize {
    200
}
fn d_k_max() -> usize {
    6
}
fn d_dim_cap() -> usize {
    3
}
fn d_max_points() -> usize {
    2048
}
fn d_delta_top_k() -> usize {
    8
}
fn d_true() -> bool {
    true
}

/// Everything a run depends on. A report echoes its config; rerunning the
/// echo reproduces every numeric field byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputSource,
    #[serde(default)]
    pub seed: u64,
    /// Metric-validation tolerance, relative to the largest entry.
    #[serde(default = "d_tau_rel")]
    pub tau_rel: f64,
    /// Verdict tolerance, relative to max(1, rho_bar).
    #[serde(default = "d_tau_cmp")]
    pub tau_cmp: f64,
    /// Degeneracy threshold, relative to the diameter.
    #[serde(default = "d_tau_deg")]
    pub tau_deg: f64,
    #[serde(default = "d_triple_threshold")]
    pub triple_exhaustive_threshold: usize,
    #[serde(default = "d_sample")]
    pub triple_sample: usize,
    #[serde(default = "d_quad_threshold")]
    pub quad_exhaustive_threshold: usize,
    #[serde(default = "d_sample")]
    pub quad_sample: usize,
    #[serde(default = "d_expansion_trials")]
    pub expansion_trials: usize,
    #[serde(default = "d_k_max")]
    pub expansion_k_max: usize,
    #[serde(default = "d_dim_cap")]
    pub dim_cap: usize,
    /// One nerve sweep per radius: a uniform ball of that radius around
    /// every point.
    #[serde(default)]
    pub nerve_radii: Vec<f64>,
    #[serde(default = "d_max_points")]
    pub max_points: usize,
    /// Worker threads (0 = library default). Deserializable from config
    /// files but never echoed: numeric output is worker-count independent
    /// and echoes must be byte-identical across worker counts.
    #[serde(default, skip_serializing)]
    pub workers: usize,
    /// Embed per-triple records in the report (needed by some plot kinds).
    #[serde(default)]
    pub keep_triples: bool,
    #[serde(default = "d_delta_top_k")]
    pub delta_top_k: usize,
    /// Run the full O(n^3) triangle validation on the input.
    #[serde(default = "d_true")]
    pub validate: bool,
    /// Merge duplicate points instead of rejecting them.
    #[serde(default)]
    pub allow_pseudometric: bool,
    /// Report destination (stdout when absent).
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Optional per-triple CSV destination.
    #[serde(default)]
    pub triples_csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: InputSource) -> Self {
        RunConfig {
            input,
            seed: 0,
            tau_rel: d_tau_rel(),
            tau_cmp: d_tau_cmp(),
            tau_deg: d_tau_deg(),
            triple_exhaustive_threshold: d_triple_threshold(),
            triple_sample: d_sample(),
            quad_exhaustive_threshold: d_quad_threshold(),
            quad_sample: d_sample(),
            expansion_trials: d_expansion_trials(),
            expansion_k_max: d_k_max(),
            dim_cap: d_dim_cap(),
            nerve_radii: Vec::new(),
            max_points: d_max_points(),
            workers: 0,
            keep_triples: false,
            delta_top_k: d_delta_top_k(),
            validate: true,
            allow_pseudometric: false,
            output: None,
            triples_csv: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let text = r#"{"input": {"type": "matrix-csv", "path": "m.csv"}}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.tau_rel, 1e-9);
        assert_eq!(cfg.triple_exhaustive_threshold, 60);
        assert_eq!(cfg.quad_exhaustive_threshold, 80);
        assert_eq!(cfg.max_points, 2048);
        assert!(cfg.validate);
    }

    #[test]
    fn workers_deserialize_but_never_serialize() {
        let text = r#"{"input": {"type": "matrix-csv", "path": "m.csv"}, "workers": 8}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.workers, 8);
        let echoed = serde_json::to_string(&cfg).unwrap();
        assert!(!echoed.contains("workers"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"input": {"type": "matrix-csv", "path": "m.csv"}, "typo_field": 1}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn generator_source_round_trips() {
        let cfg = RunConfig::new(InputSource::Generator {
            spec: GeneratorSpec::Cycle {
                nodes: 6,
                circumference: 6.0,
            },
        });
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
