//! Report orchestration: load and validate the input, run every scan, and
//! assemble the serializable report.

use std::time::Instant;

use ballcurv::curvature::{
    expansion_constant_estimate, scan_triples, ExpansionConfig, ExpansionEstimate, ScanConfig,
    ScanSummary, TripleReport, Verdict,
};
use ballcurv::generators::{generate, Generated};
use ballcurv::hyperbolicity::{four_point_delta, DeltaConfig, DeltaReport};
use ballcurv::io;
use ballcurv::metric::{
    lp_distance_matrix, trusted_metric, validate_metric, validate_pseudometric, DistanceMatrix,
    PointCloud, ValidationReport,
};
use ballcurv::nerve::{betti_mod2, helly_defects, NerveComplex};
use serde::Serialize;
use thiserror::Error;

use crate::config::{InputSource, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Sampled-witness disclaimer carried by every report: intersections are
/// only detected at points of the space itself.
pub const WITNESS_CAVEAT: &str =
    "witness-in-sample: all witnesses are points of the input space; for samples of \
     continuum spaces this undercounts ball intersections, so every verdict is a \
     necessary-condition check on the sample, not a certificate for the underlying space";

/// The comparison condition only defines the nonpositive case; calling its
/// failure "positive" is a reporting convention.
pub const POSITIVE_LABEL_CAVEAT: &str =
    "positive-verdict: 'positive' only records that rho exceeded the planar comparison \
     value for that triple; the comparison condition itself defines just the nonpositive case";

#[derive(Error, Debug)]
pub enum RunError {
    #[error("input error: {0}")]
    Input(#[from] io::CsvError),
    #[error("config error: {0}")]
    Config(String),
    #[error("metric validation failed: {0}")]
    Validation(ValidationReport),
    #[error("write error: {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl RunError {
    /// Process exit status: 2 for metric-validation failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationSummary {
    pub n: usize,
    pub diameter: f64,
    /// Whether the full triangle scan ran (false means only the O(n^2)
    /// shape checks did).
    pub triangle_checked: bool,
    /// Points merged away by pseudometric quotienting, if any.
    pub merged_points: Option<usize>,
    /// Point labels, carried verbatim from the input so witness indices in
    /// any section can be named.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TriplesSection {
    #[serde(flatten)]
    pub summary: ScanSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Vec<TripleReport>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaSection {
    #[serde(flatten)]
    pub report: DeltaReport,
    /// delta / diameter; absent when the diameter vanishes.
    pub normalized: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionSection {
    #[serde(flatten)]
    pub estimate: ExpansionEstimate,
    /// The enumeration is finite, so this is a lower bound, never the value.
    pub semantics: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct NerveSection {
    pub radius: f64,
    pub simplex_counts: Vec<usize>,
    pub betti: Vec<usize>,
    /// Betti numbers were computed for dimensions 0..=betti_max_dim.
    pub betti_max_dim: usize,
    pub helly_defects: Vec<Vec<usize>>,
    /// Defects were enumerated for subset sizes 3..=helly_checked_up_to;
    /// an empty list means "no defect found up to that size", nothing more.
    pub helly_checked_up_to: usize,
    pub euler_characteristic: i64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub validate_ms: u64,
    pub triples_ms: u64,
    pub delta_ms: u64,
    pub expansion_ms: u64,
    pub nerve_ms: u64,
    pub total_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub caveats: Vec<&'static str>,
    pub validation: ValidationSummary,
    pub triples: TriplesSection,
    pub delta: DeltaSection,
    pub expansion: ExpansionSection,
    pub nerve: Vec<NerveSection>,
    /// Wall-clock timings, quarantined so deterministic consumers can drop
    /// this one subtree.
    pub timings: Timings,
}

/// Loads the input source as a raw table plus labels, or a cloud.
enum LoadedInput {
    Table(Vec<Vec<f64>>, Option<Vec<String>>),
    Cloud(PointCloud),
}

fn load_input(config: &RunConfig) -> Result<LoadedInput, RunError> {
    match &config.input {
        InputSource::MatrixCsv { path } => {
            let (rows, labels) = io::read_matrix_csv(path)?;
            if rows.len() > config.max_points {
                return Err(RunError::Config(format!(
                    "input has {} points, exceeding the cap of {}",
                    rows.len(),
                    config.max_points
                )));
            }
            Ok(LoadedInput::Table(rows, labels))
        }
        InputSource::CloudCsv { path, p } => {
            let rows = io::read_cloud_csv(path)?;
            if rows.len() > config.max_points {
                return Err(RunError::Config(format!(
                    "input has {} points, exceeding the cap of {}",
                    rows.len(),
                    config.max_points
                )));
            }
            let cloud = PointCloud::new(rows, *p)
                .map_err(|e| RunError::Config(format!("bad point cloud: {e}")))?;
            Ok(LoadedInput::Cloud(cloud))
        }
        InputSource::Generator { spec } => match generate(spec, config.max_points) {
            Ok(Generated::Matrix(m)) => Ok(LoadedInput::Table(m.to_rows(), None)),
            Ok(Generated::Cloud(c)) => Ok(LoadedInput::Cloud(c)),
            Err(e) => Err(RunError::Config(format!("generator: {e}"))),
        },
    }
}

struct PreparedSpace {
    matrix: DistanceMatrix,
    summary: ValidationSummary,
}

fn prepare_space(config: &RunConfig) -> Result<PreparedSpace, RunError> {
    let (rows, labels) = match load_input(config)? {
        LoadedInput::Table(rows, labels) => (rows, labels),
        LoadedInput::Cloud(cloud) => (lp_distance_matrix(&cloud).to_rows(), None),
    };
    let original_n = rows.len();
    let (matrix, merged_points) = if !config.validate {
        let m = trusted_metric(rows, labels, config.tau_rel).map_err(RunError::Validation)?;
        (m, None)
    } else if config.allow_pseudometric {
        let (m, quotient) =
            validate_pseudometric(rows, labels, config.tau_rel).map_err(RunError::Validation)?;
        let merged = original_n
            - quotient
                .iter()
                .collect::<std::collections::HashSet<_>>()
                .len();
        (m, Some(merged))
    } else {
        let m = validate_metric(rows, labels, config.tau_rel).map_err(RunError::Validation)?;
        (m, None)
    };
    let summary = ValidationSummary {
        n: matrix.n(),
        diameter: matrix.diameter(),
        triangle_checked: config.validate,
        merged_points,
        labels: matrix.labels().map(<[String]>::to_vec),
    };
    Ok(PreparedSpace { matrix, summary })
}

fn run_inner(config: &RunConfig) -> Result<RunOutput, RunError> {
    let total_start = Instant::now();
    let mut timings = Timings::default();

    let t = Instant::now();
    let PreparedSpace { matrix, summary } = prepare_space(config)?;
    timings.validate_ms = t.elapsed().as_millis() as u64;

    if matrix.n() < 3 {
        return Err(RunError::Config(format!(
            "need at least 3 points for a report, got {}",
            matrix.n()
        )));
    }
    for &r in &config.nerve_radii {
        if !r.is_finite() || r <= 0.0 {
            return Err(RunError::Config(format!(
                "nerve radii must be positive, got {r}"
            )));
        }
    }

    let t = Instant::now();
    let scan_cfg = ScanConfig {
        exhaustive_threshold: config.triple_exhaustive_threshold,
        sample_size: config.triple_sample,
        seed: config.seed,
        tau_deg: config.tau_deg,
        tau_cmp: config.tau_cmp,
    };
    let scan = scan_triples(&matrix, &scan_cfg)
        .map_err(|e| RunError::Internal(format!("triple scan: {e}")))?;
    timings.triples_ms = t.elapsed().as_millis() as u64;

    let t = Instant::now();
    let delta_cfg = DeltaConfig {
        exhaustive_threshold: config.quad_exhaustive_threshold,
        sample_size: config.quad_sample,
        seed: config.seed,
        top_k: config.delta_top_k,
    };
    let delta = four_point_delta(&matrix, &delta_cfg);
    let normalized = if matrix.diameter() > 0.0 {
        Some(delta.delta / matrix.diameter())
    } else {
        None
    };
    timings.delta_ms = t.elapsed().as_millis() as u64;

    let t = Instant::now();
    let exp_cfg = ExpansionConfig {
        trials: config.expansion_trials,
        k_max: config.expansion_k_max,
        seed: config.seed,
        exhaustive_threshold: config.triple_exhaustive_threshold,
        sample_size: config.triple_sample,
        tau_deg: config.tau_deg,
    };
    let expansion = expansion_constant_estimate(&matrix, &exp_cfg)
        .map_err(|e| RunError::Internal(format!("expansion estimate: {e}")))?;
    timings.expansion_ms = t.elapsed().as_millis() as u64;

    let t = Instant::now();
    let mut nerve_sections = Vec::with_capacity(config.nerve_radii.len());
    for &radius in &config.nerve_radii {
        let radii = vec![radius; matrix.n()];
        let nerve = NerveComplex::build_cover(&matrix, &radii, config.dim_cap, config.tau_rel)
            .map_err(|e| RunError::Internal(format!("nerve at radius {radius}: {e}")))?;
        let betti_max_dim = config.dim_cap - 1;
        let betti = betti_mod2(&nerve, betti_max_dim)
            .map_err(|e| RunError::Internal(format!("betti at radius {radius}: {e}")))?;
        let k_max = config.dim_cap + 1;
        let defects = helly_defects(&nerve, k_max)
            .map_err(|e| RunError::Internal(format!("helly at radius {radius}: {e}")))?;
        nerve_sections.push(NerveSection {
            radius,
            simplex_counts: nerve.simplex_counts(),
            betti,
            betti_max_dim,
            helly_defects: defects.into_iter().map(|d| d.subset).collect(),
            helly_checked_up_to: k_max,
            euler_characteristic: nerve.euler_characteristic(),
        });
    }
    timings.nerve_ms = t.elapsed().as_millis() as u64;

    let detail = config.keep_triples.then(|| scan.reports.clone());
    timings.total_ms = total_start.elapsed().as_millis() as u64;

    let report = SpaceReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        caveats: vec![WITNESS_CAVEAT, POSITIVE_LABEL_CAVEAT],
        validation: summary,
        triples: TriplesSection {
            summary: scan.summary,
            detail,
        },
        delta: DeltaSection {
            report: delta,
            normalized,
        },
        expansion: ExpansionSection {
            estimate: expansion,
            semantics: "lower_bound_only",
        },
        nerve: nerve_sections,
        timings,
    };
    Ok(RunOutput {
        report,
        triple_reports: scan.reports,
    })
}

/// A finished run: the serializable report plus the raw per-triple records
/// (kept out of the report unless `keep_triples` asked for them).
pub struct RunOutput {
    pub report: SpaceReport,
    pub triple_reports: Vec<TripleReport>,
}

/// Runs the full pipeline: validate, triple scan, quadruple delta, expansion
/// estimate, nerve sweep. Honors `config.workers`; every numeric field is
/// independent of the worker count.
pub fn run(config: &RunConfig) -> Result<RunOutput, RunError> {
    if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| RunError::Config(format!("worker pool: {e}")))?;
        pool.install(|| run_inner(config))
    } else {
        run_inner(config)
    }
}

/// Pretty JSON plus trailing newline; the byte layout golden tests compare.
pub fn report_json(report: &SpaceReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Per-triple CSV with a one-line header. Degenerate triples leave the rho
/// fields empty.
pub fn triples_csv(reports: &[TripleReport]) -> String {
    let mut out =
        String::from("i,j,k,r1,r2,r3,rho,witness,rho_bar,verdict,tripod_defect,tripod_witness\n");
    for r in reports {
        let verdict = match r.verdict {
            Verdict::Nonpositive => "nonpositive",
            Verdict::Positive => "positive",
            Verdict::Degenerate => "degenerate",
        };
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        let optu = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.indices[0],
            r.indices[1],
            r.indices[2],
            r.radii.r1,
            r.radii.r2,
            r.radii.r3,
            opt(r.rho),
            optu(r.witness),
            opt(r.rho_bar),
            verdict,
            r.tripod_defect,
            r.tripod_witness,
        ));
    }
    out
}

/// Writes the report (and optional per-triple CSV) to the configured
/// destinations. Nothing is written until the run has fully succeeded.
pub fn write_outputs(output: &RunOutput, config: &RunConfig) -> Result<(), RunError> {
    let json = report_json(&output.report);
    match &config.output {
        Some(path) => std::fs::write(path, &json).map_err(|source| RunError::Write {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{json}"),
    }
    if let Some(path) = &config.triples_csv {
        std::fs::write(path, triples_csv(&output.triple_reports)).map_err(|source| {
            RunError::Write {
                path: path.display().to_string(),
                source,
            }
        })?;
    }
    Ok(())
}
