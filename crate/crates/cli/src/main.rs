use std::path::PathBuf;
use std::process::ExitCode;

use ballcurv::generators::{generate, Generated, GeneratorSpec};
use ballcurv::hyperbolicity::{four_point_delta, DeltaConfig};
use ballcurv::io;
use ballcurv::metric::{
    lp_distance_matrix, trusted_metric, validate_metric, validate_pseudometric, DistanceMatrix,
    MetricExponent,
};
use ballcurv::nerve::{betti_mod2, helly_defects, NerveComplex};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ballcurv_cli::config::{InputSource, RunConfig};
use ballcurv_cli::plot::{emit_plot_data_value, PlotKind};
use ballcurv_cli::report::{self, RunError};

#[derive(Parser)]
#[command(
    name = "ballcurv",
    version,
    about = "Ball-intersection curvature diagnostics for finite metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a distance-matrix CSV against the metric axioms
    Validate(ValidateArgs),
    /// Scan triples: rho, planar comparison, verdicts, tripod defects
    Curvature(CurvatureArgs),
    /// Four-point delta over quadruples
    Hyperbolicity(HyperbolicityArgs),
    /// Nerve complexes of uniform ball covers at the given radii
    Nerve(NerveArgs),
    /// All-in-one JSON report
    Report(ReportArgs),
    /// Emit a generated space as CSV
    Gen(GenArgs),
    /// Extract plot-ready CSV from a report JSON file
    Plot(PlotArgs),
}

/// Space selection, shared by the scan subcommands. Exactly one of
/// `--matrix`, `--cloud`, `--spec`, `--spec-inline`, `--gen-kind` is
/// required.
#[derive(Args, Clone, Default)]
struct InputArgs {
    /// Distance-matrix CSV (optional label header)
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
    /// Point-cloud CSV of coordinate rows
    #[arg(long, value_name = "FILE")]
    cloud: Option<PathBuf>,
    /// Metric exponent for --cloud: 1, 2, inf, or any p >= 1
    #[arg(long, default_value = "2")]
    p: String,
    /// Generator spec as a JSON file
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Generator spec as inline JSON
    #[arg(long, value_name = "JSON")]
    spec_inline: Option<String>,
    #[command(flatten)]
    gen: GenFlags,
}

/// Flag-level generator parameters, mirroring the JSON spec fields.
#[derive(Args, Clone, Default)]
struct GenFlags {
    /// Generator kind: weighted-tree, star, path, cycle, circle-geodesic,
    /// lp-grid, euclidean-sample
    #[arg(long, value_name = "KIND")]
    gen_kind: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    leaves: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    gen_seed: Option<u64>,
    #[arg(long)]
    weight_min: Option<f64>,
    #[arg(long)]
    weight_max: Option<f64>,
    #[arg(long)]
    dyadic: bool,
    #[arg(long)]
    edge_weight: Option<f64>,
    #[arg(long)]
    circumference: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
    /// Metric exponent for lp-grid
    #[arg(long, value_name = "P")]
    grid_p: Option<String>,
    #[arg(long)]
    box_size: Option<f64>,
}

impl GenFlags {
    fn build(&self) -> Result<GeneratorSpec, RunError> {
        let kind = self
            .gen_kind
            .as_deref()
            .ok_or_else(|| RunError::Config("--gen-kind is required".into()))?;
        let need = |name: &str, v: Option<usize>| {
            v.ok_or_else(|| RunError::Config(format!("--{name} is required for {kind}")))
        };
        let needf = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| RunError::Config(format!("--{name} is required for {kind}")))
        };
        let spec = match kind {
            "weighted-tree" => GeneratorSpec::WeightedTree {
                nodes: need("nodes", self.nodes)?,
                seed: self.gen_seed.unwrap_or(0),
                weight_min: self.weight_min.unwrap_or(0.5),
                weight_max: self.weight_max.unwrap_or(1.5),
                dyadic: self.dyadic,
            },
            "star" => GeneratorSpec::Star {
                leaves: need("leaves", self.leaves)?,
                seed: self.gen_seed.unwrap_or(0),
                weight_min: self.weight_min.unwrap_or(0.5),
                weight_max: self.weight_max.unwrap_or(1.5),
            },
            "path" => GeneratorSpec::Path {
                nodes: need("nodes", self.nodes)?,
                edge_weight: self.edge_weight.unwrap_or(1.0),
            },
            "cycle" => GeneratorSpec::Cycle {
                nodes: need("nodes", self.nodes)?,
                circumference: needf("circumference", self.circumference)?,
            },
            "circle-geodesic" => GeneratorSpec::CircleGeodesic {
                nodes: need("nodes", self.nodes)?,
                radius: needf("radius", self.radius)?,
            },
            "lp-grid" => GeneratorSpec::LpGrid {
                side: need("side", self.side)?,
                dim: need("dim", self.dim)?,
                spacing: self.spacing.unwrap_or(1.0),
                p: parse_exponent(self.grid_p.as_deref().unwrap_or("2"))?,
            },
            "euclidean-sample" => GeneratorSpec::EuclideanSample {
                count: need("count", self.count)?,
                dim: need("dim", self.dim)?,
                seed: self.gen_seed.unwrap_or(0),
                box_size: self.box_size.unwrap_or(1.0),
            },
            other => {
                return Err(RunError::Config(format!(
                    "unknown generator kind '{other}'"
                )));
            }
        };
        Ok(spec)
    }
}

fn parse_exponent(s: &str) -> Result<MetricExponent, RunError> {
    s.parse()
        .map_err(|e| RunError::Config(format!("bad metric exponent '{s}': {e}")))
}

impl InputArgs {
    fn to_source(&self) -> Result<InputSource, RunError> {
        let mut picked = Vec::new();
        if self.matrix.is_some() {
            picked.push("--matrix");
        }
        if self.cloud.is_some() {
            picked.push("--cloud");
        }
        if self.spec.is_some() {
            picked.push("--spec");
        }
        if self.spec_inline.is_some() {
            picked.push("--spec-inline");
        }
        if self.gen.gen_kind.is_some() {
            picked.push("--gen-kind");
        }
        if picked.len() != 1 {
            return Err(RunError::Config(format!(
                "exactly one input among --matrix, --cloud, --spec, --spec-inline, --gen-kind \
                 is required (got {})",
                if picked.is_empty() {
                    "none".to_string()
                } else {
                    picked.join(", ")
                }
            )));
        }
        if let Some(path) = &self.matrix {
            return Ok(InputSource::MatrixCsv { path: path.clone() });
        }
        if let Some(path) = &self.cloud {
            return Ok(InputSource::CloudCsv {
                path: path.clone(),
                p: parse_exponent(&self.p)?,
            });
        }
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(format!("cannot read spec {}: {e}", path.display()))
            })?;
            let spec: GeneratorSpec = serde_json::from_str(&text)
                .map_err(|e| RunError::Config(format!("bad generator spec: {e}")))?;
            return Ok(InputSource::Generator { spec });
        }
        if let Some(text) = &self.spec_inline {
            let spec: GeneratorSpec = serde_json::from_str(text)
                .map_err(|e| RunError::Config(format!("bad generator spec: {e}")))?;
            return Ok(InputSource::Generator { spec });
        }
        Ok(InputSource::Generator {
            spec: self.gen.build()?,
        })
    }
}

/// Scan-level knobs shared by curvature/hyperbolicity/nerve/report.
#[derive(Args, Clone)]
struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tau_rel: f64,
    #[arg(long, default_value_t = 2048)]
    max_points: usize,
    /// Skip the O(n^3) triangle validation of the input
    #[arg(long)]
    no_validate: bool,
    /// Merge duplicate points instead of rejecting them
    #[arg(long)]
    allow_pseudometric: bool,
    /// Worker threads (0 = library default)
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output file (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Distance-matrix CSV to check
    #[arg(long, value_name = "FILE")]
    matrix: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tau_rel: f64,
    #[arg(long)]
    allow_pseudometric: bool,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 60)]
    exhaustive_threshold: usize,
    #[arg(long, default_value_t = 2000)]
    sample: usize,
    #[arg(long, default_value_t = 1e-9)]
    tau_cmp: f64,
    #[arg(long, default_value_t = 1e-12)]
    tau_deg: f64,
    /// Embed per-triple records in the JSON output
    #[arg(long)]
    detail: bool,
    /// Write per-triple records as CSV
    #[arg(long, value_name = "FILE")]
    triples_csv: Option<PathBuf>,
}

#[derive(Args)]
struct HyperbolicityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 80)]
    exhaustive_threshold: usize,
    #[arg(long, default_value_t = 2000)]
    sample: usize,
    #[arg(long, default_value_t = 8)]
    top_k: usize,
}

#[derive(Args)]
struct NerveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated radius list for the sweep
    #[arg(long, value_name = "R1,R2,..")]
    radii: String,
    #[arg(long, default_value_t = 3)]
    dim_cap: usize,
    /// Include the full simplex lists and witnesses in the output
    #[arg(long)]
    full_complex: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Base config JSON; flags below override its fields
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    tau_cmp: Option<f64>,
    #[arg(long)]
    tau_deg: Option<f64>,
    #[arg(long)]
    triple_exhaustive_threshold: Option<usize>,
    #[arg(long)]
    triple_sample: Option<usize>,
    #[arg(long)]
    quad_exhaustive_threshold: Option<usize>,
    #[arg(long)]
    quad_sample: Option<usize>,
    #[arg(long)]
    expansion_trials: Option<usize>,
    #[arg(long)]
    expansion_k_max: Option<usize>,
    #[arg(long)]
    dim_cap: Option<usize>,
    /// Comma-separated radius list for the nerve sweep
    #[arg(long, value_name = "R1,R2,..")]
    nerve_radii: Option<String>,
    #[arg(long)]
    keep_triples: bool,
    #[arg(long)]
    delta_top_k: Option<usize>,
    #[arg(long, value_name = "FILE")]
    triples_csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec JSON file: a single object or an array (batch)
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Generator spec as inline JSON
    #[arg(long, value_name = "JSON")]
    spec_inline: Option<String>,
    #[command(flatten)]
    gen: GenFlags,
    /// Output CSV for a single spec (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output directory for batch files
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// What to emit: "matrix" (any kind) or "cloud" (coordinate kinds only)
    #[arg(long, default_value = "matrix")]
    format: String,
    #[arg(long, default_value_t = 2048)]
    max_points: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Report JSON produced by the report subcommand
    #[arg(long, value_name = "FILE")]
    report: PathBuf,
    /// One of: rho-histogram, rho-vs-rhobar, delta-quadruple-topk
    #[arg(long, value_name = "KIND")]
    which: String,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| RunError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Loads a matrix for the scan subcommands, applying cap, validation and
/// pseudometric policy from the common flags.
fn load_matrix(input: &InputArgs, common: &CommonArgs) -> Result<DistanceMatrix, RunError> {
    let source = input.to_source()?;
    let (rows, labels) = match source {
        InputSource::MatrixCsv { path } => io::read_matrix_csv(&path)?,
        InputSource::CloudCsv { path, p } => {
            let rows = io::read_cloud_csv(&path)?;
            let cloud = ballcurv::metric::PointCloud::new(rows, p)
                .map_err(|e| RunError::Config(format!("bad point cloud: {e}")))?;
            (lp_distance_matrix(&cloud).to_rows(), None)
        }
        InputSource::Generator { spec } => match generate(&spec, common.max_points) {
            Ok(g) => (g.into_matrix().to_rows(), None),
            Err(e) => return Err(RunError::Config(format!("generator: {e}"))),
        },
    };
    if rows.len() > common.max_points {
        return Err(RunError::Config(format!(
            "input has {} points, exceeding the cap of {}",
            rows.len(),
            common.max_points
        )));
    }
    if common.no_validate {
        trusted_metric(rows, labels, common.tau_rel).map_err(RunError::Validation)
    } else if common.allow_pseudometric {
        validate_pseudometric(rows, labels, common.tau_rel)
            .map(|(m, _)| m)
            .map_err(RunError::Validation)
    } else {
        validate_metric(rows, labels, common.tau_rel).map_err(RunError::Validation)
    }
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn cmd_validate(args: ValidateArgs) -> Result<(), RunError> {
    let (rows, labels) = io::read_matrix_csv(&args.matrix)?;
    let outcome = if args.allow_pseudometric {
        validate_pseudometric(rows, labels, args.tau_rel).map(|(m, q)| {
            let merged = q.len() - m.n();
            (m, merged)
        })
    } else {
        validate_metric(rows, labels, args.tau_rel).map(|m| (m, 0))
    };
    match outcome {
        Ok((m, merged)) => {
            let body = serde_json::json!({
                "valid": true,
                "n": m.n(),
                "diameter": m.diameter(),
                "merged_points": merged,
            });
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
            Ok(())
        }
        Err(report) => {
            let body = serde_json::json!({
                "valid": false,
                "total_violations": report.total,
                "truncated": report.truncated,
                "violations": report.violations,
            });
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
            Err(RunError::Validation(report))
        }
    }
}

fn cmd_curvature(args: CurvatureArgs) -> Result<(), RunError> {
    let matrix = load_matrix(&args.input, &args.common)?;
    let cfg = ballcurv::curvature::ScanConfig {
        exhaustive_threshold: args.exhaustive_threshold,
        sample_size: args.sample,
        seed: args.common.seed,
        tau_deg: args.tau_deg,
        tau_cmp: args.tau_cmp,
    };
    let scan = in_pool(args.common.workers, || {
        ballcurv::curvature::scan_triples(&matrix, &cfg)
    })?
    .map_err(|e| RunError::Internal(format!("triple scan: {e}")))?;
    if scan.summary.sample_clamped {
        eprintln!(
            "warning: requested {} sampled triples but only {} exist; sample clamped",
            args.sample, scan.summary.total_triples
        );
    }
    if let Some(path) = &args.triples_csv {
        std::fs::write(path, report::triples_csv(&scan.reports)).map_err(|source| {
            RunError::Write {
                path: path.display().to_string(),
                source,
            }
        })?;
    }
    let mut body = serde_json::to_value(&scan.summary).unwrap();
    if args.detail {
        body["detail"] = serde_json::to_value(&scan.reports).unwrap();
    }
    let mut text = serde_json::to_string_pretty(&body).unwrap();
    text.push('\n');
    write_text(&args.common.out, &text)
}

fn cmd_hyperbolicity(args: HyperbolicityArgs) -> Result<(), RunError> {
    let matrix = load_matrix(&args.input, &args.common)?;
    let cfg = DeltaConfig {
        exhaustive_threshold: args.exhaustive_threshold,
        sample_size: args.sample,
        seed: args.common.seed,
        top_k: args.top_k,
    };
    let rep = in_pool(args.common.workers, || four_point_delta(&matrix, &cfg))?;
    let normalized = (matrix.diameter() > 0.0).then(|| rep.delta / matrix.diameter());
    let mut body = serde_json::to_value(&rep).unwrap();
    body["normalized"] = serde_json::to_value(normalized).unwrap();
    let mut text = serde_json::to_string_pretty(&body).unwrap();
    text.push('\n');
    write_text(&args.common.out, &text)
}

fn parse_radii(text: &str) -> Result<Vec<f64>, RunError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| RunError::Config(format!("bad radius '{s}'")))
        })
        .collect()
}

fn cmd_nerve(args: NerveArgs) -> Result<(), RunError> {
    let matrix = load_matrix(&args.input, &args.common)?;
    let radii_list = parse_radii(&args.radii)?;
    if radii_list.is_empty() {
        return Err(RunError::Config(
            "--radii must list at least one radius".into(),
        ));
    }
    let mut sweeps = Vec::new();
    for &radius in &radii_list {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(RunError::Config(format!(
                "nerve radii must be positive, got {radius}"
            )));
        }
        let nerve = NerveComplex::build_cover(
            &matrix,
            &vec![radius; matrix.n()],
            args.dim_cap,
            args.common.tau_rel,
        )
        .map_err(|e| RunError::Internal(format!("nerve at radius {radius}: {e}")))?;
        let betti = betti_mod2(&nerve, args.dim_cap - 1)
            .map_err(|e| RunError::Internal(format!("betti: {e}")))?;
        let defects = helly_defects(&nerve, args.dim_cap + 1)
            .map_err(|e| RunError::Internal(format!("helly: {e}")))?;
        let mut body = serde_json::json!({
            "radius": radius,
            "simplex_counts": nerve.simplex_counts(),
            "betti": betti,
            "betti_max_dim": args.dim_cap - 1,
            "helly_defects": defects.iter().map(|d| d.subset.clone()).collect::<Vec<_>>(),
            "helly_checked_up_to": args.dim_cap + 1,
            "euler_characteristic": nerve.euler_characteristic(),
        });
        if args.full_complex {
            body["complex"] = serde_json::to_value(nerve.export(Some(betti))).unwrap();
        }
        sweeps.push(body);
    }
    let mut text = serde_json::to_string_pretty(&sweeps).unwrap();
    text.push('\n');
    write_text(&args.common.out, &text)
}

fn cmd_report(args: ReportArgs) -> Result<(), RunError> {
    let has_input_flags = args.input.matrix.is_some()
        || args.input.cloud.is_some()
        || args.input.spec.is_some()
        || args.input.spec_inline.is_some()
        || args.input.gen.gen_kind.is_some();
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            let mut config = serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| RunError::Config(format!("bad config: {e}")))?;
            // Explicit input flags override the config file's source.
            if has_input_flags {
                config.input = args.input.to_source()?;
            }
            config
        }
        None => RunConfig::new(args.input.to_source()?),
    };
    config.seed = args.common.seed;
    config.tau_rel = args.common.tau_rel;
    config.max_points = args.common.max_points;
    config.workers = args.common.workers;
    if args.common.no_validate {
        config.validate = false;
    }
    if args.common.allow_pseudometric {
        config.allow_pseudometric = true;
    }
    if args.common.out.is_some() {
        config.output = args.common.out.clone();
    }
    if let Some(v) = args.tau_cmp {
        config.tau_cmp = v;
    }
    if let Some(v) = args.tau_deg {
        config.tau_deg = v;
    }
    if let Some(v) = args.triple_exhaustive_threshold {
        config.triple_exhaustive_threshold = v;
    }
    if let Some(v) = args.triple_sample {
        config.triple_sample = v;
    }
    if let Some(v) = args.quad_exhaustive_threshold {
        config.quad_exhaustive_threshold = v;
    }
    if let Some(v) = args.quad_sample {
        config.quad_sample = v;
    }
    if let Some(v) = args.expansion_trials {
        config.expansion_trials = v;
    }
    if let Some(v) = args.expansion_k_max {
        config.expansion_k_max = v;
    }
    if let Some(v) = args.dim_cap {
        config.dim_cap = v;
    }
    if let Some(text) = &args.nerve_radii {
        config.nerve_radii = parse_radii(text)?;
    }
    if args.keep_triples {
        config.keep_triples = true;
    }
    if let Some(v) = args.delta_top_k {
        config.delta_top_k = v;
    }
    if args.triples_csv.is_some() {
        config.triples_csv = args.triples_csv.clone();
    }
    let output = report::run(&config)?;
    if output.report.triples.summary.sample_clamped {
        eprintln!(
            "warning: triple sample larger than the population; clamped to {}",
            output.report.triples.summary.triples_evaluated
        );
    }
    report::write_outputs(&output, &config)
}

fn cmd_gen(args: GenArgs) -> Result<(), RunError> {
    let specs: Vec<GeneratorSpec> = if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read spec {}: {e}", path.display())))?;
        if text.trim_start().starts_with('[') {
            serde_json::from_str(&text)
                .map_err(|e| RunError::Config(format!("bad generator batch: {e}")))?
        } else {
            vec![serde_json::from_str(&text)
                .map_err(|e| RunError::Config(format!("bad generator spec: {e}")))?]
        }
    } else if let Some(text) = &args.spec_inline {
        vec![serde_json::from_str(text)
            .map_err(|e| RunError::Config(format!("bad generator spec: {e}")))?]
    } else {
        vec![args.gen.build()?]
    };

    let render = |spec: &GeneratorSpec| -> Result<String, RunError> {
        let generated = generate(spec, args.max_points)
            .map_err(|e| RunError::Config(format!("generator: {e}")))?;
        let mut buf = Vec::new();
        match (args.format.as_str(), &generated) {
            ("matrix", g) => {
                io::write_matrix(&mut buf, &g.clone().into_matrix()).expect("memory write");
            }
            ("cloud", Generated::Cloud(c)) => {
                io::write_cloud(&mut buf, c).expect("memory write");
            }
            ("cloud", Generated::Matrix(_)) => {
                return Err(RunError::Config(
                    "--format cloud requires a coordinate-based generator kind".into(),
                ));
            }
            (other, _) => {
                return Err(RunError::Config(format!(
                    "unknown format '{other}' (expected matrix or cloud)"
                )));
            }
        }
        Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
    };

    if specs.len() == 1 && args.out_dir.is_none() {
        let text = render(&specs[0])?;
        return write_text(&args.out, &text);
    }
    let dir = args
        .out_dir
        .as_ref()
        .ok_or_else(|| RunError::Config("batch specs need --out-dir".into()))?;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    for (i, spec) in specs.iter().enumerate() {
        let text = render(spec)?;
        let path = dir.join(format!("gen_{i:03}.csv"));
        std::fs::write(&path, text).map_err(|source| RunError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), RunError> {
    let which: PlotKind = args
        .which
        .parse()
        .map_err(|e| RunError::Config(format!("{e}")))?;
    let text = std::fs::read_to_string(&args.report).map_err(|e| {
        RunError::Config(format!("cannot read report {}: {e}", args.report.display()))
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| RunError::Config(format!("bad report JSON: {e}")))?;
    let csv = emit_plot_data_value(&value, which).map_err(|e| RunError::Config(format!("{e}")))?;
    write_text(&args.out, &csv)
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Curvature(args) => cmd_curvature(args),
        Command::Hyperbolicity(args) => cmd_hyperbolicity(args),
        Command::Nerve(args) => cmd_nerve(args),
        Command::Report(args) => cmd_report(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn main() -> ExitCode {
    // Flag errors are config errors (exit 1); help/version exit 0. Exit 2 is
    // reserved for metric-validation failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
