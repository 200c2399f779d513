//! Batch command line. Every invocation writes its outputs and a
//! `manifest.json` into `--out`.
//!
//! Exit codes: 0 success, 2 argument error, 3 data error, 4 no valid grasp.

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::geometry::{load_cloud, CloudFormat};
use crate::grasp::{write_gmap, write_grasp_csv, GraspCandidate};
use crate::learner::KnowledgeBase;
use crate::pipeline::{describe, object_views, plan_grasp};
use crate::projection::{read_dview, write_dview, DepthView, ProjectionMode, ViewSetup};
use crate::protocol::{aggregate_runs, run_seeds, write_summary_csv, Dataset};
use crate::representation::{
    load_embeddings, view_to_feature, write_descriptors, FeatureVector, PoolingMode,
};
use crate::view_selection::{rank_views_with, EntropyMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NO_GRASP: i32 = 4;

pub const MANIFEST_FILE: &str = "manifest.json";
const LOCK_FILE: &str = ".viewgrasp.lock";

#[derive(Debug, Parser)]
#[command(
    name = "viewgrasp",
    version,
    about = "Multi-view depth projection, view ranking, grasp synthesis and open-ended learning"
)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML or JSON settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "viewgrasp-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetupKind {
    Orthographic,
    Orbit,
    Sphere,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ViewArgs {
    #[arg(long, value_enum)]
    pub setup: Option<SetupKind>,
    /// Azimuth step in degrees.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Orbit elevation in degrees.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Sphere elevation step in degrees.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Sphere azimuth count, instead of `--alpha`.
    #[arg(long)]
    pub azimuths: Option<usize>,
    /// Sphere elevation count, instead of `--beta`.
    #[arg(long)]
    pub elevations: Option<usize>,
    #[arg(long)]
    pub mode: Option<ProjectionMode>,
    /// Bins per side.
    #[arg(long)]
    pub bins: Option<usize>,
}

impl ViewArgs {
    fn setup(&self, current: ViewSetup) -> Result<ViewSetup> {
        let Some(kind) = self.setup else {
            if self.alpha.is_some() || self.phi.is_some() || self.beta.is_some() {
                return Err(Error::invalid("--alpha/--phi/--beta need --setup"));
            }
            return Ok(current);
        };
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::invalid(format!("--setup {kind:?} needs --{name}").to_lowercase())
            })
        };
        match kind {
            SetupKind::Orthographic => Ok(ViewSetup::Orthographic),
            SetupKind::Orbit => {
                ViewSetup::orbit(need(self.alpha, "alpha")?, need(self.phi, "phi")?)
            }
            SetupKind::Sphere => match (self.azimuths, self.elevations) {
                (Some(a), Some(e)) => ViewSetup::sphere_counts(a, e),
                (None, None) => {
                    ViewSetup::sphere(need(self.alpha, "alpha")?, need(self.beta, "beta")?)
                }
                _ => Err(Error::invalid("--azimuths and --elevations go together")),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GripArgs {
    #[arg(long)]
    pub max_width: Option<f64>,
    #[arg(long)]
    pub finger_thickness: Option<f64>,
    #[arg(long)]
    pub finger_depth: Option<f64>,
    /// Table plane height; defaults to the lowest point of the cloud.
    #[arg(long)]
    pub table_height: Option<f64>,
    /// Annealing iterations per candidate.
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render depth views of a point cloud as DVIEW files.
    Project {
        cloud: PathBuf,
        #[command(flatten)]
        views: ViewArgs,
    },
    /// Rank views by entropy; inputs are DVIEW files, directories of them, or a point cloud.
    Rank {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        views: ViewArgs,
        #[arg(long, value_enum)]
        entropy: Option<EntropyArg>,
    },
    /// Write pooled descriptors of point clouds, DVIEW files or embedding CSVs.
    Features {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        views: ViewArgs,
        #[arg(long)]
        pooling: Option<PoolingMode>,
    },
    /// Teach or extend a category in a knowledge base file.
    Teach {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        views: ViewArgs,
        #[arg(long)]
        pooling: Option<PoolingMode>,
    },
    /// Classify instances against a knowledge base.
    Classify {
        #[arg(long)]
        kb: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        views: ViewArgs,
        #[arg(long)]
        pooling: Option<PoolingMode>,
    },
    /// Run the simulated-teacher protocol over seeded repetitions.
    Protocol {
        #[arg(long)]
        dataset: PathBuf,
        /// `a..b` (inclusive), a comma list, or a single seed.
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        window_factor: Option<usize>,
        #[arg(long)]
        breakpoint: Option<usize>,
        #[arg(long)]
        instances_per_teach: Option<usize>,
    },
    /// Synthesize a grasp map on the most informative view and extract the best grasp.
    Grasp {
        cloud: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        grip: GripArgs,
        #[command(flatten)]
        views: ViewArgs,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long)]
        addr: Option<std::net::SocketAddr>,
        /// Category directories used as the teaching dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Directory of point clouds exposed under /objects.
        #[arg(long)]
        objects: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyArg {
    Depth,
    Occupancy,
}

impl From<EntropyArg> for EntropyMode {
    fn from(e: EntropyArg) -> Self {
        match e {
            EntropyArg::Depth => EntropyMode::Depth,
            EntropyArg::Occupancy => EntropyMode::Occupancy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub summary: serde_json::Value,
    pub wall_clock_ms: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

/// Exclusive claim on an output directory, released on drop.
struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::invalid(format!(
                    "{} is in use by another run (remove {} if stale)",
                    dir.display(),
                    path.display()
                )))
            }
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<FileDigest>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.written.push(FileDigest {
            path: path.clone(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<PathBuf> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| Error::io(self.dir.join(name), e))?;
        self.write(name, &buf)
    }
}

/// Parses `a..b` (inclusive), `a,b,c` or `a`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::invalid(format!("bad seed list `{text}`"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let seeds = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn is_dview(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("dview"))
}

fn dview_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_dview(p))
        .collect();
    files.sort();
    Ok(files)
}

/// Features from point clouds, DVIEW files or embedding CSVs.
fn load_inputs(
    inputs: &[PathBuf],
    settings: &Settings,
    digests: &mut Vec<FileDigest>,
) -> Result<Vec<(String, FeatureVector)>> {
    let mut out = Vec::new();
    for path in inputs {
        digests.push(digest_file(path)?);
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase());
        if ext.as_deref() == Some("csv") {
            out.extend(load_embeddings(path)?);
        } else if is_dview(path) {
            out.push((file_stem(path), view_to_feature(&read_dview(path)?)?));
        } else if let Some(format) = CloudFormat::from_path(path) {
            let cloud = load_cloud(path, format)?;
            out.push((file_stem(path), describe(&cloud, &settings.descriptor)?));
        } else {
            return Err(Error::invalid(format!(
                "{}: expected .xyz, .ply, .dview or .csv",
                path.display()
            )));
        }
    }
    Ok(out)
}

fn apply_view_args(
    settings: &mut Settings,
    views: &ViewArgs,
    pooling: Option<PoolingMode>,
) -> Result<()> {
    settings.descriptor.setup = views.setup(settings.descriptor.setup)?;
    if let Some(m) = views.mode {
        settings.descriptor.mode = m;
    }
    if let Some(b) = views.bins {
        settings.descriptor.bins = b;
    }
    if let Some(p) = pooling {
        settings.descriptor.pooling = p;
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Project { .. } => "project",
        Command::Rank { .. } => "rank",
        Command::Features { .. } => "features",
        Command::Teach { .. } => "teach",
        Command::Classify { .. } => "classify",
        Command::Protocol { .. } => "protocol",
        Command::Grasp { .. } => "grasp",
        Command::Serve { .. } => "serve",
    }
}

/// Runs a parsed command and returns its manifest, which is also written
/// to the output directory.
pub fn execute(cli: &Cli) -> Result<RunManifest> {
    let start = Instant::now();
    let mut settings = Settings::load_or_default(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    settings.grasp.seed = settings.seed;
    settings.protocol.seed = settings.seed;
    settings.grasp.entropy = settings.entropy;

    let _lock = OutputLock::acquire(&cli.out)?;
    let mut inputs = Vec::new();
    if let Some(c) = &cli.config {
        inputs.push(digest_file(c)?);
    }
    let mut out = Outputs {
        dir: &cli.out,
        written: Vec::new(),
    };

    let summary = match &cli.command {
        Command::Project { cloud, views } => {
            apply_view_args(&mut settings, views, None)?;
            settings.validate()?;
            inputs.push(digest_file(cloud)?);
            let c = load_cloud(cloud, cloud_format(cloud)?)?;
            let d = &settings.descriptor;
            let rendered = object_views(&c, &d.setup, d.mode, d.bins)?;
            for (i, v) in rendered.views.iter().enumerate() {
                out.write_with(&format!("view_{i:03}.dview"), |b| write_dview(v, b))?;
            }
            json!({ "views": rendered.views.len() })
        }
        Command::Rank {
            inputs: paths,
            views,
            entropy,
        } => {
            apply_view_args(&mut settings, views, None)?;
            if let Some(e) = entropy {
                settings.entropy = (*e).into();
            }
            settings.validate()?;
            let mut rendered: Vec<DepthView> = Vec::new();
            for p in paths {
                if p.is_dir() {
                    for f in dview_files(p)? {
                        inputs.push(digest_file(&f)?);
                        rendered.push(read_dview(&f)?);
                    }
                } else if is_dview(p) {
                    inputs.push(digest_file(p)?);
                    rendered.push(read_dview(p)?);
                } else {
                    inputs.push(digest_file(p)?);
                    let c = load_cloud(p, cloud_format(p)?)?;
                    let d = &settings.descriptor;
                    rendered.extend(object_views(&c, &d.setup, d.mode, d.bins)?.views);
                }
            }
            if rendered.is_empty() {
                return Err(Error::invalid("no views to rank"));
            }
            let ranking = rank_views_with(&rendered, settings.entropy)?;
            out.write_with("rank.csv", |b| {
                writeln!(b, "view_index,entropy_bits")?;
                for s in &ranking {
                    writeln!(
                        b,
                        "{},{}",
                        s.view_index,
                        crate::textfmt::format_sig(s.entropy_bits, 12)
                    )?;
                }
                Ok(())
            })?;
            json!({ "best_view": ranking[0].view_index, "entropy_bits": ranking[0].entropy_bits })
        }
        Command::Features {
            inputs: paths,
            views,
            pooling,
        } => {
            apply_view_args(&mut settings, views, *pooling)?;
            settings.validate()?;
            let feats = load_inputs(paths, &settings, &mut inputs)?;
            let mut buf = Vec::new();
            write_descriptors(feats.iter().map(|(id, f)| (id.as_str(), f)), &mut buf)?;
            out.write("descriptors.csv", &buf)?;
            json!({ "instances": feats.len(), "dim": feats.first().map(|f| f.1.dim()) })
        }
        Command::Teach {
            kb,
            label,
            inputs: paths,
            views,
            pooling,
        } => {
            apply_view_args(&mut settings, views, *pooling)?;
            settings.validate()?;
            let mut base = if kb.exists() {
                inputs.push(digest_file(kb)?);
                KnowledgeBase::load(kb)?
            } else {
                KnowledgeBase::new(settings.smoothing)?
            };
            let feats = load_inputs(paths, &settings, &mut inputs)?;
            let features: Vec<FeatureVector> = feats.into_iter().map(|(_, f)| f).collect();
            base.teach(label, &features)?;
            let text = base.to_json();
            fs::write(kb, &text).map_err(|e| Error::io(kb, e))?;
            out.write("kb.json", text.as_bytes())?;
            json!({ "label": label, "instances": features.len(), "categories": base.len(), "digest": base.digest() })
        }
        Command::Classify {
            kb,
            inputs: paths,
            views,
            pooling,
        } => {
            apply_view_args(&mut settings, views, *pooling)?;
            settings.validate()?;
            inputs.push(digest_file(kb)?);
            let base = KnowledgeBase::load(kb)?;
            let feats = load_inputs(paths, &settings, &mut inputs)?;
            let mut rows = Vec::new();
            for (id, f) in &feats {
                let p = base.classify(f)?;
                rows.push(json!({ "id": id, "label": p.label, "log_scores": p.log_scores }));
            }
            out.write_with("predictions.csv", |b| {
                writeln!(b, "id,label")?;
                for r in &rows {
                    writeln!(
                        b,
                        "{},{}",
                        r["id"].as_str().unwrap_or(""),
                        r["label"].as_str().unwrap_or("")
                    )?;
                }
                Ok(())
            })?;
            out.write(
                "predictions.json",
                serde_json::to_string_pretty(&rows)
                    .expect("json")
                    .as_bytes(),
            )?;
            json!({ "instances": rows.len() })
        }
        Command::Protocol {
            dataset,
            seeds,
            tau,
            window_factor,
            breakpoint,
            instances_per_teach,
        } => {
            let p = &mut settings.protocol;
            if let Some(v) = tau {
                p.tau = *v;
            }
            if let Some(v) = window_factor {
                p.window_factor = *v;
            }
            if let Some(v) = breakpoint {
                p.breakpoint_iters = *v;
            }
            if let Some(v) = instances_per_teach {
                p.instances_per_teach = *v;
            }
            settings.validate()?;
            let seeds = parse_seeds(seeds)?;
            let data = Dataset::load_dir(dataset, &settings.descriptor)?;
            inputs.push(FileDigest {
                path: dataset.clone(),
                sha256: dataset_digest(&data),
            });
            let reports = run_seeds(&settings.protocol, &data, &seeds)?;
            for r in &reports {
                let seed = r.config.seed;
                out.write(&format!("report_seed{seed}.json"), r.to_json().as_bytes())?;
                let mut buf = Vec::new();
                r.write_timeline_csv(&mut buf)?;
                out.write(&format!("timeline_seed{seed}.csv"), &buf)?;
            }
            let summary = aggregate_runs(&reports)?;
            out.write_with("aggregate.csv", |b| write_summary_csv(&summary, b))?;
            serde_json::to_value(&summary).expect("summary serializes")
        }
        Command::Grasp {
            cloud,
            budget,
            grip,
            views,
        } => {
            let g = &mut settings.grasp;
            g.setup = views.setup(g.setup)?;
            if views.mode.is_some_and(|m| m != ProjectionMode::FixedSize) {
                return Err(Error::invalid("grasp views are always fixed-size"));
            }
            if let Some(b) = views.bins {
                g.bins = b;
            }
            if let Some(b) = budget {
                g.budget = *b;
            }
            let gripper = &mut g.grasp.gripper;
            if let Some(v) = grip.max_width {
                gripper.max_width = v;
            }
            if let Some(v) = grip.finger_thickness {
                gripper.finger_thickness = v;
            }
            if let Some(v) = grip.finger_depth {
                gripper.finger_depth = v;
            }
            if let Some(v) = grip.iters {
                g.grasp.schedule.iters = v;
            }
            if grip.table_height.is_some() {
                g.table_height = grip.table_height;
            }
            settings.validate()?;
            inputs.push(digest_file(cloud)?);
            let c = load_cloud(cloud, cloud_format(cloud)?)?;
            let plan = plan_grasp(&c, &settings.grasp)?;
            out.write_with("grasp.gmap", |b| write_gmap(&plan.synthesis.map, b))?;
            out.write_with("view.dview", |b| write_dview(&plan.view, b))?;
            let chosen: Vec<GraspCandidate> = plan.best.iter().map(|g| g.candidate).collect();
            out.write_with("grasp.csv", |b| write_grasp_csv(&chosen, b))?;
            let mut summary = json!({
                "view_index": plan.view_index,
                "entropy_bits": plan.ranking[0].entropy_bits,
                "table_height": plan.table_height,
            });
            match plan.best() {
                Ok(g) => {
                    summary["grasp"] = json!(g.candidate);
                    summary["position"] =
                        json!([g.pose.position.x, g.pose.position.y, g.pose.position.z]);
                }
                Err(e) => {
                    summary["error"] = json!(e.to_string());
                    write_manifest(cli, &settings, inputs, out.written, summary, start)?;
                    return Err(e);
                }
            }
            summary
        }
        Command::Serve {
            addr,
            dataset,
            objects,
        } => {
            if let Some(a) = addr {
                settings.server.addr = *a;
            }
            if dataset.is_some() {
                settings.server.dataset = dataset.clone();
            }
            if objects.is_some() {
                settings.server.objects = objects.clone();
            }
            settings.validate()?;
            let state = crate::service::AppState::from_settings(&settings)?;
            write_manifest(
                cli,
                &settings,
                inputs,
                out.written,
                json!({ "addr": settings.server.addr }),
                start,
            )?;
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| Error::Format(format!("runtime: {e}")))?;
            runtime.block_on(crate::service::serve(state, settings.server.addr))?;
            return read_manifest(&cli.out);
        }
    };
    write_manifest(cli, &settings, inputs, out.written, summary, start)
}

fn dataset_digest(data: &Dataset) -> String {
    let mut h = Sha256::new();
    for label in data.labels() {
        for inst in data.instances(label) {
            h.update(label.as_bytes());
            h.update(inst.id.as_bytes());
            for v in inst.feature.values() {
                h.update(v.to_le_bytes());
            }
        }
    }
    hex::encode(h.finalize())
}

fn cloud_format(path: &Path) -> Result<CloudFormat> {
    CloudFormat::from_path(path)
        .ok_or_else(|| Error::invalid(format!("{}: expected a .xyz or .ply cloud", path.display())))
}

fn write_manifest(
    cli: &Cli,
    settings: &Settings,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    summary: serde_json::Value,
    start: Instant,
) -> Result<RunManifest> {
    let manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: settings.seed,
        config: settings.to_json(),
        inputs,
        outputs,
        summary,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let path = cli.out.join(MANIFEST_FILE);
    let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(
        serde_json::to_string_pretty(&manifest)
            .expect("manifest")
            .as_bytes(),
    )
    .map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::NoValidGrasp(_) => EXIT_NO_GRASP,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("viewgrasp {}: {e}", command_name(&cli.command));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..10").unwrap(), (1..=10).collect::<Vec<_>>());
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("4,2").unwrap(), vec![4, 2]);
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::EmptyCloud), 3);
        assert_eq!(exit_code(&Error::NoValidGrasp(3)), 4);
        assert_eq!(run(["viewgrasp", "bogus"]), 2);
        assert_eq!(run(["viewgrasp", "--help"]), 0);
    }

    #[test]
    fn setup_flags() {
        let v = ViewArgs {
            setup: Some(SetupKind::Orbit),
            alpha: Some(18.0),
            phi: Some(60.0),
            ..Default::default()
        };
        assert_eq!(
            v.setup(ViewSetup::Orthographic)
                .unwrap()
                .view_count()
                .unwrap(),
            20
        );
        let v = ViewArgs {
            setup: Some(SetupKind::Sphere),
            azimuths: Some(7),
            elevations: Some(4),
            ..Default::default()
        };
        assert_eq!(
            v.setup(ViewSetup::Orthographic)
                .unwrap()
                .view_count()
                .unwrap(),
            28
        );
        let v = ViewArgs {
            setup: Some(SetupKind::Orbit),
            alpha: Some(18.0),
            ..Default::default()
        };
        assert!(v.setup(ViewSetup::Orthographic).is_err());
    }
}
