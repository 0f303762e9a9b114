//! Command-line front end: tracking, evaluation, simulation, ablation and
//! trajectory rendering over MOT-format files.

pub mod ablation;
pub mod config;
pub mod error;
pub mod render;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use motassoc::metrics::{evaluate, format_table, MetricsReport};
use motassoc::motio::{
    decode_embeddings, parse_detections, parse_gt, parse_seqinfo, parse_tracks, write_detections,
    write_embeddings, write_gt, write_seqinfo, write_tracks,
};
use motassoc::sim::generate_scenario;
use motassoc::tracker::{Detection, TrackOutput, TrackRecord, Tracker};

pub use ablation::Variant;
pub use config::{RunConfig, SolverName};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "motassoc",
    version,
    about = "Online multi-object tracking by appearance and box association"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by commands that run the tracker.
#[derive(Debug, Clone, Default, Args)]
pub struct TrackerArgs {
    /// TOML configuration; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Assignment solver for both stages.
    #[arg(long, value_enum)]
    pub solver: Option<SolverName>,
    /// Drop the box-distance term from the cost.
    #[arg(long)]
    pub no_bbox_term: bool,
    /// Replace track features instead of accumulating them.
    #[arg(long)]
    pub no_feature_acc: bool,
    /// Frames a lost track is kept for reacquisition.
    #[arg(long)]
    pub max_lost_age: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track detections and write MOT-format results.
    Track {
        /// Detection file (frame,id,left,top,width,height,conf,...).
        #[arg(long)]
        dets: PathBuf,
        /// SSEB embedding file with one record per detection.
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tracker: TrackerArgs,
    },
    /// Score results against ground truth.
    Eval {
        /// Ground-truth files, paired in order with --result.
        #[arg(long, required = true)]
        gt: Vec<PathBuf>,
        #[arg(long, required = true)]
        result: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        iou_gate: Option<f64>,
        /// Also write the aggregate as key=value lines.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic sequence in MOT layout.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare association components over seeded benchmark runs.
    Ablate {
        #[command(flatten)]
        tracker: TrackerArgs,
        /// First seed; defaults to the configured simulation seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Variants to run, comma separated.
        #[arg(long, value_enum, value_delimiter = ',')]
        variant: Vec<Variant>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw trajectories from a result or ground-truth file as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        seqinfo: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::input(path, e))
}

fn emit(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string()))
}

/// Loads and validates the configuration. Problems are blamed on the file when
/// there is one, otherwise on the flags.
pub fn load_config(path: Option<&Path>, adjust: impl FnOnce(&mut RunConfig)) -> CliResult<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_toml(&read_text(p)?).map_err(|m| CliError::input(p, m))?,
        None => RunConfig::default(),
    };
    adjust(&mut cfg);
    cfg.validate().map_err(|m| match path {
        Some(p) => CliError::input(p, m),
        None => CliError::Usage(m),
    })?;
    Ok(cfg)
}

impl TrackerArgs {
    fn load(&self) -> CliResult<RunConfig> {
        load_config(self.config.as_deref(), |c| self.apply(c))
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.solver {
            cfg.assoc.solver = s;
        }
        if self.no_bbox_term {
            cfg.assoc.bbox_weight = 0.0;
        }
        if self.no_feature_acc {
            cfg.tracker.beta = 1.0;
        }
        if let Some(age) = self.max_lost_age {
            cfg.tracker.max_lost_age = age;
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Track { dets, embeddings, out, tracker } => {
            track(&dets, &embeddings, &out, &tracker, stdout)
        }
        Command::Eval { gt, result, config, iou_gate, out } => {
            eval(&gt, &result, config.as_deref(), iou_gate, out.as_deref(), stdout)
        }
        Command::Simulate { config, seed, out } => simulate(config.as_deref(), seed, &out, stdout),
        Command::Ablate { tracker, seed, seeds, variant, out } => {
            ablate(&tracker, seed, seeds, &variant, out.as_deref(), stdout)
        }
        Command::Render { input, seqinfo, out } => render(&input, &seqinfo, &out),
        Command::DefaultConfig { out } => {
            let text = config::default_config_text();
            match out {
                Some(p) => write_file(&p, text),
                None => emit(stdout, &text),
            }
        }
    }
}

pub fn track(
    dets_path: &Path,
    emb_path: &Path,
    out_path: &Path,
    args: &TrackerArgs,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let cfg = args.load()?.tracker_config();
    let frames = parse_detections(&read_text(dets_path)?).map_err(|e| CliError::input(dets_path, e))?;
    let bytes = fs::read(emb_path).map_err(|e| CliError::input(emb_path, e))?;
    let table = decode_embeddings(&bytes, cfg.embedding_dim).map_err(|e| CliError::input(emb_path, e))?;

    let start = Instant::now();
    let mut tracker = Tracker::new(cfg.clone())?;
    let mut output = TrackOutput::default();
    let (mut n_dets, mut n_used) = (0usize, 0usize);
    for (&frame, raws) in &frames {
        n_dets += raws.len();
        let mut dets = Vec::with_capacity(raws.len());
        for (i, raw) in raws.iter().enumerate() {
            if raw.confidence < cfg.min_confidence {
                continue;
            }
            let feature = table.get(&(frame, i as u32)).ok_or_else(|| {
                CliError::input(emb_path, motassoc::Error::MissingEmbedding { frame, index: i as u32 })
            })?;
            dets.push(Detection { bbox: raw.bbox, confidence: raw.confidence, feature: feature.clone() });
        }
        n_used += dets.len();
        let tracked = tracker.step(frame, &dets).map_err(|e| match e {
            motassoc::Error::DegenerateTrackBox | motassoc::Error::InvalidBox(_) => {
                CliError::input(dets_path, format!("frame {frame}: {e}"))
            }
            other => CliError::from(other),
        })?;
        output.records.extend(tracked.into_iter().map(|(id, bbox)| TrackRecord { frame, id, bbox }));
    }
    let elapsed = start.elapsed();
    output.sort();
    write_file(out_path, write_tracks(&output))?;

    let mut ids: Vec<u64> = output.records.iter().map(|r| r.id.0).collect();
    ids.sort_unstable();
    ids.dedup();
    emit(
        stdout,
        &format!(
            "frames={} detections={} confident={} tracks={} records={} elapsed_ms={:.1}\n",
            frames.len(),
            n_dets,
            n_used,
            ids.len(),
            output.len(),
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn sequence_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn eval(
    gts: &[PathBuf],
    results: &[PathBuf],
    config: Option<&Path>,
    iou_gate: Option<f64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if gts.len() != results.len() {
        return Err(CliError::Usage(format!(
            "{} ground-truth files but {} result files",
            gts.len(),
            results.len()
        )));
    }
    let cfg = load_config(config, |c| {
        if let Some(g) = iou_gate {
            c.eval.iou_gate = g;
        }
    })?;
    let mut rows = Vec::with_capacity(gts.len());
    let mut total = MetricsReport::default();
    for (gt_path, res_path) in gts.iter().zip(results) {
        let gt = parse_gt(&read_text(gt_path)?).map_err(|e| CliError::input(gt_path, e))?;
        let pred = parse_tracks(&read_text(res_path)?).map_err(|e| CliError::input(res_path, e))?;
        let report = evaluate(&gt, &pred, cfg.eval.iou_gate).map_err(|e| CliError::input(res_path, e))?;
        total.merge(&report);
        rows.push((sequence_name(res_path), report));
    }
    if rows.len() > 1 {
        rows.push(("OVERALL".to_string(), total));
    }
    let kv = total.to_key_values();
    emit(stdout, &format!("{}\n{}", format_table(&rows), kv))?;
    if let Some(p) = out {
        write_file(p, kv)?;
    }
    Ok(())
}

pub fn simulate(
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let cfg = load_config(config, |c| {
        if let Some(s) = seed {
            c.sim.seed = s;
        }
    })?;
    let scenario = generate_scenario(&cfg.sim_config())?;
    let stats = scenario.separability()?;
    let dim = scenario.config.embedding_dim;

    for sub in ["gt", "det"] {
        let dir = out.join(sub);
        fs::create_dir_all(&dir).map_err(|e| CliError::input(&dir, e))?;
    }
    write_file(&out.join("gt").join("gt.txt"), write_gt(&scenario.gt))?;
    write_file(&out.join("det").join("det.txt"), write_detections(&scenario.detection_frames()))?;
    write_file(&out.join("embeddings.sseb"), write_embeddings(&scenario.embeddings(), dim)?)?;
    write_file(&out.join("seqinfo.ini"), write_seqinfo(&scenario.meta()))?;

    let assoc = cfg.assoc_config();
    let stats_text = format!(
        "max_own_anchor={:.6}\nmin_other_anchor={:.6}\nmin_anchor_pair={:.6}\nsame_pair_upper={:.6}\n\
         cross_pair_lower={:.6}\nmax_step_bbox={:.6}\nseparable={}\n",
        stats.max_own_anchor,
        stats.min_other_anchor,
        stats.min_anchor_pair,
        stats.same_pair_upper,
        stats.cross_pair_lower,
        stats.max_step_bbox,
        stats.separable(assoc.tau1, assoc.tau2, assoc.bbox_weight),
    );
    write_file(&out.join("stats.txt"), &stats_text)?;

    let n_dets: usize = scenario.frames.iter().map(|f| f.detections.len()).sum();
    emit(
        stdout,
        &format!(
            "seed={} frames={} identities={} gt_boxes={} detections={} embedding_dim={dim}\n",
            scenario.config.seed,
            scenario.config.n_frames,
            scenario.config.n_identities,
            scenario.gt.len(),
            n_dets
        ),
    )
}

pub fn ablate(
    args: &TrackerArgs,
    seed: Option<u64>,
    n_seeds: u64,
    variants: &[Variant],
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if n_seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let cfg = args.load()?;
    let base = seed.unwrap_or(cfg.sim.seed);
    let seeds: Vec<u64> = (0..n_seeds)
        .map(|k| base.checked_add(k))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Usage("seed range overflows u64".into()))?;
    let variants = if variants.is_empty() { &Variant::ALL[..] } else { variants };
    let rows = ablation::run_ablation(
        &cfg.sim_config(),
        &cfg.tracker_config(),
        &seeds,
        variants,
        cfg.eval.iou_gate,
    )?;
    let table = ablation::format_ablation(&rows);
    emit(stdout, &table)?;
    if let Some(p) = out {
        write_file(p, &table)?;
    }
    Ok(())
}

pub fn render(input: &Path, seqinfo: &Path, out: &Path) -> CliResult<()> {
    let tracks = parse_tracks(&read_text(input)?).map_err(|e| CliError::input(input, e))?;
    let meta = parse_seqinfo(&read_text(seqinfo)?).map_err(|e| CliError::input(seqinfo, e))?;
    write_file(out, render::render_svg(&tracks, &meta))
}
