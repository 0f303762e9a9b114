//! Run configuration: a TOML file with one table per module. Unknown keys are
//! rejected; omitted keys take the defaults below.

use serde::Deserialize;

use motassoc::assignment::Solver;
use motassoc::geometry::BoxNorm;
use motassoc::sim::{Blackout, SimConfig, Start};
use motassoc::{AssocConfig, TrackerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverName {
    Hungarian,
    Greedy,
}

impl From<SolverName> for Solver {
    fn from(s: SolverName) -> Self {
        match s {
            SolverName::Hungarian => Solver::Hungarian,
            SolverName::Greedy => Solver::Greedy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormName {
    L2,
    L1,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssocSection {
    pub alpha: f64,
    pub cos_weight: f64,
    pub bbox_weight: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub solver: SolverName,
    pub box_norm: NormName,
}

impl Default for AssocSection {
    fn default() -> Self {
        let d = AssocConfig::default();
        AssocSection {
            alpha: d.alpha,
            cos_weight: d.cos_weight,
            bbox_weight: d.bbox_weight,
            tau1: d.tau1,
            tau2: d.tau2,
            solver: SolverName::Hungarian,
            box_norm: NormName::L2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerSection {
    pub beta: f64,
    pub max_lost_age: u32,
    pub min_confidence: f64,
    pub embedding_dim: usize,
}

impl Default for TrackerSection {
    fn default() -> Self {
        let d = TrackerConfig::default();
        TrackerSection {
            beta: d.beta,
            max_lost_age: d.max_lost_age,
            min_confidence: d.min_confidence,
            embedding_dim: d.embedding_dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartEntry {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlackoutEntry {
    pub identity: u64,
    pub first_frame: u32,
    pub frames: u32,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n_identities: usize,
    pub n_frames: u32,
    pub arena_width: f64,
    pub arena_height: f64,
    pub box_width_min: f64,
    pub box_width_max: f64,
    pub aspect: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub det_jitter_sigma: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub occlusion_iou: f64,
    pub feature_noise_sigma: f64,
    pub occlusion_feature_corruption: f64,
    pub anchor_correlation: f64,
    pub embedding_dim: usize,
    pub seed: u64,
    pub starts: Vec<StartEntry>,
    pub blackouts: Vec<BlackoutEntry>,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::benchmark(0);
        SimSection {
            n_identities: d.n_identities,
            n_frames: d.n_frames,
            arena_width: d.arena_width,
            arena_height: d.arena_height,
            box_width_min: d.box_width_min,
            box_width_max: d.box_width_max,
            aspect: d.aspect,
            speed_min: d.speed_min,
            speed_max: d.speed_max,
            det_jitter_sigma: d.det_jitter_sigma,
            fp_rate: d.fp_rate,
            fn_rate: d.fn_rate,
            occlusion_iou: d.occlusion_iou,
            feature_noise_sigma: d.feature_noise_sigma,
            occlusion_feature_corruption: d.occlusion_feature_corruption,
            anchor_correlation: d.anchor_correlation,
            embedding_dim: d.embedding_dim,
            seed: d.seed,
            starts: Vec::new(),
            blackouts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub iou_gate: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { iou_gate: motassoc::metrics::DEFAULT_IOU_GATE }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub assoc: AssocSection,
    pub tracker: TrackerSection,
    pub sim: SimSection,
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn assoc_config(&self) -> AssocConfig {
        let a = &self.assoc;
        AssocConfig {
            alpha: a.alpha,
            cos_weight: a.cos_weight,
            bbox_weight: a.bbox_weight,
            tau1: a.tau1,
            tau2: a.tau2,
            solver: a.solver.into(),
            box_norm: match a.box_norm {
                NormName::L2 => BoxNorm::L2,
                NormName::L1 => BoxNorm::L1,
            },
        }
    }

    pub fn tracker_config(&self) -> TrackerConfig {
        let t = &self.tracker;
        TrackerConfig {
            assoc: self.assoc_config(),
            beta: t.beta,
            max_lost_age: t.max_lost_age,
            min_confidence: t.min_confidence,
            embedding_dim: t.embedding_dim,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            n_identities: s.n_identities,
            n_frames: s.n_frames,
            arena_width: s.arena_width,
            arena_height: s.arena_height,
            box_width_min: s.box_width_min,
            box_width_max: s.box_width_max,
            aspect: s.aspect,
            speed_min: s.speed_min,
            speed_max: s.speed_max,
            det_jitter_sigma: s.det_jitter_sigma,
            fp_rate: s.fp_rate,
            fn_rate: s.fn_rate,
            occlusion_iou: s.occlusion_iou,
            feature_noise_sigma: s.feature_noise_sigma,
            occlusion_feature_corruption: s.occlusion_feature_corruption,
            anchor_correlation: s.anchor_correlation,
            embedding_dim: s.embedding_dim,
            seed: s.seed,
            starts: s
                .starts
                .iter()
                .map(|e| Start { x: e.x, y: e.y, vx: e.vx, vy: e.vy, width: e.width })
                .collect(),
            blackouts: s
                .blackouts
                .iter()
                .map(|b| Blackout { identity: b.identity, first_frame: b.first_frame, frames: b.frames })
                .collect(),
        }
    }

    /// Validates every section before any work starts.
    pub fn validate(&self) -> Result<(), String> {
        self.tracker_config().validate().map_err(|e| e.to_string())?;
        self.sim_config().validate().map_err(|e| format!("[sim] {e}"))?;
        let g = self.eval.iou_gate;
        if !(g > 0.0 && g <= 1.0) {
            return Err(format!("[eval] iou_gate must be in (0, 1], got {g}"));
        }
        Ok(())
    }
}

/// The default configuration as commented TOML. Values marked "published" are
/// the association method's own settings; the rest are choices of this tool.
pub fn default_config_text() -> String {
    let c = RunConfig::default();
    let (a, t, s) = (&c.assoc, &c.tracker, &c.sim);
    format!(
        r#"# motassoc run configuration

[assoc]
# box distance = ||track - det||_2 / (alpha * perimeter(track)); published: 2
alpha = {alpha:?}
# appearance : geometry weighting; published: 1 : 1
cos_weight = {cw:?}
bbox_weight = {bw:?}
# first-stage threshold against tracked tracks; published: 0.56
tau1 = {tau1:?}
# second-stage threshold against lost tracks; published: 0.64
tau2 = {tau2:?}
# "hungarian" or "greedy"; choice of this tool
solver = "hungarian"
# "l2" or "l1" over the 4-coordinate difference; choice of this tool
box_norm = "l2"

[tracker]
# feature accumulation weight of the newest observation; published: 0.4
beta = {beta:?}
# frames a lost track is kept for reacquisition; choice of this tool
max_lost_age = {age}
# detections below this confidence are ignored; choice of this tool
min_confidence = {conf:?}
# embedding length; published: 512
embedding_dim = {dim}

[sim]
# seeded benchmark scenario; all values are choices of this tool
n_identities = {n_id}
n_frames = {n_frames}
arena_width = {aw:?}
arena_height = {ah:?}
box_width_min = {bwmin:?}
box_width_max = {bwmax:?}
aspect = {aspect:?}
speed_min = {smin:?}
speed_max = {smax:?}
det_jitter_sigma = {jitter:?}
fp_rate = {fp:?}
fn_rate = {fn_:?}
occlusion_iou = {occ:?}
feature_noise_sigma = {noise:?}
occlusion_feature_corruption = {corrupt:?}
anchor_correlation = {corr:?}
embedding_dim = {sdim}
seed = {seed}

[eval]
# IoU needed for a prediction to count as matching ground truth
iou_gate = {gate:?}
"#,
        alpha = a.alpha,
        cw = a.cos_weight,
        bw = a.bbox_weight,
        tau1 = a.tau1,
        tau2 = a.tau2,
        beta = t.beta,
        age = t.max_lost_age,
        conf = t.min_confidence,
        dim = t.embedding_dim,
        n_id = s.n_identities,
        n_frames = s.n_frames,
        aw = s.arena_width,
        ah = s.arena_height,
        bwmin = s.box_width_min,
        bwmax = s.box_width_max,
        aspect = s.aspect,
        smin = s.speed_min,
        smax = s.speed_max,
        jitter = s.det_jitter_sigma,
        fp = s.fp_rate,
        fn_ = s.fn_rate,
        occ = s.occlusion_iou,
        noise = s.feature_noise_sigma,
        corrupt = s.occlusion_feature_corruption,
        corr = s.anchor_correlation,
        sdim = s.embedding_dim,
        seed = s.seed,
        gate = c.eval.iou_gate,
    )
}
