//! Seeded synthetic tracking scenarios.
//!
//! Identities move at constant velocity inside the arena and reflect off its
//! walls. Each identity owns a fixed unit "appearance anchor"; its detections
//! carry `normalize(anchor + feature_noise_sigma * N(0, I))`. When two ground-truth
//! boxes overlap with IoU above `occlusion_iou`, the identity with the larger id
//! is treated as occluded: its detection is dropped with probability
//! `fn_rate + 0.5`, and if it survives, its feature is pulled toward the
//! occluder's anchor by `occlusion_feature_corruption`.
//!
//! All randomness comes from one ChaCha8 stream seeded with `seed`, consumed in
//! this order:
//!
//! 1. `dim` normals for the shared appearance direction;
//! 2. per identity, `dim` normals for its private direction;
//! 3. per identity, initial state: width, x, y (uniform), speed (uniform), heading (uniform);
//! 4. per frame, per identity in id order: drop draw, confidence draw,
//!    4 jitter normals, `dim` feature-noise normals;
//! 5. per frame: false-positive draw, then (only when one is emitted) width, x, y,
//!    confidence, and `dim` normals for its feature.
//!
//! Draws in step 4 happen whether or not the detection is emitted, so changing a
//! rate does not shift the stream of later frames.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::features::{cosine_distance, FeatureVec};
use crate::geometry::{bbox_distance, iou, BoundingBox};
use crate::motio::{DetectionFrames, EmbeddingTable, GtEntry, RawDetection, SequenceMeta};
use crate::tracker::Detection;

/// Explicit initial state for one identity; overrides the random draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Start {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub width: f64,
}

/// Frames in which an identity's detection is withheld (ground truth is kept).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blackout {
    /// 1-based identity id.
    pub identity: u64,
    pub first_frame: u32,
    pub frames: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_identities: usize,
    pub n_frames: u32,
    pub arena_width: f64,
    pub arena_height: f64,
    pub box_width_min: f64,
    pub box_width_max: f64,
    /// Height over width.
    pub aspect: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub det_jitter_sigma: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub occlusion_iou: f64,
    pub feature_noise_sigma: f64,
    pub occlusion_feature_corruption: f64,
    /// Cosine similarity shared by all anchors: each anchor is
    /// `normalize(sqrt(c) * shared + sqrt(1 - c) * private)`.
    pub anchor_correlation: f64,
    pub embedding_dim: usize,
    pub seed: u64,
    pub starts: Vec<Start>,
    pub blackouts: Vec<Blackout>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_identities: 20,
            n_frames: 500,
            arena_width: 1920.0,
            arena_height: 1080.0,
            box_width_min: 40.0,
            box_width_max: 80.0,
            aspect: 2.0,
            speed_min: 1.0,
            speed_max: 4.0,
            det_jitter_sigma: 0.0,
            fp_rate: 0.0,
            fn_rate: 0.0,
            occlusion_iou: 1.0,
            feature_noise_sigma: 0.0,
            occlusion_feature_corruption: 0.0,
            anchor_correlation: 0.0,
            embedding_dim: 128,
            seed: 0,
            starts: Vec::new(),
            blackouts: Vec::new(),
        }
    }
}

impl SimConfig {
    /// The seeded occlusion benchmark used for ablations: 20 identities over 500
    /// frames, jittered boxes, false positives and misses, occlusion drops and
    /// feature corruption, and anchors similar enough that appearance alone is
    /// ambiguous.
    pub fn benchmark(seed: u64) -> Self {
        SimConfig {
            det_jitter_sigma: 2.0,
            fp_rate: 0.1,
            fn_rate: 0.05,
            occlusion_iou: 0.3,
            feature_noise_sigma: 0.07,
            occlusion_feature_corruption: 0.5,
            anchor_correlation: 0.4,
            seed,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_identities == 0 || self.n_frames == 0 || self.embedding_dim == 0 {
            return bad("n_identities, n_frames and embedding_dim must be positive");
        }
        for r in [self.fp_rate, self.fn_rate, self.occlusion_iou, self.occlusion_feature_corruption] {
            if !(0.0..=1.0).contains(&r) {
                return bad("rates, occlusion_iou and corruption must be in [0, 1]");
            }
        }
        if !(0.0..1.0).contains(&self.anchor_correlation) {
            return bad("anchor_correlation must be in [0, 1)");
        }
        if !(self.det_jitter_sigma >= 0.0 && self.feature_noise_sigma >= 0.0) {
            return bad("sigmas must be non-negative");
        }
        if !(self.box_width_min > 0.0 && self.box_width_min <= self.box_width_max && self.aspect > 0.0) {
            return bad("box width range must be positive and ordered");
        }
        if !(self.speed_min >= 0.0 && self.speed_min <= self.speed_max) {
            return bad("speed range must be non-negative and ordered");
        }
        let max_h = self.box_width_max * self.aspect;
        if !(self.arena_width > self.box_width_max && self.arena_height > max_h) {
            return bad("arena must be larger than the largest box");
        }
        if !self.starts.is_empty() {
            if self.starts.len() != self.n_identities {
                return bad("starts must list every identity");
            }
            for s in &self.starts {
                let h = s.width * self.aspect;
                if !(s.width > 0.0
                    && s.x >= 0.0
                    && s.y >= 0.0
                    && s.x + s.width <= self.arena_width
                    && s.y + h <= self.arena_height)
                {
                    return bad("scripted start must place the box inside the arena");
                }
            }
        }
        if self.blackouts.iter().any(|b| b.identity == 0 || b.identity > self.n_identities as u64) {
            return bad("blackout refers to an unknown identity");
        }
        Ok(())
    }

    fn blacked_out(&self, identity: u64, frame: u32) -> bool {
        self.blackouts
            .iter()
            .any(|b| b.identity == identity && frame >= b.first_frame && frame < b.first_frame + b.frames)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDetection {
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub feature: FeatureVec,
    /// Identity that produced it; `None` for false positives.
    pub source: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimFrame {
    pub frame: u32,
    pub detections: Vec<SimDetection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SimConfig,
    pub gt: Vec<GtEntry>,
    pub frames: Vec<SimFrame>,
    pub anchors: Vec<FeatureVec>,
}

struct Body {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    w: f64,
    h: f64,
}

impl Body {
    fn bbox(&self) -> BoundingBox {
        BoundingBox { top: self.y, left: self.x, bottom: self.y + self.h, right: self.x + self.w }
    }

    fn advance(&mut self, arena_w: f64, arena_h: f64) {
        let (x, vx) = reflect(self.x + self.vx, self.vx, arena_w - self.w);
        let (y, vy) = reflect(self.y + self.vy, self.vy, arena_h - self.h);
        self.x = x;
        self.y = y;
        self.vx = vx;
        self.vy = vy;
    }
}

/// Folds a coordinate back into `[0, limit]`, flipping the velocity on each bounce.
fn reflect(mut pos: f64, mut vel: f64, limit: f64) -> (f64, f64) {
    loop {
        if pos < 0.0 {
            pos = -pos;
            vel = -vel;
        } else if pos > limit {
            pos = 2.0 * limit - pos;
            vel = -vel;
        } else {
            return (pos, vel);
        }
    }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> FeatureVec {
    loop {
        if let Ok(f) = FeatureVec::normalize(normals(rng, dim)) {
            return f;
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        // keep the stream order independent of degenerate ranges
        let _: f64 = rng.random();
        lo
    }
}

fn blend(f: &FeatureVec, toward: &FeatureVec, c: f64) -> FeatureVec {
    let mixed: Vec<f64> =
        f.as_slice().iter().zip(toward.as_slice()).map(|(a, b)| (1.0 - c) * a + c * b).collect();
    FeatureVec::normalize(mixed).unwrap_or_else(|_| toward.clone())
}

fn jittered(b: &BoundingBox, jitter: &[f64], sigma: f64) -> BoundingBox {
    let t = b.top + sigma * jitter[0];
    let l = b.left + sigma * jitter[1];
    let bo = b.bottom + sigma * jitter[2];
    let r = b.right + sigma * jitter[3];
    let (t, bo) = (t.min(bo), t.max(bo).max(t.min(bo) + 1.0));
    let (l, r) = (l.min(r), l.max(r).max(l.min(r) + 1.0));
    BoundingBox { top: t, left: l, bottom: bo, right: r }
}

pub fn generate_scenario(cfg: &SimConfig) -> Result<Scenario> {
    cfg.validate()?;
    let dim = cfg.embedding_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let shared = normals(&mut rng, dim);
    let (ws, wp) = (cfg.anchor_correlation.sqrt(), (1.0 - cfg.anchor_correlation).sqrt());
    let anchors: Vec<FeatureVec> = (0..cfg.n_identities)
        .map(|_| {
            let private = normals(&mut rng, dim);
            let raw = shared.iter().zip(&private).map(|(s, p)| ws * s + wp * p).collect();
            FeatureVec::normalize(raw).unwrap_or_else(|_| FeatureVec::basis(dim, 0))
        })
        .collect();

    let mut bodies: Vec<Body> = (0..cfg.n_identities)
        .map(|i| {
            let w = uniform(&mut rng, cfg.box_width_min, cfg.box_width_max);
            let h = w * cfg.aspect;
            let x = uniform(&mut rng, 0.0, cfg.arena_width - w);
            let y = uniform(&mut rng, 0.0, cfg.arena_height - h);
            let speed = uniform(&mut rng, cfg.speed_min, cfg.speed_max);
            let heading = uniform(&mut rng, 0.0, std::f64::consts::TAU);
            match cfg.starts.get(i) {
                Some(s) => Body { x: s.x, y: s.y, vx: s.vx, vy: s.vy, w: s.width, h: s.width * cfg.aspect },
                None => Body { x, y, vx: speed * heading.cos(), vy: speed * heading.sin(), w, h },
            }
        })
        .collect();

    let mut gt = Vec::with_capacity(cfg.n_identities * cfg.n_frames as usize);
    let mut frames = Vec::with_capacity(cfg.n_frames as usize);
    let drop_when_occluded = (cfg.fn_rate + 0.5).min(1.0);

    for frame in 1..=cfg.n_frames {
        if frame > 1 {
            for b in &mut bodies {
                b.advance(cfg.arena_width, cfg.arena_height);
            }
        }
        let boxes: Vec<BoundingBox> = bodies.iter().map(Body::bbox).collect();

        // occluder[j] = (index of the front identity, IoU) for occluded j
        let mut occluder: Vec<Option<(usize, f64)>> = vec![None; boxes.len()];
        for j in 0..boxes.len() {
            for i in 0..j {
                let v = iou(&boxes[i], &boxes[j]);
                if v > cfg.occlusion_iou && occluder[j].is_none_or(|(_, best)| v > best) {
                    occluder[j] = Some((i, v));
                }
            }
        }

        let mut detections = Vec::new();
        for (j, b) in boxes.iter().enumerate() {
            let identity = j as u64 + 1;
            let visibility = occluder[j].map_or(1.0, |(_, v)| 1.0 - v);
            gt.push(GtEntry { frame, id: identity, bbox: *b, visibility });

            let drop_u: f64 = rng.random();
            let conf = uniform(&mut rng, 0.5, 1.0);
            let jitter = normals(&mut rng, 4);
            let noise = normals(&mut rng, dim);

            let drop_p = if occluder[j].is_some() { drop_when_occluded } else { cfg.fn_rate };
            if drop_u < drop_p || cfg.blacked_out(identity, frame) {
                continue;
            }
            let anchor = &anchors[j];
            let mut feature = if cfg.feature_noise_sigma > 0.0 {
                let raw = anchor
                    .as_slice()
                    .iter()
                    .zip(&noise)
                    .map(|(a, n)| a + cfg.feature_noise_sigma * n)
                    .collect();
                FeatureVec::normalize(raw).unwrap_or_else(|_| anchor.clone())
            } else {
                anchor.clone()
            };
            if let Some((i, _)) = occluder[j] {
                if cfg.occlusion_feature_corruption > 0.0 {
                    feature = blend(&feature, &anchors[i], cfg.occlusion_feature_corruption);
                }
            }
            let bbox =
                if cfg.det_jitter_sigma > 0.0 { jittered(b, &jitter, cfg.det_jitter_sigma) } else { *b };
            detections.push(SimDetection { bbox, confidence: conf, feature, source: Some(identity) });
        }

        let fp_u: f64 = rng.random();
        if fp_u < cfg.fp_rate {
            let w = uniform(&mut rng, cfg.box_width_min, cfg.box_width_max);
            let h = w * cfg.aspect;
            let x = uniform(&mut rng, 0.0, cfg.arena_width - w);
            let y = uniform(&mut rng, 0.0, cfg.arena_height - h);
            let confidence = uniform(&mut rng, 0.3, 1.0);
            let feature = random_unit(&mut rng, dim);
            detections.push(SimDetection {
                bbox: BoundingBox { top: y, left: x, bottom: y + h, right: x + w },
                confidence,
                feature,
                source: None,
            });
        }
        frames.push(SimFrame { frame, detections });
    }

    Ok(Scenario { config: cfg.clone(), gt, frames, anchors })
}

/// Realized appearance and motion statistics over true (non-false-positive)
/// detections, measured against identity anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityStats {
    /// Largest cosine distance from a detection feature to its own anchor.
    pub max_own_anchor: f64,
    /// Smallest cosine distance from a detection feature to another identity's anchor.
    pub min_other_anchor: f64,
    /// Smallest cosine distance between two distinct anchors.
    pub min_anchor_pair: f64,
    /// Upper bound on the cosine distance between any two same-identity features,
    /// including normalized blends of them.
    pub same_pair_upper: f64,
    /// Lower bound on the cosine distance between features of different identities.
    pub cross_pair_lower: f64,
    /// Largest box distance (alpha = 2) between consecutive detections of one identity.
    pub max_step_bbox: f64,
}

impl SeparabilityStats {
    /// Whether every same-identity cost stays below `tau1` and every
    /// cross-identity cost exceeds `tau2`, for unit cosine weight and the given
    /// box weight.
    pub fn separable(&self, tau1: f64, tau2: f64, bbox_weight: f64) -> bool {
        self.same_pair_upper + bbox_weight * self.max_step_bbox < tau1 && self.cross_pair_lower > tau2
    }
}

impl Scenario {
    pub fn separability(&self) -> Result<SeparabilityStats> {
        let mut max_own: f64 = 0.0;
        let mut min_other = f64::INFINITY;
        let mut max_step: f64 = 0.0;
        let mut last_box: Vec<Option<BoundingBox>> = vec![None; self.anchors.len()];
        for frame in &self.frames {
            for d in &frame.detections {
                let Some(src) = d.source else { continue };
                let k = (src - 1) as usize;
                for (j, a) in self.anchors.iter().enumerate() {
                    let dist = cosine_distance(&d.feature, a)?;
                    if j == k {
                        max_own = max_own.max(dist);
                    } else {
                        min_other = min_other.min(dist);
                    }
                }
                if let Some(prev) = last_box[k] {
                    max_step = max_step.max(bbox_distance(&prev, &d.bbox, 2.0)?);
                }
                last_box[k] = Some(d.bbox);
            }
        }
        let mut min_pair = f64::INFINITY;
        for i in 0..self.anchors.len() {
            for j in 0..i {
                min_pair = min_pair.min(cosine_distance(&self.anchors[i], &self.anchors[j])?);
            }
        }
        let angle = |d: f64| (1.0 - d).clamp(-1.0, 1.0).acos();
        let own = angle(max_own);
        let other = if min_other.is_finite() { angle(min_other) } else { std::f64::consts::PI };
        Ok(SeparabilityStats {
            max_own_anchor: max_own,
            min_other_anchor: min_other,
            min_anchor_pair: min_pair,
            same_pair_upper: 1.0 - (2.0 * own).min(std::f64::consts::PI).cos(),
            cross_pair_lower: 1.0 - (other - own).max(0.0).cos(),
            max_step_bbox: max_step,
        })
    }

    pub fn meta(&self) -> SequenceMeta {
        SequenceMeta {
            name: format!("sim-{}", self.config.seed),
            frame_count: self.config.n_frames,
            fps: 30.0,
            image_width: self.config.arena_width.ceil() as u32,
            image_height: self.config.arena_height.ceil() as u32,
        }
    }

    pub fn detection_frames(&self) -> DetectionFrames {
        self.frames
            .iter()
            .filter(|f| !f.detections.is_empty())
            .map(|f| {
                let dets = f
                    .detections
                    .iter()
                    .map(|d| RawDetection { bbox: d.bbox, confidence: d.confidence })
                    .collect();
                (f.frame, dets)
            })
            .collect()
    }

    pub fn embeddings(&self) -> EmbeddingTable {
        self.frames
            .iter()
            .flat_map(|f| {
                f.detections.iter().enumerate().map(move |(i, d)| ((f.frame, i as u32), d.feature.clone()))
            })
            .collect()
    }

    /// Every frame, including empty ones, as tracker input.
    pub fn tracker_input(&self) -> Vec<(u32, Vec<Detection>)> {
        self.frames
            .iter()
            .map(|f| {
                let dets = f
                    .detections
                    .iter()
                    .map(|d| Detection { bbox: d.bbox, confidence: d.confidence, feature: d.feature.clone() })
                    .collect();
                (f.frame, dets)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::l2_norm;

    fn small(seed: u64) -> SimConfig {
        SimConfig { n_identities: 5, n_frames: 60, embedding_dim: 16, seed, ..SimConfig::default() }
    }

    #[test]
    fn noiseless_detections_equal_ground_truth() {
        let s = generate_scenario(&small(3)).unwrap();
        let mut k = 0;
        for f in &s.frames {
            assert_eq!(f.detections.len(), 5);
            for d in &f.detections {
                let g = &s.gt[k];
                assert_eq!(Some(g.id), d.source);
                assert_eq!(g.bbox, d.bbox);
                assert_eq!(d.feature, s.anchors[(g.id - 1) as usize]);
                k += 1;
            }
        }
    }

    #[test]
    fn same_seed_same_scenario() {
        let cfg = SimConfig::benchmark(11);
        let cfg = SimConfig { n_frames: 50, ..cfg };
        assert_eq!(generate_scenario(&cfg).unwrap(), generate_scenario(&cfg).unwrap());
        let other = SimConfig { seed: 12, ..cfg.clone() };
        assert_ne!(generate_scenario(&cfg).unwrap().gt, generate_scenario(&other).unwrap().gt);
    }

    #[test]
    fn crossing_pair_loses_a_detection() {
        // Two boxes approach head-on along the same row and overlap around frame 21.
        let cfg = SimConfig {
            n_identities: 2,
            n_frames: 40,
            arena_width: 400.0,
            arena_height: 300.0,
            occlusion_iou: 0.3,
            embedding_dim: 8,
            starts: vec![
                Start { x: 0.0, y: 50.0, vx: 5.0, vy: 0.0, width: 50.0 },
                Start { x: 200.0, y: 50.0, vx: -5.0, vy: 0.0, width: 50.0 },
            ],
            ..SimConfig::default()
        };
        let s = generate_scenario(&cfg).unwrap();
        // Boxes of width 50 with centers 200 - 10(t - 1) apart: IoU > 0.3 when the
        // gap is below 50 * (1 - 0.3) / 1.3 ~ 26.9, i.e. frames 19..=23 overlap.
        let overlapping: Vec<u32> = (1..=40u32)
            .filter(|&t| {
                let g: Vec<_> = s.gt.iter().filter(|g| g.frame == t).collect();
                iou(&g[0].bbox, &g[1].bbox) > 0.3
            })
            .collect();
        assert_eq!(overlapping, vec![19, 20, 21, 22, 23]);
        let missing = s
            .frames
            .iter()
            .filter(|f| overlapping.contains(&f.frame))
            .filter(|f| !f.detections.iter().any(|d| d.source == Some(2)))
            .count();
        assert!(missing >= 1);
        // The front identity is never occluded.
        assert!(s.frames.iter().all(|f| f.detections.iter().any(|d| d.source == Some(1))));
    }

    #[test]
    fn trajectories_are_continuous_and_features_unit() {
        let cfg = SimConfig::benchmark(5);
        let s = generate_scenario(&SimConfig { n_frames: 200, ..cfg.clone() }).unwrap();
        let n = cfg.n_identities;
        for k in n..s.gt.len() {
            let (a, b) = (&s.gt[k - n], &s.gt[k]);
            assert_eq!(a.id, b.id);
            let (ax, ay) = a.bbox.center();
            let (bx, by) = b.bbox.center();
            assert!(((ax - bx).powi(2) + (ay - by).powi(2)).sqrt() <= cfg.speed_max + 1e-9);
        }
        for f in &s.frames {
            for d in &f.detections {
                assert!((l2_norm(d.feature.as_slice()) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn blackout_hides_detections_only() {
        let cfg =
            SimConfig { blackouts: vec![Blackout { identity: 2, first_frame: 10, frames: 5 }], ..small(1) };
        let s = generate_scenario(&cfg).unwrap();
        for f in &s.frames {
            let has = f.detections.iter().any(|d| d.source == Some(2));
            assert_eq!(has, !(10..15).contains(&f.frame), "frame {}", f.frame);
        }
        assert_eq!(s.gt.len(), 5 * 60);
    }

    #[test]
    fn separability_of_noiseless_scenario() {
        let s = generate_scenario(&small(2)).unwrap();
        let st = s.separability().unwrap();
        assert!(st.max_own_anchor < 1e-12);
        assert!(st.same_pair_upper.abs() < 1e-6);
        assert!((st.cross_pair_lower - st.min_other_anchor).abs() < 1e-6);
        assert!(st.max_step_bbox > 0.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(generate_scenario(&SimConfig { fp_rate: 1.5, ..small(0) }).is_err());
        assert!(generate_scenario(&SimConfig { n_identities: 0, ..small(0) }).is_err());
        assert!(generate_scenario(&SimConfig {
            starts: vec![],
            n_identities: 1,
            arena_width: 10.0,
            ..small(0)
        })
        .is_err());
    }
}
