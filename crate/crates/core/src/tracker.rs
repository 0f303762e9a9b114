//! Online track lifecycle.
//!
//! Every frame runs the two-stage match, then:
//! matched and reacquired tracks take the detection box and blend its feature in;
//! unmatched tracked tracks turn lost; lost tracks older than `max_lost_age` are
//! discarded; leftover detections open new tracks with fresh ids.

use crate::association::{two_stage_match, Appearance, AssocConfig, TrackId};
use crate::error::{Error, Result};
use crate::features::{accumulate, FeatureVec, DEFAULT_EMBEDDING_DIM};
use crate::geometry::{perimeter, BoundingBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Tracked,
    Lost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: TrackId,
    pub state: TrackState,
    pub bbox: BoundingBox,
    pub feature: FeatureVec,
    pub frames_since_seen: u32,
    pub total_hits: u32,
    last_seen: u32,
}

impl Appearance for Track {
    fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }
    fn feature(&self) -> &FeatureVec {
        &self.feature
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub assoc: AssocConfig,
    /// Weight of the new observation in feature accumulation; 1 keeps only the latest.
    pub beta: f64,
    pub max_lost_age: u32,
    pub min_confidence: f64,
    pub embedding_dim: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            assoc: AssocConfig::default(),
            beta: 0.4,
            max_lost_age: 30,
            min_confidence: 0.4,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        self.assoc.validate()?;
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta must be in [0, 1], got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::Config(format!(
                "min_confidence must be in [0, 1], got {}",
                self.min_confidence
            )));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub feature: FeatureVec,
}

impl Appearance for Detection {
    fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }
    fn feature(&self) -> &FeatureVec {
        &self.feature
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub frame: u32,
    pub id: TrackId,
    pub bbox: BoundingBox,
}

/// Per-frame tracked boxes, sorted by `(frame, id)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackOutput {
    pub records: Vec<TrackRecord>,
}

impl TrackOutput {
    pub fn sort(&mut self) {
        self.records.sort_by_key(|r| (r.frame, r.id));
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    /// Ordered by id.
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u32>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Tracker { cfg, tracks: Vec::new(), next_id: 1, last_frame: None })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Live tracks, both tracked and lost, in id order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn step(&mut self, frame: u32, detections: &[Detection]) -> Result<Vec<(TrackId, BoundingBox)>> {
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(Error::NonIncreasingFrame { previous, got: frame });
            }
        }
        for d in detections {
            if d.feature.dim() != self.cfg.embedding_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.cfg.embedding_dim,
                    found: d.feature.dim(),
                });
            }
        }
        self.last_frame = Some(frame);

        let dets: Vec<&Detection> =
            detections.iter().filter(|d| d.confidence >= self.cfg.min_confidence).collect();
        for d in &dets {
            if perimeter(&d.bbox) <= 0.0 {
                return Err(Error::InvalidBox(format!(
                    "zero-perimeter detection in frame {frame}: {:?}",
                    d.bbox
                )));
            }
        }

        let max_age = self.cfg.max_lost_age;
        self.tracks.retain(|t| t.state == TrackState::Tracked || frame - t.last_seen <= max_age);

        let (tracked, lost): (Vec<&Track>, Vec<&Track>) =
            self.tracks.iter().partition(|t| t.state == TrackState::Tracked);
        let tracked: Vec<(TrackId, &Track)> = tracked.into_iter().map(|t| (t.id, t)).collect();
        let lost: Vec<(TrackId, &Track)> = lost.into_iter().map(|t| (t.id, t)).collect();
        let outcome = two_stage_match(&tracked, &lost, &dets, &self.cfg.assoc)?;

        let beta = self.cfg.beta;
        let hits = outcome.matches.iter().chain(&outcome.reacquired);
        for &(id, det_idx, _) in hits {
            let det = dets[det_idx];
            let track = self.track_mut(id);
            track.feature = accumulate(&track.feature, &det.feature, beta)?;
            track.bbox = det.bbox;
            track.state = TrackState::Tracked;
            track.frames_since_seen = 0;
            track.total_hits += 1;
            track.last_seen = frame;
        }
        for id in outcome.unmatched_tracks.iter().chain(&outcome.unmatched_lost) {
            let track = self.track_mut(*id);
            track.state = TrackState::Lost;
            track.frames_since_seen = frame - track.last_seen;
        }
        self.tracks.retain(|t| t.state == TrackState::Tracked || t.frames_since_seen <= max_age);

        for det_idx in outcome.unmatched_detections {
            let det = dets[det_idx];
            let id = TrackId(self.next_id);
            self.next_id += 1;
            self.tracks.push(Track {
                id,
                state: TrackState::Tracked,
                bbox: det.bbox,
                feature: det.feature.clone(),
                frames_since_seen: 0,
                total_hits: 1,
                last_seen: frame,
            });
        }

        Ok(self.tracks.iter().filter(|t| t.state == TrackState::Tracked).map(|t| (t.id, t.bbox)).collect())
    }

    fn track_mut(&mut self, id: TrackId) -> &mut Track {
        let pos = self
            .tracks
            .binary_search_by_key(&id, |t| t.id)
            .expect("association returned an unknown track id");
        &mut self.tracks[pos]
    }
}

/// Runs a fresh tracker over frames in order and collects every frame's output.
pub fn run_sequence(frames: &[(u32, Vec<Detection>)], cfg: &TrackerConfig) -> Result<TrackOutput> {
    let mut tracker = Tracker::new(cfg.clone())?;
    let mut out = TrackOutput::default();
    for (frame, dets) in frames {
        for (id, bbox) in tracker.step(*frame, dets)? {
            out.records.push(TrackRecord { frame: *frame, id, bbox });
        }
    }
    Ok(out)
}
