//! Two-stage data association.
//!
//! Each track/detection cell is priced as
//! `cos_weight * (1 - <f_track, f_det>) + bbox_weight * bbox_distance(track, det, alpha)`.
//! Stage one matches detections against tracked tracks under `tau1`; detections left
//! over are matched against lost tracks under the looser `tau2`.

use std::fmt;

use crate::assignment::{solve_assignment, CostMatrix, Solver};
use crate::error::{Error, Result};
use crate::features::{cosine_distance, FeatureVec};
use crate::geometry::{bbox_distance_with, BoundingBox, BoxNorm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Anything carrying a box and an appearance feature.
pub trait Appearance {
    fn bbox(&self) -> &BoundingBox;
    fn feature(&self) -> &FeatureVec;
}

impl<T: Appearance + ?Sized> Appearance for &T {
    fn bbox(&self) -> &BoundingBox {
        (**self).bbox()
    }
    fn feature(&self) -> &FeatureVec {
        (**self).feature()
    }
}

impl Appearance for (BoundingBox, FeatureVec) {
    fn bbox(&self) -> &BoundingBox {
        &self.0
    }
    fn feature(&self) -> &FeatureVec {
        &self.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssocConfig {
    pub alpha: f64,
    pub cos_weight: f64,
    pub bbox_weight: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub solver: Solver,
    pub box_norm: BoxNorm,
}

impl Default for AssocConfig {
    fn default() -> Self {
        AssocConfig {
            alpha: 2.0,
            cos_weight: 1.0,
            bbox_weight: 1.0,
            tau1: 0.56,
            tau2: 0.64,
            solver: Solver::Hungarian,
            box_norm: BoxNorm::L2,
        }
    }
}

impl AssocConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.cos_weight, self.bbox_weight, self.tau1, self.tau2]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("association parameters must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.cos_weight < 0.0 || self.bbox_weight < 0.0 {
            return Err(Error::Config("cost weights must be non-negative".into()));
        }
        if self.cos_weight == 0.0 && self.bbox_weight == 0.0 {
            return Err(Error::Config("cost weights cannot both be zero".into()));
        }
        if self.tau2 < self.tau1 {
            return Err(Error::Config(format!("tau2 ({}) must be at least tau1 ({})", self.tau2, self.tau1)));
        }
        Ok(())
    }

    /// Cost of pairing one track with one detection.
    pub fn pair_cost(&self, track: &impl Appearance, det: &impl Appearance) -> Result<f64> {
        let mut cost = 0.0;
        if self.cos_weight != 0.0 {
            cost += self.cos_weight * cosine_distance(track.feature(), det.feature())?;
        } else if track.feature().dim() != det.feature().dim() {
            return Err(Error::DimensionMismatch {
                expected: track.feature().dim(),
                found: det.feature().dim(),
            });
        }
        if self.bbox_weight != 0.0 {
            cost +=
                self.bbox_weight * bbox_distance_with(track.bbox(), det.bbox(), self.alpha, self.box_norm)?;
        }
        Ok(cost)
    }
}

/// Rows are tracks, columns detections.
pub fn build_cost_matrix<T: Appearance, D: Appearance>(
    tracks: &[T],
    detections: &[D],
    cfg: &AssocConfig,
    threshold: f64,
) -> Result<CostMatrix> {
    let mut cost = Vec::with_capacity(tracks.len() * detections.len());
    for t in tracks {
        for d in detections {
            cost.push(cfg.pair_cost(t, d)?);
        }
    }
    Ok(CostMatrix::new(tracks.len(), detections.len(), cost, threshold))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchOutcome {
    /// `(tracked id, detection index, cost)` from stage one.
    pub matches: Vec<(TrackId, usize, f64)>,
    /// `(lost id, detection index, cost)` from stage two.
    pub reacquired: Vec<(TrackId, usize, f64)>,
    /// Tracked tracks without a detection this frame.
    pub unmatched_tracks: Vec<TrackId>,
    /// Lost tracks that stayed lost.
    pub unmatched_lost: Vec<TrackId>,
    pub unmatched_detections: Vec<usize>,
}

pub fn two_stage_match<T: Appearance, D: Appearance>(
    tracked: &[(TrackId, T)],
    lost: &[(TrackId, T)],
    detections: &[D],
    cfg: &AssocConfig,
) -> Result<MatchOutcome> {
    let mut outcome = MatchOutcome::default();

    let tracked_views: Vec<&T> = tracked.iter().map(|(_, t)| t).collect();
    let stage1 = build_cost_matrix(&tracked_views, detections, cfg, cfg.tau1)?;
    let mut det_taken = vec![false; detections.len()];
    let mut track_taken = vec![false; tracked.len()];
    for (r, c) in solve_assignment(&stage1, cfg.solver) {
        outcome.matches.push((tracked[r].0, c, stage1.cost(r, c)));
        det_taken[c] = true;
        track_taken[r] = true;
    }
    outcome.unmatched_tracks =
        tracked.iter().zip(&track_taken).filter(|(_, &taken)| !taken).map(|((id, _), _)| *id).collect();

    let leftover: Vec<usize> = (0..detections.len()).filter(|&j| !det_taken[j]).collect();
    let leftover_dets: Vec<&D> = leftover.iter().map(|&j| &detections[j]).collect();
    let lost_views: Vec<&T> = lost.iter().map(|(_, t)| t).collect();
    let stage2 = build_cost_matrix(&lost_views, &leftover_dets, cfg, cfg.tau2)?;
    let mut lost_taken = vec![false; lost.len()];
    for (r, c) in solve_assignment(&stage2, cfg.solver) {
        let det = leftover[c];
        outcome.reacquired.push((lost[r].0, det, stage2.cost(r, c)));
        det_taken[det] = true;
        lost_taken[r] = true;
    }
    outcome.unmatched_lost =
        lost.iter().zip(&lost_taken).filter(|(_, &taken)| !taken).map(|((id, _), _)| *id).collect();
    outcome.unmatched_detections = (0..detections.len()).filter(|&j| !det_taken[j]).collect();
    Ok(outcome)
}
