//! CLEAR-MOT (MOTA, FP, FN, IDSW), identity metrics (IDF1), and MT/ML.
//!
//! Frame matching uses IoU gated at `iou_gate`: a pair is admissible when
//! `iou >= iou_gate`. Counts are kept raw so several sequences can be summed
//! before ratios are taken.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::assignment::{min_cost_assignment, solve_hungarian, CostMatrix};
use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::motio::{gt_as_tracks, GtEntry};
use crate::tracker::TrackOutput;

pub const DEFAULT_IOU_GATE: f64 = 0.5;

/// One frame's objects: `(id, box)` in file order.
pub(crate) type FrameObjects = Vec<(u64, BoundingBox)>;

pub(crate) fn by_frame(out: &TrackOutput) -> Result<BTreeMap<u32, FrameObjects>> {
    let mut frames: BTreeMap<u32, FrameObjects> = BTreeMap::new();
    for r in &out.records {
        let objs = frames.entry(r.frame).or_default();
        if objs.iter().any(|(id, _)| *id == r.id.0) {
            return Err(Error::Config(format!("id {} appears twice in frame {}", r.id, r.frame)));
        }
        objs.push((r.id.0, r.bbox));
    }
    Ok(frames)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClearMotCounts {
    pub fp: u64,
    pub fn_: u64,
    pub idsw: u64,
    pub matches: u64,
    pub gt_total: u64,
    pub pred_total: u64,
}

impl ClearMotCounts {
    pub fn mota(&self) -> Option<f64> {
        (self.gt_total > 0).then(|| 1.0 - (self.fp + self.fn_ + self.idsw) as f64 / self.gt_total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClearMot {
    pub counts: ClearMotCounts,
    /// Per gt identity: (frames present, frames matched to any prediction).
    pub coverage: BTreeMap<u64, (u64, u64)>,
}

pub fn clear_mot(gt: &[GtEntry], pred: &TrackOutput, iou_gate: f64) -> Result<ClearMot> {
    clear_mot_tracks(&gt_as_tracks(gt), pred, iou_gate)
}

/// CLEAR-MOT with the persistence rule: a pair matched in frame `t-1` is kept in
/// frame `t` while still admissible; the rest are matched by a maximum-cardinality,
/// minimum-`(1 - IoU)` assignment. An identity switch is counted when a gt
/// identity's matched prediction differs from its most recent previous match.
pub fn clear_mot_tracks(gt: &TrackOutput, pred: &TrackOutput, iou_gate: f64) -> Result<ClearMot> {
    let gt_frames = by_frame(gt)?;
    let pred_frames = by_frame(pred)?;
    let empty = FrameObjects::new();

    let mut frames: Vec<u32> = gt_frames.keys().chain(pred_frames.keys()).copied().collect();
    frames.sort_unstable();
    frames.dedup();

    let mut result = ClearMot::default();
    let mut last_match: HashMap<u64, u64> = HashMap::new();
    let mut prev: (Option<u32>, HashMap<u64, u64>) = (None, HashMap::new());

    for frame in frames {
        let gts = gt_frames.get(&frame).unwrap_or(&empty);
        let preds = pred_frames.get(&frame).unwrap_or(&empty);
        let carried = if prev.0 == Some(frame.wrapping_sub(1)) { &prev.1 } else { &HashMap::new() };
        let pairs = match_frame(gts, preds, carried, iou_gate);

        let c = &mut result.counts;
        c.gt_total += gts.len() as u64;
        c.pred_total += preds.len() as u64;
        c.matches += pairs.len() as u64;
        c.fn_ += (gts.len() - pairs.len()) as u64;
        c.fp += (preds.len() - pairs.len()) as u64;

        let mut current = HashMap::new();
        for (g, p) in pairs {
            let (gid, pid) = (gts[g].0, preds[p].0);
            if let Some(&before) = last_match.get(&gid) {
                if before != pid {
                    c.idsw += 1;
                }
            }
            last_match.insert(gid, pid);
            current.insert(gid, pid);
            result.coverage.entry(gid).or_default().1 += 1;
        }
        for (gid, _) in gts {
            result.coverage.entry(*gid).or_default().0 += 1;
        }
        prev = (Some(frame), current);
    }
    Ok(result)
}

/// Returns `(gt index, pred index)` pairs for one frame.
fn match_frame(
    gts: &FrameObjects,
    preds: &FrameObjects,
    carried: &HashMap<u64, u64>,
    iou_gate: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut gt_used = vec![false; gts.len()];
    let mut pred_used = vec![false; preds.len()];
    for (gi, (gid, gbox)) in gts.iter().enumerate() {
        let Some(pid) = carried.get(gid) else { continue };
        if let Some(pi) = preds.iter().position(|(id, _)| id == pid) {
            if iou(gbox, &preds[pi].1) >= iou_gate {
                pairs.push((gi, pi));
                gt_used[gi] = true;
                pred_used[pi] = true;
            }
        }
    }

    let free_gt: Vec<usize> = (0..gts.len()).filter(|&i| !gt_used[i]).collect();
    let free_pred: Vec<usize> = (0..preds.len()).filter(|&j| !pred_used[j]).collect();
    let mut cost = Vec::with_capacity(free_gt.len() * free_pred.len());
    for &g in &free_gt {
        for &p in &free_pred {
            let v = iou(&gts[g].1, &preds[p].1);
            cost.push(if v >= iou_gate { 1.0 - v } else { 2.0 });
        }
    }
    let m = CostMatrix::new(free_gt.len(), free_pred.len(), cost, 1.0);
    pairs.extend(solve_hungarian(&m).into_iter().map(|(r, c)| (free_gt[r], free_pred[c])));
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IdCounts {
    pub idtp: u64,
    pub idfp: u64,
    pub idfn: u64,
}

impl IdCounts {
    pub fn idf1(&self) -> Option<f64> {
        let denom = 2 * self.idtp + self.idfp + self.idfn;
        (denom > 0).then(|| 2.0 * self.idtp as f64 / denom as f64)
    }
}

pub fn idf1(gt: &[GtEntry], pred: &TrackOutput, iou_gate: f64) -> Result<IdCounts> {
    idf1_tracks(&gt_as_tracks(gt), pred, iou_gate)
}

/// Identity metrics from one global gt-identity to predicted-identity pairing
/// maximizing the number of co-located frames (equivalently minimizing the
/// induced misses plus false positives).
pub fn idf1_tracks(gt: &TrackOutput, pred: &TrackOutput, iou_gate: f64) -> Result<IdCounts> {
    let gt_frames = by_frame(gt)?;
    let pred_frames = by_frame(pred)?;
    let gt_ids = sorted_ids(gt);
    let pred_ids = sorted_ids(pred);
    let gi: HashMap<u64, usize> = gt_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let pi: HashMap<u64, usize> = pred_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut overlap = vec![0u64; gt_ids.len() * pred_ids.len()];
    for (frame, gts) in &gt_frames {
        let Some(preds) = pred_frames.get(frame) else { continue };
        for (gid, gbox) in gts {
            for (pid, pbox) in preds {
                if iou(gbox, pbox) >= iou_gate {
                    overlap[gi[gid] * pred_ids.len() + pi[pid]] += 1;
                }
            }
        }
    }

    let cost: Vec<f64> = overlap.iter().map(|&n| -(n as f64)).collect();
    let idtp: u64 = min_cost_assignment(gt_ids.len(), pred_ids.len(), &cost)
        .into_iter()
        .map(|(r, c)| overlap[r * pred_ids.len() + c])
        .sum();
    let gt_total = gt.records.len() as u64;
    let pred_total = pred.records.len() as u64;
    Ok(IdCounts { idtp, idfp: pred_total - idtp, idfn: gt_total - idtp })
}

fn sorted_ids(out: &TrackOutput) -> Vec<u64> {
    let mut ids: Vec<u64> = out.records.iter().map(|r| r.id.0).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Mostly tracked: coverage >= 0.8. Mostly lost: coverage <= 0.2.
pub fn mt_ml_from_coverage(coverage: &BTreeMap<u64, (u64, u64)>) -> (u64, u64) {
    let mut mt = 0;
    let mut ml = 0;
    for &(present, matched) in coverage.values() {
        if 5 * matched >= 4 * present {
            mt += 1;
        }
        if 5 * matched <= present {
            ml += 1;
        }
    }
    (mt, ml)
}

pub fn mt_ml(gt: &[GtEntry], pred: &TrackOutput, iou_gate: f64) -> Result<(u64, u64)> {
    Ok(mt_ml_from_coverage(&clear_mot(gt, pred, iou_gate)?.coverage))
}

/// Raw counts for one or more sequences; ratios are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricsReport {
    pub clear: ClearMotCounts,
    pub ids: IdCounts,
    pub mt: u64,
    pub ml: u64,
    pub gt_ids: u64,
}

impl MetricsReport {
    pub fn mota(&self) -> Option<f64> {
        self.clear.mota()
    }

    pub fn idf1(&self) -> Option<f64> {
        self.ids.idf1()
    }

    pub fn fp(&self) -> u64 {
        self.clear.fp
    }

    pub fn fn_(&self) -> u64 {
        self.clear.fn_
    }

    pub fn idsw(&self) -> u64 {
        self.clear.idsw
    }

    pub fn gt_total(&self) -> u64 {
        self.clear.gt_total
    }

    fn pct(n: u64, of: u64) -> Option<f64> {
        (of > 0).then(|| 100.0 * n as f64 / of as f64)
    }

    pub fn mt_pct(&self) -> Option<f64> {
        Self::pct(self.mt, self.gt_ids)
    }

    pub fn ml_pct(&self) -> Option<f64> {
        Self::pct(self.ml, self.gt_ids)
    }

    /// Sums raw counts.
    pub fn merge(&mut self, other: &MetricsReport) {
        let c = &mut self.clear;
        c.fp += other.clear.fp;
        c.fn_ += other.clear.fn_;
        c.idsw += other.clear.idsw;
        c.matches += other.clear.matches;
        c.gt_total += other.clear.gt_total;
        c.pred_total += other.clear.pred_total;
        self.ids.idtp += other.ids.idtp;
        self.ids.idfp += other.ids.idfp;
        self.ids.idfn += other.ids.idfn;
        self.mt += other.mt;
        self.ml += other.ml;
        self.gt_ids += other.gt_ids;
    }

    /// One `key=value` per line.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.6}"));
        writeln!(s, "mota={}", opt(self.mota())).unwrap();
        writeln!(s, "idf1={}", opt(self.idf1())).unwrap();
        writeln!(s, "mt={}", self.mt).unwrap();
        writeln!(s, "mt_pct={}", opt(self.mt_pct())).unwrap();
        writeln!(s, "ml={}", self.ml).unwrap();
        writeln!(s, "ml_pct={}", opt(self.ml_pct())).unwrap();
        writeln!(s, "fp={}", self.clear.fp).unwrap();
        writeln!(s, "fn={}", self.clear.fn_).unwrap();
        writeln!(s, "idsw={}", self.clear.idsw).unwrap();
        writeln!(s, "gt_total={}", self.clear.gt_total).unwrap();
        writeln!(s, "pred_total={}", self.clear.pred_total).unwrap();
        writeln!(s, "gt_ids={}", self.gt_ids).unwrap();
        writeln!(s, "idtp={}", self.ids.idtp).unwrap();
        writeln!(s, "idfp={}", self.ids.idfp).unwrap();
        writeln!(s, "idfn={}", self.ids.idfn).unwrap();
        s
    }
}

/// Plain-text table, one row per named report.
pub fn format_table(rows: &[(String, MetricsReport)]) -> String {
    let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{:.1}", 100.0 * x));
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(8);
    let mut s = String::new();
    writeln!(
        s,
        "{:<name_w$} {:>7} {:>7} {:>9} {:>9} {:>8} {:>8} {:>6}",
        "name", "MOTA", "IDF1", "MT", "ML", "FP", "FN", "IDSW"
    )
    .unwrap();
    for (name, r) in rows {
        writeln!(
            s,
            "{:<name_w$} {:>7} {:>7} {:>9} {:>9} {:>8} {:>8} {:>6}",
            name,
            pct(r.mota()),
            pct(r.idf1()),
            format!("{}/{}", r.mt, r.gt_ids),
            format!("{}/{}", r.ml, r.gt_ids),
            r.clear.fp,
            r.clear.fn_,
            r.clear.idsw
        )
        .unwrap();
    }
    s
}

/// Evaluates one sequence.
pub fn evaluate(gt: &[GtEntry], pred: &TrackOutput, iou_gate: f64) -> Result<MetricsReport> {
    evaluate_tracks(&gt_as_tracks(gt), pred, iou_gate)
}

pub fn evaluate_tracks(gt: &TrackOutput, pred: &TrackOutput, iou_gate: f64) -> Result<MetricsReport> {
    let clear = clear_mot_tracks(gt, pred, iou_gate)?;
    let ids = idf1_tracks(gt, pred, iou_gate)?;
    let (mt, ml) = mt_ml_from_coverage(&clear.coverage);
    Ok(MetricsReport { clear: clear.counts, ids, mt, ml, gt_ids: clear.coverage.len() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::TrackId;
    use crate::tracker::TrackRecord;

    fn rec(frame: u32, id: u64, x: f64) -> TrackRecord {
        TrackRecord { frame, id: TrackId(id), bbox: BoundingBox::from_ltwh(x, 0., 10., 20.).unwrap() }
    }

    fn out(records: Vec<TrackRecord>) -> TrackOutput {
        let mut o = TrackOutput { records };
        o.sort();
        o
    }

    fn single_identity(frames: u32) -> TrackOutput {
        out((1..=frames).map(|f| rec(f, 1, f as f64)).collect())
    }

    #[test]
    fn perfect_tracker() {
        let gt = out((1..=5).flat_map(|f| [rec(f, 1, 0.), rec(f, 2, 100.), rec(f, 3, 200.)]).collect());
        let r = evaluate_tracks(&gt, &gt, 0.5).unwrap();
        assert_eq!((r.fp(), r.fn_(), r.idsw()), (0, 0, 0));
        assert_eq!(r.mota(), Some(1.0));
        assert_eq!(r.idf1(), Some(1.0));
        assert_eq!((r.mt, r.ml), (3, 0));
    }

    #[test]
    fn empty_prediction() {
        let gt = single_identity(10);
        let r = evaluate_tracks(&gt, &TrackOutput::default(), 0.5).unwrap();
        assert_eq!((r.fp(), r.fn_(), r.idsw()), (0, 10, 0));
        assert_eq!(r.mota(), Some(0.0));
        assert_eq!(r.idf1(), Some(0.0));
        assert_eq!((r.mt, r.ml), (0, 1));
    }

    #[test]
    fn empty_ground_truth_has_no_mota() {
        let r = evaluate_tracks(&TrackOutput::default(), &single_identity(3), 0.5).unwrap();
        assert_eq!(r.mota(), None);
        assert_eq!(r.fp(), 3);
    }

    #[test]
    fn split_identity() {
        let gt = single_identity(10);
        let pred = out((1..=10).map(|f| rec(f, if f <= 5 { 7 } else { 8 }, f as f64)).collect());
        let r = evaluate_tracks(&gt, &pred, 0.5).unwrap();
        assert_eq!(r.idsw(), 1);
        assert!((r.mota().unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(r.ids, IdCounts { idtp: 5, idfp: 5, idfn: 5 });
        assert_eq!(r.idf1(), Some(0.5));
    }

    #[test]
    fn coverage_boundaries_are_inclusive() {
        let gt = single_identity(10);
        let eight = out((1..=8).map(|f| rec(f, 1, f as f64)).collect());
        let two = out((1..=2).map(|f| rec(f, 1, f as f64)).collect());
        let r8 = evaluate_tracks(&gt, &eight, 0.5).unwrap();
        assert_eq!((r8.mt, r8.ml), (1, 0));
        let r2 = evaluate_tracks(&gt, &two, 0.5).unwrap();
        assert_eq!((r2.mt, r2.ml), (0, 1));
    }

    #[test]
    fn persistence_keeps_previous_pair() {
        // Frame 2: prediction 9 overlaps gt better than 8, but 8 is carried over.
        let gt = out(vec![rec(1, 1, 0.), rec(2, 1, 0.)]);
        let mut p2 = rec(2, 8, 0.);
        p2.bbox = BoundingBox::from_ltwh(2., 0., 10., 20.).unwrap();
        let pred = out(vec![rec(1, 8, 0.), p2, rec(2, 9, 0.)]);
        let r = clear_mot_tracks(&gt, &pred, 0.5).unwrap();
        assert_eq!(r.counts.idsw, 0);
        assert_eq!(r.counts.fp, 1);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let bad = TrackOutput { records: vec![rec(1, 1, 0.), rec(1, 1, 5.)] };
        assert!(evaluate_tracks(&bad, &bad, 0.5).is_err());
    }

    #[test]
    fn merge_sums_counts() {
        let gt = single_identity(10);
        let pred = out((1..=10).map(|f| rec(f, if f <= 5 { 7 } else { 8 }, f as f64)).collect());
        let a = evaluate_tracks(&gt, &pred, 0.5).unwrap();
        let b = evaluate_tracks(&gt, &gt, 0.5).unwrap();
        let mut total = a;
        total.merge(&b);
        assert_eq!(total.gt_total(), 20);
        assert_eq!(total.idsw(), 1);
        assert!((total.mota().unwrap() - 0.95).abs() < 1e-12);
        let kv = total.to_key_values();
        assert!(kv.contains("idsw=1\n"));
        assert!(format_table(&[("all".into(), total)]).contains("95.0"));
    }
}
