//! Exhaustive reference implementations used only by tests.
//!
//! Everything here enumerates; nothing calls the assignment solvers or the
//! metric routines under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use motassoc::geometry::{iou, BoundingBox};
use motassoc::tracker::TrackOutput;

/// Best pairing over feasible cells: maximum cardinality, then minimum total.
/// Returns `(cardinality, total cost)`.
pub fn brute_force_assignment(cost: &[Vec<f64>], threshold: f64) -> (usize, f64) {
    fn rec(
        row: usize,
        cost: &[Vec<f64>],
        threshold: f64,
        used: &mut Vec<bool>,
        count: usize,
        total: f64,
        best: &mut (usize, f64),
    ) {
        if row == cost.len() {
            if count > best.0 || (count == best.0 && total < best.1) {
                *best = (count, total);
            }
            return;
        }
        rec(row + 1, cost, threshold, used, count, total, best);
        for c in 0..cost[row].len() {
            if !used[c] && cost[row][c] <= threshold {
                used[c] = true;
                rec(row + 1, cost, threshold, used, count + 1, total + cost[row][c], best);
                used[c] = false;
            }
        }
    }
    let cols = cost.first().map_or(0, Vec::len);
    let mut best = (0, 0.0);
    rec(0, cost, threshold, &mut vec![false; cols], 0, 0.0, &mut best);
    best
}

type Frames = BTreeMap<u32, Vec<(u64, BoundingBox)>>;

fn frames(out: &TrackOutput) -> Frames {
    let mut f: Frames = BTreeMap::new();
    for r in &out.records {
        f.entry(r.frame).or_default().push((r.id.0, r.bbox));
    }
    f
}

/// All matchings between `gts` and `preds` restricted to admissible pairs,
/// choosing maximum cardinality and then minimum `sum(1 - IoU)`.
fn best_frame_matching(
    gts: &[(u64, BoundingBox)],
    preds: &[(u64, BoundingBox)],
    gate: f64,
) -> Vec<(usize, usize)> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: usize,
        gts: &[(u64, BoundingBox)],
        preds: &[(u64, BoundingBox)],
        gate: f64,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        cur_cost: f64,
        best: &mut (Vec<(usize, usize)>, f64),
    ) {
        if g == gts.len() {
            if cur.len() > best.0.len() || (cur.len() == best.0.len() && cur_cost < best.1) {
                *best = (cur.clone(), cur_cost);
            }
            return;
        }
        rec(g + 1, gts, preds, gate, used, cur, cur_cost, best);
        for p in 0..preds.len() {
            let v = iou(&gts[g].1, &preds[p].1);
            if !used[p] && v >= gate {
                used[p] = true;
                cur.push((g, p));
                rec(g + 1, gts, preds, gate, used, cur, cur_cost + (1.0 - v), best);
                cur.pop();
                used[p] = false;
            }
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    rec(0, gts, preds, gate, &mut vec![false; preds.len()], &mut Vec::new(), 0.0, &mut best);
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleClear {
    pub fp: u64,
    pub fn_: u64,
    pub idsw: u64,
    pub gt_total: u64,
}

/// CLEAR-MOT by enumeration, with previous-frame persistence applied first.
pub fn brute_force_clear(gt: &TrackOutput, pred: &TrackOutput, gate: f64) -> OracleClear {
    let gf = frames(gt);
    let pf = frames(pred);
    let all: BTreeSet<u32> = gf.keys().chain(pf.keys()).copied().collect();
    let mut res = OracleClear::default();
    let mut last: HashMap<u64, u64> = HashMap::new();
    let mut prev_frame: Option<u32> = None;
    let mut prev_pairs: HashMap<u64, u64> = HashMap::new();
    for t in all {
        let empty = Vec::new();
        let gts = gf.get(&t).unwrap_or(&empty);
        let preds = pf.get(&t).unwrap_or(&empty);
        let consecutive = prev_frame.is_some_and(|p| p + 1 == t);

        let mut pairs: Vec<(u64, u64)> = Vec::new();
        let mut rest_g = Vec::new();
        let mut taken_p = BTreeSet::new();
        for (gid, gb) in gts {
            let kept = consecutive
                .then(|| prev_pairs.get(gid))
                .flatten()
                .and_then(|pid| preds.iter().find(|(id, _)| id == pid))
                .filter(|(_, pb)| iou(gb, pb) >= gate);
            match kept {
                Some((pid, _)) => {
                    pairs.push((*gid, *pid));
                    taken_p.insert(*pid);
                }
                None => rest_g.push((*gid, *gb)),
            }
        }
        let rest_p: Vec<(u64, BoundingBox)> =
            preds.iter().filter(|(id, _)| !taken_p.contains(id)).copied().collect();
        for (g, p) in best_frame_matching(&rest_g, &rest_p, gate) {
            pairs.push((rest_g[g].0, rest_p[p].0));
        }

        res.gt_total += gts.len() as u64;
        res.fn_ += (gts.len() - pairs.len()) as u64;
        res.fp += (preds.len() - pairs.len()) as u64;
        prev_pairs.clear();
        for (gid, pid) in pairs {
            if last.get(&gid).is_some_and(|&before| before != pid) {
                res.idsw += 1;
            }
            last.insert(gid, pid);
            prev_pairs.insert(gid, pid);
        }
        prev_frame = Some(t);
    }
    res
}

/// Identity true positives by enumerating every injective gt-id to pred-id map.
pub fn brute_force_idtp(gt: &TrackOutput, pred: &TrackOutput, gate: f64) -> u64 {
    let gf = frames(gt);
    let pf = frames(pred);
    let gids: Vec<u64> = gt.records.iter().map(|r| r.id.0).collect::<BTreeSet<_>>().into_iter().collect();
    let pids: Vec<u64> = pred.records.iter().map(|r| r.id.0).collect::<BTreeSet<_>>().into_iter().collect();
    let mut overlap = vec![vec![0u64; pids.len()]; gids.len()];
    for (gi, g) in gids.iter().enumerate() {
        for (pi, p) in pids.iter().enumerate() {
            for (t, gts) in &gf {
                let Some(preds) = pf.get(t) else { continue };
                let gb = gts.iter().find(|(id, _)| id == g);
                let pb = preds.iter().find(|(id, _)| id == p);
                if let (Some((_, gb)), Some((_, pb))) = (gb, pb) {
                    if iou(gb, pb) >= gate {
                        overlap[gi][pi] += 1;
                    }
                }
            }
        }
    }
    fn rec(g: usize, overlap: &[Vec<u64>], used: &mut Vec<bool>, acc: u64, best: &mut u64) {
        if g == overlap.len() {
            *best = (*best).max(acc);
            return;
        }
        rec(g + 1, overlap, used, acc, best);
        for p in 0..used.len() {
            if !used[p] {
                used[p] = true;
                rec(g + 1, overlap, used, acc + overlap[g][p], best);
                used[p] = false;
            }
        }
    }
    let mut best = 0;
    rec(0, &overlap, &mut vec![false; pids.len()], 0, &mut best);
    best
}
