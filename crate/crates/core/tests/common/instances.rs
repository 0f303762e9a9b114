//! Seeded random inputs shared by the oracle tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use motassoc::association::TrackId;
use motassoc::geometry::BoundingBox;
use motassoc::tracker::{TrackOutput, TrackRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gated matrix up to 6x6 with costs on a 1/64 grid so every sum is exact.
pub fn gated_matrix(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, f64) {
    let rows = rng.random_range(1..=6);
    let cols = rng.random_range(1..=6);
    let cost =
        (0..rows).map(|_| (0..cols).map(|_| rng.random_range(0..128) as f64 / 64.0).collect()).collect();
    let threshold = rng.random_range(0..128) as f64 / 64.0;
    (cost, threshold)
}

fn jitter_box(rng: &mut ChaCha8Rng, base: &BoundingBox, amount: f64) -> BoundingBox {
    let dx = rng.random_range(-amount..amount);
    let dy = rng.random_range(-amount..amount);
    let dw = rng.random_range(-amount..amount) / 2.0;
    BoundingBox::from_ltwh(base.left + dx, base.top + dy, (base.width() + dw).max(1.0), base.height())
        .unwrap()
}

/// Ground truth and prediction with at most 4 identities each over at most 8
/// frames. Identities crowd a small area and predictions hop between them, so
/// gating, persistence, and switches all get exercised.
pub fn micro_instance(rng: &mut ChaCha8Rng) -> (TrackOutput, TrackOutput) {
    let frames = rng.random_range(1..=8u32);
    let n_gt = rng.random_range(1..=4u64);
    let n_pred = rng.random_range(0..=4u64);
    let mut gt = TrackOutput::default();
    let mut pred = TrackOutput::default();
    let mut pos: Vec<BoundingBox> = (0..n_gt)
        .map(|_| {
            BoundingBox::from_ltwh(rng.random_range(0.0..60.0), rng.random_range(0.0..30.0), 30.0, 60.0)
                .unwrap()
        })
        .collect();
    let mut follows: Vec<usize> = (0..n_pred).map(|_| rng.random_range(0..n_gt as usize)).collect();
    for t in 1..=frames {
        let mut present = Vec::new();
        for (g, b) in pos.iter_mut().enumerate() {
            *b = jitter_box(rng, b, 4.0);
            if rng.random_bool(0.85) {
                gt.records.push(TrackRecord { frame: t, id: TrackId(g as u64 + 1), bbox: *b });
                present.push(g);
            }
        }
        for (p, f) in follows.iter_mut().enumerate() {
            if rng.random_bool(0.2) {
                *f = rng.random_range(0..n_gt as usize);
            }
            if !rng.random_bool(0.8) {
                continue;
            }
            let bbox = if rng.random_bool(0.1) {
                BoundingBox::from_ltwh(rng.random_range(0.0..90.0), rng.random_range(0.0..60.0), 30.0, 60.0)
                    .unwrap()
            } else {
                jitter_box(rng, &pos[*f], 8.0)
            };
            pred.records.push(TrackRecord { frame: t, id: TrackId(100 + p as u64), bbox });
        }
    }
    gt.sort();
    pred.sort();
    (gt, pred)
}
