use motassoc::association::TrackId;
use motassoc::features::FeatureVec;
use motassoc::geometry::BoundingBox;
use motassoc::motio::{
    decode_embeddings, parse_detections, parse_gt, parse_tracks, write_detections, write_embeddings,
    write_gt, write_tracks, EmbeddingTable,
};
use motassoc::sim::{generate_scenario, SimConfig};
use motassoc::tracker::{TrackOutput, TrackRecord};
use proptest::prelude::*;

/// Coordinates on a 1/16-pixel grid, where `left + width` is exact.
fn arb_grid_box() -> impl Strategy<Value = BoundingBox> {
    (0u32..32_000, 0u32..32_000, 1u32..8_000, 1u32..8_000).prop_map(|(l, t, w, h)| {
        BoundingBox::from_ltwh(l as f64 / 16.0, t as f64 / 16.0, w as f64 / 16.0, h as f64 / 16.0).unwrap()
    })
}

fn arb_output() -> impl Strategy<Value = TrackOutput> {
    prop::collection::btree_map((1u32..200, 1u64..50), arb_grid_box(), 0..40).prop_map(|m| TrackOutput {
        records: m
            .into_iter()
            .map(|((frame, id), bbox)| TrackRecord { frame, id: TrackId(id), bbox })
            .collect(),
    })
}

fn arb_table(dim: usize) -> impl Strategy<Value = EmbeddingTable> {
    prop::collection::btree_map(
        (1u32..100, 0u32..20),
        prop::collection::vec(-1.0..1.0f64, dim).prop_filter_map("zero", |v| FeatureVec::normalize(v).ok()),
        0..20,
    )
}

proptest! {
    #[test]
    fn track_file_round_trip(out in arb_output()) {
        let text = write_tracks(&out);
        prop_assert_eq!(parse_tracks(&text).unwrap(), out);
    }

    #[test]
    fn embedding_round_trip_is_exact_in_f32(table in arb_table(16)) {
        let bytes = write_embeddings(&table, 16).unwrap();
        let back = decode_embeddings(&bytes, 16).unwrap();
        prop_assert_eq!(back.len(), table.len());
        for (k, f) in &table {
            let g = &back[k];
            for (a, b) in f.as_slice().iter().zip(g.as_slice()) {
                prop_assert_eq!(*a as f32, *b as f32);
            }
        }
        // A second pass is bit-identical.
        prop_assert_eq!(write_embeddings(&back, 16).unwrap(), bytes);
    }
}

#[test]
fn simulated_files_parse_back() {
    let s = generate_scenario(&SimConfig { n_frames: 40, ..SimConfig::benchmark(3) }).unwrap();
    let dets = parse_detections(&write_detections(&s.detection_frames())).unwrap();
    assert_eq!(dets.len(), s.frames.iter().filter(|f| !f.detections.is_empty()).count());
    for f in &s.frames {
        let Some(parsed) = dets.get(&f.frame) else { continue };
        assert_eq!(parsed.len(), f.detections.len());
        for (p, d) in parsed.iter().zip(&f.detections) {
            assert_eq!(p.confidence, d.confidence);
            for (a, b) in p.bbox.as_array().iter().zip(d.bbox.as_array()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
    let gt = parse_gt(&write_gt(&s.gt)).unwrap();
    assert_eq!(gt.len(), s.gt.len());
    let bytes = write_embeddings(&s.embeddings(), s.config.embedding_dim).unwrap();
    let table = decode_embeddings(&bytes, s.config.embedding_dim).unwrap();
    assert_eq!(table.len(), s.frames.iter().map(|f| f.detections.len()).sum::<usize>());
}
