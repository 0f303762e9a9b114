//! MOTChallenge text formats and the `SSEB` binary embedding format.
//!
//! Text rows are `frame,id,left,top,width,height,...`; boxes are converted to
//! [`BoundingBox`] on parse and back on write.
//!
//! `SSEB` layout, all integers little-endian:
//!
//! ```text
//! magic   4 bytes  "SSEB"
//! version u16      1
//! dim     u16
//! count   u32
//! count x { frame u32, detection index u32, dim x f32 (IEEE-754 LE) }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::association::TrackId;
use crate::error::{Error, Result};
use crate::features::{l2_norm, FeatureVec};
use crate::geometry::BoundingBox;
use crate::tracker::{TrackOutput, TrackRecord};

pub const SSEB_MAGIC: &[u8; 4] = b"SSEB";
pub const SSEB_VERSION: u16 = 1;
const SSEB_HEADER_LEN: usize = 12;

/// Within this distance of unit norm a stored feature is used as-is.
pub const NORM_EXACT_TOL: f64 = 1e-6;
/// Beyond this distance of unit norm a stored feature is rejected.
pub const NORM_CORRUPT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMeta {
    pub name: String,
    pub frame_count: u32,
    pub fps: f64,
    pub image_width: u32,
    pub image_height: u32,
}

impl SequenceMeta {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(Error::Config("frame_count must be at least 1".into()));
        }
        if !self.fps.is_finite() || self.fps <= 0.0 || self.image_width == 0 || self.image_height == 0 {
            return Err(Error::Config("fps and image dimensions must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawDetection {
    pub bbox: BoundingBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtEntry {
    pub frame: u32,
    pub id: u64,
    pub bbox: BoundingBox,
    pub visibility: f64,
}

/// Detections grouped by frame, file order preserved within each frame.
pub type DetectionFrames = BTreeMap<u32, Vec<RawDetection>>;

/// Embeddings keyed by `(frame, within-frame detection index)`.
pub type EmbeddingTable = BTreeMap<(u32, u32), FeatureVec>;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Non-empty, non-comment lines with their 1-based line numbers, split on commas.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split(',').map(str::trim).collect()))
        }
    })
}

fn field<T: std::str::FromStr>(cols: &[&str], idx: usize, line: usize, name: &str) -> Result<T> {
    let raw = cols.get(idx).ok_or_else(|| parse_err(line, format!("missing column {} ({name})", idx + 1)))?;
    raw.parse().map_err(|_| parse_err(line, format!("cannot parse {name} from {raw:?}")))
}

fn frame_field(cols: &[&str], line: usize) -> Result<u32> {
    let frame: u32 = field(cols, 0, line, "frame")?;
    if frame == 0 {
        return Err(parse_err(line, "frame numbers start at 1"));
    }
    Ok(frame)
}

fn box_fields(cols: &[&str], line: usize) -> Result<BoundingBox> {
    let left: f64 = field(cols, 2, line, "left")?;
    let top: f64 = field(cols, 3, line, "top")?;
    let width: f64 = field(cols, 4, line, "width")?;
    let height: f64 = field(cols, 5, line, "height")?;
    BoundingBox::from_ltwh(left, top, width, height).map_err(|e| parse_err(line, e.to_string()))
}

/// Parses a detection file (`frame,id,left,top,width,height,conf,...`). The id
/// column is ignored.
pub fn parse_detections(text: &str) -> Result<DetectionFrames> {
    let mut frames = DetectionFrames::new();
    for (line, cols) in records(text) {
        let frame = frame_field(&cols, line)?;
        let bbox = box_fields(&cols, line)?;
        let confidence: f64 = field(&cols, 6, line, "confidence")?;
        if !confidence.is_finite() {
            return Err(parse_err(line, "non-finite confidence"));
        }
        frames.entry(frame).or_default().push(RawDetection { bbox, confidence });
    }
    Ok(frames)
}

pub fn write_detections(frames: &DetectionFrames) -> String {
    let mut out = String::new();
    for (frame, dets) in frames {
        for d in dets {
            let [l, t, w, h] = d.bbox.to_ltwh();
            writeln!(out, "{frame},-1,{l},{t},{w},{h},{},-1,-1,-1", d.confidence).unwrap();
        }
    }
    out
}

/// Parses a ground-truth file. When present, column 7 is the "consider" flag
/// (0 skips the row), column 8 the class (only class 1, pedestrian, is kept), and
/// column 9 the visibility ratio.
pub fn parse_gt(text: &str) -> Result<Vec<GtEntry>> {
    let mut out = Vec::new();
    for (line, cols) in records(text) {
        let frame = frame_field(&cols, line)?;
        let id: u64 = field(&cols, 1, line, "id")?;
        let bbox = box_fields(&cols, line)?;
        if cols.len() > 6 {
            let flag: f64 = field(&cols, 6, line, "consider flag")?;
            if flag == 0.0 {
                continue;
            }
        }
        if cols.len() > 7 {
            let class: i64 = field(&cols, 7, line, "class")?;
            if class != 1 {
                continue;
            }
        }
        let visibility = if cols.len() > 8 { field(&cols, 8, line, "visibility")? } else { 1.0 };
        out.push(GtEntry { frame, id, bbox, visibility });
    }
    out.sort_by_key(|g| (g.frame, g.id));
    Ok(out)
}

pub fn write_gt(entries: &[GtEntry]) -> String {
    let mut out = String::new();
    for g in entries {
        let [l, t, w, h] = g.bbox.to_ltwh();
        writeln!(out, "{},{},{l},{t},{w},{h},1,1,{}", g.frame, g.id, g.visibility).unwrap();
    }
    out
}

/// Parses a tracker result file.
pub fn parse_tracks(text: &str) -> Result<TrackOutput> {
    let mut out = TrackOutput::default();
    for (line, cols) in records(text) {
        let frame = frame_field(&cols, line)?;
        let id: u64 = field(&cols, 1, line, "id")?;
        let bbox = box_fields(&cols, line)?;
        out.records.push(TrackRecord { frame, id: TrackId(id), bbox });
    }
    out.sort();
    Ok(out)
}

/// Rows `frame,id,left,top,width,height,1,-1,-1,-1` sorted by `(frame, id)`.
pub fn write_tracks(output: &TrackOutput) -> String {
    let mut records: Vec<&TrackRecord> = output.records.iter().collect();
    records.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in records {
        let [l, t, w, h] = r.bbox.to_ltwh();
        writeln!(out, "{},{},{l},{t},{w},{h},1,-1,-1,-1", r.frame, r.id).unwrap();
    }
    out
}

/// Ground truth as a track output, for metrics that take two outputs.
pub fn gt_as_tracks(gt: &[GtEntry]) -> TrackOutput {
    let mut out = TrackOutput {
        records: gt.iter().map(|g| TrackRecord { frame: g.frame, id: TrackId(g.id), bbox: g.bbox }).collect(),
    };
    out.sort();
    out
}

pub fn parse_seqinfo(text: &str) -> Result<SequenceMeta> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('[') || line.starts_with(';') || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(i + 1, format!("expected key=value, got {line:?}")))?;
        kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    fn get<T: std::str::FromStr>(kv: &BTreeMap<String, (usize, String)>, key: &str) -> Result<T> {
        let (line, raw) = kv.get(key).ok_or_else(|| parse_err(0, format!("seqinfo is missing {key}")))?;
        raw.parse().map_err(|_| parse_err(*line, format!("cannot parse {key} from {raw:?}")))
    }
    let meta = SequenceMeta {
        name: kv.get("name").map(|(_, v)| v.clone()).unwrap_or_default(),
        frame_count: get(&kv, "seqLength")?,
        fps: get(&kv, "frameRate")?,
        image_width: get(&kv, "imWidth")?,
        image_height: get(&kv, "imHeight")?,
    };
    meta.validate()?;
    Ok(meta)
}

pub fn write_seqinfo(meta: &SequenceMeta) -> String {
    format!(
        "[Sequence]\nname={}\nframeRate={}\nseqLength={}\nimWidth={}\nimHeight={}\n",
        meta.name, meta.fps, meta.frame_count, meta.image_width, meta.image_height
    )
}

/// Serializes embeddings in key order. Values are stored as `f32`.
pub fn write_embeddings(table: &EmbeddingTable, dim: usize) -> Result<Vec<u8>> {
    let dim16 =
        u16::try_from(dim).map_err(|_| Error::Embedding(format!("dimension {dim} does not fit in u16")))?;
    let count = u32::try_from(table.len()).map_err(|_| Error::Embedding("too many records".into()))?;
    let mut buf = Vec::with_capacity(SSEB_HEADER_LEN + table.len() * (8 + 4 * dim));
    buf.extend_from_slice(SSEB_MAGIC);
    buf.extend_from_slice(&SSEB_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim16.to_le_bytes());
    buf.extend_from_slice(&count.to_le_bytes());
    for (&(frame, index), feature) in table {
        if feature.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: feature.dim() });
        }
        buf.extend_from_slice(&frame.to_le_bytes());
        buf.extend_from_slice(&index.to_le_bytes());
        for &v in feature.as_slice() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(buf)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self.buf.get(self.pos..end).ok_or_else(|| {
            Error::Embedding(format!("truncated at byte {} while reading {what}", self.pos))
        })?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        self.take::<2>(what).map(u16::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        self.take::<4>(what).map(f32::from_le_bytes)
    }
}

/// Reads an `SSEB` stream, checking the stored dimension against `expected_dim`.
pub fn read_embeddings(mut reader: impl Read, expected_dim: usize) -> Result<EmbeddingTable> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    decode_embeddings(&buf, expected_dim)
}

pub fn decode_embeddings(buf: &[u8], expected_dim: usize) -> Result<EmbeddingTable> {
    let mut cur = Cursor { buf, pos: 0 };
    let magic = cur.take::<4>("magic")?;
    if &magic != SSEB_MAGIC {
        return Err(Error::Embedding(format!("bad magic {magic:?}")));
    }
    let version = cur.u16("version")?;
    if version != SSEB_VERSION {
        return Err(Error::Embedding(format!("unsupported version {version}")));
    }
    let dim = cur.u16("dimension")? as usize;
    if dim != expected_dim {
        return Err(Error::DimensionMismatch { expected: expected_dim, found: dim });
    }
    let count = cur.u32("record count")?;
    let mut table = EmbeddingTable::new();
    for rec in 0..count {
        let frame = cur.u32("frame")?;
        let index = cur.u32("detection index")?;
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            values.push(cur.f32("feature value")? as f64);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Embedding(format!("record {rec}: non-finite value")));
        }
        let deviation = (l2_norm(&values) - 1.0).abs();
        let feature = if deviation <= NORM_EXACT_TOL {
            FeatureVec::from_unit(values)
        } else if deviation < NORM_CORRUPT_TOL {
            FeatureVec::normalize(values)?
        } else {
            return Err(Error::Embedding(format!(
                "record {rec} (frame {frame}, index {index}): norm deviates from 1 by {deviation:e}"
            )));
        };
        if table.insert((frame, index), feature).is_some() {
            return Err(Error::Embedding(format!("duplicate record for frame {frame}, index {index}")));
        }
    }
    if cur.pos != buf.len() {
        return Err(Error::Embedding(format!(
            "{} trailing bytes after {count} records",
            buf.len() - cur.pos
        )));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_detection_row() {
        let frames = parse_detections("1,-1,10,20,30,60,0.9,-1,-1,-1\n").unwrap();
        let d = frames[&1][0];
        assert_eq!(d.bbox, BoundingBox::new(20., 10., 80., 40.).unwrap());
        assert_eq!(d.confidence, 0.9);
        assert!(parse_detections("").unwrap().is_empty());
    }

    #[test]
    fn negative_width_reports_line() {
        let err = parse_detections("1,-1,10,20,-5,60,0.9").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_detections("1,-1,1,1,1,1,0.5\n\n2,-1,x,1,1,1,0.5").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse_detections("1,-1,1,1,1,1").is_err());
    }

    #[test]
    fn within_frame_order_is_kept() {
        let text = "2,-1,5,0,1,1,0.5\n1,-1,9,0,1,1,0.5\n2,-1,1,0,1,1,0.5\n";
        let frames = parse_detections(text).unwrap();
        assert_eq!(frames.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
        let lefts: Vec<f64> = frames[&2].iter().map(|d| d.bbox.left).collect();
        assert_eq!(lefts, vec![5.0, 1.0]);
    }

    #[test]
    fn write_single_track() {
        let out = TrackOutput {
            records: vec![TrackRecord {
                frame: 1,
                id: TrackId(3),
                bbox: BoundingBox::new(20., 10., 80., 40.).unwrap(),
            }],
        };
        assert_eq!(write_tracks(&out), "1,3,10,20,30,60,1,-1,-1,-1\n");
        assert_eq!(write_tracks(&TrackOutput::default()), "");
        assert_eq!(parse_tracks(&write_tracks(&out)).unwrap(), out);
    }

    #[test]
    fn gt_filtering() {
        let text = "1,1,0,0,10,10,1,1,0.8\n1,2,0,0,10,10,0,1,1\n1,3,0,0,10,10,1,7,1\n2,4,0,0,5,5\n";
        let gt = parse_gt(text).unwrap();
        let ids: Vec<u64> = gt.iter().map(|g| g.id).collect();
        assert_eq!(ids, vec![1, 4]);
        assert_eq!(gt[0].visibility, 0.8);
        assert_eq!(gt[1].visibility, 1.0);
    }

    #[test]
    fn seqinfo_round_trip() {
        let meta = SequenceMeta {
            name: "sim-7".into(),
            frame_count: 500,
            fps: 30.0,
            image_width: 1920,
            image_height: 1080,
        };
        assert_eq!(parse_seqinfo(&write_seqinfo(&meta)).unwrap(), meta);
        assert!(parse_seqinfo("[Sequence]\nseqLength=0\nframeRate=30\nimWidth=1\nimHeight=1\n").is_err());
    }

    fn table_with(dim: usize, entries: &[((u32, u32), Vec<f64>)]) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(SSEB_MAGIC);
        buf.extend_from_slice(&SSEB_VERSION.to_le_bytes());
        buf.extend_from_slice(&(dim as u16).to_le_bytes());
        buf.extend_from_slice(&(entries.len() as u32).to_le_bytes());
        for ((f, i), v) in entries {
            buf.extend_from_slice(&f.to_le_bytes());
            buf.extend_from_slice(&i.to_le_bytes());
            for x in v {
                buf.extend_from_slice(&(*x as f32).to_le_bytes());
            }
        }
        buf
    }

    #[test]
    fn sseb_basic_cases() {
        let empty = write_embeddings(&EmbeddingTable::new(), 4).unwrap();
        assert_eq!(empty.len(), 12);
        assert!(read_embeddings(&empty[..], 4).unwrap().is_empty());

        let one = table_with(4, &[((1, 0), vec![1.0, 0.0, 0.0, 0.0])]);
        let t = read_embeddings(&one[..], 4).unwrap();
        assert_eq!(t[&(1, 0)], FeatureVec::basis(4, 0));
    }

    #[test]
    fn sseb_errors() {
        let good = table_with(2, &[((1, 0), vec![1.0, 0.0])]);
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode_embeddings(&bad_magic, 2), Err(Error::Embedding(_))));
        let mut bad_version = good.clone();
        bad_version[4] = 9;
        assert!(matches!(decode_embeddings(&bad_version, 2), Err(Error::Embedding(_))));
        assert!(matches!(
            decode_embeddings(&good, 3),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        let dup = table_with(2, &[((1, 0), vec![1.0, 0.0]), ((1, 0), vec![0.0, 1.0])]);
        assert!(matches!(decode_embeddings(&dup, 2), Err(Error::Embedding(_))));
        let corrupt = table_with(2, &[((1, 0), vec![1.01, 0.0])]);
        assert!(matches!(decode_embeddings(&corrupt, 2), Err(Error::Embedding(_))));
        assert!(decode_embeddings(&good[..good.len() - 1], 2).is_err());
    }

    #[test]
    fn sseb_small_deviation_is_renormalized() {
        let slightly_off = table_with(2, &[((1, 0), vec![1.0001, 0.0])]);
        let t = decode_embeddings(&slightly_off, 2).unwrap();
        assert_eq!(t[&(1, 0)].as_slice(), &[1.0, 0.0]);
    }
}
