//! Axis-aligned bounding boxes and the box distance used in the association cost.
//!
//! Boxes are stored as `(top, left, bottom, right)` in absolute pixels. MOTChallenge
//! files use `(left, top, width, height)`; convert with [`BoundingBox::from_ltwh`].

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub top: f64,
    pub left: f64,
    pub bottom: f64,
    pub right: f64,
}

/// Which norm is applied to the 4-coordinate difference in [`bbox_distance_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxNorm {
    #[default]
    L2,
    L1,
}

impl BoundingBox {
    /// Builds a box, rejecting non-finite coordinates and inverted extents.
    pub fn new(top: f64, left: f64, bottom: f64, right: f64) -> Result<Self> {
        let b = BoundingBox { top, left, bottom, right };
        if !b.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite coordinate in {b:?}")));
        }
        if bottom < top || right < left {
            return Err(Error::InvalidBox(format!("inverted extent in {b:?}")));
        }
        Ok(b)
    }

    pub fn from_ltwh(left: f64, top: f64, width: f64, height: f64) -> Result<Self> {
        if width < 0.0 || height < 0.0 {
            return Err(Error::InvalidBox(format!("negative width/height ({width}, {height})")));
        }
        Self::new(top, left, top + height, left + width)
    }

    /// `(left, top, width, height)`, the MOTChallenge column order.
    pub fn to_ltwh(&self) -> [f64; 4] {
        [self.left, self.top, self.width(), self.height()]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.top, self.left, self.bottom, self.right]
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.left + self.right) / 2.0, (self.top + self.bottom) / 2.0)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        BoundingBox {
            top: self.top + dy,
            left: self.left + dx,
            bottom: self.bottom + dy,
            right: self.right + dx,
        }
    }
}

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.right.min(b.right) - a.left.max(b.left)).max(0.0);
    let ih = (a.bottom.min(b.bottom) - a.top.max(b.top)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn perimeter(b: &BoundingBox) -> f64 {
    2.0 * (b.width() + b.height())
}

/// Coordinate distance between a track box and a detection box, normalized by
/// `alpha` times the perimeter of the track box. Not symmetric: the track box
/// always supplies the normalizer.
pub fn bbox_distance(track_box: &BoundingBox, det_box: &BoundingBox, alpha: f64) -> Result<f64> {
    bbox_distance_with(track_box, det_box, alpha, BoxNorm::L2)
}

pub fn bbox_distance_with(
    track_box: &BoundingBox,
    det_box: &BoundingBox,
    alpha: f64,
    norm: BoxNorm,
) -> Result<f64> {
    let p = perimeter(track_box);
    if p <= 0.0 {
        return Err(Error::DegenerateTrackBox);
    }
    let t = track_box.as_array();
    let d = det_box.as_array();
    let diff = t.iter().zip(d.iter()).map(|(x, y)| x - y);
    let n = match norm {
        BoxNorm::L2 => diff.map(|v| v * v).sum::<f64>().sqrt(),
        BoxNorm::L1 => diff.map(f64::abs).sum::<f64>(),
    };
    Ok(n / (alpha * p))
}
