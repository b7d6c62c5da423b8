//! Bounding-box arithmetic, confidence filtering, non-maximum suppression,
//! and fruit counting over detection sets.
//!
//! Coordinates are real-valued pixel positions in a shared image frame.
//! All functions are pure and safe to call from any number of threads.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid box ({x_min}, {y_min}, {x_max}, {y_max}): min corner must not exceed max corner and all coordinates must be finite")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    #[error("confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),
}

/// Axis-aligned rectangle in pixel coordinates with `min <= max` on both axes.
///
/// Zero-area (degenerate) boxes are legal inputs everywhere; their IoU
/// against any box, including themselves, is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let finite =
            x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite();
        if !finite || x_min > x_max || y_min > y_max {
            return Err(GeometryError::InvalidBox {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Builds a box from normalized-center form (`cx`, `cy`, `w`, `h` relative
    /// to the image size), the usual detector label convention.
    pub fn from_center(
        cx: f64,
        cy: f64,
        w: f64,
        h: f64,
        image_w: f64,
        image_h: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(
            (cx - w / 2.0) * image_w,
            (cy - h / 2.0) * image_h,
            (cx + w / 2.0) * image_w,
            (cy + h / 2.0) * image_h,
        )
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Overlap area with `other`; 0 when the boxes are disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let h = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        w * h
    }

    /// Intersection over union. Returns 0 when the union has zero area, so
    /// degenerate boxes never divide by zero at call sites.
    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// Intersection over union of two boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}

/// Detector output record: a box, a class, and a confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    bbox: BBox,
    class_id: u32,
    confidence: f64,
}

impl Detection {
    pub fn new(bbox: BBox, class_id: u32, confidence: f64) -> Result<Self, GeometryError> {
        if !confidence.is_finite() || !(0.0..=1.0).contains(&confidence) {
            return Err(GeometryError::InvalidConfidence(confidence));
        }
        Ok(Self {
            bbox,
            class_id,
            confidence,
        })
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// Annotated ground-truth box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox {
    pub bbox: BBox,
    pub class_id: u32,
}

/// Keeps exactly the detections with `confidence >= threshold`, preserving
/// input order.
pub fn filter_confidence(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter()
        .copied()
        .filter(|d| d.confidence >= threshold)
        .collect()
}

/// Greedy per-class non-maximum suppression.
///
/// Repeatedly keeps the highest-confidence remaining detection and removes
/// every same-class detection whose IoU against it is at least
/// `iou_threshold`. Confidence ties break by input index (lower index wins),
/// so the result is deterministic. Output is sorted by descending confidence.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .confidence
            .total_cmp(&dets[a].confidence)
            .then(a.cmp(&b))
    });

    let mut suppressed = vec![false; dets.len()];
    let mut kept = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(dets[i]);
        for &j in &order[rank + 1..] {
            if suppressed[j] || dets[j].class_id != dets[i].class_id {
                continue;
            }
            if dets[i].bbox.iou(&dets[j].bbox) >= iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    kept
}

/// Counts fruit as the number of boxes surviving confidence filtering
/// followed by NMS.
pub fn count_fruits(dets: &[Detection], conf_threshold: f64, iou_threshold: f64) -> usize {
    nms(&filter_confidence(dets, conf_threshold), iou_threshold).len()
}
