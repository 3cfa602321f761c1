//! Multimedia features: the 7-component layout aggregate d_p and the
//! 6-component image-type exposure vector v_p, 13 features per participant.
//!
//! Per frame, each of the six layout classes contributes the fraction of the
//! frame covered by the union of its boxes; the seventh component is the mean
//! size of retained image detections. Per participant, frame vectors are
//! averaged over the learning frames L, and image-type pseudo-probabilities
//! are summed over every retained detection in every learning frame, so a
//! page viewed longer weighs in proportionally.

use crate::corpus::{FrameLayout, ImageBox, RegionClass, SessionRecord};
use crate::error::{Error, Result};
use crate::geometry::union_area;

/// Detections with width or height below this many pixels are thumbnails and
/// are ignored by mean_img_size and the image-type vector.
pub const DEFAULT_MIN_IMAGE_SIDE: u32 = 100;

/// Canonical image-type order of `type_probs` and v_p.
pub const IMAGE_TYPE_NAMES: [&str; 6] = [
    "img_infovis",
    "img_infographic",
    "img_indoor",
    "img_map",
    "img_outdoor",
    "img_techdraw",
];

/// Feature-matrix column names of the 13 multimedia features, d_p then v_p.
pub const MM_FEATURE_NAMES: [&str; 13] = [
    "mm_heading",
    "mm_menubar",
    "mm_contentlist",
    "mm_text",
    "mm_image",
    "mm_background",
    "mm_avg_imgsize",
    "img_infovis",
    "img_infographic",
    "img_indoor",
    "img_map",
    "img_outdoor",
    "img_techdraw",
];

/// Knobs for multimedia extraction.
#[derive(Debug, Clone)]
pub struct MmConfig {
    /// URL substrings marking navigation pages.
    pub blacklist: Vec<String>,
    /// Minimum side length for a detection to count as a content image.
    pub min_image_side: u32,
    /// Report mean_img_size in raw pixels instead of a frame-area fraction.
    pub imgsize_in_pixels: bool,
}

impl Default for MmConfig {
    fn default() -> Self {
        Self {
            blacklist: crate::corpus::default_blacklist(),
            min_image_side: DEFAULT_MIN_IMAGE_SIDE,
            imgsize_in_pixels: false,
        }
    }
}

/// Per-frame layout vector: six coverages plus the mean retained-image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutFrameVector {
    pub head: f64,
    pub menu: f64,
    pub conlist: f64,
    pub text: f64,
    pub img: f64,
    pub bg: f64,
    pub mean_img_size: f64,
}

impl LayoutFrameVector {
    pub fn as_array(&self) -> [f64; 7] {
        [self.head, self.menu, self.conlist, self.text, self.img, self.bg, self.mean_img_size]
    }
}

/// Per-participant multimedia features.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimediaFeatures {
    /// Layout aggregate: mean of LayoutFrameVector over learning frames.
    pub d_p: [f64; 7],
    /// Image-type exposure: summed type_probs over retained detections.
    pub v_p: [f64; 6],
}

impl MultimediaFeatures {
    /// The 13 values in MM_FEATURE_NAMES order.
    pub fn as_row(&self) -> [f64; 13] {
        let mut row = [0.0; 13];
        row[..7].copy_from_slice(&self.d_p);
        row[7..].copy_from_slice(&self.v_p);
        row
    }
}

/// Image detections large enough on both sides to count as content images.
pub fn filter_images(frame: &FrameLayout, min_side: u32) -> Vec<&ImageBox> {
    frame
        .images
        .iter()
        .filter(|b| b.w >= min_side && b.h >= min_side)
        .collect()
}

/// One frame's layout vector.
pub fn layout_vector(frame: &FrameLayout, config: &MmConfig) -> LayoutFrameVector {
    let frame_area = frame.frame_area() as f64;
    let coverage_of = |class: RegionClass| -> f64 {
        let rects: Vec<_> = frame
            .regions
            .iter()
            .filter(|r| r.region_class == class)
            .map(|r| r.rect())
            .collect();
        union_area(&rects) as f64 / frame_area
    };

    let has_bg_boxes = frame.regions.iter().any(|r| r.region_class == RegionClass::Background);
    let bg = if has_bg_boxes {
        coverage_of(RegionClass::Background)
    } else {
        // background is whatever the five annotated classes leave uncovered
        let fg: Vec<_> = frame
            .regions
            .iter()
            .filter(|r| r.region_class != RegionClass::Background)
            .map(|r| r.rect())
            .collect();
        (1.0 - union_area(&fg) as f64 / frame_area).max(0.0)
    };

    let retained = filter_images(frame, config.min_image_side);
    let mean_img_size = if retained.is_empty() {
        0.0
    } else {
        let total: f64 = retained.iter().map(|b| b.rect().area() as f64).sum();
        let mean_px = total / retained.len() as f64;
        if config.imgsize_in_pixels {
            mean_px
        } else {
            mean_px / frame_area
        }
    };

    LayoutFrameVector {
        head: coverage_of(RegionClass::Heading),
        menu: coverage_of(RegionClass::MenuBar),
        conlist: coverage_of(RegionClass::ContentList),
        text: coverage_of(RegionClass::Text),
        img: coverage_of(RegionClass::ImageFrame),
        bg,
        mean_img_size,
    }
}

/// Component-wise mean over learning frames.
pub fn aggregate_layout(frames: &[LayoutFrameVector]) -> Result<[f64; 7]> {
    if frames.is_empty() {
        return Err(Error::invalid("no learning frames for participant"));
    }
    let mut sum = [0.0f64; 7];
    for v in frames {
        for (acc, x) in sum.iter_mut().zip(v.as_array()) {
            *acc += x;
        }
    }
    let n = frames.len() as f64;
    Ok(sum.map(|s| s / n))
}

/// Summed type_probs over every retained detection in every frame.
pub fn image_type_vector<'a>(
    frames: impl IntoIterator<Item = &'a FrameLayout>,
    min_side: u32,
) -> [f64; 6] {
    let mut v = [0.0f64; 6];
    for frame in frames {
        for image in filter_images(frame, min_side) {
            for (acc, p) in v.iter_mut().zip(image.type_probs) {
                *acc += p;
            }
        }
    }
    v
}

/// Both multimedia feature blocks for one session.
pub fn multimedia_features(session: &SessionRecord, config: &MmConfig) -> Result<MultimediaFeatures> {
    let learning = session.learning_frames(&config.blacklist);
    if learning.is_empty() {
        return Err(Error::session(
            &session.participant_id,
            "no learning frames for participant",
        ));
    }
    let vectors: Vec<LayoutFrameVector> =
        learning.iter().map(|f| layout_vector(f, config)).collect();
    let d_p = aggregate_layout(&vectors)?;
    let v_p = image_type_vector(learning.iter().copied(), config.min_image_side);
    Ok(MultimediaFeatures { d_p, v_p })
}
