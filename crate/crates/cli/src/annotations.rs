//! The annotation file format.
//!
//! ```json
//! {"images": [{"id": "0001", "file": "0001.png", "width": 640, "height": 512,
//!              "domain": "target",
//!              "boxes": [{"x": 10, "y": 10, "w": 50, "h": 80, "class": "person"}]}],
//!  "classes": ["person", "bicycle", "car"]}
//! ```
//!
//! One file per dataset, and one per augmented output image. `file` is relative
//! to the images directory (or to the annotation file for outputs).

use std::fs;
use std::path::Path;

use ocdc_core::{AnnotatedImage, BBox, Dataset, Domain};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::decode_image;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationFile {
    pub images: Vec<ImageRecord>,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Source,
    Target,
}

impl From<Domain> for DomainTag {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Source => DomainTag::Source,
            Domain::Target => DomainTag::Target,
        }
    }
}

impl From<DomainTag> for Domain {
    fn from(d: DomainTag) -> Self {
        match d {
            DomainTag::Source => Domain::Source,
            DomainTag::Target => Domain::Target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: String,
    pub file: String,
    pub width: u32,
    pub height: u32,
    pub domain: DomainTag,
    pub boxes: Vec<BoxRecord>,
}

/// Signed so that negative coordinates parse and can be reported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRecord {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub class: String,
}

impl BoxRecord {
    pub fn from_bbox(b: &BBox, classes: &[String]) -> Self {
        BoxRecord {
            x: b.x.into(),
            y: b.y.into(),
            w: b.w.into(),
            h: b.h.into(),
            class: classes[usize::from(b.class_id)].clone(),
        }
    }

    /// Converts to a box inside a `width × height` image, or explains why not.
    pub fn to_bbox(&self, classes: &[String], width: u32, height: u32) -> std::result::Result<BBox, String> {
        let class_id = classes
            .iter()
            .position(|c| *c == self.class)
            .ok_or_else(|| format!("unknown class name {:?}", self.class))?;
        if self.w <= 0 || self.h <= 0 {
            return Err(format!("box has non-positive size {}x{}", self.w, self.h));
        }
        if self.x < 0 || self.y < 0 || self.x + self.w > i64::from(width) || self.y + self.h > i64::from(height) {
            return Err(format!(
                "box exceeds image bounds: ({}, {}, {}, {}) in {}x{}",
                self.x, self.y, self.w, self.h, width, height
            ));
        }
        Ok(BBox {
            x: self.x as u32,
            y: self.y as u32,
            w: self.w as u32,
            h: self.h as u32,
            class_id: class_id as u16,
        })
    }
}

impl AnnotationFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::annotation(path, format!("malformed annotations: {e}")))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("annotation records serialize");
        out.push(b'\n');
        out
    }

    /// Annotation file describing one image.
    pub fn single(item: &AnnotatedImage, file: &str, classes: &[String]) -> Self {
        AnnotationFile {
            images: vec![ImageRecord {
                id: item.image_id().into(),
                file: file.into(),
                width: item.size().width,
                height: item.size().height,
                domain: item.domain().into(),
                boxes: item.boxes().iter().map(|b| BoxRecord::from_bbox(b, classes)).collect(),
            }],
            classes: classes.to_vec(),
        }
    }

    /// Boxes of image `index`, validated.
    pub fn boxes_of(&self, index: usize) -> std::result::Result<Vec<BBox>, String> {
        let rec = &self.images[index];
        rec.boxes
            .iter()
            .enumerate()
            .map(|(i, b)| {
                b.to_bbox(&self.classes, rec.width, rec.height)
                    .map_err(|e| format!("box {i}: {e}"))
            })
            .collect()
    }
}

/// Loads and validates a dataset. Every box is checked against its image's
/// declared and decoded dimensions; errors name the image and box index.
pub fn load_annotations(images_dir: &Path, annotations_file: &Path, domain: Domain) -> Result<Dataset> {
    let file = AnnotationFile::read(annotations_file)?;
    let bad = |msg: String| Error::annotation(annotations_file, msg);
    for (index, rec) in file.images.iter().enumerate() {
        if Domain::from(rec.domain) != domain {
            return Err(bad(format!(
                "image {}: domain {:?} but the dataset is {}",
                rec.id,
                rec.domain,
                domain.as_str()
            )));
        }
        if rec.width == 0 || rec.height == 0 {
            return Err(bad(format!("image {}: zero dimensions", rec.id)));
        }
        file.boxes_of(index)
            .map_err(|e| bad(format!("image {}: {e}", rec.id)))?;
    }
    let items = file
        .images
        .par_iter()
        .enumerate()
        .map(|(index, rec)| {
            let path = images_dir.join(&rec.file);
            let pixels = decode_image(&path)?;
            if (pixels.width(), pixels.height()) != (rec.width, rec.height) {
                return Err(Error::Image {
                    path,
                    message: format!(
                        "image {} is {}x{} but annotated as {}x{}",
                        rec.id,
                        pixels.width(),
                        pixels.height(),
                        rec.width,
                        rec.height
                    ),
                });
            }
            let boxes = file.boxes_of(index).expect("validated above");
            Ok(AnnotatedImage::new(rec.id.clone(), pixels, boxes, domain)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(domain, file.classes.clone(), items).map_err(|e| bad(e.to_string()))
}
