//! On-disk layout of an augmentation run.
//!
//! ```text
//! out_dir/
//!   manifest.json
//!   iter_000000/
//!     source.png  source.json  source_labels.pgm  source_pastes.json
//!     target.png  target.json  target_labels.pgm  target_pastes.json
//! ```
//!
//! `<side>_pastes.json` lists the pastes whose destination is that side's image.

use std::collections::BTreeMap;

use ocdc_core::{BBox, Direction, Domain, PasteRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotations::BoxRecord;
use crate::config::ConfigEcho;

pub const MANIFEST: &str = "manifest.json";
pub const FORMAT: &str = "ocdc-run/1";

pub fn iteration_dir(index: u64) -> String {
    format!("iter_{index:06}")
}

/// File names within an iteration directory for one side.
pub struct SideFiles {
    pub image: String,
    pub annotations: String,
    pub labels: String,
    pub pastes: String,
}

pub fn side_files(domain: Domain) -> SideFiles {
    let side = domain.as_str();
    SideFiles {
        image: format!("{side}.png"),
        annotations: format!("{side}.json"),
        labels: format!("{side}_labels.pgm"),
        pastes: format!("{side}_pastes.json"),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionTag {
    TargetIntoSource,
    SourceIntoTarget,
}

impl From<Direction> for DirectionTag {
    fn from(d: Direction) -> Self {
        match d {
            Direction::TargetIntoSource => DirectionTag::TargetIntoSource,
            Direction::SourceIntoTarget => DirectionTag::SourceIntoTarget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEntry {
    pub src_image_id: String,
    pub src_box: BoxRecord,
    pub dst_rect: BoxRecord,
    pub scale_factor: f64,
    /// Largest fraction of any protected box hidden by this paste.
    pub overlap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PasteSidecar {
    pub destination_image: String,
    pub direction: DirectionTag,
    pub records: Vec<RecordEntry>,
}

impl PasteSidecar {
    pub fn new(destination_image: &str, destination: Domain, records: &[PasteRecord], classes: &[String]) -> Self {
        PasteSidecar {
            destination_image: destination_image.into(),
            direction: Direction::toward(destination).into(),
            records: records
                .iter()
                .map(|r| RecordEntry {
                    src_image_id: r.src_image_id.clone(),
                    src_box: BoxRecord::from_bbox(&r.src_box, classes),
                    dst_rect: BoxRecord::from_bbox(&r.dst_rect.with_class(r.src_box.class_id), classes),
                    scale_factor: r.scale_factor,
                    overlap_ratio: r.max_overlap,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("sidecar serializes");
        out.push(b'\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationEntry {
    pub index: u64,
    pub dir: String,
    pub source_image: String,
    pub target_image: String,
    pub pastes_into_source: usize,
    pub pastes_into_target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub config: ConfigEcho,
    pub classes: Vec<String>,
    pub source_items: usize,
    pub target_items: usize,
    pub iterations: Vec<IterationEntry>,
    /// Relative path → SHA-256 of every artifact except the manifest itself.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}

/// `dst_rect` of a sidecar entry as a box, if its fields are in range.
pub fn entry_rect(rect: &BoxRecord) -> Option<BBox> {
    let conv = |v: i64| u32::try_from(v).ok();
    let b = BBox {
        x: conv(rect.x)?,
        y: conv(rect.y)?,
        w: conv(rect.w)?,
        h: conv(rect.h)?,
        class_id: 0,
    };
    (b.w > 0 && b.h > 0 && b.x.checked_add(b.w).is_some() && b.y.checked_add(b.h).is_some()).then_some(b)
}
