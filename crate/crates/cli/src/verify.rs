//! Re-checks a finished run from its files alone.
//!
//! Every artifact is re-parsed; boxes must lie inside their images, every
//! recorded paste must respect the overlap threshold against the boxes that
//! were protected when it was accepted, label maps must equal a brute-force
//! tile-intersection rebuild from the paste records, and every file must match
//! its manifest hash. Problems are collected, not thrown.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use ocdc_core::geometry::overlap_fraction;
use ocdc_core::{BBox, Domain, ImageSize};
use serde::Serialize;

use crate::annotations::AnnotationFile;
use crate::artifacts::{entry_rect, sha256_hex, side_files, DirectionTag, Manifest, PasteSidecar, MANIFEST};
use crate::config::{ConfigEcho, Mode};
use crate::imageio::{decode_image_bytes, decode_label_map};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub file: String,
    pub check: &'static str,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.file, self.check, self.message)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub iterations: usize,
    pub files_checked: usize,
    pub records_checked: usize,
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    fn fail(&mut self, file: impl Into<String>, check: &'static str, message: impl Into<String>) {
        self.findings.push(Finding {
            file: file.into(),
            check,
            message: message.into(),
        });
    }
}

pub fn run_verify(run_dir: &Path) -> VerifyReport {
    let mut report = VerifyReport::default();
    let manifest: Manifest = match fs::read(run_dir.join(MANIFEST))
        .map_err(|e| e.to_string())
        .and_then(|b| serde_json::from_slice(&b).map_err(|e| e.to_string()))
    {
        Ok(m) => m,
        Err(e) => {
            report.fail(MANIFEST, "manifest", format!("unreadable manifest: {e}"));
            return report;
        }
    };
    check_hashes(run_dir, &manifest, &mut report);
    report.iterations = manifest.iterations.len();
    for entry in &manifest.iterations {
        let dir = run_dir.join(&entry.dir);
        for (domain, image_id, counterpart) in [
            (Domain::Source, &entry.source_image, &entry.target_image),
            (Domain::Target, &entry.target_image, &entry.source_image),
        ] {
            let ctx = SideContext {
                dir: &dir,
                dir_name: &entry.dir,
                domain,
                image_id,
                counterpart,
                config: &manifest.config,
                classes: &manifest.classes,
            };
            check_side(&ctx, &mut report);
        }
    }
    report
}

fn check_hashes(run_dir: &Path, manifest: &Manifest, report: &mut VerifyReport) {
    for (rel, expected) in &manifest.files {
        match fs::read(run_dir.join(rel)) {
            Ok(bytes) => {
                report.files_checked += 1;
                let actual = sha256_hex(&bytes);
                if actual != *expected {
                    report.fail(
                        rel,
                        "hash",
                        format!("sha256 {actual} does not match manifest {expected}"),
                    );
                }
            }
            Err(e) => report.fail(rel, "hash", format!("missing: {e}")),
        }
    }
    let mut on_disk = BTreeSet::new();
    collect_files(run_dir, run_dir, &mut on_disk);
    for rel in on_disk {
        if rel != MANIFEST && !manifest.files.contains_key(&rel) {
            report.fail(rel, "hash", "file is not listed in the manifest");
        }
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeSet<String>) {
    let Ok(entries) = fs::read_dir(dir) else { return };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.is_dir() {
            collect_files(root, &path, out);
        } else if let Ok(rel) = path.strip_prefix(root) {
            out.insert(rel.to_string_lossy().replace('\\', "/"));
        }
    }
}

struct SideContext<'a> {
    dir: &'a Path,
    dir_name: &'a str,
    domain: Domain,
    image_id: &'a str,
    counterpart: &'a str,
    config: &'a ConfigEcho,
    classes: &'a [String],
}

impl SideContext<'_> {
    fn rel(&self, name: &str) -> String {
        format!("{}/{}", self.dir_name, name)
    }

    fn read(&self, name: &str, report: &mut VerifyReport) -> Option<Vec<u8>> {
        match fs::read(self.dir.join(name)) {
            Ok(b) => Some(b),
            Err(e) => {
                report.fail(self.rel(name), "read", e.to_string());
                None
            }
        }
    }
}

fn check_side(ctx: &SideContext<'_>, report: &mut VerifyReport) {
    let names = side_files(ctx.domain);

    // Annotations and image bounds.
    let Some(ann_bytes) = ctx.read(&names.annotations, report) else {
        return;
    };
    let ann_rel = ctx.rel(&names.annotations);
    let ann: AnnotationFile = match serde_json::from_slice(&ann_bytes) {
        Ok(a) => a,
        Err(e) => return report.fail(ann_rel, "annotations", format!("malformed: {e}")),
    };
    if ann.images.len() != 1 {
        return report.fail(
            ann_rel,
            "annotations",
            format!("expected 1 image, found {}", ann.images.len()),
        );
    }
    let rec = &ann.images[0];
    if rec.id != ctx.image_id || Domain::from(rec.domain) != ctx.domain || ann.classes != ctx.classes {
        report.fail(
            &ann_rel,
            "annotations",
            "image id, domain or class list disagrees with the manifest",
        );
    }
    let boxes = match ann.boxes_of(0) {
        Ok(b) => b,
        Err(e) => return report.fail(ann_rel, "bounds", e),
    };
    let Ok(size) = ImageSize::new(rec.width, rec.height) else {
        return report.fail(ann_rel, "bounds", "zero image size");
    };
    if let Some(png) = ctx.read(&names.image, report) {
        match decode_image_bytes(&png) {
            Ok(px) if px.size() == size => {}
            Ok(px) => report.fail(
                ctx.rel(&names.image),
                "bounds",
                format!(
                    "image is {}x{}, annotations say {}x{}",
                    px.width(),
                    px.height(),
                    size.width,
                    size.height
                ),
            ),
            Err(e) => report.fail(ctx.rel(&names.image), "image", e),
        }
    }

    // Paste records against the merged annotations.
    let Some(side_bytes) = ctx.read(&names.pastes, report) else {
        return;
    };
    let pastes_rel = ctx.rel(&names.pastes);
    let sidecar: PasteSidecar = match serde_json::from_slice(&side_bytes) {
        Ok(s) => s,
        Err(e) => return report.fail(pastes_rel, "records", format!("malformed: {e}")),
    };
    let expected_direction = match ctx.domain {
        Domain::Source => DirectionTag::TargetIntoSource,
        Domain::Target => DirectionTag::SourceIntoTarget,
    };
    if sidecar.direction != expected_direction || sidecar.destination_image != ctx.image_id {
        report.fail(
            &pastes_rel,
            "records",
            "direction or destination image disagrees with the manifest",
        );
    }
    let k = sidecar.records.len();
    if k > boxes.len() {
        return report.fail(
            pastes_rel,
            "records",
            format!("{k} records but only {} boxes", boxes.len()),
        );
    }
    let original = boxes.len() - k;
    let mut protected: Vec<BBox> = boxes[..original].to_vec();
    let mut rects = Vec::with_capacity(k);
    for (i, entry) in sidecar.records.iter().enumerate() {
        report.records_checked += 1;
        let Some(rect) = entry_rect(&entry.dst_rect) else {
            report.fail(&pastes_rel, "records", format!("record {i}: invalid dst_rect"));
            continue;
        };
        if !rect.fits_in(size) {
            report.fail(&pastes_rel, "bounds", format!("record {i}: dst_rect outside the image"));
            continue;
        }
        if entry.dst_rect != ann.images[0].boxes[original + i] {
            report.fail(
                &pastes_rel,
                "records",
                format!("record {i}: dst_rect is not annotation box {}", original + i),
            );
        }
        if entry.src_image_id != ctx.counterpart {
            report.fail(
                &pastes_rel,
                "records",
                format!(
                    "record {i}: source image {} is not the paired image",
                    entry.src_image_id
                ),
            );
        }
        check_scale(ctx.config, i, entry, &rect, &pastes_rel, report);

        let worst = protected
            .iter()
            .map(|p| overlap_fraction(&rect, p))
            .filter(|&(_, area)| area > 0)
            .map(|(inter, area)| inter as f64 / area as f64)
            .fold(0.0, f64::max);
        if worst > ctx.config.gamma {
            report.fail(
                &pastes_rel,
                "overlap",
                format!("record {i}: overlap {worst} exceeds gamma {}", ctx.config.gamma),
            );
        }
        if entry.overlap_ratio > ctx.config.gamma || (entry.overlap_ratio - worst).abs() > 1e-12 {
            report.fail(
                &pastes_rel,
                "overlap",
                format!(
                    "record {i}: recorded overlap {} but recomputed {worst}",
                    entry.overlap_ratio
                ),
            );
        }
        protected.push(rect);
        rects.push(rect);
    }

    // Label map against the tile oracle.
    let Some(pgm) = ctx.read(&names.labels, report) else {
        return;
    };
    let labels_rel = ctx.rel(&names.labels);
    let map = match decode_label_map(&pgm, ctx.domain, size, ctx.config.stride) {
        Ok(m) => m,
        Err(e) => return report.fail(labels_rel, "labels", e),
    };
    let s = ctx.config.stride;
    let mut bad = Vec::new();
    for row in 0..map.rows() {
        for col in 0..map.cols() {
            let (tx, ty) = (col as u32 * s, row as u32 * s);
            let tile = BBox {
                x: tx,
                y: ty,
                w: s,
                h: s,
                class_id: 0,
            };
            let hit = rects.iter().any(|r| overlap_fraction(r, &tile).0 > 0);
            let expected = if hit { ctx.domain.opposite() } else { ctx.domain };
            if map.get(row, col) != expected {
                bad.push(format!("(row {row}, col {col}) expected {}", expected.label()));
            }
        }
    }
    if !bad.is_empty() {
        let shown: Vec<_> = bad.iter().take(5).cloned().collect();
        report.fail(
            labels_rel,
            "labels",
            format!(
                "{} cell(s) disagree with the paste records: {}",
                bad.len(),
                shown.join(", ")
            ),
        );
    }
}

fn check_scale(
    config: &ConfigEcho,
    i: usize,
    entry: &crate::artifacts::RecordEntry,
    rect: &BBox,
    file: &str,
    report: &mut VerifyReport,
) {
    let s = entry.scale_factor;
    let in_range = match config.scaling {
        Mode::Fixed => s == 1.0,
        Mode::Random => s >= config.scale_min && s <= config.scale_max,
    };
    if !in_range {
        report.fail(
            file,
            "records",
            format!("record {i}: scale factor {s} outside the configured range"),
        );
    }
    let src = &entry.src_box;
    if src.w <= i64::from(config.min_box_side) || src.h <= i64::from(config.min_box_side) {
        report.fail(
            file,
            "records",
            format!("record {i}: source box is below the size gate"),
        );
    }
    let expect = |side: i64| ((side as f64 * s).round() as i64).max(1);
    if i64::from(rect.w) != expect(src.w) || i64::from(rect.h) != expect(src.h) {
        report.fail(
            file,
            "records",
            format!("record {i}: dst_rect size does not match source box times scale"),
        );
    }
}
