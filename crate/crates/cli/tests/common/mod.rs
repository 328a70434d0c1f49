//! Synthetic datasets and run-directory helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ocdc::annotations::{AnnotationFile, BoxRecord, DomainTag, ImageRecord};
use ocdc::artifacts::sha256_hex;
use ocdc::config::PipelineConfig;
use ocdc::imageio::encode_png;
use ocdc_core::{Domain, PixelBuffer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Synth {
    pub count: usize,
    pub width: u32,
    pub height: u32,
    pub max_boxes: usize,
    pub channels: u8,
    pub seed: u64,
}

impl Synth {
    pub fn new(count: usize, width: u32, height: u32) -> Self {
        Synth {
            count,
            width,
            height,
            max_boxes: 6,
            channels: 3,
            seed: 1,
        }
    }
}

pub const CLASSES: [&str; 3] = ["person", "bicycle", "car"];

/// Writes `root/<side>/img*.png` and `root/<side>.json`; returns both paths.
pub fn write_dataset(root: &Path, domain: Domain, spec: &Synth) -> (PathBuf, PathBuf) {
    let side = domain.as_str();
    let images = root.join(side);
    fs::create_dir_all(&images).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ ((domain.label() as u64) << 32));
    let mut records = Vec::new();
    for i in 0..spec.count {
        let (w, h) = (spec.width, spec.height);
        let base: u8 = rng.gen();
        let data = (0..h)
            .flat_map(|y| {
                (0..w).flat_map(move |x| {
                    (0..spec.channels).map(move |c| base ^ (x as u8).wrapping_mul(3) ^ (y as u8).wrapping_add(c * 40))
                })
            })
            .collect();
        let px = PixelBuffer::new(w, h, spec.channels, data).unwrap();
        let file = format!("img{i:03}.png");
        fs::write(images.join(&file), encode_png(&px)).unwrap();
        let n = rng.gen_range(0..=spec.max_boxes);
        let boxes = (0..n)
            .map(|_| {
                let bw = rng.gen_range(4..=(w / 3).max(5));
                let bh = rng.gen_range(4..=(h / 3).max(5));
                BoxRecord {
                    x: rng.gen_range(0..=w - bw).into(),
                    y: rng.gen_range(0..=h - bh).into(),
                    w: bw.into(),
                    h: bh.into(),
                    class: CLASSES[rng.gen_range(0..CLASSES.len())].into(),
                }
            })
            .collect();
        records.push(ImageRecord {
            id: format!("{side}{i:03}"),
            file,
            width: w,
            height: h,
            domain: DomainTag::from(domain),
            boxes,
        });
    }
    let ann = root.join(format!("{side}.json"));
    let file = AnnotationFile {
        images: records,
        classes: CLASSES.iter().map(|c| c.to_string()).collect(),
    };
    fs::write(&ann, file.to_json()).unwrap();
    (images, ann)
}

/// Source and target datasets under `root`, plus a config writing to `out`.
pub fn setup(root: &Path, source: &Synth, target: &Synth, out: &Path, epoch_length: usize) -> PipelineConfig {
    let (si, sa) = write_dataset(root, Domain::Source, source);
    let (ti, ta) = write_dataset(root, Domain::Target, target);
    PipelineConfig::new(si, sa, ti, ta, out, epoch_length)
}

/// Relative path → SHA-256 for every file under `dir`.
pub fn tree_hashes(dir: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, sha256_hex(&fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
