//! Datasets, the training-resolution resize rule, target-fraction subsampling
//! and source/target batch pairing.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::annotated::{AnnotatedImage, Domain};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize};
use crate::seed::{stream_rng, Stream};

/// Training images are scaled to this height...
pub const TRAINING_HEIGHT: u32 = 600;
/// ...unless that would make them wider than this, in which case the width is pinned instead.
pub const TRAINING_MAX_WIDTH: u32 = 1000;

/// An ordered set of annotated images from one domain. Items are kept sorted by
/// `image_id` so that seeded selections are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    domain: Domain,
    class_names: Vec<String>,
    items: Vec<AnnotatedImage>,
}

impl Dataset {
    pub fn new(domain: Domain, class_names: Vec<String>, mut items: Vec<AnnotatedImage>) -> Result<Self> {
        items.sort_by(|a, b| a.image_id().cmp(b.image_id()));
        for pair in items.windows(2) {
            if pair[0].image_id() == pair[1].image_id() {
                return Err(Error::DuplicateImageId(pair[0].image_id().into()));
            }
        }
        for item in &items {
            if item.domain() != domain {
                return Err(Error::DomainMismatch(format!(
                    "image {} is {} but the dataset is {}",
                    item.image_id(),
                    item.domain().as_str(),
                    domain.as_str()
                )));
            }
            if let Some((index, b)) = item
                .boxes()
                .iter()
                .enumerate()
                .find(|(_, b)| usize::from(b.class_id) >= class_names.len())
            {
                return Err(Error::UnknownClass {
                    image_id: item.image_id().into(),
                    index,
                    class_id: b.class_id,
                });
            }
        }
        Ok(Self {
            domain,
            class_names,
            items,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn items(&self) -> &[AnnotatedImage] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Re-indexes every box's class against `names`, which must contain all of
    /// this dataset's class names.
    pub fn with_class_names(self, names: &[String]) -> Result<Dataset> {
        let mapping = self
            .class_names
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .map(|i| i as u16)
                    .ok_or_else(|| Error::MissingClassName(n.clone()))
            })
            .collect::<Result<Vec<u16>>>()?;
        let items = self
            .items
            .into_iter()
            .map(|item| {
                let (id, pixels, boxes, domain) = item.into_parts();
                let boxes = boxes
                    .into_iter()
                    .map(|b| b.with_class(mapping[usize::from(b.class_id)]))
                    .collect();
                AnnotatedImage::new(id, pixels, boxes, domain)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.domain, names.to_vec(), items)
    }

    pub fn map_items(self, f: impl FnMut(AnnotatedImage) -> AnnotatedImage) -> Dataset {
        Dataset {
            items: self.items.into_iter().map(f).collect(),
            ..self
        }
    }
}

/// `first` followed by the names of `second` not already present.
pub fn merge_class_names(first: &[String], second: &[String]) -> Vec<String> {
    let mut out = first.to_vec();
    for name in second {
        if !out.contains(name) {
            out.push(name.clone());
        }
    }
    out
}

// Round-half-away-from-zero of num / den for non-negative integers.
fn round_div(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// Output size and exact scale factor `(numerator, denominator)` of the
/// training resize for an input of `size`.
pub fn training_scale(size: ImageSize) -> (ImageSize, u64, u64) {
    let (w, h) = (u64::from(size.width), u64::from(size.height));
    let (num, den) = if w * u64::from(TRAINING_HEIGHT) > u64::from(TRAINING_MAX_WIDTH) * h {
        (u64::from(TRAINING_MAX_WIDTH), w)
    } else {
        (u64::from(TRAINING_HEIGHT), h)
    };
    let out = ImageSize {
        width: round_div(w * num, den).max(1) as u32,
        height: round_div(h * num, den).max(1) as u32,
    };
    (out, num, den)
}

fn scale_span(start: u32, len: u32, limit: u32, num: u64, den: u64) -> (u32, u32) {
    let lo = round_div(u64::from(start) * num, den).min(u64::from(limit)) as u32;
    let hi = round_div((u64::from(start) + u64::from(len)) * num, den).min(u64::from(limit)) as u32;
    if hi > lo {
        (lo, hi - lo)
    } else {
        (lo.min(limit - 1), 1)
    }
}

/// Scales a box's corners by `num / den` with rounding, keeping it inside `out`
/// and at least one pixel on each side.
pub fn scale_box(b: &BBox, num: u64, den: u64, out: ImageSize) -> BBox {
    let (x, w) = scale_span(b.x, b.w, out.width, num, den);
    let (y, h) = scale_span(b.y, b.h, out.height, num, den);
    BBox {
        x,
        y,
        w,
        h,
        class_id: b.class_id,
    }
}

/// Resizes to the training resolution: height 600, or width 1000 when the
/// height rule would exceed it. Aspect ratio is preserved and boxes follow.
pub fn resize_to_training(item: &AnnotatedImage) -> AnnotatedImage {
    let (out, num, den) = training_scale(item.size());
    if out == item.size() {
        return item.clone();
    }
    let pixels = item
        .pixels()
        .resize_bilinear(out.width, out.height)
        .expect("training size is non-zero");
    let boxes = item.boxes().iter().map(|b| scale_box(b, num, den, out)).collect();
    AnnotatedImage::new(item.image_id(), pixels, boxes, item.domain()).expect("scaled boxes fit by construction")
}

/// A fraction of a dataset, `num / den` with `0 < num <= den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub const FULL: Fraction = Fraction { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidFraction { num, den });
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_full(&self) -> bool {
        self.num == self.den
    }

    /// One of Full, 1/2, 1/4, ..., 1/64: the splits used for few-shot targets.
    pub fn is_standard_split(&self) -> bool {
        self.is_full() || (self.num == 1 && self.den.is_power_of_two() && self.den <= 64)
    }

    pub fn apply(&self, n: usize) -> usize {
        (n as u128 * u128::from(self.num) / u128::from(self.den)) as usize
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            write!(f, "1")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Seeded shuffle of the stable ordering, then prefix-take of
/// `floor(len * fraction)` items. Different fractions are independent draws;
/// a smaller split is not guaranteed to be a subset of a larger one.
pub fn subsample(dataset: &Dataset, fraction: Fraction, seed: u64) -> Result<Dataset> {
    if fraction.is_full() {
        return Ok(dataset.clone());
    }
    let count = fraction.apply(dataset.len());
    if count == 0 {
        return Err(Error::FractionTooSmall {
            len: dataset.len(),
            num: fraction.num,
            den: fraction.den,
        });
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let draw = (fraction.num << 32) | fraction.den;
    order.shuffle(&mut stream_rng(seed, draw, Stream::Subsample));
    let items = order[..count].iter().map(|&i| dataset.items[i].clone()).collect();
    Dataset::new(dataset.domain, dataset.class_names.clone(), items)
}

/// One training step: a source image and a target image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSample<'a> {
    pub source_item: &'a AnnotatedImage,
    pub target_item: &'a AnnotatedImage,
    pub iteration_index: u64,
}

// Endless sequence of shuffled passes over 0..len.
struct ShuffledCycle {
    rng: ChaCha8Rng,
    order: Vec<usize>,
    pos: usize,
}

impl ShuffledCycle {
    fn new(len: usize, rng: ChaCha8Rng) -> Self {
        Self {
            rng,
            order: (0..len).collect(),
            pos: len,
        }
    }

    fn next_index(&mut self) -> usize {
        if self.pos == self.order.len() {
            self.order.sort_unstable();
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        self.pos += 1;
        self.order[self.pos - 1]
    }
}

/// Pairs `epoch_length` source/target samples. Each domain is walked in its own
/// seeded, reshuffled-per-pass cycle, so a small target set simply repeats.
pub fn pair_batches<'a>(
    source: &'a Dataset,
    target: &'a Dataset,
    epoch_length: usize,
    seed: u64,
) -> Result<Vec<BatchSample<'a>>> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if source.domain != Domain::Source || target.domain != Domain::Target {
        return Err(Error::DomainMismatch(
            "pairing needs a source and a target dataset".into(),
        ));
    }
    let mut src = ShuffledCycle::new(source.len(), stream_rng(seed, 0, Stream::PairSource));
    let mut tgt = ShuffledCycle::new(target.len(), stream_rng(seed, 0, Stream::PairTarget));
    Ok((0..epoch_length)
        .map(|i| BatchSample {
            source_item: &source.items[src.next_index()],
            target_item: &target.items[tgt.next_index()],
            iteration_index: i as u64,
        })
        .collect())
}
