//! Object-aware cross-domain pasting.
//!
//! Ground-truth crops from one domain are pasted into the paired image of the
//! other domain. A placement is rejected when it hides more than `gamma` of any
//! protected box, where the protected set is the destination's ground truth plus
//! every paste already accepted into that destination. Both directions read the
//! original, pre-paste images.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::annotated::{AnnotatedImage, Domain};
use crate::error::{Error, Result};
use crate::geometry::{clamp_position, overlap_ratio, BBox, ImageSize};
use crate::ingest::BatchSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// Keep the source coordinates (plus optional jitter), shifted into bounds.
    Fixed,
    /// Uniform over every top-left corner that keeps the paste inside.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Fixed,
    /// Uniform in `[scale_min, scale_max]`.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PasteStrategy {
    pub position: Position,
    pub scaling: Scaling,
    pub scale_min: f64,
    pub scale_max: f64,
    /// Largest tolerated fraction of a protected box hidden by a paste.
    pub gamma: f64,
    pub max_attempts: u32,
    /// Boxes with either side at or below this are not pasted.
    pub min_box_side: u32,
    /// Integer shift in `[-r, r]` applied per axis to fixed positions.
    pub jitter_radius: u32,
}

impl Default for PasteStrategy {
    fn default() -> Self {
        Self {
            position: Position::Fixed,
            scaling: Scaling::Fixed,
            scale_min: 0.7,
            scale_max: 1.3,
            gamma: 0.25,
            max_attempts: 50,
            min_box_side: 16,
            jitter_radius: 0,
        }
    }
}

impl PasteStrategy {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidStrategy(msg.into()));
        if !(self.scale_min.is_finite() && self.scale_max.is_finite()) || self.scale_min <= 0.0 {
            return bad("scale bounds must be finite and positive");
        }
        if self.scale_min > self.scale_max {
            return bad("scale_min must not exceed scale_max");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        Ok(())
    }

    // Fixed position, fixed scale and no jitter admit exactly one placement.
    fn single_shot(&self) -> bool {
        self.position == Position::Fixed && self.scaling == Scaling::Fixed && self.jitter_radius == 0
    }

    fn smallest_scale(&self) -> f64 {
        match self.scaling {
            Scaling::Fixed => 1.0,
            Scaling::Random => self.scale_min,
        }
    }

    fn draw_scale<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.scaling {
            Scaling::Fixed => 1.0,
            Scaling::Random => rng
                .gen_range(self.scale_min..=self.scale_max)
                .clamp(self.scale_min, self.scale_max),
        }
    }
}

/// Which way a paste goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    TargetIntoSource,
    SourceIntoTarget,
}

impl Direction {
    /// Domain of the image receiving the paste.
    pub fn destination(self) -> Domain {
        match self {
            Direction::TargetIntoSource => Domain::Source,
            Direction::SourceIntoTarget => Domain::Target,
        }
    }

    pub fn toward(destination: Domain) -> Direction {
        match destination {
            Domain::Source => Direction::TargetIntoSource,
            Domain::Target => Direction::SourceIntoTarget,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::TargetIntoSource => "target_into_source",
            Direction::SourceIntoTarget => "source_into_target",
        }
    }
}

/// One accepted paste.
#[derive(Debug, Clone, PartialEq)]
pub struct PasteRecord {
    pub src_image_id: String,
    pub src_box: BBox,
    /// Placement in destination coordinates; carries the source class.
    pub dst_rect: BBox,
    pub scale_factor: f64,
    pub direction: Direction,
    /// Largest overlap ratio against the protected boxes when accepted.
    pub max_overlap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    TooSmall,
    TooLarge,
    AttemptsExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Skipped {
    pub src_box: BBox,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PastePlan {
    pub records: Vec<PasteRecord>,
    pub skipped: Vec<Skipped>,
}

/// Where the crops come from.
#[derive(Debug, Clone, Copy)]
pub struct PasteSource<'a> {
    pub image_id: &'a str,
    pub direction: Direction,
    pub boxes: &'a [BBox],
}

fn scaled_side(side: u32, scale: f64) -> u32 {
    (libm::round(f64::from(side) * scale) as u32).max(1)
}

/// Decides which source boxes go where in the destination.
///
/// Boxes are considered in order. The lower size bound is tested on the
/// original box, the upper bound on the scaled one. Each box gets up to
/// `max_attempts` draws of (scale, position); the first draw whose overlap
/// ratio with every protected box is at most `gamma` is accepted and becomes
/// protected itself. Draws are consumed in the order scale, x, y.
pub fn plan_pastes<R: Rng + ?Sized>(
    source: PasteSource<'_>,
    dst_boxes: &[BBox],
    dst_size: ImageSize,
    strategy: &PasteStrategy,
    rng: &mut R,
) -> PastePlan {
    let mut plan = PastePlan::default();
    let mut protected: Vec<BBox> = dst_boxes.to_vec();
    let attempts = if strategy.single_shot() {
        1
    } else {
        strategy.max_attempts
    };

    for src_box in source.boxes {
        let skip = |reason| Skipped {
            src_box: *src_box,
            reason,
        };
        if src_box.w <= strategy.min_box_side || src_box.h <= strategy.min_box_side {
            plan.skipped.push(skip(SkipReason::TooSmall));
            continue;
        }
        let smallest = strategy.smallest_scale();
        if scaled_side(src_box.w, smallest) >= dst_size.width || scaled_side(src_box.h, smallest) >= dst_size.height {
            plan.skipped.push(skip(SkipReason::TooLarge));
            continue;
        }

        let mut accepted = None;
        for _ in 0..attempts {
            let scale = strategy.draw_scale(rng);
            let w = scaled_side(src_box.w, scale);
            let h = scaled_side(src_box.h, scale);
            if w >= dst_size.width || h >= dst_size.height {
                continue;
            }
            let (x, y) = match strategy.position {
                Position::Random => (
                    rng.gen_range(0..=dst_size.width - w),
                    rng.gen_range(0..=dst_size.height - h),
                ),
                Position::Fixed => {
                    let r = i64::from(strategy.jitter_radius);
                    let (dx, dy) = if r > 0 {
                        (rng.gen_range(-r..=r), rng.gen_range(-r..=r))
                    } else {
                        (0, 0)
                    };
                    clamp_position(i64::from(src_box.x) + dx, i64::from(src_box.y) + dy, w, h, dst_size)
                        .expect("scaled box is smaller than the destination")
                }
            };
            let rect = BBox {
                x,
                y,
                w,
                h,
                class_id: src_box.class_id,
            };
            let max_overlap = protected.iter().map(|p| overlap_ratio(&rect, p)).fold(0.0, f64::max);
            if max_overlap <= strategy.gamma {
                accepted = Some((rect, scale, max_overlap));
                break;
            }
        }

        match accepted {
            Some((dst_rect, scale_factor, max_overlap)) => {
                protected.push(dst_rect);
                plan.records.push(PasteRecord {
                    src_image_id: source.image_id.into(),
                    src_box: *src_box,
                    dst_rect,
                    scale_factor,
                    direction: source.direction,
                    max_overlap,
                });
            }
            None => plan.skipped.push(skip(SkipReason::AttemptsExhausted)),
        }
    }
    plan
}

/// Writes every planned crop of `src` into a copy of `dst` and appends the
/// pasted rectangles to its boxes. Crops are converted to the destination's
/// channel count and resized bilinearly; existing boxes are left untouched.
pub fn apply_pastes(dst: &AnnotatedImage, src: &AnnotatedImage, plan: &PastePlan) -> Result<AnnotatedImage> {
    let mut pixels = dst.pixels().clone();
    let mut boxes = dst.boxes().to_vec();
    for (i, record) in plan.records.iter().enumerate() {
        if record.src_image_id != src.image_id() {
            return Err(Error::PlanMismatch(alloc::format!(
                "record {i} was planned from {} but the source image is {}",
                record.src_image_id,
                src.image_id()
            )));
        }
        if !record.src_box.fits_in(src.size()) || !record.dst_rect.fits_in(dst.size()) {
            return Err(Error::PlanMismatch(alloc::format!(
                "record {i} lies outside its images"
            )));
        }
        let patch = src
            .pixels()
            .crop(&record.src_box)?
            .to_channels(pixels.channels())?
            .resize_bilinear(record.dst_rect.w, record.dst_rect.h)?;
        pixels.paste(&patch, record.dst_rect.x, record.dst_rect.y)?;
        boxes.push(record.dst_rect.with_class(record.src_box.class_id));
    }
    AnnotatedImage::new(dst.image_id(), pixels, boxes, dst.domain())
}

/// Result of augmenting one source/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub source: AnnotatedImage,
    pub target: AnnotatedImage,
    /// Target crops pasted into the source image.
    pub into_source: Vec<PasteRecord>,
    /// Source crops pasted into the target image.
    pub into_target: Vec<PasteRecord>,
}

fn plan_direction<R: Rng + ?Sized>(
    from: &AnnotatedImage,
    into: &AnnotatedImage,
    strategy: &PasteStrategy,
    rng: &mut R,
) -> PastePlan {
    let source = PasteSource {
        image_id: from.image_id(),
        direction: Direction::toward(into.domain()),
        boxes: from.boxes(),
    };
    plan_pastes(source, into.boxes(), into.size(), strategy, rng)
}

/// Pastes in both directions with a single stream; the target-into-source
/// direction draws first.
pub fn augment_pair<R: Rng + ?Sized>(
    sample: &BatchSample<'_>,
    strategy: &PasteStrategy,
    rng: &mut R,
) -> Result<AugmentedPair> {
    strategy.validate()?;
    let into_source = plan_direction(sample.target_item, sample.source_item, strategy, rng);
    let into_target = plan_direction(sample.source_item, sample.target_item, strategy, rng);
    finish_pair(sample, into_source, into_target)
}

/// Like [`augment_pair`] but with an independent stream per direction.
pub fn augment_pair_split<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    sample: &BatchSample<'_>,
    strategy: &PasteStrategy,
    into_source_rng: &mut R1,
    into_target_rng: &mut R2,
) -> Result<AugmentedPair> {
    strategy.validate()?;
    let into_source = plan_direction(sample.target_item, sample.source_item, strategy, into_source_rng);
    let into_target = plan_direction(sample.source_item, sample.target_item, strategy, into_target_rng);
    finish_pair(sample, into_source, into_target)
}

fn finish_pair(sample: &BatchSample<'_>, into_source: PastePlan, into_target: PastePlan) -> Result<AugmentedPair> {
    let source = apply_pastes(sample.source_item, sample.target_item, &into_source)?;
    let target = apply_pastes(sample.target_item, sample.source_item, &into_target)?;
    Ok(AugmentedPair {
        source,
        target,
        into_source: into_source.records,
        into_target: into_target.records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::overlap_fraction;
    use crate::pixels::PixelBuffer;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bx(x: u32, y: u32, w: u32, h: u32) -> BBox {
        BBox::new(x, y, w, h, 0).unwrap()
    }

    fn size(w: u32, h: u32) -> ImageSize {
        ImageSize::new(w, h).unwrap()
    }

    fn src<'a>(boxes: &'a [BBox]) -> PasteSource<'a> {
        PasteSource {
            image_id: "t",
            direction: Direction::TargetIntoSource,
            boxes,
        }
    }

    fn random_strategy(gamma: f64) -> PasteStrategy {
        PasteStrategy {
            position: Position::Random,
            scaling: Scaling::Random,
            gamma,
            ..PasteStrategy::default()
        }
    }

    #[test]
    fn small_boxes_are_skipped() {
        let boxes = [bx(0, 0, 8, 40), bx(0, 0, 40, 16)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(640, 512),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(plan.records.is_empty());
        assert!(plan.skipped.iter().all(|s| s.reason == SkipReason::TooSmall));
        assert_eq!(plan.skipped.len(), 2);
    }

    #[test]
    fn side_seventeen_is_eligible() {
        let boxes = [bx(3, 4, 17, 17)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(64, 64),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(plan.records.len(), 1);
    }

    #[test]
    fn large_boxes_are_skipped() {
        // Strict upper bound: a box as wide as the destination cannot be placed.
        let boxes = [bx(0, 0, 100, 20)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(100, 100),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(plan.skipped[0].reason, SkipReason::TooLarge);
        let strategy = PasteStrategy {
            scaling: Scaling::Random,
            ..PasteStrategy::default()
        };
        // 0.7 * 150 = 105 still too wide.
        let boxes = [bx(0, 0, 150, 20)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(100, 100),
            &strategy,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(plan.skipped[0].reason, SkipReason::TooLarge);
    }

    #[test]
    fn fixed_fixed_identity_placement() {
        let boxes = [bx(100, 100, 50, 80)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(640, 512),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(plan.records.len(), 1);
        let r = &plan.records[0];
        assert_eq!(r.dst_rect, bx(100, 100, 50, 80));
        assert_eq!(r.scale_factor, 1.0);
        assert_eq!(r.direction, Direction::TargetIntoSource);
    }

    #[test]
    fn fixed_position_is_clamped_into_destination() {
        let boxes = [bx(600, 480, 50, 30)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(320, 240),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(plan.records[0].dst_rect, bx(270, 210, 50, 30));
    }

    #[test]
    fn fixed_fixed_rejects_after_one_attempt() {
        let boxes = [bx(10, 10, 40, 40)];
        let dst = [bx(0, 0, 60, 60)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let before = rng.clone();
        let plan = plan_pastes(src(&boxes), &dst, size(200, 200), &PasteStrategy::default(), &mut rng);
        assert_eq!(plan.skipped[0].reason, SkipReason::AttemptsExhausted);
        // No randomness consumed.
        assert_eq!(rng, before);
    }

    #[test]
    fn fully_covered_destination_exhausts_attempts() {
        // Exhaustive check that no placement of a 20x20 box on a 40x40 image
        // covered by one ground-truth box has zero overlap.
        let cover = bx(0, 0, 40, 40);
        for x in 0..=20 {
            for y in 0..=20 {
                assert!(overlap_fraction(&bx(x, y, 20, 20), &cover).0 > 0);
            }
        }
        let boxes = [bx(0, 0, 20, 20)];
        let strategy = PasteStrategy {
            position: Position::Random,
            gamma: 0.0,
            ..PasteStrategy::default()
        };
        let plan = plan_pastes(
            src(&boxes),
            &[cover],
            size(40, 40),
            &strategy,
            &mut ChaCha8Rng::seed_from_u64(3),
        );
        assert!(plan.records.is_empty());
        assert_eq!(plan.skipped[0].reason, SkipReason::AttemptsExhausted);
    }

    #[test]
    fn accepted_pastes_protect_later_ones() {
        // Two identical source boxes at a fixed position: the second would hide
        // the first completely.
        let boxes = [bx(10, 10, 30, 30), bx(10, 10, 30, 30)];
        let plan = plan_pastes(
            src(&boxes),
            &[],
            size(100, 100),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(plan.records.len(), 1);
        assert_eq!(plan.skipped[0].reason, SkipReason::AttemptsExhausted);
    }

    #[test]
    fn jitter_stays_within_radius() {
        let boxes = [bx(50, 50, 20, 20)];
        let strategy = PasteStrategy {
            jitter_radius: 3,
            ..PasteStrategy::default()
        };
        for seed in 0..50 {
            let plan = plan_pastes(
                src(&boxes),
                &[],
                size(200, 200),
                &strategy,
                &mut ChaCha8Rng::seed_from_u64(seed),
            );
            let r = plan.records[0].dst_rect;
            assert!(r.x.abs_diff(50) <= 3 && r.y.abs_diff(50) <= 3);
        }
    }

    #[test]
    fn strategy_validation() {
        assert!(PasteStrategy::default().validate().is_ok());
        for bad in [
            PasteStrategy {
                gamma: 1.5,
                ..PasteStrategy::default()
            },
            PasteStrategy {
                scale_min: 1.4,
                ..PasteStrategy::default()
            },
            PasteStrategy {
                scale_min: 0.0,
                ..PasteStrategy::default()
            },
            PasteStrategy {
                max_attempts: 0,
                ..PasteStrategy::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    fn image(id: &str, w: u32, h: u32, c: u8, boxes: Vec<BBox>, domain: Domain) -> AnnotatedImage {
        let data = (0..w as usize * h as usize * c as usize)
            .map(|i| (i * 31 % 256) as u8)
            .collect();
        AnnotatedImage::new(id, PixelBuffer::new(w, h, c, data).unwrap(), boxes, domain).unwrap()
    }

    #[test]
    fn empty_plan_is_identity() {
        let dst = image("s", 32, 32, 3, vec![bx(1, 1, 5, 5)], Domain::Source);
        let from = image("t", 32, 32, 3, vec![], Domain::Target);
        assert_eq!(apply_pastes(&dst, &from, &PastePlan::default()).unwrap(), dst);
    }

    #[test]
    fn unit_scale_paste_copies_bytes() {
        let dst = image("s", 64, 48, 3, vec![bx(0, 0, 10, 10)], Domain::Source);
        let from = image("t", 80, 60, 3, vec![bx(30, 20, 20, 18).with_class(0)], Domain::Target);
        let plan = PastePlan {
            records: vec![PasteRecord {
                src_image_id: "t".into(),
                src_box: from.boxes()[0],
                dst_rect: bx(40, 25, 20, 18),
                scale_factor: 1.0,
                direction: Direction::TargetIntoSource,
                max_overlap: 0.0,
            }],
            skipped: vec![],
        };
        let out = apply_pastes(&dst, &from, &plan).unwrap();
        for y in 0..18 {
            for x in 0..20 {
                assert_eq!(out.pixels().pixel(40 + x, 25 + y), from.pixels().pixel(30 + x, 20 + y));
            }
        }
        assert_eq!(out.pixels().pixel(0, 0), dst.pixels().pixel(0, 0));
        assert_eq!(out.boxes().len(), 2);
        assert_eq!(out.boxes()[0], dst.boxes()[0]);
        assert_eq!(out.boxes()[1], bx(40, 25, 20, 18));
    }

    #[test]
    fn channel_mismatch_is_bridged() {
        let dst = image("s", 40, 40, 3, vec![], Domain::Source);
        let from = image("t", 40, 40, 1, vec![bx(5, 5, 20, 20)], Domain::Target);
        let plan = plan_pastes(
            PasteSource {
                image_id: "t",
                direction: Direction::TargetIntoSource,
                boxes: from.boxes(),
            },
            dst.boxes(),
            dst.size(),
            &PasteStrategy::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        let out = apply_pastes(&dst, &from, &plan).unwrap();
        let g = from.pixels().pixel(5, 5)[0];
        assert_eq!(out.pixels().pixel(5, 5), &[g, g, g]);
    }

    #[test]
    fn mismatched_plan_is_rejected() {
        let dst = image("s", 40, 40, 3, vec![], Domain::Source);
        let from = image("t", 40, 40, 3, vec![], Domain::Target);
        let mut record = PasteRecord {
            src_image_id: "other".into(),
            src_box: bx(0, 0, 20, 20),
            dst_rect: bx(0, 0, 20, 20),
            scale_factor: 1.0,
            direction: Direction::TargetIntoSource,
            max_overlap: 0.0,
        };
        let plan = PastePlan {
            records: vec![record.clone()],
            skipped: vec![],
        };
        assert!(matches!(apply_pastes(&dst, &from, &plan), Err(Error::PlanMismatch(_))));
        record.src_image_id = "t".into();
        record.dst_rect = bx(30, 30, 20, 20);
        let plan = PastePlan {
            records: vec![record],
            skipped: vec![],
        };
        assert!(matches!(apply_pastes(&dst, &from, &plan), Err(Error::PlanMismatch(_))));
    }

    #[test]
    fn pair_without_boxes_is_unchanged() {
        let s = image("s", 32, 32, 3, vec![], Domain::Source);
        let t = image("t", 32, 32, 1, vec![], Domain::Target);
        let sample = BatchSample {
            source_item: &s,
            target_item: &t,
            iteration_index: 0,
        };
        let out = augment_pair(&sample, &random_strategy(0.25), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((out.source, out.target), (s, t));
        assert!(out.into_source.is_empty() && out.into_target.is_empty());
    }

    #[test]
    fn asymmetric_pair_pastes_one_way() {
        let s = image("s", 64, 64, 3, vec![], Domain::Source);
        let t = image("t", 64, 64, 3, vec![bx(10, 10, 20, 20)], Domain::Target);
        let sample = BatchSample {
            source_item: &s,
            target_item: &t,
            iteration_index: 0,
        };
        let out = augment_pair(&sample, &PasteStrategy::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(out.into_source.len(), 1);
        assert!(out.into_target.is_empty());
        assert_eq!(out.source.boxes().len(), 1);
        assert_eq!(out.target, t);
    }

    #[test]
    fn directions_read_original_state() {
        // Each side has one box at the same spot. Into-source pastes must not see
        // the box just pasted into the target and vice versa, so both directions
        // are judged against the single original box only.
        let s = image("s", 100, 100, 3, vec![bx(0, 0, 20, 20)], Domain::Source);
        let t = image("t", 100, 100, 3, vec![bx(50, 50, 30, 30)], Domain::Target);
        let sample = BatchSample {
            source_item: &s,
            target_item: &t,
            iteration_index: 0,
        };
        let out = augment_pair(&sample, &PasteStrategy::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.into_source[0].dst_rect, bx(50, 50, 30, 30));
        assert_eq!(out.into_target[0].dst_rect, bx(0, 0, 20, 20));
        assert_eq!(out.into_target[0].direction, Direction::SourceIntoTarget);
    }

    #[test]
    fn augment_pair_is_deterministic() {
        let s = image(
            "s",
            120,
            90,
            3,
            vec![bx(10, 10, 30, 30), bx(60, 40, 40, 30)],
            Domain::Source,
        );
        let t = image(
            "t",
            100,
            100,
            1,
            vec![bx(20, 20, 25, 40), bx(50, 10, 30, 30)],
            Domain::Target,
        );
        let sample = BatchSample {
            source_item: &s,
            target_item: &t,
            iteration_index: 0,
        };
        let strategy = random_strategy(0.25);
        let a = augment_pair(&sample, &strategy, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = augment_pair(&sample, &strategy, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    fn arb_boxes(max: usize) -> impl Strategy<Value = Vec<BBox>> {
        prop::collection::vec((0u32..150, 0u32..150, 1u32..60, 1u32..60), 0..max).prop_map(|v| {
            v.into_iter()
                .map(|(x, y, w, h)| bx(x.min(199 - w), y.min(159 - h), w, h))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn plan_invariants(
            srcs in arb_boxes(6),
            dsts in arb_boxes(6),
            gamma in prop_oneof![Just(0.1), Just(0.25), Just(0.5), Just(0.75)],
            random_pos in any::<bool>(),
            random_scale in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let dst_size = size(200, 160);
            let strategy = PasteStrategy {
                position: if random_pos { Position::Random } else { Position::Fixed },
                scaling: if random_scale { Scaling::Random } else { Scaling::Fixed },
                gamma,
                ..PasteStrategy::default()
            };
            let plan = plan_pastes(src(&srcs), &dsts, dst_size, &strategy, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(plan.records.len() + plan.skipped.len(), srcs.len());
            let mut protected = dsts.clone();
            for r in &plan.records {
                prop_assert!(r.dst_rect.fits_in(dst_size));
                prop_assert!(r.src_box.w > 16 && r.src_box.h > 16);
                prop_assert!(r.scale_factor >= 0.7 && r.scale_factor <= 1.3);
                if !random_scale { prop_assert_eq!(r.scale_factor, 1.0); }
                prop_assert_eq!(r.dst_rect.w, scaled_side(r.src_box.w, r.scale_factor));
                prop_assert_eq!(r.dst_rect.h, scaled_side(r.src_box.h, r.scale_factor));
                for p in &protected {
                    let (inter, area) = overlap_fraction(&r.dst_rect, p);
                    prop_assert!(inter as f64 / area as f64 <= gamma);
                }
                protected.push(r.dst_rect);
            }
        }
    }
}
