//! Cross-domain object paste augmentation with domain label maps and an adversarial loss.
//!
//! Crops of ground-truth objects are exchanged between a source-domain and a
//! target-domain image, guarded by an overlap rule so that existing objects stay
//! visible. Each paste also switches the discriminator's per-cell domain labels
//! under the pasted region. The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod annotated;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod labels;
pub mod loss;
pub mod ocdc;
pub mod pixels;
pub mod seed;

pub use annotated::{AnnotatedImage, Domain};
pub use error::{Error, Result};
pub use geometry::{clamp_to_image, intersect_area, overlap_ratio, BBox, ImageSize};
pub use ingest::{merge_class_names, pair_batches, resize_to_training, subsample, BatchSample, Dataset, Fraction};
pub use labels::{base_label_map, switch_labels, DomainLabelMap};
pub use loss::{adversarial_loss, total_loss, AdversarialLoss, LossBreakdown, PredictedDomainMap};
pub use ocdc::{
    apply_pastes, augment_pair, plan_pastes, AugmentedPair, Direction, PastePlan, PasteRecord, PasteSource,
    PasteStrategy, Position, Scaling, SkipReason,
};
pub use pixels::PixelBuffer;
