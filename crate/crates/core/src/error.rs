use alloc::string::String;

/// Errors produced by the augmentation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid image size {width}x{height}")]
    InvalidSize { width: u32, height: u32 },

    #[error("box {width}x{height} is larger than the {image_width}x{image_height} image")]
    BoxLargerThanImage {
        width: u32,
        height: u32,
        image_width: u32,
        image_height: u32,
    },

    #[error("image {image_id}: box {index} exceeds image bounds")]
    BoxOutOfBounds { image_id: String, index: usize },

    #[error("pixel buffer of {actual} bytes does not match {width}x{height}x{channels}")]
    PixelBufferSize {
        width: u32,
        height: u32,
        channels: u8,
        actual: usize,
    },

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(u8),

    #[error("invalid paste strategy: {0}")]
    InvalidStrategy(String),

    #[error("paste record does not match images: {0}")]
    PlanMismatch(String),

    #[error("record rectangle lies outside the {width}x{height} label map image")]
    RecordOutOfBounds { width: u32, height: u32 },

    #[error("stride must be at least 1")]
    InvalidStride,

    #[error("shape mismatch: prediction is {pred_rows}x{pred_cols}, labels are {label_rows}x{label_cols}")]
    ShapeMismatch {
        pred_rows: usize,
        pred_cols: usize,
        label_rows: usize,
        label_cols: usize,
    },

    #[error("invalid fraction {num}/{den}")]
    InvalidFraction { num: u64, den: u64 },

    #[error("fraction too small for dataset: {len} items x {num}/{den} rounds to zero")]
    FractionTooSmall { len: usize, num: u64, den: u64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate image id {0}")]
    DuplicateImageId(String),

    #[error("image {image_id}: box {index} has unknown class id {class_id}")]
    UnknownClass {
        image_id: String,
        index: usize,
        class_id: u16,
    },

    #[error("class {0} is missing from the class list")]
    MissingClassName(String),

    #[error("dataset domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("prediction {0} is NaN")]
    InvalidPrediction(usize),

    #[error("lambda must be non-negative, got {0}")]
    NegativeLambda(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
