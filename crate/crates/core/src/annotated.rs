use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize};
use crate::pixels::PixelBuffer;

/// Which side of the adaptation an image comes from. The discriminator label
/// of a domain is its `label()`: 0 for source, 1 for target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    pub fn label(self) -> u8 {
        match self {
            Domain::Source => 0,
            Domain::Target => 1,
        }
    }

    pub fn from_label(label: u8) -> Option<Domain> {
        match label {
            0 => Some(Domain::Source),
            1 => Some(Domain::Target),
            _ => None,
        }
    }

    pub fn opposite(self) -> Domain {
        match self {
            Domain::Source => Domain::Target,
            Domain::Target => Domain::Source,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Source => "source",
            Domain::Target => "target",
        }
    }
}

/// An image, its ground-truth boxes and its domain. Every box is validated
/// against the pixel dimensions on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedImage {
    image_id: String,
    pixels: PixelBuffer,
    boxes: Vec<BBox>,
    domain: Domain,
}

impl AnnotatedImage {
    pub fn new(image_id: impl Into<String>, pixels: PixelBuffer, boxes: Vec<BBox>, domain: Domain) -> Result<Self> {
        let image_id = image_id.into();
        let size = pixels.size();
        if let Some(index) = boxes.iter().position(|b| !b.fits_in(size)) {
            return Err(Error::BoxOutOfBounds { image_id, index });
        }
        Ok(Self {
            image_id,
            pixels,
            boxes,
            domain,
        })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn pixels(&self) -> &PixelBuffer {
        &self.pixels
    }

    pub fn boxes(&self) -> &[BBox] {
        &self.boxes
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn size(&self) -> ImageSize {
        self.pixels.size()
    }

    pub fn into_parts(self) -> (String, PixelBuffer, Vec<BBox>, Domain) {
        (self.image_id, self.pixels, self.boxes, self.domain)
    }
}
