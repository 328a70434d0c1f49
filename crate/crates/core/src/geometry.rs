//! Integer box arithmetic.
//!
//! Boxes cover the closed-open pixel interval `[x, x + w) × [y, y + h)`, so
//! touching boxes intersect with area zero and areas compose additively.
//! Everything stays in integers until a ratio is requested.

use alloc::format;

use crate::error::{Error, Result};

/// Width and height of an image in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl ImageSize {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidSize { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

/// Axis-aligned box with a category index; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub class_id: u16,
}

impl BBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32, class_id: u16) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidBox(format!("zero-sized box {w}x{h} at ({x}, {y})")));
        }
        if x.checked_add(w).is_none() || y.checked_add(h).is_none() {
            return Err(Error::InvalidBox(format!("box at ({x}, {y}) overflows coordinates")));
        }
        Ok(Self { x, y, w, h, class_id })
    }

    pub fn right(&self) -> u64 {
        u64::from(self.x) + u64::from(self.w)
    }

    pub fn bottom(&self) -> u64 {
        u64::from(self.y) + u64::from(self.h)
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    /// True when the box has positive size and lies entirely inside `size`.
    pub fn fits_in(&self, size: ImageSize) -> bool {
        self.w > 0 && self.h > 0 && self.right() <= u64::from(size.width) && self.bottom() <= u64::from(size.height)
    }

    /// Same geometry, different category.
    pub fn with_class(self, class_id: u16) -> Self {
        Self { class_id, ..self }
    }

    pub fn same_rect(&self, other: &BBox) -> bool {
        self.x == other.x && self.y == other.y && self.w == other.w && self.h == other.h
    }
}

/// Number of pixels shared by `a` and `b`.
pub fn intersect_area(a: &BBox, b: &BBox) -> u64 {
    let left = u64::from(a.x.max(b.x));
    let top = u64::from(a.y.max(b.y));
    let right = a.right().min(b.right());
    let bottom = a.bottom().min(b.bottom());
    right.saturating_sub(left) * bottom.saturating_sub(top)
}

/// Overlap of `pasted` on `existing` as an exact `(numerator, denominator)`
/// pair: the shared area over the area of the existing box.
pub fn overlap_fraction(pasted: &BBox, existing: &BBox) -> (u64, u64) {
    (intersect_area(pasted, existing), existing.area())
}

/// Fraction of `existing` hidden by `pasted`. This is not IoU: the
/// denominator is the existing box alone. Degenerate existing boxes report 0.
pub fn overlap_ratio(pasted: &BBox, existing: &BBox) -> f64 {
    let (inter, area) = overlap_fraction(pasted, existing);
    if area == 0 {
        return 0.0;
    }
    inter as f64 / area as f64
}

/// True when `pasted` hides more than `gamma` of `existing`.
pub fn overlap_exceeds(pasted: &BBox, existing: &BBox, gamma: f64) -> bool {
    overlap_ratio(pasted, existing) > gamma
}

/// Translates `b` by the smallest amount that puts it inside the image.
pub fn clamp_to_image(b: &BBox, size: ImageSize) -> Result<BBox> {
    if b.w > size.width || b.h > size.height {
        return Err(Error::BoxLargerThanImage {
            width: b.w,
            height: b.h,
            image_width: size.width,
            image_height: size.height,
        });
    }
    Ok(BBox {
        x: b.x.min(size.width - b.w),
        y: b.y.min(size.height - b.h),
        ..*b
    })
}

/// Places a `w × h` rectangle at a possibly negative or overflowing top-left
/// corner, shifted minimally to fit inside the image.
pub fn clamp_position(x: i64, y: i64, w: u32, h: u32, size: ImageSize) -> Result<(u32, u32)> {
    if w > size.width || h > size.height {
        return Err(Error::BoxLargerThanImage {
            width: w,
            height: h,
            image_width: size.width,
            image_height: size.height,
        });
    }
    let max_x = i64::from(size.width - w);
    let max_y = i64::from(size.height - h);
    Ok((x.clamp(0, max_x) as u32, y.clamp(0, max_y) as u32))
}
