//! Domain identification label maps at feature stride.
//!
//! Before pasting, every cell of an image's map carries its own domain label.
//! After pasting, each cell whose `stride × stride` tile intersects a pasted
//! rectangle with positive area is set to the other domain: the minimum corner
//! is floored and the maximum corner ceiled when dividing by the stride.

use alloc::vec;
use alloc::vec::Vec;

use crate::annotated::Domain;
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize};
use crate::ocdc::PasteRecord;

pub const DEFAULT_STRIDE: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainLabelMap {
    domain: Domain,
    image_size: ImageSize,
    stride: u32,
    rows: usize,
    cols: usize,
    cells: Vec<Domain>,
}

/// Grid dimensions `(rows, cols)` for an image at `stride`.
pub fn grid_shape(image_size: ImageSize, stride: u32) -> Result<(usize, usize)> {
    if stride == 0 {
        return Err(Error::InvalidStride);
    }
    Ok((
        image_size.height.div_ceil(stride) as usize,
        image_size.width.div_ceil(stride) as usize,
    ))
}

/// Uniform map of `domain`'s label.
pub fn base_label_map(domain: Domain, image_size: ImageSize, stride: u32) -> Result<DomainLabelMap> {
    let (rows, cols) = grid_shape(image_size, stride)?;
    Ok(DomainLabelMap {
        domain,
        image_size,
        stride,
        rows,
        cols,
        cells: vec![domain; rows * cols],
    })
}

/// Sets every cell touched by a record's `dst_rect` to the opposite of the
/// map's domain. Setting is idempotent, so record order and duplicates do not
/// matter.
pub fn switch_labels(map: &DomainLabelMap, records: &[PasteRecord]) -> Result<DomainLabelMap> {
    let rects: Vec<BBox> = records.iter().map(|r| r.dst_rect).collect();
    switch_rects(map, &rects)
}

/// [`switch_labels`] over bare rectangles.
pub fn switch_rects(map: &DomainLabelMap, rects: &[BBox]) -> Result<DomainLabelMap> {
    let mut out = map.clone();
    let flipped = map.domain.opposite();
    let s = map.stride;
    for rect in rects {
        if !rect.fits_in(map.image_size) {
            return Err(Error::RecordOutOfBounds {
                width: map.image_size.width,
                height: map.image_size.height,
            });
        }
        let col_end = (rect.x + rect.w).div_ceil(s) as usize;
        let row_end = (rect.y + rect.h).div_ceil(s) as usize;
        for row in (rect.y / s) as usize..row_end {
            let start = row * out.cols;
            for cell in &mut out.cells[start + (rect.x / s) as usize..start + col_end] {
                *cell = flipped;
            }
        }
    }
    Ok(out)
}

impl DomainLabelMap {
    /// Rebuilds a map from row-major cells, e.g. when reading one from disk.
    pub fn from_cells(domain: Domain, image_size: ImageSize, stride: u32, cells: Vec<Domain>) -> Result<Self> {
        let (rows, cols) = grid_shape(image_size, stride)?;
        if cells.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                pred_rows: cells.len() / cols.max(1),
                pred_cols: cols,
                label_rows: rows,
                label_cols: cols,
            });
        }
        Ok(Self {
            domain,
            image_size,
            stride,
            rows,
            cols,
            cells,
        })
    }

    /// Domain of the image this map belongs to.
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn image_size(&self) -> ImageSize {
        self.image_size
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Domain {
        self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[Domain] {
        &self.cells
    }

    /// Row-major 0/1 labels.
    pub fn labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.cells.iter().map(|d| d.label())
    }

    pub fn switched_count(&self) -> usize {
        self.cells.iter().filter(|&&d| d != self.domain).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocdc::Direction;
    use alloc::string::String;
    use proptest::prelude::*;

    fn size(w: u32, h: u32) -> ImageSize {
        ImageSize::new(w, h).unwrap()
    }

    fn record(x: u32, y: u32, w: u32, h: u32) -> PasteRecord {
        let rect = BBox::new(x, y, w, h, 0).unwrap();
        PasteRecord {
            src_image_id: String::from("t"),
            src_box: rect,
            dst_rect: rect,
            scale_factor: 1.0,
            direction: Direction::TargetIntoSource,
            max_overlap: 0.0,
        }
    }

    // Cell switched iff its pixel tile intersects some rect with positive area.
    fn oracle(map: &DomainLabelMap, rects: &[BBox]) -> Vec<Domain> {
        let s = map.stride();
        let mut out = Vec::new();
        for r in 0..map.rows() as u32 {
            for c in 0..map.cols() as u32 {
                let hit = rects.iter().any(|b| {
                    let ix = (c * s + s).min(b.x + b.w) as i64 - (c * s).max(b.x) as i64;
                    let iy = (r * s + s).min(b.y + b.h) as i64 - (r * s).max(b.y) as i64;
                    ix > 0 && iy > 0
                });
                out.push(if hit { map.domain().opposite() } else { map.domain() });
            }
        }
        out
    }

    #[test]
    fn base_maps() {
        let m = base_label_map(Domain::Source, size(64, 64), 16).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 4));
        assert!(m.labels().all(|l| l == 0));
        let m = base_label_map(Domain::Target, size(1000, 600), 16).unwrap();
        assert_eq!((m.rows(), m.cols()), (38, 63));
        assert!(m.labels().all(|l| l == 1));
        let m = base_label_map(Domain::Source, size(3, 3), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 3));
        assert_eq!(base_label_map(Domain::Source, size(3, 3), 0), Err(Error::InvalidStride));
    }

    #[test]
    fn switch_middle_block() {
        let m = base_label_map(Domain::Source, size(64, 64), 16).unwrap();
        let out = switch_labels(&m, &[record(16, 16, 32, 32)]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let inside = (1..=2).contains(&r) && (1..=2).contains(&c);
                assert_eq!(out.get(r, c).label(), u8::from(inside), "cell ({r}, {c})");
            }
        }
        assert_eq!(out.switched_count(), 4);
    }

    #[test]
    fn partial_tiles_are_switched() {
        let m = base_label_map(Domain::Target, size(64, 64), 16).unwrap();
        let out = switch_labels(&m, &[record(15, 0, 2, 1)]).unwrap();
        assert_eq!(out.get(0, 0), Domain::Source);
        assert_eq!(out.get(0, 1), Domain::Source);
        assert_eq!(out.switched_count(), 2);
    }

    #[test]
    fn full_cover_and_empty() {
        let m = base_label_map(Domain::Target, size(50, 30), 16).unwrap();
        let all = switch_labels(&m, &[record(0, 0, 50, 30)]).unwrap();
        assert!(all.labels().all(|l| l == 0));
        assert_eq!(switch_labels(&m, &[]).unwrap(), m);
    }

    #[test]
    fn out_of_bounds_record() {
        let m = base_label_map(Domain::Source, size(64, 64), 16).unwrap();
        assert!(matches!(
            switch_labels(&m, &[record(50, 50, 20, 20)]),
            Err(Error::RecordOutOfBounds { .. })
        ));
    }

    #[test]
    fn from_cells_checks_shape() {
        assert!(DomainLabelMap::from_cells(Domain::Source, size(32, 32), 16, vec![Domain::Source; 4]).is_ok());
        assert!(DomainLabelMap::from_cells(Domain::Source, size(32, 32), 16, vec![Domain::Source; 3]).is_err());
    }

    fn arb_case() -> impl Strategy<Value = (ImageSize, u32, Vec<BBox>)> {
        (
            1u32..200,
            1u32..200,
            prop_oneof![Just(1u32), Just(8), Just(16), Just(32), 2u32..40],
        )
            .prop_flat_map(|(w, h, s)| {
                let rect = (0..w, 0..h).prop_flat_map(move |(x, y)| {
                    (Just(x), Just(y), 1..=w - x, 1..=h - y)
                        .prop_map(|(x, y, rw, rh)| BBox::new(x, y, rw, rh, 0).unwrap())
                });
                (Just(size(w, h)), Just(s), prop::collection::vec(rect, 0..5))
            })
    }

    proptest! {
        #[test]
        fn matches_tile_oracle((image, stride, rects) in arb_case(), target in any::<bool>()) {
            let domain = if target { Domain::Target } else { Domain::Source };
            let m = base_label_map(domain, image, stride).unwrap();
            let out = switch_rects(&m, &rects).unwrap();
            prop_assert_eq!(out.cells(), &oracle(&m, &rects)[..]);
            // Order independence and idempotence.
            let mut doubled: Vec<BBox> = rects.iter().rev().cloned().collect();
            doubled.extend(rects.iter().cloned());
            prop_assert_eq!(switch_rects(&m, &doubled).unwrap(), out);
        }
    }
}
