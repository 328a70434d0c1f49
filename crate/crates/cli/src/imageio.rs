//! Image files: PNG/JPEG in, PNG out, and binary PGM label maps.

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat};
use ocdc_core::labels::DomainLabelMap;
use ocdc_core::{Domain, ImageSize, PixelBuffer};

use crate::error::{Error, Result};

/// Decodes a PNG or JPEG. Gray images stay single-channel; everything else
/// becomes RGB.
pub fn decode_image(path: &Path) -> Result<PixelBuffer> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image_bytes(&bytes).map_err(|message| Error::Image {
        path: path.into(),
        message,
    })
}

pub fn decode_image_bytes(bytes: &[u8]) -> std::result::Result<PixelBuffer, String> {
    let img = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    let gray = matches!(
        img.color(),
        ColorType::L8 | ColorType::L16 | ColorType::La8 | ColorType::La16
    );
    let (w, h) = (img.width(), img.height());
    let buffer = if gray {
        PixelBuffer::new(w, h, 1, img.into_luma8().into_raw())
    } else {
        PixelBuffer::new(w, h, 3, img.into_rgb8().into_raw())
    };
    buffer.map_err(|e| e.to_string())
}

pub fn encode_png(pixels: &PixelBuffer) -> Vec<u8> {
    let (w, h) = (pixels.width(), pixels.height());
    let data = pixels.as_bytes().to_vec();
    let img = if pixels.channels() == 1 {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, data).expect("buffer size checked"))
    } else {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, data).expect("buffer size checked"))
    };
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

/// Pixel value of a target-domain cell; source cells are 0.
pub const TARGET_LEVEL: u8 = 255;

/// Binary PGM (P5, maxval 255), one byte per cell.
pub fn encode_label_map(map: &DomainLabelMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(map.cells().len() + 32);
    write!(out, "P5\n{} {}\n255\n", map.cols(), map.rows()).expect("write to Vec");
    out.extend(map.labels().map(|l| if l == 1 { TARGET_LEVEL } else { 0 }));
    out
}

/// Header fields and raster of a binary PGM with maxval 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Pgm, String> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| "non-ASCII PGM header")?);
    }
    if fields[0] != "P5" {
        return Err(format!("unsupported magic {:?}", fields[0]));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| format!("bad PGM header field {s:?}"));
    let (width, height, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if maxval != 255 {
        return Err(format!("maxval {maxval} is not 255"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("truncated PGM header".into());
    }
    let data = &bytes[pos + 1..];
    if data.len() != width * height {
        return Err(format!("raster has {} bytes, expected {}", data.len(), width * height));
    }
    Ok(Pgm {
        width,
        height,
        data: data.to_vec(),
    })
}

/// Reads a label map for an image of `image_size`. Cell values must be 0 or 255.
pub fn decode_label_map(
    bytes: &[u8],
    domain: Domain,
    image_size: ImageSize,
    stride: u32,
) -> std::result::Result<DomainLabelMap, String> {
    let pgm = decode_pgm(bytes)?;
    let (rows, cols) = ocdc_core::labels::grid_shape(image_size, stride).map_err(|e| e.to_string())?;
    if (pgm.height, pgm.width) != (rows, cols) {
        return Err(format!(
            "label map is {}x{} cells, expected {}x{} for a {}x{} image at stride {}",
            pgm.width, pgm.height, cols, rows, image_size.width, image_size.height, stride
        ));
    }
    let cells = pgm
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| match v {
            0 => Ok(Domain::Source),
            TARGET_LEVEL => Ok(Domain::Target),
            other => Err(format!("cell (row {}, col {}) has value {other}", i / cols, i % cols)),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    DomainLabelMap::from_cells(domain, image_size, stride, cells).map_err(|e| e.to_string())
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
