//! Interleaved 8-bit pixel buffers with crop, bilinear resize and paste.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize};

/// Row-major `height × width × channels` bytes; channels is 1 (gray) or 3 (RGB).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelBuffer {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl PixelBuffer {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        ImageSize::new(width, height)?;
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::PixelBufferSize {
                width,
                height,
                channels,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A buffer filled with one value in every channel.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self> {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn size(&self) -> ImageSize {
        ImageSize {
            width: self.width,
            height: self.height,
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let start = (y as usize * self.width as usize + x as usize) * c;
        &self.data[start..start + c]
    }

    /// Copies the region covered by `rect`.
    pub fn crop(&self, rect: &BBox) -> Result<PixelBuffer> {
        if !rect.fits_in(self.size()) {
            return Err(Error::PlanMismatch(alloc::format!(
                "crop {}x{} at ({}, {}) outside {}x{} image",
                rect.w,
                rect.h,
                rect.x,
                rect.y,
                self.width,
                self.height
            )));
        }
        let c = self.channels as usize;
        let row_len = rect.w as usize * c;
        let mut data = Vec::with_capacity(row_len * rect.h as usize);
        for y in rect.y..rect.y + rect.h {
            let start = (y as usize * self.width as usize + rect.x as usize) * c;
            data.extend_from_slice(&self.data[start..start + row_len]);
        }
        PixelBuffer::new(rect.w, rect.h, self.channels, data)
    }

    /// Gray is replicated into RGB; RGB is averaged into gray with rounding.
    pub fn to_channels(&self, channels: u8) -> Result<PixelBuffer> {
        match (self.channels, channels) {
            (a, b) if a == b => Ok(self.clone()),
            (1, 3) => {
                let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
                PixelBuffer::new(self.width, self.height, 3, data)
            }
            (3, 1) => {
                let data = self
                    .data
                    .chunks_exact(3)
                    .map(|px| ((u16::from(px[0]) + u16::from(px[1]) + u16::from(px[2]) + 1) / 3) as u8)
                    .collect();
                PixelBuffer::new(self.width, self.height, 1, data)
            }
            (_, other) => Err(Error::UnsupportedChannels(other)),
        }
    }

    /// Bilinear resample with half-pixel-centre alignment. Identity when the
    /// size is unchanged.
    pub fn resize_bilinear(&self, width: u32, height: u32) -> Result<PixelBuffer> {
        ImageSize::new(width, height)?;
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let xs = sample_axis(self.width, width);
        let ys = sample_axis(self.height, height);
        let c = self.channels as usize;
        let src_w = self.width as usize;
        let mut out = Vec::with_capacity(width as usize * height as usize * c);
        for &(y0, y1, fy) in &ys {
            let row0 = y0 * src_w;
            let row1 = y1 * src_w;
            for &(x0, x1, fx) in &xs {
                for ch in 0..c {
                    let p00 = f64::from(self.data[(row0 + x0) * c + ch]);
                    let p01 = f64::from(self.data[(row0 + x1) * c + ch]);
                    let p10 = f64::from(self.data[(row1 + x0) * c + ch]);
                    let p11 = f64::from(self.data[(row1 + x1) * c + ch]);
                    let top = p00 + (p01 - p00) * fx;
                    let bottom = p10 + (p11 - p10) * fx;
                    let v = top + (bottom - top) * fy;
                    out.push((v + 0.5).clamp(0.0, 255.0) as u8);
                }
            }
        }
        PixelBuffer::new(width, height, self.channels, out)
    }

    /// Overwrites the pixels under `(x, y)` with `patch`. Channel counts must match.
    pub fn paste(&mut self, patch: &PixelBuffer, x: u32, y: u32) -> Result<()> {
        if patch.channels != self.channels {
            return Err(Error::PlanMismatch(alloc::format!(
                "patch has {} channels, destination has {}",
                patch.channels,
                self.channels
            )));
        }
        let rect = BBox {
            x,
            y,
            w: patch.width,
            h: patch.height,
            class_id: 0,
        };
        if !rect.fits_in(self.size()) {
            return Err(Error::PlanMismatch(alloc::format!(
                "paste {}x{} at ({x}, {y}) outside {}x{} image",
                patch.width,
                patch.height,
                self.width,
                self.height
            )));
        }
        let c = self.channels as usize;
        let row_len = patch.width as usize * c;
        for (row, src) in patch.data.chunks_exact(row_len).enumerate() {
            let start = ((y as usize + row) * self.width as usize + x as usize) * c;
            self.data[start..start + row_len].copy_from_slice(src);
        }
        Ok(())
    }
}

// For each output index: the two source taps and the weight of the second.
fn sample_axis(src_len: u32, dst_len: u32) -> Vec<(usize, usize, f64)> {
    let scale = f64::from(src_len) / f64::from(dst_len);
    let last = f64::from(src_len - 1);
    (0..dst_len)
        .map(|i| {
            let pos = ((f64::from(i) + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = pos as usize;
            let i1 = (i0 + 1).min(src_len as usize - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(w: u32, h: u32, c: u8) -> PixelBuffer {
        let data = (0..w as usize * h as usize * c as usize)
            .map(|i| (i * 7 % 251) as u8)
            .collect();
        PixelBuffer::new(w, h, c, data).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(PixelBuffer::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(matches!(
            PixelBuffer::new(2, 2, 4, vec![0; 16]),
            Err(Error::UnsupportedChannels(4))
        ));
        assert!(PixelBuffer::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn crop_copies_region() {
        let img = ramp(5, 4, 1);
        let rect = BBox::new(1, 2, 3, 2, 0).unwrap();
        let crop = img.crop(&rect).unwrap();
        for y in 0..2 {
            for x in 0..3 {
                assert_eq!(crop.pixel(x, y), img.pixel(x + 1, y + 2));
            }
        }
        assert!(img.crop(&BBox::new(3, 0, 3, 1, 0).unwrap()).is_err());
    }

    #[test]
    fn upscale_two_by_one() {
        // Half-pixel centres sample at -0.25, 0.25, 0.75, 1.25, clamped to [0, 1].
        let img = PixelBuffer::new(2, 1, 1, vec![0, 100]).unwrap();
        let up = img.resize_bilinear(4, 1).unwrap();
        assert_eq!(up.as_bytes(), &[0, 25, 75, 100]);
    }

    #[test]
    fn downscale_averages_pairs() {
        let img = PixelBuffer::new(4, 1, 1, vec![10, 20, 30, 40]).unwrap();
        let down = img.resize_bilinear(2, 1).unwrap();
        assert_eq!(down.as_bytes(), &[15, 35]);
    }

    #[test]
    fn constant_images_stay_constant() {
        let img = PixelBuffer::filled(7, 5, 3, 42).unwrap();
        let r = img.resize_bilinear(13, 3).unwrap();
        assert!(r.as_bytes().iter().all(|&v| v == 42));
    }

    #[test]
    fn channel_bridging() {
        let gray = PixelBuffer::new(2, 1, 1, vec![5, 200]).unwrap();
        assert_eq!(gray.to_channels(3).unwrap().as_bytes(), &[5, 5, 5, 200, 200, 200]);
        let rgb = PixelBuffer::new(1, 1, 3, vec![10, 20, 31]).unwrap();
        assert_eq!(rgb.to_channels(1).unwrap().as_bytes(), &[20]);
    }

    #[test]
    fn paste_overwrites_only_target_region() {
        let mut dst = PixelBuffer::filled(6, 6, 1, 0).unwrap();
        let patch = PixelBuffer::filled(2, 3, 1, 9).unwrap();
        dst.paste(&patch, 4, 3).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                let inside = (4..6).contains(&x) && (3..6).contains(&y);
                assert_eq!(dst.pixel(x, y)[0], if inside { 9 } else { 0 });
            }
        }
        assert!(dst.paste(&patch, 5, 0).is_err());
    }

    proptest! {
        #[test]
        fn unit_scale_resize_is_identity(w in 1u32..20, h in 1u32..20, c in prop_oneof![Just(1u8), Just(3u8)]) {
            let img = ramp(w, h, c);
            prop_assert_eq!(img.resize_bilinear(w, h).unwrap(), img);
        }
    }
}
