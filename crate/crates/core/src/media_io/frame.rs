use std::fs::File;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{Result, VsdeError};

/// An 8-bit single-plane image: texture luma or a quantized inverse-depth map.
///
/// Samples are stored row-major. Depth maps follow the usual convention where
/// 255 is the nearest plane (`z_near`) and 0 the farthest (`z_far`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LumaFrame {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl LumaFrame {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(VsdeError::invalid(format!(
                "frame dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(VsdeError::invalid(format!(
                "{width}x{height} frame needs {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.samples[y * self.width + x] = v;
    }

    /// Sample with replicate-border addressing.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.samples[yc * self.width + xc]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn same_dims(&self, other: &LumaFrame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_dims(&self, other: &LumaFrame, what: &str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(VsdeError::invalid(format!(
                "{what}: dimension mismatch {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    /// Writes the bare 8-bit plane.
    pub fn write_raw(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = File::create(path).map_err(|e| VsdeError::io(path, e))?;
        f.write_all(&self.samples).map_err(|e| VsdeError::io(path, e))
    }

    /// Appends the plane to an already open writer (multi-frame files).
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(&self.samples)
    }
}

/// How consecutive frames are laid out in a raw file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaneLayout {
    /// Bare luma planes back to back.
    #[default]
    Luma,
    /// Planar YUV 4:2:0; the two chroma planes after each luma plane are skipped.
    Yuv420,
}

impl PlaneLayout {
    /// Bytes between the starts of consecutive frames.
    pub fn frame_stride(self, width: usize, height: usize) -> u64 {
        let luma = (width * height) as u64;
        match self {
            PlaneLayout::Luma => luma,
            PlaneLayout::Yuv420 => {
                let chroma = (width.div_ceil(2) * height.div_ceil(2)) as u64;
                luma + 2 * chroma
            }
        }
    }
}

/// Reads the first luma plane of a raw file.
pub fn read_raw_frame(path: impl AsRef<Path>, width: usize, height: usize) -> Result<LumaFrame> {
    read_raw_frame_at(path, width, height, 0, PlaneLayout::Luma)
}

/// Reads the luma plane of frame `index`, using `layout` to locate it.
pub fn read_raw_frame_at(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    index: usize,
    layout: PlaneLayout,
) -> Result<LumaFrame> {
    let path = path.as_ref();
    if width == 0 || height == 0 {
        return Err(VsdeError::invalid(format!(
            "frame dimensions must be nonzero, got {width}x{height}"
        )));
    }
    let plane = (width * height) as u64;
    let offset = index as u64 * layout.frame_stride(width, height);
    let mut f = File::open(path).map_err(|e| VsdeError::io(path, e))?;
    let available = f.metadata().map_err(|e| VsdeError::io(path, e))?.len();
    if available < offset + plane {
        return Err(VsdeError::TruncatedInput {
            path: path.to_path_buf(),
            needed: offset + plane,
            available,
        });
    }
    f.seek(SeekFrom::Start(offset))
        .map_err(|e| VsdeError::io(path, e))?;
    let mut samples = vec![0u8; plane as usize];
    f.read_exact(&mut samples).map_err(|e| VsdeError::io(path, e))?;
    LumaFrame::new(width, height, samples)
}

/// Writes a mask-like plane where `true` maps to 255 and `false` to 0.
pub fn write_binary_plane(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    bits: impl IntoIterator<Item = bool>,
) -> Result<()> {
    let samples: Vec<u8> = bits.into_iter().map(|b| if b { 255 } else { 0 }).collect();
    LumaFrame::new(width, height, samples)?.write_raw(path)
}
