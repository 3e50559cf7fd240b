//! Raw video frames and the `CSRV` container.
//!
//! Frames are single-plane 8-bit luma. The on-disk layout is:
//!
//! ```text
//! "CSRV" | u32 width | u32 height | u32 fps | u32 frame_count
//!        | frame_count x (width*height bytes, row-major)
//! ```
//!
//! All integers are little-endian.

use crate::bytes::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

pub const RAW_VIDEO_MAGIC: [u8; 4] = *b"CSRV";

/// One 8-bit luma plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::DimensionMismatch(format!(
                "frame plane has {} samples, expected {}x{}={}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; (width * height) as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn sample(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set_sample(&mut self, x: u32, y: u32, v: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.data[(y * self.width + x) as usize] = v;
    }

    /// Sample with coordinates clamped to the frame bounds, the edge
    /// handling used by motion-compensated prediction.
    #[inline]
    pub fn sample_clamped(&self, x: i64, y: i64) -> u8 {
        let cx = x.clamp(0, self.width as i64 - 1) as u32;
        let cy = y.clamp(0, self.height as i64 - 1) as u32;
        self.sample(cx, cy)
    }

    /// Grow the frame to `new_width` x `new_height` by replicating the last
    /// row/column. Returns a clone when no growth is required.
    pub fn pad_to(&self, new_width: u32, new_height: u32) -> Frame {
        assert!(new_width >= self.width && new_height >= self.height);
        if new_width == self.width && new_height == self.height {
            return self.clone();
        }
        let mut data = Vec::with_capacity((new_width * new_height) as usize);
        for y in 0..new_height {
            let sy = y.min(self.height - 1);
            let row = &self.data[(sy * self.width) as usize..((sy + 1) * self.width) as usize];
            data.extend_from_slice(row);
            let edge = row[row.len() - 1];
            data.extend(std::iter::repeat(edge).take((new_width - self.width) as usize));
        }
        Frame {
            width: new_width,
            height: new_height,
            data,
        }
    }

    /// Top-left crop, the inverse of [`Frame::pad_to`].
    pub fn crop_to(&self, new_width: u32, new_height: u32) -> Frame {
        assert!(new_width <= self.width && new_height <= self.height);
        if new_width == self.width && new_height == self.height {
            return self.clone();
        }
        let mut data = Vec::with_capacity((new_width * new_height) as usize);
        for y in 0..new_height {
            let start = (y * self.width) as usize;
            data.extend_from_slice(&self.data[start..start + new_width as usize]);
        }
        Frame {
            width: new_width,
            height: new_height,
            data,
        }
    }
}

/// An in-memory uncompressed video clip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawVideo {
    pub width: u32,
    pub height: u32,
    pub fps: u32,
    pub frames: Vec<Frame>,
}

impl RawVideo {
    pub fn new(width: u32, height: u32, fps: u32, frames: Vec<Frame>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(
                "video dimensions must be positive".into(),
            ));
        }
        if fps == 0 {
            return Err(Error::InvalidInput("fps must be positive".into()));
        }
        for (i, f) in frames.iter().enumerate() {
            if f.width() != width || f.height() != height {
                return Err(Error::DimensionMismatch(format!(
                    "frame {i} is {}x{}, video is {width}x{height}",
                    f.width(),
                    f.height()
                )));
            }
        }
        Ok(Self {
            width,
            height,
            fps,
            frames,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Serialized `CSRV` byte size, header included.
    pub fn serialized_len(&self) -> usize {
        20 + self.frames.len() * (self.width as usize) * (self.height as usize)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::with_capacity(self.serialized_len());
        w.write_bytes(&RAW_VIDEO_MAGIC);
        w.write_u32(self.width);
        w.write_u32(self.height);
        w.write_u32(self.fps);
        w.write_u32(self.frames.len() as u32);
        for f in &self.frames {
            w.write_bytes(f.data());
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.expect_magic(RAW_VIDEO_MAGIC)?;
        let width = r.read_u32()?;
        let height = r.read_u32()?;
        let fps = r.read_u32()?;
        let frame_count = r.read_u32()?;
        if width == 0 || height == 0 || fps == 0 {
            return Err(Error::Malformed {
                offset: 4,
                detail: format!("invalid header: width={width} height={height} fps={fps}"),
            });
        }
        let plane = (width as usize) * (height as usize);
        let mut frames = Vec::with_capacity(frame_count as usize);
        for _ in 0..frame_count {
            let data = r.read_bytes(plane)?.to_vec();
            frames.push(Frame {
                width,
                height,
                data,
            });
        }
        r.expect_end()?;
        RawVideo::new(width, height, fps, frames)
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}
