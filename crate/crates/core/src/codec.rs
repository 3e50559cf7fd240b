//! Block-based inter-frame codec with runtime motion metadata.
//!
//! The stream is organized as GOPs: an intra frame stored as a raw plane,
//! followed by predicted frames stored as per-block integer motion vectors
//! plus a lossless 16-bit residual plane. Each predicted frame references
//! the immediately preceding reconstructed frame.
//!
//! Decoding is a single sequential pass. Alongside every reconstructed
//! P-frame the decoder surfaces the motion field (with per-block SAD) and
//! the residual plane; this is the metadata channel the rest of the
//! pipeline is driven by.
//!
//! On-disk layout (`CSBS`, all integers little-endian):
//!
//! ```text
//! "CSBS" | u32 width | u32 height | u32 fps | u32 frame_count
//!        | u16 gop_size | u16 block_size | u16 search_radius
//! per frame:
//!   u8 frame_type (0 = I, 1 = P)
//!   I body: width*height bytes (row-major, unpadded)
//!   P body: blocks row-major over the padded grid, each:
//!           i16 dx | i16 dy | block_size^2 x i16 residual samples
//! ```
//!
//! Frames whose dimensions are not multiples of `block_size` are padded by
//! edge replication before encoding and cropped after reconstruction; the
//! header always carries the unpadded dimensions.

use crate::bytes::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::video::{Frame, RawVideo};

pub const BITSTREAM_MAGIC: [u8; 4] = *b"CSBS";

/// Hard cap keeping per-block SAD inside u32.
const MAX_BLOCK_SIZE: u16 = 256;

/// Per-block displacement into the reference frame.
///
/// The predicted block for a block at `(x, y)` is the reference window at
/// `(x + dx, y + dy)`, sampled with coordinates clamped to the frame bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MotionVector {
    pub dx: i16,
    pub dy: i16,
}

impl MotionVector {
    pub fn is_zero(&self) -> bool {
        self.dx == 0 && self.dy == 0
    }

    /// Squared Euclidean length, exact in integer arithmetic.
    pub fn magnitude_sq(&self) -> i64 {
        let dx = self.dx as i64;
        let dy = self.dy as i64;
        dx * dx + dy * dy
    }
}

/// Euclidean motion magnitude in pixels.
pub fn motion_magnitude(mv: MotionVector) -> f64 {
    (mv.magnitude_sq() as f64).sqrt()
}

/// Block-level motion vectors and residual energies for one P-frame.
///
/// `sad[m]` is the sum of absolute differences between block `m` and its
/// motion-compensated prediction, i.e. the residual energy left after
/// applying `grid[m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionField {
    block_size: u16,
    grid_w: u32,
    grid_h: u32,
    vectors: Vec<MotionVector>,
    sad: Vec<u32>,
}

impl MotionField {
    pub fn block_size(&self) -> u16 {
        self.block_size
    }

    pub fn grid_w(&self) -> u32 {
        self.grid_w
    }

    pub fn grid_h(&self) -> u32 {
        self.grid_h
    }

    /// Width of the (padded) pixel area the grid covers.
    pub fn coverage_w(&self) -> u32 {
        self.grid_w * self.block_size as u32
    }

    pub fn coverage_h(&self) -> u32 {
        self.grid_h * self.block_size as u32
    }

    #[inline]
    pub fn vector(&self, bx: u32, by: u32) -> MotionVector {
        self.vectors[(by * self.grid_w + bx) as usize]
    }

    #[inline]
    pub fn sad(&self, bx: u32, by: u32) -> u32 {
        self.sad[(by * self.grid_w + bx) as usize]
    }

    pub fn vectors(&self) -> &[MotionVector] {
        &self.vectors
    }

    pub fn sads(&self) -> &[u32] {
        &self.sad
    }
}

/// Lossless 16-bit residual plane over the padded frame area.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualPlane {
    width: u32,
    height: u32,
    data: Vec<i16>,
}

impl ResidualPlane {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn sample(&self, x: u32, y: u32) -> i16 {
        self.data[(y * self.width + x) as usize]
    }

    pub fn data(&self) -> &[i16] {
        &self.data
    }
}

/// One GOP: an intra frame plus the motion/residual payloads of the
/// predicted frames that follow it.
#[derive(Debug, Clone)]
pub struct GopUnit {
    pub i_frame: Frame,
    pub p_frames: Vec<(MotionField, ResidualPlane)>,
}

/// Frame payload as stored in the bitstream.
#[derive(Debug, Clone)]
pub enum EncodedFrame {
    /// Unpadded raw plane.
    Intra(Frame),
    /// Motion field and residual plane over the padded grid.
    Predicted(MotionField, ResidualPlane),
}

impl EncodedFrame {
    pub fn frame_type(&self) -> FrameType {
        match self {
            EncodedFrame::Intra(_) => FrameType::I,
            EncodedFrame::Predicted(..) => FrameType::P,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameType {
    I,
    P,
}

impl std::fmt::Display for FrameType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameType::I => write!(f, "I"),
            FrameType::P => write!(f, "P"),
        }
    }
}

/// Stream-level parameters shared by every frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitstreamHeader {
    pub width: u32,
    pub height: u32,
    pub fps: u32,
    pub frame_count: u32,
    pub gop_size: u16,
    pub block_size: u16,
    pub search_radius: u16,
}

impl BitstreamHeader {
    pub fn padded_width(&self) -> u32 {
        pad_up(self.width, self.block_size)
    }

    pub fn padded_height(&self) -> u32 {
        pad_up(self.height, self.block_size)
    }

    pub fn blocks_per_row(&self) -> u32 {
        self.padded_width() / self.block_size as u32
    }

    pub fn blocks_per_col(&self) -> u32 {
        self.padded_height() / self.block_size as u32
    }
}

/// A parsed or freshly encoded compressed stream.
#[derive(Debug, Clone)]
pub struct Bitstream {
    pub header: BitstreamHeader,
    pub frames: Vec<EncodedFrame>,
}

fn pad_up(v: u32, multiple: u16) -> u32 {
    let m = multiple as u32;
    v.div_ceil(m) * m
}

// ---------------------------------------------------------------------------
// Motion estimation
// ---------------------------------------------------------------------------

/// SAD between the block at `(bx0, by0)` in `current` and the reference
/// window at `(bx0 + dx, by0 + dy)`, sampling the reference with clamped
/// coordinates.
fn block_sad(
    current: &Frame,
    reference: &Frame,
    bx0: u32,
    by0: u32,
    block: u32,
    dx: i32,
    dy: i32,
) -> u32 {
    let w = current.width() as i64;
    let h = current.height() as i64;
    let rx0 = bx0 as i64 + dx as i64;
    let ry0 = by0 as i64 + dy as i64;

    let cur = current.data();
    let refd = reference.data();
    let stride = current.width() as usize;

    let mut sad = 0u32;
    if rx0 >= 0 && ry0 >= 0 && rx0 + block as i64 <= w && ry0 + block as i64 <= h {
        // In-bounds fast path: straight row slices.
        for row in 0..block as usize {
            let c_off = (by0 as usize + row) * stride + bx0 as usize;
            let r_off = (ry0 as usize + row) * stride + rx0 as usize;
            let crow = &cur[c_off..c_off + block as usize];
            let rrow = &refd[r_off..r_off + block as usize];
            for (c, r) in crow.iter().zip(rrow) {
                sad += (*c as i32 - *r as i32).unsigned_abs();
            }
        }
    } else {
        for row in 0..block {
            for col in 0..block {
                let c = current.sample(bx0 + col, by0 + row) as i32;
                let r = reference.sample_clamped(rx0 + col as i64, ry0 + row as i64) as i32;
                sad += (c - r).unsigned_abs();
            }
        }
    }
    sad
}

/// Full-search integer-pel block matching.
///
/// For each block this scans every offset in `[-search_radius, search_radius]^2`
/// (dy outer, dx inner) and keeps the candidate with the lowest SAD, breaking
/// ties by smaller squared magnitude and then by scan order (first seen wins).
pub fn estimate_motion(
    current: &Frame,
    reference: &Frame,
    block_size: u16,
    search_radius: u16,
) -> Result<MotionField> {
    if current.width() != reference.width() || current.height() != reference.height() {
        return Err(Error::DimensionMismatch(format!(
            "current {}x{} vs reference {}x{}",
            current.width(),
            current.height(),
            reference.width(),
            reference.height()
        )));
    }
    if block_size == 0 || block_size > MAX_BLOCK_SIZE {
        return Err(Error::Config(format!(
            "block_size must be in 1..={MAX_BLOCK_SIZE}, got {block_size}"
        )));
    }
    let bs = block_size as u32;
    if current.width() % bs != 0 || current.height() % bs != 0 {
        return Err(Error::DimensionMismatch(format!(
            "block_size {} does not divide {}x{}",
            block_size,
            current.width(),
            current.height()
        )));
    }

    let grid_w = current.width() / bs;
    let grid_h = current.height() / bs;
    let r = search_radius as i32;
    let mut vectors = Vec::with_capacity((grid_w * grid_h) as usize);
    let mut sads = Vec::with_capacity((grid_w * grid_h) as usize);

    for by in 0..grid_h {
        for bx in 0..grid_w {
            let bx0 = bx * bs;
            let by0 = by * bs;
            let mut best_sad = u32::MAX;
            let mut best_mag = i64::MAX;
            let mut best = MotionVector::default();
            for dy in -r..=r {
                for dx in -r..=r {
                    let sad = block_sad(current, reference, bx0, by0, bs, dx, dy);
                    let mag = (dx as i64) * (dx as i64) + (dy as i64) * (dy as i64);
                    if sad < best_sad || (sad == best_sad && mag < best_mag) {
                        best_sad = sad;
                        best_mag = mag;
                        best = MotionVector {
                            dx: dx as i16,
                            dy: dy as i16,
                        };
                    }
                }
            }
            vectors.push(best);
            sads.push(best_sad);
        }
    }

    Ok(MotionField {
        block_size,
        grid_w,
        grid_h,
        vectors,
        sad: sads,
    })
}

/// Motion-compensated prediction of `current`'s frame area from `reference`.
pub fn predict(reference: &Frame, field: &MotionField) -> Frame {
    let bs = field.block_size as u32;
    let w = field.coverage_w();
    let h = field.coverage_h();
    let mut out = Frame::filled(w, h, 0);
    for by in 0..field.grid_h {
        for bx in 0..field.grid_w {
            let mv = field.vector(bx, by);
            let bx0 = (bx * bs) as i64;
            let by0 = (by * bs) as i64;
            for row in 0..bs as i64 {
                for col in 0..bs as i64 {
                    let v = reference.sample_clamped(bx0 + col + mv.dx as i64, by0 + row + mv.dy as i64);
                    out.set_sample((bx0 + col) as u32, (by0 + row) as u32, v);
                }
            }
        }
    }
    out
}

/// Pixel-wise difference between `current` and its motion-compensated
/// prediction. Per-block absolute sums of the result equal `field.sad`.
pub fn compute_residual(
    current: &Frame,
    reference: &Frame,
    field: &MotionField,
) -> Result<ResidualPlane> {
    if current.width() != field.coverage_w() || current.height() != field.coverage_h() {
        return Err(Error::DimensionMismatch(format!(
            "current {}x{} vs field coverage {}x{}",
            current.width(),
            current.height(),
            field.coverage_w(),
            field.coverage_h()
        )));
    }
    if reference.width() != current.width() || reference.height() != current.height() {
        return Err(Error::DimensionMismatch(format!(
            "reference {}x{} vs current {}x{}",
            reference.width(),
            reference.height(),
            current.width(),
            current.height()
        )));
    }
    let prediction = predict(reference, field);
    let data = current
        .data()
        .iter()
        .zip(prediction.data())
        .map(|(&c, &p)| c as i16 - p as i16)
        .collect();
    Ok(ResidualPlane {
        width: current.width(),
        height: current.height(),
        data,
    })
}

/// Exact reconstruction: prediction plus residual.
pub fn reconstruct(reference: &Frame, field: &MotionField, residual: &ResidualPlane) -> Result<Frame> {
    let prediction = predict(reference, field);
    if residual.width() != prediction.width() || residual.height() != prediction.height() {
        return Err(Error::DimensionMismatch(format!(
            "residual {}x{} vs prediction {}x{}",
            residual.width(),
            residual.height(),
            prediction.width(),
            prediction.height()
        )));
    }
    let mut data = Vec::with_capacity(prediction.data().len());
    for (i, (&p, &r)) in prediction.data().iter().zip(residual.data()).enumerate() {
        let v = p as i32 + r as i32;
        if !(0..=255).contains(&v) {
            return Err(Error::InvalidInput(format!(
                "reconstructed sample {v} out of range at pixel index {i}"
            )));
        }
        data.push(v as u8);
    }
    Frame::new(prediction.width(), prediction.height(), data)
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

/// Encode a raw clip into a GOP-structured bitstream.
///
/// Frame 0 of each GOP is stored intra; every other frame is predicted from
/// the immediately preceding reconstructed frame. Residuals are lossless, so
/// the reconstructed reference equals the (padded) source frame and the
/// encoder can chain predictions off the source directly.
pub fn encode(
    video: &RawVideo,
    gop_size: u16,
    block_size: u16,
    search_radius: u16,
) -> Result<Bitstream> {
    if video.frames.is_empty() {
        return Err(Error::InvalidInput("cannot encode an empty video".into()));
    }
    if gop_size == 0 {
        return Err(Error::Config("gop_size must be at least 1".into()));
    }
    if block_size == 0 || block_size > MAX_BLOCK_SIZE {
        return Err(Error::Config(format!(
            "block_size must be in 1..={MAX_BLOCK_SIZE}, got {block_size}"
        )));
    }

    let header = BitstreamHeader {
        width: video.width,
        height: video.height,
        fps: video.fps,
        frame_count: video.frames.len() as u32,
        gop_size,
        block_size,
        search_radius,
    };
    let pw = header.padded_width();
    let ph = header.padded_height();

    let mut frames = Vec::with_capacity(video.frames.len());
    let mut reference: Option<Frame> = None;
    for (idx, frame) in video.frames.iter().enumerate() {
        let padded = frame.pad_to(pw, ph);
        if idx % gop_size as usize == 0 {
            frames.push(EncodedFrame::Intra(frame.clone()));
        } else {
            let prev = reference.as_ref().expect("P-frame always has a reference");
            let field = estimate_motion(&padded, prev, block_size, search_radius)?;
            let residual = compute_residual(&padded, prev, &field)?;
            frames.push(EncodedFrame::Predicted(field, residual));
        }
        reference = Some(padded);
    }

    Ok(Bitstream { header, frames })
}

/// Group a bitstream's frames into GOP units.
pub fn gop_units(bitstream: &Bitstream) -> Result<Vec<GopUnit>> {
    let mut units: Vec<GopUnit> = Vec::new();
    for (idx, frame) in bitstream.frames.iter().enumerate() {
        match frame {
            EncodedFrame::Intra(plane) => units.push(GopUnit {
                i_frame: plane.clone(),
                p_frames: Vec::new(),
            }),
            EncodedFrame::Predicted(field, residual) => match units.last_mut() {
                Some(unit) => unit.p_frames.push((field.clone(), residual.clone())),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "frame {idx} is predicted but no I-frame precedes it"
                    )))
                }
            },
        }
    }
    Ok(units)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

impl Bitstream {
    /// Serialized byte size, header included.
    pub fn serialized_len(&self) -> usize {
        let h = &self.header;
        let plane = (h.width as usize) * (h.height as usize);
        let blocks = (h.blocks_per_row() * h.blocks_per_col()) as usize;
        let p_body = blocks * (4 + 2 * (h.block_size as usize) * (h.block_size as usize));
        self.frames
            .iter()
            .map(|f| match f {
                EncodedFrame::Intra(_) => 1 + plane,
                EncodedFrame::Predicted(..) => 1 + p_body,
            })
            .sum::<usize>()
            + 26
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut w = ByteWriter::with_capacity(self.serialized_len());
        w.write_bytes(&BITSTREAM_MAGIC);
        w.write_u32(h.width);
        w.write_u32(h.height);
        w.write_u32(h.fps);
        w.write_u32(h.frame_count);
        w.write_u16(h.gop_size);
        w.write_u16(h.block_size);
        w.write_u16(h.search_radius);

        let bs = h.block_size as u32;
        for frame in &self.frames {
            match frame {
                EncodedFrame::Intra(plane) => {
                    w.write_u8(0);
                    w.write_bytes(plane.data());
                }
                EncodedFrame::Predicted(field, residual) => {
                    w.write_u8(1);
                    for by in 0..field.grid_h() {
                        for bx in 0..field.grid_w() {
                            let mv = field.vector(bx, by);
                            w.write_i16(mv.dx);
                            w.write_i16(mv.dy);
                            for row in 0..bs {
                                for col in 0..bs {
                                    w.write_i16(residual.sample(bx * bs + col, by * bs + row));
                                }
                            }
                        }
                    }
                }
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.expect_magic(BITSTREAM_MAGIC)?;
        let width = r.read_u32()?;
        let height = r.read_u32()?;
        let fps = r.read_u32()?;
        let frame_count = r.read_u32()?;
        let gop_size = r.read_u16()?;
        let block_size = r.read_u16()?;
        let search_radius = r.read_u16()?;
        if width == 0 || height == 0 || fps == 0 {
            return Err(Error::Malformed {
                offset: 4,
                detail: format!("invalid header: width={width} height={height} fps={fps}"),
            });
        }
        if gop_size == 0 || block_size == 0 || block_size > MAX_BLOCK_SIZE {
            return Err(Error::Malformed {
                offset: 20,
                detail: format!(
                    "invalid header: gop_size={gop_size} block_size={block_size}"
                ),
            });
        }
        let header = BitstreamHeader {
            width,
            height,
            fps,
            frame_count,
            gop_size,
            block_size,
            search_radius,
        };

        let plane = (width as usize) * (height as usize);
        let grid_w = header.blocks_per_row();
        let grid_h = header.blocks_per_col();
        let pw = header.padded_width();
        let ph = header.padded_height();
        let bs = block_size as u32;

        let mut frames = Vec::with_capacity(frame_count as usize);
        for idx in 0..frame_count {
            let type_offset = r.offset();
            let frame_type = r.read_u8()?;
            match frame_type {
                0 => {
                    let data = r.read_bytes(plane)?.to_vec();
                    frames.push(EncodedFrame::Intra(Frame::new(width, height, data)?));
                }
                1 => {
                    let mut vectors = Vec::with_capacity((grid_w * grid_h) as usize);
                    let mut sads = Vec::with_capacity((grid_w * grid_h) as usize);
                    let mut residual = vec![0i16; (pw * ph) as usize];
                    for by in 0..grid_h {
                        for bx in 0..grid_w {
                            let mv_offset = r.offset();
                            let dx = r.read_i16()?;
                            let dy = r.read_i16()?;
                            let radius = search_radius as i32;
                            if (dx as i32).abs() > radius || (dy as i32).abs() > radius {
                                return Err(Error::Malformed {
                                    offset: mv_offset,
                                    detail: format!(
                                        "motion vector ({dx},{dy}) exceeds search radius {radius} in frame {idx}"
                                    ),
                                });
                            }
                            vectors.push(MotionVector { dx, dy });
                            let mut sad = 0u32;
                            for row in 0..bs {
                                for col in 0..bs {
                                    let v = r.read_i16()?;
                                    sad += (v as i32).unsigned_abs();
                                    residual[((by * bs + row) * pw + bx * bs + col) as usize] = v;
                                }
                            }
                            sads.push(sad);
                        }
                    }
                    let field = MotionField {
                        block_size,
                        grid_w,
                        grid_h,
                        vectors,
                        sad: sads,
                    };
                    let residual = ResidualPlane {
                        width: pw,
                        height: ph,
                        data: residual,
                    };
                    frames.push(EncodedFrame::Predicted(field, residual));
                }
                t => {
                    return Err(Error::Malformed {
                        offset: type_offset,
                        detail: format!("unknown frame type {t} in frame {idx}"),
                    })
                }
            }
        }
        r.expect_end()?;
        Ok(Bitstream { header, frames })
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

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

/// One decoded frame plus its compressed-domain metadata.
#[derive(Debug, Clone)]
pub struct DecodedFrame {
    pub index: usize,
    /// Reconstructed frame at the original (unpadded) dimensions.
    pub frame: Frame,
    pub frame_type: FrameType,
    /// Motion metadata; present on P-frames only.
    pub motion: Option<MotionField>,
    /// Residual plane over the padded grid; present on P-frames only.
    pub residual: Option<ResidualPlane>,
}

/// Sequential single-pass decoder.
///
/// Yields every frame exactly once, in stream order. P-frame reconstruction
/// chains off the previous reconstructed frame, so iteration order is the
/// dependency order.
pub struct Decoder<'a> {
    bitstream: &'a Bitstream,
    next_index: usize,
    reference: Option<Frame>,
}

impl<'a> Decoder<'a> {
    pub fn new(bitstream: &'a Bitstream) -> Self {
        Self {
            bitstream,
            next_index: 0,
            reference: None,
        }
    }

    pub fn header(&self) -> &BitstreamHeader {
        &self.bitstream.header
    }
}

impl<'a> Iterator for Decoder<'a> {
    type Item = Result<DecodedFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        let idx = self.next_index;
        let encoded = self.bitstream.frames.get(idx)?;
        self.next_index += 1;
        let h = &self.bitstream.header;

        let step = || -> Result<DecodedFrame> {
            match encoded {
                EncodedFrame::Intra(plane) => {
                    self.reference = Some(plane.pad_to(h.padded_width(), h.padded_height()));
                    Ok(DecodedFrame {
                        index: idx,
                        frame: plane.clone(),
                        frame_type: FrameType::I,
                        motion: None,
                        residual: None,
                    })
                }
                EncodedFrame::Predicted(field, residual) => {
                    let reference = self.reference.as_ref().ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "frame {idx} is predicted but no I-frame precedes it"
                        ))
                    })?;
                    let padded = reconstruct(reference, field, residual)?;
                    let frame = padded.crop_to(h.width, h.height);
                    self.reference = Some(padded);
                    Ok(DecodedFrame {
                        index: idx,
                        frame,
                        frame_type: FrameType::P,
                        motion: Some(field.clone()),
                        residual: Some(residual.clone()),
                    })
                }
            }
        };
        Some(step())
    }
}

/// Decode an entire stream into memory.
pub fn decode_all(bitstream: &Bitstream) -> Result<Vec<DecodedFrame>> {
    Decoder::new(bitstream).collect()
}

/// Decode and reassemble the original clip; the round-trip inverse of
/// [`encode`].
pub fn decode_to_video(bitstream: &Bitstream) -> Result<RawVideo> {
    let frames = decode_all(bitstream)?
        .into_iter()
        .map(|d| d.frame)
        .collect();
    RawVideo::new(
        bitstream.header.width,
        bitstream.header.height,
        bitstream.header.fps,
        frames,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_frame(width: u32, height: u32, rng: &mut ChaCha8Rng) -> Frame {
        let data = (0..width * height).map(|_| rng.random()).collect();
        Frame::new(width, height, data).unwrap()
    }

    fn noise_video(width: u32, height: u32, n: usize, seed: u64) -> RawVideo {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = (0..n).map(|_| noise_frame(width, height, &mut rng)).collect();
        RawVideo::new(width, height, 2, frames).unwrap()
    }

    #[test]
    fn identical_frames_give_zero_motion_and_sad() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frame = noise_frame(32, 16, &mut rng);
        let field = estimate_motion(&frame, &frame, 8, 3).unwrap();
        assert!(field.vectors().iter().all(|mv| mv.is_zero()));
        assert!(field.sads().iter().all(|&s| s == 0));
    }

    #[test]
    fn shifted_content_recovers_the_shift() {
        // current(x) = reference(x - 2): interior blocks match exactly at
        // (-2, 0) under the prediction convention.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reference = noise_frame(40, 24, &mut rng);
        let mut current = reference.clone();
        for y in 0..24 {
            for x in 0..40u32 {
                let sx = x.saturating_sub(2).min(39);
                current.set_sample(x, y, reference.sample(sx, y));
            }
        }
        let field = estimate_motion(&current, &reference, 8, 3).unwrap();
        for by in 0..field.grid_h() {
            for bx in 1..field.grid_w() {
                assert_eq!(
                    field.vector(bx, by),
                    MotionVector { dx: -2, dy: 0 },
                    "block ({bx},{by})"
                );
                assert_eq!(field.sad(bx, by), 0, "block ({bx},{by})");
            }
        }
    }

    #[test]
    fn chosen_mv_never_beats_zero_motion() {
        let a = noise_video(32, 32, 1, 3);
        let b = noise_video(32, 32, 1, 4);
        let field = estimate_motion(&a.frames[0], &b.frames[0], 8, 2).unwrap();
        for by in 0..field.grid_h() {
            for bx in 0..field.grid_w() {
                let zero = block_sad(&a.frames[0], &b.frames[0], bx * 8, by * 8, 8, 0, 0);
                assert!(field.sad(bx, by) <= zero);
            }
        }
    }

    #[test]
    fn residual_block_sums_match_field_sad() {
        let a = noise_video(16, 16, 1, 5);
        let b = noise_video(16, 16, 1, 6);
        let field = estimate_motion(&a.frames[0], &b.frames[0], 8, 2).unwrap();
        let residual = compute_residual(&a.frames[0], &b.frames[0], &field).unwrap();
        for by in 0..field.grid_h() {
            for bx in 0..field.grid_w() {
                let mut sum = 0u32;
                for row in 0..8 {
                    for col in 0..8 {
                        sum += (residual.sample(bx * 8 + col, by * 8 + row) as i32).unsigned_abs();
                    }
                }
                assert_eq!(sum, field.sad(bx, by));
            }
        }
    }

    #[test]
    fn reconstruction_is_exact() {
        let a = noise_video(24, 16, 1, 7);
        let b = noise_video(24, 16, 1, 8);
        let field = estimate_motion(&a.frames[0], &b.frames[0], 8, 2).unwrap();
        let residual = compute_residual(&a.frames[0], &b.frames[0], &field).unwrap();
        let rec = reconstruct(&b.frames[0], &field, &residual).unwrap();
        assert_eq!(rec, a.frames[0]);
    }

    #[test]
    fn motion_magnitude_examples() {
        assert_eq!(motion_magnitude(MotionVector { dx: 0, dy: 0 }), 0.0);
        assert_eq!(motion_magnitude(MotionVector { dx: 3, dy: 4 }), 5.0);
        assert_eq!(motion_magnitude(MotionVector { dx: -2, dy: 0 }), 2.0);
    }

    #[test]
    fn single_frame_video_encodes_to_one_intra_frame() {
        let video = noise_video(16, 12, 1, 9);
        let bs = encode(&video, 16, 8, 2).unwrap();
        assert_eq!(bs.frames.len(), 1);
        assert!(matches!(bs.frames[0], EncodedFrame::Intra(_)));
        // magic+header (26) + frame type byte + raw plane
        assert_eq!(bs.to_bytes().len(), 26 + 1 + 16 * 12);
    }

    #[test]
    fn static_video_has_zero_vectors_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let frame = noise_frame(32, 32, &mut rng);
        let frames = vec![frame; 16];
        let video = RawVideo::new(32, 32, 2, frames).unwrap();
        let bs = encode(&video, 16, 8, 3).unwrap();
        assert_eq!(bs.frames.len(), 16);
        assert!(matches!(bs.frames[0], EncodedFrame::Intra(_)));
        for frame in &bs.frames[1..] {
            match frame {
                EncodedFrame::Predicted(field, residual) => {
                    assert!(field.vectors().iter().all(|mv| mv.is_zero()));
                    assert!(field.sads().iter().all(|&s| s == 0));
                    assert!(residual.data().iter().all(|&v| v == 0));
                }
                EncodedFrame::Intra(_) => panic!("expected P-frame"),
            }
        }
    }

    #[test]
    fn round_trip_with_padding_is_bit_exact() {
        // 21x13 is not a multiple of 8 in either dimension.
        let video = noise_video(21, 13, 9, 11);
        let bs = encode(&video, 4, 8, 2).unwrap();
        let parsed = Bitstream::from_bytes(&bs.to_bytes()).unwrap();
        let decoded = decode_to_video(&parsed).unwrap();
        assert_eq!(decoded, video);
    }

    #[test]
    fn decoder_yields_each_frame_once_with_metadata() {
        let video = noise_video(16, 16, 6, 12);
        let bs = encode(&video, 3, 8, 1).unwrap();
        let decoded = decode_all(&bs).unwrap();
        assert_eq!(decoded.len(), 6);
        for (i, d) in decoded.iter().enumerate() {
            assert_eq!(d.index, i);
            let expect_i = i % 3 == 0;
            assert_eq!(d.frame_type == FrameType::I, expect_i);
            assert_eq!(d.motion.is_some(), !expect_i);
            assert_eq!(d.residual.is_some(), !expect_i);
        }
    }

    #[test]
    fn corrupted_magic_reports_offset_zero() {
        let video = noise_video(16, 16, 2, 13);
        let mut bytes = encode(&video, 4, 8, 1).unwrap().to_bytes();
        bytes[0] = b'X';
        match Bitstream::from_bytes(&bytes) {
            Err(Error::BadMagic { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected bad magic, got {other:?}"),
        }
    }

    #[test]
    fn truncated_body_reports_offset() {
        let video = noise_video(16, 16, 2, 14);
        let mut bytes = encode(&video, 4, 8, 1).unwrap().to_bytes();
        let full = bytes.len();
        bytes.truncate(full - 5);
        match Bitstream::from_bytes(&bytes) {
            Err(Error::Truncated { offset, .. }) => assert_eq!(offset as usize, full - 5),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn oversized_motion_vector_is_rejected_with_offset() {
        let video = noise_video(16, 16, 2, 15);
        let mut bytes = encode(&video, 4, 8, 1).unwrap().to_bytes();
        // First P-frame block MV starts right after header + I-frame record.
        let mv_offset = 26 + 1 + 16 * 16 + 1;
        bytes[mv_offset..mv_offset + 2].copy_from_slice(&100i16.to_le_bytes());
        match Bitstream::from_bytes(&bytes) {
            Err(Error::Malformed { offset, .. }) => assert_eq!(offset as usize, mv_offset),
            other => panic!("expected malformed, got {other:?}"),
        }
    }

    #[test]
    fn gop_units_group_frames() {
        let video = noise_video(16, 16, 7, 16);
        let bs = encode(&video, 3, 8, 1).unwrap();
        let units = gop_units(&bs).unwrap();
        assert_eq!(units.len(), 3);
        assert_eq!(units[0].p_frames.len(), 2);
        assert_eq!(units[1].p_frames.len(), 2);
        assert_eq!(units[2].p_frames.len(), 0);
    }

    #[test]
    fn encoded_size_grows_sublinearly_on_static_content() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let frame = noise_frame(32, 32, &mut rng);
        let sizes: Vec<usize> = [2usize, 4, 8]
            .iter()
            .map(|&n| {
                let video = RawVideo::new(32, 32, 2, vec![frame.clone(); n]).unwrap();
                encode(&video, 16, 8, 2).unwrap().serialized_len()
            })
            .collect();
        // One I-frame plus constant per-P-frame overhead: equal increments.
        let d1 = sizes[1] - sizes[0];
        let d2 = sizes[2] - sizes[1];
        assert_eq!(d2, 2 * d1);
        let per_p = d1 / 2;
        assert_eq!(sizes[1], sizes[0] + 2 * per_p);
    }
}
