//! Little-endian byte readers/writers with offset-tracked errors.
//!
//! Both container formats in this crate are plain little-endian records, so
//! a small cursor that remembers its position is all the parsing machinery
//! we need. Every failure reports the byte offset it happened at.

use crate::error::{Error, Result};

/// Cursor over an in-memory byte slice.
pub struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    /// Current byte offset from the start of the buffer.
    pub fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Truncated {
                offset: self.offset(),
                needed: n - self.remaining(),
            });
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    /// Read a 4-byte magic and check it against `expected`.
    pub fn expect_magic(&mut self, expected: [u8; 4]) -> Result<()> {
        let offset = self.offset();
        let bytes = self.take(4)?;
        let found = [bytes[0], bytes[1], bytes[2], bytes[3]];
        if found != expected {
            return Err(Error::BadMagic {
                offset,
                expected,
                found,
            });
        }
        Ok(())
    }

    pub fn read_u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn read_u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    pub fn read_i16(&mut self) -> Result<i16> {
        let b = self.take(2)?;
        Ok(i16::from_le_bytes([b[0], b[1]]))
    }

    pub fn read_u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn read_bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        self.take(n)
    }

    /// Fail with [`Error::Malformed`] if any input is left unconsumed.
    pub fn expect_end(&self) -> Result<()> {
        if !self.is_empty() {
            return Err(Error::Malformed {
                offset: self.offset(),
                detail: format!("{} trailing byte(s) after final record", self.remaining()),
            });
        }
        Ok(())
    }
}

/// Append-only little-endian writer.
#[derive(Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        Self {
            buf: Vec::with_capacity(cap),
        }
    }

    pub fn write_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn write_u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_i16(&mut self, v: i16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_scalars() {
        let mut w = ByteWriter::new();
        w.write_u8(7);
        w.write_u16(0xBEEF);
        w.write_i16(-300);
        w.write_u32(0xDEAD_BEEF);
        let bytes = w.into_bytes();

        let mut r = ByteReader::new(&bytes);
        assert_eq!(r.read_u8().unwrap(), 7);
        assert_eq!(r.read_u16().unwrap(), 0xBEEF);
        assert_eq!(r.read_i16().unwrap(), -300);
        assert_eq!(r.read_u32().unwrap(), 0xDEAD_BEEF);
        r.expect_end().unwrap();
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = [1u8, 2];
        let mut r = ByteReader::new(&bytes);
        r.read_u8().unwrap();
        match r.read_u32() {
            Err(Error::Truncated { offset, needed }) => {
                assert_eq!(offset, 1);
                assert_eq!(needed, 3);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn magic_mismatch_reports_offset_zero() {
        let bytes = *b"XXXX";
        let mut r = ByteReader::new(&bytes);
        match r.expect_magic(*b"CSRV") {
            Err(Error::BadMagic { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected bad magic, got {other:?}"),
        }
    }
}
