//! Canonical length-prefixed byte encoding.
//!
//! Every wire payload is a flat list of fields, each framed as a 4-byte
//! big-endian length followed by the raw bytes. The same bytes serve as
//! the payload, the signing input, and the MAC input, so there is exactly
//! one encoding of every message.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("payload truncated at offset {0}")]
    Truncated(usize),
    #[error("trailing bytes after last field")]
    TrailingBytes,
    #[error("field has unexpected length {got}, expected {expected}")]
    BadFieldLength { expected: usize, got: usize },
    #[error("field value out of range: {0}")]
    OutOfRange(&'static str),
    #[error("unknown discriminant {0}")]
    UnknownDiscriminant(u64),
}

/// Appends length-prefixed fields to a byte buffer.
#[derive(Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, field: &[u8]) -> &mut Self {
        self.buf
            .extend_from_slice(&u32::try_from(field.len()).expect("field too long").to_be_bytes());
        self.buf.extend_from_slice(field);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.bytes(&v.to_be_bytes())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Reads length-prefixed fields back out of a byte buffer.
pub struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let hdr = self
            .data
            .get(self.pos..self.pos + 4)
            .ok_or(CodecError::Truncated(self.pos))?;
        let len = u32::from_be_bytes(hdr.try_into().unwrap()) as usize;
        let start = self.pos + 4;
        let field = self
            .data
            .get(start..start + len)
            .ok_or(CodecError::Truncated(start))?;
        self.pos = start + len;
        Ok(field)
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        let f = self.bytes()?;
        if f.len() != 8 {
            return Err(CodecError::BadFieldLength {
                expected: 8,
                got: f.len(),
            });
        }
        Ok(u64::from_be_bytes(f.try_into().unwrap()))
    }

    /// Fixed-width field, e.g. a padded group element.
    pub fn fixed(&mut self, width: usize) -> Result<&'a [u8], CodecError> {
        let f = self.bytes()?;
        if f.len() != width {
            return Err(CodecError::BadFieldLength {
                expected: width,
                got: f.len(),
            });
        }
        Ok(f)
    }

    pub fn expect_end(&self) -> Result<(), CodecError> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes)
        }
    }
}
