//! Frame encoder and incremental decoder.
//!
//! ```text
//! +------+------+-----+------+---------------+--------+
//! | 0xAA | 0x55 | len | type | payload (len) | crc BE |
//! +------+------+-----+------+---------------+--------+
//! ```
//!
//! The CRC covers `len`, `type` and the payload.

use super::crc::crc16;
use super::message::{InvalidMessage, Message};

pub const SYNC: [u8; 2] = [0xAA, 0x55];
pub const MAX_PAYLOAD: usize = 64;
/// Sync, length, type and CRC.
pub const FRAME_OVERHEAD: usize = 6;
pub const MAX_FRAME: usize = FRAME_OVERHEAD + MAX_PAYLOAD;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("refusing to encode {message:?}: {reason}")]
pub struct EncodeError {
    pub message: Message,
    #[source]
    pub reason: InvalidMessage,
}

pub fn encode(message: &Message) -> Result<Vec<u8>, EncodeError> {
    message
        .validate()
        .map_err(|reason| EncodeError { message: *message, reason })?;
    let mut frame = Vec::with_capacity(MAX_FRAME);
    frame.extend(SYNC);
    frame.push(0);
    frame.push(message.type_id());
    message.write_payload(&mut frame);
    let len = frame.len() - 4;
    debug_assert!(len <= MAX_PAYLOAD);
    frame[2] = len as u8;
    let crc = crc16(&frame[2..]);
    frame.extend(crc.to_be_bytes());
    Ok(frame)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeErrorKind {
    BadCrc,
    UnknownType(u8),
    LengthOverflow(u8),
    /// Frame passed its CRC but the payload does not fit the type's layout
    /// or violates a field range.
    BadPayload(u8),
}

/// A decode failure at `offset`, the stream position of the frame's first
/// sync byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeError {
    pub kind: DecodeErrorKind,
    pub offset: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Decoded {
    pub messages: Vec<Message>,
    pub errors: Vec<DecodeError>,
}

/// Per-stream decoder state. Never holds more than one maximal frame.
#[derive(Clone, Debug, Default)]
pub struct Decoder {
    buf: Vec<u8>,
    /// Stream offset of `buf[0]`.
    offset: u64,
}

enum Scan {
    NeedMore,
    DropByte(Option<DecodeErrorKind>),
    Frame(usize, Result<Message, DecodeErrorKind>),
}

impl Decoder {
    pub fn new() -> Decoder {
        Decoder { buf: Vec::with_capacity(MAX_FRAME), offset: 0 }
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// Feeds bytes in arbitrary chunks and returns whatever completed.
    pub fn feed(&mut self, bytes: &[u8]) -> Decoded {
        let mut out = Decoded::default();
        for &b in bytes {
            self.buf.push(b);
            self.drain(&mut out);
        }
        out
    }

    fn drain(&mut self, out: &mut Decoded) {
        loop {
            match self.scan() {
                Scan::NeedMore => return,
                Scan::DropByte(err) => {
                    if let Some(kind) = err {
                        out.errors.push(DecodeError { kind, offset: self.offset });
                    }
                    self.consume(1);
                }
                Scan::Frame(len, Ok(m)) => {
                    out.messages.push(m);
                    self.consume(len);
                }
                Scan::Frame(len, Err(kind)) => {
                    out.errors.push(DecodeError { kind, offset: self.offset });
                    self.consume(len);
                }
            }
        }
    }

    fn scan(&self) -> Scan {
        let b = &self.buf;
        if b.is_empty() {
            return Scan::NeedMore;
        }
        if b[0] != SYNC[0] {
            return Scan::DropByte(None);
        }
        if b.len() < 2 {
            return Scan::NeedMore;
        }
        if b[1] != SYNC[1] {
            return Scan::DropByte(None);
        }
        if b.len() < 3 {
            return Scan::NeedMore;
        }
        let len = b[2] as usize;
        if len > MAX_PAYLOAD {
            return Scan::DropByte(Some(DecodeErrorKind::LengthOverflow(b[2])));
        }
        let total = FRAME_OVERHEAD + len;
        if b.len() < total {
            return Scan::NeedMore;
        }
        let crc = u16::from_be_bytes([b[total - 2], b[total - 1]]);
        if crc16(&b[2..total - 2]) != crc {
            return Scan::DropByte(Some(DecodeErrorKind::BadCrc));
        }
        let type_id = b[3];
        let payload = &b[4..total - 2];
        let result = match Message::payload_len(type_id) {
            None => Err(DecodeErrorKind::UnknownType(type_id)),
            Some(n) if n != len => Err(DecodeErrorKind::BadPayload(type_id)),
            Some(_) => Message::read_payload(type_id, payload)
                .filter(|m| m.validate().is_ok())
                .ok_or(DecodeErrorKind::BadPayload(type_id)),
        };
        Scan::Frame(total, result)
    }

    fn consume(&mut self, n: usize) {
        self.buf.drain(..n);
        self.offset += n as u64;
    }
}
