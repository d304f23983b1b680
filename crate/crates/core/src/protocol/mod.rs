//! Framed binary protocol for the serial links between the central
//! computer and the two subsystem controllers.

mod codec;
mod crc;
mod message;

pub use codec::{encode, DecodeError, DecodeErrorKind, Decoded, Decoder, EncodeError, FRAME_OVERHEAD, MAX_FRAME, MAX_PAYLOAD, SYNC};
pub use crc::crc16;
pub use message::*;
