//! Wire format shared by both transports.
//!
//! A wire message is a concatenation of frames. Each frame is a 4-byte
//! little-endian length followed by `action: u32 LE`, `reply token: u64 LE`
//! and the serialized payload; the length covers those three fields.

use super::{Result, RuntimeError};

pub(crate) const HEADER_LEN: usize = 4 + 8;

/// Reply to an earlier request; the token names the waiting future.
pub(crate) const REPLY_ACTION: u32 = u32::MAX;
/// Point-to-point message of a collective operation.
pub(crate) const COLLECTIVE_ACTION: u32 = u32::MAX - 1;
/// User action ids must stay below this value.
pub(crate) const FIRST_SYSTEM_ACTION: u32 = u32::MAX - 15;

const SEQ_BITS: u32 = 48;

/// Packs the requesting locality and a per-locality sequence number.
/// Token 0 means no reply is expected.
pub(crate) fn make_token(source: u32, seq: u64) -> u64 {
    ((source as u64 + 1) << SEQ_BITS) | (seq & ((1 << SEQ_BITS) - 1))
}

pub(crate) fn token_source(token: u64) -> Option<u32> {
    match token >> SEQ_BITS {
        0 => None,
        s => Some((s - 1) as u32),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame<'a> {
    pub action: u32,
    pub token: u64,
    pub payload: &'a [u8],
}

pub fn encode_frame(buf: &mut Vec<u8>, action: u32, token: u64, payload: &[u8]) {
    let len = (HEADER_LEN + payload.len()) as u32;
    buf.reserve(4 + len as usize);
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(&action.to_le_bytes());
    buf.extend_from_slice(&token.to_le_bytes());
    buf.extend_from_slice(payload);
}

/// Splits a wire message into frames, borrowing payloads from `bytes`.
pub fn decode_frames(mut bytes: &[u8]) -> Result<Vec<Frame<'_>>> {
    let mut frames = Vec::new();
    while !bytes.is_empty() {
        let bad = || RuntimeError::Transport("truncated frame".into());
        let len = u32::from_le_bytes(bytes.get(..4).ok_or_else(bad)?.try_into().unwrap()) as usize;
        if len < HEADER_LEN {
            return Err(RuntimeError::Transport(format!("frame length {len} too short")));
        }
        let body = bytes.get(4..4 + len).ok_or_else(bad)?;
        frames.push(Frame {
            action: u32::from_le_bytes(body[..4].try_into().unwrap()),
            token: u64::from_le_bytes(body[4..12].try_into().unwrap()),
            payload: &body[12..],
        });
        bytes = &bytes[4 + len..];
    }
    Ok(frames)
}

pub(crate) fn serialize<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    bincode::serialize(value).map_err(|e| RuntimeError::Serialization(e.to_string()))
}

pub(crate) fn deserialize<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    bincode::deserialize(bytes).map_err(|e| RuntimeError::Serialization(e.to_string()))
}
