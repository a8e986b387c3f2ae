//! Packed `.1bm` format.
//!
//! ```text
//! {"n":250,"m":250,"seed":1,"norm_x":"41880000","source_id":null}\n
//! <ceil(m/8) payload bytes>
//! ```
//!
//! The header is one line of compact UTF-8 JSON with keys in the order shown.
//! `norm_x` is the 8-hex-digit bit pattern of the IEEE-754 single-precision
//! norm. Measurement `i` lives in bit `i % 8` (LSB first) of byte `i / 8`; a set
//! bit means `+1`. Pad bits in the last byte must be zero.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::SignMeasurements;
use crate::error::{Error, Result};

pub const FILE_EXTENSION: &str = "1bm";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    n: usize,
    m: usize,
    seed: u64,
    norm_x: String,
    source_id: Option<String>,
}

/// Number of payload bytes for `m` measurements.
pub fn payload_len(m: usize) -> usize {
    m.div_ceil(8)
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn pack(sm: &SignMeasurements) -> Vec<u8> {
    let header = Header {
        n: sm.n(),
        m: sm.m(),
        seed: sm.seed(),
        norm_x: format!("{:08x}", sm.norm_x().to_bits()),
        source_id: sm.source_id().map(str::to_owned),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    let start = out.len();
    out.resize(start + payload_len(sm.m()), 0);
    for (i, &sign) in sm.b().iter().enumerate() {
        if sign > 0 {
            out[start + i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn unpack(bytes: &[u8]) -> Result<SignMeasurements> {
    let newline = bytes
        .iter()
        .position(|&c| c == b'\n')
        .ok_or_else(|| format_err("missing header terminator"))?;
    let header_text =
        std::str::from_utf8(&bytes[..newline]).map_err(|_| format_err("header is not UTF-8"))?;
    let header: Header = serde_json::from_str(header_text)
        .map_err(|e| format_err(format!("malformed header: {e}")))?;

    if header.m == 0 || header.n == 0 {
        return Err(format_err("header dimensions must be positive"));
    }
    if header.norm_x.len() != 8 || !header.norm_x.bytes().all(|c| c.is_ascii_hexdigit()) {
        return Err(format_err(format!(
            "norm_x {:?} is not 8 hex digits",
            header.norm_x
        )));
    }
    let bits = u32::from_str_radix(&header.norm_x, 16).map_err(|e| format_err(e.to_string()))?;

    let payload = &bytes[newline + 1..];
    let expected = payload_len(header.m);
    if payload.len() < expected {
        return Err(format_err(format!(
            "truncated payload: {} bytes, expected {expected}",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(format_err(format!(
            "trailing data: {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let used = header.m % 8;
    if used != 0 && payload[expected - 1] >> used != 0 {
        return Err(format_err("nonzero pad bits"));
    }

    let b = (0..header.m)
        .map(|i| {
            if payload[i / 8] >> (i % 8) & 1 == 1 {
                1
            } else {
                -1
            }
        })
        .collect();
    SignMeasurements::new(
        b,
        f32::from_bits(bits),
        header.n,
        header.seed,
        header.source_id,
    )
    .map_err(|e| format_err(e.to_string()))
}

pub fn write_file(path: impl AsRef<Path>, sm: &SignMeasurements) -> Result<()> {
    fs::write(path, pack(sm))?;
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<SignMeasurements> {
    unpack(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn payload(bytes: &[u8]) -> &[u8] {
        let nl = bytes.iter().position(|&c| c == b'\n').unwrap();
        &bytes[nl + 1..]
    }

    #[test]
    fn all_plus_byte() {
        let sm = SignMeasurements::new(vec![1; 8], 1.0, 8, 0, None).unwrap();
        assert_eq!(payload(&pack(&sm)), &[0xFF]);
    }

    #[test]
    fn hand_packed_bits() {
        let sm = SignMeasurements::new(vec![1, -1, 1], 1.0, 3, 0, None).unwrap();
        assert_eq!(payload(&pack(&sm)), &[0x05]);
    }

    #[test]
    fn header_layout() {
        let sm = SignMeasurements::new(vec![1, -1], 1.0, 4, 9, None).unwrap();
        let bytes = pack(&sm);
        let expected =
            b"{\"n\":4,\"m\":2,\"seed\":9,\"norm_x\":\"3f800000\",\"source_id\":null}\n\x01";
        assert_eq!(bytes, expected.to_vec());
    }

    #[test]
    fn payload_size_for_250() {
        let sm = SignMeasurements::new(vec![-1; 250], 3.5, 250, 1, None).unwrap();
        assert_eq!(payload(&pack(&sm)).len(), 32);
        assert_eq!(payload_len(250), 32);
    }

    #[test]
    fn rejects_corruption() {
        let sm = SignMeasurements::new(vec![1, -1, 1], 2.0, 3, 0, Some("node-1".into())).unwrap();
        let good = pack(&sm);

        let mut padded = good.clone();
        *padded.last_mut().unwrap() |= 0x80;
        assert!(matches!(unpack(&padded), Err(Error::Format(_))));

        assert!(matches!(
            unpack(&good[..good.len() - 1]),
            Err(Error::Format(_))
        ));

        let mut extra = good.clone();
        extra.push(0);
        assert!(matches!(unpack(&extra), Err(Error::Format(_))));

        assert!(matches!(unpack(b"{\"n\":3}\n\x05"), Err(Error::Format(_))));
        assert!(matches!(unpack(b"no newline"), Err(Error::Format(_))));

        let bad_norm =
            b"{\"n\":3,\"m\":3,\"seed\":0,\"norm_x\":\"bf800000\",\"source_id\":null}\n\x05";
        assert!(matches!(unpack(bad_norm), Err(Error::Format(_))));
        let short_hex =
            b"{\"n\":3,\"m\":3,\"seed\":0,\"norm_x\":\"3f80\",\"source_id\":null}\n\x05";
        assert!(matches!(unpack(short_hex), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn pack_unpack_identity(
            signs in proptest::collection::vec(prop::bool::ANY, 1..300),
            norm in 0.0f32..1e6,
            n in 1usize..1000,
            seed in any::<u64>(),
            source in proptest::option::of("[a-z0-9 _\\-\n\"]{0,12}"),
        ) {
            let b: Vec<i8> = signs.iter().map(|&s| if s { 1 } else { -1 }).collect();
            let m = b.len();
            let sm = SignMeasurements::new(b, norm, n, seed, source).unwrap();
            let bytes = pack(&sm);
            prop_assert_eq!(payload(&bytes).len(), m.div_ceil(8));
            prop_assert_eq!(unpack(&bytes).unwrap(), sm);
        }
    }
}
