//! Signed-message file: header line, hex signature line, raw message bytes.

use super::{Signature, SignedMessage};
use crate::error::{Error, Result};
use crate::mac::TagScheme;
use crate::params::{Mode, ProtocolParams, ValidatedParams};

pub fn encode_signed_message(params: &ValidatedParams, sm: &SignedMessage) -> Vec<u8> {
    let mut out = params.header().into_bytes();
    out.push(b'\n');
    out.extend_from_slice(sm.signature.to_hex().as_bytes());
    out.push(b'\n');
    out.extend_from_slice(&sm.message);
    out
}

fn field<T: std::str::FromStr>(tok: Option<&str>, name: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Format(format!("header is missing {name}")))?
        .parse()
        .map_err(|_| Error::Format(format!("bad {name} in header")))
}

fn split_line(data: &[u8]) -> Result<(&str, &[u8])> {
    let pos = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("truncated signed message".into()))?;
    let line = std::str::from_utf8(&data[..pos]).map_err(|_| Error::Format("header is not ASCII".into()))?;
    Ok((line.trim_end_matches('\r'), &data[pos + 1..]))
}

/// Parses a signed-message file and the parameters its header declares.
pub fn decode_signed_message(data: &[u8]) -> Result<(ValidatedParams, SignedMessage)> {
    let (header, rest) = split_line(data)?;
    let (sig_hex, message) = split_line(rest)?;
    let mut toks = header.split_ascii_whitespace();
    if toks.next() != Some("GQADS1") {
        return Err(Error::Format("missing GQADS1 magic".into()));
    }
    let mode: Mode = field(toks.next(), "mode")?;
    let n = field(toks.next(), "n")?;
    let r = field(toks.next(), "r")?;
    let shared = field(toks.next(), "S")?;
    let v_b = field(toks.next(), "V_B")?;
    let v_c = field(toks.next(), "V_C")?;
    let suite: String = field(toks.next(), "suite")?;
    if toks.next().is_some() {
        return Err(Error::Format("trailing tokens in header".into()));
    }
    let scheme = match mode {
        Mode::LegacyQads => TagScheme::default(),
        _ => suite.parse()?,
    };
    let params = ProtocolParams {
        n,
        r,
        shared,
        v_b,
        v_c,
        mode,
        scheme,
    }
    .validate()?;
    if params.suite() != suite {
        return Err(Error::Format(format!(
            "suite `{suite}` is not canonical for these parameters (expected `{}`)",
            params.suite()
        )));
    }
    let signature = Signature::from_hex(sig_hex.trim(), 2 * n as usize, params.tag_len(), mode)?;
    let sm = SignedMessage {
        message: message.to_vec(),
        signature,
        params_fingerprint: params.fingerprint(),
    };
    Ok((params, sm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::MacConfig;
    use crate::protocol::{distribute, sign};
    use crate::seed::Seed;

    fn roundtrip(p: ProtocolParams, message: &[u8]) {
        let params = p.validate().unwrap();
        let (a, _, _) = distribute(&Seed::from_u64(7), &params).unwrap();
        let sm = sign(&a, message).unwrap();
        let bytes = encode_signed_message(&params, &sm);
        let (back_params, back) = decode_signed_message(&bytes).unwrap();
        assert_eq!(back_params, params);
        assert_eq!(back, sm);
    }

    #[test]
    fn roundtrips_across_modes() {
        roundtrip(ProtocolParams::gqads(4, 256, 1, 4), b"binary\n\0\xff message");
        roundtrip(ProtocolParams::gqads(4, 8, 1, 4).with_mode(Mode::LegacyQads), b"");
        roundtrip(ProtocolParams::deterministic(256, 1), b"x");
        roundtrip(ProtocolParams::gqads(4, 10, 1, 4).with_scheme(TagScheme::Toy), b"toy");
        roundtrip(
            ProtocolParams::gqads(4, 64, 1, 4).with_scheme(TagScheme::CarterWegman(MacConfig::with_tag_len(96))),
            b"short tags",
        );
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(decode_signed_message(b"").is_err());
        assert!(decode_signed_message(b"GQADS2 gqads 4 8 1 5 4 toy/t8\n00\n").is_err());
        assert!(decode_signed_message(b"GQADS1 gqads 4 8 3 7 4 toy/t8\n00\n").is_err());
        // wrong signature length
        assert!(decode_signed_message(b"GQADS1 gqads 4 8 1 5 4 toy/t8\n00\n").is_err());
        // suite that does not match r
        assert!(decode_signed_message(b"GQADS1 gqads 4 8 1 5 4 toy/t9\n0000000000000000\n").is_err());
        assert!(decode_signed_message(b"GQADS1 gqads 4 8 1 5 4 toy/t8\n0000000000000000\n").is_ok());
    }
}
