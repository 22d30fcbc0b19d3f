use super::{role_error, PartyState, Signature, SignedMessage, VerificationReport};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::keys::{ConcatenatedKey, Role};
use crate::mac::{legacy_digest, otp, MacConfig, TagScheme, ToyMac};
use crate::params::{Mode, ValidatedParams};

/// Computes the tag of signature block `i` for one message.
///
/// Message-dependent work (the legacy digest, toy round keys) is done once
/// in [`BlockTagger::new`].
pub enum BlockTagger<'a> {
    CarterWegman {
        cfg: &'a MacConfig,
        message: &'a [u8],
    },
    Toy(ToyMac),
    Legacy {
        digest: BitString,
        r: usize,
        out_bits: usize,
    },
}

impl<'a> BlockTagger<'a> {
    pub fn new(params: &'a ValidatedParams, message: &'a [u8]) -> Result<Self> {
        Ok(match (params.mode(), params.scheme()) {
            (Mode::LegacyQads, _) => {
                let out_bits = 2 * params.key_bits() as usize;
                BlockTagger::Legacy {
                    digest: legacy_digest(message, out_bits),
                    r: params.r() as usize,
                    out_bits,
                }
            }
            (_, TagScheme::CarterWegman(cfg)) => BlockTagger::CarterWegman { cfg, message },
            (_, TagScheme::Toy) => BlockTagger::Toy(ToyMac::new(message, params.r())?),
        })
    }

    pub fn tag(&self, index: usize, key_block: &BitString) -> Result<BitString> {
        match self {
            BlockTagger::CarterWegman { cfg, message } => crate::mac::mac(message, key_block, cfg),
            BlockTagger::Toy(toy) => Ok(BitString::from_u64(
                toy.tag(key_block.to_u64()),
                toy.bits() as usize,
            )),
            BlockTagger::Legacy { digest, r, out_bits } => {
                let pad_out = otp(&digest.slice(index * r, *r), key_block)?;
                Ok(legacy_digest(pad_out.as_bytes(), *out_bits))
            }
        }
    }
}

/// Signs with an explicit k1 || k2; every block must be known.
pub fn sign_with_key(params: &ValidatedParams, key: &ConcatenatedKey, message: &[u8]) -> Result<SignedMessage> {
    let want = 2 * params.n() as usize;
    if key.len() != want {
        return Err(Error::LengthMismatch {
            left: key.len(),
            right: want,
        });
    }
    let tagger = BlockTagger::new(params, message)?;
    let tags = (0..want)
        .map(|i| {
            let block = key
                .block(i)
                .ok_or_else(|| Error::InvalidParams(format!("signing needs block {i} of k_A")))?;
            tagger.tag(i, block)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignedMessage {
        message: message.to_vec(),
        signature: Signature {
            tags,
            tag_len: params.tag_len(),
            mode: params.mode(),
        },
        params_fingerprint: params.fingerprint(),
    })
}

/// Alice's signature: one tag per block of k_A = k1 || k2.
pub fn sign(alice: &PartyState, message: &[u8]) -> Result<SignedMessage> {
    if alice.role != Role::Alice {
        return Err(role_error("Alice", alice.role));
    }
    sign_with_key(&alice.params, &alice.concatenated_key(), message)
}

/// Recomputes every tag the verifier can and compares against the signature.
pub fn verify(verifier: &PartyState, sm: &SignedMessage) -> Result<VerificationReport> {
    let threshold = match verifier.role {
        Role::Bob => verifier.params.v_b(),
        Role::Charlie => verifier.params.v_c(),
        Role::Alice => return Err(role_error("Bob or Charlie", Role::Alice)),
    };
    let params = &verifier.params;
    if sm.params_fingerprint != params.fingerprint() {
        return Err(Error::FingerprintMismatch);
    }
    let total = 2 * params.n() as usize;
    let sig = &sm.signature;
    if sig.tags.len() != total || sig.mode != params.mode() {
        return Err(Error::Format(format!(
            "signature has {} {} tags, expected {total} {}",
            sig.tags.len(),
            sig.mode,
            params.mode()
        )));
    }
    let key = verifier.concatenated_key();
    let checkable = key.known_indices();
    let tagger = BlockTagger::new(params, &sm.message)?;
    let mut matches = vec![false; total];
    for &i in &checkable {
        let block = key.block(i).expect("known index");
        matches[i] = tagger.tag(i, block)? == sig.tags[i];
    }
    Ok(VerificationReport::new(verifier.role, checkable, matches, threshold))
}
