//! Byte encoding of protocol messages.
//!
//! Field elements are fixed-width big-endian (`Field::byte_width` bytes).
//! Bit vectors are packed eight to a byte, least significant bit first.
//! Rotations and clause positions take two bits each, four to a byte.
//! P2's answers start with one tag byte naming the challenge they answer.
//! Unused padding bits must be zero, so every message has exactly one
//! encoding.

use alloc::vec::Vec;

use crate::field::{Field, FieldElement, FieldError};
use crate::protocol::Challenge;
use crate::subset_sum::{AuditResponse, P1Response, P2Response, RevealResponse};
use crate::three_sat::{ConsistencyResponse, CyclicPerm, OnesResponse, SatP1Response, SatP2Response};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("unknown tag byte {0}")]
    BadTag(u8),
    #[error("non-zero padding bits")]
    Padding,
    #[error("two-bit code {0} out of range")]
    BadCode(u8),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Every message that crosses a verifier-prover channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// V1 -> P1: the commitment challenge `a`.
    Query(FieldElement),
    SsCommit(P1Response),
    SatCommit(SatP1Response),
    /// V2 -> P2
    Challenge(Challenge),
    SsAnswer(P2Response),
    SatAnswer(SatP2Response),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayloadKind {
    Query,
    SsCommit,
    SatCommit,
    Challenge,
    SsAnswer,
    SatAnswer,
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Query(_) => PayloadKind::Query,
            Payload::SsCommit(_) => PayloadKind::SsCommit,
            Payload::SatCommit(_) => PayloadKind::SatCommit,
            Payload::Challenge(_) => PayloadKind::Challenge,
            Payload::SsAnswer(_) => PayloadKind::SsAnswer,
            Payload::SatAnswer(_) => PayloadKind::SatAnswer,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Payload::Query(a) => a.write_to(&mut out),
            Payload::SsCommit(r) => write_elements(&mut out, r.w0.iter().chain(&r.w1)),
            Payload::SatCommit(r) => write_elements(&mut out, r.w_prime.iter().chain(&r.w)),
            Payload::Challenge(c) => out.push(c.bit() as u8),
            Payload::SsAnswer(P2Response::Audit(r)) => {
                out.push(0);
                out.extend(pack_bits(&r.z));
                write_elements(&mut out, r.c0.iter().chain(&r.c1));
            }
            Payload::SsAnswer(P2Response::Reveal(r)) => {
                out.push(1);
                out.extend(pack_bits(&r.x));
                r.key.write_to(&mut out);
            }
            Payload::SatAnswer(SatP2Response::Consistency(r)) => {
                out.push(0);
                out.extend(pack_pairs(r.perm.rotations()));
                write_elements(&mut out, r.delta.iter());
            }
            Payload::SatAnswer(SatP2Response::Ones(r)) => {
                out.push(1);
                out.extend(pack_pairs(&r.f.iter().map(|f| f.wrapping_sub(1)).collect::<Vec<_>>()));
                write_elements(&mut out, r.gamma.iter());
            }
        }
        out
    }
}

/// Dimensions needed to decode: the field, `n`, and `m` (zero for Subset Sum).
#[derive(Debug, Clone)]
pub struct Shape {
    pub field: Field,
    pub n: usize,
    pub m: usize,
}

impl Shape {
    /// Encoded length of a payload of the given kind; for answers, the one
    /// answering `challenge`.
    pub fn encoded_len(&self, kind: PayloadKind, challenge: Challenge) -> usize {
        let w = self.field.byte_width();
        let (n, m) = (self.n, self.m);
        match (kind, challenge) {
            (PayloadKind::Query, _) => w,
            (PayloadKind::SsCommit, _) => 2 * n * w,
            (PayloadKind::SatCommit, _) => (n + 3 * m) * w,
            (PayloadKind::Challenge, _) => 1,
            (PayloadKind::SsAnswer, Challenge::Audit) => 1 + n.div_ceil(8) + 2 * n * w,
            (PayloadKind::SsAnswer, Challenge::Reveal) => 1 + n.div_ceil(8) + w,
            (PayloadKind::SatAnswer, Challenge::Audit) => 1 + m.div_ceil(4) + 3 * m * w,
            (PayloadKind::SatAnswer, Challenge::Reveal) => 1 + m.div_ceil(4) + m * w,
        }
    }

    pub fn decode(&self, kind: PayloadKind, bytes: &[u8]) -> Result<Payload, WireError> {
        let (n, m) = (self.n, self.m);
        let challenge = match kind {
            PayloadKind::SsAnswer | PayloadKind::SatAnswer => match bytes.first() {
                Some(0) => Challenge::Audit,
                Some(1) => Challenge::Reveal,
                Some(&t) => return Err(WireError::BadTag(t)),
                None => return Err(WireError::Length { expected: 1, actual: 0 }),
            },
            _ => Challenge::Audit,
        };
        let expected = self.encoded_len(kind, challenge);
        if bytes.len() != expected {
            return Err(WireError::Length { expected, actual: bytes.len() });
        }
        let mut r = Reader { field: &self.field, bytes };
        let payload = match kind {
            PayloadKind::Query => Payload::Query(r.element()?),
            PayloadKind::SsCommit => Payload::SsCommit(P1Response { w0: r.elements(n)?, w1: r.elements(n)? }),
            PayloadKind::SatCommit => {
                Payload::SatCommit(SatP1Response { w_prime: r.elements(n)?, w: r.elements(3 * m)? })
            }
            PayloadKind::Challenge => match r.take(1)[0] {
                0 => Payload::Challenge(Challenge::Audit),
                1 => Payload::Challenge(Challenge::Reveal),
                t => return Err(WireError::BadTag(t)),
            },
            PayloadKind::SsAnswer => {
                r.take(1);
                let bits = unpack_bits(r.take(n.div_ceil(8)), n)?;
                Payload::SsAnswer(match challenge {
                    Challenge::Audit => {
                        P2Response::Audit(AuditResponse { z: bits, c0: r.elements(n)?, c1: r.elements(n)? })
                    }
                    Challenge::Reveal => P2Response::Reveal(RevealResponse { x: bits, key: r.element()? }),
                })
            }
            PayloadKind::SatAnswer => {
                r.take(1);
                let codes = unpack_pairs(r.take(m.div_ceil(4)), m)?;
                Payload::SatAnswer(match challenge {
                    Challenge::Audit => {
                        let perm = CyclicPerm::new(codes).map_err(|_| WireError::BadCode(3))?;
                        SatP2Response::Consistency(ConsistencyResponse { perm, delta: r.elements(3 * m)? })
                    }
                    Challenge::Reveal => {
                        if codes.contains(&3) {
                            return Err(WireError::BadCode(3));
                        }
                        let f = codes.into_iter().map(|c| c + 1).collect();
                        SatP2Response::Ones(OnesResponse { f, gamma: r.elements(m)? })
                    }
                })
            }
        };
        Ok(payload)
    }
}

struct Reader<'a> {
    field: &'a Field,
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    // Lengths are checked up front, so slicing cannot run past the end.
    fn take(&mut self, len: usize) -> &'a [u8] {
        let (head, tail) = self.bytes.split_at(len);
        self.bytes = tail;
        head
    }

    fn element(&mut self) -> Result<FieldElement, WireError> {
        let w = self.field.byte_width();
        Ok(self.field.deserialize(self.take(w))?)
    }

    fn elements(&mut self, count: usize) -> Result<Vec<FieldElement>, WireError> {
        (0..count).map(|_| self.element()).collect()
    }
}

fn write_elements<'a>(out: &mut Vec<u8>, items: impl Iterator<Item = &'a FieldElement>) {
    for e in items {
        e.write_to(out);
    }
}

pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = alloc::vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b as u8) << (i % 8);
    }
    out
}

pub fn unpack_bits(bytes: &[u8], len: usize) -> Result<Vec<bool>, WireError> {
    let bits: Vec<bool> = (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
    if pack_bits(&bits) != bytes {
        return Err(WireError::Padding);
    }
    Ok(bits)
}

/// Packs values in `0..4`, two bits each.
pub fn pack_pairs(codes: &[u8]) -> Vec<u8> {
    let mut out = alloc::vec![0u8; codes.len().div_ceil(4)];
    for (i, &c) in codes.iter().enumerate() {
        out[i / 4] |= (c & 3) << (2 * (i % 4));
    }
    out
}

pub fn unpack_pairs(bytes: &[u8], len: usize) -> Result<Vec<u8>, WireError> {
    let codes: Vec<u8> = (0..len).map(|i| bytes[i / 4] >> (2 * (i % 4)) & 3).collect();
    if pack_pairs(&codes) != bytes {
        return Err(WireError::Padding);
    }
    Ok(codes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn bit_packing() {
        assert_eq!(pack_bits(&[true, false, true]), vec![0b101]);
        assert_eq!(pack_bits(&[false; 9]), vec![0, 0]);
        assert_eq!(unpack_bits(&[0b101], 3).unwrap(), vec![true, false, true]);
        assert_eq!(unpack_bits(&[0b1101], 3), Err(WireError::Padding));
        assert_eq!(pack_pairs(&[1, 2, 1, 0, 2]), vec![0b00_01_10_01, 0b10]);
        assert_eq!(unpack_pairs(&[0b00_01_10_01, 0b10], 5).unwrap(), vec![1, 2, 1, 0, 2]);
    }

    #[test]
    fn round_trip_every_kind() {
        let field = Field::from_u64(1_000_003).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let shape = Shape { field: field.clone(), n: 5, m: 6 };
        let payloads = vec![
            Payload::Query(field.element(77)),
            Payload::SsCommit(P1Response { w0: field.random_vec(5, &mut rng), w1: field.random_vec(5, &mut rng) }),
            Payload::SatCommit(SatP1Response {
                w_prime: field.random_vec(5, &mut rng),
                w: field.random_vec(18, &mut rng),
            }),
            Payload::Challenge(Challenge::Reveal),
            Payload::SsAnswer(P2Response::Audit(AuditResponse {
                z: vec![true, false, false, true, true],
                c0: field.random_vec(5, &mut rng),
                c1: field.random_vec(5, &mut rng),
            })),
            Payload::SsAnswer(P2Response::Reveal(RevealResponse { x: vec![false; 5], key: field.element(9) })),
            Payload::SatAnswer(SatP2Response::Consistency(ConsistencyResponse {
                perm: CyclicPerm::random(6, &mut rng),
                delta: field.random_vec(18, &mut rng),
            })),
            Payload::SatAnswer(SatP2Response::Ones(OnesResponse {
                f: vec![1, 2, 3, 3, 2, 1],
                gamma: field.random_vec(6, &mut rng),
            })),
        ];
        for p in payloads {
            let bytes = p.encode();
            let ch = match &p {
                Payload::SsAnswer(r) => r.challenge(),
                Payload::SatAnswer(r) => r.challenge(),
                _ => Challenge::Audit,
            };
            assert_eq!(bytes.len(), shape.encoded_len(p.kind(), ch));
            assert_eq!(shape.decode(p.kind(), &bytes).unwrap(), p);
        }
    }

    #[test]
    fn decode_rejects_bad_input() {
        let field = Field::from_u64(11).unwrap();
        let shape = Shape { field, n: 2, m: 1 };
        assert_eq!(shape.decode(PayloadKind::Query, &[]), Err(WireError::Length { expected: 1, actual: 0 }));
        assert_eq!(shape.decode(PayloadKind::Query, &[11]), Err(WireError::Field(FieldError::OutOfRange)));
        assert_eq!(shape.decode(PayloadKind::Challenge, &[2]), Err(WireError::BadTag(2)));
        assert_eq!(shape.decode(PayloadKind::SsAnswer, &[7, 0, 0]), Err(WireError::BadTag(7)));
        // f code 3 would be position 4
        assert_eq!(shape.decode(PayloadKind::SatAnswer, &[1, 3, 0]), Err(WireError::BadCode(3)));
        assert_eq!(shape.decode(PayloadKind::SsAnswer, &[1, 0b100, 0]), Err(WireError::Padding));
    }
}
