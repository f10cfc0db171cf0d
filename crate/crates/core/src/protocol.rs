//! Types shared by both proof systems: the challenge bit and round verdicts.

use core::fmt;

/// V2's challenge bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Challenge {
    /// `chall = 0`: open every masked commitment and let the verifiers recompute.
    Audit,
    /// `chall = 1`: unveil only the combination that proves the claim.
    Reveal,
}

impl Challenge {
    pub const BOTH: [Challenge; 2] = [Challenge::Audit, Challenge::Reveal];

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Challenge::Reveal
        } else {
            Challenge::Audit
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, Challenge::Reveal)
    }
}

impl fmt::Display for Challenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.bit() { "1" } else { "0" })
    }
}

/// Why the verifiers rejected a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// P2's answer is for the other challenge.
    WrongResponseKind,
    /// A vector in a response has the wrong length or an entry out of range.
    Malformed,
    /// Audit: masked row `row` disagrees at coordinate `index`.
    MaskMismatch { row: u8, index: usize },
    /// Subset-sum reveal: `sum_i (w_{x_i})_i != a*k + c'`.
    SumMismatch,
    /// 3SAT audit: the equation at flat position `position` (0-based) failed.
    PositionMismatch { position: usize },
    /// 3SAT reveal: clause `clause` (0-based) did not unveil a one.
    ClauseMismatch { clause: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::WrongResponseKind => f.write_str("response does not match the challenge"),
            Rejection::Malformed => f.write_str("malformed response"),
            Rejection::MaskMismatch { row, index } => write!(f, "row w{row} mismatch at index {index}"),
            Rejection::SumMismatch => f.write_str("unveiled sum does not equal a*k + c'"),
            Rejection::PositionMismatch { position } => write!(f, "consistency check failed at position {position}"),
            Rejection::ClauseMismatch { clause } => write!(f, "clause {clause} did not unveil a one"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Rejection),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

impl From<Result<(), Rejection>> for Verdict {
    fn from(r: Result<(), Rejection>) -> Self {
        match r {
            Ok(()) => Verdict::Accept,
            Err(e) => Verdict::Reject(e),
        }
    }
}

/// Result of combining a prover's answers to both challenges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extraction<T> {
    /// The answers pin down the verifier's secret.
    Secret(T),
    /// No contradiction: the answers encode a genuine witness.
    NoConflict,
}
