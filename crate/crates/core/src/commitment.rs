//! The two-prover relativistic commitment `w = a*b + c` over `F_Q`.
//!
//! V1 draws the challenge `a` and hands it to P1, who answers with the
//! commitment value `w`. P2 later unveils `(b, c)` to V2. Commitments made
//! under the same `a` combine linearly: the verifiers combine the `w`s, the
//! provers combine the keys `c` with the same coefficients.

use alloc::vec::Vec;

use crate::field::{FieldElement, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommitmentError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{coeffs} coefficients for {items} commitments")]
    LengthMismatch { coeffs: usize, items: usize },
    #[error("cannot combine an empty list of commitments")]
    Empty,
    #[error("double opening needs two distinct values")]
    SameValue,
}

/// Verifier-chosen challenge `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitChallenge(pub FieldElement);

/// Prover-side blinding key `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitKey(pub FieldElement);

/// Verifier-held commitment value `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitValue(pub FieldElement);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub value: FieldElement,
    pub key: CommitKey,
}

impl Opening {
    pub fn new(value: FieldElement, key: FieldElement) -> Self {
        Opening { value, key: CommitKey(key) }
    }
}

pub fn commit(a: &CommitChallenge, value: &FieldElement, key: &CommitKey) -> Result<CommitValue, CommitmentError> {
    let w = a.0.checked_mul(value)?.checked_add(&key.0)?;
    Ok(CommitValue(w))
}

/// Unveil check: `w == a*b + c`. Elements from a foreign field never verify.
pub fn verify_open(a: &CommitChallenge, w: &CommitValue, opening: &Opening) -> bool {
    commit(a, &opening.value, &opening.key).is_ok_and(|expected| expected == *w)
}

fn check_lengths<T>(coeffs: &[FieldElement], items: &[T]) -> Result<(), CommitmentError> {
    if coeffs.len() != items.len() {
        return Err(CommitmentError::LengthMismatch { coeffs: coeffs.len(), items: items.len() });
    }
    if items.is_empty() {
        return Err(CommitmentError::Empty);
    }
    Ok(())
}

fn dot<'a>(
    coeffs: &[FieldElement],
    items: impl Iterator<Item = &'a FieldElement>,
) -> Result<FieldElement, CommitmentError> {
    let mut terms = coeffs.iter().zip(items);
    let (c0, x0) = terms.next().ok_or(CommitmentError::Empty)?;
    let mut acc = c0.checked_mul(x0)?;
    for (c, x) in terms {
        acc = acc.checked_add(&c.checked_mul(x)?)?;
    }
    Ok(acc)
}

/// `sum_i coeffs[i] * ws[i]`: a commitment to `sum_i coeffs[i] * b_i`, valid
/// only when every `w_i` was made under the same challenge.
pub fn combine_linear(coeffs: &[FieldElement], ws: &[CommitValue]) -> Result<CommitValue, CommitmentError> {
    check_lengths(coeffs, ws)?;
    Ok(CommitValue(dot(coeffs, ws.iter().map(|w| &w.0))?))
}

/// Prover-side mirror of [`combine_linear`].
pub fn combine_keys(coeffs: &[FieldElement], keys: &[CommitKey]) -> Result<CommitKey, CommitmentError> {
    check_lengths(coeffs, keys)?;
    Ok(CommitKey(dot(coeffs, keys.iter().map(|k| &k.0))?))
}

/// The binding attack: given `w`, produce openings to both `b` and `b2`
/// assuming the challenge was `guess_a`. Both open iff the guess is right.
pub fn double_open_attack(
    w: &CommitValue,
    b: &FieldElement,
    b2: &FieldElement,
    guess_a: &FieldElement,
) -> Result<(Opening, Opening), CommitmentError> {
    if b == b2 {
        return Err(CommitmentError::SameValue);
    }
    let first = w.0.checked_sub(&guess_a.checked_mul(b)?)?;
    let second = w.0.checked_sub(&guess_a.checked_mul(b2)?)?;
    Ok((Opening::new(b.clone(), first), Opening::new(b2.clone(), second)))
}

/// Convenience for vectors of commitments sharing one challenge.
pub fn commit_all(
    a: &CommitChallenge,
    values: &[FieldElement],
    keys: &[FieldElement],
) -> Result<Vec<CommitValue>, CommitmentError> {
    if values.len() != keys.len() {
        return Err(CommitmentError::LengthMismatch { coeffs: values.len(), items: keys.len() });
    }
    values.iter().zip(keys).map(|(b, c)| commit(a, b, &CommitKey(c.clone()))).collect()
}
