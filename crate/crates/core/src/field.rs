//! Prime-field arithmetic over arbitrary-precision residues.
//!
//! A [`Field`] is a cheaply clonable handle to an immutable [`FieldCtx`]
//! (the modulus plus its derived widths). Every [`FieldElement`] carries
//! the handle it was created under, so mixing elements of two different
//! fields is detected: the `checked_*` methods report it as
//! [`FieldError::ContextMismatch`], the operator impls panic.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Deref, Mul, Neg, Sub};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("operands belong to different fields")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus {0} is not prime")]
    NotPrime(BigUint),
    #[error("expected {expected} bytes, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("encoded value is not below the modulus")]
    OutOfRange,
    #[error("cannot parse modulus: {0}")]
    BadModulus(alloc::string::String),
}

/// The immutable description of `F_Q`.
#[derive(Debug, PartialEq, Eq)]
pub struct FieldCtx {
    modulus: BigUint,
    bit_length: u64,
    byte_width: usize,
}

impl FieldCtx {
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `ceil(log2 Q)`: the number of bits needed for the largest residue.
    pub fn bit_length(&self) -> u64 {
        self.bit_length
    }

    /// Fixed wire width of one element.
    pub fn byte_width(&self) -> usize {
        self.byte_width
    }

    /// Real-valued `log2 Q`, the per-element cost used by the bit-count formulas.
    pub fn log2_modulus(&self) -> f64 {
        log2_biguint(&self.modulus)
    }
}

/// Shared handle to a prime field.
#[derive(Clone)]
pub struct Field(Arc<FieldCtx>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.modulus)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.modulus == other.0.modulus
    }
}

impl Eq for Field {}

impl Deref for Field {
    type Target = FieldCtx;

    fn deref(&self) -> &FieldCtx {
        &self.0
    }
}

impl Field {
    /// Builds the field of the given prime order, rejecting composites.
    pub fn new(modulus: BigUint) -> Result<Self, FieldError> {
        if !is_probable_prime(&modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        Ok(Self::new_unchecked(modulus))
    }

    pub fn from_u64(modulus: u64) -> Result<Self, FieldError> {
        Self::new(BigUint::from(modulus))
    }

    /// Parses the decimal modulus representation used in config and instance files.
    pub fn from_decimal(text: &str) -> Result<Self, FieldError> {
        let modulus =
            BigUint::parse_bytes(text.trim().as_bytes(), 10).ok_or_else(|| FieldError::BadModulus(text.into()))?;
        Self::new(modulus)
    }

    fn new_unchecked(modulus: BigUint) -> Self {
        let bit_length = (&modulus - 1u32).bits().max(1);
        let byte_width = bit_length.div_ceil(8) as usize;
        Field(Arc::new(FieldCtx { modulus, bit_length, byte_width }))
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.0
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: BigUint::zero(), field: self.clone() }
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    pub fn element(&self, value: u64) -> FieldElement {
        self.element_big(BigUint::from(value))
    }

    /// Reduces an arbitrary integer into the field.
    pub fn element_big(&self, value: BigUint) -> FieldElement {
        let value = if value < self.0.modulus { value } else { value % &self.0.modulus };
        FieldElement { value, field: self.clone() }
    }

    pub fn element_signed(&self, value: i64) -> FieldElement {
        let magnitude = self.element(value.unsigned_abs());
        if value < 0 {
            -&magnitude
        } else {
            magnitude
        }
    }

    pub fn bit(&self, bit: bool) -> FieldElement {
        if bit {
            self.one()
        } else {
            self.zero()
        }
    }

    /// Uniform element by rejection sampling over `byte_width`-byte draws.
    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let value = uniform_below(&self.0.modulus, rng);
        FieldElement { value, field: self.clone() }
    }

    pub fn random_vec<R: RngCore + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<FieldElement> {
        (0..len).map(|_| self.random(rng)).collect()
    }

    /// Fixed-width big-endian decoding.
    pub fn deserialize(&self, bytes: &[u8]) -> Result<FieldElement, FieldError> {
        if bytes.len() != self.0.byte_width {
            return Err(FieldError::WrongLength { expected: self.0.byte_width, actual: bytes.len() });
        }
        let value = BigUint::from_bytes_be(bytes);
        if value >= self.0.modulus {
            return Err(FieldError::OutOfRange);
        }
        Ok(FieldElement { value, field: self.clone() })
    }

    /// Iterates over every element in increasing order. Only sensible for tiny fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self.0.modulus.to_u64().expect("enumerating a field wider than 64 bits");
        (0..q).map(move |v| self.element(v))
    }
}

/// A residue in `[0, Q)` bound to its field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    value: BigUint,
    field: Field,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Low 64 bits of the residue; exact for fields below `2^64`.
    pub fn to_u64_lossy(&self) -> u64 {
        self.value.iter_u64_digits().next().unwrap_or(0)
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let mut value = &self.value + &other.value;
        if value >= self.field.modulus {
            value -= &self.field.modulus;
        }
        Ok(FieldElement { value, field: self.field.clone() })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let value = if self.value >= other.value {
            &self.value - &other.value
        } else {
            &self.field.modulus - (&other.value - &self.value)
        };
        Ok(FieldElement { value, field: self.field.clone() })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let value = (&self.value * &other.value) % &self.field.modulus;
        Ok(FieldElement { value, field: self.field.clone() })
    }

    pub fn neg(&self) -> Self {
        let value = if self.value.is_zero() { BigUint::zero() } else { &self.field.modulus - &self.value };
        FieldElement { value, field: self.field.clone() }
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.value.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let exponent = &self.field.modulus - 2u32;
        let value = self.value.modpow(&exponent, &self.field.modulus);
        Ok(FieldElement { value, field: self.field.clone() })
    }

    /// Multiplication by a bit, the `a * p_i` style products of the protocols.
    pub fn scale_bit(&self, bit: bool) -> Self {
        if bit {
            self.clone()
        } else {
            self.field.zero()
        }
    }

    /// Fixed-width big-endian encoding (`byte_width` bytes).
    pub fn serialize(&self) -> Vec<u8> {
        let width = self.field.byte_width;
        let digits = self.value.to_bytes_be();
        let mut out = vec![0u8; width];
        if !self.value.is_zero() {
            out[width - digits.len()..].copy_from_slice(&digits);
        }
        out
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.serialize());
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field elements from different fields")
            }
        }

        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}

/// Sum of a sequence of elements, `None` for an empty sequence.
pub fn sum<'a, I>(items: I) -> Option<FieldElement>
where
    I: IntoIterator<Item = &'a FieldElement>,
{
    let mut iter = items.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, x| acc + x))
}

/// Uniform integer in `[0, bound)`: draw `ceil(bits/8)` bytes, mask the
/// excess high bits, retry on overflow.
pub fn uniform_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    if bound.is_one() {
        return BigUint::zero();
    }
    let bits = (bound - 1u32).bits();
    let width = bits.div_ceil(8) as usize;
    let excess = (width as u64) * 8 - bits;
    let mut buf = vec![0u8; width];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess;
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// `log2(x)` for arbitrarily large `x`, accurate to f64 precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return libm::log2(x.to_u64().unwrap_or(u64::MAX) as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    libm::log2(top as f64) + shift as f64
}

const SMALL_PRIMES: [u32; 168] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379,
    383, 389, 397, 401, 409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503, 509, 521,
    523, 541, 547, 557, 563, 569, 571, 577, 587, 593, 599, 601, 607, 613, 617, 619, 631, 641, 643, 647, 653, 659, 661,
    673, 677, 683, 691, 701, 709, 719, 727, 733, 739, 743, 751, 757, 761, 769, 773, 787, 797, 809, 811, 821, 823, 827,
    829, 839, 853, 857, 859, 863, 877, 881, 883, 887, 907, 911, 919, 929, 937, 941, 947, 953, 967, 971, 977, 983, 991,
    997,
];

/// Bases that make Miller-Rabin exact below 3.3 * 10^24.
const DETERMINISTIC_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Total Miller-Rabin rounds for large candidates: 4^-64 = 2^-128.
const MR_ROUNDS: usize = 64;

/// Probabilistic primality test with error below `2^-128`.
///
/// Trial division by the primes under 1000, then Miller-Rabin. The witness
/// schedule is a pure function of `n`: the 13 fixed small bases (exact for
/// `n < 3.3e24`) followed by pseudo-random bases from a ChaCha stream keyed by
/// `n`, so the answer and [`choose_prime`] are reproducible.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    if n < &BigUint::from(997u32 * 997) {
        return true;
    }

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let twos = n_minus_one.trailing_zeros().unwrap_or(0);
    let odd = &n_minus_one >> twos;

    let witness = |base: &BigUint| -> bool {
        let mut x = base.modpow(&odd, n);
        if x == one || x == n_minus_one {
            return true;
        }
        for _ in 1..twos {
            x = (&x * &x) % n;
            if x == n_minus_one {
                return true;
            }
        }
        false
    };

    for &b in DETERMINISTIC_BASES.iter() {
        if !witness(&BigUint::from(b)) {
            return false;
        }
    }
    if n.bits() <= 81 {
        // 2^81 < 3.3e24: the fixed bases are a proof.
        return true;
    }

    let mut seed = [0u8; 32];
    for (dst, src) in seed.iter_mut().zip(n.to_bytes_le()) {
        *dst ^= src;
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let span = n - 3u32;
    for _ in DETERMINISTIC_BASES.len()..MR_ROUNDS {
        let base = uniform_below(&span, &mut rng) + 2u32;
        if !witness(&base) {
            return false;
        }
    }
    true
}

/// Smallest prime `>= min_bound` (bounds below 2 are raised to 2).
pub fn choose_prime(min_bound: &BigUint) -> Field {
    let two = BigUint::from(2u32);
    if min_bound <= &two {
        return Field::new_unchecked(two);
    }
    let mut candidate = min_bound.clone();
    if candidate.is_even() {
        candidate += 1u32;
    }
    while !is_probable_prime(&candidate) {
        candidate += 2u32;
    }
    Field::new_unchecked(candidate)
}
