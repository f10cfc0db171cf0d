use num_bigint::BigUint;
use proptest::prelude::*;
use zkmip_core::field::{choose_prime, is_probable_prime, Field, FieldError};

fn moduli() -> Vec<Field> {
    let m127 = (BigUint::from(1u32) << 127u32) - 1u32;
    vec![
        Field::from_u64(2).unwrap(),
        Field::from_u64(11).unwrap(),
        Field::from_u64(65_537).unwrap(),
        Field::from_u64((1 << 61) - 1).unwrap(),
        Field::new(m127).unwrap(),
    ]
}

fn big(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

proptest! {
    #[test]
    fn ring_axioms(idx in 0usize..5, x in any::<[u8; 20]>(), y in any::<[u8; 20]>(), z in any::<[u8; 20]>()) {
        let f = &moduli()[idx];
        let (a, b, c) = (f.element_big(big(&x)), f.element_big(big(&y)), f.element_big(big(&z)));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, f.zero());
        prop_assert_eq!(&a + &(-&a), f.zero());
        prop_assert_eq!(&a * &f.one(), a.clone());
    }

    #[test]
    fn inverse_against_bigint(idx in 0usize..5, x in any::<[u8; 20]>()) {
        let f = &moduli()[idx];
        let a = f.element_big(big(&x));
        match a.inv() {
            Ok(inv) => {
                prop_assert!(!a.is_zero());
                // oracle: plain BigUint product reduced by the modulus
                prop_assert_eq!((a.value() * inv.value()) % f.modulus(), BigUint::from(1u32));
            }
            Err(e) => {
                prop_assert!(a.is_zero());
                prop_assert_eq!(e, FieldError::DivisionByZero);
            }
        }
    }

    #[test]
    fn serialization_round_trip(idx in 0usize..5, x in any::<[u8; 20]>()) {
        let f = &moduli()[idx];
        let a = f.element_big(big(&x));
        let bytes = a.serialize();
        prop_assert_eq!(bytes.len(), f.byte_width());
        prop_assert_eq!(f.deserialize(&bytes).unwrap(), a);
    }

    #[test]
    fn choose_prime_is_smallest(bound in 2u64..200_000) {
        let f = choose_prime(&BigUint::from(bound));
        let q = f.modulus().clone();
        prop_assert!(q >= BigUint::from(bound));
        prop_assert!(is_probable_prime(&q));
        let q = u64::try_from(q).unwrap();
        // oracle: trial division over the gap
        let prime = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        prop_assert!(prime(q));
        prop_assert!((bound..q).all(|n| !prime(n)));
    }

    #[test]
    fn mixing_fields_is_an_error(x in 0u64..11, y in 0u64..13) {
        let (f, g) = (Field::from_u64(11).unwrap(), Field::from_u64(13).unwrap());
        prop_assert_eq!(f.element(x).checked_add(&g.element(y)), Err(FieldError::ContextMismatch));
        prop_assert_eq!(f.element(x).checked_mul(&g.element(y)), Err(FieldError::ContextMismatch));
    }
}
