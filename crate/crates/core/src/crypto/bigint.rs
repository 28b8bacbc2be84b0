use num_bigint::BigUint;
use num_traits::Zero;

use super::CryptoError;

/// Minimal big-endian bytes behind a 4-byte big-endian length prefix.
/// Zero encodes as an empty body.
pub fn encode_biguint(value: &BigUint) -> Vec<u8> {
    let body = if value.is_zero() { Vec::new() } else { value.to_bytes_be() };
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

/// Inverse of [`encode_biguint`]; returns the value and the bytes consumed.
/// Rejects non-minimal bodies (leading zero bytes).
pub fn decode_biguint(bytes: &[u8]) -> Result<(BigUint, usize), CryptoError> {
    let len_bytes: [u8; 4] = bytes.get(..4).and_then(|s| s.try_into().ok()).ok_or(CryptoError::MalformedBigInt)?;
    let len = u32::from_be_bytes(len_bytes) as usize;
    let body = bytes.get(4..4 + len).ok_or(CryptoError::MalformedBigInt)?;
    if body.first() == Some(&0) {
        return Err(CryptoError::MalformedBigInt);
    }
    Ok((BigUint::from_bytes_be(body), 4 + len))
}

/// Left-pads to exactly `width` bytes, or `None` if the value does not fit.
pub fn to_fixed_width(value: &BigUint, width: usize) -> Option<Vec<u8>> {
    let bytes = if value.is_zero() { Vec::new() } else { value.to_bytes_be() };
    if bytes.len() > width {
        return None;
    }
    let mut out = vec![0u8; width - bytes.len()];
    out.extend_from_slice(&bytes);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_and_small_values() {
        assert_eq!(encode_biguint(&BigUint::zero()), vec![0, 0, 0, 0]);
        assert_eq!(encode_biguint(&BigUint::from(77u8)), vec![0, 0, 0, 1, 77]);
        assert_eq!(to_fixed_width(&BigUint::from(258u32), 4).unwrap(), vec![0, 0, 1, 2]);
        assert!(to_fixed_width(&BigUint::from(258u32), 1).is_none());
    }

    #[test]
    fn rejects_truncated_and_non_minimal() {
        assert!(decode_biguint(&[0, 0, 0, 2, 1]).is_err());
        assert!(decode_biguint(&[0, 0, 0, 2, 0, 1]).is_err());
        assert!(decode_biguint(&[0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..300), tail in proptest::collection::vec(any::<u8>(), 0..8)) {
            let value = BigUint::from_bytes_be(&bytes);
            let mut enc = encode_biguint(&value);
            let used = enc.len();
            enc.extend_from_slice(&tail);
            let (back, consumed) = decode_biguint(&enc).unwrap();
            prop_assert_eq!(back, value);
            prop_assert_eq!(consumed, used);
        }
    }
}
