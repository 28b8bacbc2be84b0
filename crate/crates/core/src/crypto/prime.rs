use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::keccak256;

/// Number of Miller-Rabin rounds; the witnesses are the first this-many primes.
pub const MILLER_RABIN_ROUNDS: usize = 64;

const WITNESSES: [u32; MILLER_RABIN_ROUNDS] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
];

/// Miller-Rabin with a fixed witness schedule, preceded by trial division by
/// the same small primes. Deterministic: no randomness is involved.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u32() {
        if small < 2 {
            return false;
        }
        if WITNESSES.contains(&small) {
            return true;
        }
    }
    for &p in &WITNESSES {
        if (n % p).is_zero() {
            return false;
        }
    }

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;

    'witness: for &a in &WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

/// Maps bytes to a prime representative: the low 128 bits of
/// `keccak256(data)`, forced odd (and at least 3), then stepped by 2 until the
/// primality test accepts.
pub fn hash_to_prime(data: &[u8]) -> BigUint {
    let digest = keccak256(data);
    let mut candidate = BigUint::from_bytes_be(&digest.0[16..]);
    candidate |= BigUint::one();
    if candidate < BigUint::from(3u8) {
        candidate = BigUint::from(3u8);
    }
    while !is_probable_prime(&candidate) {
        candidate += 2u8;
    }
    debug_assert!(candidate.is_odd());
    candidate
}
