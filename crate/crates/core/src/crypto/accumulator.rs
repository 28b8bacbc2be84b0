//! RSA accumulator over prime representatives.
//!
//! `A = g^(r_1 * ... * r_n) mod N`. Witnesses are the accumulator over all
//! members but one, so membership is a single modular exponentiation. There
//! is no trapdoor: removal recomputes from the retained member set.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;

use super::{is_probable_prime, CryptoError};

/// RSA-2048 challenge modulus. Its factorisation is unknown, which makes it a
/// convenient pinned trusted-setup artifact for simulation runs.
pub const RSA_2048_MODULUS: &str = "25195908475657893494027183240048398571429282126204032027777137836043662020707595556264018525880784406918290641249515082189298559149176184502808489120072844992687392807287776735971418347270261896375014971824691165077613379859095700097330459748808428401797429100642458691817195118746121515172654632282216869987549182422433637259085141865462043576798423387184774447920739934236584823824281198163815010674810451660377306056201619676256133844143603833904414952634432190114657544454178424020924616515723350778707749817125772467962926386356373289912154831438167899885040445364023527381951378636564391212010397122822120720357";

const DEFAULT_GENERATOR: u32 = 65537;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulatorParams {
    pub modulus: BigUint,
    pub generator: BigUint,
}

impl AccumulatorParams {
    pub fn new(modulus: BigUint, generator: BigUint) -> Result<Self, CryptoError> {
        if modulus < BigUint::from(3u8) {
            return Err(CryptoError::InvalidParams("modulus must be at least 3"));
        }
        if generator < BigUint::from(2u8) || generator >= modulus {
            return Err(CryptoError::InvalidParams("generator must lie in [2, N-1]"));
        }
        Ok(Self { modulus, generator })
    }

    /// The pinned 2048-bit modulus with generator 65537.
    pub fn rsa2048() -> Self {
        let modulus = RSA_2048_MODULUS.parse().expect("pinned modulus parses");
        Self { modulus, generator: BigUint::from(DEFAULT_GENERATOR) }
    }

    /// Byte length of the modulus; fixed-width encodings of residues use it.
    pub fn width(&self) -> usize {
        self.modulus.to_bytes_be().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub element_prime: BigUint,
    pub value: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulatorState {
    params: AccumulatorParams,
    value: BigUint,
    members: BTreeSet<BigUint>,
}

impl AccumulatorState {
    pub fn new(params: AccumulatorParams) -> Self {
        let value = params.generator.clone();
        Self { params, value, members: BTreeSet::new() }
    }

    pub fn params(&self) -> &AccumulatorParams {
        &self.params
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn members(&self) -> &BTreeSet<BigUint> {
        &self.members
    }

    pub fn contains(&self, r: &BigUint) -> bool {
        self.members.contains(r)
    }

    pub fn add(&self, r: &BigUint) -> Result<Self, CryptoError> {
        if self.members.contains(r) {
            return Err(CryptoError::AlreadyAccumulated);
        }
        if !is_probable_prime(r) {
            return Err(CryptoError::NotPrime);
        }
        let mut next = self.clone();
        next.value = self.value.modpow(r, &self.params.modulus);
        next.members.insert(r.clone());
        Ok(next)
    }

    pub fn remove(&self, r: &BigUint) -> Result<Self, CryptoError> {
        if !self.members.contains(r) {
            return Err(CryptoError::NotAccumulated);
        }
        let mut members = self.members.clone();
        members.remove(r);
        let value = self.power_of_generator(members.iter());
        Ok(Self { params: self.params.clone(), value, members })
    }

    pub fn witness(&self, r: &BigUint) -> Result<Witness, CryptoError> {
        if !self.members.contains(r) {
            return Err(CryptoError::NotAccumulated);
        }
        let value = self.power_of_generator(self.members.iter().filter(|m| *m != r));
        Ok(Witness { element_prime: r.clone(), value })
    }

    /// Witnesses for every member, computed by recursive halving so the total
    /// exponentiation work is O(n log n) instead of O(n^2).
    pub fn all_witnesses(&self) -> BTreeMap<BigUint, Witness> {
        let members: Vec<&BigUint> = self.members.iter().collect();
        let mut out = BTreeMap::new();
        if !members.is_empty() {
            root_factor(&self.params.generator, &members, &self.params.modulus, &mut out);
        }
        out
    }

    fn power_of_generator<'a>(&self, exponents: impl Iterator<Item = &'a BigUint>) -> BigUint {
        let exponent: BigUint = exponents.product();
        self.params.generator.modpow(&exponent, &self.params.modulus)
    }
}

fn root_factor(base: &BigUint, members: &[&BigUint], modulus: &BigUint, out: &mut BTreeMap<BigUint, Witness>) {
    if let [only] = members {
        out.insert((*only).clone(), Witness { element_prime: (*only).clone(), value: base.clone() });
        return;
    }
    let (left, right) = members.split_at(members.len() / 2);
    let right_product: BigUint = right.iter().copied().product();
    let left_product: BigUint = left.iter().copied().product();
    root_factor(&base.modpow(&right_product, modulus), left, modulus, out);
    root_factor(&base.modpow(&left_product, modulus), right, modulus, out);
}

/// `W^r mod N == A`, with both residues required to lie in `[1, N-1]`.
/// One modular exponentiation regardless of how many members `A` commits to.
pub fn acc_verify(a: &BigUint, w: &BigUint, r: &BigUint, n: &BigUint) -> bool {
    let one = BigUint::one();
    if *n <= one || *a < one || *a >= *n || *w < one || *w >= *n {
        return false;
    }
    w.modpow(r, n) == *a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> AccumulatorState {
        AccumulatorState::new(AccumulatorParams::new(77u32.into(), 2u32.into()).unwrap())
    }

    fn big(n: u32) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn add_three_then_five() {
        let acc = tiny().add(&big(3)).unwrap().add(&big(5)).unwrap();
        assert_eq!(acc.value(), &big(43));
        assert_eq!(tiny().add(&big(7)).unwrap().value(), &big(2u32.pow(7) % 77));
    }

    #[test]
    fn duplicate_and_non_prime_rejected() {
        let acc = tiny().add(&big(3)).unwrap();
        assert_eq!(acc.add(&big(3)), Err(CryptoError::AlreadyAccumulated));
        assert_eq!(acc.add(&big(9)), Err(CryptoError::NotPrime));
    }

    #[test]
    fn remove_recomputes_from_retained_members() {
        let acc = tiny().add(&big(3)).unwrap().add(&big(5)).unwrap();
        assert_eq!(acc.remove(&big(5)).unwrap().value(), &big(8));
        let only = tiny().add(&big(3)).unwrap();
        assert_eq!(only.remove(&big(3)).unwrap().value(), &big(2));
        assert_eq!(acc.remove(&big(11)), Err(CryptoError::NotAccumulated));
    }

    #[test]
    fn witnesses_for_small_set() {
        let acc = tiny().add(&big(3)).unwrap().add(&big(5)).unwrap();
        assert_eq!(acc.witness(&big(3)).unwrap().value, big(32));
        assert_eq!(acc.witness(&big(5)).unwrap().value, big(8));
        assert!(acc.witness(&big(7)).is_err());
        let single = tiny().add(&big(13)).unwrap();
        assert_eq!(single.witness(&big(13)).unwrap().value, big(2));
    }

    #[test]
    fn verify_examples() {
        let n = big(77);
        assert!(acc_verify(&big(43), &big(32), &big(3), &n));
        // 32^5 mod 77 = 65
        assert!(!acc_verify(&big(43), &big(32), &big(5), &n));
        assert!(!acc_verify(&big(0), &big(32), &big(3), &n));
        assert!(!acc_verify(&big(43), &big(77), &big(3), &n));
    }

    #[test]
    fn stale_witness_needs_refresh_after_removal() {
        let acc = tiny().add(&big(3)).unwrap().add(&big(5)).unwrap().add(&big(7)).unwrap();
        let stale = acc.witness(&big(3)).unwrap();
        let after = acc.remove(&big(5)).unwrap();
        assert!(!acc_verify(after.value(), &stale.value, &big(3), &big(77)));
        let fresh = after.witness(&big(3)).unwrap();
        assert!(acc_verify(after.value(), &fresh.value, &big(3), &big(77)));
    }

    #[test]
    fn all_witnesses_match_direct_computation() {
        let mut acc = tiny();
        for p in [3u32, 5, 13, 17, 19, 23, 29] {
            acc = acc.add(&big(p)).unwrap();
        }
        let all = acc.all_witnesses();
        assert_eq!(all.len(), 7);
        for (r, w) in &all {
            assert_eq!(w, &acc.witness(r).unwrap());
        }
    }

    #[test]
    fn pinned_modulus_is_2048_bits() {
        let params = AccumulatorParams::rsa2048();
        assert_eq!(params.modulus.bits(), 2048);
        assert_eq!(params.width(), 256);
    }
}
