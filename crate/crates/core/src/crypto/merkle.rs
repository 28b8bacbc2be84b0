//! Binary Merkle tree with positional pairing.
//!
//! Parents are `keccak256(left || right)`. When a level has an odd number of
//! nodes the last one is promoted unchanged, so proofs only carry siblings for
//! levels where the node was actually paired.

use super::{keccak256_concat, CryptoError, Digest32};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub leaf_index: usize,
    /// Bottom-up; levels where the node was promoted contribute nothing.
    pub siblings: Vec<Digest32>,
    pub tree_size: usize,
}

fn hash_pair(left: &Digest32, right: &Digest32) -> Digest32 {
    keccak256_concat(&[left.as_ref(), right.as_ref()])
}

fn next_level(level: &[Digest32]) -> Vec<Digest32> {
    level
        .chunks(2)
        .map(|pair| match pair {
            [l, r] => hash_pair(l, r),
            [single] => *single,
            _ => unreachable!(),
        })
        .collect()
}

pub fn merkle_root(leaves: &[Digest32]) -> Result<Digest32, CryptoError> {
    if leaves.is_empty() {
        return Err(CryptoError::EmptyBatch);
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        level = next_level(&level);
    }
    Ok(level[0])
}

pub fn merkle_prove(leaves: &[Digest32], index: usize) -> Result<MerkleProof, CryptoError> {
    if index >= leaves.len() {
        return Err(CryptoError::IndexOutOfRange { index, len: leaves.len() });
    }
    let mut siblings = Vec::new();
    let mut level = leaves.to_vec();
    let mut pos = index;
    while level.len() > 1 {
        let sibling = pos ^ 1;
        if sibling < level.len() {
            siblings.push(level[sibling]);
        }
        level = next_level(&level);
        pos /= 2;
    }
    Ok(MerkleProof { leaf_index: index, siblings, tree_size: leaves.len() })
}

/// Folds `leaf` up through the proof. Uses at most `siblings.len()` hash
/// evaluations; any structural inconsistency yields `false`.
pub fn merkle_verify(root: &Digest32, leaf: &Digest32, proof: &MerkleProof) -> bool {
    if proof.tree_size == 0 || proof.leaf_index >= proof.tree_size {
        return false;
    }
    let mut acc = *leaf;
    let mut pos = proof.leaf_index;
    let mut width = proof.tree_size;
    let mut siblings = proof.siblings.iter();
    while width > 1 {
        if pos ^ 1 < width {
            let Some(sibling) = siblings.next() else {
                return false;
            };
            acc = if pos.is_multiple_of(2) { hash_pair(&acc, sibling) } else { hash_pair(sibling, &acc) };
        }
        pos /= 2;
        width = width.div_ceil(2);
    }
    siblings.next().is_none() && acc == *root
}
