use crate::codec::Word;
use crate::crypto::{keccak256_concat, merkle_prove, merkle_root, Digest32, MerkleProof};

use super::{build_digest, OffchainError, SettlementRecord};

/// A window of records committed through a single Merkle root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub batch_id: Word,
    pub records: Vec<SettlementRecord>,
    pub leaves: Vec<Digest32>,
    pub root: Digest32,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn proof(&self, index: usize) -> Result<MerkleProof, OffchainError> {
        Ok(merkle_prove(&self.leaves, index)?)
    }
}

/// `keccak("batch" || root || count)`, with the count as 8 big-endian bytes.
pub fn batch_id(root: &Digest32, count: usize) -> Word {
    keccak256_concat(&[b"batch", root.as_bytes(), &(count as u64).to_be_bytes()]).0
}

pub fn build_batch(records: Vec<SettlementRecord>) -> Result<Batch, OffchainError> {
    if records.is_empty() {
        return Err(OffchainError::EmptyBatch);
    }
    let leaves = records.iter().map(build_digest).collect::<Result<Vec<_>, _>>()?;
    let root = merkle_root(&leaves)?;
    Ok(Batch { batch_id: batch_id(&root, records.len()), records, leaves, root })
}
