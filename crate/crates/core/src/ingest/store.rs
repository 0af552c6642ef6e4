//! Per-discipline batch stores on top of LMDB.
//!
//! Layout: `<root>/<discipline code>/` holds one LMDB environment per
//! discipline, `<root>/unlabeled/` holds papers without labels. Keys are the
//! 8-byte big-endian batch index; values are encoded batches of [`TokenSeq`].
//!
//! Batch encoding (little-endian): `u32` sequence count, then per sequence a
//! `u64` paper id, a `u32` length and that many `u32` token ids.

use std::fmt;
use std::path::{Path, PathBuf};

use heed::byteorder::BigEndian;
use heed::types::{Bytes, U64};
use heed::{Database, Env, EnvOpenOptions};

use super::TokenSeq;

pub const DEFAULT_MAP_SIZE: usize = 1 << 30;
const UNLABELED_DIR: &str = "unlabeled";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("lmdb error in {dir}: {source}")]
    Lmdb { dir: String, source: heed::Error },
    #[error("batch {index} not found in store {partition}")]
    MissingKey { partition: Partition, index: u64 },
    #[error("corrupt batch value: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which store instance a batch lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partition {
    Discipline(u32),
    Unlabeled,
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Discipline(code) => write!(f, "{code}"),
            Partition::Unlabeled => f.write_str(UNLABELED_DIR),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchKey {
    pub partition: Partition,
    pub index: u64,
}

pub fn encode_batch(seqs: &[TokenSeq]) -> Vec<u8> {
    let width: usize = seqs.iter().map(|s| 12 + 4 * s.ids.len()).sum();
    let mut out = Vec::with_capacity(4 + width);
    out.extend_from_slice(&(seqs.len() as u32).to_le_bytes());
    for s in seqs {
        out.extend_from_slice(&s.paper_id.to_le_bytes());
        out.extend_from_slice(&(s.ids.len() as u32).to_le_bytes());
        for id in &s.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
    }
    out
}

pub fn decode_batch(mut bytes: &[u8]) -> Result<Vec<TokenSeq>, StoreError> {
    fn take<const N: usize>(bytes: &mut &[u8]) -> Result<[u8; N], StoreError> {
        if bytes.len() < N {
            return Err(StoreError::Corrupt(format!("truncated value, wanted {N} more bytes")));
        }
        let (head, tail) = bytes.split_at(N);
        *bytes = tail;
        Ok(head.try_into().expect("split_at returned N bytes"))
    }
    let n = u32::from_le_bytes(take::<4>(&mut bytes)?) as usize;
    let mut seqs = Vec::with_capacity(n);
    for _ in 0..n {
        let paper_id = u64::from_le_bytes(take::<8>(&mut bytes)?);
        let len = u32::from_le_bytes(take::<4>(&mut bytes)?) as usize;
        let mut ids = Vec::with_capacity(len);
        for _ in 0..len {
            ids.push(u32::from_le_bytes(take::<4>(&mut bytes)?));
        }
        seqs.push(TokenSeq { paper_id, ids });
    }
    if !bytes.is_empty() {
        return Err(StoreError::Corrupt(format!("{} trailing bytes", bytes.len())));
    }
    Ok(seqs)
}

/// One LMDB environment holding the batches of a single partition.
pub struct BatchStore {
    partition: Partition,
    dir: PathBuf,
    env: Env,
    db: Database<U64<BigEndian>, Bytes>,
}

impl BatchStore {
    pub fn open(dir: &Path, partition: Partition, map_size: usize) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir)?;
        let lmdb = |source| StoreError::Lmdb { dir: dir.display().to_string(), source };
        // SAFETY: the environment is opened once per path and process (heed
        // deduplicates handles) and the files are not modified outside LMDB.
        let env = unsafe { EnvOpenOptions::new().map_size(map_size).max_dbs(1).open(dir) }.map_err(lmdb)?;
        let mut wtxn = env.write_txn().map_err(lmdb)?;
        let db = env.create_database(&mut wtxn, Some("batches")).map_err(lmdb)?;
        wtxn.commit().map_err(lmdb)?;
        Ok(BatchStore { partition, dir: dir.to_path_buf(), env, db })
    }

    fn lmdb(&self, source: heed::Error) -> StoreError {
        StoreError::Lmdb { dir: self.dir.display().to_string(), source }
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    /// Replace the store contents with `seqs` cut into batches, in one commit.
    pub fn stage(&self, seqs: &[TokenSeq], batch_size: usize) -> Result<u64, StoreError> {
        let batch_size = batch_size.max(1);
        let mut wtxn = self.env.write_txn().map_err(|e| self.lmdb(e))?;
        self.db.clear(&mut wtxn).map_err(|e| self.lmdb(e))?;
        let mut n = 0u64;
        for chunk in seqs.chunks(batch_size) {
            self.db.put(&mut wtxn, &n, &encode_batch(chunk)).map_err(|e| self.lmdb(e))?;
            n += 1;
        }
        wtxn.commit().map_err(|e| self.lmdb(e))?;
        Ok(n)
    }

    pub fn fetch(&self, index: u64) -> Result<Vec<TokenSeq>, StoreError> {
        let rtxn = self.env.read_txn().map_err(|e| self.lmdb(e))?;
        let bytes = self
            .db
            .get(&rtxn, &index)
            .map_err(|e| self.lmdb(e))?
            .ok_or(StoreError::MissingKey { partition: self.partition, index })?;
        decode_batch(bytes)
    }

    pub fn batch_count(&self) -> Result<u64, StoreError> {
        let rtxn = self.env.read_txn().map_err(|e| self.lmdb(e))?;
        self.db.len(&rtxn).map_err(|e| self.lmdb(e))
    }

    /// Every staged sequence in key order.
    pub fn read_all(&self) -> Result<Vec<TokenSeq>, StoreError> {
        let rtxn = self.env.read_txn().map_err(|e| self.lmdb(e))?;
        let mut out = Vec::new();
        for item in self.db.iter(&rtxn).map_err(|e| self.lmdb(e))? {
            let (_, bytes) = item.map_err(|e| self.lmdb(e))?;
            out.extend(decode_batch(bytes)?);
        }
        Ok(out)
    }
}

/// Directory holding one [`BatchStore`] per discipline plus the unlabeled pool.
#[derive(Debug, Clone)]
pub struct StoreRoot {
    root: PathBuf,
    map_size: usize,
}

impl StoreRoot {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        StoreRoot { root: root.into(), map_size: DEFAULT_MAP_SIZE }
    }

    pub fn with_map_size(mut self, map_size: usize) -> Self {
        self.map_size = map_size;
        self
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn partition_dir(&self, partition: Partition) -> PathBuf {
        self.root.join(partition.to_string())
    }

    pub fn open(&self, partition: Partition) -> Result<BatchStore, StoreError> {
        BatchStore::open(&self.partition_dir(partition), partition, self.map_size)
    }

    /// Open a partition only if it has been staged before.
    pub fn open_existing(&self, partition: Partition) -> Result<Option<BatchStore>, StoreError> {
        if self.partition_dir(partition).join("data.mdb").exists() {
            self.open(partition).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn stage_batches(&self, seqs: &[TokenSeq], partition: Partition, batch_size: usize) -> Result<u64, StoreError> {
        self.open(partition)?.stage(seqs, batch_size)
    }

    pub fn fetch_batch(&self, key: BatchKey) -> Result<Vec<TokenSeq>, StoreError> {
        match self.open_existing(key.partition)? {
            Some(store) => store.fetch(key.index),
            None => Err(StoreError::MissingKey { partition: key.partition, index: key.index }),
        }
    }
}
