//! Fixed-budget block buffer pool.
//!
//! The pool is the single owner of in-memory data blocks and the instrument
//! that counts every block read and written. The budget `M` and block size
//! `B` are both expressed in scalars (8-byte floats); the pool holds exactly
//! `M / B` frames. Eviction is LRU over unpinned frames; dirty frames are
//! written back lazily at eviction or `flush`.
//!
//! Block indices are file-absolute: index 0 is the header block of a matrix
//! file, data blocks start at 1. Header blocks are read outside the pool and
//! are never counted.

use std::cell::{Ref, RefCell, RefMut};
use std::collections::HashMap;
use std::fs::File;
use std::os::unix::fs::FileExt;
use std::path::PathBuf;
use std::rc::Rc;

use crate::error::{Error, Result};

pub const SCALAR_BYTES: u64 = 8;

/// Memory budget: `memory_scalars` (M) total resident scalars,
/// `block_scalars` (B) per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceBudget {
    memory_scalars: u64,
    block_scalars: u64,
}

impl ResourceBudget {
    pub fn new(memory_scalars: u64, block_scalars: u64) -> Result<Self> {
        if block_scalars == 0 || memory_scalars < 3 * block_scalars {
            return Err(Error::BudgetTooSmall {
                memory: memory_scalars,
                block: block_scalars,
                needed: 3 * block_scalars,
            });
        }
        if memory_scalars % block_scalars != 0 {
            return Err(Error::BudgetNotBlockAligned {
                memory: memory_scalars,
                block: block_scalars,
            });
        }
        Ok(ResourceBudget {
            memory_scalars,
            block_scalars,
        })
    }

    pub fn memory_scalars(&self) -> u64 {
        self.memory_scalars
    }

    pub fn block_scalars(&self) -> u64 {
        self.block_scalars
    }

    pub fn block_bytes(&self) -> u64 {
        self.block_scalars * SCALAR_BYTES
    }

    /// Number of block frames the pool may hold.
    pub fn frames(&self) -> u64 {
        self.memory_scalars / self.block_scalars
    }
}

/// Monotone I/O counters, reset only by `reset_counters`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoCounters {
    pub blocks_read: u64,
    pub blocks_written: u64,
    pub elements_computed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessMode {
    Read,
    /// The caller takes responsibility for the whole block content: a miss
    /// yields a zeroed frame without a disk read, and the frame is dirty.
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FileId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BlockKey {
    file: FileId,
    index: u64,
}

struct FileEntry {
    file: Option<File>,
    path: PathBuf,
}

struct FrameMeta {
    key: Option<BlockKey>,
    pins: u64,
    dirty: bool,
    last_used: u64,
}

struct PoolState {
    files: Vec<FileEntry>,
    map: HashMap<BlockKey, usize>,
    meta: Vec<FrameMeta>,
    tick: u64,
    counters: IoCounters,
    pinned_now: u64,
    peak_pinned: u64,
    window_peak: u64,
}

/// Single-threaded buffer pool. One pool per evaluation context.
pub struct BufferPool {
    budget: ResourceBudget,
    state: RefCell<PoolState>,
    // Frame payloads live outside `state` so a pinned block's data can be
    // borrowed while the pool metadata is updated for other blocks.
    frames: RefCell<Vec<Rc<RefCell<Box<[f64]>>>>>,
}

impl BufferPool {
    pub fn new(budget: ResourceBudget) -> Self {
        BufferPool {
            budget,
            state: RefCell::new(PoolState {
                files: Vec::new(),
                map: HashMap::new(),
                meta: Vec::new(),
                tick: 0,
                counters: IoCounters::default(),
                pinned_now: 0,
                peak_pinned: 0,
                window_peak: 0,
            }),
            frames: RefCell::new(Vec::new()),
        }
    }

    pub fn budget(&self) -> ResourceBudget {
        self.budget
    }

    pub fn register_file(&self, file: File, path: PathBuf) -> FileId {
        let mut st = self.state.borrow_mut();
        st.files.push(FileEntry {
            file: Some(file),
            path,
        });
        FileId(st.files.len() - 1)
    }

    /// Drops all cached blocks of `id` without write-back and closes the
    /// handle. Used when a temporary matrix is deleted.
    pub fn forget_file(&self, id: FileId) {
        let mut st = self.state.borrow_mut();
        let frames: Vec<usize> = st
            .map
            .iter()
            .filter(|(k, _)| k.file == id)
            .map(|(_, &f)| f)
            .collect();
        for f in frames {
            let key = st.meta[f].key.expect("mapped frame has a key");
            assert_eq!(st.meta[f].pins, 0, "forgetting a pinned block");
            st.map.remove(&key);
            st.meta[f].key = None;
            st.meta[f].dirty = false;
        }
        st.files[id.0].file = None;
    }

    pub fn stats(&self) -> IoCounters {
        self.state.borrow().counters
    }

    pub fn reset_counters(&self) {
        let mut st = self.state.borrow_mut();
        st.counters = IoCounters::default();
        st.peak_pinned = st.pinned_now;
        st.window_peak = st.pinned_now;
    }

    pub fn add_elements_computed(&self, n: u64) {
        self.state.borrow_mut().counters.elements_computed += n;
    }

    pub fn peak_pinned(&self) -> u64 {
        self.state.borrow().peak_pinned
    }

    pub fn pinned_now(&self) -> u64 {
        self.state.borrow().pinned_now
    }

    /// Starts a fresh peak-pinned measurement window (per-pipeline footprint
    /// checks). The lifetime peak is unaffected.
    pub fn reset_peak_window(&self) {
        let mut st = self.state.borrow_mut();
        st.window_peak = st.pinned_now;
    }

    pub fn peak_window(&self) -> u64 {
        self.state.borrow().window_peak
    }

    /// Scalars currently held by allocated frames.
    pub fn resident_scalars(&self) -> u64 {
        self.frames.borrow().len() as u64 * self.budget.block_scalars
    }

    /// Pins the block and returns a guard. Misses read from disk (Read mode)
    /// or install a zeroed frame (Write mode); either way the block stays
    /// resident until evicted, and eviction never touches pinned frames.
    pub fn get_block(&self, file: FileId, index: u64, mode: AccessMode) -> Result<BlockGuard<'_>> {
        let frame = {
            let mut st = self.state.borrow_mut();
            let key = BlockKey { file, index };
            st.tick += 1;
            let tick = st.tick;
            match st.map.get(&key).copied() {
                Some(frame) => {
                    st.meta[frame].last_used = tick;
                    st.meta[frame].pins += 1;
                    if mode == AccessMode::Write {
                        st.meta[frame].dirty = true;
                    }
                    st.pinned_now += 1;
                    st.peak_pinned = st.peak_pinned.max(st.pinned_now);
                    st.window_peak = st.window_peak.max(st.pinned_now);
                    frame
                }
                None => {
                    let frame = self.acquire_frame(&mut st)?;
                    {
                        let frames = self.frames.borrow();
                        let mut data = frames[frame].borrow_mut();
                        match mode {
                            AccessMode::Read => {
                                self.read_into(&st, key, &mut data)?;
                                st.counters.blocks_read += 1;
                            }
                            AccessMode::Write => data.fill(0.0),
                        }
                    }
                    st.map.insert(key, frame);
                    let m = &mut st.meta[frame];
                    m.key = Some(key);
                    m.pins = 1;
                    m.dirty = mode == AccessMode::Write;
                    m.last_used = tick;
                    st.pinned_now += 1;
                    st.peak_pinned = st.peak_pinned.max(st.pinned_now);
                    st.window_peak = st.window_peak.max(st.pinned_now);
                    frame
                }
            }
        };
        let data = self.frames.borrow()[frame].clone();
        Ok(BlockGuard {
            pool: self,
            frame,
            data,
        })
    }

    /// Writes back every dirty frame. Idempotent: a second flush with no
    /// intervening writes performs no I/O.
    pub fn flush(&self) -> Result<()> {
        let mut st = self.state.borrow_mut();
        for frame in 0..st.meta.len() {
            if st.meta[frame].dirty {
                let key = st.meta[frame].key.expect("dirty frame has a key");
                let frames = self.frames.borrow();
                let data = frames[frame].borrow();
                self.write_out(&st, key, &data)?;
                drop(data);
                drop(frames);
                st.meta[frame].dirty = false;
                st.counters.blocks_written += 1;
            }
        }
        Ok(())
    }

    /// Finds a free frame: reuse an empty slot, allocate within budget, or
    /// evict the least-recently-used unpinned frame (writing it back first
    /// if dirty).
    fn acquire_frame(&self, st: &mut PoolState) -> Result<usize> {
        if let Some(frame) = (0..st.meta.len()).find(|&f| st.meta[f].key.is_none()) {
            return Ok(frame);
        }
        if (st.meta.len() as u64) < self.budget.frames() {
            let mut frames = self.frames.borrow_mut();
            frames.push(Rc::new(RefCell::new(
                vec![0.0; self.budget.block_scalars as usize].into_boxed_slice(),
            )));
            let resident = frames.len() as u64 * self.budget.block_scalars;
            assert!(
                resident <= self.budget.memory_scalars,
                "resident scalars {} exceed budget {}",
                resident,
                self.budget.memory_scalars
            );
            st.meta.push(FrameMeta {
                key: None,
                pins: 0,
                dirty: false,
                last_used: 0,
            });
            return Ok(st.meta.len() - 1);
        }
        let victim = (0..st.meta.len())
            .filter(|&f| st.meta[f].pins == 0)
            .min_by_key(|&f| st.meta[f].last_used)
            .ok_or(Error::PoolExhausted {
                frames: self.budget.frames(),
            })?;
        if st.meta[victim].dirty {
            let key = st.meta[victim].key.expect("dirty frame has a key");
            let frames = self.frames.borrow();
            let data = frames[victim].borrow();
            self.write_out(st, key, &data)?;
            drop(data);
            drop(frames);
            st.counters.blocks_written += 1;
        }
        if let Some(key) = st.meta[victim].key.take() {
            st.map.remove(&key);
        }
        st.meta[victim].dirty = false;
        Ok(victim)
    }

    fn read_into(&self, st: &PoolState, key: BlockKey, data: &mut [f64]) -> Result<()> {
        let entry = &st.files[key.file.0];
        let file = entry.file.as_ref().expect("file forgotten while in use");
        let mut bytes = vec![0u8; self.budget.block_bytes() as usize];
        file.read_exact_at(&mut bytes, key.index * self.budget.block_bytes())
            .map_err(|e| Error::io(&entry.path, e))?;
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            data[i] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(())
    }

    fn write_out(&self, st: &PoolState, key: BlockKey, data: &[f64]) -> Result<()> {
        let entry = &st.files[key.file.0];
        let file = entry.file.as_ref().expect("file forgotten while in use");
        let mut bytes = Vec::with_capacity(self.budget.block_bytes() as usize);
        for v in data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        file.write_all_at(&bytes, key.index * self.budget.block_bytes())
            .map_err(|e| Error::io(&entry.path, e))
    }

    fn unpin(&self, frame: usize) {
        let mut st = self.state.borrow_mut();
        assert!(st.meta[frame].pins > 0);
        st.meta[frame].pins -= 1;
        st.pinned_now -= 1;
    }

    fn mark_dirty(&self, frame: usize) {
        self.state.borrow_mut().meta[frame].dirty = true;
    }
}

/// Pinned block handle; unpins on drop. Data access is runtime-checked, so
/// hold at most one mutable view of a block at a time.
pub struct BlockGuard<'p> {
    pool: &'p BufferPool,
    frame: usize,
    data: Rc<RefCell<Box<[f64]>>>,
}

impl BlockGuard<'_> {
    pub fn data(&self) -> Ref<'_, [f64]> {
        Ref::map(self.data.borrow(), |b| &**b)
    }

    /// Mutable view; marks the frame dirty.
    pub fn data_mut(&self) -> RefMut<'_, [f64]> {
        self.pool.mark_dirty(self.frame);
        RefMut::map(self.data.borrow_mut(), |b| &mut **b)
    }
}

impl Drop for BlockGuard<'_> {
    fn drop(&mut self) {
        self.pool.unpin(self.frame);
    }
}
