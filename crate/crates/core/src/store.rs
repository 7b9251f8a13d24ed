//! Uniform block access to value vectors in RAM or on disk.
//!
//! Disk vectors are headerless little-endian arrays (4- or 8-byte floats),
//! so the byte offset of element `i` is exactly `i * width`; a sidecar
//! metadata file carries the instance description and checkpoint state.
//! Every transfer goes through [`VectorStore::read_block`] /
//! [`VectorStore::write_block`], and an optional recorder captures each
//! `(pass, op, offset, len)` so tests can prove that a full iteration only
//! ever touches the disk in contiguous, non-overlapping runs.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Bytes per stored element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementWidth {
    F32,
    F64,
}

impl ElementWidth {
    pub fn bytes(self) -> u64 {
        match self {
            ElementWidth::F32 => 4,
            ElementWidth::F64 => 8,
        }
    }

    pub fn from_bytes(b: u64) -> Result<Self> {
        match b {
            4 => Ok(ElementWidth::F32),
            8 => Ok(ElementWidth::F64),
            other => Err(Error::config(format!("element width must be 4 or 8, got {other}"))),
        }
    }
}

/// Where a store keeps its elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    Ram,
    Disk,
}

/// Chunking plan for the out-of-core recursion: the mismatch loops subdivide
/// their index range four ways per level until a leaf's input window (twice
/// the leaf output size) fits in RAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPlan {
    pub stop_depth: u32,
    /// Leaf output size: `2^(2(ell - stop_depth) - 2)` elements.
    pub chunk_elements: u64,
    /// Leaves per loop range: `4^stop_depth`.
    pub chunk_count: u64,
}

/// Picks the smallest `stop_depth` whose leaf working set (input window of
/// `2 * chunk_elements` plus one output block) fits the memory budget.
/// `stop_depth = 0` means a single chunk covers the whole range.
pub fn plan_recursion(ell: u32, width: ElementWidth, memory_budget: u64) -> Result<ChunkPlan> {
    if memory_budget < 4 * width.bytes() {
        return Err(Error::config(format!(
            "memory budget {} below one 4-element chunk",
            memory_budget
        )));
    }
    let max_depth = ell - 1;
    for stop_depth in 0..=max_depth {
        let chunk_elements = 1u64 << (2 * (ell - stop_depth) - 2);
        if 3 * chunk_elements * width.bytes() <= memory_budget {
            return Ok(ChunkPlan {
                stop_depth,
                chunk_elements,
                chunk_count: 1u64 << (2 * stop_depth),
            });
        }
    }
    // budget >= 4 * width always admits the one-element leaf
    Ok(ChunkPlan {
        stop_depth: max_depth,
        chunk_elements: 1u64 << (2 * (ell - max_depth) - 2),
        chunk_count: 1u64 << (2 * max_depth),
    })
}

/// Disk footprint of a binary-engine run: three generations of the
/// symmetry-halved vector.
pub fn disk_bytes_required(ell: u32, width: ElementWidth) -> u64 {
    3 * width.bytes() * (1u64 << (2 * ell - 1))
}

/// Free bytes on the filesystem holding `dir`.
pub fn free_disk_bytes(dir: &Path) -> Result<u64> {
    use std::os::unix::ffi::OsStrExt;
    let c_path = std::ffi::CString::new(dir.as_os_str().as_bytes())
        .map_err(|_| Error::config("directory path contains NUL"))?;
    let mut stat: libc::statvfs = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::statvfs(c_path.as_ptr(), &mut stat) };
    if rc != 0 {
        return Err(Error::Io {
            path: dir.to_path_buf(),
            offset: 0,
            source: std::io::Error::last_os_error(),
        });
    }
    Ok(stat.f_bavail as u64 * stat.f_frsize as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IoOp {
    Read,
    Write,
}

/// One recorded block transfer, in elements.
#[derive(Debug, Clone)]
pub struct IoLogEntry {
    pub store: String,
    pub pass: String,
    pub op: IoOp,
    pub offset: u64,
    pub len: u64,
}

enum Backing {
    Ram(Vec<f64>),
    Disk {
        file: File,
        path: PathBuf,
        width: ElementWidth,
        byte_buf: Vec<u8>,
    },
}

/// A fixed-length vector of reals living in RAM or in a single raw file.
pub struct VectorStore {
    label: String,
    len: u64,
    backing: Backing,
    pass: String,
    log: Option<Vec<IoLogEntry>>,
}

impl VectorStore {
    pub fn new_ram(label: &str, len: u64) -> Self {
        VectorStore {
            label: label.to_string(),
            len,
            backing: Backing::Ram(vec![0.0; len as usize]),
            pass: String::new(),
            log: None,
        }
    }

    /// Creates (or truncates) a zero-filled disk store.
    pub fn create_disk(label: &str, path: &Path, len: u64, width: ElementWidth) -> Result<Self> {
        let file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(true)
            .open(path)
            .map_err(|e| Error::Io {
                path: path.to_path_buf(),
                offset: 0,
                source: e,
            })?;
        file.set_len(len * width.bytes()).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            offset: 0,
            source: e,
        })?;
        Ok(VectorStore {
            label: label.to_string(),
            len,
            backing: Backing::Disk {
                file,
                path: path.to_path_buf(),
                width,
                byte_buf: Vec::new(),
            },
            pass: String::new(),
            log: None,
        })
    }

    /// Opens an existing disk store and checks its size matches.
    pub fn open_disk(label: &str, path: &Path, len: u64, width: ElementWidth) -> Result<Self> {
        let file = OpenOptions::new()
            .read(true)
            .write(true)
            .open(path)
            .map_err(|e| Error::Io {
                path: path.to_path_buf(),
                offset: 0,
                source: e,
            })?;
        let meta = file.metadata().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            offset: 0,
            source: e,
        })?;
        if meta.len() != len * width.bytes() {
            return Err(Error::Metadata {
                path: path.to_path_buf(),
                reason: format!(
                    "expected {} bytes ({} elements), found {}",
                    len * width.bytes(),
                    len,
                    meta.len()
                ),
            });
        }
        Ok(VectorStore {
            label: label.to_string(),
            len,
            backing: Backing::Disk {
                file,
                path: path.to_path_buf(),
                width,
                byte_buf: Vec::new(),
            },
            pass: String::new(),
            log: None,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: &str) {
        self.label = label.to_string();
    }

    pub fn mode(&self) -> StoreMode {
        match self.backing {
            Backing::Ram(_) => StoreMode::Ram,
            Backing::Disk { .. } => StoreMode::Disk,
        }
    }

    pub fn enable_recording(&mut self) {
        self.log = Some(Vec::new());
    }

    pub fn take_log(&mut self) -> Vec<IoLogEntry> {
        self.log.take().map(|l| {
            self.log = Some(Vec::new());
            l
        }).unwrap_or_default()
    }

    /// Names the I/O pass that subsequent transfers belong to.
    pub fn set_pass(&mut self, pass: &str) {
        if self.log.is_some() {
            self.pass = pass.to_string();
        }
    }

    fn record(&mut self, op: IoOp, offset: u64, len: u64) {
        if let Some(log) = &mut self.log {
            log.push(IoLogEntry {
                store: self.label.clone(),
                pass: self.pass.clone(),
                op,
                offset,
                len,
            });
        }
    }

    fn check_range(&self, offset: u64, len: u64) -> Result<()> {
        if offset.checked_add(len).map_or(true, |end| end > self.len) {
            return Err(Error::invalid(format!(
                "block [{offset}, {}) out of range for store of {} elements",
                offset + len,
                self.len
            )));
        }
        Ok(())
    }

    /// Reads `out.len()` elements starting at element `offset`.
    pub fn read_block(&mut self, offset: u64, out: &mut [f64]) -> Result<()> {
        self.check_range(offset, out.len() as u64)?;
        self.record(IoOp::Read, offset, out.len() as u64);
        match &mut self.backing {
            Backing::Ram(v) => {
                out.copy_from_slice(&v[offset as usize..offset as usize + out.len()]);
                Ok(())
            }
            Backing::Disk {
                file,
                path,
                width,
                byte_buf,
            } => {
                let w = width.bytes() as usize;
                byte_buf.resize(out.len() * w, 0);
                file.seek(SeekFrom::Start(offset * w as u64))
                    .and_then(|_| file.read_exact(byte_buf))
                    .map_err(|e| Error::Io {
                        path: path.clone(),
                        offset,
                        source: e,
                    })?;
                match width {
                    ElementWidth::F64 => {
                        for (slot, chunk) in out.iter_mut().zip(byte_buf.chunks_exact(8)) {
                            *slot = f64::from_le_bytes(chunk.try_into().unwrap());
                        }
                    }
                    ElementWidth::F32 => {
                        for (slot, chunk) in out.iter_mut().zip(byte_buf.chunks_exact(4)) {
                            *slot = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Writes `data` starting at element `offset`.
    pub fn write_block(&mut self, offset: u64, data: &[f64]) -> Result<()> {
        self.check_range(offset, data.len() as u64)?;
        self.record(IoOp::Write, offset, data.len() as u64);
        match &mut self.backing {
            Backing::Ram(v) => {
                v[offset as usize..offset as usize + data.len()].copy_from_slice(data);
                Ok(())
            }
            Backing::Disk {
                file,
                path,
                width,
                byte_buf,
            } => {
                let w = width.bytes() as usize;
                byte_buf.clear();
                byte_buf.reserve(data.len() * w);
                match width {
                    ElementWidth::F64 => {
                        for &v in data {
                            byte_buf.extend_from_slice(&v.to_le_bytes());
                        }
                    }
                    ElementWidth::F32 => {
                        for &v in data {
                            byte_buf.extend_from_slice(&(v as f32).to_le_bytes());
                        }
                    }
                }
                file.seek(SeekFrom::Start(offset * w as u64))
                    .and_then(|_| file.write_all(byte_buf))
                    .map_err(|e| Error::Io {
                        path: path.clone(),
                        offset,
                        source: e,
                    })
            }
        }
    }

    /// Flushes buffered writes to the device. A generation is only rotated
    /// after its data is durable.
    pub fn flush(&mut self) -> Result<()> {
        if let Backing::Disk { file, path, .. } = &mut self.backing {
            file.sync_data().map_err(|e| Error::Io {
                path: path.clone(),
                offset: 0,
                source: e,
            })?;
        }
        Ok(())
    }

    /// Reads the whole store (test and checkpoint-inspection helper).
    pub fn read_all(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len as usize];
        self.read_block(0, &mut out)?;
        Ok(out)
    }
}

/// How the transfers of one pass must be laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassShape {
    /// Arrival order strictly ascending, blocks back to back.
    Ascending,
    /// Arrival order strictly descending, blocks back to back.
    Descending,
    /// Blocks may arrive permuted (the four-way recursion visits input
    /// windows out of order) but must tile their range exactly.
    Tiling,
}

/// Classifies a pass label into its expected layout. Pass names follow the
/// engine convention `it<N>.<loop>.<stream>`.
pub fn pass_shape(pass: &str) -> PassShape {
    if pass.ends_with("l00.src.bwd") {
        PassShape::Descending
    } else if pass.ends_with("l01.src")
        || pass.ends_with("l10.src.fwd")
        || pass.ends_with("l10.src.bwd")
    {
        PassShape::Tiling
    } else {
        PassShape::Ascending
    }
}

/// Verifies that one pass's transfers are contiguous and non-overlapping:
/// individually they must be nonempty blocks; jointly they must tile
/// `[min, max)` exactly; and unless the pass is window-permuted, arrival
/// order must be monotone with adjacent blocks touching.
pub fn check_pass_layout(pass: &str, entries: &[(u64, u64)]) -> std::result::Result<(), String> {
    if entries.is_empty() {
        return Err(format!("pass {pass}: no transfers recorded"));
    }
    if entries.iter().any(|&(_, len)| len == 0) {
        return Err(format!("pass {pass}: empty transfer"));
    }
    match pass_shape(pass) {
        PassShape::Ascending => {
            for w in entries.windows(2) {
                if w[0].0 + w[0].1 != w[1].0 {
                    return Err(format!(
                        "pass {pass}: blocks [{}, {}) -> [{}, {}) not ascending-contiguous",
                        w[0].0,
                        w[0].0 + w[0].1,
                        w[1].0,
                        w[1].0 + w[1].1
                    ));
                }
            }
        }
        PassShape::Descending => {
            for w in entries.windows(2) {
                if w[1].0 + w[1].1 != w[0].0 {
                    return Err(format!(
                        "pass {pass}: blocks [{}, {}) -> [{}, {}) not descending-contiguous",
                        w[0].0,
                        w[0].0 + w[0].1,
                        w[1].0,
                        w[1].0 + w[1].1
                    ));
                }
            }
        }
        PassShape::Tiling => {
            let mut sorted: Vec<(u64, u64)> = entries.to_vec();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0].0 + w[0].1 > w[1].0 {
                    return Err(format!("pass {pass}: overlapping blocks"));
                }
                if w[0].0 + w[0].1 < w[1].0 {
                    return Err(format!("pass {pass}: gap between blocks"));
                }
            }
        }
    }
    Ok(())
}

/// Groups a recorded log by `(store, pass)`, preserving arrival order, and
/// checks every group with [`check_pass_layout`]. Entries from `capture`
/// passes (test snapshots) are ignored.
pub fn check_sequential_io(log: &[IoLogEntry]) -> std::result::Result<(), String> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, String), Vec<(u64, u64)>> = BTreeMap::new();
    for e in log {
        if e.pass == "capture" {
            continue;
        }
        groups
            .entry((e.store.clone(), e.pass.clone()))
            .or_default()
            .push((e.offset, e.len));
    }
    if groups.is_empty() {
        return Err("no recorded I/O".to_string());
    }
    for ((store, pass), entries) in &groups {
        check_pass_layout(pass, entries).map_err(|e| format!("store {store}: {e}"))?;
    }
    Ok(())
}

/// Key-value sidecar metadata (UTF-8, one `key: value` per line, `history:`
/// lines appended per iteration).
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        if key != "history" {
            if let Some(slot) = self.entries.iter_mut().find(|(k, _)| k == key) {
                slot.1 = value;
                return;
            }
        }
        self.entries.push((key.to_string(), value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str, path: &Path) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Metadata {
            path: path.to_path_buf(),
            reason: format!("missing key `{key}`"),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.entries {
            text.push_str(k);
            text.push_str(": ");
            text.push_str(v);
            text.push('\n');
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, path)).map_err(|e| {
            Error::Io {
                path: path.to_path_buf(),
                offset: 0,
                source: e,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            offset: 0,
            source: e,
        })?;
        let mut entries = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(':').ok_or_else(|| Error::Metadata {
                path: path.to_path_buf(),
                reason: format!("malformed line `{line}`"),
            })?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Metadata { entries })
    }
}
