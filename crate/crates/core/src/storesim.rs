//! File-backed storage simulator.
//!
//! A directory holds `manifest.json` and one `node_<j>.blk` per node. A node
//! file is its r + 1 blocks concatenated in row order; symbols are single
//! bytes over GF(2^8) and big-endian pairs over GF(2^16).

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Elem, Field, FieldError};
use crate::lrc::{build_layout, Block, CodeParams, Lrc, LrcError, NodeContent};
use crate::rs::{RsCode, RsError};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent manifest: {0}")]
    Manifest(String),
    #[error("storage needs GF(2^8) or GF(2^16), got GF(2^{0})")]
    UnsupportedWidth(u32),
    #[error("node {0} is missing")]
    MissingNode(usize),
    #[error("node {0} already exists")]
    NodePresent(usize),
    #[error("node {node} has length {got}, expected {expected}")]
    NodeLength { node: usize, expected: usize, got: usize },
    #[error("checksum mismatch on node {node} block {row}")]
    Checksum { node: usize, row: usize },
    #[error("cannot repair node {failed} locally: group peer {peer} is missing")]
    PeerMissing { failed: usize, peer: usize },
    #[error("need at least {need} nodes to retrieve, have {have}")]
    InsufficientNodes { have: usize, need: usize },
    #[error(transparent)]
    Lrc(#[from] LrcError),
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub p: u32,
    pub modulus: u32,
    pub file_len: u64,
    pub pad_len: u64,
    /// Per node, `[row, index]` of each stored block.
    pub slots: Vec<Vec<[usize; 2]>>,
    /// Per node, CRC-32 of each stored block.
    pub crcs: Vec<Vec<u32>>,
}

impl Manifest {
    pub fn params(&self) -> Result<CodeParams, StoreError> {
        let field = Field::new(self.p, self.modulus)?;
        Ok(CodeParams::new(self.n, self.k, self.r, field)?)
    }

    pub fn symbol_bytes(&self) -> usize {
        self.p as usize / 8
    }

    /// Bytes per stored block.
    pub fn block_bytes(&self) -> usize {
        ((self.file_len + self.pad_len) as usize) / (self.r * self.k)
    }

    pub fn node_bytes(&self) -> usize {
        self.block_bytes() * (self.r + 1)
    }

    /// Checks the fields against each other and against the layout.
    pub fn validate(&self) -> Result<CodeParams, StoreError> {
        if self.version != FORMAT_VERSION {
            return Err(StoreError::Manifest(format!("unknown version {}", self.version)));
        }
        if self.p != 8 && self.p != 16 {
            return Err(StoreError::UnsupportedWidth(self.p));
        }
        let params = self.params()?;
        let stripe = (params.file_size() * self.symbol_bytes()) as u64;
        let total = self.file_len + self.pad_len;
        if total == 0 || !total.is_multiple_of(stripe) {
            return Err(StoreError::Manifest(format!(
                "padded length {total} is not a positive multiple of {stripe}"
            )));
        }
        let layout = build_layout(&params);
        let expected: Vec<Vec<[usize; 2]>> = layout
            .nodes()
            .map(|slots| slots.iter().map(|s| [s.row, s.index]).collect())
            .collect();
        if self.slots != expected {
            return Err(StoreError::Manifest("slot map does not match the layout".into()));
        }
        if self.crcs.len() != self.n || self.crcs.iter().any(|c| c.len() != self.r + 1) {
            return Err(StoreError::Manifest("checksum table has the wrong shape".into()));
        }
        Ok(params)
    }
}

pub fn node_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node_{node}.blk"))
}

fn symbol_width(field: &Field) -> Result<usize, StoreError> {
    match field.bits() {
        8 => Ok(1),
        16 => Ok(2),
        p => Err(StoreError::UnsupportedWidth(p)),
    }
}

fn to_symbols(bytes: &[u8], width: usize) -> Vec<Elem> {
    match width {
        1 => bytes.iter().map(|&b| Elem(b as u16)).collect(),
        _ => bytes
            .chunks(2)
            .map(|c| Elem(u16::from_be_bytes([c[0], *c.get(1).unwrap_or(&0)])))
            .collect(),
    }
}

fn to_bytes(symbols: &[Elem], width: usize, out: &mut Vec<u8>) {
    for s in symbols {
        if width == 1 {
            out.push(s.0 as u8);
        } else {
            out.extend_from_slice(&s.0.to_be_bytes());
        }
    }
}

fn block_bytes(block: &[Elem], width: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(block.len() * width);
    to_bytes(block, width, &mut out);
    out
}

/// Splits `data` into `M` zero-padded blocks of equal symbol count (at least
/// one symbol each). Returns the blocks and the padding in bytes.
pub fn stripe_file(data: &[u8], params: &CodeParams) -> Result<(Vec<Block>, u64), StoreError> {
    let width = symbol_width(params.field())?;
    let m = params.file_size();
    let symbols = data.len().div_ceil(width);
    let block_len = symbols.div_ceil(m).max(1);
    let mut padded = data.to_vec();
    padded.resize(m * block_len * width, 0);
    let all = to_symbols(&padded, width);
    let blocks = all.chunks(block_len).map(<[Elem]>::to_vec).collect();
    Ok((blocks, (padded.len() - data.len()) as u64))
}

/// Encodes `data` and writes the node files and manifest into `dir`.
pub fn store(data: &[u8], params: &CodeParams, dir: &Path) -> Result<Manifest, StoreError> {
    let width = symbol_width(params.field())?;
    let (blocks, pad_len) = stripe_file(data, params)?;
    let code = Lrc::new(params.clone())?;
    let nodes = code.encode(&blocks)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut crcs = Vec::with_capacity(nodes.len());
    for node in &nodes {
        let mut bytes = Vec::new();
        let mut node_crcs = Vec::new();
        for b in &node.blocks {
            let raw = block_bytes(b, width);
            node_crcs.push(crc32fast::hash(&raw));
            bytes.extend_from_slice(&raw);
        }
        let path = node_path(dir, node.node);
        fs::write(&path, &bytes).map_err(io_err(&path))?;
        crcs.push(node_crcs);
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        n: params.n(),
        k: params.k(),
        r: params.r(),
        p: params.field().bits(),
        modulus: params.field().modulus(),
        file_len: data.len() as u64,
        pad_len,
        slots: code
            .layout()
            .nodes()
            .map(|slots| slots.iter().map(|s| [s.row, s.index]).collect())
            .collect(),
        crcs,
    };
    write_manifest(dir, &manifest)?;
    log::debug!("stored {} bytes as {} nodes in {}", data.len(), params.n(), dir.display());
    Ok(manifest)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), StoreError> {
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text).map_err(io_err(&path))
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, StoreError> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    manifest.validate()?;
    Ok(manifest)
}

/// Nodes whose files exist.
pub fn present_nodes(dir: &Path, manifest: &Manifest) -> Vec<usize> {
    (0..manifest.n).filter(|&j| node_path(dir, j).is_file()).collect()
}

/// Reads blocks from node files and counts what it touches.
struct Reader<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
    contacted: BTreeSet<usize>,
    blocks: usize,
    bytes: usize,
    cache: Option<(usize, Vec<u8>)>,
}

impl<'a> Reader<'a> {
    fn new(dir: &'a Path, manifest: &'a Manifest) -> Self {
        Reader {
            dir,
            manifest,
            contacted: BTreeSet::new(),
            blocks: 0,
            bytes: 0,
            cache: None,
        }
    }

    fn open(&self, node: usize) -> Result<Vec<u8>, StoreError> {
        let path = node_path(self.dir, node);
        let raw = match fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::MissingNode(node)),
            Err(e) => return Err(io_err(&path)(e)),
        };
        if raw.len() != self.manifest.node_bytes() {
            return Err(StoreError::NodeLength {
                node,
                expected: self.manifest.node_bytes(),
                got: raw.len(),
            });
        }
        Ok(raw)
    }

    fn block(&mut self, node: usize, row: usize) -> Result<Block, StoreError> {
        if self.cache.as_ref().map(|c| c.0) != Some(node) {
            self.cache = Some((node, self.open(node)?));
        }
        let raw = &self.cache.as_ref().expect("filled above").1;
        let size = self.manifest.block_bytes();
        let bytes = &raw[row * size..(row + 1) * size];
        if crc32fast::hash(bytes) != self.manifest.crcs[node][row] {
            return Err(StoreError::Checksum { node, row });
        }
        self.contacted.insert(node);
        self.blocks += 1;
        self.bytes += size;
        Ok(to_symbols(bytes, self.manifest.symbol_bytes()))
    }

    fn node(&mut self, node: usize) -> Result<NodeContent, StoreError> {
        let blocks = (0..=self.manifest.r)
            .map(|row| self.block(node, row))
            .collect::<Result<_, _>>()?;
        Ok(NodeContent { node, blocks })
    }
}

/// Reads one node, verifying every block checksum.
pub fn read_node(dir: &Path, manifest: &Manifest, node: usize) -> Result<NodeContent, StoreError> {
    if node >= manifest.n {
        return Err(LrcError::UnknownNode(node).into());
    }
    Reader::new(dir, manifest).node(node)
}

fn write_node(dir: &Path, manifest: &Manifest, content: &NodeContent) -> Result<(), StoreError> {
    let width = manifest.symbol_bytes();
    let mut bytes = Vec::with_capacity(manifest.node_bytes());
    for b in &content.blocks {
        to_bytes(b, width, &mut bytes);
    }
    let path = node_path(dir, content.node);
    fs::write(&path, bytes).map_err(io_err(&path))
}

/// Deletes a node file.
pub fn fail_node(dir: &Path, node: usize) -> Result<(), StoreError> {
    let path = node_path(dir, node);
    match fs::remove_file(&path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::MissingNode(node)),
        Err(e) => Err(io_err(&path)(e)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairReport {
    pub failed: usize,
    pub contacted: Vec<usize>,
    pub blocks: usize,
    pub bytes: usize,
    pub elapsed: Duration,
    pub success: bool,
}

/// Rebuilds a missing node from the r other members of its group, reading
/// only the blocks the repair needs, and checks the result against the
/// manifest checksums before writing it.
pub fn repair(dir: &Path, node: usize) -> Result<RepairReport, StoreError> {
    let start = Instant::now();
    let manifest = load_manifest(dir)?;
    let params = manifest.validate()?;
    if node >= manifest.n {
        return Err(LrcError::UnknownNode(node).into());
    }
    if node_path(dir, node).exists() {
        return Err(StoreError::NodePresent(node));
    }
    let code = Lrc::new(params.clone())?;
    let plan = code.repair_plan(node)?;
    let mut reader = Reader::new(dir, &manifest);
    let width = manifest.symbol_bytes();
    let mut blocks = Vec::with_capacity(plan.len());
    for (row, step) in plan.iter().enumerate() {
        let mut acc = vec![Elem::ZERO; manifest.block_bytes() / width];
        for &(peer, peer_row) in &step.sources {
            let src = reader.block(peer, peer_row).map_err(|e| match e {
                StoreError::MissingNode(peer) => StoreError::PeerMissing { failed: node, peer },
                e => e,
            })?;
            acc.iter_mut().zip(&src).for_each(|(a, b)| a.0 ^= b.0);
        }
        if crc32fast::hash(&block_bytes(&acc, width)) != manifest.crcs[node][row] {
            return Err(StoreError::Checksum { node, row });
        }
        blocks.push(acc);
    }
    write_node(dir, &manifest, &NodeContent { node, blocks })?;
    Ok(RepairReport {
        failed: node,
        contacted: reader.contacted.into_iter().collect(),
        blocks: reader.blocks,
        bytes: reader.bytes,
        elapsed: start.elapsed(),
        success: true,
    })
}

/// Deletes a node and repairs it.
pub fn fail_and_repair(dir: &Path, node: usize) -> Result<RepairReport, StoreError> {
    let manifest = load_manifest(dir)?;
    let group = node / (manifest.r + 1) * (manifest.r + 1)..(node / (manifest.r + 1) + 1) * (manifest.r + 1);
    if let Some(peer) = group.filter(|&j| j != node).find(|&j| !node_path(dir, j).is_file()) {
        return Err(StoreError::PeerMissing { failed: node, peer });
    }
    fail_node(dir, node)?;
    repair(dir, node)
}

/// Decodes the file from the `allowed` nodes and, if `out` is given,
/// writes it there.
pub fn retrieve(dir: &Path, allowed: &[usize], out: Option<&Path>) -> Result<Vec<u8>, StoreError> {
    let manifest = load_manifest(dir)?;
    let params = manifest.validate()?;
    let allowed: BTreeSet<usize> = allowed.iter().copied().collect();
    if let Some(&bad) = allowed.iter().find(|&&j| j >= manifest.n) {
        return Err(LrcError::UnknownNode(bad).into());
    }
    if allowed.len() < manifest.k {
        return Err(StoreError::InsufficientNodes {
            have: allowed.len(),
            need: manifest.k,
        });
    }
    let mut reader = Reader::new(dir, &manifest);
    let nodes = allowed
        .iter()
        .map(|&j| reader.node(j))
        .collect::<Result<Vec<_>, _>>()?;
    let code = Lrc::new(params)?;
    let blocks = code.decode(&nodes)?;
    let mut data = Vec::with_capacity((manifest.file_len + manifest.pad_len) as usize);
    for b in &blocks {
        to_bytes(b, manifest.symbol_bytes(), &mut data);
    }
    if data.len() as u64 != manifest.file_len + manifest.pad_len {
        return Err(StoreError::Manifest("decoded length differs from manifest".into()));
    }
    data.truncate(manifest.file_len as usize);
    if let Some(path) = out {
        fs::write(path, &data).map_err(io_err(path))?;
    }
    Ok(data)
}

/// Storage and repair cost of one scheme over a failure trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeStats {
    /// Stored symbols per file symbol.
    pub overhead: f64,
    pub repairs: usize,
    pub nodes_contacted: usize,
    pub repair_blocks: usize,
    pub repair_bytes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub failures: Vec<usize>,
    pub lrc: SchemeStats,
    pub rs: SchemeStats,
}

/// Runs the same single-failure trace against the LRC and an (n, k) RS
/// code whose nodes also hold r + 1 blocks of `block_len` symbols. Every
/// repair is checked against the original node content.
pub fn compare_schemes(
    params: &CodeParams,
    failures: usize,
    block_len: usize,
    seed: u64,
) -> Result<ComparisonReport, StoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = params.field();
    let (n, k, r) = (params.n(), params.k(), params.r());
    let alpha = r + 1;
    let symbol_bytes = (f.bits() as usize).div_ceil(8);
    let block_bytes = block_len * symbol_bytes;
    let random_blocks = |count: usize, rng: &mut ChaCha8Rng| -> Vec<Block> {
        (0..count)
            .map(|_| (0..block_len).map(|_| f.random(rng)).collect())
            .collect()
    };
    let trace: Vec<usize> = (0..failures).map(|_| rng.gen_range(0..n)).collect();

    let lrc = Lrc::new(params.clone())?;
    let lrc_nodes = lrc.encode(&random_blocks(params.file_size(), &mut rng))?;
    let mut lrc_stats = SchemeStats {
        overhead: (n * alpha) as f64 / params.file_size() as f64,
        repairs: 0,
        nodes_contacted: 0,
        repair_blocks: 0,
        repair_bytes: 0,
    };
    for &failed in &trace {
        let donors: Vec<NodeContent> = params
            .group_members(params.group_of(failed))
            .filter(|&j| j != failed)
            .map(|j| lrc_nodes[j].clone())
            .collect();
        let rebuilt = lrc.repair_node(failed, &donors)?;
        assert_eq!(rebuilt, lrc_nodes[failed], "local repair must restore the node");
        let blocks: usize = donors.iter().map(|d| d.blocks.len()).sum();
        lrc_stats.repairs += 1;
        lrc_stats.nodes_contacted = donors.len();
        lrc_stats.repair_blocks += blocks;
        lrc_stats.repair_bytes += blocks * block_bytes;
    }

    // RS baseline: alpha independent stripes, node j holds position j of each.
    let rs = RsCode::new(f.clone(), n, k)?;
    let stripes = (0..alpha)
        .map(|_| rs.encode_blocks(&random_blocks(k, &mut rng)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rs_stats = SchemeStats {
        overhead: n as f64 / k as f64,
        repairs: 0,
        nodes_contacted: 0,
        repair_blocks: 0,
        repair_bytes: 0,
    };
    for &failed in &trace {
        let helpers: Vec<usize> = (0..n).filter(|&j| j != failed).take(k).collect();
        for stripe in &stripes {
            let symbols: Vec<(usize, &Block)> = helpers.iter().map(|&j| (j, &stripe[j])).collect();
            let message = rs.decode_blocks(&symbols)?;
            let rebuilt = rs.encode_blocks(&message)?;
            assert_eq!(rebuilt[failed], stripe[failed], "RS repair must restore the node");
        }
        let blocks = helpers.len() * alpha;
        rs_stats.repairs += 1;
        rs_stats.nodes_contacted = helpers.len();
        rs_stats.repair_blocks += blocks;
        rs_stats.repair_bytes += blocks * block_bytes;
    }
    Ok(ComparisonReport {
        failures: trace,
        lrc: lrc_stats,
        rs: rs_stats,
    })
}
