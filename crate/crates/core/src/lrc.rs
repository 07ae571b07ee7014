//! The RS + XOR locally repairable code.
//!
//! A file of `M = r * k` blocks is split into r parts of k blocks. Each part is
//! encoded with the same systematic (n, k) RS code into `y^(1) .. y^(r)`, and a
//! parity stripe `s = y^(1) + .. + y^(r)` is added. The `(r + 1) * n` blocks are
//! placed on n nodes, r + 1 per node, in repair groups of r + 1 consecutive
//! nodes. Inside a group, each row of the placement is a cyclic shift of the
//! previous one, so every node holds r + 1 distinct indices and every index of
//! the group is held by all r + 1 nodes, once each.
//!
//! Node ids, rows and block indices are 0-based throughout. Row `i < r` holds
//! blocks of `y^(i+1)`; row `r` holds parity blocks.

use thiserror::Error;

use crate::field::{Elem, Field, FieldError, Matrix};
use crate::rs::{RsCode, RsError};
use crate::verifier::GeneratorView;

/// One stored block: one field element per striped position.
pub type Block = Vec<Elem>;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LrcError {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("file has {got} blocks, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {node} supplied {got} blocks, expected {expected}")]
    BadNodeContent {
        node: NodeId,
        expected: usize,
        got: usize,
    },
    #[error("blocks have unequal lengths")]
    RaggedBlocks,
    #[error("node {0} supplied more than once")]
    DuplicateNode(NodeId),
    #[error("donor {donor} is not in the repair group of node {failed}")]
    WrongGroup { failed: NodeId, donor: NodeId },
    #[error("repair of node {failed} is missing donor {missing}")]
    MissingDonor { failed: NodeId, missing: NodeId },
    #[error("need at least {need} nodes to decode, have {have}")]
    InsufficientNodes { have: usize, need: usize },
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Parameters of the explicit construction: `M = r * k`, `alpha = r + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeParams {
    n: usize,
    k: usize,
    r: usize,
    field: Field,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, r: usize, field: Field) -> Result<Self, LrcError> {
        if r == 0 {
            return Err(LrcError::InvalidParams("locality r must be at least 1".into()));
        }
        if k == 0 || k > n {
            return Err(LrcError::InvalidParams(format!("need 1 <= k <= n, got n={n} k={k}")));
        }
        if !n.is_multiple_of(r + 1) {
            return Err(LrcError::InvalidParams(format!(
                "r+1={} must divide n={n}",
                r + 1
            )));
        }
        if n > field.order() - 1 {
            return Err(LrcError::InvalidParams(format!(
                "n={n} exceeds q-1={} for GF(2^{})",
                field.order() - 1,
                field.bits()
            )));
        }
        Ok(CodeParams { n, k, r, field })
    }

    /// Parameters over the default GF(2^8).
    pub fn gf256(n: usize, k: usize, r: usize) -> Result<Self, LrcError> {
        CodeParams::new(n, k, r, Field::default())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// File size in blocks, `r * k`.
    pub fn file_size(&self) -> usize {
        self.r * self.k
    }

    /// Blocks per node, `r + 1`.
    pub fn alpha(&self) -> usize {
        self.r + 1
    }

    pub fn group_count(&self) -> usize {
        self.n / (self.r + 1)
    }

    pub fn group_of(&self, node: NodeId) -> usize {
        node / (self.r + 1)
    }

    pub fn group_members(&self, group: usize) -> std::ops::Range<NodeId> {
        group * (self.r + 1)..(group + 1) * (self.r + 1)
    }

    /// The construction meets the distance bound only when `(r + 1)` does not
    /// divide k.
    pub fn bound_is_tight(&self) -> bool {
        !self.k.is_multiple_of(self.r + 1)
    }
}

/// A (row, block index) position in the placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub row: usize,
    pub index: usize,
}

/// Which slots each node stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLayout {
    r: usize,
    slots: Vec<Vec<Slot>>,
}

/// Circular placement: local position t of group g stores, in row i, the
/// block with index `g * (r + 1) + (t + i) mod (r + 1)`.
pub fn build_layout(params: &CodeParams) -> NodeLayout {
    let width = params.r + 1;
    let slots = (0..params.n)
        .map(|node| {
            let (g, t) = (node / width, node % width);
            (0..width)
                .map(|row| Slot {
                    row,
                    index: g * width + (t + row) % width,
                })
                .collect()
        })
        .collect();
    NodeLayout { r: params.r, slots }
}

impl NodeLayout {
    pub fn node_count(&self) -> usize {
        self.slots.len()
    }

    pub fn node(&self, node: NodeId) -> &[Slot] {
        &self.slots[node]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[Slot]> {
        self.slots.iter().map(Vec::as_slice)
    }

    pub fn is_parity(&self, slot: Slot) -> bool {
        slot.row == self.r
    }

    /// The node storing `slot`.
    pub fn holder(&self, slot: Slot) -> NodeId {
        let width = self.r + 1;
        let g = slot.index / width;
        let within = slot.index % width;
        let t = (within + width - slot.row % width) % width;
        g * width + t
    }
}

/// The pre-coded stripes before placement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stripes {
    /// r message parts of k blocks each.
    pub parts: Vec<Vec<Block>>,
    /// r RS codewords of n blocks each.
    pub codewords: Vec<Vec<Block>>,
    /// XOR of the codewords, n blocks.
    pub parity: Vec<Block>,
}

/// Everything one node stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeContent {
    pub node: NodeId,
    /// r + 1 blocks in row order.
    pub blocks: Vec<Block>,
}

impl NodeContent {
    pub fn block_len(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }
}

/// Where each lost block of a failed node is read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairStep {
    pub lost: Slot,
    /// (donor node, donor row) for the r other blocks with the same index.
    pub sources: Vec<(NodeId, usize)>,
}

/// Encoder/decoder for one parameter set.
#[derive(Clone, Debug)]
pub struct Lrc {
    params: CodeParams,
    layout: NodeLayout,
    rs: RsCode,
}

impl Lrc {
    pub fn new(params: CodeParams) -> Result<Self, LrcError> {
        let rs = RsCode::new(params.field.clone(), params.n, params.k)?;
        let layout = build_layout(&params);
        Ok(Lrc { params, layout, rs })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn rs(&self) -> &RsCode {
        &self.rs
    }

    pub fn stripes<B: AsRef<[Elem]>>(&self, file: &[B]) -> Result<Stripes, LrcError> {
        let (k, r) = (self.params.k, self.params.r);
        if file.len() != r * k {
            return Err(LrcError::BadLength {
                expected: r * k,
                got: file.len(),
            });
        }
        let len = file.first().map_or(0, |b| b.as_ref().len());
        if file.iter().any(|b| b.as_ref().len() != len) {
            return Err(LrcError::RaggedBlocks);
        }
        let parts: Vec<Vec<Block>> = file
            .chunks(k)
            .map(|part| part.iter().map(|b| b.as_ref().to_vec()).collect())
            .collect();
        let codewords = parts
            .iter()
            .map(|part| self.rs.encode_blocks(part))
            .collect::<Result<Vec<_>, _>>()?;
        let mut parity = vec![vec![Elem::ZERO; len]; self.params.n];
        for cw in &codewords {
            for (s, y) in parity.iter_mut().zip(cw) {
                s.iter_mut().zip(y).for_each(|(a, b)| a.0 ^= b.0);
            }
        }
        Ok(Stripes {
            parts,
            codewords,
            parity,
        })
    }

    /// Encodes `r * k` equal-length blocks into n node contents.
    pub fn encode<B: AsRef<[Elem]>>(&self, file: &[B]) -> Result<Vec<NodeContent>, LrcError> {
        let stripes = self.stripes(file)?;
        Ok(self.place(&stripes))
    }

    /// Scalar form: one symbol per block.
    pub fn encode_symbols(&self, file: &[Elem]) -> Result<Vec<NodeContent>, LrcError> {
        let blocks: Vec<[Elem; 1]> = file.iter().map(|&e| [e]).collect();
        self.encode(&blocks)
    }

    fn place(&self, stripes: &Stripes) -> Vec<NodeContent> {
        self.layout
            .nodes()
            .enumerate()
            .map(|(node, slots)| NodeContent {
                node,
                blocks: slots
                    .iter()
                    .map(|s| {
                        if self.layout.is_parity(*s) {
                            stripes.parity[s.index].clone()
                        } else {
                            stripes.codewords[s.row][s.index].clone()
                        }
                    })
                    .collect(),
            })
            .collect()
    }

    /// For each of the failed node's r + 1 blocks, the r group peers' blocks
    /// sharing its index.
    pub fn repair_plan(&self, failed: NodeId) -> Result<Vec<RepairStep>, LrcError> {
        if failed >= self.params.n {
            return Err(LrcError::UnknownNode(failed));
        }
        let g = self.params.group_of(failed);
        Ok(self
            .layout
            .node(failed)
            .iter()
            .map(|&lost| {
                let sources = self
                    .params
                    .group_members(g)
                    .filter(|&peer| peer != failed)
                    .map(|peer| {
                        let row = self
                            .layout
                            .node(peer)
                            .iter()
                            .position(|s| s.index == lost.index)
                            .expect("every group member holds every group index");
                        (peer, row)
                    })
                    .collect();
                RepairStep { lost, sources }
            })
            .collect())
    }

    /// Rebuilds a failed node from the r other members of its group.
    ///
    /// Each lost block is the XOR of the r donor blocks that carry the same
    /// index, because `y^(1)_j + .. + y^(r)_j + s_j = 0`.
    pub fn repair_node(&self, failed: NodeId, donors: &[NodeContent]) -> Result<NodeContent, LrcError> {
        let plan = self.repair_plan(failed)?;
        let g = self.params.group_of(failed);
        let mut by_id: Vec<Option<&NodeContent>> = vec![None; self.params.n];
        for d in donors {
            if d.node >= self.params.n {
                return Err(LrcError::UnknownNode(d.node));
            }
            if d.node == failed || self.params.group_of(d.node) != g {
                return Err(LrcError::WrongGroup {
                    failed,
                    donor: d.node,
                });
            }
            if by_id[d.node].replace(d).is_some() {
                return Err(LrcError::DuplicateNode(d.node));
            }
            self.check_content(d)?;
        }
        if let Some(missing) = self
            .params
            .group_members(g)
            .find(|&m| m != failed && by_id[m].is_none())
        {
            return Err(LrcError::MissingDonor { failed, missing });
        }
        let len = donors[0].block_len();
        if donors.iter().any(|d| d.block_len() != len) {
            return Err(LrcError::RaggedBlocks);
        }
        let blocks = plan
            .iter()
            .map(|step| {
                let mut out = vec![Elem::ZERO; len];
                for &(peer, row) in &step.sources {
                    let src = &by_id[peer].expect("checked above").blocks[row];
                    out.iter_mut().zip(src).for_each(|(a, b)| a.0 ^= b.0);
                }
                out
            })
            .collect();
        Ok(NodeContent {
            node: failed,
            blocks,
        })
    }

    fn check_content(&self, c: &NodeContent) -> Result<(), LrcError> {
        if c.blocks.len() != self.params.alpha() {
            return Err(LrcError::BadNodeContent {
                node: c.node,
                expected: self.params.alpha(),
                got: c.blocks.len(),
            });
        }
        let len = c.block_len();
        if c.blocks.iter().any(|b| b.len() != len) {
            return Err(LrcError::RaggedBlocks);
        }
        Ok(())
    }

    /// Recovers the `r * k` file blocks from any k or more distinct nodes.
    ///
    /// Only the y rows are used: any k nodes hold k distinct indices of every
    /// codeword, which is enough for RS erasure decoding of each part.
    pub fn decode(&self, available: &[NodeContent]) -> Result<Vec<Block>, LrcError> {
        let mut seen = vec![false; self.params.n];
        for c in available {
            if c.node >= self.params.n {
                return Err(LrcError::UnknownNode(c.node));
            }
            if std::mem::replace(&mut seen[c.node], true) {
                return Err(LrcError::DuplicateNode(c.node));
            }
            self.check_content(c)?;
        }
        if available.len() < self.params.k {
            return Err(LrcError::InsufficientNodes {
                have: available.len(),
                need: self.params.k,
            });
        }
        let mut file = Vec::with_capacity(self.params.file_size());
        for part in 0..self.params.r {
            let symbols: Vec<(usize, &[Elem])> = available
                .iter()
                .map(|c| {
                    let slot = self.layout.node(c.node)[part];
                    debug_assert_eq!(slot.row, part);
                    (slot.index, c.blocks[part].as_slice())
                })
                .collect();
            file.extend(self.rs.decode_blocks(&symbols)?);
        }
        Ok(file)
    }

    pub fn decode_symbols(&self, available: &[NodeContent]) -> Result<Vec<Elem>, LrcError> {
        Ok(self.decode(available)?.into_iter().flatten().collect())
    }

    /// `M x n(r+1)` matrix G with `file * G` equal to the concatenated node
    /// contents, node j occupying columns `j(r+1) .. (j+1)(r+1)`.
    pub fn generator_view(&self) -> GeneratorView {
        let (n, k, r) = (self.params.n, self.params.k, self.params.r);
        let alpha = r + 1;
        let g = self.rs.generator();
        let mut m = Matrix::zeros(r * k, n * alpha);
        for (node, slots) in self.layout.nodes().enumerate() {
            for (col_off, slot) in slots.iter().enumerate() {
                let col = node * alpha + col_off;
                let parts: Vec<usize> = if self.layout.is_parity(*slot) {
                    (0..r).collect()
                } else {
                    vec![slot.row]
                };
                for part in parts {
                    for c in 0..k {
                        m[(part * k + c, col)] = g[(slot.index, c)];
                    }
                }
            }
        }
        GeneratorView::new(self.params.field.clone(), n, alpha, m)
            .expect("dimensions follow from the parameters")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rs::for_each_subset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lrc(n: usize, k: usize, r: usize) -> Lrc {
        Lrc::new(CodeParams::gf256(n, k, r).unwrap()).unwrap()
    }

    fn random_file(lrc: &Lrc, len: usize, seed: u64) -> Vec<Block> {
        let f = lrc.params().field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..lrc.params().file_size())
            .map(|_| (0..len).map(|_| f.random(&mut rng)).collect())
            .collect()
    }

    fn slot(row: usize, index: usize) -> Slot {
        Slot { row, index }
    }

    #[test]
    fn layout_matches_figure_nodes() {
        let layout = build_layout(&CodeParams::gf256(6, 4, 2).unwrap());
        // Paper node 1 -> (y1_1, y2_2, s_3); node 2 -> (y1_2, y2_3, s_1);
        // node 5 -> (y1_5, y2_6, s_4). Shifted to 0-based.
        assert_eq!(layout.node(0), &[slot(0, 0), slot(1, 1), slot(2, 2)]);
        assert_eq!(layout.node(1), &[slot(0, 1), slot(1, 2), slot(2, 0)]);
        assert_eq!(layout.node(2), &[slot(0, 2), slot(1, 0), slot(2, 1)]);
        assert_eq!(layout.node(4), &[slot(0, 4), slot(1, 5), slot(2, 3)]);
    }

    #[test]
    fn layout_invariants() {
        for (n, r) in [(6, 2), (4, 1), (12, 3), (12, 5), (10, 4), (8, 7)] {
            let params = CodeParams::gf256(n, 1, r).unwrap();
            let layout = build_layout(&params);
            for node in 0..n {
                let slots = layout.node(node);
                assert_eq!(slots.len(), r + 1);
                let mut idx: Vec<usize> = slots.iter().map(|s| s.index).collect();
                idx.sort_unstable();
                idx.dedup();
                assert_eq!(idx.len(), r + 1, "indices distinct on node {node}");
                assert!(idx.iter().all(|&i| params.group_of(i) == params.group_of(node)));
                for s in slots {
                    assert_eq!(layout.holder(*s), node);
                }
            }
            for index in 0..n {
                let holders: Vec<usize> = (0..n)
                    .filter(|&j| layout.node(j).iter().any(|s| s.index == index))
                    .collect();
                assert_eq!(holders.len(), r + 1);
                assert!(holders.iter().all(|&h| params.group_of(h) == params.group_of(index)));
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(CodeParams::gf256(7, 4, 2).is_err());
        assert!(CodeParams::gf256(6, 7, 2).is_err());
        assert!(CodeParams::gf256(6, 4, 0).is_err());
        assert!(CodeParams::gf256(256, 4, 1).is_err());
        assert!(CodeParams::new(16, 4, 3, Field::with_bits(4).unwrap()).is_err());
        assert!(CodeParams::new(12, 4, 3, Field::with_bits(4).unwrap()).is_ok());
        let p = CodeParams::gf256(6, 4, 2).unwrap();
        assert_eq!((p.file_size(), p.alpha(), p.group_count()), (8, 3, 2));
        assert!(p.bound_is_tight());
        assert!(!CodeParams::gf256(6, 3, 2).unwrap().bound_is_tight());
    }

    #[test]
    fn zero_file_gives_zero_nodes() {
        let code = lrc(6, 4, 2);
        let nodes = code.encode_symbols(&[Elem::ZERO; 8]).unwrap();
        assert_eq!(nodes.len(), 6);
        assert!(nodes.iter().all(|c| c.blocks.iter().flatten().all(|e| e.is_zero())));
        let repaired = code.repair_node(0, &nodes[1..3]).unwrap();
        assert_eq!(repaired, nodes[0]);
    }

    #[test]
    fn parity_is_xor_of_codewords() {
        let code = lrc(6, 4, 2);
        let file = random_file(&code, 3, 1);
        let st = code.stripes(&file).unwrap();
        let nodes = code.place(&st);
        // Paper node 2 holds (y1_2, y2_3, s_1) with s_1 = y1_1 + y2_1.
        assert_eq!(nodes[1].blocks[0], st.codewords[0][1]);
        assert_eq!(nodes[1].blocks[1], st.codewords[1][2]);
        let s1: Block = st.codewords[0][0]
            .iter()
            .zip(&st.codewords[1][0])
            .map(|(a, b)| Elem(a.0 ^ b.0))
            .collect();
        assert_eq!(nodes[1].blocks[2], s1);
        assert_eq!(st.parity[0], s1);
    }

    #[test]
    fn any_block_is_xor_of_the_other_r() {
        let code = lrc(12, 7, 3);
        let st = code.stripes(&random_file(&code, 4, 2)).unwrap();
        for j in 0..12 {
            let mut column: Vec<&Block> = st.codewords.iter().map(|c| &c[j]).collect();
            column.push(&st.parity[j]);
            for skip in 0..column.len() {
                let mut acc = vec![Elem::ZERO; 4];
                for (i, b) in column.iter().enumerate() {
                    if i != skip {
                        acc.iter_mut().zip(b.iter()).for_each(|(a, x)| a.0 ^= x.0);
                    }
                }
                assert_eq!(&acc, column[skip]);
            }
        }
    }

    #[test]
    fn figure_five_repair_plan() {
        let code = lrc(6, 4, 2);
        let plan = code.repair_plan(0).unwrap();
        // Lost y1_1 comes from s_1 on node 2 (row 3) and y2_1 on node 3 (row 2).
        assert_eq!(plan[0].lost, slot(0, 0));
        assert_eq!(plan[0].sources, vec![(1, 2), (2, 1)]);
        let contacted: std::collections::BTreeSet<usize> =
            plan.iter().flat_map(|s| s.sources.iter().map(|x| x.0)).collect();
        assert_eq!(contacted.into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(plan.iter().map(|s| s.sources.len()).sum::<usize>(), 6);
    }

    #[test]
    fn every_node_repairs_from_its_group() {
        for (n, k, r) in [(6, 4, 2), (9, 4, 2), (12, 7, 3), (4, 2, 1)] {
            let code = lrc(n, k, r);
            let nodes = code.encode(&random_file(&code, 5, n as u64)).unwrap();
            for failed in 0..n {
                let donors: Vec<NodeContent> = code
                    .params()
                    .group_members(code.params().group_of(failed))
                    .filter(|&j| j != failed)
                    .map(|j| nodes[j].clone())
                    .collect();
                assert_eq!(donors.len(), r);
                assert_eq!(code.repair_node(failed, &donors).unwrap(), nodes[failed]);
            }
        }
    }

    #[test]
    fn repair_rejects_bad_donors() {
        let code = lrc(6, 4, 2);
        let nodes = code.encode(&random_file(&code, 2, 3)).unwrap();
        assert_eq!(
            code.repair_node(0, &[nodes[1].clone(), nodes[3].clone()]),
            Err(LrcError::WrongGroup { failed: 0, donor: 3 })
        );
        assert_eq!(
            code.repair_node(0, &[nodes[1].clone()]),
            Err(LrcError::MissingDonor { failed: 0, missing: 2 })
        );
        assert_eq!(
            code.repair_node(0, &[nodes[1].clone(), nodes[1].clone()]),
            Err(LrcError::DuplicateNode(1))
        );
        assert!(matches!(code.repair_node(9, &nodes[1..3]), Err(LrcError::UnknownNode(9))));
    }

    #[test]
    fn every_k_subset_decodes() {
        for (n, k, r) in [(6, 4, 2), (9, 4, 2), (6, 2, 1), (8, 5, 3)] {
            let code = lrc(n, k, r);
            let file = random_file(&code, 3, 7);
            let nodes = code.encode(&file).unwrap();
            for_each_subset(n, k, |s| {
                let avail: Vec<NodeContent> = s.iter().map(|&j| nodes[j].clone()).collect();
                assert_eq!(code.decode(&avail).unwrap(), file, "({n},{k},{r}) nodes {s:?}");
            });
            assert_eq!(code.decode(&nodes).unwrap(), file);
        }
    }

    #[test]
    fn figure_six_nodes_two_to_five() {
        let code = lrc(6, 4, 2);
        let file = random_file(&code, 1, 9);
        let nodes = code.encode(&file).unwrap();
        assert_eq!(code.decode(&nodes[1..5]).unwrap(), file);
    }

    #[test]
    fn decode_needs_k_nodes() {
        let code = lrc(6, 4, 2);
        let nodes = code.encode(&random_file(&code, 1, 9)).unwrap();
        assert_eq!(
            code.decode(&nodes[..3]),
            Err(LrcError::InsufficientNodes { have: 3, need: 4 })
        );
        let dup = vec![nodes[0].clone(), nodes[0].clone(), nodes[1].clone(), nodes[2].clone()];
        assert_eq!(code.decode(&dup), Err(LrcError::DuplicateNode(0)));
    }

    #[test]
    fn encode_rejects_bad_length() {
        let code = lrc(6, 4, 2);
        assert_eq!(
            code.encode_symbols(&[Elem::ONE; 7]),
            Err(LrcError::BadLength { expected: 8, got: 7 })
        );
        let ragged = vec![vec![Elem::ONE; 2], vec![Elem::ONE; 3]];
        let mut file = vec![vec![Elem::ONE; 2]; 6];
        file.extend(ragged);
        assert_eq!(code.encode(&file), Err(LrcError::RaggedBlocks));
    }

    #[test]
    fn generator_view_reproduces_encoding() {
        for (n, k, r) in [(6, 4, 2), (9, 4, 2), (8, 3, 1)] {
            let code = lrc(n, k, r);
            let file = random_file(&code, 1, 21);
            let symbols: Vec<Elem> = file.iter().map(|b| b[0]).collect();
            let view = code.generator_view();
            let f = code.params().field();
            let coded = view.matrix().left_mul_vec(f, &symbols).unwrap();
            let nodes = code.encode(&file).unwrap();
            let stored: Vec<Elem> = nodes.iter().flat_map(|c| c.blocks.iter().map(|b| b[0])).collect();
            assert_eq!(coded, stored);
            assert_eq!(view.matrix().rank(f), code.params().file_size());
        }
    }

    #[test]
    fn generator_view_first_column() {
        let code = lrc(6, 4, 2);
        let view = code.generator_view();
        let g = code.rs().generator();
        // Node 0, slot 0 is y1_1: RS generator row 0 in stripe 1, zero elsewhere.
        for row in 0..8 {
            let want = if row < 4 { g[(0, row)] } else { Elem::ZERO };
            assert_eq!(view.matrix()[(row, 0)], want);
        }
    }

    #[test]
    fn rate_and_overhead_counts() {
        for (n, k, r) in [(6, 4, 2), (12, 7, 3), (10, 3, 4)] {
            let p = CodeParams::gf256(n, k, r).unwrap();
            let stored = p.n() * p.alpha();
            // M / (n alpha) == r/(r+1) * k/n  <=>  M (r+1) n == r k n alpha
            assert_eq!(p.file_size() * (r + 1) * n, r * k * stored);
            // stored == (r+1)/r * M * n/k
            assert_eq!(stored * r * k, (r + 1) * p.file_size() * n);
        }
    }
}
