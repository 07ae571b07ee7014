//! Exhaustive distance and locality oracles for vector-linear codes.
//!
//! A code is given by its generator view: an `M x n*alpha` matrix whose
//! columns `j*alpha .. (j+1)*alpha` are the coefficients of the symbols stored
//! on node j. The joint entropy of a node set is the rank of its columns.

use thiserror::Error;

use crate::bounds::{distance_bound, BoundQuery};
use crate::field::{Basis, Elem, Field, FieldError, Matrix};
use crate::lrc::{CodeParams, Lrc, LrcError};
use crate::rs::for_each_subset;

/// Hard ceiling for the exponential searches.
pub const MAX_NODES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("matrix has {cols} columns, expected n*alpha = {expected}")]
    Shape { cols: usize, expected: usize },
    #[error("exhaustive search over {n} nodes refused (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Lrc(#[from] LrcError),
}

/// Generator of a code storing `alpha` symbols on each of n nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorView {
    field: Field,
    n: usize,
    alpha: usize,
    matrix: Matrix,
}

impl GeneratorView {
    pub fn new(field: Field, n: usize, alpha: usize, matrix: Matrix) -> Result<Self, VerifyError> {
        if matrix.cols() != n * alpha {
            return Err(VerifyError::Shape {
                cols: matrix.cols(),
                expected: n * alpha,
            });
        }
        Ok(GeneratorView {
            field,
            n,
            alpha,
            matrix,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// File size M (number of rows).
    pub fn file_size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn node_column_indices(&self, node: usize) -> std::ops::Range<usize> {
        node * self.alpha..(node + 1) * self.alpha
    }

    /// The alpha columns of `node`, each of length M.
    pub fn node_columns(&self, node: usize) -> Vec<Vec<Elem>> {
        self.node_column_indices(node)
            .map(|c| self.matrix.column(c))
            .collect()
    }

    /// Submatrix of the columns belonging to `nodes`, in the given order.
    pub fn columns_of(&self, nodes: &[usize]) -> Matrix {
        let cols: Vec<usize> = nodes
            .iter()
            .flat_map(|&j| self.node_column_indices(j))
            .collect();
        self.matrix.select_columns(&cols)
    }

    /// Entropy of a node set in symbols.
    pub fn rank_of(&self, nodes: &[usize]) -> usize {
        let mut basis = Basis::new(self.file_size());
        for &j in nodes {
            for col in self.node_columns(j) {
                basis.insert(&self.field, &col);
            }
        }
        basis.rank()
    }

    fn guard(&self) -> Result<(), VerifyError> {
        if self.n > MAX_NODES {
            return Err(VerifyError::TooLarge {
                n: self.n,
                limit: MAX_NODES,
            });
        }
        Ok(())
    }
}

/// Largest node set whose rank stays below M.
///
/// Depth-first over include/exclude decisions in node order, carrying the
/// running echelon basis. A branch dies as soon as its rank reaches M or it
/// cannot beat the best set found so far.
pub fn max_deficient_set(gen: &GeneratorView) -> Result<Vec<usize>, VerifyError> {
    gen.guard()?;
    let cols: Vec<Vec<Vec<Elem>>> = (0..gen.n).map(|j| gen.node_columns(j)).collect();
    let mut best = Vec::new();
    let mut current = Vec::new();
    let m = gen.file_size();
    if m == 0 {
        return Ok(best);
    }
    search(gen, &cols, 0, Basis::new(m), &mut current, &mut best);
    Ok(best)
}

fn search(
    gen: &GeneratorView,
    cols: &[Vec<Vec<Elem>>],
    next: usize,
    basis: Basis,
    current: &mut Vec<usize>,
    best: &mut Vec<usize>,
) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    if next == gen.n || current.len() + (gen.n - next) <= best.len() {
        return;
    }
    let mut with = basis.clone();
    for c in &cols[next] {
        with.insert(&gen.field, c);
    }
    if !with.is_full() {
        current.push(next);
        search(gen, cols, next + 1, with, current, best);
        current.pop();
    }
    search(gen, cols, next + 1, basis, current, best);
}

/// Minimum distance `n - max{|S| : rank(S) < M}`.
///
/// A code whose nodes together do not reach rank M cannot recover the file
/// at all and gets distance 0.
pub fn exact_distance(gen: &GeneratorView) -> Result<usize, VerifyError> {
    Ok(gen.n - max_deficient_set(gen)?.len())
}

/// A smallest node set whose columns span the columns of `node`, or `None`
/// when the other nodes together do not determine it.
pub fn repair_set(gen: &GeneratorView, node: usize) -> Result<Option<Vec<usize>>, VerifyError> {
    gen.guard()?;
    if node >= gen.n {
        return Err(VerifyError::UnknownNode(node));
    }
    let target = gen.node_columns(node);
    let others: Vec<usize> = (0..gen.n).filter(|&j| j != node).collect();
    let spans = |set: &[usize]| {
        let mut basis = Basis::new(gen.file_size());
        for &j in set {
            for c in gen.node_columns(j) {
                basis.insert(&gen.field, &c);
            }
        }
        target.iter().all(|c| basis.contains(&gen.field, c))
    };
    if !spans(&others) {
        return Ok(None);
    }
    for size in 0..=others.len() {
        let mut found = None;
        for_each_subset(others.len(), size, |pick| {
            if found.is_none() {
                let set: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
                if spans(&set) {
                    found = Some(set);
                }
            }
        });
        if found.is_some() {
            return Ok(found);
        }
    }
    unreachable!("the full set of other nodes spans the target")
}

/// Size of the smallest repair set of `node`; n when none exists.
pub fn exact_locality(gen: &GeneratorView, node: usize) -> Result<usize, VerifyError> {
    Ok(repair_set(gen, node)?.map_or(gen.n, |s| s.len()))
}

/// Coefficients X with `columns(helpers) * X = columns(node)`, checked by
/// multiplying back. `None` if the helpers do not span the node.
pub fn repair_coefficients(
    gen: &GeneratorView,
    node: usize,
    helpers: &[usize],
) -> Result<Option<Matrix>, VerifyError> {
    if let Some(&bad) = helpers.iter().chain([&node]).find(|&&j| j >= gen.n) {
        return Err(VerifyError::UnknownNode(bad));
    }
    let a = gen.columns_of(helpers);
    let b = gen.columns_of(&[node]);
    match a.solve_any(&gen.field, &b) {
        Ok(x) => {
            let back = a.mul(&gen.field, &x)?;
            Ok((back == b).then_some(x))
        }
        Err(FieldError::Inconsistent) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Result of checking an explicit construction exhaustively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub distance: usize,
    pub bound: i64,
    pub localities: Vec<usize>,
    /// Whether the distance is expected to meet the bound, false when (r+1) | k.
    pub bound_expected_tight: bool,
    pub any_k_decodable: bool,
}

impl Certificate {
    pub fn locality(&self) -> usize {
        self.localities.iter().copied().max().unwrap_or(0)
    }

    pub fn distance_ok(&self) -> bool {
        if self.bound_expected_tight {
            self.distance as i64 == self.bound
        } else {
            self.distance as i64 <= self.bound
        }
    }

    pub fn locality_ok(&self) -> bool {
        self.locality() == self.r
    }

    pub fn passed(&self) -> bool {
        self.distance_ok() && self.locality_ok() && self.any_k_decodable
    }
}

/// Builds the explicit code for `params` and checks distance, locality and
/// decodability from every k-subset of nodes.
pub fn certify(params: &CodeParams) -> Result<Certificate, VerifyError> {
    let code = Lrc::new(params.clone())?;
    let gen = code.generator_view();
    gen.guard()?;
    let distance = exact_distance(&gen)?;
    let bound = distance_bound(&BoundQuery {
        n: params.n(),
        r: params.r(),
        file_size: params.file_size(),
        alpha: params.alpha(),
    })
    .expect("valid code parameters give a valid query");
    let localities = (0..params.n())
        .map(|j| exact_locality(&gen, j))
        .collect::<Result<Vec<_>, _>>()?;
    let mut any_k_decodable = true;
    for_each_subset(params.n(), params.k(), |s| {
        if any_k_decodable && gen.rank_of(s) < gen.file_size() {
            any_k_decodable = false;
        }
    });
    Ok(Certificate {
        n: params.n(),
        k: params.k(),
        r: params.r(),
        distance,
        bound,
        localities,
        bound_expected_tight: params.bound_is_tight(),
        any_k_decodable,
    })
}
