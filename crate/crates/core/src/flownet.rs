//! Information flow graph for codes with locality, its multicast capacity,
//! and random linear network coding over it.
//!
//! Vertices: a source X, one vertex per repair group, an in/out pair per
//! storage node, and one data collector per (n-d+1)-subset of nodes. Edges
//! X -> group carry r*alpha, group -> member in-vertex r*alpha, in -> out
//! alpha, and out -> collector alpha.

use std::collections::HashMap;
use std::fmt::Write as _;

use petgraph::algo::ford_fulkerson;
use petgraph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bounds::{ceil_div, distance_bound, BoundQuery, BoundsError};
use crate::field::{Field, FieldError, Matrix};
use crate::rs::{binomial, for_each_subset};
use crate::verifier::{GeneratorView, VerifyError};

/// Refuse to materialize more collectors than this.
pub const MAX_COLLECTORS: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("r+1={group} must divide n={n}")]
    NotDivisible { n: usize, group: usize },
    #[error("distance bound d={d} is below 1")]
    NoDistance { d: i64 },
    #[error("need r <= n-d, got r={r} n-d={slack}")]
    LocalityTooLarge { r: usize, slack: usize },
    #[error("{0} data collectors are too many to enumerate")]
    TooManyCollectors(u128),
    #[error("closed-form capacity {closed_form} differs from ceil(M/alpha)*alpha = {expected}")]
    CapacityMismatch { closed_form: usize, expected: usize },
    #[error("trial {0} did not satisfy every rank condition")]
    FailedTrial(usize),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Vertex {
    Source,
    Group(usize),
    NodeIn(usize),
    NodeOut(usize),
    Collector(usize),
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::Source => write!(f, "X"),
            Vertex::Group(g) => write!(f, "Gamma{g}"),
            Vertex::NodeIn(i) => write!(f, "Y{i}_in"),
            Vertex::NodeOut(i) => write!(f, "Y{i}_out"),
            Vertex::Collector(t) => write!(f, "DC{t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
    pub capacity: usize,
}

#[derive(Clone, Debug)]
pub struct FlowNet {
    n: usize,
    r: usize,
    file_size: usize,
    alpha: usize,
    d: usize,
    collectors: Vec<Vec<usize>>,
}

/// Builds the graph for length n, locality r, file size M and node size
/// alpha, with d set to the distance bound.
pub fn build_flownet(n: usize, r: usize, file_size: usize, alpha: usize) -> Result<FlowNet, FlowError> {
    let d = distance_bound(&BoundQuery {
        n,
        r,
        file_size,
        alpha,
    })?;
    if !n.is_multiple_of(r + 1) {
        return Err(FlowError::NotDivisible { n, group: r + 1 });
    }
    if d < 1 {
        return Err(FlowError::NoDistance { d });
    }
    let d = d as usize;
    if r > n - d {
        return Err(FlowError::LocalityTooLarge { r, slack: n - d });
    }
    let fan_in = n - d + 1;
    let t = binomial(n, fan_in);
    if t > MAX_COLLECTORS {
        return Err(FlowError::TooManyCollectors(t));
    }
    let mut collectors = Vec::with_capacity(t as usize);
    for_each_subset(n, fan_in, |s| collectors.push(s.to_vec()));
    Ok(FlowNet {
        n,
        r,
        file_size,
        alpha,
        d,
        collectors,
    })
}

impl FlowNet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn file_size(&self) -> usize {
        self.file_size
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn distance(&self) -> usize {
        self.d
    }

    pub fn group_count(&self) -> usize {
        self.n / (self.r + 1)
    }

    pub fn group_members(&self, g: usize) -> std::ops::Range<usize> {
        g * (self.r + 1)..(g + 1) * (self.r + 1)
    }

    /// The node subsets F_t, in lexicographic order.
    pub fn collectors(&self) -> &[Vec<usize>] {
        &self.collectors
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.group_count() + 2 * self.n + self.collectors.len()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let ra = self.r * self.alpha;
        let mut edges = Vec::new();
        for g in 0..self.group_count() {
            edges.push(Edge {
                from: Vertex::Source,
                to: Vertex::Group(g),
                capacity: ra,
            });
        }
        for i in 0..self.n {
            edges.push(Edge {
                from: Vertex::Group(i / (self.r + 1)),
                to: Vertex::NodeIn(i),
                capacity: ra,
            });
        }
        for i in 0..self.n {
            edges.push(Edge {
                from: Vertex::NodeIn(i),
                to: Vertex::NodeOut(i),
                capacity: self.alpha,
            });
        }
        for (t, set) in self.collectors.iter().enumerate() {
            for &i in set {
                edges.push(Edge {
                    from: Vertex::NodeOut(i),
                    to: Vertex::Collector(t),
                    capacity: self.alpha,
                });
            }
        }
        edges
    }

    /// One `u v capacity` line per edge.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for e in self.edges() {
            writeln!(out, "{} {} {}", e.from, e.to, e.capacity).expect("writing to a String");
        }
        out
    }

    /// Max flow from X to collector `t`.
    pub fn max_flow_to(&self, t: usize) -> usize {
        let mut graph = Graph::<Vertex, usize>::new();
        let mut index = HashMap::new();
        for e in self.edges() {
            if matches!(e.to, Vertex::Collector(c) if c != t) {
                continue;
            }
            let [a, b] = [e.from, e.to].map(|v| *index.entry(v).or_insert_with(|| graph.add_node(v)));
            graph.add_edge(a, b, e.capacity);
        }
        ford_fulkerson(&graph, index[&Vertex::Source], index[&Vertex::Collector(t)]).0
    }
}

/// Multicast capacity: the smallest max flow over all collectors.
pub fn min_cut_all_dcs(net: &FlowNet) -> usize {
    (0..net.collectors.len())
        .map(|t| net.max_flow_to(t))
        .min()
        .unwrap_or(0)
}

/// `(n-d+1 - floor((n-d+1)/(r+1))) * alpha`, checked against
/// `ceil(M/alpha) * alpha`.
pub fn lemma2_capacity(n: usize, r: usize, file_size: usize, alpha: usize) -> Result<usize, FlowError> {
    let d = distance_bound(&BoundQuery {
        n,
        r,
        file_size,
        alpha,
    })?;
    if d < 1 {
        return Err(FlowError::NoDistance { d });
    }
    let fan_in = n + 1 - d as usize;
    if fan_in.is_multiple_of(r + 1) {
        log::warn!("(n-d+1)/(r+1) = {fan_in}/{} is an integer", r + 1);
    }
    let closed_form = (fan_in - fan_in / (r + 1)) * alpha;
    let expected = ceil_div(file_size, alpha) * alpha;
    if closed_form != expected {
        return Err(FlowError::CapacityMismatch {
            closed_form,
            expected,
        });
    }
    Ok(closed_form)
}

/// Random coefficients for one run of network coding, and which rank
/// conditions they satisfy.
///
/// The source sends `M* = ceil(M/alpha) * alpha` symbols. Group g receives
/// `x * A_g` (A_g is `M* x r*alpha`) and forwards it unchanged to each member;
/// node l stores `x * A_g * C_l` (C_l is `r*alpha x alpha`).
#[derive(Clone, Debug)]
pub struct RlncTrial {
    pub index: usize,
    pub seed: u64,
    pub source: Vec<Matrix>,
    pub node: Vec<Matrix>,
    /// Full rank of each collector's `M* x (n-d+1)alpha` system.
    pub collector_ok: Vec<bool>,
    /// Per group, per r-subset of its members in lexicographic order, full
    /// rank of the stacked `r*alpha x r*alpha` local system.
    pub local_ok: Vec<Vec<bool>>,
}

impl RlncTrial {
    pub fn collectors_pass(&self) -> bool {
        self.collector_ok.iter().all(|&b| b)
    }

    pub fn locals_pass(&self) -> bool {
        self.local_ok.iter().flatten().all(|&b| b)
    }

    pub fn passed(&self) -> bool {
        self.collectors_pass() && self.locals_pass()
    }
}

#[derive(Clone, Debug)]
pub struct RlncReport {
    pub field_order: usize,
    pub padded_file_size: usize,
    pub trials: Vec<RlncTrial>,
}

impl RlncReport {
    pub fn passes(&self) -> usize {
        self.trials.iter().filter(|t| t.passed()).count()
    }

    pub fn collector_failures(&self) -> usize {
        self.trials.iter().filter(|t| !t.collectors_pass()).count()
    }

    pub fn local_failures(&self) -> usize {
        self.trials.iter().filter(|t| !t.locals_pass()).count()
    }

    pub fn success_rate(&self) -> f64 {
        if self.trials.is_empty() {
            return 0.0;
        }
        self.passes() as f64 / self.trials.len() as f64
    }
}

fn random_matrix<R: Rng>(f: &Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        for e in m.row_mut(r) {
            *e = f.random(rng);
        }
    }
    m
}

/// Runs `trials` independent draws. Trial i is seeded from the i-th output
/// of a generator seeded with `seed`, so any trial can be replayed alone.
pub fn rlnc_verify(net: &FlowNet, field: &Field, trials: usize, seed: u64) -> Result<RlncReport, FlowError> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let padded = ceil_div(net.file_size, net.alpha) * net.alpha;
    let trials = (0..trials)
        .map(|index| {
            let s = seeds.gen();
            rlnc_trial(net, field, index, s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RlncReport {
        field_order: field.order(),
        padded_file_size: padded,
        trials,
    })
}

pub fn rlnc_trial(net: &FlowNet, f: &Field, index: usize, seed: u64) -> Result<RlncTrial, FlowError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let padded = ceil_div(net.file_size, net.alpha) * net.alpha;
    let ra = net.r * net.alpha;
    let source: Vec<Matrix> = (0..net.group_count())
        .map(|_| random_matrix(f, padded, ra, &mut rng))
        .collect();
    let node: Vec<Matrix> = (0..net.n)
        .map(|_| random_matrix(f, ra, net.alpha, &mut rng))
        .collect();

    let stored = (0..net.n)
        .map(|l| source[l / (net.r + 1)].mul(f, &node[l]))
        .collect::<Result<Vec<_>, _>>()?;
    let collector_ok = net
        .collectors
        .iter()
        .map(|set| {
            let mut m = Matrix::zeros(padded, 0);
            for &l in set {
                m = m.hstack(&stored[l])?;
            }
            Ok(m.rank(f) == padded)
        })
        .collect::<Result<Vec<_>, FieldError>>()?;

    let local_ok = (0..net.group_count())
        .map(|g| {
            let members: Vec<usize> = net.group_members(g).collect();
            let mut oks = Vec::new();
            let mut err = None;
            for_each_subset(members.len(), net.r, |pick| {
                let mut m = Matrix::zeros(ra, 0);
                for &i in pick {
                    match m.hstack(&node[members[i]]) {
                        Ok(next) => m = next,
                        Err(e) => err = Some(e),
                    }
                }
                oks.push(m.rank(f) == ra);
            });
            err.map_or(Ok(oks), Err)
        })
        .collect::<Result<Vec<_>, FieldError>>()?;

    Ok(RlncTrial {
        index,
        seed,
        source,
        node,
        collector_ok,
        local_ok,
    })
}

/// The code realised by a passing trial: node l gets the columns `A_g * C_l`.
pub fn extract_code(net: &FlowNet, field: &Field, trial: &RlncTrial) -> Result<GeneratorView, FlowError> {
    if !trial.passed() {
        return Err(FlowError::FailedTrial(trial.index));
    }
    let padded = ceil_div(net.file_size, net.alpha) * net.alpha;
    let mut m = Matrix::zeros(padded, 0);
    for l in 0..net.n {
        m = m.hstack(&trial.source[l / (net.r + 1)].mul(field, &trial.node[l])?)?;
    }
    Ok(GeneratorView::new(field.clone(), net.n, net.alpha, m)?)
}
