//! Distance bound for codes with locality, and the greedy set construction
//! used to prove it, run against concrete codes.

use num_rational::Ratio;
use rand::Rng;
use thiserror::Error;

use crate::field::Basis;
use crate::lrc::CodeParams;
use crate::rs::for_each_subset;
use crate::verifier::GeneratorView;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("k={k} exceeds n={n}")]
    KExceedsN { n: usize, k: usize },
    #[error("groups do not partition the {n} nodes: {reason}")]
    BadGroups { n: usize, reason: String },
}

/// Length n, locality r, file size M and per-node storage alpha, in symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundQuery {
    pub n: usize,
    pub r: usize,
    pub file_size: usize,
    pub alpha: usize,
}

impl BoundQuery {
    fn validate(&self) -> Result<(), BoundsError> {
        for (v, name) in [
            (self.n, "n"),
            (self.r, "r"),
            (self.file_size, "M"),
            (self.alpha, "alpha"),
        ] {
            if v == 0 {
                return Err(BoundsError::NonPositive(name));
            }
        }
        Ok(())
    }
}

pub fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// `n - ceil(M/alpha) - ceil(M/(r alpha)) + 2`. May be negative for
/// parameters no code can meet.
pub fn distance_bound(q: &BoundQuery) -> Result<i64, BoundsError> {
    q.validate()?;
    let a = ceil_div(q.file_size, q.alpha) as i64;
    let b = ceil_div(q.file_size, q.r * q.alpha) as i64;
    Ok(q.n as i64 - a - b + 2)
}

/// Scalar specialization `n - k - ceil(k/r) + 2`.
pub fn scalar_bound(n: usize, k: usize, r: usize) -> Result<i64, BoundsError> {
    if k > n {
        return Err(BoundsError::KExceedsN { n, k });
    }
    distance_bound(&BoundQuery {
        n,
        r,
        file_size: k,
        alpha: 1,
    })
}

/// `M / (n alpha)`, which is `r/(r+1) * k/n` for the explicit construction.
pub fn effective_rate(params: &CodeParams) -> Ratio<usize> {
    Ratio::new(params.file_size(), params.n() * params.alpha())
}

/// Where the greedy construction stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessExit {
    /// No nonempty part of the picked group could be added.
    Line9,
    /// A proper part of the picked group was added, then the loop stopped.
    Line12,
    /// Every node was added without reaching rank M; the code cannot
    /// recover the file.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub picked: usize,
    pub added: Vec<usize>,
    /// Rank gained by this step.
    pub gain: usize,
    /// Whether every node of the picked group not yet in S was added.
    pub whole_group: bool,
}

impl WitnessStep {
    pub fn size(&self) -> usize {
        self.added.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Final set, sorted.
    pub set: Vec<usize>,
    pub rank: usize,
    pub steps: Vec<WitnessStep>,
    pub exit: WitnessExit,
}

impl Witness {
    /// `d <= n - |S|`.
    pub fn bound(&self, n: usize) -> usize {
        n - self.set.len()
    }
}

/// Consecutive groups of r + 1 nodes.
pub fn consecutive_groups(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0..n)
        .collect::<Vec<_>>()
        .chunks(r + 1)
        .map(<[usize]>::to_vec)
        .collect()
}

/// Greedily grows a node set of rank below M by whole repair groups.
///
/// Picks the lowest node not yet in S; adds its whole group if the rank stays
/// below M, otherwise adds the largest proper part that keeps it below M
/// (first in lexicographic order) and stops.
pub fn witness_search(gen: &GeneratorView, groups: &[Vec<usize>]) -> Result<Witness, BoundsError> {
    let n = gen.n();
    let mut group_of = vec![usize::MAX; n];
    for (g, members) in groups.iter().enumerate() {
        for &j in members {
            if j >= n {
                return Err(BoundsError::BadGroups {
                    n,
                    reason: format!("node {j} out of range"),
                });
            }
            if group_of[j] != usize::MAX {
                return Err(BoundsError::BadGroups {
                    n,
                    reason: format!("node {j} in two groups"),
                });
            }
            group_of[j] = g;
        }
    }
    if let Some(j) = group_of.iter().position(|&g| g == usize::MAX) {
        return Err(BoundsError::BadGroups {
            n,
            reason: format!("node {j} in no group"),
        });
    }

    let f = gen.field();
    let m = gen.file_size();
    let cols: Vec<Vec<Vec<_>>> = (0..n).map(|j| gen.node_columns(j)).collect();
    let with = |basis: &Basis, nodes: &[usize]| {
        let mut b = basis.clone();
        for &j in nodes {
            for c in &cols[j] {
                b.insert(f, c);
            }
        }
        b
    };

    let mut in_set = vec![false; n];
    let mut basis = Basis::new(m);
    let mut steps = Vec::new();
    let exit = loop {
        let Some(picked) = (0..n).find(|&j| !in_set[j]) else {
            break WitnessExit::Exhausted;
        };
        let fresh: Vec<usize> = groups[group_of[picked]]
            .iter()
            .copied()
            .filter(|&j| !in_set[j])
            .collect();
        let grown = with(&basis, &fresh);
        if grown.rank() < m {
            steps.push(WitnessStep {
                picked,
                added: fresh.clone(),
                gain: grown.rank() - basis.rank(),
                whole_group: true,
            });
            fresh.iter().for_each(|&j| in_set[j] = true);
            basis = grown;
            continue;
        }
        let mut part = None;
        for size in (1..fresh.len()).rev() {
            for_each_subset(fresh.len(), size, |pick| {
                if part.is_none() {
                    let nodes: Vec<usize> = pick.iter().map(|&i| fresh[i]).collect();
                    let b = with(&basis, &nodes);
                    if b.rank() < m {
                        part = Some((nodes, b));
                    }
                }
            });
            if part.is_some() {
                break;
            }
        }
        match part {
            None => break WitnessExit::Line9,
            Some((nodes, b)) => {
                steps.push(WitnessStep {
                    picked,
                    added: nodes.clone(),
                    gain: b.rank() - basis.rank(),
                    whole_group: false,
                });
                nodes.iter().for_each(|&j| in_set[j] = true);
                basis = b;
                break WitnessExit::Line12;
            }
        }
    };
    Ok(Witness {
        set: (0..n).filter(|&j| in_set[j]).collect(),
        rank: basis.rank(),
        steps,
        exit,
    })
}

/// Counts from [`check_ceiling_identities`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityReport {
    pub checked: [usize; 3],
    pub failures: Vec<String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks on random inputs, for positive integers n, m and rational x:
/// (i)   floor(n/m) = ceil((n+1)/m) - 1
/// (ii)  ceil((x+m)/n) = ceil((ceil(x)+m)/n)
/// (iii) ceil(ceil(x/m)/n) = ceil(x/(nm))
pub fn check_ceiling_identities<R: Rng>(trials: usize, rng: &mut R) -> IdentityReport {
    let mut report = IdentityReport::default();
    for _ in 0..trials {
        let n: i64 = rng.gen_range(1..=1000);
        let m: i64 = rng.gen_range(1..=1000);
        let x = Ratio::new(rng.gen_range(-100_000..=100_000i64), rng.gen_range(1..=1000i64));

        let lhs = n / m;
        let rhs = Ratio::new(n + 1, m).ceil().to_integer() - 1;
        report.checked[0] += 1;
        if lhs != rhs {
            report.failures.push(format!("(i) n={n} m={m}: {lhs} != {rhs}"));
        }

        let lhs = ((x + m) / n).ceil();
        let rhs = ((x.ceil() + m) / n).ceil();
        report.checked[1] += 1;
        if lhs != rhs {
            report.failures.push(format!("(ii) x={x} m={m} n={n}: {lhs} != {rhs}"));
        }

        let lhs = ((x / m).ceil() / n).ceil();
        let rhs = (x / (n * m)).ceil();
        report.checked[2] += 1;
        if lhs != rhs {
            report.failures.push(format!("(iii) x={x} m={m} n={n}: {lhs} != {rhs}"));
        }
    }
    report
}
