//! Exact distribution of the complete edge set over n nodes, by
//! enumeration of all Q^n latent assignments. Desk-scale only, guarded.
//!
//! This module is the ground truth the rest of the crate is checked
//! against: closed-form moments, estimator round trips and rank reports
//! all compare against expectations computed here.

use thiserror::Error;

use crate::edges::{edge_count, edge_index, edge_list};
use crate::params::DiscreteEdgeModel;

/// Desk-scale guard on both the number of latent assignments and the
/// number of edge configurations.
pub const SIZE_GUARD: u64 = 10_000_000;

/// Default max-norm tolerance for [`identifiability_scan`]. Exact
/// arithmetic differences are ~1e-15 while genuine parameter differences
/// at any sensible grid resolution exceed 1e-4.
pub const DEFAULT_SCAN_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("motif moments require a binary distribution (kappa = 2), got kappa = {0}")]
    NotBinary(usize),
    #[error("motif references node {node} but the distribution covers {n} nodes")]
    MotifOutOfRange { node: usize, n: usize },
    #[error("motif edge ({0},{0}) is a self-loop")]
    SelfLoop(usize),
    #[error("scan grid mixes models of different shape")]
    MixedGrid,
}

/// Joint distribution of all edge variables over `n` nodes.
///
/// `probs[c]` is the probability of the configuration whose base-kappa
/// digits, most significant first, are the edge states in canonical edge
/// order.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub n: usize,
    pub kappa: usize,
    pub probs: Vec<f64>,
}

impl ExactDistribution {
    /// Configuration index for the given per-edge states.
    pub fn config_index(&self, states: &[usize]) -> usize {
        debug_assert_eq!(states.len(), edge_count(self.n));
        states.iter().fold(0, |acc, &s| acc * self.kappa + s)
    }
}

fn thread_cap() -> usize {
    let avail = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    match std::env::var("SBM_IDENT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(v) if v >= 1 => v.min(avail),
        _ => avail,
    }
}

fn decode_assignment(mut rank: u64, q: usize, n: usize) -> Vec<usize> {
    let mut z = vec![0usize; n];
    for i in (0..n).rev() {
        z[i] = (rank % q as u64) as usize;
        rank /= q as u64;
    }
    z
}

fn advance_assignment(z: &mut [usize], q: usize) {
    for d in z.iter_mut().rev() {
        *d += 1;
        if *d < q {
            return;
        }
        *d = 0;
    }
}

/// Accumulate the conditional edge-configuration table over an assignment
/// range, in fixed index order.
fn accumulate_range<M: DiscreteEdgeModel>(
    model: &M,
    pairs: &[(usize, usize)],
    n: usize,
    lo: u64,
    hi: u64,
    table_len: usize,
) -> Vec<f64> {
    let q = model.group_count();
    let kappa = model.state_count();
    let pi = model.priors();
    let mut acc = vec![0.0f64; table_len];
    let mut cur = vec![0.0f64; table_len];
    let mut next = vec![0.0f64; table_len];
    let mut z = decode_assignment(lo, q, n);
    for _ in lo..hi {
        let weight: f64 = z.iter().map(|&g| pi[g]).product();
        cur[0] = 1.0;
        let mut cur_len = 1usize;
        for &(i, j) in pairs {
            for (ci, &cv) in cur[..cur_len].iter().enumerate() {
                for x in 0..kappa {
                    next[ci * kappa + x] = cv * model.edge_state_prob(z[i], z[j], x);
                }
            }
            cur_len *= kappa;
            std::mem::swap(&mut cur, &mut next);
        }
        for (a, &c) in acc.iter_mut().zip(cur[..cur_len].iter()) {
            *a += weight * c;
        }
        advance_assignment(&mut z, q);
    }
    acc
}

/// Exact joint distribution of the edge variables of K_n under the model.
///
/// Enumeration over assignments is split across threads in contiguous
/// blocks merged in block order; `SBM_IDENT_THREADS` caps the thread
/// count.
pub fn exact_distribution<M: DiscreteEdgeModel + Sync>(
    model: &M,
    n: usize,
) -> Result<ExactDistribution, OracleError> {
    exact_distribution_threaded(model, n, None)
}

/// As [`exact_distribution`], with an explicit thread count (None picks
/// one from the machine and `SBM_IDENT_THREADS`).
pub fn exact_distribution_threaded<M: DiscreteEdgeModel + Sync>(
    model: &M,
    n: usize,
    thread_override: Option<usize>,
) -> Result<ExactDistribution, OracleError> {
    if n < 2 {
        return Err(OracleError::TooFewNodes(n));
    }
    let q = model.group_count() as u64;
    let kappa = model.state_count() as u64;
    let e = edge_count(n) as u32;
    let assignments = q
        .checked_pow(n as u32)
        .filter(|&v| v <= SIZE_GUARD)
        .ok_or_else(|| OracleError::SizeGuard(format!("Q^n = {q}^{n} exceeds {SIZE_GUARD}")))?;
    let table_len = kappa
        .checked_pow(e)
        .filter(|&v| v <= SIZE_GUARD)
        .ok_or_else(|| {
            OracleError::SizeGuard(format!("kappa^(n choose 2) = {kappa}^{e} exceeds {SIZE_GUARD}"))
        })? as usize;

    let pairs = edge_list(n);
    let threads = match thread_override {
        Some(t) => t.max(1),
        // threads only pay off on big assignment counts, and per-thread
        // tables bound the memory
        None if assignments >= 8192 && table_len <= (1 << 16) => thread_cap().min(8),
        None => 1,
    };

    let probs = if threads <= 1 {
        accumulate_range(model, &pairs, n, 0, assignments, table_len)
    } else {
        let chunk = assignments.div_ceil(threads as u64);
        let mut partials: Vec<Vec<f64>> = Vec::with_capacity(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|t| {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(assignments);
                    let pairs = &pairs;
                    scope.spawn(move || {
                        if lo >= hi {
                            vec![0.0; table_len]
                        } else {
                            accumulate_range(model, pairs, n, lo, hi, table_len)
                        }
                    })
                })
                .collect();
            for h in handles {
                partials.push(h.join().expect("enumeration worker panicked"));
            }
        });
        let mut total = vec![0.0f64; table_len];
        for part in partials {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        total
    };

    Ok(ExactDistribution {
        n,
        kappa: kappa as usize,
        probs,
    })
}

/// Expectation of the product of edge indicators over the motif, that is
/// the probability that every motif edge is present. Binary only.
pub fn exact_motif_moment(
    dist: &ExactDistribution,
    motif: &[(usize, usize)],
) -> Result<f64, OracleError> {
    if dist.kappa != 2 {
        return Err(OracleError::NotBinary(dist.kappa));
    }
    let e = edge_count(dist.n);
    let mut mask = 0usize;
    for &(a, b) in motif {
        if a == b {
            return Err(OracleError::SelfLoop(a));
        }
        let (i, j) = (a.min(b), a.max(b));
        if j >= dist.n {
            return Err(OracleError::MotifOutOfRange { node: j, n: dist.n });
        }
        mask |= 1 << (e - 1 - edge_index(i, j, dist.n));
    }
    Ok(dist
        .probs
        .iter()
        .enumerate()
        .filter(|(c, _)| c & mask == mask)
        .map(|(_, &p)| p)
        .sum())
}

/// Partition grid points whose exact distributions agree within `epsilon`
/// in max norm. Label-swapped parameterizations produce identical
/// distributions and therefore always land in the same class.
pub fn identifiability_scan<M: DiscreteEdgeModel + Sync>(
    grid: &[M],
    n: usize,
    epsilon: f64,
) -> Result<Vec<Vec<usize>>, OracleError> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let q0 = grid[0].group_count();
    let k0 = grid[0].state_count();
    if grid
        .iter()
        .any(|m| m.group_count() != q0 || m.state_count() != k0)
    {
        return Err(OracleError::MixedGrid);
    }
    let dists: Vec<ExactDistribution> = grid
        .iter()
        .map(|m| exact_distribution(m, n))
        .collect::<Result<_, _>>()?;

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (idx, d) in dists.iter().enumerate() {
        let found = classes.iter_mut().find(|class| {
            let rep = &dists[class[0]];
            rep.probs
                .iter()
                .zip(&d.probs)
                .all(|(a, b)| (a - b).abs() <= epsilon)
        });
        match found {
            Some(class) => class.push(idx),
            None => classes.push(vec![idx]),
        }
    }
    Ok(classes)
}
