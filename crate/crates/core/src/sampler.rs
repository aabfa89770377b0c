//! Random graph generation for all model families: draw the latent groups
//! i.i.d. from the prior, then draw every edge independently from its
//! conditional law. Fixed seeds give bit-reproducible output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::edges::{edge_count, edge_index, edge_list};
use crate::params::{ModelParams, Validate, WeightFamily};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("truncated Poisson rate must be positive, got {0}")]
    BadRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Binary,
    Finite { kappa: usize },
    Weighted,
}

/// Edge values in canonical edge order; one entry per node pair.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeValues {
    Binary(Vec<u8>),
    /// States numbered 0..kappa.
    Finite { kappa: usize, states: Vec<u16> },
    /// Zero means "absent edge".
    Weighted(Vec<f64>),
}

/// A sampled graph. Latent assignments are dropped by default, mirroring
/// the statistical setting where the groups are unobserved; tests request
/// them explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    pub n: usize,
    pub values: EdgeValues,
    pub latent: Option<Vec<usize>>,
}

impl SampledGraph {
    pub fn kind(&self) -> GraphKind {
        match &self.values {
            EdgeValues::Binary(_) => GraphKind::Binary,
            EdgeValues::Finite { kappa, .. } => GraphKind::Finite { kappa: *kappa },
            EdgeValues::Weighted(_) => GraphKind::Weighted,
        }
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.n)
    }

    /// Binary edge indicator for pair (i, j), i < j.
    pub fn binary_edge(&self, i: usize, j: usize) -> Option<bool> {
        match &self.values {
            EdgeValues::Binary(v) => Some(v[edge_index(i, j, self.n)] == 1),
            _ => None,
        }
    }
}

/// Seed for replicate `index`, derived from a base seed by SplitMix64
/// mixing. Callers running replicates in parallel use
/// `replicate_seed(seed, i)` for the i-th replicate.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// One draw from the zero-truncated Poisson law, P(k) = theta^k / (k! (e^theta - 1)).
///
/// For theta >= 0.1 this rejects ordinary Poisson draws equal to zero; the
/// expected number of retries is 1/(1-e^-theta), fine at such rates. Below
/// 0.1 the acceptance probability collapses, so an inverse-CDF scan over
/// the truncated law is used instead.
pub fn sample_truncated_poisson<R: Rng + ?Sized>(
    theta: f64,
    rng: &mut R,
) -> Result<u64, SampleError> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(SampleError::BadRate(theta));
    }
    if theta >= 0.1 {
        let pois = Poisson::new(theta).expect("positive rate");
        loop {
            let draw = pois.sample(rng);
            if draw >= 0.5 {
                return Ok(draw.round() as u64);
            }
        }
    } else {
        let u: f64 = rng.random();
        let norm = theta.exp_m1();
        let mut k = 1u64;
        let mut term = theta; // theta^k / k!
        let mut cum = term / norm;
        while cum < u && k < 1_000 {
            k += 1;
            term *= theta / k as f64;
            cum += term / norm;
        }
        Ok(k)
    }
}

fn sample_group<R: Rng + ?Sized>(pi: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (q, &p) in pi.iter().enumerate() {
        cum += p;
        if u < cum {
            return q;
        }
    }
    pi.len() - 1
}

/// Sample a graph on `n` nodes. Deterministic for a fixed seed: groups are
/// drawn first (node order), then the edges in canonical order.
pub fn sample_graph(
    params: &ModelParams,
    n: usize,
    seed: u64,
    keep_latent: bool,
) -> Result<SampledGraph, SampleError> {
    params
        .validate()
        .map_err(|e| SampleError::InvalidParams(e.to_string()))?;
    if n < 2 {
        return Err(SampleError::TooFewNodes(n));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pi = params.priors();
    let z: Vec<usize> = (0..n).map(|_| sample_group(pi, &mut rng)).collect();
    let pairs = edge_list(n);

    let values = match params {
        ModelParams::Binary(_) | ModelParams::Affiliation(_) => {
            let p = |q: usize, l: usize| match params {
                ModelParams::Binary(b) => b.p[q][l],
                ModelParams::Affiliation(a) => {
                    if q == l {
                        a.alpha
                    } else {
                        a.beta
                    }
                }
                _ => unreachable!(),
            };
            let mut edges = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let draw: f64 = rng.random();
                edges.push(u8::from(draw < p(z[i], z[j])));
            }
            EdgeValues::Binary(edges)
        }
        ModelParams::Finite(f) => {
            let mut states = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let u: f64 = rng.random();
                let v = &f.pvec[z[i]][z[j]];
                let mut cum = 0.0;
                let mut state = f.kappa - 1;
                for (x, &px) in v.iter().enumerate() {
                    cum += px;
                    if u < cum {
                        state = x;
                        break;
                    }
                }
                states.push(state as u16);
            }
            EdgeValues::Finite {
                kappa: f.kappa,
                states,
            }
        }
        ModelParams::Weighted(w) => {
            let mut weights = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let u: f64 = rng.random();
                let (q, l) = (z[i], z[j]);
                if u < w.sparsity[q][l] {
                    let value = match w.family {
                        WeightFamily::TruncatedPoisson => {
                            sample_truncated_poisson(w.theta[q][l], &mut rng)? as f64
                        }
                    };
                    weights.push(value);
                } else {
                    weights.push(0.0);
                }
            }
            EdgeValues::Weighted(weights)
        }
    };

    Ok(SampledGraph {
        n,
        values,
        latent: keep_latent.then_some(z),
    })
}
