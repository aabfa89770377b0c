//! Motif moments of the binary affiliation model: closed-form polynomials
//! in (alpha, beta, s2, s3, s4) for every motif of the complete 4-node
//! edge set, and empirical counterparts estimated from one observed graph.
//!
//! Motif key: m1 edge, m2 cherry (two edges at a node), m31 triangle,
//! m32 three-star, m33 three-path, m41 four-cycle, m42 triangle plus
//! pendant edge, m5 four-cycle with one diagonal, m6 all six edges.

use thiserror::Error;

use crate::params::{power_sums, AffiliationParams};
use crate::sampler::{EdgeValues, SampledGraph};

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error("empirical moments need at least {need} nodes, got {got}")]
    TooFewNodes { need: usize, got: usize },
    #[error("empirical moments are defined for binary graphs")]
    NotBinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Theoretical,
    Empirical,
}

/// Highest motif order to estimate: the triangle block only, or all
/// motifs on four nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentDepth {
    K3,
    K4,
}

/// Moments of motifs spanning four nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K4Moments {
    pub m32: f64,
    pub m33: f64,
    pub m41: f64,
    pub m42: f64,
    pub m5: f64,
    pub m6: f64,
}

/// The motif moments, with the four-node block present only when the
/// source covers it.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub m31: f64,
    pub k4: Option<K4Moments>,
    pub provenance: Provenance,
}

impl MomentSet {
    pub fn k3(m1: f64, m2: f64, m31: f64, provenance: Provenance) -> Self {
        MomentSet {
            m1,
            m2,
            m31,
            k4: None,
            provenance,
        }
    }

    /// Model-level inequalities the moments must satisfy. Empirical sets
    /// from small or adversarial graphs may violate them; callers decide
    /// what to do with the report.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut entries = vec![("m1", self.m1), ("m2", self.m2), ("m31", self.m31)];
        if let Some(k4) = &self.k4 {
            entries.extend([
                ("m32", k4.m32),
                ("m33", k4.m33),
                ("m41", k4.m41),
                ("m42", k4.m42),
                ("m5", k4.m5),
                ("m6", k4.m6),
            ]);
        }
        for (name, v) in entries {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("{name} = {v} outside [0,1]"));
            }
        }
        if self.m2 < self.m1 * self.m1 - 1e-12 {
            out.push(format!("m2 = {} below m1^2 = {}", self.m2, self.m1 * self.m1));
        }
        if let Some(k4) = &self.k4 {
            if k4.m41 < self.m2 * self.m2 - 1e-12 {
                out.push(format!("m41 = {} below m2^2", k4.m41));
            }
        }
        out
    }
}

/// Closed-form moments of every motif over four nodes, evaluated exactly
/// in (alpha, beta) and the prior power sums.
pub fn theoretical_moments(params: &AffiliationParams) -> MomentSet {
    let s = power_sums(&params.pi, 4).expect("order 4");
    let (s2, s3, s4) = (s.s(2), s.s(3), s.s(4));
    let s2sq = s2 * s2;
    let (a, b) = (params.alpha, params.beta);

    let m1 = s2 * a + (1.0 - s2) * b;
    let m2 = s3 * a * a + 2.0 * (s2 - s3) * a * b + (1.0 - 2.0 * s2 + s3) * b * b;
    let m31 = s3 * a.powi(3)
        + 3.0 * (s2 - s3) * a * b * b
        + (1.0 - 3.0 * s2 + 2.0 * s3) * b.powi(3);
    let m32 = s4 * a.powi(3)
        + 3.0 * (s3 - s4) * a * a * b
        + 3.0 * (s2 - 2.0 * s3 + s4) * a * b * b
        + (1.0 - 3.0 * s2 + 3.0 * s3 - s4) * b.powi(3);
    let m33 = s4 * a.powi(3)
        + (s2sq + 2.0 * s3 - 3.0 * s4) * a * a * b
        + (3.0 * s2 - 2.0 * s2sq - 4.0 * s3 + 3.0 * s4) * a * b * b
        + (1.0 - 3.0 * s2 + s2sq + 2.0 * s3 - s4) * b.powi(3);
    let m41 = s4 * a.powi(4)
        + 2.0 * (s2sq + 2.0 * s3 - 3.0 * s4) * a * a * b * b
        + 4.0 * (s2 - s2sq - 2.0 * s3 + 2.0 * s4) * a * b.powi(3)
        + (1.0 - 4.0 * s2 + 2.0 * s2sq + 4.0 * s3 - 3.0 * s4) * b.powi(4);
    let m42 = s4 * a.powi(4)
        + (s3 - s4) * a.powi(3) * b
        + (s2sq + 2.0 * s3 - 3.0 * s4) * a * a * b * b
        + (4.0 * s2 - 2.0 * s2sq - 7.0 * s3 + 5.0 * s4) * a * b.powi(3)
        + (1.0 - 4.0 * s2 + s2sq + 4.0 * s3 - 2.0 * s4) * b.powi(4);
    let m5 = s4 * a.powi(5)
        + 2.0 * (s3 - s4) * a.powi(3) * b * b
        + (2.0 * s3 - 4.0 * s4 + 2.0 * s2sq) * a * a * b.powi(3)
        + (5.0 * s2 - 4.0 * s2sq - 10.0 * s3 + 9.0 * s4) * a * b.powi(4)
        + (1.0 - 5.0 * s2 + 2.0 * s2sq + 6.0 * s3 - 4.0 * s4) * b.powi(5);
    let m6 = s4 * a.powi(6)
        + 4.0 * (s3 - s4) * a.powi(3) * b.powi(3)
        + 3.0 * (s2sq - s4) * a * a * b.powi(4)
        + 6.0 * (s2 - s2sq - 2.0 * s3 + 2.0 * s4) * a * b.powi(5)
        + (1.0 - 6.0 * s2 + 8.0 * s3 - 6.0 * s4 + 3.0 * s2sq) * b.powi(6);

    MomentSet {
        m1,
        m2,
        m31,
        k4: Some(K4Moments {
            m32,
            m33,
            m41,
            m42,
            m5,
            m6,
        }),
        provenance: Provenance::Theoretical,
    }
}

/// Statistic 2 m1^3 - 3 m1 m2 + m31, which vanishes exactly when the
/// model has a single group or equal connectivities; it factors as
/// (alpha - beta)^3 (2 s2^3 - 3 s2 s3 + s3).
pub fn q1_statistic(ms: &MomentSet) -> f64 {
    2.0 * ms.m1.powi(3) - 3.0 * ms.m1 * ms.m2 + ms.m31
}

/// Word-packed adjacency rows for fast common-neighbor counts.
struct Adjacency {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    fn new(g: &SampledGraph) -> Result<Self, MomentsError> {
        let EdgeValues::Binary(vals) = &g.values else {
            return Err(MomentsError::NotBinary);
        };
        let n = g.n;
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        let mut k = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                if vals[k] == 1 {
                    bits[i * words + j / 64] |= 1 << (j % 64);
                    bits[j * words + i / 64] |= 1 << (i % 64);
                }
                k += 1;
            }
        }
        Ok(Adjacency { n, words, bits })
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn common(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Empirical motif moments: for each motif, the fraction of injective node
/// placements on which every motif edge is present. Counting each
/// unordered embedding once or averaging over all ordered placements give
/// the same value, so the counts below are over ordered placements.
///
/// The counts are exact, computed from degrees, common-neighbor counts and
/// packed adjacency rows rather than quartic node loops, so a single
/// n = 2000 graph is processed in well under a second.
pub fn empirical_moments(g: &SampledGraph, depth: MomentDepth) -> Result<MomentSet, MomentsError> {
    let need = match depth {
        MomentDepth::K3 => 3,
        MomentDepth::K4 => 4,
    };
    if g.n < need {
        return Err(MomentsError::TooFewNodes { need, got: g.n });
    }
    let adj = Adjacency::new(g)?;
    let n = g.n;
    let nf = n as f64;
    let ord2 = nf * (nf - 1.0);
    let ord3 = ord2 * (nf - 2.0);

    let degrees: Vec<usize> = (0..n).map(|i| adj.degree(i)).collect();
    let edge_total: usize = degrees.iter().sum::<usize>() / 2;

    let m1 = 2.0 * edge_total as f64 / ord2;
    let m2 = degrees
        .iter()
        .map(|&d| (d * d.saturating_sub(1)) as f64)
        .sum::<f64>()
        / ord3;

    // triangles: for each edge (i,j), common neighbors above j
    let edges = adj.edges();
    let mut triangles = 0u64;
    let mut tri_degree_excess = 0u64; // sum over triangles of (d_i-2)+(d_j-2)+(d_k-2)
    let mut k4 = 0u64;
    for &(i, j) in &edges {
        let ri = adj.row(i);
        let rj = adj.row(j);
        for w in (j / 64)..adj.words {
            let mut both = ri[w] & rj[w];
            // keep only k > j
            if w == j / 64 {
                let shift = j % 64;
                both &= if shift == 63 { 0 } else { !0u64 << (shift + 1) };
            }
            while both != 0 {
                let k = w * 64 + both.trailing_zeros() as usize;
                both &= both - 1;
                triangles += 1;
                tri_degree_excess +=
                    (degrees[i] - 2 + degrees[j] - 2 + degrees[k] - 2) as u64;
                if matches!(depth, MomentDepth::K4) {
                    // count l > k adjacent to all of i, j, k
                    let rk = adj.row(k);
                    for w2 in (k / 64)..adj.words {
                        let mut all = ri[w2] & rj[w2] & rk[w2];
                        if w2 == k / 64 {
                            let shift = k % 64;
                            all &= if shift == 63 { 0 } else { !0u64 << (shift + 1) };
                        }
                        k4 += all.count_ones() as u64;
                    }
                }
            }
        }
    }
    let m31 = 6.0 * triangles as f64 / ord3;

    let k4_block = match depth {
        MomentDepth::K3 => None,
        MomentDepth::K4 => {
            let ord4 = ord3 * (nf - 3.0);
            let m32 = degrees
                .iter()
                .map(|&d| (d * d.saturating_sub(1) * d.saturating_sub(2)) as f64)
                .sum::<f64>()
                / ord4;
            // three-paths: middle edge (j,k); i in N(j)\{k}, l in N(k)\{j}, i != l
            let mut paths = 0f64;
            // cycles with a present diagonal: ordered (i,k) adjacent
            let mut diag_cycles = 0f64;
            for &(i, j) in &edges {
                let cn = adj.common(i, j) as f64;
                paths += ((degrees[i] - 1) * (degrees[j] - 1)) as f64 - cn;
                diag_cycles += cn * (cn - 1.0);
            }
            let m33 = 2.0 * paths / ord4;
            let m5 = 2.0 * diag_cycles / ord4;
            // four-cycles: any ordered pair (i,k), i != k
            let mut cycles = 0f64;
            for i in 0..n {
                for k in (i + 1)..n {
                    let cn = adj.common(i, k) as f64;
                    cycles += cn * (cn - 1.0);
                }
            }
            let m41 = 2.0 * cycles / ord4;
            let m42 = 2.0 * tri_degree_excess as f64 / ord4;
            let m6 = 24.0 * k4 as f64 / ord4;
            Some(K4Moments {
                m32,
                m33,
                m41,
                m42,
                m5,
                m6,
            })
        }
    };

    Ok(MomentSet {
        m1,
        m2,
        m31,
        k4: k4_block,
        provenance: Provenance::Empirical,
    })
}
