//! Numerical verification of the algebraic identifiability conditions:
//! Kruskal ranks and the three-factor sum condition, the conditional
//! configuration matrix with its full-row-rank reports, the structured
//! degree-sequence family used to certify those ranks, and the
//! Erdos-Gallai realizability test.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::edges::{edge_count, edge_list};
use crate::numeric::{numerical_rank, RANK_REL_TOL};
use crate::params::DiscreteEdgeModel;

/// Row guard for the combinatorial Kruskal-rank search.
pub const KRUSKAL_ROW_GUARD: usize = 20;

/// Guards for the conditional configuration matrix.
pub const COND_ROW_GUARD: u64 = 4096;
pub const COND_COL_GUARD: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum KruskalError {
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("too few nodes: {0}")]
    TooFewNodes(usize),
}

/// Kruskal rank: the largest I such that every set of I rows is linearly
/// independent. Checked combinatorially over all row subsets with the
/// numerical rank of each stacked subset.
pub fn kruskal_rank(m: &DMatrix<f64>) -> Result<usize, KruskalError> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(KruskalError::NonFinite);
    }
    let rows = m.nrows();
    if rows > KRUSKAL_ROW_GUARD {
        return Err(KruskalError::SizeGuard(format!(
            "{rows} rows exceeds the subset-enumeration guard {KRUSKAL_ROW_GUARD}"
        )));
    }
    if rows == 0 {
        return Ok(0);
    }
    let full_rank = numerical_rank(m, RANK_REL_TOL);
    for size in 1..=full_rank {
        let mut all_independent = true;
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let sub = m.select_rows(subset.iter());
            if numerical_rank(&sub, RANK_REL_TOL) < size {
                all_independent = false;
                break;
            }
            // next combination
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] != i + rows - size {
                    subset[i] += 1;
                    for j in (i + 1)..size {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    subset.clear();
                    break;
                }
            }
            if subset.is_empty() {
                break;
            }
        }
        if !all_independent {
            return Ok(size - 1);
        }
    }
    Ok(full_rank)
}

/// The sum condition I1 + I2 + I3 >= 2r + 2 under which a three-way
/// decomposition with r latent classes is unique up to simultaneous row
/// permutation.
pub fn kruskal_condition(i1: usize, i2: usize, i3: usize, r: usize) -> bool {
    i1 + i2 + i3 >= 2 * r + 2
}

/// Kruskal ranks of three conditional matrices plus the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KruskalReport {
    pub ranks: (usize, usize, usize),
    pub r: usize,
    pub condition_met: bool,
}

/// Compute the three Kruskal ranks (the matrices share their row count r)
/// and evaluate the sum condition.
pub fn kruskal_report(
    m1: &DMatrix<f64>,
    m2: &DMatrix<f64>,
    m3: &DMatrix<f64>,
) -> Result<KruskalReport, KruskalError> {
    let r = m1.nrows();
    if m2.nrows() != r || m3.nrows() != r {
        return Err(KruskalError::DimensionMismatch(format!(
            "row counts {}, {}, {} differ",
            r,
            m2.nrows(),
            m3.nrows()
        )));
    }
    let ranks = (kruskal_rank(m1)?, kruskal_rank(m2)?, kruskal_rank(m3)?);
    Ok(KruskalReport {
        ranks,
        r,
        condition_met: kruskal_condition(ranks.0, ranks.1, ranks.2, r),
    })
}

/// Probabilities of every edge configuration over m nodes conditioned on
/// every latent assignment: rows are assignments in lexicographic order,
/// columns are configurations in canonical edge order.
#[derive(Debug, Clone)]
pub struct ConditionalMatrix {
    pub q: usize,
    pub m: usize,
    pub kappa: usize,
    pub matrix: DMatrix<f64>,
}

/// Build the conditional configuration matrix for `m` nodes.
pub fn conditional_matrix<M: DiscreteEdgeModel>(
    model: &M,
    m: usize,
) -> Result<ConditionalMatrix, KruskalError> {
    if m < 2 {
        return Err(KruskalError::TooFewNodes(m));
    }
    let q = model.group_count();
    let kappa = model.state_count();
    let e = edge_count(m) as u32;
    let rows = (q as u64)
        .checked_pow(m as u32)
        .filter(|&v| v <= COND_ROW_GUARD)
        .ok_or_else(|| KruskalError::SizeGuard(format!("Q^m = {q}^{m} exceeds {COND_ROW_GUARD}")))?;
    let cols = (kappa as u64)
        .checked_pow(e)
        .filter(|&v| v <= COND_COL_GUARD)
        .ok_or_else(|| {
            KruskalError::SizeGuard(format!(
                "kappa^(m choose 2) = {kappa}^{e} exceeds {COND_COL_GUARD}"
            ))
        })?;
    let pairs = edge_list(m);
    let mut matrix = DMatrix::<f64>::zeros(rows as usize, cols as usize);
    let mut z = vec![0usize; m];
    for row in 0..rows as usize {
        for col in 0..cols as usize {
            let mut c = col;
            let mut p = 1.0;
            for &(i, j) in pairs.iter().rev() {
                let x = c % kappa;
                c /= kappa;
                p *= model.edge_state_prob(z[i], z[j], x);
            }
            matrix[(row, col)] = p;
        }
        for d in z.iter_mut().rev() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(ConditionalMatrix { q, m, kappa, matrix })
}

/// Node-count bound under which the structured degree family certifies
/// full row rank generically.
pub fn full_rank_node_bound(q: usize) -> usize {
    if q % 2 == 0 {
        q - 1 + (q + 2) * (q + 2) / 4
    } else {
        q - 1 + (q + 1) * (q + 3) / 4
    }
}

/// Row-rank report of the conditional configuration matrix, with the
/// node-count bound and the trivial rank sum needed after extending to
/// three disjoint edge blocks (3 Q^n >= 2 Q^n + 2 iff Q^n >= 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalRankReport {
    pub q: usize,
    pub m: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub full_row_rank: bool,
    pub node_bound: usize,
    pub meets_node_bound: bool,
    pub extension_nodes: usize,
    pub extension_condition_met: bool,
}

/// Numerical row rank of the conditional configuration matrix.
pub fn conditional_rank_report<M: DiscreteEdgeModel>(
    model: &M,
    m: usize,
) -> Result<ConditionalRankReport, KruskalError> {
    let cm = conditional_matrix(model, m)?;
    let rank = numerical_rank(&cm.matrix, RANK_REL_TOL);
    let rows = cm.matrix.nrows();
    let bound = full_rank_node_bound(cm.q);
    Ok(ConditionalRankReport {
        q: cm.q,
        m,
        rows,
        cols: cm.matrix.ncols(),
        rank,
        full_row_rank: rank == rows,
        node_bound: bound,
        meets_node_bound: m >= bound,
        extension_nodes: m * m,
        extension_condition_met: cm.q >= 2,
    })
}

/// Degree sequence with its realizability verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub degrees: Vec<usize>,
    pub realizable: bool,
}

/// Erdos-Gallai test: a nonincreasing rearrangement d_1 >= ... >= d_m is
/// the degree sequence of a simple graph iff the total is even and for
/// every k, sum_{v<=k} d_v <= k(k-1) + sum_{v>k} min(k, d_v).
pub fn erdos_gallai_realizable(degrees: &[usize]) -> bool {
    if degrees.is_empty() {
        return true;
    }
    let m = degrees.len();
    let mut d = degrees.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    if d.iter().sum::<usize>() % 2 != 0 {
        return false;
    }
    for k in 1..m {
        let lhs: usize = d[..k].iter().sum();
        let rhs = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// The structured family of Q^m degree sequences: entries 1..=Q on the
/// first m-1 coordinates, and a last coordinate running over the Q values
/// of matching parity in 0..=2Q-1 so the total is always even. Each
/// member carries its realizability verdict.
pub fn degree_family(q: usize, m: usize) -> Result<Vec<DegreeSequence>, KruskalError> {
    if m < 3 {
        return Err(KruskalError::TooFewNodes(m));
    }
    let mut out = Vec::new();
    let mut head = vec![1usize; m - 1];
    loop {
        let head_sum: usize = head.iter().sum();
        for t in 0..q {
            let last = if head_sum % 2 == 0 { 2 * t } else { 2 * t + 1 };
            let mut degrees = head.clone();
            degrees.push(last);
            let realizable = erdos_gallai_realizable(&degrees);
            out.push(DegreeSequence { degrees, realizable });
        }
        let mut i = m - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            head[i] += 1;
            if head[i] <= q {
                break;
            }
            head[i] = 1;
        }
    }
}

/// Dense three-way probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn get(&self, s: usize, t: usize, u: usize) -> f64 {
        self.data[(s * self.dims.1 + t) * self.dims.2 + u]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// The three-way table sum_i v_i (row_i of m1) x (row_i of m2) x (row_i
/// of m3); its (s,t,u) entry is the joint probability of observing
/// (s,t,u) when the factors are conditional laws and v the latent
/// distribution.
pub fn kruskal_tensor(
    v: &[f64],
    m1: &DMatrix<f64>,
    m2: &DMatrix<f64>,
    m3: &DMatrix<f64>,
) -> Result<Tensor3, KruskalError> {
    let r = v.len();
    if m1.nrows() != r || m2.nrows() != r || m3.nrows() != r {
        return Err(KruskalError::DimensionMismatch(format!(
            "latent dimension {r} vs rows {}, {}, {}",
            m1.nrows(),
            m2.nrows(),
            m3.nrows()
        )));
    }
    let dims = (m1.ncols(), m2.ncols(), m3.ncols());
    let mut data = vec![0.0f64; dims.0 * dims.1 * dims.2];
    for i in 0..r {
        for s in 0..dims.0 {
            let vs = v[i] * m1[(i, s)];
            if vs == 0.0 {
                continue;
            }
            for t in 0..dims.1 {
                let vst = vs * m2[(i, t)];
                for u in 0..dims.2 {
                    data[(s * dims.1 + t) * dims.2 + u] += vst * m3[(i, u)];
                }
            }
        }
    }
    Ok(Tensor3 { dims, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{affiliation_to_block, AffiliationParams, BinaryBlockParams, FiniteStateParams};

    fn dm(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn kruskal_rank_examples() {
        assert_eq!(kruskal_rank(&DMatrix::identity(3, 3)).unwrap(), 3);
        let m = dm(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(kruskal_rank(&m).unwrap(), 2);
        let rep = dm(&[&[1.0, 2.0], &[1.0, 2.0], &[0.0, 1.0]]);
        assert_eq!(kruskal_rank(&rep).unwrap(), 1);
        let zero_row = dm(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(kruskal_rank(&zero_row).unwrap(), 0);
    }

    #[test]
    fn kruskal_rank_never_exceeds_rank_and_matches_full_row_rank() {
        let m = dm(&[&[1.0, 0.0, 2.0], &[0.0, 1.0, 1.0]]);
        let kr = kruskal_rank(&m).unwrap();
        let r = numerical_rank(&m, RANK_REL_TOL);
        assert!(kr <= r);
        assert_eq!(kr, 2); // full row rank implies equality
    }

    #[test]
    fn condition_boundaries() {
        assert!(kruskal_condition(8, 8, 8, 8));
        assert!(kruskal_condition(2, 2, 2, 2)); // 6 >= 6
        assert!(!kruskal_condition(2, 2, 1, 2)); // 5 < 6
    }

    #[test]
    fn report_combines_ranks_and_condition() {
        let m1 = dm(&[&[0.3, 0.7], &[0.6, 0.4]]);
        let m2 = dm(&[&[0.1, 0.9], &[0.8, 0.2]]);
        let m3 = dm(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let rep = kruskal_report(&m1, &m2, &m3).unwrap();
        assert_eq!(rep.ranks, (2, 2, 2));
        assert_eq!(rep.r, 2);
        assert!(rep.condition_met); // 6 >= 6

        // a repeated row drops one factor to Kruskal rank 1 and breaks it
        let flat = dm(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let rep = kruskal_report(&m1, &m2, &flat).unwrap();
        assert_eq!(rep.ranks.2, 1);
        assert!(!rep.condition_met); // 5 < 6

        assert!(kruskal_report(&m1, &m2, &dm(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn conditional_matrix_single_group() {
        let m = BinaryBlockParams {
            q: 1,
            pi: vec![1.0],
            p: vec![vec![0.5]],
        };
        let cm = conditional_matrix(&m, 3).unwrap();
        assert_eq!(cm.matrix.nrows(), 1);
        assert_eq!(cm.matrix.ncols(), 8);
        assert!(cm.matrix.iter().all(|&x| (x - 0.125).abs() < 1e-15));
        let report = conditional_rank_report(&m, 3).unwrap();
        assert_eq!(report.rank, 1);
    }

    #[test]
    fn conditional_matrix_rows_are_stochastic() {
        let m = affiliation_to_block(&AffiliationParams {
            q: 2,
            pi: vec![0.4, 0.6],
            alpha: 0.7,
            beta: 0.25,
        });
        let cm = conditional_matrix(&m, 4).unwrap();
        for row in 0..cm.matrix.nrows() {
            let s: f64 = cm.matrix.row(row).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_state_three_nodes_full_rank() {
        // three linearly independent state vectors over three states
        let pvec_rows = [
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.6, 0.3],
            vec![0.25, 0.25, 0.5],
        ];
        let f = FiniteStateParams {
            q: 2,
            pi: vec![0.5, 0.5],
            kappa: 3,
            pvec: vec![
                vec![pvec_rows[0].clone(), pvec_rows[1].clone()],
                vec![pvec_rows[1].clone(), pvec_rows[2].clone()],
            ],
        };
        let report = conditional_rank_report(&f, 3).unwrap();
        assert_eq!(report.rows, 8);
        assert_eq!(report.rank, 8, "{report:?}");
        assert!(report.full_row_rank);
    }

    #[test]
    fn binary_base_case_ranks() {
        let m = BinaryBlockParams {
            q: 2,
            pi: vec![0.5, 0.5],
            p: vec![vec![0.63, 0.27], vec![0.27, 0.82]],
        };
        let r5 = conditional_rank_report(&m, 5).unwrap();
        assert_eq!(r5.rank, 32, "{r5:?}");
        assert!(r5.full_row_rank);
        assert_eq!(r5.node_bound, 5);
        assert!(r5.meets_node_bound);
        assert!(r5.extension_condition_met);
        assert_eq!(r5.extension_nodes, 25);

        // two nodes: configurations only distinguish degree sequences
        // (0,0) and (1,1), so the four rows collapse
        let r2 = conditional_rank_report(&m, 2).unwrap();
        assert!(r2.rank < 4, "{r2:?}");
        assert!(!r2.full_row_rank);
    }

    #[test]
    fn guard_fires_for_large_requests() {
        let m = BinaryBlockParams {
            q: 3,
            pi: vec![1.0 / 3.0; 3],
            p: vec![
                vec![0.5, 0.4, 0.3],
                vec![0.4, 0.6, 0.2],
                vec![0.3, 0.2, 0.7],
            ],
        };
        assert!(matches!(
            conditional_matrix(&m, 8),
            Err(KruskalError::SizeGuard(_))
        ));
    }

    #[test]
    fn erdos_gallai_examples() {
        assert!(erdos_gallai_realizable(&[1, 1, 1, 1]));
        assert!(!erdos_gallai_realizable(&[3, 3, 1, 1]));
        assert!(erdos_gallai_realizable(&[3, 1, 1, 1]));
        assert!(!erdos_gallai_realizable(&[1])); // odd sum
        assert!(erdos_gallai_realizable(&[]));
    }

    #[test]
    fn degree_family_counts_and_verdicts() {
        let fam = degree_family(2, 5).unwrap();
        assert_eq!(fam.len(), 32);
        assert!(fam.iter().all(|d| d.realizable), "{fam:?}");
        // the leading coordinates take at most Q distinct values, and the
        // parity-split last coordinate at most Q within each parity class
        for v in 0..4 {
            let distinct: std::collections::BTreeSet<usize> =
                fam.iter().map(|d| d.degrees[v]).collect();
            assert!(distinct.len() <= 2);
        }
        for parity in 0..2usize {
            let distinct: std::collections::BTreeSet<usize> = fam
                .iter()
                .filter(|d| d.degrees[..4].iter().sum::<usize>() % 2 == parity)
                .map(|d| d.degrees[4])
                .collect();
            assert!(distinct.len() <= 2, "{distinct:?}");
        }
        // below the node bound some members may fail; report them
        let fam3 = degree_family(2, 3).unwrap();
        assert_eq!(fam3.len(), 8);
        assert!(fam3.iter().any(|d| !d.realizable));
        // parity construction always yields even totals
        for d in &fam3 {
            assert_eq!(d.degrees.iter().sum::<usize>() % 2, 0);
        }
        assert!(degree_family(2, 2).is_err());
    }

    #[test]
    fn tensor_examples() {
        // rank one: outer product of the single rows
        let t = kruskal_tensor(
            &[1.0],
            &dm(&[&[0.2, 0.8]]),
            &dm(&[&[0.5, 0.5]]),
            &dm(&[&[1.0, 0.0]]),
        )
        .unwrap();
        assert!((t.get(1, 0, 0) - 0.4).abs() < 1e-15);
        assert!((t.sum() - 1.0).abs() < 1e-15);

        // stochastic inputs sum to one
        let m1 = dm(&[&[0.3, 0.7], &[0.6, 0.4]]);
        let m2 = dm(&[&[0.1, 0.9], &[0.8, 0.2]]);
        let m3 = dm(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let v = [0.35, 0.65];
        let t = kruskal_tensor(&v, &m1, &m2, &m3).unwrap();
        assert!((t.sum() - 1.0).abs() < 1e-12);

        // simultaneous row permutation leaves the tensor unchanged
        let perm = [1usize, 0usize];
        let vp = [v[1], v[0]];
        let permute = |m: &DMatrix<f64>| m.select_rows(perm.iter());
        let tp = kruskal_tensor(&vp, &permute(&m1), &permute(&m2), &permute(&m3)).unwrap();
        for (a, b) in t.data().iter().zip(tp.data()) {
            assert!((a - b).abs() < 1e-15);
        }

        assert!(kruskal_tensor(&[1.0, 0.0], &dm(&[&[1.0]]), &dm(&[&[1.0]]), &dm(&[&[1.0]])).is_err());
    }
}
