//! Canonical ordering of the edge variables of a complete node set.
//!
//! Every table indexed by edge configurations in this crate uses the same
//! convention: edges are listed as (0,1), (0,2), ..., (n-2,n-1), and a
//! configuration is read as a base-kappa number with the *first* edge in
//! the most significant digit. A single convention everywhere prevents
//! transposition bugs between the enumeration oracle, the rank checks and
//! the CLI output.

/// Number of edge variables over `n` nodes.
pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Edges of the complete set over `n` nodes, in canonical order.
pub fn edge_list(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(edge_count(n));
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    edges
}

/// Position of edge `(i, j)` (with `i < j < n`) in the canonical order.
pub fn edge_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}
