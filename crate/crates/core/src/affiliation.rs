//! Moment-based parameter recovery for the binary affiliation model.
//!
//! All estimators work from exact or empirical motif moments. The
//! two-group estimator inverts the triangle-level moments through a cubic
//! with a unique real root; with known priors rational formulas apply; for
//! uniform priors the group count itself is a rational function of the
//! edge, triangle and four-cycle moments. For general group counts, a
//! monic polynomial built from all edge-subset expectations over Q+1 nodes
//! has the intra-group connectivity among its real roots, and a companion
//! linear form then pins the inter-group connectivity for each candidate.

use thiserror::Error;

use crate::edges::{edge_count, edge_index};
use crate::moments::MomentSet;
use crate::numeric::{clustered_real_roots, eval_poly_desc, polish_root, TwoFloat};
use crate::oracle::ExactDistribution;
use crate::params::power_sums;

/// Two candidate connectivities closer than this are treated as equal, in
/// which case beta and the priors are unidentifiable.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Default threshold on |m2 - m1^2| deciding the uniform-prior branch for
/// exact inputs. Empirical callers should pass their own statistical
/// threshold.
pub const UNIFORMITY_TOL: f64 = 1e-7;

/// Threshold below which the linear coefficient of the beta form is
/// treated as vanishing (which happens exactly when the candidate alpha
/// equals beta).
pub const BETA_COEF_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("affiliation degenerate (alpha = beta): beta and pi unidentifiable")]
    DegenerateAlphaBeta,
    #[error("inconsistent moments: {0}")]
    InconsistentMoments(String),
    #[error("recovered s2 = {0} outside the feasible range [1/2, 1)")]
    InfeasibleS2(f64),
    #[error("single group: beta undefined")]
    SingleGroup,
    #[error("moment {0} missing from the input")]
    MissingMoment(&'static str),
    #[error("missing edge-subset expectation (mask {0:#x})")]
    MissingSubset(usize),
    #[error("subset moments cover {got} nodes, need {need}")]
    WrongArity { got: usize, need: usize },
    #[error("group-count ratio {0} is not near an integer")]
    QNotInteger(f64),
    #[error("subset moments require a binary distribution")]
    NotBinary,
}

/// Outcome of an estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub alpha: f64,
    pub beta: f64,
    /// Recovered priors, ascending (identified only as an unordered set).
    pub pi: Option<Vec<f64>>,
    pub q: Option<usize>,
    /// Signed deviations of the moments reconstructed at the recovered
    /// parameters from the input moments.
    pub residuals: Vec<f64>,
}

fn k3_forward(alpha: f64, beta: f64, s2: f64, s3: f64) -> (f64, f64, f64) {
    let m1 = s2 * alpha + (1.0 - s2) * beta;
    let m2 = s3 * alpha * alpha
        + 2.0 * (s2 - s3) * alpha * beta
        + (1.0 - 2.0 * s2 + s3) * beta * beta;
    let m31 = s3 * alpha.powi(3)
        + 3.0 * (s2 - s3) * alpha * beta * beta
        + (1.0 - 3.0 * s2 + 2.0 * s3) * beta.powi(3);
    (m1, m2, m31)
}

/// The unique real root of X^3 - 3 m1 X^2 + 3 m2 X - m31.
///
/// The derivative is 3((X - m1)^2 + (m2 - m1^2)), nonnegative whenever
/// m2 >= m1^2, so the cubic is monotone and the depressed-cubic branch
/// with positive discriminant applies; rounding can push the discriminant
/// marginally negative, in which case the three near-equal roots are
/// collapsed to the middle one. A bisection pass on [-1, 2] backs up the
/// closed form.
fn unique_real_root_cubic(m1: f64, m2: f64, m31: f64) -> f64 {
    let p = 3.0 * (m2 - m1 * m1);
    let q = 3.0 * m1 * m2 - 2.0 * m1.powi(3) - m31;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0).powi(3);
    let t = if disc >= 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / p) * (-3.0 / p).sqrt() / 2.0;
        let phi = arg.clamp(-1.0, 1.0).acos();
        let mut roots = [0.0f64; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            *root = r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
        }
        roots.sort_by(f64::total_cmp);
        roots[1]
    };
    let coeffs = [1.0, -3.0 * m1, 3.0 * m2, -m31];
    let mut x = polish_root(&coeffs, t + m1);
    if eval_poly_desc(&coeffs, x).abs() > 1e-9 {
        // guaranteed-convergent fallback on a bracket containing the root
        let (mut lo, mut hi) = (-1.0f64, 2.0f64);
        if eval_poly_desc(&coeffs, lo) > 0.0 || eval_poly_desc(&coeffs, hi) < 0.0 {
            return x;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval_poly_desc(&coeffs, mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x = 0.5 * (lo + hi);
    }
    x
}

/// Two-group estimator from the triangle-level moments (m1, m2, m31):
/// alpha from the cubic, beta from the companion linear form, then the
/// unordered prior pair from s2.
pub fn estimate_two_group_k3(ms: &MomentSet) -> Result<RecoveryResult, EstimatorError> {
    let (m1, m2, m31) = (ms.m1, ms.m2, ms.m31);
    let alpha = unique_real_root_cubic(m1, m2, m31);
    // alpha - m1 = (alpha - beta)(1 - s2) vanishes exactly in the
    // degenerate alpha = beta case
    if (alpha - m1).abs() < 1e-12 {
        return Err(EstimatorError::DegenerateAlphaBeta);
    }
    let beta = (3.0 * m1 * alpha - alpha * alpha - 2.0 * m2) / (alpha - m1);
    if (alpha - beta).abs() < DEGENERACY_TOL {
        return Err(EstimatorError::DegenerateAlphaBeta);
    }
    let s2 = (m1 - beta) / (alpha - beta);
    if !(0.5 - 1e-9..1.0).contains(&s2) {
        return Err(EstimatorError::InfeasibleS2(s2));
    }
    let root = (2.0 * s2.max(0.5) - 1.0).sqrt();
    let pi = vec![(1.0 - root) / 2.0, (1.0 + root) / 2.0];
    let s3 = pi[0].powi(3) + pi[1].powi(3);
    let (r1, r2, r3) = k3_forward(alpha, beta, s2.max(0.5), s3);
    Ok(RecoveryResult {
        alpha,
        beta,
        pi: Some(pi),
        q: Some(2),
        residuals: vec![r1 - m1, r2 - m2, r3 - m31],
    })
}

/// Known-prior estimator with an explicit uniformity threshold on
/// |m2 - m1^2| (exact inputs branch at ~1e-7; empirical callers supply a
/// statistical threshold instead).
pub fn estimate_with_known_priors_tol(
    ms: &MomentSet,
    pi: &[f64],
    uniformity_tol: f64,
) -> Result<RecoveryResult, EstimatorError> {
    let (m1, m2, m31) = (ms.m1, ms.m2, ms.m31);
    let q = pi.len();
    let uniform = pi.iter().all(|&x| (x - pi[0]).abs() < 1e-12);
    let moments_uniform = (m2 - m1 * m1).abs() <= uniformity_tol;

    let (alpha, beta) = if moments_uniform {
        if !uniform {
            return Err(EstimatorError::InconsistentMoments(format!(
                "m2 - m1^2 = {} indicates uniform priors, but the supplied priors are not uniform",
                m2 - m1 * m1
            )));
        }
        if q == 1 {
            return Err(EstimatorError::SingleGroup);
        }
        let beta = m1 + ((m1.powi(3) - m31) / (q as f64 - 1.0)).cbrt();
        let alpha = q as f64 * m1 + (1.0 - q as f64) * beta;
        (alpha, beta)
    } else {
        if uniform {
            return Err(EstimatorError::InconsistentMoments(format!(
                "priors are uniform but m2 - m1^2 = {}",
                m2 - m1 * m1
            )));
        }
        let s = power_sums(pi, 3).expect("order 3");
        let (s2, s3) = (s.s(2), s.s(3));
        let num = (s3 - s2 * s3) * m1.powi(3)
            + (s2.powi(3) - s3) * m2 * m1
            + (s3 * s2 - s2.powi(3)) * m31;
        let den = (m1 * m1 - m2) * (2.0 * s2.powi(3) - 3.0 * s3 * s2 + s3);
        let beta = num / den;
        let alpha = (m1 + (s2 - 1.0) * beta) / s2;
        (alpha, beta)
    };

    let s = power_sums(pi, 3).expect("order 3");
    let (r1, r2, r3) = k3_forward(alpha, beta, s.s(2), s.s(3));
    Ok(RecoveryResult {
        alpha,
        beta,
        pi: Some(pi.to_vec()),
        q: Some(q),
        residuals: vec![r1 - m1, r2 - m2, r3 - m31],
    })
}

/// Known-prior estimator with the default uniformity threshold.
pub fn estimate_with_known_priors(
    ms: &MomentSet,
    pi: &[f64],
) -> Result<RecoveryResult, EstimatorError> {
    estimate_with_known_priors_tol(ms, pi, UNIFORMITY_TOL)
}

/// The group count of a uniform-prior model as a rational function of
/// (m1, m31, m41); exact moments give an integer up to rounding noise.
///
/// Both the numerator and the cubed denominator cancel down to roughly
/// (alpha - beta)^12, many orders below the individual terms, so the
/// polynomial is evaluated in compensated double-double arithmetic;
/// plain f64 evaluation loses the ratio entirely once the connectivity
/// gap is small.
pub fn group_count_ratio(ms: &MomentSet) -> Result<f64, EstimatorError> {
    let m41 = ms
        .k4
        .as_ref()
        .ok_or(EstimatorError::MissingMoment("m41"))?
        .m41;
    let m1 = TwoFloat::new(ms.m1);
    let m31 = TwoFloat::new(ms.m31);
    let m41 = TwoFloat::new(m41);
    let base = m1.powi(4) + (-m41);
    // m41 - m1^4 = (alpha-beta)^4 (Q-1)/Q^4, zero only when alpha = beta
    if base.value().abs() < 1e-12 {
        return Err(EstimatorError::DegenerateAlphaBeta);
    }
    let num = -m31.powi(4)
        + (-m41.powi(3))
        + (m41 * m1.powi(8)).scale(-3.0)
        + (m41 * m41 * m1.powi(4)).scale(3.0)
        + (m1.powi(6) * m31 * m31).scale(-6.0)
        + (m1.powi(9) * m31).scale(4.0)
        + (m1.powi(3) * m31.powi(3)).scale(4.0);
    Ok(num.value() / base.powi(3).value())
}

/// Group-count recovery for uniform priors from (m1, m31, m41), followed
/// by the uniform-branch connectivity formulas.
pub fn estimate_group_count_uniform(ms: &MomentSet) -> Result<RecoveryResult, EstimatorError> {
    let m41 = ms
        .k4
        .as_ref()
        .ok_or(EstimatorError::MissingMoment("m41"))?
        .m41;
    let q_raw = group_count_ratio(ms)?;
    let rounded = q_raw.round();
    if (q_raw - rounded).abs() > 0.2 || rounded < 1.0 {
        return Err(EstimatorError::QNotInteger(q_raw));
    }
    let q = rounded as usize;
    let pi = vec![1.0 / q as f64; q];
    let mut result = estimate_with_known_priors(ms, &pi)?;
    result.q = Some(q);
    // reconstruct the four-cycle moment for the diagnostics
    let s = power_sums(&pi, 4).expect("order 4");
    let (s2, s3, s4) = (s.s(2), s.s(3), s.s(4));
    let (a, b) = (result.alpha, result.beta);
    let m41_rec = s4 * a.powi(4)
        + 2.0 * (s2 * s2 + 2.0 * s3 - 3.0 * s4) * a * a * b * b
        + 4.0 * (s2 - s2 * s2 - 2.0 * s3 + 2.0 * s4) * a * b.powi(3)
        + (1.0 - 4.0 * s2 + 2.0 * s2 * s2 + 4.0 * s3 - 3.0 * s4) * b.powi(4);
    result.residuals.push(m41_rec - m41);
    Ok(result)
}

/// Expectations of every edge-subset product over the complete edge set of
/// a small node set. Subset masks live in the same bit layout as
/// configuration indices (first canonical edge in the highest bit).
#[derive(Debug, Clone)]
pub struct SubsetMoments {
    n_nodes: usize,
    values: Vec<Option<f64>>,
}

impl SubsetMoments {
    /// Empty table over `n_nodes`; the empty-product expectation is 1.
    pub fn new(n_nodes: usize) -> Self {
        let e = edge_count(n_nodes);
        let mut values = vec![None; 1usize << e];
        values[0] = Some(1.0);
        SubsetMoments { n_nodes, values }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn mask_for(&self, edges: &[(usize, usize)]) -> usize {
        let e = edge_count(self.n_nodes);
        let mut mask = 0usize;
        for &(a, b) in edges {
            let (i, j) = (a.min(b), a.max(b));
            mask |= 1 << (e - 1 - edge_index(i, j, self.n_nodes));
        }
        mask
    }

    /// Record E[prod of the edge indicators].
    pub fn set(&mut self, edges: &[(usize, usize)], value: f64) {
        let mask = self.mask_for(edges);
        self.values[mask] = Some(value);
    }

    pub fn get_mask(&self, mask: usize) -> Result<f64, EstimatorError> {
        self.values[mask].ok_or(EstimatorError::MissingSubset(mask))
    }

    pub fn get(&self, edges: &[(usize, usize)]) -> Result<f64, EstimatorError> {
        self.get_mask(self.mask_for(edges))
    }

    /// All subset expectations at once from an exact distribution, by a
    /// superset-sum transform over the configuration table.
    pub fn from_exact(dist: &ExactDistribution) -> Result<Self, EstimatorError> {
        if dist.kappa != 2 {
            return Err(EstimatorError::NotBinary);
        }
        let e = edge_count(dist.n);
        let mut f = dist.probs.clone();
        for b in 0..e {
            let bit = 1usize << b;
            for mask in 0..f.len() {
                if mask & bit == 0 {
                    f[mask] += f[mask | bit];
                }
            }
        }
        Ok(SubsetMoments {
            n_nodes: dist.n,
            values: f.into_iter().map(Some).collect(),
        })
    }
}

/// Monic polynomial whose real roots include the intra-group
/// connectivity: E[prod over all edges of (X - X_e)] on Q+1 nodes,
/// expanded by inclusion-exclusion over edge subsets. Coefficients are in
/// descending order; the leading coefficient is exactly 1 (empty subset).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPolynomial {
    pub coeffs: Vec<f64>,
}

impl AlphaPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_poly_desc(&self.coeffs, x)
    }
}

/// Build the alpha polynomial for `q` groups from the edge-subset
/// expectations over q+1 nodes.
pub fn alpha_candidate_polynomial(
    sm: &SubsetMoments,
    q: usize,
) -> Result<AlphaPolynomial, EstimatorError> {
    if sm.n_nodes != q + 1 {
        return Err(EstimatorError::WrongArity {
            got: sm.n_nodes,
            need: q + 1,
        });
    }
    let e = edge_count(q + 1);
    let mut coeffs = vec![0.0f64; e + 1];
    // the empty-subset expectation is 1 by definition, making the
    // polynomial monic exactly
    coeffs[0] = 1.0;
    for mask in 1..(1usize << e) {
        let k = mask.count_ones() as usize;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[k] += sign * sm.get_mask(mask)?;
    }
    Ok(AlphaPolynomial { coeffs })
}

/// Mask of the edges lying inside the first q nodes.
fn inner_edge_mask(q: usize, n_nodes: usize) -> usize {
    let e = edge_count(n_nodes);
    let mut mask = 0usize;
    for i in 0..q {
        for j in (i + 1)..q {
            mask |= 1 << (e - 1 - edge_index(i, j, n_nodes));
        }
    }
    mask
}

/// Value of the linear-in-Y companion form at (x, y): the expectation of
/// (X + (Q-1) Y - sum of the star edges into node Q) times the edge-gap
/// product over the first Q nodes. Vanishes at the true (alpha, beta).
pub fn beta_form_value(sm: &SubsetMoments, q: usize, x: f64, y: f64) -> Result<f64, EstimatorError> {
    let (w, star) = beta_form_parts(sm, q, x)?;
    Ok(x * w + (q as f64 - 1.0) * y * w - star)
}

/// (W(x), star(x)) with W the inclusion-exclusion edge-gap expectation
/// over the first q nodes and star the same sum with one star edge
/// appended; the companion form is x W + (q-1) y W - star.
fn beta_form_parts(sm: &SubsetMoments, q: usize, x: f64) -> Result<(f64, f64), EstimatorError> {
    if sm.n_nodes != q + 1 {
        return Err(EstimatorError::WrongArity {
            got: sm.n_nodes,
            need: q + 1,
        });
    }
    let e = edge_count(q + 1);
    let nq = edge_count(q);
    let inner = inner_edge_mask(q, q + 1);
    let mut w = 0.0f64;
    let mut star = 0.0f64;
    let star_bits: Vec<usize> = (0..q)
        .map(|i| 1usize << (e - 1 - edge_index(i, q, q + 1)))
        .collect();
    // enumerate submasks of the inner edge set, including the empty one
    let mut sub = inner;
    loop {
        let k = sub.count_ones() as usize;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let xp = x.powi((nq - k) as i32);
        w += sign * sm.get_mask(sub)? * xp;
        for &bit in &star_bits {
            star += sign * sm.get_mask(sub | bit)? * xp;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & inner;
    }
    Ok((w, star))
}

/// A connectivity candidate from the alpha polynomial. `degenerate_beta`
/// marks candidates where the linear coefficient of the beta form
/// vanishes (exactly the alpha = beta situation); they are kept but carry
/// no beta value.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub residual: f64,
    pub degenerate_beta: bool,
    pub multiplicity: usize,
}

/// All (alpha, beta) candidates over `q` groups, ranked by the squared
/// deviation of the triangle-level moments reconstructed under each
/// candidate (s2 refit from the edge moment, s3 from the cherry moment,
/// both clamped to their feasible ranges). Degenerate candidates sort
/// last.
pub fn connectivity_candidates(
    sm: &SubsetMoments,
    q: usize,
) -> Result<Vec<Candidate>, EstimatorError> {
    let poly = alpha_candidate_polynomial(sm, q)?;
    let m1 = sm.get(&[(0, 1)])?;
    let m2 = sm.get(&[(0, 1), (0, 2)])?;
    let m31 = sm.get(&[(0, 1), (0, 2), (1, 2)])?;

    let mut out = Vec::new();
    for (root, mult) in clustered_real_roots(&poly.coeffs[1..]) {
        let alpha = if mult == 1 {
            polish_root(&poly.coeffs, root)
        } else {
            root
        };
        if !(-1e-6..=1.0 + 1e-6).contains(&alpha) {
            continue;
        }
        let alpha = alpha.clamp(0.0, 1.0);
        let (w, star) = beta_form_parts(sm, q, alpha)?;
        let y_coef = (q as f64 - 1.0) * w;
        if y_coef.abs() < BETA_COEF_TOL {
            out.push(Candidate {
                alpha,
                beta: None,
                residual: f64::INFINITY,
                degenerate_beta: true,
                multiplicity: mult,
            });
            continue;
        }
        let beta = (star - alpha * w) / y_coef;
        let denom = alpha - beta;
        let (residual, beta_val) = if denom.abs() < DEGENERACY_TOL {
            (f64::INFINITY, beta)
        } else {
            let s2_raw = (m1 - beta) / denom;
            let s2 = s2_raw.clamp(1.0 / q as f64, 1.0);
            let s3_raw = (m2 - beta * beta - 2.0 * s2 * beta * denom) / (denom * denom);
            let s3 = s3_raw.clamp(s2 * s2, s2);
            let (r1, r2, r3) = k3_forward(alpha, beta, s2, s3);
            let clamp_pen = (s2_raw - s2).powi(2) + (s3_raw - s3).powi(2);
            (
                (r1 - m1).powi(2) + (r2 - m2).powi(2) + (r3 - m31).powi(2) + clamp_pen,
                beta,
            )
        };
        out.push(Candidate {
            alpha,
            beta: Some(beta_val),
            residual,
            degenerate_beta: false,
            multiplicity: mult,
        });
    }
    out.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    Ok(out)
}
