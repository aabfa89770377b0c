//! Parameter bundles for the blockmodel families, with validation and
//! power-sum utilities.
//!
//! All families share the latent structure: node groups drawn i.i.d. from
//! the prior `pi`, edges conditionally independent given the endpoint
//! groups. The families differ only in the conditional edge law.

use thiserror::Error;

/// Absolute tolerance for probability-vector sums. Inputs are short
/// vectors, so there is no meaningful accumulation beyond a few ulps.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("power sums require order >= 1, got {0}")]
    BadOrder(usize),
}

/// Binary blockmodel: `p[q][l]` is the probability of an edge between a
/// node in group `q` and a node in group `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryBlockParams {
    pub q: usize,
    pub pi: Vec<f64>,
    pub p: Vec<Vec<f64>>,
}

/// Binary affiliation model: intra-group connectivity `alpha`, inter-group
/// connectivity `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffiliationParams {
    pub q: usize,
    pub pi: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Finite-state edge model: `pvec[q][l]` is a probability vector over the
/// `kappa` edge states.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteStateParams {
    pub q: usize,
    pub pi: Vec<f64>,
    pub kappa: usize,
    pub pvec: Vec<Vec<Vec<f64>>>,
}

/// Parametric weight families for present edges.
///
/// Only the zero-truncated Poisson is implemented; Gaussian and Laplace
/// kernels are natural extension points but are out of scope here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFamily {
    TruncatedPoisson,
}

impl WeightFamily {
    pub fn theta_valid(&self, theta: f64) -> bool {
        match self {
            WeightFamily::TruncatedPoisson => theta > 0.0 && theta.is_finite(),
        }
    }
}

/// Weighted model: an edge between groups `q` and `l` is absent with
/// probability `1 - sparsity[q][l]`, otherwise its weight is drawn from
/// the family kernel with parameter `theta[q][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedParams {
    pub q: usize,
    pub pi: Vec<f64>,
    pub sparsity: Vec<Vec<f64>>,
    pub family: WeightFamily,
    pub theta: Vec<Vec<f64>>,
}

impl WeightedParams {
    /// Affiliation specialization: `alpha`/`theta_in` on the diagonal,
    /// `beta`/`theta_out` off it.
    pub fn affiliation(
        pi: Vec<f64>,
        alpha: f64,
        beta: f64,
        theta_in: f64,
        theta_out: f64,
    ) -> Self {
        let q = pi.len();
        let sparsity = (0..q)
            .map(|a| (0..q).map(|b| if a == b { alpha } else { beta }).collect())
            .collect();
        let theta = (0..q)
            .map(|a| {
                (0..q)
                    .map(|b| if a == b { theta_in } else { theta_out })
                    .collect()
            })
            .collect();
        WeightedParams {
            q,
            pi,
            sparsity,
            family: WeightFamily::TruncatedPoisson,
            theta,
        }
    }
}

/// Any of the four parameter families, for operations that dispatch on the
/// model kind (sampling, CLI ingestion).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Binary(BinaryBlockParams),
    Affiliation(AffiliationParams),
    Finite(FiniteStateParams),
    Weighted(WeightedParams),
}

impl ModelParams {
    pub fn group_count(&self) -> usize {
        match self {
            ModelParams::Binary(p) => p.q,
            ModelParams::Affiliation(p) => p.q,
            ModelParams::Finite(p) => p.q,
            ModelParams::Weighted(p) => p.q,
        }
    }

    pub fn priors(&self) -> &[f64] {
        match self {
            ModelParams::Binary(p) => &p.pi,
            ModelParams::Affiliation(p) => &p.pi,
            ModelParams::Finite(p) => &p.pi,
            ModelParams::Weighted(p) => &p.pi,
        }
    }
}

fn check_pi(pi: &[f64], q: usize, out: &mut Vec<String>) {
    if pi.len() != q {
        out.push(format!("pi has length {}, expected Q={}", pi.len(), q));
        return;
    }
    if pi.iter().any(|&x| !(x > 0.0)) {
        out.push("pi entries must be strictly positive".to_string());
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        out.push(format!("pi sums to {sum}"));
    }
}

fn check_square(name: &str, m: &[Vec<f64>], q: usize, out: &mut Vec<String>) -> bool {
    if m.len() != q || m.iter().any(|row| row.len() != q) {
        out.push(format!("{name} is not a {q}x{q} matrix"));
        return false;
    }
    true
}

fn check_symmetry(name: &str, m: &[Vec<f64>], out: &mut Vec<String>) {
    let q = m.len();
    for a in 0..q {
        for b in (a + 1)..q {
            if m[a][b] != m[b][a] {
                out.push(format!(
                    "{name} symmetry violated at ({},{}): {} vs {}",
                    a + 1,
                    b + 1,
                    m[a][b],
                    m[b][a]
                ));
            }
        }
    }
}

fn check_prob_vector(name: String, v: &[f64], out: &mut Vec<String>) {
    if v.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        out.push(format!("{name} has entries outside [0,1]"));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        out.push(format!("{name} sums to {sum}"));
    }
}

/// Invariant checks shared by all parameter bundles.
///
/// `violations` reports; `validate` turns a non-empty report into an error.
pub trait Validate {
    fn violations(&self) -> Vec<String>;

    fn validate(&self) -> Result<(), ParamsError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ParamsError::Invalid(v.join("; ")))
        }
    }
}

impl Validate for BinaryBlockParams {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.q == 0 {
            out.push("Q must be positive".to_string());
            return out;
        }
        check_pi(&self.pi, self.q, &mut out);
        if check_square("P", &self.p, self.q, &mut out) {
            check_symmetry("P", &self.p, &mut out);
            if self.p.iter().flatten().any(|&x| !(0.0..=1.0).contains(&x)) {
                out.push("P has entries outside [0,1]".to_string());
            }
        }
        out
    }
}

impl Validate for AffiliationParams {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.q == 0 {
            out.push("Q must be positive".to_string());
            return out;
        }
        check_pi(&self.pi, self.q, &mut out);
        if !(0.0..=1.0).contains(&self.alpha) {
            out.push(format!("alpha = {} outside [0,1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            out.push(format!("beta = {} outside [0,1]", self.beta));
        }
        out
    }
}

impl Validate for FiniteStateParams {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.q == 0 {
            out.push("Q must be positive".to_string());
            return out;
        }
        if self.kappa < 2 {
            out.push(format!("kappa = {} must be >= 2", self.kappa));
        }
        check_pi(&self.pi, self.q, &mut out);
        if self.pvec.len() != self.q || self.pvec.iter().any(|row| row.len() != self.q) {
            out.push(format!("Pvec is not a {0}x{0} array", self.q));
            return out;
        }
        for a in 0..self.q {
            for b in 0..self.q {
                let v = &self.pvec[a][b];
                if v.len() != self.kappa {
                    out.push(format!("Pvec[{}][{}] has length {}", a + 1, b + 1, v.len()));
                    continue;
                }
                check_prob_vector(format!("Pvec[{}][{}]", a + 1, b + 1), v, &mut out);
                if b > a && self.pvec[a][b] != self.pvec[b][a] {
                    out.push(format!("Pvec symmetry violated at ({},{})", a + 1, b + 1));
                }
            }
        }
        out
    }
}

impl Validate for WeightedParams {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.q == 0 {
            out.push("Q must be positive".to_string());
            return out;
        }
        check_pi(&self.pi, self.q, &mut out);
        if check_square("sparsity", &self.sparsity, self.q, &mut out) {
            check_symmetry("sparsity", &self.sparsity, &mut out);
            if self
                .sparsity
                .iter()
                .flatten()
                .any(|&x| !(x > 0.0 && x <= 1.0))
            {
                out.push("sparsity has entries outside (0,1]".to_string());
            }
        }
        if check_square("theta", &self.theta, self.q, &mut out) {
            check_symmetry("theta", &self.theta, &mut out);
            for (a, row) in self.theta.iter().enumerate() {
                for (b, &t) in row.iter().enumerate() {
                    if !self.family.theta_valid(t) {
                        out.push(format!(
                            "theta[{}][{}] = {t} outside the family domain",
                            a + 1,
                            b + 1
                        ));
                    }
                }
            }
        }
        out
    }
}

impl Validate for ModelParams {
    fn violations(&self) -> Vec<String> {
        match self {
            ModelParams::Binary(p) => p.violations(),
            ModelParams::Affiliation(p) => p.violations(),
            ModelParams::Finite(p) => p.violations(),
            ModelParams::Weighted(p) => p.violations(),
        }
    }
}

/// Power sums s_k = sum_q pi_q^k of the group priors. The priors enter
/// every affiliation moment only through these.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSums {
    values: Vec<f64>,
}

impl PowerSums {
    /// s_k for 1 <= k <= order.
    pub fn s(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Slice of (s_1, ..., s_K).
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Power sums of `pi` up to order `max_order`.
pub fn power_sums(pi: &[f64], max_order: usize) -> Result<PowerSums, ParamsError> {
    if max_order < 1 {
        return Err(ParamsError::BadOrder(max_order));
    }
    let mut values = Vec::with_capacity(max_order);
    let mut powers: Vec<f64> = pi.to_vec();
    for _ in 1..=max_order {
        values.push(powers.iter().sum());
        for (p, &base) in powers.iter_mut().zip(pi) {
            *p *= base;
        }
    }
    Ok(PowerSums { values })
}

/// Expand an affiliation model to its full connectivity matrix.
pub fn affiliation_to_block(a: &AffiliationParams) -> BinaryBlockParams {
    let p = (0..a.q)
        .map(|i| {
            (0..a.q)
                .map(|j| if i == j { a.alpha } else { a.beta })
                .collect()
        })
        .collect();
    BinaryBlockParams {
        q: a.q,
        pi: a.pi.clone(),
        p,
    }
}

/// Conditional edge-state law of a model with finitely many edge states.
/// Implemented by the binary and finite-state families; the enumeration
/// oracle and the rank checks are generic over it.
pub trait DiscreteEdgeModel {
    fn group_count(&self) -> usize;
    fn priors(&self) -> &[f64];
    /// Number of edge states kappa (2 for binary).
    fn state_count(&self) -> usize;
    /// P(X_ij = x | Z_i = q, Z_j = l) with states numbered 0..kappa.
    fn edge_state_prob(&self, q: usize, l: usize, x: usize) -> f64;
}

impl DiscreteEdgeModel for BinaryBlockParams {
    fn group_count(&self) -> usize {
        self.q
    }
    fn priors(&self) -> &[f64] {
        &self.pi
    }
    fn state_count(&self) -> usize {
        2
    }
    fn edge_state_prob(&self, q: usize, l: usize, x: usize) -> f64 {
        if x == 1 {
            self.p[q][l]
        } else {
            1.0 - self.p[q][l]
        }
    }
}

impl DiscreteEdgeModel for FiniteStateParams {
    fn group_count(&self) -> usize {
        self.q
    }
    fn priors(&self) -> &[f64] {
        &self.pi
    }
    fn state_count(&self) -> usize {
        self.kappa
    }
    fn edge_state_prob(&self, q: usize, l: usize, x: usize) -> f64 {
        self.pvec[q][l][x]
    }
}
