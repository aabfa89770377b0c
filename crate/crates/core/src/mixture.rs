//! Constructive parameter recovery for weighted parametric models from
//! labeled mixture components.
//!
//! The joint law of the edge variables over a small node set is a finite
//! mixture of product measures whose per-coordinate factors are either a
//! point mass at zero (absent edge) or a family kernel. Given those
//! components exactly (fitting them from data is an external concern),
//! the model parameters can be read off constructively: diagonal kernel
//! parameters from the all-equal components, off-diagonal ones by weight
//! ratios, sparsities from the single-edge marginal, and priors through
//! the Newton identities once the power sums are known.

use std::cmp::Ordering;

use thiserror::Error;

use crate::edges::edge_list;
use crate::numeric::clustered_real_roots;
use crate::params::{FiniteStateParams, Validate, WeightFamily, WeightedParams};
use crate::sampler::{EdgeValues, SampledGraph};

/// Tolerance for matching kernel parameters when grouping components.
/// Inputs are exact expansions or high-precision fits, and the distinct
/// parameter assumption guarantees separation at the model level.
pub const ATOM_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MixtureError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("distinct-parameter assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("inconsistent mixture components: {0}")]
    Inconsistent(String),
    #[error("theta_in = theta_out: affiliation weighted model unidentifiable")]
    ThetaInOutEqual,
    #[error("component set has arity {got}, expected {need}")]
    WrongArity { got: usize, need: usize },
    #[error("power sums inconsistent with a probability vector: {0}")]
    InfeasiblePriors(String),
    #[error("bad power sums: {0}")]
    BadPowerSums(String),
    #[error("alpha must be positive, got {0}")]
    AlphaNonPositive(f64),
    #[error("truncated Poisson density is undefined at k = 0")]
    TruncatedAtZero,
    #[error("rate must be positive, got {0}")]
    BadRate(f64),
    #[error("cutpoints must be strictly ascending")]
    BadCutpoints,
    #[error("expected a weighted graph")]
    NotWeighted,
}

/// Per-coordinate factor of a product component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    /// Point mass at zero: the edge is absent.
    Dirac0,
    /// Family kernel with the given parameter.
    Density(f64),
}

impl Atom {
    pub fn matches(&self, other: &Atom, tol: f64) -> bool {
        match (self, other) {
            (Atom::Dirac0, Atom::Dirac0) => true,
            (Atom::Density(a), Atom::Density(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }

    fn sort_key(&self) -> (u8, f64) {
        match self {
            Atom::Dirac0 => (0, 0.0),
            Atom::Density(t) => (1, *t),
        }
    }
}

/// One weighted product component.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub atoms: Vec<Atom>,
}

/// Unordered set of product components over a fixed number of edge
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponentSet {
    pub arity: usize,
    pub components: Vec<MixtureComponent>,
}

impl MixtureComponentSet {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// The sub-mixture with no point masses in any coordinate.
    pub fn without_dirac(&self) -> MixtureComponentSet {
        MixtureComponentSet {
            arity: self.arity,
            components: self
                .components
                .iter()
                .filter(|c| c.atoms.iter().all(|a| matches!(a, Atom::Density(_))))
                .cloned()
                .collect(),
        }
    }
}

fn atoms_cmp(a: &[Atom], b: &[Atom]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let (kx, tx) = x.sort_key();
        let (ky, ty) = y.sort_key();
        match kx.cmp(&ky).then(tx.total_cmp(&ty)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn atoms_match(a: &[Atom], b: &[Atom], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.matches(y, tol))
}

/// Fully expanded mixture of the edge variables over `n` nodes: all group
/// assignments crossed with all absent/present branch patterns, like
/// components merged.
pub fn expand_kn_mixture(w: &WeightedParams, n: usize) -> Result<MixtureComponentSet, MixtureError> {
    w.validate()
        .map_err(|e| MixtureError::InvalidParams(e.to_string()))?;
    let pairs = edge_list(n);
    let e = pairs.len();
    let assignments = (w.q as u64)
        .checked_pow(n as u32)
        .filter(|&v| v.saturating_mul(1 << e) <= 5_000_000)
        .ok_or_else(|| {
            MixtureError::SizeGuard(format!("Q^n * 2^(n choose 2) too large at Q={}, n={n}", w.q))
        })?;

    let mut raw: Vec<MixtureComponent> = Vec::new();
    let mut z = vec![0usize; n];
    for _ in 0..assignments {
        let prior: f64 = z.iter().map(|&g| w.pi[g]).product();
        for branch in 0..(1usize << e) {
            let mut weight = prior;
            let mut atoms = Vec::with_capacity(e);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let p = w.sparsity[z[i]][z[j]];
                if branch >> (e - 1 - k) & 1 == 1 {
                    weight *= p;
                    atoms.push(Atom::Density(w.theta[z[i]][z[j]]));
                } else {
                    weight *= 1.0 - p;
                    atoms.push(Atom::Dirac0);
                }
            }
            if weight > 0.0 {
                raw.push(MixtureComponent { weight, atoms });
            }
        }
        for d in z.iter_mut().rev() {
            *d += 1;
            if *d < w.q {
                break;
            }
            *d = 0;
        }
    }

    raw.sort_by(|a, b| atoms_cmp(&a.atoms, &b.atoms));
    let mut components: Vec<MixtureComponent> = Vec::new();
    for c in raw {
        match components.last_mut() {
            Some(last) if atoms_match(&last.atoms, &c.atoms, ATOM_MATCH_TOL) => {
                last.weight += c.weight;
            }
            _ => components.push(c),
        }
    }
    Ok(MixtureComponentSet {
        arity: e,
        components,
    })
}

/// The three-coordinate mixture over a node triple.
pub fn expand_k3_mixture(w: &WeightedParams) -> Result<MixtureComponentSet, MixtureError> {
    expand_kn_mixture(w, 3)
}

enum Shape {
    AllEqual(f64),
    TwoEqual { repeated: f64, single: f64 },
    Distinct,
    HasDirac,
}

fn classify(atoms: &[Atom]) -> Shape {
    let mut thetas = Vec::with_capacity(3);
    for a in atoms {
        match a {
            Atom::Dirac0 => return Shape::HasDirac,
            Atom::Density(t) => thetas.push(*t),
        }
    }
    let eq = |x: f64, y: f64| (x - y).abs() <= ATOM_MATCH_TOL;
    let (a, b, c) = (thetas[0], thetas[1], thetas[2]);
    if eq(a, b) && eq(b, c) {
        Shape::AllEqual((a + b + c) / 3.0)
    } else if eq(a, b) {
        Shape::TwoEqual {
            repeated: (a + b) / 2.0,
            single: c,
        }
    } else if eq(a, c) {
        Shape::TwoEqual {
            repeated: (a + c) / 2.0,
            single: b,
        }
    } else if eq(b, c) {
        Shape::TwoEqual {
            repeated: (b + c) / 2.0,
            single: a,
        }
    } else {
        Shape::Distinct
    }
}

fn weights_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 + 1e-9 * a.abs().max(b.abs())
}

/// Recover a weighted model from its exact three-coordinate mixture and
/// the single-edge marginal mixture.
///
/// Steps: the all-equal components give the diagonal kernel parameters
/// and the values pi_q p_qq; two-equal components divided by those give
/// pi_q pi_l p_ql^2 and, matched across the two diagonal partners, the
/// off-diagonal kernel parameters; the marginal gives pi_q pi_l p_ql
/// (off-diagonal weights halved, since ordered group pairs aggregate);
/// ratios finish the job. Groups are labeled by ascending diagonal
/// parameter.
pub fn recover_from_k3(
    components: &MixtureComponentSet,
    marginal: &MixtureComponentSet,
) -> Result<WeightedParams, MixtureError> {
    if components.arity != 3 {
        return Err(MixtureError::WrongArity {
            got: components.arity,
            need: 3,
        });
    }
    if marginal.arity != 1 {
        return Err(MixtureError::WrongArity {
            got: marginal.arity,
            need: 1,
        });
    }

    // diagonal block: all-equal components
    let mut diag: Vec<(f64, f64)> = Vec::new(); // (theta_qq, pi_q p_qq)
    for c in &components.components {
        if let Shape::AllEqual(t) = classify(&c.atoms) {
            diag.push((t, c.weight.cbrt()));
        }
    }
    diag.sort_by(|a, b| a.0.total_cmp(&b.0));
    let q = diag.len();
    if q == 0 {
        return Err(MixtureError::Inconsistent(
            "no all-equal components".to_string(),
        ));
    }
    for w in diag.windows(2) {
        if (w[0].0 - w[1].0).abs() <= ATOM_MATCH_TOL {
            return Err(MixtureError::AssumptionViolated(format!(
                "two all-equal components share the kernel parameter {}",
                w[0].0
            )));
        }
    }
    let theta_diag: Vec<f64> = diag.iter().map(|d| d.0).collect();
    let c_q: Vec<f64> = diag.iter().map(|d| d.1).collect();
    let find_diag = |t: f64| theta_diag.iter().position(|&d| (d - t).abs() <= ATOM_MATCH_TOL);

    // off-diagonal pass 1: two-equal components divided by pi_q p_qq
    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); q]; // per q: (theta_ql, pi_q pi_l p_ql^2)
    for c in &components.components {
        if let Shape::TwoEqual { repeated, single } = classify(&c.atoms) {
            let Some(g) = find_diag(single) else {
                if find_diag(repeated).is_some() {
                    return Err(MixtureError::AssumptionViolated(format!(
                        "repeated kernel parameter {repeated} collides with a diagonal one"
                    )));
                }
                return Err(MixtureError::Inconsistent(format!(
                    "two-equal component with unknown singleton parameter {single}"
                )));
            };
            if find_diag(repeated).is_some() {
                return Err(MixtureError::AssumptionViolated(format!(
                    "repeated kernel parameter {repeated} collides with a diagonal one"
                )));
            }
            let v = c.weight / c_q[g];
            match buckets[g]
                .iter()
                .find(|(t, _)| (t - repeated).abs() <= ATOM_MATCH_TOL)
            {
                Some(&(_, v0)) => {
                    if !weights_close(v, v0) {
                        return Err(MixtureError::Inconsistent(format!(
                            "positional copies of a two-equal component disagree: {v0} vs {v}"
                        )));
                    }
                }
                None => buckets[g].push((repeated, v)),
            }
        }
    }

    // off-diagonal pass 2: match tail pairs across the two partners
    let mut theta = vec![vec![0.0f64; q]; q];
    let mut vsq = vec![vec![0.0f64; q]; q]; // pi_q pi_l p_ql^2
    for (g, &t) in theta_diag.iter().enumerate() {
        theta[g][g] = t;
    }
    let mut used = vec![vec![false; q]; q];
    for a in 0..q {
        for &(t, v) in &buckets[a] {
            let mut partner = None;
            for b in 0..q {
                if b == a {
                    continue;
                }
                if let Some(&(_, vb)) = buckets[b]
                    .iter()
                    .find(|(tb, _)| (tb - t).abs() <= ATOM_MATCH_TOL)
                {
                    if !weights_close(v, vb) {
                        return Err(MixtureError::Inconsistent(format!(
                            "tail-pair weights disagree for parameter {t}: {v} vs {vb}"
                        )));
                    }
                    partner = Some(b);
                    break;
                }
            }
            let Some(b) = partner else {
                return Err(MixtureError::Inconsistent(format!(
                    "unmatched two-equal component with parameter {t}"
                )));
            };
            theta[a][b] = t;
            theta[b][a] = t;
            vsq[a][b] = v;
            vsq[b][a] = v;
            used[a][b] = true;
        }
    }
    for a in 0..q {
        for b in 0..q {
            if a != b && !used[a][b] && !used[b][a] {
                return Err(MixtureError::Inconsistent(format!(
                    "no component determines the ({},{}) kernel parameter",
                    a + 1,
                    b + 1
                )));
            }
        }
    }

    // marginal pass: pi_q pi_l p_ql (and pi_q^2 p_qq on the diagonal)
    let mut lin = vec![vec![Option::<f64>::None; q]; q];
    for c in &marginal.components {
        match c.atoms[0] {
            Atom::Dirac0 => continue,
            Atom::Density(t) => {
                let mut hit = false;
                'outer: for a in 0..q {
                    for b in a..q {
                        if (theta[a][b] - t).abs() <= ATOM_MATCH_TOL {
                            let value = if a == b { c.weight } else { c.weight / 2.0 };
                            lin[a][b] = Some(value);
                            lin[b][a] = Some(value);
                            hit = true;
                            break 'outer;
                        }
                    }
                }
                if !hit {
                    return Err(MixtureError::Inconsistent(format!(
                        "marginal component with unknown kernel parameter {t}"
                    )));
                }
            }
        }
    }

    let mut sparsity = vec![vec![0.0f64; q]; q];
    let mut pi = vec![0.0f64; q];
    for a in 0..q {
        let d = lin[a][a].ok_or_else(|| {
            MixtureError::Inconsistent(format!("marginal misses the ({0},{0}) component", a + 1))
        })?;
        let p = (c_q[a] * c_q[a] / d).min(1.0);
        sparsity[a][a] = p;
        pi[a] = c_q[a] / p;
    }
    for a in 0..q {
        for b in (a + 1)..q {
            let u = lin[a][b].ok_or_else(|| {
                MixtureError::Inconsistent(format!(
                    "marginal misses the ({},{}) component",
                    a + 1,
                    b + 1
                ))
            })?;
            let p = (vsq[a][b] / u).min(1.0);
            sparsity[a][b] = p;
            sparsity[b][a] = p;
        }
    }
    let pi_sum: f64 = pi.iter().sum();
    if (pi_sum - 1.0).abs() > 1e-6 {
        return Err(MixtureError::Inconsistent(format!(
            "recovered priors sum to {pi_sum}"
        )));
    }

    Ok(WeightedParams {
        q,
        pi,
        sparsity,
        family: WeightFamily::TruncatedPoisson,
        theta,
    })
}

/// Recovered connectivities and kernel parameters of the weighted
/// affiliation model.
#[derive(Debug, Clone, PartialEq)]
pub struct AffiliationWeightedEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub theta_in: f64,
    pub theta_out: f64,
}

fn pattern_weight(
    set: &MixtureComponentSet,
    want: &mut dyn FnMut(&[Atom]) -> bool,
) -> Result<Option<f64>, MixtureError> {
    let mut found: Option<f64> = None;
    for c in &set.components {
        if want(&c.atoms) {
            match found {
                Some(w0) if !weights_close(w0, c.weight) => {
                    return Err(MixtureError::Inconsistent(format!(
                        "positional copies disagree: {w0} vs {}",
                        c.weight
                    )));
                }
                Some(_) => {}
                None => found = Some(c.weight),
            }
        }
    }
    Ok(found)
}

/// Recover (alpha, beta, theta_in, theta_out) of the weighted affiliation
/// model from the no-Dirac part of the three-coordinate mixture and the
/// full mixture including the point-mass branches.
///
/// The kernel parameter repeated in the two-equal no-Dirac components is
/// the inter-group one; alpha is the weight ratio of the all-in component
/// to itself plus its one-Dirac companion, and beta the analogous ratio
/// for the out-out-in pattern.
pub fn recover_affiliation_weighted(
    no_dirac: &MixtureComponentSet,
    full: &MixtureComponentSet,
) -> Result<AffiliationWeightedEstimate, MixtureError> {
    for set in [no_dirac, full] {
        if set.arity != 3 {
            return Err(MixtureError::WrongArity {
                got: set.arity,
                need: 3,
            });
        }
    }
    let mut theta_in: Option<f64> = None;
    let mut theta_out: Option<f64> = None;
    for c in &no_dirac.components {
        if let Shape::TwoEqual { repeated, single } = classify(&c.atoms) {
            match (theta_out, theta_in) {
                (None, None) => {
                    theta_out = Some(repeated);
                    theta_in = Some(single);
                }
                (Some(o), Some(i)) => {
                    if (o - repeated).abs() > ATOM_MATCH_TOL || (i - single).abs() > ATOM_MATCH_TOL
                    {
                        return Err(MixtureError::Inconsistent(
                            "two-equal components disagree on the kernel parameters".to_string(),
                        ));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    let (Some(theta_in), Some(theta_out)) = (theta_in, theta_out) else {
        // equal kernel parameters collapse every no-Dirac component into
        // the all-equal shape, leaving in and out indistinguishable
        if no_dirac
            .components
            .iter()
            .any(|c| matches!(classify(&c.atoms), Shape::AllEqual(_)))
        {
            return Err(MixtureError::ThetaInOutEqual);
        }
        return Err(MixtureError::Inconsistent(
            "no two-equal no-Dirac components; need at least two groups".to_string(),
        ));
    };
    if (theta_in - theta_out).abs() <= ATOM_MATCH_TOL {
        return Err(MixtureError::ThetaInOutEqual);
    }

    let is_in = |a: &Atom| a.matches(&Atom::Density(theta_in), ATOM_MATCH_TOL);
    let is_out = |a: &Atom| a.matches(&Atom::Density(theta_out), ATOM_MATCH_TOL);
    let is_dirac = |a: &Atom| matches!(a, Atom::Dirac0);

    let w_in3 = pattern_weight(no_dirac, &mut |atoms| atoms.iter().all(is_in))?
        .ok_or_else(|| MixtureError::Inconsistent("missing all-in component".to_string()))?;
    let companion_in = pattern_weight(full, &mut |atoms| {
        atoms.iter().filter(|a| is_dirac(a)).count() == 1
            && atoms.iter().filter(|a| is_in(a)).count() == 2
    })?
    .unwrap_or(0.0);
    let alpha = w_in3 / (w_in3 + companion_in);

    let w_ooi = pattern_weight(no_dirac, &mut |atoms| {
        atoms.iter().filter(|a| is_out(a)).count() == 2
            && atoms.iter().filter(|a| is_in(a)).count() == 1
    })?
    .ok_or_else(|| MixtureError::Inconsistent("missing out-out-in component".to_string()))?;
    let companion_ooi = pattern_weight(full, &mut |atoms| {
        atoms.iter().filter(|a| is_dirac(a)).count() == 1
            && atoms.iter().filter(|a| is_out(a)).count() == 1
            && atoms.iter().filter(|a| is_in(a)).count() == 1
    })?
    .unwrap_or(0.0);
    let beta = w_ooi / (w_ooi + companion_ooi);

    Ok(AffiliationWeightedEstimate {
        alpha,
        beta,
        theta_in,
        theta_out,
    })
}

/// Power sums s_n = w_n / alpha^(n choose 2) from the weights of the
/// all-in components over 2..=Q nodes. Returns (s_1, ..., s_Q) with
/// s_1 = 1 prepended.
pub fn power_sums_from_all_in_weights(
    all_in_weights: &[f64],
    alpha: f64,
) -> Result<Vec<f64>, MixtureError> {
    if !(alpha > 1e-12) {
        return Err(MixtureError::AlphaNonPositive(alpha));
    }
    let mut s = Vec::with_capacity(all_in_weights.len() + 1);
    s.push(1.0);
    for (idx, &w) in all_in_weights.iter().enumerate() {
        let n = idx + 2;
        let exponent = (n * (n - 1) / 2) as i32;
        s.push(w / alpha.powi(exponent));
    }
    Ok(s)
}

/// Priors from the power sums (s_1, ..., s_Q) through the Newton
/// identities: convert to elementary symmetric polynomials, then take the
/// roots of the associated monic polynomial, ascending.
///
/// Feasibility is judged by rebuilding the coefficients from the real
/// root candidates: eigenvalue noise on a multiple root (uniform priors)
/// has a large imaginary spread but a machine-accurate cluster centroid,
/// so a plain imaginary-part test would falsely reject such inputs while
/// the rebuilt coefficients still match to 1e-8.
pub fn priors_from_power_sums(power_sums: &[f64]) -> Result<Vec<f64>, MixtureError> {
    let q = power_sums.len();
    if q == 0 {
        return Err(MixtureError::BadPowerSums("empty".to_string()));
    }
    if (power_sums[0] - 1.0).abs() > 1e-8 {
        return Err(MixtureError::BadPowerSums(format!(
            "s_1 = {} but priors must sum to 1",
            power_sums[0]
        )));
    }
    // Newton identities: k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} s_i
    let mut elem = vec![0.0f64; q + 1];
    elem[0] = 1.0;
    for k in 1..=q {
        let mut acc = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * elem[k - i] * power_sums[i - 1];
        }
        elem[k] = acc / k as f64;
    }
    // monic polynomial with the priors as roots: coefficient of x^(q-k)
    // is (-1)^k e_k
    let tail: Vec<f64> = (1..=q)
        .map(|k| if k % 2 == 1 { -elem[k] } else { elem[k] })
        .collect();
    let clusters = clustered_real_roots(&tail);
    let mut roots: Vec<f64> = Vec::with_capacity(q);
    for (r, mult) in clusters {
        for _ in 0..mult {
            roots.push(r);
        }
    }
    if roots.len() != q {
        return Err(MixtureError::InfeasiblePriors(format!(
            "only {} of {} roots are real",
            roots.len(),
            q
        )));
    }
    if roots.iter().any(|r| !(-1e-8..=1.0 + 1e-8).contains(r)) {
        return Err(MixtureError::InfeasiblePriors(format!(
            "roots outside [0,1]: {roots:?}"
        )));
    }
    // rebuild the elementary symmetric polynomials from the candidates
    let mut rebuilt = vec![0.0f64; q + 1];
    rebuilt[0] = 1.0;
    for (idx, &r) in roots.iter().enumerate() {
        for k in (1..=idx + 1).rev() {
            rebuilt[k] += r * rebuilt[k - 1];
        }
    }
    let mismatch = (1..=q)
        .map(|k| (rebuilt[k] - elem[k]).abs())
        .fold(0.0f64, f64::max);
    if mismatch > 1e-8 {
        return Err(MixtureError::InfeasiblePriors(format!(
            "coefficient mismatch {mismatch} after projecting roots to the real line"
        )));
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Zero-truncated Poisson density theta^k / (k! (e^theta - 1)), k >= 1.
pub fn truncated_poisson_density(k: u64, theta: f64) -> Result<f64, MixtureError> {
    if k == 0 {
        return Err(MixtureError::TruncatedAtZero);
    }
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(MixtureError::BadRate(theta));
    }
    // theta^k / k! as a running product keeps intermediate values tame
    let mut prod = 1.0f64;
    for i in 1..=k {
        prod *= theta / i as f64;
    }
    Ok(prod / theta.exp_m1())
}

fn truncated_poisson_interval_mass(theta: f64, lo: f64, hi: f64) -> f64 {
    // mass of (lo, hi] under the truncated law; support is {1, 2, ...}
    let from = if lo < 1.0 { 1 } else { lo.floor() as u64 + 1 };
    let to = hi.floor();
    if to < 1.0 {
        return 0.0;
    }
    let to = to as u64;
    if to < from {
        return 0.0;
    }
    let norm = theta.exp_m1();
    // term_k = theta^k / k!, advanced multiplicatively
    let mut term_k = {
        let mut t = 1.0;
        for i in 1..=from {
            t *= theta / i as f64;
        }
        t
    };
    let mut mass = 0.0;
    for k in from..=to {
        mass += term_k;
        if term_k < 1e-18 && k as f64 > theta {
            break;
        }
        term_k *= theta / (k + 1) as f64;
    }
    mass / norm
}

fn truncated_poisson_upper_mass(theta: f64, lo: f64) -> f64 {
    // mass of (lo, infinity)
    1.0 - truncated_poisson_interval_mass(theta, 0.0, lo)
}

/// Bin the conditional edge measures into kappa = cutpoints.len() + 1
/// intervals (u_{k-1}, u_k], producing a finite-state model. The point
/// mass at zero lands in the interval containing zero.
pub fn discretize_params(
    w: &WeightedParams,
    cutpoints: &[f64],
) -> Result<FiniteStateParams, MixtureError> {
    w.validate()
        .map_err(|e| MixtureError::InvalidParams(e.to_string()))?;
    if cutpoints.is_empty() || cutpoints.windows(2).any(|c| c[0] >= c[1]) {
        return Err(MixtureError::BadCutpoints);
    }
    let kappa = cutpoints.len() + 1;
    let zero_bin = cutpoints.iter().position(|&u| u >= 0.0).unwrap_or(kappa - 1);
    let mut pvec = vec![vec![vec![0.0f64; kappa]; w.q]; w.q];
    for a in 0..w.q {
        for b in 0..w.q {
            let p = w.sparsity[a][b];
            let theta = w.theta[a][b];
            let mut masses = vec![0.0f64; kappa];
            masses[zero_bin] += 1.0 - p;
            for k in 0..kappa {
                let lo = if k == 0 { f64::NEG_INFINITY } else { cutpoints[k - 1] };
                let kernel_mass = if k == kappa - 1 {
                    truncated_poisson_upper_mass(theta, if lo.is_finite() { lo } else { 0.0 })
                } else {
                    truncated_poisson_interval_mass(theta, lo.max(0.0), cutpoints[k])
                };
                masses[k] += p * kernel_mass;
            }
            pvec[a][b] = masses;
        }
    }
    Ok(FiniteStateParams {
        q: w.q,
        pi: w.pi.clone(),
        kappa,
        pvec,
    })
}

/// Bin the edge weights of a sampled weighted graph, yielding a
/// finite-state graph over the same nodes.
pub fn discretize_graph(
    g: &SampledGraph,
    cutpoints: &[f64],
) -> Result<SampledGraph, MixtureError> {
    if cutpoints.is_empty() || cutpoints.windows(2).any(|c| c[0] >= c[1]) {
        return Err(MixtureError::BadCutpoints);
    }
    let EdgeValues::Weighted(vals) = &g.values else {
        return Err(MixtureError::NotWeighted);
    };
    let kappa = cutpoints.len() + 1;
    let states = vals
        .iter()
        .map(|&v| cutpoints.iter().filter(|&&u| u < v).count() as u16)
        .collect();
    Ok(SampledGraph {
        n: g.n,
        values: EdgeValues::Finite { kappa, states },
        latent: g.latent.clone(),
    })
}

/// Rank report for the binned conditional measures.
#[derive(Debug, Clone, PartialEq)]
pub struct BinIndependenceReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub independent: bool,
}

/// Numerical row rank of the Q(Q+1)/2 binned conditional vectors; full
/// row rank is the precondition for recovering the conditional measures
/// from the binned model.
pub fn check_bin_independence(fsp: &FiniteStateParams) -> BinIndependenceReport {
    let rows: Vec<&Vec<f64>> = (0..fsp.q)
        .flat_map(|a| (a..fsp.q).map(move |b| (a, b)))
        .map(|(a, b)| &fsp.pvec[a][b])
        .collect();
    let nrows = rows.len();
    let m = nalgebra::DMatrix::from_fn(nrows, fsp.kappa, |r, c| rows[r][c]);
    let rank = crate::numeric::numerical_rank(&m, crate::numeric::RANK_REL_TOL);
    BinIndependenceReport {
        rows: nrows,
        cols: fsp.kappa,
        rank,
        independent: rank == nrows,
    }
}
