//! Small numerical kernels shared across modules: numerical rank via
//! singular values, monic polynomial roots via the companion matrix, and
//! Horner evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative singular-value threshold for numerical rank. Entries of the
/// matrices we rank are probability products in [0,1]; conditioning is
/// mild at desk scale.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Numerical rank: number of singular values above `rel_tol` times the
/// largest one.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Evaluate a polynomial given by descending coefficients.
pub fn eval_poly_desc(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Derivative evaluation for descending coefficients.
pub fn eval_poly_desc_deriv(coeffs: &[f64], x: f64) -> f64 {
    let d = coeffs.len() - 1;
    coeffs[..d]
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &c)| acc * x + c * (d - i) as f64)
}

/// All complex roots of the monic polynomial x^d + tail[0] x^{d-1} + ... +
/// tail[d-1], via companion-matrix eigenvalues.
pub fn monic_roots(tail: &[f64]) -> Vec<Complex64> {
    let d = tail.len();
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![Complex64::new(-tail[0], 0.0)];
    }
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -tail[d - 1 - i];
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

/// Real roots with multiplicities, robust to root clusters.
///
/// Companion eigenvalues of an m-fold root scatter in a star of radius
/// O(eps^(1/m)) with large imaginary parts, so a plain `|im| < tol`
/// filter would miss them entirely, while their centroid is accurate to
/// machine precision. Roots within 3*eps^(1/d) of each other are grouped;
/// a group whose members are all essentially real holds genuinely
/// distinct simple roots and is emitted member by member, otherwise the
/// group is a multiple-root star (or a near-real conjugate pair) and its
/// centroid is kept when the centroid itself is real. A well-separated
/// conjugate pair never groups and each member is rejected as complex.
pub fn clustered_real_roots(tail: &[f64]) -> Vec<(f64, usize)> {
    let roots = monic_roots(tail);
    let d = roots.len();
    if d == 0 {
        return Vec::new();
    }
    let eps = 3.0 * f64::EPSILON.powf(1.0 / d as f64);

    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if (roots[i] - roots[j]).norm() <= eps {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut clusters: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for i in 0..d {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(roots[i]);
    }

    let mut out = Vec::new();
    for members in clusters.values() {
        let im_tol = |re: f64| 1e-8f64.max(1e-8 * re.abs());
        if members.iter().all(|r| r.im.abs() <= im_tol(r.re)) {
            for r in members {
                out.push((r.re, 1));
            }
            continue;
        }
        let mult = members.len();
        let centroid = members.iter().sum::<Complex64>() / mult as f64;
        if centroid.im.abs() <= im_tol(centroid.re) {
            out.push((centroid.re, mult));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Double-double value hi + lo for compensated evaluation of strongly
/// cancelling polynomials (error-free transformations via Dekker/Knuth
/// two-sum and FMA two-product).
#[derive(Debug, Clone, Copy)]
pub struct TwoFloat {
    hi: f64,
    lo: f64,
}

fn quick_two_sum(a: f64, b: f64) -> TwoFloat {
    let s = a + b;
    TwoFloat { hi: s, lo: b - (s - a) }
}

fn two_sum(a: f64, b: f64) -> TwoFloat {
    let s = a + b;
    let bb = s - a;
    TwoFloat {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod(a: f64, b: f64) -> TwoFloat {
    let p = a * b;
    TwoFloat {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl TwoFloat {
    pub fn new(x: f64) -> Self {
        TwoFloat { hi: x, lo: 0.0 }
    }

    pub fn scale(self, k: f64) -> TwoFloat {
        self * TwoFloat::new(k)
    }

    pub fn powi(self, n: u32) -> TwoFloat {
        let mut acc = TwoFloat::new(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

impl std::ops::Add for TwoFloat {
    type Output = TwoFloat;
    fn add(self, o: TwoFloat) -> TwoFloat {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }
}

impl std::ops::Mul for TwoFloat {
    type Output = TwoFloat;
    fn mul(self, o: TwoFloat) -> TwoFloat {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }
}

impl std::ops::Neg for TwoFloat {
    type Output = TwoFloat;
    fn neg(self) -> TwoFloat {
        TwoFloat {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

/// One safeguarded Newton polish pass for a simple real root.
pub fn polish_root(coeffs_desc: &[f64], x0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..4 {
        let f = eval_poly_desc(coeffs_desc, x);
        let fp = eval_poly_desc_deriv(coeffs_desc, x);
        if fp == 0.0 {
            break;
        }
        let step = f / fp;
        if !step.is_finite() || step.abs() > 0.5 {
            break;
        }
        x -= step;
    }
    if eval_poly_desc(coeffs_desc, x).abs() <= eval_poly_desc(coeffs_desc, x0).abs() {
        x
    } else {
        x0
    }
}
