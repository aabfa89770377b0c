//! Property tests for the model-level invariants: power-sum inequalities,
//! oracle agreement, estimator round trips and recovery pipelines.

use proptest::prelude::*;

use sbm_ident::affiliation::estimate_two_group_k3;
use sbm_ident::mixture::{
    expand_k3_mixture, expand_kn_mixture, power_sums_from_all_in_weights, priors_from_power_sums,
    recover_affiliation_weighted, recover_from_k3, Atom,
};
use sbm_ident::moments::{theoretical_moments, MomentSet};
use sbm_ident::oracle::{exact_distribution, exact_motif_moment};
use sbm_ident::params::{
    affiliation_to_block, power_sums, AffiliationParams, WeightFamily, WeightedParams,
};

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let tot: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / tot).collect()
}

fn moment_by_index(ms: &MomentSet, idx: usize) -> f64 {
    let k4 = ms.k4.as_ref().unwrap();
    [
        ms.m1, ms.m2, ms.m31, k4.m32, k4.m33, k4.m41, k4.m42, k4.m5, k4.m6,
    ][idx]
}

const MOTIFS: [&[(usize, usize)]; 9] = [
    &[(0, 1)],
    &[(0, 1), (0, 2)],
    &[(0, 1), (0, 2), (1, 2)],
    &[(0, 1), (0, 2), (0, 3)],
    &[(0, 1), (1, 2), (2, 3)],
    &[(0, 1), (1, 2), (2, 3), (0, 3)],
    &[(0, 1), (0, 2), (0, 3), (1, 2)],
    &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
    &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_sum_chain(q in 2usize..6, raw in proptest::collection::vec(0.01f64..1.0, 6)) {
        let pi = normalized(raw[..q].to_vec());
        let s = power_sums(&pi, 4).unwrap();
        prop_assert!((s.s(1) - 1.0).abs() < 1e-12);
        prop_assert!(s.s(2) * s.s(2) <= s.s(3) + 1e-15);
        prop_assert!(s.s(3) * s.s(3) <= s.s(2) * s.s(4) + 1e-15);
        prop_assert!(2.0 * s.s(2).powi(3) - 3.0 * s.s(2) * s.s(3) + s.s(3) > 0.0);
    }

    #[test]
    fn closed_forms_match_oracle(
        q in 2usize..4,
        raw in proptest::collection::vec(0.05f64..1.0, 4),
        alpha in 0.0f64..1.0,
        beta in 0.0f64..1.0,
    ) {
        let params = AffiliationParams { q, pi: normalized(raw[..q].to_vec()), alpha, beta };
        let ms = theoretical_moments(&params);
        let dist = exact_distribution(&affiliation_to_block(&params), 4).unwrap();
        for (idx, motif) in MOTIFS.iter().enumerate() {
            let oracle = exact_motif_moment(&dist, motif).unwrap();
            prop_assert!((moment_by_index(&ms, idx) - oracle).abs() < 1e-12, "motif {idx}");
        }
    }

    #[test]
    fn two_group_round_trip(
        p1 in 0.05f64..0.95,
        alpha in 0.02f64..0.98,
        delta in 0.05f64..0.9,
        sign in proptest::bool::ANY,
    ) {
        let beta = if sign { (alpha + delta).min(0.99) } else { (alpha - delta).max(0.01) };
        prop_assume!((alpha - beta).abs() > 0.05);
        let params = AffiliationParams { q: 2, pi: vec![p1, 1.0 - p1], alpha, beta };
        let ms = theoretical_moments(&params);
        let rec = estimate_two_group_k3(&ms).unwrap();
        prop_assert!((rec.alpha - alpha).abs() < 1e-9);
        prop_assert!((rec.beta - beta).abs() < 1e-9);
        let pi = rec.pi.unwrap();
        let want = if p1 <= 0.5 { [p1, 1.0 - p1] } else { [1.0 - p1, p1] };
        prop_assert!((pi[0] - want[0]).abs() < 1e-9 && (pi[1] - want[1]).abs() < 1e-9);
    }

    #[test]
    fn exchangeability_under_relabeling(
        q in 2usize..4,
        raw in proptest::collection::vec(0.05f64..1.0, 4),
        alpha in 0.05f64..0.95,
        beta in 0.05f64..0.95,
        perm_seed in 0usize..24,
    ) {
        let params = AffiliationParams { q, pi: normalized(raw[..q].to_vec()), alpha, beta };
        let dist = exact_distribution(&affiliation_to_block(&params), 4).unwrap();
        // pick one of the 24 node permutations
        let mut nodes = vec![0usize, 1, 2, 3];
        let mut k = perm_seed;
        let mut perm = Vec::new();
        for f in (1..=4usize).rev() {
            let idx = k % f;
            k /= f;
            perm.push(nodes.remove(idx));
        }
        let edge_index = |i: usize, j: usize| -> usize {
            let (i, j) = (i.min(j), i.max(j));
            i * 4 - i * (i + 1) / 2 + (j - i - 1)
        };
        for c in 0..dist.probs.len() {
            let mut pc = 0usize;
            let mut k = 0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let bit = (c >> (5 - k)) & 1;
                    pc |= bit << (5 - edge_index(perm[i], perm[j]));
                    k += 1;
                }
            }
            prop_assert!((dist.probs[c] - dist.probs[pc]).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_k3_round_trip(
        q in 1usize..4,
        raw in proptest::collection::vec(0.1f64..1.0, 3),
        sp in proptest::collection::vec(0.15f64..1.0, 6),
        base in 0.3f64..2.0,
        gaps in proptest::collection::vec(0.1f64..1.5, 6),
    ) {
        let pi = normalized(raw[..q].to_vec());
        // thetas separated by at least 0.1 by cumulative construction
        let mut upper = Vec::new();
        let mut t = base;
        for g in &gaps[..q * (q + 1) / 2] {
            upper.push(t);
            t += g;
        }
        let mut sparsity = vec![vec![0.0; q]; q];
        let mut theta = vec![vec![0.0; q]; q];
        let mut idx = 0;
        for a in 0..q {
            for b in a..q {
                sparsity[a][b] = sp[idx];
                sparsity[b][a] = sp[idx];
                theta[a][b] = upper[idx];
                theta[b][a] = upper[idx];
                idx += 1;
            }
        }
        let w = WeightedParams { q, pi, sparsity, family: WeightFamily::TruncatedPoisson, theta };
        let comps = expand_k3_mixture(&w).unwrap();
        let marg = expand_kn_mixture(&w, 2).unwrap();
        let rec = recover_from_k3(&comps, &marg).unwrap();
        prop_assert_eq!(rec.q, q);
        // canonical labels sort by diagonal theta; rebuild that order for truth
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| w.theta[a][a].total_cmp(&w.theta[b][b]));
        for (na, &oa) in order.iter().enumerate() {
            prop_assert!((rec.pi[na] - w.pi[oa]).abs() < 1e-10);
            for (nb, &ob) in order.iter().enumerate() {
                prop_assert!((rec.theta[na][nb] - w.theta[oa][ob]).abs() < 1e-10);
                prop_assert!((rec.sparsity[na][nb] - w.sparsity[oa][ob]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn affiliation_weighted_full_round_trip(
        q in 2usize..5,
        raw in proptest::collection::vec(0.1f64..1.0, 4),
        alpha in 0.2f64..1.0,
        beta in 0.2f64..1.0,
        theta_in in 0.3f64..2.0,
        gap in 0.2f64..2.0,
    ) {
        let mut pi = normalized(raw[..q].to_vec());
        pi.sort_by(f64::total_cmp);
        let theta_out = theta_in + gap;
        let w = WeightedParams::affiliation(pi.clone(), alpha, beta, theta_in, theta_out);
        let full = expand_k3_mixture(&w).unwrap();
        let est = recover_affiliation_weighted(&full.without_dirac(), &full).unwrap();
        prop_assert!((est.alpha - alpha).abs() < 1e-8);
        prop_assert!((est.beta - beta).abs() < 1e-8);
        prop_assert!((est.theta_in - theta_in).abs() < 1e-8);
        prop_assert!((est.theta_out - theta_out).abs() < 1e-8);

        // priors via the all-in weights of the mixtures over 2..=Q nodes
        let mut weights = Vec::new();
        for n in 2..=q {
            let set = expand_kn_mixture(&w, n).unwrap();
            let want = vec![Atom::Density(theta_in); n * (n - 1) / 2];
            let w_n = set
                .components
                .iter()
                .find(|c| c.atoms.len() == want.len()
                    && c.atoms.iter().zip(&want).all(|(a, b)| a.matches(b, 1e-9)))
                .map(|c| c.weight)
                .unwrap();
            weights.push(w_n);
        }
        let s = power_sums_from_all_in_weights(&weights, est.alpha).unwrap();
        let rec_pi = priors_from_power_sums(&s).unwrap();
        for (a, b) in rec_pi.iter().zip(&pi) {
            prop_assert!((a - b).abs() < 1e-8, "{rec_pi:?} vs {pi:?}");
        }
    }

    #[test]
    fn newton_identity_round_trip(
        q in 2usize..6,
        raw in proptest::collection::vec(0.05f64..1.0, 5),
    ) {
        let mut pi = normalized(raw[..q].to_vec());
        pi.sort_by(f64::total_cmp);
        let s = power_sums(&pi, q).unwrap();
        let rec = priors_from_power_sums(s.values()).unwrap();
        for (a, b) in rec.iter().zip(&pi) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn discretize_total_mass(
        sp in 0.05f64..1.0,
        theta in 0.1f64..6.0,
        cuts in proptest::collection::vec(-0.5f64..8.0, 1..5),
    ) {
        let mut cutpoints = cuts;
        cutpoints.sort_by(f64::total_cmp);
        cutpoints.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let w = WeightedParams {
            q: 1,
            pi: vec![1.0],
            sparsity: vec![vec![sp]],
            family: WeightFamily::TruncatedPoisson,
            theta: vec![vec![theta]],
        };
        let fsp = sbm_ident::mixture::discretize_params(&w, &cutpoints).unwrap();
        let total: f64 = fsp.pvec[0][0].iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
