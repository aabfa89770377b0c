//! Identifiability machinery for random graph mixture models (stochastic
//! blockmodels): moment-based estimators for binary affiliation models,
//! constructive parameter recovery for weighted parametric models, and
//! numerical rank checks of the algebraic identifiability conditions.
//!
//! Everything is validated against [`oracle`], an exact enumeration of the
//! joint edge distribution at desk scale, which serves as the ground truth
//! for the closed-form moment polynomials and the recovery pipelines.

pub mod affiliation;
pub mod edges;
pub mod kruskal;
pub mod mixture;
pub mod moments;
pub mod numeric;
pub mod oracle;
pub mod params;
pub mod sampler;

pub use affiliation::{
    connectivity_candidates, estimate_group_count_uniform, estimate_two_group_k3,
    estimate_with_known_priors, group_count_ratio, AlphaPolynomial, Candidate, RecoveryResult,
    SubsetMoments,
};
pub use kruskal::{
    conditional_matrix, conditional_rank_report, degree_family, erdos_gallai_realizable,
    kruskal_condition, kruskal_rank, kruskal_report, kruskal_tensor, ConditionalMatrix,
    ConditionalRankReport, DegreeSequence, KruskalReport, Tensor3,
};
pub use mixture::{
    check_bin_independence, discretize_graph, discretize_params, expand_k3_mixture,
    expand_kn_mixture, power_sums_from_all_in_weights, priors_from_power_sums,
    recover_affiliation_weighted, recover_from_k3, truncated_poisson_density,
    AffiliationWeightedEstimate, Atom, MixtureComponent, MixtureComponentSet,
};
pub use moments::{
    empirical_moments, q1_statistic, theoretical_moments, K4Moments, MomentDepth, MomentSet,
    Provenance,
};
pub use oracle::{exact_distribution, exact_motif_moment, identifiability_scan, ExactDistribution};
pub use params::{
    affiliation_to_block, power_sums, AffiliationParams, BinaryBlockParams, DiscreteEdgeModel,
    FiniteStateParams, ModelParams, PowerSums, Validate, WeightFamily, WeightedParams,
};
pub use sampler::{
    replicate_seed, sample_graph, sample_truncated_poisson, EdgeValues, GraphKind, SampledGraph,
};
