//! A toolkit for random-graph models with fixed pairwise edge probabilities
//! but tunable dependence between edges.
//!
//! The crate covers four edge-probability models (Erdős–Rényi, Chung–Lu,
//! stochastic block, Kronecker), three realization schemes (edge-independent,
//! local binding, parallel binding), exact 3-motif probabilities and
//! class-aggregated expected triangle/wedge counts for each scheme, gradient
//! fitting of the binding parameters, and Monte Carlo / brute-force oracles
//! for validation.

pub mod binding;
pub mod counts;
pub mod error;
pub mod fit;
pub mod graph;
pub mod model;
pub mod motif;
pub mod oracle;
pub mod rng;
pub mod scalar;

pub use binding::{
    generate_batch, sample, sample_eigm, sample_local_binding, sample_parallel_binding,
    BindingFile, BindingParams, ResidualCoupling, Scheme, DEFAULT_ROUNDS_LOCAL,
    DEFAULT_ROUNDS_PARALLEL,
};
pub use counts::{analytic_overlap, expected_counts, ExpectedCounts};
pub use error::{Error, Result};
pub use fit::{
    expected_counts_gradient, fit_binding, fit_binding_joint, CountsGradient, FitObjective,
    FitOptions, FitReport,
};
pub use graph::{compute_stats, empirical_overlap, read_edge_list, Graph, GraphStats};
pub use model::{
    cl_from_degrees, degree_bucket_partition, fit_cl, fit_er, fit_sb, load_kr, model_from_json,
    model_to_json, read_model, write_model, ClassStructure, ClassView, EdgeProbModel,
};
pub use motif::{
    motif3, motif3_eigm, motif3_local, motif3_maximal, motif3_parallel, MotifDistribution3,
    TripleSpec,
};
pub use oracle::{mc_marginals, mc_motif3, naive_expected_counts, OracleEstimate};
pub use rng::RngSpec;
