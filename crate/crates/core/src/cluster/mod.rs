//! From a coefficient tensor to cluster labels and their scores.

mod affinity;
mod metrics;
mod noise;
mod spectral;

pub use affinity::{
    affinity_average, affinity_weighted, diag_ratio_weights, AffinityMatrix, SliceWeights, DEFAULT_EPS_GUARD,
};
pub use metrics::{acc, mean_std, nmi, Contingency};
pub use noise::{add_gaussian_noise, add_sparse_noise};
pub use spectral::{
    kmeans, spectral_clustering, spectral_embedding, ClusterResult, KMeansRun, SpectralResult, DEFAULT_RESTARTS,
    DEGREE_EPS, KMEANS_MAX_ITERS,
};
