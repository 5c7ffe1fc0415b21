//! Extrinsic statistics for samples of weighted networks represented as
//! graph Laplacians: power-map embeddings, Euclidean and Procrustes
//! distances, Fréchet means, tangent-space PCA and regression, and
//! two-sample tests.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod edges;
pub mod error;
pub mod explore;
pub mod io;
pub mod laplacian;
mod linalg;
pub mod means;
pub mod metrics;
pub mod pca;
pub mod projection;
pub mod regression;
pub mod sample;
pub mod synth;
pub mod tangent;
pub mod tolerance;
pub mod twosample;
pub mod vectorize;

pub use config::{AnalysisConfig, GpaSettings, MetricPreset};
pub use corpus::{Corpus, CorpusDocument, CorpusManifest, Vocabulary};
pub use edges::{EdgeZ, EdgeZParams, EdgeZTable, OffsetPolicy};
pub use error::{Error, Result};
pub use explore::{Dendrogram, MdsResult, Merge, WardVariant};
pub use laplacian::{AdjacencyMatrix, ConstraintReport, GraphLaplacian};
pub use means::MeanResult;
pub use metrics::{EmbeddedPoint, Geometry, ReverseMapVariant};
pub use pca::{PcaResult, PcaSolver};
pub use projection::{project_to_laplacian, Projector, QpSettings, SolveReport};
pub use regression::{LrtResult, RegressionFit, VarianceModel};
pub use sample::NetworkSample;
pub use tangent::TangentVector;
pub use twosample::{TestMethod, TwoSampleResult, WeightedChiSquare};
pub use vectorize::HelmertSubMatrix;
