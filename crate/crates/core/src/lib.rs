//! SIR epidemics on random graphs built from single edges and triangles.
//!
//! The analytic side ([`branching`]) approximates the early and final
//! stages of the epidemic by multitype branching processes. The stochastic
//! side ([`graph`], [`simulator`]) builds finite graphs and runs the
//! epidemic on them, so the two can be compared.

pub mod branching;
pub mod degree;
pub mod error;
pub mod graph;
pub mod simulator;
pub mod transmission;

pub use branching::{analyze, AnalysisReport, EpidemicModel, MeanMatrix};
pub use degree::{DegreeDistribution, EdgeKind, JointDegree};
pub use error::{Error, Result};
pub use graph::{build_graph, sample_degrees, CmcGraph, GenerationReport};
pub use transmission::{LaplaceSpec, TransmissionLaw};
pub use simulator::{estimate_forward_means, monte_carlo, simulate_once, EpidemicConfig, EpidemicResult, MonteCarloSummary};
