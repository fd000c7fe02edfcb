//! Branching-process approximations of the epidemic.
//!
//! Forward process types (both with and without vaccination):
//!
//! * type 1: infected along a triangle edge, twin already accounted for,
//! * type 2: infected along a triangle edge, twin still open,
//! * type 3: infected along a single edge.
//!
//! The unvaccinated backward (susceptibility-set) process has two types,
//! single (1) and triangle (2). The vaccinated backward process has three:
//! triangle with unknown vaccination status (1), triangle and known to be
//! unvaccinated (2), single (3).
//!
//! When the degree law has no triangle half-edges (or no single ones) the
//! corresponding types cannot occur and are dropped from every vector and
//! matrix; [`EpidemicModel::forward_types`] and friends report which types
//! remain.

mod analysis;
mod fixed_point;
mod perron;
mod pgf;

pub use analysis::{analyze, AnalysisReport};
pub use fixed_point::{minimal_fixed_point, FixedPointOptions, FixedPointResult};
pub use perron::{characteristic_polynomial, perron_root};
pub use pgf::{backward_edge_triplet, OffspringPgf, PgfEvaluator, PgfModel};

use serde::Serialize;

use crate::degree::{DegreeDistribution, DownshiftedMeans, EdgeKind, ValidationReport};
use crate::error::{Error, Result};
use crate::transmission::{QuadratureRule, TMoments, TransmissionLaw};

/// A degree law paired with a transmission law, with the derived laws and
/// expectation rule cached.
#[derive(Debug, Clone)]
pub struct EpidemicModel {
    dist: DegreeDistribution,
    law: TransmissionLaw,
    single: Option<DegreeDistribution>,
    triangle: Option<DegreeDistribution>,
    means: DownshiftedMeans,
    validation: ValidationReport,
    moments: TMoments,
    rule: QuadratureRule,
}

impl EpidemicModel {
    pub fn new(dist: DegreeDistribution, law: TransmissionLaw) -> Result<Self> {
        law.validate()?;
        let validation = dist.validate();
        if !validation.has_single && !validation.has_triangle {
            return Err(Error::Domain(
                "degree law has neither single nor triangle half-edges".into(),
            ));
        }
        let single = dist.downshifted(EdgeKind::Single);
        let triangle = dist.downshifted(EdgeKind::Triangle);
        let means = dist.downshifted_means();
        // the type-2 generating function carries one extra linear factor in T
        let rule = law.expectation_rule(dist.max_total_degree() + 1);
        let moments = law.derived_moments();
        Ok(Self {
            dist,
            law,
            single,
            triangle,
            means,
            validation,
            moments,
            rule,
        })
    }

    pub fn distribution(&self) -> &DegreeDistribution {
        &self.dist
    }

    pub fn law(&self) -> &TransmissionLaw {
        &self.law
    }

    pub fn validation(&self) -> ValidationReport {
        self.validation
    }

    pub fn t_moments(&self) -> TMoments {
        self.moments
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Downshifted single-size-biased law `p_•^(s)`.
    pub fn single_branch(&self) -> Option<&DegreeDistribution> {
        self.single.as_ref()
    }

    /// Downshifted triangle-size-biased law `p_•^(Δ)`.
    pub fn triangle_branch(&self) -> Option<&DegreeDistribution> {
        self.triangle.as_ref()
    }

    pub fn has_single(&self) -> bool {
        self.single.is_some()
    }

    pub fn has_triangle(&self) -> bool {
        self.triangle.is_some()
    }

    /// Active forward types (1-based labels).
    pub fn forward_types(&self) -> Vec<usize> {
        let mut types = Vec::with_capacity(3);
        if self.has_triangle() {
            types.extend([1, 2]);
        }
        if self.has_single() {
            types.push(3);
        }
        types
    }

    /// Active types of the two-type backward process (1 single, 2 triangle).
    pub fn backward_types(&self) -> Vec<usize> {
        let mut types = Vec::with_capacity(2);
        if self.has_single() {
            types.push(1);
        }
        if self.has_triangle() {
            types.push(2);
        }
        types
    }

    /// Human-readable notes on conditions under which the mean matrix is
    /// not positively regular. Results are still computed.
    pub fn regularity_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if !self.validation.a2_holds {
            warnings.push(
                "degree law violates P(max(Δ,S) ≥ 2) > 0 and E(ΔS) > 0; types were reduced".into(),
            );
        }
        let e_t = self.moments.e_t;
        if e_t <= 0.0 || e_t >= 1.0 {
            warnings.push(format!("E(T) = {e_t} lies on the boundary of (0, 1)"));
        }
        warnings
    }

    /// Mean offspring matrix of the forward process, rows indexed by parent
    /// type, restricted to the active types and scaled by `1 − f_v`.
    pub fn forward_mean_matrix(&self, f_v: f64) -> Result<MeanMatrix> {
        check_coverage(f_v)?;
        let tm = self.moments;
        let m = self.means;
        let dd = m.delta_given_delta.unwrap_or(0.0);
        let sd = m.s_given_delta.unwrap_or(0.0);
        let ds = m.delta_given_s.unwrap_or(0.0);
        let ss = m.s_given_s.unwrap_or(0.0);
        let full = [
            [2.0 * tm.e_t2 * dd, 2.0 * tm.e_t_1mt * dd, tm.e_t * sd],
            [2.0 * tm.e_t2 * dd + tm.e_t, 2.0 * tm.e_t_1mt * dd, tm.e_t * sd],
            [2.0 * tm.e_t2 * ds, 2.0 * tm.e_t_1mt * ds, tm.e_t * ss],
        ];
        let types = self.forward_types();
        let scale = 1.0 - f_v;
        let entries = types
            .iter()
            .flat_map(|&i| types.iter().map(move |&j| scale * full[i - 1][j - 1]))
            .collect();
        Ok(MeanMatrix { types, entries })
    }
}

pub(crate) fn check_coverage(f_v: f64) -> Result<()> {
    if (0.0..1.0).contains(&f_v) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "vaccination coverage {f_v} must lie in [0, 1)"
        )))
    }
}

/// Square nonnegative matrix over a set of type labels, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanMatrix {
    pub types: Vec<usize>,
    pub entries: Vec<f64>,
}

impl MeanMatrix {
    pub fn from_rows(types: Vec<usize>, rows: &[Vec<f64>]) -> Self {
        assert_eq!(types.len(), rows.len());
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), types.len());
                r.iter().copied()
            })
            .collect();
        Self { types, entries }
    }

    pub fn dim(&self) -> usize {
        self.types.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim().max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            types: self.types.clone(),
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn perron_root(&self) -> f64 {
        perron_root(self)
    }
}
