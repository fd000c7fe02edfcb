//! Offspring probability generating functions.
//!
//! All expectations over `T` go through the model's quadrature rule, which
//! is exact for the polynomial degrees that occur here. Expectations over
//! degrees are finite sums over atoms.

use super::{check_coverage, EpidemicModel};
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgfModel {
    /// Three-type forward process without vaccination.
    Forward,
    /// Two-type backward process without vaccination.
    Backward,
    /// Three-type forward process with uniform vaccination.
    ForwardVacc,
    /// Three-type backward process with uniform vaccination.
    BackwardVacc,
}

impl PgfModel {
    fn full_dim(self) -> usize {
        match self {
            Self::Backward => 2,
            _ => 3,
        }
    }
}

/// `(p0, p1, p2)`: probabilities that zero, one or two triangle partners
/// enter a node's susceptibility set through that triangle.
pub fn backward_edge_triplet(e_t: f64, e_t2: f64) -> (f64, f64, f64) {
    let p2 = 3.0 * e_t * e_t - 2.0 * e_t * e_t2;
    let p0 = (1.0 - e_t) * (1.0 - e_t);
    (p0, 1.0 - p0 - p2, p2)
}

// Every factor below is written as `1 − (…)(1 − z)` and every expectation is
// normalised by its total weight, so that the all-ones vector maps to one
// without rounding.
fn kernel(branch: &DegreeDistribution, single: f64, triangle: f64) -> f64 {
    let (num, den) = branch.iter().fold((0.0, 0.0), |(num, den), (d, p)| {
        let term = p * single.powi(d.k_s as i32) * triangle.powi(d.k_delta as i32);
        (num + term, den + p)
    });
    num / den
}

/// `x ↦ f_v + (1 − f_v)x` with the identity at `x = 1` kept exact.
fn mixed(f_v: f64, x: f64) -> f64 {
    1.0 - (1.0 - f_v) * (1.0 - x)
}

fn absent(what: &str) -> Error {
    Error::Domain(format!("the {what} branch is absent for this degree law"))
}

impl EpidemicModel {
    fn branch_single(&self) -> Result<&DegreeDistribution> {
        self.single_branch().ok_or_else(|| absent("single"))
    }

    fn branch_triangle(&self) -> Result<&DegreeDistribution> {
        self.triangle_branch().ok_or_else(|| absent("triangle"))
    }

    fn expect_t(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let (num, den) = self
            .rule()
            .iter()
            .fold((0.0, 0.0), |(num, den), (t, w)| (num + w * g(t), den + w));
        num / den
    }

    /// Unvaccinated forward component for a parent with degree law `branch`.
    fn forward_plain(&self, branch: &DegreeDistribution, z: &[f64], twin_open: bool) -> f64 {
        let (z1, z2, z3) = (z[0], z[1], z[2]);
        self.expect_t(|t| {
            let single = 1.0 - t * (1.0 - z3);
            let tri = 1.0 - 2.0 * t * (1.0 - t) * (1.0 - z2) - t * t * (1.0 - z1 * z1);
            let extra = if twin_open { 1.0 - t * (1.0 - z1) } else { 1.0 };
            kernel(branch, single, tri) * extra
        })
    }

    /// Forward component with a vaccinated fraction `f_v`.
    fn forward_vacc(&self, branch: &DegreeDistribution, f_v: f64, z: &[f64], twin_open: bool) -> f64 {
        let s = 1.0 - f_v;
        // a contacted triangle partner is either vaccinated or becomes a child
        let (w1, w2, w3) = (mixed(f_v, z[0]), mixed(f_v, z[1]), mixed(f_v, z[2]));
        self.expect_t(|t| {
            let single = 1.0 - t * (1.0 - w3);
            let tri = 1.0 - 2.0 * t * (1.0 - t) * (1.0 - w2) - t * t * (1.0 - w1 * w1);
            let extra = if twin_open { 1.0 - t * s * (1.0 - z[0]) } else { 1.0 };
            kernel(branch, single, tri) * extra
        })
    }

    fn backward_plain(&self, branch: &DegreeDistribution, z: &[f64]) -> f64 {
        let tm = self.t_moments();
        let (_, p1, p2) = backward_edge_triplet(tm.e_t, tm.e_t2);
        let single = 1.0 - tm.e_t * (1.0 - z[0]);
        let tri = 1.0 - p1 * (1.0 - z[1]) - p2 * (1.0 - z[1] * z[1]);
        kernel(branch, single, tri)
    }

    /// Expectation inside the vaccinated backward generating functions, for
    /// a susceptible parent with degree law `branch`.
    fn backward_vacc_inner(&self, branch: &DegreeDistribution, f_v: f64, z: &[f64]) -> f64 {
        let tm = self.t_moments();
        let (z1, z2, z3) = (z[0], z[1], z[2]);
        let mu = tm.e_t;
        let single = 1.0 - mu * (1.0 - z3);
        let tri = 1.0
            - 2.0 * mu * tm.e_t_1mt * (1.0 - f_v) * (1.0 - z1 * z2)
            - 2.0 * mu * tm.e_1mt2 * (1.0 - z1)
            - mu * mu * (1.0 - z1 * z1);
        kernel(branch, single, tri)
    }

    /// `f(z)` of the unvaccinated forward process. Every type must exist.
    pub fn forward_offspring_pgf(&self, z: [f64; 3]) -> Result<[f64; 3]> {
        let tri = self.branch_triangle()?;
        let single = self.branch_single()?;
        Ok([
            self.forward_plain(tri, &z, false),
            self.forward_plain(tri, &z, true),
            self.forward_plain(single, &z, false),
        ])
    }

    /// `h(z)` of the forward process under vaccination coverage `f_v`.
    pub fn forward_offspring_pgf_vacc(&self, f_v: f64, z: [f64; 3]) -> Result<[f64; 3]> {
        check_coverage(f_v)?;
        let tri = self.branch_triangle()?;
        let single = self.branch_single()?;
        Ok([
            self.forward_vacc(tri, f_v, &z, false),
            self.forward_vacc(tri, f_v, &z, true),
            self.forward_vacc(single, f_v, &z, false),
        ])
    }

    /// `b(z)` of the two-type backward process: single then triangle.
    pub fn backward_offspring_pgf(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        Ok([
            self.backward_plain(self.branch_single()?, &z),
            self.backward_plain(self.branch_triangle()?, &z),
        ])
    }

    /// `b^(v)(z)` of the three-type vaccinated backward process.
    pub fn backward_offspring_pgf_vacc(&self, f_v: f64, z: [f64; 3]) -> Result<[f64; 3]> {
        check_coverage(f_v)?;
        let tri = self.backward_vacc_inner(self.branch_triangle()?, f_v, &z);
        let single = self.backward_vacc_inner(self.branch_single()?, f_v, &z);
        Ok([mixed(f_v, tri), tri, mixed(f_v, single)])
    }

    /// Generating function of the initial individual (forward models) or the
    /// sampled node (backward models). `z` has the full dimension of `model`;
    /// its components for absent types are ignored. `f_v` is ignored by the
    /// unvaccinated models.
    pub fn ancestor_pgf(&self, model: PgfModel, f_v: f64, z: &[f64]) -> Result<f64> {
        check_coverage(f_v)?;
        if z.len() != model.full_dim() {
            return Err(Error::InvalidInput(format!(
                "{model:?} expects a vector of length {}",
                model.full_dim()
            )));
        }
        let z = self.fill_absent(model, z);
        let dist = self.distribution();
        Ok(match model {
            PgfModel::Forward => self.forward_plain(dist, &z, false),
            PgfModel::ForwardVacc => self.forward_vacc(dist, f_v, &z, false),
            PgfModel::Backward => self.backward_plain(dist, &z),
            PgfModel::BackwardVacc => mixed(f_v, self.backward_vacc_inner(dist, f_v, &z)),
        })
    }

    /// Positions (0-based, in the full vector) of the active types.
    fn active_positions(&self, model: PgfModel) -> Vec<usize> {
        match model {
            PgfModel::Backward => self.backward_types().iter().map(|t| t - 1).collect(),
            _ => self.forward_types().iter().map(|t| t - 1).collect(),
        }
    }

    // Absent types only ever appear with exponent zero, so any value works;
    // one keeps every factor a probability.
    fn fill_absent(&self, model: PgfModel, z: &[f64]) -> Vec<f64> {
        let mut full = vec![1.0; model.full_dim()];
        for pos in self.active_positions(model) {
            full[pos] = z[pos];
        }
        full
    }
}

/// A map from `[0, 1]^r` to itself, componentwise nondecreasing.
pub trait OffspringPgf {
    fn dim(&self) -> usize;
    fn eval_into(&self, z: &[f64], out: &mut [f64]);

    fn eval(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(z, &mut out);
        out
    }
}

/// Offspring generating function restricted to the active types of a model.
#[derive(Debug, Clone)]
pub struct PgfEvaluator<'a> {
    model: &'a EpidemicModel,
    kind: PgfModel,
    f_v: f64,
    active: Vec<usize>,
}

impl<'a> PgfEvaluator<'a> {
    pub fn new(model: &'a EpidemicModel, kind: PgfModel, f_v: f64) -> Result<Self> {
        check_coverage(f_v)?;
        let f_v = match kind {
            PgfModel::Forward | PgfModel::Backward => 0.0,
            _ => f_v,
        };
        Ok(Self {
            model,
            kind,
            f_v,
            active: model.active_positions(kind),
        })
    }

    pub fn kind(&self) -> PgfModel {
        self.kind
    }

    /// 1-based type labels of the reduced coordinates.
    pub fn types(&self) -> Vec<usize> {
        self.active.iter().map(|p| p + 1).collect()
    }

    /// Embeds a reduced vector into the full type space, absent types at 1.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![1.0; self.kind.full_dim()];
        for (&pos, &x) in self.active.iter().zip(reduced) {
            full[pos] = x;
        }
        full
    }

    /// Ancestor generating function at a reduced vector.
    pub fn ancestor(&self, reduced: &[f64]) -> f64 {
        self.model
            .ancestor_pgf(self.kind, self.f_v, &self.expand(reduced))
            .expect("dimensions are consistent")
    }

    fn component(&self, pos: usize, z: &[f64]) -> f64 {
        let m = self.model;
        let f_v = self.f_v;
        let tri = || m.triangle_branch().expect("active triangle type");
        let single = || m.single_branch().expect("active single type");
        match (self.kind, pos) {
            (PgfModel::Forward, 0) => m.forward_plain(tri(), z, false),
            (PgfModel::Forward, 1) => m.forward_plain(tri(), z, true),
            (PgfModel::Forward, _) => m.forward_plain(single(), z, false),
            (PgfModel::ForwardVacc, 0) => m.forward_vacc(tri(), f_v, z, false),
            (PgfModel::ForwardVacc, 1) => m.forward_vacc(tri(), f_v, z, true),
            (PgfModel::ForwardVacc, _) => m.forward_vacc(single(), f_v, z, false),
            (PgfModel::Backward, 0) => m.backward_plain(single(), z),
            (PgfModel::Backward, _) => m.backward_plain(tri(), z),
            (PgfModel::BackwardVacc, 0) => mixed(f_v, m.backward_vacc_inner(tri(), f_v, z)),
            (PgfModel::BackwardVacc, 1) => m.backward_vacc_inner(tri(), f_v, z),
            (PgfModel::BackwardVacc, _) => mixed(f_v, m.backward_vacc_inner(single(), f_v, z)),
        }
    }
}

impl OffspringPgf for PgfEvaluator<'_> {
    fn dim(&self) -> usize {
        self.active.len()
    }

    fn eval_into(&self, z: &[f64], out: &mut [f64]) {
        let full = self.expand(z);
        for (o, &pos) in out.iter_mut().zip(&self.active) {
            *o = self.component(pos, &full);
        }
    }
}
